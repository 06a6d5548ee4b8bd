use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::CellwiseField;
use crate::error::{Error, Result};
use crate::quadrature::{box_rule, integral_abs_affine, integral_abs_quadratic_1d};
use crate::tensor::norm;

/// `∫_Ω |f − g|`, Frobenius norm pointwise.
///
/// The two fields must live on the same box; one grid must refine the
/// other. Scalar cellwise affine differences are integrated exactly, as
/// are one-dimensional quadratic ones; everything else uses a 5-point
/// tensor Gauss rule per cell.
pub fn l1_distance(f: &dyn CellwiseField, g: &dyn CellwiseField) -> Result<f64> {
    if f.shape() != g.shape() {
        return Err(Error::ShapeMismatch(format!(
            "value shapes {:?} and {:?} differ",
            f.shape().dims(),
            g.shape().dims()
        )));
    }
    let (fd, gd) = (f.domain(), g.domain());
    let fine = if fd.refinement_factors(gd).is_some() {
        fd
    } else if gd.refinement_factors(fd).is_some() {
        gd
    } else {
        return Err(Error::ShapeMismatch("grids are not nested refinements of one box".into()));
    };
    let n = fine.dim();
    let m = f.shape().len();
    let half = fine.cell_half_widths();
    let per_cell: Vec<f64> = (0..fine.n_cells())
        .into_par_iter()
        .map(|cell| {
            let c = fine.cell_center(cell);
            let (cf, cg) = (fd.locate(&c), gd.locate(&c));
            let v: Vec<f64> = f.value_in_cell(cf, &c).iter().zip(g.value_in_cell(cg, &c)).map(|(a, b)| a - b).collect();
            let s: Vec<f64> =
                f.gradient_in_cell(cf, &c).iter().zip(g.gradient_in_cell(cg, &c)).map(|(a, b)| a - b).collect();
            let h = match (f.hessian_in_cell(cf), g.hessian_in_cell(cg)) {
                (None, None) => None,
                (a, b) => {
                    let len = m * n * n;
                    let a = a.unwrap_or_else(|| vec![0.0; len]);
                    let b = b.unwrap_or_else(|| vec![0.0; len]);
                    Some(a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<f64>>())
                }
            };
            let curved = h.as_ref().is_some_and(|h| h.iter().any(|v| *v != 0.0));
            if m == 1 && !curved {
                return integral_abs_affine(v[0], &s, &half);
            }
            if m == 1 && n == 1 {
                let h = h.expect("curved implies hessian");
                return integral_abs_quadratic_1d(v[0], s[0], 0.5 * h[0], half[0]);
            }
            if s.iter().all(|x| *x == 0.0) && !curved {
                return norm(&v) * fine.cell_volume();
            }
            box_rule(&half, 5)
                .iter()
                .map(|(z, w)| {
                    let val: Vec<f64> = (0..m)
                        .map(|i| {
                            let mut x = v[i];
                            for k in 0..n {
                                x += s[i * n + k] * z[k];
                                if let Some(h) = &h {
                                    for j in 0..n {
                                        x += 0.5 * h[(i * n + k) * n + j] * z[k] * z[j];
                                    }
                                }
                            }
                            x
                        })
                        .collect();
                    w * norm(&val)
                })
                .sum()
        })
        .collect();
    Ok(per_cell.iter().sum())
}

/// `∫_Ω |f|`.
pub fn l1_norm(f: &dyn CellwiseField) -> f64 {
    let zero = super::field::PiecewiseConstantField::uniform(
        f.domain().clone(),
        f.shape().clone(),
        &vec![0.0; f.shape().len()],
    )
    .expect("consistent sizes");
    l1_distance(f, &zero).expect("same grid and shape")
}

/// `coefficient · Π y_k^{exponents_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coefficient: f64,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.exponents.iter().zip(y).fold(self.coefficient, |acc, (e, v)| acc * v.powi(*e as i32))
    }
}

/// Test polynomial for weak-star pairings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial(pub Vec<Monomial>);

impl Polynomial {
    pub fn constant(n: usize, c: f64) -> Self {
        Polynomial(vec![Monomial { coefficient: c, exponents: vec![0; n] }])
    }

    pub fn monomial(exponents: Vec<u32>) -> Self {
        Polynomial(vec![Monomial { coefficient: 1.0, exponents }])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.0.iter().map(|m| m.eval(y)).sum()
    }
}

/// All monomials of total degree ≤ 2 in `n` variables.
pub fn monomial_battery(n: usize) -> Vec<Polynomial> {
    let mut out = vec![Polynomial::monomial(vec![0; n])];
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        out.push(Polynomial::monomial(e));
    }
    for i in 0..n {
        for j in i..n {
            let mut e = vec![0; n];
            e[i] += 1;
            e[j] += 1;
            out.push(Polynomial::monomial(e));
        }
    }
    out
}

/// `∫_Ω φ · field_component`, exact for fields of cellwise degree ≤ 2 and
/// test polynomials of degree ≤ 3 (3-point Gauss per axis and cell).
pub fn weak_star_pairing(field: &dyn CellwiseField, phi: &Polynomial, component: usize) -> f64 {
    let domain = field.domain();
    let rule = box_rule(&domain.cell_half_widths(), 3);
    let per_cell: Vec<f64> = (0..domain.n_cells())
        .into_par_iter()
        .map(|cell| {
            let c = domain.cell_center(cell);
            rule.iter()
                .map(|(z, w)| {
                    let y: Vec<f64> = c.iter().zip(z).map(|(a, b)| a + b).collect();
                    w * phi.eval(&y) * field.value_in_cell(cell, &y)[component]
                })
                .sum()
        })
        .collect();
    per_cell.iter().sum()
}
