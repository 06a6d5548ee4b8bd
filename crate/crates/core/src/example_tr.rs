//! The trace example: `W = 0`, `Ψ₁ = 0`, `Ψ₂ = |ν·Ja|`, for which
//! `W₂(L, M) = |tr((L − M)(·, a))|`. Inclusion energies over boxes are
//! integrated exactly face by face.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cellformulas::{evaluate_family, CellProblem, Family};
use crate::constructions::Sd2Triple;
use crate::densities::{ComponentSpec, DensitySpec, DensityTriple};
use crate::error::{Error, Result};
use crate::fields::CellwiseField;
use crate::quadrature::integral_abs_affine;
use crate::tensor::{norm, slope_to_tensor3};

/// `M ∈ ℝ^{N×N×N}` seen as the bilinear map `M(y, z)_i = Σ M_ijk y_j z_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bilinear3 {
    pub n: usize,
    pub entries: Vec<f64>,
}

impl Bilinear3 {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n * n {
            return Err(Error::ShapeMismatch(format!("a bilinear map on ℝ^{n} needs {} entries", n * n * n)));
        }
        Ok(Self { n, entries })
    }

    pub fn zero(n: usize) -> Self {
        Self { n, entries: vec![0.0; n * n * n] }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries[(i * self.n + j) * self.n + k]
    }

    pub fn apply(&self, y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n).flat_map(|j| (0..n).map(move |k| (j, k))).map(|(j, k)| self.get(i, j, k) * y[j] * z[k]).sum()
            })
            .collect()
    }

    /// `M(·, a)` as a row-major N×N matrix.
    pub fn slice(&self, a: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n * n).map(|ij| (0..n).map(|k| self.entries[ij * n + k] * a[k]).sum()).collect()
    }

    pub fn sub(&self, other: &Bilinear3) -> Bilinear3 {
        Bilinear3 { n: self.n, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect() }
    }
}

fn check_unit(a: &[f64], n: usize) -> Result<()> {
    if a.len() != n || (norm(a) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("a must be a unit vector in ℝ^{n}")));
    }
    Ok(())
}

fn trace(b: &[f64], n: usize) -> f64 {
    (0..n).map(|i| b[i * n + i]).sum()
}

/// `|Σ_{i,j} (L_iij − M_iij) a_j|`.
pub fn closed_form_w2(l: &Bilinear3, m: &Bilinear3, a: &[f64]) -> Result<f64> {
    check_unit(a, l.n)?;
    if m.n != l.n {
        return Err(Error::ShapeMismatch("L and M must act on the same space".into()));
    }
    Ok(trace(&l.sub(m).slice(a), l.n).abs())
}

/// `{c + Σ t_i v_i : |t_i| ≤ h_i}`; `basis` holds the edge directions
/// `v_i` as columns (row-major), the identity when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDescriptor {
    pub center: Vec<f64>,
    pub half: Vec<f64>,
    #[serde(default)]
    pub basis: Option<Vec<f64>>,
}

impl BoxDescriptor {
    pub fn axis_aligned(center: Vec<f64>, half: Vec<f64>) -> Self {
        Self { center, half, basis: None }
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        let n = self.center.len();
        match &self.basis {
            Some(b) => DMatrix::from_row_slice(n, n, b),
            None => DMatrix::identity(n, n),
        }
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let n = self.center.len();
        let v = self.basis_matrix();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|r| {
                        self.center[r]
                            + (0..n)
                                .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 } * self.half[i] * v[(r, i)])
                                .sum::<f64>()
                    })
                    .collect()
            })
            .collect()
    }

    /// Closure inside the open cube `(−1/2, 1/2)^N`.
    pub fn compactly_contained(&self) -> bool {
        self.half.iter().all(|h| *h > 0.0) && self.vertices().iter().flatten().all(|x| x.abs() < 0.5)
    }

    pub fn volume(&self) -> f64 {
        self.basis_matrix().determinant().abs() * self.half.iter().map(|h| 2.0 * h).product::<f64>()
    }
}

/// `|R|⁻¹ ∫_{∂R} |ν · Δ(x, a)|`, exact: on each face the integrand is the
/// absolute value of an affine function of the face coordinates.
pub fn inclusion_energy(l: &Bilinear3, m: &Bilinear3, a: &[f64], r: &BoxDescriptor) -> Result<f64> {
    let n = l.n;
    check_unit(a, n)?;
    if r.center.len() != n || r.half.len() != n {
        return Err(Error::ShapeMismatch("box dimension does not match".into()));
    }
    if !r.compactly_contained() {
        return Err(Error::InvalidArgument("the box must be compactly contained in the unit cube".into()));
    }
    let b = DMatrix::from_row_slice(n, n, &l.sub(m).slice(a));
    let v = r.basis_matrix();
    let w = v.clone().try_inverse().ok_or_else(|| Error::InvalidArgument("degenerate box basis".into()))?;
    let det = v.determinant().abs();
    let vol = r.volume();
    let c = nalgebra::DVector::from_column_slice(&r.center);
    let mut total = 0.0;
    for i in 0..n {
        let wi = w.row(i).transpose();
        let wlen = wi.norm();
        let tangential: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let half: Vec<f64> = tangential.iter().map(|&j| r.half[j]).collect();
        // face area per unit of face coordinates
        let jacobian = det * wlen;
        for sign in [-1.0, 1.0] {
            let nu = &wi * (sign / wlen);
            let base = &c + v.column(i) * (sign * r.half[i]);
            let c0 = nu.dot(&(&b * &base));
            let slopes: Vec<f64> = tangential.iter().map(|&j| nu.dot(&(&b * v.column(j)))).collect();
            total += jacobian * integral_abs_affine(c0, &slopes, &half);
        }
    }
    Ok(total / vol)
}

/// Distinct eigenvalues with nonzero real parts and nonzero trace.
pub fn is_in_s(b: &[f64], n: usize) -> bool {
    let m = DMatrix::from_row_slice(n, n, b);
    let eig = m.complex_eigenvalues();
    let distinct = (0..n).all(|i| (i + 1..n).all(|j| (eig[i] - eig[j]).norm() > 1e-9));
    distinct && eig.iter().all(|z| z.re.abs() > 1e-9) && trace(b, n).abs() > 1e-9
}

/// Unit real eigenvectors of `b` as columns, when the spectrum is real and
/// simple; `None` otherwise.
pub fn real_eigenbasis(b: &[f64], n: usize) -> Option<Vec<f64>> {
    let m = DMatrix::from_row_slice(n, n, b);
    let eig = m.clone().complex_eigenvalues();
    if eig.iter().any(|z| z.im.abs() > 1e-12) {
        return None;
    }
    if (0..n).any(|i| (i + 1..n).any(|j| (eig[i].re - eig[j].re).abs() <= 1e-9)) {
        return None;
    }
    let mut cols = DMatrix::zeros(n, n);
    for (k, z) in eig.iter().enumerate() {
        let shifted = &m - DMatrix::identity(n, n) * z.re;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t?;
        let (idx, _) = svd.singular_values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
        let v = vt.row(idx).transpose();
        cols.set_column(k, &(v.clone() / v.norm()));
    }
    if cols.determinant().abs() < 1e-8 {
        return None;
    }
    Some((0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| cols[(r, c)]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxFamily {
    #[default]
    AxisAligned,
    /// Parallelepipeds along the eigenvectors of `Δ(·, a)`, falling back to
    /// axis-aligned boxes without a real simple spectrum.
    Eigenbasis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub family: BoxFamily,
    /// Whether the eigenbasis was used.
    pub eigenbasis: bool,
    pub boxes: usize,
    pub min: f64,
    pub max: f64,
    pub best: BoxDescriptor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub closed_form: f64,
    pub best_upper: f64,
    pub gap: f64,
    pub lower_bound_ok: bool,
    #[serde(rename = "in_S")]
    pub in_s: bool,
    pub family_stats: FamilyStats,
}

/// Boxes of the family: half-sides from a grid of aspect ratios and a few
/// centres, scaled to sit inside the cube.
pub fn box_family(n: usize, basis: Option<Vec<f64>>) -> Vec<BoxDescriptor> {
    let ratios = [1.0, 0.5, 2.0, 0.25, 4.0];
    let offsets = [0.0, 0.1, -0.1];
    let mut out = Vec::new();
    let combos = ratios.len().pow(n as u32 - 1);
    for flat in 0..combos {
        let mut half = vec![1.0; n];
        let mut rest = flat;
        for h in half.iter_mut().skip(1) {
            *h = ratios[rest % ratios.len()];
            rest /= ratios.len();
        }
        for off in offsets {
            let center: Vec<f64> = (0..n).map(|k| if k == 0 { off } else { off / 2.0 }).collect();
            let mut r = BoxDescriptor { center, half: half.clone(), basis: basis.clone() };
            let reach = r.vertices().iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            let centre_reach = r.center.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let s = (0.45 - centre_reach) / (reach - centre_reach);
            r.half.iter_mut().for_each(|h| *h *= s);
            if r.compactly_contained() {
                out.push(r);
            }
        }
    }
    out
}

/// Closed form against the best box of the family, with the lower-bound
/// check `energy ≥ closed form − tolerance` on every box.
pub fn verify_example(
    l: &Bilinear3,
    m: &Bilinear3,
    a: &[f64],
    family: BoxFamily,
    tolerance: f64,
) -> Result<ExampleReport> {
    let n = l.n;
    let closed_form = closed_form_w2(l, m, a)?;
    let b = l.sub(m).slice(a);
    let basis = match family {
        BoxFamily::AxisAligned => None,
        BoxFamily::Eigenbasis => real_eigenbasis(&b, n),
    };
    let eigenbasis = basis.is_some();
    let boxes = box_family(n, basis);
    let energies = boxes.iter().map(|r| inclusion_energy(l, m, a, r)).collect::<Result<Vec<_>>>()?;
    let (best_idx, best_upper) = energies
        .iter()
        .copied()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .ok_or_else(|| Error::NoAdmissibleCompetitor { problem: "empty box family".into() })?;
    let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ExampleReport {
        closed_form,
        best_upper,
        gap: best_upper - closed_form,
        lower_bound_ok: energies.iter().all(|e| *e >= closed_form - tolerance),
        in_s: is_in_s(&b, n),
        family_stats: FamilyStats {
            family,
            eigenbasis,
            boxes: boxes.len(),
            min: best_upper,
            max,
            best: boxes[best_idx].clone(),
        },
    })
}

/// `W = 0`, `Ψ₁ = 0`, `Ψ₂ = |ν·Ja|` on `ℝ^N`.
pub fn example_densities(a: &[f64]) -> Result<DensityTriple> {
    let n = a.len();
    let params = (1..=n).map(|k| (format!("a{k}"), a[k - 1])).collect();
    DensitySpec {
        w: Some(ComponentSpec::catalog("w_zero")),
        psi1: Some(ComponentSpec::expression("0")),
        psi2: Some(ComponentSpec::Catalog(crate::densities::CatalogSpec { catalog: "psi2_proj".into(), params })),
    }
    .build(n, n)
}

/// `∫ |tr((∇G − Γ)(·, a))|` cell by cell.
pub fn bulk_relaxed_energy_example(sd2: &Sd2Triple, a: &[f64]) -> Result<f64> {
    let n = sd2.n();
    if sd2.d() != n {
        return Err(Error::ShapeMismatch("the trace example needs d = N".into()));
    }
    check_unit(a, n)?;
    let g = sd2.big_g();
    let domain = g.domain();
    let vol = domain.cell_volume();
    let terms: Vec<f64> = (0..domain.n_cells())
        .map(|cell| {
            let dg = Bilinear3 { n, entries: slope_to_tensor3(g.cell_slope(cell), n, n) };
            let gamma = Bilinear3 { n, entries: sd2.gamma().cell_value(cell).to_vec() };
            closed_form_w2(&dg, &gamma, a).map(|v| v * vol)
        })
        .collect::<Result<_>>()?;
    Ok(crate::energy::pairwise_sum(&terms))
}

/// Energies of `count` random admissible competitors: parallelepipeds
/// (exact) and grid laminates for the `W₂` cell problem.
pub fn random_competitor_energies(
    l: &Bilinear3,
    m: &Bilinear3,
    a: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<(String, f64)>> {
    let n = l.n;
    check_unit(a, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let densities = example_densities(a)?;
    let problem = CellProblem::w2(vec![0.0; n], vec![0.0; n * n], l.entries.clone(), m.entries.clone(), n);
    let resolution = 8;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if out.len() % 2 == 0 {
            let mut basis: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for c in 0..n {
                let len = (0..n).map(|r| basis[r * n + c].powi(2)).sum::<f64>().sqrt();
                (0..n).for_each(|r| basis[r * n + c] /= len);
            }
            let r = BoxDescriptor {
                center: (0..n).map(|_| rng.gen_range(-0.2..0.2)).collect(),
                half: (0..n).map(|_| rng.gen_range(0.01..0.2)).collect(),
                basis: Some(basis),
            };
            if r.compactly_contained() && r.volume() > 1e-6 {
                out.push(("box".to_string(), inclusion_energy(l, m, a, &r)?));
            }
        } else {
            let half = resolution / 2;
            let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(1..half) as f64).collect();
            let axis = rng.gen_range(0..n);
            p.push(axis as f64);
            p.push(rng.gen_range(1..(2.0 * p[axis]) as usize) as f64);
            p.push(rng.gen_range(-2.0..2.0));
            if let Some(e) = evaluate_family(&problem, &densities, Family::Laminate, resolution, &p) {
                if e.admissible {
                    out.push(("laminate".to_string(), e.total));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{BoxDomain, PiecewiseAffineField, PiecewiseConstantField, ValueShape};

    fn example_m() -> Bilinear3 {
        let mut m = Bilinear3::zero(2);
        m.entries[0] = 1.0; // M₁₁₁
        m.entries[6] = 1.0; // M₂₂₁
        m
    }

    /// `Δ` with `Δ(·, e₁) = b`.
    fn delta_with_slice(b: [f64; 4]) -> (Bilinear3, Bilinear3) {
        let mut l = Bilinear3::zero(2);
        for ij in 0..4 {
            l.entries[ij * 2] = b[ij];
        }
        (l, Bilinear3::zero(2))
    }

    #[test]
    fn closed_form_cases() {
        let e1 = [1.0, 0.0];
        assert_eq!(closed_form_w2(&example_m(), &example_m(), &e1).unwrap(), 0.0);
        assert_eq!(closed_form_w2(&Bilinear3::zero(2), &example_m(), &e1).unwrap(), 2.0);
        // brute-force contraction
        let m = example_m();
        let brute: f64 = (0..2).map(|i| m.apply(&crate::tensor::unit(2, i), &e1)[i]).sum();
        assert_eq!(brute, 2.0);
        assert!(closed_form_w2(&m, &m, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn slice_contracts_the_second_argument() {
        let m = Bilinear3::new(2, (0..8).map(|v| v as f64 * 0.5 - 1.0).collect()).unwrap();
        let (y, a) = ([0.3, -1.2], [0.6, 0.8]);
        let s = m.slice(&a);
        let sy: Vec<f64> = (0..2).map(|i| s[i * 2] * y[0] + s[i * 2 + 1] * y[1]).collect();
        let direct = m.apply(&y, &a);
        assert!(crate::tensor::max_abs_diff(&sy, &direct) < 1e-15);
    }

    #[test]
    fn square_inclusions() {
        let e1 = [1.0, 0.0];
        for (b, expect) in [([1.0, 0.0, 0.0, 1.0], 2.0), ([1.0, 0.0, 0.0, 2.0], 3.0), ([1.0, 0.0, 0.0, -2.0], 3.0)] {
            let (l, m) = delta_with_slice(b);
            for r in [0.1, 0.2, 0.4] {
                let e = inclusion_energy(&l, &m, &e1, &BoxDescriptor::axis_aligned(vec![0.0, 0.0], vec![r / 2.0; 2]))
                    .unwrap();
                assert!((e - expect).abs() < 1e-12, "{b:?} {r}: {e}");
            }
        }
        let (l, m) = delta_with_slice([1.0, 0.0, 0.0, 1.0]);
        assert!(inclusion_energy(&l, &m, &e1, &BoxDescriptor::axis_aligned(vec![0.3, 0.0], vec![0.25, 0.1])).is_err());
    }

    #[test]
    fn verify_cases() {
        let e1 = [1.0, 0.0];
        let (l, m) = delta_with_slice([1.0, 0.0, 0.0, 1.0]);
        let r = verify_example(&l, &m, &e1, BoxFamily::AxisAligned, 1e-9).unwrap();
        assert!(r.gap.abs() < 1e-9 && r.lower_bound_ok);
        let (l, m) = delta_with_slice([1.0, 0.0, 0.0, 2.0]);
        let r = verify_example(&l, &m, &e1, BoxFamily::Eigenbasis, 1e-9).unwrap();
        assert!(r.gap.abs() < 1e-6 && r.lower_bound_ok && r.in_s);
        let (l, m) = delta_with_slice([1.0, 0.0, 0.0, -2.0]);
        let r = verify_example(&l, &m, &e1, BoxFamily::Eigenbasis, 1e-9).unwrap();
        assert!((r.gap - 2.0).abs() < 1e-9 && r.lower_bound_ok);
    }

    #[test]
    fn set_s_membership() {
        assert!(is_in_s(&[1.0, 0.0, 0.0, 2.0], 2));
        assert!(!is_in_s(&[1.0, 0.0, 0.0, 1.0], 2));
        assert!(!is_in_s(&[1.0, 0.0, 0.0, -1.0], 2));
    }

    #[test]
    fn bulk_integral() {
        let dom = BoxDomain::unit(2, 2);
        let e1 = [1.0, 0.0];
        let zero_g = PiecewiseAffineField::zero(dom.clone(), ValueShape::vector(2));
        let sd2 = |g_slope: &[f64], gamma: PiecewiseConstantField| {
            Sd2Triple::new(
                zero_g.clone(),
                PiecewiseAffineField::from_cells(dom.clone(), ValueShape::matrix(2, 2), |_| {
                    (vec![0.0; 4], g_slope.to_vec())
                })
                .unwrap(),
                gamma,
            )
            .unwrap()
        };
        let gamma0 = PiecewiseConstantField::uniform(dom.clone(), ValueShape::tensor3(2, 2), &[0.0; 8]).unwrap();
        let p = PiecewiseConstantField::uniform(dom.clone(), ValueShape::tensor3(2, 2), &example_m().entries).unwrap();
        assert_eq!(bulk_relaxed_energy_example(&sd2(&[0.0; 8], gamma0.clone()), &e1).unwrap(), 0.0);
        assert!((bulk_relaxed_energy_example(&sd2(&[0.0; 8], p), &e1).unwrap() - 2.0).abs() < 1e-15);
        let half = PiecewiseConstantField::from_fn(dom.clone(), ValueShape::tensor3(2, 2), |c| {
            if c[0] < 0.5 {
                example_m().entries
            } else {
                vec![0.0; 8]
            }
        })
        .unwrap();
        assert!((bulk_relaxed_energy_example(&sd2(&[0.0; 8], half), &e1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_competitors_respect_the_bound() {
        let e1 = [1.0, 0.0];
        let energies = random_competitor_energies(&Bilinear3::zero(2), &example_m(), &e1, 40, 7).unwrap();
        assert!(energies.iter().all(|(_, e)| *e >= 2.0 - 1e-9));
        assert!(energies.iter().any(|(k, _)| k == "laminate"));
    }
}
