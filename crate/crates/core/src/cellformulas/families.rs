//! Competitor families. Integer parameters count grid cells; continuous
//! ones are swept on nested dyadic grids whose depth is the search level.

use super::competitor::{cube, setup, Competitor};
use super::{CellProblem, Variant};
use crate::constructions::{elementary_jump, staircase_with_slabs};
use crate::fields::{BoxDomain, CellwiseField, PiecewiseAffineField, ValueShape};
use crate::tensor::tensor3_to_slope;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Per-axis sawtooth with `s_j` slabs along axis `j`.
    Staircase,
    /// Single plane carrying the whole jump.
    Elementary,
    /// Elementary jump with a box on top of the plane where only a fraction
    /// `θ` of the jump is taken, the rest on the box lid.
    /// Params `[a, b, θ]`: lateral half-width and height in cells.
    SplitBox,
    /// `u = L·y`.
    Affine,
    /// `u = L·y` outside a box `R`, `|R|⁻¹(M − (1−|R|)L)·y` inside.
    /// Params `[lo_0, hi_0, …]` in cells.
    Inclusion,
    /// Two-phase layers inside a centred box, added to the inclusion (or
    /// elementary) field. Params `[s_0.., axis, m, t]`: half-widths in
    /// cells, layer normal, cells of the first phase, amplitude.
    Laminate,
}

pub const FAMILIES: [Family; 6] =
    [Family::Staircase, Family::Elementary, Family::SplitBox, Family::Affine, Family::Inclusion, Family::Laminate];

const MAX_SLABS: i64 = 64;

/// Range of one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Param {
    Int { lo: i64, hi: i64 },
    Real { lo: f64, hi: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Staircase => "staircase",
            Family::Elementary => "elementary",
            Family::SplitBox => "split_box",
            Family::Affine => "affine",
            Family::Inclusion => "inclusion",
            Family::Laminate => "laminate",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        FAMILIES.iter().copied().find(|f| f.name() == name)
    }

    /// Families that produce competitors for the variant.
    pub fn for_variant(variant: &Variant) -> &'static [Family] {
        match variant {
            Variant::W1 { .. } => &[Family::Staircase],
            Variant::Gamma1 { .. } => &[Family::Elementary, Family::SplitBox],
            Variant::W2 { .. } => &[Family::Affine, Family::Inclusion, Family::Laminate],
            Variant::Gamma2 { .. } => &[Family::Elementary, Family::SplitBox, Family::Laminate],
        }
    }

    pub(crate) fn params(&self, problem: &CellProblem, resolution: usize) -> Vec<Param> {
        let n = problem.n;
        let half = (resolution / 2) as i64;
        match self {
            Family::Staircase => vec![Param::Int { lo: 1, hi: MAX_SLABS }; n],
            Family::Elementary | Family::Affine => Vec::new(),
            Family::SplitBox => vec![
                Param::Int { lo: 1, hi: if n == 1 { 1 } else { half - 1 } },
                Param::Int { lo: 1, hi: half - 1 },
                Param::Real { lo: 0.0, hi: 1.0 },
            ],
            Family::Inclusion => {
                let r = resolution as i64;
                (0..2 * n)
                    .map(|k| if k % 2 == 0 { Param::Int { lo: 1, hi: r - 2 } } else { Param::Int { lo: 2, hi: r - 1 } })
                    .collect()
            }
            Family::Laminate => {
                let mut p = vec![Param::Int { lo: 1, hi: half - 1 }; n];
                p.push(Param::Int { lo: 0, hi: n as i64 - 1 });
                p.push(Param::Int { lo: 1, hi: 2 * (half - 1) - 1 });
                p.push(Param::Real { lo: -2.0, hi: 2.0 });
                p
            }
        }
    }

    /// Parameter grid at search level `level ≥ 1`; nested in the level.
    pub(crate) fn grid(&self, problem: &CellProblem, resolution: usize, level: usize) -> Vec<Vec<f64>> {
        let n = problem.n;
        let params = self.params(problem, resolution);
        let axes: Vec<Vec<f64>> = params
            .iter()
            .enumerate()
            .map(|(k, p)| match *p {
                Param::Int { lo, hi } => {
                    let hi = if *self == Family::Staircase { hi.min(level as i64) } else { hi };
                    (lo..=hi).map(|v| v as f64).collect()
                }
                Param::Real { lo, hi } => {
                    let cells = 1usize << level;
                    let interior = *self == Family::SplitBox && k == 2;
                    let range = if interior { 1..cells } else { 0..cells + 1 };
                    range.map(|i| lo + (hi - lo) * i as f64 / cells as f64).collect()
                }
            })
            .collect();
        let mut out = vec![Vec::new()];
        for axis in &axes {
            out = out.iter().flat_map(|p| axis.iter().map(move |v| [p.clone(), vec![*v]].concat())).collect();
        }
        out.retain(|p| self.valid(problem, resolution, p));
        if *self == Family::Inclusion && n >= 3 {
            // centred boxes only in three and more dimensions
            let r = resolution as f64;
            out.retain(|p| p.chunks(2).all(|c| c[0] + c[1] == r));
        }
        out
    }

    /// Whether `p` lies in range and satisfies the family's constraints.
    pub(crate) fn valid(&self, problem: &CellProblem, resolution: usize, p: &[f64]) -> bool {
        let params = self.params(problem, resolution);
        if p.len() != params.len() {
            return false;
        }
        let in_range = params.iter().zip(p).all(|(r, v)| match *r {
            Param::Int { lo, hi } => v.fract() == 0.0 && *v >= lo as f64 && *v <= hi as f64,
            Param::Real { lo, hi } => *v >= lo && *v <= hi,
        });
        if !in_range {
            return false;
        }
        match self {
            Family::Inclusion => p.chunks(2).all(|c| c[0] < c[1]),
            Family::SplitBox => p[2] > 0.0 && p[2] < 1.0,
            Family::Laminate => {
                let n = problem.n;
                let axis = p[n] as usize;
                p[n + 1] < 2.0 * p[axis]
            }
            _ => true,
        }
    }

    pub(crate) fn real_mask(&self, problem: &CellProblem, resolution: usize) -> Vec<Option<(f64, f64)>> {
        self.params(problem, resolution)
            .into_iter()
            .map(|p| match p {
                Param::Int { .. } => None,
                Param::Real { lo, hi } => Some((lo, hi)),
            })
            .collect()
    }

    /// Builds the competitor; `None` when the parameters are invalid or
    /// the family does not apply.
    pub(crate) fn build(&self, problem: &CellProblem, resolution: usize, p: &[f64]) -> Option<Competitor> {
        if !Family::for_variant(&problem.variant).contains(self) || !self.valid(problem, resolution, p) {
            return None;
        }
        let s = setup(problem);
        let (d, n) = (problem.d, problem.n);
        let field = match (self, &problem.variant) {
            (Family::Staircase, Variant::W1 { a }) => {
                let slabs: Vec<usize> = p.iter().map(|v| *v as usize).collect();
                staircase_with_slabs(a, d, &slabs, &cube(n, 1)).ok()?
            }
            (Family::Elementary, Variant::Gamma1 { lambda: payload, .. })
            | (Family::Elementary, Variant::Gamma2 { big_lambda: payload, .. }) => {
                elementary_jump(payload, s.shape.clone(), &cube(n, 2)).ok()?
            }
            (Family::SplitBox, Variant::Gamma1 { lambda: payload, .. })
            | (Family::SplitBox, Variant::Gamma2 { big_lambda: payload, .. }) => {
                let domain = cube(n, resolution);
                let h = 1.0 / resolution as f64;
                let (a, b, theta) = (p[0] * h, p[1] * h, p[2]);
                let m = payload.len();
                PiecewiseAffineField::from_cells(domain, s.shape.clone(), |c| {
                    let z = c[n - 1];
                    let in_box = z > 0.0 && z < b && c[..n - 1].iter().all(|v| v.abs() < a);
                    let f = if in_box {
                        theta
                    } else if z > 0.0 {
                        1.0
                    } else {
                        0.0
                    };
                    (payload.iter().map(|v| v * f).collect(), vec![0.0; m * n])
                })
                .ok()?
                .with_boundary(s.boundary.clone())
                .ok()?
            }
            (Family::Affine, Variant::W2 { l, .. }) => {
                let slope = tensor3_to_slope(l, d, n);
                linear_field(&cube(n, 2), s.shape.clone(), &slope).with_boundary(s.boundary.clone()).ok()?
            }
            (Family::Inclusion, Variant::W2 { l, m, .. }) => {
                let domain = cube(n, resolution);
                let cells: Vec<(usize, usize)> = p.chunks(2).map(|c| (c[0] as usize, c[1] as usize)).collect();
                inclusion(&domain, l, m, d, &cells).with_boundary(s.boundary.clone()).ok()?
            }
            (Family::Laminate, Variant::W2 { l, m, .. }) => {
                let domain = cube(n, resolution);
                let half = resolution / 2;
                let cells: Vec<(usize, usize)> =
                    p[..n].iter().map(|v| (half - *v as usize, half + *v as usize)).collect();
                let base = inclusion(&domain, l, m, d, &cells);
                let axis = p[n] as usize;
                // layers stretch the disarrangement K − L along the axis
                let k = inclusion_gradient(l, m, box_fraction(&domain, &cells));
                let dir: Vec<f64> = (0..d * n)
                    .map(|c| {
                        let (i, kk) = (c / n, c % n);
                        k[(i * n + axis) * n + kk] - l[(i * n + axis) * n + kk]
                    })
                    .collect();
                laminate(base, &domain, &cells, axis, p[n + 1] as usize, p[n + 2], &dir)
                    .with_boundary(s.boundary.clone())
                    .ok()?
            }
            (Family::Laminate, Variant::Gamma2 { big_lambda, .. }) => {
                let domain = cube(n, resolution);
                let half = resolution / 2;
                let cells: Vec<(usize, usize)> =
                    p[..n].iter().map(|v| (half - *v as usize, half + *v as usize)).collect();
                let m = d * n;
                let base = PiecewiseAffineField::from_cells(domain.clone(), s.shape.clone(), |c| {
                    let f = if c[n - 1] > 0.0 { 1.0 } else { 0.0 };
                    (big_lambda.iter().map(|v| v * f).collect(), vec![0.0; m * n])
                })
                .ok()?;
                laminate(base, &domain, &cells, p[n] as usize, p[n + 1] as usize, p[n + 2], big_lambda)
                    .with_boundary(s.boundary.clone())
                    .ok()?
            }
            _ => return None,
        };
        Some(Competitor { field, frame: s.frame })
    }
}

fn linear_field(domain: &BoxDomain, shape: ValueShape, slope: &[f64]) -> PiecewiseAffineField {
    let n = domain.dim();
    let m = slope.len() / n;
    PiecewiseAffineField::from_cells(domain.clone(), shape, |c| {
        ((0..m).map(|i| (0..n).map(|j| slope[i * n + j] * c[j]).sum()).collect(), slope.to_vec())
    })
    .expect("consistent sizes")
}

fn in_cells(domain: &BoxDomain, cell: usize, cells: &[(usize, usize)]) -> bool {
    domain.multi_index(cell).iter().zip(cells).all(|(i, (lo, hi))| i >= lo && i < hi)
}

fn box_fraction(domain: &BoxDomain, cells: &[(usize, usize)]) -> f64 {
    cells.iter().enumerate().map(|(k, (lo, hi))| (hi - lo) as f64 / domain.resolution()[k] as f64).product()
}

/// `|R|⁻¹(M − (1−|R|)L)`.
fn inclusion_gradient(l: &[f64], m: &[f64], frac: f64) -> Vec<f64> {
    m.iter().zip(l).map(|(mv, lv)| (mv - (1.0 - frac) * lv) / frac).collect()
}

fn inclusion(domain: &BoxDomain, l: &[f64], m: &[f64], d: usize, cells: &[(usize, usize)]) -> PiecewiseAffineField {
    let n = domain.dim();
    let k = inclusion_gradient(l, m, box_fraction(domain, cells));
    let outside = tensor3_to_slope(l, d, n);
    let inside = tensor3_to_slope(&k, d, n);
    let shape = ValueShape::matrix(d, n);
    let slope_of = |cell: usize| if in_cells(domain, cell, cells) { &inside } else { &outside };
    let value: Vec<f64> = (0..domain.n_cells())
        .flat_map(|cell| {
            let c = domain.cell_center(cell);
            let s = slope_of(cell);
            (0..d * n).map(|i| (0..n).map(|j| s[i * n + j] * c[j]).sum::<f64>()).collect::<Vec<_>>()
        })
        .collect();
    let slope: Vec<f64> = (0..domain.n_cells()).flat_map(|cell| slope_of(cell).clone()).collect();
    PiecewiseAffineField::new(domain.clone(), shape, value, slope).expect("consistent sizes")
}

/// Adds `φ(y_axis)·t·dir` inside the box, `φ` piecewise linear with slopes
/// `1 − θ` then `−θ`, vanishing on the two box faces normal to `axis`.
/// Its gradient integrates to zero.
fn laminate(
    base: PiecewiseAffineField,
    domain: &BoxDomain,
    cells: &[(usize, usize)],
    axis: usize,
    first: usize,
    t: f64,
    dir: &[f64],
) -> PiecewiseAffineField {
    let n = domain.dim();
    let h = domain.cell_size(axis);
    let (lo, hi) = cells[axis];
    let y_lo = domain.lower()[axis] + lo as f64 * h;
    let height = (hi - lo) as f64 * h;
    let y_mid = y_lo + first as f64 * h;
    let theta = first as f64 / (hi - lo) as f64;
    let shape = base.shape().clone();
    let mut value = base.values().to_vec();
    let mut slope = base.slopes().to_vec();
    let m = shape.len();
    for cell in 0..domain.n_cells() {
        if !in_cells(domain, cell, cells) {
            continue;
        }
        let y = domain.cell_center(cell)[axis];
        let (phi, dphi) = if y < y_mid {
            ((1.0 - theta) * (y - y_lo), 1.0 - theta)
        } else {
            ((1.0 - theta) * theta * height - theta * (y - y_mid), -theta)
        };
        for c in 0..m {
            value[cell * m + c] += phi * t * dir[c];
            slope[(cell * m + c) * n + axis] += dphi * t * dir[c];
        }
    }
    PiecewiseAffineField::new(domain.clone(), shape, value, slope).expect("consistent sizes")
}
