use serde::{Deserialize, Serialize};

use super::{CellProblem, Variant};
use crate::densities::DensityTriple;
use crate::fields::{BoundaryData, BoxDomain, CellwiseField, FacetKind, PiecewiseAffineField, ValueShape};
use crate::quadrature::box_rule;
use crate::tensor::{max_abs_diff, slope_to_tensor3, tensor3_to_slope, unit, Frame};

/// Trace and gradient constraints must hold to this accuracy.
pub const ADMISSIBILITY_TOLERANCE: f64 = 1e-10;

/// Facets whose jump is below this everywhere are skipped.
const JUMP_FLOOR: f64 = 1e-14;

/// A competitor field in the local coordinates of the cell: `Q` is the
/// centred unit cube and `y = R z` with `R e_N = ν` for the `γ` problems.
/// The boundary data of `field` is the prescribed trace.
#[derive(Debug, Clone)]
pub struct Competitor {
    pub field: PiecewiseAffineField,
    pub frame: Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompetitorEnergy {
    pub bulk: f64,
    pub interfacial: f64,
    pub total: f64,
    pub admissible: bool,
    /// Largest trace mismatch on `∂Q`.
    pub trace_error: f64,
    /// Violation of the gradient constraint.
    pub gradient_error: f64,
}

/// What the variant prescribes, in local coordinates.
pub(crate) struct Setup {
    pub frame: Frame,
    pub shape: ValueShape,
    pub boundary: BoundaryData,
}

pub(crate) fn setup(problem: &CellProblem) -> Setup {
    let (d, n) = (problem.d, problem.n);
    match &problem.variant {
        Variant::W1 { .. } => {
            Setup { frame: Frame::identity(n), shape: ValueShape::vector(d), boundary: BoundaryData::zero(d, n) }
        }
        Variant::Gamma1 { lambda, nu } => Setup {
            frame: Frame::aligned_to(nu),
            shape: ValueShape::vector(d),
            boundary: BoundaryData::Step { payload: lambda.clone(), axis: n - 1, offset: 0.0 },
        },
        Variant::W2 { l, .. } => Setup {
            frame: Frame::identity(n),
            shape: ValueShape::matrix(d, n),
            boundary: BoundaryData::linear(tensor3_to_slope(l, d, n), n),
        },
        Variant::Gamma2 { big_lambda, nu, .. } => Setup {
            frame: Frame::aligned_to(nu),
            shape: ValueShape::matrix(d, n),
            boundary: BoundaryData::Step { payload: big_lambda.clone(), axis: n - 1, offset: 0.0 },
        },
    }
}

pub(crate) fn cube(n: usize, resolution: usize) -> BoxDomain {
    BoxDomain::centered_unit(n, resolution)
}

impl Competitor {
    /// Physical gradient of cell `cell`, derivative-last.
    fn physical_slope(&self, cell: usize) -> Vec<f64> {
        self.frame.slope_to_physical(self.field.cell_slope(cell))
    }

    /// Bulk and interfacial energy at the frozen point, with the
    /// admissibility check of the variant. Jumps are facet means, as in
    /// the initial energy.
    pub fn evaluate(&self, problem: &CellProblem, densities: &DensityTriple) -> CompetitorEnergy {
        let (d, n) = (problem.d, problem.n);
        let x = &problem.x;
        let domain = self.field.domain();
        let vol = domain.cell_volume();
        let cells = domain.n_cells();

        let mut bulk = 0.0;
        let mut mean_gradient = vec![0.0; self.field.shape().len() * n];
        let mut gradient_error: f64 = 0.0;
        for cell in 0..cells {
            let slope = self.physical_slope(cell);
            match &problem.variant {
                Variant::W1 { a } => gradient_error = gradient_error.max(max_abs_diff(&slope, a)),
                Variant::Gamma1 { .. } => {
                    gradient_error = gradient_error.max(slope.iter().fold(0.0, |m, v| m.max(v.abs())))
                }
                Variant::W2 { a, .. } => {
                    let t = slope_to_tensor3(&slope, d, n);
                    bulk += densities.w(x, a, &t) * vol;
                    mean_gradient.iter_mut().zip(&t).for_each(|(m, v)| *m += v * vol);
                }
                Variant::Gamma2 { a, .. } => {
                    let t = slope_to_tensor3(&slope, d, n);
                    bulk += densities.w_recession(x, a, &t) * vol;
                    mean_gradient.iter_mut().zip(&t).for_each(|(m, v)| *m += v * vol);
                }
            }
        }
        match &problem.variant {
            Variant::W2 { m, .. } => gradient_error = max_abs_diff(&mean_gradient, m),
            Variant::Gamma2 { .. } => gradient_error = mean_gradient.iter().fold(0.0, |m, v| m.max(v.abs())),
            _ => {}
        }

        let first_order = matches!(problem.variant, Variant::W1 { .. } | Variant::Gamma1 { .. });
        let boundary = self.field.boundary().expect("competitors carry their trace");
        let mut interfacial = 0.0;
        let mut trace_error: f64 = 0.0;
        for facet in domain.facets() {
            let centroid = domain.facet_centroid(&facet);
            let half = domain.facet_half_widths(&facet);
            let tangential: Vec<usize> = (0..n).filter(|&k| k != facet.axis).collect();
            let th: Vec<f64> = tangential.iter().map(|&k| half[k]).collect();
            let point = |z: &[f64]| {
                let mut y = centroid.clone();
                for (t, &k) in tangential.iter().enumerate() {
                    y[k] += z[t];
                }
                y
            };
            let (cell, other) = crate::fields::facet_cells(domain, &facet);
            let jump_at = |y: &[f64]| -> Vec<f64> {
                let inner = self.field.value_in_cell(cell, y);
                match facet.kind {
                    FacetKind::Interior => {
                        let plus = self.field.value_in_cell(other.expect("interior facet"), y);
                        plus.iter().zip(&inner).map(|(p, m)| p - m).collect()
                    }
                    FacetKind::Upper => boundary.value_at(y).iter().zip(&inner).map(|(b, i)| b - i).collect(),
                    FacetKind::Lower => inner.iter().zip(boundary.value_at(y)).map(|(i, b)| i - b).collect(),
                }
            };
            // zero trace for W1 is imposed by charging the mismatch on ∂Q
            if facet.kind != FacetKind::Interior && !matches!(problem.variant, Variant::W1 { .. }) {
                for (z, _) in box_rule(&th, 2) {
                    let j = jump_at(&point(&z));
                    trace_error = trace_error.max(j.iter().fold(0.0, |m, v| m.max(v.abs())));
                }
            }
            let jump: Vec<f64> = match facet.kind {
                FacetKind::Interior => jump_at(&centroid),
                FacetKind::Upper => {
                    let inner = self.field.value_in_cell(cell, &centroid);
                    boundary.facet_mean(domain, &facet).iter().zip(&inner).map(|(b, i)| b - i).collect()
                }
                FacetKind::Lower => {
                    let inner = self.field.value_in_cell(cell, &centroid);
                    inner.iter().zip(boundary.facet_mean(domain, &facet)).map(|(i, b)| i - b).collect()
                }
            };
            if jump.iter().all(|v| v.abs() <= JUMP_FLOOR) {
                continue;
            }
            let normal = self.frame.to_physical(&unit(n, facet.axis));
            let psi = if first_order { densities.psi1(x, &jump, &normal) } else { densities.psi2(x, &jump, &normal) };
            interfacial += psi * domain.facet_area(&facet);
        }
        let admissible = trace_error <= ADMISSIBILITY_TOLERANCE && gradient_error <= ADMISSIBILITY_TOLERANCE;
        CompetitorEnergy { bulk, interfacial, total: bulk + interfacial, admissible, trace_error, gradient_error }
    }
}
