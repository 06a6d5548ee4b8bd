use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::{Facet, FacetKind};
use super::field::{facet_cells, CellwiseField};
use crate::tensor::{norm, unit};

/// A facet carrying a jump `[u] = u⁺ − u⁻`, the `+` side lying in the
/// direction of `normal`. Jumps are represented by their facet means,
/// which for cellwise affine fields are the traces at the centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpFacet {
    pub facet: Facet,
    pub centroid: Vec<f64>,
    pub normal: Vec<f64>,
    pub area: f64,
    pub jump: Vec<f64>,
}

impl JumpFacet {
    /// Flips the orientation so the last nonzero normal entry is positive.
    pub fn canonicalize(mut self) -> Self {
        let (normal, jump) = canonical_orientation(&self.normal, &self.jump);
        self.normal = normal;
        self.jump = jump;
        self
    }

    pub fn mass(&self) -> f64 {
        norm(&self.jump) * self.area
    }
}

/// `(ν, [u])` with `ν` flipped (and the jump negated) when its last
/// nonzero component is negative.
pub fn canonical_orientation(normal: &[f64], jump: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let flip = normal.iter().rev().find(|v| **v != 0.0).is_some_and(|v| *v < 0.0);
    if flip {
        (normal.iter().map(|v| -v).collect(), jump.iter().map(|v| -v).collect())
    } else {
        (normal.to_vec(), jump.to_vec())
    }
}

/// One-sided data on a boundary facet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub facet: Facet,
    pub centroid: Vec<f64>,
    pub outward_normal: Vec<f64>,
    /// Limit from inside the domain (facet mean).
    pub inner: Vec<f64>,
    /// Trace of the field as a function on the whole space: the prescribed
    /// boundary data when present, otherwise the inner limit.
    pub value: Vec<f64>,
}

fn facet_jump<F: CellwiseField + ?Sized>(field: &F, facet: &Facet) -> Option<Vec<f64>> {
    let domain = field.domain();
    let (cell, neighbour) = facet_cells(domain, facet);
    match facet.kind {
        FacetKind::Interior => {
            let minus = field.facet_mean(cell, facet);
            let plus = field.facet_mean(neighbour.expect("interior facet has a neighbour"), facet);
            Some(plus.iter().zip(&minus).map(|(p, m)| p - m).collect())
        }
        FacetKind::Upper | FacetKind::Lower => {
            let b = field.boundary()?.facet_mean(domain, facet);
            let inner = field.facet_mean(cell, facet);
            Some(if facet.kind == FacetKind::Upper {
                b.iter().zip(&inner).map(|(o, i)| o - i).collect()
            } else {
                inner.iter().zip(&b).map(|(i, o)| i - o).collect()
            })
        }
    }
}

/// Every facet with its jump, including zero jumps. Boundary facets appear
/// only when the field carries boundary data.
pub fn facet_jumps<F: CellwiseField + ?Sized>(field: &F) -> Vec<JumpFacet> {
    let domain = field.domain();
    let facets = domain.facets();
    facets
        .par_iter()
        .filter_map(|f| {
            facet_jump(field, f).map(|jump| JumpFacet {
                facet: *f,
                centroid: domain.facet_centroid(f),
                normal: unit(domain.dim(), f.axis),
                area: domain.facet_area(f),
                jump,
            })
        })
        .collect()
}

/// Canonicalized facets whose jump exceeds the field tolerance.
pub fn jump_set<F: CellwiseField + ?Sized>(field: &F) -> Vec<JumpFacet> {
    let tol = field.tolerance();
    facet_jumps(field).into_iter().filter(|j| norm(&j.jump) > tol).map(JumpFacet::canonicalize).collect()
}

/// `Σ |[u]| · area` over the jump set (Frobenius norm).
pub fn total_jump_mass<F: CellwiseField + ?Sized>(field: &F) -> f64 {
    jump_set(field).iter().map(JumpFacet::mass).sum()
}

pub fn trace_boundary<F: CellwiseField + ?Sized>(field: &F) -> Vec<BoundaryTrace> {
    let domain = field.domain();
    domain
        .boundary_facets()
        .into_iter()
        .map(|f| {
            let inner = field.facet_mean(f.cell, &f);
            let value = match field.boundary() {
                Some(b) => b.facet_mean(domain, &f),
                None => inner.clone(),
            };
            let mut outward_normal = unit(domain.dim(), f.axis);
            if f.kind == FacetKind::Lower {
                outward_normal[f.axis] = -1.0;
            }
            BoundaryTrace { facet: f, centroid: domain.facet_centroid(&f), outward_normal, inner, value }
        })
        .collect()
}

/// `∫_Ω ∇u + Σ [u] ⊗ ν · area − ∫_∂Ω u ⊗ ν_out`, derivative index last.
/// Vanishes for every field; with zero boundary data it is the discrete
/// statement `Du(Ω) = 0`.
pub fn gauss_green_residual<F: CellwiseField + ?Sized>(field: &F) -> Vec<f64> {
    let domain = field.domain();
    let n = domain.dim();
    let m = field.shape().len();
    let vol = domain.cell_volume();
    let mut acc = vec![0.0; m * n];
    for cell in 0..domain.n_cells() {
        let g = field.gradient_in_cell(cell, &domain.cell_center(cell));
        for (a, v) in acc.iter_mut().zip(g) {
            *a += v * vol;
        }
    }
    for j in facet_jumps(field) {
        for c in 0..m {
            for k in 0..n {
                acc[c * n + k] += j.jump[c] * j.normal[k] * j.area;
            }
        }
    }
    for t in trace_boundary(field) {
        let area = domain.facet_area(&t.facet);
        for c in 0..m {
            for k in 0..n {
                acc[c * n + k] -= t.value[c] * t.outward_normal[k] * area;
            }
        }
    }
    acc
}
