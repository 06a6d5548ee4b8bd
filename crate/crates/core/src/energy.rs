//! The initial energy of a discrete SBV² field and the disarrangement
//! densities of a structured deformation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{approximating_sequence, CorrectionGrid, Sd2Triple};
use crate::densities::DensityTriple;
use crate::error::{Error, Result};
use crate::fields::{
    jump_set, l1_norm, CellwiseField, PiecewiseAffineField, PiecewiseConstantField, Sbv2Field, ValueShape,
};
use crate::tensor::{norm, slope_to_tensor3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub bulk: f64,
    /// `Ψ₁` over the jump set of `u`.
    pub jump1: f64,
    /// `Ψ₂` over the jump set of `∇u`.
    pub jump2: f64,
    pub total: f64,
    pub quadrature: QuadratureInfo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureInfo {
    pub bulk_rule: String,
    pub cells: usize,
    pub jump_facets: usize,
    pub gradient_jump_facets: usize,
}

/// Sum by recursive halving; the order depends only on the length.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2..=8 => v.iter().sum(),
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// `∫ W(x, ∇u, ∇²u) + ∫_{S_u} Ψ₁ + ∫_{S_∇u} Ψ₂`.
///
/// Bulk by the cell midpoint rule, jumps at facet centroids with the
/// facet-mean jump. Boundary facets contribute when `u` carries boundary
/// data, so a trace mismatch is charged like an interior jump; the
/// gradient field carries no boundary data.
pub fn total_energy(u: &Sbv2Field, densities: &DensityTriple) -> Result<EnergyBreakdown> {
    let domain = u.domain();
    let (d, n) = (u.components(), domain.dim());
    if densities.d != d || densities.n != n {
        return Err(Error::ShapeMismatch(format!(
            "densities are for d = {}, N = {}, field has d = {d}, N = {n}",
            densities.d, densities.n
        )));
    }
    let vol = domain.cell_volume();
    let bulk_terms: Vec<f64> = (0..domain.n_cells())
        .into_par_iter()
        .map(|cell| {
            let x = domain.cell_center(cell);
            let a = u.gradient_in_cell(cell, &x);
            let m = slope_to_tensor3(u.cell_hessian(cell), d, n);
            densities.w(&x, &a, &m) * vol
        })
        .collect();
    let jumps = jump_set(u);
    let j1: Vec<f64> = jumps.par_iter().map(|j| densities.psi1(&j.centroid, &j.jump, &j.normal) * j.area).collect();
    let grad_jumps = jump_set(&u.gradient_field());
    let j2: Vec<f64> =
        grad_jumps.par_iter().map(|j| densities.psi2(&j.centroid, &j.jump, &j.normal) * j.area).collect();
    let (bulk, jump1, jump2) = (pairwise_sum(&bulk_terms), pairwise_sum(&j1), pairwise_sum(&j2));
    Ok(EnergyBreakdown {
        bulk,
        jump1,
        jump2,
        total: bulk + jump1 + jump2,
        quadrature: QuadratureInfo {
            bulk_rule: "midpoint".into(),
            cells: domain.n_cells(),
            jump_facets: jumps.len(),
            gradient_jump_facets: grad_jumps.len(),
        },
    })
}

/// Cellwise `∇g − G`.
pub fn disarrangement_density(sd2: &Sd2Triple) -> PiecewiseAffineField {
    let g = sd2.g();
    let big_g = sd2.big_g();
    let n = sd2.n();
    let k = sd2.d() * n;
    let domain = g.domain().clone();
    let mut value = Vec::with_capacity(domain.n_cells() * k);
    let mut slope = Vec::with_capacity(domain.n_cells() * k * n);
    for cell in 0..domain.n_cells() {
        value.extend(g.cell_slope(cell).iter().zip(big_g.cell_value(cell)).map(|(a, b)| a - b));
        slope.extend(big_g.cell_slope(cell).iter().map(|v| -v));
    }
    PiecewiseAffineField::new(domain, ValueShape::matrix(sd2.d(), n), value, slope).expect("consistent sizes")
}

/// Cellwise `∇G − Γ` in the tensor convention.
pub fn gradient_disarrangement_density(sd2: &Sd2Triple) -> PiecewiseConstantField {
    let big_g = sd2.big_g();
    let (d, n) = (sd2.d(), sd2.n());
    let domain = big_g.domain().clone();
    let values = (0..domain.n_cells())
        .flat_map(|cell| {
            let dg = slope_to_tensor3(big_g.cell_slope(cell), d, n);
            dg.iter().zip(sd2.gamma().cell_value(cell)).map(|(a, b)| a - b).collect::<Vec<_>>()
        })
        .collect();
    PiecewiseConstantField::new(domain, ValueShape::tensor3(d, n), values).expect("consistent sizes")
}

/// `|Dv|(Ω)` of a cellwise affine field: bulk gradient plus interior jumps.
pub fn total_variation(v: &PiecewiseAffineField) -> f64 {
    let interior = v.clone().without_boundary();
    l1_norm(&v.gradient_field()) + jump_set(&interior).iter().map(|j| norm(&j.jump) * j.area).sum::<f64>()
}

/// `1 + |Dg| + ‖G‖₁ + |DG| + ‖Γ‖₁`.
pub fn sequence_bound_shape(sd2: &Sd2Triple) -> f64 {
    1.0 + total_variation(sd2.g()) + l1_norm(sd2.big_g()) + total_variation(sd2.big_g()) + l1_norm(sd2.gamma())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceEnergy {
    pub n: usize,
    pub energy: EnergyBreakdown,
    /// `E(u_n)` divided by [`sequence_bound_shape`].
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceEnergyReport {
    pub bound_shape: f64,
    pub members: Vec<SequenceEnergy>,
    /// `2C(2n) − C(n)` over consecutive doublings, removing the `O(1/n)`
    /// term of the discrete energies.
    pub extrapolated: Vec<f64>,
}

/// Energies of `u_n` for each `n` in `ns` and the ratio to the bound
/// shape.
pub fn sequence_energies(
    sd2: &Sd2Triple,
    densities: &DensityTriple,
    ns: &[usize],
    grid: CorrectionGrid,
) -> Result<SequenceEnergyReport> {
    let bound_shape = sequence_bound_shape(sd2);
    let members = ns
        .iter()
        .map(|&n| {
            let seq = approximating_sequence(sd2, n, grid)?;
            let energy = total_energy(&seq.u, densities)?;
            Ok(SequenceEnergy { n, constant: energy.total / bound_shape, energy })
        })
        .collect::<Result<Vec<_>>>()?;
    let extrapolated = members
        .iter()
        .filter_map(|a| members.iter().find(|b| b.n == 2 * a.n).map(|b| 2.0 * b.constant - a.constant))
        .collect();
    Ok(SequenceEnergyReport { bound_shape, members, extrapolated })
}
