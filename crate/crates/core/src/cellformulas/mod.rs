//! Bracketed estimates of the four relaxed densities `W₁`, `γ₁`, `W₂`,
//! `γ₂`: upper bounds from admissible competitors, certified lower bounds
//! from the Gauss–Green mass argument when the interfacial density is
//! coercive.

mod competitor;
mod families;
mod search;

use serde::{Deserialize, Serialize};

pub use competitor::{Competitor, CompetitorEnergy, ADMISSIBILITY_TOLERANCE};
pub use families::{Family, FAMILIES};
pub use search::{SearchConfig, Sweep, SweepRow};

use crate::densities::DensityTriple;
use crate::error::{Error, Result};
use crate::tensor::norm;

/// Which cell problem, with its arguments. Third-order tensors use the
/// middle-slot convention `T_ijk = ∂_j U_ik`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Variant {
    /// Zero trace, `∇u = A`.
    W1 { a: Vec<f64> },
    /// Trace `γ_(λ,ν)`, `∇u = 0`.
    Gamma1 { lambda: Vec<f64>, nu: Vec<f64> },
    /// Trace `L·y`, `∫∇u = M`; bulk `W(x, A, ∇u)`.
    W2 { a: Vec<f64>, l: Vec<f64>, m: Vec<f64> },
    /// Trace `γ_(Λ,ν)`, `∫∇u = 0`; bulk `W^∞(x, A, ∇u)`.
    Gamma2 { a: Vec<f64>, big_lambda: Vec<f64>, nu: Vec<f64> },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::W1 { .. } => "W1",
            Variant::Gamma1 { .. } => "gamma1",
            Variant::W2 { .. } => "W2",
            Variant::Gamma2 { .. } => "gamma2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellProblem {
    /// Frozen macroscopic point.
    pub x: Vec<f64>,
    pub d: usize,
    pub n: usize,
    pub variant: Variant,
}

impl CellProblem {
    pub fn w1(x: Vec<f64>, a: Vec<f64>, d: usize) -> Self {
        let n = x.len();
        Self { x, d, n, variant: Variant::W1 { a } }
    }

    pub fn gamma1(x: Vec<f64>, lambda: Vec<f64>, nu: Vec<f64>) -> Self {
        let (n, d) = (x.len(), lambda.len());
        Self { x, d, n, variant: Variant::Gamma1 { lambda, nu } }
    }

    pub fn w2(x: Vec<f64>, a: Vec<f64>, l: Vec<f64>, m: Vec<f64>, d: usize) -> Self {
        let n = x.len();
        Self { x, d, n, variant: Variant::W2 { a, l, m } }
    }

    pub fn gamma2(x: Vec<f64>, a: Vec<f64>, big_lambda: Vec<f64>, nu: Vec<f64>, d: usize) -> Self {
        let n = x.len();
        Self { x, d, n, variant: Variant::Gamma2 { a, big_lambda, nu } }
    }

    pub fn validate(&self) -> Result<()> {
        let (d, n) = (self.d, self.n);
        if n == 0 || d == 0 || self.x.len() != n {
            return Err(self.invalid(format!("x must have N = {n} entries and d, N must be positive")));
        }
        let check = |what: &str, v: &[f64], len: usize| {
            if v.len() != len {
                Err(self.invalid(format!("{what} must have {len} entries, got {}", v.len())))
            } else if v.iter().any(|x| !x.is_finite()) {
                Err(self.invalid(format!("{what} must be finite")))
            } else {
                Ok(())
            }
        };
        let unit = |nu: &[f64]| {
            check("nu", nu, n)?;
            if (norm(nu) - 1.0).abs() > 1e-12 {
                return Err(self.invalid("nu must be a unit vector".into()));
            }
            Ok(())
        };
        match &self.variant {
            Variant::W1 { a } => check("A", a, d * n),
            Variant::Gamma1 { lambda, nu } => {
                check("lambda", lambda, d)?;
                unit(nu)
            }
            Variant::W2 { a, l, m } => {
                check("A", a, d * n)?;
                check("L", l, d * n * n)?;
                check("M", m, d * n * n)
            }
            Variant::Gamma2 { a, big_lambda, nu } => {
                check("A", a, d * n)?;
                check("Lambda", big_lambda, d * n)?;
                unit(nu)
            }
        }
    }

    fn invalid(&self, msg: String) -> Error {
        Error::InvalidArgument(format!("{msg} in cell problem {}", self.to_json()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| format!("{self:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetitorDescriptor {
    pub family: String,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub upper: f64,
    /// Certified lower bound, when one is available.
    pub lower: Option<f64>,
    pub best: CompetitorDescriptor,
    pub evaluations: usize,
    pub seed: u64,
}

impl EstimateResult {
    /// `upper − lower` when certified.
    pub fn gap(&self) -> Option<f64> {
        self.lower.map(|l| self.upper - l)
    }
}

/// Runs the families of the variant and returns the bracket with all
/// evaluated rows.
pub fn estimate(problem: &CellProblem, densities: &DensityTriple, cfg: &SearchConfig) -> Result<Sweep> {
    problem.validate()?;
    if densities.d != problem.d || densities.n != problem.n {
        return Err(Error::ShapeMismatch(format!(
            "densities are for d = {}, N = {}, problem has d = {}, N = {}",
            densities.d, densities.n, problem.d, problem.n
        )));
    }
    let needs = match problem.variant {
        Variant::W1 { .. } | Variant::Gamma1 { .. } => densities.psi1.is_some(),
        Variant::W2 { .. } | Variant::Gamma2 { .. } => densities.psi2.is_some() && densities.w.is_some(),
    };
    if !needs {
        return Err(Error::InvalidArgument(format!(
            "{} needs its densities to be given (Ψ₁ for the first-order problems, W and Ψ₂ for the second-order ones)",
            problem.variant.name()
        )));
    }
    let mut sweep = search::run(problem, densities, cfg)?;
    sweep.result.lower = certified_lower(problem, densities);
    if let Some(l) = sweep.result.lower {
        debug_assert!(l <= sweep.result.upper * (1.0 + 1e-12) + 1e-12);
    }
    Ok(sweep)
}

/// Energy of a single family member; `None` when the parameters are
/// invalid or the family does not apply to the problem.
pub fn evaluate_family(
    problem: &CellProblem,
    densities: &DensityTriple,
    family: Family,
    resolution: usize,
    params: &[f64],
) -> Option<CompetitorEnergy> {
    family.build(problem, resolution, params).map(|c| c.evaluate(problem, densities))
}

/// `c|A|`, `c₁|λ|` or `c₂|Λ|`: with a zero or matching trace, Gauss–Green
/// forces the total jump, and coercivity bounds the interfacial energy by
/// its mass. `W₂` only gets `0`, and only for nonnegative densities.
pub fn certified_lower(problem: &CellProblem, densities: &DensityTriple) -> Option<f64> {
    match &problem.variant {
        Variant::W1 { a } => densities.psi1_coercivity().map(|c| c * norm(a)),
        Variant::Gamma1 { lambda, .. } => densities.psi1_coercivity().map(|c| c * norm(lambda)),
        // every competitor has nonnegative energy
        Variant::W2 { .. } => (densities.nonnegative_bulk() && densities.nonnegative_psi2()).then_some(0.0),
        // W^∞ ≥ 0 under the linear lower bound on W
        Variant::Gamma2 { big_lambda, .. } => densities.psi2_coercivity().map(|c| c * norm(big_lambda)),
    }
}

pub fn estimate_w1(problem: &CellProblem, densities: &DensityTriple, cfg: &SearchConfig) -> Result<EstimateResult> {
    expect_variant(problem, "W1")?;
    estimate(problem, densities, cfg).map(|s| s.result)
}

pub fn estimate_gamma1(problem: &CellProblem, densities: &DensityTriple, cfg: &SearchConfig) -> Result<EstimateResult> {
    expect_variant(problem, "gamma1")?;
    estimate(problem, densities, cfg).map(|s| s.result)
}

pub fn estimate_w2(problem: &CellProblem, densities: &DensityTriple, cfg: &SearchConfig) -> Result<EstimateResult> {
    expect_variant(problem, "W2")?;
    estimate(problem, densities, cfg).map(|s| s.result)
}

pub fn estimate_gamma2(problem: &CellProblem, densities: &DensityTriple, cfg: &SearchConfig) -> Result<EstimateResult> {
    expect_variant(problem, "gamma2")?;
    estimate(problem, densities, cfg).map(|s| s.result)
}

fn expect_variant(problem: &CellProblem, name: &str) -> Result<()> {
    if problem.variant.name() != name {
        return Err(Error::InvalidArgument(format!("expected a {name} problem, got {}", problem.variant.name())));
    }
    Ok(())
}

#[cfg(test)]
mod tests;
