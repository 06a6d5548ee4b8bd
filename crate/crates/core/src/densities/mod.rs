//! Energy densities `W`, `Ψ₁`, `Ψ₂`: the catalog, user expressions,
//! recession functions, homogeneous extension and the hypothesis checker.

mod catalog;
pub mod expr;
mod hypotheses;
mod recession;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use catalog::{catalog_names, CatalogEntry};
pub use hypotheses::{check_hypotheses, HypothesisEntry, HypothesisReport, SamplerConfig, Verdict, Witness};
pub use recession::{recession, RecessionOptions, RecessionResult, DEFAULT_SCHEDULE};

use crate::error::{Error, Result};
use crate::tensor::norm;
use expr::{Bindings, Expr, Slot};

/// Bulk density `W(x, A, M)`; `M` uses the middle-slot tensor convention.
pub trait BulkDensity: Send + Sync + Debug {
    fn eval(&self, x: &[f64], a: &[f64], m: &[f64]) -> f64;

    /// Closed form of `W^∞(x, A, M)` when known.
    fn recession(&self, _x: &[f64], _a: &[f64], _m: &[f64]) -> Option<f64> {
        None
    }
}

/// Interfacial density `Ψ(x, payload, ν)` with `ν` a unit vector.
pub trait InterfacialDensity: Send + Sync + Debug {
    fn eval(&self, x: &[f64], payload: &[f64], nu: &[f64]) -> f64;
}

/// Constants declared for the bulk density.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BulkConstants {
    /// Growth constant in the two-sided linear bound.
    pub growth: Option<f64>,
    /// Lipschitz constant in `(A, M)`.
    pub lipschitz: Option<f64>,
    /// Rate exponent and threshold of the recession envelope, and its constant.
    pub alpha: Option<f64>,
    pub threshold: Option<f64>,
    pub envelope: Option<f64>,
    /// Whether the lower linear bound is claimed.
    #[serde(default = "yes")]
    pub coercive: bool,
    /// Whether `W ≥ 0` is claimed.
    #[serde(default)]
    pub nonnegative: bool,
}

/// Constants declared for an interfacial density: `c|p| ≤ Ψ ≤ K|p|`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfacialConstants {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Whether `lower > 0` is claimed.
    #[serde(default = "yes")]
    pub coercive: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone)]
pub struct Bulk {
    pub name: String,
    pub density: Arc<dyn BulkDensity>,
    pub constants: BulkConstants,
}

#[derive(Debug, Clone)]
pub struct Interfacial {
    pub name: String,
    pub density: Arc<dyn InterfacialDensity>,
    pub constants: InterfacialConstants,
}

/// `(W, Ψ₁, Ψ₂)` on `Ω ⊂ ℝ^N` for `ℝ^d`-valued fields. Missing components
/// are the zero density.
#[derive(Debug, Clone)]
pub struct DensityTriple {
    pub d: usize,
    pub n: usize,
    pub w: Option<Bulk>,
    pub psi1: Option<Interfacial>,
    pub psi2: Option<Interfacial>,
}

impl DensityTriple {
    pub fn new(d: usize, n: usize) -> Self {
        Self { d, n, w: None, psi1: None, psi2: None }
    }

    pub fn with_w(mut self, w: Bulk) -> Self {
        self.w = Some(w);
        self
    }

    pub fn with_psi1(mut self, p: Interfacial) -> Self {
        self.psi1 = Some(p);
        self
    }

    pub fn with_psi2(mut self, p: Interfacial) -> Self {
        self.psi2 = Some(p);
        self
    }

    pub fn w(&self, x: &[f64], a: &[f64], m: &[f64]) -> f64 {
        self.w.as_ref().map_or(0.0, |w| w.density.eval(x, a, m))
    }

    pub fn psi1(&self, x: &[f64], lam: &[f64], nu: &[f64]) -> f64 {
        self.psi1.as_ref().map_or(0.0, |p| p.density.eval(x, lam, nu))
    }

    pub fn psi2(&self, x: &[f64], lam: &[f64], nu: &[f64]) -> f64 {
        self.psi2.as_ref().map_or(0.0, |p| p.density.eval(x, lam, nu))
    }

    /// `W^∞(x, A, M)`: closed form when available, otherwise the tail of
    /// the default schedule.
    pub fn w_recession(&self, x: &[f64], a: &[f64], m: &[f64]) -> f64 {
        match &self.w {
            None => 0.0,
            Some(w) => w.density.recession(x, a, m).unwrap_or_else(|| {
                recession(w.density.as_ref(), x, a, m, &DEFAULT_SCHEDULE, &RecessionOptions::default())
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN)
            }),
        }
    }

    /// Declared coercivity constant of `Ψ₁` when coercivity is claimed.
    pub fn psi1_coercivity(&self) -> Option<f64> {
        match &self.psi1 {
            None => None,
            Some(p) => p.constants.coercive.then_some(p.constants.lower).flatten().filter(|c| *c > 0.0),
        }
    }

    pub fn psi2_coercivity(&self) -> Option<f64> {
        match &self.psi2 {
            None => None,
            Some(p) => p.constants.coercive.then_some(p.constants.lower).flatten().filter(|c| *c > 0.0),
        }
    }

    /// Whether `W ≥ 0` is declared (a missing `W` is zero).
    pub fn nonnegative_bulk(&self) -> bool {
        self.w.as_ref().is_none_or(|w| w.constants.nonnegative)
    }

    /// Whether `Ψ₂ ≥ 0` follows from its declared lower constant.
    pub fn nonnegative_psi2(&self) -> bool {
        self.psi2.as_ref().is_none_or(|p| p.constants.lower.is_some_and(|c| c >= 0.0))
    }

    /// Whether both interfacial densities claim coercivity.
    pub fn coercive_interfacial(&self) -> bool {
        self.psi1_coercivity().is_some() && self.psi2_coercivity().is_some()
    }
}

/// `|θ| Ψ(x, p, θ/|θ|)`, and `0` at `θ = 0`.
pub fn extend_homogeneous(psi: &dyn InterfacialDensity, x: &[f64], payload: &[f64], theta: &[f64]) -> f64 {
    let t = norm(theta);
    if t == 0.0 {
        return 0.0;
    }
    let nu: Vec<f64> = theta.iter().map(|v| v / t).collect();
    t * psi.eval(x, payload, &nu)
}

/// A density component given by name from the catalog or as an expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentSpec {
    Catalog(CatalogSpec),
    Expression(ExpressionSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogSpec {
    pub catalog: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressionSpec {
    pub expr: String,
    /// Closed-form recession function (bulk only).
    #[serde(default)]
    pub recession: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub bulk_constants: Option<BulkConstants>,
    #[serde(default)]
    pub interfacial_constants: Option<InterfacialConstants>,
}

impl ComponentSpec {
    pub fn catalog(name: &str) -> Self {
        ComponentSpec::Catalog(CatalogSpec { catalog: name.to_string(), params: BTreeMap::new() })
    }

    pub fn expression(expr: &str) -> Self {
        ComponentSpec::Expression(ExpressionSpec {
            expr: expr.to_string(),
            recession: None,
            params: BTreeMap::new(),
            bulk_constants: None,
            interfacial_constants: None,
        })
    }
}

/// Serializable selection of a density triple.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    #[serde(default)]
    pub w: Option<ComponentSpec>,
    #[serde(default)]
    pub psi1: Option<ComponentSpec>,
    #[serde(default)]
    pub psi2: Option<ComponentSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Psi1,
    Psi2,
}

impl DensitySpec {
    pub fn build(&self, d: usize, n: usize) -> Result<DensityTriple> {
        let mut t = DensityTriple::new(d, n);
        if let Some(spec) = &self.w {
            t.w = Some(build_bulk(spec, d, n)?);
        }
        if let Some(spec) = &self.psi1 {
            t.psi1 = Some(build_interfacial(spec, Role::Psi1, d, n)?);
        }
        if let Some(spec) = &self.psi2 {
            t.psi2 = Some(build_interfacial(spec, Role::Psi2, d, n)?);
        }
        Ok(t)
    }
}

fn build_bulk(spec: &ComponentSpec, d: usize, n: usize) -> Result<Bulk> {
    match spec {
        ComponentSpec::Catalog(CatalogSpec { catalog, params }) => match catalog::lookup(catalog, params, d, n)? {
            CatalogEntry::Bulk(b) => Ok(b),
            _ => Err(Error::Config(format!("catalog density `{catalog}` is not a bulk density"))),
        },
        ComponentSpec::Expression(ExpressionSpec {
            expr,
            recession,
            params,
            bulk_constants,
            interfacial_constants,
        }) => {
            if interfacial_constants.is_some() {
                return Err(Error::Config("bulk density given interfacial constants".into()));
            }
            let e = ExprBulk::new(expr, recession.as_deref(), params.clone(), d, n)?;
            Ok(Bulk {
                name: format!("expr:{expr}"),
                density: Arc::new(e),
                constants: bulk_constants.clone().unwrap_or_default(),
            })
        }
    }
}

fn build_interfacial(spec: &ComponentSpec, role: Role, d: usize, n: usize) -> Result<Interfacial> {
    match spec {
        ComponentSpec::Catalog(CatalogSpec { catalog, params }) => {
            match (catalog::lookup(catalog, params, d, n)?, role) {
                (CatalogEntry::Psi1(p), Role::Psi1) | (CatalogEntry::Psi2(p), Role::Psi2) => Ok(p),
                _ => Err(Error::Config(format!("catalog density `{catalog}` does not fit the {role:?} slot"))),
            }
        }
        ComponentSpec::Expression(ExpressionSpec {
            expr,
            recession,
            params,
            bulk_constants,
            interfacial_constants,
        }) => {
            if recession.is_some() || bulk_constants.is_some() {
                return Err(Error::Config("interfacial density given bulk-only fields".into()));
            }
            let e = ExprInterfacial::new(expr, role == Role::Psi2, params.clone(), d, n)?;
            Ok(Interfacial {
                name: format!("expr:{expr}"),
                density: Arc::new(e),
                constants: interfacial_constants.clone().unwrap_or_default(),
            })
        }
    }
}

fn check_slots(e: &Expr, allowed: &[Slot], params: &BTreeMap<String, f64>) -> Result<()> {
    if let Some(s) = e.slots().into_iter().find(|s| !allowed.contains(s)) {
        return Err(Error::Expression(format!("variable {s:?} cannot appear in this density")));
    }
    if let Some(p) = e.params().into_iter().find(|p| !params.contains_key(p)) {
        return Err(Error::Expression(format!("unknown parameter `{p}`")));
    }
    Ok(())
}

/// Bulk density read from an expression in `x`, `A`, `M`.
#[derive(Debug, Clone)]
pub struct ExprBulk {
    expr: Expr,
    recession: Option<Expr>,
    params: BTreeMap<String, f64>,
    d: usize,
    n: usize,
}

impl ExprBulk {
    pub fn new(src: &str, recession: Option<&str>, params: BTreeMap<String, f64>, d: usize, n: usize) -> Result<Self> {
        let expr = Expr::parse(src)?;
        check_slots(&expr, &[Slot::X, Slot::A, Slot::M], &params)?;
        let recession = recession.map(Expr::parse).transpose()?;
        if let Some(r) = &recession {
            check_slots(r, &[Slot::X, Slot::A, Slot::M], &params)?;
        }
        Ok(Self { expr, recession, params, d, n })
    }

    fn run(&self, e: &Expr, x: &[f64], a: &[f64], m: &[f64]) -> f64 {
        let b = Bindings::new(self.d, self.n, &self.params).bind(Slot::X, x).bind(Slot::A, a).bind(Slot::M, m);
        e.eval(&b).unwrap_or(f64::NAN)
    }
}

impl BulkDensity for ExprBulk {
    fn eval(&self, x: &[f64], a: &[f64], m: &[f64]) -> f64 {
        self.run(&self.expr, x, a, m)
    }
    fn recession(&self, x: &[f64], a: &[f64], m: &[f64]) -> Option<f64> {
        self.recession.as_ref().map(|r| self.run(r, x, a, m))
    }
}

/// Interfacial density read from an expression in `x`, `nu` and either
/// `lam` (field jumps) or `Lam` (gradient jumps).
#[derive(Debug, Clone)]
pub struct ExprInterfacial {
    expr: Expr,
    matrix: bool,
    params: BTreeMap<String, f64>,
    d: usize,
    n: usize,
}

impl ExprInterfacial {
    pub fn new(src: &str, matrix: bool, params: BTreeMap<String, f64>, d: usize, n: usize) -> Result<Self> {
        let expr = Expr::parse(src)?;
        let payload = if matrix { Slot::LamMat } else { Slot::Lam };
        check_slots(&expr, &[Slot::X, Slot::Nu, payload], &params)?;
        Ok(Self { expr, matrix, params, d, n })
    }
}

impl InterfacialDensity for ExprInterfacial {
    fn eval(&self, x: &[f64], payload: &[f64], nu: &[f64]) -> f64 {
        let slot = if self.matrix { Slot::LamMat } else { Slot::Lam };
        let b = Bindings::new(self.d, self.n, &self.params).bind(Slot::X, x).bind(Slot::Nu, nu).bind(slot, payload);
        self.expr.eval(&b).unwrap_or(f64::NAN)
    }
}
