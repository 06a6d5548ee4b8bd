use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use super::{Bulk, BulkConstants, BulkDensity, Interfacial, InterfacialConstants, InterfacialDensity};
use crate::error::{Error, Result};
use crate::tensor::norm;

/// A catalog density, tagged with the slot it fills.
#[derive(Debug, Clone)]
pub enum CatalogEntry {
    Bulk(Bulk),
    Psi1(Interfacial),
    Psi2(Interfacial),
}

pub fn catalog_names() -> &'static [&'static str] {
    &["w_norm", "w_zero", "psi1_norm", "psi1_weighted", "psi2_norm", "psi2_proj"]
}

/// `|A| + |M|`.
#[derive(Debug, Clone, Copy)]
pub struct NormBulk;

impl BulkDensity for NormBulk {
    fn eval(&self, _x: &[f64], a: &[f64], m: &[f64]) -> f64 {
        norm(a) + norm(m)
    }
    fn recession(&self, _x: &[f64], _a: &[f64], m: &[f64]) -> Option<f64> {
        Some(norm(m))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroBulk;

impl BulkDensity for ZeroBulk {
    fn eval(&self, _x: &[f64], _a: &[f64], _m: &[f64]) -> f64 {
        0.0
    }
    fn recession(&self, _x: &[f64], _a: &[f64], _m: &[f64]) -> Option<f64> {
        Some(0.0)
    }
}

/// `|p|`, for either interfacial slot.
#[derive(Debug, Clone, Copy)]
pub struct NormInterfacial;

impl InterfacialDensity for NormInterfacial {
    fn eval(&self, _x: &[f64], payload: &[f64], _nu: &[f64]) -> f64 {
        norm(payload)
    }
}

/// `c(x)|λ|` with `c(x) = 1.25 + 0.75 cos(2π x₁)`, so `1/2 ≤ c ≤ 2`.
#[derive(Debug, Clone, Copy)]
pub struct WeightedNorm;

impl WeightedNorm {
    pub fn weight(x: &[f64]) -> f64 {
        1.25 + 0.75 * (2.0 * PI * x[0]).cos()
    }
}

impl InterfacialDensity for WeightedNorm {
    fn eval(&self, x: &[f64], payload: &[f64], _nu: &[f64]) -> f64 {
        Self::weight(x) * norm(payload)
    }
}

/// `|ν · J a|` for `J ∈ ℝ^{N×N}` and a fixed unit vector `a`.
#[derive(Debug, Clone)]
pub struct NormalProjection {
    pub a: Vec<f64>,
}

impl InterfacialDensity for NormalProjection {
    fn eval(&self, _x: &[f64], j: &[f64], nu: &[f64]) -> f64 {
        let n = self.a.len();
        let mut s = 0.0;
        for i in 0..n {
            let ja: f64 = (0..n).map(|k| j[i * n + k] * self.a[k]).sum();
            s += nu[i] * ja;
        }
        s.abs()
    }
}

fn no_params(name: &str, params: &BTreeMap<String, f64>) -> Result<()> {
    match params.keys().next() {
        Some(k) => Err(Error::Config(format!("catalog density `{name}` takes no parameter `{k}`"))),
        None => Ok(()),
    }
}

fn interfacial(name: &str, density: Arc<dyn InterfacialDensity>, lower: f64, upper: f64) -> Interfacial {
    Interfacial {
        name: name.to_string(),
        density,
        constants: InterfacialConstants { lower: Some(lower), upper: Some(upper), coercive: lower > 0.0 },
    }
}

pub(crate) fn lookup(name: &str, params: &BTreeMap<String, f64>, d: usize, n: usize) -> Result<CatalogEntry> {
    Ok(match name {
        "w_norm" => {
            no_params(name, params)?;
            CatalogEntry::Bulk(Bulk {
                name: name.into(),
                density: Arc::new(NormBulk),
                // |W(tM)/t − |M|| = |A|/t admits no envelope uniform in A.
                constants: BulkConstants {
                    growth: Some(1.0),
                    lipschitz: Some(1.0),
                    alpha: None,
                    threshold: None,
                    envelope: None,
                    coercive: true,
                    nonnegative: true,
                },
            })
        }
        "w_zero" => {
            no_params(name, params)?;
            CatalogEntry::Bulk(Bulk {
                name: name.into(),
                density: Arc::new(ZeroBulk),
                constants: BulkConstants {
                    growth: None,
                    lipschitz: Some(0.0),
                    alpha: Some(0.5),
                    threshold: Some(1.0),
                    envelope: Some(0.0),
                    coercive: false,
                    nonnegative: true,
                },
            })
        }
        "psi1_norm" => {
            no_params(name, params)?;
            CatalogEntry::Psi1(interfacial(name, Arc::new(NormInterfacial), 1.0, 1.0))
        }
        "psi1_weighted" => {
            no_params(name, params)?;
            CatalogEntry::Psi1(interfacial(name, Arc::new(WeightedNorm), 0.5, 2.0))
        }
        "psi2_norm" => {
            no_params(name, params)?;
            CatalogEntry::Psi2(interfacial(name, Arc::new(NormInterfacial), 1.0, 1.0))
        }
        "psi2_proj" => {
            if d != n {
                return Err(Error::Config(format!("`psi2_proj` needs d = N, got d = {d}, N = {n}")));
            }
            let mut a = vec![0.0; n];
            a[0] = 1.0;
            if !params.is_empty() {
                a = (1..=n)
                    .map(|k| {
                        params
                            .get(&format!("a{k}"))
                            .copied()
                            .ok_or_else(|| Error::Config(format!("`psi2_proj` needs all of a1..a{n}")))
                    })
                    .collect::<Result<_>>()?;
                if let Some(k) = params
                    .keys()
                    .find(|k| k.strip_prefix('a').and_then(|r| r.parse::<usize>().ok()).is_none_or(|i| i == 0 || i > n))
                {
                    return Err(Error::Config(format!("`psi2_proj` takes no parameter `{k}`")));
                }
            }
            if (norm(&a) - 1.0).abs() > 1e-12 {
                return Err(Error::Config("`psi2_proj` needs a unit vector a".into()));
            }
            CatalogEntry::Psi2(Interfacial {
                name: name.into(),
                density: Arc::new(NormalProjection { a }),
                constants: InterfacialConstants { lower: Some(0.0), upper: Some(1.0), coercive: false },
            })
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown catalog density `{name}`; known: {}",
                catalog_names().join(", ")
            )))
        }
    })
}
