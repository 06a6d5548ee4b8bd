//! The relaxed energy of a structured deformation `(g, G, Γ)` assembled
//! from cell-formula estimates: bulk terms per cell at the cell centre,
//! surface terms per jump facet at the facet centroid.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cellformulas::{estimate, CellProblem, SearchConfig};
use crate::constructions::Sd2Triple;
use crate::densities::DensityTriple;
use crate::energy::pairwise_sum;
use crate::error::{Error, Result};
use crate::example_tr::{closed_form_w2, Bilinear3};
use crate::fields::{facet_cells, jump_set, CellwiseField, FacetKind};
use crate::tensor::slope_to_tensor3;

/// Which trace of `G` fills the `A` slot of `γ₂` on a jump facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSide {
    Plus,
    Minus,
    #[default]
    Average,
}

/// Estimator for the `W₂` cells.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Bulk2Estimator {
    #[default]
    Search,
    /// Closed form of the trace example (`W = 0`, `Ψ₂ = |ν·Ja|`), exact.
    TraceExample { a: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssemblyConfig {
    pub search: SearchConfig,
    /// Cell problems whose arguments agree after rounding to this step
    /// share one estimate.
    pub quantization: f64,
    pub cache: bool,
    pub trace: TraceSide,
    pub bulk2: Bulk2Estimator,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            quantization: 1e-6,
            cache: true,
            trace: TraceSide::Average,
            bulk2: Bulk2Estimator::Search,
        }
    }
}

/// An estimated term: `upper` is the reported value, `lower` is present
/// when every contribution is certified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub upper: f64,
    pub lower: Option<f64>,
}

impl Term {
    pub const ZERO: Term = Term { upper: 0.0, lower: Some(0.0) };

    pub fn width(&self) -> Option<f64> {
        self.lower.map(|l| self.upper - l)
    }

    fn sum(terms: &[Term]) -> Term {
        let uppers: Vec<f64> = terms.iter().map(|t| t.upper).collect();
        let lowers: Option<Vec<f64>> = terms.iter().map(|t| t.lower).collect();
        Term { upper: pairwise_sum(&uppers), lower: lowers.map(|l| pairwise_sum(&l)) }
    }

    fn add(self, other: Term) -> Term {
        Term { upper: self.upper + other.upper, lower: self.lower.zip(other.lower).map(|(a, b)| a + b) }
    }
}

/// One weighted cell problem of the assembly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    /// `bulk1`, `bulk2`, `surf1` or `surf2`.
    pub term: String,
    /// Cell index, or facet index into the jump set of `g` or `G`.
    pub index: usize,
    pub x: Vec<f64>,
    /// Cell volume or facet area.
    pub weight: f64,
    pub upper: f64,
    pub lower: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub problems: usize,
    pub solved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxedEnergyReport {
    pub bulk1: Term,
    pub bulk2: Term,
    pub surf1: Term,
    pub surf2: Term,
    #[serde(rename = "I1")]
    pub i1: Term,
    #[serde(rename = "I2")]
    pub i2: Term,
    pub total: Term,
    /// Largest cell width: arguments are frozen per cell or facet, so the
    /// quadrature error is of this order.
    pub grid_step: f64,
    pub cache: CacheStats,
    pub contributions: Vec<Contribution>,
}

impl RelaxedEnergyReport {
    /// One row per contribution, with a row of column shapes after the
    /// header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.contributions.first().map_or(0, |c| c.x.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["term".to_string(), "index".to_string()];
        header.extend((1..=n).map(|k| format!("x{k}")));
        header.extend(["weight", "upper", "lower"].map(String::from));
        w.write_record(&header)?;
        let mut units = vec!["name".to_string(), "integer".to_string()];
        units.extend((0..n).map(|_| "scalar (position)".to_string()));
        units.extend(
            ["scalar (volume or area)", "scalar (density)", "scalar (density, empty if uncertified)"].map(String::from),
        );
        w.write_record(&units)?;
        for c in &self.contributions {
            let mut rec = vec![c.term.clone(), c.index.to_string()];
            rec.extend(c.x.iter().map(|v| v.to_string()));
            rec.push(c.weight.to_string());
            rec.push(c.upper.to_string());
            rec.push(c.lower.map(|v| v.to_string()).unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

enum Job {
    Search(CellProblem),
    Exact(f64),
}

struct Item {
    term: &'static str,
    index: usize,
    x: Vec<f64>,
    weight: f64,
    job: Job,
}

fn quantized(problem: &CellProblem, q: f64) -> Vec<i64> {
    let json = serde_json::to_value(problem).expect("cell problems serialize");
    let mut out = Vec::new();
    collect_numbers(&json, q, &mut out);
    out
}

fn collect_numbers(v: &serde_json::Value, q: f64, out: &mut Vec<i64>) {
    match v {
        serde_json::Value::Number(n) => out.push((n.as_f64().unwrap_or(f64::NAN) / q).round() as i64),
        serde_json::Value::Array(a) => a.iter().for_each(|x| collect_numbers(x, q, out)),
        serde_json::Value::Object(m) => m.values().for_each(|x| collect_numbers(x, q, out)),
        _ => {}
    }
}

fn solve(problem: &CellProblem, densities: &DensityTriple, cfg: &SearchConfig) -> Result<Term> {
    match estimate(problem, densities, cfg) {
        Ok(s) => Ok(Term { upper: s.result.upper, lower: s.result.lower }),
        Err(e @ Error::NoAdmissibleCompetitor { .. }) => Err(e),
        Err(e) => Err(Error::Estimator { problem: problem.to_json(), message: e.to_string() }),
    }
}

/// Estimates every bulk and surface term of the relaxed energy of `sd2`.
/// Identical cell problems (after quantization) are solved once; the
/// result does not depend on the thread count.
pub fn assemble_relaxed_energy(
    sd2: &Sd2Triple,
    densities: &DensityTriple,
    cfg: &AssemblyConfig,
) -> Result<RelaxedEnergyReport> {
    let (d, n) = (sd2.d(), sd2.n());
    if densities.d != d || densities.n != n {
        return Err(Error::ShapeMismatch(format!(
            "densities are for d = {}, N = {}, fields have d = {d}, N = {n}",
            densities.d, densities.n
        )));
    }
    if !(cfg.quantization > 0.0) {
        return Err(Error::InvalidArgument("quantization step must be positive".into()));
    }
    let (g, big_g, gamma) = (sd2.g(), sd2.big_g(), sd2.gamma());
    let domain = sd2.domain();
    let vol = domain.cell_volume();
    let mut items = Vec::new();

    for cell in 0..domain.n_cells() {
        let x = domain.cell_center(cell);
        let gx = big_g.value_in_cell(cell, &x);
        let a1: Vec<f64> = gx.iter().zip(g.cell_slope(cell)).map(|(a, b)| a - b).collect();
        items.push(Item {
            term: "bulk1",
            index: cell,
            x: x.clone(),
            weight: vol,
            job: Job::Search(CellProblem::w1(x.clone(), a1, d)),
        });
        let l = slope_to_tensor3(big_g.cell_slope(cell), d, n);
        let m = gamma.cell_value(cell).to_vec();
        let job = match &cfg.bulk2 {
            Bulk2Estimator::Search => Job::Search(CellProblem::w2(x.clone(), gx, l, m, d)),
            Bulk2Estimator::TraceExample { a } => {
                if d != n {
                    return Err(Error::ShapeMismatch("the trace example needs d = N".into()));
                }
                Job::Exact(closed_form_w2(&Bilinear3 { n, entries: l }, &Bilinear3 { n, entries: m }, a)?)
            }
        };
        items.push(Item { term: "bulk2", index: cell, x, weight: vol, job });
    }

    let interior = |f: &crate::fields::JumpFacet| f.facet.kind == FacetKind::Interior;
    for (index, f) in jump_set(g).into_iter().filter(interior).enumerate() {
        let job = Job::Search(CellProblem::gamma1(f.centroid.clone(), f.jump, f.normal));
        items.push(Item { term: "surf1", index, x: f.centroid, weight: f.area, job });
    }
    for (index, f) in jump_set(big_g).into_iter().filter(interior).enumerate() {
        let (minus_cell, plus_cell) = facet_cells(domain, &f.facet);
        let minus = big_g.value_in_cell(minus_cell, &f.centroid);
        let plus = big_g.value_in_cell(plus_cell.expect("interior facet"), &f.centroid);
        let a: Vec<f64> = match cfg.trace {
            TraceSide::Plus => plus,
            TraceSide::Minus => minus,
            TraceSide::Average => plus.iter().zip(&minus).map(|(p, m)| 0.5 * (p + m)).collect(),
        };
        let job = Job::Search(CellProblem::gamma2(f.centroid.clone(), a, f.jump, f.normal, d));
        items.push(Item { term: "surf2", index, x: f.centroid, weight: f.area, job });
    }

    // distinct problems in first-occurrence order
    let mut slot_of: HashMap<(&str, Vec<i64>), usize> = HashMap::new();
    let mut unique: Vec<&CellProblem> = Vec::new();
    let mut slots = Vec::with_capacity(items.len());
    for item in &items {
        slots.push(match &item.job {
            Job::Exact(_) => None,
            Job::Search(p) if cfg.cache => {
                let key = (p.variant.name(), quantized(p, cfg.quantization));
                Some(*slot_of.entry(key).or_insert_with(|| {
                    unique.push(p);
                    unique.len() - 1
                }))
            }
            Job::Search(p) => {
                unique.push(p);
                Some(unique.len() - 1)
            }
        });
    }
    let solved: Vec<Term> = unique.par_iter().map(|p| solve(p, densities, &cfg.search)).collect::<Result<_>>()?;

    let contributions: Vec<Contribution> = items
        .iter()
        .zip(&slots)
        .map(|(item, slot)| {
            let t = match (&item.job, slot) {
                (Job::Exact(v), _) => Term { upper: *v, lower: Some(*v) },
                (Job::Search(_), Some(s)) => solved[*s],
                (Job::Search(_), None) => unreachable!("search jobs have a slot"),
            };
            Contribution {
                term: item.term.into(),
                index: item.index,
                x: item.x.clone(),
                weight: item.weight,
                upper: t.upper,
                lower: t.lower,
            }
        })
        .collect();

    let term = |name: &str| {
        let parts: Vec<Term> = contributions
            .iter()
            .filter(|c| c.term == name)
            .map(|c| Term { upper: c.upper * c.weight, lower: c.lower.map(|l| l * c.weight) })
            .collect();
        if parts.is_empty() {
            Term::ZERO
        } else {
            Term::sum(&parts)
        }
    };
    let (bulk1, bulk2, surf1, surf2) = (term("bulk1"), term("bulk2"), term("surf1"), term("surf2"));
    let i1 = bulk1.add(surf1);
    let i2 = bulk2.add(surf2);
    let total = i1.add(i2);
    let grid_step = (0..n).map(|k| domain.cell_size(k)).fold(0.0, f64::max);
    Ok(RelaxedEnergyReport {
        bulk1,
        bulk2,
        surf1,
        surf2,
        i1,
        i2,
        total,
        grid_step,
        cache: CacheStats { problems: items.len(), solved: unique.len() },
        contributions,
    })
}
