//! Grid search over family parameters, then coordinate descent from the
//! best point of every level. Deterministic: evaluation order does not
//! depend on the thread count and ties go to the smallest family, then the
//! lexicographically smallest parameters.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::Family;
use super::{CellProblem, CompetitorDescriptor, EstimateResult};
use crate::densities::DensityTriple;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Number of search levels; level `k` sweeps continuous parameters on
    /// a grid of spacing `2^-k` of their range and staircases up to `k`
    /// slabs per axis.
    pub budget: usize,
    /// Cells per axis of the competitor grid (even, at least 4).
    pub resolution: usize,
    /// Restrict to these families (by name).
    pub families: Option<Vec<String>>,
    pub descent_iterations: usize,
    /// Recorded in the result; the search itself is seed-free.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { budget: 3, resolution: 8, families: None, descent_iterations: 40, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub params: Vec<f64>,
    pub admissible: bool,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub result: EstimateResult,
    pub rows: Vec<SweepRow>,
}

impl Sweep {
    /// `family,param1..paramK,admissible,energy`, then a row of column
    /// shapes, then one row per competitor.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let k = self.rows.iter().map(|r| r.params.len()).max().unwrap_or(0);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["family".to_string()];
        header.extend((1..=k).map(|i| format!("param{i}")));
        header.extend(["admissible".to_string(), "energy".to_string()]);
        w.write_record(&header)?;
        let mut units = vec!["name".to_string()];
        units.extend((0..k).map(|_| "scalar".to_string()));
        units.extend(["bool".to_string(), "scalar (energy per unit cell)".to_string()]);
        w.write_record(&units)?;
        for r in &self.rows {
            let mut rec = vec![r.family.clone()];
            rec.extend((0..k).map(|i| r.params.get(i).map(|v| v.to_string()).unwrap_or_default()));
            rec.push(r.admissible.to_string());
            rec.push(r.energy.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

type Key = (Family, Vec<u64>);

fn key(f: Family, p: &[f64]) -> Key {
    (f, p.iter().map(|v| v.to_bits()).collect())
}

/// Energy order with a relative tie band, then family, then parameters.
fn compare(a: (f64, Family, &[f64]), b: (f64, Family, &[f64])) -> Ordering {
    let band = 1e-12 * a.0.abs().max(b.0.abs());
    if (a.0 - b.0).abs() > band {
        return a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal);
    }
    a.1.cmp(&b.1).then_with(|| {
        a.2.iter().zip(b.2).map(|(x, y)| x.total_cmp(y)).find(|o| *o != Ordering::Equal).unwrap_or(Ordering::Equal)
    })
}

struct State<'a> {
    problem: &'a CellProblem,
    densities: &'a DensityTriple,
    cfg: &'a SearchConfig,
    memo: HashMap<Key, Option<(bool, f64)>>,
    rows: Vec<(Family, SweepRow)>,
}

impl State<'_> {
    /// Evaluates the points not seen yet, in parallel, recording rows in
    /// input order.
    fn evaluate(&mut self, points: &[(Family, Vec<f64>)]) {
        let fresh: Vec<&(Family, Vec<f64>)> = {
            let mut seen = std::collections::HashSet::new();
            points.iter().filter(|(f, p)| !self.memo.contains_key(&key(*f, p)) && seen.insert(key(*f, p))).collect()
        };
        let (problem, densities, cfg) = (self.problem, self.densities, self.cfg);
        let results: Vec<Option<(bool, f64)>> = fresh
            .par_iter()
            .map(|(f, p)| {
                f.build(problem, cfg.resolution, p).map(|c| {
                    let e = c.evaluate(problem, densities);
                    (e.admissible, e.total)
                })
            })
            .collect();
        for ((f, p), r) in fresh.into_iter().zip(results) {
            self.memo.insert(key(*f, p), r);
            if let Some((admissible, energy)) = r {
                self.rows.push((*f, SweepRow { family: f.name().into(), params: p.clone(), admissible, energy }));
            }
        }
    }

    fn lookup(&self, f: Family, p: &[f64]) -> Option<f64> {
        match self.memo.get(&key(f, p)) {
            Some(Some((true, e))) => Some(*e),
            _ => None,
        }
    }

    fn best_of(&self, points: &[(Family, Vec<f64>)]) -> Option<(Family, Vec<f64>, f64)> {
        let mut best: Option<(Family, Vec<f64>, f64)> = None;
        for (f, p) in points {
            if let Some(e) = self.lookup(*f, p) {
                let better = match &best {
                    None => true,
                    Some((bf, bp, be)) => compare((e, *f, p), (*be, *bf, bp)) == Ordering::Less,
                };
                if better {
                    best = Some((*f, p.clone(), e));
                }
            }
        }
        best
    }

    fn descend(&mut self, start: (Family, Vec<f64>, f64), level: usize) {
        let (f, mut p, mut e) = start;
        let mask = f.real_mask(self.problem, self.cfg.resolution);
        let mut steps: Vec<f64> =
            mask.iter().map(|m| m.map_or(1.0, |(lo, hi)| (hi - lo) / (1u64 << (level + 1)) as f64)).collect();
        for _ in 0..self.cfg.descent_iterations {
            let mut candidates = Vec::new();
            for k in 0..p.len() {
                for sign in [-1.0, 1.0] {
                    let mut q = p.clone();
                    q[k] += sign * steps[k];
                    if f.valid(self.problem, self.cfg.resolution, &q) {
                        candidates.push((f, q));
                    }
                }
            }
            self.evaluate(&candidates);
            match self.best_of(&candidates) {
                Some((_, q, eq)) if compare((eq, f, &q), (e, f, &p)) == Ordering::Less => {
                    p = q;
                    e = eq;
                }
                _ => {
                    let mut refined = false;
                    for (s, m) in steps.iter_mut().zip(&mask) {
                        if let Some((lo, hi)) = m {
                            if *s > 1e-9 * (hi - lo) {
                                *s *= 0.5;
                                refined = true;
                            }
                        }
                    }
                    if !refined {
                        break;
                    }
                }
            }
        }
    }
}

pub(crate) fn run(problem: &CellProblem, densities: &DensityTriple, cfg: &SearchConfig) -> Result<Sweep> {
    if cfg.budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    if cfg.resolution < 4 || !cfg.resolution.is_multiple_of(2) {
        return Err(Error::InvalidArgument("competitor resolution must be even and at least 4".into()));
    }
    let allowed = Family::for_variant(&problem.variant);
    let families: Vec<Family> = match &cfg.families {
        None => allowed.to_vec(),
        Some(names) => {
            let mut fs = Vec::new();
            for name in names {
                let f = Family::from_name(name)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown competitor family `{name}`")))?;
                if !allowed.contains(&f) {
                    return Err(Error::InvalidArgument(format!(
                        "family `{name}` does not apply to {}",
                        problem.variant.name()
                    )));
                }
                fs.push(f);
            }
            fs.sort();
            fs.dedup();
            fs
        }
    };
    let mut state = State { problem, densities, cfg, memo: HashMap::new(), rows: Vec::new() };
    for level in 1..=cfg.budget {
        let points: Vec<(Family, Vec<f64>)> = families
            .iter()
            .flat_map(|f| f.grid(problem, cfg.resolution, level).into_iter().map(move |p| (*f, p)))
            .collect();
        state.evaluate(&points);
        if let Some(start) = state.best_of(&points) {
            state.descend(start, level);
        }
    }
    let all: Vec<(Family, Vec<f64>)> = state.rows.iter().map(|(f, r)| (*f, r.params.clone())).collect();
    let (f, p, e) = state.best_of(&all).ok_or_else(|| Error::NoAdmissibleCompetitor { problem: problem.to_json() })?;
    Ok(Sweep {
        result: EstimateResult {
            upper: e,
            lower: None,
            best: CompetitorDescriptor { family: f.name().into(), params: p },
            evaluations: state.rows.len(),
            seed: cfg.seed,
        },
        rows: state.rows.into_iter().map(|(_, r)| r).collect(),
    })
}
