//! Sampling-based checks of the growth, continuity, recession,
//! coercivity, homogeneity and subadditivity hypotheses on a triple.
//!
//! Each check maximizes a residual or ratio over random inputs: a base
//! batch, batches at escalated magnitudes, then deterministic hill climbing
//! from the best samples. Everything is driven by one ChaCha seed, so every
//! witness can be regenerated.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{recession, Bulk, DensityTriple, Interfacial, RecessionOptions, DEFAULT_SCHEDULE};
use crate::tensor::norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    /// Samples per check at unit magnitude.
    pub samples: usize,
    /// Tensor entries are uniform in `[-range, range]` (times the escalation scale).
    pub range: f64,
    pub seed: u64,
    pub escalation: Vec<f64>,
    /// Samples per escalated magnitude.
    pub escalation_samples: usize,
    /// Hill-climbing steps per starting point.
    pub refine_steps: usize,
    pub refine_starts: usize,
    /// Box from which material points are drawn; defaults to `[0, 1]^N`.
    pub x_lower: Option<Vec<f64>>,
    pub x_upper: Option<Vec<f64>>,
    /// Radii for the continuity-in-`x` checks.
    pub deltas: Vec<f64>,
    pub schedule: Vec<f64>,
    /// Relative slack for exact identities and declared bounds.
    pub tolerance: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            range: 10.0,
            seed: 0,
            escalation: vec![1.0, 10.0, 100.0, 1000.0],
            escalation_samples: 1000,
            refine_steps: 400,
            refine_starts: 4,
            x_lower: None,
            x_upper: None,
            deltas: vec![1e-1, 1e-2, 1e-3],
            schedule: DEFAULT_SCHEDULE.to_vec(),
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// A concrete input attaining the reported extremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Index in the sample stream of the check, or `None` when the point
    /// came out of hill climbing.
    pub sample: Option<usize>,
    pub scale: f64,
    pub inputs: BTreeMap<String, Vec<f64>>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisEntry {
    pub id: String,
    pub component: String,
    pub verdict: Verdict,
    /// Whether a failure contradicts something the triple claims.
    pub hard: bool,
    pub measured: Option<f64>,
    pub declared: Option<f64>,
    /// Declared constant within a factor 1.01 of the measured one.
    pub tight: Option<bool>,
    /// `(magnitude, extremum at that magnitude)`.
    pub escalation: Vec<(f64, f64)>,
    pub worst: Option<Witness>,
    pub samples: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub seed: u64,
    pub entries: Vec<HypothesisEntry>,
}

impl HypothesisReport {
    pub fn entry(&self, id: &str, component: &str) -> Option<&HypothesisEntry> {
        self.entries.iter().find(|e| e.id == id && e.component == component)
    }

    pub fn hard_failures(&self) -> Vec<&HypothesisEntry> {
        self.entries.iter().filter(|e| e.verdict == Verdict::Fail && e.hard).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.verdict != Verdict::Fail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// Material point inside the sampling box.
    Point,
    /// Tensor entries scaled by the magnitude.
    Free,
    /// Unit vector.
    Unit,
    /// Positive factor in `(0, 10]`.
    Factor,
    /// Number in `[0, 1]`.
    Fraction,
}

#[derive(Debug, Clone)]
struct Part {
    name: &'static str,
    len: usize,
    kind: Kind,
}

struct Layout {
    parts: Vec<Part>,
    /// Pairs `(src, dst)` that are sometimes drawn as `dst = (1 + u) src`.
    aligned: Vec<(usize, usize)>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Layout {
    fn new(cfg: &SamplerConfig, n: usize, parts: Vec<Part>) -> Self {
        Layout {
            parts,
            aligned: Vec::new(),
            lower: cfg.x_lower.clone().unwrap_or_else(|| vec![0.0; n]),
            upper: cfg.x_upper.clone().unwrap_or_else(|| vec![1.0; n]),
        }
    }

    fn aligned(mut self, pairs: &[(usize, usize)]) -> Self {
        self.aligned = pairs.to_vec();
        self
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for p in &self.parts {
            off.push(off.last().unwrap() + p.len);
        }
        off
    }

    fn sample(&self, rng: &mut ChaCha8Rng, range: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for p in &self.parts {
            match p.kind {
                Kind::Point => {
                    for i in 0..p.len {
                        out.push(rng.gen_range(self.lower[i]..=self.upper[i]));
                    }
                }
                Kind::Free => out.extend((0..p.len).map(|_| rng.gen_range(-range..=range))),
                Kind::Unit => loop {
                    let v: Vec<f64> = (0..p.len).map(|_| normal(rng)).collect();
                    let l = norm(&v);
                    if l > 1e-8 {
                        out.extend(v.iter().map(|x| x / l));
                        break;
                    }
                },
                Kind::Factor => out.push(rng.gen_range(1e-3..=10.0)),
                Kind::Fraction => out.push(rng.gen_range(0.0..=1.0)),
            }
        }
        if !self.aligned.is_empty() && rng.gen_bool(0.25) {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            let off = self.offsets();
            for &(s, d) in &self.aligned {
                for k in 0..self.parts[s].len {
                    out[off[d] + k] = (1.0 + u) * out[off[s] + k];
                }
            }
        }
        out
    }

    fn normalize(&self, v: &[f64]) -> Vec<f64> {
        let off = self.offsets();
        let mut out = v.to_vec();
        for (i, p) in self.parts.iter().enumerate() {
            let s = &mut out[off[i]..off[i + 1]];
            match p.kind {
                Kind::Point => {
                    for (k, x) in s.iter_mut().enumerate() {
                        *x = x.clamp(self.lower[k], self.upper[k]);
                    }
                }
                Kind::Free => {}
                Kind::Unit => {
                    let l = norm(s);
                    if l > 0.0 {
                        s.iter_mut().for_each(|x| *x /= l);
                    }
                }
                Kind::Factor => s[0] = s[0].clamp(1e-3, 10.0),
                Kind::Fraction => s[0] = s[0].clamp(0.0, 1.0),
            }
        }
        out
    }

    fn split<'a>(&self, v: &'a [f64]) -> Vec<&'a [f64]> {
        let off = self.offsets();
        (0..self.parts.len()).map(|i| &v[off[i]..off[i + 1]]).collect()
    }

    fn decode(&self, v: &[f64]) -> BTreeMap<String, Vec<f64>> {
        self.parts.iter().zip(self.split(v)).map(|(p, s)| (p.name.to_string(), s.to_vec())).collect()
    }

    fn magnitudes(&self, v: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(v.len());
        for (i, (p, s)) in self.parts.iter().zip(self.split(v)).enumerate() {
            let mag = match p.kind {
                Kind::Point => (0..p.len).map(|k| self.upper[k] - self.lower[k]).fold(0.0, f64::max),
                Kind::Unit | Kind::Fraction => 1.0,
                Kind::Factor => s[0].abs(),
                Kind::Free => s.iter().fold(1e-6f64, |a, x| a.max(x.abs())),
            };
            let _ = i;
            out.extend(std::iter::repeat_n(mag, p.len));
        }
        out
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

type Objective<'a> = dyn Fn(&[&[f64]]) -> f64 + Sync + 'a;

struct Extremum {
    value: f64,
    witness: Option<Witness>,
    per_scale: Vec<(f64, f64)>,
    count: usize,
}

fn search(layout: &Layout, cfg: &SamplerConfig, seed: u64, objective: &Objective<'_>) -> Extremum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eval = |v: &[f64]| {
        let v = layout.normalize(v);
        let r = objective(&layout.split(&v));
        if r.is_nan() {
            f64::NEG_INFINITY
        } else {
            r
        }
    };
    let mut index = 0usize;
    let mut pool: Vec<(f64, usize, f64, Vec<f64>)> = Vec::new();
    let mut per_scale = Vec::new();
    let mut count = 0usize;
    for (k, &scale) in cfg.escalation.iter().enumerate() {
        let m = if k == 0 { cfg.samples } else { cfg.escalation_samples };
        let batch: Vec<Vec<f64>> = (0..m).map(|_| layout.sample(&mut rng, cfg.range * scale)).collect();
        let values: Vec<f64> = batch.par_iter().map(|v| eval(v)).collect();
        count += m;
        let mut best = f64::NEG_INFINITY;
        for (i, (v, x)) in values.iter().zip(batch).enumerate() {
            best = best.max(*v);
            pool.push((*v, index + i, scale, x));
        }
        index += m;
        per_scale.push((scale, best));
        // keep the pool small: the best few per scale
        pool.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        pool.truncate(cfg.refine_starts.max(1) * 2);
    }
    let mut best = pool.first().cloned();
    let mut refined = false;
    for start in pool.iter().take(cfg.refine_starts) {
        let (mut f, _, scale, mut x) = start.clone();
        if !f.is_finite() {
            continue;
        }
        x = layout.normalize(&x);
        let mut step = 0.2;
        let mut misses = 0;
        for _ in 0..cfg.refine_steps {
            let mags = layout.magnitudes(&x);
            let cand: Vec<f64> = x.iter().zip(&mags).map(|(v, m)| v + step * m * rng.gen_range(-1.0..=1.0)).collect();
            let cand = layout.normalize(&cand);
            let g = eval(&cand);
            count += 1;
            if g > f {
                f = g;
                x = cand;
                misses = 0;
            } else {
                misses += 1;
                if misses >= 20 {
                    step *= 0.5;
                    misses = 0;
                }
            }
        }
        if best.as_ref().is_none_or(|b| f > b.0) {
            best = Some((f, usize::MAX, scale, x));
            refined = true;
        }
    }
    let _ = refined;
    match best {
        Some((value, idx, scale, x)) => {
            let x = layout.normalize(&x);
            Extremum {
                value,
                witness: Some(Witness {
                    sample: (idx != usize::MAX).then_some(idx),
                    scale,
                    inputs: layout.decode(&x),
                    residual: value,
                }),
                per_scale,
                count,
            }
        }
        None => Extremum { value: f64::NEG_INFINITY, witness: None, per_scale, count },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Sense {
    /// Smallest constant `K` with `ratio ≤ K`.
    Sup,
    /// Largest constant `c` with `ratio ≥ c` (the objective is `−ratio`).
    Inf,
    /// Residual of an identity that must vanish.
    Zero,
}

struct Check<'a> {
    id: &'static str,
    component: &'a str,
    sense: Sense,
    declared: Option<f64>,
    /// Failing contradicts a claim of the triple.
    hard: bool,
    note_on_fail: Option<&'static str>,
}

fn judge(check: Check<'_>, ext: Extremum, tol: f64) -> HypothesisEntry {
    let sign = if check.sense == Sense::Inf { -1.0 } else { 1.0 };
    let measured = sign * ext.value;
    let per_scale: Vec<(f64, f64)> = ext.per_scale.iter().map(|(s, v)| (*s, sign * v)).collect();
    let mut note = None;
    let (verdict, tight) = match check.sense {
        Sense::Zero => (if measured <= tol { Verdict::Pass } else { Verdict::Fail }, None),
        Sense::Sup => match check.declared {
            Some(k) => {
                let ok = measured <= k * (1.0 + tol) + tol;
                (if ok { Verdict::Pass } else { Verdict::Fail }, Some(measured * 1.01 >= k))
            }
            None => {
                let first = per_scale.first().map_or(0.0, |p| p.1);
                let last = per_scale.last().map_or(0.0, |p| p.1);
                let grows = !measured.is_finite() || (last > 2.0 * first && last > tol);
                if grows {
                    note = Some("measured constant grows with input magnitude".to_string());
                }
                (if grows { Verdict::Fail } else { Verdict::Pass }, None)
            }
        },
        Sense::Inf => {
            let upper = per_scale.iter().map(|p| p.1).fold(0.0, f64::max);
            let vanishes = measured <= 1e-6 * upper.max(1.0) || !measured.is_finite();
            match check.declared {
                Some(c) if c > 0.0 => {
                    let ok = measured >= c * (1.0 - tol);
                    (if ok { Verdict::Pass } else { Verdict::Fail }, Some(measured <= 1.01 * c))
                }
                Some(_) | None => {
                    if vanishes {
                        (Verdict::Fail, check.declared.map(|_| true))
                    } else {
                        (Verdict::Pass, None)
                    }
                }
            }
        }
    };
    if verdict == Verdict::Fail && note.is_none() {
        note = check.note_on_fail.map(str::to_string);
    }
    HypothesisEntry {
        id: check.id.to_string(),
        component: check.component.to_string(),
        verdict,
        hard: check.hard,
        measured: Some(measured),
        declared: check.declared,
        tight,
        escalation: per_scale,
        worst: ext.witness,
        samples: ext.count,
        note,
    }
}

fn skipped(id: &str, component: &str, note: &str) -> HypothesisEntry {
    HypothesisEntry {
        id: id.to_string(),
        component: component.to_string(),
        verdict: Verdict::Skipped,
        hard: false,
        measured: None,
        declared: None,
        tight: None,
        escalation: Vec::new(),
        worst: None,
        samples: 0,
        note: Some(note.to_string()),
    }
}

fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn part(name: &'static str, len: usize, kind: Kind) -> Part {
    Part { name, len, kind }
}

/// Runs every check that applies to the components present in `triple`.
pub fn check_hypotheses(triple: &DensityTriple, cfg: &SamplerConfig) -> HypothesisReport {
    let mut entries = Vec::new();
    let mut tag = 0u64;
    let mut next = || {
        tag += 1;
        sub_seed(cfg.seed, tag)
    };
    let (d, n) = (triple.d, triple.n);
    match &triple.w {
        Some(w) => bulk_checks(w, d, n, cfg, &mut next, &mut entries),
        None => {
            for id in ["H1.upper", "H1.lower", "H2", "H3", "H4", "h1inf.upper", "h1inf.lower", "h2inf", "h3inf"] {
                entries.push(skipped(id, "W", "component absent"));
                next();
            }
        }
    }
    for (component, psi, len) in [("psi1", &triple.psi1, d), ("psi2", &triple.psi2, d * n)] {
        match psi {
            Some(p) => interfacial_checks(p, component, len, n, cfg, &mut next, &mut entries),
            None => {
                for id in ["H5.upper", "H5.lower", "H6", "H7", "H8"] {
                    entries.push(skipped(id, component, "component absent"));
                    next();
                }
            }
        }
    }
    HypothesisReport { seed: cfg.seed, entries }
}

fn continuity(
    cfg: &SamplerConfig,
    n: usize,
    payload: (&'static str, usize),
    extra: Option<(&'static str, usize)>,
    seed: u64,
    f: &(dyn Fn(&[f64], &[f64], &[f64], &[f64]) -> f64 + Sync),
    scale_of: &(dyn Fn(&[f64], &[f64]) -> f64 + Sync),
) -> (Extremum, Vec<(f64, f64)>) {
    // |f(x) − f(x0)| / scale with |x − x0| ≤ δ, for each δ of the grid.
    let mut per_delta = Vec::new();
    let mut best: Option<Extremum> = None;
    let per = (cfg.samples / cfg.deltas.len().max(1)).max(1);
    let sub = SamplerConfig { samples: per, escalation: vec![1.0], ..cfg.clone() };
    for (k, &delta) in cfg.deltas.iter().enumerate() {
        let mut parts = vec![
            part("x0", n, Kind::Point),
            part("direction", n, Kind::Unit),
            part("radius", 1, Kind::Fraction),
            part(payload.0, payload.1, Kind::Free),
        ];
        if let Some((name, len)) = extra {
            parts.push(part(name, len, Kind::Free));
        }
        let layout = Layout::new(cfg, n, parts);
        let (lo, hi) = (layout.lower.clone(), layout.upper.clone());
        let obj = move |p: &[&[f64]]| {
            let x: Vec<f64> = (0..n).map(|i| (p[0][i] + delta * p[2][0] * p[1][i]).clamp(lo[i], hi[i])).collect();
            let e = if p.len() > 4 { p[4] } else { &[][..] };
            let s = scale_of(p[3], e);
            (f(&x, p[3], e, p[1]) - f(p[0], p[3], e, p[1])).abs() / s
        };
        let ext = search(&layout, &sub, sub_seed(seed, k as u64), &obj);
        per_delta.push((delta, ext.value));
        if best.as_ref().is_none_or(|b| ext.value / delta > b.value) {
            let mut e = ext;
            e.value /= delta;
            best = Some(e);
        }
    }
    let mut ext = best.expect("at least one radius");
    ext.per_scale = per_delta.clone();
    (ext, per_delta)
}

fn modulus_entry(id: &str, component: &str, ext: Extremum, per_delta: Vec<(f64, f64)>, tol: f64) -> HypothesisEntry {
    let first = per_delta.first().map_or(0.0, |p| p.1);
    let last = per_delta.last().map_or(0.0, |p| p.1);
    let ok = last <= tol || last <= 0.5 * first;
    HypothesisEntry {
        id: id.to_string(),
        component: component.to_string(),
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        hard: true,
        measured: Some(ext.value),
        declared: None,
        tight: None,
        escalation: per_delta,
        worst: ext.witness,
        samples: ext.count,
        note: Some(if ok {
            "consistent with continuity in x (finite radius grid)".to_string()
        } else {
            "modulus does not shrink with the radius".to_string()
        }),
    }
}

fn bulk_checks(
    w: &Bulk,
    d: usize,
    n: usize,
    cfg: &SamplerConfig,
    next: &mut dyn FnMut() -> u64,
    out: &mut Vec<HypothesisEntry>,
) {
    let dn = d * n;
    let dnn = d * n * n;
    let wd = w.density.as_ref();
    let k = &w.constants;
    let tol = cfg.tolerance;
    let inputs = || vec![part("x", n, Kind::Point), part("A", dn, Kind::Free), part("M", dnn, Kind::Free)];
    let winf = |x: &[f64], a: &[f64], m: &[f64]| -> f64 {
        wd.recession(x, a, m).unwrap_or_else(|| {
            recession(wd, x, a, m, &cfg.schedule, &RecessionOptions::default()).map(|r| r.value).unwrap_or(f64::NAN)
        })
    };

    let layout = Layout::new(cfg, n, inputs());
    let obj = |p: &[&[f64]]| wd.eval(p[0], p[1], p[2]) / (1.0 + norm(p[1]) + norm(p[2]));
    let ext = search(&layout, cfg, next(), &obj);
    out.push(judge(
        Check { id: "H1.upper", component: "W", sense: Sense::Sup, declared: k.growth, hard: true, note_on_fail: None },
        ext,
        tol,
    ));

    // smallest C with s/C − C ≤ W, s = |A| + |M|
    let obj = |p: &[&[f64]]| {
        let s = norm(p[1]) + norm(p[2]);
        let v = wd.eval(p[0], p[1], p[2]);
        2.0 * s / (v + (v * v + 4.0 * s).sqrt())
    };
    let ext = search(&layout, cfg, next(), &obj);
    out.push(judge(
        Check {
            id: "H1.lower",
            component: "W",
            sense: Sense::Sup,
            declared: if k.coercive { k.growth } else { None },
            hard: k.coercive,
            note_on_fail: (!k.coercive).then_some("non-coercive bulk density: lower bound not claimed"),
        },
        ext,
        tol,
    ));

    let pair = Layout::new(
        cfg,
        n,
        vec![
            part("x", n, Kind::Point),
            part("A1", dn, Kind::Free),
            part("M1", dnn, Kind::Free),
            part("A2", dn, Kind::Free),
            part("M2", dnn, Kind::Free),
        ],
    )
    .aligned(&[(1, 3), (2, 4)]);
    let obj = |p: &[&[f64]]| {
        let da: f64 = norm(&crate::tensor::sub(p[1], p[3]));
        let dm: f64 = norm(&crate::tensor::sub(p[2], p[4]));
        if da + dm < 1e-12 {
            return f64::NAN;
        }
        (wd.eval(p[0], p[1], p[2]) - wd.eval(p[0], p[3], p[4])).abs() / (da + dm)
    };
    let ext = search(&pair, cfg, next(), &obj);
    out.push(judge(
        Check { id: "H2", component: "W", sense: Sense::Sup, declared: k.lipschitz, hard: true, note_on_fail: None },
        ext,
        tol,
    ));

    let f = |x: &[f64], a: &[f64], m: &[f64], _nu: &[f64]| wd.eval(x, a, m);
    let scale = |a: &[f64], m: &[f64]| 1.0 + norm(a) + norm(m);
    let (ext, per) = continuity(cfg, n, ("A", dn), Some(("M", dnn)), next(), &f, &scale);
    out.push(modulus_entry("H3", "W", ext, per, tol));

    let alpha = k.alpha.unwrap_or(0.5);
    let threshold = k.threshold.unwrap_or(0.0);
    let ts: Vec<f64> = cfg.schedule.iter().copied().filter(|t| *t > threshold).collect();
    let obj = |p: &[&[f64]]| {
        let l = norm(p[2]);
        if l < 1e-12 {
            return f64::NAN;
        }
        let unit: Vec<f64> = p[2].iter().map(|v| v / l).collect();
        let limit = winf(p[0], p[1], &unit);
        ts.iter()
            .map(|&t| {
                let tm: Vec<f64> = unit.iter().map(|v| v * t).collect();
                (limit - wd.eval(p[0], p[1], &tm) / t).abs() * t.powf(alpha)
            })
            .fold(0.0, f64::max)
    };
    let h4cfg =
        SamplerConfig { samples: cfg.samples / 10, escalation_samples: cfg.escalation_samples / 10, ..cfg.clone() };
    let ext = search(&layout, &h4cfg, next(), &obj);
    out.push(judge(
        Check {
            id: "H4",
            component: "W",
            sense: Sense::Sup,
            declared: k.envelope,
            hard: true,
            note_on_fail: Some("recession envelope not uniform in the inputs"),
        },
        ext,
        tol,
    ));

    let obj = |p: &[&[f64]]| {
        let l = norm(p[2]);
        if l < 1e-12 {
            return f64::NAN;
        }
        winf(p[0], p[1], p[2]) / l
    };
    let ext = search(&layout, &h4cfg, next(), &obj);
    out.push(judge(
        Check {
            id: "h1inf.upper",
            component: "W",
            sense: Sense::Sup,
            declared: k.growth,
            hard: true,
            note_on_fail: None,
        },
        ext,
        tol,
    ));
    let neg = |p: &[&[f64]]| -obj(p);
    let ext = search(&layout, &h4cfg, next(), &neg);
    out.push(judge(
        Check {
            id: "h1inf.lower",
            component: "W",
            sense: Sense::Inf,
            declared: if k.coercive { k.growth.map(|c| 1.0 / c) } else { None },
            hard: k.coercive,
            note_on_fail: Some("recession function not coercive"),
        },
        ext,
        tol,
    ));

    let obj = |p: &[&[f64]]| {
        let dm = norm(&crate::tensor::sub(p[2], p[4]));
        if dm < 1e-12 {
            return f64::NAN;
        }
        (winf(p[0], p[1], p[2]) - winf(p[0], p[3], p[4])).abs() / dm
    };
    let ext = search(&pair, &h4cfg, next(), &obj);
    out.push(judge(
        Check { id: "h2inf", component: "W", sense: Sense::Sup, declared: k.lipschitz, hard: true, note_on_fail: None },
        ext,
        tol,
    ));

    let f = |x: &[f64], a: &[f64], m: &[f64], _nu: &[f64]| winf(x, a, m);
    let scale = |_a: &[f64], m: &[f64]| norm(m).max(1e-12);
    let sub = SamplerConfig { samples: cfg.samples / 10, ..cfg.clone() };
    let (ext, per) = continuity(&sub, n, ("A", dn), Some(("M", dnn)), next(), &f, &scale);
    out.push(modulus_entry("h3inf", "W", ext, per, tol));
}

fn interfacial_checks(
    psi: &Interfacial,
    component: &str,
    len: usize,
    n: usize,
    cfg: &SamplerConfig,
    next: &mut dyn FnMut() -> u64,
    out: &mut Vec<HypothesisEntry>,
) {
    let p = psi.density.as_ref();
    let k = &psi.constants;
    let tol = cfg.tolerance;
    let layout = Layout::new(
        cfg,
        n,
        vec![part("x", n, Kind::Point), part("payload", len, Kind::Free), part("nu", n, Kind::Unit)],
    );
    let ratio = |q: &[&[f64]]| {
        let l = norm(q[1]);
        if l < 1e-12 {
            return f64::NAN;
        }
        p.eval(q[0], q[1], q[2]) / l
    };
    let ext = search(&layout, cfg, next(), &ratio);
    out.push(judge(
        Check { id: "H5.upper", component, sense: Sense::Sup, declared: k.upper, hard: true, note_on_fail: None },
        ext,
        tol,
    ));
    let neg = |q: &[&[f64]]| -ratio(q);
    let ext = search(&layout, cfg, next(), &neg);
    out.push(judge(
        Check {
            id: "H5.lower",
            component,
            sense: Sense::Inf,
            declared: k.lower,
            hard: k.coercive,
            note_on_fail: Some(if k.coercive {
                "coercivity claimed but violated"
            } else {
                "non-coercive: interfacial coercivity not claimed (admissible for x-independent densities under BV² bounds)"
            }),
        },
        ext,
        tol,
    ));

    let f = |x: &[f64], q: &[f64], _e: &[f64], nu: &[f64]| p.eval(x, q, nu);
    let scale = |q: &[f64], _e: &[f64]| norm(q).max(1e-12);
    let (ext, per) = continuity(cfg, n, ("payload", len), None, next(), &f, &scale);
    out.push(modulus_entry("H6", component, ext, per, tol));

    let homog = Layout::new(
        cfg,
        n,
        vec![
            part("x", n, Kind::Point),
            part("payload", len, Kind::Free),
            part("nu", n, Kind::Unit),
            part("t", 1, Kind::Factor),
        ],
    );
    let obj = |q: &[&[f64]]| {
        let t = q[3][0];
        let scaled: Vec<f64> = q[1].iter().map(|v| v * t).collect();
        let a = p.eval(q[0], &scaled, q[2]);
        let b = t * p.eval(q[0], q[1], q[2]);
        (a - b).abs() / (1.0 + a.abs() + b.abs())
    };
    let ext = search(&homog, cfg, next(), &obj);
    out.push(judge(
        Check {
            id: "H7",
            component,
            sense: Sense::Zero,
            declared: None,
            hard: true,
            note_on_fail: Some("not positively homogeneous of degree one"),
        },
        ext,
        tol,
    ));

    let sub = Layout::new(
        cfg,
        n,
        vec![
            part("x", n, Kind::Point),
            part("payload1", len, Kind::Free),
            part("payload2", len, Kind::Free),
            part("nu", n, Kind::Unit),
        ],
    );
    let obj = |q: &[&[f64]]| {
        let sum = crate::tensor::add(q[1], q[2]);
        let a = p.eval(q[0], &sum, q[3]);
        let b = p.eval(q[0], q[1], q[3]) + p.eval(q[0], q[2], q[3]);
        ((a - b) / (1.0 + b.abs())).max(0.0)
    };
    let ext = search(&sub, cfg, next(), &obj);
    out.push(judge(
        Check {
            id: "H8",
            component,
            sense: Sense::Zero,
            declared: None,
            hard: true,
            note_on_fail: Some("not subadditive"),
        },
        ext,
        tol,
    ));
}
