//! Explicit fields: zero-trace staircases with prescribed gradient,
//! piecewise-constant approximation, gradient primitives, elementary jumps
//! and the approximating sequences of a second-order structured
//! deformation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::densities::expr::{Bindings, Dual, Expr, Slot};
use crate::error::{Error, Result};
use crate::fields::{
    l1_distance, BoundaryData, BoxDomain, CellwiseField, PiecewiseAffineField, PiecewiseConstantField, Sbv2Field,
    ValueShape,
};
use crate::tensor::tensor3_to_slope;

/// `(g, G, Γ)` on a common grid. `Γ` is cellwise constant and stored in
/// the middle-slot tensor convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sd2Triple {
    g: PiecewiseAffineField,
    #[serde(rename = "G")]
    big_g: PiecewiseAffineField,
    gamma: PiecewiseConstantField,
}

impl Sd2Triple {
    pub fn new(g: PiecewiseAffineField, big_g: PiecewiseAffineField, gamma: PiecewiseConstantField) -> Result<Self> {
        let domain = g.domain();
        if big_g.domain() != domain || gamma.domain() != domain {
            return Err(Error::ShapeMismatch("g, G and Γ must share one grid".into()));
        }
        let n = domain.dim();
        if g.shape().dims().len() != 1 {
            return Err(Error::ShapeMismatch("g must be vector valued".into()));
        }
        let d = g.shape().len();
        if big_g.shape() != &ValueShape::matrix(d, n) {
            return Err(Error::ShapeMismatch(format!("G must have shape [{d}, {n}]")));
        }
        if gamma.shape() != &ValueShape::tensor3(d, n) {
            return Err(Error::ShapeMismatch(format!("Γ must have shape [{d}, {n}, {n}]")));
        }
        Ok(Self { g, big_g, gamma })
    }

    pub fn g(&self) -> &PiecewiseAffineField {
        &self.g
    }

    pub fn big_g(&self) -> &PiecewiseAffineField {
        &self.big_g
    }

    pub fn gamma(&self) -> &PiecewiseConstantField {
        &self.gamma
    }

    pub fn domain(&self) -> &BoxDomain {
        self.g.domain()
    }

    pub fn d(&self) -> usize {
        self.g.shape().len()
    }

    pub fn n(&self) -> usize {
        self.domain().dim()
    }
}

/// Zero-trace field with cellwise gradient `a` (`d×N`, row-major) on the
/// grid with `slabs[j]` slabs along axis `j`: one sawtooth per axis, each
/// slab centred so that lateral facet means vanish. Boundary mismatches
/// are carried as jumps against zero boundary data.
pub fn staircase_with_slabs(a: &[f64], d: usize, slabs: &[usize], domain: &BoxDomain) -> Result<PiecewiseAffineField> {
    let n = domain.dim();
    if a.len() != d * n {
        return Err(Error::ShapeMismatch(format!("gradient must have {d}×{n} entries")));
    }
    let grid = domain.with_resolution(slabs.to_vec())?;
    let f = PiecewiseConstantField::uniform(grid, ValueShape::matrix(d, n), a)?;
    gradient_primitive(&f)?.with_boundary(BoundaryData::zero(d, n))
}

/// [`staircase_with_slabs`] with `slabs` slabs along every axis.
pub fn staircase(a: &[f64], d: usize, slabs: usize, domain: &BoxDomain) -> Result<PiecewiseAffineField> {
    if slabs == 0 {
        return Err(Error::InvalidArgument("need at least one slab".into()));
    }
    staircase_with_slabs(a, d, &vec![slabs; domain.dim()], domain)
}

/// Cell-midpoint sampling of `u` on the grid refined `n` times.
pub fn piecewise_constant_approx(u: &dyn CellwiseField, n: usize) -> Result<PiecewiseConstantField> {
    if n == 0 {
        return Err(Error::InvalidArgument("refinement must be at least 1".into()));
    }
    let coarse = u.domain();
    PiecewiseConstantField::from_fn(coarse.refine(n), u.shape().clone(), |c| u.value_in_cell(coarse.locate(c), c))
}

/// Field whose cellwise gradient is `f`, each piece vanishing at its cell
/// centre. `f` has shape `[.., N]` with the derivative index last; the
/// result drops that index.
pub fn gradient_primitive(f: &PiecewiseConstantField) -> Result<PiecewiseAffineField> {
    let domain = f.domain().clone();
    let n = domain.dim();
    let dims = f.shape().dims();
    if dims.last() != Some(&n) || dims.len() < 2 {
        return Err(Error::ShapeMismatch(format!("gradient data must end in an axis of length {n}")));
    }
    let shape = ValueShape(dims[..dims.len() - 1].to_vec());
    let value = vec![0.0; domain.n_cells() * shape.len()];
    PiecewiseAffineField::new(domain, shape, value, f.values().to_vec())
}

/// Primitive of a cellwise constant third-order field given in the tensor
/// convention (`∇h = Γ` with `h` matrix valued).
pub fn tensor_primitive(gamma: &PiecewiseConstantField) -> Result<PiecewiseAffineField> {
    let domain = gamma.domain().clone();
    let n = domain.dim();
    let dims = gamma.shape().dims();
    if dims.len() != 3 || dims[1] != n || dims[2] != n {
        return Err(Error::ShapeMismatch(format!("Γ must have shape [d, {n}, {n}]")));
    }
    let d = dims[0];
    let k = d * n * n;
    let slope: Vec<f64> = gamma.values().chunks(k).flat_map(|t| tensor3_to_slope(t, d, n)).collect();
    let shape = ValueShape::matrix(d, n);
    let value = vec![0.0; domain.n_cells() * d * n];
    PiecewiseAffineField::new(domain, shape, value, slope)
}

/// `payload` above the mid-plane of the last axis and `0` below, with the
/// same step as boundary data. In cell problems the last axis is the
/// local image of `ν`. The resolution along the last axis must be even.
pub fn elementary_jump(payload: &[f64], shape: ValueShape, domain: &BoxDomain) -> Result<PiecewiseAffineField> {
    let n = domain.dim();
    let axis = n - 1;
    if !domain.resolution()[axis].is_multiple_of(2) {
        return Err(Error::InvalidArgument("resolution along the normal axis must be even".into()));
    }
    if payload.len() != shape.len() {
        return Err(Error::ShapeMismatch("payload does not match the value shape".into()));
    }
    let mid = 0.5 * (domain.lower()[axis] + domain.upper()[axis]);
    let m = shape.len();
    let slope = vec![0.0; m * n];
    PiecewiseAffineField::from_cells(domain.clone(), shape, |c| {
        (if c[axis] > mid { payload.to_vec() } else { vec![0.0; m] }, slope.clone())
    })?
    .with_boundary(BoundaryData::Step { payload: payload.to_vec(), axis, offset: mid })
}

/// Sampling density of the final piecewise-constant correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionGrid {
    /// Same grid as the gradient approximation (`n` per base cell).
    #[default]
    Same,
    /// `n²` per base cell.
    Squared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximatingSequence {
    pub n: usize,
    /// Refinement of the base grid on which `u` lives.
    pub refinement: usize,
    pub correction_grid: CorrectionGrid,
    pub u: Sbv2Field,
    /// `∫|u − g|`.
    pub l1_u: f64,
    /// `∫|∇u − G|`.
    pub l1_grad: f64,
    /// `n · max(l1_u, l1_grad)`.
    pub rate_constant: f64,
}

/// Member `u_n` of the approximating sequence of `sd2`.
///
/// `h` is the primitive of `Γ`; `v_n` samples `G − h` at the cell
/// midpoints of the `n`-refined grid; `w_n = v_n + h`; `h̃_n` is the
/// cellwise quadratic primitive of `w_n`; `h̄` samples `g − h̃_n`; and
/// `u_n = h̃_n + h̄`. Hence `∇²u_n = Γ` cellwise. Cellwise polynomials
/// have symmetric second derivatives, so `Γ` must be symmetric in its
/// last two indices. `u_n` keeps the boundary data of `g`, so its energy
/// charges the mismatch with that trace.
pub fn approximating_sequence(sd2: &Sd2Triple, n: usize, grid: CorrectionGrid) -> Result<ApproximatingSequence> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let base = sd2.domain();
    let (d, dim) = (sd2.d(), sd2.n());
    let h = tensor_primitive(sd2.gamma())?;
    let g_minus_h = sd2.big_g().sum(&scaled(&h, -1.0))?;
    let v = piecewise_constant_approx(&g_minus_h, n)?;
    let fine = v.domain().clone();
    // w_n = v_n + h on the fine grid
    let w = PiecewiseAffineField::from_cells(fine.clone(), ValueShape::matrix(d, dim), |c| {
        let cell = base.locate(c);
        let hv = h.value_in_cell(cell, c);
        let vv = v.cell_value(fine.locate(c));
        (vv.iter().zip(&hv).map(|(a, b)| a + b).collect(), h.cell_slope(cell).to_vec())
    })?;
    let cells = fine.n_cells();
    let tilde = Sbv2Field::new(fine.clone(), d, vec![0.0; cells * d], w.values().to_vec(), w.slopes().to_vec())?;
    let refinement = match grid {
        CorrectionGrid::Same => n,
        CorrectionGrid::Squared => n * n,
    };
    let (tilde, target) = if refinement == n {
        (tilde, fine)
    } else {
        let target = base.refine(refinement);
        (refine_sbv2(&tilde, &target), target)
    };
    // h̄ = midpoint samples of g − h̃_n, added to the constant parts
    let mut value = Vec::with_capacity(target.n_cells() * d);
    for cell in 0..target.n_cells() {
        let c = target.cell_center(cell);
        let gv = sd2.g().value_in_cell(base.locate(&c), &c);
        let tv = tilde.value_in_cell(cell, &c);
        value.extend(gv.iter().zip(&tv).zip(tilde.cell_value(cell)).map(|((g, t), own)| own + (g - t)));
    }
    let grads: Vec<f64> = (0..target.n_cells()).flat_map(|c| tilde.cell_gradient(c).to_vec()).collect();
    let hess: Vec<f64> = (0..target.n_cells()).flat_map(|c| tilde.cell_hessian(c).to_vec()).collect();
    let u = Sbv2Field::new(target, d, value, grads, hess)?.with_boundary(sd2.g().boundary().cloned())?;
    let l1_u = l1_distance(&u, sd2.g())?;
    let l1_grad = l1_distance(&u.gradient_field(), sd2.big_g())?;
    Ok(ApproximatingSequence {
        n,
        refinement,
        correction_grid: grid,
        rate_constant: n as f64 * l1_u.max(l1_grad),
        u,
        l1_u,
        l1_grad,
    })
}

fn scaled(f: &PiecewiseAffineField, s: f64) -> PiecewiseAffineField {
    PiecewiseAffineField::new(
        f.domain().clone(),
        f.shape().clone(),
        f.values().iter().map(|v| v * s).collect(),
        f.slopes().iter().map(|v| v * s).collect(),
    )
    .expect("same sizes")
}

fn refine_sbv2(u: &Sbv2Field, target: &BoxDomain) -> Sbv2Field {
    let src = u.domain();
    let d = u.components();
    let mut value = Vec::new();
    let mut grad = Vec::new();
    let mut hess = Vec::new();
    for cell in 0..target.n_cells() {
        let c = target.cell_center(cell);
        let parent = src.locate(&c);
        value.extend(u.value_in_cell(parent, &c));
        grad.extend(u.gradient_in_cell(parent, &c));
        hess.extend_from_slice(u.cell_hessian(parent));
    }
    Sbv2Field::new(target.clone(), d, value, grad, hess).expect("refinement preserves sizes")
}

/// Where the data of one field of a triple comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSource {
    /// Closed-form components in `y1..yN` (row-major), sampled at cell
    /// centres with their exact gradients.
    Expressions {
        expressions: Vec<String>,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    /// Cellwise constant table, one row of components per cell.
    Table { cells: Vec<Vec<f64>> },
    /// JSON field file.
    File { file: String },
}

/// Serializable description of an [`Sd2Triple`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sd2Spec {
    pub domain: BoxDomain,
    pub d: usize,
    pub g: FieldSource,
    #[serde(rename = "G")]
    pub big_g: FieldSource,
    pub gamma: FieldSource,
}

impl Sd2Spec {
    /// Builds the triple; relative file paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<Sd2Triple> {
        let n = self.domain.dim();
        let d = self.d;
        let g = affine_from_source(&self.g, &self.domain, ValueShape::vector(d), base)?;
        let big_g = affine_from_source(&self.big_g, &self.domain, ValueShape::matrix(d, n), base)?;
        let gamma = match &self.gamma {
            FieldSource::File { file } => {
                let text = std::fs::read_to_string(base.join(file))?;
                serde_json::from_str::<PiecewiseConstantField>(&text)?
            }
            other => {
                let f = affine_from_source(other, &self.domain, ValueShape::tensor3(d, n), base)?;
                PiecewiseConstantField::new(f.domain().clone(), f.shape().clone(), f.values().to_vec())?
            }
        };
        Sd2Triple::new(g, big_g, gamma)
    }
}

/// Samples a closed-form field: value and exact gradient at each centre.
pub fn sample_expressions(
    exprs: &[String],
    params: &BTreeMap<String, f64>,
    domain: &BoxDomain,
    shape: ValueShape,
) -> Result<PiecewiseAffineField> {
    if exprs.len() != shape.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} expressions for a field with {} components",
            exprs.len(),
            shape.len()
        )));
    }
    let parsed = exprs.iter().map(|s| Expr::parse(s)).collect::<Result<Vec<_>>>()?;
    for e in &parsed {
        if let Some(s) = e.slots().into_iter().find(|s| *s != Slot::Y) {
            return Err(Error::Expression(format!("field expressions may only use y, found {s:?}")));
        }
    }
    let n = domain.dim();
    let mut value = Vec::new();
    let mut slope = Vec::new();
    for cell in 0..domain.n_cells() {
        let c = domain.cell_center(cell);
        let y: Vec<Dual> = (0..n).map(|k| Dual::variable(c[k], n, k)).collect();
        let b = Bindings::new(1, n, params).bind(Slot::Y, &y);
        for e in &parsed {
            let v = e.eval(&b)?;
            value.push(v.v);
            slope.extend((0..n).map(|k| v.d.get(k).copied().unwrap_or(0.0)));
        }
    }
    PiecewiseAffineField::new(domain.clone(), shape, value, slope)
}

fn affine_from_source(
    src: &FieldSource,
    domain: &BoxDomain,
    shape: ValueShape,
    base: &Path,
) -> Result<PiecewiseAffineField> {
    let f = match src {
        FieldSource::Expressions { expressions, params } => {
            sample_expressions(expressions, params, domain, shape.clone())?
        }
        FieldSource::Table { cells } => {
            if cells.len() != domain.n_cells() || cells.iter().any(|r| r.len() != shape.len()) {
                return Err(Error::ShapeMismatch(format!(
                    "table needs {} rows of {} entries",
                    domain.n_cells(),
                    shape.len()
                )));
            }
            PiecewiseConstantField::new(domain.clone(), shape.clone(), cells.concat())?.to_affine()
        }
        FieldSource::File { file } => {
            let text = std::fs::read_to_string(base.join(file))?;
            serde_json::from_str::<PiecewiseAffineField>(&text)?
        }
    };
    if f.domain() != domain || f.shape() != &shape {
        return Err(Error::ShapeMismatch("field file does not match the declared domain or shape".into()));
    }
    Ok(f)
}
