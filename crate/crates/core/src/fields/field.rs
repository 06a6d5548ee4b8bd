use serde::{Deserialize, Serialize};

use super::domain::{BoxDomain, Facet, FacetKind};
use crate::error::{Error, Result};
use crate::quadrature::box_rule;

/// Default threshold below which a facet jump counts as no jump.
pub const DEFAULT_JUMP_TOLERANCE: f64 = 1e-12;

/// Value shape of a field: `[d]`, `[d, N]` or `[d, N, N]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueShape(pub Vec<usize>);

impl ValueShape {
    pub fn vector(d: usize) -> Self {
        Self(vec![d])
    }

    pub fn matrix(d: usize, n: usize) -> Self {
        Self(vec![d, n])
    }

    pub fn tensor3(d: usize, n: usize) -> Self {
        Self(vec![d, n, n])
    }

    /// Number of scalar components.
    pub fn len(&self) -> usize {
        self.0.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    /// Shape of the gradient of a field with this shape in `n` dimensions.
    pub fn with_derivative(&self, n: usize) -> Self {
        let mut v = self.0.clone();
        v.push(n);
        Self(v)
    }
}

/// Prescribed boundary values. Mismatches between a field's inner trace
/// and these values are carried as jump facets with the outward normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryData {
    /// `b(y) = constant + slope · y`, slope stored derivative-last.
    Affine { constant: Vec<f64>, slope: Vec<f64> },
    /// `payload` where `y_axis > offset`, zero where `y_axis < offset`.
    Step { payload: Vec<f64>, axis: usize, offset: f64 },
}

impl BoundaryData {
    pub fn zero(components: usize, n: usize) -> Self {
        BoundaryData::Affine { constant: vec![0.0; components], slope: vec![0.0; components * n] }
    }

    /// Linear boundary data `b(y) = slope · y`.
    pub fn linear(slope: Vec<f64>, n: usize) -> Self {
        let m = slope.len() / n;
        BoundaryData::Affine { constant: vec![0.0; m], slope }
    }

    pub fn components(&self) -> usize {
        match self {
            BoundaryData::Affine { constant, .. } => constant.len(),
            BoundaryData::Step { payload, .. } => payload.len(),
        }
    }

    pub fn value_at(&self, y: &[f64]) -> Vec<f64> {
        match self {
            BoundaryData::Affine { constant, slope } => {
                let n = y.len();
                constant
                    .iter()
                    .enumerate()
                    .map(|(c, v)| v + (0..n).map(|j| slope[c * n + j] * y[j]).sum::<f64>())
                    .collect()
            }
            BoundaryData::Step { payload, axis, offset } => {
                if y[*axis] > *offset {
                    payload.clone()
                } else {
                    vec![0.0; payload.len()]
                }
            }
        }
    }

    /// Exact mean of the data over a boundary facet.
    pub fn facet_mean(&self, domain: &BoxDomain, facet: &Facet) -> Vec<f64> {
        let centroid = domain.facet_centroid(facet);
        match self {
            BoundaryData::Affine { .. } => self.value_at(&centroid),
            BoundaryData::Step { payload, axis, offset } => {
                let frac = if *axis == facet.axis {
                    if centroid[*axis] > *offset {
                        1.0
                    } else if centroid[*axis] < *offset {
                        0.0
                    } else {
                        0.5
                    }
                } else {
                    let h = 0.5 * domain.cell_size(*axis);
                    ((centroid[*axis] + h - offset) / (2.0 * h)).clamp(0.0, 1.0)
                };
                payload.iter().map(|p| p * frac).collect()
            }
        }
    }
}

/// Common interface of the cellwise-polynomial fields on a [`BoxDomain`].
pub trait CellwiseField: Sync {
    fn domain(&self) -> &BoxDomain;
    fn shape(&self) -> &ValueShape;
    fn boundary(&self) -> Option<&BoundaryData>;
    fn tolerance(&self) -> f64;

    /// Value of the polynomial of `cell` at `y` (any point of its closure).
    fn value_in_cell(&self, cell: usize, y: &[f64]) -> Vec<f64>;

    /// Gradient (derivative index last) of the polynomial of `cell` at `y`.
    fn gradient_in_cell(&self, cell: usize, y: &[f64]) -> Vec<f64>;

    /// Constant cellwise second derivative, derivative-last layout, or
    /// `None` when the field is cellwise affine.
    fn hessian_in_cell(&self, _cell: usize) -> Option<Vec<f64>> {
        None
    }

    /// Mean of the inner trace of `cell` over one of its facets.
    fn facet_mean(&self, cell: usize, facet: &Facet) -> Vec<f64> {
        let d = self.domain();
        let centroid = d.facet_centroid(facet);
        if self.hessian_in_cell(cell).is_none() {
            return self.value_in_cell(cell, &centroid);
        }
        let half = d.facet_half_widths(facet);
        let tangential: Vec<usize> = (0..d.dim()).filter(|&a| a != facet.axis).collect();
        let th: Vec<f64> = tangential.iter().map(|&a| half[a]).collect();
        let rule = box_rule(&th, 2);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        let mut acc = vec![0.0; self.shape().len()];
        for (z, w) in &rule {
            let mut y = centroid.clone();
            for (t, &a) in tangential.iter().enumerate() {
                y[a] += z[t];
            }
            for (s, v) in acc.iter_mut().zip(self.value_in_cell(cell, &y)) {
                *s += w * v;
            }
        }
        if total > 0.0 {
            acc.iter_mut().for_each(|v| *v /= total);
        }
        acc
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::ShapeMismatch(format!("{what}: expected {want} entries, got {got}")));
    }
    Ok(())
}

fn check_boundary(bd: &Option<BoundaryData>, shape: &ValueShape, n: usize) -> Result<()> {
    if let Some(b) = bd {
        if b.components() != shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "boundary data has {} components, field has {}",
                b.components(),
                shape.len()
            )));
        }
        match b {
            BoundaryData::Affine { slope, .. } => check_len("boundary slope", slope.len(), shape.len() * n)?,
            BoundaryData::Step { axis, .. } if *axis >= n => {
                return Err(Error::InvalidArgument(format!("step axis {axis} out of range")))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Cellwise affine field `u(y) = value_K + slope_K · (y − center_K)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAffine", into = "RawAffine")]
pub struct PiecewiseAffineField {
    domain: BoxDomain,
    shape: ValueShape,
    value: Vec<f64>,
    slope: Vec<f64>,
    boundary: Option<BoundaryData>,
    tolerance: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAffine {
    domain: BoxDomain,
    shape: ValueShape,
    value: Vec<f64>,
    slope: Vec<f64>,
    #[serde(default)]
    boundary: Option<BoundaryData>,
    #[serde(default = "default_tol")]
    tolerance: f64,
}

fn default_tol() -> f64 {
    DEFAULT_JUMP_TOLERANCE
}

impl TryFrom<RawAffine> for PiecewiseAffineField {
    type Error = Error;
    fn try_from(r: RawAffine) -> Result<Self> {
        let f = PiecewiseAffineField::new(r.domain, r.shape, r.value, r.slope)?;
        f.with_boundary_opt(r.boundary).map(|f| f.with_tolerance(r.tolerance))
    }
}

impl From<PiecewiseAffineField> for RawAffine {
    fn from(f: PiecewiseAffineField) -> Self {
        RawAffine {
            domain: f.domain,
            shape: f.shape,
            value: f.value,
            slope: f.slope,
            boundary: f.boundary,
            tolerance: f.tolerance,
        }
    }
}

impl PiecewiseAffineField {
    pub fn new(domain: BoxDomain, shape: ValueShape, value: Vec<f64>, slope: Vec<f64>) -> Result<Self> {
        let m = shape.len();
        let n = domain.dim();
        check_len("cell values", value.len(), domain.n_cells() * m)?;
        check_len("cell slopes", slope.len(), domain.n_cells() * m * n)?;
        Ok(Self { domain, shape, value, slope, boundary: None, tolerance: DEFAULT_JUMP_TOLERANCE })
    }

    pub fn zero(domain: BoxDomain, shape: ValueShape) -> Self {
        let cells = domain.n_cells();
        let m = shape.len();
        let n = domain.dim();
        Self::new(domain, shape, vec![0.0; cells * m], vec![0.0; cells * m * n]).expect("consistent sizes")
    }

    /// Builds each cell from `f(center) = (value at center, slope)`.
    pub fn from_cells<F>(domain: BoxDomain, shape: ValueShape, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> (Vec<f64>, Vec<f64>),
    {
        let mut value = Vec::with_capacity(domain.n_cells() * shape.len());
        let mut slope = Vec::with_capacity(domain.n_cells() * shape.len() * domain.dim());
        for cell in 0..domain.n_cells() {
            let (v, s) = f(&domain.cell_center(cell));
            value.extend(v);
            slope.extend(s);
        }
        Self::new(domain, shape, value, slope)
    }

    /// The globally affine field `u(y) = constant + slope · y`.
    pub fn global_affine(domain: BoxDomain, constant: &[f64], slope: &[f64]) -> Result<Self> {
        let m = constant.len();
        let n = domain.dim();
        check_len("affine slope", slope.len(), m * n)?;
        let bd = BoundaryData::Affine { constant: constant.to_vec(), slope: slope.to_vec() };
        Self::from_cells(domain, ValueShape::vector(m), |c| (bd.value_at(c), slope.to_vec()))
    }

    pub fn with_boundary(self, boundary: BoundaryData) -> Result<Self> {
        self.with_boundary_opt(Some(boundary))
    }

    pub fn with_boundary_opt(mut self, boundary: Option<BoundaryData>) -> Result<Self> {
        check_boundary(&boundary, &self.shape, self.domain.dim())?;
        self.boundary = boundary;
        Ok(self)
    }

    pub fn without_boundary(mut self) -> Self {
        self.boundary = None;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// Reinterprets the value shape (same number of components).
    pub fn reshaped(mut self, shape: ValueShape) -> Result<Self> {
        check_len("reshape", shape.len(), self.shape.len())?;
        self.shape = shape;
        Ok(self)
    }

    pub fn cell_value(&self, cell: usize) -> &[f64] {
        let m = self.shape.len();
        &self.value[cell * m..(cell + 1) * m]
    }

    pub fn cell_slope(&self, cell: usize) -> &[f64] {
        let k = self.shape.len() * self.domain.dim();
        &self.slope[cell * k..(cell + 1) * k]
    }

    pub fn values(&self) -> &[f64] {
        &self.value
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slope
    }

    /// Cellwise gradient as a piecewise-constant field.
    pub fn gradient_field(&self) -> PiecewiseConstantField {
        PiecewiseConstantField {
            domain: self.domain.clone(),
            shape: self.shape.with_derivative(self.domain.dim()),
            values: self.slope.clone(),
        }
    }

    /// The same function on a grid `factor` times finer (boundary kept).
    pub fn refine(&self, factor: usize) -> Self {
        let fine = self.domain.refine(factor);
        let mut out = Self::from_cells(fine, self.shape.clone(), |c| {
            let parent = self.domain.locate(c);
            (self.value_in_cell(parent, c), self.cell_slope(parent).to_vec())
        })
        .expect("refinement preserves sizes");
        out.boundary = self.boundary.clone();
        out.tolerance = self.tolerance;
        out
    }

    /// Pointwise sum of two fields on the same grid (boundary of `self` kept).
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.domain != other.domain || self.shape != other.shape {
            return Err(Error::ShapeMismatch("sum of fields on different grids or shapes".into()));
        }
        let value = self.value.iter().zip(&other.value).map(|(a, b)| a + b).collect();
        let slope = self.slope.iter().zip(&other.slope).map(|(a, b)| a + b).collect();
        let mut out = Self::new(self.domain.clone(), self.shape.clone(), value, slope)?;
        out.boundary = self.boundary.clone();
        out.tolerance = self.tolerance;
        Ok(out)
    }
}

impl CellwiseField for PiecewiseAffineField {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn shape(&self) -> &ValueShape {
        &self.shape
    }
    fn boundary(&self) -> Option<&BoundaryData> {
        self.boundary.as_ref()
    }
    fn tolerance(&self) -> f64 {
        self.tolerance
    }
    fn value_in_cell(&self, cell: usize, y: &[f64]) -> Vec<f64> {
        let n = self.domain.dim();
        let c = self.domain.cell_center(cell);
        let s = self.cell_slope(cell);
        self.cell_value(cell)
            .iter()
            .enumerate()
            .map(|(i, v)| v + (0..n).map(|j| s[i * n + j] * (y[j] - c[j])).sum::<f64>())
            .collect()
    }
    fn gradient_in_cell(&self, cell: usize, _y: &[f64]) -> Vec<f64> {
        self.cell_slope(cell).to_vec()
    }
}

/// Cellwise constant field; its distributional derivative is pure jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstant", into = "RawConstant")]
pub struct PiecewiseConstantField {
    domain: BoxDomain,
    shape: ValueShape,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstant {
    domain: BoxDomain,
    shape: ValueShape,
    values: Vec<f64>,
}

impl TryFrom<RawConstant> for PiecewiseConstantField {
    type Error = Error;
    fn try_from(r: RawConstant) -> Result<Self> {
        PiecewiseConstantField::new(r.domain, r.shape, r.values)
    }
}

impl From<PiecewiseConstantField> for RawConstant {
    fn from(f: PiecewiseConstantField) -> Self {
        RawConstant { domain: f.domain, shape: f.shape, values: f.values }
    }
}

impl PiecewiseConstantField {
    pub fn new(domain: BoxDomain, shape: ValueShape, values: Vec<f64>) -> Result<Self> {
        check_len("cell values", values.len(), domain.n_cells() * shape.len())?;
        Ok(Self { domain, shape, values })
    }

    pub fn from_fn<F>(domain: BoxDomain, shape: ValueShape, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let mut values = Vec::with_capacity(domain.n_cells() * shape.len());
        for cell in 0..domain.n_cells() {
            values.extend(f(&domain.cell_center(cell)));
        }
        Self::new(domain, shape, values)
    }

    pub fn uniform(domain: BoxDomain, shape: ValueShape, value: &[f64]) -> Result<Self> {
        Self::from_fn(domain, shape, |_| value.to_vec())
    }

    pub fn cell_value(&self, cell: usize) -> &[f64] {
        let m = self.shape.len();
        &self.values[cell * m..(cell + 1) * m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same values viewed as an affine field with zero slope.
    pub fn to_affine(&self) -> PiecewiseAffineField {
        let slope = vec![0.0; self.values.len() * self.domain.dim()];
        PiecewiseAffineField::new(self.domain.clone(), self.shape.clone(), self.values.clone(), slope)
            .expect("consistent sizes")
    }

    /// Constant value per cell of a finer grid.
    pub fn refine(&self, factor: usize) -> Self {
        let fine = self.domain.refine(factor);
        Self::from_fn(fine, self.shape.clone(), |c| self.cell_value(self.domain.locate(c)).to_vec())
            .expect("refinement preserves sizes")
    }

    /// Cellwise difference `self − other` on the same grid.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.domain != other.domain || self.shape != other.shape {
            return Err(Error::ShapeMismatch("difference of fields on different grids or shapes".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self::new(self.domain.clone(), self.shape.clone(), values)
    }
}

impl CellwiseField for PiecewiseConstantField {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn shape(&self) -> &ValueShape {
        &self.shape
    }
    fn boundary(&self) -> Option<&BoundaryData> {
        None
    }
    fn tolerance(&self) -> f64 {
        DEFAULT_JUMP_TOLERANCE
    }
    fn value_in_cell(&self, cell: usize, _y: &[f64]) -> Vec<f64> {
        self.cell_value(cell).to_vec()
    }
    fn gradient_in_cell(&self, _cell: usize, _y: &[f64]) -> Vec<f64> {
        vec![0.0; self.shape.len() * self.domain.dim()]
    }
}

/// Vector field in the discrete SBV² class: cellwise quadratic
/// `u(y) = value_K + gradient_K·z + ½ hessian_K(z, z)`, `z = y − center_K`.
///
/// `hessian` uses the derivative-last layout of the gradient field,
/// `[(i·N + k)·N + j] = ∂_j ∂_k u_i`, and must be symmetric in `(j, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSbv2", into = "RawSbv2")]
pub struct Sbv2Field {
    domain: BoxDomain,
    d: usize,
    value: Vec<f64>,
    gradient: Vec<f64>,
    hessian: Vec<f64>,
    boundary: Option<BoundaryData>,
    tolerance: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSbv2 {
    domain: BoxDomain,
    d: usize,
    value: Vec<f64>,
    gradient: Vec<f64>,
    hessian: Vec<f64>,
    #[serde(default)]
    boundary: Option<BoundaryData>,
    #[serde(default = "default_tol")]
    tolerance: f64,
}

impl TryFrom<RawSbv2> for Sbv2Field {
    type Error = Error;
    fn try_from(r: RawSbv2) -> Result<Self> {
        let mut f = Sbv2Field::new(r.domain, r.d, r.value, r.gradient, r.hessian)?;
        check_boundary(&r.boundary, &ValueShape::vector(f.d), f.domain.dim())?;
        f.boundary = r.boundary;
        f.tolerance = r.tolerance;
        Ok(f)
    }
}

impl From<Sbv2Field> for RawSbv2 {
    fn from(f: Sbv2Field) -> Self {
        RawSbv2 {
            domain: f.domain,
            d: f.d,
            value: f.value,
            gradient: f.gradient,
            hessian: f.hessian,
            boundary: f.boundary,
            tolerance: f.tolerance,
        }
    }
}

impl Sbv2Field {
    pub fn new(domain: BoxDomain, d: usize, value: Vec<f64>, gradient: Vec<f64>, hessian: Vec<f64>) -> Result<Self> {
        let n = domain.dim();
        let cells = domain.n_cells();
        check_len("cell values", value.len(), cells * d)?;
        check_len("cell gradients", gradient.len(), cells * d * n)?;
        check_len("cell hessians", hessian.len(), cells * d * n * n)?;
        for cell in 0..cells {
            let h = &hessian[cell * d * n * n..(cell + 1) * d * n * n];
            let scale = h.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            for i in 0..d {
                for j in 0..n {
                    for k in 0..j {
                        if (h[(i * n + k) * n + j] - h[(i * n + j) * n + k]).abs() > 1e-12 * scale {
                            return Err(Error::InvalidArgument(format!(
                                "cell {cell}: second derivative not symmetric; a cellwise polynomial needs ∂_j∂_k = ∂_k∂_j"
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self { domain, d, value, gradient, hessian, boundary: None, tolerance: DEFAULT_JUMP_TOLERANCE })
    }

    /// Zero curvature lift of a cellwise affine vector field.
    pub fn from_affine(u: &PiecewiseAffineField) -> Result<Self> {
        if u.shape.dims().len() != 1 {
            return Err(Error::ShapeMismatch("SBV² field must be vector valued".into()));
        }
        let n = u.domain.dim();
        let d = u.shape.len();
        let mut f = Self::new(
            u.domain.clone(),
            d,
            u.value.clone(),
            u.slope.clone(),
            vec![0.0; u.domain.n_cells() * d * n * n],
        )?;
        f.boundary = u.boundary.clone();
        f.tolerance = u.tolerance;
        Ok(f)
    }

    pub fn with_boundary(mut self, boundary: Option<BoundaryData>) -> Result<Self> {
        check_boundary(&boundary, &ValueShape::vector(self.d), self.domain.dim())?;
        self.boundary = boundary;
        Ok(self)
    }

    pub fn components(&self) -> usize {
        self.d
    }

    pub fn cell_value(&self, cell: usize) -> &[f64] {
        &self.value[cell * self.d..(cell + 1) * self.d]
    }

    pub fn cell_gradient(&self, cell: usize) -> &[f64] {
        let k = self.d * self.domain.dim();
        &self.gradient[cell * k..(cell + 1) * k]
    }

    /// Cellwise `∇²u` (derivative-last layout, symmetric).
    pub fn cell_hessian(&self, cell: usize) -> &[f64] {
        let n = self.domain.dim();
        let k = self.d * n * n;
        &self.hessian[cell * k..(cell + 1) * k]
    }

    /// `∇u` as a cellwise affine `d×N` field.
    pub fn gradient_field(&self) -> PiecewiseAffineField {
        let n = self.domain.dim();
        PiecewiseAffineField::new(
            self.domain.clone(),
            ValueShape::matrix(self.d, n),
            self.gradient.clone(),
            self.hessian.clone(),
        )
        .expect("consistent sizes")
        .with_tolerance(self.tolerance)
    }

    /// `∇²u` as a cellwise constant `d×N×N` field.
    pub fn second_gradient_field(&self) -> PiecewiseConstantField {
        let n = self.domain.dim();
        PiecewiseConstantField::new(self.domain.clone(), ValueShape::tensor3(self.d, n), self.hessian.clone())
            .expect("consistent sizes")
    }
}

impl CellwiseField for Sbv2Field {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn shape(&self) -> &ValueShape {
        static_shape(self.d)
    }
    fn boundary(&self) -> Option<&BoundaryData> {
        self.boundary.as_ref()
    }
    fn tolerance(&self) -> f64 {
        self.tolerance
    }
    fn value_in_cell(&self, cell: usize, y: &[f64]) -> Vec<f64> {
        let n = self.domain.dim();
        let c = self.domain.cell_center(cell);
        let z: Vec<f64> = y.iter().zip(&c).map(|(a, b)| a - b).collect();
        let g = self.cell_gradient(cell);
        let h = self.cell_hessian(cell);
        (0..self.d)
            .map(|i| {
                let mut v = self.cell_value(cell)[i];
                for k in 0..n {
                    v += g[i * n + k] * z[k];
                    for j in 0..n {
                        v += 0.5 * h[(i * n + k) * n + j] * z[k] * z[j];
                    }
                }
                v
            })
            .collect()
    }
    fn gradient_in_cell(&self, cell: usize, y: &[f64]) -> Vec<f64> {
        let n = self.domain.dim();
        let c = self.domain.cell_center(cell);
        let g = self.cell_gradient(cell);
        let h = self.cell_hessian(cell);
        let mut out = g.to_vec();
        for i in 0..self.d {
            for k in 0..n {
                for j in 0..n {
                    out[i * n + k] += h[(i * n + k) * n + j] * (y[j] - c[j]);
                }
            }
        }
        out
    }
    fn hessian_in_cell(&self, cell: usize) -> Option<Vec<f64>> {
        let h = self.cell_hessian(cell);
        h.iter().any(|v| *v != 0.0).then(|| h.to_vec())
    }
}

// `shape()` hands out a reference; vector shapes are interned per `d`.
fn static_shape(d: usize) -> &'static ValueShape {
    use std::sync::OnceLock;
    static SHAPES: OnceLock<Vec<ValueShape>> = OnceLock::new();
    let shapes = SHAPES.get_or_init(|| (0..=16).map(ValueShape::vector).collect());
    &shapes[d.min(16)]
}

/// Facet helper shared by the jump and trace code: the cell on each side.
pub(crate) fn facet_cells(domain: &BoxDomain, facet: &Facet) -> (usize, Option<usize>) {
    match facet.kind {
        FacetKind::Interior => (facet.cell, domain.upper_neighbor(facet.cell, facet.axis)),
        _ => (facet.cell, None),
    }
}
