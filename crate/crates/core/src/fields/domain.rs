use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `Π (lower_i, upper_i)` split into a uniform grid of cells.
///
/// Cells are numbered row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain", into = "RawDomain")]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    resolution: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    resolution: Vec<usize>,
}

impl TryFrom<RawDomain> for BoxDomain {
    type Error = Error;
    fn try_from(r: RawDomain) -> Result<Self> {
        BoxDomain::new(r.lower, r.upper, r.resolution)
    }
}

impl From<BoxDomain> for RawDomain {
    fn from(d: BoxDomain) -> Self {
        RawDomain { lower: d.lower, upper: d.upper, resolution: d.resolution }
    }
}

/// Which side of a cell a facet sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetKind {
    /// Between `cell` and its `+e_axis` neighbour.
    Interior,
    /// On the boundary face `y_axis = lower_axis`.
    Lower,
    /// On the boundary face `y_axis = upper_axis`.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Facet {
    pub axis: usize,
    pub cell: usize,
    pub kind: FacetKind,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() || lower.len() != resolution.len() {
            return Err(Error::InvalidDomain(format!(
                "corner/resolution lengths {} {} {} must agree and be non-zero",
                lower.len(),
                upper.len(),
                resolution.len()
            )));
        }
        for i in 0..lower.len() {
            if !(upper[i] > lower[i]) || !lower[i].is_finite() || !upper[i].is_finite() {
                return Err(Error::InvalidDomain(format!("axis {i}: need upper > lower")));
            }
            if resolution[i] == 0 {
                return Err(Error::InvalidDomain(format!("axis {i}: resolution must be ≥ 1")));
            }
        }
        Ok(Self { lower, upper, resolution })
    }

    /// `[0, 1]^N`.
    pub fn unit(n: usize, res: usize) -> Self {
        Self::new(vec![0.0; n], vec![1.0; n], vec![res; n]).expect("valid unit box")
    }

    /// `(-1/2, 1/2)^N`, the cube on which cell problems live.
    pub fn centered_unit(n: usize, res: usize) -> Self {
        Self::new(vec![-0.5; n], vec![0.5; n], vec![res; n]).expect("valid centred box")
    }

    pub fn with_resolution(&self, resolution: Vec<usize>) -> Result<Self> {
        Self::new(self.lower.clone(), self.upper.clone(), resolution)
    }

    /// Same box with every axis split `factor` times finer.
    pub fn refine(&self, factor: usize) -> Self {
        let res = self.resolution.iter().map(|r| r * factor.max(1)).collect();
        Self { lower: self.lower.clone(), upper: self.upper.clone(), resolution: res }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn n_cells(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn cell_size(&self, axis: usize) -> f64 {
        self.width(axis) / self.resolution[axis] as f64
    }

    pub fn cell_half_widths(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| 0.5 * self.cell_size(a)).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.cell_size(a)).product()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.width(a)).product()
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|a| self.width(a).powi(2)).sum::<f64>().sqrt()
    }

    pub fn same_box(&self, other: &BoxDomain) -> bool {
        self.lower == other.lower && self.upper == other.upper
    }

    /// Per-axis factor by which `self` refines `coarse`, if it does.
    pub fn refinement_factors(&self, coarse: &BoxDomain) -> Option<Vec<usize>> {
        if !self.same_box(coarse) {
            return None;
        }
        self.resolution.iter().zip(&coarse.resolution).map(|(f, c)| (f % c == 0).then_some(f / c)).collect()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let n = self.dim();
        let mut idx = vec![0; n];
        for a in (0..n).rev() {
            idx[a] = flat % self.resolution[a];
            flat /= self.resolution[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.resolution).fold(0, |acc, (i, r)| acc * r + i)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.resolution[axis + 1..].iter().product()
    }

    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.lower[a] + (i as f64 + 0.5) * self.cell_size(a))
            .collect()
    }

    /// Cell containing `y`; points on the closure are clamped inward.
    pub fn locate(&self, y: &[f64]) -> usize {
        let idx: Vec<usize> = (0..self.dim())
            .map(|a| {
                let t = ((y[a] - self.lower[a]) / self.cell_size(a)).floor();
                (t.max(0.0) as usize).min(self.resolution[a] - 1)
            })
            .collect();
        self.flat_index(&idx)
    }

    /// Neighbour across the `+e_axis` face, if inside the grid.
    pub fn upper_neighbor(&self, flat: usize, axis: usize) -> Option<usize> {
        let idx = self.multi_index(flat);
        (idx[axis] + 1 < self.resolution[axis]).then(|| flat + self.stride(axis))
    }

    /// All facets: interior ones first (by axis, then cell), then boundary
    /// ones (by axis, lower before upper, then cell). The order is stable.
    pub fn facets(&self) -> Vec<Facet> {
        let mut out = self.interior_facets();
        out.extend(self.boundary_facets());
        out
    }

    pub fn interior_facets(&self) -> Vec<Facet> {
        let mut out = Vec::new();
        for axis in 0..self.dim() {
            for cell in 0..self.n_cells() {
                if self.multi_index(cell)[axis] + 1 < self.resolution[axis] {
                    out.push(Facet { axis, cell, kind: FacetKind::Interior });
                }
            }
        }
        out
    }

    pub fn boundary_facets(&self) -> Vec<Facet> {
        let mut out = Vec::new();
        for axis in 0..self.dim() {
            for (kind, at) in [(FacetKind::Lower, 0), (FacetKind::Upper, self.resolution[axis] - 1)] {
                for cell in 0..self.n_cells() {
                    if self.multi_index(cell)[axis] == at {
                        out.push(Facet { axis, cell, kind });
                    }
                }
            }
        }
        out
    }

    pub fn facet_area(&self, facet: &Facet) -> f64 {
        self.cell_volume() / self.cell_size(facet.axis)
    }

    pub fn facet_centroid(&self, facet: &Facet) -> Vec<f64> {
        let mut c = self.cell_center(facet.cell);
        let h = 0.5 * self.cell_size(facet.axis);
        match facet.kind {
            FacetKind::Interior | FacetKind::Upper => c[facet.axis] += h,
            FacetKind::Lower => c[facet.axis] -= h,
        }
        c
    }

    /// Half-widths of the facet in its tangential directions, with the
    /// normal axis set to zero.
    pub fn facet_half_widths(&self, facet: &Facet) -> Vec<f64> {
        let mut h = self.cell_half_widths();
        h[facet.axis] = 0.0;
        h
    }
}
