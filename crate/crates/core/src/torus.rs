//! Geometry of the d-dimensional Hamming torus.
//!
//! Vertices are the integer points of an `L_1 × ⋯ × L_d` box, with 1-based
//! coordinates, and two vertices are adjacent when they differ in exactly one
//! coordinate. Every axis-parallel line is therefore a clique. Adjacency is
//! never materialized; everything here is index arithmetic.
//!
//! Storage indices are mixed-radix with the last coordinate varying fastest,
//! so ascending index order is lexicographic order of coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions, aspect ratios and scale of a torus.
///
/// Theory quantities are computed from the real aspect ratios `a`, simulation
/// from the integer side lengths `L_i = round(a_i n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    a: Vec<f64>,
    n: u64,
    sides: Vec<usize>,
    strides: Vec<usize>,
    volume: usize,
}

/// Storage index of a vertex, in `[0, |V|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

/// An axis-parallel line: all vertices sharing the `d - 1` coordinates in `base`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LineId {
    /// 1-based axis along which the line runs.
    pub axis: usize,
    /// The fixed coordinates (1-based), in axis order with `axis` omitted.
    pub base: Vec<usize>,
}

impl TorusSpec {
    /// Builds the torus with sides `round(a_i n)`, each clamped to at least 1.
    pub fn new(d: usize, a: &[f64], n: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpec("d must be at least 1".into()));
        }
        if a.len() != d {
            return Err(Error::InvalidSpec(format!(
                "expected {d} aspect ratios, got {}",
                a.len()
            )));
        }
        if let Some(bad) = a.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidSpec(format!(
                "aspect ratio {bad} is not positive"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidSpec("scale n must be positive".into()));
        }
        let mut sides = Vec::with_capacity(d);
        for &ai in a {
            let side = (ai * n as f64).round();
            if side >= usize::MAX as f64 {
                return Err(Error::TooLarge);
            }
            sides.push((side as usize).max(1));
        }
        Self::assemble(a.to_vec(), n, sides)
    }

    /// A torus with explicit side lengths (`n = 1`, `a_i = L_i`).
    pub fn from_sides(sides: &[usize]) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::InvalidSpec("d must be at least 1".into()));
        }
        if sides.contains(&0) {
            return Err(Error::InvalidSpec("side lengths must be positive".into()));
        }
        Self::assemble(sides.iter().map(|&l| l as f64).collect(), 1, sides.to_vec())
    }

    fn assemble(a: Vec<f64>, n: u64, sides: Vec<usize>) -> Result<Self> {
        let d = sides.len();
        let mut strides = vec![1usize; d];
        let mut volume = 1usize;
        for i in (0..d).rev() {
            strides[i] = volume;
            volume = volume.checked_mul(sides[i]).ok_or(Error::TooLarge)?;
        }
        Ok(TorusSpec {
            a,
            n,
            sides,
            strides,
            volume,
        })
    }

    pub fn d(&self) -> usize {
        self.sides.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Side lengths `L_i` actually used by the simulation.
    pub fn sides(&self) -> &[usize] {
        &self.sides
    }

    /// Index stride of each axis (last axis has stride 1).
    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Total vertex count `|V| = ∏ L_i`.
    pub fn volume(&self) -> usize {
        self.volume
    }

    /// Common degree of every vertex, `Σ (L_i - 1)`.
    pub fn degree(&self) -> usize {
        self.sides.iter().map(|l| l - 1).sum()
    }

    fn check_axis(&self, axis: usize) -> Result<usize> {
        if axis == 0 || axis > self.d() {
            return Err(Error::AxisOutOfRange { axis, d: self.d() });
        }
        Ok(axis - 1)
    }

    /// Vertex with the given 1-based coordinates.
    pub fn vertex(&self, coords: &[usize]) -> Result<VertexId> {
        if coords.len() != self.d() {
            return Err(Error::CoordinateOutOfRange(format!(
                "expected {} coordinates, got {}",
                self.d(),
                coords.len()
            )));
        }
        let mut index = 0;
        for (i, (&x, &l)) in coords.iter().zip(&self.sides).enumerate() {
            if x == 0 || x > l {
                return Err(Error::CoordinateOutOfRange(format!(
                    "coordinate {} = {x} not in 1..={l}",
                    i + 1
                )));
            }
            index += (x - 1) * self.strides[i];
        }
        Ok(VertexId(index))
    }

    /// 1-based coordinates of a vertex.
    pub fn coords(&self, v: VertexId) -> Vec<usize> {
        debug_assert!(v.0 < self.volume);
        self.sides
            .iter()
            .zip(&self.strides)
            .map(|(&l, &s)| (v.0 / s) % l + 1)
            .collect()
    }

    /// 1-based coordinate of `v` along a 0-based axis.
    #[inline]
    pub fn coord(&self, v: VertexId, axis0: usize) -> usize {
        (v.0 / self.strides[axis0]) % self.sides[axis0] + 1
    }

    /// The `L_axis - 1` vertices differing from `v` only along `axis`,
    /// ascending by that coordinate.
    pub fn neighbors_on_axis(&self, v: VertexId, axis: usize) -> Result<Vec<VertexId>> {
        let k = self.check_axis(axis)?;
        Ok(self.axis_neighbors(v, k).collect())
    }

    /// Iterator form of [`neighbors_on_axis`](Self::neighbors_on_axis) with a 0-based axis.
    pub fn axis_neighbors(&self, v: VertexId, axis0: usize) -> impl Iterator<Item = VertexId> {
        let stride = self.strides[axis0];
        let x = (v.0 / stride) % self.sides[axis0];
        let start = v.0 - x * stride;
        (0..self.sides[axis0])
            .filter(move |&m| m != x)
            .map(move |m| VertexId(start + m * stride))
    }

    /// All neighbors of `v`, grouped by axis.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.d()).flat_map(move |k| self.axis_neighbors(v, k))
    }

    /// The 0-based axis along which `u` and `v` differ, if they are adjacent.
    pub fn adjacency_axis(&self, u: VertexId, v: VertexId) -> Option<usize> {
        let mut axis = None;
        for k in 0..self.d() {
            if self.coord(u, k) != self.coord(v, k) {
                if axis.is_some() {
                    return None;
                }
                axis = Some(k);
            }
        }
        axis
    }

    /// Number of axis-parallel lines along `axis`, `|V| / L_axis`.
    pub fn line_count(&self, axis: usize) -> Result<usize> {
        let k = self.check_axis(axis)?;
        Ok(self.volume / self.sides[k])
    }

    /// Index of the first vertex of every line along a 0-based axis.
    pub fn line_starts(&self, axis0: usize) -> impl Iterator<Item = usize> {
        let stride = self.strides[axis0];
        let block = stride * self.sides[axis0];
        let blocks = self.volume / block;
        (0..blocks).flat_map(move |b| (0..stride).map(move |r| b * block + r))
    }

    /// The line along `axis` through `v`.
    pub fn line_through(&self, v: VertexId, axis: usize) -> Result<LineId> {
        let k = self.check_axis(axis)?;
        let mut base = self.coords(v);
        base.remove(k);
        Ok(LineId { axis, base })
    }

    /// Vertices of a line, ascending along its axis.
    pub fn line_members(&self, line: &LineId) -> Result<Vec<VertexId>> {
        let k = self.check_axis(line.axis)?;
        if line.base.len() + 1 != self.d() {
            return Err(Error::CoordinateOutOfRange(format!(
                "line base needs {} coordinates",
                self.d() - 1
            )));
        }
        let mut coords = line.base.clone();
        coords.insert(k, 1);
        let first = self.vertex(&coords)?;
        let stride = self.strides[k];
        Ok((0..self.sides[k])
            .map(|m| VertexId(first.0 + m * stride))
            .collect())
    }
}

/// Number of coordinates in which `u` and `v` differ.
pub fn hamming_distance(spec: &TorusSpec, u: VertexId, v: VertexId) -> usize {
    (0..spec.d())
        .filter(|&k| spec.coord(u, k) != spec.coord(v, k))
        .count()
}
