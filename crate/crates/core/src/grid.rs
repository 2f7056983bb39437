//! Uniform operational-time grids, grid functions in the transmuted frame,
//! the transmutation map and the weighted norms.

use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{validation, Error, Result};
use crate::spectral::{differentiate, DiffMethod};
use crate::timescales::{AgingScale, AmnesiaWeight};

const MIN_POINTS: usize = 8;

/// `n` equispaced nodes `x_i = x_min + i h` covering `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperationalGrid {
    x_min: f64,
    x_max: f64,
    n: usize,
    h: f64,
}

impl OperationalGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() || x_min >= x_max {
            return Err(validation(format!("grid needs finite x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n < MIN_POINTS {
            return Err(validation(format!("grid needs at least {MIN_POINTS} points, got {n}")));
        }
        let h = (x_max - x_min) / (n - 1) as f64;
        Ok(Self { x_min, x_max, n, h })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * self.h;
        x >= self.x_min - slack && x <= self.x_max + slack
    }
}

/// Cubic Lagrange weights for nodes at local positions 0, 1, 2, 3 evaluated at `t`.
pub(crate) fn lagrange4(t: f64) -> [f64; 4] {
    let (t0, t1, t2, t3) = (t, t - 1.0, t - 2.0, t - 3.0);
    [-t1 * t2 * t3 / 6.0, t0 * t2 * t3 / 2.0, -t0 * t1 * t3 / 2.0, t0 * t1 * t2 / 6.0]
}

/// Samples of the transmuted representative `v = T u` on an [`OperationalGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: OperationalGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: OperationalGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(validation(format!(
                "grid has {} points but {} values were supplied",
                grid.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index, x: grid.x(index) });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: OperationalGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().map(f).collect())
    }

    pub fn zeros(grid: OperationalGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> &OperationalGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same grid, new values; used by operators whose outputs are finite by construction.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { grid: self.grid, values }
    }

    /// `a self + b other` on a shared grid.
    pub fn axpby(&self, a: f64, other: &GridFunction, b: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(validation("grid functions live on different grids"));
        }
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect()))
    }

    /// Cubic interpolation at `x` inside the window.
    pub fn interpolate(&self, x: f64) -> Result<f64> {
        if !self.grid.contains(x) {
            return Err(Error::Domain(format!(
                "x = {x} lies outside the grid window [{}, {}]",
                self.grid.x_min, self.grid.x_max
            )));
        }
        let n = self.grid.n;
        let pos = ((x - self.grid.x_min) / self.grid.h).clamp(0.0, (n - 1) as f64);
        // Nodes reached through a round trip of psi land within rounding of an index.
        let nearest = pos.round();
        if (pos - nearest).abs() <= 1e-12 * nearest.max(1.0) {
            return Ok(self.values[nearest as usize]);
        }
        let j = pos.floor() as usize;
        let base = j.saturating_sub(1).min(n - 4);
        let w = lagrange4(pos - base as f64);
        Ok((0..4).map(|r| w[r] * self.values[base + r]).sum())
    }

    /// `max(|v_0|, |v_{n-1}|) / max |v|`.
    pub fn edge_ratio(&self) -> f64 {
        crate::spectral::edge_ratio(&self.values)
    }

    /// Trapezoid-rule inner product with another function on the same grid.
    pub fn inner(&self, other: &GridFunction) -> f64 {
        trapezoid(self.values.iter().zip(&other.values).map(|(a, b)| a * b), self.grid.h, self.values.len())
    }

    /// Trapezoid-rule integral `int v dx`.
    pub fn integral(&self) -> f64 {
        trapezoid(self.values.iter().copied(), self.grid.h, self.values.len())
    }

    pub fn l2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn derivative(&self, method: DiffMethod) -> Vec<f64> {
        differentiate(&self.values, self.grid.h, method)
    }

    /// Writes the `x,v` CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Config(format!("csv write failed: {e}"));
        w.write_record(["x", "v"]).map_err(io)?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([format!("{:.16e}", self.grid.x(i)), format!("{v:.16e}")]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Config(format!("csv write failed: {e}")))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Reads an `x,v` CSV; the nodes must be equispaced.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Config(format!("csv parse error: {e}")))?;
            let parse = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Config(format!("csv row {}: bad number in column {k}", line + 2)))
            };
            xs.push(parse(0)?);
            vs.push(parse(1)?);
        }
        if xs.len() < MIN_POINTS {
            return Err(Error::Config(format!("csv holds {} rows, need at least {MIN_POINTS}", xs.len())));
        }
        let grid = OperationalGrid::new(xs[0], xs[xs.len() - 1], xs.len())?;
        if xs.iter().enumerate().any(|(i, &x)| (x - grid.x(i)).abs() > 1e-9 * grid.h.max(x.abs())) {
            return Err(Error::Config("csv nodes are not equispaced".into()));
        }
        Self::new(grid, vs)
    }
}

fn trapezoid(mut it: impl Iterator<Item = f64>, h: f64, n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        let v = it.next().unwrap_or(0.0);
        sum += if i == 0 || i == n - 1 { 0.5 * v } else { v };
    }
    sum * h
}

/// `v(x_i) = omega(psi^-1(x_i)) u(psi^-1(x_i))` on every node.
pub fn transmute(
    u: impl Fn(f64) -> f64,
    scale: &AgingScale,
    weight: &AmnesiaWeight,
    grid: &OperationalGrid,
) -> Result<GridFunction> {
    let values: Vec<f64> = grid
        .points()
        .map(|x| {
            let t = scale.inverse(x);
            weight.at_operational(x) * u(t)
        })
        .collect();
    GridFunction::new(*grid, values)
}

/// Physical-time reading `u(t) = v(psi(t)) / omega(t)` of a grid function.
#[derive(Debug, Clone)]
pub struct PhysicalView<'a> {
    v: &'a GridFunction,
    scale: AgingScale,
    weight: AmnesiaWeight,
}

impl PhysicalView<'_> {
    pub fn eval(&self, t: f64) -> Result<f64> {
        let x = self.scale.forward(t);
        Ok(self.v.interpolate(x)? / self.weight.at_operational(x))
    }
}

pub fn inverse_transmute<'a>(v: &'a GridFunction, scale: &AgingScale, weight: &AmnesiaWeight) -> PhysicalView<'a> {
    PhysicalView { v, scale: *scale, weight: *weight }
}

/// Norms of `u` in the weighted spaces, i.e. classical norms of `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedNormReport {
    pub l2: f64,
    pub h1: f64,
    pub sup_weighted: f64,
}

pub fn norms(v: &GridFunction) -> WeightedNormReport {
    let l2 = v.l2();
    let dv = v.derivative(DiffMethod::Auto);
    let d2 = trapezoid(dv.iter().map(|d| d * d), v.grid.h, dv.len());
    WeightedNormReport { l2, h1: (l2 * l2 + d2).sqrt(), sup_weighted: v.sup() }
}
