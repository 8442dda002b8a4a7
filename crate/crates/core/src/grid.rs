//! Uniform midpoint grids on an interval, balls on the line, and sampled functions.
//!
//! Sample `i` sits at `left + (i + 1/2) * spacing`, so no sample lands on a cell
//! boundary. Integrals use the midpoint rule over the samples strictly inside a ball.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default desk-scale domain.
pub const DEFAULT_LEFT: f64 = -8.0;
pub const DEFAULT_RIGHT: f64 = 8.0;
pub const DEFAULT_POINTS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    left: f64,
    right: f64,
    n_points: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(left: f64, right: f64, n_points: usize) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) || left >= right {
            return Err(Error::InvalidGrid(format!(
                "need finite left < right, got [{left}, {right}]"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        Ok(Grid {
            left,
            right,
            n_points,
            spacing: (right - left) / n_points as f64,
        })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.left + (i as f64 + 0.5) * self.spacing
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    /// Same interval with twice as many samples.
    pub fn refined(&self) -> Self {
        Grid::new(self.left, self.right, self.n_points * 2).expect("refining a valid grid")
    }

    pub fn with_points(&self, n_points: usize) -> Result<Self> {
        Grid::new(self.left, self.right, n_points)
    }

    /// Ball spanning the whole interval.
    pub fn spanning_ball(&self) -> Ball {
        Ball {
            center: 0.5 * (self.left + self.right),
            radius: 0.5 * (self.right - self.left) + self.spacing,
        }
    }

    pub fn contains_ball(&self, ball: &Ball) -> bool {
        ball.center - ball.radius >= self.left - 1e-12 && ball.center + ball.radius <= self.right + 1e-12
    }

    /// Indices `i` with `|x_i - center| < radius`.
    pub fn index_range(&self, ball: &Ball) -> Range<usize> {
        let n = self.n_points as isize;
        let h = self.spacing;
        let guess_lo = ((ball.center - ball.radius - self.left) / h - 0.5).ceil() as isize;
        let guess_hi = ((ball.center + ball.radius - self.left) / h - 0.5).floor() as isize;
        let inside = |i: isize| (self.x(i as usize) - ball.center).abs() < ball.radius;

        let mut lo = guess_lo.clamp(0, n);
        while lo > 0 && inside(lo - 1) {
            lo -= 1;
        }
        while lo < n && !inside(lo) {
            lo += 1;
            if lo > guess_lo + 2 {
                break;
            }
        }
        if lo >= n || !inside(lo) {
            return 0..0;
        }
        let mut hi = guess_hi.clamp(lo, n - 1);
        while hi + 1 < n && inside(hi + 1) {
            hi += 1;
        }
        while hi > lo && !inside(hi) {
            hi -= 1;
        }
        lo as usize..hi as usize + 1
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid::new(DEFAULT_LEFT, DEFAULT_RIGHT, DEFAULT_POINTS).expect("default grid")
    }
}

/// Open interval `B(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: f64,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && center.is_finite()) {
            return Err(Error::InvalidBall(radius));
        }
        Ok(Ball { center, radius })
    }

    /// Lebesgue measure `2 r`.
    pub fn measure(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() < self.radius
    }

    /// The concentric ball `k B`.
    pub fn dilate(&self, k: f64) -> Ball {
        Ball {
            center: self.center,
            radius: self.radius * k,
        }
    }

    pub fn is_subset_of(&self, other: &Ball) -> bool {
        (self.center - other.center).abs() + self.radius <= other.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                actual: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: vec![0.0; grid.n_points()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        GridFunction::new(grid, vec![c; grid.n_points()])
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridFunction::new(grid, grid.points().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn abs(&self) -> GridFunction {
        self.map(f64::abs)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        GridFunction::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Value at the grid point nearest to `x`.
    pub fn value_near(&self, x: f64) -> f64 {
        let i = ((x - self.grid.left) / self.grid.spacing - 0.5).round();
        let i = i.clamp(0.0, (self.grid.n_points - 1) as f64) as usize;
        self.values[i]
    }
}

/// Finite family `{f_j}` on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorGridFunction {
    grid: Grid,
    components: Vec<GridFunction>,
}

impl VectorGridFunction {
    pub fn new(components: Vec<GridFunction>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Empty("vector function needs at least one component".into()))?;
        let grid = *first.grid();
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(VectorGridFunction { grid, components })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[GridFunction] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Midpoint quadrature of `f` over the samples inside `ball`; 0 when none fall inside.
pub fn integrate(f: &GridFunction, ball: &Ball) -> f64 {
    let range = f.grid.index_range(ball);
    f.values[range].iter().sum::<f64>() * f.grid.spacing
}

/// Midpoint quadrature over the whole grid.
pub fn integrate_all(f: &GridFunction) -> f64 {
    f.values.iter().sum::<f64>() * f.grid.spacing
}

/// `f * chi_B`.
pub fn restrict(f: &GridFunction, ball: &Ball) -> GridFunction {
    let range = f.grid.index_range(ball);
    let values = f
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| if range.contains(&i) { v } else { 0.0 })
        .collect();
    GridFunction {
        grid: f.grid,
        values,
    }
}

pub fn indicator(grid: &Grid, ball: &Ball) -> GridFunction {
    let range = grid.index_range(ball);
    let values = (0..grid.n_points())
        .map(|i| if range.contains(&i) { 1.0 } else { 0.0 })
        .collect();
    GridFunction {
        grid: *grid,
        values,
    }
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` log-spaced values from `a` to `b` inclusive (`a, b > 0`).
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

/// `n` values `10^e` with exponents evenly spaced over `[lo_exp, hi_exp]`; integer
/// exponents on the lattice map to exact powers of ten.
pub fn logspace10(lo_exp: f64, hi_exp: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![10f64.powf(lo_exp); n];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|k| 10f64.powf((lo_exp * (m - k as f64) + hi_exp * k as f64) / m))
        .collect()
}

/// Balls with centers spread over `[lo, hi]` and radii `2^k` for `k` in `exponents`,
/// keeping only balls contained in `[lo, hi]`.
pub fn dyadic_ball_family(lo: f64, hi: f64, n_centers: usize, exponents: Range<i32>) -> Vec<Ball> {
    let centers = linspace(lo, hi, n_centers);
    let mut balls = Vec::new();
    for k in exponents {
        let r = 2f64.powi(k);
        for &c in &centers {
            if c - r >= lo - 1e-12 && c + r <= hi + 1e-12 {
                balls.push(Ball { center: c, radius: r });
            }
        }
    }
    balls
}
