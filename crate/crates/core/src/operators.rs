//! Hardy-Littlewood maximal operator, the discrete principal-value Hilbert transform
//! and its truncations, BMO estimates and commutators.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dyadic_ball_family, integrate, Ball, Grid, GridFunction, VectorGridFunction};
use crate::norms::{luxemburg_norm, InequalitySides};
use crate::weights::{ball_mass, MassRule, Weight};
use crate::young::{self, YoungFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelFamily {
    /// `1 / (π (x - y))`.
    Hilbert,
    /// The Hilbert kernel set to zero for `|x - y| < epsilon`.
    TruncatedHilbert { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CZKernel {
    pub family: KernelFamily,
    pub size_constant: f64,
    pub smoothness_epsilon: f64,
    /// `+1` or `-1`: the half-line `direction * (x - y) > 0` plays the role of the cone.
    pub cone_direction: i8,
}

impl Default for CZKernel {
    fn default() -> Self {
        CZKernel::hilbert()
    }
}

impl CZKernel {
    pub fn hilbert() -> Self {
        CZKernel {
            family: KernelFamily::Hilbert,
            size_constant: 1.0 / PI,
            smoothness_epsilon: 1.0,
            cone_direction: 1,
        }
    }

    pub fn truncated_hilbert(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("truncation needs epsilon > 0, got {epsilon}")));
        }
        Ok(CZKernel {
            family: KernelFamily::TruncatedHilbert { epsilon },
            ..CZKernel::hilbert()
        })
    }

    pub fn with_cone(mut self, direction: i8) -> Result<Self> {
        if direction != 1 && direction != -1 {
            return Err(Error::InvalidParameter(format!("cone direction must be +1 or -1, got {direction}")));
        }
        self.cone_direction = direction;
        Ok(self)
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "hilbert" => Ok(CZKernel::hilbert()),
            other => match other.strip_prefix("truncatedhilbert") {
                Some(rest) => {
                    let eps = rest
                        .trim()
                        .trim_start_matches("epsilon=")
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad truncation in `{name}`")))?;
                    CZKernel::truncated_hilbert(eps)
                }
                None => Err(Error::InvalidParameter(format!("unknown kernel `{name}`"))),
            },
        }
    }

    pub fn label(&self) -> String {
        match self.family {
            KernelFamily::Hilbert => "hilbert".into(),
            KernelFamily::TruncatedHilbert { epsilon } => format!("truncatedhilbert(epsilon={epsilon})"),
        }
    }

    /// `K(x, y)`; zero on the diagonal.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let d = x - y;
        if d == 0.0 {
            return 0.0;
        }
        match self.family {
            KernelFamily::Hilbert => 1.0 / (PI * d),
            KernelFamily::TruncatedHilbert { epsilon } => {
                if d.abs() < epsilon {
                    0.0
                } else {
                    1.0 / (PI * d)
                }
            }
        }
    }
}

/// Radii giving balls around grid points that hold exactly `2m + 1` samples, for a
/// geometric sequence of `m` up to the grid length.
pub fn default_maximal_radii(grid: &Grid) -> Vec<f64> {
    let mut ms = vec![0usize];
    let mut m = 1.0_f64;
    while (m as usize) < grid.n_points() {
        let k = m.round() as usize;
        if *ms.last().unwrap() != k {
            ms.push(k);
        }
        m *= 1.25;
    }
    ms.into_iter().map(|m| (m as f64 + 0.5) * grid.spacing()).collect()
}

/// `Mf(x_i) = max_r (2r)⁻¹ ∫_{B(x_i, r)} |f|` over the supplied radii.
pub fn maximal(f: &GridFunction, radii: &[f64]) -> Result<GridFunction> {
    if radii.is_empty() {
        return Err(Error::Empty("maximal operator needs at least one radius".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidBall(*r));
    }
    let grid = *f.grid();
    let h = grid.spacing();
    let mut prefix = Vec::with_capacity(grid.n_points() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in f.values() {
        acc += v.abs() * h;
        prefix.push(acc);
    }
    let values = (0..grid.n_points())
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            radii
                .iter()
                .map(|&r| {
                    let range = grid.index_range(&Ball { center: x, radius: r });
                    (prefix[range.end] - prefix[range.start]) / (2.0 * r)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    GridFunction::new(grid, values)
}

fn nonzero_samples(f: &GridFunction) -> (Vec<f64>, Vec<f64>) {
    let grid = f.grid();
    let h = grid.spacing();
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, v)| (grid.x(j), v * h))
        .unzip()
}

/// `Tf(x_i) = Σ_{j≠i} K(x_i, x_j) f(x_j) h`.
pub fn apply_cz(kernel: &CZKernel, f: &GridFunction) -> GridFunction {
    let grid = *f.grid();
    let (ys, fy) = nonzero_samples(f);
    let values = (0..grid.n_points())
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            ys.iter().zip(&fy).map(|(&y, &v)| kernel.eval(x, y) * v).sum()
        })
        .collect();
    GridFunction::new(grid, values).expect("kernel sums of finite data are finite off the diagonal")
}

/// `Σ_j K(x, x_j) f(x_j) h` at an arbitrary point; a sample at `x` itself is skipped.
pub fn apply_cz_at(kernel: &CZKernel, f: &GridFunction, x: f64) -> f64 {
    let grid = f.grid();
    let h = grid.spacing();
    f.values()
        .iter()
        .enumerate()
        .map(|(j, &v)| kernel.eval(x, grid.x(j)) * v * h)
        .sum()
}

/// `T(f χ_{2B}) + Σ_{x_j ∉ 2B} K(x, x_j) f(x_j) h` at the samples of `B`; zero elsewhere.
pub fn apply_cz_morrey(kernel: &CZKernel, f: &GridFunction, ball: &Ball) -> Result<GridFunction> {
    let grid = *f.grid();
    let inner = grid.index_range(ball);
    if inner.is_empty() {
        return Err(Error::ZeroMass {
            center: ball.center,
            radius: ball.radius,
        });
    }
    let mut values = vec![0.0; grid.n_points()];
    let local: Vec<f64> = inner.clone().into_par_iter().map(|i| apply_cz_morrey_at(kernel, f, ball, i)).collect();
    values[inner].copy_from_slice(&local);
    GridFunction::new(grid, values)
}

/// The value of [`apply_cz_morrey`] at sample `i`.
pub fn apply_cz_morrey_at(kernel: &CZKernel, f: &GridFunction, ball: &Ball, i: usize) -> f64 {
    let grid = f.grid();
    let h = grid.spacing();
    let near = grid.index_range(&ball.dilate(2.0));
    let x = grid.x(i);
    let term = |j: usize| kernel.eval(x, grid.x(j)) * f.values()[j] * h;
    let local: f64 = near.clone().map(term).sum();
    let tail: f64 = (0..near.start).chain(near.end..grid.n_points()).map(term).sum();
    local + tail
}

/// `Σ_j |K(x_i, x_j) f(x_j)| h`, the scale against which regrouped kernel sums are compared.
pub fn cz_absolute_sum(kernel: &CZKernel, f: &GridFunction, i: usize) -> f64 {
    let grid = f.grid();
    let x = grid.x(i);
    f.values()
        .iter()
        .enumerate()
        .map(|(j, &v)| (kernel.eval(x, grid.x(j)) * v).abs())
        .sum::<f64>()
        * grid.spacing()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelAxiomReport {
    /// `max |K(x,y)| |x-y|`.
    pub size_constant: f64,
    /// `max (|K(x,y)-K(z,y)| + |K(y,x)-K(y,z)|) |x-y|^{1+ε} / |x-z|^ε` over `|x-y| >= 2|x-z|`.
    pub smoothness_constant: f64,
    /// `min K(x,y) |x-y|` over pairs in the cone.
    pub genuine_constant: f64,
    pub samples: usize,
}

/// Samples pairs and triples in `[-8, 8]` with a fixed seed.
pub fn check_kernel_axioms(kernel: &CZKernel, pair_samples: usize) -> Result<KernelAxiomReport> {
    if pair_samples < 100 {
        return Err(Error::Precondition(format!("need at least 100 samples, got {pair_samples}")));
    }
    let eps = kernel.smoothness_epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut size, mut smooth, mut genuine) = (0.0_f64, 0.0_f64, f64::INFINITY);
    let mut taken = 0;
    while taken < pair_samples {
        let x: f64 = rng.gen_range(-8.0..8.0);
        let y: f64 = rng.gen_range(-8.0..8.0);
        let d = (x - y).abs();
        if d < 1e-9 {
            continue;
        }
        taken += 1;
        size = size.max(kernel.eval(x, y).abs() * d);
        let dir = f64::from(kernel.cone_direction);
        if dir * (x - y) > 0.0 {
            genuine = genuine.min(kernel.eval(x, y) * d);
        } else {
            genuine = genuine.min(kernel.eval(y, x) * d);
        }
        let t: f64 = rng.gen_range(1e-6..0.5);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let z = x + sign * t * d;
        let dz = (x - z).abs();
        let diff = (kernel.eval(x, y) - kernel.eval(z, y)).abs() + (kernel.eval(y, x) - kernel.eval(y, z)).abs();
        smooth = smooth.max(diff * d.powf(1.0 + eps) / dz.powf(eps));
    }
    Ok(KernelAxiomReport {
        size_constant: size,
        smoothness_constant: smooth,
        genuine_constant: genuine,
        samples: taken,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmoReport {
    pub norm_estimate: f64,
    pub achieved_ball: Ball,
    pub balls_tested: usize,
}

/// Discrete mean of `b` over the samples in `ball`.
pub fn ball_mean(b: &GridFunction, ball: &Ball) -> Option<f64> {
    let range = b.grid().index_range(ball);
    if range.is_empty() {
        return None;
    }
    let n = range.len() as f64;
    Some(b.values()[range].iter().sum::<f64>() / n)
}

/// Discrete mean oscillation `avg_B |b - b_B|`.
pub fn mean_oscillation(b: &GridFunction, ball: &Ball) -> Option<f64> {
    let mean = ball_mean(b, ball)?;
    let range = b.grid().index_range(ball);
    let n = range.len() as f64;
    Some(b.values()[range].iter().map(|v| (v - mean).abs()).sum::<f64>() / n)
}

/// `max_B avg_B |b - b_B|` over the balls that contain at least one sample.
pub fn bmo_norm(b: &GridFunction, balls: &[Ball]) -> Result<BmoReport> {
    if balls.is_empty() {
        return Err(Error::Empty("BMO estimate needs at least one ball".into()));
    }
    let osc: Vec<Option<f64>> = balls.par_iter().map(|ball| mean_oscillation(b, ball)).collect();
    let mut best: Option<(f64, Ball)> = None;
    let mut tested = 0;
    for (o, ball) in osc.into_iter().zip(balls) {
        if let Some(o) = o {
            tested += 1;
            if best.map_or(true, |(v, _)| o > v) {
                best = Some((o, *ball));
            }
        }
    }
    let (norm_estimate, achieved_ball) = best.ok_or_else(|| Error::Empty("no ball contains a grid sample".into()))?;
    Ok(BmoReport {
        norm_estimate,
        achieved_ball,
        balls_tested: tested,
    })
}

/// Dyadic balls inside the inner half of the grid plus the inner half itself.
pub fn default_bmo_balls(grid: &Grid) -> Vec<Ball> {
    let mid = 0.5 * (grid.left() + grid.right());
    let half = 0.25 * (grid.right() - grid.left());
    let mut balls = dyadic_ball_family(mid - half, mid + half, 64, -6..4);
    balls.push(Ball {
        center: mid,
        radius: half,
    });
    balls
}

/// `|b_{B(x,r)} - b_{B(x,t)}|` against `‖b‖_* ln(t/r)`, with `‖b‖_*` from [`default_bmo_balls`].
pub fn bmo_log_drift_check(b: &GridFunction, x: f64, r: f64, t: f64) -> Result<InequalitySides> {
    let star = bmo_norm(b, &default_bmo_balls(b.grid()))?.norm_estimate;
    bmo_log_drift_check_with(b, x, r, t, star)
}

pub fn bmo_log_drift_check_with(b: &GridFunction, x: f64, r: f64, t: f64, bmo_star: f64) -> Result<InequalitySides> {
    if !(r > 0.0 && 2.0 * r < t) {
        return Err(Error::Precondition(format!("need 0 < 2r < t, got r = {r}, t = {t}")));
    }
    let small = Ball::new(x, r)?;
    let large = Ball::new(x, t)?;
    let empty = || Error::ZeroMass { center: x, radius: r };
    let lhs = (ball_mean(b, &small).ok_or_else(empty)? - ball_mean(b, &large).ok_or_else(empty)?).abs();
    Ok(InequalitySides {
        lhs,
        rhs: bmo_star * (t / r).ln(),
    })
}

/// `[b, T] f (x_i) = Σ_{j≠i} K(x_i, x_j) (b(x_i) - b(x_j)) f(x_j) h`.
pub fn commutator(kernel: &CZKernel, b: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
    let grid = *f.grid();
    if b.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let h = grid.spacing();
    let support: Vec<(f64, f64, f64)> = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, v)| (grid.x(j), b.values()[j], v * h))
        .collect();
    let values = (0..grid.n_points())
        .into_par_iter()
        .map(|i| {
            let (x, bx) = (grid.x(i), b.values()[i]);
            support.iter().map(|&(y, by, v)| kernel.eval(x, y) * (bx - by) * v).sum()
        })
        .collect();
    GridFunction::new(grid, values)
}

pub fn apply_cz_vector(kernel: &CZKernel, f: &VectorGridFunction) -> Result<VectorGridFunction> {
    VectorGridFunction::new(f.components().iter().map(|c| apply_cz(kernel, c)).collect())
}

/// `max_{x ∈ B} Σ_{x_j ∉ 2B} |K(x, x_j) f(x_j)| h` against
/// `Σ_{k=1..k_max} |2^{k+1}B|⁻¹ ∫_{2^{k+1}B} |f|`.
pub fn tail_bound_check(kernel: &CZKernel, f: &GridFunction, ball: &Ball, k_max: u32) -> Result<InequalitySides> {
    let grid = *f.grid();
    let inner = grid.index_range(ball);
    if inner.is_empty() {
        return Err(Error::ZeroMass {
            center: ball.center,
            radius: ball.radius,
        });
    }
    let h = grid.spacing();
    let near = grid.index_range(&ball.dilate(2.0));
    let far: Vec<(f64, f64)> = (0..near.start)
        .chain(near.end..grid.n_points())
        .filter(|&j| f.values()[j] != 0.0)
        .map(|j| (grid.x(j), f.values()[j].abs() * h))
        .collect();
    let lhs = inner
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            far.iter().map(|&(y, v)| kernel.eval(x, y).abs() * v).sum::<f64>()
        })
        .reduce(|| 0.0, f64::max);
    let abs = f.abs();
    let rhs = (1..=k_max)
        .map(|k| {
            let big = ball.dilate(2f64.powi(k as i32 + 1));
            integrate(&abs, &big) / big.measure()
        })
        .sum();
    Ok(InequalitySides { lhs, rhs })
}

/// Symbols used for commutators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum BmoSymbol {
    /// `ln |x|`.
    LogAbs,
    /// `sin(ln |x|)`.
    SinLog,
    Constant { c: f64 },
}

impl BmoSymbol {
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim().to_ascii_lowercase();
        match name.as_str() {
            "logabs" => Ok(BmoSymbol::LogAbs),
            "sinlog" => Ok(BmoSymbol::SinLog),
            "constant" => Ok(BmoSymbol::Constant { c: 1.0 }),
            other => match other.strip_prefix("constant") {
                Some(rest) => rest
                    .trim()
                    .trim_start_matches("c=")
                    .parse()
                    .map(|c| BmoSymbol::Constant { c })
                    .map_err(|_| Error::InvalidParameter(format!("bad constant symbol `{name}`"))),
                None => Err(Error::InvalidParameter(format!("unknown BMO symbol `{name}`"))),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            BmoSymbol::LogAbs => "logabs".into(),
            BmoSymbol::SinLog => "sinlog".into(),
            BmoSymbol::Constant { c } => format!("constant(c={c})"),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        GridFunction::from_fn(*grid, |x| match self {
            BmoSymbol::LogAbs => x.abs().ln(),
            BmoSymbol::SinLog => x.abs().ln().sin(),
            BmoSymbol::Constant { c } => *c,
        })
    }
}

/// `Φ⁻¹(w(B)⁻¹) ‖b - b_B‖_{L^Φ_w(B)}` (to be compared with `‖b‖_*`).
pub fn weighted_bmo_quotient(b: &GridFunction, phi: &YoungFunction, w: &Weight, ball: &Ball) -> Result<f64> {
    let mean = ball_mean(b, ball).ok_or(Error::ZeroMass {
        center: ball.center,
        radius: ball.radius,
    })?;
    let centered = crate::grid::restrict(&b.map(|v| v - mean), ball);
    let mass = ball_mass(w, ball, MassRule::Quadrature(*b.grid()))?;
    Ok(young::inverse(phi, 1.0 / mass)? * luxemburg_norm(&centered, phi, w, Some(ball))?.value)
}

/// `‖|b - b_B| w⁻¹‖_{L^Φ̃_w(B)} / (Φ⁻¹(w(B)⁻¹) |B|)`.
pub fn dual_oscillation_quotient(
    b: &GridFunction,
    phi: &YoungFunction,
    phi_tilde: &YoungFunction,
    w: &Weight,
    ball: &Ball,
) -> Result<f64> {
    let grid = *b.grid();
    let mean = ball_mean(b, ball).ok_or(Error::ZeroMass {
        center: ball.center,
        radius: ball.radius,
    })?;
    let range = grid.index_range(ball);
    let mut values = vec![0.0; grid.n_points()];
    for i in range {
        values[i] = (b.values()[i] - mean).abs() / w.value(grid.x(i))?;
    }
    let g = GridFunction::new(grid, values)?;
    let mass = ball_mass(w, ball, MassRule::Quadrature(grid))?;
    let norm = luxemburg_norm(&g, phi_tilde, w, Some(ball))?.value;
    Ok(norm / (young::inverse(phi, 1.0 / mass)? * ball.measure()))
}
