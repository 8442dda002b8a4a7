//! Luxemburg norms of weighted Orlicz spaces, their weak counterparts, the
//! Orlicz-Morrey norms built from them, and the Hölder-type checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{integrate, Ball, Grid, GridFunction, VectorGridFunction};
use crate::params::Descriptor;
use crate::weights::{self, ball_mass, MassRule, Weight};
use crate::young::{self, YoungFunction};

/// Relative width of the final `lambda` bracket.
pub const NORM_RTOL: f64 = 1e-8;
/// Levels of the weak functional are probed at `level * (1 - WEAK_LEVEL_SHIFT)`.
pub const WEAK_LEVEL_SHIFT: f64 = 1e-9;
const LAMBDA_CAP: f64 = 1e12;

/// The Morrey shape `φ(x, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum MorreyShape {
    /// `r^{-beta}`.
    PowerRadius { beta: f64 },
    /// `Φ⁻¹(w(B(x,r))⁻¹)`; the Morrey space collapses to `L^Φ_w`.
    Lebesgue { phi: YoungFunction, w: Weight },
    /// `Φ⁻¹(w(B(x,r))⁻¹)^{1-kappa}`.
    WeightPower { kappa: f64, phi: YoungFunction, w: Weight },
    /// `e^{1/r}`.
    ExpInverseRadius,
    /// `base^r`.
    ExpRadius { base: f64 },
    /// `1 / ln(e + 1/r)`.
    InverseLog,
    /// `r^{-beta}` for `r <= 1`, `(1 + ln r)^{-a}` for `r >= 1`.
    PowerThenLog { beta: f64, a: f64 },
    /// `∫_r^∞ φ(t) dt/t` for `φ = PowerThenLog { beta, a }` (needs `beta > 0`, `a > 1`):
    /// `(r^{-beta} - 1)/beta + 1/(a-1)` for `r <= 1`, `(1 + ln r)^{1-a}/(a-1)` beyond.
    PowerThenLogMajorant { beta: f64, a: f64 },
    /// Radial table, log-log interpolated, constant extrapolation.
    Table { radii: Vec<f64>, values: Vec<f64> },
    Scaled { c: f64, shape: Box<MorreyShape> },
}

impl MorreyShape {
    pub fn power_radius(beta: f64) -> Self {
        MorreyShape::PowerRadius { beta }
    }

    pub fn scaled(self, c: f64) -> Self {
        MorreyShape::Scaled {
            c,
            shape: Box::new(self),
        }
    }

    pub fn from_descriptor(d: &Descriptor, phi: &YoungFunction, w: &Weight) -> Result<Self> {
        let shape = match d.family.as_str() {
            "powerradius" => MorreyShape::PowerRadius { beta: d.get("beta")? },
            "lebesgue" => MorreyShape::Lebesgue {
                phi: phi.clone(),
                w: w.clone(),
            },
            "weightpower" => {
                let kappa = d.get("kappa")?;
                if !(0.0..1.0).contains(&kappa) || kappa == 0.0 {
                    return Err(Error::InvalidParameter(format!("kappa must lie in (0,1), got {kappa}")));
                }
                MorreyShape::WeightPower {
                    kappa,
                    phi: phi.clone(),
                    w: w.clone(),
                }
            }
            "expinverse" => MorreyShape::ExpInverseRadius,
            "expradius" => MorreyShape::ExpRadius { base: d.get_or("base", 2.0) },
            "inverselog" => MorreyShape::InverseLog,
            "powerthenlog" => MorreyShape::PowerThenLog {
                beta: d.get("beta")?,
                a: d.get("a")?,
            },
            "powerthenlogmajorant" => {
                let (beta, a) = (d.get("beta")?, d.get("a")?);
                if !(beta > 0.0 && a > 1.0) {
                    return Err(Error::InvalidParameter("powerthenlogmajorant needs beta > 0 and a > 1".into()));
                }
                MorreyShape::PowerThenLogMajorant { beta, a }
            }
            other => return Err(Error::InvalidParameter(format!("unknown shape family `{other}`"))),
        };
        let c = d.get_or("scale", 1.0);
        Ok(if c == 1.0 { shape } else { shape.scaled(c) })
    }

    pub fn label(&self) -> String {
        match self {
            MorreyShape::PowerRadius { beta } => format!("r^-{beta}"),
            MorreyShape::Lebesgue { .. } => "lebesgue".into(),
            MorreyShape::WeightPower { kappa, .. } => format!("weightpower(kappa={kappa})"),
            MorreyShape::ExpInverseRadius => "exp(1/r)".into(),
            MorreyShape::ExpRadius { base } => format!("{base}^r"),
            MorreyShape::InverseLog => "1/ln(e+1/r)".into(),
            MorreyShape::PowerThenLog { beta, a } => format!("powerthenlog(beta={beta},a={a})"),
            MorreyShape::PowerThenLogMajorant { beta, a } => {
                format!("powerthenlogmajorant(beta={beta},a={a})")
            }
            MorreyShape::Table { radii, .. } => format!("table({} radii)", radii.len()),
            MorreyShape::Scaled { c, shape } => format!("{c}*{}", shape.label()),
        }
    }

    /// True when `φ` does not depend on the center.
    pub fn is_radial(&self) -> bool {
        match self {
            MorreyShape::Lebesgue { w, .. } | MorreyShape::WeightPower { w, .. } => {
                matches!(w, Weight::Constant { .. })
            }
            MorreyShape::Scaled { shape, .. } => shape.is_radial(),
            _ => true,
        }
    }

    /// `φ(x, r)`; weight-dependent shapes evaluate `w(B(x, r))` with `rule`.
    pub fn value(&self, x: f64, r: f64, rule: MassRule) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("shape radius must be positive, got {r}")));
        }
        Ok(match self {
            MorreyShape::PowerRadius { beta } => r.powf(-beta),
            MorreyShape::Lebesgue { phi, w } => {
                let m = ball_mass(w, &Ball { center: x, radius: r }, rule)?;
                young::inverse(phi, 1.0 / m)?
            }
            MorreyShape::WeightPower { kappa, phi, w } => {
                let m = ball_mass(w, &Ball { center: x, radius: r }, rule)?;
                young::inverse(phi, 1.0 / m)?.powf(1.0 - kappa)
            }
            MorreyShape::ExpInverseRadius => (1.0 / r).exp(),
            MorreyShape::ExpRadius { base } => base.powf(r),
            MorreyShape::InverseLog => 1.0 / (std::f64::consts::E + 1.0 / r).ln(),
            MorreyShape::PowerThenLog { beta, a } => {
                if r <= 1.0 {
                    r.powf(-beta)
                } else {
                    (1.0 + r.ln()).powf(-a)
                }
            }
            MorreyShape::PowerThenLogMajorant { beta, a } => {
                if r <= 1.0 {
                    (r.powf(-beta) - 1.0) / beta + 1.0 / (a - 1.0)
                } else {
                    (1.0 + r.ln()).powf(1.0 - a) / (a - 1.0)
                }
            }
            MorreyShape::Table { radii, values } => table_value(radii, values, r),
            MorreyShape::Scaled { c, shape } => c * shape.value(x, r, rule)?,
        })
    }

    /// `Table` from matching positive radii (increasing) and positive values.
    pub fn table(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(Error::InvalidParameter("shape table needs matching nonempty radii and values".into()));
        }
        if radii.windows(2).any(|w| !(w[0] < w[1])) || radii[0] <= 0.0 {
            return Err(Error::InvalidParameter("shape table radii must be positive and increasing".into()));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("shape table values must be positive and finite".into()));
        }
        Ok(MorreyShape::Table { radii, values })
    }

    /// `(c, beta)` when the shape is `c r^{-beta}`.
    pub fn power_form(&self) -> Option<(f64, f64)> {
        match self {
            MorreyShape::PowerRadius { beta } => Some((1.0, *beta)),
            MorreyShape::Scaled { c, shape } => shape.power_form().map(|(k, b)| (c * k, b)),
            _ => None,
        }
    }

    pub fn at_ball(&self, ball: &Ball, rule: MassRule) -> Result<f64> {
        self.value(ball.center, ball.radius, rule)
    }
}

fn table_value(radii: &[f64], values: &[f64], r: f64) -> f64 {
    if r <= radii[0] {
        return values[0];
    }
    let n = radii.len();
    if r >= radii[n - 1] {
        return values[n - 1];
    }
    let k = radii.partition_point(|&x| x <= r) - 1;
    let t = (r / radii[k]).ln() / (radii[k + 1] / radii[k]).ln();
    values[k] * (values[k + 1] / values[k]).powf(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub achieved_ball: Option<Ball>,
    pub iterations: usize,
    pub modular_at_value: f64,
}

impl NormResult {
    fn zero(ball: Option<Ball>) -> Self {
        NormResult {
            value: 0.0,
            achieved_ball: ball,
            iterations: 0,
            modular_at_value: 0.0,
        }
    }
}

/// Samples `(|f(x_i)|, w(x_i) h)` over the domain.
fn gather(f: &GridFunction, w: &Weight, domain: Option<&Ball>) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = f.grid();
    let range = match domain {
        Some(b) => grid.index_range(b),
        None => 0..grid.n_points(),
    };
    let h = grid.spacing();
    let mut a = Vec::with_capacity(range.len());
    let mut m = Vec::with_capacity(range.len());
    for i in range {
        a.push(f.values()[i].abs());
        m.push(w.value(grid.x(i))? * h);
    }
    Ok((a, m))
}

fn modular(phi: &YoungFunction, a: &[f64], m: &[f64], lambda: f64) -> f64 {
    let mut s = 0.0;
    for (&ai, &mi) in a.iter().zip(m) {
        if ai == 0.0 || mi == 0.0 {
            continue;
        }
        let v = phi.value(ai / lambda);
        if v.is_infinite() {
            return f64::INFINITY;
        }
        s += v * mi;
    }
    s
}

/// Finds the smallest `lambda` (to `NORM_RTOL`) with `F(lambda) <= 1` for a
/// nonincreasing functional `F`, starting from a guess `hi0` and returning the upper
/// end of the final bracket together with `F` there.
fn solve_unit_level(f: impl Fn(f64) -> f64, hi0: f64, cap: f64) -> Result<(f64, f64, usize)> {
    let mut iters = 0usize;
    let mut hi = if hi0.is_finite() && hi0 > 0.0 { hi0 } else { 1.0 };
    let mut f_hi = f(hi);
    iters += 1;
    while !(f_hi <= 1.0) {
        hi *= 2.0;
        if hi > cap {
            return Err(Error::BracketFailed(hi));
        }
        f_hi = f(hi);
        iters += 1;
    }
    let mut lo = hi;
    let mut f_lo = f_hi;
    while f_lo <= 1.0 {
        lo *= 0.5;
        if lo < hi * 1e-300 || lo == 0.0 {
            // F stays below 1 down to underflow: the norm is 0 for all practical purposes
            return Ok((0.0, f_lo, iters));
        }
        f_lo = f(lo);
        iters += 1;
    }
    // Illinois iteration on g(u) = ln F(e^u), keeping the bracket g(lo) > 0 >= g(hi).
    let (mut u_lo, mut u_hi) = (lo.ln(), hi.ln());
    let g = |v: f64| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY };
    let (mut g_lo, mut g_hi) = (g(f_lo), g(f_hi));
    let mut side = 0i8;
    let tol = NORM_RTOL.ln_1p();
    while u_hi - u_lo > tol {
        let secant_ok = g_lo.is_finite() && g_hi.is_finite() && g_lo != g_hi;
        let mut u = if secant_ok {
            u_hi - g_hi * (u_hi - u_lo) / (g_hi - g_lo)
        } else {
            0.5 * (u_lo + u_hi)
        };
        let width = u_hi - u_lo;
        if !(u > u_lo + 1e-3 * width && u < u_hi - 1e-3 * width) {
            u = 0.5 * (u_lo + u_hi);
        }
        let fu = f(u.exp());
        iters += 1;
        let gu = g(fu);
        if fu <= 1.0 {
            u_hi = u;
            g_hi = gu;
            f_hi = fu;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        } else {
            u_lo = u;
            g_lo = gu;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        }
        if iters > 500 {
            break;
        }
    }
    Ok((u_hi.exp(), f_hi, iters))
}

fn luxemburg_from_samples(phi: &YoungFunction, a: &[f64], m: &[f64], ball: Option<Ball>) -> Result<NormResult> {
    let amax = a.iter().copied().fold(0.0, f64::max);
    let total: f64 = a.iter().zip(m).filter(|(ai, _)| **ai > 0.0).map(|(_, mi)| mi).sum();
    if amax == 0.0 || total == 0.0 {
        return Ok(NormResult::zero(ball));
    }
    // the norm of amax * chi_{supp f} bounds the answer from above
    let guess = amax / young::inverse(phi, 1.0 / total)?;
    let (value, modular_at_value, iterations) =
        solve_unit_level(|lam| modular(phi, a, m, lam), guess, LAMBDA_CAP * amax)?;
    Ok(NormResult {
        value,
        achieved_ball: ball,
        iterations,
        modular_at_value,
    })
}

/// `inf { λ > 0 : ∫_B Φ(|f|/λ) w <= 1 }`, over the whole grid when `domain` is `None`.
pub fn luxemburg_norm(f: &GridFunction, phi: &YoungFunction, w: &Weight, domain: Option<&Ball>) -> Result<NormResult> {
    let (a, m) = gather(f, w, domain)?;
    luxemburg_from_samples(phi, &a, &m, domain.copied())
}

/// Level data for the weak functional: distinct levels `a_k` (descending) and the
/// mass of `{|f| > a_k (1 - shift)}`.
fn weak_levels(a: &[f64], m: &[f64]) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = a
        .iter()
        .zip(m)
        .filter(|(ai, _)| **ai > 0.0)
        .map(|(&ai, &mi)| (ai, mi))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut cumulative = Vec::with_capacity(pairs.len());
    let mut acc = 0.0;
    for p in &pairs {
        acc += p.1;
        cumulative.push(acc);
    }
    let mut levels = Vec::new();
    let mut k = 0;
    while k < pairs.len() {
        let level = pairs[k].0;
        let probe = level * (1.0 - WEAK_LEVEL_SHIFT);
        // all samples strictly above the probe; at least the level itself, since the
        // shift can vanish for subnormal levels
        let count = pairs.partition_point(|p| p.0 > probe).max(k + 1);
        levels.push((level, cumulative[count - 1]));
        while k < pairs.len() && pairs[k].0 == level {
            k += 1;
        }
    }
    levels
}

fn weak_functional(phi: &YoungFunction, levels: &[(f64, f64)], lambda: f64) -> f64 {
    levels
        .iter()
        .map(|&(level, mass)| phi.value(level * (1.0 - WEAK_LEVEL_SHIFT) / lambda) * mass)
        .fold(0.0, f64::max)
}

fn weak_from_samples(phi: &YoungFunction, a: &[f64], m: &[f64], ball: Option<Ball>) -> Result<NormResult> {
    let levels = weak_levels(a, m);
    let Some(&(amax, _)) = levels.first() else {
        return Ok(NormResult::zero(ball));
    };
    let total = levels.last().map(|l| l.1).unwrap_or(0.0);
    if total == 0.0 {
        return Ok(NormResult::zero(ball));
    }
    let guess = amax / young::inverse(phi, 1.0 / total)?;
    let (value, modular_at_value, iterations) =
        solve_unit_level(|lam| weak_functional(phi, &levels, lam), guess, LAMBDA_CAP * amax)?;
    Ok(NormResult {
        value,
        achieved_ball: ball,
        iterations,
        modular_at_value,
    })
}

/// `inf { λ : sup_t Φ(t) w({|f|/λ > t}) <= 1 }`.
pub fn weak_norm(f: &GridFunction, phi: &YoungFunction, w: &Weight, domain: Option<&Ball>) -> Result<NormResult> {
    let (a, m) = gather(f, w, domain)?;
    weak_from_samples(phi, &a, &m, domain.copied())
}

/// `sup_B φ(B)⁻¹ Φ⁻¹(w(B)⁻¹) ‖f‖_{L^Φ_w(B)}` over the supplied balls, with the weak
/// norm inside when `weak` is set. Masses use midpoint quadrature on `f`'s grid.
pub fn morrey_norm(
    f: &GridFunction,
    phi: &YoungFunction,
    shape: &MorreyShape,
    w: &Weight,
    balls: &[Ball],
    weak: bool,
) -> Result<NormResult> {
    if balls.is_empty() {
        return Err(Error::Empty("Morrey norm needs at least one ball".into()));
    }
    let grid = *f.grid();
    let wv = weights::sample(w, &grid)?;
    let quotients: Vec<(f64, NormResult)> = balls
        .par_iter()
        .map(|b| morrey_quotient(f, phi, shape, &wv, &grid, b, weak))
        .collect::<Result<_>>()?;
    let mut best = (f64::NEG_INFINITY, NormResult::zero(None));
    let mut iterations = 0;
    for (q, r) in quotients {
        iterations += r.iterations;
        if q > best.0 {
            best = (q, r);
        }
    }
    Ok(NormResult {
        value: best.0.max(0.0),
        achieved_ball: best.1.achieved_ball,
        iterations,
        modular_at_value: best.1.modular_at_value,
    })
}

fn morrey_quotient(
    f: &GridFunction,
    phi: &YoungFunction,
    shape: &MorreyShape,
    wv: &[f64],
    grid: &Grid,
    ball: &Ball,
    weak: bool,
) -> Result<(f64, NormResult)> {
    let range = grid.index_range(ball);
    let h = grid.spacing();
    let m: Vec<f64> = wv[range.clone()].iter().map(|v| v * h).collect();
    let mass: f64 = m.iter().sum();
    if mass == 0.0 {
        return Err(Error::ZeroMass {
            center: ball.center,
            radius: ball.radius,
        });
    }
    let a: Vec<f64> = f.values()[range].iter().map(|v| v.abs()).collect();
    let inner = if weak {
        weak_from_samples(phi, &a, &m, Some(*ball))?
    } else {
        luxemburg_from_samples(phi, &a, &m, Some(*ball))?
    };
    let phi_b = shape.at_ball(ball, MassRule::Quadrature(*grid))?;
    let q = young::inverse(phi, 1.0 / mass)? * inner.value / phi_b;
    Ok((q, NormResult { achieved_ball: Some(*ball), ..inner }))
}

/// Pointwise `(Σ_j |f_j|^q)^{1/q}`.
pub fn vector_lq_pointwise(f: &VectorGridFunction, q: f64) -> Result<GridFunction> {
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!("l^q needs q >= 1, got {q}")));
    }
    let n = f.grid().n_points();
    let values = (0..n)
        .map(|i| {
            if q.is_infinite() {
                return f.components().iter().map(|c| c.values()[i].abs()).fold(0.0, f64::max);
            }
            // scale by the largest entry to avoid overflow in |f|^q
            let big = f.components().iter().map(|c| c.values()[i].abs()).fold(0.0, f64::max);
            if big == 0.0 {
                return 0.0;
            }
            let s: f64 = f.components().iter().map(|c| (c.values()[i].abs() / big).powf(q)).sum();
            big * s.powf(1.0 / q)
        })
        .collect();
    GridFunction::new(*f.grid(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalitySides {
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalitySides {
    /// `lhs / rhs`, with `0/0 = 0`.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// `|∫ f g w|` against `2 ‖f‖_{L^Φ_w} ‖g‖_{L^Φ̃_w}`.
pub fn holder_check(f: &GridFunction, g: &GridFunction, phi: &YoungFunction, w: &Weight) -> Result<InequalitySides> {
    holder_check_with(f, g, phi, &young::complement(phi), w)
}

/// As [`holder_check`] with an explicitly supplied complementary function.
pub fn holder_check_with(
    f: &GridFunction,
    g: &GridFunction,
    phi: &YoungFunction,
    phi_tilde: &YoungFunction,
    w: &Weight,
) -> Result<InequalitySides> {
    let grid = f.grid();
    if grid != g.grid() {
        return Err(Error::GridMismatch);
    }
    let wv = weights::sample(w, grid)?;
    let lhs = f
        .values()
        .iter()
        .zip(g.values())
        .zip(&wv)
        .map(|((a, b), c)| a * b * c)
        .sum::<f64>()
        .abs()
        * grid.spacing();
    let nf = luxemburg_norm(f, phi, w, None)?.value;
    let ng = luxemburg_norm(g, phi_tilde, w, None)?.value;
    Ok(InequalitySides {
        lhs,
        rhs: 2.0 * nf * ng,
    })
}

/// `∫_B |f|` against `|B| Φ⁻¹(w(B)⁻¹) ‖f‖_{L^Φ_w(B)}` (constant omitted).
pub fn l1_ball_bound_check(f: &GridFunction, ball: &Ball, phi: &YoungFunction, w: &Weight) -> Result<InequalitySides> {
    let lhs = integrate(&f.abs(), ball);
    let mass = ball_mass(w, ball, MassRule::Quadrature(*f.grid()))?;
    let norm = luxemburg_norm(f, phi, w, Some(ball))?.value;
    Ok(InequalitySides {
        lhs,
        rhs: ball.measure() * young::inverse(phi, 1.0 / mass)? * norm,
    })
}
