//! Young functions: evaluation, generalized inverse, Legendre-type complement,
//! sampled Δ₂ / ∇₂ classifiers, dilation indices and lower/upper type checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{logspace, logspace10};
use crate::params::Descriptor;

/// Relative tolerance of the bisection used by [`inverse`] for families without a closed form.
pub const INVERSE_RTOL: f64 = 1e-10;

/// Number of knots of a tabulated complement (odd, so that `r = 1` is a knot).
pub const COMPLEMENT_KNOTS: usize = 2001;
/// Decimal exponents of the knot range `[1e-8, 1e8]`.
pub const COMPLEMENT_RANGE: (f64, f64) = (-8.0, 8.0);

/// Range of `r` used by the Δ₂ / ∇₂ classifiers.
pub const CLASSIFY_RANGE: (f64, f64) = (1e-6, 1e6);
pub const DELTA2_THRESHOLD: f64 = 1e6;
/// Witness candidates for ∇₂: a few small values, then `2^3 ..= 2^40`, enough for
/// `Power(p)` down to `p = 1.025`.
pub fn nabla2_candidates() -> impl Iterator<Item = f64> {
    [1.25, 1.5, 2.0, 3.0, 4.0].into_iter().chain((3..=40).map(|e| 2f64.powi(e)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum YoungFunction {
    /// `r^p`, `p > 1`.
    Power { p: f64 },
    /// `r`.
    Identity,
    /// `e^r - r - 1`.
    ExpType,
    /// `r^p (log(e + r))^a`.
    PowerLog { p: f64, a: f64 },
    /// `coef * r^p`; closed-form complements of power functions land here.
    ScaledPower { coef: f64, p: f64 },
    Tabulated(Tabulated),
}

/// Knot table interpolated linearly in log-log coordinates.
///
/// Values beyond the last knot are `+inf` when `infinite_beyond` is set (a divergent
/// Legendre transform), otherwise extrapolated with the last log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    r: Vec<f64>,
    v: Vec<f64>,
    infinite_beyond: bool,
}

impl Tabulated {
    pub fn new(knots: Vec<(f64, f64)>, infinite_beyond: bool) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidParameter("a table needs at least two knots".into()));
        }
        let (r, v): (Vec<f64>, Vec<f64>) = knots.into_iter().unzip();
        if r.iter().any(|x| !(x.is_finite() && *x > 0.0)) || r.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "knot abscissae must be positive, finite and strictly increasing".into(),
            ));
        }
        if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || v.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "knot values must be finite, nonnegative and nondecreasing".into(),
            ));
        }
        // chord slopes from the origin through consecutive knots must not decrease
        let slopes: Vec<f64> = std::iter::once(v[0] / r[0])
            .chain(r.windows(2).zip(v.windows(2)).map(|(rw, vw)| (vw[1] - vw[0]) / (rw[1] - rw[0])))
            .collect();
        if slopes.windows(2).any(|s| s[1] < s[0] * (1.0 - 1e-9) - 1e-300) {
            return Err(Error::InvalidParameter("knots are not convex".into()));
        }
        Ok(Tabulated { r, v, infinite_beyond })
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.r.iter().copied().zip(self.v.iter().copied())
    }

    pub fn last_knot(&self) -> f64 {
        *self.r.last().expect("nonempty table")
    }

    pub fn infinite_beyond(&self) -> bool {
        self.infinite_beyond
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.r.len();
        if x <= 0.0 {
            return 0.0;
        }
        if x < self.r[0] {
            if self.v[0] == 0.0 {
                return 0.0;
            }
            return match loglog_slope(self.r[0], self.v[0], self.r[1], self.v[1]) {
                Some(e) if e >= 1.0 => self.v[0] * (x / self.r[0]).powf(e),
                _ => self.v[0] * x / self.r[0],
            };
        }
        if x > self.r[n - 1] {
            if self.infinite_beyond {
                return f64::INFINITY;
            }
            let (r0, v0, r1, v1) = (self.r[n - 2], self.v[n - 2], self.r[n - 1], self.v[n - 1]);
            return match loglog_slope(r0, v0, r1, v1) {
                Some(e) => v1 * (x / r1).powf(e),
                None => v1 + (v1 - v0) / (r1 - r0) * (x - r1),
            };
        }
        let k = self.r.partition_point(|&ri| ri <= x).saturating_sub(1).min(n - 2);
        let (r0, v0, r1, v1) = (self.r[k], self.v[k], self.r[k + 1], self.v[k + 1]);
        if x == r0 {
            return v0;
        }
        match loglog_slope(r0, v0, r1, v1) {
            Some(e) => v0 * (x / r0).powf(e),
            None => v0 + (v1 - v0) * (x - r0) / (r1 - r0),
        }
    }
}

fn loglog_slope(r0: f64, v0: f64, r1: f64, v1: f64) -> Option<f64> {
    (v0 > 0.0 && v1 > 0.0).then(|| (v1 / v0).ln() / (r1 / r0).ln())
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("power family needs p > 1, got {p}")));
        }
        Ok(YoungFunction::Power { p })
    }

    pub fn power_log(p: f64, a: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite() && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "powerlog family needs p > 1 and finite a, got p={p}, a={a}"
            )));
        }
        Ok(YoungFunction::PowerLog { p, a })
    }

    pub fn scaled_power(coef: f64, p: f64) -> Result<Self> {
        if !(coef > 0.0 && coef.is_finite() && p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scaledpower family needs coef > 0 and p >= 1, got coef={coef}, p={p}"
            )));
        }
        Ok(YoungFunction::ScaledPower { coef, p })
    }

    pub fn from_descriptor(d: &Descriptor) -> Result<Self> {
        match d.family.as_str() {
            "power" => {
                d.expect_only(&["p"])?;
                YoungFunction::power(d.get("p")?)
            }
            "identity" => {
                d.expect_only(&[])?;
                Ok(YoungFunction::Identity)
            }
            "exptype" | "exp" => {
                d.expect_only(&[])?;
                Ok(YoungFunction::ExpType)
            }
            "powerlog" => {
                d.expect_only(&["p", "a"])?;
                YoungFunction::power_log(d.get("p")?, d.get("a")?)
            }
            "scaledpower" => {
                d.expect_only(&["p", "coef"])?;
                YoungFunction::scaled_power(d.get("coef")?, d.get("p")?)
            }
            other => Err(Error::InvalidParameter(format!("unknown Young family `{other}`"))),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_descriptor(&Descriptor::parse(text)?)
    }

    pub fn label(&self) -> String {
        match self {
            YoungFunction::Power { p } => format!("power(p={p})"),
            YoungFunction::Identity => "identity".into(),
            YoungFunction::ExpType => "exptype".into(),
            YoungFunction::PowerLog { p, a } => format!("powerlog(p={p},a={a})"),
            YoungFunction::ScaledPower { coef, p } => format!("scaledpower(coef={coef},p={p})"),
            YoungFunction::Tabulated(t) => format!("tabulated({} knots)", t.r.len()),
        }
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self, YoungFunction::Tabulated(_))
    }

    /// `Φ(r)` for `r >= 0` without the domain check.
    #[inline]
    pub(crate) fn value(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match self {
            YoungFunction::Power { p } if *p == 2.0 => r * r,
            YoungFunction::Power { p } => r.powf(*p),
            YoungFunction::Identity => r,
            YoungFunction::ExpType => exp_type(r),
            YoungFunction::PowerLog { p, a } => r.powf(*p) * (std::f64::consts::E + r).ln().powf(*a),
            YoungFunction::ScaledPower { coef, p } => coef * r.powf(*p),
            YoungFunction::Tabulated(t) => t.eval(r),
        }
    }
}

fn exp_type(r: f64) -> f64 {
    if r < 1e-3 {
        // series avoids the cancellation in e^r - 1 - r
        let r2 = r * r;
        r2 * (0.5 + r * (1.0 / 6.0 + r * (1.0 / 24.0 + r / 120.0)))
    } else {
        r.exp_m1() - r
    }
}

pub fn eval(phi: &YoungFunction, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::Domain(format!("Young functions are defined on [0, inf), got {r}")));
    }
    Ok(phi.value(r))
}

/// Generalized inverse `inf { r >= 0 : Φ(r) > s }`.
pub fn inverse(phi: &YoungFunction, s: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::Domain(format!("inverse needs s >= 0, got {s}")));
    }
    if s == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let closed = match phi {
        YoungFunction::Power { p } => Some(s.powf(1.0 / p)),
        YoungFunction::ScaledPower { coef, p } => Some((s / coef).powf(1.0 / p)),
        YoungFunction::Identity => Some(s),
        YoungFunction::ExpType | YoungFunction::PowerLog { .. } if s == 0.0 => Some(0.0),
        _ => None,
    };
    if let Some(v) = closed {
        return Ok(v);
    }
    Ok(bisect_inverse(phi, s))
}

fn bisect_inverse(phi: &YoungFunction, s: f64) -> f64 {
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while phi.value(hi) <= s {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    for _ in 0..2000 {
        if hi - lo <= INVERSE_RTOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi.value(mid) > s {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Complementary function `sup_{s >= 0} (r s - Φ(s))`.
///
/// Power families use the closed form `(p-1) p^{-p'} r^{p'}` (scaled accordingly);
/// everything else is tabulated by maximizing over a log-spaced `s` grid with a
/// golden-section polish around the discrete maximizer.
pub fn complement(phi: &YoungFunction) -> YoungFunction {
    match phi {
        YoungFunction::Power { p } => power_complement(1.0, *p),
        YoungFunction::ScaledPower { coef, p } if *p > 1.0 => power_complement(*coef, *p),
        _ => YoungFunction::Tabulated(legendre_table(phi, COMPLEMENT_KNOTS, COMPLEMENT_RANGE)),
    }
}

fn power_complement(coef: f64, p: f64) -> YoungFunction {
    // sup_s (r s - c s^p) = c (p-1) p^{-p'} (r/c)^{p'}
    let q = p / (p - 1.0);
    let c = (p - 1.0) * p.powf(-q) * coef * coef.powf(-q);
    YoungFunction::ScaledPower { coef: c, p: q }
}

/// Tabulates the Legendre transform of `phi`; knots and the `s` search grid are both
/// `10^e` for `e` evenly spaced over `exp_range`.
pub fn legendre_table(phi: &YoungFunction, n: usize, exp_range: (f64, f64)) -> Tabulated {
    let knots_r = logspace10(exp_range.0, exp_range.1, n);
    let mut s: Vec<f64> = vec![0.0];
    s.extend(knots_r.iter().copied());
    let vals: Vec<f64> = s.iter().map(|&x| phi.value(x)).collect();

    let mut knots = Vec::with_capacity(n);
    let mut diverged = false;
    let mut start = 0usize;
    for &r in &knots_r {
        // maximizer is nondecreasing in r for convex phi
        let mut best = start;
        let mut best_val = r * s[start] - vals[start];
        for j in start..s.len() {
            let g = r * s[j] - vals[j];
            if g > best_val {
                best_val = g;
                best = j;
            }
        }
        let last = s.len() - 1;
        if best == last && r * s[last] - vals[last] > r * s[last - 1] - vals[last - 1] {
            diverged = true;
            break;
        }
        start = best;
        let lo = s[best.saturating_sub(1)];
        let hi = s[(best + 1).min(last)];
        let polished = golden_max(|x| r * x - phi.value(x), lo, hi, 60);
        knots.push((r, best_val.max(polished).max(0.0)));
    }
    if knots.len() < 2 {
        // divergent almost immediately: keep a minimal table that is +inf past its end
        let r0 = knots_r[0];
        knots = vec![(r0, knots.first().map_or(0.0, |k| k.1)), (r0 * 1.0000001, knots.first().map_or(0.0, |k| k.1))];
    }
    enforce_convex(&mut knots);
    Tabulated::new(knots, diverged).expect("Legendre transform tabulation is convex")
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

// Rounding in the discrete maximization can leave tiny non-convex wiggles.
fn enforce_convex(knots: &mut [(f64, f64)]) {
    for k in 1..knots.len() {
        if knots[k].1 < knots[k - 1].1 {
            knots[k].1 = knots[k - 1].1;
        }
    }
    let mut prev_slope = knots[0].1 / knots[0].0;
    for k in 1..knots.len() {
        let (r0, v0) = knots[k - 1];
        let (r1, v1) = knots[k];
        let slope = (v1 - v0) / (r1 - r0);
        if slope < prev_slope {
            knots[k].1 = v0 + prev_slope * (r1 - r0);
        } else {
            prev_slope = slope;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delta2Report {
    pub holds: bool,
    pub constant: f64,
}

/// Sampled Δ₂ test: `sup Φ(2r)/Φ(r)` over log-spaced `r`.
pub fn check_delta2(phi: &YoungFunction) -> Delta2Report {
    let rs = logspace(CLASSIFY_RANGE.0, CLASSIFY_RANGE.1, 241);
    let ratios: Vec<f64> = rs
        .iter()
        .filter_map(|&r| {
            let (a, b) = (phi.value(2.0 * r), phi.value(r));
            match (a, b) {
                (a, _) if a == 0.0 => None,
                (_, b) if b == 0.0 || b.is_infinite() => Some(f64::INFINITY),
                (a, b) => Some(a / b),
            }
        })
        .collect();
    let constant = ratios.iter().copied().fold(0.0, f64::max);
    let top = ratios.len().saturating_sub(ratios.len() / 12);
    let top_sup = ratios[top..].iter().copied().fold(0.0, f64::max);
    let rest_sup = ratios[..top].iter().copied().fold(0.0, f64::max);
    let holds = constant.is_finite() && constant < DELTA2_THRESHOLD && top_sup <= rest_sup * (1.0 + 1e-2);
    Delta2Report { holds, constant }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nabla2Report {
    pub holds: bool,
    pub witness_k: Option<f64>,
}

/// Sampled ∇₂ test: first `k` with `Φ(r) <= Φ(kr)/(2k)` on every sample.
pub fn check_nabla2(phi: &YoungFunction) -> Nabla2Report {
    let rs = logspace(CLASSIFY_RANGE.0, CLASSIFY_RANGE.1, 241);
    let witness_k = nabla2_candidates().find(|&k| nabla2_holds_with(phi, k, &rs));
    Nabla2Report {
        holds: witness_k.is_some(),
        witness_k,
    }
}

pub fn nabla2_holds_with(phi: &YoungFunction, k: f64, rs: &[f64]) -> bool {
    rs.iter()
        .all(|&r| phi.value(r) <= phi.value(k * r) / (2.0 * k) * (1.0 + 1e-12))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationIndices {
    pub lower: f64,
    pub upper: f64,
    pub t_grid_decades: u32,
    pub fit_residual: f64,
}

/// Windows and sampling for [`dilation_indices`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexWindows {
    pub lower: (f64, f64),
    pub upper: (f64, f64),
    pub points_per_decade: usize,
    pub s_range: (f64, f64),
    pub s_points: usize,
}

impl Default for IndexWindows {
    fn default() -> Self {
        IndexWindows {
            lower: (1e-6, 1e-2),
            upper: (1e2, 1e6),
            points_per_decade: 5,
            s_range: (1e-8, 1e8),
            s_points: 321,
        }
    }
}

/// `h_Φ(t) = sup_s Φ(st)/Φ(s)` over the sampled `s` grid.
pub fn dilation_function(phi: &YoungFunction, t: f64, s_grid: &[f64]) -> f64 {
    s_grid
        .iter()
        .filter_map(|&s| {
            let den = phi.value(s);
            if den == 0.0 || den.is_infinite() {
                return None;
            }
            Some(phi.value(s * t) / den)
        })
        .fold(0.0, f64::max)
}

pub fn dilation_indices(phi: &YoungFunction) -> DilationIndices {
    dilation_indices_with(phi, &IndexWindows::default())
}

pub fn dilation_indices_with(phi: &YoungFunction, win: &IndexWindows) -> DilationIndices {
    let s_grid = logspace(win.s_range.0, win.s_range.1, win.s_points);
    let fit = |(a, b): (f64, f64)| -> (f64, f64) {
        let decades = (b / a).log10().round().max(1.0) as usize;
        let ts = logspace(a, b, decades * win.points_per_decade + 1);
        let hs: Vec<f64> = ts.iter().map(|&t| dilation_function(phi, t, &s_grid)).collect();
        if hs.iter().any(|h| !h.is_finite()) {
            return (f64::INFINITY, f64::INFINITY);
        }
        if hs.iter().any(|&h| h <= 0.0) {
            return (f64::NAN, f64::INFINITY);
        }
        let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
        least_squares(&xs, &ys)
    };
    let (lower, res_lo) = fit(win.lower);
    let (upper, res_hi) = fit(win.upper);
    DilationIndices {
        lower,
        upper,
        t_grid_decades: (win.lower.1 / win.lower.0).log10().round() as u32,
        fit_residual: res_lo.max(res_hi),
    }
}

/// Least-squares slope and RMS residual of `y` against `x`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (my + slope * (x - mx))).powi(2))
        .sum();
    (slope, (rss / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeBound {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeReport {
    pub holds: bool,
    pub constant: f64,
}

/// Sampled lower/upper type test: `sup Φ(st) / (t^p Φ(s))` over `t >= 1` (upper) or
/// `t <= 1` (lower). Fails when the sup is infinite, above `1e6`, or still growing
/// in the outer half of the `t` range.
pub fn check_type(phi: &YoungFunction, p: f64, which: TypeBound) -> Result<TypeReport> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("type exponent must be >= 0, got {p}")));
    }
    let ts = match which {
        TypeBound::Upper => logspace(1.0, 1e6, 61),
        TypeBound::Lower => {
            let mut t = logspace(1e-6, 1.0, 61);
            t.reverse();
            t
        }
    };
    let s_grid = logspace(1e-6, 1e6, 121);
    let sup_at = |t: f64| {
        s_grid
            .iter()
            .filter_map(|&s| {
                let den = phi.value(s);
                (den > 0.0 && den.is_finite()).then(|| phi.value(s * t) / (t.powf(p) * den))
            })
            .fold(0.0, f64::max)
    };
    let sups: Vec<f64> = ts.iter().map(|&t| sup_at(t)).collect();
    let half = sups.len() / 2;
    let inner = sups[..half].iter().copied().fold(0.0, f64::max);
    let outer = sups[half..].iter().copied().fold(0.0, f64::max);
    let constant = inner.max(outer);
    let holds = constant.is_finite() && constant <= 1e6 && outer <= 1.25 * inner;
    Ok(TypeReport { holds, constant })
}

/// Midpoint-convexity check on sampled triples.
pub fn is_convex_sampled(phi: &YoungFunction, lo: f64, hi: f64, n: usize) -> bool {
    let rs = logspace(lo, hi, n);
    rs.iter().enumerate().all(|(i, &r)| {
        rs[i..].iter().all(|&s| {
            let mid = phi.value(0.5 * (r + s));
            let chord = 0.5 * (phi.value(r) + phi.value(s));
            mid <= chord * (1.0 + 1e-9) + 1e-300
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<YoungFunction> {
        vec![
            YoungFunction::power(2.0).unwrap(),
            YoungFunction::power(3.0).unwrap(),
            YoungFunction::Identity,
            YoungFunction::ExpType,
            YoungFunction::power_log(2.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval(&YoungFunction::power(2.0).unwrap(), 3.0).unwrap(), 9.0);
        assert_eq!(eval(&YoungFunction::Identity, 7.0).unwrap(), 7.0);
        assert_eq!(eval(&YoungFunction::ExpType, 0.0).unwrap(), 0.0);
        assert!(eval(&YoungFunction::Identity, -1.0).is_err());
    }

    #[test]
    fn exp_type_is_accurate_near_zero() {
        for r in [1e-6_f64, 1e-4, 9e-4, 1.1e-3, 0.5] {
            // Taylor series of e^r - 1 - r summed to 30 terms
            let mut term = r;
            let mut exact = 0.0;
            for k in 2..32 {
                term *= r / k as f64;
                exact += term;
            }
            let got = exp_type(r);
            assert!((got / exact - 1.0).abs() < 1e-9, "r={r}: {got} vs {exact}");
        }
    }

    #[test]
    fn inverse_examples() {
        let p2 = YoungFunction::power(2.0).unwrap();
        assert_eq!(inverse(&p2, 9.0).unwrap(), 3.0);
        assert_eq!(inverse(&YoungFunction::power(3.7).unwrap(), 0.0).unwrap(), 0.0);
        let x = inverse(&YoungFunction::ExpType, std::f64::consts::E - 2.0).unwrap();
        assert!((x - 1.0).abs() < 1e-8, "{x}");
        assert!(inverse(&p2, -1.0).is_err());
        assert_eq!(inverse(&p2, f64::INFINITY).unwrap(), f64::INFINITY);
    }

    #[test]
    fn generalized_inverse_consistency() {
        for phi in families() {
            for s in logspace(1e-6, 1e6, 40) {
                let r = inverse(&phi, s).unwrap();
                assert!(phi.value(r) <= s * (1.0 + 1e-8), "{}: s={s}", phi.label());
                assert!(phi.value(r * (1.0 + 1e-8) + 1e-300) >= s * (1.0 - 1e-6), "{}: s={s}", phi.label());
            }
        }
    }

    // Brute-force Legendre transform on a dense uniform grid; independent of the
    // log-grid tabulation and closed forms used by `complement`.
    fn brute_complement(phi: &YoungFunction, r: f64, s_max: f64) -> f64 {
        let n = 400_000;
        (0..=n)
            .map(|k| {
                let s = s_max * k as f64 / n as f64;
                r * s - phi.value(s)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn complement_examples() {
        let p2 = YoungFunction::power(2.0).unwrap();
        let c = complement(&p2);
        assert!((c.value(2.0) - 1.0).abs() < 1e-12);
        assert!((brute_complement(&p2, 2.0, 10.0) - 1.0).abs() < 1e-8);

        let ci = complement(&YoungFunction::Identity);
        assert_eq!(ci.value(0.5), 0.0);
        assert!(brute_complement(&YoungFunction::Identity, 0.5, 10.0).abs() < 1e-12);
        assert!(ci.value(1.0).is_finite());
        assert_eq!(ci.value(1.01), f64::INFINITY);
    }

    #[test]
    fn tabulated_complement_matches_brute_force() {
        for phi in [YoungFunction::ExpType, YoungFunction::power_log(2.0, 1.0).unwrap()] {
            let c = complement(&phi);
            assert!(c.is_tabulated());
            for r in [0.05, 0.3, 1.0, 2.5, 7.0] {
                let brute = brute_complement(&phi, r, 40.0);
                let got = c.value(r);
                assert!((got / brute - 1.0).abs() < 2e-3, "{} r={r}: {got} vs {brute}", phi.label());
            }
        }
    }

    #[test]
    fn complement_is_an_involution() {
        let p3 = YoungFunction::power(3.0).unwrap();
        let cc = complement(&complement(&p3));
        for r in logspace(1e-3, 1e3, 25) {
            assert!((cc.value(r) / p3.value(r) - 1.0).abs() < 0.03);
        }
        let cci = complement(&complement(&YoungFunction::Identity));
        for r in logspace(1e-3, 1e3, 25) {
            assert!((cci.value(r) / r - 1.0).abs() < 0.03, "r={r}: {}", cci.value(r));
        }
    }

    #[test]
    fn young_sandwich_holds() {
        for phi in families() {
            let c = complement(&phi);
            let slack = if c.is_tabulated() { 0.05 } else { 1e-9 };
            for r in logspace(1e-4, 1e4, 50) {
                let prod = inverse(&phi, r).unwrap() * inverse(&c, r).unwrap();
                assert!(prod >= r * (1.0 - slack), "{} r={r}: {prod}", phi.label());
                assert!(prod <= 2.0 * r * (1.0 + slack), "{} r={r}: {prod}", phi.label());
            }
        }
    }

    #[test]
    fn classifier_labels() {
        let p2 = YoungFunction::power(2.0).unwrap();
        let d = check_delta2(&p2);
        assert!(d.holds);
        assert!((d.constant - 4.0).abs() < 1e-9);
        let n = check_nabla2(&p2);
        assert!(n.holds);
        assert!(nabla2_holds_with(&p2, 4.0, &logspace(1e-6, 1e6, 241)));

        let id = check_delta2(&YoungFunction::Identity);
        assert!(id.holds);
        assert!((id.constant - 2.0).abs() < 1e-12);
        assert_eq!(check_nabla2(&YoungFunction::Identity), Nabla2Report { holds: false, witness_k: None });

        let e = check_delta2(&YoungFunction::ExpType);
        assert!(!e.holds);
        assert!(e.constant.is_infinite());
        assert!(check_nabla2(&YoungFunction::ExpType).holds);
    }

    #[test]
    fn dilation_indices_examples() {
        let d = dilation_indices(&YoungFunction::power(2.5).unwrap());
        assert!((d.lower - 2.5).abs() < 1e-2 && (d.upper - 2.5).abs() < 1e-2, "{d:?}");
        let d = dilation_indices(&YoungFunction::Identity);
        assert!((d.lower - 1.0).abs() < 1e-2 && (d.upper - 1.0).abs() < 1e-2);
        let d = dilation_indices(&YoungFunction::ExpType);
        assert!((d.lower - 2.0).abs() < 1e-2);
        assert!(d.upper.is_infinite());
    }

    #[test]
    fn powerlog_indices_against_direct_h() {
        let phi = YoungFunction::power_log(2.0, 1.0).unwrap();
        let d = dilation_indices(&phi);
        // oracle: two-point slope of log h at the window ends, h by dense direct search
        let dense = logspace(1e-10, 1e10, 4001);
        let slope = |a: f64, b: f64| {
            (dilation_function(&phi, b, &dense).ln() - dilation_function(&phi, a, &dense).ln()) / (b / a).ln()
        };
        let lower_oracle = slope(1e-6, 1e-2);
        let upper_oracle = slope(1e2, 1e6);
        assert!((d.lower - 2.0).abs() < 0.05, "{d:?}");
        assert!((d.lower - lower_oracle).abs() < 0.02, "{d:?} vs {lower_oracle}");
        assert!((d.upper - upper_oracle).abs() < 0.03, "{d:?} vs {upper_oracle}");
        // the logarithmic factor is still visible on a finite window
        assert!(d.upper > 2.0 && d.upper < 2.2, "{d:?}");
    }

    #[test]
    fn type_examples() {
        let p2 = YoungFunction::power(2.0).unwrap();
        let up2 = check_type(&p2, 2.0, TypeBound::Upper).unwrap();
        assert!(up2.holds && (up2.constant - 1.0).abs() < 1e-12);
        assert!(!check_type(&p2, 1.5, TypeBound::Upper).unwrap().holds);
        let lo2 = check_type(&p2, 2.0, TypeBound::Lower).unwrap();
        assert!(lo2.holds && (lo2.constant - 1.0).abs() < 1e-12);
        assert!(!check_type(&p2, 3.0, TypeBound::Lower).unwrap().holds);
        assert!(check_type(&p2, -1.0, TypeBound::Lower).is_err());
        assert!(!check_type(&YoungFunction::ExpType, 5.0, TypeBound::Upper).unwrap().holds);
    }

    #[test]
    fn delta2_nabla2_iff_power_types() {
        for p in [1.2, 2.0, 3.5, 6.0] {
            let phi = YoungFunction::power(p).unwrap();
            assert!(check_delta2(&phi).holds);
            assert!(check_nabla2(&phi).holds);
            assert!(check_type(&phi, p, TypeBound::Lower).unwrap().holds);
            assert!(check_type(&phi, p, TypeBound::Upper).unwrap().holds);
        }
    }

    #[test]
    fn families_are_convex_and_monotone() {
        for phi in families() {
            assert!(is_convex_sampled(&phi, 1e-3, 50.0, 60), "{}", phi.label());
            let rs = logspace(1e-4, 1e4, 200);
            assert!(rs.windows(2).all(|w| phi.value(w[0]) <= phi.value(w[1])));
        }
    }

    #[test]
    fn tabulated_validation() {
        assert!(Tabulated::new(vec![(1.0, 1.0)], false).is_err());
        assert!(Tabulated::new(vec![(1.0, 1.0), (0.5, 2.0)], false).is_err());
        assert!(Tabulated::new(vec![(1.0, 2.0), (2.0, 1.0)], false).is_err());
        // concave knots
        assert!(Tabulated::new(vec![(1.0, 1.0), (2.0, 3.0), (3.0, 3.5)], false).is_err());
        let t = Tabulated::new(vec![(1.0, 1.0), (2.0, 4.0), (4.0, 16.0)], false).unwrap();
        let phi = YoungFunction::Tabulated(t);
        assert!((phi.value(3.0) - 9.0).abs() < 1e-9);
        assert!((phi.value(8.0) - 64.0).abs() < 1e-9);
        assert!((phi.value(0.5) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn parse_descriptors() {
        assert_eq!(YoungFunction::parse("power p=2.5").unwrap(), YoungFunction::Power { p: 2.5 });
        assert_eq!(YoungFunction::parse("family=exptype").unwrap(), YoungFunction::ExpType);
        assert_eq!(
            YoungFunction::parse("family=powerlog p=2 a=1").unwrap(),
            YoungFunction::PowerLog { p: 2.0, a: 1.0 }
        );
        assert!(YoungFunction::parse("power p=0.5").is_err());
        assert!(YoungFunction::parse("bogus").is_err());
    }
}
