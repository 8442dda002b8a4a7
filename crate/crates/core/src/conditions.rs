//! Sampled checks of the conditions relating `Φ`, the Morrey shapes and the weight:
//! pointwise domination, the doubling shift, the tail integral conditions (with and
//! without the logarithmic factor), the supremal conditions and `𝒢`-class membership.
//!
//! Every check evaluates a quotient at sample points `(x, r)` and reports its sup
//! together with a verdict. A check fails when the quotient is infinite, exceeds
//! [`BLOWUP_THRESHOLD`], or keeps growing towards one end of the radius range.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{linspace, Ball, Grid};
use crate::norms::MorreyShape;
use crate::weights::{self, MassRule, Weight};
use crate::young::{self, TypeBound, YoungFunction};

pub const BLOWUP_THRESHOLD: f64 = 1e6;
/// Minimal growth of the per-radius sup over the last quarter of radii that counts as a trend.
pub const TREND_FACTOR: f64 = 1.1;
/// Tail integrals are truncated at `TRUNCATION * r`.
pub const TRUNCATION: f64 = 1e4;
/// Simpson intervals per integration segment.
const SEGMENT_STEPS: usize = 400;
/// Number of tail blocks `[U 2^{k-1}, U 2^k]` in `u = ln(t/r)`, `U = ln TRUNCATION`.
const TAIL_BLOCKS: u32 = 6;
/// A tail whose consecutive block integrals shrink slower than this is divergent.
const DIVERGENT_BLOCK_RATIO: f64 = 0.75;
/// Floor for the 𝒢-class infima.
pub const GCLASS_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub x: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition_name: String,
    #[serde(with = "crate::params::float_text")]
    pub sup_constant: f64,
    pub worst_point: SamplePoint,
    pub samples: usize,
    pub verdict: Verdict,
    pub detail: String,
}

impl ConditionReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    /// A report for a hypothesis that is not sampled over `(x, r)`.
    pub fn scalar(name: &str, holds: bool, constant: f64, detail: impl Into<String>) -> Self {
        ConditionReport {
            condition_name: name.to_string(),
            sup_constant: constant,
            worst_point: SamplePoint { x: 0.0, r: 0.0 },
            samples: 1,
            verdict: if holds { Verdict::Holds } else { Verdict::Fails },
            detail: detail.into(),
        }
    }
}

/// Sample points: every center paired with every radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
}

impl Default for SampleGrid {
    /// 16 centers in `[-4, 4]` and radii `2^k`, `k = -8..=6`.
    fn default() -> Self {
        SampleGrid {
            centers: linspace(-4.0, 4.0, 16),
            radii: (-8..=6).map(|k| 2f64.powi(k)).collect(),
        }
    }
}

impl SampleGrid {
    pub fn new(centers: Vec<f64>, mut radii: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || radii.is_empty() {
            return Err(Error::Empty("condition samples need centers and radii".into()));
        }
        if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidParameter("sample radii must be positive".into()));
        }
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        Ok(SampleGrid { centers, radii })
    }

    pub fn len(&self) -> usize {
        self.centers.len() * self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn points(&self) -> Vec<SamplePoint> {
        self.radii
            .iter()
            .flat_map(|&r| self.centers.iter().map(move |&x| SamplePoint { x, r }))
            .collect()
    }
}

fn growth(from: f64, to: f64) -> f64 {
    if to == 0.0 {
        1.0
    } else if from == 0.0 {
        f64::INFINITY
    } else {
        to / from
    }
}

/// Detects a per-radius sup that increases monotonically over the half of the radius
/// range next to one end and still grows by [`TREND_FACTOR`] over the last quarter.
fn trend(per_radius: &[f64]) -> Option<&'static str> {
    let n = per_radius.len();
    if n < 4 {
        return None;
    }
    let quarter = (n / 4).max(1);
    let half = n / 2;
    let toward_small = (0..half).all(|k| per_radius[k] >= per_radius[k + 1] * (1.0 - 1e-9));
    if toward_small && growth(per_radius[quarter], per_radius[0]) >= TREND_FACTOR {
        return Some("quotient keeps growing as r decreases");
    }
    let toward_large = (n - 1 - half..n - 1).all(|k| per_radius[k + 1] >= per_radius[k] * (1.0 - 1e-9));
    if toward_large && growth(per_radius[n - 1 - quarter], per_radius[n - 1]) >= TREND_FACTOR {
        return Some("quotient keeps growing as r increases");
    }
    None
}

/// Evaluates `quotient` at all samples and classifies the sup.
fn evaluate(
    name: &str,
    samples: &SampleGrid,
    quotient: impl Fn(SamplePoint) -> Result<f64> + Sync,
) -> Result<ConditionReport> {
    if samples.is_empty() {
        return Err(Error::Empty(format!("{name}: no samples")));
    }
    let points = samples.points();
    let values: Vec<f64> = points.par_iter().map(|&p| quotient(p)).collect::<Result<_>>()?;
    let mut worst = 0;
    for (k, v) in values.iter().enumerate() {
        if v.is_nan() || *v > values[worst] {
            worst = k;
            if v.is_nan() {
                break;
            }
        }
    }
    let sup_constant = values[worst];
    let nc = samples.centers.len();
    let per_radius: Vec<f64> = values.chunks(nc).map(|c| c.iter().copied().fold(0.0, f64::max)).collect();
    let (verdict, detail) = if !sup_constant.is_finite() {
        (Verdict::Fails, "quotient is infinite (divergent integral or unbounded sup)".to_string())
    } else if sup_constant > BLOWUP_THRESHOLD {
        (Verdict::Fails, format!("sup exceeds {BLOWUP_THRESHOLD:e}"))
    } else if let Some(t) = trend(&per_radius) {
        (Verdict::Fails, t.to_string())
    } else {
        (Verdict::Holds, String::new())
    };
    Ok(ConditionReport {
        condition_name: name.to_string(),
        sup_constant,
        worst_point: points[worst],
        samples: points.len(),
        verdict,
        detail,
    })
}

fn shape_at(shape: &MorreyShape, x: f64, r: f64) -> Result<f64> {
    shape.value(x, r, MassRule::Exact)
}

fn nonzero(v: f64, what: &str, p: SamplePoint) -> Result<f64> {
    if v == 0.0 {
        Err(Error::Degenerate(format!("{what} vanishes at x = {}, r = {}", p.x, p.r)))
    } else {
        Ok(v)
    }
}

/// `sup φ₁(x, r) / φ₂(x, r)`.
pub fn check_pointwise_domination(
    shape1: &MorreyShape,
    shape2: &MorreyShape,
    samples: &SampleGrid,
) -> Result<ConditionReport> {
    evaluate("condmnec", samples, |p| {
        let den = nonzero(shape_at(shape2, p.x, p.r)?, "phi2", p)?;
        Ok(shape_at(shape1, p.x, p.r)? / den)
    })
}

/// `sup φ₁(x, 2r) / φ₂(x, r)`.
pub fn check_doubling_shift(shape1: &MorreyShape, shape2: &MorreyShape, samples: &SampleGrid) -> Result<ConditionReport> {
    evaluate("es1", samples, |p| {
        let den = nonzero(shape_at(shape2, p.x, p.r)?, "phi2", p)?;
        Ok(shape_at(shape1, p.x, 2.0 * p.r)? / den)
    })
}

fn simpson(values: &[f64], step: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n % 2 == 0);
    let mut s = values[0] + values[n];
    for (k, v) in values.iter().enumerate().take(n).skip(1) {
        s += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * step / 3.0
}

/// Integration segments in `u = ln(t/r)`: `[0, U]` followed by the tail blocks.
fn segments() -> Vec<Vec<f64>> {
    let u0 = TRUNCATION.ln();
    let mut segs = vec![linspace(0.0, u0, SEGMENT_STEPS + 1)];
    for k in 1..=TAIL_BLOCKS {
        let a = u0 * 2f64.powi(k as i32 - 1);
        segs.push(linspace(a, 2.0 * a, SEGMENT_STEPS + 1));
    }
    segs
}

fn segment_step(seg: &[f64]) -> f64 {
    (seg[seg.len() - 1] - seg[0]) / (seg.len() - 1) as f64
}

/// Sum of the tail blocks plus a geometric extrapolation, or `None` when the blocks do
/// not shrink fast enough.
fn block_tail(blocks: &[f64]) -> Option<f64> {
    if blocks.iter().any(|b| !b.is_finite()) {
        return None;
    }
    let n = blocks.len();
    let total: f64 = blocks.iter().sum();
    let (prev, last) = (blocks[n - 2], blocks[n - 1]);
    if last == 0.0 {
        return Some(total);
    }
    let rho = last / prev;
    if !(rho < DIVERGENT_BLOCK_RATIO) {
        return None;
    }
    Some(total + last * rho / (1.0 - rho))
}

/// `∫_r^∞ φ₁(x, t) (1 + [log] ln(t/r)) dt/t`, `+inf` when divergent.
pub fn radial_integral(shape1: &MorreyShape, x: f64, r: f64, log_factor: bool) -> Result<f64> {
    let l = if log_factor { 1.0 } else { 0.0 };
    let segs = segments();
    let integrand = |u: f64| -> Result<f64> { Ok(shape_at(shape1, x, r * u.exp())? * (1.0 + l * u)) };
    let integrate_seg = |seg: &[f64]| -> Result<f64> {
        let vals: Vec<f64> = seg.iter().map(|&u| integrand(u)).collect::<Result<_>>()?;
        Ok(simpson(&vals, segment_step(seg)))
    };
    let main = integrate_seg(&segs[0])?;
    if !main.is_finite() {
        return Ok(f64::INFINITY);
    }
    let u0 = segs[0][segs[0].len() - 1];
    let tail = if let Some((c, beta)) = shape1.power_form() {
        if beta <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let e = c * r.powf(-beta) * (-beta * u0).exp();
        e / beta + l * e * (u0 / beta + 1.0 / (beta * beta))
    } else {
        let blocks: Vec<f64> = segs[1..].iter().map(|s| integrate_seg(s)).collect::<Result<_>>()?;
        match block_tail(&blocks) {
            Some(t) => t,
            None => return Ok(f64::INFINITY),
        }
    };
    Ok(main + tail)
}

/// `sup ∫_r^∞ φ₁(x,t) (1 + [log] ln(t/r)) dt/t / φ₂(x, r)`; named `wgtcondcom` with the
/// logarithmic factor and `wgtcond` without.
pub fn check_integral_condition(
    shape1: &MorreyShape,
    shape2: &MorreyShape,
    samples: &SampleGrid,
    log_factor: bool,
) -> Result<ConditionReport> {
    let name = if log_factor { "wgtcondcom" } else { "wgtcond" };
    evaluate(name, samples, |p| {
        let den = nonzero(shape_at(shape2, p.x, p.r)?, "phi2", p)?;
        Ok(radial_integral(shape1, p.x, p.r, log_factor)? / den)
    })
}

/// `φ₁(x, s) / Φ⁻¹(1/s)`.
fn orlicz_quotient(phi: &YoungFunction, shape1: &MorreyShape, x: f64, s: f64) -> Result<f64> {
    let inv = young::inverse(phi, 1.0 / s)?;
    if inv == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(shape_at(shape1, x, s)? / inv)
}

/// Suffix maxima: `out[k] = max_{j >= k} v[j]`.
fn suffix_max(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    for k in (0..out.len().saturating_sub(1)).rev() {
        out[k] = out[k].max(out[k + 1]);
    }
    out
}

fn supremal_value(phi: &YoungFunction, shape1: &MorreyShape, x: f64, r: f64, u_max: f64) -> Result<f64> {
    let n = (SEGMENT_STEPS as f64 * u_max / TRUNCATION.ln()).round() as usize;
    let us = linspace(0.0, u_max, n + 1);
    let q: Vec<f64> = us
        .iter()
        .map(|&u| orlicz_quotient(phi, shape1, x, r * u.exp()))
        .collect::<Result<_>>()?;
    let s = suffix_max(&q);
    let mut best = 0.0_f64;
    for (k, &u) in us.iter().enumerate() {
        let v = young::inverse(phi, (-u).exp() / r)? * s[k];
        best = best.max(v);
    }
    Ok(best)
}

/// `sup_{t > r} Φ⁻¹(1/t) ess sup_{s > t} φ₁(x,s)/Φ⁻¹(1/s)` against `φ₂(x, r)`; the inner
/// sup is taken up to `TRUNCATION * r` and declared unbounded when extending it to
/// `TRUNCATION² * r` raises the value by [`TREND_FACTOR`].
pub fn check_supremal_condition(
    phi: &YoungFunction,
    shape1: &MorreyShape,
    shape2: &MorreyShape,
    samples: &SampleGrid,
) -> Result<ConditionReport> {
    let u0 = TRUNCATION.ln();
    evaluate("supremal", samples, |p| {
        let den = nonzero(shape_at(shape2, p.x, p.r)?, "phi2", p)?;
        let near = supremal_value(phi, shape1, p.x, p.r, u0)?;
        let far = supremal_value(phi, shape1, p.x, p.r, 2.0 * u0)?;
        if growth(near, far) >= TREND_FACTOR {
            return Ok(f64::INFINITY);
        }
        Ok(near / den)
    })
}

/// `∫_r^∞ (ess sup_{s > t} φ₁(x,s)/Φ⁻¹(1/s)) Φ⁻¹(1/t) dt/t` against `φ₂(x, r)`.
pub fn check_integral_condition_orlicz(
    phi: &YoungFunction,
    shape1: &MorreyShape,
    shape2: &MorreyShape,
    samples: &SampleGrid,
) -> Result<ConditionReport> {
    let segs = segments();
    evaluate("integral-orlicz", samples, |p| {
        let den = nonzero(shape_at(shape2, p.x, p.r)?, "phi2", p)?;
        let q: Vec<Vec<f64>> = segs
            .iter()
            .map(|seg| {
                seg.iter()
                    .map(|&u| orlicz_quotient(phi, shape1, p.x, p.r * u.exp()))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let head = q[0].iter().copied().fold(0.0, f64::max);
        let next = q[1].iter().copied().fold(0.0, f64::max);
        if growth(head, next) >= TREND_FACTOR {
            return Ok(f64::INFINITY);
        }
        let flat: Vec<f64> = q.concat();
        let sup = suffix_max(&flat);
        let mut offset = 0;
        let mut parts = Vec::with_capacity(segs.len());
        for seg in &segs {
            let vals: Vec<f64> = seg
                .iter()
                .enumerate()
                .map(|(k, &u)| Ok(sup[offset + k] * young::inverse(phi, (-u).exp() / p.r)?))
                .collect::<Result<_>>()?;
            parts.push(simpson(&vals, segment_step(seg)));
            offset += seg.len();
        }
        match block_tail(&parts[1..]) {
            Some(tail) => Ok((parts[0] + tail) / den),
            None => Ok(f64::INFINITY),
        }
    })
}

/// `𝒢`-class membership: at each reference ball `B₀ = B(x, r₀)` the infima over sampled
/// radii `r <= r₀` of `φ(B)/φ(B₀)` and over `r >= r₀` of `ψ(B)/ψ(B₀)`,
/// `ψ(B) = φ(B)/Φ⁻¹(w(B)⁻¹)`; the reported constant is `1/min` of the two.
pub fn check_g_class(shape: &MorreyShape, phi: &YoungFunction, w: &Weight, samples: &SampleGrid) -> Result<ConditionReport> {
    let psi = |x: f64, r: f64| -> Result<f64> {
        let m = weights::ball_mass(w, &Ball { center: x, radius: r }, MassRule::Exact)?;
        Ok(shape_at(shape, x, r)? / young::inverse(phi, 1.0 / m)?)
    };
    let radii = &samples.radii;
    let mut report = evaluate("gclass", samples, |p| {
        let phi0 = nonzero(shape_at(shape, p.x, p.r)?, "phi", p)?;
        let psi0 = nonzero(psi(p.x, p.r)?, "phi/inverse", p)?;
        let mut inf = f64::INFINITY;
        for &r in radii {
            if r <= p.r {
                inf = inf.min(shape_at(shape, p.x, r)? / phi0);
            }
            if r >= p.r {
                inf = inf.min(psi(p.x, r)? / psi0);
            }
        }
        Ok(1.0 / inf)
    })?;
    if report.holds() && report.sup_constant > 1.0 / GCLASS_FLOOR {
        report.verdict = Verdict::Fails;
        report.detail = format!("infimum below {GCLASS_FLOOR:e}");
    }
    Ok(report)
}

/// Muckenhoupt `A_p` estimate as a hypothesis report, with closed-form masses when the
/// weight and its dual power have them and grid quadrature otherwise.
pub fn ap_report(w: &Weight, p: f64, grid: &Grid) -> Result<ConditionReport> {
    let balls = weights::default_ap_balls(grid);
    let name = format!("A_{p}");
    let rep = match weights::estimate_ap(w, p, &balls, MassRule::Exact) {
        Ok(r) => r,
        Err(Error::NoClosedForm(_)) => weights::estimate_ap(w, p, &balls, MassRule::Quadrature(*grid))?,
        Err(e) => return Err(e),
    };
    let holds = rep.constant.is_finite() && rep.constant <= BLOWUP_THRESHOLD;
    Ok(ConditionReport {
        condition_name: name,
        sup_constant: rep.constant,
        worst_point: SamplePoint {
            x: rep.worst_ball.center,
            r: rep.worst_ball.radius,
        },
        samples: rep.balls_tested,
        verdict: if holds { Verdict::Holds } else { Verdict::Fails },
        detail: if holds { String::new() } else { format!("{} is not in A_{p}", w.label()) },
    })
}

pub fn delta2_report(phi: &YoungFunction) -> ConditionReport {
    let r = young::check_delta2(phi);
    ConditionReport::scalar("delta2", r.holds, r.constant, if r.holds { "" } else { "Phi(2r)/Phi(r) is unbounded" })
}

pub fn nabla2_report(phi: &YoungFunction) -> ConditionReport {
    let r = young::check_nabla2(phi);
    ConditionReport::scalar(
        "nabla2",
        r.holds,
        r.witness_k.unwrap_or(f64::INFINITY),
        if r.holds { "" } else { "no k with Phi(r) <= Phi(kr)/(2k)" },
    )
}

pub fn type_report(phi: &YoungFunction, p: f64, which: TypeBound) -> Result<ConditionReport> {
    let r = young::check_type(phi, p, which)?;
    let name = match which {
        TypeBound::Lower => format!("lower-type-{p}"),
        TypeBound::Upper => format!("upper-type-{p}"),
    };
    Ok(ConditionReport::scalar(&name, r.holds, r.constant, ""))
}
