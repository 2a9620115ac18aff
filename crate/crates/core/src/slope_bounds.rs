//! Empirical checks of slope and growth inequalities: Łojasiewicz ratios near
//! a zero, Hölderian error bounds against exact univariate sublevel sets,
//! goodness at infinity and coercivity.
//!
//! Everything here that samples only corroborates an existence claim; a
//! positive minimum ratio is evidence, not proof.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::loja_exponent;
use crate::error::{CspError, Result};
use crate::poly::Instance;
use crate::selections::{serialize_biguint, Location, Selection, UnivariateSelection};
use crate::subdifferential::slope;
use crate::univariate::{
    rat, rat_to_f64, rational_between, real_roots_rat, RatPoly, RealRoot, RootRange,
};

pub const DEFAULT_SAMPLES: usize = 200;
/// Values at or below this magnitude are skipped in ratio computations.
pub const ZERO_VALUE: f64 = 1e-14;
/// Minimum slope that counts as bounded away from zero at infinity.
pub const INFINITY_THRESHOLD: f64 = 1e-8;

/// `0.5 * 2^-k` for `k = 0..=6`.
pub fn default_loja_radii() -> Vec<f64> {
    (0..7).map(|k| 0.5 * 0.5f64.powi(k)).collect()
}

/// `2^k` for `k = 0..=10`.
pub fn default_infinity_radii() -> Vec<f64> {
    (0..11).map(|k| 2f64.powi(k)).collect()
}

fn rng_for(seed: u64, stream: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![if rng.random::<bool>() { 1.0 } else { -1.0 }];
    }
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform sample in the ball of radius `radius` around `center`.
fn ball_sample(rng: &mut ChaCha8Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let n = center.len();
    let dir = unit_direction(rng, n);
    let t = radius * rng.random::<f64>().powf(1.0 / n as f64);
    center.iter().zip(dir).map(|(c, u)| c + t * u).collect()
}

fn value_and_slope(
    instance: &Instance,
    selection: &Selection,
    x: &[f64],
    tol_active: f64,
) -> Result<(f64, f64)> {
    let (v, active) = selection.value_and_active(instance, x, tol_active)?;
    Ok((v, slope(instance, &active, x)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LojaVerdict {
    PositiveBoundedBelow,
    Violated,
    /// Some radius produced no sample with a nonzero value.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LojaOptions {
    pub radii: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub tol_active: f64,
    /// Overrides `1 - 1/L(n, d, r)`.
    pub exponent: Option<f64>,
}

impl Default for LojaOptions {
    fn default() -> Self {
        LojaOptions {
            radii: default_loja_radii(),
            samples: DEFAULT_SAMPLES,
            seed: 0,
            tol_active: 1e-7,
            exponent: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LojaRow {
    pub radius: f64,
    pub used: usize,
    pub min_ratio: Option<f64>,
    /// Sample attaining the minimum.
    pub argmin: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LojaReport {
    pub center: Vec<f64>,
    #[serde(serialize_with = "serialize_biguint")]
    pub l: BigUint,
    pub exponent_used: f64,
    pub rows: Vec<LojaRow>,
    pub min_ratio: Option<f64>,
    /// Log-log regression slope of the slope against `|f|` over all samples.
    pub empirical_exponent: Option<f64>,
    pub verdict: LojaVerdict,
    pub note: &'static str,
}

fn check_radii_decreasing(radii: &[f64]) -> Result<()> {
    let ok = !radii.is_empty()
        && radii.iter().all(|r| r.is_finite() && *r > 0.0)
        && radii.windows(2).all(|w| w[0] > w[1]);
    if ok {
        Ok(())
    } else {
        Err(CspError::Precondition(
            "radii must be positive and strictly decreasing".into(),
        ))
    }
}

/// Samples `slope(x) / |f(x)|^theta` in shrinking balls around a zero of the
/// selection.
pub fn verify_loja(
    instance: &Instance,
    selection: &Selection,
    center: &[f64],
    opts: &LojaOptions,
) -> Result<LojaReport> {
    check_radii_decreasing(&opts.radii)?;
    let n = instance.n();
    if center.len() != n {
        return Err(CspError::DimensionMismatch {
            expected: n,
            got: center.len(),
        });
    }
    let f0 = selection.value(instance, center)?;
    if f0.abs() > opts.tol_active {
        return Err(CspError::Precondition(format!(
            "selection value {f0} at the center is not zero"
        )));
    }
    let l = loja_exponent(n, instance.d(), instance.r())?;
    let theta = opts
        .exponent
        .unwrap_or_else(|| 1.0 - 1.0 / l.to_f64().unwrap_or(f64::INFINITY));

    type Sample = (Vec<f64>, f64, f64);
    let per_radius: Vec<Result<Vec<Sample>>> = opts
        .radii
        .par_iter()
        .enumerate()
        .map(|(k, &radius)| {
            let mut rng = rng_for(opts.seed, k);
            let mut out = Vec::with_capacity(opts.samples);
            for _ in 0..opts.samples {
                let x = ball_sample(&mut rng, center, radius);
                let (v, m) = value_and_slope(instance, selection, &x, opts.tol_active)?;
                if v.abs() > ZERO_VALUE {
                    out.push((x, v.abs(), m));
                }
            }
            Ok(out)
        })
        .collect();

    let mut rows = Vec::new();
    let mut logs = Vec::new();
    for (k, samples) in per_radius.into_iter().enumerate() {
        let samples = samples?;
        let mut best: Option<(f64, Vec<f64>)> = None;
        for (x, fv, m) in &samples {
            let ratio = m / fv.powf(theta);
            if best.as_ref().is_none_or(|(b, _)| ratio < *b) {
                best = Some((ratio, x.clone()));
            }
            if *m > 0.0 {
                logs.push((fv.ln(), m.ln()));
            }
        }
        rows.push(LojaRow {
            radius: opts.radii[k],
            used: samples.len(),
            min_ratio: best.as_ref().map(|b| b.0),
            argmin: best.map(|b| b.1),
        });
    }
    let min_ratio = rows
        .iter()
        .filter_map(|r| r.min_ratio)
        .min_by(f64::total_cmp);
    let verdict = if rows.iter().any(|r| r.min_ratio.is_none()) {
        LojaVerdict::Inconclusive
    } else if rows.iter().all(|r| r.min_ratio.is_some_and(|m| m > 0.0)) {
        LojaVerdict::PositiveBoundedBelow
    } else {
        LojaVerdict::Violated
    };
    Ok(LojaReport {
        center: center.to_vec(),
        l,
        exponent_used: theta,
        rows,
        min_ratio,
        empirical_exponent: regression_slope(&logs),
        verdict,
        note: "sampling only: a positive minimum corroborates but does not prove the inequality",
    })
}

fn regression_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// One closed interval of a sublevel set; `None` ends are infinite.
#[derive(Clone, Debug, Serialize)]
pub struct Interval1D {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    #[serde(skip)]
    lo_exact: Option<RealRoot>,
    #[serde(skip)]
    hi_exact: Option<RealRoot>,
}

impl Interval1D {
    pub fn lo_exact(&self) -> Option<&RealRoot> {
        self.lo_exact.as_ref()
    }

    pub fn hi_exact(&self) -> Option<&RealRoot> {
        self.hi_exact.as_ref()
    }

    fn contains_rat(&self, x: &BigRational) -> bool {
        let above = self
            .lo_exact
            .as_ref()
            .is_none_or(|lo| lo.cmp_rational(x) != Ordering::Greater);
        let below = self
            .hi_exact
            .as_ref()
            .is_none_or(|hi| hi.cmp_rational(x) != Ordering::Less);
        above && below
    }
}

/// `{x : f(x) <= 0}` for a univariate selection, sorted and disjoint.
#[derive(Clone, Debug, Serialize)]
pub struct SublevelSet1D {
    pub intervals: Vec<Interval1D>,
}

impl SublevelSet1D {
    /// Exact membership.
    pub fn contains(&self, x: f64) -> Result<bool> {
        let xr = rat(x)?;
        Ok(self.intervals.iter().any(|iv| iv.contains_rat(&xr)))
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

pub fn sublevel_set_1d(sel: &UnivariateSelection) -> Result<SublevelSet1D> {
    let dec = sel.decomposition();
    let exact = dec.exact_polys();
    let labels = sel.labels();

    // points in increasing order, each with the interval index of the gap
    // that follows it and the sign of the selection there
    let mut points: Vec<(RealRoot, usize, i8)> = Vec::new();
    let mut piece_roots: Vec<Option<Vec<RealRoot>>> = vec![None; exact.len()];
    for k in 0..dec.num_intervals() {
        let label = labels[k];
        if piece_roots[label].is_none() {
            let roots = if exact[label].is_zero() {
                Vec::new()
            } else {
                real_roots_rat(&exact[label], RootRange::Line)?.roots
            };
            piece_roots[label] = Some(roots);
        }
        for t in piece_roots[label].as_ref().expect("filled above") {
            if dec.locate_root(t) == Location::Interval(k) {
                points.push((t.clone(), k, 0));
            }
        }
        if k < dec.breakpoints.len() {
            let bp = dec.breakpoints[k].root.clone();
            let s = bp.sign_of(&exact[label]);
            points.push((bp, k + 1, s));
        }
    }

    // gap signs: gap 0 precedes the first point, gap i + 1 follows point i
    let gap_sign = |g: usize| -> i8 {
        let (q, k) = if points.is_empty() {
            (BigRational::zero(), 0)
        } else if g == 0 {
            (points[0].0.lo() - BigRational::one(), 0)
        } else if g == points.len() {
            let last = &points[g - 1];
            (last.0.hi() + BigRational::one(), last.1)
        } else {
            (
                rational_between(&points[g - 1].0, &points[g].0),
                points[g - 1].1,
            )
        };
        exact[labels[k]].sign_at(&q)
    };

    // alternate gap, point, gap, ... and collect maximal runs inside S
    let m = points.len();
    let mut intervals = Vec::new();
    let mut open: Option<Option<RealRoot>> = None;
    let mut last_point: Option<RealRoot> = None;
    for step in 0..(2 * m + 1) {
        let (inside, at) = if step % 2 == 0 {
            (gap_sign(step / 2) <= 0, None)
        } else {
            let p = &points[step / 2];
            (p.2 <= 0, Some(p.0.clone()))
        };
        if inside {
            if open.is_none() {
                open = Some(at.clone());
            }
            if let Some(t) = at {
                last_point = Some(t);
            }
        } else if let Some(lo) = open.take() {
            intervals.push(make_interval(lo, last_point.take()));
        }
    }
    if let Some(lo) = open.take() {
        intervals.push(make_interval(lo, None));
    }
    Ok(SublevelSet1D { intervals })
}

fn make_interval(lo: Option<RealRoot>, hi: Option<RealRoot>) -> Interval1D {
    Interval1D {
        lo: lo.as_ref().map(RealRoot::approx),
        hi: hi.as_ref().map(RealRoot::approx),
        lo_exact: lo,
        hi_exact: hi,
    }
}

/// Distance from `x` to the sublevel set.
pub fn dist_to_s(x: f64, s: &SublevelSet1D) -> Result<f64> {
    if s.is_empty() {
        return Err(CspError::EmptySublevelSet);
    }
    if s.contains(x)? {
        return Ok(0.0);
    }
    Ok(s.intervals
        .iter()
        .flat_map(|iv| [iv.lo, iv.hi])
        .flatten()
        .map(|e| (x - e).abs())
        .fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorBoundForm {
    /// `[f]_+^alpha / dist(x, S)`
    Local,
    /// `([f]_+^alpha + [f]_+) / dist(x, S)`
    Global,
}

/// Integer-indexed grid `lo + k * step`, `k = 0..=steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid1D {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid1D {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.hi >= self.lo && self.lo.is_finite() && self.hi.is_finite()) {
            return Err(CspError::Precondition(
                "grid needs lo <= hi and step > 0".into(),
            ));
        }
        let steps = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        Ok((0..=steps)
            .map(|k| self.lo + k as f64 * self.step)
            .collect())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorBoundReport {
    pub grid: Grid1D,
    pub form: ErrorBoundForm,
    pub alpha: f64,
    pub sublevel_set: SublevelSet1D,
    pub points_outside: usize,
    pub min_ratio: Option<f64>,
    pub argmin: Option<f64>,
    /// Estimate of the constant: the minimum ratio.
    pub c_estimate: Option<f64>,
    pub positive: bool,
}

/// Minimum of the error-bound ratio over grid points outside `S`. `alpha`
/// defaults to `1/L(n, d, r)`.
pub fn error_bound_check(
    instance: &Instance,
    selection: &Selection,
    alpha: Option<f64>,
    grid: Grid1D,
    form: ErrorBoundForm,
) -> Result<ErrorBoundReport> {
    let sel = selection
        .as_univariate()
        .ok_or(CspError::NotUnivariate(instance.n()))?;
    let s = sublevel_set_1d(sel)?;
    if s.is_empty() {
        return Err(CspError::EmptySublevelSet);
    }
    let alpha = match alpha {
        Some(a) => a,
        None => {
            let l = loja_exponent(instance.n(), instance.d(), instance.r())?;
            1.0 / l.to_f64().unwrap_or(f64::INFINITY)
        }
    };
    let mut outside = 0;
    let mut best: Option<(f64, f64)> = None;
    for x in grid.points()? {
        let d = dist_to_s(x, &s)?;
        if d <= 0.0 {
            continue;
        }
        outside += 1;
        let fp = sel.value(instance, x)?.max(0.0);
        let num = match form {
            ErrorBoundForm::Local => fp.powf(alpha),
            ErrorBoundForm::Global => fp.powf(alpha) + fp,
        };
        let ratio = num / d;
        if best.is_none_or(|(b, _)| ratio < b) {
            best = Some((ratio, x));
        }
    }
    Ok(ErrorBoundReport {
        grid,
        form,
        alpha,
        sublevel_set: s,
        points_outside: outside,
        min_ratio: best.map(|b| b.0),
        argmin: best.map(|b| b.1),
        c_estimate: best.map(|b| b.0),
        positive: best.is_some_and(|b| b.0 > 0.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfinityRow {
    pub radius: f64,
    pub min_slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfinityReport {
    pub rows: Vec<InfinityRow>,
    pub c_est: Option<f64>,
    pub r_est: Option<f64>,
    pub good_at_infinity: bool,
    pub note: &'static str,
}

/// Minimum sampled slope on the shells `radius <= |x| <= 2 radius`.
pub fn goodness_at_infinity(
    instance: &Instance,
    selection: &Selection,
    radii: &[f64],
    samples: usize,
    seed: u64,
    tol_active: f64,
) -> Result<InfinityReport> {
    let ok = !radii.is_empty()
        && radii.iter().all(|r| r.is_finite() && *r > 0.0)
        && radii.windows(2).all(|w| w[0] < w[1]);
    if !ok || samples == 0 {
        return Err(CspError::Precondition(
            "radii must be positive and strictly increasing, with samples > 0".into(),
        ));
    }
    let n = instance.n();
    let mins: Vec<Result<f64>> = radii
        .par_iter()
        .enumerate()
        .map(|(k, &radius)| {
            let mut rng = rng_for(seed, k);
            let mut min = f64::INFINITY;
            for _ in 0..samples {
                let dir = unit_direction(&mut rng, n);
                let t = radius * (1.0 + rng.random::<f64>());
                let x: Vec<f64> = dir.iter().map(|u| t * u).collect();
                let (_, m) = value_and_slope(instance, selection, &x, tol_active)?;
                min = min.min(m);
            }
            Ok(min)
        })
        .collect();
    let rows: Vec<InfinityRow> = radii
        .iter()
        .zip(mins)
        .map(|(&radius, m)| m.map(|min_slope| InfinityRow { radius, min_slope }))
        .collect::<Result<_>>()?;
    // first radius from which every minimum stays above the threshold
    let start = (0..rows.len())
        .rev()
        .take_while(|&k| rows[k].min_slope > INFINITY_THRESHOLD)
        .last();
    let (c_est, r_est) = match start {
        Some(k) => (
            rows[k..].iter().map(|r| r.min_slope).min_by(f64::total_cmp),
            Some(rows[k].radius),
        ),
        None => (None, None),
    };
    Ok(InfinityReport {
        good_at_infinity: start.is_some(),
        rows,
        c_est,
        r_est,
        note: "sampling only",
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoercivityMethod {
    #[serde(rename = "exact-1d")]
    Exact1d,
    Empirical,
}

/// Behaviour of a univariate polynomial at one end of the line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Limit {
    PlusInfinity,
    MinusInfinity,
    Finite(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoercivityVerdict {
    pub bounded_below: bool,
    pub coercive: bool,
    /// `f(x) >= c_tilde |x|` whenever `|x| >= r_tilde`.
    pub c_tilde: Option<f64>,
    pub r_tilde: Option<f64>,
    pub method: CoercivityMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limits: Option<[Limit; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRow>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub radius: f64,
    pub min_value: f64,
}

/// Exact for univariate selections, an empirical radial sweep otherwise.
pub fn coercivity_check(
    instance: &Instance,
    selection: &Selection,
    seed: u64,
) -> Result<CoercivityVerdict> {
    match selection.as_univariate() {
        Some(sel) => coercivity_exact_1d(sel),
        None => coercivity_sweep(instance, selection, seed),
    }
}

fn limit_at(p: &RatPoly, plus: bool) -> Limit {
    match p.degree() {
        None => Limit::Finite(0.0),
        Some(0) => Limit::Finite(rat_to_f64(&p.coeffs()[0])),
        Some(deg) => {
            let lc = p.leading().expect("nonzero").is_positive();
            let up = if plus || deg % 2 == 0 { lc } else { !lc };
            if up {
                Limit::PlusInfinity
            } else {
                Limit::MinusInfinity
            }
        }
    }
}

/// Limits of the two unbounded pieces decide; witnesses come from the real
/// roots of `p(x) -/+ c x` beyond the last breakpoint.
pub fn coercivity_exact_1d(sel: &UnivariateSelection) -> Result<CoercivityVerdict> {
    let dec = sel.decomposition();
    let exact = dec.exact_polys();
    let left = &exact[sel.labels()[0]];
    let right = &exact[*sel.labels().last().expect("at least one interval")];
    let limits = [limit_at(left, false), limit_at(right, true)];
    let bounded_below = limits.iter().all(|l| *l != Limit::MinusInfinity);
    let coercive = limits.iter().all(|l| *l == Limit::PlusInfinity);
    let (mut c_tilde, mut r_tilde) = (None, None);
    if coercive {
        let rate = |p: &RatPoly| -> BigRational {
            if p.degree() == Some(1) {
                p.leading().expect("nonzero").abs() / BigRational::from_integer(2.into())
            } else {
                BigRational::one()
            }
        };
        let c = rate(left).min(rate(right));
        let x = RatPoly::new(vec![BigRational::zero(), BigRational::one()]);
        // right: p(x) - c x > 0; left: p(x) + c x > 0
        let q_right = right.sub(&x.scale(&c));
        let q_left = left.add(&x.scale(&c));
        let mut bound = BigRational::one();
        if let Some(t) = real_roots_rat(&q_right, RootRange::Line)?.roots.last() {
            bound = bound.max(t.hi().abs());
        }
        if let Some(t) = real_roots_rat(&q_left, RootRange::Line)?.roots.first() {
            bound = bound.max(t.lo().abs());
        }
        if let Some(bp) = dec.breakpoints.first() {
            bound = bound.max(bp.root.lo().abs());
        }
        if let Some(bp) = dec.breakpoints.last() {
            bound = bound.max(bp.root.hi().abs());
        }
        c_tilde = Some(rat_to_f64(&c));
        r_tilde = Some(rat_to_f64(&bound).ceil() + 1.0);
    }
    Ok(CoercivityVerdict {
        bounded_below,
        coercive,
        c_tilde,
        r_tilde,
        method: CoercivityMethod::Exact1d,
        limits: Some(limits),
        sweep: None,
    })
}

/// Radii `10^(k/4)` for `k = 0..=12`.
pub fn sweep_radii() -> Vec<f64> {
    (0..=12).map(|k| 10f64.powf(k as f64 / 4.0)).collect()
}

const SWEEP_DIRECTIONS: usize = 64;

/// Minimum value over sampled directions at growing radii. Bounded below
/// unless the minimum falls strictly over the last three radii to a
/// negative value; coercive if it rises strictly to a positive value.
pub fn coercivity_sweep(
    instance: &Instance,
    selection: &Selection,
    seed: u64,
) -> Result<CoercivityVerdict> {
    let n = instance.n();
    let dirs: Vec<Vec<f64>> = if n == 1 {
        vec![vec![-1.0], vec![1.0]]
    } else {
        let mut rng = rng_for(seed, 0);
        let mut d: Vec<Vec<f64>> = (0..n)
            .flat_map(|i| {
                [1.0, -1.0].map(|s| {
                    let mut e = vec![0.0; n];
                    e[i] = s;
                    e
                })
            })
            .collect();
        d.extend((0..SWEEP_DIRECTIONS).map(|_| unit_direction(&mut rng, n)));
        d
    };
    let mut rows = Vec::new();
    for radius in sweep_radii() {
        let mut min = f64::INFINITY;
        for u in &dirs {
            let x: Vec<f64> = u.iter().map(|c| radius * c).collect();
            min = min.min(selection.value(instance, &x)?);
        }
        rows.push(SweepRow {
            radius,
            min_value: min,
        });
    }
    let k = rows.len();
    let tail = [&rows[k - 3], &rows[k - 2], &rows[k - 1]];
    let falling = tail[0].min_value > tail[1].min_value && tail[1].min_value > tail[2].min_value;
    let rising = tail[0].min_value < tail[1].min_value && tail[1].min_value < tail[2].min_value;
    let coercive = rising && tail[2].min_value > 0.0;
    let bounded_below = coercive || !(falling && tail[2].min_value < 0.0);
    let (c_tilde, r_tilde) = if coercive {
        let from = (0..k)
            .rev()
            .take_while(|&j| rows[j].min_value > 0.0)
            .last()
            .expect("last row is positive");
        let c = rows[from..]
            .iter()
            .map(|r| r.min_value / r.radius)
            .fold(f64::INFINITY, f64::min);
        (Some(c), Some(rows[from].radius))
    } else {
        (None, None)
    };
    Ok(CoercivityVerdict {
        bounded_below,
        coercive,
        c_tilde,
        r_tilde,
        method: CoercivityMethod::Empirical,
        limits: None,
        sweep: Some(rows),
    })
}
