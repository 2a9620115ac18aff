//! Critical points of all continuous selections.
//!
//! A point is critical for some selection exactly when, for its full active
//! set `J = {j_1, ..., j_s}`, there are `lambda` with
//!
//! ```text
//! sum_k lambda_k^2 grad f_{j_k}(x) = 0
//! f_{j_k}(x) - f_{j_1}(x) = 0          k = 2..s
//! sum_k lambda_k^2 = 1
//! f_i(x) - f_{j_1}(x) != 0             i not in J
//! ```
//!
//! The catalog is the union of the solution sets over all nonempty `J`. In one
//! variable every stratum is solved exactly (common roots via gcds, guards and
//! multiplier feasibility by exact sign evaluation). In higher dimension the
//! square system is attacked by damped Newton from a seed grid; that path is
//! best effort and does not certify completeness.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::bound_b0;
use crate::error::{CspError, Result};
use crate::poly::{Instance, Polynomial};
use crate::selections::{self, active_set, ActiveSet, Location, UnivariateSelection};
use crate::subdifferential::{min_norm_point, DEFAULT_OPT_TOL};
use crate::univariate::{real_roots_rat, RatPoly, RealRoot, RootRange};

/// Multipliers at or above this count as strictly positive.
pub const STRICT_TOL: f64 = 1e-8;
/// Relative singular-value threshold for affine independence.
pub const AFFINE_TOL: f64 = 1e-9;
/// Relative rank threshold for null spaces and nonsingularity.
pub const RANK_TOL: f64 = 1e-10;
/// Largest family for which all `2^r - 1` active sets are visited.
pub const MAX_SUBSET_R: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Seed points per axis of the Newton start grid.
    pub seed_grid: usize,
    /// Half-width of the start grid box.
    pub search_box: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub dedupe_radius: f64,
    pub tol_active: f64,
    /// Seed for the random multiplier starts.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed_grid: 21,
            search_box: 8.0,
            newton_tol: 1e-11,
            max_iter: 100,
            dedupe_radius: 1e-6,
            tol_active: 1e-7,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.seed_grid > 0
            && self.search_box > 0.0
            && self.newton_tol > 0.0
            && self.max_iter > 0
            && self.dedupe_radius > 0.0
            && self.tol_active > 0.0;
        if ok {
            Ok(())
        } else {
            Err(CspError::Precondition(
                "solver settings must be positive".into(),
            ))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalType {
    Min,
    Max,
    Saddle,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalPoint {
    pub x: Vec<f64>,
    /// Full active set at `x`.
    pub active: ActiveSet,
    /// Convex multipliers over `active`, in index order.
    pub mu: Vec<f64>,
    pub value: f64,
    pub residual: f64,
    pub strict_complementarity: bool,
    pub affine_independent: bool,
    pub second_order_nondegenerate: bool,
    pub local_type: LocalType,
    /// Exact location for univariate instances.
    #[serde(skip)]
    pub exact: Option<RealRoot>,
}

/// The square system for one active set, with precomputed derivatives.
#[derive(Clone, Debug)]
pub struct CriticalSystem {
    n: usize,
    active: ActiveSet,
    pieces: Vec<Polynomial>,
    partials: Vec<Vec<Polynomial>>,
    second: Vec<Vec<Vec<Polynomial>>>,
    coincidence: Vec<Polynomial>,
    guards: Vec<(usize, Polynomial)>,
}

pub fn build_system(instance: &Instance, active: &ActiveSet) -> CriticalSystem {
    let n = instance.n();
    let pieces: Vec<Polynomial> = active
        .indices()
        .iter()
        .map(|&i| instance.poly(i).clone())
        .collect();
    let partials: Vec<Vec<Polynomial>> = pieces
        .iter()
        .map(|p| (0..n).map(|m| p.partial(m)).collect())
        .collect();
    let second = partials
        .iter()
        .map(|row| {
            row.iter()
                .map(|dm| (0..n).map(|l| dm.partial(l)).collect())
                .collect()
        })
        .collect();
    let coincidence = pieces.iter().skip(1).map(|p| p - &pieces[0]).collect();
    let guards = (0..instance.r())
        .filter(|i| !active.contains(*i))
        .map(|i| (i, instance.poly(i) - &pieces[0]))
        .collect();
    CriticalSystem {
        n,
        active: active.clone(),
        pieces,
        partials,
        second,
        coincidence,
        guards,
    }
}

impl CriticalSystem {
    pub fn active(&self) -> &ActiveSet {
        &self.active
    }

    /// Number of unknowns `n + s`, equal to the number of equations.
    pub fn size(&self) -> usize {
        self.n + self.pieces.len()
    }

    /// `f_{j_k} - f_{j_1}` for `k = 2..s`.
    pub fn coincidence_equations(&self) -> &[Polynomial] {
        &self.coincidence
    }

    /// `(i, f_i - f_{j_1})` for every `i` outside the active set.
    pub fn guards(&self) -> &[(usize, Polynomial)] {
        &self.guards
    }

    /// `d f_{j_k} / d x_m`.
    pub fn partial(&self, k: usize, m: usize) -> &Polynomial {
        &self.partials[k][m]
    }

    /// Residual at `z = (x, lambda)`.
    pub fn residual(&self, z: &[f64]) -> Vec<f64> {
        let (x, lambda) = z.split_at(self.n);
        let mut out = vec![0.0; self.size()];
        for (k, lk) in lambda.iter().enumerate() {
            let w = lk * lk;
            for m in 0..self.n {
                out[m] += w * self.partials[k][m].eval_unchecked(x);
            }
        }
        for (k, c) in self.coincidence.iter().enumerate() {
            out[self.n + k] = c.eval_unchecked(x);
        }
        out[self.size() - 1] = lambda.iter().map(|l| l * l).sum::<f64>() - 1.0;
        out
    }

    pub fn jacobian(&self, z: &[f64]) -> DMatrix<f64> {
        let (x, lambda) = z.split_at(self.n);
        let size = self.size();
        let mut jac = DMatrix::zeros(size, size);
        for (k, lk) in lambda.iter().enumerate() {
            let w = lk * lk;
            for m in 0..self.n {
                for l in 0..self.n {
                    jac[(m, l)] += w * self.second[k][m][l].eval_unchecked(x);
                }
                jac[(m, self.n + k)] = 2.0 * lk * self.partials[k][m].eval_unchecked(x);
            }
            jac[(size - 1, self.n + k)] = 2.0 * lk;
        }
        for (k, c) in self.coincidence.iter().enumerate() {
            for l in 0..self.n {
                jac[(self.n + k, l)] = c.partial(l).eval_unchecked(x);
            }
        }
        jac
    }

    /// Magnitude used to make residual tolerances scale-aware.
    fn scale(&self, x: &[f64]) -> f64 {
        let mut s: f64 = 1.0;
        for (k, p) in self.pieces.iter().enumerate() {
            s = s.max(p.eval_unchecked(x).abs());
            for m in 0..self.n {
                s = s.max(self.partials[k][m].eval_unchecked(x).abs());
            }
        }
        s
    }

    fn guards_hold(&self, x: &[f64], tol: f64) -> bool {
        self.guards
            .iter()
            .all(|(_, g)| g.eval_unchecked(x).abs() > tol)
    }
}

impl fmt::Display for CriticalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j = self.active.indices();
        for m in 0..self.n {
            let terms: Vec<String> = (0..j.len())
                .map(|k| format!("l{}^2*({})", j[k] + 1, self.partials[k][m]))
                .collect();
            writeln!(f, "{} = 0", terms.join(" + "))?;
        }
        for c in &self.coincidence {
            writeln!(f, "{c} = 0")?;
        }
        let norm: Vec<String> = j.iter().map(|i| format!("l{}^2", i + 1)).collect();
        writeln!(f, "{} = 1", norm.join(" + "))?;
        for (_, g) in &self.guards {
            writeln!(f, "{g} != 0")?;
        }
        Ok(())
    }
}

/// Solutions for one active set.
#[derive(Clone, Debug, Default)]
pub struct Solved {
    pub points: Vec<CriticalPoint>,
    pub non_isolated_suspected: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ActiveSetCount {
    pub active: ActiveSet,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalCatalog {
    pub method: &'static str,
    pub points: Vec<CriticalPoint>,
    pub per_active_set: Vec<ActiveSetCount>,
    #[serde(serialize_with = "selections::serialize_biguint")]
    pub bound_b0: BigUint,
    pub within_bound: bool,
    pub non_isolated_suspected: bool,
    pub notes: Vec<String>,
}

fn exact_polys(instance: &Instance) -> Result<Vec<RatPoly>> {
    instance.polys().iter().map(RatPoly::from_poly).collect()
}

/// Exact solve of one stratum for a univariate family.
pub fn solve_1d(instance: &Instance, active: &ActiveSet) -> Result<Solved> {
    if instance.n() != 1 {
        return Err(CspError::NotUnivariate(instance.n()));
    }
    if let Some((i, j)) = instance.find_duplicate() {
        return Err(CspError::IdenticalPolynomials(i + 1, j + 1));
    }
    solve_1d_exact(instance, &exact_polys(instance)?, active)
}

fn solve_1d_exact(instance: &Instance, exact: &[RatPoly], active: &ActiveSet) -> Result<Solved> {
    let j = active.indices();
    let first = &exact[j[0]];
    let locus = if j.len() == 1 {
        first.derivative()
    } else {
        j[1..]
            .iter()
            .fold(RatPoly::zero(), |g, &i| g.gcd(&exact[i].sub(first)))
    };
    let mut solved = Solved::default();
    if locus.is_zero() {
        // constant piece: every point of the stratum is critical
        solved.non_isolated_suspected = true;
        return Ok(solved);
    }
    let roots = real_roots_rat(&locus, RootRange::Line)?;
    let derivs: Vec<RatPoly> = j.iter().map(|&i| exact[i].derivative()).collect();
    for t in roots.roots {
        let guard_fails = (0..exact.len())
            .filter(|i| !active.contains(*i))
            .any(|i| t.vanishes(&exact[i].sub(first)));
        if guard_fails {
            continue;
        }
        let signs: Vec<i8> = derivs.iter().map(|d| t.sign_of(d)).collect();
        let feasible = signs.iter().any(|&s| s <= 0) && signs.iter().any(|&s| s >= 0);
        if !feasible {
            continue;
        }
        let mut cp = finish_point(instance, active, vec![t.approx()], None)?;
        cp.local_type = local_type_1d(exact, active, &t);
        cp.exact = Some(t);
        solved.points.push(cp);
    }
    Ok(solved)
}

/// Sign of `p(t + h) - p(t)` (right) or `p(t - h) - p(t)` (left) for small
/// `h > 0`; zero only for constants.
fn one_sided(p: &RatPoly, t: &RealRoot, right: bool) -> i8 {
    let mut d = p.derivative();
    let mut order = 1;
    while !d.is_zero() {
        let s = t.sign_of(&d);
        if s != 0 {
            return if right || order % 2 == 0 { s } else { -s };
        }
        d = d.derivative();
        order += 1;
    }
    0
}

fn pair_type(left: i8, right: i8) -> LocalType {
    match (left, right) {
        (1, 1) => LocalType::Min,
        (-1, -1) => LocalType::Max,
        (0, _) | (_, 0) => LocalType::Unknown,
        _ => LocalType::Saddle,
    }
}

/// Type shared by every selection whose active set at `t` is `active`, or
/// `Unknown` when they disagree.
fn local_type_1d(exact: &[RatPoly], active: &ActiveSet, t: &RealRoot) -> LocalType {
    let mut seen = None;
    for &l in active.indices() {
        let left = one_sided(&exact[l], t, false);
        for &r in active.indices() {
            let ty = pair_type(left, one_sided(&exact[r], t, true));
            match seen {
                None => seen = Some(ty),
                Some(prev) if prev != ty => return LocalType::Unknown,
                _ => {}
            }
        }
    }
    seen.unwrap_or(LocalType::Unknown)
}

/// Fills multipliers, value, residual and the generic-position flags.
fn finish_point(
    instance: &Instance,
    active: &ActiveSet,
    x: Vec<f64>,
    mu: Option<Vec<f64>>,
) -> Result<CriticalPoint> {
    let grads: Vec<Vec<f64>> = active
        .indices()
        .iter()
        .map(|&i| instance.poly(i).gradient_unchecked(&x))
        .collect();
    let mu = match mu {
        Some(mu) => mu,
        None => min_norm_point(&grads, DEFAULT_OPT_TOL)?.weights,
    };
    let system = build_system(instance, active);
    let mut z = x.clone();
    z.extend(mu.iter().map(|m| m.sqrt()));
    let residual = system
        .residual(&z)
        .iter()
        .fold(0.0, |a: f64, v| a.max(v.abs()));
    let value = instance.poly(active.indices()[0]).eval_unchecked(&x);
    let mut cp = CriticalPoint {
        x,
        active: active.clone(),
        mu,
        value,
        residual,
        strict_complementarity: false,
        affine_independent: false,
        second_order_nondegenerate: false,
        local_type: LocalType::Unknown,
        exact: None,
    };
    cp.strict_complementarity = cp.mu.iter().all(|&m| m >= STRICT_TOL);
    cp.affine_independent = affinely_independent(&grads, AFFINE_TOL);
    cp.second_order_nondegenerate = second_order_check(instance, &cp);
    if instance.n() > 1 {
        cp.local_type = local_type_nd(instance, &cp);
    }
    Ok(cp)
}

/// Whether the points are affinely independent: the differences to the
/// first have full row rank, up to a relative singular-value tolerance.
pub fn affinely_independent(points: &[Vec<f64>], tol: f64) -> bool {
    let s = points.len();
    if s <= 1 {
        return true;
    }
    let n = points[0].len();
    if s - 1 > n {
        return false;
    }
    let diffs = DMatrix::from_fn(s - 1, n, |k, m| points[k + 1][m] - points[0][m]);
    let sv = diffs.singular_values();
    let max = sv.max();
    max > 0.0 && sv.min() > tol * max
}

/// Second-order nondegeneracy: the multiplier-weighted Hessian is
/// nonsingular on the null space of the active-gradient matrix. Vacuously
/// true when that null space is trivial.
pub fn second_order_check(instance: &Instance, cp: &CriticalPoint) -> bool {
    let n = instance.n();
    let x = &cp.x;
    let j = cp.active.indices();
    let rows = j.len().max(n);
    let mut a = DMatrix::zeros(rows, n);
    for (k, &i) in j.iter().enumerate() {
        let g = instance.poly(i).gradient_unchecked(x);
        for m in 0..n {
            a[(k, m)] = g[m];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.max();
    let cutoff = RANK_TOL * smax.max(1.0);
    let null: Vec<DVector<f64>> = (0..n)
        .filter(|&k| svd.singular_values[k] <= cutoff)
        .map(|k| v_t.row(k).transpose())
        .collect();
    if null.is_empty() {
        return true;
    }
    let mut h = DMatrix::zeros(n, n);
    for (&i, &m) in j.iter().zip(&cp.mu) {
        h += instance.poly(i).hessian_unchecked(x) * m;
    }
    let z = DMatrix::from_columns(&null);
    let reduced = z.transpose() * &h * &z;
    let sv = reduced.singular_values();
    let hscale = h.abs().max().max(1.0);
    sv.min() > RANK_TOL * hscale
}

fn local_type_nd(instance: &Instance, cp: &CriticalPoint) -> LocalType {
    if cp.active.len() != 1 {
        return LocalType::Unknown;
    }
    let h = instance
        .poly(cp.active.indices()[0])
        .hessian_unchecked(&cp.x);
    let eig = h.clone().symmetric_eigen().eigenvalues;
    let tol = RANK_TOL * h.abs().max().max(1.0);
    if eig.iter().any(|e| e.abs() <= tol) {
        LocalType::Unknown
    } else if eig.iter().all(|&e| e > 0.0) {
        LocalType::Min
    } else if eig.iter().all(|&e| e < 0.0) {
        LocalType::Max
    } else {
        LocalType::Saddle
    }
}

fn seed_for(active: &ActiveSet, seed: u64) -> u64 {
    active
        .indices()
        .iter()
        .fold(seed ^ 0x9e37_79b9_7f4a_7c15, |acc, &i| {
            acc.rotate_left(13) ^ (i as u64 + 1).wrapping_mul(0xbf58_476d_1ce4_e5b9)
        })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a: f64, x| a.max(x.abs()))
}

fn solve_linear(jac: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(sol) = jac.clone().lu().solve(rhs) {
        if sol.iter().all(|v| v.is_finite()) {
            return Some(sol);
        }
    }
    let scale = jac.abs().max().max(1e-300);
    jac.clone().svd(true, true).solve(rhs, 1e-14 * scale).ok()
}

/// Damped Newton; returns the converged point.
fn newton(system: &CriticalSystem, mut z: Vec<f64>, cfg: &SolverConfig) -> Option<Vec<f64>> {
    let n = system.n;
    let limit = 10.0 * cfg.search_box;
    let mut f = system.residual(&z);
    let mut fnorm2: f64 = f.iter().map(|v| v * v).sum();
    for _ in 0..cfg.max_iter {
        if inf_norm(&f) <= cfg.newton_tol * system.scale(&z[..n]) {
            return Some(z);
        }
        let jac = system.jacobian(&z);
        let rhs = -DVector::from_vec(f.clone());
        let step = solve_linear(&jac, &rhs)?;
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1e-4 {
            let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            let ft = system.residual(&trial);
            let ft2: f64 = ft.iter().map(|v| v * v).sum();
            if ft2.is_finite() && ft2 < fnorm2 {
                z = trial;
                f = ft;
                fnorm2 = ft2;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || z[..n].iter().any(|v| v.abs() > limit) {
            break;
        }
    }
    (inf_norm(&f) <= cfg.newton_tol * system.scale(&z[..n])).then_some(z)
}

fn rank_deficient(system: &CriticalSystem, z: &[f64]) -> bool {
    let sv = system.jacobian(z).singular_values();
    let max = sv.max();
    max == 0.0 || sv.min() < 1e-8 * max
}

/// Multistart Newton solve of one stratum. Best effort.
pub fn solve_nd(instance: &Instance, active: &ActiveSet, cfg: &SolverConfig) -> Result<Solved> {
    cfg.validate()?;
    let n = instance.n();
    let s = active.len();
    let system = build_system(instance, active);

    let g = cfg.seed_grid;
    let axis: Vec<f64> = (0..g)
        .map(|k| {
            if g == 1 {
                0.0
            } else {
                -cfg.search_box + 2.0 * cfg.search_box * k as f64 / (g - 1) as f64
            }
        })
        .collect();
    let total = g
        .checked_pow(n as u32)
        .ok_or(CspError::Overflow("seed grid"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(active, cfg.seed));
    let seeds: Vec<Vec<f64>> = (0..total)
        .map(|code| {
            let mut z = Vec::with_capacity(n + s);
            let mut c = code;
            for _ in 0..n {
                z.push(axis[c % g]);
                c /= g;
            }
            let lam: Vec<f64> = (0..s).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = lam
                .iter()
                .map(|l: &f64| l * l)
                .sum::<f64>()
                .sqrt()
                .max(1e-300);
            z.extend(lam.iter().map(|l| l / norm));
            z
        })
        .collect();

    let converged: Vec<Vec<f64>> = seeds
        .into_par_iter()
        .filter_map(|z0| newton(&system, z0, cfg))
        .collect();

    let mut solved = Solved::default();
    let mut degenerate = 0;
    for z in converged {
        let x = z[..n].to_vec();
        if solved
            .points
            .iter()
            .any(|p| dist(&p.x, &x) <= cfg.dedupe_radius)
        {
            continue;
        }
        let lam2: Vec<f64> = z[n..].iter().map(|l| l * l).collect();
        let total: f64 = lam2.iter().sum();
        let mu: Vec<f64> = lam2.iter().map(|m| m / total).collect();
        let Some(cp) = validate_nd(instance, active, &system, x, mu, cfg)? else {
            continue;
        };
        if rank_deficient(&system, &z) {
            degenerate += 1;
        }
        solved.points.push(cp);
    }
    solved.non_isolated_suspected = degenerate >= 2;
    Ok(solved)
}

/// Re-derives the active set at a converged point and enlarges it when a
/// guard is violated within `tol_active`.
fn validate_nd(
    instance: &Instance,
    active: &ActiveSet,
    system: &CriticalSystem,
    x: Vec<f64>,
    mu: Vec<f64>,
    cfg: &SolverConfig,
) -> Result<Option<CriticalPoint>> {
    if system.guards_hold(&x, cfg.tol_active) {
        return finish_point(instance, active, x, Some(mu)).map(Some);
    }
    let value = instance.poly(active.indices()[0]).eval_unchecked(&x);
    let observed = active_set(instance, value, &x, cfg.tol_active)?;
    let enlarged = ActiveSet::new(
        observed
            .indices()
            .iter()
            .chain(active.indices())
            .copied()
            .collect(),
    );
    let cp = finish_point(instance, &enlarged, x, None)?;
    let grads: Vec<Vec<f64>> = enlarged
        .indices()
        .iter()
        .map(|&i| instance.poly(i).gradient_unchecked(&cp.x))
        .collect();
    let slope = min_norm_point(&grads, DEFAULT_OPT_TOL)?.norm;
    Ok((slope <= 10.0 * cfg.newton_tol * system.scale(&cp.x)).then_some(cp))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Critical points of every continuous selection, as the union over all
/// nonempty active sets.
pub fn all_critical_points(instance: &Instance, cfg: &SolverConfig) -> Result<CriticalCatalog> {
    cfg.validate()?;
    let r = instance.r();
    if r > MAX_SUBSET_R {
        return Err(CspError::TooManyPolynomials {
            r,
            limit: MAX_SUBSET_R,
        });
    }
    if let Some((i, j)) = instance.find_duplicate() {
        return Err(CspError::IdenticalPolynomials(i + 1, j + 1));
    }
    let subsets: Vec<ActiveSet> = (1u32..(1 << r))
        .map(|mask| ActiveSet::new((0..r).filter(|i| mask & (1 << i) != 0).collect()))
        .collect();

    let univariate = instance.n() == 1;
    let exact = if univariate {
        exact_polys(instance)?
    } else {
        Vec::new()
    };
    let results: Vec<Result<Solved>> = subsets
        .par_iter()
        .map(|j| {
            if univariate {
                solve_1d_exact(instance, &exact, j)
            } else {
                solve_nd(instance, j, cfg)
            }
        })
        .collect();

    let mut points: Vec<CriticalPoint> = Vec::new();
    let mut non_isolated = false;
    let mut notes = Vec::new();
    for (j, res) in subsets.iter().zip(results) {
        let solved = res?;
        if solved.non_isolated_suspected {
            non_isolated = true;
            notes.push(format!(
                "active set {j}: non-isolated critical points suspected"
            ));
        }
        for cp in solved.points {
            match points
                .iter()
                .position(|p| dist(&p.x, &cp.x) <= cfg.dedupe_radius)
            {
                None => points.push(cp),
                Some(k) => {
                    let better = cp.active.len() > points[k].active.len()
                        || (cp.active.len() == points[k].active.len()
                            && cp.residual < points[k].residual);
                    if better {
                        points[k] = cp;
                    }
                }
            }
        }
    }
    points.sort_by(|a, b| lex_cmp(&a.x, &b.x));

    let mut counts: BTreeMap<ActiveSet, usize> = BTreeMap::new();
    for p in &points {
        *counts.entry(p.active.clone()).or_default() += 1;
    }
    let bound = bound_b0(instance.n(), instance.d(), r)?;
    if !univariate {
        notes.push(format!(
            "multistart Newton from a {}^{} grid on [-{b}, {b}]^{}; completeness is not certified",
            cfg.seed_grid,
            instance.n(),
            instance.n(),
            b = cfg.search_box
        ));
    }
    Ok(CriticalCatalog {
        method: if univariate {
            "exact-1d"
        } else {
            "multistart-newton"
        },
        within_bound: BigUint::from(points.len()) <= bound,
        points,
        per_active_set: counts
            .into_iter()
            .map(|(active, count)| ActiveSetCount { active, count })
            .collect(),
        bound_b0: bound,
        non_isolated_suspected: non_isolated,
        notes,
    })
}

/// Local type of `cp` for one particular univariate selection, from the
/// exact one-sided behaviour of the pieces used on each side.
pub fn classify_local_1d(
    instance: &Instance,
    sel: &UnivariateSelection,
    cp: &CriticalPoint,
) -> Result<LocalType> {
    if instance.n() != 1 {
        return Err(CspError::NotUnivariate(instance.n()));
    }
    let t = cp
        .exact
        .as_ref()
        .ok_or_else(|| CspError::Precondition("critical point carries no exact location".into()))?;
    let dec = sel.decomposition();
    let exact = dec.exact_polys();
    let loc = dec.locate_root(t);
    let active = match loc {
        Location::Interval(k) => ActiveSet::singleton(sel.labels()[k]),
        Location::Breakpoint(k) => dec.breakpoints[k].class_of(sel.labels()[k]).clone(),
    };
    let signs: Vec<i8> = active
        .indices()
        .iter()
        .map(|&i| t.sign_of(&exact[i].derivative()))
        .collect();
    let critical = signs.iter().any(|&s| s <= 0) && signs.iter().any(|&s| s >= 0);
    if !critical {
        let grads: Vec<Vec<f64>> = active
            .indices()
            .iter()
            .map(|&i| instance.poly(i).gradient_unchecked(&cp.x))
            .collect();
        let slope = min_norm_point(&grads, DEFAULT_OPT_TOL)?.norm;
        return Err(CspError::NotCritical(slope));
    }
    let left = one_sided(&exact[sel.piece_left(loc)], t, false);
    let right = one_sided(&exact[sel.piece_right(loc)], t, true);
    Ok(pair_type(left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selections::{decompose_1d, enumerate_selections_1d};
    use std::sync::Arc;

    fn uni(polys: &[&[f64]]) -> Instance {
        Instance::from_polys(polys.iter().map(|c| Polynomial::univariate(c)).collect()).unwrap()
    }

    fn parabolas() -> Instance {
        uni(&[&[0.0, 0.0, 1.0], &[1.0, -2.0, 1.0]])
    }

    #[test]
    fn build_system_for_crossing_parabolas() {
        let sys = build_system(&parabolas(), &ActiveSet::new(vec![0, 1]));
        assert_eq!(sys.size(), 3);
        assert_eq!(sys.partial(0, 0), &Polynomial::univariate(&[0.0, 2.0]));
        assert_eq!(sys.partial(1, 0), &Polynomial::univariate(&[-2.0, 2.0]));
        assert_eq!(
            sys.coincidence_equations(),
            &[Polynomial::univariate(&[1.0, -2.0])]
        );
        assert!(sys.guards().is_empty());
        // residual vanishes at x = 1/2 with lambda = (1/sqrt2, 1/sqrt2)
        let l = 0.5f64.sqrt();
        let res = sys.residual(&[0.5, l, l]);
        assert!(res.iter().all(|v| v.abs() < 1e-15));
        let text = sys.to_string();
        assert!(text.contains("= 1"));
    }

    #[test]
    fn build_system_singleton_and_guards() {
        let sys = build_system(&parabolas(), &ActiveSet::singleton(0));
        assert_eq!(sys.size(), 2);
        assert!(sys.coincidence_equations().is_empty());
        assert_eq!(sys.guards().len(), 1);
        assert_eq!(sys.guards()[0].0, 1);
        assert_eq!(sys.guards()[0].1, Polynomial::univariate(&[1.0, -2.0]));
        // lambda^2 f'(x) = 0 and lambda^2 = 1 at x = 0
        assert_eq!(sys.residual(&[0.0, 1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let f1 = Polynomial::from_terms(
            2,
            [(vec![2, 0], 1.0), (vec![1, 1], 0.5), (vec![0, 3], -0.2)],
        )
        .unwrap();
        let f2 = Polynomial::from_terms(2, [(vec![1, 0], 1.0), (vec![0, 2], 2.0)]).unwrap();
        let inst = Instance::from_polys(vec![f1, f2]).unwrap();
        let sys = build_system(&inst, &ActiveSet::new(vec![0, 1]));
        let z = [0.3, -0.7, 0.6, 0.8];
        let jac = sys.jacobian(&z);
        let h = 1e-6;
        for c in 0..4 {
            let mut zp = z;
            let mut zm = z;
            zp[c] += h;
            zm[c] -= h;
            let fp = sys.residual(&zp);
            let fm = sys.residual(&zm);
            for r in 0..4 {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                assert!(
                    (fd - jac[(r, c)]).abs() < 1e-6,
                    "({r},{c}) {fd} vs {}",
                    jac[(r, c)]
                );
            }
        }
    }

    #[test]
    fn catalog_crossing_parabolas() {
        let cat = all_critical_points(&parabolas(), &SolverConfig::default()).unwrap();
        assert_eq!(cat.method, "exact-1d");
        assert_eq!(cat.points.len(), 3);
        assert_eq!(cat.bound_b0, BigUint::from(467u32));
        let xs: Vec<f64> = cat.points.iter().map(|p| p.x[0]).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0]);
        let mid = &cat.points[1];
        assert_eq!(mid.active.one_based(), vec![1, 2]);
        assert_eq!(mid.mu, vec![0.5, 0.5]);
        assert_eq!(mid.value, 0.25);
        assert_eq!(cat.points[0].active.one_based(), vec![1]);
        assert_eq!(cat.points[2].active.one_based(), vec![2]);
        assert_eq!(cat.points[0].local_type, LocalType::Min);
        assert_eq!(mid.local_type, LocalType::Unknown);
    }

    #[test]
    fn catalog_abs_pair_and_cubic() {
        let cat = all_critical_points(&uni(&[&[0.0, 1.0], &[0.0, -1.0]]), &SolverConfig::default())
            .unwrap();
        assert_eq!(cat.points.len(), 1);
        assert_eq!(cat.points[0].x, vec![0.0]);
        assert_eq!(cat.points[0].mu, vec![0.5, 0.5]);

        let cubic = uni(&[&[0.0, 0.0, 0.0, 1.0]]);
        let cat = all_critical_points(&cubic, &SolverConfig::default()).unwrap();
        assert_eq!(cat.points.len(), 1);
        assert_eq!(cat.points[0].local_type, LocalType::Saddle);
        assert!(!cat.points[0].second_order_nondegenerate);
    }

    #[test]
    fn catalog_shifted_parabolas_and_single() {
        let inst = uni(&[&[0.0, 0.0, 1.0], &[1.1, -2.0, 1.0]]);
        let cat = all_critical_points(&inst, &SolverConfig::default()).unwrap();
        let xs: Vec<f64> = cat.points.iter().map(|p| p.x[0]).collect();
        let vs: Vec<f64> = cat.points.iter().map(|p| p.value).collect();
        assert_eq!(xs.len(), 3);
        assert!((xs[1] - 0.55).abs() < 1e-12);
        assert!((vs[1] - 0.3025).abs() < 1e-12);
        assert!((vs[2] - 0.1).abs() < 1e-12);

        let cat = all_critical_points(&uni(&[&[1.0, 0.0, 1.0]]), &SolverConfig::default()).unwrap();
        assert_eq!(cat.points.len(), 1);
        assert_eq!(cat.points[0].value, 1.0);
    }

    #[test]
    fn constant_piece_flags_non_isolated() {
        let inst = uni(&[&[0.0, 0.0, 1.0], &[1.0]]);
        let cat = all_critical_points(&inst, &SolverConfig::default()).unwrap();
        assert!(cat.non_isolated_suspected);
    }

    #[test]
    fn guard_on_subset_count() {
        let polys: Vec<Polynomial> = (0..13)
            .map(|k| Polynomial::univariate(&[k as f64, 1.0]))
            .collect();
        let inst = Instance::from_polys(polys).unwrap();
        assert!(matches!(
            all_critical_points(&inst, &SolverConfig::default()),
            Err(CspError::TooManyPolynomials { r: 13, limit: 12 })
        ));
    }

    #[test]
    fn second_order_examples() {
        let sq = uni(&[&[0.0, 0.0, 1.0]]);
        let cat = all_critical_points(&sq, &SolverConfig::default()).unwrap();
        assert!(second_order_check(&sq, &cat.points[0]));
        let cat = all_critical_points(&parabolas(), &SolverConfig::default()).unwrap();
        assert!(second_order_check(&parabolas(), &cat.points[1]));
    }

    #[test]
    fn classify_examples() {
        let inst = uni(&[&[0.0, 1.0], &[0.0, -1.0]]);
        let dec = Arc::new(decompose_1d(&inst).unwrap());
        let cat = all_critical_points(&inst, &SolverConfig::default()).unwrap();
        let abs = UnivariateSelection::new(dec.clone(), vec![1, 0]).unwrap();
        let neg_abs = UnivariateSelection::new(dec.clone(), vec![0, 1]).unwrap();
        let ident = UnivariateSelection::new(dec, vec![0, 0]).unwrap();
        assert_eq!(
            classify_local_1d(&inst, &abs, &cat.points[0]).unwrap(),
            LocalType::Min
        );
        assert_eq!(
            classify_local_1d(&inst, &neg_abs, &cat.points[0]).unwrap(),
            LocalType::Max
        );
        assert_eq!(
            classify_local_1d(&inst, &ident, &cat.points[0]).unwrap(),
            LocalType::Saddle
        );

        let p = parabolas();
        let dec = Arc::new(decompose_1d(&p).unwrap());
        let fmin = crate::selections::MaxMinExpr::min_of(2)
            .to_univariate(dec)
            .unwrap();
        let cat = all_critical_points(&p, &SolverConfig::default()).unwrap();
        assert_eq!(
            classify_local_1d(&p, &fmin, &cat.points[1]).unwrap(),
            LocalType::Max
        );
        assert_eq!(
            classify_local_1d(&p, &fmin, &cat.points[0]).unwrap(),
            LocalType::Min
        );
    }

    #[test]
    fn classify_rejects_non_critical() {
        // x = 0 is critical for x^2 but not for the selection using x + 5 there
        let inst = uni(&[&[0.0, 0.0, 1.0], &[5.0, 1.0]]);
        let cat = all_critical_points(&inst, &SolverConfig::default()).unwrap();
        let origin = cat.points.iter().find(|p| p.x[0] == 0.0).unwrap();
        let e = enumerate_selections_1d(&inst, 100).unwrap();
        let line_everywhere = e
            .selections
            .iter()
            .find(|s| s.labels().iter().all(|&l| l == 1))
            .unwrap();
        assert!(matches!(
            classify_local_1d(&inst, line_everywhere, origin),
            Err(CspError::NotCritical(_))
        ));
    }

    #[test]
    fn newton_examples_in_two_variables() {
        let cfg = SolverConfig {
            seed_grid: 7,
            ..SolverConfig::default()
        };
        let f1 = Polynomial::from_terms(2, [(vec![2, 0], 1.0), (vec![0, 2], 1.0)]).unwrap();
        let inst = Instance::from_polys(vec![f1.clone()]).unwrap();
        let s = solve_nd(&inst, &ActiveSet::singleton(0), &cfg).unwrap();
        assert_eq!(s.points.len(), 1);
        assert!(s.points[0].x.iter().all(|v| v.abs() < 1e-9));
        assert_eq!(s.points[0].local_type, LocalType::Min);

        let f2 = Polynomial::from_terms(
            2,
            [
                (vec![2, 0], 1.0),
                (vec![1, 0], -2.0),
                (vec![0, 0], 1.0),
                (vec![0, 2], 1.0),
            ],
        )
        .unwrap();
        let inst = Instance::from_polys(vec![f1, f2]).unwrap();
        let s = solve_nd(&inst, &ActiveSet::new(vec![0, 1]), &cfg).unwrap();
        assert_eq!(s.points.len(), 1);
        let p = &s.points[0];
        assert!((p.x[0] - 0.5).abs() < 1e-9 && p.x[1].abs() < 1e-9);
        assert!((p.mu[0] - 0.5).abs() < 1e-9);
        assert!((p.value - 0.25).abs() < 1e-9);

        let cat = all_critical_points(&inst, &cfg).unwrap();
        assert_eq!(cat.points.len(), 3);
    }

    #[test]
    fn infeasible_stratum_is_empty() {
        // parallel planes never meet
        let f1 = Polynomial::from_terms(2, [(vec![1, 0], 1.0)]).unwrap();
        let f2 = Polynomial::from_terms(2, [(vec![1, 0], 1.0), (vec![0, 0], 1.0)]).unwrap();
        let inst = Instance::from_polys(vec![f1, f2]).unwrap();
        let cfg = SolverConfig {
            seed_grid: 5,
            ..SolverConfig::default()
        };
        assert!(solve_nd(&inst, &ActiveSet::new(vec![0, 1]), &cfg)
            .unwrap()
            .points
            .is_empty());
    }
}
