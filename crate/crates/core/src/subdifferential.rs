//! Clarke subdifferential of a selection at a point, and the non-smooth slope
//! as the norm of the minimum-norm point of the gradient polytope.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{CspError, Result};
use crate::poly::Instance;
use crate::selections::ActiveSet;

pub const DEFAULT_OPT_TOL: f64 = 1e-10;

/// Vertices closer than this are treated as one.
const DEDUP_TOL: f64 = 1e-12;

/// Convex hull of the active gradients, kept as its vertex list.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientPolytope {
    pub vertices: Vec<Vec<f64>>,
    pub source_indices: ActiveSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinNormResult {
    pub point: Vec<f64>,
    /// Convex weights over the input vertices, in input order.
    pub weights: Vec<f64>,
    pub norm: f64,
    pub iterations: usize,
}

pub fn clarke_subdifferential(
    instance: &Instance,
    active: &ActiveSet,
    x: &[f64],
) -> Result<GradientPolytope> {
    if active.is_empty() {
        return Err(CspError::EmptyPolytope);
    }
    let vertices = active
        .indices()
        .iter()
        .map(|&i| instance.poly(i).gradient(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(GradientPolytope {
        vertices,
        source_indices: active.clone(),
    })
}

impl GradientPolytope {
    pub fn min_norm_point(&self, opt_tol: f64) -> Result<MinNormResult> {
        min_norm_point(&self.vertices, opt_tol)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(points: &[Vec<f64>], support: &[usize], weights: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (&k, &w) in support.iter().zip(weights) {
        for (o, p) in out.iter_mut().zip(&points[k]) {
            *o += w * p;
        }
    }
    out
}

/// Minimizer of `|sum v_i p_i|` over the affine hull of the support
/// (`sum v_i = 1`), via the bordered Gram system.
fn affine_minimizer(points: &[Vec<f64>], support: &[usize]) -> Vec<f64> {
    let m = support.len();
    let mut a = DMatrix::zeros(m + 1, m + 1);
    for (i, &ki) in support.iter().enumerate() {
        for (j, &kj) in support.iter().enumerate() {
            a[(i, j)] = dot(&points[ki], &points[kj]);
        }
        a[(i, m)] = 1.0;
        a[(m, i)] = 1.0;
    }
    let mut b = DVector::zeros(m + 1);
    b[m] = 1.0;
    let scale = a.amax().max(1.0);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14 * scale)
        .expect("svd computed with u and v");
    let v: Vec<f64> = sol.iter().take(m).copied().collect();
    // re-impose the affine constraint against solver drift
    let s: f64 = v.iter().sum();
    if s.abs() > 1e-300 {
        v.iter().map(|x| x / s).collect()
    } else {
        vec![1.0 / m as f64; m]
    }
}

/// Nearest point of the convex hull of `vertices` to the origin, by Wolfe's
/// method with major and minor cycles.
pub fn min_norm_point(vertices: &[Vec<f64>], opt_tol: f64) -> Result<MinNormResult> {
    if vertices.is_empty() {
        return Err(CspError::EmptyPolytope);
    }
    let dim = vertices[0].len();
    if let Some(v) = vertices.iter().find(|v| v.len() != dim) {
        return Err(CspError::DimensionMismatch {
            expected: dim,
            got: v.len(),
        });
    }

    let mut unique: Vec<Vec<f64>> = Vec::new();
    let mut owner: Vec<usize> = Vec::with_capacity(vertices.len());
    for v in vertices {
        match unique
            .iter()
            .position(|u| u.iter().zip(v).all(|(a, b)| (a - b).abs() <= DEDUP_TOL))
        {
            Some(k) => owner.push(k),
            None => {
                owner.push(unique.len());
                unique.push(v.clone());
            }
        }
    }

    let m = unique.len();
    let cap = 10 * (vertices.len() + dim).pow(2);
    let scale = unique.iter().map(|u| dot(u, u)).fold(1.0, f64::max);
    let tol = opt_tol * scale;

    let start = (0..m)
        .min_by(|&a, &b| dot(&unique[a], &unique[a]).total_cmp(&dot(&unique[b], &unique[b])))
        .unwrap();
    let mut support = vec![start];
    let mut weights = vec![1.0];
    let mut x = unique[start].clone();
    let mut iterations = 0;

    loop {
        iterations += 1;
        let (j, min_dot) = (0..m)
            .map(|k| (k, dot(&x, &unique[k])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let gap = dot(&x, &x) - min_dot;
        if gap <= tol || support.contains(&j) {
            break;
        }
        if iterations > cap {
            return Err(not_converged(
                iterations, gap, &x, &support, &weights, &owner, m,
            ));
        }
        support.push(j);
        weights.push(0.0);

        loop {
            iterations += 1;
            if iterations > cap {
                return Err(not_converged(
                    iterations, gap, &x, &support, &weights, &owner, m,
                ));
            }
            let v = affine_minimizer(&unique, &support);
            if v.iter().all(|&vi| vi > 1e-14) {
                weights = v;
                break;
            }
            let mut theta = 1.0;
            let mut drop = 0;
            for (i, (&wi, &vi)) in weights.iter().zip(&v).enumerate() {
                if vi <= 1e-14 {
                    let t = wi / (wi - vi);
                    if t < theta {
                        theta = t;
                        drop = i;
                    }
                }
            }
            for (wi, vi) in weights.iter_mut().zip(&v) {
                *wi = (1.0 - theta) * *wi + theta * vi;
            }
            weights[drop] = 0.0;
            let keep: Vec<bool> = weights.iter().map(|&w| w > 1e-14).collect();
            support = support
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(&s, _)| s)
                .collect();
            weights = weights
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(&w, _)| w)
                .collect();
            let s: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= s);
        }
        x = combine(&unique, &support, &weights, dim);
    }

    let out_weights = spread_weights(&support, &weights, &owner, m);
    let norm = dot(&x, &x).sqrt();
    Ok(MinNormResult {
        point: x,
        weights: out_weights,
        norm,
        iterations,
    })
}

/// Maps weights on unique vertices back to the input list; repeated vertices
/// give their weight to the first occurrence.
fn spread_weights(support: &[usize], weights: &[f64], owner: &[usize], m: usize) -> Vec<f64> {
    let mut on_unique = vec![0.0; m];
    for (&s, &w) in support.iter().zip(weights) {
        on_unique[s] = w;
    }
    let mut seen = vec![false; m];
    owner
        .iter()
        .map(|&u| {
            if seen[u] {
                0.0
            } else {
                seen[u] = true;
                on_unique[u]
            }
        })
        .collect()
}

fn not_converged(
    iterations: usize,
    violation: f64,
    x: &[f64],
    support: &[usize],
    weights: &[f64],
    owner: &[usize],
    m: usize,
) -> CspError {
    let w: Vec<f64> = weights.iter().take(support.len()).copied().collect();
    CspError::MinNormNotConverged {
        iterations,
        violation,
        best_point: x.to_vec(),
        best_weights: spread_weights(&support[..w.len()], &w, owner, m),
    }
}

/// Non-smooth slope: the smallest norm in the Clarke subdifferential.
pub fn slope(instance: &Instance, active: &ActiveSet, x: &[f64]) -> Result<f64> {
    slope_with_tol(instance, active, x, DEFAULT_OPT_TOL)
}

pub fn slope_with_tol(
    instance: &Instance,
    active: &ActiveSet,
    x: &[f64],
    opt_tol: f64,
) -> Result<f64> {
    Ok(clarke_subdifferential(instance, active, x)?
        .min_norm_point(opt_tol)?
        .norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn check_invariants(vertices: &[Vec<f64>], res: &MinNormResult) {
        let s: f64 = res.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(res.weights.iter().all(|&w| w >= 0.0));
        let dim = res.point.len();
        let mut p = vec![0.0; dim];
        for (v, w) in vertices.iter().zip(&res.weights) {
            for k in 0..dim {
                p[k] += w * v[k];
            }
        }
        for k in 0..dim {
            assert!((p[k] - res.point[k]).abs() < 1e-12);
        }
        let xx = dot(&res.point, &res.point);
        for v in vertices {
            assert!(dot(&res.point, v) - xx >= -1e-10);
        }
    }

    #[test]
    fn symmetric_segment() {
        let v = vec![vec![1.0], vec![-1.0]];
        let r = min_norm_point(&v, DEFAULT_OPT_TOL).unwrap();
        assert_eq!(r.norm, 0.0);
        assert_eq!(r.weights, vec![0.5, 0.5]);
        check_invariants(&v, &r);
    }

    #[test]
    fn projection_onto_segment() {
        let v = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = min_norm_point(&v, DEFAULT_OPT_TOL).unwrap();
        assert!((r.point[0] - 0.5).abs() < 1e-14);
        assert!((r.point[1] - 0.5).abs() < 1e-14);
        assert!((r.norm - 0.5f64.sqrt()).abs() < 1e-14);
        check_invariants(&v, &r);
    }

    #[test]
    fn nearest_vertex() {
        let v = vec![vec![2.0, 0.0], vec![3.0, 0.0]];
        let r = min_norm_point(&v, DEFAULT_OPT_TOL).unwrap();
        assert_eq!(r.point, vec![2.0, 0.0]);
        assert_eq!(r.weights, vec![1.0, 0.0]);
    }

    #[test]
    fn duplicates_and_errors() {
        let v = vec![vec![1.0], vec![1.0], vec![-3.0]];
        let r = min_norm_point(&v, DEFAULT_OPT_TOL).unwrap();
        assert!(r.norm < 1e-14);
        assert!((r.weights[0] - 0.75).abs() < 1e-14);
        assert_eq!(r.weights[1], 0.0);
        assert_eq!(
            min_norm_point(&[], 1e-10).unwrap_err(),
            CspError::EmptyPolytope
        );
        assert!(min_norm_point(&[vec![1.0], vec![1.0, 2.0]], 1e-10).is_err());
    }

    #[test]
    fn triangle_containing_origin() {
        let v = vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![-1.0, -1.0]];
        let r = min_norm_point(&v, DEFAULT_OPT_TOL).unwrap();
        assert!(r.norm < 1e-12);
        assert!((r.weights[0] - 0.5).abs() < 1e-12);
        assert!((r.weights[1] - 0.25).abs() < 1e-12);
        check_invariants(&v, &r);
    }

    #[test]
    fn subdifferential_examples() {
        let inst = Instance::from_polys(vec![
            Polynomial::univariate(&[0.0, 1.0]),
            Polynomial::univariate(&[0.0, -1.0]),
        ])
        .unwrap();
        let both = ActiveSet::new(vec![0, 1]);
        let g = clarke_subdifferential(&inst, &both, &[0.0]).unwrap();
        assert_eq!(g.vertices, vec![vec![1.0], vec![-1.0]]);
        assert_eq!(slope(&inst, &both, &[0.0]).unwrap(), 0.0);
        assert_eq!(slope(&inst, &ActiveSet::singleton(0), &[5.0]).unwrap(), 1.0);

        let sq = Instance::from_polys(vec![Polynomial::univariate(&[0.0, 0.0, 1.0])]).unwrap();
        let g = clarke_subdifferential(&sq, &ActiveSet::singleton(0), &[3.0]).unwrap();
        assert_eq!(g.vertices, vec![vec![6.0]]);

        let f1 = Polynomial::from_terms(2, [(vec![2, 0], 1.0), (vec![0, 2], 1.0)]).unwrap();
        let f2 = Polynomial::var(2, 0);
        let inst2 = Instance::from_polys(vec![f1, f2]).unwrap();
        let g = clarke_subdifferential(&inst2, &both, &[1.0, 0.0]).unwrap();
        assert_eq!(g.vertices, vec![vec![2.0, 0.0], vec![1.0, 0.0]]);

        let parab = Instance::from_polys(vec![
            Polynomial::univariate(&[0.0, 0.0, 1.0]),
            Polynomial::univariate(&[1.0, -2.0, 1.0]),
        ])
        .unwrap();
        assert_eq!(slope(&parab, &both, &[0.5]).unwrap(), 0.0);
        assert!(clarke_subdifferential(&parab, &ActiveSet::default(), &[0.5]).is_err());
    }

    #[test]
    fn weights_unique_under_permutation() {
        let v = vec![vec![1.0, 0.2], vec![-0.7, 1.0], vec![-0.3, -1.1]];
        let r = min_norm_point(&v, DEFAULT_OPT_TOL).unwrap();
        let perm = [2, 0, 1];
        let pv: Vec<Vec<f64>> = perm.iter().map(|&k| v[k].clone()).collect();
        let pr = min_norm_point(&pv, DEFAULT_OPT_TOL).unwrap();
        for (slot, &k) in perm.iter().enumerate() {
            assert!((pr.weights[slot] - r.weights[k]).abs() < 1e-8);
        }
    }
}
