//! Witness-level genericity audits, exact univariate certificates and seeded
//! random instances.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::critical::{affinely_independent, second_order_check, CriticalCatalog};
use crate::error::{CspError, Result};
use crate::poly::{monomial_count, Instance};
use crate::selections::{serialize_biguint, ActiveSet};
use crate::univariate::{rat_string, resultant, RatPoly};

pub use crate::bounds::{bound_b0, bound_n, loja_exponent};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GenericityTols {
    /// Smallest multiplier counted as strictly positive.
    pub strict_tol: f64,
    /// Critical values closer than this count as equal.
    pub value_tol: f64,
    /// Relative singular-value threshold for affine independence.
    pub affine_tol: f64,
}

impl Default for GenericityTols {
    fn default() -> Self {
        GenericityTols {
            strict_tol: 1e-8,
            value_tol: 1e-9,
            affine_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub points: Vec<Vec<f64>>,
    pub active: Vec<ActiveSet>,
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericityReport {
    pub overall: bool,
    pub checks: Vec<Check>,
    pub tolerances: GenericityTols,
}

impl GenericityReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect()
    }
}

fn check(name: &'static str, witnesses: Vec<Witness>) -> Check {
    Check {
        name,
        passed: witnesses.is_empty(),
        witnesses,
    }
}

/// Audits a critical catalog computed on `instance`.
pub fn genericity_report(
    instance: &Instance,
    catalog: &CriticalCatalog,
    tols: &GenericityTols,
) -> GenericityReport {
    let n = instance.n();
    let pts = &catalog.points;
    let single = |k: usize, values: Vec<f64>| Witness {
        points: vec![pts[k].x.clone()],
        active: vec![pts[k].active.clone()],
        values,
        detail: None,
    };

    let too_many = (0..pts.len())
        .filter(|&k| pts[k].active.len() > n + 1)
        .map(|k| single(k, vec![pts[k].value]))
        .collect();

    let dependent = (0..pts.len())
        .filter(|&k| {
            let grads: Vec<Vec<f64>> = pts[k]
                .active
                .indices()
                .iter()
                .map(|&i| instance.poly(i).gradient_unchecked(&pts[k].x))
                .collect();
            !affinely_independent(&grads, tols.affine_tol)
        })
        .map(|k| single(k, vec![pts[k].value]))
        .collect();

    let weak = (0..pts.len())
        .filter(|&k| pts[k].mu.iter().any(|&m| m < tols.strict_tol))
        .map(|k| single(k, pts[k].mu.clone()))
        .collect();

    let degenerate = (0..pts.len())
        .filter(|&k| !second_order_check(instance, &pts[k]))
        .map(|k| single(k, vec![pts[k].value]))
        .collect();

    let mut equal_values = Vec::new();
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            if (pts[a].value - pts[b].value).abs() <= tols.value_tol {
                equal_values.push(Witness {
                    points: vec![pts[a].x.clone(), pts[b].x.clone()],
                    active: vec![pts[a].active.clone(), pts[b].active.clone()],
                    values: vec![pts[a].value, pts[b].value],
                    detail: None,
                });
            }
        }
    }

    let mut finiteness = Vec::new();
    if !catalog.within_bound {
        finiteness.push(Witness {
            points: Vec::new(),
            active: Vec::new(),
            values: Vec::new(),
            detail: Some(format!(
                "{} points exceed the bound {}",
                pts.len(),
                catalog.bound_b0
            )),
        });
    }
    if catalog.non_isolated_suspected {
        finiteness.push(Witness {
            points: Vec::new(),
            active: Vec::new(),
            values: Vec::new(),
            detail: Some(catalog.notes.join("; ")),
        });
    }

    let checks = vec![
        check("active_set_bound", too_many),
        check("affine_independence", dependent),
        check("strict_complementarity", weak),
        check("second_order", degenerate),
        check("distinct_critical_values", equal_values),
        check("finite_catalog_within_B0", finiteness),
    ];
    GenericityReport {
        overall: checks.iter().all(|c| c.passed),
        checks,
        tolerances: *tols,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateEntry {
    /// 1-based polynomial indices.
    pub indices: Vec<usize>,
    /// Exact value as `numerator/denominator`.
    pub value: String,
    pub nonzero: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate1D {
    /// `res(f_i - f_j, (f_i - f_j)')` per pair; a nonzero constant
    /// difference certifies itself.
    pub pairs: Vec<CertificateEntry>,
    /// `res(f_i - f_j, f_i - f_k)` per triple.
    pub triples: Vec<CertificateEntry>,
    pub certified: bool,
}

fn entry(indices: Vec<usize>, value: BigRational) -> CertificateEntry {
    CertificateEntry {
        indices: indices.iter().map(|i| i + 1).collect(),
        nonzero: !value.is_zero(),
        value: rat_string(&value),
    }
}

/// Exact certificates for simple crossings and the absence of triple
/// coincidences in one variable.
pub fn certify_1d(instance: &Instance) -> Result<Certificate1D> {
    if instance.n() != 1 {
        return Err(CspError::NotUnivariate(instance.n()));
    }
    let exact: Vec<RatPoly> = instance
        .polys()
        .iter()
        .map(RatPoly::from_poly)
        .collect::<Result<_>>()?;
    let r = exact.len();
    let mut pairs = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            let h = exact[i].sub(&exact[j]);
            let value = match h.degree() {
                Some(0) => h.coeffs()[0].clone(),
                _ => resultant(&h, &h.derivative()),
            };
            pairs.push(entry(vec![i, j], value));
        }
    }
    let mut triples = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            for k in j + 1..r {
                let value = resultant(&exact[i].sub(&exact[j]), &exact[i].sub(&exact[k]));
                triples.push(entry(vec![i, j, k], value));
            }
        }
    }
    let certified = pairs.iter().chain(&triples).all(|e| e.nonzero);
    Ok(Certificate1D {
        pairs,
        triples,
        certified,
    })
}

/// Coefficients i.i.d. uniform on `[-1, 1]` in monomial basis order.
pub fn random_instance(n: usize, d: usize, r: usize, seed: u64) -> Result<Instance> {
    if n == 0 || d == 0 || r == 0 {
        return Err(CspError::Precondition(
            "random_instance needs n, d, r >= 1".into(),
        ));
    }
    let m = monomial_count(n, d)?;
    let total = m
        .checked_mul(r)
        .ok_or(CspError::Overflow("coefficient vector"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..total).map(|_| rng.random_range(-1.0..=1.0)).collect();
    Instance::from_coeff_vector(&u, n, d, r)
}

/// Bounds summary for a parameter triple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub l: usize,
    #[serde(serialize_with = "serialize_biguint")]
    pub b0: BigUint,
    #[serde(serialize_with = "serialize_biguint")]
    pub n_bound: BigUint,
    #[serde(serialize_with = "serialize_biguint")]
    pub loja_exponent: BigUint,
}

pub fn bounds_report(n: usize, d: usize, r: usize, l: usize) -> Result<BoundsReport> {
    Ok(BoundsReport {
        n,
        d,
        r,
        l,
        b0: bound_b0(n, d, r)?,
        n_bound: bound_n(n, d, l)?,
        loja_exponent: loja_exponent(n, d, r)?,
    })
}
