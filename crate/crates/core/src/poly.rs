//! Sparse multivariate polynomials over the canonical monomial basis.
//!
//! Monomials are ordered graded-lexicographically in the order of the basis
//! vector `(1, x1, ..., xn, x1^2, x1*x2, ..., x1*xn, x2^2, ..., xn^d)`: first by
//! total degree, then lexicographically with larger leading exponents first.
//! Coefficient vectors produced by [`Polynomial::coeff_vector`] follow this
//! order exactly, and [`Polynomial::eval`] accumulates terms in it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{CspError, Result};

/// A multi-index `alpha` in `N^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|alpha|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).fold(
            1.0,
            |acc, (&e, &xi)| if e == 0 { acc } else { acc * xi.powi(e as i32) },
        )
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Number of monomials in `n` variables of total degree at most `d`,
/// i.e. `binomial(n + d, n)`.
pub fn monomial_count(n: usize, d: usize) -> Result<usize> {
    // C(n+d, k) built incrementally; each partial product is itself a binomial
    // coefficient so the division is exact.
    let mut acc: usize = 1;
    for k in 1..=n {
        let num = d
            .checked_add(k)
            .ok_or(CspError::Overflow("monomial_count"))?;
        acc = acc
            .checked_mul(num)
            .ok_or(CspError::Overflow("monomial_count"))?
            / k;
    }
    Ok(acc)
}

/// All monomials of total degree at most `d` in `n` variables, in basis order.
pub fn monomials(n: usize, d: usize) -> Vec<Monomial> {
    fn fill(rest: &mut Vec<u32>, remaining: u32, slots: usize, out: &mut Vec<Monomial>) {
        if slots == 1 {
            rest.push(remaining);
            out.push(Monomial(rest.clone()));
            rest.pop();
            return;
        }
        for e in (0..=remaining).rev() {
            rest.push(e);
            fill(rest, remaining - e, slots - 1, out);
            rest.pop();
        }
    }

    let mut out = Vec::new();
    if n == 0 {
        out.push(Monomial(Vec::new()));
        return out;
    }
    for deg in 0..=d as u32 {
        fill(&mut Vec::with_capacity(n), deg, n, &mut out);
    }
    out
}

/// Sparse polynomial in `n` variables with `f64` coefficients. Zero
/// coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Monomial::one(n), c);
        p
    }

    /// The coordinate function `x_k` (0-based `k`).
    pub fn var(n: usize, k: usize) -> Self {
        let mut e = vec![0; n];
        e[k] = 1;
        let mut p = Self::zero(n);
        p.add_term(Monomial(e), 1.0);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs. Repeated
    /// monomials are summed.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(n);
        for (exps, c) in terms {
            if exps.len() != n {
                return Err(CspError::DimensionMismatch {
                    expected: n,
                    got: exps.len(),
                });
            }
            p.add_term(Monomial(exps), c);
        }
        Ok(p)
    }

    /// Dense univariate constructor, coefficients from the constant term up.
    pub fn univariate(coeffs: &[f64]) -> Self {
        let mut p = Self::zero(1);
        for (k, &c) in coeffs.iter().enumerate() {
            p.add_term(Monomial(vec![k as u32]), c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, exps: &[u32]) -> f64 {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .copied()
            .unwrap_or(0.0)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(CspError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, &c)| c * m.eval(x)).sum()
    }

    /// Formal partial derivative with respect to `x_k` (0-based).
    pub fn partial(&self, k: usize) -> Polynomial {
        let mut out = Self::zero(self.n);
        for (m, &c) in &self.terms {
            let e = m.0[k];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[k] -= 1;
            out.add_term(Monomial(exps), c * e as f64);
        }
        out
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.gradient_unchecked(x))
    }

    pub(crate) fn gradient_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|k| self.partial(k).eval_unchecked(x))
            .collect()
    }

    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        Ok(self.hessian_unchecked(x))
    }

    pub(crate) fn hessian_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            let di = self.partial(i);
            for j in i..n {
                let v = di.partial(j).eval_unchecked(x);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }

    /// Coefficients in basis order for degree bound `d`.
    pub fn coeff_vector(&self, d: usize) -> Result<Vec<f64>> {
        if let Some(deg) = self.degree() {
            if deg as usize > d {
                return Err(CspError::InvalidInstance(format!(
                    "polynomial of degree {deg} exceeds bound {d}"
                )));
            }
        }
        Ok(monomials(self.n, d)
            .iter()
            .map(|m| self.terms.get(m).copied().unwrap_or(0.0))
            .collect())
    }

    /// Inverse of [`Polynomial::coeff_vector`].
    pub fn from_coeff_vector(u: &[f64], n: usize, d: usize) -> Result<Self> {
        let expected = monomial_count(n, d)?;
        if u.len() != expected {
            return Err(CspError::LengthMismatch {
                expected,
                got: u.len(),
            });
        }
        let mut p = Self::zero(n);
        for (m, &c) in monomials(n, d).into_iter().zip(u) {
            p.add_term(m, c);
        }
        Ok(p)
    }

    /// Dense coefficients (constant term first) of a univariate polynomial.
    pub fn univariate_coeffs(&self) -> Result<Vec<f64>> {
        if self.n != 1 {
            return Err(CspError::NotUnivariate(self.n));
        }
        let deg = self.degree().unwrap_or(0) as usize;
        let mut out = vec![0.0; deg + 1];
        for (m, &c) in &self.terms {
            out[m.0[0] as usize] = c;
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Self::zero(self.n);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.n, rhs.n, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.n, rhs.n, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.n, rhs.n, "polynomial dimension mismatch");
        let mut out = Polynomial::zero(self.n);
        for (ma, &a) in &self.terms {
            for (mb, &b) in &rhs.terms {
                let exps = ma.0.iter().zip(&mb.0).map(|(x, y)| x + y).collect();
                out.add_term(Monomial(exps), a * b);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest degree first reads more naturally.
        for (idx, (m, &c)) in self.terms.iter().rev().enumerate() {
            let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
            if idx == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mut factors = Vec::new();
            for (k, &e) in m.0.iter().enumerate() {
                let name = if self.n == 1 {
                    "x".to_string()
                } else {
                    format!("x{}", k + 1)
                };
                match e {
                    0 => {}
                    1 => factors.push(name),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{mag}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// A family `f_1, ..., f_r` of polynomials in `n` variables with degree at
/// most `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    n: usize,
    d: usize,
    polys: Vec<Polynomial>,
}

impl Instance {
    pub fn new(n: usize, d: usize, polys: Vec<Polynomial>) -> Result<Self> {
        if n == 0 {
            return Err(CspError::InvalidInstance("n must be at least 1".into()));
        }
        if polys.is_empty() {
            return Err(CspError::InvalidInstance(
                "at least one polynomial is required".into(),
            ));
        }
        for (i, p) in polys.iter().enumerate() {
            if p.dim() != n {
                return Err(CspError::InvalidInstance(format!(
                    "polynomial {} has dimension {}, expected {n}",
                    i + 1,
                    p.dim()
                )));
            }
            if let Some(deg) = p.degree() {
                if deg as usize > d {
                    return Err(CspError::InvalidInstance(format!(
                        "polynomial {} has degree {deg} > d = {d}",
                        i + 1
                    )));
                }
            }
            if p.terms().any(|(_, c)| !c.is_finite()) {
                return Err(CspError::InvalidInstance(format!(
                    "polynomial {} has a non-finite coefficient",
                    i + 1
                )));
            }
        }
        Ok(Instance { n, d, polys })
    }

    /// Instance whose degree bound is the largest degree present (at least 1).
    pub fn from_polys(polys: Vec<Polynomial>) -> Result<Self> {
        let n = polys.first().map(Polynomial::dim).unwrap_or(0);
        let d = polys
            .iter()
            .filter_map(Polynomial::degree)
            .max()
            .unwrap_or(0)
            .max(1) as usize;
        Self::new(n, d, polys)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.polys.len()
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn poly(&self, i: usize) -> &Polynomial {
        &self.polys[i]
    }

    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(CspError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.polys.iter().map(|p| p.eval_unchecked(x)).collect())
    }

    /// The parameter vector `u = (u^(1), ..., u^(r))`, `r * n(d)` entries.
    pub fn coeff_vector(&self) -> Vec<f64> {
        self.polys
            .iter()
            .flat_map(|p| {
                p.coeff_vector(self.d)
                    .expect("degree checked at construction")
            })
            .collect()
    }

    pub fn from_coeff_vector(u: &[f64], n: usize, d: usize, r: usize) -> Result<Self> {
        let len = monomial_count(n, d)?;
        let expected = len.checked_mul(r).ok_or(CspError::Overflow("r * n(d)"))?;
        if u.len() != expected {
            return Err(CspError::LengthMismatch {
                expected,
                got: u.len(),
            });
        }
        let polys = u
            .chunks(len)
            .map(|c| Polynomial::from_coeff_vector(c, n, d))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, d, polys)
    }

    /// Removes repeated polynomials, keeping the first occurrence. Returns the
    /// collapsed instance and, for each kept polynomial, the original indices
    /// it represents.
    pub fn collapse_duplicates(&self) -> (Instance, Vec<Vec<usize>>) {
        let mut kept: Vec<Polynomial> = Vec::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, p) in self.polys.iter().enumerate() {
            match kept.iter().position(|q| q == p) {
                Some(k) => groups[k].push(i),
                None => {
                    kept.push(p.clone());
                    groups.push(vec![i]);
                }
            }
        }
        let inst = Instance {
            n: self.n,
            d: self.d,
            polys: kept,
        };
        (inst, groups)
    }

    /// First pair of identical polynomials, if any.
    pub fn find_duplicate(&self) -> Option<(usize, usize)> {
        for i in 0..self.polys.len() {
            for j in i + 1..self.polys.len() {
                if self.polys[i] == self.polys[j] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Same instance with polynomials reordered: new position `k` holds old
    /// polynomial `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Instance {
        Instance {
            n: self.n,
            d: self.d,
            polys: perm.iter().map(|&k| self.polys[k].clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_count(n: usize, d: usize) -> usize {
        // enumerate every exponent vector in [0, d]^n
        let mut count = 0;
        let total = (d + 1).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut sum = 0;
            for _ in 0..n {
                sum += c % (d + 1);
                c /= d + 1;
            }
            if sum <= d {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn monomial_count_examples() {
        assert_eq!(monomial_count(1, 2).unwrap(), 3);
        assert_eq!(monomial_count(2, 2).unwrap(), 6);
        assert_eq!(monomial_count(3, 4).unwrap(), 35);
    }

    #[test]
    fn monomial_count_matches_enumeration() {
        for n in 1..=4 {
            for d in 0..=6 {
                assert_eq!(
                    monomial_count(n, d).unwrap(),
                    brute_count(n, d),
                    "n={n} d={d}"
                );
                assert_eq!(monomials(n, d).len(), brute_count(n, d));
            }
        }
    }

    #[test]
    fn monomial_count_overflow() {
        assert_eq!(
            monomial_count(usize::MAX / 2, usize::MAX / 2),
            Err(CspError::Overflow("monomial_count"))
        );
    }

    #[test]
    fn basis_order() {
        let got: Vec<Vec<u32>> = monomials(2, 2).iter().map(|m| m.exps().to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        let ms = monomials(3, 3);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn eval_examples() {
        let p = Polynomial::univariate(&[-1.0, 0.0, 1.0]);
        assert_eq!(p.eval(&[2.0]).unwrap(), 3.0);
        assert_eq!(Polynomial::zero(3).eval(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let q = Polynomial::from_terms(2, [(vec![1, 1], 1.0), (vec![0, 2], 1.0)]).unwrap();
        assert_eq!(q.eval(&[2.0, 3.0]).unwrap(), 15.0);
        assert!(matches!(
            q.eval(&[1.0]),
            Err(CspError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn derivative_examples() {
        let p = Polynomial::univariate(&[0.0, 0.0, 1.0]);
        assert_eq!(p.gradient(&[3.0]).unwrap(), vec![6.0]);
        assert_eq!(p.hessian(&[3.0]).unwrap()[(0, 0)], 2.0);
        let q = Polynomial::from_terms(2, [(vec![2, 0], 1.0), (vec![1, 1], 1.0)]).unwrap();
        assert_eq!(q.gradient(&[1.0, 1.0]).unwrap(), vec![3.0, 1.0]);
        let h = q.hessian(&[1.0, 1.0]).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn coeff_vector_examples() {
        let p = Polynomial::from_coeff_vector(&[1.0, 0.0, 2.0], 1, 2).unwrap();
        assert_eq!(p, Polynomial::univariate(&[1.0, 0.0, 2.0]));
        assert!(Polynomial::from_coeff_vector(&[0.0; 6], 2, 2)
            .unwrap()
            .is_zero());
        let q = Polynomial::from_coeff_vector(&[3.0, 5.0, 7.0], 2, 1).unwrap();
        assert_eq!(q.coeff(&[0, 0]), 3.0);
        assert_eq!(q.coeff(&[1, 0]), 5.0);
        assert_eq!(q.coeff(&[0, 1]), 7.0);
        assert_eq!(
            Polynomial::from_coeff_vector(&[1.0, 2.0], 1, 2),
            Err(CspError::LengthMismatch {
                expected: 3,
                got: 2
            })
        );
    }

    #[test]
    fn zero_degree_sentinel_and_cancellation() {
        assert_eq!(Polynomial::zero(2).degree(), None);
        let p = Polynomial::univariate(&[1.0, 2.0]);
        assert!((&p - &p).is_zero());
        assert_eq!((&p * &p).degree(), Some(2));
    }

    #[test]
    fn display() {
        let p = Polynomial::univariate(&[1.0, -2.0, 1.0]);
        assert_eq!(p.to_string(), "x^2 - 2*x + 1");
        let q = Polynomial::from_terms(2, [(vec![1, 1], -1.0), (vec![0, 0], 0.5)]).unwrap();
        assert_eq!(q.to_string(), "-x1*x2 + 0.5");
    }

    #[test]
    fn instance_validation_and_collapse() {
        let a = Polynomial::univariate(&[0.0, 1.0]);
        let b = Polynomial::univariate(&[0.0, -1.0]);
        let inst = Instance::new(1, 1, vec![a.clone(), b.clone(), a.clone()]).unwrap();
        assert_eq!(inst.find_duplicate(), Some((0, 2)));
        let (c, groups) = inst.collapse_duplicates();
        assert_eq!(c.r(), 2);
        assert_eq!(groups, vec![vec![0, 2], vec![1]]);
        assert!(Instance::new(1, 0, vec![a.clone()]).is_err());
        assert!(Instance::new(2, 1, vec![a]).is_err());
        assert_eq!(inst.coeff_vector().len(), 3 * 2);
    }
}
