//! Exact univariate arithmetic over the rationals: square-free decomposition,
//! Sturm-sequence real-root isolation, and Sylvester resultants.
//!
//! Every `f64` is a dyadic rational, so polynomials with floating-point
//! coefficients are converted without loss and all root counts below are
//! certified. Enclosures are refined by bisection on dyadic endpoints.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{CspError, Result};
use crate::poly::Polynomial;

/// Enclosures are refined until `hi - lo <= 2^-REFINE_BITS` (about 9.1e-13).
pub const REFINE_BITS: u32 = 40;

/// Dense polynomial with rational coefficients, constant term first. The
/// leading coefficient is never zero; the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

pub fn rat(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or(CspError::NonRational)
}

pub fn rat_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `numerator/denominator` rendering used in reports.
pub fn rat_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn two() -> BigRational {
    BigRational::from_integer(BigInt::from(2))
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn from_f64(coeffs: &[f64]) -> Result<Self> {
        Ok(Self::new(
            coeffs.iter().map(|&c| rat(c)).collect::<Result<Vec<_>>>()?,
        ))
    }

    pub fn from_poly(p: &Polynomial) -> Result<Self> {
        Self::from_f64(&p.univariate_coeffs()?)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn sign_at(&self, x: &BigRational) -> i8 {
        sign(&self.eval(x))
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(rat_to_f64).collect()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + rat_to_f64(c))
    }

    pub fn derivative(&self) -> RatPoly {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    pub fn scale(&self, s: &BigRational) -> RatPoly {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let z = BigRational::zero();
        Self::new(
            (0..len)
                .map(|k| self.coeffs.get(k).unwrap_or(&z) + other.coeffs.get(k).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn sub(&self, other: &RatPoly) -> RatPoly {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &RatPoly) -> (RatPoly, RatPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lc = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = &rem[k + dd] / &lc;
            if !c.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn monic(&self) -> RatPoly {
        match self.leading() {
            Some(lc) => self.scale(&lc.recip()),
            None => Self::zero(),
        }
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Square-free factorization (Yun): pairs `(factor, multiplicity)` with
    /// pairwise coprime monic factors of positive degree.
    pub fn square_free_factors(&self) -> Vec<(RatPoly, u32)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let df = self.derivative();
        let a0 = self.gcd(&df);
        let mut b = self.div_rem(&a0).0;
        let c = df.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            b = b.div_rem(&a).0;
            let c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            if a.degree().unwrap_or(0) > 0 {
                out.push((a, i));
            }
            i += 1;
        }
        out
    }

    /// Square-free part `p / gcd(p, p')`, monic.
    pub fn square_free_part(&self) -> RatPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Power of two strictly above the Cauchy bound `1 + max |a_i / a_n|`.
    pub fn root_bound(&self) -> BigRational {
        let lc = self.leading().expect("nonzero polynomial").abs();
        let mut bound = BigRational::one();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let q = c.abs() / &lc;
            if q > bound {
                bound = q;
            }
        }
        bound += BigRational::one();
        let mut b = BigRational::one();
        while b <= bound {
            b *= two();
        }
        b
    }
}

fn sign(x: &BigRational) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Sturm sequence of a square-free polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    chain: Vec<RatPoly>,
}

impl SturmChain {
    pub fn new(p: &RatPoly) -> Self {
        let mut chain = vec![p.clone()];
        let mut prev = p.clone();
        let mut cur = p.derivative();
        while !cur.is_zero() {
            // positive rescaling keeps the signs and tames coefficient growth
            let lc = cur.leading().unwrap().abs();
            cur = cur.scale(&lc.recip());
            chain.push(cur.clone());
            let (_, r) = prev.div_rem(&cur);
            prev = cur;
            cur = r.scale(&-BigRational::one());
        }
        SturmChain { chain }
    }

    pub fn poly(&self) -> &RatPoly {
        &self.chain[0]
    }

    fn variations(&self, x: &BigRational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let s = p.sign_at(x);
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Number of distinct roots in the half-open interval `(a, b]`.
    pub fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        if a >= b {
            return 0;
        }
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// Square-free polynomial with its Sturm chain, shared between the roots it
/// defines.
#[derive(Debug)]
pub struct SquareFree {
    chain: SturmChain,
}

impl SquareFree {
    pub fn new(p: &RatPoly) -> Self {
        SquareFree {
            chain: SturmChain::new(&p.square_free_part()),
        }
    }

    pub fn poly(&self) -> &RatPoly {
        self.chain.poly()
    }
}

/// A real algebraic number isolated by an enclosure `(lo, hi]` of a
/// square-free defining polynomial. `lo == hi` marks a root found exactly at a
/// dyadic point.
#[derive(Clone, Debug)]
pub struct RealRoot {
    lo: BigRational,
    hi: BigRational,
    multiplicity: u32,
    factor: Arc<SquareFree>,
}

impl RealRoot {
    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn defining_poly(&self) -> &RatPoly {
        self.factor.poly()
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / two()
    }

    pub fn approx(&self) -> f64 {
        rat_to_f64(&self.midpoint())
    }

    pub fn width(&self) -> f64 {
        rat_to_f64(&(&self.hi - &self.lo))
    }

    pub fn lo_f64(&self) -> f64 {
        rat_to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        rat_to_f64(&self.hi)
    }

    /// Exact comparison of the root with a rational number.
    pub fn cmp_rational(&self, x: &BigRational) -> Ordering {
        if self.is_exact() {
            return self.lo.cmp(x);
        }
        if &self.hi < x {
            return Ordering::Less;
        }
        if &self.lo >= x {
            return Ordering::Greater;
        }
        if &self.hi == x {
            return if self.factor.poly().eval(x).is_zero() {
                Ordering::Equal
            } else {
                Ordering::Less
            };
        }
        // x strictly inside (lo, hi): the single root is in (lo, x] or (x, hi]
        if self.factor.chain.count(&self.lo, x) == 1 {
            if self.factor.poly().eval(x).is_zero() {
                Ordering::Equal
            } else {
                Ordering::Less
            }
        } else {
            Ordering::Greater
        }
    }

    /// Exact test for `q(root) == 0`.
    pub fn vanishes(&self, q: &RatPoly) -> bool {
        if q.is_zero() {
            return true;
        }
        if self.is_exact() {
            return q.eval(&self.lo).is_zero();
        }
        let g = self.factor.poly().gcd(q);
        if g.degree().unwrap_or(0) == 0 {
            return false;
        }
        SturmChain::new(&g).count(&self.lo, &self.hi) > 0
    }

    /// Exact sign of `q` at the root.
    pub fn sign_of(&self, q: &RatPoly) -> i8 {
        if self.vanishes(q) {
            return 0;
        }
        if self.is_exact() {
            return q.sign_at(&self.lo);
        }
        let qs = SturmChain::new(&q.square_free_part());
        let (mut lo, mut hi) = (self.lo.clone(), self.hi.clone());
        // shrink until q has no root in [lo, hi]; q(root) != 0 guarantees this ends
        loop {
            if qs.count(&lo, &hi) == 0 && !q.eval(&lo).is_zero() {
                return q.sign_at(&hi);
            }
            let mid = (&lo + &hi) / two();
            if self.factor.poly().eval(&mid).is_zero() {
                return q.sign_at(&mid);
            }
            if self.factor.chain.count(&lo, &mid) == 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// Exact ordering of two real roots.
    pub fn cmp_root(&self, other: &RealRoot) -> Ordering {
        if self.same_point(other) {
            return Ordering::Equal;
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        separate(&mut a, &mut b);
        a.midpoint().cmp(&b.midpoint())
    }

    /// Whether two roots are the same real number.
    pub fn same_point(&self, other: &RealRoot) -> bool {
        if self.is_exact() {
            return other.cmp_rational(&self.lo) == Ordering::Equal;
        }
        if other.is_exact() {
            return self.cmp_rational(&other.lo) == Ordering::Equal;
        }
        if self.hi <= other.lo || other.hi <= self.lo {
            return false;
        }
        self.vanishes(other.factor.poly()) && {
            // the common root must sit in both enclosures
            let g = self.factor.poly().gcd(other.factor.poly());
            let lo = (&self.lo).max(&other.lo).clone();
            let hi = (&self.hi).min(&other.hi).clone();
            SturmChain::new(&g).count(&lo, &hi) > 0
        }
    }
}

impl Serialize for RealRoot {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RealRoot", 4)?;
        st.serialize_field("approx", &self.approx())?;
        st.serialize_field("lo", &self.lo_f64())?;
        st.serialize_field("hi", &self.hi_f64())?;
        st.serialize_field("multiplicity", &self.multiplicity)?;
        st.end()
    }
}

/// Sorted, isolated real roots.
#[derive(Clone, Debug, Default, Serialize)]
pub struct IntervalRoots {
    pub roots: Vec<RealRoot>,
}

impl IntervalRoots {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn approx(&self) -> Vec<f64> {
        self.roots.iter().map(RealRoot::approx).collect()
    }
}

/// Shrinks two distinct roots until their enclosures are disjoint.
pub fn separate(a: &mut RealRoot, b: &mut RealRoot) {
    while !(a.hi <= b.lo || b.hi <= a.lo) {
        if a.same_point(b) {
            return;
        }
        if !a.is_exact() {
            bisect_once(a);
        }
        if !b.is_exact() {
            bisect_once(b);
        }
    }
}

/// A rational strictly between two roots with `a < b`.
pub fn rational_between(a: &RealRoot, b: &RealRoot) -> BigRational {
    let (mut a, mut b) = (a.clone(), b.clone());
    separate(&mut a, &mut b);
    while a.hi >= b.lo {
        if !b.is_exact() {
            bisect_once(&mut b);
        }
        if !a.is_exact() {
            bisect_once(&mut a);
        }
    }
    (&a.hi + &b.lo) / two()
}

fn bisect_once(root: &mut RealRoot) {
    let m = (&root.lo + &root.hi) / two();
    if root.factor.poly().eval(&m).is_zero() {
        root.lo = m.clone();
        root.hi = m;
    } else if root.factor.chain.count(&root.lo, &m) == 1 {
        root.hi = m;
    } else {
        root.lo = m;
    }
}

/// Search range for [`real_roots`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RootRange {
    Line,
    /// Closed interval `[lo, hi]`.
    Interval(f64, f64),
}

/// All real roots of a univariate polynomial in the given range.
pub fn real_roots(p: &Polynomial, range: RootRange) -> Result<IntervalRoots> {
    real_roots_rat(&RatPoly::from_poly(p)?, range)
}

pub fn real_roots_rat(p: &RatPoly, range: RootRange) -> Result<IntervalRoots> {
    if p.is_zero() {
        return Err(CspError::ZeroPolynomial);
    }
    let (lo, hi, include_lo) = match range {
        RootRange::Line => {
            if p.degree() == Some(0) {
                return Ok(IntervalRoots::default());
            }
            let b = p.root_bound();
            (-b.clone(), b, false)
        }
        RootRange::Interval(a, b) => {
            if !(a <= b) {
                return Err(CspError::Precondition(format!("empty interval [{a}, {b}]")));
            }
            (rat(a)?, rat(b)?, true)
        }
    };
    let mut roots = Vec::new();
    for (factor, mult) in p.square_free_factors() {
        let sf = Arc::new(SquareFree {
            chain: SturmChain::new(&factor),
        });
        if include_lo && factor.eval(&lo).is_zero() {
            roots.push(RealRoot {
                lo: lo.clone(),
                hi: lo.clone(),
                multiplicity: mult,
                factor: sf.clone(),
            });
        }
        let mut found = Vec::new();
        isolate(&sf.chain, lo.clone(), hi.clone(), &mut found);
        for (a, b) in found {
            roots.push(refine(RealRoot {
                lo: a,
                hi: b,
                multiplicity: mult,
                factor: sf.clone(),
            }));
        }
    }
    roots.sort_by(|a, b| a.cmp_root(b));
    Ok(IntervalRoots { roots })
}

fn isolate(
    chain: &SturmChain,
    a: BigRational,
    b: BigRational,
    out: &mut Vec<(BigRational, BigRational)>,
) {
    let mut stack = vec![(a, b)];
    while let Some((a, b)) = stack.pop() {
        match chain.count(&a, &b) {
            0 => {}
            1 => out.push((a, b)),
            _ => {
                let m = (&a + &b) / two();
                stack.push((m.clone(), b));
                stack.push((a, m));
            }
        }
    }
}

fn refine(mut root: RealRoot) -> RealRoot {
    let target = BigRational::new(BigInt::one(), BigInt::one() << REFINE_BITS);
    if root.factor.poly().eval(&root.hi).is_zero() {
        root.lo = root.hi.clone();
        return root;
    }
    while !root.is_exact() && &root.hi - &root.lo > target {
        bisect_once(&mut root);
    }
    root
}

/// Sylvester resultant `res(f, g) = lc(f)^deg(g) * prod g(roots of f)`,
/// computed as the Sylvester determinant. Zero if either input is zero.
pub fn resultant(f: &RatPoly, g: &RatPoly) -> BigRational {
    let (Some(m), Some(k)) = (f.degree(), g.degree()) else {
        return BigRational::zero();
    };
    let size = m + k;
    if size == 0 {
        return BigRational::one();
    }
    let mut mat = vec![vec![BigRational::zero(); size]; size];
    // rows hold coefficients from the highest degree down
    for row in 0..k {
        for (j, c) in f.coeffs().iter().rev().enumerate() {
            mat[row][row + j] = c.clone();
        }
    }
    for row in 0..m {
        for (j, c) in g.coeffs().iter().rev().enumerate() {
            mat[k + row][row + j] = c.clone();
        }
    }
    determinant(mat)
}

/// `disc(f) = (-1)^(m(m-1)/2) / lc(f) * res(f, f')`.
pub fn discriminant(f: &RatPoly) -> BigRational {
    let Some(m) = f.degree() else {
        return BigRational::zero();
    };
    if m == 0 {
        return BigRational::one();
    }
    let r = resultant(f, &f.derivative()) / f.leading().unwrap();
    if (m * (m - 1) / 2) % 2 == 1 {
        -r
    } else {
        r
    }
}

fn determinant(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..n {
                let sub = &factor * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}
