//! Continuous selections of a polynomial family.
//!
//! In one variable the real line is cut at every point where two of the
//! polynomials agree. Between consecutive breakpoints all values are pairwise
//! distinct, so a selection is a choice of one polynomial per open interval,
//! subject to continuity at every breakpoint: the labels on both sides must
//! agree in value there. All breakpoint decisions are made with exact
//! rational arithmetic.
//!
//! For any dimension, max-min formulas over leaf indices give selections
//! without a decomposition.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{CspError, Result};
use crate::poly::Instance;
use crate::univariate::{self, rat, real_roots_rat, RatPoly, RealRoot, RootRange};

/// Default cap on the number of materialized selections.
pub const DEFAULT_CAP: usize = 10_000;

/// Sorted set of polynomial indices (0-based internally, 1-based when
/// displayed or serialized).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ActiveSet(Vec<usize>);

impl ActiveSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        ActiveSet(indices)
    }

    pub fn singleton(i: usize) -> Self {
        ActiveSet(vec![i])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_superset(&self, other: &ActiveSet) -> bool {
        other.0.iter().all(|&i| self.contains(i))
    }

    /// Reindexes through `map[old] = new`.
    pub fn remap(&self, map: &[usize]) -> ActiveSet {
        ActiveSet::new(self.0.iter().map(|&i| map[i]).collect())
    }

    /// 1-based indices.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }
}

impl Serialize for ActiveSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl fmt::Display for ActiveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `{i : |f_i(x) - value| <= tol}`; empty is an error.
pub fn active_set(instance: &Instance, value: f64, x: &[f64], tol: f64) -> Result<ActiveSet> {
    let values = instance.values(x)?;
    let idx: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| (v - value).abs() <= tol)
        .map(|(i, _)| i)
        .collect();
    if idx.is_empty() {
        return Err(CspError::EmptyActiveSet { value, tol });
    }
    Ok(ActiveSet(idx))
}

/// A point where at least two polynomials agree, with the partition of all
/// indices into classes of equal value there.
#[derive(Clone, Debug, Serialize)]
pub struct Breakpoint {
    pub root: RealRoot,
    pub classes: Vec<ActiveSet>,
}

impl Breakpoint {
    pub fn x(&self) -> f64 {
        self.root.approx()
    }

    pub fn class_of(&self, i: usize) -> &ActiveSet {
        self.classes
            .iter()
            .find(|c| c.contains(i))
            .expect("classes partition all indices")
    }
}

/// Coincidence-set decomposition of the real line for a univariate family.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition1D {
    #[serde(skip)]
    exact: Vec<RatPoly>,
    pub breakpoints: Vec<Breakpoint>,
}

/// Where a point sits relative to the breakpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    /// Open interval `k`: between breakpoints `k - 1` and `k`.
    Interval(usize),
    Breakpoint(usize),
}

impl Decomposition1D {
    pub fn r(&self) -> usize {
        self.exact.len()
    }

    pub fn num_intervals(&self) -> usize {
        self.breakpoints.len() + 1
    }

    pub fn exact_polys(&self) -> &[RatPoly] {
        &self.exact
    }

    /// A rational point strictly inside open interval `k`.
    pub fn interval_sample(&self, k: usize) -> BigRational {
        let m = self.breakpoints.len();
        if m == 0 {
            return BigRational::zero();
        }
        if k == 0 {
            return self.breakpoints[0].root.lo() - BigRational::one();
        }
        if k == m {
            return self.breakpoints[m - 1].root.hi() + BigRational::one();
        }
        let a = self.breakpoints[k - 1].root.hi();
        let b = self.breakpoints[k].root.lo();
        (a + b) / BigRational::from_integer(2.into())
    }

    /// Index order on interval `k`, from the largest value to the smallest.
    pub fn order_on_interval(&self, k: usize) -> Vec<usize> {
        let t = self.interval_sample(k);
        let vals: Vec<BigRational> = self.exact.iter().map(|p| p.eval(&t)).collect();
        let mut idx: Vec<usize> = (0..self.r()).collect();
        idx.sort_by(|&a, &b| vals[b].cmp(&vals[a]).then(a.cmp(&b)));
        idx
    }

    /// Location of an exactly known point.
    pub fn locate_root(&self, t: &RealRoot) -> Location {
        let mut lo = 0;
        let mut hi = self.breakpoints.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.breakpoints[mid].root.cmp_root(t) {
                Ordering::Less => lo = mid + 1,
                Ordering::Equal => return Location::Breakpoint(mid),
                Ordering::Greater => hi = mid,
            }
        }
        Location::Interval(lo)
    }

    pub fn locate(&self, x: f64) -> Result<Location> {
        let xr = rat(x)?;
        // first breakpoint not below x
        let mut lo = 0;
        let mut hi = self.breakpoints.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.breakpoints[mid].root.cmp_rational(&xr) {
                Ordering::Less => lo = mid + 1,
                Ordering::Equal => return Ok(Location::Breakpoint(mid)),
                Ordering::Greater => hi = mid,
            }
        }
        Ok(Location::Interval(lo))
    }
}

/// Builds the coincidence decomposition of a univariate instance.
pub fn decompose_1d(instance: &Instance) -> Result<Decomposition1D> {
    if instance.n() != 1 {
        return Err(CspError::NotUnivariate(instance.n()));
    }
    if let Some((i, j)) = instance.find_duplicate() {
        return Err(CspError::IdenticalPolynomials(i + 1, j + 1));
    }
    let exact = instance
        .polys()
        .iter()
        .map(RatPoly::from_poly)
        .collect::<Result<Vec<_>>>()?;
    let r = exact.len();

    let mut candidates: Vec<RealRoot> = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            let diff = exact[i].sub(&exact[j]);
            candidates.extend(real_roots_rat(&diff, RootRange::Line)?.roots);
        }
    }
    candidates.sort_by(|a, b| a.midpoint().cmp(&b.midpoint()));

    let max_width = candidates.iter().map(RealRoot::width).fold(0.0, f64::max);
    let tol = 10.0 * max_width;
    let mut distinct: Vec<RealRoot> = Vec::new();
    'next: for root in candidates {
        for seen in distinct.iter().rev() {
            if root.approx() - seen.approx() > tol + 1e-300 {
                break;
            }
            if seen.same_point(&root) {
                continue 'next;
            }
        }
        distinct.push(root);
    }
    // enclosures of distinct neighbours must not overlap for the order to be exact
    for k in 1..distinct.len() {
        let (left, right) = distinct.split_at_mut(k);
        univariate::separate(&mut left[k - 1], &mut right[0]);
    }
    distinct.sort_by(|a, b| a.midpoint().cmp(&b.midpoint()));

    let breakpoints = distinct
        .into_iter()
        .map(|root| {
            let mut parent: Vec<usize> = (0..r).collect();
            fn find(p: &mut [usize], i: usize) -> usize {
                let mut i = i;
                while p[i] != i {
                    p[i] = p[p[i]];
                    i = p[i];
                }
                i
            }
            for i in 0..r {
                for j in i + 1..r {
                    if root.vanishes(&exact[i].sub(&exact[j])) {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                }
            }
            let mut classes: Vec<Vec<usize>> = Vec::new();
            let mut rep_of: Vec<Option<usize>> = vec![None; r];
            for i in 0..r {
                let rep = find(&mut parent, i);
                match rep_of[rep] {
                    Some(c) => classes[c].push(i),
                    None => {
                        rep_of[rep] = Some(classes.len());
                        classes.push(vec![i]);
                    }
                }
            }
            Breakpoint {
                root,
                classes: classes.into_iter().map(ActiveSet::new).collect(),
            }
        })
        .collect();
    Ok(Decomposition1D { exact, breakpoints })
}

/// A continuous selection of a univariate family: one polynomial index per
/// open interval of the decomposition.
#[derive(Clone, Debug)]
pub struct UnivariateSelection {
    decomposition: Arc<Decomposition1D>,
    labels: Vec<usize>,
}

impl UnivariateSelection {
    pub fn new(decomposition: Arc<Decomposition1D>, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != decomposition.num_intervals() {
            return Err(CspError::InvalidSelection(format!(
                "{} labels for {} intervals",
                labels.len(),
                decomposition.num_intervals()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= decomposition.r()) {
            return Err(CspError::InvalidSelection(format!(
                "label {} out of range 1..={}",
                bad + 1,
                decomposition.r()
            )));
        }
        for (k, bp) in decomposition.breakpoints.iter().enumerate() {
            if !bp.class_of(labels[k]).contains(labels[k + 1]) {
                return Err(CspError::InvalidSelection(format!(
                    "labels {} and {} disagree at breakpoint {}",
                    labels[k] + 1,
                    labels[k + 1] + 1,
                    bp.x()
                )));
            }
        }
        Ok(UnivariateSelection {
            decomposition,
            labels,
        })
    }

    pub fn decomposition(&self) -> &Decomposition1D {
        &self.decomposition
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Label of the piece used on the given side of a point.
    pub fn piece_left(&self, loc: Location) -> usize {
        match loc {
            Location::Interval(k) => self.labels[k],
            Location::Breakpoint(k) => self.labels[k],
        }
    }

    pub fn piece_right(&self, loc: Location) -> usize {
        match loc {
            Location::Interval(k) => self.labels[k],
            Location::Breakpoint(k) => self.labels[k + 1],
        }
    }

    pub fn value(&self, instance: &Instance, x: f64) -> Result<f64> {
        let loc = self.decomposition.locate(x)?;
        instance.poly(self.piece_left(loc)).eval(&[x])
    }

    /// Exact active set: the singleton label inside an interval, the full
    /// coincidence class of the label at a breakpoint.
    pub fn active_set(&self, x: f64) -> Result<ActiveSet> {
        Ok(match self.decomposition.locate(x)? {
            Location::Interval(k) => ActiveSet::singleton(self.labels[k]),
            Location::Breakpoint(k) => self.decomposition.breakpoints[k]
                .class_of(self.labels[k])
                .clone(),
        })
    }
}

impl Serialize for UnivariateSelection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.labels
            .iter()
            .map(|l| l + 1)
            .collect::<Vec<_>>()
            .serialize(s)
    }
}

/// Result of exact enumeration.
#[derive(Clone, Debug, Serialize)]
pub struct SelectionEnumeration {
    /// Exact number of continuous selections.
    #[serde(serialize_with = "serialize_biguint")]
    pub count: BigUint,
    pub truncated: bool,
    /// Original indices represented by each polynomial of the collapsed family.
    pub groups: Vec<Vec<usize>>,
    pub decomposition: Arc<Decomposition1D>,
    /// Labels index the collapsed family, in lexicographic order.
    pub selections: Vec<UnivariateSelection>,
    #[serde(skip)]
    pub collapsed: Instance,
}

pub fn serialize_biguint<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    use num_traits::ToPrimitive;
    match v.to_u64() {
        Some(x) => s.serialize_u64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

/// Enumerates every continuous selection of a univariate family, after
/// collapsing identical polynomials. At most `cap` selections are
/// materialized; the count is always exact.
pub fn enumerate_selections_1d(instance: &Instance, cap: usize) -> Result<SelectionEnumeration> {
    if instance.n() != 1 {
        return Err(CspError::NotUnivariate(instance.n()));
    }
    let (collapsed, groups) = instance.collapse_duplicates();
    let decomposition = Arc::new(decompose_1d(&collapsed)?);
    let r = collapsed.r();
    let bps = &decomposition.breakpoints;

    // ways[l]: number of valid label prefixes ending with label l
    let mut ways = vec![BigUint::one(); r];
    for bp in bps {
        let mut next = vec![BigUint::zero(); r];
        for class in &bp.classes {
            let total: BigUint = class.indices().iter().map(|&i| ways[i].clone()).sum();
            for &i in class.indices() {
                next[i] = total.clone();
            }
        }
        ways = next;
    }
    let count: BigUint = ways.into_iter().sum();

    let mut selections = Vec::new();
    let mut labels = Vec::with_capacity(bps.len() + 1);
    let mut truncated = false;
    for first in 0..r {
        labels.push(first);
        if !extend(&decomposition, &mut labels, cap, &mut selections) {
            truncated = true;
            break;
        }
        labels.pop();
    }
    Ok(SelectionEnumeration {
        count,
        truncated,
        groups,
        decomposition,
        selections,
        collapsed,
    })
}

/// Depth-first extension in lexicographic order; false once the cap is hit
/// with work remaining.
fn extend(
    decomposition: &Arc<Decomposition1D>,
    labels: &mut Vec<usize>,
    cap: usize,
    out: &mut Vec<UnivariateSelection>,
) -> bool {
    let k = labels.len();
    if k == decomposition.num_intervals() {
        if out.len() >= cap {
            return false;
        }
        out.push(UnivariateSelection {
            decomposition: decomposition.clone(),
            labels: labels.clone(),
        });
        return true;
    }
    let class = decomposition.breakpoints[k - 1]
        .class_of(labels[k - 1])
        .clone();
    for &next in class.indices() {
        labels.push(next);
        let more = extend(decomposition, labels, cap, out);
        labels.pop();
        if !more {
            return false;
        }
    }
    true
}

/// Max-min formula over leaf indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MaxMinExpr {
    Leaf(usize),
    Max(Vec<MaxMinExpr>),
    Min(Vec<MaxMinExpr>),
}

impl MaxMinExpr {
    pub fn max_of(r: usize) -> Self {
        MaxMinExpr::Max((0..r).map(MaxMinExpr::Leaf).collect())
    }

    pub fn min_of(r: usize) -> Self {
        MaxMinExpr::Min((0..r).map(MaxMinExpr::Leaf).collect())
    }

    pub fn validate(&self, r: usize) -> Result<()> {
        match self {
            MaxMinExpr::Leaf(i) if *i < r => Ok(()),
            MaxMinExpr::Leaf(i) => Err(CspError::InvalidSelection(format!(
                "leaf index {} out of range 1..={r}",
                i + 1
            ))),
            MaxMinExpr::Max(c) | MaxMinExpr::Min(c) => {
                if c.is_empty() {
                    return Err(CspError::InvalidSelection("empty max/min node".into()));
                }
                c.iter().try_for_each(|e| e.validate(r))
            }
        }
    }

    /// Chosen index and its value; ties resolve to the first child.
    pub fn eval_indexed(&self, values: &[f64]) -> (usize, f64) {
        match self {
            MaxMinExpr::Leaf(i) => (*i, values[*i]),
            MaxMinExpr::Max(c) => c
                .iter()
                .map(|e| e.eval_indexed(values))
                .reduce(|a, b| if b.1 > a.1 { b } else { a })
                .expect("validated nonempty"),
            MaxMinExpr::Min(c) => c
                .iter()
                .map(|e| e.eval_indexed(values))
                .reduce(|a, b| if b.1 < a.1 { b } else { a })
                .expect("validated nonempty"),
        }
    }

    fn eval_exact(&self, values: &[BigRational]) -> usize {
        match self {
            MaxMinExpr::Leaf(i) => *i,
            MaxMinExpr::Max(c) => c
                .iter()
                .map(|e| e.eval_exact(values))
                .reduce(|a, b| if values[b] > values[a] { b } else { a })
                .unwrap(),
            MaxMinExpr::Min(c) => c
                .iter()
                .map(|e| e.eval_exact(values))
                .reduce(|a, b| if values[b] < values[a] { b } else { a })
                .unwrap(),
        }
    }

    pub fn eval(&self, instance: &Instance, x: &[f64]) -> Result<f64> {
        self.validate(instance.r())?;
        Ok(self.eval_indexed(&instance.values(x)?).1)
    }

    /// The same function as a labeled univariate selection.
    pub fn to_univariate(
        &self,
        decomposition: Arc<Decomposition1D>,
    ) -> Result<UnivariateSelection> {
        self.validate(decomposition.r())?;
        let labels = (0..decomposition.num_intervals())
            .map(|k| {
                let t = decomposition.interval_sample(k);
                let vals: Vec<BigRational> = decomposition
                    .exact_polys()
                    .iter()
                    .map(|p| p.eval(&t))
                    .collect();
                self.eval_exact(&vals)
            })
            .collect();
        UnivariateSelection::new(decomposition, labels)
    }
}

impl fmt::Display for MaxMinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, children) = match self {
            MaxMinExpr::Leaf(i) => return write!(f, "{}", i + 1),
            MaxMinExpr::Max(c) => ("max", c),
            MaxMinExpr::Min(c) => ("min", c),
        };
        write!(f, "{name}(")?;
        for (k, c) in children.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for MaxMinExpr {
    type Err = CspError;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let e = parse_expr(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(CspError::Parse(format!(
                "trailing input at offset {pos} in {s:?}"
            )));
        }
        Ok(e)
    }
}

fn parse_expr(c: &[char], pos: &mut usize) -> Result<MaxMinExpr> {
    let start = *pos;
    if c.get(*pos).is_some_and(char::is_ascii_digit) {
        while c.get(*pos).is_some_and(char::is_ascii_digit) {
            *pos += 1;
        }
        let i: usize = c[start..*pos]
            .iter()
            .collect::<String>()
            .parse()
            .map_err(|e| CspError::Parse(format!("{e}")))?;
        if i == 0 {
            return Err(CspError::Parse("leaf indices are 1-based".into()));
        }
        return Ok(MaxMinExpr::Leaf(i - 1));
    }
    while c.get(*pos).is_some_and(char::is_ascii_alphabetic) {
        *pos += 1;
    }
    let name: String = c[start..*pos].iter().collect();
    if c.get(*pos) != Some(&'(') {
        return Err(CspError::Parse(format!(
            "expected '(' after {name:?} at offset {pos}"
        )));
    }
    *pos += 1;
    let mut children = vec![parse_expr(c, pos)?];
    while c.get(*pos) == Some(&',') {
        *pos += 1;
        children.push(parse_expr(c, pos)?);
    }
    if c.get(*pos) != Some(&')') {
        return Err(CspError::Parse(format!("expected ')' at offset {pos}")));
    }
    *pos += 1;
    match name.as_str() {
        "max" => Ok(MaxMinExpr::Max(children)),
        "min" => Ok(MaxMinExpr::Min(children)),
        other => Err(CspError::Parse(format!("unknown operator {other:?}"))),
    }
}

/// Textual selection specification:
/// `max | min | index:<i> | maxmin:<expr> | piecewise1d:<l0>,<l1>,...`
/// with 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SelectionSpec {
    Max,
    Min,
    Index(usize),
    MaxMin(MaxMinExpr),
    Piecewise1d(Vec<usize>),
}

impl FromStr for SelectionSpec {
    type Err = CspError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_index = |t: &str| -> Result<usize> {
            let i: usize = t
                .trim()
                .parse()
                .map_err(|_| CspError::Parse(format!("bad index {t:?}")))?;
            if i == 0 {
                return Err(CspError::Parse("indices are 1-based".into()));
            }
            Ok(i - 1)
        };
        match s.split_once(':') {
            None if s == "max" => Ok(SelectionSpec::Max),
            None if s == "min" => Ok(SelectionSpec::Min),
            Some(("index", i)) => Ok(SelectionSpec::Index(parse_index(i)?)),
            Some(("maxmin", e)) => Ok(SelectionSpec::MaxMin(e.parse()?)),
            Some(("piecewise1d", l)) => Ok(SelectionSpec::Piecewise1d(
                l.split(',').map(parse_index).collect::<Result<_>>()?,
            )),
            _ => Err(CspError::Parse(format!(
                "unrecognized selection {s:?}; expected max, min, index:i, maxmin:<expr> or piecewise1d:<labels>"
            ))),
        }
    }
}

impl fmt::Display for SelectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionSpec::Max => write!(f, "max"),
            SelectionSpec::Min => write!(f, "min"),
            SelectionSpec::Index(i) => write!(f, "index:{}", i + 1),
            SelectionSpec::MaxMin(e) => write!(f, "maxmin:{e}"),
            SelectionSpec::Piecewise1d(l) => {
                let parts: Vec<String> = l.iter().map(|i| (i + 1).to_string()).collect();
                write!(f, "piecewise1d:{}", parts.join(","))
            }
        }
    }
}

/// A concrete selection bound to an instance.
#[derive(Clone, Debug)]
pub enum Selection {
    Univariate(UnivariateSelection),
    MaxMin(MaxMinExpr),
}

impl Selection {
    /// Univariate instances always resolve to a labeled selection, so that
    /// active sets are exact; other dimensions use the max-min form.
    pub fn resolve(spec: &SelectionSpec, instance: &Instance) -> Result<Selection> {
        let r = instance.r();
        let expr = match spec {
            SelectionSpec::Max => MaxMinExpr::max_of(r),
            SelectionSpec::Min => MaxMinExpr::min_of(r),
            SelectionSpec::Index(i) => MaxMinExpr::Leaf(*i),
            SelectionSpec::MaxMin(e) => e.clone(),
            SelectionSpec::Piecewise1d(labels) => {
                if instance.n() != 1 {
                    return Err(CspError::NotUnivariate(instance.n()));
                }
                let dec = Arc::new(decompose_1d(instance)?);
                return Ok(Selection::Univariate(UnivariateSelection::new(
                    dec,
                    labels.clone(),
                )?));
            }
        };
        expr.validate(r)?;
        if instance.n() == 1 {
            let dec = Arc::new(decompose_1d(instance)?);
            return Ok(Selection::Univariate(expr.to_univariate(dec)?));
        }
        Ok(Selection::MaxMin(expr))
    }

    pub fn value(&self, instance: &Instance, x: &[f64]) -> Result<f64> {
        match self {
            Selection::Univariate(s) => {
                if x.len() != 1 {
                    return Err(CspError::DimensionMismatch {
                        expected: 1,
                        got: x.len(),
                    });
                }
                s.value(instance, x[0])
            }
            Selection::MaxMin(e) => e.eval(instance, x),
        }
    }

    /// Value and active set at `x`. Exact for labeled selections; within
    /// `tol` of the selected value otherwise.
    pub fn value_and_active(
        &self,
        instance: &Instance,
        x: &[f64],
        tol: f64,
    ) -> Result<(f64, ActiveSet)> {
        match self {
            Selection::Univariate(s) => {
                let v = self.value(instance, x)?;
                Ok((v, s.active_set(x[0])?))
            }
            Selection::MaxMin(e) => {
                let v = e.eval(instance, x)?;
                Ok((v, active_set(instance, v, x, tol)?))
            }
        }
    }

    pub fn as_univariate(&self) -> Option<&UnivariateSelection> {
        match self {
            Selection::Univariate(s) => Some(s),
            Selection::MaxMin(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn uni(polys: &[&[f64]]) -> Instance {
        Instance::from_polys(polys.iter().map(|c| Polynomial::univariate(c)).collect()).unwrap()
    }

    fn classes(bp: &Breakpoint) -> Vec<Vec<usize>> {
        bp.classes.iter().map(|c| c.one_based()).collect()
    }

    #[test]
    fn decompose_examples() {
        let d = decompose_1d(&uni(&[&[0.0, 1.0], &[0.0, -1.0]])).unwrap();
        assert_eq!(d.breakpoints.len(), 1);
        assert_eq!(d.breakpoints[0].x(), 0.0);
        assert_eq!(classes(&d.breakpoints[0]), vec![vec![1, 2]]);

        let d = decompose_1d(&uni(&[&[0.0, 0.0, 1.0], &[1.0, -2.0, 1.0]])).unwrap();
        assert_eq!(d.breakpoints.len(), 1);
        assert!((d.breakpoints[0].x() - 0.5).abs() < 1e-12);
        assert_eq!(classes(&d.breakpoints[0]), vec![vec![1, 2]]);

        let d = decompose_1d(&uni(&[&[0.0, 1.0], &[0.0, -1.0], &[0.0, 0.0, 1.0]])).unwrap();
        let xs: Vec<f64> = d.breakpoints.iter().map(Breakpoint::x).collect();
        assert_eq!(xs, vec![-1.0, 0.0, 1.0]);
        assert_eq!(classes(&d.breakpoints[0]), vec![vec![1], vec![2, 3]]);
        assert_eq!(classes(&d.breakpoints[1]), vec![vec![1, 2, 3]]);
        assert_eq!(classes(&d.breakpoints[2]), vec![vec![1, 3], vec![2]]);
    }

    #[test]
    fn decompose_rejects_duplicates_and_multivariate() {
        let e = decompose_1d(&uni(&[&[0.0, 1.0], &[0.0, 1.0]])).unwrap_err();
        assert_eq!(e, CspError::IdenticalPolynomials(1, 2));
        let p = Polynomial::var(2, 0);
        let inst = Instance::from_polys(vec![p]).unwrap();
        assert_eq!(decompose_1d(&inst).unwrap_err(), CspError::NotUnivariate(2));
    }

    #[test]
    fn enumerate_examples() {
        let e = enumerate_selections_1d(&uni(&[&[0.0, 1.0], &[0.0, -1.0]]), DEFAULT_CAP).unwrap();
        assert_eq!(e.count, BigUint::from(4u32));
        let labels: Vec<Vec<usize>> = e.selections.iter().map(|s| s.labels().to_vec()).collect();
        assert_eq!(labels, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);

        let e = enumerate_selections_1d(&uni(&[&[0.0, 0.0, 1.0], &[1.0, -2.0, 1.0]]), 100).unwrap();
        assert_eq!(e.count, BigUint::from(4u32));

        let e = enumerate_selections_1d(&uni(&[&[0.0, 0.0, 0.0, 1.0]]), 100).unwrap();
        assert_eq!(e.count, BigUint::from(1u32));
        assert_eq!(e.selections.len(), 1);
    }

    #[test]
    fn enumerate_with_cap_reports_full_count() {
        let e = enumerate_selections_1d(&uni(&[&[0.0, 1.0], &[0.0, -1.0]]), 2).unwrap();
        assert_eq!(e.count, BigUint::from(4u32));
        assert!(e.truncated);
        assert_eq!(e.selections.len(), 2);
        let e = enumerate_selections_1d(&uni(&[&[0.0, 1.0], &[0.0, -1.0]]), 4).unwrap();
        assert!(!e.truncated);
    }

    #[test]
    fn enumerate_collapses_duplicates() {
        let e =
            enumerate_selections_1d(&uni(&[&[0.0, 1.0], &[0.0, -1.0], &[0.0, 1.0]]), 10).unwrap();
        assert_eq!(e.count, BigUint::from(4u32));
        assert_eq!(e.groups, vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn three_way_coincidence_count() {
        // {x, -x, x^2}: count by hand. Intervals I0..I3 around -1, 0, 1.
        // at -1: {2,3},{1}; at 0: all; at 1: {1,3},{2}.
        let e = enumerate_selections_1d(&uni(&[&[0.0, 1.0], &[0.0, -1.0], &[0.0, 0.0, 1.0]]), 1000)
            .unwrap();
        let mut brute = 0;
        let d = &e.decomposition;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for dd in 0..3 {
                        if UnivariateSelection::new(d.clone(), vec![a, b, c, dd]).is_ok() {
                            brute += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(e.count, BigUint::from(brute as u32));
        assert_eq!(e.selections.len(), brute);
    }

    #[test]
    fn eval_examples() {
        let inst = uni(&[&[0.0, 1.0], &[0.0, -1.0]]);
        let d = Arc::new(decompose_1d(&inst).unwrap());
        let abs = UnivariateSelection::new(d.clone(), vec![1, 0]).unwrap();
        assert_eq!(abs.value(&inst, -3.0).unwrap(), 3.0);
        assert_eq!(abs.value(&inst, 0.0).unwrap(), 0.0);
        assert!(UnivariateSelection::new(d, vec![1]).is_err());

        let inst = uni(&[&[0.0, 1.0], &[0.0, -1.0], &[0.0, 0.0, 1.0]]);
        let e: MaxMinExpr = "max(min(1,2),3)".parse().unwrap();
        assert_eq!(e.eval(&inst, &[2.0]).unwrap(), 4.0);
        assert_eq!(e.to_string(), "max(min(1,2),3)");
    }

    #[test]
    fn breakpoint_values_are_label_independent() {
        let inst = uni(&[&[0.0, 1.0], &[0.0, -1.0], &[0.0, 0.0, 1.0]]);
        let e = enumerate_selections_1d(&inst, 1000).unwrap();
        for bp in &e.decomposition.breakpoints {
            let t = bp.x();
            let vals: Vec<f64> = e
                .selections
                .iter()
                .map(|s| s.value(&inst, t).unwrap())
                .collect();
            // every selection takes a value from the class of its label, and at
            // t = 0 all three agree
            if t == 0.0 {
                assert!(vals.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn active_set_examples() {
        let inst = uni(&[&[0.0, 1.0], &[0.0, -1.0]]);
        assert_eq!(
            active_set(&inst, 0.0, &[0.0], 0.0).unwrap().one_based(),
            vec![1, 2]
        );
        assert_eq!(
            active_set(&inst, 1.0, &[1.0], 0.0).unwrap().one_based(),
            vec![1]
        );
        assert!(matches!(
            active_set(&inst, 5.0, &[1.0], 1e-9),
            Err(CspError::EmptyActiveSet { .. })
        ));
        let inst = uni(&[&[0.0, 0.0, 1.0], &[1.0, -2.0, 1.0]]);
        assert_eq!(
            active_set(&inst, 0.25, &[0.5], 0.0).unwrap().one_based(),
            vec![1, 2]
        );
    }

    #[test]
    fn spec_grammar() {
        assert_eq!("max".parse::<SelectionSpec>().unwrap(), SelectionSpec::Max);
        assert_eq!(
            "index:2".parse::<SelectionSpec>().unwrap(),
            SelectionSpec::Index(1)
        );
        assert_eq!(
            "piecewise1d:2,1".parse::<SelectionSpec>().unwrap(),
            SelectionSpec::Piecewise1d(vec![1, 0])
        );
        let s: SelectionSpec = "maxmin:max(min(1,2), 3)".parse().unwrap();
        assert_eq!(s.to_string(), "maxmin:max(min(1,2),3)");
        assert!("index:0".parse::<SelectionSpec>().is_err());
        assert!("maxmin:avg(1,2)".parse::<SelectionSpec>().is_err());
        assert!("median".parse::<SelectionSpec>().is_err());
    }

    #[test]
    fn resolve_max_to_labels() {
        let inst = uni(&[&[0.0, 1.0], &[0.0, -1.0]]);
        let sel = Selection::resolve(&SelectionSpec::Max, &inst).unwrap();
        assert_eq!(sel.as_univariate().unwrap().labels(), &[1, 0]);
        let (v, a) = sel.value_and_active(&inst, &[0.0], 0.0).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(a.one_based(), vec![1, 2]);
        let (v, a) = sel.value_and_active(&inst, &[-2.0], 0.0).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(a.one_based(), vec![2]);
        let pw = Selection::resolve(&SelectionSpec::Piecewise1d(vec![0, 0]), &inst).unwrap();
        assert_eq!(pw.value(&inst, &[-2.0]).unwrap(), -2.0);
    }
}
