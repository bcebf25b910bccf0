//! Sparse multivariate polynomials with big-integer coefficients.
//!
//! Indeterminates carry a family name and zero, one or two indices, so
//! `x1`, `w[3]` and `a[0,2]` are all first-class. Terms live in a `BTreeMap`
//! keyed by canonically ordered monomials, which keeps printing and
//! serialization deterministic.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("malformed polynomial JSON: {0}")]
    Json(String),
    #[error("no value bound for indeterminate {0}")]
    Unbound(String),
    #[error("division by zero while evaluating")]
    DivisionByZero,
}

fn intern(name: &str) -> &'static str {
    static TABLE: OnceLock<Mutex<HashSet<&'static str>>> = OnceLock::new();
    let mut table = TABLE
        .get_or_init(|| Mutex::new(HashSet::new()))
        .lock()
        .expect("intern table poisoned");
    if let Some(s) = table.get(name) {
        return s;
    }
    let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
    table.insert(leaked);
    leaked
}

/// Interned family name. Cheap to copy; create once outside hot loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Family(&'static str);

impl Family {
    pub fn new(name: &str) -> Family {
        Family(intern(name))
    }

    pub fn name(self) -> &'static str {
        self.0
    }

    pub fn plain(self) -> Indeterminate {
        Indeterminate {
            name: self.0,
            arity: 0,
            idx: [0, 0],
        }
    }

    pub fn at(self, i: u32) -> Indeterminate {
        Indeterminate {
            name: self.0,
            arity: 1,
            idx: [i, 0],
        }
    }

    pub fn at2(self, i: u32, j: u32) -> Indeterminate {
        Indeterminate {
            name: self.0,
            arity: 2,
            idx: [i, j],
        }
    }
}

/// A single indeterminate: family name plus 0–2 indices.
///
/// The number of indices is part of the identity, so `a` (a plain
/// variable), `a[3]` and `a[1,2]` never collide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Indeterminate {
    name: &'static str,
    arity: u8,
    idx: [u32; 2],
}

impl Indeterminate {
    pub fn new(name: &str, indices: &[u32]) -> Indeterminate {
        assert!(indices.len() <= 2, "at most two indices are supported");
        let mut idx = [0, 0];
        idx[..indices.len()].copy_from_slice(indices);
        Indeterminate {
            name: intern(name),
            arity: indices.len() as u8,
            idx,
        }
    }

    pub fn var(name: &str) -> Indeterminate {
        Indeterminate::new(name, &[])
    }

    pub fn family(&self) -> Family {
        Family(self.name)
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn indices(&self) -> &[u32] {
        &self.idx[..self.arity as usize]
    }
}

impl PartialOrd for Indeterminate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Indeterminate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.name
            .cmp(other.name)
            .then_with(|| self.indices().cmp(other.indices()))
    }
}

impl fmt::Display for Indeterminate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.indices() {
            [] => write!(f, "{}", self.name),
            [i] => write!(f, "{}[{}]", self.name, i),
            [i, j] => write!(f, "{}[{},{}]", self.name, i, j),
            _ => unreachable!(),
        }
    }
}

/// Product of indeterminate powers, sorted, with no zero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<(Indeterminate, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_var(v: Indeterminate) -> Monomial {
        Monomial(vec![(v, 1)])
    }

    /// Builds a monomial from arbitrary (indeterminate, exponent) pairs,
    /// merging repeats and dropping zero exponents.
    pub fn from_factors<I: IntoIterator<Item = (Indeterminate, u32)>>(it: I) -> Monomial {
        let mut v: Vec<(Indeterminate, u32)> = it.into_iter().filter(|&(_, e)| e > 0).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Indeterminate, u32)> = Vec::with_capacity(v.len());
        for (x, e) in v {
            match out.last_mut() {
                Some((y, f)) if *y == x => *f += e,
                _ => out.push((x, e)),
            }
        }
        Monomial(out)
    }

    pub fn factors(&self) -> &[(Indeterminate, u32)] {
        &self.0
    }

    pub fn exponent(&self, v: &Indeterminate) -> u32 {
        self.0
            .binary_search_by(|(x, _)| x.cmp(v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Accumulates monomials with multiplicities; cheaper than repeated
/// `MultiPoly` additions inside enumeration loops.
#[derive(Clone, Debug, Default)]
pub struct MonomialCounter(HashMap<Monomial, u64>);

impl MonomialCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, m: Monomial) {
        *self.0.entry(m).or_insert(0) += 1;
    }

    pub fn merge(mut self, other: MonomialCounter) -> MonomialCounter {
        let (mut big, small) = if self.0.len() >= other.0.len() {
            (std::mem::take(&mut self.0), other.0)
        } else {
            (other.0, std::mem::take(&mut self.0))
        };
        for (m, c) in small {
            *big.entry(m).or_insert(0) += c;
        }
        MonomialCounter(big)
    }

    pub fn into_poly(self) -> MultiPoly {
        let terms = self
            .0
            .into_iter()
            .map(|(m, c)| (m, BigInt::from(c)))
            .collect();
        MultiPoly { terms }
    }
}

/// Exact polynomial: monomial → nonzero integer coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, BigInt>,
}

impl MultiPoly {
    pub fn zero() -> MultiPoly {
        MultiPoly::default()
    }

    pub fn one() -> MultiPoly {
        MultiPoly::constant(1)
    }

    pub fn constant<T: Into<BigInt>>(c: T) -> MultiPoly {
        MultiPoly::term(Monomial::one(), c.into())
    }

    pub fn term(m: Monomial, c: BigInt) -> MultiPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MultiPoly { terms }
    }

    pub fn monomial(m: Monomial) -> MultiPoly {
        MultiPoly::term(m, BigInt::one())
    }

    pub fn ind(v: Indeterminate) -> MultiPoly {
        MultiPoly::monomial(Monomial::from_var(v))
    }

    /// A plain (index-free) variable.
    pub fn var(name: &str) -> MultiPoly {
        MultiPoly::ind(Indeterminate::var(name))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff_of(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_else(BigInt::zero)
    }

    /// The constant term, if the polynomial has no other terms.
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn indeterminates(&self) -> Vec<Indeterminate> {
        let mut s: Vec<Indeterminate> = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().map(|&(v, _)| v))
            .collect();
        s.sort();
        s.dedup();
        s
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigInt) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> MultiPoly {
        MultiPoly {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.mul(m), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut result = MultiPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Simultaneous substitution; indeterminates not covered stay symbolic.
    pub fn substitute(&self, s: &Substitution) -> MultiPoly {
        let mut images: HashMap<Indeterminate, Option<MultiPoly>> = HashMap::new();
        let mut powers: HashMap<(Indeterminate, u32), MultiPoly> = HashMap::new();
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut kept: Vec<(Indeterminate, u32)> = Vec::new();
            let mut acc = MultiPoly::constant(c.clone());
            for &(v, e) in &m.0 {
                let img = images.entry(v).or_insert_with(|| s.image(&v));
                match img {
                    None => kept.push((v, e)),
                    Some(p) => {
                        let pw = powers.entry((v, e)).or_insert_with(|| p.pow(e));
                        acc = &acc * pw;
                    }
                }
                if acc.is_zero() {
                    break;
                }
            }
            if acc.is_zero() {
                continue;
            }
            let rest = Monomial(kept);
            for (k, coef) in acc.terms {
                out.add_term(k.mul(&rest), coef);
            }
        }
        out
    }

    /// Evaluates at an exact rational point covering every indeterminate.
    pub fn eval_rational(
        &self,
        point: &HashMap<Indeterminate, BigRational>,
    ) -> Result<BigRational, PolyError> {
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for (v, e) in &m.0 {
                let x = point
                    .get(v)
                    .ok_or_else(|| PolyError::Unbound(v.to_string()))?;
                t *= num_traits::pow(x.clone(), *e as usize);
            }
            total += t;
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let exps: Vec<Value> =
                    m.0.iter()
                        .map(|(v, e)| json!([v.name(), v.indices(), e]))
                        .collect();
                json!({"coeff": c.to_string(), "exps": exps})
            })
            .collect();
        json!({ "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<MultiPoly, PolyError> {
        let bad = |m: &str| PolyError::Json(m.to_string());
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing terms array"))?;
        let mut out = MultiPoly::zero();
        for t in terms {
            let c: BigInt = t
                .get("coeff")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("coeff must be a decimal string"))?
                .parse()
                .map_err(|_| bad("coeff is not an integer"))?;
            let exps = t
                .get("exps")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("missing exps"))?;
            let mut factors = Vec::new();
            for e in exps {
                let arr = e
                    .as_array()
                    .filter(|a| a.len() == 3)
                    .ok_or_else(|| bad("exp entry"))?;
                let name = arr[0].as_str().ok_or_else(|| bad("exp name"))?;
                let idx: Vec<u32> = arr[1]
                    .as_array()
                    .ok_or_else(|| bad("exp indices"))?
                    .iter()
                    .map(|x| x.as_u64().map(|x| x as u32))
                    .collect::<Option<_>>()
                    .ok_or_else(|| bad("index must be a nonnegative integer"))?;
                if idx.len() > 2 {
                    return Err(bad("at most two indices"));
                }
                let pw = arr[2].as_u64().ok_or_else(|| bad("exponent"))? as u32;
                factors.push((Indeterminate::new(name, &idx), pw));
            }
            out.add_term(Monomial::from_factors(factors), c);
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<MultiPoly, PolyError> {
        Parser::new(text).parse_all()
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for MultiPoly {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MultiPoly::parse(s)
    }
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(mut self, rhs: MultiPoly) -> MultiPoly {
        self += &rhs;
        self
    }
}

impl<'a> AddAssign<&'a MultiPoly> for MultiPoly {
    fn add_assign(&mut self, rhs: &MultiPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl AddAssign for MultiPoly {
    fn add_assign(&mut self, rhs: MultiPoly) {
        if self.terms.len() < rhs.terms.len() {
            let small = std::mem::replace(self, rhs);
            for (m, c) in small.terms {
                self.add_term(m, c);
            }
        } else {
            for (m, c) in rhs.terms {
                self.add_term(m, c);
            }
        }
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: MultiPoly) -> MultiPoly {
        &self - &rhs
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        if self.is_zero() || rhs.is_zero() {
            return MultiPoly::zero();
        }
        let (a, b) = if self.terms.len() >= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        if b.terms.len() == 1 {
            let (m, c) = b.terms.iter().next().unwrap();
            let mut out = a.mul_monomial(m);
            if !c.is_one() {
                for v in out.terms.values_mut() {
                    *v *= c;
                }
            }
            return out;
        }
        let mut acc: HashMap<Monomial, BigInt> = HashMap::with_capacity(a.terms.len() * 2);
        for (mb, cb) in &b.terms {
            for (ma, ca) in &a.terms {
                let m = ma.mul(mb);
                let p = ca * cb;
                match acc.get_mut(&m) {
                    Some(c) => *c += p,
                    None => {
                        acc.insert(m, p);
                    }
                }
            }
        }
        MultiPoly {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        &self * &rhs
    }
}

pub fn poly_add(p: &MultiPoly, q: &MultiPoly) -> MultiPoly {
    p + q
}

pub fn poly_mul(p: &MultiPoly, q: &MultiPoly) -> MultiPoly {
    p * q
}

pub fn poly_substitute(p: &MultiPoly, s: &Substitution) -> MultiPoly {
    p.substitute(s)
}

pub fn coeff_of(p: &MultiPoly, m: &Monomial) -> BigInt {
    p.coeff_of(m)
}

type RuleFn = dyn Fn(&[u32]) -> Option<MultiPoly> + Send + Sync;

/// Family-wide substitution: applies to every `name[...]` with the given
/// arity for which the closure returns `Some`.
#[derive(Clone)]
pub struct FamilyRule {
    family: Family,
    arity: u8,
    f: Arc<RuleFn>,
}

impl fmt::Debug for FamilyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FamilyRule({}, arity {})",
            self.family.name(),
            self.arity
        )
    }
}

/// A simultaneous substitution: explicit images first, then family rules
/// in insertion order.
#[derive(Clone, Debug, Default)]
pub struct Substitution {
    explicit: BTreeMap<Indeterminate, MultiPoly>,
    rules: Vec<FamilyRule>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn set(mut self, v: Indeterminate, image: MultiPoly) -> Substitution {
        self.explicit.insert(v, image);
        self
    }

    /// Convenience for registry code: `name` and `image` are literal text.
    pub fn set_text(self, name: &str, image: &str) -> Substitution {
        let v = parse_indeterminate(name).expect("bad indeterminate literal");
        let p = MultiPoly::parse(image).expect("bad polynomial literal");
        self.set(v, p)
    }

    pub fn rule<F>(mut self, family: &str, arity: u8, f: F) -> Substitution
    where
        F: Fn(&[u32]) -> Option<MultiPoly> + Send + Sync + 'static,
    {
        self.rules.push(FamilyRule {
            family: Family::new(family),
            arity,
            f: Arc::new(f),
        });
        self
    }

    pub fn is_empty(&self) -> bool {
        self.explicit.is_empty() && self.rules.is_empty()
    }

    pub fn image(&self, v: &Indeterminate) -> Option<MultiPoly> {
        if let Some(p) = self.explicit.get(v) {
            return Some(p.clone());
        }
        self.rules
            .iter()
            .filter(|r| r.family.0 == v.name && r.arity == v.arity)
            .find_map(|r| (r.f)(v.indices()))
    }

    /// Reads `{"x1": "x", "w[0]": "z", "w[*]": "u", "w[>=1]": "u", "a[*,*]": "1"}`.
    /// `*` matches any index; `>=k` matches indices at least `k`.
    pub fn from_json(v: &Value) -> Result<Substitution, PolyError> {
        let obj = v
            .as_object()
            .ok_or_else(|| PolyError::Json("substitution must be an object".into()))?;
        let mut s = Substitution::new();
        for (key, val) in obj {
            let text = val.as_str().ok_or_else(|| {
                PolyError::Json(format!("value for {key} must be polynomial text"))
            })?;
            let image = MultiPoly::parse(text)?;
            match parse_index_pattern(key)? {
                KeyPattern::Exact(ind) => s = s.set(ind, image),
                KeyPattern::Rule(name, pats) => {
                    let arity = pats.len() as u8;
                    s = s.rule(&name, arity, move |idx| {
                        pats.iter()
                            .zip(idx)
                            .all(|(p, &i)| p.map_or(true, |lo| i >= lo))
                            .then(|| image.clone())
                    });
                }
            }
        }
        Ok(s)
    }
}

enum KeyPattern {
    Exact(Indeterminate),
    Rule(String, Vec<Option<u32>>),
}

fn parse_index_pattern(key: &str) -> Result<KeyPattern, PolyError> {
    let err = |msg: &str| PolyError::Parse {
        pos: 0,
        msg: format!("{msg} in key {key:?}"),
    };
    let Some(open) = key.find('[') else {
        return Ok(KeyPattern::Exact(parse_indeterminate(key)?));
    };
    let name = &key[..open];
    let inner = key[open + 1..]
        .strip_suffix(']')
        .ok_or_else(|| err("missing ]"))?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() > 2 {
        return Err(err("at most two indices"));
    }
    if parts.iter().all(|p| p.parse::<u32>().is_ok()) {
        return Ok(KeyPattern::Exact(parse_indeterminate(key)?));
    }
    let mut pats = Vec::new();
    for p in parts {
        if p == "*" {
            pats.push(None);
        } else if let Some(lo) = p.strip_prefix(">=") {
            pats.push(Some(lo.trim().parse().map_err(|_| err("bad bound"))?));
        } else {
            return Err(err("index pattern must be *, >=k or a number"));
        }
    }
    Ok(KeyPattern::Rule(name.to_string(), pats))
}

/// Parses a lone indeterminate such as `x1`, `w[3]` or `a[0,2]`.
pub fn parse_indeterminate(text: &str) -> Result<Indeterminate, PolyError> {
    let p = MultiPoly::parse(text)?;
    let mut it = p.terms();
    match (it.next(), it.next()) {
        (Some((m, c)), None) if c.is_one() && m.factors().len() == 1 && m.factors()[0].1 == 1 => {
            Ok(m.factors()[0].0)
        }
        _ => Err(PolyError::Parse {
            pos: 0,
            msg: format!("{text:?} is not a single indeterminate"),
        }),
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            s: text.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T, PolyError> {
        Err(PolyError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_all(mut self) -> Result<MultiPoly, PolyError> {
        let p = self.expr()?;
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc += self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = self.unary()?;
        while self.eat(b'*') {
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MultiPoly, PolyError> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.number()?;
            let e: u32 = e.try_into().map_err(|_| PolyError::Parse {
                pos: self.pos,
                msg: "exponent too large".into(),
            })?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<BigInt, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        let t = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(t.parse().unwrap())
    }

    fn atom(&mut self) -> Result<MultiPoly, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let p = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected )");
                }
                Ok(p)
            }
            Some(c) if c.is_ascii_digit() => Ok(MultiPoly::constant(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() {
                    let c = self.s[self.pos];
                    if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let name = std::str::from_utf8(&self.s[start..self.pos])
                    .unwrap()
                    .to_string();
                let mut idx = Vec::new();
                if self.s.get(self.pos) == Some(&b'[') {
                    self.pos += 1;
                    loop {
                        let n = self.number()?;
                        idx.push(u32::try_from(n).map_err(|_| PolyError::Parse {
                            pos: self.pos,
                            msg: "index out of range".into(),
                        })?);
                        if self.eat(b',') {
                            continue;
                        }
                        if self.eat(b']') {
                            break;
                        }
                        return self.err("expected , or ]");
                    }
                    if idx.len() > 2 {
                        return self.err("at most two indices");
                    }
                }
                Ok(MultiPoly::ind(Indeterminate::new(&name, &idx)))
            }
            _ => self.err("expected a number, variable or ("),
        }
    }
}

/// `[n]_{p,q} = sum_{j<n} p^j q^(n-1-j)`.
pub fn pq_int(n: u32, p: &MultiPoly, q: &MultiPoly) -> MultiPoly {
    let mut out = MultiPoly::zero();
    for j in 0..n {
        out += &p.pow(j) * &q.pow(n - 1 - j);
    }
    out
}

/// `[n]_q = 1 + q + ... + q^(n-1)`.
pub fn q_int(n: u32, q: &MultiPoly) -> MultiPoly {
    pq_int(n, &MultiPoly::one(), q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> MultiPoly {
        MultiPoly::parse(s).unwrap()
    }

    #[test]
    fn add_cancels_and_collects() {
        assert!(poly_add(&p("x"), &p("-x")).is_zero());
        assert_eq!(poly_add(&p("2*x*y"), &p("3*x*y")), p("5*x*y"));
        assert_eq!(poly_add(&p("x+y"), &p("y+v")), p("x + 2*y + v"));
    }

    #[test]
    fn mul_examples() {
        assert!(poly_mul(&p("x+y"), &MultiPoly::zero()).is_zero());
        assert_eq!(poly_mul(&p("x+u"), &p("y+v")), p("x*y + x*v + u*y + u*v"));
        assert_eq!(
            poly_mul(&p("x+2*u"), &p("y+2*v")),
            p("x*y + 2*x*v + 2*u*y + 4*u*v")
        );
    }

    #[test]
    fn substitution_examples() {
        let s = Substitution::new()
            .set_text("x1", "x")
            .set_text("y1", "y+v");
        assert_eq!(p("x1*y1").substitute(&s), p("x*(y+v)"));
        let s = Substitution::new().rule("w", 1, |i| (i[0] >= 1).then(|| MultiPoly::var("u")));
        assert_eq!(p("w[3]").substitute(&s), p("u"));
        assert_eq!(p("w[0]").substitute(&s), p("w[0]"));
        assert_eq!(p("x").substitute(&Substitution::new()), p("x"));
    }

    #[test]
    fn coeff_examples() {
        let q = p("x^3 + 3*x^2*y + x*y^2");
        let m =
            Monomial::from_factors([(Indeterminate::var("x"), 2), (Indeterminate::var("y"), 1)]);
        assert_eq!(coeff_of(&q, &m), BigInt::from(3));
        assert_eq!(coeff_of(&MultiPoly::zero(), &m), BigInt::zero());
        let xy =
            Monomial::from_factors([(Indeterminate::var("x"), 1), (Indeterminate::var("y"), 1)]);
        assert_eq!(coeff_of(&p("5*x*y"), &xy), BigInt::from(5));
    }

    #[test]
    fn canonical_text_and_json() {
        let q = p("5*x1^2*w[3] - a[0,2]");
        assert_eq!(q.to_string(), "-a[0,2] + 5*w[3]*x1^2");
        assert_eq!(q.to_string().parse::<MultiPoly>().unwrap(), q);
        let j = p("5*x1^2*w[3]").to_json();
        assert_eq!(
            serde_json::to_string(&j).unwrap(),
            r#"{"terms":[{"coeff":"5","exps":[["w",[3],1],["x1",[],2]]}]}"#
        );
        assert_eq!(MultiPoly::from_json(&j).unwrap(), p("5*x1^2*w[3]"));
    }

    #[test]
    fn arity_is_part_of_identity() {
        assert_ne!(p("a"), p("a[0]"));
        assert_ne!(p("a[0]"), p("a[0,0]"));
        assert_eq!((p("a") + p("a[0]") + p("a[0,0]")).len(), 3);
    }

    #[test]
    fn json_substitution_patterns() {
        let v: Value =
            serde_json::from_str(r#"{"x1":"x","w[0]":"z","w[>=1]":"u","a[*,*]":"2"}"#).unwrap();
        let s = Substitution::from_json(&v).unwrap();
        assert_eq!(p("x1*w[0]*w[4]*a[3,1]").substitute(&s), p("2*x*z*u"));
    }

    #[test]
    fn pq_brackets() {
        assert_eq!(pq_int(3, &p("p"), &p("q")), p("p^2 + p*q + q^2"));
        assert_eq!(pq_int(0, &p("p"), &p("q")), MultiPoly::zero());
        assert_eq!(q_int(3, &p("q")), p("1+q+q^2"));
    }

    #[test]
    fn parse_errors() {
        assert!(MultiPoly::parse("x +").is_err());
        assert!(MultiPoly::parse("a[1,2,3]").is_err());
        assert!(MultiPoly::parse("(x").is_err());
        assert!(parse_indeterminate("x*y").is_err());
    }
}
