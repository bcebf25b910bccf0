//! Truncated power series in `t` and continued-fraction expansion.
//!
//! S-fractions `1/(1 - α1 t/(1 - α2 t/...))` and J-fractions
//! `1/(1 - γ0 t - β1 t²/(1 - γ1 t - ...))` are given by coefficient
//! closures and expanded by nested evaluation from the innermost level.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::mpoly::{MultiPoly, PolyError};

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("constant term must be 1")]
    NonUnitConstantTerm,
    #[error("continued fraction terminates: beta_{level} is zero")]
    TerminatedFraction { level: usize, partial: Box<JLevels> },
    #[error("series of order {have} is too short, need order {need}")]
    InsufficientOrder { need: usize, have: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Truncated power series: `coeffs[k]` is the coefficient of `t^k`, k ≤ order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<MultiPoly>,
}

impl PowerSeries {
    pub fn new(order: usize, mut coeffs: Vec<MultiPoly>) -> PowerSeries {
        coeffs.resize(order + 1, MultiPoly::zero());
        PowerSeries { coeffs }
    }

    pub fn one(order: usize) -> PowerSeries {
        PowerSeries::new(order, vec![MultiPoly::one()])
    }

    pub fn zero(order: usize) -> PowerSeries {
        PowerSeries::new(order, Vec::new())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &MultiPoly {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[MultiPoly] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> PowerSeries {
        PowerSeries::new(order, self.coeffs.iter().take(order + 1).cloned().collect())
    }

    pub fn add(&self, other: &PowerSeries) -> PowerSeries {
        let n = self.order().min(other.order());
        PowerSeries::new(
            n,
            (0..=n)
                .map(|k| &self.coeffs[k] + &other.coeffs[k])
                .collect(),
        )
    }

    pub fn sub(&self, other: &PowerSeries) -> PowerSeries {
        let n = self.order().min(other.order());
        PowerSeries::new(
            n,
            (0..=n)
                .map(|k| &self.coeffs[k] - &other.coeffs[k])
                .collect(),
        )
    }

    pub fn mul(&self, other: &PowerSeries) -> PowerSeries {
        let n = self.order().min(other.order());
        let mut out = vec![MultiPoly::zero(); n + 1];
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=n - i {
                if !other.coeffs[j].is_zero() {
                    out[i + j] += &self.coeffs[i] * &other.coeffs[j];
                }
            }
        }
        PowerSeries { coeffs: out }
    }

    pub fn scale(&self, c: &MultiPoly) -> PowerSeries {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplies by `t^k`, keeping the order.
    pub fn shift(&self, k: usize) -> PowerSeries {
        let n = self.order();
        let mut coeffs = vec![MultiPoly::zero(); k.min(n + 1)];
        coeffs.extend(self.coeffs.iter().take((n + 1).saturating_sub(k)).cloned());
        PowerSeries::new(n, coeffs)
    }

    pub fn eval_rational(
        &self,
        point: &std::collections::HashMap<crate::mpoly::Indeterminate, BigRational>,
    ) -> Result<RationalSeries, PolyError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.eval_rational(point))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RationalSeries { coeffs })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order(),
            "coeffs": self.coeffs.iter().map(MultiPoly::to_json).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.coeffs.iter().enumerate() {
            writeln!(f, "t^{k}: {c}")?;
        }
        Ok(())
    }
}

/// `1/s` to the order of `s`; requires constant term exactly 1.
pub fn series_reciprocal(s: &PowerSeries) -> Result<PowerSeries, SeriesError> {
    if s.coeffs[0] != MultiPoly::one() {
        return Err(SeriesError::NonUnitConstantTerm);
    }
    let n = s.order();
    let mut r: Vec<MultiPoly> = Vec::with_capacity(n + 1);
    r.push(MultiPoly::one());
    for m in 1..=n {
        let mut acc = MultiPoly::zero();
        for j in 1..=m {
            if !s.coeffs[j].is_zero() && !r[m - j].is_zero() {
                acc += &s.coeffs[j] * &r[m - j];
            }
        }
        r.push(-acc);
    }
    Ok(PowerSeries { coeffs: r })
}

/// `1 - 1/f`: the generating function of indecomposable objects when `f`
/// counts sequences of them.
pub fn indecomposable_series(f: &PowerSeries) -> Result<PowerSeries, SeriesError> {
    let r = series_reciprocal(f)?;
    Ok(PowerSeries::one(f.order()).sub(&r))
}

pub type CoeffFn = Arc<dyn Fn(usize) -> MultiPoly + Send + Sync>;

/// `α_n` for n ≥ 1.
#[derive(Clone)]
pub struct SFractionSpec {
    alpha: CoeffFn,
}

impl SFractionSpec {
    pub fn new<F: Fn(usize) -> MultiPoly + Send + Sync + 'static>(alpha: F) -> Self {
        SFractionSpec {
            alpha: Arc::new(alpha),
        }
    }

    pub fn alpha(&self, n: usize) -> MultiPoly {
        (self.alpha)(n)
    }
}

/// `γ_n` for n ≥ 0 and `β_n` for n ≥ 1.
#[derive(Clone)]
pub struct JFractionSpec {
    gamma: CoeffFn,
    beta: CoeffFn,
}

impl JFractionSpec {
    pub fn new<G, B>(gamma: G, beta: B) -> Self
    where
        G: Fn(usize) -> MultiPoly + Send + Sync + 'static,
        B: Fn(usize) -> MultiPoly + Send + Sync + 'static,
    {
        JFractionSpec {
            gamma: Arc::new(gamma),
            beta: Arc::new(beta),
        }
    }

    pub fn gamma(&self, n: usize) -> MultiPoly {
        (self.gamma)(n)
    }

    pub fn beta(&self, n: usize) -> MultiPoly {
        (self.beta)(n)
    }
}

#[derive(Clone)]
pub enum FractionSpec {
    S(SFractionSpec),
    J(JFractionSpec),
}

impl FractionSpec {
    pub fn expand(&self, order: usize) -> PowerSeries {
        match self {
            FractionSpec::S(s) => expand_sfraction(s, order),
            FractionSpec::J(j) => expand_jfraction(j, order),
        }
    }

    /// Same series as `expand`, via the path-count recurrence; much cheaper
    /// for large symbolic coefficients.
    pub fn expand_fast(&self, order: usize) -> PowerSeries {
        match self {
            FractionSpec::S(s) => expand_sfraction_paths(s, order),
            FractionSpec::J(j) => expand_jfraction_paths(j, order),
        }
    }

    pub fn as_j(&self) -> JFractionSpec {
        match self {
            FractionSpec::S(s) => contract_s_to_j(s),
            FractionSpec::J(j) => j.clone(),
        }
    }
}

/// `1/(1 - t·X)` where X is given as a series, truncated at `order`.
fn one_over_one_minus(x_shifted: &PowerSeries) -> PowerSeries {
    // x_shifted already has zero constant term
    let u = PowerSeries::one(x_shifted.order()).sub(x_shifted);
    series_reciprocal(&u).expect("constant term is 1 by construction")
}

pub fn expand_sfraction(spec: &SFractionSpec, order: usize) -> PowerSeries {
    expand_sfraction_depth(spec, order, order + 1)
}

/// Nested evaluation with the levels below `depth` replaced by 1.
pub fn expand_sfraction_depth(spec: &SFractionSpec, order: usize, depth: usize) -> PowerSeries {
    // f_k = 1/(1 - α_{k+1} t f_{k+1}); level k only matters to order N-k.
    let mut f = PowerSeries::one(0);
    for k in (0..depth).rev() {
        let ord = order.saturating_sub(k);
        let alpha = spec.alpha(k + 1);
        let inner = PowerSeries::new(ord, f.coeffs.iter().take(ord + 1).cloned().collect());
        let x = inner.scale(&alpha).shift(1);
        f = one_over_one_minus(&x);
    }
    f.truncate(order)
}

pub fn expand_jfraction(spec: &JFractionSpec, order: usize) -> PowerSeries {
    expand_jfraction_depth(spec, order, order / 2 + 1)
}

/// Nested evaluation with the levels below `depth` replaced by 1.
pub fn expand_jfraction_depth(spec: &JFractionSpec, order: usize, depth: usize) -> PowerSeries {
    // f_k = 1/(1 - γ_k t - β_{k+1} t² f_{k+1}); level k matters to order N-2k.
    let mut f = PowerSeries::one(0);
    for k in (0..depth).rev() {
        let ord = order.saturating_sub(2 * k);
        let mut x = vec![MultiPoly::zero(); ord + 1];
        if ord >= 1 {
            x[1] = spec.gamma(k);
        }
        if ord >= 2 {
            let beta = spec.beta(k + 1);
            for j in 2..=ord {
                if let Some(c) = f.coeffs.get(j - 2) {
                    x[j] += &beta * c;
                }
            }
        }
        f = one_over_one_minus(&PowerSeries::new(ord, x));
    }
    f.truncate(order)
}

/// J-fraction expansion by summing weighted Motzkin paths height by height.
pub fn expand_jfraction_paths(spec: &JFractionSpec, order: usize) -> PowerSeries {
    let hmax = order / 2;
    let gamma: Vec<MultiPoly> = (0..=hmax).map(|h| spec.gamma(h)).collect();
    let beta: Vec<MultiPoly> = (0..=hmax + 1)
        .map(|h| {
            if h == 0 {
                MultiPoly::zero()
            } else {
                spec.beta(h)
            }
        })
        .collect();
    let mut cur = vec![MultiPoly::zero(); hmax + 2];
    cur[0] = MultiPoly::one();
    let mut coeffs = vec![MultiPoly::one()];
    for m in 1..=order {
        let top = m.min(order - m);
        let mut next = vec![MultiPoly::zero(); hmax + 2];
        for (h, slot) in next.iter_mut().enumerate().take(top + 1) {
            let mut acc = MultiPoly::zero();
            if h >= 1 && !cur[h - 1].is_zero() {
                acc += &cur[h - 1];
            }
            if !cur[h].is_zero() && !gamma[h].is_zero() {
                acc += &gamma[h] * &cur[h];
            }
            if h + 1 <= hmax && !cur[h + 1].is_zero() && !beta[h + 1].is_zero() {
                acc += &beta[h + 1] * &cur[h + 1];
            }
            *slot = acc;
        }
        coeffs.push(next[0].clone());
        cur = next;
    }
    PowerSeries::new(order, coeffs)
}

/// S-fraction expansion by summing weighted Dyck paths.
pub fn expand_sfraction_paths(spec: &SFractionSpec, order: usize) -> PowerSeries {
    let alpha: Vec<MultiPoly> = (0..=order)
        .map(|h| {
            if h == 0 {
                MultiPoly::zero()
            } else {
                spec.alpha(h)
            }
        })
        .collect();
    let mut cur = vec![MultiPoly::zero(); order + 2];
    cur[0] = MultiPoly::one();
    let mut coeffs = vec![MultiPoly::one()];
    for step in 1..=2 * order {
        let top = step.min(2 * order - step);
        let mut next = vec![MultiPoly::zero(); order + 2];
        for (h, slot) in next.iter_mut().enumerate().take(top + 1) {
            let mut acc = MultiPoly::zero();
            if h >= 1 && !cur[h - 1].is_zero() {
                acc += &cur[h - 1];
            }
            if h < order && !cur[h + 1].is_zero() {
                acc += &alpha[h + 1] * &cur[h + 1];
            }
            *slot = acc;
        }
        if step % 2 == 0 {
            coeffs.push(next[0].clone());
        }
        cur = next;
    }
    PowerSeries::new(order, coeffs)
}

/// γ0 = α1, γn = α2n + α2n+1, βn = α2n-1 α2n.
pub fn contract_s_to_j(spec: &SFractionSpec) -> JFractionSpec {
    let a = spec.clone();
    let b = spec.clone();
    JFractionSpec::new(
        move |n| {
            if n == 0 {
                a.alpha(1)
            } else {
                &a.alpha(2 * n) + &a.alpha(2 * n + 1)
            }
        },
        move |n| &b.alpha(2 * n - 1) * &b.alpha(2 * n),
    )
}

/// Multiplies α1 (S) or γ0 and β1 (J) by ζ; counts connected components.
pub fn attach_component_weight(spec: &FractionSpec, zeta: &MultiPoly) -> FractionSpec {
    match spec {
        FractionSpec::S(s) => {
            let s = s.clone();
            let z = zeta.clone();
            FractionSpec::S(SFractionSpec::new(move |n| {
                if n == 1 {
                    &z * &s.alpha(1)
                } else {
                    s.alpha(n)
                }
            }))
        }
        FractionSpec::J(j) => {
            let (j1, j2) = (j.clone(), j.clone());
            let (z1, z2) = (zeta.clone(), zeta.clone());
            FractionSpec::J(JFractionSpec::new(
                move |n| {
                    if n == 0 {
                        &z1 * &j1.gamma(0)
                    } else {
                        j1.gamma(n)
                    }
                },
                move |n| {
                    if n == 1 {
                        &z2 * &j2.beta(1)
                    } else {
                        j2.beta(n)
                    }
                },
            ))
        }
    }
}

/// Truncated series with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalSeries {
    coeffs: Vec<BigRational>,
}

impl RationalSeries {
    pub fn new(coeffs: Vec<BigRational>) -> RationalSeries {
        assert!(!coeffs.is_empty(), "a series has at least a constant term");
        RationalSeries { coeffs }
    }

    pub fn from_integers(v: &[i64]) -> RationalSeries {
        RationalSeries::new(
            v.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect(),
        )
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    fn reciprocal(&self) -> RationalSeries {
        let n = self.order();
        let c0 = &self.coeffs[0];
        let mut r = vec![c0.recip()];
        for m in 1..=n {
            let mut acc = BigRational::zero();
            for j in 1..=m {
                acc += &self.coeffs[j] * &r[m - j];
            }
            r.push(-acc / c0);
        }
        RationalSeries { coeffs: r }
    }
}

/// Peeled J-fraction levels: `gamma[0..=k]`, `beta[0]` unused, `beta[1..=k]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JLevels {
    pub gamma: Vec<BigRational>,
    pub beta: Vec<BigRational>,
}

/// Recovers γ0..γk and β1..βk from a series with constant term 1.
pub fn jfraction_from_series(s: &RationalSeries, depth: usize) -> Result<JLevels, SeriesError> {
    if !s.coeffs[0].is_one() {
        return Err(SeriesError::NonUnitConstantTerm);
    }
    let need = 2 * depth + 1;
    if s.order() < need {
        return Err(SeriesError::InsufficientOrder {
            need,
            have: s.order(),
        });
    }
    let mut out = JLevels {
        gamma: Vec::new(),
        beta: vec![BigRational::zero()],
    };
    let mut cur = s.clone();
    for k in 0..=depth {
        let r = cur.reciprocal();
        let g = -r.coeffs[1].clone();
        out.gamma.push(g.clone());
        if k == depth {
            break;
        }
        // r - 1 + γ t = -β t² s'
        let u: Vec<BigRational> = r.coeffs[2..].iter().map(|c| -c.clone()).collect();
        let b = u[0].clone();
        if b.is_zero() {
            return Err(SeriesError::TerminatedFraction {
                level: k + 1,
                partial: Box::new(out),
            });
        }
        out.beta.push(b.clone());
        cur = RationalSeries {
            coeffs: u.into_iter().map(|c| c / &b).collect(),
        };
    }
    Ok(out)
}

/// Rational J-fraction expansion (path recurrence); `beta[0]` is ignored.
pub fn expand_jfraction_rational(
    gamma: &[BigRational],
    beta: &[BigRational],
    order: usize,
) -> RationalSeries {
    let g = |h: usize| gamma.get(h).cloned().unwrap_or_else(BigRational::zero);
    let b = |h: usize| beta.get(h).cloned().unwrap_or_else(BigRational::zero);
    let mut cur = vec![BigRational::zero(); order + 2];
    cur[0] = BigRational::one();
    let mut coeffs = vec![BigRational::one()];
    for _ in 1..=order {
        let mut next = vec![BigRational::zero(); order + 2];
        for h in 0..=order {
            let mut acc = &g(h) * &cur[h];
            if h >= 1 {
                acc += &cur[h - 1];
            }
            acc += &b(h + 1) * &cur[h + 1];
            next[h] = acc;
        }
        coeffs.push(next[0].clone());
        cur = next;
    }
    RationalSeries { coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: i64) -> MultiPoly {
        MultiPoly::constant(n)
    }

    fn ints(s: &PowerSeries) -> Vec<i64> {
        s.coeffs()
            .iter()
            .map(|p| i64::try_from(p.as_constant().expect("numeric")).unwrap())
            .collect()
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn reciprocal_examples() {
        let s = PowerSeries::new(5, vec![c(1), c(-1)]);
        assert_eq!(ints(&series_reciprocal(&s).unwrap()), vec![1; 6]);
        assert_eq!(
            ints(&series_reciprocal(&PowerSeries::one(3)).unwrap()),
            vec![1, 0, 0, 0]
        );
        let fact = PowerSeries::new(4, [1, 1, 2, 6, 24].map(c).to_vec());
        let r = series_reciprocal(&fact).unwrap();
        assert_eq!(ints(&r), vec![1, -1, -1, -3, -13]);
        assert_eq!(ints(&fact.mul(&r)), vec![1, 0, 0, 0, 0]);
        let bad = PowerSeries::new(2, vec![c(2)]);
        assert!(matches!(
            series_reciprocal(&bad),
            Err(SeriesError::NonUnitConstantTerm)
        ));
    }

    #[test]
    fn classic_sfractions() {
        let odd = SFractionSpec::new(|n| c(n as i64));
        assert_eq!(ints(&expand_sfraction(&odd, 4)), vec![1, 1, 3, 15, 105]);
        let bell = SFractionSpec::new(|n| if n % 2 == 1 { c(1) } else { c(n as i64 / 2) });
        assert_eq!(ints(&expand_sfraction(&bell, 5)), vec![1, 1, 2, 5, 15, 52]);
        let cat = SFractionSpec::new(|_| c(1));
        assert_eq!(ints(&expand_sfraction(&cat, 5)), vec![1, 1, 2, 5, 14, 42]);
        let fact = SFractionSpec::new(|n| c(n.div_ceil(2) as i64));
        assert_eq!(ints(&expand_sfraction(&fact, 4)), vec![1, 1, 2, 6, 24]);
        assert_eq!(
            ints(&expand_sfraction_paths(&fact, 6)),
            vec![1, 1, 2, 6, 24, 120, 720]
        );
    }

    #[test]
    fn jfraction_examples() {
        let zero = JFractionSpec::new(|_| c(0), |_| c(0));
        assert_eq!(ints(&expand_jfraction(&zero, 3)), vec![1, 0, 0, 0]);
        let fact = SFractionSpec::new(|n| c(n.div_ceil(2) as i64));
        let j = contract_s_to_j(&fact);
        assert_eq!(
            (0..3).map(|n| j.gamma(n)).collect::<Vec<_>>(),
            vec![c(1), c(3), c(5)]
        );
        assert_eq!(
            (1..4).map(|n| j.beta(n)).collect::<Vec<_>>(),
            vec![c(1), c(4), c(9)]
        );
        assert_eq!(ints(&expand_jfraction(&j, 4)), vec![1, 1, 2, 6, 24]);
        assert_eq!(ints(&expand_jfraction_paths(&j, 4)), vec![1, 1, 2, 6, 24]);
    }

    #[test]
    fn contraction_examples() {
        let j = contract_s_to_j(&SFractionSpec::new(|n| c(n as i64)));
        assert_eq!(j.gamma(0), c(1));
        for n in 1..6 {
            assert_eq!(j.gamma(n), c(4 * n as i64 + 1));
            assert_eq!(j.beta(n), c((2 * n * (2 * n - 1)) as i64));
        }
        let j = contract_s_to_j(&SFractionSpec::new(|_| c(1)));
        assert_eq!((j.gamma(0), j.gamma(3), j.beta(2)), (c(1), c(2), c(1)));
    }

    #[test]
    fn peel_examples() {
        let fact = RationalSeries::from_integers(&[1, 1, 2, 6, 24, 120]);
        let lv = jfraction_from_series(&fact, 2).unwrap();
        assert_eq!(lv.gamma, vec![rat(1), rat(3), rat(5)]);
        assert_eq!(lv.beta[1..], [rat(1), rat(4)]);
        let one = RationalSeries::from_integers(&[1, 0, 0, 0]);
        match jfraction_from_series(&one, 1) {
            Err(SeriesError::TerminatedFraction { level: 1, partial }) => {
                assert_eq!(partial.gamma, vec![rat(0)])
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            jfraction_from_series(&fact, 3),
            Err(SeriesError::InsufficientOrder { need: 7, have: 5 })
        ));
    }

    #[test]
    fn indecomposable_examples() {
        let fact = PowerSeries::new(5, [1, 1, 2, 6, 24, 120].map(c).to_vec());
        assert_eq!(
            ints(&indecomposable_series(&fact).unwrap()),
            vec![0, 1, 1, 3, 13, 71]
        );
        assert_eq!(
            ints(&indecomposable_series(&PowerSeries::one(3)).unwrap()),
            vec![0; 4]
        );
        let bell = PowerSeries::new(4, [1, 1, 2, 5, 15].map(c).to_vec());
        assert_eq!(
            ints(&indecomposable_series(&bell).unwrap()),
            vec![0, 1, 1, 2, 6]
        );
    }

    #[test]
    fn component_weight_examples() {
        let z = MultiPoly::var("zeta");
        let s = FractionSpec::S(SFractionSpec::new(|n| c(n.div_ceil(2) as i64)));
        let e = attach_component_weight(&s, &z).expand(3);
        let zz = |a: i64, b: i64, d: i64| {
            &(&z.scale(&BigInt::from(a)) + &z.pow(2).scale(&BigInt::from(b)))
                + &z.pow(3).scale(&BigInt::from(d))
        };
        assert_eq!(e.coeff(1), &z);
        assert_eq!(e.coeff(2), &zz(1, 1, 0));
        assert_eq!(e.coeff(3), &zz(3, 2, 1));
        let same = attach_component_weight(&s, &MultiPoly::one()).expand(5);
        assert_eq!(same, s.expand(5));
    }
}
