//! Registry of continued-fraction theorems, identities and
//! non-polynomiality witnesses, with exact verification drivers.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::matchstats::{enumerate_matching_polynomial, touchard_riordan};
use crate::mpoly::{pq_int, q_int, Family, Indeterminate, Monomial, MultiPoly, Substitution};
use crate::permstats::{
    enumerate_perm_polynomial, for_each_permutation, perm_stat_totals, PermFamily, Permutation,
    StatsError,
};
use crate::series::{
    attach_component_weight, indecomposable_series, jfraction_from_series, FractionSpec,
    JFractionSpec, RationalSeries, SFractionSpec, SeriesError,
};
use crate::setpartstats::{
    all_set_partitions, enumerate_sp_polynomial, sp_reverse, sp_stat_totals, SPFamily, SetPartition,
};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seed used for randomized checks unless the caller supplies one.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// CF levels compared when checking a specialization against its master.
pub const COHERENCE_LEVELS: usize = 8;

#[derive(Debug, Error)]
pub enum TheoremError {
    #[error("unknown theorem id {0:?}")]
    UnknownTheorem(String),
    #[error("unknown identity id {0:?}")]
    UnknownIdentity(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TheoremKind {
    SFraction,
    JFraction,
    Identity,
    ConjectureForward,
}

/// What gets enumerated. Index n means size n, except for
/// cycle-alternating permutations (size 2n) and matchings (n pairs).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Object {
    Perm(PermFamily),
    SetPart(SPFamily),
    Matching,
    IndecomposableMatching,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkMode {
    /// Same kind of fraction: α against α, or contracted γ/β against γ/β.
    Coefficients,
    /// An S-fraction in t read off a J-fraction in t with γ ≡ 0: α_n = β_n.
    EvenPart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesTransform {
    Plain,
    /// Compare against 1 − 1/F instead of F.
    Indecomposable,
}

/// The specialization that carries a master fraction onto this one.
#[derive(Clone)]
pub struct MasterLink {
    pub master: &'static str,
    pub subst: Substitution,
    pub mode: LinkMode,
}

#[derive(Clone)]
pub struct FractionCase {
    pub object: Object,
    pub weight: &'static str,
    pub subst: Option<Substitution>,
    pub cf: FractionSpec,
    pub transform: SeriesTransform,
    pub master: Option<MasterLink>,
}

pub type SizeCheck = Arc<dyn Fn(usize) -> Result<(), String> + Send + Sync>;
/// (seed, number of points) → number of points checked.
pub type WitnessCheck = fn(u64, usize) -> Result<usize, String>;

#[derive(Clone)]
pub enum Body {
    Fraction(FractionCase),
    Identity { n_min: usize, check: SizeCheck },
    Witness { points: usize, check: WitnessCheck },
}

#[derive(Clone)]
pub struct TheoremCase {
    pub id: &'static str,
    pub kind: TheoremKind,
    pub summary: &'static str,
    pub default_n: usize,
    pub body: Body,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SizeResult {
    pub n: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monomial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub found: Option<String>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoherenceResult {
    pub master: String,
    pub mode: LinkMode,
    pub levels: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub artifact_version: String,
    pub id: String,
    pub kind: TheoremKind,
    pub n_min: usize,
    pub n_max: usize,
    pub order: usize,
    pub seed: u64,
    pub passed: bool,
    pub per_n: Vec<SizeResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherence: Option<CoherenceResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<Discrepancy>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Filled by the drivers; strip it for byte-stable output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl VerificationReport {
    fn new(
        id: &str,
        kind: TheoremKind,
        n_min: usize,
        n_max: usize,
        order: usize,
        seed: u64,
    ) -> Self {
        VerificationReport {
            artifact_version: ARTIFACT_VERSION.to_string(),
            id: id.to_string(),
            kind,
            n_min,
            n_max,
            order,
            seed,
            passed: true,
            per_n: Vec::new(),
            coherence: None,
            discrepancy: None,
            notes: Vec::new(),
            wall_time_ms: None,
        }
    }

    fn record(&mut self, n: usize, outcome: Result<(), Discrepancy>) {
        let ok = outcome.is_ok();
        self.per_n.push(SizeResult { n, passed: ok });
        if let Err(d) = outcome {
            self.passed = false;
            if self.discrepancy.is_none() {
                self.discrepancy = Some(d);
            }
        }
    }

    pub fn without_timing(mut self) -> Self {
        self.wall_time_ms = None;
        self
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub n_max: Option<usize>,
    pub order: Option<usize>,
    pub seed: u64,
    /// Applied to both the enumeration and the expanded fraction.
    pub extra: Option<Substitution>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n_max: None,
            order: None,
            seed: DEFAULT_SEED,
            extra: None,
        }
    }
}

// ---------------------------------------------------------------------------
// coefficient helpers

fn v(name: &str) -> MultiPoly {
    MultiPoly::var(name)
}

fn c(k: i64) -> MultiPoly {
    MultiPoly::constant(k)
}

fn ci(k: u32) -> MultiPoly {
    MultiPoly::constant(k as i64)
}

fn pw(name: &str, e: u32) -> MultiPoly {
    v(name).pow(e)
}

fn at1(f: &str, i: u32) -> MultiPoly {
    MultiPoly::ind(Family::new(f).at(i))
}

fn at2(f: &str, i: u32, j: u32) -> MultiPoly {
    MultiPoly::ind(Family::new(f).at2(i, j))
}

/// Σ_{ℓ=0}^{m} f[ℓ, m−ℓ]
fn star(f: &str, m: u32) -> MultiPoly {
    (0..=m).fold(MultiPoly::zero(), |acc, l| &acc + &at2(f, l, m - l))
}

/// Σ_{ℓ'=0}^{m} f[m, ℓ']
fn natural(f: &str, m: u32) -> MultiPoly {
    (0..=m).fold(MultiPoly::zero(), |acc, l| &acc + &at2(f, m, l))
}

fn pq(n: u32, p: &str, q: &str) -> MultiPoly {
    pq_int(n, &v(p), &v(q))
}

fn qn(n: u32) -> MultiPoly {
    q_int(n, &v("q"))
}

/// p^{n−1} x + q [n−1]_{p,q} u, the recurring record/non-record split.
fn split(n: u32, p: &str, q: &str, x: &MultiPoly, u: &MultiPoly) -> MultiPoly {
    &(&pw(p, n - 1) * x) + &(&(&v(q) * &pq(n - 1, p, q)) * u)
}

fn s_frac<F: Fn(u32) -> MultiPoly + Send + Sync + 'static>(alpha: F) -> FractionSpec {
    FractionSpec::S(SFractionSpec::new(move |k| alpha(k as u32)))
}

/// α_{2j−1} = odd(j), α_{2j} = even(j), j ≥ 1.
fn s_alt<O, E>(odd: O, even: E) -> FractionSpec
where
    O: Fn(u32) -> MultiPoly + Send + Sync + 'static,
    E: Fn(u32) -> MultiPoly + Send + Sync + 'static,
{
    FractionSpec::S(SFractionSpec::new(move |k| {
        let k = k as u32;
        if k % 2 == 1 {
            odd((k + 1) / 2)
        } else {
            even(k / 2)
        }
    }))
}

fn j_frac<G, B>(gamma: G, beta: B) -> FractionSpec
where
    G: Fn(u32) -> MultiPoly + Send + Sync + 'static,
    B: Fn(u32) -> MultiPoly + Send + Sync + 'static,
{
    FractionSpec::J(JFractionSpec::new(
        move |n| gamma(n as u32),
        move |n| beta(n as u32),
    ))
}

/// Builds a substitution from `(key, polynomial text)` pairs; keys may be
/// family patterns such as `w[>=1]` or `c[*,*]`.
fn sub(pairs: &[(&str, &str)]) -> Substitution {
    let mut m = Map::new();
    for (k, t) in pairs {
        m.insert(k.to_string(), Value::String(t.to_string()));
    }
    Substitution::from_json(&Value::Object(m)).expect("registry substitution literal")
}

fn rule1<F>(s: Substitution, fam: &str, f: F) -> Substitution
where
    F: Fn(u32) -> MultiPoly + Send + Sync + 'static,
{
    s.rule(fam, 1, move |i| Some(f(i[0])))
}

fn rule2<F>(s: Substitution, fam: &str, f: F) -> Substitution
where
    F: Fn(u32, u32) -> MultiPoly + Send + Sync + 'static,
{
    s.rule(fam, 2, move |i| Some(f(i[0], i[1])))
}

/// p^ℓ q^ℓ' times `rec` when ℓ' = 0, else `nrec`.
fn crossnest_letter(
    p: &'static str,
    q: &'static str,
    rec: &'static str,
    nrec: &'static str,
) -> impl Fn(u32, u32) -> MultiPoly {
    move |l, m| {
        let base = &pw(p, l) * &pw(q, m);
        &base * &v(if m == 0 { rec } else { nrec })
    }
}

pub fn substitute_spec(spec: &FractionSpec, s: &Substitution) -> FractionSpec {
    match spec {
        FractionSpec::S(a) => {
            let (a, s) = (a.clone(), s.clone());
            FractionSpec::S(SFractionSpec::new(move |k| a.alpha(k).substitute(&s)))
        }
        FractionSpec::J(j) => {
            let (j1, j2, s1, s2) = (j.clone(), j.clone(), s.clone(), s.clone());
            FractionSpec::J(JFractionSpec::new(
                move |n| j1.gamma(n).substitute(&s1),
                move |n| j2.beta(n).substitute(&s2),
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// the fractions themselves

fn cf_perm_2var() -> FractionSpec {
    s_alt(
        |j| &v("x") + &(&ci(j - 1) * &v("u")),
        |j| &v("y") + &(&ci(j - 1) * &v("v")),
    )
}

fn cf_perm_j1() -> FractionSpec {
    j_frac(
        |n| {
            if n == 0 {
                return at1("w", 0);
            }
            let m = ci(n - 1);
            &(&(&v("x2") + &(&m * &v("u2"))) + &(&v("y2") + &(&m * &v("v2")))) + &at1("w", n)
        },
        |n| {
            let m = ci(n - 1);
            &(&v("x1") + &(&m * &v("u1"))) * &(&v("y1") + &(&m * &v("v1")))
        },
    )
}

fn cf_conj_v2() -> FractionSpec {
    j_frac(
        |n| {
            if n == 0 {
                return &v("lam") * &at1("w", 0);
            }
            let m = ci(n - 1);
            let base = &(&v("x2") + &(&m * &v("u2"))) + &(&v("y2") + &(&m * &v("v2")));
            &base + &(&v("lam") * &at1("w", n))
        },
        |n| {
            let m = ci(n - 1);
            &(&(&v("lam") + &m) * &(&v("x1") + &(&m * &v("u1")))) * &v("y1")
        },
    )
}

fn cf_perm_j2_weak() -> FractionSpec {
    j_frac(
        |n| {
            if n == 0 {
                return &v("lam") * &at1("w", 0);
            }
            let base = &(&v("x2") + &(&ci(n - 1) * &v("u2"))) + &(&ci(n) * &v("y2"));
            &base + &(&v("lam") * &at1("w", n))
        },
        |n| {
            let m = ci(n - 1);
            &(&(&v("lam") + &m) * &(&v("x1") + &(&m * &v("u1")))) * &v("y1")
        },
    )
}

fn cf_big() -> FractionSpec {
    j_frac(
        |n| {
            if n == 0 {
                return at1("w", 0);
            }
            let lower = split(n, "pm2", "qm2", &v("x2"), &v("u2"));
            let upper = split(n, "pp2", "qp2", &v("y2"), &v("v2"));
            &(&lower + &upper) + &(&pw("s", n) * &at1("w", n))
        },
        |n| {
            &split(n, "pm1", "qm1", &v("x1"), &v("u1"))
                * &split(n, "pp1", "qp1", &v("y1"), &v("v1"))
        },
    )
}

fn cf_perm_master1() -> FractionSpec {
    j_frac(
        |n| {
            if n == 0 {
                at1("e", 0)
            } else {
                &(&star("c", n - 1) + &star("d", n - 1)) + &at1("e", n)
            }
        },
        |n| &star("a", n - 1) * &star("b", n - 1),
    )
}

fn cf_perm_pq_j2() -> FractionSpec {
    j_frac(
        |n| {
            let lam_w = &(&v("lam") * &pw("s", n)) * &at1("w", n);
            if n == 0 {
                return lam_w;
            }
            let lower = split(n, "pm2", "qm2", &v("x2"), &v("u2"));
            let upper = &(&ci(n) * &pw("pp2", n - 1)) * &v("y2");
            &(&lower + &upper) + &lam_w
        },
        |n| {
            let lam = &v("lam") + &ci(n - 1);
            &(&lam * &split(n, "pm1", "qm1", &v("x1"), &v("u1"))) * &(&pw("pp1", n - 1) * &v("y1"))
        },
    )
}

fn cf_perm_master2() -> FractionSpec {
    j_frac(
        |n| {
            let lam_e = &v("lam") * &at1("e", n);
            if n == 0 {
                return lam_e;
            }
            &(&star("c", n - 1) + &natural("d", n - 1)) + &lam_e
        },
        |n| &(&(&v("lam") + &ci(n - 1)) * &at1("a", n - 1)) * &star("b", n - 1),
    )
}

fn cf_sp_pq_j() -> FractionSpec {
    j_frac(
        |n| {
            if n == 0 {
                return v("x1");
            }
            &(&pw("r", n) * &v("x1")) + &split(n, "p1", "q1", &v("y1"), &v("v1"))
        },
        |n| &v("x2") * &split(n, "p2", "q2", &v("y2"), &v("v2")),
    )
}

fn cf_sp_master() -> FractionSpec {
    j_frac(
        |n| {
            if n == 0 {
                at1("e", 0)
            } else {
                &star("d", n - 1) + &at1("e", n)
            }
        },
        |n| &star("a", n - 1) * &at1("b", n - 1),
    )
}

fn cf_qstirling() -> FractionSpec {
    s_alt(|j| &pw("q", j - 1) * &v("x"), qn)
}

fn cf_match_fourvar() -> FractionSpec {
    s_alt(
        |j| &v("x") + &(&ci(2 * j - 2) * &v("u")),
        |j| &v("y") + &(&ci(2 * j - 1) * &v("v")),
    )
}

fn cf_match_pq() -> FractionSpec {
    s_alt(
        |j| split(2 * j - 1, "pm", "qm", &v("x"), &v("u")),
        |j| split(2 * j, "pp", "qp", &v("y"), &v("v")),
    )
}

// ---------------------------------------------------------------------------
// substitutions linking specializations to masters

/// First permutation master onto the eight-p/q polynomial.
fn master1_to_big() -> Substitution {
    let s = Substitution::new();
    let s = rule2(s, "a", crossnest_letter("pp1", "qp1", "y1", "v1"));
    let s = rule2(s, "b", crossnest_letter("pm1", "qm1", "x1", "u1"));
    let s = rule2(s, "c", crossnest_letter("pm2", "qm2", "x2", "u2"));
    let s = rule2(s, "d", crossnest_letter("pp2", "qp2", "y2", "v2"));
    rule1(s, "e", |l| &pw("s", l) * &at1("w", l))
}

/// Second permutation master onto the λ-weighted p/q polynomial.
fn master2_to_j2() -> Substitution {
    let s = Substitution::new();
    let s = rule1(s, "a", |l| &pw("pp1", l) * &v("y1"));
    let s = rule2(s, "b", crossnest_letter("pm1", "qm1", "x1", "u1"));
    let s = rule2(s, "c", crossnest_letter("pm2", "qm2", "x2", "u2"));
    let s = rule2(s, "d", |l, _| &pw("pp2", l) * &v("y2"));
    rule1(s, "e", |l| &pw("s", l) * &at1("w", l))
}

/// d = a and e_n = b⋆_n − c⋆_{n−1}: the choice that turns the first
/// master J-fraction into an S-fraction.
fn perm_master_s1_subst() -> Substitution {
    let s = rule2(Substitution::new(), "d", |l, m| at2("a", l, m));
    rule1(s, "e", |n| {
        if n == 0 {
            at2("b", 0, 0)
        } else {
            &star("b", n) - &star("c", n - 1)
        }
    })
}

fn perm_master_s2_subst() -> Substitution {
    let s = rule1(Substitution::new(), "e", |l| at1("a", l));
    let s = rule2(s, "c", |l, m| at2("b", l, m));
    rule2(s, "d", |l, _| at1("a", l + 1))
}

/// Set-partition master onto the crossing/nesting polynomial.
fn sp_master_to_pq() -> Substitution {
    let s = rule2(
        Substitution::new(),
        "a",
        crossnest_letter("p2", "q2", "y2", "v2"),
    );
    let s = rule1(s, "b", |_| v("x2"));
    let s = rule2(s, "d", crossnest_letter("p1", "q1", "y1", "v1"));
    rule1(s, "e", |l| &pw("r", l) * &v("x1"))
}

/// Matching master onto the parity-refined p/q polynomial.
fn match_master_to_pq() -> Substitution {
    let s = rule2(Substitution::new(), "a", |l, m| {
        let odd = (l + m) % 2 == 1;
        let (p, q) = if odd { ("pp", "qp") } else { ("pm", "qm") };
        let letter = match (m == 0, odd) {
            (true, false) => "x",
            (true, true) => "y",
            (false, false) => "u",
            (false, true) => "v",
        };
        &(&pw(p, l) * &pw(q, m)) * &v(letter)
    });
    rule1(s, "b", |_| MultiPoly::one())
}

// ---------------------------------------------------------------------------
// registry construction

impl TheoremCase {
    fn fraction(
        id: &'static str,
        summary: &'static str,
        object: Object,
        weight: &'static str,
        cf: FractionSpec,
    ) -> Self {
        let kind = match cf {
            FractionSpec::S(_) => TheoremKind::SFraction,
            FractionSpec::J(_) => TheoremKind::JFraction,
        };
        let symbolic = [
            "master",
            "big",
            "crossnest",
            "qn",
            "sixvar",
            "btilde",
            "ovcov",
        ]
        .iter()
        .any(|w| weight.contains(w));
        let default_n = match object {
            Object::Perm(PermFamily::CycleAlternating) => 4,
            Object::Perm(_) if symbolic => 7,
            Object::Perm(_) => 8,
            Object::SetPart(_) => 9,
            Object::Matching | Object::IndecomposableMatching => 7,
        };
        TheoremCase {
            id,
            kind,
            summary,
            default_n,
            body: Body::Fraction(FractionCase {
                object,
                weight,
                subst: None,
                cf,
                transform: SeriesTransform::Plain,
                master: None,
            }),
        }
    }

    fn identity(
        id: &'static str,
        summary: &'static str,
        n_min: usize,
        default_n: usize,
        check: SizeCheck,
    ) -> Self {
        TheoremCase {
            id,
            kind: TheoremKind::Identity,
            summary,
            default_n,
            body: Body::Identity { n_min, check },
        }
    }

    fn fc(&mut self) -> &mut FractionCase {
        match &mut self.body {
            Body::Fraction(f) => f,
            _ => unreachable!("builder used on a fraction case"),
        }
    }

    fn subst(mut self, s: Substitution) -> Self {
        self.fc().subst = Some(s);
        self
    }

    fn master(mut self, master: &'static str, subst: Substitution) -> Self {
        self.fc().master = Some(MasterLink {
            master,
            subst,
            mode: LinkMode::Coefficients,
        });
        self
    }

    fn even_part_of(mut self, master: &'static str, subst: Substitution) -> Self {
        self.fc().master = Some(MasterLink {
            master,
            subst,
            mode: LinkMode::EvenPart,
        });
        self
    }

    fn indecomposable(mut self) -> Self {
        self.fc().transform = SeriesTransform::Indecomposable;
        self
    }

    fn conjecture(mut self) -> Self {
        self.kind = TheoremKind::ConjectureForward;
        self
    }

    fn n(mut self, n: usize) -> Self {
        self.default_n = n;
        self
    }

    pub fn fraction_case(&self) -> Option<&FractionCase> {
        match &self.body {
            Body::Fraction(f) => Some(f),
            _ => None,
        }
    }
}

const ALL: Object = Object::Perm(PermFamily::All);
const AV321: Object = Object::Perm(PermFamily::Avoid321);
const CA: Object = Object::Perm(PermFamily::CycleAlternating);
const PIND: Object = Object::Perm(PermFamily::Indecomposable);
const SP: Object = Object::SetPart(SPFamily::All);
const SPIND: Object = Object::SetPart(SPFamily::Indecomposable);
const M: Object = Object::Matching;

fn ones(names: &[&str]) -> Substitution {
    let pairs: Vec<(&str, &str)> = names.iter().map(|n| (*n, "1")).collect();
    sub(&pairs)
}

fn zeta() -> MultiPoly {
    v("zeta")
}

fn permutation_cases() -> Vec<TheoremCase> {
    let mut out = vec![
        TheoremCase::fraction(
            "euler.factorial",
            "n! from α_{2k−1} = α_{2k} = k",
            ALL,
            "one",
            s_alt(ci, ci),
        )
        .master("perm.S.2var", ones(&["x", "y", "u", "v"])),
        TheoremCase::fraction(
            "perm.S.2var",
            "antirecords, exclusive records and their complements",
            ALL,
            "arec2var",
            cf_perm_2var(),
        )
        .master(
            "perm.J1",
            sub(&[
                ("x1", "x"),
                ("x2", "x"),
                ("w[0]", "x"),
                ("y1", "y"),
                ("y2", "y"),
                ("u1", "u"),
                ("u2", "u"),
                ("w[>=1]", "u"),
                ("v1", "v"),
                ("v2", "v"),
            ]),
        ),
        TheoremCase::fraction(
            "perm.S.2var.b",
            "cycles in place of antirecords",
            ALL,
            "cyc2var",
            cf_perm_2var(),
        )
        .master("perm.S.2var", Substitution::new()),
        TheoremCase::fraction(
            "perm.stirling",
            "x^cyc y^(n-cyc)",
            ALL,
            "cyc2var",
            s_alt(|j| &v("x") + &(&ci(j - 1) * &v("y")), |j| &ci(j) * &v("y")),
        )
        .subst(sub(&[("u", "y"), ("v", "y")]))
        .master("perm.S.2var.b", sub(&[("u", "y"), ("v", "y")])),
        TheoremCase::fraction(
            "perm.eulerian",
            "x^(n-exc) y^exc",
            ALL,
            "arec2var",
            s_alt(|j| &ci(j) * &v("x"), |j| &ci(j) * &v("y")),
        )
        .subst(sub(&[("u", "x"), ("v", "y")]))
        .master("perm.S.2var", sub(&[("u", "x"), ("v", "y")])),
        TheoremCase::fraction(
            "perm.cyc-exc",
            "cycles and excedances, homogenized",
            ALL,
            "cyc2var",
            s_alt(|j| &v("x") + &(&ci(j - 1) * &v("u")), |j| &ci(j) * &v("y")),
        )
        .subst(sub(&[("v", "y")]))
        .master("perm.S.2var.b", sub(&[("v", "y")])),
        TheoremCase::fraction(
            "perm.dumont-kreweras",
            "a^arec b^erec",
            ALL,
            "dk",
            s_alt(|j| &v("a") + &ci(j - 1), |j| &v("b") + &ci(j - 1)),
        )
        .master(
            "perm.S.2var",
            sub(&[("x", "a"), ("y", "b"), ("u", "1"), ("v", "1")]),
        ),
        TheoremCase::fraction(
            "perm.catalan",
            "321-avoiding permutations are counted by Catalan numbers",
            AV321,
            "one",
            s_frac(|_| c(1)),
        )
        .master("perm.narayana", ones(&["x", "y"])),
        TheoremCase::fraction(
            "perm.narayana",
            "Narayana polynomials on 321-avoiders",
            AV321,
            "arec.erec",
            s_alt(|_| v("x"), |_| v("y")),
        )
        .master("perm.321.S", ones(&["pp", "pm"])),
        TheoremCase::fraction(
            "perm.J1",
            "record and cycle classification with fixed-point levels",
            ALL,
            "qn",
            cf_perm_j1(),
        )
        .master(
            "perm.pq.J.BIG",
            ones(&["pp1", "pp2", "pm1", "pm2", "qp1", "qp2", "qm1", "qm2", "s"]),
        ),
        TheoremCase::fraction(
            "conj.v2.full",
            "λ^cyc refinement with v1 = y1 (conjectured)",
            ALL,
            "qn*cyc",
            cf_conj_v2(),
        )
        .subst(sub(&[("v1", "y1")]))
        .conjecture(),
        TheoremCase::fraction(
            "perm.J2.weak",
            "λ^cyc refinement with v1 = y1 and v2 = y2",
            ALL,
            "qn*cyc",
            cf_perm_j2_weak(),
        )
        .subst(sub(&[("v1", "y1"), ("v2", "y2")]))
        .master(
            "perm.pq.J2",
            ones(&["pp1", "pp2", "pm1", "pm2", "qm1", "qm2", "s"]),
        ),
        TheoremCase::fraction(
            "perm.arec.special",
            "antirecords together with cycles",
            ALL,
            "arec.special",
            j_frac(
                |n| {
                    if n == 0 {
                        return &v("lam") * &v("z");
                    }
                    let lw = &(&v("lam") + &v("z")) * &v("w");
                    &(&lw + &(&ci(n - 1) * &v("u2"))) + &(&ci(n) * &v("y2"))
                },
                |n| {
                    let m = ci(n - 1);
                    &(&(&(&v("lam") + &m) * &(&v("z") + &m)) * &v("u1")) * &v("y1")
                },
            ),
        )
        .master(
            "perm.J2.weak",
            sub(&[
                ("x1", "z*u1"),
                ("x2", "z*w"),
                ("w[0]", "z"),
                ("w[>=1]", "w"),
            ]),
        ),
        TheoremCase::fraction(
            "perm.pq.crossnest.J",
            "refined crossings, nestings, joins and pseudo-nestings",
            ALL,
            "crossnest",
            j_frac(
                |n| {
                    let up = &pq(n, "pp2", "qp2") * &v("rp");
                    let low = &pq(n, "pm2", "qm2") * &v("rm");
                    &(&up + &low) + &pw("s", n)
                },
                |n| &pq(n, "pp1", "qp1") * &pq(n, "pm1", "qm1"),
            ),
        )
        .master(
            "perm.pq.J.BIG",
            sub(&[
                ("x1", "1"),
                ("u1", "1"),
                ("y1", "1"),
                ("v1", "1"),
                ("x2", "rm"),
                ("u2", "rm"),
                ("y2", "rp"),
                ("v2", "rp"),
                ("w[*]", "1"),
            ]),
        ),
        TheoremCase::fraction(
            "perm.pq.crossnest.S",
            "S-fraction corollary of the crossing/nesting J-fraction",
            ALL,
            "crossnest",
            s_alt(|j| pq(j, "pm", "qm"), |j| pq(j, "pp", "qp")),
        )
        .subst(crossnest_s_subst())
        .master("perm.pq.crossnest.J", crossnest_s_subst()),
        TheoremCase::fraction(
            "perm.pq.J.BIG",
            "record classes with eight crossing/nesting variables",
            ALL,
            "big",
            cf_big(),
        )
        .master("perm.masterJ1", master1_to_big()),
        TheoremCase::fraction(
            "perm.pq.S.BIG1",
            "p,q-generalization of the two-variable S-fraction",
            ALL,
            "pq.s.big1",
            s_alt(
                |j| split(j, "pm", "qm", &v("x"), &v("u")),
                |j| split(j, "pp", "qp", &v("y"), &v("v")),
            ),
        )
        .master(
            "perm.pq.J.BIG",
            sub(&[
                ("x1", "x"),
                ("x2", "pm*x"),
                ("y1", "y"),
                ("y2", "y"),
                ("u1", "u"),
                ("u2", "pm*u"),
                ("v1", "v"),
                ("v2", "v"),
                ("w[0]", "x"),
                ("w[>=1]", "u"),
                ("pp1", "pp"),
                ("pp2", "pp"),
                ("pm1", "pm"),
                ("pm2", "pm"),
                ("qp1", "qp"),
                ("qp2", "qp"),
                ("qm1", "qm"),
                ("qm2", "qm"),
                ("s", "qm"),
            ]),
        ),
        TheoremCase::fraction(
            "perm.zeng89",
            "x^arec y^erec q^inv",
            ALL,
            "arec.erec*inv",
            s_alt(
                |j| {
                    let tail = (1..j).fold(MultiPoly::zero(), |acc, i| &acc + &pw("q", i));
                    &pw("q", j - 1) * &(&v("x") + &tail)
                },
                |j| {
                    let tail = (1..j).fold(MultiPoly::zero(), |acc, i| &acc + &pw("q", i));
                    &pw("q", j) * &(&v("y") + &tail)
                },
            ),
        )
        .master(
            "perm.pq.S.BIG1",
            sub(&[
                ("y", "q*y"),
                ("u", "1"),
                ("v", "q"),
                ("pp", "q"),
                ("pm", "q"),
                ("qp", "q^2"),
                ("qm", "q^2"),
            ]),
        ),
        TheoremCase::fraction(
            "perm.masterJ1",
            "first master J-fraction",
            ALL,
            "master1",
            cf_perm_master1(),
        ),
        TheoremCase::fraction(
            "perm.masterS1",
            "first master S-fraction",
            ALL,
            "master1",
            s_alt(|j| star("b", j - 1), |j| star("a", j - 1)),
        )
        .subst(perm_master_s1_subst())
        .master("perm.masterJ1", perm_master_s1_subst()),
        TheoremCase::fraction(
            "perm.pq.J2",
            "λ^cyc with p,q refinement",
            ALL,
            "big*cyc",
            cf_perm_pq_j2(),
        )
        .subst(sub(&[
            ("v1", "y1"),
            ("v2", "y2"),
            ("qp1", "pp1"),
            ("qp2", "pp2"),
        ]))
        .master("perm.masterJ2", master2_to_j2()),
        TheoremCase::fraction(
            "perm.pq.S2.cyc",
            "λ^cyc S-fraction with p,q refinement",
            ALL,
            "pq.s2.cyc",
            s_alt(
                |j| &(&(&v("lam") + &ci(j - 1)) * &pw("pp", j - 1)) * &v("y"),
                |j| split(j, "pm", "qm", &v("x"), &v("u")),
            ),
        )
        .master(
            "perm.pq.J2",
            sub(&[
                ("x1", "x"),
                ("x2", "x"),
                ("y1", "y"),
                ("y2", "pp*y"),
                ("u1", "u"),
                ("u2", "u"),
                ("w[*]", "y"),
                ("pp1", "pp"),
                ("pp2", "pp"),
                ("pm1", "pm"),
                ("pm2", "pm"),
                ("qm1", "qm"),
                ("qm2", "qm"),
                ("s", "pp"),
            ]),
        ),
        TheoremCase::fraction(
            "perm.masterJ2",
            "second master J-fraction",
            ALL,
            "master2",
            cf_perm_master2(),
        ),
        TheoremCase::fraction(
            "perm.masterS2",
            "second master S-fraction",
            ALL,
            "master2",
            s_alt(
                |j| &(&v("lam") + &ci(j - 1)) * &at1("a", j - 1),
                |j| star("b", j - 1),
            ),
        )
        .subst(perm_master_s2_subst())
        .master("perm.masterJ2", perm_master_s2_subst()),
        TheoremCase::fraction(
            "perm.cc.zeta",
            "connected components on the two-variable S-fraction",
            ALL,
            "arec2var*zeta",
            attach_component_weight(&cf_perm_2var(), &zeta()),
        ),
        TheoremCase::fraction(
            "perm.cc.zeta.J",
            "connected components on the p,q J-fraction",
            ALL,
            "big*zeta",
            attach_component_weight(&cf_big(), &zeta()),
        )
        .n(6),
        TheoremCase::fraction(
            "perm.cc.zeta.master",
            "connected components on the first master",
            ALL,
            "master1*zeta",
            attach_component_weight(&cf_perm_master1(), &zeta()),
        )
        .n(6),
        TheoremCase::fraction(
            "perm.indecomposable.S",
            "indecomposable permutations, S form",
            PIND,
            "arec2var",
            cf_perm_2var(),
        )
        .indecomposable(),
        TheoremCase::fraction(
            "perm.indecomposable.J",
            "indecomposable permutations, J form",
            PIND,
            "qn",
            cf_perm_j1(),
        )
        .indecomposable(),
        TheoremCase::fraction(
            "perm.321.J",
            "321-avoiders with p,q weights",
            AV321,
            "big",
            j_frac(
                |n| {
                    if n == 0 {
                        return at1("w", 0);
                    }
                    &(&pw("pm2", n - 1) * &v("x2")) + &(&pw("pp2", n - 1) * &v("y2"))
                },
                |n| &(&(&pw("pm1", n - 1) * &pw("pp1", n - 1)) * &v("x1")) * &v("y1"),
            ),
        )
        .master(
            "perm.pq.J.BIG",
            sub(&[
                ("u1", "0"),
                ("u2", "0"),
                ("v1", "0"),
                ("v2", "0"),
                ("w[>=1]", "0"),
            ]),
        ),
        TheoremCase::fraction(
            "perm.321.S",
            "321-avoiders, S form",
            AV321,
            "pq.s.big1",
            s_alt(
                |j| &pw("pm", j - 1) * &v("x"),
                |j| &pw("pp", j - 1) * &v("y"),
            ),
        )
        .master("perm.pq.S.BIG1", sub(&[("u", "0"), ("v", "0")])),
        TheoremCase::fraction(
            "perm.321.inv",
            "321-avoiders by cycle class, fixed points and inversions",
            AV321,
            "inv.classes",
            j_frac(
                |n| {
                    if n == 0 {
                        v("w")
                    } else {
                        &pw("q", n) * &(&v("b") + &v("d"))
                    }
                },
                |n| &(&pw("q", 2 * n - 1) * &v("a")) * &v("c"),
            ),
        )
        .master(
            "perm.321.J",
            sub(&[
                ("x1", "c"),
                ("x2", "q*d"),
                ("y1", "q*a"),
                ("y2", "q*b"),
                ("pp1", "q"),
                ("pp2", "q"),
                ("pm1", "q"),
                ("pm2", "q"),
                ("w[0]", "w"),
            ]),
        ),
        TheoremCase::fraction(
            "perm.inv.J",
            "cycle classes, fixed points and inversions",
            ALL,
            "inv.classes",
            j_frac(
                |n| {
                    if n == 0 {
                        return v("w");
                    }
                    &(&(&pw("q", n) * &qn(n)) * &(&v("b") + &v("d"))) + &(&pw("q", 2 * n) * &v("w"))
                },
                |n| &(&(&pw("q", 2 * n - 1) * &qn(n).pow(2)) * &v("a")) * &v("c"),
            ),
        )
        .master("perm.pq.J.BIG", inv_from_big()),
        TheoremCase::fraction(
            "perm.ca.secant",
            "secant numbers",
            CA,
            "one",
            s_frac(|n| ci(n * n)),
        )
        .master("perm.ca.S", ones(&["x1", "u1", "y1", "v1"])),
        TheoremCase::fraction(
            "perm.ca.S",
            "cycle-alternating permutations by record class",
            CA,
            "qn",
            s_frac(|n| {
                &(&v("x1") + &(&ci(n - 1) * &v("u1"))) * &(&v("y1") + &(&ci(n - 1) * &v("v1")))
            }),
        )
        .master("perm.ca.pq.S", ones(&["pp1", "pm1", "qp1", "qm1"])),
        TheoremCase::fraction(
            "perm.ca.pq.S",
            "cycle-alternating permutations with p,q weights",
            CA,
            "big",
            s_frac(|n| {
                &split(n, "pm1", "qm1", &v("x1"), &v("u1"))
                    * &split(n, "pp1", "qp1", &v("y1"), &v("v1"))
            }),
        )
        .master("perm.ca.master1.S", master1_to_big()),
        TheoremCase::fraction(
            "perm.ca.master1.S",
            "first master on cycle-alternating permutations",
            CA,
            "master1",
            s_frac(|n| &star("a", n - 1) * &star("b", n - 1)),
        )
        .even_part_of(
            "perm.masterJ1",
            sub(&[("c[*,*]", "0"), ("d[*,*]", "0"), ("e[*]", "0")]),
        ),
        TheoremCase::fraction(
            "perm.ca.second.S",
            "cycle-alternating permutations with λ^cyc",
            CA,
            "qn*cyc",
            s_frac(|n| {
                let m = ci(n - 1);
                &(&(&v("lam") + &m) * &(&v("x1") + &(&m * &v("u1")))) * &v("y1")
            }),
        )
        .subst(sub(&[("v1", "y1")]))
        .master("perm.ca.pq.second.S", ones(&["pp1", "pm1", "qm1"])),
        TheoremCase::fraction(
            "perm.ca.pq.second.S",
            "cycle-alternating permutations with λ^cyc and p,q weights",
            CA,
            "big*cyc",
            s_frac(|n| {
                let lam = &v("lam") + &ci(n - 1);
                &(&lam * &split(n, "pm1", "qm1", &v("x1"), &v("u1")))
                    * &(&pw("pp1", n - 1) * &v("y1"))
            }),
        )
        .subst(sub(&[("v1", "y1"), ("qp1", "pp1")]))
        .master("perm.ca.master2.S", master2_to_j2()),
        TheoremCase::fraction(
            "perm.ca.master2.S",
            "second master on cycle-alternating permutations",
            CA,
            "master2",
            s_frac(|n| &(&(&v("lam") + &ci(n - 1)) * &at1("a", n - 1)) * &star("b", n - 1)),
        )
        .even_part_of(
            "perm.masterJ2",
            sub(&[("c[*,*]", "0"), ("d[*,*]", "0"), ("e[*]", "0")]),
        ),
        TheoremCase::fraction(
            "perm.ca.qsecant",
            "q-secant numbers by inversions",
            CA,
            "inv",
            s_frac(|n| &pw("q", 2 * n - 1) * &qn(n).pow(2)),
        )
        .even_part_of(
            "perm.inv.J",
            sub(&[("a", "1"), ("c", "1"), ("b", "0"), ("d", "0"), ("w", "0")]),
        ),
        TheoremCase {
            id: "perm.cyc.nonpoly",
            kind: TheoremKind::Identity,
            summary: "rational γ2 for x^arec y^erec λ^cyc at random points",
            default_n: 5,
            body: Body::Witness {
                points: 20,
                check: witness_cyc,
            },
        },
        TheoremCase {
            id: "perm.invcyc.nonpoly",
            kind: TheoremKind::Identity,
            summary: "rational γ2 for q^inv λ^cyc at random points",
            default_n: 5,
            body: Body::Witness {
                points: 20,
                check: witness_invcyc,
            },
        },
    ];
    out.extend(permutation_identities());
    out
}

fn crossnest_s_subst() -> Substitution {
    sub(&[
        ("pp1", "pp"),
        ("pp2", "pp"),
        ("qp1", "qp"),
        ("qp2", "qp"),
        ("rp", "1"),
        ("rm", "pm"),
        ("pm1", "pm"),
        ("pm2", "pm"),
        ("s", "qm"),
        ("qm1", "qm"),
        ("qm2", "qm"),
    ])
}

fn inv_from_big() -> Substitution {
    sub(&[
        ("x1", "c"),
        ("u1", "c"),
        ("x2", "q*d"),
        ("u2", "q*d"),
        ("y1", "q*a"),
        ("v1", "q*a"),
        ("y2", "q*b"),
        ("v2", "q*b"),
        ("w[*]", "w"),
        ("pp1", "q"),
        ("pp2", "q"),
        ("pm1", "q"),
        ("pm2", "q"),
        ("qp1", "q^2"),
        ("qp2", "q^2"),
        ("qm1", "q^2"),
        ("qm2", "q^2"),
        ("s", "q^2"),
    ])
}

fn setpartition_cases() -> Vec<TheoremCase> {
    let qstirling_ovcov = || {
        sub(&[
            ("x1", "x"),
            ("x2", "x"),
            ("y1", "1"),
            ("y2", "1"),
            ("v1", "1"),
            ("v2", "1"),
            ("p1", "1"),
            ("p2", "q"),
            ("q1", "q"),
            ("q2", "q^2"),
            ("r", "q"),
        ])
    };
    let iota_crossnest = || {
        sub(&[
            ("x1", "x"),
            ("x2", "x"),
            ("y1", "1"),
            ("y2", "1"),
            ("v1", "1"),
            ("v2", "1"),
            ("p1", "q"),
            ("p2", "q^2"),
            ("q1", "1"),
            ("q2", "q"),
            ("r", "q"),
        ])
    };
    let pq_s = || {
        sub(&[
            ("x1", "x"),
            ("x2", "x"),
            ("y1", "y"),
            ("y2", "y"),
            ("v1", "v"),
            ("v2", "v"),
            ("p1", "p"),
            ("p2", "r*p"),
            ("q1", "q"),
            ("q2", "r*q"),
        ])
    };
    let sp_s = || s_alt(|_| v("x"), |j| &v("y") + &(&ci(j - 1) * &v("v")));
    let mut out = vec![
        TheoremCase::fraction("sp.bell", "Bell numbers", SP, "one", s_alt(|_| c(1), ci))
            .master("sp.S", ones(&["x", "y", "v"])),
        TheoremCase::fraction("sp.S", "blocks and exclusive records", SP, "erec3", sp_s())
            .master("sp.pq.S", ones(&["p", "q", "r"])),
        TheoremCase::fraction(
            "sp.J",
            "six-variable J-fraction",
            SP,
            "sixvar",
            j_frac(
                |n| {
                    if n == 0 {
                        return v("x1");
                    }
                    &(&v("x1") + &v("y1")) + &(&ci(n - 1) * &v("v1"))
                },
                |n| &v("x2") * &(&v("y2") + &(&ci(n - 1) * &v("v2"))),
            ),
        )
        .master("sp.pq.J", ones(&["p1", "p2", "q1", "q2", "r"])),
        TheoremCase::fraction(
            "sp.pq.J",
            "crossings, nestings and pseudo-nestings",
            SP,
            "crossnest",
            cf_sp_pq_j(),
        )
        .master("sp.master.J1", sp_master_to_pq()),
        TheoremCase::fraction(
            "sp.pq.S",
            "S-fraction corollary of the crossing/nesting J-fraction",
            SP,
            "crossnest",
            s_alt(
                |j| &pw("r", j - 1) * &v("x"),
                |j| split(j, "p", "q", &v("y"), &v("v")),
            ),
        )
        .subst(pq_s())
        .master("sp.pq.J", pq_s()),
        TheoremCase::fraction(
            "sp.B2.equal",
            "overlaps and coverings give the same fraction",
            SP,
            "ovcov",
            cf_sp_pq_j(),
        )
        .master("sp.master.J2", sp_master_to_pq()),
        TheoremCase::fraction(
            "sp.master.J1",
            "first master J-fraction for set partitions",
            SP,
            "master1",
            cf_sp_master(),
        ),
        TheoremCase::fraction(
            "sp.master.J2",
            "master J-fraction with overlaps and coverings",
            SP,
            "master2",
            cf_sp_master(),
        )
        .master("sp.master.J1", Substitution::new()),
        TheoremCase::fraction(
            "sp.master.J3",
            "master J-fraction, mixed openers",
            SP,
            "master3",
            cf_sp_master(),
        )
        .master("sp.master.J1", Substitution::new()),
        TheoremCase::fraction(
            "sp.master.J4",
            "master J-fraction, mixed insiders",
            SP,
            "master4",
            cf_sp_master(),
        )
        .master("sp.master.J1", Substitution::new()),
        TheoremCase::fraction(
            "sp.master.S",
            "master S-fraction for set partitions",
            SP,
            "master1",
            s_alt(|j| at1("b", j - 1), |j| star("a", j - 1)),
        )
        .subst(sp_master_s_subst())
        .master("sp.master.J1", sp_master_s_subst()),
        TheoremCase::fraction(
            "sp.zeng1",
            "q-Stirling polynomials via lb",
            SP,
            "blocks*lb",
            cf_qstirling(),
        )
        .master(
            "sp.pq.S",
            sub(&[("y", "1"), ("v", "1"), ("p", "1"), ("r", "q")]),
        ),
        TheoremCase::fraction(
            "sp.zeng1.rs",
            "q-Stirling polynomials via rs",
            SP,
            "blocks*rs.rb",
            cf_qstirling(),
        )
        .subst(sub(&[("p", "1")]))
        .master("sp.zeng1", Substitution::new()),
        TheoremCase::fraction(
            "sp.zeng1.ovcov",
            "q-Stirling polynomials via the overlap/covering polynomial",
            SP,
            "ovcov",
            cf_qstirling(),
        )
        .subst(qstirling_ovcov())
        .master("sp.pq.J", qstirling_ovcov()),
        TheoremCase::fraction(
            "sp.zeng1.crossnest",
            "q-Stirling polynomials via the crossing/nesting polynomial",
            SP,
            "crossnest",
            cf_qstirling(),
        )
        .subst(qstirling_ovcov())
        .master("sp.pq.J", qstirling_ovcov()),
        TheoremCase::fraction(
            "sp.zeng2",
            "modified q-Stirling polynomials via ls",
            SP,
            "blocks*ls",
            s_alt(
                |j| &pw("q", 2 * j - 2) * &v("x"),
                |j| {
                    let corr = &(&pw("q", j - 1) * &(&v("q") - &c(1))) * &v("x");
                    &(&c(1) + &corr) * &qn(j)
                },
            ),
        ),
        TheoremCase::fraction(
            "sp.intertwining",
            "reduced intertwining number",
            SP,
            "blocks*iotaprime",
            cf_qstirling(),
        )
        .master("sp.pq.J", iota_crossnest()),
        TheoremCase::fraction(
            "sp.intertwining.crossnest",
            "intertwining via crossings and nestings",
            SP,
            "crossnest",
            cf_qstirling(),
        )
        .subst(iota_crossnest())
        .master("sp.pq.J", iota_crossnest()),
        TheoremCase::fraction(
            "sp.cc.zeta",
            "connected components, S form",
            SP,
            "erec3*zeta",
            attach_component_weight(&sp_s(), &zeta()),
        )
        .n(8),
        TheoremCase::fraction(
            "sp.cc.zeta.J",
            "connected components, crossing/nesting J form",
            SP,
            "crossnest*zeta",
            attach_component_weight(&cf_sp_pq_j(), &zeta()),
        )
        .n(8),
        TheoremCase::fraction(
            "sp.indecomposable",
            "indecomposable set partitions, S form",
            SPIND,
            "erec3",
            sp_s(),
        )
        .indecomposable()
        .n(8),
        TheoremCase::fraction(
            "sp.indecomposable.J",
            "indecomposable set partitions, J form",
            SPIND,
            "crossnest",
            cf_sp_pq_j(),
        )
        .indecomposable()
        .n(8),
    ];
    out.extend(setpartition_identities());
    out
}

fn sp_master_s_subst() -> Substitution {
    let s = rule2(Substitution::new(), "d", |l, m| at2("a", l, m));
    rule1(s, "e", |l| at1("b", l))
}

fn matching_cases() -> Vec<TheoremCase> {
    let fourvar_zeta = attach_component_weight(&cf_match_fourvar(), &zeta());
    let master_s = || s_frac(|n| &star("a", n - 1) * &at1("b", n - 1));
    let mut out = vec![
        TheoremCase::fraction("match.semifactorial", "(2n−1)!!", M, "one", s_frac(ci))
            .master("match.S.fourvar", ones(&["x", "y", "u", "v"])),
        TheoremCase::fraction(
            "match.S.fourvar",
            "peaks by parity and antirecord status",
            M,
            "fourvar.a",
            cf_match_fourvar(),
        )
        .master("match.pq.S", ones(&["pp", "pm", "qp", "qm"])),
        TheoremCase::fraction(
            "match.S.fourvar.b",
            "valleys by parity and record status",
            M,
            "fourvar.b",
            cf_match_fourvar(),
        )
        .master("match.S.fourvar", Substitution::new()),
        TheoremCase::fraction(
            "match.S.sixvar",
            "peaks by parity and antirecord status, valleys by parity",
            M,
            "sixvar",
            s_alt(
                |j| &(&v("x") + &(&ci(2 * j - 2) * &v("u"))) * &v("xbar"),
                |j| &(&v("y") + &(&ci(2 * j - 1) * &v("v"))) * &v("ybar"),
            ),
        )
        .master(
            "match.S.fourvar",
            sub(&[
                ("x", "x*xbar"),
                ("u", "u*xbar"),
                ("y", "y*ybar"),
                ("v", "v*ybar"),
            ]),
        ),
        TheoremCase::fraction(
            "match.pq.S",
            "parity-refined crossings and nestings",
            M,
            "pq.pm",
            cf_match_pq(),
        )
        .master("match.master.S", match_master_to_pq()),
        TheoremCase::fraction(
            "match.pq.S.b",
            "parity-refined crossings and nestings, valley form",
            M,
            "pq.pm.b",
            cf_match_pq(),
        )
        .master("match.pq.S", Substitution::new()),
        TheoremCase::fraction(
            "match.pq.S.2var",
            "crossings and nestings",
            M,
            "pq",
            s_alt(
                |j| split(2 * j - 1, "p", "q", &v("x"), &v("u")),
                |j| split(2 * j, "p", "q", &v("y"), &v("v")),
            ),
        )
        .master(
            "match.pq.S",
            sub(&[("pp", "p"), ("pm", "p"), ("qp", "q"), ("qm", "q")]),
        ),
        TheoremCase::fraction(
            "match.touchard.S",
            "crossings only",
            M,
            "cr",
            s_frac(|n| pq_int(n, &v("p"), &MultiPoly::one())),
        )
        .master("match.pq.S.2var", ones(&["x", "y", "u", "v", "q"])),
        TheoremCase::fraction(
            "match.master.S",
            "master S-fraction for perfect matchings",
            M,
            "master",
            master_s(),
        )
        .even_part_of("sp.master.J1", sub(&[("d[*,*]", "0"), ("e[*]", "0")])),
        TheoremCase::fraction(
            "match.cc.zeta",
            "connected components",
            M,
            "fourvar.a*zeta",
            fourvar_zeta,
        )
        .n(6),
        TheoremCase::fraction(
            "match.cc.zeta.master",
            "connected components on the master",
            M,
            "master*zeta",
            attach_component_weight(&master_s(), &zeta()),
        )
        .n(6),
        TheoremCase::fraction(
            "match.indecomposable",
            "indecomposable perfect matchings",
            Object::IndecomposableMatching,
            "fourvar.a",
            cf_match_fourvar(),
        )
        .indecomposable()
        .n(6),
    ];
    out.extend(matching_identities());
    out
}

// ---------------------------------------------------------------------------
// identities

fn size_check<F: Fn(usize) -> Result<(), String> + Send + Sync + 'static>(f: F) -> SizeCheck {
    Arc::new(f)
}

fn poly_eq(lhs: &MultiPoly, rhs: &MultiPoly, what: &str) -> Result<(), String> {
    if lhs == rhs {
        return Ok(());
    }
    let d = lhs - rhs;
    let (m, k) = d
        .terms()
        .next()
        .map(|(m, k)| (m.to_string(), k.to_string()))
        .unwrap_or_default();
    Err(format!("{what}: sides differ at monomial {m} by {k}"))
}

fn stats_err(e: StatsError) -> String {
    e.to_string()
}

/// S(n, k) by the triangle recurrence.
fn stirling2(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for i in 1..=n {
        let mut next = vec![BigInt::zero(); i + 1];
        for k in 1..=i {
            let stay = if k < row.len() {
                &row[k] * BigInt::from(k)
            } else {
                BigInt::zero()
            };
            next[k] = &row[k - 1] + stay;
        }
        row = next;
    }
    row
}

fn is_321_avoiding(p: &Permutation) -> bool {
    let w = p.oneline();
    let n = w.len();
    for j in 0..n {
        let big_left = (0..j).any(|i| w[i] > w[j]);
        let small_right = (j + 1..n).any(|k| w[k] < w[j]);
        if big_left && small_right {
            return false;
        }
    }
    true
}

fn permutation_identities() -> Vec<TheoremCase> {
    vec![
        TheoremCase::identity(
            "inv.decomp",
            "inversions from excedances, crossings, nestings, joins and pseudo-nestings",
            0,
            8,
            size_check(|n| {
                let mut bad = None;
                for_each_permutation(n, |p| {
                    if bad.is_some() {
                        return;
                    }
                    let t = perm_stat_totals(p);
                    let a = t.exc
                        + t.ucross
                        + 2 * t.unest
                        + t.lcross
                        + t.ljoin
                        + 2 * t.lnest
                        + 2 * t.psnest;
                    let b = t.cval
                        + t.cdrise
                        + t.cdfall
                        + t.ucross
                        + t.lcross
                        + 2 * (t.unest + t.lnest + t.psnest);
                    if a != t.inv || b != t.inv {
                        bad = Some(format!(
                            "{:?}: inv {} vs {} and {}",
                            p.oneline(),
                            t.inv,
                            a,
                            b
                        ));
                    }
                });
                bad.map_or(Ok(()), Err)
            }),
        ),
        TheoremCase::identity(
            "perm.321.nesting",
            "321-avoiders have no nestings or pseudo-nestings",
            0,
            8,
            size_check(|n| {
                let mut bad = None;
                for_each_permutation(n, |p| {
                    if bad.is_none() && is_321_avoiding(p) {
                        let t = perm_stat_totals(p);
                        if t.unest + t.lnest + t.psnest != 0 {
                            bad = Some(format!("{:?} has a nesting", p.oneline()));
                        }
                    }
                });
                bad.map_or(Ok(()), Err)
            }),
        ),
        TheoremCase::identity(
            "dillon",
            "cycles/excedances polynomial as a Stirling-subset sum",
            0,
            7,
            size_check(|n| {
                let lhs = enumerate_perm_polynomial(
                    n,
                    PermFamily::All,
                    "arec2var",
                    Some(&sub(&[("v", "y")])),
                )
                .map_err(stats_err)?;
                let s = stirling2(n);
                let mut rhs = MultiPoly::zero();
                for (k, skn) in s.iter().enumerate() {
                    let rising = (0..k).fold(MultiPoly::one(), |acc, j| {
                        &acc * &(&v("x") + &(&ci(j as u32) * &v("u")))
                    });
                    let diff = (&v("y") - &v("u")).pow((n - k) as u32);
                    rhs += &(&MultiPoly::constant(skn.clone()) * &diff) * &rising;
                }
                poly_eq(&lhs, &rhs, "dillon")
            }),
        ),
        TheoremCase::identity(
            "orderedbell",
            "Eulerian polynomials against ordered Bell polynomials",
            0,
            7,
            size_check(|n| {
                let lhs = enumerate_perm_polynomial(
                    n,
                    PermFamily::All,
                    "arec2var",
                    Some(&sub(&[("u", "x"), ("v", "y")])),
                )
                .map_err(stats_err)?;
                let s = stirling2(n);
                let mut rhs = MultiPoly::zero();
                let mut fact = BigInt::one();
                for (k, skn) in s.iter().enumerate() {
                    if k > 0 {
                        fact *= BigInt::from(k);
                    }
                    let coef = MultiPoly::constant(&fact * skn);
                    rhs += &(&coef * &(&v("y") - &v("x")).pow((n - k) as u32)) * &pw("x", k as u32);
                }
                poly_eq(&lhs, &rhs, "orderedbell")
            }),
        ),
        TheoremCase::identity(
            "MP.identity",
            "matchings polynomial as a permutation polynomial",
            0,
            6,
            size_check(|n| {
                let m = enumerate_matching_polynomial(n, "fourvar.a", None).map_err(stats_err)?;
                let s = sub(&[("y", "y+v"), ("u", "2*u"), ("v", "2*v")]);
                let p = enumerate_perm_polynomial(n, PermFamily::All, "arec2var", Some(&s))
                    .map_err(stats_err)?;
                poly_eq(&m, &p, "MP.identity")
            }),
        ),
        TheoremCase::identity(
            "MP.identity.pq",
            "p,q matchings polynomial as a permutation polynomial, u scaled by qm",
            0,
            5,
            size_check(|n| {
                // both sides with u → qm·u, which clears the division by qm
                let m = enumerate_matching_polynomial(n, "pq.pm", Some(&sub(&[("u", "qm*u")])))
                    .map_err(stats_err)?;
                let s = sub(&[
                    ("y", "pp*y+qp*v"),
                    ("u", "(pm+qm)*u"),
                    ("v", "(pp+qp)*v"),
                    ("pp", "pp^2"),
                    ("pm", "pm^2"),
                    ("qp", "qp^2"),
                    ("qm", "qm^2"),
                ]);
                let p = enumerate_perm_polynomial(n, PermFamily::All, "pq.s.big1", Some(&s))
                    .map_err(stats_err)?;
                poly_eq(&m, &p, "MP.identity.pq")
            }),
        ),
    ]
}

fn each_partition<F: Fn(&SetPartition) -> Result<(), String>>(
    n: usize,
    f: F,
) -> Result<(), String> {
    for p in all_set_partitions(n) {
        f(&p).map_err(|e| format!("{:?}: {e}", p.blocks()))?;
    }
    Ok(())
}

fn setpartition_identities() -> Vec<TheoremCase> {
    vec![
        TheoremCase::identity(
            "crne.eq.ovcov",
            "crossings plus nestings equal overlaps plus coverings",
            0,
            9,
            size_check(|n| {
                each_partition(n, |p| {
                    let t = sp_stat_totals(p);
                    if t.crop + t.neop != t.ov + t.cov {
                        return Err(format!(
                            "crop+neop = {} but ov+cov = {}",
                            t.crop + t.neop,
                            t.ov + t.cov
                        ));
                    }
                    if t.crin + t.nein != t.ovin + t.covin {
                        return Err(format!(
                            "crin+nein = {} but ovin+covin = {}",
                            t.crin + t.nein,
                            t.ovin + t.covin
                        ));
                    }
                    Ok(())
                })
            }),
        ),
        TheoremCase::identity(
            "crne.mod2",
            "crossings and nestings modulo 2",
            0,
            9,
            size_check(|n| {
                each_partition(n, |p| {
                    let t = sp_stat_totals(p);
                    let checks = [
                        (t.cr, t.ov, "cr vs ov"),
                        (t.crin + t.neop, t.cov, "crin+neop vs cov"),
                        (
                            t.crop + t.nein,
                            t.ov + t.ovin + t.covin,
                            "crop+nein vs ov+ovin+covin",
                        ),
                        (t.ne, t.cov + t.ovin + t.covin, "ne vs cov+ovin+covin"),
                    ];
                    for (a, b, what) in checks {
                        if (a + b) % 2 != 0 {
                            return Err(format!("{what}: {a} and {b} differ in parity"));
                        }
                    }
                    Ok(())
                })
            }),
        ),
        TheoremCase::identity(
            "rs.formula",
            "rs from overlaps and coverings of the reversal",
            0,
            9,
            size_check(|n| {
                each_partition(n, |p| {
                    let t = sp_stat_totals(p);
                    let r = sp_stat_totals(&sp_reverse(p));
                    let want = r.ov + 2 * r.cov + r.covin + r.pscov;
                    if t.rs != want {
                        return Err(format!("rs = {} but formula gives {want}", t.rs));
                    }
                    Ok(())
                })
            }),
        ),
        TheoremCase::identity(
            "iota.formula",
            "reduced intertwining number from crossings, nestings, overlaps and coverings",
            0,
            9,
            size_check(|n| {
                each_partition(n, |p| {
                    let t = sp_stat_totals(p);
                    let a = t.cr + t.ov + t.cov + t.pscov;
                    let b = t.crin + 2 * t.crop + t.neop + t.psne;
                    if t.iota_prime != a || t.iota_prime != b {
                        return Err(format!(
                            "iota' = {} but formulas give {a} and {b}",
                            t.iota_prime
                        ));
                    }
                    Ok(())
                })
            }),
        ),
        TheoremCase::identity(
            "iota.example",
            "intertwining number of {1,3,6}{2,4,5}",
            6,
            6,
            size_check(|_| {
                let p = SetPartition::from_blocks(&[vec![1, 3, 6], vec![2, 4, 5]])
                    .map_err(stats_err)?;
                let t = sp_stat_totals(&p);
                if t.iota == 4 {
                    Ok(())
                } else {
                    Err(format!("iota = {}, expected 4", t.iota))
                }
            }),
        ),
        TheoremCase::identity(
            "wachs.white",
            "(rs, rb) and (lb, ls) are equidistributed with fixed block count",
            0,
            8,
            size_check(|n| {
                for k in 0..=n {
                    let fam = SPFamily::ByBlockCount(k);
                    let a = enumerate_sp_polynomial(n, fam, "rs.rb", None).map_err(stats_err)?;
                    let b = enumerate_sp_polynomial(n, fam, "lb.ls", None).map_err(stats_err)?;
                    poly_eq(&a, &b, &format!("k = {k}"))?;
                }
                Ok(())
            }),
        ),
        TheoremCase::identity(
            "B.equals.B2B3B4",
            "the four set-partition master polynomials coincide",
            0,
            9,
            size_check(|n| {
                let b1 = enumerate_sp_polynomial(n, SPFamily::All, "master1", None)
                    .map_err(stats_err)?;
                for w in ["master2", "master3", "master4"] {
                    let b =
                        enumerate_sp_polynomial(n, SPFamily::All, w, None).map_err(stats_err)?;
                    poly_eq(&b1, &b, w)?;
                }
                Ok(())
            }),
        ),
        TheoremCase::identity(
            "sp.four.equiv",
            "four specializations of the mixed polynomial agree with the crossing/nesting fraction",
            0,
            9,
            size_check(|n| {
                let expanded = cf_sp_pq_j().expand_fast(n);
                let want = expanded.coeff(n);
                for (i, s) in four_equiv_substs().iter().enumerate() {
                    let got = enumerate_sp_polynomial(n, SPFamily::All, "btilde", Some(s))
                        .map_err(stats_err)?;
                    poly_eq(&got, want, &format!("specialization {}", i + 1))?;
                }
                Ok(())
            }),
        ),
    ]
}

/// Mixed-polynomial specializations. Primed letters count overlaps and
/// coverings; unprimed ones count crossings and nestings.
fn four_equiv_substs() -> Vec<Substitution> {
    let pr = |s: &str| Indeterminate::var(&format!("{s}'"));
    let set = |s: Substitution, k: Indeterminate, val: MultiPoly| s.set(k, val);
    let one = MultiPoly::one;
    let mut out = Vec::new();
    // (i) primed letters trivial
    let mut s = Substitution::new();
    for k in ["y1", "y2", "v1", "v2", "p1", "p2", "q1", "q2"] {
        s = set(s, pr(k), one());
    }
    out.push(s);
    // (ii) unprimed letters trivial, primes dropped
    let mut s = Substitution::new();
    for k in ["y1", "y2", "v1", "v2", "p1", "p2", "q1", "q2"] {
        s = set(s, Indeterminate::var(k), one());
        s = set(s, pr(k), v(k));
    }
    out.push(s);
    // (iii) insiders by crossings, openers by overlaps
    let mut s = Substitution::new();
    for k in ["y1", "v1", "p1", "q1"] {
        s = set(s, pr(k), one());
    }
    for k in ["y2", "v2", "p2", "q2"] {
        s = set(s, Indeterminate::var(k), one());
        s = set(s, pr(k), v(k));
    }
    out.push(s);
    // (iv) insiders by overlaps, openers by crossings
    let mut s = Substitution::new();
    for k in ["y2", "v2", "p2", "q2"] {
        s = set(s, pr(k), one());
    }
    for k in ["y1", "v1", "p1", "q1"] {
        s = set(s, Indeterminate::var(k), one());
        s = set(s, pr(k), v(k));
    }
    out.push(s);
    out
}

/// Perfect matchings of [2n] by number of connected components, rows n ≤ 8.
pub const CC_TABLE: &[&[u64]] = &[
    &[1],
    &[0, 1],
    &[0, 2, 1],
    &[0, 10, 4, 1],
    &[0, 74, 24, 6, 1],
    &[0, 706, 188, 42, 8, 1],
    &[0, 8162, 1808, 350, 64, 10, 1],
    &[0, 110410, 20628, 3426, 568, 90, 12, 1],
    &[0, 1708394, 273064, 38886, 5696, 850, 120, 14, 1],
];

fn matching_identities() -> Vec<TheoremCase> {
    vec![
        TheoremCase::identity(
            "match.touchard",
            "closed form for the crossing polynomial",
            0,
            8,
            size_check(|n| {
                let closed = touchard_riordan(n).map_err(stats_err)?;
                let e = enumerate_matching_polynomial(n, "cr", None).map_err(stats_err)?;
                poly_eq(&e, &closed, "touchard")
            }),
        ),
        TheoremCase::identity(
            "match.cc.table",
            "matchings by connected components against the published table",
            0,
            8,
            size_check(|n| {
                let row = CC_TABLE
                    .get(n)
                    .ok_or_else(|| format!("no table row for n = {n}"))?;
                let e = enumerate_matching_polynomial(n, "zeta", None).map_err(stats_err)?;
                let z = Indeterminate::var("zeta");
                for (k, &want) in row.iter().enumerate() {
                    let m = if k == 0 {
                        Monomial::one()
                    } else {
                        Monomial::from_factors([(z, k as u32)])
                    };
                    let got = e.coeff_of(&m);
                    if got != BigInt::from(want) {
                        return Err(format!("k = {k}: enumerated {got}, table {want}"));
                    }
                }
                if e.len() != row.iter().filter(|&&x| x != 0).count() {
                    return Err("enumeration has terms beyond the table row".into());
                }
                Ok(())
            }),
        ),
    ]
}

// ---------------------------------------------------------------------------
// non-polynomiality witnesses

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let num: i64 = rng.gen_range(-12..=12);
    let den: i64 = rng.gen_range(1..=7);
    rat(num, den)
}

/// Levels γ0..γ2, β1..β2 of the numeric series at one point, or `None`
/// when the point is not admissible.
fn numeric_levels(
    polys: &[MultiPoly],
    point: &HashMap<Indeterminate, BigRational>,
) -> Result<Option<crate::series::JLevels>, String> {
    let coeffs = polys
        .iter()
        .map(|p| p.eval_rational(point).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    match jfraction_from_series(&RationalSeries::new(coeffs), 2) {
        Ok(l) => Ok(Some(l)),
        Err(SeriesError::TerminatedFraction { .. }) => Ok(None),
        Err(e) => Err(e.to_string()),
    }
}

type Expected = Vec<(&'static str, BigRational, BigRational)>;

fn run_witness<P, E>(
    weight: &str,
    seed: u64,
    points: usize,
    names: &[&str],
    admissible: P,
    expected: E,
) -> Result<usize, String>
where
    P: Fn(&[BigRational]) -> bool,
    E: Fn(&[BigRational], &crate::series::JLevels) -> Expected,
{
    let polys: Vec<MultiPoly> = (0..=5)
        .map(|n| enumerate_perm_polynomial(n, PermFamily::All, weight, None))
        .collect::<Result<_, _>>()
        .map_err(stats_err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let mut tries = 0;
    while done < points {
        tries += 1;
        if tries > 1000 * points.max(1) {
            return Err(format!("only {done} admissible points found"));
        }
        let vals: Vec<BigRational> = names.iter().map(|_| random_rational(&mut rng)).collect();
        if !admissible(&vals) {
            continue;
        }
        let point: HashMap<Indeterminate, BigRational> = names
            .iter()
            .zip(&vals)
            .map(|(n, x)| (Indeterminate::var(n), x.clone()))
            .collect();
        let Some(levels) = numeric_levels(&polys, &point)? else {
            continue;
        };
        for (what, got, want) in expected(&vals, &levels) {
            if got != want {
                return Err(format!(
                    "{what} at {names:?} = {vals:?}: series gives {got}, formula gives {want}"
                ));
            }
        }
        done += 1;
    }
    Ok(done)
}

fn witness_cyc(seed: u64, points: usize) -> Result<usize, String> {
    let den = |v: &[BigRational]| {
        let (x, y, l) = (&v[0], &v[1], &v[2]);
        l + x + y + l * x * y
    };
    run_witness(
        "arec.erec*cyc",
        seed,
        points,
        &["x", "y", "lam"],
        |v| {
            // the exceptional sets where γ2 degenerates are skipped
            let one = BigRational::one();
            let (x, y, l) = (&v[0], &v[1], &v[2]);
            let unit = |a: &BigRational| a.is_zero() || *a == one || *a == -one.clone();
            !(den(v).is_zero()
                || unit(l)
                || unit(x)
                || unit(y)
                || (l * y) == -one.clone()
                || (l * x) == -one.clone())
        },
        |vals, lv| {
            let (x, y, l) = (&vals[0], &vals[1], &vals[2]);
            let k = |n: i64| rat(n, 1);
            let xy = x * y;
            let lin = k(2) + x + x * x + y + k(4) * &xy + y * y;
            let num = (x + y) * (k(3) + &xy) + lin * l + (k(1) + &xy) * (l * l);
            vec![
                ("gamma0", lv.gamma[0].clone(), l * x),
                ("beta1", lv.beta[1].clone(), &(l * x) * y),
                ("gamma1", lv.gamma[1].clone(), &(l + x) + y),
                ("beta2", lv.beta[2].clone(), den(vals)),
                ("gamma2", lv.gamma[2].clone(), num / den(vals)),
            ]
        },
    )
}

fn witness_invcyc(seed: u64, points: usize) -> Result<usize, String> {
    let den = |v: &[BigRational]| {
        let (q, l) = (&v[0], &v[1]);
        &(l + &(&rat(2, 1) * q)) + &(l * &(q * q))
    };
    run_witness(
        "inv*cyc",
        seed,
        points,
        &["q", "lam"],
        |v| !(den(v).is_zero() || v[0].is_zero() || v[1].is_zero()),
        |vals, lv| {
            let (q, l) = (&vals[0], &vals[1]);
            let k = |n: i64| rat(n, 1);
            let q2 = q * q;
            let l2 = l * l;
            let inner = k(2)
                + k(6) * l * q
                + k(6) * &q2
                + &l2 * &q2
                + k(4) * l * (&q2 * q)
                + &l2 * (&q2 * &q2);
            vec![
                ("gamma0", lv.gamma[0].clone(), l.clone()),
                ("beta1", lv.beta[1].clone(), l * q),
                ("gamma1", lv.gamma[1].clone(), q * &(&rat(2, 1) + &(l * q))),
                ("beta2", lv.beta[2].clone(), &(&q2 * q) * &den(vals)),
                ("gamma2", lv.gamma[2].clone(), &(&q2 * &inner) / &den(vals)),
            ]
        },
    )
}

// ---------------------------------------------------------------------------
// registry access

static REGISTRY: OnceLock<Vec<TheoremCase>> = OnceLock::new();

pub fn registry() -> &'static [TheoremCase] {
    REGISTRY.get_or_init(|| {
        let mut all = permutation_cases();
        all.extend(setpartition_cases());
        all.extend(matching_cases());
        all
    })
}

pub fn list_theorems() -> Vec<&'static str> {
    registry().iter().map(|c| c.id).collect()
}

/// Accepts `sp.masterJ1` and `sp.masterS` for the dotted ids.
fn canonical_id(id: &str) -> String {
    match id {
        "sp.masterJ1" | "sp.masterJ2" | "sp.masterJ3" | "sp.masterJ4" => {
            format!("sp.master.J{}", &id[id.len() - 1..])
        }
        "sp.masterS" => "sp.master.S".to_string(),
        other => other.to_string(),
    }
}

pub fn find_theorem(id: &str) -> Result<&'static TheoremCase, TheoremError> {
    let id = canonical_id(id);
    registry()
        .iter()
        .find(|c| c.id == id)
        .ok_or(TheoremError::UnknownTheorem(id))
}

pub fn enumerate_object(
    obj: Object,
    n: usize,
    weight: &str,
    subst: Option<&Substitution>,
) -> Result<MultiPoly, StatsError> {
    match obj {
        Object::Perm(f) => enumerate_perm_polynomial(n, f, weight, subst),
        Object::SetPart(f) => enumerate_sp_polynomial(n, f, weight, subst),
        Object::Matching => enumerate_matching_polynomial(n, weight, subst),
        Object::IndecomposableMatching => {
            let p = enumerate_matching_polynomial(n, &format!("{weight}*zeta"), None)?;
            let p = zeta_linear_part(&p);
            Ok(match subst {
                Some(s) => p.substitute(s),
                None => p,
            })
        }
    }
}

/// Coefficient of ζ¹, with ζ removed.
fn zeta_linear_part(p: &MultiPoly) -> MultiPoly {
    let z = Indeterminate::var("zeta");
    let mut out = MultiPoly::zero();
    for (m, k) in p.terms() {
        if m.exponent(&z) == 1 {
            let rest = Monomial::from_factors(m.factors().iter().filter(|(x, _)| *x != z).cloned());
            out += MultiPoly::term(rest, k.clone());
        }
    }
    out
}

/// The expanded series of a fraction case, through `order`.
pub fn expand_case(
    fc: &FractionCase,
    order: usize,
) -> Result<crate::series::PowerSeries, TheoremError> {
    let s = fc.cf.expand_fast(order);
    Ok(match fc.transform {
        SeriesTransform::Plain => s,
        SeriesTransform::Indecomposable => indecomposable_series(&s)?,
    })
}

pub fn verify_theorem(
    id: &str,
    n_max: Option<usize>,
    order: Option<usize>,
) -> Result<VerificationReport, TheoremError> {
    verify_theorem_with(
        id,
        &VerifyOptions {
            n_max,
            order,
            ..VerifyOptions::default()
        },
    )
}

pub fn verify_theorem_with(
    id: &str,
    opts: &VerifyOptions,
) -> Result<VerificationReport, TheoremError> {
    let case = find_theorem(id)?;
    let start = Instant::now();
    let n_max = opts.n_max.unwrap_or(case.default_n);
    let mut rep = match &case.body {
        Body::Fraction(fc) => {
            let order = opts.order.unwrap_or(n_max);
            run_fraction(case, fc, n_max, order, opts)?
        }
        Body::Identity { n_min, check } => run_identity(case, *n_min, n_max, opts.seed, check),
        Body::Witness { points, check } => run_witness_case(case, *points, opts.seed, *check),
    };
    rep.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    Ok(rep)
}

pub fn check_identity(id: &str, n_max: Option<usize>) -> Result<VerificationReport, TheoremError> {
    let case = find_theorem(id).map_err(|_| TheoremError::UnknownIdentity(id.to_string()))?;
    if case.kind != TheoremKind::Identity {
        return Err(TheoremError::UnknownIdentity(id.to_string()));
    }
    verify_theorem(id, n_max, None)
}

pub fn test_conjecture_v2(n_max: usize, order: usize) -> Result<VerificationReport, TheoremError> {
    verify_theorem("conj.v2.full", Some(n_max), Some(order))
}

fn run_fraction(
    case: &TheoremCase,
    fc: &FractionCase,
    n_max: usize,
    order: usize,
    opts: &VerifyOptions,
) -> Result<VerificationReport, TheoremError> {
    let top = n_max.min(order);
    let mut rep = VerificationReport::new(case.id, case.kind, 0, n_max, order, opts.seed);
    let extra = |p: MultiPoly| match &opts.extra {
        Some(s) => p.substitute(s),
        None => p,
    };
    if opts.extra.is_some() {
        rep.notes
            .push("extra substitution applied to both sides".to_string());
    }
    if top < n_max {
        rep.notes.push(format!(
            "sizes above the truncation order {order} are not compared"
        ));
    }
    let series = expand_case(fc, top)?;
    for n in 0..=top {
        let got = extra(enumerate_object(
            fc.object,
            n,
            fc.weight,
            fc.subst.as_ref(),
        )?);
        let want = &extra(series.coeff(n).clone());
        let outcome = if &got == want {
            Ok(())
        } else {
            let d = &got - want;
            let (m, _) = d.terms().next().expect("nonzero difference");
            Err(Discrepancy {
                n,
                monomial: Some(m.to_string()),
                expected: Some(want.coeff_of(m).to_string()),
                found: Some(got.coeff_of(m).to_string()),
                detail: format!("coefficient of t^{n} differs from the expanded fraction"),
            })
        };
        rep.record(n, outcome);
    }
    if let Some(link) = &fc.master {
        let (coh, disc) = check_coherence(fc, link)?;
        if !coh.passed {
            rep.passed = false;
            if rep.discrepancy.is_none() {
                rep.discrepancy = disc;
            }
        }
        rep.coherence = Some(coh);
    }
    Ok(rep)
}

fn level_mismatch(
    what: &str,
    level: usize,
    own: &MultiPoly,
    derived: &MultiPoly,
) -> Option<Discrepancy> {
    if own == derived {
        return None;
    }
    let d = own - derived;
    let (m, _) = d.terms().next().expect("nonzero difference");
    Some(Discrepancy {
        n: level,
        monomial: Some(m.to_string()),
        expected: Some(derived.coeff_of(m).to_string()),
        found: Some(own.coeff_of(m).to_string()),
        detail: format!("{what}_{level} differs from the coefficient derived from the master"),
    })
}

/// Compares this case's displayed coefficients with those obtained by
/// specializing its master, levels 0 (or 1) through `COHERENCE_LEVELS`.
pub fn check_coherence(
    fc: &FractionCase,
    link: &MasterLink,
) -> Result<(CoherenceResult, Option<Discrepancy>), TheoremError> {
    let master = find_theorem(link.master)?;
    let mfc = master
        .fraction_case()
        .ok_or_else(|| TheoremError::UnknownTheorem(link.master.to_string()))?;
    let derived = substitute_spec(&mfc.cf, &link.subst);
    let mut first = None;
    let l = COHERENCE_LEVELS;
    match link.mode {
        LinkMode::Coefficients => match (&fc.cf, &derived) {
            (FractionSpec::S(a), FractionSpec::S(b)) => {
                for k in 1..=l {
                    first = first.or_else(|| level_mismatch("alpha", k, &a.alpha(k), &b.alpha(k)));
                }
            }
            _ => {
                let (a, b) = (fc.cf.as_j(), derived.as_j());
                for k in 0..=l {
                    first = first.or_else(|| level_mismatch("gamma", k, &a.gamma(k), &b.gamma(k)));
                    if k >= 1 {
                        first = first.or_else(|| level_mismatch("beta", k, &a.beta(k), &b.beta(k)));
                    }
                }
            }
        },
        LinkMode::EvenPart => {
            let b = derived.as_j();
            let FractionSpec::S(a) = &fc.cf else {
                return Err(TheoremError::UnknownTheorem(format!(
                    "{}: even-part link needs an S-fraction",
                    link.master
                )));
            };
            for k in 0..=l {
                first =
                    first.or_else(|| level_mismatch("gamma", k, &MultiPoly::zero(), &b.gamma(k)));
                if k >= 1 {
                    first = first.or_else(|| level_mismatch("alpha", k, &a.alpha(k), &b.beta(k)));
                }
            }
        }
    }
    let res = CoherenceResult {
        master: link.master.to_string(),
        mode: link.mode,
        levels: l,
        passed: first.is_none(),
    };
    Ok((res, first))
}

fn run_identity(
    case: &TheoremCase,
    n_min: usize,
    n_max: usize,
    seed: u64,
    check: &SizeCheck,
) -> VerificationReport {
    let lo = n_min.min(n_max);
    let mut rep = VerificationReport::new(case.id, case.kind, lo, n_max, n_max, seed);
    let range: Vec<usize> = if n_min > n_max {
        vec![n_min]
    } else {
        (n_min..=n_max).collect()
    };
    for n in range {
        let outcome = check(n).map_err(|detail| Discrepancy {
            n,
            monomial: None,
            expected: None,
            found: None,
            detail,
        });
        rep.record(n, outcome);
    }
    rep
}

fn run_witness_case(
    case: &TheoremCase,
    points: usize,
    seed: u64,
    check: WitnessCheck,
) -> VerificationReport {
    let mut rep = VerificationReport::new(case.id, case.kind, 0, 5, 5, seed);
    let outcome = check(seed, points).map(|done| {
        rep.notes
            .push(format!("{done} admissible rational points checked"));
    });
    let outcome = outcome.map_err(|detail| Discrepancy {
        n: 5,
        monomial: None,
        expected: None,
        found: None,
        detail,
    });
    rep.record(5, outcome);
    rep
}

/// Runs every registered case at its default size, skipping what would
/// start after `budget_secs` have elapsed.
pub fn verify_all(
    budget_secs: Option<u64>,
    seed: u64,
) -> Vec<Result<VerificationReport, (String, String)>> {
    let start = Instant::now();
    let mut out = Vec::new();
    for case in registry() {
        if let Some(b) = budget_secs {
            if start.elapsed().as_secs() >= b {
                out.push(Err((
                    case.id.to_string(),
                    "skipped: budget exhausted".to_string(),
                )));
                continue;
            }
        }
        let opts = VerifyOptions {
            seed,
            ..VerifyOptions::default()
        };
        out.push(
            verify_theorem_with(case.id, &opts).map_err(|e| (case.id.to_string(), e.to_string())),
        );
    }
    out
}
