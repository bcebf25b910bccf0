//! Perfect matchings of [2n]: parity-refined record and crossing/nesting
//! statistics, master weight, Touchard–Riordan polynomial.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::mpoly::{Family, Indeterminate, Monomial, MonomialCounter, MultiPoly, Substitution};
use crate::permstats::{Permutation, StatsError};
use crate::setpartstats::SetPartition;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    /// partner of each element, slot 0 unused
    partner: Vec<usize>,
}

impl Matching {
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Matching, StatsError> {
        let m = 2 * pairs.len();
        let mut partner = vec![0; m + 1];
        for &(a, b) in pairs {
            if a == b || a == 0 || b == 0 || a > m || b > m || partner[a] != 0 || partner[b] != 0 {
                return Err(StatsError::NotAMatching(format!("{pairs:?}")));
            }
            partner[a] = b;
            partner[b] = a;
        }
        Ok(Matching { partner })
    }

    /// Half-size: the matching lives on [2n].
    pub fn n(&self) -> usize {
        (self.partner.len() - 1) / 2
    }

    pub fn partner(&self, i: usize) -> usize {
        self.partner[i]
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (1..self.partner.len())
            .filter(|&i| self.partner[i] > i)
            .map(|i| (i, self.partner[i]))
            .collect()
    }

    pub fn involution(&self) -> Permutation {
        Permutation::from_oneline(&self.partner[1..]).expect("matching is an involution")
    }

    pub fn to_setpartition(&self) -> SetPartition {
        let bs: Vec<Vec<usize>> = self.pairs().into_iter().map(|(a, b)| vec![a, b]).collect();
        SetPartition::from_blocks(&bs).expect("pairs form a partition")
    }
}

fn extend<F: FnMut(&[usize])>(partner: &mut Vec<usize>, f: &mut F) {
    let m = partner.len() - 1;
    let Some(i) = (1..=m).find(|&i| partner[i] == 0) else {
        f(partner);
        return;
    };
    for j in i + 1..=m {
        if partner[j] == 0 {
            partner[i] = j;
            partner[j] = i;
            extend(partner, f);
            partner[i] = 0;
            partner[j] = 0;
        }
    }
}

/// All (2n−1)!! perfect matchings of [2n], pairing the smallest free
/// element first.
pub fn all_matchings(n: usize) -> Vec<Matching> {
    let mut out = Vec::new();
    let mut p = vec![0; 2 * n + 1];
    extend(&mut p, &mut |w: &[usize]| {
        out.push(Matching {
            partner: w.to_vec(),
        })
    });
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MatchStatTotals {
    pub n: u32,
    pub ecpar: u32,
    pub ocpar: u32,
    pub ecpnar: u32,
    pub ocpnar: u32,
    pub ecvr: u32,
    pub ocvr: u32,
    pub ecvnr: u32,
    pub ocvnr: u32,
    pub cr: u32,
    pub ne: u32,
    pub ecr: u32,
    pub ocr: u32,
    pub ene: u32,
    pub one: u32,
    /// Same four counts, classified by the parity of the third element.
    pub ecr3: u32,
    pub ocr3: u32,
    pub ene3: u32,
    pub one3: u32,
    pub cc: u32,
}

/// (cr, ne) at an opener j: arcs (i, l) with i < j and l inside or beyond j's arc.
fn opener_counts(m: &Matching, j: usize) -> (u32, u32) {
    let k = m.partner(j);
    let (mut cr, mut ne) = (0, 0);
    for i in 1..j {
        let l = m.partner(i);
        if l > j {
            if l < k {
                cr += 1;
            } else {
                ne += 1;
            }
        }
    }
    (cr, ne)
}

fn qne(m: &Matching, j: usize) -> u32 {
    (1..j).filter(|&i| m.partner(i) > j).count() as u32
}

pub fn matching_stat_totals(m: &Matching) -> MatchStatTotals {
    let size = 2 * m.n();
    let mut t = MatchStatTotals {
        n: m.n() as u32,
        ..Default::default()
    };
    for j in 1..=size {
        let k = m.partner(j);
        let even = j % 2 == 0;
        if k > j {
            let (cr, ne) = opener_counts(m, j);
            t.cr += cr;
            t.ne += ne;
            if even {
                t.ecr += cr;
                t.ene += ne;
            } else {
                t.ocr += cr;
                t.one += ne;
            }
            for i in 1..j {
                let l = m.partner(i);
                if l > j && l < k {
                    if l % 2 == 0 {
                        t.ecr3 += 1
                    } else {
                        t.ocr3 += 1
                    }
                } else if l > k {
                    if k % 2 == 0 {
                        t.ene3 += 1
                    } else {
                        t.one3 += 1
                    }
                }
            }
            let rec = ne == 0;
            match (even, rec) {
                (true, true) => t.ecvr += 1,
                (false, true) => t.ocvr += 1,
                (true, false) => t.ecvnr += 1,
                (false, false) => t.ocvnr += 1,
            }
        } else {
            // a peak is an antirecord iff no later element is matched below its partner
            let arec = (j + 1..=size).all(|l| m.partner(l) > k);
            match (even, arec) {
                (true, true) => t.ecpar += 1,
                (false, true) => t.ocpar += 1,
                (true, false) => t.ecpnar += 1,
                (false, false) => t.ocpnar += 1,
            }
        }
    }
    let mut mx = 0;
    for j in 1..=size {
        mx = mx.max(m.partner(j));
        if mx == j {
            t.cc += 1;
        }
    }
    t
}

pub fn matching_master_weight(m: &Matching) -> Monomial {
    let (a, b) = (Family::new("a"), Family::new("b"));
    let size = 2 * m.n();
    Monomial::from_factors((1..=size).map(|j| {
        if m.partner(j) > j {
            let (cr, ne) = opener_counts(m, j);
            (a.at2(cr, ne), 1)
        } else {
            (b.at(qne(m, j)), 1)
        }
    }))
}

fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let mut r = BigInt::from(1);
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Crossing-count polynomial of perfect matchings of [2n] from the ballot-number
/// closed form, by exact division by (1−p)^n.
pub fn touchard_riordan(n: usize) -> Result<MultiPoly, StatsError> {
    let nn = n as u64;
    let top = (0..=nn).map(|k| k * (k + 1) / 2).max().unwrap_or(0) as usize;
    let mut num = vec![BigInt::from(0); top + 1];
    for k in 0..=nn {
        let t = binom(2 * nn, nn + k) - binom(2 * nn, nn + k + 1);
        let e = (k * (k + 1) / 2) as usize;
        if k % 2 == 0 {
            num[e] += t;
        } else {
            num[e] -= t;
        }
    }
    // divide by (1 − p), n times
    for _ in 0..n {
        let mut q = vec![BigInt::from(0); num.len()];
        let mut acc = BigInt::from(0);
        for (i, c) in num.iter().enumerate() {
            acc += c;
            q[i] = acc.clone();
        }
        if !acc.is_zero() {
            return Err(StatsError::InexactDivision);
        }
        num = q;
        while num.len() > 1 && num.last().map_or(false, |c| c.is_zero()) {
            num.pop();
        }
    }
    let p = Indeterminate::var("p");
    let mut out = MultiPoly::zero();
    for (e, c) in num.into_iter().enumerate() {
        if !c.is_zero() {
            out = out + MultiPoly::term(Monomial::from_factors([(p.clone(), e as u32)]), c);
        }
    }
    Ok(out)
}

pub struct MatchInfo<'a> {
    pub matching: &'a Matching,
    pub totals: MatchStatTotals,
}

pub type MatchWeightFn = Arc<dyn Fn(&MatchInfo) -> Monomial + Send + Sync>;

pub const MATCH_WEIGHTS: &[(&str, &str)] = &[
    ("one", "1"),
    ("fourvar.a", "x^ecpar y^ocpar u^ecpnar v^ocpnar"),
    ("fourvar.b", "x^ocvr y^ecvr u^ocvnr v^ecvnr"),
    ("pq", "fourvar.a times p^cr q^ne"),
    (
        "pq.pm",
        "fourvar.a times pp^ocr3 pm^ecr3 qp^one3 qm^ene3 (third-element parity)",
    ),
    ("pq.pm.b", "fourvar.b times pp^ecr pm^ocr qp^ene qm^one"),
    (
        "sixvar",
        "fourvar.a times xbar^(odd valleys) ybar^(even valleys)",
    ),
    ("master", "a[cr,ne] on openers, b[qne] on closers"),
    ("cr", "p^cr"),
    ("zeta", "zeta^cc"),
];

fn mono(f: &[(&str, u32)]) -> Monomial {
    Monomial::from_factors(f.iter().map(|&(n, e)| (Indeterminate::var(n), e)))
}

fn four_a(t: &MatchStatTotals) -> Monomial {
    mono(&[
        ("x", t.ecpar),
        ("y", t.ocpar),
        ("u", t.ecpnar),
        ("v", t.ocpnar),
    ])
}

fn four_b(t: &MatchStatTotals) -> Monomial {
    mono(&[("x", t.ocvr), ("y", t.ecvr), ("u", t.ocvnr), ("v", t.ecvnr)])
}

fn base_weight(id: &str) -> Result<MatchWeightFn, StatsError> {
    let w: MatchWeightFn = match id {
        "one" => Arc::new(|_| Monomial::one()),
        "fourvar.a" => Arc::new(|m| four_a(&m.totals)),
        "fourvar.b" => Arc::new(|m| four_b(&m.totals)),
        "pq" => {
            Arc::new(|m| four_a(&m.totals).mul(&mono(&[("p", m.totals.cr), ("q", m.totals.ne)])))
        }
        "pq.pm" => Arc::new(|m| {
            let t = &m.totals;
            four_a(t).mul(&mono(&[
                ("pp", t.ocr3),
                ("pm", t.ecr3),
                ("qp", t.one3),
                ("qm", t.ene3),
            ]))
        }),
        "pq.pm.b" => Arc::new(|m| {
            let t = &m.totals;
            four_b(t).mul(&mono(&[
                ("pp", t.ecr),
                ("pm", t.ocr),
                ("qp", t.ene),
                ("qm", t.one),
            ]))
        }),
        "sixvar" => Arc::new(|m| {
            let t = &m.totals;
            four_a(t).mul(&mono(&[
                ("xbar", t.ocvr + t.ocvnr),
                ("ybar", t.ecvr + t.ecvnr),
            ]))
        }),
        "master" => Arc::new(|m| matching_master_weight(m.matching)),
        "cr" => Arc::new(|m| mono(&[("p", m.totals.cr)])),
        "zeta" => Arc::new(|m| mono(&[("zeta", m.totals.cc)])),
        other => return Err(StatsError::UnknownWeightMap(other.to_string())),
    };
    Ok(w)
}

pub fn match_weight(id: &str) -> Result<MatchWeightFn, StatsError> {
    let parts: Vec<MatchWeightFn> = id
        .split('*')
        .map(|s| base_weight(s.trim()))
        .collect::<Result<_, _>>()?;
    if parts.len() == 1 {
        return Ok(parts.into_iter().next().unwrap());
    }
    Ok(Arc::new(move |p| {
        parts.iter().fold(Monomial::one(), |acc, w| acc.mul(&w(p)))
    }))
}

/// Streams over matchings: the first two pairings are fixed per shard and
/// the rest is extended in place, so nothing is materialized.
pub fn enumerate_matchings_with(n: usize, weight: &MatchWeightFn) -> MultiPoly {
    let mut shards = Vec::new();
    let depth = n.min(2);
    collect_prefixes(&mut vec![0; 2 * n + 1], depth, &mut shards);
    shards
        .into_par_iter()
        .map(|mut p| {
            let mut acc = MonomialCounter::new();
            extend(&mut p, &mut |w: &[usize]| {
                let m = Matching {
                    partner: w.to_vec(),
                };
                let info = MatchInfo {
                    matching: &m,
                    totals: matching_stat_totals(&m),
                };
                acc.add(weight(&info));
            });
            acc
        })
        .reduce(MonomialCounter::new, MonomialCounter::merge)
        .into_poly()
}

fn collect_prefixes(partner: &mut Vec<usize>, depth: usize, out: &mut Vec<Vec<usize>>) {
    let m = partner.len() - 1;
    let free = (1..=m).find(|&i| partner[i] == 0);
    let (Some(i), true) = (free, depth > 0) else {
        out.push(partner.clone());
        return;
    };
    for j in i + 1..=m {
        if partner[j] == 0 {
            partner[i] = j;
            partner[j] = i;
            collect_prefixes(partner, depth - 1, out);
            partner[i] = 0;
            partner[j] = 0;
        }
    }
}

pub fn enumerate_matching_polynomial(
    n: usize,
    weight: &str,
    subst: Option<&Substitution>,
) -> Result<MultiPoly, StatsError> {
    let w = match_weight(weight)?;
    let p = enumerate_matchings_with(n, &w);
    Ok(match subst {
        Some(s) => p.substitute(s),
        None => p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: &[(usize, usize)]) -> Matching {
        Matching::from_pairs(p).unwrap()
    }

    fn mono_text(s: &str) -> Monomial {
        let p = MultiPoly::parse(s).unwrap();
        let m = p.terms().next().unwrap().0.clone();
        m
    }

    #[test]
    fn totals_examples() {
        let t = matching_stat_totals(&m(&[(1, 2)]));
        assert_eq!((t.ecpar, t.ocvr, t.cr, t.ne, t.cc), (1, 1, 0, 0, 1));
        let t = matching_stat_totals(&m(&[(1, 3), (2, 4)]));
        assert_eq!((t.cr, t.ecr, t.ocr), (1, 1, 0));
        let t = matching_stat_totals(&m(&[(1, 4), (2, 3)]));
        assert_eq!((t.ne, t.ene), (1, 1));
        // peak 4 (even) is an antirecord; peak 3 (odd) is not, since 4 is matched to 1 < 2
        assert_eq!((t.ecpar, t.ocpnar, t.ocpar, t.ecpnar), (1, 1, 0, 0));
    }

    #[test]
    fn master_examples() {
        assert_eq!(
            matching_master_weight(&m(&[(1, 2)])),
            mono_text("a[0,0]*b[0]")
        );
        assert_eq!(
            matching_master_weight(&m(&[(1, 3), (2, 4)])),
            mono_text("a[0,0]*a[1,0]*b[0]*b[1]")
        );
        assert_eq!(
            matching_master_weight(&m(&[(1, 2), (3, 4)])),
            mono_text("a[0,0]^2*b[0]^2")
        );
    }

    #[test]
    fn touchard_riordan_examples() {
        assert_eq!(
            touchard_riordan(2).unwrap(),
            MultiPoly::parse("2 + p").unwrap()
        );
        assert_eq!(touchard_riordan(0).unwrap(), MultiPoly::one());
        let e = enumerate_matching_polynomial(3, "cr", None).unwrap();
        assert_eq!(touchard_riordan(3).unwrap(), e);
    }

    #[test]
    fn enumeration_examples() {
        let p = enumerate_matching_polynomial(3, "zeta", None).unwrap();
        assert_eq!(p, MultiPoly::parse("10*zeta + 4*zeta^2 + zeta^3").unwrap());
        let p = enumerate_matching_polynomial(4, "zeta", None).unwrap();
        assert_eq!(
            p,
            MultiPoly::parse("74*zeta + 24*zeta^2 + 6*zeta^3 + zeta^4").unwrap()
        );
        assert_eq!(
            enumerate_matching_polynomial(1, "fourvar.a", None).unwrap(),
            MultiPoly::parse("x").unwrap()
        );
        assert_eq!(all_matchings(0).len(), 1);
        assert_eq!(all_matchings(4).len(), 105);
    }
}
