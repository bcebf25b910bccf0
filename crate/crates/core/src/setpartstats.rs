//! Set partitions: crossings, nestings, overlaps, coverings, records,
//! Wachs–White and intertwining statistics, master weights, enumeration.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::mpoly::{Family, Indeterminate, Monomial, MonomialCounter, MultiPoly, Substitution};
use crate::permstats::StatsError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetPartition {
    n: usize,
    /// blocks sorted internally and ordered by minimum
    blocks: Vec<Vec<usize>>,
    /// block index of each element (1-based elements, slot 0 unused)
    block_of: Vec<usize>,
    /// next larger element of the same block, 0 if none
    next: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementClass {
    Opener,
    Closer,
    Insider,
    Singleton,
}

impl SetPartition {
    pub fn from_blocks(blocks: &[Vec<usize>]) -> Result<SetPartition, StatsError> {
        let n: usize = blocks.iter().map(|b| b.len()).sum();
        let mut seen = vec![false; n + 1];
        let mut bs: Vec<Vec<usize>> = Vec::with_capacity(blocks.len());
        for b in blocks {
            if b.is_empty() {
                return Err(StatsError::NotAPartition("empty block".into()));
            }
            let mut b = b.clone();
            b.sort_unstable();
            for &x in &b {
                if x == 0 || x > n {
                    return Err(StatsError::NotAPartition(format!(
                        "element {x} outside [1,{n}]"
                    )));
                }
                if seen[x] {
                    return Err(StatsError::NotAPartition(format!("element {x} repeated")));
                }
                seen[x] = true;
            }
            bs.push(b);
        }
        bs.sort_by_key(|b| b[0]);
        Ok(SetPartition::build(n, bs))
    }

    /// From a restricted growth word with letters starting at 1.
    pub fn from_rgw(w: &[usize]) -> Result<SetPartition, StatsError> {
        let mut bs: Vec<Vec<usize>> = Vec::new();
        for (i, &c) in w.iter().enumerate() {
            if c == 0 || c > bs.len() + 1 {
                return Err(StatsError::NotAPartition(format!(
                    "not a restricted growth word: {w:?}"
                )));
            }
            if c == bs.len() + 1 {
                bs.push(Vec::new());
            }
            bs[c - 1].push(i + 1);
        }
        Ok(SetPartition::build(w.len(), bs))
    }

    fn build(n: usize, blocks: Vec<Vec<usize>>) -> SetPartition {
        let mut block_of = vec![0; n + 1];
        let mut next = vec![0; n + 1];
        for (k, b) in blocks.iter().enumerate() {
            for (t, &x) in b.iter().enumerate() {
                block_of[x] = k;
                if t + 1 < b.len() {
                    next[x] = b[t + 1];
                }
            }
        }
        SetPartition {
            n,
            blocks,
            block_of,
            next,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, j: usize) -> &[usize] {
        &self.blocks[self.block_of[j]]
    }

    /// Arcs between consecutive elements of a block, sorted.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut a: Vec<(usize, usize)> = (1..=self.n)
            .filter(|&i| self.next[i] != 0)
            .map(|i| (i, self.next[i]))
            .collect();
        a.sort_unstable();
        a
    }

    pub fn class(&self, j: usize) -> ElementClass {
        let b = self.block_of(j);
        if b.len() == 1 {
            ElementClass::Singleton
        } else if j == b[0] {
            ElementClass::Opener
        } else if j == b[b.len() - 1] {
            ElementClass::Closer
        } else {
            ElementClass::Insider
        }
    }

    /// Restricted growth word, letters from 1.
    pub fn rgw(&self) -> Vec<usize> {
        (1..=self.n).map(|j| self.block_of[j] + 1).collect()
    }
}

pub fn setpart_from_blocks(blocks: &[Vec<usize>]) -> Result<SetPartition, StatsError> {
    SetPartition::from_blocks(blocks)
}

pub fn sp_reverse(p: &SetPartition) -> SetPartition {
    let n = p.n;
    let bs: Vec<Vec<usize>> = p
        .blocks
        .iter()
        .map(|b| b.iter().map(|&x| n + 1 - x).collect())
        .collect();
    SetPartition::from_blocks(&bs).expect("reversal of a partition")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SPIndexProfile {
    pub element_class: ElementClass,
    pub cr: u32,
    pub ne: u32,
    pub qne: u32,
    pub ov: u32,
    pub cov: u32,
    pub erec: Option<bool>,
    pub brec: Option<bool>,
}

pub fn sp_index_profile(p: &SetPartition) -> Vec<SPIndexProfile> {
    let n = p.n;
    let arcs = p.arcs();
    let mins: Vec<usize> = p.blocks.iter().map(|b| b[0]).collect();
    let maxs: Vec<usize> = p.blocks.iter().map(|b| *b.last().unwrap()).collect();
    (1..=n)
        .map(|j| {
            let class = p.class(j);
            let qne = arcs.iter().filter(|&&(i, l)| i < j && j < l).count() as u32;
            let (mut cr, mut ne, mut ov, mut cov) = (0, 0, 0, 0);
            let k = p.next[j];
            if k != 0 {
                for &(i, m) in &arcs {
                    if i < j && m > j {
                        if m < k {
                            cr += 1;
                        } else if m > k {
                            ne += 1;
                        }
                    }
                }
                let own = p.block_of[j];
                for (b, (&lo, &hi)) in mins.iter().zip(&maxs).enumerate() {
                    if b != own && lo < j && j < hi {
                        if hi < maxs[own] {
                            ov += 1;
                        } else {
                            cov += 1;
                        }
                    }
                }
            }
            let (erec, brec) = if k != 0 {
                (Some(ne == 0), Some(cov == 0))
            } else {
                (None, None)
            };
            SPIndexProfile {
                element_class: class,
                cr,
                ne,
                qne,
                ov,
                cov,
                erec,
                brec,
            }
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SPStatTotals {
    pub n: u32,
    pub blocks: u32,
    pub m1: u32,
    pub m2: u32,
    pub crop: u32,
    pub crin: u32,
    pub neop: u32,
    pub nein: u32,
    pub cr: u32,
    pub ne: u32,
    pub psne: u32,
    pub ov: u32,
    pub cov: u32,
    pub ovin: u32,
    pub covin: u32,
    pub pscov: u32,
    pub erecop: u32,
    pub erecin: u32,
    pub nerecop: u32,
    pub nerecin: u32,
    pub brecop: u32,
    pub brecin: u32,
    pub nbrecop: u32,
    pub nbrecin: u32,
    pub lb: u32,
    pub ls: u32,
    pub ls_prime: u32,
    pub rb: u32,
    pub rs: u32,
    pub iota: u32,
    pub iota_prime: u32,
    pub cc: u32,
}

pub fn sp_stat_totals(p: &SetPartition) -> SPStatTotals {
    totals_from_profile(p, &sp_index_profile(p))
}

pub fn totals_from_profile(p: &SetPartition, prof: &[SPIndexProfile]) -> SPStatTotals {
    let n = p.n;
    let k = p.num_blocks();
    let mut t = SPStatTotals {
        n: n as u32,
        blocks: k as u32,
        ..Default::default()
    };
    for (idx, e) in prof.iter().enumerate() {
        let _j = idx + 1;
        match e.element_class {
            ElementClass::Singleton => {
                t.m1 += 1;
                t.psne += e.qne;
                t.pscov += e.qne;
            }
            ElementClass::Closer => t.m2 += 1,
            ElementClass::Opener => {
                t.crop += e.cr;
                t.neop += e.ne;
                t.ov += e.ov;
                t.cov += e.cov;
                if e.ne == 0 {
                    t.erecop += 1
                } else {
                    t.nerecop += 1
                }
                if e.cov == 0 {
                    t.brecop += 1
                } else {
                    t.nbrecop += 1
                }
            }
            ElementClass::Insider => {
                t.crin += e.cr;
                t.nein += e.ne;
                t.ovin += e.ov;
                t.covin += e.cov;
                if e.ne == 0 {
                    t.erecin += 1
                } else {
                    t.nerecin += 1
                }
                if e.cov == 0 {
                    t.brecin += 1
                } else {
                    t.nbrecin += 1
                }
            }
        }
    }
    t.cr = t.crop + t.crin;
    t.ne = t.neop + t.nein;

    // Wachs–White: blocks are indexed in order of their minima
    let mins: Vec<usize> = p.blocks.iter().map(|b| b[0]).collect();
    let maxs: Vec<usize> = p.blocks.iter().map(|b| *b.last().unwrap()).collect();
    for j in 1..=n {
        let b = p.block_of[j];
        t.ls += b as u32;
        if j > mins[b] {
            t.ls_prime += b as u32;
        }
        for c in 0..k {
            if mins[c] > mins[b] && mins[c] < j {
                t.lb += 1;
            }
            if mins[c] > mins[b] && maxs[c] > j {
                t.rb += 1;
            }
            if c < b && maxs[c] > j {
                t.rs += 1;
            }
        }
    }

    // intertwining: pairs b<c in different blocks with no element of either block strictly between
    let mut seen = vec![usize::MAX; k];
    for b in 1..=n {
        let bb = p.block_of[b];
        for c in b + 1..=n {
            let cb = p.block_of[c];
            if cb == bb {
                break;
            }
            if seen[cb] != b {
                seen[cb] = b;
                t.iota += 1;
            }
        }
    }
    t.iota_prime = t.iota - (k * k.saturating_sub(1) / 2) as u32;

    let mut m = 0;
    for j in 1..=n {
        m = m.max(maxs[p.block_of[j]]);
        if m == j {
            t.cc += 1;
        }
    }
    t
}

pub struct SPInfo<'a> {
    pub part: &'a SetPartition,
    pub profile: Vec<SPIndexProfile>,
    pub totals: SPStatTotals,
}

impl<'a> SPInfo<'a> {
    pub fn new(part: &'a SetPartition) -> SPInfo<'a> {
        let profile = sp_index_profile(part);
        let totals = totals_from_profile(part, &profile);
        SPInfo {
            part,
            profile,
            totals,
        }
    }
}

/// Master weight variants 1–4: which pair indexes the a (openers) and
/// d (insiders) letters, crossings/nestings or overlaps/coverings.
pub fn sp_master_weight(p: &SetPartition, variant: u8) -> Monomial {
    master(&sp_index_profile(p), variant)
}

fn master(prof: &[SPIndexProfile], variant: u8) -> Monomial {
    let (a, b, d, e) = (
        Family::new("a"),
        Family::new("b"),
        Family::new("d"),
        Family::new("e"),
    );
    let (op_ov, in_ov) = match variant {
        1 => (false, false),
        2 => (true, true),
        3 => (true, false),
        _ => (false, true),
    };
    Monomial::from_factors(prof.iter().map(|x| {
        let pair = |use_ov: bool| if use_ov { (x.ov, x.cov) } else { (x.cr, x.ne) };
        let ind = match x.element_class {
            ElementClass::Opener => {
                let (l, m) = pair(op_ov);
                a.at2(l, m)
            }
            ElementClass::Insider => {
                let (l, m) = pair(in_ov);
                d.at2(l, m)
            }
            ElementClass::Closer => b.at(x.qne),
            ElementClass::Singleton => e.at(x.qne),
        };
        (ind, 1)
    }))
}

pub type SPWeightFn = Arc<dyn Fn(&SPInfo) -> Monomial + Send + Sync>;

pub const SP_WEIGHTS: &[(&str, &str)] = &[
    ("one", "1"),
    ("blocks", "x^|pi|"),
    ("erec3", "x^|pi| y^erec v^(n-|pi|-erec)"),
    (
        "sixvar",
        "x1^m1 x2^m2 y1^erecin y2^erecop v1^nerecin v2^nerecop",
    ),
    (
        "crossnest",
        "sixvar times p1^crin p2^crop q1^nein q2^neop r^psne",
    ),
    (
        "ovcov",
        "block-record version with p1^ovin p2^ov q1^covin q2^cov r^pscov",
    ),
    ("btilde", "the nineteen-variable mixed polynomial"),
    ("master1", "a[cr,ne] b[qne] d[cr,ne] e[qne]"),
    ("master2", "a[ov,cov] b[qne] d[ov,cov] e[qne]"),
    ("master3", "a[ov,cov] b[qne] d[cr,ne] e[qne]"),
    ("master4", "a[cr,ne] b[qne] d[ov,cov] e[qne]"),
    ("lb", "q^lb"),
    ("ls", "q^ls"),
    ("lb.ls", "q^lb p^ls"),
    ("lb.lsprime", "q^lb p^ls'"),
    ("rs.rb", "q^rs p^rb"),
    ("iota", "q^iota"),
    ("iotaprime", "q^iota'"),
    ("zeta", "zeta^cc"),
];

fn v(name: &str) -> Indeterminate {
    Indeterminate::var(name)
}

fn mono(f: &[(&str, u32)]) -> Monomial {
    Monomial::from_factors(f.iter().map(|&(n, e)| (v(n), e)))
}

fn sixvar(t: &SPStatTotals) -> Monomial {
    mono(&[
        ("x1", t.m1),
        ("x2", t.m2),
        ("y1", t.erecin),
        ("y2", t.erecop),
        ("v1", t.nerecin),
        ("v2", t.nerecop),
    ])
}

fn base_weight(id: &str) -> Result<SPWeightFn, StatsError> {
    let w: SPWeightFn = match id {
        "one" => Arc::new(|_| Monomial::one()),
        "blocks" => Arc::new(|s| mono(&[("x", s.totals.blocks)])),
        "erec3" => Arc::new(|s| {
            let t = &s.totals;
            let erec = t.erecop + t.erecin;
            mono(&[("x", t.blocks), ("y", erec), ("v", t.n - t.blocks - erec)])
        }),
        "sixvar" => Arc::new(|s| sixvar(&s.totals)),
        "crossnest" => Arc::new(|s| {
            let t = &s.totals;
            sixvar(t).mul(&mono(&[
                ("p1", t.crin),
                ("p2", t.crop),
                ("q1", t.nein),
                ("q2", t.neop),
                ("r", t.psne),
            ]))
        }),
        "ovcov" => Arc::new(|s| {
            let t = &s.totals;
            mono(&[
                ("x1", t.m1),
                ("x2", t.m2),
                ("y1", t.brecin),
                ("y2", t.brecop),
                ("v1", t.nbrecin),
                ("v2", t.nbrecop),
                ("p1", t.ovin),
                ("p2", t.ov),
                ("q1", t.covin),
                ("q2", t.cov),
                ("r", t.pscov),
            ])
        }),
        "btilde" => Arc::new(|s| {
            let t = &s.totals;
            sixvar(t).mul(&mono(&[
                ("y1'", t.brecin),
                ("y2'", t.brecop),
                ("v1'", t.nbrecin),
                ("v2'", t.nbrecop),
                ("p1", t.crin),
                ("p2", t.crop),
                ("q1", t.nein),
                ("q2", t.neop),
                ("p1'", t.ovin),
                ("p2'", t.ov),
                ("q1'", t.covin),
                ("q2'", t.cov),
                ("r", t.psne),
            ]))
        }),
        "master1" => Arc::new(|s| master(&s.profile, 1)),
        "master2" => Arc::new(|s| master(&s.profile, 2)),
        "master3" => Arc::new(|s| master(&s.profile, 3)),
        "master4" => Arc::new(|s| master(&s.profile, 4)),
        "lb" => Arc::new(|s| mono(&[("q", s.totals.lb)])),
        "ls" => Arc::new(|s| mono(&[("q", s.totals.ls)])),
        "lb.ls" => Arc::new(|s| mono(&[("q", s.totals.lb), ("p", s.totals.ls)])),
        "lb.lsprime" => Arc::new(|s| mono(&[("q", s.totals.lb), ("p", s.totals.ls_prime)])),
        "rs.rb" => Arc::new(|s| mono(&[("q", s.totals.rs), ("p", s.totals.rb)])),
        "iota" => Arc::new(|s| mono(&[("q", s.totals.iota)])),
        "iotaprime" => Arc::new(|s| mono(&[("q", s.totals.iota_prime)])),
        "zeta" => Arc::new(|s| mono(&[("zeta", s.totals.cc)])),
        other => return Err(StatsError::UnknownWeightMap(other.to_string())),
    };
    Ok(w)
}

pub fn sp_weight(id: &str) -> Result<SPWeightFn, StatsError> {
    let parts: Vec<SPWeightFn> = id
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

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SPFamily {
    All,
    Indecomposable,
    ByBlockCount(usize),
}

impl std::str::FromStr for SPFamily {
    type Err = StatsError;
    fn from_str(s: &str) -> Result<Self, StatsError> {
        if let Some(k) = s.strip_prefix("blocks=") {
            return k
                .parse()
                .map(SPFamily::ByBlockCount)
                .map_err(|_| StatsError::UnknownFamily(s.to_string()));
        }
        match s {
            "all" => Ok(SPFamily::All),
            "indecomposable" => Ok(SPFamily::Indecomposable),
            other => Err(StatsError::UnknownFamily(other.to_string())),
        }
    }
}

fn extend_rgw<F: FnMut(&[usize])>(w: &mut Vec<usize>, maxv: usize, n: usize, f: &mut F) {
    if w.len() == n {
        f(w);
        return;
    }
    for c in 1..=maxv + 1 {
        w.push(c);
        extend_rgw(w, maxv.max(c), n, f);
        w.pop();
    }
}

/// Calls `f` on every restricted growth word of length n in lexicographic order.
pub fn for_each_rgw<F: FnMut(&[usize])>(n: usize, mut f: F) {
    let mut w = Vec::with_capacity(n);
    extend_rgw(&mut w, 0, n, &mut f);
}

pub fn all_set_partitions(n: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    for_each_rgw(n, |w| out.push(SetPartition::from_rgw(w).unwrap()));
    out
}

fn sp_in_family(s: &SPInfo, fam: SPFamily) -> bool {
    match fam {
        SPFamily::All => true,
        SPFamily::Indecomposable => s.totals.cc == 1,
        SPFamily::ByBlockCount(k) => s.part.num_blocks() == k,
    }
}

/// Exact weighted sum; prefixes of the growth word are distributed over
/// threads and merged by commutative addition.
pub fn enumerate_sp_with(n: usize, fam: SPFamily, weight: &SPWeightFn) -> MultiPoly {
    let plen = n.min(5);
    let mut prefixes = Vec::new();
    for_each_rgw(plen, |w| prefixes.push(w.to_vec()));
    prefixes
        .par_iter()
        .map(|pre| {
            let mut acc = MonomialCounter::new();
            let mut w = pre.clone();
            let maxv = pre.iter().copied().max().unwrap_or(0);
            extend_rgw(&mut w, maxv, n, &mut |word: &[usize]| {
                let p = SetPartition::from_rgw(word).unwrap();
                let info = SPInfo::new(&p);
                if sp_in_family(&info, fam) {
                    acc.add(weight(&info));
                }
            });
            acc
        })
        .reduce(MonomialCounter::new, MonomialCounter::merge)
        .into_poly()
}

pub fn enumerate_sp_polynomial(
    n: usize,
    fam: SPFamily,
    weight: &str,
    subst: Option<&Substitution>,
) -> Result<MultiPoly, StatsError> {
    let w = sp_weight(weight)?;
    let p = enumerate_sp_with(n, fam, &w);
    Ok(match subst {
        Some(s) => p.substitute(s),
        None => p,
    })
}
