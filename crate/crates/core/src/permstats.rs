//! Permutations, their per-index statistics, and weighted enumeration.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::mpoly::{Family, Indeterminate, Monomial, MonomialCounter, MultiPoly, Substitution};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("not a bijection of [n]: {0:?}")]
    NotABijection(Vec<usize>),
    #[error("not a set partition: {0}")]
    NotAPartition(String),
    #[error("not a perfect matching: {0}")]
    NotAMatching(String),
    #[error("unknown weight map {0:?}")]
    UnknownWeightMap(String),
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("polynomial division left a remainder")]
    InexactDivision,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    word: Vec<usize>,
    inv: Vec<usize>,
}

impl Permutation {
    pub fn from_oneline(word: &[usize]) -> Result<Permutation, StatsError> {
        let n = word.len();
        let mut inv = vec![0; n];
        for (i, &v) in word.iter().enumerate() {
            if v == 0 || v > n || inv[v - 1] != 0 {
                return Err(StatsError::NotABijection(word.to_vec()));
            }
            inv[v - 1] = i + 1;
        }
        Ok(Permutation {
            word: word.to_vec(),
            inv,
        })
    }

    pub fn identity(n: usize) -> Permutation {
        let word: Vec<usize> = (1..=n).collect();
        Permutation {
            inv: word.clone(),
            word,
        }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// σ(i), 1-based.
    #[inline]
    pub fn at(&self, i: usize) -> usize {
        self.word[i - 1]
    }

    /// σ⁻¹(i), 1-based.
    #[inline]
    pub fn inv_at(&self, i: usize) -> usize {
        self.inv[i - 1]
    }

    pub fn oneline(&self) -> &[usize] {
        &self.word
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            word: self.inv.clone(),
            inv: self.word.clone(),
        }
    }

    /// R∘σ∘R with R(i) = n+1-i.
    pub fn reversal_conjugate(&self) -> Permutation {
        let n = self.len();
        let word: Vec<usize> = (1..=n).map(|i| n + 1 - self.at(n + 1 - i)).collect();
        Permutation::from_oneline(&word).expect("conjugate of a permutation")
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n + 1];
        let mut out = Vec::new();
        for s in 1..=n {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut j = self.at(s);
            while j != s {
                seen[j] = true;
                c.push(j);
                j = self.at(j);
            }
            out.push(c);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleClass {
    Cpeak,
    Cval,
    Cdrise,
    Cdfall,
    Fix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordClass {
    Erec,
    Earec,
    Rar,
    Nrar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexProfile {
    pub cycle_class: CycleClass,
    pub record_class: RecordClass,
    pub ucross: u32,
    pub unest: u32,
    pub lcross: u32,
    pub lnest: u32,
    pub lev: Option<u32>,
}

pub fn perm_from_oneline(word: &[usize]) -> Result<Permutation, StatsError> {
    Permutation::from_oneline(word)
}

pub fn perm_index_profile(s: &Permutation) -> Vec<IndexProfile> {
    let n = s.len();
    let mut out = Vec::with_capacity(n);
    // prefix max and suffix min of the one-line word
    let mut pre_max = vec![0usize; n + 1];
    for i in 1..=n {
        pre_max[i] = pre_max[i - 1].max(s.at(i));
    }
    let mut suf_min = vec![usize::MAX; n + 2];
    for i in (1..=n).rev() {
        suf_min[i] = suf_min[i + 1].min(s.at(i));
    }
    for i in 1..=n {
        let (v, pre) = (s.at(i), s.inv_at(i));
        let cycle_class = if v == i {
            CycleClass::Fix
        } else if pre < i && v < i {
            CycleClass::Cpeak
        } else if pre > i && v > i {
            CycleClass::Cval
        } else if pre < i {
            CycleClass::Cdrise
        } else {
            CycleClass::Cdfall
        };
        let rec = pre_max[i - 1] < v;
        let arec = suf_min[i + 1] > v;
        let record_class = match (rec, arec) {
            (true, true) => RecordClass::Rar,
            (true, false) => RecordClass::Erec,
            (false, true) => RecordClass::Earec,
            (false, false) => RecordClass::Nrar,
        };
        let (mut ucross, mut unest, mut lcross, mut lnest) = (0, 0, 0, 0);
        if v > i {
            for k in 1..i {
                let w = s.at(k);
                if w > i && w < v {
                    ucross += 1;
                } else if w > v {
                    unest += 1;
                }
            }
        } else if v < i {
            for l in i + 1..=n {
                let w = s.at(l);
                if w > v && w < i {
                    lcross += 1;
                } else if w < v {
                    lnest += 1;
                }
            }
        }
        let lev = (v == i).then(|| (1..i).filter(|&j| s.at(j) > i).count() as u32);
        out.push(IndexProfile {
            cycle_class,
            record_class,
            ucross,
            unest,
            lcross,
            lnest,
            lev,
        });
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PermStatTotals {
    pub n: u32,
    pub cyc: u32,
    pub exc: u32,
    pub aexc: u32,
    pub wex: u32,
    pub fix: u32,
    pub rec: u32,
    pub arec: u32,
    pub erec: u32,
    pub earec: u32,
    pub rar: u32,
    pub nrar: u32,
    pub cpeak: u32,
    pub cval: u32,
    pub cdrise: u32,
    pub cdfall: u32,
    pub eareccpeak: u32,
    pub eareccdfall: u32,
    pub ereccval: u32,
    pub ereccdrise: u32,
    pub nrcpeak: u32,
    pub nrcdfall: u32,
    pub nrcval: u32,
    pub nrcdrise: u32,
    pub rarfix: u32,
    pub nrfix: u32,
    pub ucrosscval: u32,
    pub ucrosscdrise: u32,
    pub lcrosscpeak: u32,
    pub lcrosscdfall: u32,
    pub unestcval: u32,
    pub unestcdrise: u32,
    pub lnestcpeak: u32,
    pub lnestcdfall: u32,
    pub ucross: u32,
    pub unest: u32,
    pub lcross: u32,
    pub lnest: u32,
    pub ujoin: u32,
    pub ljoin: u32,
    pub psnest: u32,
    /// fix(σ, ℓ): number of fixed points at level ℓ
    pub fix_by_level: Vec<u32>,
    pub inv: u32,
    pub cc: u32,
}

pub fn perm_stat_totals(s: &Permutation) -> PermStatTotals {
    totals_from_profile(s, &perm_index_profile(s))
}

pub fn totals_from_profile(s: &Permutation, prof: &[IndexProfile]) -> PermStatTotals {
    let n = s.len();
    let mut t = PermStatTotals {
        n: n as u32,
        ..Default::default()
    };
    for (k, p) in prof.iter().enumerate() {
        let i = k + 1;
        let v = s.at(i);
        if v > i {
            t.exc += 1;
        }
        if v < i {
            t.aexc += 1;
        }
        match p.record_class {
            RecordClass::Erec => {
                t.rec += 1;
                t.erec += 1;
            }
            RecordClass::Earec => {
                t.arec += 1;
                t.earec += 1;
            }
            RecordClass::Rar => {
                t.rec += 1;
                t.arec += 1;
                t.rar += 1;
            }
            RecordClass::Nrar => t.nrar += 1,
        }
        let nr = p.record_class == RecordClass::Nrar;
        match p.cycle_class {
            CycleClass::Cpeak => {
                t.cpeak += 1;
                if nr {
                    t.nrcpeak += 1
                } else {
                    t.eareccpeak += 1
                }
                t.lcrosscpeak += p.lcross;
                t.lnestcpeak += p.lnest;
            }
            CycleClass::Cdfall => {
                t.cdfall += 1;
                if nr {
                    t.nrcdfall += 1
                } else {
                    t.eareccdfall += 1
                }
                t.lcrosscdfall += p.lcross;
                t.lnestcdfall += p.lnest;
            }
            CycleClass::Cval => {
                t.cval += 1;
                if nr {
                    t.nrcval += 1
                } else {
                    t.ereccval += 1
                }
                t.ucrosscval += p.ucross;
                t.unestcval += p.unest;
            }
            CycleClass::Cdrise => {
                t.cdrise += 1;
                if nr {
                    t.nrcdrise += 1
                } else {
                    t.ereccdrise += 1
                }
                t.ucrosscdrise += p.ucross;
                t.unestcdrise += p.unest;
            }
            CycleClass::Fix => {
                t.fix += 1;
                if p.record_class == RecordClass::Rar {
                    t.rarfix += 1
                } else {
                    t.nrfix += 1
                }
                let l = p.lev.unwrap_or(0) as usize;
                if t.fix_by_level.len() <= l {
                    t.fix_by_level.resize(l + 1, 0);
                }
                t.fix_by_level[l] += 1;
                t.psnest += l as u32;
            }
        }
        t.ucross += p.ucross;
        t.unest += p.unest;
        t.lcross += p.lcross;
        t.lnest += p.lnest;
    }
    t.wex = t.exc + t.fix;
    t.ujoin = t.cdrise;
    t.ljoin = t.cdfall;
    t.cyc = s.cycles().len() as u32;
    let mut inv = 0;
    for i in 1..=n {
        for j in i + 1..=n {
            if s.at(i) > s.at(j) {
                inv += 1;
            }
        }
    }
    t.inv = inv;
    let mut m = 0;
    for i in 1..=n {
        m = m.max(s.at(i));
        if m == i {
            t.cc += 1;
        }
    }
    t
}

/// Everything a weight map may look at.
pub struct PermInfo<'a> {
    pub perm: &'a Permutation,
    pub profile: Vec<IndexProfile>,
    pub totals: PermStatTotals,
}

impl<'a> PermInfo<'a> {
    pub fn new(perm: &'a Permutation) -> PermInfo<'a> {
        let profile = perm_index_profile(perm);
        let totals = totals_from_profile(perm, &profile);
        PermInfo {
            perm,
            profile,
            totals,
        }
    }
}

fn v(name: &str) -> Indeterminate {
    Indeterminate::var(name)
}

pub fn perm_master_weight_first(s: &Permutation) -> Monomial {
    master_first(&perm_index_profile(s))
}

pub fn perm_master_weight_second(s: &Permutation) -> Monomial {
    let prof = perm_index_profile(s);
    let cyc = s.cycles().len() as u32;
    master_second(s, &prof, cyc)
}

fn master_first(prof: &[IndexProfile]) -> Monomial {
    let (a, b, c, d, e) = (
        Family::new("a"),
        Family::new("b"),
        Family::new("c"),
        Family::new("d"),
        Family::new("e"),
    );
    Monomial::from_factors(prof.iter().map(|p| {
        let x = match p.cycle_class {
            CycleClass::Cval => a.at2(p.ucross, p.unest),
            CycleClass::Cpeak => b.at2(p.lcross, p.lnest),
            CycleClass::Cdfall => c.at2(p.lcross, p.lnest),
            CycleClass::Cdrise => d.at2(p.ucross, p.unest),
            CycleClass::Fix => e.at(p.lev.unwrap_or(0)),
        };
        (x, 1)
    }))
}

fn master_second(s: &Permutation, prof: &[IndexProfile], cyc: u32) -> Monomial {
    let (a, b, c, d, e) = (
        Family::new("a"),
        Family::new("b"),
        Family::new("c"),
        Family::new("d"),
        Family::new("e"),
    );
    let mut f: Vec<(Indeterminate, u32)> = prof
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let x = match p.cycle_class {
                CycleClass::Cval => a.at(p.ucross + p.unest),
                CycleClass::Cpeak => b.at2(p.lcross, p.lnest),
                CycleClass::Cdfall => c.at2(p.lcross, p.lnest),
                CycleClass::Cdrise => {
                    let pre = s.inv_at(k + 1);
                    d.at2(p.ucross + p.unest, prof[pre - 1].unest)
                }
                CycleClass::Fix => e.at(p.lev.unwrap_or(0)),
            };
            (x, 1)
        })
        .collect();
    f.push((v("lam"), cyc));
    Monomial::from_factors(f)
}

pub type PermWeightFn = Arc<dyn Fn(&PermInfo) -> Monomial + Send + Sync>;

/// Named weight maps; ids may be joined with `*` to multiply them.
pub const PERM_WEIGHTS: &[(&str, &str)] = &[
    ("one", "1"),
    ("arec.erec", "x^arec y^erec"),
    ("arec2var", "x^arec y^erec u^(n-exc-arec) v^(exc-erec)"),
    ("cyc2var", "x^cyc y^erec u^(n-exc-cyc) v^(exc-erec)"),
    ("dk", "a^arec b^erec"),
    ("stirling", "x^cyc"),
    ("qn", "record/cycle classes with w[lev] on fixed points"),
    (
        "big",
        "qn times the eight refined crossing/nesting counts and s^psnest",
    ),
    (
        "crossnest",
        "refined crossings/nestings, joins and pseudo-nestings",
    ),
    (
        "pq.s.big1",
        "arec2var times pp^ucross pm^(lcross+ljoin) qp^unest qm^(lnest+psnest)",
    ),
    (
        "pq.s2.cyc",
        "x^earec y^wex u^(n-earec-wex) pp^(ucross+unest+cdrise+psnest) pm^lcross qm^lnest lam^cyc",
    ),
    (
        "arec.special",
        "z^arec y1^cval y2^cdrise u1^cpeak u2^nrcdfall w^(nrfix+eareccdfall) lam^cyc",
    ),
    (
        "inv.classes",
        "a^cval b^cdrise c^cpeak d^cdfall w^fix q^inv",
    ),
    (
        "master1",
        "a[ucross,unest] b/c[lcross,lnest] d[ucross,unest] e[lev]",
    ),
    (
        "master2",
        "lam^cyc a[ucross+unest] b/c[lcross,lnest] d[ucross+unest, unest at preimage] e[lev]",
    ),
    ("cyc", "lam^cyc"),
    ("zeta", "zeta^cc"),
    ("inv", "q^inv"),
];

fn mono(f: &[(&str, u32)]) -> Monomial {
    Monomial::from_factors(f.iter().map(|&(n, e)| (v(n), e)))
}

fn base_weight(id: &str) -> Result<PermWeightFn, StatsError> {
    let w: PermWeightFn = match id {
        "one" => Arc::new(|_| Monomial::one()),
        "arec.erec" => Arc::new(|p| {
            let t = &p.totals;
            mono(&[("x", t.arec), ("y", t.erec)])
        }),
        "arec2var" => Arc::new(|p| {
            let t = &p.totals;
            mono(&[
                ("x", t.arec),
                ("y", t.erec),
                ("u", t.n - t.exc - t.arec),
                ("v", t.exc - t.erec),
            ])
        }),
        "cyc2var" => Arc::new(|p| {
            let t = &p.totals;
            mono(&[
                ("x", t.cyc),
                ("y", t.erec),
                ("u", t.n - t.exc - t.cyc),
                ("v", t.exc - t.erec),
            ])
        }),
        "dk" => Arc::new(|p| mono(&[("a", p.totals.arec), ("b", p.totals.erec)])),
        "stirling" => Arc::new(|p| mono(&[("x", p.totals.cyc)])),
        "qn" => Arc::new(|p| qn_weight(&p.totals)),
        "big" => Arc::new(|p| {
            let t = &p.totals;
            qn_weight(t).mul(&mono(&[
                ("pp1", t.ucrosscval),
                ("pp2", t.ucrosscdrise),
                ("pm1", t.lcrosscpeak),
                ("pm2", t.lcrosscdfall),
                ("qp1", t.unestcval),
                ("qp2", t.unestcdrise),
                ("qm1", t.lnestcpeak),
                ("qm2", t.lnestcdfall),
                ("s", t.psnest),
            ]))
        }),
        "crossnest" => Arc::new(|p| {
            let t = &p.totals;
            mono(&[
                ("pp1", t.ucrosscval),
                ("pp2", t.ucrosscdrise),
                ("pm1", t.lcrosscpeak),
                ("pm2", t.lcrosscdfall),
                ("qp1", t.unestcval),
                ("qp2", t.unestcdrise),
                ("qm1", t.lnestcpeak),
                ("qm2", t.lnestcdfall),
                ("rp", t.ujoin),
                ("rm", t.ljoin),
                ("s", t.psnest),
            ])
        }),
        "pq.s.big1" => Arc::new(|p| {
            let t = &p.totals;
            mono(&[
                ("x", t.arec),
                ("y", t.erec),
                ("u", t.n - t.exc - t.arec),
                ("v", t.exc - t.erec),
                ("pp", t.ucross),
                ("pm", t.lcross + t.ljoin),
                ("qp", t.unest),
                ("qm", t.lnest + t.psnest),
            ])
        }),
        "pq.s2.cyc" => Arc::new(|p| {
            let t = &p.totals;
            mono(&[
                ("x", t.earec),
                ("y", t.wex),
                ("u", t.n - t.earec - t.wex),
                ("pp", t.ucross + t.unest + t.cdrise + t.psnest),
                ("pm", t.lcross),
                ("qm", t.lnest),
                ("lam", t.cyc),
            ])
        }),
        "arec.special" => Arc::new(|p| {
            let t = &p.totals;
            mono(&[
                ("z", t.arec),
                ("y1", t.cval),
                ("y2", t.cdrise),
                ("u1", t.cpeak),
                ("u2", t.nrcdfall),
                ("w", t.nrfix + t.eareccdfall),
                ("lam", t.cyc),
            ])
        }),
        "inv.classes" => Arc::new(|p| {
            let t = &p.totals;
            mono(&[
                ("a", t.cval),
                ("b", t.cdrise),
                ("c", t.cpeak),
                ("d", t.cdfall),
                ("w", t.fix),
                ("q", t.inv),
            ])
        }),
        "master1" => Arc::new(|p| master_first(&p.profile)),
        "master2" => Arc::new(|p| master_second(p.perm, &p.profile, p.totals.cyc)),
        "cyc" => Arc::new(|p| mono(&[("lam", p.totals.cyc)])),
        "zeta" => Arc::new(|p| mono(&[("zeta", p.totals.cc)])),
        "inv" => Arc::new(|p| mono(&[("q", p.totals.inv)])),
        other => return Err(StatsError::UnknownWeightMap(other.to_string())),
    };
    Ok(w)
}

fn qn_weight(t: &PermStatTotals) -> Monomial {
    let w = Family::new("w");
    let mut f = vec![
        (v("x1"), t.eareccpeak),
        (v("x2"), t.eareccdfall),
        (v("y1"), t.ereccval),
        (v("y2"), t.ereccdrise),
        (v("u1"), t.nrcpeak),
        (v("u2"), t.nrcdfall),
        (v("v1"), t.nrcval),
        (v("v2"), t.nrcdrise),
    ];
    for (l, &c) in t.fix_by_level.iter().enumerate() {
        f.push((w.at(l as u32), c));
    }
    Monomial::from_factors(f)
}

/// Resolves a weight id such as `"big*cyc"`.
pub fn perm_weight(id: &str) -> Result<PermWeightFn, StatsError> {
    let parts: Vec<PermWeightFn> = id
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
pub enum PermFamily {
    All,
    Avoid321,
    /// size is twice the argument
    CycleAlternating,
    FpfInvolutions,
    Indecomposable,
}

impl std::str::FromStr for PermFamily {
    type Err = StatsError;
    fn from_str(s: &str) -> Result<Self, StatsError> {
        Ok(match s {
            "all" => PermFamily::All,
            "avoid321" => PermFamily::Avoid321,
            "cycle_alternating" => PermFamily::CycleAlternating,
            "fpf_involutions" => PermFamily::FpfInvolutions,
            "indecomposable" => PermFamily::Indecomposable,
            other => return Err(StatsError::UnknownFamily(other.to_string())),
        })
    }
}

/// Advances to the next word in lexicographic order; false at the last one.
pub fn next_permutation(w: &mut [usize]) -> bool {
    let n = w.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && w[i - 1] >= w[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while w[j] <= w[i - 1] {
        j -= 1;
    }
    w.swap(i - 1, j);
    w[i..].reverse();
    true
}

/// All permutations of [n] whose first entry is `first`, in lexicographic order.
fn for_each_with_first<F: FnMut(&Permutation)>(n: usize, first: usize, mut f: F) {
    let mut w: Vec<usize> = std::iter::once(first)
        .chain((1..=n).filter(|&x| x != first))
        .collect();
    loop {
        let p = Permutation::from_oneline(&w).expect("lexicographic successor is a permutation");
        f(&p);
        if !next_permutation(&mut w[1..]) {
            break;
        }
    }
}

/// Calls `f` on every permutation of [n] in lexicographic order.
pub fn for_each_permutation<F: FnMut(&Permutation)>(n: usize, mut f: F) {
    if n == 0 {
        f(&Permutation::identity(0));
        return;
    }
    for first in 1..=n {
        for_each_with_first(n, first, &mut f);
    }
}

fn in_family(p: &Permutation, fam: PermFamily) -> bool {
    match fam {
        PermFamily::All => true,
        PermFamily::Avoid321 => {
            // no index is neither a record nor an antirecord
            let n = p.len();
            let mut suf_min = vec![usize::MAX; n + 2];
            for i in (1..=n).rev() {
                suf_min[i] = suf_min[i + 1].min(p.at(i));
            }
            let mut m = 0;
            for i in 1..=n {
                let x = p.at(i);
                if x < m && x > suf_min[i + 1] {
                    return false;
                }
                m = m.max(x);
            }
            true
        }
        PermFamily::CycleAlternating => (1..=p.len()).all(|i| {
            let (x, y) = (p.at(i), p.inv_at(i));
            (x > i && y > i) || (x < i && y < i)
        }),
        PermFamily::FpfInvolutions => (1..=p.len()).all(|i| p.at(i) != i && p.at(p.at(i)) == i),
        PermFamily::Indecomposable => {
            let mut m = 0;
            let n = p.len();
            for i in 1..n {
                m = m.max(p.at(i));
                if m == i {
                    return false;
                }
            }
            n > 0
        }
    }
}

/// Size of the objects behind series index `n` for a family.
pub fn family_size(fam: PermFamily, n: usize) -> usize {
    match fam {
        PermFamily::CycleAlternating => 2 * n,
        _ => n,
    }
}

/// Exact weighted sum over a family; parallel over the first entry with a
/// commutative merge, so the result does not depend on scheduling.
pub fn enumerate_perms_with(n: usize, fam: PermFamily, weight: &PermWeightFn) -> MultiPoly {
    let size = family_size(fam, n);
    if fam == PermFamily::FpfInvolutions {
        let ms = crate::matchstats::all_matchings(size / 2);
        if size % 2 == 1 {
            return MultiPoly::zero();
        }
        return ms
            .par_iter()
            .fold(MonomialCounter::new, |mut acc, m| {
                let p = m.involution();
                acc.add(weight(&PermInfo::new(&p)));
                acc
            })
            .reduce(MonomialCounter::new, MonomialCounter::merge)
            .into_poly();
    }
    if size == 0 {
        let p = Permutation::identity(0);
        if !in_family(&p, fam) {
            return MultiPoly::zero();
        }
        return MultiPoly::monomial(weight(&PermInfo::new(&p)));
    }
    (1..=size)
        .into_par_iter()
        .map(|first| {
            let mut acc = MonomialCounter::new();
            for_each_with_first(size, first, |p| {
                if in_family(p, fam) {
                    acc.add(weight(&PermInfo::new(p)));
                }
            });
            acc
        })
        .reduce(MonomialCounter::new, MonomialCounter::merge)
        .into_poly()
}

pub fn enumerate_perm_polynomial(
    n: usize,
    fam: PermFamily,
    weight: &str,
    subst: Option<&Substitution>,
) -> Result<MultiPoly, StatsError> {
    let w = perm_weight(weight)?;
    let p = enumerate_perms_with(n, fam, &w);
    Ok(match subst {
        Some(s) => p.substitute(s),
        None => p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(w: &[usize]) -> Permutation {
        Permutation::from_oneline(w).unwrap()
    }

    fn mono_text(s: &str) -> Monomial {
        let p = MultiPoly::parse(s).unwrap();
        let m = p.terms().next().unwrap().0.clone();
        m
    }

    #[test]
    fn construction() {
        assert_eq!(perm(&[1]).len(), 1);
        let s = perm(&[5, 6, 1, 4, 2, 7, 3]);
        assert_eq!(s.cycles(), vec![vec![1, 5, 2, 6, 7, 3], vec![4]]);
        assert!(matches!(
            Permutation::from_oneline(&[1, 1]),
            Err(StatsError::NotABijection(_))
        ));
    }

    #[test]
    fn profile_examples() {
        for p in perm_index_profile(&Permutation::identity(3)) {
            assert_eq!(
                (p.cycle_class, p.record_class, p.lev),
                (CycleClass::Fix, RecordClass::Rar, Some(0))
            );
        }
        let prof = perm_index_profile(&perm(&[5, 6, 1, 4, 2, 7, 3]));
        assert_eq!((prof[1].ucross, prof[1].unest), (1, 0));
        assert_eq!(
            (prof[3].cycle_class, prof[3].lev),
            (CycleClass::Fix, Some(2))
        );
        assert_eq!((prof[4].lcross, prof[4].lnest), (1, 0));
        let prof = perm_index_profile(&perm(&[3, 2, 1]));
        assert_eq!(
            (prof[1].cycle_class, prof[1].lev),
            (CycleClass::Fix, Some(1))
        );
        assert_eq!((prof[0].cycle_class, prof[0].unest), (CycleClass::Cval, 0));
        assert_eq!((prof[2].cycle_class, prof[2].lnest), (CycleClass::Cpeak, 0));
    }

    #[test]
    fn totals_examples() {
        let t = perm_stat_totals(&Permutation::identity(4));
        assert_eq!((t.cyc, t.fix, t.cc, t.inv), (4, 4, 4, 0));
        let t = perm_stat_totals(&perm(&[2, 1]));
        assert_eq!((t.inv, t.cyc, t.exc, t.cc), (1, 1, 1, 1));
        let t = perm_stat_totals(&perm(&[5, 6, 1, 4, 2, 7, 3]));
        assert_eq!((t.cyc, t.fix, t.exc, t.cc), (2, 1, 3, 1));
        let t = perm_stat_totals(&Permutation::identity(0));
        assert_eq!((t.cc, t.cyc, t.inv), (0, 0, 0));
    }

    #[test]
    fn master_weight_examples() {
        assert_eq!(
            perm_master_weight_first(&Permutation::identity(3)),
            mono_text("e[0]^3")
        );
        assert_eq!(
            perm_master_weight_first(&perm(&[2, 1])),
            mono_text("a[0,0]*b[0,0]")
        );
        assert_eq!(
            perm_master_weight_first(&perm(&[5, 6, 1, 4, 2, 7, 3])),
            mono_text("a[0,0]*a[1,0]*b[0,0]*b[1,0]*c[1,0]*d[0,0]*e[2]")
        );
        assert_eq!(
            perm_master_weight_second(&Permutation::identity(2)),
            mono_text("lam^2*e[0]^2")
        );
        assert_eq!(
            perm_master_weight_second(&perm(&[2, 1])),
            mono_text("lam*a[0]*b[0,0]")
        );
        assert_eq!(
            perm_master_weight_second(&perm(&[5, 6, 1, 4, 2, 7, 3])),
            mono_text("lam^2*a[0]*a[1]*b[0,0]*b[1,0]*c[1,0]*d[0,0]*e[2]")
        );
    }

    #[test]
    fn enumeration_examples() {
        let p = enumerate_perm_polynomial(3, PermFamily::All, "arec2var", None).unwrap();
        // every term has degree n; brute force over the six permutations
        assert_eq!(
            p,
            MultiPoly::parse("x^3 + 3*x^2*y + x*y^2 + x*y*u").unwrap()
        );
        let ones = Substitution::new()
            .set_text("x", "1")
            .set_text("y", "1")
            .set_text("u", "1")
            .set_text("v", "1");
        assert_eq!(p.substitute(&ones), MultiPoly::constant(6));
        let p = enumerate_perm_polynomial(3, PermFamily::Avoid321, "arec.erec", None).unwrap();
        assert_eq!(p, MultiPoly::parse("x^3 + 3*x^2*y + x*y^2").unwrap());
        let p = enumerate_perm_polynomial(2, PermFamily::CycleAlternating, "one", None).unwrap();
        assert_eq!(p, MultiPoly::constant(5));
        for fam in [
            PermFamily::All,
            PermFamily::Avoid321,
            PermFamily::CycleAlternating,
        ] {
            assert_eq!(
                enumerate_perm_polynomial(0, fam, "master1", None).unwrap(),
                MultiPoly::one()
            );
        }
        assert!(enumerate_perm_polynomial(2, PermFamily::All, "nope", None).is_err());
    }

    #[test]
    fn lexicographic_order() {
        let mut seen = Vec::new();
        for_each_permutation(3, |p| seen.push(p.oneline().to_vec()));
        assert_eq!(
            seen,
            vec![
                vec![1, 2, 3],
                vec![1, 3, 2],
                vec![2, 1, 3],
                vec![2, 3, 1],
                vec![3, 1, 2],
                vec![3, 2, 1]
            ]
        );
    }
}
