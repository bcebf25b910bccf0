//! Labeled colored Motzkin paths and the bijections that carry
//! permutations (Foata–Zeilberger, Biane) and set partitions
//! (KZ, Flajolet and two hybrids) onto them.
//!
//! Level-step colors for permutations: 1 = cycle double fall,
//! 2 = cycle double rise, 3 = fixed point. For set partitions:
//! 1 = insider, 2 = singleton.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::mpoly::{Family, MultiPoly};
use crate::permstats::Permutation;
use crate::series::JFractionSpec;
use crate::setpartstats::{sp_index_profile, sp_reverse, ElementClass, SetPartition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("bijection {bijection} does not take a {object}")]
    TypeMismatch {
        bijection: Bijection,
        object: &'static str,
    },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("malformed path json: {0}")]
    Json(String),
    #[error("unknown bijection {0:?}")]
    UnknownBijection(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepKind {
    Rise,
    Fall,
    Level,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColoredStep {
    pub kind: StepKind,
    /// 1 for rises and falls
    pub color: u8,
}

impl ColoredStep {
    pub const RISE: ColoredStep = ColoredStep {
        kind: StepKind::Rise,
        color: 1,
    };
    pub const FALL: ColoredStep = ColoredStep {
        kind: StepKind::Fall,
        color: 1,
    };

    pub fn level(color: u8) -> ColoredStep {
        ColoredStep {
            kind: StepKind::Level,
            color,
        }
    }

    fn delta(self) -> i64 {
        match self.kind {
            StepKind::Rise => 1,
            StepKind::Fall => -1,
            StepKind::Level => 0,
        }
    }
}

impl fmt::Display for ColoredStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StepKind::Rise => write!(f, "R"),
            StepKind::Fall => write!(f, "F"),
            StepKind::Level => write!(f, "L{}", self.color),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Single(u32),
    Pair(u32, u32),
}

impl Label {
    fn parts(self) -> Vec<u32> {
        match self {
            Label::Single(a) => vec![a],
            Label::Pair(a, b) => vec![a, b],
        }
    }

    /// ξ for singly labeled paths, ξ″ is not accessible here.
    pub fn first(self) -> u32 {
        match self {
            Label::Single(a) | Label::Pair(a, _) => a,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledMotzkinPath {
    steps: Vec<ColoredStep>,
    labels: Vec<Label>,
    heights: Vec<i64>,
}

impl LabeledMotzkinPath {
    pub fn new(
        steps: Vec<ColoredStep>,
        labels: Vec<Label>,
    ) -> Result<LabeledMotzkinPath, PathError> {
        if steps.len() != labels.len() {
            return Err(PathError::InvalidPath(format!(
                "{} steps but {} labels",
                steps.len(),
                labels.len()
            )));
        }
        let mut heights = Vec::with_capacity(steps.len() + 1);
        let mut h = 0i64;
        heights.push(0);
        for s in &steps {
            h += s.delta();
            heights.push(h);
        }
        Ok(LabeledMotzkinPath {
            steps,
            labels,
            heights,
        })
    }

    pub fn empty() -> LabeledMotzkinPath {
        LabeledMotzkinPath {
            steps: vec![],
            labels: vec![],
            heights: vec![0],
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[ColoredStep] {
        &self.steps
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// h_0..h_n; may be negative for paths that are not Motzkin.
    pub fn heights(&self) -> &[i64] {
        &self.heights
    }

    pub fn is_motzkin(&self) -> bool {
        self.heights.iter().all(|&h| h >= 0) && self.heights.last() == Some(&0)
    }

    /// Copy with label `i` (1-based) replaced.
    pub fn with_label(&self, i: usize, l: Label) -> LabeledMotzkinPath {
        let mut p = self.clone();
        p.labels[i - 1] = l;
        p
    }

    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .zip(&self.labels)
            .map(|(s, l)| match s.kind {
                StepKind::Rise => json!({"kind": "R", "label": l.parts()}),
                StepKind::Fall => json!({"kind": "F", "label": l.parts()}),
                StepKind::Level => json!({"kind": "L", "color": s.color, "label": l.parts()}),
            })
            .collect();
        json!({ "steps": steps })
    }

    pub fn from_json(v: &Value) -> Result<LabeledMotzkinPath, PathError> {
        let bad = |m: &str| PathError::Json(m.to_string());
        let arr = v
            .get("steps")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"steps\" array"))?;
        let mut steps = Vec::with_capacity(arr.len());
        let mut labels = Vec::with_capacity(arr.len());
        for (i, s) in arr.iter().enumerate() {
            let kind = s
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| bad(&format!("step {} has no kind", i + 1)))?;
            let color = match s.get("color") {
                None => 1,
                Some(c) => c
                    .as_u64()
                    .filter(|&c| (1..=255).contains(&c))
                    .ok_or_else(|| bad("color must be a positive integer"))?
                    as u8,
            };
            let step = match kind {
                "R" | "U" | "rise" => ColoredStep::RISE,
                "F" | "D" | "fall" => ColoredStep::FALL,
                "L" | "level" => ColoredStep::level(color),
                other => return Err(bad(&format!("unknown step kind {other:?}"))),
            };
            let lab: Vec<u32> = match s.get("label") {
                None => vec![1],
                Some(Value::Array(a)) => a
                    .iter()
                    .map(|x| {
                        x.as_u64()
                            .map(|x| x as u32)
                            .ok_or_else(|| bad("labels must be integers"))
                    })
                    .collect::<Result<_, _>>()?,
                Some(x) => vec![x.as_u64().ok_or_else(|| bad("labels must be integers"))? as u32],
            };
            let label = match lab.as_slice() {
                [a] => Label::Single(*a),
                [a, b] => Label::Pair(*a, *b),
                _ => return Err(bad("a label has one or two entries")),
            };
            steps.push(step);
            labels.push(label);
        }
        LabeledMotzkinPath::new(steps, labels)
    }
}

impl fmt::Display for LabeledMotzkinPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, l)) in self.steps.iter().zip(&self.labels).enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match l {
                Label::Single(a) => write!(f, "{s}({a})")?,
                Label::Pair(a, b) => write!(f, "{s}({a},{b})")?,
            }
        }
        Ok(())
    }
}

pub fn path_heights(p: &LabeledMotzkinPath) -> Vec<i64> {
    p.heights.clone()
}

pub type BoundFn = Arc<dyn Fn(u32) -> (u32, u32) + Send + Sync>;

/// Label bounds by step type and starting height. Singly labeled
/// functions ignore the second component of each bound.
#[derive(Clone)]
pub struct PossibilityFunction {
    name: String,
    doubly: bool,
    rise: BoundFn,
    fall: BoundFn,
    levels: Vec<BoundFn>,
}

impl fmt::Debug for PossibilityFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PossibilityFunction({}, {} level colors)",
            self.name,
            self.levels.len()
        )
    }
}

fn single<F: Fn(u32) -> u32 + Send + Sync + 'static>(f: F) -> BoundFn {
    Arc::new(move |k| (f(k), 1))
}

fn pair<F: Fn(u32) -> (u32, u32) + Send + Sync + 'static>(f: F) -> BoundFn {
    Arc::new(f)
}

impl PossibilityFunction {
    pub fn new<R, F>(name: &str, rise: R, fall: F, levels: Vec<BoundFn>) -> PossibilityFunction
    where
        R: Fn(u32) -> u32 + Send + Sync + 'static,
        F: Fn(u32) -> u32 + Send + Sync + 'static,
    {
        PossibilityFunction {
            name: name.into(),
            doubly: false,
            rise: single(rise),
            fall: single(fall),
            levels,
        }
    }

    pub fn level_bound<F: Fn(u32) -> u32 + Send + Sync + 'static>(f: F) -> BoundFn {
        single(f)
    }

    /// Unlabeled Motzkin paths with the given number of level colors.
    pub fn motzkin(colors: usize) -> PossibilityFunction {
        PossibilityFunction::new(
            "motzkin",
            |_| 1,
            |_| 1,
            (0..colors).map(|_| single(|_| 1)).collect(),
        )
    }

    pub fn dyck() -> PossibilityFunction {
        PossibilityFunction::new("dyck", |_| 1, |_| 1, vec![])
    }

    /// A_k = k+1, B_k = k, C⁽¹⁾_k = C⁽²⁾_k = k, C⁽³⁾_k = 1.
    pub fn fz() -> PossibilityFunction {
        PossibilityFunction::new(
            "fz",
            |k| k + 1,
            |k| k,
            vec![single(|k| k), single(|k| k), single(|_| 1)],
        )
    }

    /// Doubly labeled: (1,1) rises, (k,k) falls, (1,k), (k,1), (1,1) levels.
    pub fn biane() -> PossibilityFunction {
        PossibilityFunction {
            name: "biane".into(),
            doubly: true,
            rise: pair(|_| (1, 1)),
            fall: pair(|k| (k, k)),
            levels: vec![pair(|k| (1, k)), pair(|k| (k, 1)), pair(|_| (1, 1))],
        }
    }

    /// A_k = 1, B_k = k, C⁽¹⁾_k = k, C⁽²⁾_k = 1; shared by all four
    /// set-partition bijections.
    pub fn set_partition() -> PossibilityFunction {
        PossibilityFunction::new(
            "set-partition",
            |_| 1,
            |k| k,
            vec![single(|k| k), single(|_| 1)],
        )
    }

    pub fn for_bijection(b: Bijection) -> PossibilityFunction {
        match b {
            Bijection::FZ => PossibilityFunction::fz(),
            Bijection::Biane => PossibilityFunction::biane(),
            _ => PossibilityFunction::set_partition(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_doubly(&self) -> bool {
        self.doubly
    }

    pub fn colors(&self) -> usize {
        self.levels.len()
    }

    fn bound_fn(&self, s: ColoredStep) -> Option<&BoundFn> {
        match s.kind {
            StepKind::Rise if s.color == 1 => Some(&self.rise),
            StepKind::Fall if s.color == 1 => Some(&self.fall),
            StepKind::Level if s.color >= 1 => self.levels.get(s.color as usize - 1),
            _ => None,
        }
    }

    /// Admissible labels for step `s` starting at height `h`.
    pub fn labels(&self, s: ColoredStep, h: u32) -> Vec<Label> {
        if s.kind == StepKind::Fall && h == 0 {
            return vec![];
        }
        let Some(f) = self.bound_fn(s) else {
            return vec![];
        };
        let (a, b) = f(h);
        if self.doubly {
            (1..=a)
                .flat_map(|x| (1..=b).map(move |y| Label::Pair(x, y)))
                .collect()
        } else {
            (1..=a).map(Label::Single).collect()
        }
    }

    /// Every step type, rises and falls first, then level colors.
    pub fn step_types(&self) -> Vec<ColoredStep> {
        let mut v = vec![ColoredStep::RISE, ColoredStep::FALL];
        v.extend((1..=self.levels.len() as u8).map(ColoredStep::level));
        v
    }

    fn admits(&self, s: ColoredStep, h: u32, l: Label) -> bool {
        let Some(f) = self.bound_fn(s) else {
            return false;
        };
        let (a, b) = f(h);
        match (l, self.doubly) {
            (Label::Single(x), false) => x >= 1 && x <= a,
            (Label::Pair(x, y), true) => x >= 1 && x <= a && y >= 1 && y <= b,
            _ => false,
        }
    }
}

/// Motzkin condition plus every label inside its bound.
pub fn path_validate(p: &LabeledMotzkinPath, pf: &PossibilityFunction) -> bool {
    first_violation(p, pf).is_none()
}

fn first_violation(p: &LabeledMotzkinPath, pf: &PossibilityFunction) -> Option<String> {
    if !p.is_motzkin() {
        return Some("not a Motzkin path (negative height or nonzero end)".into());
    }
    for (i, (&s, &l)) in p.steps.iter().zip(&p.labels).enumerate() {
        let h = p.heights[i] as u32;
        if !pf.admits(s, h, l) {
            return Some(format!(
                "step {} ({s} at height {h}) has inadmissible label {l:?} under {}",
                i + 1,
                pf.name
            ));
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bijection {
    FZ,
    Biane,
    KZ,
    Flajolet,
    Hybrid3,
    Hybrid4,
}

impl Bijection {
    pub const ALL: [Bijection; 6] = [
        Bijection::FZ,
        Bijection::Biane,
        Bijection::KZ,
        Bijection::Flajolet,
        Bijection::Hybrid3,
        Bijection::Hybrid4,
    ];

    pub fn on_permutations(self) -> bool {
        matches!(self, Bijection::FZ | Bijection::Biane)
    }
}

impl fmt::Display for Bijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Bijection::FZ => "fz",
            Bijection::Biane => "biane",
            Bijection::KZ => "kz",
            Bijection::Flajolet => "flajolet",
            Bijection::Hybrid3 => "hybrid3",
            Bijection::Hybrid4 => "hybrid4",
        };
        f.write_str(s)
    }
}

impl FromStr for Bijection {
    type Err = PathError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fz" | "foata-zeilberger" => Ok(Bijection::FZ),
            "biane" => Ok(Bijection::Biane),
            "kz" => Ok(Bijection::KZ),
            "flajolet" => Ok(Bijection::Flajolet),
            "hybrid3" | "h3" => Ok(Bijection::Hybrid3),
            "hybrid4" | "h4" => Ok(Bijection::Hybrid4),
            _ => Err(PathError::UnknownBijection(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathObject {
    Perm(Permutation),
    SetPart(SetPartition),
}

impl PathObject {
    fn kind(&self) -> &'static str {
        match self {
            PathObject::Perm(_) => "permutation",
            PathObject::SetPart(_) => "set partition",
        }
    }
}

pub fn encode(obj: &PathObject, b: Bijection) -> Result<LabeledMotzkinPath, PathError> {
    match (obj, b) {
        (PathObject::Perm(s), Bijection::FZ) => Ok(fz_encode(s)),
        (PathObject::Perm(s), Bijection::Biane) => Ok(biane_encode(s)),
        (PathObject::SetPart(p), b) if !b.on_permutations() => Ok(sp_encode(p, b)),
        _ => Err(PathError::TypeMismatch {
            bijection: b,
            object: obj.kind(),
        }),
    }
}

pub fn decode(p: &LabeledMotzkinPath, b: Bijection) -> Result<PathObject, PathError> {
    match b {
        Bijection::FZ => fz_decode(p).map(PathObject::Perm),
        Bijection::Biane => biane_decode(p).map(PathObject::Perm),
        _ => sp_decode(p, b).map(PathObject::SetPart),
    }
}

fn perm_step(s: &Permutation, i: usize) -> ColoredStep {
    let (v, pre) = (s.at(i), s.inv_at(i));
    if v == i {
        ColoredStep::level(3)
    } else if v > i && pre > i {
        ColoredStep::RISE
    } else if v < i && pre < i {
        ColoredStep::FALL
    } else if v < i {
        ColoredStep::level(1)
    } else {
        ColoredStep::level(2)
    }
}

pub fn fz_encode(s: &Permutation) -> LabeledMotzkinPath {
    let n = s.len();
    let steps: Vec<ColoredStep> = (1..=n).map(|i| perm_step(s, i)).collect();
    let labels = (1..=n)
        .map(|i| {
            let v = s.at(i);
            let c = if v > i {
                (1..i).filter(|&j| s.at(j) > v).count()
            } else if v < i {
                (i + 1..=n).filter(|&j| s.at(j) < v).count()
            } else {
                0
            };
            Label::Single(c as u32 + 1)
        })
        .collect();
    LabeledMotzkinPath::new(steps, labels).expect("same length")
}

pub fn fz_decode(p: &LabeledMotzkinPath) -> Result<Permutation, PathError> {
    if let Some(m) = first_violation(p, &PossibilityFunction::fz()) {
        return Err(PathError::InvalidPath(m));
    }
    let n = p.len();
    let is = |i: usize, pred: &dyn Fn(ColoredStep) -> bool| pred(p.steps[i - 1]);
    let rise = |s: ColoredStep| s.kind == StepKind::Rise;
    let fall = |s: ColoredStep| s.kind == StepKind::Fall;
    let lev = |c: u8| move |s: ColoredStep| s == ColoredStep::level(c);
    let xi = |i: usize| p.labels[i - 1].first() as usize - 1;
    // excedance positions (cval, cdrise) and values (cdrise, cpeak)
    let f: Vec<usize> = (1..=n)
        .filter(|&i| is(i, &rise) || is(i, &lev(2)))
        .collect();
    let mut fv: Vec<usize> = (1..=n)
        .filter(|&i| is(i, &fall) || is(i, &lev(2)))
        .collect();
    // anti-excedance positions (cpeak, cdfall) and values (cval, cdfall)
    let g: Vec<usize> = (1..=n)
        .filter(|&i| is(i, &fall) || is(i, &lev(1)))
        .collect();
    let mut gv: Vec<usize> = (1..=n)
        .filter(|&i| is(i, &rise) || is(i, &lev(1)))
        .collect();
    let mut sigma = vec![0usize; n];
    let err = || PathError::InvalidPath("labels do not form an inversion table".into());
    // left-to-right inversion table, rebuilt from the right
    for &i in f.iter().rev() {
        let q = xi(i);
        if q >= fv.len() {
            return Err(err());
        }
        sigma[i - 1] = fv.remove(fv.len() - 1 - q);
    }
    // right-to-left inversion table, rebuilt from the left
    for &i in &g {
        let q = xi(i);
        if q >= gv.len() {
            return Err(err());
        }
        sigma[i - 1] = gv.remove(q);
    }
    for i in 1..=n {
        if is(i, &lev(3)) {
            sigma[i - 1] = i;
        }
    }
    let s = Permutation::from_oneline(&sigma).map_err(|e| PathError::InvalidPath(e.to_string()))?;
    if fz_encode(&s) != *p {
        return Err(PathError::InvalidPath(
            "path is not the image of any permutation".into(),
        ));
    }
    Ok(s)
}

pub fn biane_encode(s: &Permutation) -> LabeledMotzkinPath {
    let n = s.len();
    let steps: Vec<ColoredStep> = (1..=n).map(|i| perm_step(s, i)).collect();
    // ξ′: 1 + #{k < σ⁻¹(i): σ(k) > i};  ξ″: 1 + #{k > i: σ(k) < σ(i)}
    let top = |i: usize| 1 + (1..s.inv_at(i)).filter(|&k| s.at(k) > i).count() as u32;
    let bottom = |i: usize| 1 + (i + 1..=n).filter(|&k| s.at(k) < s.at(i)).count() as u32;
    let labels = (1..=n)
        .map(|i| match steps[i - 1] {
            ColoredStep {
                kind: StepKind::Fall,
                ..
            } => Label::Pair(top(i), bottom(i)),
            ColoredStep {
                kind: StepKind::Level,
                color: 1,
            } => Label::Pair(1, bottom(i)),
            ColoredStep {
                kind: StepKind::Level,
                color: 2,
            } => Label::Pair(top(i), 1),
            _ => Label::Pair(1, 1),
        })
        .collect();
    LabeledMotzkinPath::new(steps, labels).expect("same length")
}

/// Builds the bipartite digraph stage by stage.
pub fn biane_decode(p: &LabeledMotzkinPath) -> Result<Permutation, PathError> {
    if let Some(m) = first_violation(p, &PossibilityFunction::biane()) {
        return Err(PathError::InvalidPath(m));
    }
    let n = p.len();
    let mut sigma = vec![0usize; n + 1];
    // unconnected dots, increasing
    let (mut top, mut bottom): (Vec<usize>, Vec<usize>) = (vec![], vec![]);
    for i in 1..=n {
        let Label::Pair(l, m) = p.labels[i - 1] else {
            unreachable!("validated")
        };
        let (l, m) = (l as usize - 1, m as usize - 1);
        match p.steps[i - 1] {
            ColoredStep {
                kind: StepKind::Rise,
                ..
            } => {
                top.push(i);
                bottom.push(i);
            }
            ColoredStep {
                kind: StepKind::Fall,
                ..
            } => {
                sigma[i] = bottom.remove(m);
                sigma[top.remove(l)] = i;
            }
            ColoredStep {
                kind: StepKind::Level,
                color: 1,
            } => {
                sigma[i] = bottom.remove(m);
                bottom.push(i);
            }
            ColoredStep {
                kind: StepKind::Level,
                color: 2,
            } => {
                sigma[top.remove(l)] = i;
                top.push(i);
            }
            _ => sigma[i] = i,
        }
    }
    let s = Permutation::from_oneline(&sigma[1..])
        .map_err(|e| PathError::InvalidPath(e.to_string()))?;
    if biane_encode(&s) != *p {
        return Err(PathError::InvalidPath(
            "path is not the image of any permutation".into(),
        ));
    }
    Ok(s)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Rank {
    /// by the largest element seen so far (vacant vertex)
    Vacant,
    /// by the block's opener
    Opener,
}

fn rank_rule(b: Bijection, c: ElementClass) -> Rank {
    let insider = c == ElementClass::Insider;
    match b {
        Bijection::KZ => Rank::Vacant,
        Bijection::Flajolet => Rank::Opener,
        Bijection::Hybrid3 if insider => Rank::Vacant,
        Bijection::Hybrid3 => Rank::Opener,
        Bijection::Hybrid4 if insider => Rank::Opener,
        Bijection::Hybrid4 => Rank::Vacant,
        _ => unreachable!("permutation bijection"),
    }
}

fn sp_step(c: ElementClass) -> ColoredStep {
    match c {
        ElementClass::Opener => ColoredStep::RISE,
        ElementClass::Closer => ColoredStep::FALL,
        ElementClass::Insider => ColoredStep::level(1),
        ElementClass::Singleton => ColoredStep::level(2),
    }
}

pub fn sp_encode(p: &SetPartition, b: Bijection) -> LabeledMotzkinPath {
    assert!(!b.on_permutations(), "{b} is a permutation bijection");
    let n = p.len();
    let mut steps = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 1..=n {
        let c = p.class(i);
        steps.push(sp_step(c));
        let xi = match c {
            ElementClass::Opener | ElementClass::Singleton => 1,
            _ => {
                let rule = rank_rule(b, c);
                let key = |blk: &[usize]| match rule {
                    Rank::Vacant => *blk.iter().filter(|&&x| x < i).max().unwrap(),
                    Rank::Opener => blk[0],
                };
                let own = key(p.block_of(i));
                // blocks started but unfinished after stage i-1
                let open = p
                    .blocks()
                    .iter()
                    .filter(|blk| blk[0] < i && *blk.last().unwrap() >= i);
                1 + open.filter(|blk| key(blk) < own).count() as u32
            }
        };
        labels.push(Label::Single(xi));
    }
    LabeledMotzkinPath::new(steps, labels).expect("same length")
}

pub fn sp_decode(p: &LabeledMotzkinPath, b: Bijection) -> Result<SetPartition, PathError> {
    if b.on_permutations() {
        return Err(PathError::TypeMismatch {
            bijection: b,
            object: "set partition",
        });
    }
    if let Some(m) = first_violation(p, &PossibilityFunction::set_partition()) {
        return Err(PathError::InvalidPath(m));
    }
    let mut open: Vec<Vec<usize>> = vec![];
    let mut done: Vec<Vec<usize>> = vec![];
    for (i, (&s, &l)) in (1..).zip(p.steps.iter().zip(&p.labels)) {
        let class = match s.kind {
            StepKind::Rise => ElementClass::Opener,
            StepKind::Fall => ElementClass::Closer,
            StepKind::Level if s.color == 1 => ElementClass::Insider,
            StepKind::Level => ElementClass::Singleton,
        };
        match class {
            ElementClass::Opener => open.push(vec![i]),
            ElementClass::Singleton => done.push(vec![i]),
            _ => {
                let rule = rank_rule(b, class);
                let mut order: Vec<usize> = (0..open.len()).collect();
                order.sort_by_key(|&k| match rule {
                    Rank::Vacant => *open[k].last().unwrap(),
                    Rank::Opener => open[k][0],
                });
                let k = order[l.first() as usize - 1];
                open[k].push(i);
                if class == ElementClass::Closer {
                    done.push(open.swap_remove(k));
                }
            }
        }
    }
    SetPartition::from_blocks(&done).map_err(|e| PathError::InvalidPath(e.to_string()))
}

pub type StepWeightFn = Arc<dyn Fn(ColoredStep, u32, Label) -> MultiPoly + Send + Sync>;

fn step_totals(
    pf: &PossibilityFunction,
    w: &StepWeightFn,
    max_h: u32,
) -> Vec<(ColoredStep, Vec<MultiPoly>)> {
    pf.step_types()
        .into_iter()
        .map(|s| {
            let per_h = (0..=max_h)
                .map(|h| {
                    pf.labels(s, h)
                        .into_iter()
                        .fold(MultiPoly::zero(), |acc, l| &acc + &w(s, h, l))
                })
                .collect();
            (s, per_h)
        })
        .collect()
}

/// Sum over all valid labeled paths of length `n` of the product of
/// step weights `w(step, starting height, label)`.
pub fn weighted_path_sum(pf: &PossibilityFunction, w: &StepWeightFn, n: usize) -> MultiPoly {
    if n == 0 {
        return MultiPoly::one();
    }
    let max_h = (n / 2) as u32;
    let totals = step_totals(pf, w, max_h);
    // state after the first step, then a transfer-matrix sweep
    let firsts: Vec<(usize, &MultiPoly)> = totals
        .iter()
        .filter(|(s, per_h)| s.kind != StepKind::Fall && !per_h[0].is_zero())
        .map(|(s, per_h)| (s.delta() as usize, &per_h[0]))
        .collect();
    firsts
        .into_par_iter()
        .map(|(h0, c0)| {
            let mut state = vec![MultiPoly::zero(); max_h as usize + 2];
            if h0 <= max_h as usize {
                state[h0] = c0.clone();
            }
            for step in 1..n {
                let left = n - step - 1;
                let mut next = vec![MultiPoly::zero(); state.len()];
                for (h, v) in state.iter().enumerate() {
                    if v.is_zero() {
                        continue;
                    }
                    for (s, per_h) in &totals {
                        let nh = h as i64 + s.delta();
                        if nh < 0 || nh as usize > left.min(max_h as usize) || per_h[h].is_zero() {
                            continue;
                        }
                        next[nh as usize] = &next[nh as usize] + &(v * &per_h[h]);
                    }
                }
                state = next;
            }
            state[0].clone()
        })
        .reduce(MultiPoly::zero, |a, b| &a + &b)
}

/// The J-fraction whose coefficients are γ_k = Σ level weights at k and
/// β_k = (rise weight at k−1)(fall weight at k), labels summed out.
pub fn path_jfraction(pf: &PossibilityFunction, w: StepWeightFn) -> JFractionSpec {
    let (pf1, w1, pf2, w2) = (pf.clone(), w.clone(), pf.clone(), w);
    let sum = |pf: &PossibilityFunction, w: &StepWeightFn, s: ColoredStep, h: u32| {
        pf.labels(s, h)
            .into_iter()
            .fold(MultiPoly::zero(), |acc, l| &acc + &w(s, h, l))
    };
    JFractionSpec::new(
        move |k| {
            (1..=pf1.colors() as u8).fold(MultiPoly::zero(), |acc, c| {
                &acc + &sum(&pf1, &w1, ColoredStep::level(c), k as u32)
            })
        },
        move |k| {
            let k = k as u32;
            &sum(&pf2, &w2, ColoredStep::RISE, k - 1) * &sum(&pf2, &w2, ColoredStep::FALL, k)
        },
    )
}

/// First permutation master weight carried by one FZ step:
/// a/b/c/d[crossings, nestings] and e[level].
pub fn fz_master_step_weight() -> StepWeightFn {
    let (a, b, c, d, e) = (
        Family::new("a"),
        Family::new("b"),
        Family::new("c"),
        Family::new("d"),
        Family::new("e"),
    );
    Arc::new(move |s, h, l| {
        let xi = l.first();
        let v = match (s.kind, s.color) {
            (StepKind::Rise, _) => a.at2(h + 1 - xi, xi - 1),
            (StepKind::Fall, _) => b.at2(h - xi, xi - 1),
            (StepKind::Level, 1) => c.at2(h - xi, xi - 1),
            (StepKind::Level, 2) => d.at2(h - xi, xi - 1),
            _ => e.at(h),
        };
        MultiPoly::ind(v)
    })
}

/// Set-partition master weight carried by one step of the
/// KZ path (or the Flajolet/hybrid paths, which share it).
pub fn sp_master_step_weight() -> StepWeightFn {
    let (a, b, d, e) = (
        Family::new("a"),
        Family::new("b"),
        Family::new("d"),
        Family::new("e"),
    );
    Arc::new(move |s, h, l| {
        let xi = l.first();
        let v = match (s.kind, s.color) {
            (StepKind::Rise, _) => b.at(h),
            (StepKind::Fall, _) => a.at2(h - xi, xi - 1),
            (StepKind::Level, 1) => d.at2(h - xi, xi - 1),
            _ => e.at(h),
        };
        MultiPoly::ind(v)
    })
}

type Check = Result<(), String>;

fn fail<T: fmt::Debug>(what: &str, i: usize, got: T, want: T) -> Check {
    Err(format!(
        "{what} fails at index {i}: got {got:?}, expected {want:?}"
    ))
}

/// h_{i−1} = #{j < i: σ(j) ≥ i} = #{j < i: σ⁻¹(j) ≥ i} for i in [n+1].
pub fn check_height_lemma(s: &Permutation) -> Check {
    let n = s.len();
    let p = fz_encode(s);
    for i in 1..=n + 1 {
        let a = (1..i).filter(|&j| s.at(j) >= i).count() as i64;
        let b = (1..i).filter(|&j| s.inv_at(j) >= i).count() as i64;
        let h = p.heights[i - 1];
        if h != a || h != b {
            return fail("height lemma", i, (h, h), (a, b));
        }
    }
    Ok(())
}

pub fn check_fz_label_lemma(s: &Permutation) -> Check {
    let p = fz_encode(s);
    let prof = crate::permstats::perm_index_profile(s);
    for i in 1..=s.len() {
        let h = p.heights[i - 1];
        let xi = p.labels[i - 1].first() as i64;
        let q = &prof[i - 1];
        let (got, want) = match p.steps[i - 1] {
            ColoredStep {
                kind: StepKind::Rise,
                ..
            } => ((h + 1 - xi, xi - 1), (q.ucross, q.unest)),
            ColoredStep {
                kind: StepKind::Level,
                color: 2,
            } => ((h - xi, xi - 1), (q.ucross, q.unest)),
            ColoredStep {
                kind: StepKind::Level,
                color: 3,
            } => ((0, xi - 1), (0, 0)),
            _ => ((h - xi, xi - 1), (q.lcross, q.lnest)),
        };
        if got != (want.0 as i64, want.1 as i64) {
            return fail(
                "FZ crossing/nesting lemma",
                i,
                got,
                (want.0 as i64, want.1 as i64),
            );
        }
    }
    Ok(())
}

fn inv_count(s: &Permutation) -> i64 {
    let w = s.oneline();
    let mut c = 0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i] > w[j] {
                c += 1;
            }
        }
    }
    c
}

fn fix_heights(p: &LabeledMotzkinPath) -> i64 {
    (0..p.len())
        .filter(|&i| p.steps[i] == ColoredStep::level(3))
        .map(|i| p.heights[i])
        .sum()
}

/// inv(σ) = Σ (h_{i−1} + ξ_i − 1) + Σ_fix h_{i−1}.
pub fn check_fz_inversion(s: &Permutation) -> Check {
    let p = fz_encode(s);
    let sum: i64 = (0..p.len())
        .map(|i| p.heights[i] + p.labels[i].first() as i64 - 1)
        .sum::<i64>()
        + fix_heights(&p);
    let inv = inv_count(s);
    if sum != inv {
        return fail("FZ inversion formula", 0, sum, inv);
    }
    Ok(())
}

pub fn check_biane_label_lemma(s: &Permutation) -> Check {
    let p = biane_encode(s);
    let prof = crate::permstats::perm_index_profile(s);
    for i in 1..=s.len() {
        let (h0, h1) = (p.heights[i - 1], p.heights[i]);
        let Label::Pair(x1, x2) = p.labels[i - 1] else {
            unreachable!()
        };
        let (x1, x2) = (x1 as i64, x2 as i64);
        let q = &prof[i - 1];
        let st = p.steps[i - 1];
        let lower = st.kind == StepKind::Fall || st == ColoredStep::level(1);
        let upper = st.kind == StepKind::Rise || st == ColoredStep::level(2);
        let into = st.kind == StepKind::Fall || st == ColoredStep::level(2);
        if lower && (h0 - x2, x2 - 1) != (q.lcross as i64, q.lnest as i64) {
            return fail(
                "Biane lcross/lnest lemma",
                i,
                (h0 - x2, x2 - 1),
                (q.lcross as i64, q.lnest as i64),
            );
        }
        if upper && h1 - 1 != (q.ucross + q.unest) as i64 {
            return fail(
                "Biane ucross+unest lemma",
                i,
                h1 - 1,
                (q.ucross + q.unest) as i64,
            );
        }
        if into {
            let want = prof[s.inv_at(i) - 1].unest as i64;
            if x1 - 1 != want {
                return fail("Biane unest-at-preimage lemma", i, x1 - 1, want);
            }
        }
        if st == ColoredStep::level(3) && (h0 != h1 || Some(h0 as u32) != q.lev) {
            return fail("Biane level lemma", i, Some(h0 as u32), q.lev);
        }
    }
    Ok(())
}

/// inv = Σ (h_{i−1} + ξ′_i + ξ″_i − 2) + Σ_fix h_{i−1}.
pub fn check_biane_inversion(s: &Permutation) -> Check {
    let p = biane_encode(s);
    let sum: i64 = (0..p.len())
        .map(|i| {
            let Label::Pair(a, b) = p.labels[i] else {
                unreachable!()
            };
            p.heights[i] + a as i64 + b as i64 - 2
        })
        .sum::<i64>()
        + fix_heights(&p);
    let inv = inv_count(s);
    if sum != inv {
        return fail("Biane inversion formula", 0, sum, inv);
    }
    Ok(())
}

fn closes_cycle(s: &Permutation, i: usize) -> bool {
    let mut j = s.at(i);
    while j != i {
        if j > i {
            return false;
        }
        j = s.at(j);
    }
    true
}

/// At each cycle peak, every ξ′ has exactly one ξ″ that makes the peak
/// a cycle closer, and conversely. Checked by decoding every variation.
pub fn check_biane_cycle_closer(s: &Permutation) -> Check {
    let p = biane_encode(s);
    for i in 1..=p.len() {
        if p.steps[i - 1].kind != StepKind::Fall {
            continue;
        }
        let h = p.heights[i - 1] as u32;
        let mut grid = vec![vec![false; h as usize]; h as usize];
        for l in 1..=h {
            for m in 1..=h {
                let q =
                    biane_decode(&p.with_label(i, Label::Pair(l, m))).map_err(|e| e.to_string())?;
                grid[l as usize - 1][m as usize - 1] = closes_cycle(&q, i);
            }
        }
        for k in 0..h as usize {
            let row = grid[k].iter().filter(|&&b| b).count();
            let col = grid.iter().filter(|r| r[k]).count();
            if row != 1 || col != 1 {
                return fail("Biane cycle-closer lemma", i, (row, col), (1, 1));
            }
        }
    }
    Ok(())
}

/// σ and σ⁻¹ share their FZ path up to swapping level colors 1 and 2.
pub fn check_inverse_symmetry(s: &Permutation) -> Check {
    let a = fz_encode(s);
    let b = fz_encode(&s.inverse());
    for (i, (x, y)) in a.steps.iter().zip(&b.steps).enumerate() {
        let swapped = match x.color {
            1 if x.kind == StepKind::Level => ColoredStep::level(2),
            2 if x.kind == StepKind::Level => ColoredStep::level(1),
            _ => *x,
        };
        if swapped != *y {
            return fail("inverse symmetry", i + 1, *y, swapped);
        }
    }
    Ok(())
}

/// Statistics with the distinguished index in third position, as seen
/// by a left-to-right reading of the partition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReversedSPStats {
    pub cr: u32,
    pub ne: u32,
    pub qne: u32,
    pub ov: u32,
    pub cov: u32,
    pub qcov: u32,
}

pub fn sp_reversed_stats(p: &SetPartition) -> Vec<ReversedSPStats> {
    let arcs = p.arcs();
    let n = p.len();
    (1..=n)
        .map(|k| {
            let mut r = ReversedSPStats::default();
            // the arc ending at k, if any
            let into = arcs.iter().find(|a| a.1 == k).copied();
            for &(i, l) in &arcs {
                if i < k && k < l {
                    r.qne += 1;
                    if let Some((a, _)) = into {
                        if a < i {
                            r.cr += 1;
                        } else if i < a {
                            r.ne += 1;
                        }
                    }
                }
            }
            let own = p.block_of(k);
            for blk in p.blocks() {
                if blk[0] == own[0] {
                    continue;
                }
                let (lo, hi) = (blk[0], *blk.last().unwrap());
                if lo < k && k < hi {
                    r.qcov += 1;
                    if own[0] < lo {
                        r.ov += 1;
                    } else {
                        r.cov += 1;
                    }
                }
            }
            if into.is_none() {
                r.ov = 0;
                r.cov = 0;
            }
            r
        })
        .collect()
}

/// Height and label lemmas of a set-partition bijection, and the
/// agreement of the reversed statistics with those of the reversal.
pub fn check_sp_label_lemma(p: &SetPartition, b: Bijection) -> Check {
    let path = sp_encode(p, b);
    let rev = sp_reversed_stats(p);
    let n = p.len();
    for i in 0..=n {
        let open = p
            .blocks()
            .iter()
            .filter(|blk| blk[0] <= i && i < *blk.last().unwrap())
            .count() as i64;
        if path.heights[i] != open {
            return fail("set-partition height lemma", i, path.heights[i], open);
        }
    }
    for i in 1..=n {
        let c = p.class(i);
        let h = path.heights[i - 1];
        let xi = path.labels[i - 1].first() as i64;
        let r = rev[i - 1];
        match c {
            ElementClass::Opener | ElementClass::Singleton => {
                if (r.qne as i64, r.qcov as i64) != (h, h) {
                    return fail("qne/qcov lemma", i, (r.qne as i64, r.qcov as i64), (h, h));
                }
            }
            _ => {
                let got = (h - xi, xi - 1);
                let want = match rank_rule(b, c) {
                    Rank::Vacant => (r.cr, r.ne),
                    Rank::Opener => (r.ov, r.cov),
                };
                if got != (want.0 as i64, want.1 as i64) {
                    return fail(
                        "set-partition label lemma",
                        i,
                        got,
                        (want.0 as i64, want.1 as i64),
                    );
                }
            }
        }
    }
    let tilde = sp_index_profile(&sp_reverse(p));
    for k in 1..=n {
        let (r, t) = (rev[k - 1], &tilde[n - k]);
        let has_pred = matches!(p.class(k), ElementClass::Insider | ElementClass::Closer);
        let got = if has_pred {
            (r.cr, r.ne, r.ov, r.cov, r.qne)
        } else {
            (0, 0, 0, 0, r.qne)
        };
        let want = if has_pred {
            (t.cr, t.ne, t.ov, t.cov, t.qne)
        } else {
            (0, 0, 0, 0, t.qne)
        };
        if got != want {
            return fail("reversal agreement", k, got, want);
        }
    }
    Ok(())
}
