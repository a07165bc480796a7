//! Balls, colorings, queries, answers and the majority predicates.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest ball count whose colorings are enumerated as plain integers.
pub const ENUM_LIMIT: usize = 24;

/// A hidden 2-coloring. Color 0 is red, color 1 is blue.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    n: usize,
    words: Vec<u64>,
}

impl Coloring {
    pub fn monochromatic(n: usize, color: u8) -> Result<Self> {
        let mut c = Self::zeros(n)?;
        if color == 1 {
            for b in 0..n {
                c.set(b, 1);
            }
        }
        Ok(c)
    }

    fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return domain("a coloring needs at least one ball");
        }
        Ok(Coloring { n, words: vec![0; n.div_ceil(64)] })
    }

    pub fn from_colors(colors: &[u8]) -> Result<Self> {
        let mut c = Self::zeros(colors.len())?;
        for (b, &v) in colors.iter().enumerate() {
            match v {
                0 => {}
                1 => c.set(b, 1),
                _ => return domain(format!("color {v} at ball {b} is not 0 or 1")),
            }
        }
        Ok(c)
    }

    /// Coloring whose bit `b` is ball `b`'s color; `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        if n > 64 {
            return domain("mask colorings support at most 64 balls");
        }
        let mut c = Self::zeros(n)?;
        let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        c.words[0] = mask & keep;
        Ok(c)
    }

    pub fn mask(&self) -> u64 {
        self.words[0]
    }

    /// Parses `R`/`B` strings (also accepts `0`/`1`).
    pub fn parse(s: &str) -> Result<Self> {
        let colors: Result<Vec<u8>> = s
            .chars()
            .map(|ch| match ch {
                'R' | 'r' | '0' => Ok(0),
                'B' | 'b' | '1' => Ok(1),
                _ => domain(format!("unknown color symbol {ch:?}")),
            })
            .collect();
        Self::from_colors(&colors?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn color(&self, b: usize) -> u8 {
        ((self.words[b / 64] >> (b % 64)) & 1) as u8
    }

    pub fn set(&mut self, b: usize, color: u8) {
        let bit = 1u64 << (b % 64);
        if color == 1 {
            self.words[b / 64] |= bit;
        } else {
            self.words[b / 64] &= !bit;
        }
    }

    pub fn colors(&self) -> Vec<u8> {
        (0..self.n).map(|b| self.color(b)).collect()
    }

    pub fn count_blue(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_monochromatic(&self) -> bool {
        let blue = self.count_blue();
        blue == 0 || blue == self.n
    }

    /// The same partition with red and blue exchanged.
    pub fn swapped(&self) -> Self {
        let mut c = self.clone();
        for b in 0..self.n {
            c.set(b, 1 - self.color(b));
        }
        c
    }
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in 0..self.n {
            f.write_str(if self.color(b) == 0 { "R" } else { "B" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coloring({self})")
    }
}

/// A set of balls, kept sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Query(Vec<usize>);

impl Query {
    pub fn new(mut balls: Vec<usize>) -> Result<Self> {
        balls.sort_unstable();
        if balls.windows(2).any(|w| w[0] == w[1]) {
            return domain(format!("query {balls:?} repeats a ball"));
        }
        if balls.is_empty() {
            return domain("empty query");
        }
        Ok(Query(balls))
    }

    pub fn from_slice(balls: &[usize]) -> Result<Self> {
        Self::new(balls.to_vec())
    }

    /// Validates ball range and size for an `n`-ball, size-`q` model.
    pub fn check(&self, n: usize, q: usize) -> Result<()> {
        if self.0.len() != q {
            return domain(format!("query {:?} has size {}, model needs {q}", self.0, self.0.len()));
        }
        if let Some(&b) = self.0.last() {
            if b >= n {
                return domain(format!("ball {b} out of range for n={n}"));
            }
        }
        Ok(())
    }

    pub fn balls(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, b: usize) -> bool {
        self.0.binary_search(&b).is_ok()
    }

    /// Bit mask of the balls (all balls below 64).
    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0, |m, &b| m | (1u64 << b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelKind {
    Leq,
    Geq,
    Neq,
}

/// An oracle's reply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    Ball(usize),
    NoMajority,
    /// Pair relation between `a` and `b` in the selection models; `Leq` reads value(a) <= value(b).
    Rel { kind: RelKind, a: usize, b: usize },
}

impl Answer {
    pub fn ball(&self) -> Option<usize> {
        match self {
            Answer::Ball(b) => Some(*b),
            _ => None,
        }
    }
}

/// Which balls of a query count as legal answers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnswerModel {
    /// A majority ball, or `NoMajority` on an exact tie.
    Majority,
    /// Any non-minority ball.
    NonMinority,
    /// A ball sharing its color with at least `num/den * (|Q|-1)` others.
    Alpha { num: u32, den: u32 },
}

impl AnswerModel {
    pub fn name(&self) -> String {
        match self {
            AnswerModel::Majority => "majority".into(),
            AnswerModel::NonMinority => "nonminority".into(),
            AnswerModel::Alpha { num, den } => format!("alpha:{num}/{den}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "majority" => Ok(AnswerModel::Majority),
            "nonminority" | "non-minority" => Ok(AnswerModel::NonMinority),
            _ => {
                let rest = s
                    .strip_prefix("alpha:")
                    .ok_or_else(|| Error::Usage(format!("unknown answer model {s:?}")))?;
                let (a, b) = rest
                    .split_once('/')
                    .ok_or_else(|| Error::Usage(format!("alpha needs num/den, got {rest:?}")))?;
                let num = a.parse().map_err(|_| Error::Usage(format!("bad alpha numerator {a:?}")))?;
                let den = b.parse().map_err(|_| Error::Usage(format!("bad alpha denominator {b:?}")))?;
                if num == 0 || den == 0 || 2 * num > den {
                    return Err(Error::Usage(format!("alpha {num}/{den} must lie in (0, 1/2]")));
                }
                Ok(AnswerModel::Alpha { num, den })
            }
        }
    }

    /// Whether a ball with `same` same-colored balls (itself included) in a `q`-set may be answered.
    #[inline]
    pub fn ball_ok(&self, same: usize, q: usize) -> bool {
        match *self {
            AnswerModel::Majority => 2 * same > q,
            AnswerModel::NonMinority => 2 * same >= q,
            AnswerModel::Alpha { num, den } => (same - 1) as u64 * den as u64 >= num as u64 * (q as u64 - 1),
        }
    }

    /// Whether `NoMajority` is a legal reply when no ball qualifies.
    pub fn allows_no_majority(&self) -> bool {
        matches!(self, AnswerModel::Majority)
    }

    /// Checks that every `q`-set has a legal answer under every coloring.
    pub fn check_total(&self, q: usize) -> Result<()> {
        if let AnswerModel::Alpha { .. } = self {
            if !self.ball_ok(q.div_ceil(2), q) {
                return Err(Error::Config(format!(
                    "{} leaves balanced {q}-sets without an answer",
                    self.name()
                )));
            }
        }
        Ok(())
    }
}

fn same_color_count(c: &Coloring, q: &Query, b: usize) -> usize {
    let cb = c.color(b);
    q.balls().iter().filter(|&&x| c.color(x) == cb).count()
}

fn member(q: &Query, b: usize) -> Result<()> {
    if !q.contains(b) {
        return domain(format!("ball {b} is not in query {:?}", q.balls()));
    }
    Ok(())
}

/// True iff more than half of `q` shares `b`'s color.
pub fn is_majority_ball(c: &Coloring, q: &Query, b: usize) -> Result<bool> {
    member(q, b)?;
    Ok(2 * same_color_count(c, q, b) > q.len())
}

/// True iff at least half of `q` shares `b`'s color.
pub fn is_nonminority_ball(c: &Coloring, q: &Query, b: usize) -> Result<bool> {
    member(q, b)?;
    Ok(2 * same_color_count(c, q, b) >= q.len())
}

/// Balls that are not non-minority in the full ball set.
pub fn minority_set(c: &Coloring) -> Vec<usize> {
    let blue = c.count_blue();
    let red = c.n() - blue;
    let minority_color = if 2 * blue < c.n() {
        1
    } else if 2 * red < c.n() {
        0
    } else {
        return Vec::new();
    };
    (0..c.n()).filter(|&b| c.color(b) == minority_color).collect()
}

/// Every answer a truthful source may give to `q` under `c`.
pub fn valid_answers(c: &Coloring, q: &Query, model: AnswerModel) -> Vec<Answer> {
    let mut out: Vec<Answer> = q
        .balls()
        .iter()
        .filter(|&&b| model.ball_ok(same_color_count(c, q, b), q.len()))
        .map(|&b| Answer::Ball(b))
        .collect();
    if out.is_empty() && model.allows_no_majority() {
        out.push(Answer::NoMajority);
    }
    out
}

pub fn is_valid_answer(c: &Coloring, q: &Query, a: &Answer, model: AnswerModel) -> bool {
    match *a {
        Answer::Ball(b) => q.contains(b) && model.ball_ok(same_color_count(c, q, b), q.len()),
        Answer::NoMajority => model.allows_no_majority() && valid_answers(c, q, model) == [Answer::NoMajority],
        Answer::Rel { .. } => false,
    }
}

/// Fast validity test on bit masks (balls below 64).
#[inline]
pub fn mask_answer_ok(coloring: u64, query: u64, answer: &Answer, model: AnswerModel) -> bool {
    let q = query.count_ones() as usize;
    let blue = (coloring & query).count_ones() as usize;
    match *answer {
        Answer::Ball(b) => {
            let same = if coloring >> b & 1 == 1 { blue } else { q - blue };
            query >> b & 1 == 1 && model.ball_ok(same, q)
        }
        Answer::NoMajority => {
            let red = q - blue;
            model.allows_no_majority()
                && !(blue > 0 && model.ball_ok(blue, q))
                && !(red > 0 && model.ball_ok(red, q))
        }
        Answer::Rel { .. } => false,
    }
}

/// Maps a 0/1 multiset to a coloring: 0 is red, 1 is blue.
pub fn coloring_from_binary(values: &[u8]) -> Result<Coloring> {
    Coloring::from_colors(values)
}

pub fn binary_from_coloring(c: &Coloring) -> Vec<u8> {
    c.colors()
}

/// Positions holding a median of a 0/1 sequence of odd length.
pub fn median_positions(values: &[u8]) -> Result<Vec<usize>> {
    if values.len() % 2 == 0 {
        return domain("median positions are defined here for odd lengths");
    }
    if let Some(v) = values.iter().find(|&&v| v > 1) {
        return domain(format!("non-binary entry {v}"));
    }
    let ones = values.iter().filter(|&&v| v == 1).count();
    let med = u8::from(2 * ones > values.len());
    Ok((0..values.len()).filter(|&i| values[i] == med).collect())
}

/// Distinct queries asked during one run, in asking order.
#[derive(Clone, Debug, Default)]
pub struct Transcript {
    pub n: usize,
    pub q: usize,
    entries: Vec<(Query, Answer)>,
    cache: HashMap<Query, Answer>,
}

impl Transcript {
    pub fn new(n: usize, q: usize) -> Self {
        Transcript { n, q, entries: Vec::new(), cache: HashMap::new() }
    }

    pub fn lookup(&self, q: &Query) -> Option<Answer> {
        self.cache.get(q).copied()
    }

    /// Records a fresh answer; returns false when the query was already cached.
    pub fn record(&mut self, q: Query, a: Answer) -> bool {
        if self.cache.contains_key(&q) {
            return false;
        }
        self.cache.insert(q.clone(), a);
        self.entries.push((q, a));
        true
    }

    pub fn entries(&self) -> &[(Query, Answer)] {
        &self.entries
    }

    pub fn distinct_count(&self) -> usize {
        self.cache.len()
    }

    pub fn to_json(&self) -> String {
        let doc = TranscriptDoc {
            n: self.n,
            q: self.q,
            entries: self
                .entries
                .iter()
                .map(|(q, a)| EntryDoc { query: q.balls().to_vec(), answer: AnswerDoc::from(*a) })
                .collect(),
            distinct: self.distinct_count(),
        };
        serde_json::to_string(&doc).expect("transcript serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: TranscriptDoc = serde_json::from_str(s).map_err(|e| Error::Input(e.to_string()))?;
        let mut t = Transcript::new(doc.n, doc.q);
        for e in doc.entries {
            t.record(Query::new(e.query)?, e.answer.to_answer()?);
        }
        Ok(t)
    }
}

#[derive(Serialize, Deserialize)]
struct TranscriptDoc {
    n: usize,
    q: usize,
    entries: Vec<EntryDoc>,
    distinct: usize,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct EntryDoc {
    pub query: Vec<usize>,
    pub answer: AnswerDoc,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct AnswerDoc {
    kind: String,
    value: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct RelDoc {
    rel: RelKind,
    a: usize,
    b: usize,
}

impl From<Answer> for AnswerDoc {
    fn from(a: Answer) -> Self {
        match a {
            Answer::Ball(b) => AnswerDoc { kind: "ball".into(), value: b.into() },
            Answer::NoMajority => AnswerDoc { kind: "nomajority".into(), value: serde_json::Value::Null },
            Answer::Rel { kind, a, b } => AnswerDoc {
                kind: "rel".into(),
                value: serde_json::to_value(RelDoc { rel: kind, a, b }).expect("rel serializes"),
            },
        }
    }
}

impl AnswerDoc {
    pub(crate) fn to_answer(&self) -> Result<Answer> {
        let bad = || Error::Input(format!("malformed answer value {}", self.value));
        match self.kind.as_str() {
            "ball" => Ok(Answer::Ball(self.value.as_u64().ok_or_else(bad)? as usize)),
            "nomajority" => Ok(Answer::NoMajority),
            "rel" => {
                let r: RelDoc = serde_json::from_value(self.value.clone()).map_err(|_| bad())?;
                Ok(Answer::Rel { kind: r.rel, a: r.a, b: r.b })
            }
            k => Err(Error::Input(format!("unknown answer kind {k:?}"))),
        }
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}
