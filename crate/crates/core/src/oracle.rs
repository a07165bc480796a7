//! Answer sources for ball queries, the dedup session, legal-coloring tools and the cover check.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::colorset::{minority_mask, ColorSet};
use crate::error::{contradiction, domain, Error, Result};
use crate::explore::Chooser;
use crate::model::{
    binomial, subsets, valid_answers, Answer, AnswerDoc, AnswerModel, Coloring, EntryDoc, Query, Transcript,
};

pub trait BallOracle {
    fn n(&self) -> usize;
    fn q(&self) -> usize;
    fn model(&self) -> AnswerModel;
    /// Answers a well-formed query. Called at most once per distinct query by `Session`.
    fn answer(&mut self, query: &Query) -> Result<Answer>;
}

impl<T: BallOracle + ?Sized> BallOracle for &mut T {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn q(&self) -> usize {
        (**self).q()
    }
    fn model(&self) -> AnswerModel {
        (**self).model()
    }
    fn answer(&mut self, query: &Query) -> Result<Answer> {
        (**self).answer(query)
    }
}

impl<T: BallOracle + ?Sized> BallOracle for Box<T> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn q(&self) -> usize {
        (**self).q()
    }
    fn model(&self) -> AnswerModel {
        (**self).model()
    }
    fn answer(&mut self, query: &Query) -> Result<Answer> {
        (**self).answer(query)
    }
}

/// A strategy's view of an oracle: validates queries and answers, caches repeats.
pub struct Session<O: BallOracle> {
    oracle: O,
    transcript: Transcript,
}

impl<O: BallOracle> Session<O> {
    pub fn new(oracle: O) -> Self {
        let t = Transcript::new(oracle.n(), oracle.q());
        Session { oracle, transcript: t }
    }

    pub fn n(&self) -> usize {
        self.oracle.n()
    }

    pub fn q(&self) -> usize {
        self.oracle.q()
    }

    pub fn ask(&mut self, balls: &[usize]) -> Result<Answer> {
        let query = Query::from_slice(balls)?;
        self.ask_query(&query)
    }

    pub fn ask_query(&mut self, query: &Query) -> Result<Answer> {
        query.check(self.oracle.n(), self.oracle.q())?;
        if let Some(a) = self.transcript.lookup(query) {
            return Ok(a);
        }
        let a = self.oracle.answer(query)?;
        match a {
            Answer::Ball(b) if !query.contains(b) => {
                return contradiction(format!("answer {b} is not in query {:?}", query.balls()))
            }
            Answer::NoMajority if query.len() % 2 == 1 => {
                return contradiction(format!("no-majority answer to odd query {:?}", query.balls()))
            }
            Answer::NoMajority if !self.oracle.model().allows_no_majority() => {
                return contradiction("no-majority answer outside the majority model")
            }
            Answer::Rel { .. } => return contradiction("pair relation returned by a ball oracle"),
            _ => {}
        }
        self.transcript.record(query.clone(), a);
        Ok(a)
    }

    pub fn distinct(&self) -> usize {
        self.transcript.distinct_count()
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_parts(self) -> (O, Transcript) {
        (self.oracle, self.transcript)
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tiebreak {
    Lowest,
    Highest,
}

/// Truthful oracle for a hidden coloring.
#[derive(Clone, Debug)]
pub struct FixedOracle {
    coloring: Coloring,
    q: usize,
    model: AnswerModel,
    tiebreak: Tiebreak,
}

impl FixedOracle {
    pub fn new(coloring: Coloring, q: usize, model: AnswerModel, tiebreak: Tiebreak) -> Result<Self> {
        model.check_total(q)?;
        if q == 0 || q > coloring.n() {
            return Err(Error::Config(format!("query size {q} does not fit n={}", coloring.n())));
        }
        Ok(FixedOracle { coloring, q, model, tiebreak })
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }
}

impl BallOracle for FixedOracle {
    fn n(&self) -> usize {
        self.coloring.n()
    }
    fn q(&self) -> usize {
        self.q
    }
    fn model(&self) -> AnswerModel {
        self.model
    }
    fn answer(&mut self, query: &Query) -> Result<Answer> {
        let v = valid_answers(&self.coloring, query, self.model);
        let pick = match self.tiebreak {
            Tiebreak::Lowest => v.first(),
            Tiebreak::Highest => v.iter().rev().find(|a| a.ball().is_some()).or(v.first()),
        };
        pick.copied().ok_or_else(|| Error::Contradiction("no valid answer under the hidden coloring".into()))
    }
}

/// Truthful oracle that lets a chooser pick among the valid answers.
pub struct ChoiceOracle<C: Chooser> {
    coloring: Coloring,
    q: usize,
    model: AnswerModel,
    chooser: C,
}

impl<C: Chooser> ChoiceOracle<C> {
    pub fn new(coloring: Coloring, q: usize, model: AnswerModel, chooser: C) -> Result<Self> {
        model.check_total(q)?;
        if q == 0 || q > coloring.n() {
            return Err(Error::Config(format!("query size {q} does not fit n={}", coloring.n())));
        }
        Ok(ChoiceOracle { coloring, q, model, chooser })
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }
}

impl<C: Chooser> BallOracle for ChoiceOracle<C> {
    fn n(&self) -> usize {
        self.coloring.n()
    }
    fn q(&self) -> usize {
        self.q
    }
    fn model(&self) -> AnswerModel {
        self.model
    }
    fn answer(&mut self, query: &Query) -> Result<Answer> {
        let v = valid_answers(&self.coloring, query, self.model);
        if v.is_empty() {
            return contradiction("no valid answer under the hidden coloring");
        }
        Ok(v[self.chooser.choose(v.len())])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LazyPolicy {
    /// Keep as many colorings as possible; ties go to the lowest ball.
    MaxSurvivors,
    /// First answer that keeps any coloring.
    FirstLegal,
}

/// Adversary that commits to nothing beyond its consistent set.
#[derive(Clone, Debug)]
pub struct LazyOracle {
    consistent: ColorSet,
    q: usize,
    model: AnswerModel,
    policy: LazyPolicy,
}

impl LazyOracle {
    pub fn new(n: usize, q: usize, model: AnswerModel, policy: LazyPolicy) -> Result<Self> {
        model.check_total(q)?;
        if q == 0 || q > n {
            return Err(Error::Config(format!("query size {q} does not fit n={n}")));
        }
        Ok(LazyOracle { consistent: ColorSet::full(n)?, q, model, policy })
    }

    pub fn consistent(&self) -> &ColorSet {
        &self.consistent
    }
}

impl BallOracle for LazyOracle {
    fn n(&self) -> usize {
        self.consistent.n()
    }
    fn q(&self) -> usize {
        self.q
    }
    fn model(&self) -> AnswerModel {
        self.model
    }
    fn answer(&mut self, query: &Query) -> Result<Answer> {
        let mut options: Vec<Answer> = query.balls().iter().map(|&b| Answer::Ball(b)).collect();
        if self.model.allows_no_majority() {
            options.push(Answer::NoMajority);
        }
        let mut best: Option<(Answer, ColorSet)> = None;
        for a in options {
            let f = self.consistent.filter(query, &a, self.model);
            if f.is_empty() {
                continue;
            }
            let better = match &best {
                None => true,
                Some((_, cur)) => self.policy == LazyPolicy::MaxSurvivors && f.len() > cur.len(),
            };
            if better {
                best = Some((a, f));
            }
            if self.policy == LazyPolicy::FirstLegal {
                break;
            }
        }
        match best {
            Some((a, f)) => {
                self.consistent = f;
                Ok(a)
            }
            None => contradiction("lazy adversary has no consistent answer"),
        }
    }
}

/// Adversary whose every answer keeps at least one coloring consistent; a chooser picks among them.
#[derive(Clone, Debug)]
pub struct BranchingOracle<C: Chooser> {
    consistent: ColorSet,
    q: usize,
    model: AnswerModel,
    chooser: C,
}

impl<C: Chooser> BranchingOracle<C> {
    pub fn new(n: usize, q: usize, model: AnswerModel, chooser: C) -> Result<Self> {
        Self::from_set(ColorSet::full(n)?, q, model, chooser)
    }

    /// Starts from a given consistent set instead of all colorings.
    pub fn from_set(consistent: ColorSet, q: usize, model: AnswerModel, chooser: C) -> Result<Self> {
        model.check_total(q)?;
        if q == 0 || q > consistent.n() {
            return Err(Error::Config(format!("query size {q} does not fit n={}", consistent.n())));
        }
        Ok(BranchingOracle { consistent, q, model, chooser })
    }

    pub fn consistent(&self) -> &ColorSet {
        &self.consistent
    }
}

impl<C: Chooser> BallOracle for BranchingOracle<C> {
    fn n(&self) -> usize {
        self.consistent.n()
    }
    fn q(&self) -> usize {
        self.q
    }
    fn model(&self) -> AnswerModel {
        self.model
    }
    fn answer(&mut self, query: &Query) -> Result<Answer> {
        let mut options: Vec<Answer> = query.balls().iter().map(|&b| Answer::Ball(b)).collect();
        if self.model.allows_no_majority() {
            options.push(Answer::NoMajority);
        }
        let mut live: Vec<(Answer, ColorSet)> = options
            .into_iter()
            .map(|a| (a, self.consistent.filter(query, &a, self.model)))
            .filter(|(_, f)| !f.is_empty())
            .collect();
        if live.is_empty() {
            return contradiction("adversary has no consistent answer");
        }
        let i = self.chooser.choose(live.len());
        let (a, f) = live.swap_remove(i);
        self.consistent = f;
        Ok(a)
    }
}

/// Answers read from a fixed table; unknown queries are an input error.
#[derive(Clone, Debug)]
pub struct TableOracle {
    n: usize,
    q: usize,
    model: AnswerModel,
    table: HashMap<Query, Answer>,
}

impl TableOracle {
    pub fn new(n: usize, q: usize, model: AnswerModel, entries: &[(Query, Answer)]) -> Self {
        TableOracle { n, q, model, table: entries.iter().cloned().collect() }
    }
}

impl BallOracle for TableOracle {
    fn n(&self) -> usize {
        self.n
    }
    fn q(&self) -> usize {
        self.q
    }
    fn model(&self) -> AnswerModel {
        self.model
    }
    fn answer(&mut self, query: &Query) -> Result<Answer> {
        self.table
            .get(query)
            .copied()
            .ok_or_else(|| Error::Input(format!("no recorded answer for query {:?}", query.balls())))
    }
}

/// Answer table over the queries of a design.
pub type Assignment = Vec<(Query, Answer)>;

pub fn assignment_to_json(a: &[(Query, Answer)]) -> String {
    let docs: Vec<EntryDoc> =
        a.iter().map(|(q, ans)| EntryDoc { query: q.balls().to_vec(), answer: AnswerDoc::from(*ans) }).collect();
    serde_json::to_string(&docs).expect("assignment serializes")
}

pub fn assignment_from_json(s: &str) -> Result<Assignment> {
    let docs: Vec<EntryDoc> = serde_json::from_str(s).map_err(|e| Error::Input(e.to_string()))?;
    docs.into_iter().map(|d| Ok((Query::new(d.query)?, d.answer.to_answer()?))).collect()
}

fn check_entries(n: usize, entries: &[(Query, Answer)]) -> Result<()> {
    for (q, a) in entries {
        if q.balls().iter().any(|&b| b >= n) {
            return domain(format!("query {:?} exceeds n={n}", q.balls()));
        }
        if let Answer::Ball(b) = a {
            if !q.contains(*b) {
                return Err(Error::Input(format!("answer {b} is not in query {:?}", q.balls())));
            }
        }
    }
    Ok(())
}

/// Colorings under which every recorded answer is legal.
pub fn legal_set(n: usize, entries: &[(Query, Answer)], model: AnswerModel) -> Result<ColorSet> {
    check_entries(n, entries)?;
    let mut s = ColorSet::full(n)?;
    for (q, a) in entries {
        s = s.filter(q, a, model);
        if s.is_empty() {
            break;
        }
    }
    Ok(s)
}

pub fn legal_colorings(n: usize, entries: &[(Query, Answer)], model: AnswerModel) -> Result<Vec<Coloring>> {
    let s = legal_set(n, entries, model)?;
    s.iter().map(|m| Coloring::from_mask(n, m)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverOutcome {
    /// Minority sets of legal colorings cover every ball: the assignment defeats the design.
    Covered,
    /// Some ball is non-minority under every legal coloring.
    NotCovered,
    /// No coloring is legal.
    Contradictory,
}

pub fn cover_check(n: usize, entries: &[(Query, Answer)], model: AnswerModel) -> Result<CoverOutcome> {
    let s = legal_set(n, entries, model)?;
    Ok(cover_of(&s))
}

pub fn cover_of(s: &ColorSet) -> CoverOutcome {
    if s.is_empty() {
        return CoverOutcome::Contradictory;
    }
    let full = (1u64 << s.n()) - 1;
    if s.minority_union() == full {
        CoverOutcome::Covered
    } else {
        CoverOutcome::NotCovered
    }
}

/// For three sets each smaller than n/2, a pair whose union has fewer than 5n/6 balls.
pub fn verify_obs12(n: usize, sets: [&[usize]; 3]) -> Result<Option<(usize, usize)>> {
    let mut masks = [0u128; 3];
    for (i, s) in sets.iter().enumerate() {
        for &b in s.iter() {
            if b >= n || b >= 128 {
                return domain(format!("ball {b} out of range for n={n}"));
            }
            masks[i] |= 1 << b;
        }
        if 2 * masks[i].count_ones() as usize >= n {
            return domain(format!("set {i} has at least n/2 balls"));
        }
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if 6 * ((masks[i] | masks[j]).count_ones() as usize) < 5 * n {
            return Ok(Some((i, j)));
        }
    }
    Ok(None)
}

/// Parameters of the named adversary constructions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum NamedSpec {
    /// Two equal halves X and Y; triples answered from the half they meet twice.
    Sec1Xy { n: usize },
    /// Odd n with a pair x, y of small co-degree.
    Thm3i {
        n: usize,
        x: usize,
        y: usize,
        #[serde(default)]
        design: Option<Vec<Vec<usize>>>,
    },
    /// Even n with four balls of small cross co-degree sum.
    Thm3iii {
        n: usize,
        x: usize,
        y: usize,
        u: usize,
        v: usize,
        #[serde(default)]
        design: Option<Vec<Vec<usize>>>,
    },
    /// Six blocks around a cycle; two transversal families are excluded.
    Thm3v { n: usize },
    /// Groups below n/2 for even query sizes under non-minority answers.
    Lemma15 { n: usize, q: usize },
    /// A groups for the ratio model with ratio num/den.
    Prop17 { n: usize, q: usize, num: u32, den: u32 },
}

impl NamedSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            NamedSpec::Sec1Xy { .. } => "sec1_xy",
            NamedSpec::Thm3i { .. } => "thm3i",
            NamedSpec::Thm3iii { .. } => "thm3iii",
            NamedSpec::Thm3v { .. } => "thm3v",
            NamedSpec::Lemma15 { .. } => "lemma15",
            NamedSpec::Prop17 { .. } => "prop17",
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Largest A with ceil(q/A) - 1 >= (num/den)(q-1).
pub fn ratio_a(q: usize, num: u32, den: u32) -> usize {
    (1..=q).rev().find(|&a| (q.div_ceil(a) - 1) as u64 * den as u64 >= num as u64 * (q as u64 - 1)).unwrap_or(1)
}

/// Block sizes for the six-block construction, including the padding rule for n = 6r + i.
pub fn thm3v_sizes(n: usize) -> Result<[usize; 6]> {
    if n < 12 {
        return Err(Error::Config(format!("six-block construction needs n >= 12, got {n}")));
    }
    let (r, i) = (n / 6, n % 6);
    let mut s = [r - 1, r + 1, r - 1, r + 1, r - 1, r + 1];
    for j in 1..=i {
        if j <= 3 {
            s[2 * j - 1] += 1;
        } else {
            s[2 * j - 8] += 1;
        }
    }
    Ok(s)
}

#[derive(Clone, Debug)]
enum Rule {
    /// Two groups; answer from the group met twice.
    Halves,
    Thm3i { x: usize, y: usize },
    Thm3iii,
    Thm3v,
    /// Answer from the first group met at least `need` times; groups at index `extra` and above never count.
    Threshold { need: usize, extra: usize },
}

/// A published adversary construction with its answer table and witness colorings.
#[derive(Clone, Debug)]
pub struct NamedOracle {
    spec: NamedSpec,
    n: usize,
    q: usize,
    model: AnswerModel,
    group: Vec<usize>,
    rule: Rule,
    allowed: Option<Vec<Query>>,
    witnesses: Vec<Coloring>,
}

fn check_ball(n: usize, b: usize, name: &str) -> Result<()> {
    if b >= n {
        return Err(Error::Config(format!("ball {name}={b} out of range for n={n}")));
    }
    Ok(())
}

fn parse_design(n: usize, d: &[Vec<usize>]) -> Result<Vec<Query>> {
    let mut out = Vec::with_capacity(d.len());
    for s in d {
        let q = Query::from_slice(s).map_err(|e| Error::Config(e.to_string()))?;
        q.check(n, 3).map_err(|e| Error::Config(e.to_string()))?;
        out.push(q);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn coloring_from_groups(group: &[usize], color_of: impl Fn(usize) -> u8) -> Coloring {
    let colors: Vec<u8> = group.iter().map(|&g| color_of(g)).collect();
    Coloring::from_colors(&colors).expect("non-empty coloring")
}

impl NamedOracle {
    pub fn build(spec: NamedSpec) -> Result<Self> {
        match spec.clone() {
            NamedSpec::Sec1Xy { n } => {
                if n < 4 || n % 2 == 1 {
                    return Err(Error::Config(format!("sec1_xy needs even n >= 4, got {n}")));
                }
                let group: Vec<usize> = (0..n).map(|b| usize::from(b >= n / 2)).collect();
                let witnesses = vec![coloring_from_groups(&group, |_| 0), coloring_from_groups(&group, |g| g as u8)];
                Ok(NamedOracle {
                    spec,
                    n,
                    q: 3,
                    model: AnswerModel::Majority,
                    group,
                    rule: Rule::Halves,
                    allowed: None,
                    witnesses,
                })
            }
            NamedSpec::Thm3i { n, x, y, ref design } => Self::build_thm3i(spec.clone(), n, x, y, design.as_deref()),
            NamedSpec::Thm3iii { n, x, y, u, v, ref design } => {
                Self::build_thm3iii(spec.clone(), n, [x, y, u, v], design.as_deref())
            }
            NamedSpec::Thm3v { n } => {
                let sizes = thm3v_sizes(n)?;
                let mut group = Vec::with_capacity(n);
                for (g, &s) in sizes.iter().enumerate() {
                    group.extend(std::iter::repeat(g).take(s));
                }
                let witnesses = (0..3)
                    .map(|i| {
                        let red = [2 * i, (2 * i + 1) % 6, (2 * i + 2) % 6];
                        coloring_from_groups(&group, |g| u8::from(!red.contains(&g)))
                    })
                    .collect();
                Ok(NamedOracle {
                    spec,
                    n,
                    q: 3,
                    model: AnswerModel::Majority,
                    group,
                    rule: Rule::Thm3v,
                    allowed: None,
                    witnesses,
                })
            }
            NamedSpec::Lemma15 { n, q } => {
                if q < 2 || q % 2 == 1 || q > n {
                    return Err(Error::Config(format!("lemma15 needs even q with 2 <= q <= n, got q={q}, n={n}")));
                }
                let sizes: Vec<usize> = if n % 2 == 1 {
                    vec![(n - 1) / 2, (n - 1) / 2, 1]
                } else if q == 4 {
                    let base = n / 3;
                    let mut s = vec![base; 3];
                    for item in s.iter_mut().take(n % 3) {
                        *item += 1;
                    }
                    if s.iter().any(|&g| 2 * g >= n) {
                        return Err(Error::Config(format!("n={n} cannot be split into three groups below n/2")));
                    }
                    s
                } else {
                    return Err(Error::Config("lemma15 covers q=4 with even n, or odd n with even q".into()));
                };
                let mut group = Vec::with_capacity(n);
                for (g, &s) in sizes.iter().enumerate() {
                    group.extend(std::iter::repeat(g).take(s));
                }
                let groups = sizes.len();
                let witnesses =
                    (0..1u32 << groups).map(|m| coloring_from_groups(&group, |g| (m >> g & 1) as u8)).collect();
                Ok(NamedOracle {
                    spec,
                    n,
                    q,
                    model: AnswerModel::NonMinority,
                    group,
                    rule: Rule::Threshold { need: q / 2, extra: groups },
                    allowed: None,
                    witnesses,
                })
            }
            NamedSpec::Prop17 { n, q, num, den } => {
                let model = AnswerModel::Alpha { num, den };
                if num == 0 || den == 0 || 2 * num > den {
                    return Err(Error::Config(format!("ratio {num}/{den} must lie in (0, 1/2]")));
                }
                model.check_total(q)?;
                if q < 2 || q > n {
                    return Err(Error::Config(format!("prop17 needs 2 <= q <= n, got q={q}, n={n}")));
                }
                let a = ratio_a(q, num, den);
                if a < 2 {
                    return Err(Error::Config(format!("ratio {num}/{den} at q={q} gives A={a}; need A >= 2")));
                }
                let need = q.div_ceil(a);
                let slack = q - a * (need - 1) - 1;
                let extra = n % a;
                if extra > slack {
                    return Err(Error::Config(format!(
                        "n mod A = {extra} exceeds the {slack} extra balls allowed for q={q}, A={a}"
                    )));
                }
                let m = n / a;
                if m == 0 {
                    return Err(Error::Config(format!("n={n} is smaller than A={a}")));
                }
                let group: Vec<usize> = (0..n).map(|b| if b < a * m { b / m } else { a }).collect();
                let mut witnesses = vec![coloring_from_groups(&group, |_| 1)];
                for i in 0..a {
                    witnesses.push(coloring_from_groups(&group, |g| u8::from(g != i)));
                }
                Ok(NamedOracle {
                    spec,
                    n,
                    q,
                    model,
                    group,
                    rule: Rule::Threshold { need, extra: a },
                    allowed: None,
                    witnesses,
                })
            }
        }
    }

    fn build_thm3i(spec: NamedSpec, n: usize, x: usize, y: usize, design: Option<&[Vec<usize>]>) -> Result<Self> {
        if n < 5 || n % 2 == 0 {
            return Err(Error::Config(format!("thm3i needs odd n >= 5, got {n}")));
        }
        check_ball(n, x, "x")?;
        check_ball(n, y, "y")?;
        if x == y {
            return Err(Error::Config("thm3i needs x != y".into()));
        }
        let k = (n - 1) / 2;
        let allowed = design.map(|d| parse_design(n, d)).transpose()?;
        let forced: Vec<usize> = match &allowed {
            Some(d) => {
                let mut v: Vec<usize> = d
                    .iter()
                    .filter(|q| q.contains(x) && q.contains(y))
                    .map(|q| *q.balls().iter().find(|&&b| b != x && b != y).expect("triple"))
                    .collect();
                v.sort_unstable();
                v
            }
            None => Vec::new(),
        };
        if forced.len() >= k {
            return Err(Error::Config(format!(
                "co-degree d(x,y)={} is not below (n-2)/2; thm3i does not apply",
                forced.len()
            )));
        }
        // groups: 0 = B1, 1 = B2, 2 = x, 3 = y
        let mut group = vec![0usize; n];
        group[x] = 2;
        group[y] = 3;
        for &b in &forced {
            group[b] = 1;
        }
        let mut b2 = forced.len();
        for b in 0..n {
            if b2 == k - 1 {
                break;
            }
            if b != x && b != y && group[b] == 0 {
                group[b] = 1;
                b2 += 1;
            }
        }
        // B1 blue, B2 red, at least one of x, y red
        let witnesses = [(0u8, 0u8), (0, 1), (1, 0)]
            .iter()
            .map(|&(cx, cy)| coloring_from_groups(&group, |g| [1, 0, cx, cy][g]))
            .collect();
        Ok(NamedOracle {
            spec,
            n,
            q: 3,
            model: AnswerModel::Majority,
            group,
            rule: Rule::Thm3i { x, y },
            allowed,
            witnesses,
        })
    }

    fn build_thm3iii(spec: NamedSpec, n: usize, four: [usize; 4], design: Option<&[Vec<usize>]>) -> Result<Self> {
        if n < 8 || n % 2 == 1 {
            return Err(Error::Config(format!("thm3iii needs even n >= 8, got {n}")));
        }
        for (b, name) in four.iter().zip(["x", "y", "u", "v"]) {
            check_ball(n, *b, name)?;
        }
        let mut sorted = four;
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("thm3iii needs four distinct balls".into()));
        }
        let [x, y, u, v] = four;
        let allowed = design.map(|d| parse_design(n, d)).transpose()?;
        // groups: 0 = B1, 1 = B2, 2 = {x,y}, 3 = {u,v}
        let mut group = vec![1usize; n];
        group[x] = 2;
        group[y] = 2;
        group[u] = 3;
        group[v] = 3;
        let target = n / 2 - 3;
        let mut b1 = 0;
        if let Some(d) = &allowed {
            let mut sum = 0;
            for q in d {
                let xi = q.contains(x) as usize + q.contains(y) as usize;
                let nu = q.contains(u) as usize + q.contains(v) as usize;
                sum += xi * nu;
                if xi == 1 && nu == 1 {
                    let b = *q.balls().iter().find(|&&b| !four.contains(&b)).expect("triple");
                    if group[b] == 1 {
                        group[b] = 0;
                        b1 += 1;
                    }
                }
            }
            if sum > target {
                return Err(Error::Config(format!(
                    "cross co-degree sum {sum} exceeds n/2-3={target}; thm3iii does not apply"
                )));
            }
        }
        for b in 0..n {
            if b1 >= target {
                break;
            }
            if group[b] == 1 {
                group[b] = 0;
                b1 += 1;
            }
        }
        // every coloring of the family: B1 and B2 differ, pairs monochromatic, one pair matches B1
        let mut witnesses = Vec::new();
        for a in 0..2u8 {
            for (pxy, puv) in [(a, a), (a, 1 - a), (1 - a, a)] {
                witnesses.push(coloring_from_groups(&group, |g| [a, 1 - a, pxy, puv][g]));
            }
        }
        Ok(NamedOracle {
            spec,
            n,
            q: 3,
            model: AnswerModel::Majority,
            group,
            rule: Rule::Thm3iii,
            allowed,
            witnesses,
        })
    }

    pub fn spec(&self) -> &NamedSpec {
        &self.spec
    }

    /// Group index of each ball.
    pub fn groups(&self) -> &[usize] {
        &self.group
    }

    pub fn witnesses(&self) -> &[Coloring] {
        &self.witnesses
    }

    /// The full query set this construction answers.
    pub fn design(&self) -> Vec<Query> {
        if let Some(d) = &self.allowed {
            return d.clone();
        }
        subsets(self.n, self.q)
            .into_iter()
            .map(|s| Query::new(s).expect("subset"))
            .filter(|q| self.in_scope(q))
            .collect()
    }

    pub fn design_size_upper(&self) -> u128 {
        binomial(self.n, self.q)
    }

    fn in_scope(&self, q: &Query) -> bool {
        self.rule_answer(q).is_ok()
    }

    /// Answers every query of `design()`.
    pub fn assignment(&self) -> Result<Assignment> {
        self.design().into_iter().map(|q| Ok((q.clone(), self.rule_answer(&q)?))).collect()
    }

    fn out_of_design(&self, q: &Query) -> Result<Answer> {
        Err(Error::Config(format!("query {:?} lies outside the {} design", q.balls(), self.spec.kind())))
    }

    fn lowest_in(&self, q: &Query, g: usize) -> usize {
        *q.balls().iter().find(|&&b| self.group[b] == g).expect("group member")
    }

    fn rule_answer(&self, q: &Query) -> Result<Answer> {
        if let Some(d) = &self.allowed {
            if d.binary_search(q).is_err() {
                return self.out_of_design(q);
            }
        }
        let mut count = [0usize; 8];
        for &b in q.balls() {
            count[self.group[b]] += 1;
        }
        match self.rule {
            Rule::Halves => {
                let g = if count[0] >= 2 { 0 } else { 1 };
                Ok(Answer::Ball(self.lowest_in(q, g)))
            }
            Rule::Thm3i { x, y } => {
                if let Some(g) = (0..2).find(|&g| count[g] >= 2) {
                    return Ok(Answer::Ball(self.lowest_in(q, g)));
                }
                if q.contains(x) && q.contains(y) {
                    let third = *q.balls().iter().find(|&&b| b != x && b != y).expect("triple");
                    if self.group[third] != 1 {
                        return self.out_of_design(q);
                    }
                    return Ok(Answer::Ball(third));
                }
                Ok(Answer::Ball(if q.contains(x) { x } else { y }))
            }
            Rule::Thm3iii => {
                if let Some(g) = (0..4).find(|&g| count[g] >= 2) {
                    return Ok(Answer::Ball(self.lowest_in(q, g)));
                }
                if count[2] == 1 && count[3] == 1 {
                    if count[0] == 1 {
                        return Ok(Answer::Ball(self.lowest_in(q, 0)));
                    }
                    return self.out_of_design(q);
                }
                let z = *q.balls().iter().find(|&&b| self.group[b] >= 2).expect("pair ball");
                Ok(Answer::Ball(z))
            }
            Rule::Thm3v => {
                if let Some(g) = (0..6).find(|&g| count[g] >= 2) {
                    return Ok(Answer::Ball(self.lowest_in(q, g)));
                }
                let odd = count[0] + count[2] + count[4];
                if odd == 3 || odd == 0 {
                    return self.out_of_design(q);
                }
                for i in 0..6 {
                    let j = (i + 1) % 6;
                    if count[i] == 1 && count[j] == 1 {
                        let third = *q.balls().iter().find(|&&b| self.group[b] != i && self.group[b] != j).unwrap();
                        let d = (self.group[third] + 6 - i) % 6;
                        let g = if d <= 3 { j } else { i };
                        return Ok(Answer::Ball(self.lowest_in(q, g)));
                    }
                }
                unreachable!("a transversal with one odd-even mix has an adjacent pair")
            }
            Rule::Threshold { need, extra } => match (0..extra).find(|&g| count[g] >= need) {
                Some(g) => Ok(Answer::Ball(self.lowest_in(q, g))),
                None => self.out_of_design(q),
            },
        }
    }
}

impl BallOracle for NamedOracle {
    fn n(&self) -> usize {
        self.n
    }
    fn q(&self) -> usize {
        self.q
    }
    fn model(&self) -> AnswerModel {
        self.model
    }
    fn answer(&mut self, query: &Query) -> Result<Answer> {
        self.rule_answer(query)
    }
}

/// Lowest ball outside every minority set of the given colorings.
pub fn common_nonminority(n: usize, colorings: impl IntoIterator<Item = u64>) -> Option<usize> {
    let mut u = 0;
    for m in colorings {
        u |= minority_mask(n, m);
    }
    (0..n).find(|&b| u >> b & 1 == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::minority_set;

    fn q(v: &[usize]) -> Query {
        Query::from_slice(v).unwrap()
    }

    #[test]
    fn fixed_examples() {
        let mut o = FixedOracle::new(Coloring::parse("RRB").unwrap(), 3, AnswerModel::Majority, Tiebreak::Lowest)
            .unwrap();
        assert_eq!(o.answer(&q(&[0, 1, 2])).unwrap(), Answer::Ball(0));
        let mut o = FixedOracle::new(Coloring::parse("RRBB").unwrap(), 4, AnswerModel::Majority, Tiebreak::Lowest)
            .unwrap();
        assert_eq!(o.answer(&q(&[0, 1, 2, 3])).unwrap(), Answer::NoMajority);
    }

    #[test]
    fn lazy_first_answer_filters_exactly() {
        let mut o = LazyOracle::new(5, 3, AnswerModel::Majority, LazyPolicy::MaxSurvivors).unwrap();
        let query = q(&[1, 2, 4]);
        let a = o.answer(&query).unwrap();
        let b = a.ball().unwrap();
        let brute: Vec<u64> = (0..32u64)
            .filter(|&m| {
                let c = Coloring::from_mask(5, m).unwrap();
                crate::model::is_majority_ball(&c, &query, b).unwrap()
            })
            .collect();
        assert_eq!(o.consistent().iter().collect::<Vec<_>>(), brute);
    }

    #[test]
    fn session_dedups() {
        let o = FixedOracle::new(Coloring::parse("RRBRB").unwrap(), 3, AnswerModel::Majority, Tiebreak::Lowest)
            .unwrap();
        let mut s = Session::new(o);
        s.ask(&[0, 1, 2]).unwrap();
        s.ask(&[2, 1, 0]).unwrap();
        assert_eq!(s.distinct(), 1);
        assert!(s.ask(&[0, 1]).is_err());
    }

    #[test]
    fn legal_colorings_examples() {
        assert_eq!(legal_colorings(3, &[], AnswerModel::Majority).unwrap().len(), 8);
        let e = vec![(q(&[0, 1, 2]), Answer::Ball(0))];
        assert_eq!(legal_colorings(3, &e, AnswerModel::Majority).unwrap().len(), 6);
        assert!(matches!(legal_set(25, &[], AnswerModel::Majority), Err(Error::Capacity(_))));
    }

    #[test]
    fn cover_of_monochromatic_only() {
        let s = ColorSet::from_iter(4, [0, 15]).unwrap();
        assert_eq!(cover_of(&s), CoverOutcome::NotCovered);
        assert_eq!(cover_of(&ColorSet::empty(4).unwrap()), CoverOutcome::Contradictory);
    }

    #[test]
    fn obs12_small() {
        assert_eq!(verify_obs12(6, [&[0, 1], &[0, 1], &[0, 1]]).unwrap(), Some((0, 1)));
        assert!(verify_obs12(6, [&[0, 1, 2], &[0], &[1]]).is_err());
    }

    #[test]
    fn thm3v_sizes_and_padding() {
        assert_eq!(thm3v_sizes(12).unwrap(), [1, 3, 1, 3, 1, 3]);
        assert_eq!(thm3v_sizes(13).unwrap(), [1, 4, 1, 3, 1, 3]);
        assert_eq!(thm3v_sizes(17).unwrap(), [2, 4, 2, 4, 1, 4]);
        for n in 12..40 {
            assert_eq!(thm3v_sizes(n).unwrap().iter().sum::<usize>(), n);
        }
        assert!(thm3v_sizes(11).is_err());
    }

    #[test]
    fn ratio_a_values() {
        // non-minority answers at q = 4 are the ratio 1/3
        assert_eq!(ratio_a(4, 1, 3), 3);
        assert_eq!(ratio_a(4, 1, 2), 1);
        assert_eq!(ratio_a(3, 1, 2), 2);
        assert_eq!(ratio_a(6, 2, 5), 2);
    }

    #[test]
    fn named_witnesses_legal_on_their_designs() {
        let specs = vec![
            NamedSpec::Sec1Xy { n: 6 },
            NamedSpec::Thm3i { n: 7, x: 0, y: 1, design: None },
            NamedSpec::Thm3iii { n: 8, x: 0, y: 1, u: 2, v: 3, design: None },
            NamedSpec::Thm3v { n: 12 },
            NamedSpec::Lemma15 { n: 6, q: 4 },
            NamedSpec::Lemma15 { n: 7, q: 4 },
            NamedSpec::Prop17 { n: 6, q: 4, num: 1, den: 3 },
        ];
        for spec in specs {
            let o = NamedOracle::build(spec.clone()).unwrap();
            let table = o.assignment().unwrap();
            let legal = legal_set(o.n(), &table, o.model()).unwrap();
            for w in o.witnesses() {
                assert!(legal.contains(w.mask()), "{spec:?} witness {w} not legal");
            }
            if !matches!(spec, NamedSpec::Sec1Xy { .. }) {
                assert_eq!(cover_of(&legal), CoverOutcome::Covered, "{spec:?}");
            }
        }
    }

    #[test]
    fn thm3i_witness_minority_sets() {
        let o = NamedOracle::build(NamedSpec::Thm3i { n: 7, x: 0, y: 1, design: None }).unwrap();
        let b1: Vec<usize> = (0..7).filter(|&b| o.groups()[b] == 0).collect();
        assert_eq!(b1.len(), 3);
        assert_eq!(minority_set(&o.witnesses()[0]), b1);
        assert_eq!(o.design().len(), 35 - 3);
    }

    #[test]
    fn preconditions_rejected() {
        assert!(matches!(NamedOracle::build(NamedSpec::Sec1Xy { n: 5 }), Err(Error::Config(_))));
        assert!(matches!(NamedOracle::build(NamedSpec::Thm3v { n: 11 }), Err(Error::Config(_))));
        let full: Vec<Vec<usize>> = subsets(7, 3);
        assert!(matches!(
            NamedOracle::build(NamedSpec::Thm3i { n: 7, x: 0, y: 1, design: Some(full) }),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            NamedOracle::build(NamedSpec::Prop17 { n: 7, q: 4, num: 1, den: 3 }),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn out_of_design_queries_rejected() {
        let mut o = NamedOracle::build(NamedSpec::Thm3v { n: 12 }).unwrap();
        // one ball from each odd block
        let g = o.groups().to_vec();
        let pick = |k: usize| (0..12).find(|&b| g[b] == k).unwrap();
        let bad = q(&[pick(0), pick(2), pick(4)]);
        assert!(matches!(o.answer(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn named_spec_json() {
        let s = NamedSpec::from_json(r#"{"kind":"thm3v","params":{"n":12}}"#).unwrap();
        assert_eq!(s, NamedSpec::Thm3v { n: 12 });
        let s = NamedSpec::from_json(r#"{"kind":"thm3i","params":{"n":7,"x":0,"y":1}}"#).unwrap();
        assert_eq!(s.kind(), "thm3i");
    }
}
