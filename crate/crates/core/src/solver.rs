//! Exact game values by minimax over consistent coloring sets, and exact determinability of designs.

use std::collections::HashMap;

use serde::Serialize;

use crate::colorset::{check_budget, minority_mask, ColorSet};
use crate::design::Design;
use crate::error::{domain, Error, Result};
use crate::model::{subsets, Answer, AnswerModel, Query};

pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// State budget from MAJSEARCH_BUDGET, else the default.
pub fn solver_budget() -> Result<u64> {
    match std::env::var("MAJSEARCH_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| Error::Config(format!("MAJSEARCH_BUDGET={v:?} is not a count"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

/// What the searcher must exhibit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Goal {
    /// A non-minority ball of the whole set.
    NonMinority,
    /// A ball sharing its color with at least (n-1)/A others.
    Fraction(usize),
}

impl Goal {
    /// Balls failing the goal under coloring `m`.
    pub fn bad_mask(&self, n: usize, m: u64) -> u64 {
        match *self {
            Goal::NonMinority => minority_mask(n, m),
            Goal::Fraction(a) => {
                let full = (1u64 << n) - 1;
                let blue = m.count_ones() as usize;
                let ok = |same: usize| (same - 1) * a >= n - 1;
                let mut bad = 0;
                if blue > 0 && !ok(blue) {
                    bad |= m;
                }
                if blue < n && !ok(n - blue) {
                    bad |= !m & full;
                }
                bad
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Finite(u32),
    Impossible,
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Finite(v) => write!(f, "{v}"),
            Value::Impossible => write!(f, "impossible"),
        }
    }
}

/// Colorings with ball 0 red stand for themselves and their complements.
fn half_full(n: usize) -> Result<ColorSet> {
    ColorSet::from_iter(n, (0..1u64 << n).filter(|m| m & 1 == 0))
}

fn normalize(n: usize, m: u64) -> u64 {
    if m & 1 == 1 {
        !m & ((1u64 << n) - 1)
    } else {
        m
    }
}

#[derive(Default, Clone, Copy)]
struct Bounds {
    lb: u32,
    ub: u32,
}

struct Game {
    n: usize,
    queries: Vec<Query>,
    /// per query, the colorings legalizing each candidate answer
    answer_sets: Vec<Vec<ColorSet>>,
    bad: Vec<u64>,
    full_balls: u64,
    memo: HashMap<ColorSet, Bounds>,
    solvable: HashMap<ColorSet, bool>,
    visits: u64,
    budget: u64,
}

impl Game {
    fn new(n: usize, q: usize, model: AnswerModel, goal: Goal, budget: u64) -> Result<Self> {
        check_budget(n)?;
        if n >= 64 {
            return Err(Error::Capacity("solver needs n < 64".into()));
        }
        if q == 0 || q > n {
            return domain(format!("query size {q} does not fit n={n}"));
        }
        model.check_total(q)?;
        let half = half_full(n)?;
        let queries: Vec<Query> = subsets(n, q).into_iter().map(Query::new).collect::<Result<_>>()?;
        let mut answer_sets = Vec::with_capacity(queries.len());
        for qu in &queries {
            let mut opts: Vec<Answer> = qu.balls().iter().map(|&b| Answer::Ball(b)).collect();
            if model.allows_no_majority() {
                opts.push(Answer::NoMajority);
            }
            answer_sets.push(opts.iter().map(|a| half.filter(qu, a, model)).collect());
        }
        let bad = (0..1u64 << n).map(|m| goal.bad_mask(n, m)).collect();
        Ok(Game {
            n,
            queries,
            answer_sets,
            bad,
            full_balls: (1u64 << n) - 1,
            memo: HashMap::new(),
            solvable: HashMap::new(),
            visits: 0,
            budget,
        })
    }

    fn tick(&mut self) -> Result<()> {
        self.visits += 1;
        if self.visits > self.budget {
            return Err(Error::Capacity(format!("solver exceeded {} states (MAJSEARCH_BUDGET)", self.budget)));
        }
        Ok(())
    }

    fn determined(&self, c: &ColorSet) -> bool {
        let mut u = 0;
        for m in c.iter() {
            u |= self.bad[m as usize];
            if u == self.full_balls {
                return false;
            }
        }
        true
    }

    /// Classes of balls whose transposition maps `c` onto itself.
    fn ball_classes(&self, c: &ColorSet) -> Vec<usize> {
        let n = self.n;
        let mut class: Vec<usize> = (0..n).collect();
        let members: Vec<u64> = c.iter().collect();
        for i in 0..n {
            if class[i] != i {
                continue;
            }
            for j in i + 1..n {
                if class[j] != j {
                    continue;
                }
                let swaps = members.iter().all(|&m| {
                    let (bi, bj) = (m >> i & 1, m >> j & 1);
                    let s = if bi == bj { m } else { m ^ (1 << i) ^ (1 << j) };
                    c.contains(normalize(n, s))
                });
                if swaps {
                    class[j] = i;
                }
            }
        }
        class
    }

    /// An isomorphic image of `c` chosen by invariant refinement; isomorphic states usually share it.
    fn canonical(&self, c: &ColorSet, class: &[usize]) -> ColorSet {
        use std::hash::{Hash, Hasher};
        let n = self.n;
        let members: Vec<u64> = c.iter().collect();
        let mut agree = vec![vec![0u32; n]; n];
        for &m in &members {
            for i in 0..n {
                for j in i + 1..n {
                    if (m >> i & 1) == (m >> j & 1) {
                        agree[i][j] += 1;
                        agree[j][i] += 1;
                    }
                }
            }
        }
        let mut sig = vec![0u64; n];
        for _ in 0..3 {
            let next: Vec<u64> = (0..n)
                .map(|i| {
                    let mut row: Vec<(u64, u32)> = (0..n).filter(|&j| j != i).map(|j| (sig[j], agree[i][j])).collect();
                    row.sort_unstable();
                    let mut h = std::collections::hash_map::DefaultHasher::new();
                    (sig[i], row).hash(&mut h);
                    h.finish()
                })
                .collect();
            sig = next;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&b| (sig[b], class[b], b));
        // blocks of interchangeable balls inside each cell of equal signature
        let mut cells: Vec<Vec<Vec<usize>>> = Vec::new();
        for (idx, &b) in order.iter().enumerate() {
            let new_cell = idx == 0 || sig[order[idx - 1]] != sig[b];
            if new_cell {
                cells.push(Vec::new());
            }
            let cell = cells.last_mut().expect("cell");
            match cell.last_mut() {
                Some(block) if class[block[0]] == class[b] => block.push(b),
                _ => cell.push(vec![b]),
            }
        }
        const CAP: usize = 24;
        let mut candidates: Vec<Vec<usize>> = vec![Vec::new()];
        for cell in &cells {
            let perms = block_orders(cell.len());
            if candidates.len() * perms.len() > CAP {
                for cand in &mut candidates {
                    cand.extend(cell.iter().flatten());
                }
                continue;
            }
            let mut next = Vec::with_capacity(candidates.len() * perms.len());
            for cand in &candidates {
                for p in &perms {
                    let mut v = cand.clone();
                    for &bi in p {
                        v.extend(&cell[bi]);
                    }
                    next.push(v);
                }
            }
            candidates = next;
        }
        let mut best: Option<ColorSet> = None;
        for cand in candidates {
            let mut label = vec![0usize; n];
            for (pos, &b) in cand.iter().enumerate() {
                label[b] = pos;
            }
            let mut img = ColorSet::empty(n).expect("within budget");
            for &m in &members {
                let mut t = 0u64;
                for (b, &lb) in label.iter().enumerate() {
                    t |= (m >> b & 1) << lb;
                }
                img.insert(normalize(n, t));
            }
            if best.as_ref().is_none_or(|bs| img.words() < bs.words()) {
                best = Some(img);
            }
        }
        best.expect("at least one candidate")
    }

    /// Candidate moves: one query per orbit under interchangeable balls, with its answer branches.
    /// Queries where some answer leaves `c` unchanged are skipped.
    fn moves(&self, c: &ColorSet, class: &[usize]) -> Vec<(usize, Vec<ColorSet>)> {
        let size = c.len();
        let mut out = Vec::new();
        'q: for (qi, qu) in self.queries.iter().enumerate() {
            // a representative uses the lowest members of each class
            let b = qu.balls();
            for (pos, &x) in b.iter().enumerate() {
                let cl = class[x];
                let lower_same_class = (0..x).filter(|&y| class[y] == cl).count();
                let used_before = b[..pos].iter().filter(|&&y| class[y] == cl).count();
                if lower_same_class != used_before {
                    continue 'q;
                }
            }
            let mut branches = Vec::new();
            for s in &self.answer_sets[qi] {
                let f = c.and(s);
                let l = f.len();
                if l == 0 {
                    continue;
                }
                if l == size {
                    continue 'q;
                }
                branches.push(f);
            }
            branches.sort_by_key(|f| std::cmp::Reverse(f.len()));
            out.push((qi, branches));
        }
        out.sort_by_key(|(_, br)| br.first().map(|f| f.len()).unwrap_or(0));
        out
    }

    fn one_query_suffices(&self, c: &ColorSet) -> bool {
        let cw = c.words();
        self.answer_sets.iter().any(|sets| {
            sets.iter().all(|s| {
                let mut u = 0u64;
                for (i, (&a, &b)) in cw.iter().zip(s.words()).enumerate() {
                    let mut w = a & b;
                    while w != 0 {
                        let m = (i * 64) as u64 + w.trailing_zeros() as u64;
                        u |= self.bad[m as usize];
                        w &= w - 1;
                    }
                }
                u != self.full_balls
            })
        })
    }

    fn is_solvable(&mut self, c: &ColorSet) -> Result<bool> {
        if self.determined(c) {
            return Ok(true);
        }
        let class = self.ball_classes(c);
        let key = self.canonical(c, &class);
        if let Some(&v) = self.solvable.get(&key) {
            return Ok(v);
        }
        self.tick()?;
        let mut ok = false;
        for (_, branches) in self.moves(c, &class) {
            let mut all = true;
            for f in &branches {
                if !self.is_solvable(f)? {
                    all = false;
                    break;
                }
            }
            if all {
                ok = true;
                break;
            }
        }
        self.solvable.insert(key, ok);
        Ok(ok)
    }

    /// Whether `c` can be resolved within `d` more queries.
    fn within(&mut self, c: &ColorSet, d: u32) -> Result<bool> {
        if self.determined(c) {
            return Ok(true);
        }
        if d == 0 {
            return Ok(false);
        }
        if d == 1 {
            self.tick()?;
            return Ok(self.one_query_suffices(c));
        }
        let class = self.ball_classes(c);
        let key = self.canonical(c, &class);
        let b = self.memo.get(&key).copied().unwrap_or(Bounds { lb: 1, ub: u32::MAX });
        if b.ub <= d {
            return Ok(true);
        }
        if b.lb > d {
            return Ok(false);
        }
        self.tick()?;
        let mut found = false;
        for (_, branches) in self.moves(c, &class) {
            let mut all = true;
            for f in &branches {
                if !self.within(f, d - 1)? {
                    all = false;
                    break;
                }
            }
            if all {
                found = true;
                break;
            }
        }
        let e = self.memo.entry(key).or_insert(b);
        if found {
            e.ub = e.ub.min(d);
        } else {
            e.lb = e.lb.max(d + 1);
        }
        Ok(found)
    }
}

/// All orders of `k` items.
fn block_orders(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..k).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..k).rev().find(|&i| p[i - 1] < p[i]) else { return out };
        let j = (i..k).rev().find(|&j| p[j] > p[i - 1]).expect("successor");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// Minimax number of queries, or `Impossible` when no strategy can always succeed.
pub fn exact_adaptive_complexity(n: usize, q: usize, model: AnswerModel, goal: Goal, budget: u64) -> Result<Value> {
    if n == 0 {
        return domain("no balls");
    }
    let mut g = Game::new(n, q, model, goal, budget)?;
    let start = half_full(n)?;
    if !g.is_solvable(&start)? {
        return Ok(Value::Impossible);
    }
    for d in 0.. {
        if g.within(&start, d)? {
            return Ok(Value::Finite(d));
        }
    }
    unreachable!("the loop returns once the depth reaches the solvable bound")
}

/// Lowest ball that is non-minority under every coloring of `state`.
pub fn deduced_ball(state: &ColorSet) -> Option<usize> {
    state.deduced_ball()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Determination {
    pub determines: bool,
    /// For a defeated design: colorings (ball 0 red) whose minority sets cover every ball
    /// and that share a legal answer on every query.
    pub witness: Option<Vec<u64>>,
    pub nodes: u64,
}

struct CoverSearch {
    n: usize,
    /// valid[q][c]: bitmask of valid answer positions of query q under coloring index c
    valid: Vec<Vec<u8>>,
    colorings: Vec<u64>,
    bad: Vec<u64>,
    nodes: u64,
    budget: u64,
}

impl CoverSearch {
    fn search(&mut self, allowed: &mut Vec<u8>, covered: u64, chosen: &mut Vec<usize>) -> Result<bool> {
        let full = (1u64 << self.n) - 1;
        if covered == full {
            return Ok(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Capacity(format!("design search exceeded {} nodes (MAJSEARCH_BUDGET)", self.budget)));
        }
        let u = (!covered & full).trailing_zeros() as usize;
        for ci in 0..self.colorings.len() {
            if self.bad[ci] >> u & 1 == 0 {
                continue;
            }
            if chosen.contains(&ci) {
                continue;
            }
            if (0..self.valid.len()).any(|qi| allowed[qi] & self.valid[qi][ci] == 0) {
                continue;
            }
            let saved: Vec<u8> = allowed.clone();
            for qi in 0..self.valid.len() {
                allowed[qi] &= self.valid[qi][ci];
            }
            chosen.push(ci);
            if self.search(allowed, covered | self.bad[ci], chosen)? {
                return Ok(true);
            }
            chosen.pop();
            *allowed = saved;
        }
        Ok(false)
    }
}

/// Whether every answer assignment with a legal coloring pins down a non-minority ball.
pub fn design_determines(d: &Design, model: AnswerModel, budget: u64) -> Result<Determination> {
    let n = d.n();
    check_budget(n)?;
    model.check_total(d.q())?;
    let colorings: Vec<u64> = (0..1u64 << n).filter(|m| m & 1 == 0 && minority_mask(n, *m) != 0).collect();
    let bad: Vec<u64> = colorings.iter().map(|&m| minority_mask(n, m)).collect();
    let mut valid = Vec::with_capacity(d.len());
    for qu in d.queries() {
        let qm = qu.mask();
        let mut row = Vec::with_capacity(colorings.len());
        for &m in &colorings {
            let mut bits = 0u8;
            for (pos, &b) in qu.balls().iter().enumerate() {
                if crate::model::mask_answer_ok(m, qm, &Answer::Ball(b), model) {
                    bits |= 1 << pos;
                }
            }
            if model.allows_no_majority() && crate::model::mask_answer_ok(m, qm, &Answer::NoMajority, model) {
                bits |= 1 << 7;
            }
            row.push(bits);
        }
        valid.push(row);
    }
    if d.q() > 7 {
        return domain("design search supports query sizes up to 7");
    }
    let mut s = CoverSearch { n, valid, colorings, bad, nodes: 0, budget };
    let mut allowed = vec![u8::MAX; s.valid.len()];
    let mut chosen = Vec::new();
    let found = s.search(&mut allowed, 0, &mut chosen)?;
    Ok(Determination {
        determines: !found,
        witness: found.then(|| chosen.iter().map(|&i| s.colorings[i]).collect()),
        nodes: s.nodes,
    })
}

/// An answer assignment realizing a defeat witness: each query gets an answer legal under all witness colorings.
pub fn witness_assignment(d: &Design, model: AnswerModel, witness: &[u64]) -> Result<Vec<(Query, Answer)>> {
    let mut out = Vec::with_capacity(d.len());
    for qu in d.queries() {
        let mut opts: Vec<Answer> = qu.balls().iter().map(|&b| Answer::Ball(b)).collect();
        if model.allows_no_majority() {
            opts.push(Answer::NoMajority);
        }
        let qm = qu.mask();
        let a = opts
            .into_iter()
            .find(|a| witness.iter().all(|&m| crate::model::mask_answer_ok(m, qm, a, model)))
            .ok_or_else(|| Error::Contradiction(format!("witness has no common answer on {:?}", qu.balls())))?;
        out.push((qu.clone(), a));
    }
    Ok(out)
}
