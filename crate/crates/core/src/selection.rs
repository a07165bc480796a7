//! Selection with pair comparisons: relation sorting, all-pairs partition, sort5, MoM2 and MoM3.

use std::collections::HashMap;

use crate::error::{contradiction, domain, Error, Result};
use crate::explore::Chooser;
use crate::model::{Answer, Query, RelKind, Transcript};

/// Outcome of comparing `a` with `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cmp {
    /// value(a) <= value(b)
    Le,
    /// value(a) >= value(b)
    Ge,
    /// values differ (binary model only)
    Ne,
}

impl Cmp {
    pub fn flip(self) -> Cmp {
        match self {
            Cmp::Le => Cmp::Ge,
            Cmp::Ge => Cmp::Le,
            Cmp::Ne => Cmp::Ne,
        }
    }

    /// Whether the answer is true of the values.
    pub fn holds<T: Ord>(self, a: T, b: T) -> bool {
        match self {
            Cmp::Le => a <= b,
            Cmp::Ge => a >= b,
            Cmp::Ne => a != b,
        }
    }
}

pub trait PairOracle {
    fn compare(&mut self, a: usize, b: usize) -> Result<Cmp>;
}

impl<P: PairOracle + ?Sized> PairOracle for &mut P {
    fn compare(&mut self, a: usize, b: usize) -> Result<Cmp> {
        (**self).compare(a, b)
    }
}

/// Comparisons over integers; either direction may be answered on ties.
pub struct TotalOracle<C: Chooser> {
    values: Vec<i64>,
    chooser: C,
}

impl<C: Chooser> TotalOracle<C> {
    pub fn new(values: Vec<i64>, chooser: C) -> Self {
        TotalOracle { values, chooser }
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }
}

impl<C: Chooser> PairOracle for TotalOracle<C> {
    fn compare(&mut self, a: usize, b: usize) -> Result<Cmp> {
        let (va, vb) = (self.values[a], self.values[b]);
        Ok(match va.cmp(&vb) {
            std::cmp::Ordering::Less => Cmp::Le,
            std::cmp::Ordering::Greater => Cmp::Ge,
            std::cmp::Ordering::Equal => [Cmp::Le, Cmp::Ge][self.chooser.choose(2)],
        })
    }
}

/// Comparisons over 0/1 values; a difference may be reported as `Ne`.
pub struct BinaryOracle<C: Chooser> {
    values: Vec<u8>,
    chooser: C,
}

impl<C: Chooser> BinaryOracle<C> {
    pub fn new(values: Vec<u8>, chooser: C) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v > 1) {
            return domain(format!("binary oracle got value {v}"));
        }
        Ok(BinaryOracle { values, chooser })
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }
}

impl<C: Chooser> PairOracle for BinaryOracle<C> {
    fn compare(&mut self, a: usize, b: usize) -> Result<Cmp> {
        let (va, vb) = (self.values[a], self.values[b]);
        let opts = match va.cmp(&vb) {
            std::cmp::Ordering::Equal => [Cmp::Le, Cmp::Ge],
            std::cmp::Ordering::Less => [Cmp::Le, Cmp::Ne],
            std::cmp::Ordering::Greater => [Cmp::Ge, Cmp::Ne],
        };
        Ok(opts[self.chooser.choose(2)])
    }
}

/// Dedup cache and counter around a pair oracle.
pub struct PairSession<P: PairOracle> {
    oracle: P,
    cache: HashMap<(usize, usize), Cmp>,
    log: Vec<(usize, usize, Cmp)>,
}

impl<P: PairOracle> PairSession<P> {
    pub fn new(oracle: P) -> Self {
        PairSession { oracle, cache: HashMap::new(), log: Vec::new() }
    }

    pub fn cmp(&mut self, a: usize, b: usize) -> Result<Cmp> {
        if a == b {
            return domain(format!("element {a} compared with itself"));
        }
        let key = (a.min(b), a.max(b));
        let c = match self.cache.get(&key) {
            Some(&c) => c,
            None => {
                let c = self.oracle.compare(key.0, key.1)?;
                self.cache.insert(key, c);
                self.log.push((key.0, key.1, c));
                c
            }
        };
        Ok(if a == key.0 { c } else { c.flip() })
    }

    pub fn known(&self, a: usize, b: usize) -> Option<Cmp> {
        let key = (a.min(b), a.max(b));
        self.cache.get(&key).map(|&c| if a == key.0 { c } else { c.flip() })
    }

    pub fn distinct(&self) -> usize {
        self.cache.len()
    }

    pub fn oracle(&self) -> &P {
        &self.oracle
    }

    pub fn oracle_mut(&mut self) -> &mut P {
        &mut self.oracle
    }

    pub fn into_oracle(self) -> P {
        self.oracle
    }

    /// Pair queries in asking order as a size-2 transcript.
    pub fn transcript(&self, n: usize) -> Transcript {
        let mut t = Transcript::new(n, 2);
        for &(a, b, c) in &self.log {
            let kind = match c {
                Cmp::Le => RelKind::Leq,
                Cmp::Ge => RelKind::Geq,
                Cmp::Ne => RelKind::Neq,
            };
            t.record(Query::from_slice(&[a, b]).expect("pair"), Answer::Rel { kind, a, b });
        }
        t
    }
}

/// Local relation graph: `leq[i][j]` asserts x_i <= x_j, `neq` marks asserted differences.
#[derive(Clone, Debug)]
pub struct RelationGraph {
    n: usize,
    leq: Vec<Vec<bool>>,
    neq: Vec<Vec<bool>>,
}

impl RelationGraph {
    pub fn new(n: usize) -> Self {
        RelationGraph { n, leq: vec![vec![false; n]; n], neq: vec![vec![false; n]; n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, i: usize, j: usize, c: Cmp) {
        match c {
            Cmp::Le => self.leq[i][j] = true,
            Cmp::Ge => self.leq[j][i] = true,
            Cmp::Ne => {
                self.neq[i][j] = true;
                self.neq[j][i] = true;
            }
        }
    }

    pub fn has_neq(&self, i: usize, j: usize) -> bool {
        self.neq[i][j]
    }

    /// Builds the graph over `elems` from a session's cached answers.
    pub fn from_session<P: PairOracle>(sess: &PairSession<P>, elems: &[usize]) -> Self {
        let mut g = RelationGraph::new(elems.len());
        for i in 0..elems.len() {
            for j in i + 1..elems.len() {
                if let Some(c) = sess.known(elems[i], elems[j]) {
                    g.add(i, j, c);
                }
            }
        }
        g
    }
}

/// Decreasing enumeration of the vertices `verts` of `g`, contracting equal (cyclic) classes.
pub fn sort_from_relations(g: &RelationGraph, verts: &[usize]) -> Result<Vec<usize>> {
    let m = verts.len();
    let mut reach = vec![vec![false; m]; m];
    for (a, &i) in verts.iter().enumerate() {
        reach[a][a] = true;
        for (b, &j) in verts.iter().enumerate() {
            if a != b {
                if !g.leq[i][j] && !g.leq[j][i] {
                    return domain(format!("no order relation between {i} and {j}"));
                }
                reach[a][b] = g.leq[i][j];
            }
        }
    }
    for c in 0..m {
        for a in 0..m {
            if reach[a][c] {
                for b in 0..m {
                    if reach[c][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
    }
    for a in 0..m {
        for b in a + 1..m {
            if reach[a][b] && reach[b][a] && g.neq[verts[a]][verts[b]] {
                return contradiction(format!("{} and {} are both equal and different", verts[a], verts[b]));
            }
        }
    }
    let below: Vec<usize> = (0..m).map(|a| (0..m).filter(|&b| reach[b][a] && !reach[a][b]).count()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| below[b].cmp(&below[a]).then(a.cmp(&b)));
    Ok(order.into_iter().map(|a| verts[a]).collect())
}

fn total_cmp<P: PairOracle>(sess: &mut PairSession<P>, a: usize, b: usize) -> Result<Cmp> {
    match sess.cmp(a, b)? {
        Cmp::Ne => contradiction("difference answer in the total-order model"),
        c => Ok(c),
    }
}

/// Binary insertion of `e` into the ascending `chain[lo..hi]`.
fn insert_range<P: PairOracle>(
    sess: &mut PairSession<P>,
    chain: &mut Vec<usize>,
    e: usize,
    mut lo: usize,
    mut hi: usize,
) -> Result<usize> {
    while lo < hi {
        let mid = (lo + hi) / 2;
        if total_cmp(sess, e, chain[mid])? == Cmp::Le {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    chain.insert(lo, e);
    Ok(lo)
}

/// Ascending order by binary insertion.
pub fn insertion_sort<P: PairOracle>(sess: &mut PairSession<P>, elems: &[usize]) -> Result<Vec<usize>> {
    let mut chain = Vec::with_capacity(elems.len());
    for &e in elems {
        let hi = chain.len();
        insert_range(sess, &mut chain, e, 0, hi)?;
    }
    Ok(chain)
}

/// Sorts five elements with at most seven comparisons (merge insertion). Returns a decreasing enumeration.
pub fn sort5<P: PairOracle>(sess: &mut PairSession<P>, e: [usize; 5]) -> Result<Vec<usize>> {
    let (mut a, mut b) = (e[0], e[1]);
    if total_cmp(sess, a, b)? == Cmp::Le {
        std::mem::swap(&mut a, &mut b);
    }
    let (mut c, mut d) = (e[2], e[3]);
    if total_cmp(sess, c, d)? == Cmp::Le {
        std::mem::swap(&mut c, &mut d);
    }
    if total_cmp(sess, a, c)? == Cmp::Le {
        std::mem::swap(&mut a, &mut c);
        std::mem::swap(&mut b, &mut d);
    }
    // d <= c <= a and b <= a
    let mut chain = vec![d, c, a];
    insert_range(sess, &mut chain, e[4], 0, 3)?;
    let pa = chain.iter().position(|&v| v == a).expect("a in chain");
    insert_range(sess, &mut chain, b, 0, pa)?;
    chain.reverse();
    Ok(chain)
}

/// MoM2 result: `x` with `l` (k-1 elements, all >= x) and `s` (n-k elements, all <= x).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sel2 {
    pub x: usize,
    pub s: Vec<usize>,
    pub l: Vec<usize>,
}

/// MoM2 makes at most `18n + 7` comparisons.
pub fn mom2_bound(n: usize) -> usize {
    18 * n + 7
}

/// Frozen additive constant in the MoM3 bound `59n + C`.
pub const MOM3_ADDITIVE: usize = 0;

pub fn mom3_bound(n: usize) -> usize {
    59 * n + MOM3_ADDITIVE
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelectConfig {
    /// Inputs at or below this size are handled by the base case.
    pub base: usize,
}

impl SelectConfig {
    pub const MOM2_DEFAULT: SelectConfig = SelectConfig { base: 16 };
    pub const MOM3_DEFAULT: SelectConfig = SelectConfig { base: 8 };

    fn checked(self) -> Result<Self> {
        if self.base < 4 {
            return Err(Error::Config(format!("base size {} is below 4", self.base)));
        }
        Ok(self)
    }
}

fn check_elems(elems: &[usize], k: usize) -> Result<()> {
    if k == 0 || k > elems.len() {
        return domain(format!("k={k} out of range 1..={}", elems.len()));
    }
    let mut s = elems.to_vec();
    s.sort_unstable();
    if s.windows(2).any(|w| w[0] == w[1]) {
        return domain("repeated element handle");
    }
    Ok(())
}

/// k-th largest element by median of medians over a total-order oracle.
pub fn mom2_select<P: PairOracle>(
    sess: &mut PairSession<P>,
    elems: &[usize],
    k: usize,
    cfg: SelectConfig,
) -> Result<Sel2> {
    check_elems(elems, k)?;
    let cfg = cfg.checked()?;
    mom2_rec(sess, elems, k, cfg.base)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tag {
    Open,
    S,
    L,
    P,
    R,
    T,
}

fn mom2_rec<P: PairOracle>(sess: &mut PairSession<P>, elems: &[usize], k: usize, base: usize) -> Result<Sel2> {
    let n = elems.len();
    if n <= base {
        let mut desc = insertion_sort(sess, elems)?;
        desc.reverse();
        return Ok(Sel2 { x: desc[k - 1], l: desc[..k - 1].to_vec(), s: desc[k..].to_vec() });
    }
    // Phase 1: sorted groups of five; the leftover group is sorted too.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for ch in elems.chunks(5) {
        let asc = if ch.len() == 5 {
            let mut d = sort5(sess, [ch[0], ch[1], ch[2], ch[3], ch[4]])?;
            d.reverse();
            d
        } else {
            insertion_sort(sess, ch)?
        };
        groups.push(asc);
    }
    let medians: Vec<usize> = groups.iter().map(|g| g[(g.len() - 1) / 2]).collect();
    let group_of: HashMap<usize, usize> = medians.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    // Phase 2: pivot by recursion, then expand along the sorted groups.
    let km = medians.len() / 2 + 1;
    let sub = mom2_rec(sess, &medians, km, base)?;
    let p = sub.x;
    let mut tag: HashMap<usize, Tag> = elems.iter().map(|&e| (e, Tag::Open)).collect();
    tag.insert(p, Tag::P);
    let pg = &groups[group_of[&p]];
    let pp = pg.iter().position(|&e| e == p).expect("pivot in group");
    for &e in &pg[..pp] {
        tag.insert(e, Tag::S);
    }
    for &e in &pg[pp + 1..] {
        tag.insert(e, Tag::L);
    }
    for &m in &sub.s {
        let g = &groups[group_of[&m]];
        let pos = g.iter().position(|&e| e == m).expect("median in group");
        for &e in &g[..=pos] {
            tag.insert(e, Tag::S);
        }
    }
    for &m in &sub.l {
        let g = &groups[group_of[&m]];
        let pos = g.iter().position(|&e| e == m).expect("median in group");
        for &e in &g[pos..] {
            tag.insert(e, Tag::L);
        }
    }
    // Phase 3: everything else against the pivot.
    let mut open: Vec<usize> = elems.iter().copied().filter(|e| tag[e] == Tag::Open).collect();
    open.sort_unstable();
    for e in open {
        let t = if total_cmp(sess, e, p)? == Cmp::Le { Tag::S } else { Tag::L };
        tag.insert(e, t);
    }
    let mut s1: Vec<usize> = elems.iter().copied().filter(|e| tag[e] == Tag::S).collect();
    let mut l1: Vec<usize> = elems.iter().copied().filter(|e| tag[e] == Tag::L).collect();
    // Phase 4
    let nl = l1.len();
    if nl + 1 == k {
        Ok(Sel2 { x: p, s: s1, l: l1 })
    } else if nl >= k {
        let r = mom2_rec(sess, &l1, k, base)?;
        s1.push(p);
        s1.extend(r.s);
        Ok(Sel2 { x: r.x, s: s1, l: r.l })
    } else {
        let r = mom2_rec(sess, &s1, k - nl - 1, base)?;
        l1.push(p);
        l1.extend(r.l);
        Ok(Sel2 { x: r.x, s: r.s, l: l1 })
    }
}

/// MoM3 result: `x`, value-differing `pairs`, and `s`/`l` on either side of `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sel3 {
    pub x: usize,
    pub pairs: Vec<(usize, usize)>,
    pub s: Vec<usize>,
    pub l: Vec<usize>,
}

/// Greedy maximal matching of difference answers over `elems`, seeded with `seed`.
fn greedy_pairs<P: PairOracle>(
    sess: &PairSession<P>,
    elems: &[usize],
    seed: &[(usize, usize)],
) -> (Vec<(usize, usize)>, Vec<usize>) {
    let mut used: Vec<bool> = elems.iter().map(|e| seed.iter().any(|&(a, b)| a == *e || b == *e)).collect();
    let mut pairs = seed.to_vec();
    for i in 0..elems.len() {
        if used[i] {
            continue;
        }
        for j in i + 1..elems.len() {
            if !used[j] && sess.known(elems[i], elems[j]) == Some(Cmp::Ne) {
                used[i] = true;
                used[j] = true;
                pairs.push((elems[i], elems[j]));
                break;
            }
        }
    }
    let rest = elems.iter().zip(&used).filter(|(_, &u)| !u).map(|(&e, _)| e).collect();
    (pairs, rest)
}

/// Asks every pair of `elems` and splits them into a sorted part and difference pairs.
/// Returns the decreasing enumeration of the sorted part and the pairs.
pub fn allpairs_partition<P: PairOracle>(
    sess: &mut PairSession<P>,
    elems: &[usize],
) -> Result<(Vec<usize>, Vec<(usize, usize)>)> {
    for i in 0..elems.len() {
        for j in i + 1..elems.len() {
            sess.cmp(elems[i], elems[j])?;
        }
    }
    partition_known(sess, elems, &[])
}

fn partition_known<P: PairOracle>(
    sess: &PairSession<P>,
    elems: &[usize],
    seed: &[(usize, usize)],
) -> Result<(Vec<usize>, Vec<(usize, usize)>)> {
    let (pairs, rest) = greedy_pairs(sess, elems, seed);
    let g = RelationGraph::from_session(sess, &rest);
    let local: Vec<usize> = (0..rest.len()).collect();
    let order = sort_from_relations(&g, &local)?;
    Ok((order.into_iter().map(|i| rest[i]).collect(), pairs))
}

/// A k-th largest element after asking all pairs, given anchors of value 0 and 1.
pub fn allpairs_select_kth<P: PairOracle>(
    sess: &mut PairSession<P>,
    elems: &[usize],
    zero: usize,
    one: usize,
    k: usize,
) -> Result<usize> {
    check_elems(elems, k)?;
    if !elems.contains(&zero) || !elems.contains(&one) || zero == one {
        return domain("anchors must be two distinct members of the input");
    }
    let (desc, pairs) = allpairs_partition(sess, elems)?;
    let (n, r) = (elems.len(), pairs.len());
    Ok(if k <= r {
        one
    } else if k > n - r {
        zero
    } else {
        desc[k - r - 1]
    })
}

/// Result on the anchor-free part W for target rank kw.
#[derive(Debug)]
enum Part {
    /// x is a kw-th largest of W, pairs.len() + l.len() == kw - 1.
    Elem { x: usize, pairs: Vec<(usize, usize)>, s: Vec<usize>, l: Vec<usize> },
    /// At least kw pairs: a kw-th largest of W has value 1.
    One { pairs: Vec<(usize, usize)>, rest: Vec<usize> },
    /// At least |W| - kw + 1 pairs: a kw-th largest of W has value 0.
    Zero { pairs: Vec<(usize, usize)>, rest: Vec<usize> },
}

#[derive(Clone, Copy)]
struct Slot {
    e: usize,
    can_s: bool,
    can_l: bool,
}

fn slots(es: &[usize], can_s: bool, can_l: bool) -> impl Iterator<Item = Slot> + '_ {
    es.iter().map(move |&e| Slot { e, can_s, can_l })
}

/// Places every element beside `x` so that kept pairs plus |L| equals `target`.
/// Pairs may be split only when the value of `x` is known: both halves go to L when it is 0, to S when it is 1.
fn assemble(
    x: usize,
    xval: Option<u8>,
    items: Vec<Slot>,
    pairs: Vec<(usize, usize)>,
    target: usize,
) -> Result<Part> {
    let mut lo = 0usize;
    let mut flex = 0usize;
    for it in &items {
        match (it.can_s, it.can_l) {
            (false, false) => return contradiction(format!("element {} has no certified side", it.e)),
            (false, true) => lo += 1,
            (true, true) => flex += 1,
            (true, false) => {}
        }
    }
    let pair_lo = match xval {
        Some(1) => 0,
        _ => pairs.len(),
    };
    let pair_flex = if xval.is_some() { pairs.len() } else { 0 };
    lo += pair_lo;
    if target < lo || target > lo + flex + pair_flex {
        return contradiction(format!("rank {target} outside the certified range {lo}..={}", lo + flex + pair_flex));
    }
    let mut need = target - lo;
    let (mut s, mut l) = (Vec::new(), Vec::new());
    for it in items {
        if it.can_l && (!it.can_s || need > 0) {
            if it.can_s {
                need -= 1;
            }
            l.push(it.e);
        } else {
            s.push(it.e);
        }
    }
    let mut kept = Vec::new();
    for (a, b) in pairs {
        match xval {
            None => kept.push((a, b)),
            Some(0) => {
                if need > 0 {
                    need -= 1;
                    l.push(a);
                    l.push(b);
                } else {
                    kept.push((a, b));
                }
            }
            Some(_) => {
                if need > 0 {
                    need -= 1;
                    kept.push((a, b));
                } else {
                    s.push(a);
                    s.push(b);
                }
            }
        }
    }
    debug_assert_eq!(need, 0);
    Ok(Part::Elem { x, pairs: kept, s, l })
}

fn cat(parts: &[&[usize]]) -> Vec<usize> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn cat_pairs(a: &[(usize, usize)], b: &[(usize, usize)]) -> Vec<(usize, usize)> {
    a.iter().chain(b).copied().collect()
}

fn flatten(pairs: &[(usize, usize)]) -> Vec<usize> {
    pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
}

struct Mom3<'s, P: PairOracle> {
    sess: &'s mut PairSession<P>,
    base: usize,
}

struct Group {
    elems: Vec<usize>,
    /// ascending sorted part
    asc: Vec<usize>,
    pairs: Vec<(usize, usize)>,
}

impl<P: PairOracle> Mom3<'_, P> {
    fn base_case(&mut self, w: &[usize], kw: usize) -> Result<Part> {
        let mut chain: Vec<usize> = Vec::with_capacity(w.len());
        let mut pairs = Vec::new();
        'next: for &e in w {
            let (mut lo, mut hi) = (0, chain.len());
            while lo < hi {
                let mid = (lo + hi) / 2;
                match self.sess.cmp(e, chain[mid])? {
                    Cmp::Le => hi = mid,
                    Cmp::Ge => lo = mid + 1,
                    Cmp::Ne => {
                        let o = chain.remove(mid);
                        pairs.push((e, o));
                        continue 'next;
                    }
                }
            }
            chain.insert(lo, e);
        }
        chain.reverse();
        Ok(finish_sorted(chain, pairs, kw))
    }

    /// Rank `kw` inside `pairs ∪ rest`, recursing on `rest`.
    fn with_pairs(&mut self, pairs: Vec<(usize, usize)>, rest: Vec<usize>, kw: usize) -> Result<Part> {
        let r = pairs.len();
        let total = rest.len() + 2 * r;
        if kw <= r {
            return Ok(Part::One { pairs, rest });
        }
        if kw + r > total {
            return Ok(Part::Zero { pairs, rest });
        }
        Ok(match self.rec(&rest, kw - r)? {
            Part::Elem { x, pairs: p2, s, l } => Part::Elem { x, pairs: cat_pairs(&pairs, &p2), s, l },
            Part::One { pairs: p2, rest } => Part::One { pairs: cat_pairs(&pairs, &p2), rest },
            Part::Zero { pairs: p2, rest } => Part::Zero { pairs: cat_pairs(&pairs, &p2), rest },
        })
    }

    fn rec(&mut self, w: &[usize], kw: usize) -> Result<Part> {
        if kw == 0 || kw > w.len() {
            return contradiction(format!("rank {kw} out of range for {} elements", w.len()));
        }
        if w.len() <= self.base {
            return self.base_case(w, kw);
        }
        // Phase 1: all pairs inside groups of five.
        let mut groups: Vec<Group> = Vec::new();
        let full = w.len() / 5 * 5;
        for ch in w[..full].chunks(5) {
            for i in 0..5 {
                for j in i + 1..5 {
                    self.sess.cmp(ch[i], ch[j])?;
                }
            }
            let (desc, pairs) = partition_known(self.sess, ch, &[])?;
            let asc: Vec<usize> = desc.into_iter().rev().collect();
            groups.push(Group { elems: ch.to_vec(), asc, pairs });
        }
        let medians: Vec<usize> = groups.iter().map(|g| g.asc[g.asc.len() / 2]).collect();
        let group_of: HashMap<usize, usize> = medians.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let mut tag: HashMap<usize, Tag> = w.iter().map(|&e| (e, Tag::Open)).collect();
        let mut rprime: Vec<(usize, usize)> = Vec::new();
        let mut replaced = vec![false; groups.len()];

        // Phase 2: pivot among the medians.
        let km = medians.len() / 2 + 1;
        let (pivot, r1) = match self.rec(&medians, km)? {
            Part::Elem { x, pairs, s, l } => {
                tag.insert(x, Tag::P);
                let pg = &groups[group_of[&x]];
                let pos = pg.asc.iter().position(|&e| e == x).expect("pivot in group");
                for &e in &pg.asc[..pos] {
                    tag.insert(e, Tag::S);
                }
                for &e in &pg.asc[pos + 1..] {
                    tag.insert(e, Tag::L);
                }
                for &m in &s {
                    let g = &groups[group_of[&m]];
                    let pos = g.asc.iter().position(|&e| e == m).expect("median in group");
                    for &e in &g.asc[..=pos] {
                        tag.insert(e, Tag::S);
                    }
                }
                for &m in &l {
                    let g = &groups[group_of[&m]];
                    let pos = g.asc.iter().position(|&e| e == m).expect("median in group");
                    for &e in &g.asc[pos..] {
                        tag.insert(e, Tag::L);
                    }
                }
                (Some(x), pairs)
            }
            Part::Zero { pairs, .. } => (None, pairs),
            Part::One { .. } => return contradiction("more difference pairs than medians allow"),
        };

        // Phase 3: cross queries between paired medians' groups.
        for &(a, b) in &r1 {
            let (ga, gb) = (group_of[&a], group_of[&b]);
            replaced[ga] = true;
            replaced[gb] = true;
            for &c in &groups[ga].elems {
                for &d in &groups[gb].elems {
                    self.sess.cmp(c, d)?;
                }
            }
            let both = cat(&[&groups[ga].elems, &groups[gb].elems]);
            let (desc, mut pab) = partition_known(self.sess, &both, &[(a, b)])?;
            let asc: Vec<usize> = desc.into_iter().rev().collect();
            match pab.len() {
                1 => {
                    let m = asc.len();
                    if m < 4 {
                        return contradiction("too few sorted elements beside a median pair");
                    }
                    pab.push((asc[0], asc[m - 1]));
                    pab.push((asc[1], asc[m - 2]));
                }
                2 => {
                    let m = asc.len();
                    if m < 2 {
                        return contradiction("too few sorted elements beside a median pair");
                    }
                    pab.push((asc[0], asc[m - 1]));
                }
                _ => {}
            }
            for &(c, d) in &pab {
                tag.insert(c, Tag::R);
                tag.insert(d, Tag::R);
            }
            rprime.extend(pab);
        }
        for (g, grp) in groups.iter().enumerate() {
            if !replaced[g] {
                for &(c, d) in &grp.pairs {
                    tag.insert(c, Tag::R);
                    tag.insert(d, Tag::R);
                }
                rprime.extend(grp.pairs.iter().copied());
            }
        }

        let Some(p) = pivot else {
            let mut rest: Vec<usize> = w.iter().copied().filter(|e| tag[e] != Tag::R).collect();
            rest.sort_unstable();
            return self.with_pairs(rprime, rest, kw);
        };

        // Phase 4: open elements against the pivot.
        let mut z: Vec<usize> = w.iter().copied().filter(|e| tag[e] == Tag::Open).collect();
        z.sort_unstable();
        let mut t_list = Vec::new();
        for e in z {
            match self.sess.cmp(e, p)? {
                Cmp::Le => {
                    tag.insert(e, Tag::S);
                }
                Cmp::Ge => {
                    tag.insert(e, Tag::L);
                }
                Cmp::Ne => {
                    tag.insert(e, Tag::T);
                    t_list.push(e);
                }
            }
        }

        // Phase 5: scan S' ∪ L' against T.
        let mut sl: Vec<usize> = w.iter().copied().filter(|e| matches!(tag[e], Tag::S | Tag::L)).collect();
        sl.sort_unstable();
        let (mut ti, mut low_t, mut high_t) = (0usize, false, false);
        for e in sl {
            if ti == t_list.len() {
                break;
            }
            let t = t_list[ti];
            let side = tag[&e];
            match self.sess.cmp(e, t)? {
                Cmp::Ne => {
                    tag.insert(e, Tag::R);
                    tag.insert(t, Tag::R);
                    rprime.push((e, t));
                    ti += 1;
                }
                Cmp::Ge if side == Tag::S => low_t = true,
                Cmp::Le if side == Tag::L => high_t = true,
                _ => {}
            }
        }
        let t_rem: Vec<usize> = t_list[ti..].to_vec();
        let sp: Vec<usize> = sorted_tagged(w, &tag, Tag::S);
        let lp: Vec<usize> = sorted_tagged(w, &tag, Tag::L);
        let r = rprime.len();
        let nw = w.len();
        if r >= kw {
            return Ok(Part::One { pairs: rprime, rest: cat(&[&[p], &sp, &lp, &t_rem]) });
        }
        if r + kw > nw {
            return Ok(Part::Zero { pairs: rprime, rest: cat(&[&[p], &sp, &lp, &t_rem]) });
        }
        let (ns, nl, nt) = (sp.len(), lp.len(), t_rem.len());
        let pv = [p];

        if t_rem.is_empty() {
            // Case 1
            let kp = kw - r;
            if kp <= nl {
                return Ok(match self.rec(&lp, kp)? {
                    Part::Elem { x, pairs, s, l } => {
                        Part::Elem { x, pairs: cat_pairs(&rprime, &pairs), s: cat(&[&sp, &[p], &s]), l }
                    }
                    Part::One { pairs, rest } => {
                        Part::One { pairs: cat_pairs(&rprime, &pairs), rest: cat(&[&rest, &sp, &[p]]) }
                    }
                    Part::Zero { pairs, rest } => assemble(
                        p,
                        Some(0),
                        slots(&sp, true, true).chain(slots(&rest, false, true)).collect(),
                        cat_pairs(&rprime, &pairs),
                        kw - 1,
                    )?,
                });
            }
            if kp == nl + 1 {
                return Ok(Part::Elem { x: p, pairs: rprime, s: sp, l: lp });
            }
            return Ok(match self.rec(&sp, kp - nl - 1)? {
                Part::Elem { x, pairs, s, l } => {
                    Part::Elem { x, pairs: cat_pairs(&rprime, &pairs), s, l: cat(&[&lp, &[p], &l]) }
                }
                Part::Zero { pairs, rest } => {
                    Part::Zero { pairs: cat_pairs(&rprime, &pairs), rest: cat(&[&rest, &lp, &[p]]) }
                }
                Part::One { pairs, rest } => assemble(
                    p,
                    Some(1),
                    slots(&lp, true, true).chain(slots(&rest, true, false)).collect(),
                    cat_pairs(&rprime, &pairs),
                    kw - 1,
                )?,
            });
        }
        if low_t && high_t {
            return contradiction("pivot certified both 0 and 1");
        }
        let t0 = t_rem[0];
        let t_others = &t_rem[1..];
        if low_t {
            // Case 2: pivot 1, T all 0, L' all 1.
            if kw <= r + nl + 1 {
                let items = slots(&lp, true, true).chain(slots(&sp, true, false)).chain(slots(&t_rem, true, false));
                return assemble(p, Some(1), items.collect(), rprime, kw - 1);
            }
            if kw + r + nt > nw {
                let items = slots(t_others, true, true)
                    .chain(slots(&sp, false, true))
                    .chain(slots(&lp, false, true))
                    .chain(slots(&pv, false, true));
                return assemble(t0, Some(0), items.collect(), rprime, kw - 1);
            }
            let kpp = kw - (r + nl + 1);
            return Ok(match self.rec(&sp, kpp)? {
                Part::Elem { x, pairs, s, l } => Part::Elem {
                    x,
                    pairs: cat_pairs(&rprime, &pairs),
                    s: cat(&[&s, &t_rem]),
                    l: cat(&[&l, &lp, &[p]]),
                },
                Part::One { pairs, rest } => {
                    let items =
                        slots(&lp, true, true).chain(slots(&rest, true, false)).chain(slots(&t_rem, true, false));
                    assemble(p, Some(1), items.collect(), cat_pairs(&rprime, &pairs), kw - 1)?
                }
                Part::Zero { pairs, rest } => {
                    let items = slots(t_others, true, true)
                        .chain(slots(&rest, false, true))
                        .chain(slots(&lp, false, true))
                        .chain(slots(&pv, false, true));
                    assemble(t0, Some(0), items.collect(), cat_pairs(&rprime, &pairs), kw - 1)?
                }
            });
        }
        if high_t {
            // Case 3: pivot 0, T all 1, S' all 0.
            if kw + r + ns + 1 > nw {
                let items = slots(&sp, true, true).chain(slots(&lp, false, true)).chain(slots(&t_rem, false, true));
                return assemble(p, Some(0), items.collect(), rprime, kw - 1);
            }
            if kw <= r + nt {
                let items = slots(t_others, true, true)
                    .chain(slots(&sp, true, false))
                    .chain(slots(&lp, true, false))
                    .chain(slots(&pv, true, false));
                return assemble(t0, Some(1), items.collect(), rprime, kw - 1);
            }
            let kpp = kw - (r + nt);
            return Ok(match self.rec(&lp, kpp)? {
                Part::Elem { x, pairs, s, l } => Part::Elem {
                    x,
                    pairs: cat_pairs(&rprime, &pairs),
                    s: cat(&[&s, &sp, &[p]]),
                    l: cat(&[&l, &t_rem]),
                },
                Part::One { pairs, rest } => {
                    let items = slots(t_others, true, true)
                        .chain(slots(&rest, true, false))
                        .chain(slots(&sp, true, false))
                        .chain(slots(&pv, true, false));
                    assemble(t0, Some(1), items.collect(), cat_pairs(&rprime, &pairs), kw - 1)?
                }
                Part::Zero { pairs, rest } => {
                    let items =
                        slots(&sp, true, true).chain(slots(&rest, false, true)).chain(slots(&t_rem, false, true));
                    assemble(p, Some(0), items.collect(), cat_pairs(&rprime, &pairs), kw - 1)?
                }
            });
        }
        // Case 4: S' all 0, L' all 1; pair the pivot with one element of T.
        rprime.push((t0, p));
        let r = rprime.len();
        if kw <= r {
            return Ok(Part::One { pairs: rprime, rest: cat(&[&sp, &lp, t_others]) });
        }
        if kw + r > nw {
            return Ok(Part::Zero { pairs: rprime, rest: cat(&[&sp, &lp, t_others]) });
        }
        if kw <= r + nl {
            let items =
                slots(&lp[1..], true, true).chain(slots(&sp, true, false)).chain(slots(t_others, true, false));
            return assemble(lp[0], Some(1), items.collect(), rprime, kw - 1);
        }
        if kw + r + ns > nw {
            let items =
                slots(&sp[1..], true, true).chain(slots(&lp, false, true)).chain(slots(t_others, false, true));
            return assemble(sp[0], Some(0), items.collect(), rprime, kw - 1);
        }
        if t_others.is_empty() {
            return contradiction("no element left for the middle rank");
        }
        let items =
            slots(&t_others[1..], true, true).chain(slots(&sp, true, false)).chain(slots(&lp, false, true));
        assemble(t_others[0], None, items.collect(), rprime, kw - 1)
    }
}

fn sorted_tagged(w: &[usize], tag: &HashMap<usize, Tag>, t: Tag) -> Vec<usize> {
    let mut v: Vec<usize> = w.iter().copied().filter(|e| tag[e] == t).collect();
    v.sort_unstable();
    v
}

/// `desc` is a decreasing enumeration of the unpaired part.
fn finish_sorted(desc: Vec<usize>, pairs: Vec<(usize, usize)>, kw: usize) -> Part {
    let r = pairs.len();
    let total = desc.len() + 2 * r;
    if kw <= r {
        Part::One { pairs, rest: desc }
    } else if kw + r > total {
        Part::Zero { pairs, rest: desc }
    } else {
        let i = kw - r - 1;
        Part::Elem { x: desc[i], pairs, l: desc[..i].to_vec(), s: desc[i + 1..].to_vec() }
    }
}

/// k-th largest of a 0/1 multiset containing anchors `zero` (value 0) and `one` (value 1).
pub fn mom3_select<P: PairOracle>(
    sess: &mut PairSession<P>,
    elems: &[usize],
    zero: usize,
    one: usize,
    k: usize,
    cfg: SelectConfig,
) -> Result<Sel3> {
    check_elems(elems, k)?;
    let cfg = cfg.checked()?;
    if zero == one || !elems.contains(&zero) || !elems.contains(&one) {
        return domain("anchors must be two distinct members of the input");
    }
    let n = elems.len();
    let w: Vec<usize> = elems.iter().copied().filter(|&e| e != zero && e != one).collect();
    if k == 1 {
        return Ok(Sel3 { x: one, pairs: vec![], s: cat(&[&w, &[zero]]), l: vec![] });
    }
    if k == n {
        return Ok(Sel3 { x: zero, pairs: vec![], s: vec![], l: cat(&[&w, &[one]]) });
    }
    let mut m = Mom3 { sess, base: cfg.base };
    Ok(match m.rec(&w, k - 1)? {
        Part::Elem { x, pairs, mut s, mut l } => {
            s.push(zero);
            l.push(one);
            Sel3 { x, pairs, s, l }
        }
        Part::One { pairs, mut rest } => {
            rest.push(zero);
            Sel3 { x: one, pairs, s: rest, l: vec![] }
        }
        Part::Zero { pairs, mut rest } => {
            rest.push(one);
            Sel3 { x: zero, pairs, s: vec![], l: rest }
        }
    })
}

fn kth_largest<T: Ord + Copy>(vals: &[T], k: usize) -> T {
    let mut v = vals.to_vec();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v[k - 1]
}

fn same_members(elems: &[usize], got: Vec<usize>) -> std::result::Result<(), String> {
    let mut a = elems.to_vec();
    let mut b = got;
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(format!("output is not a partition of the input: {b:?} vs {a:?}"));
    }
    Ok(())
}

/// Verifies a MoM2 certificate against the hidden values.
pub fn check_sel2(values: &[i64], elems: &[usize], k: usize, out: &Sel2) -> std::result::Result<(), String> {
    same_members(elems, cat(&[&[out.x], &out.s, &out.l]))?;
    let n = elems.len();
    if out.l.len() != k - 1 || out.s.len() != n - k {
        return Err(format!("|L|={} |S|={} for n={n}, k={k}", out.l.len(), out.s.len()));
    }
    let vx = values[out.x];
    if out.l.iter().any(|&e| values[e] < vx) || out.s.iter().any(|&e| values[e] > vx) {
        return Err("an element is on the wrong side of x".into());
    }
    let vals: Vec<i64> = elems.iter().map(|&e| values[e]).collect();
    if kth_largest(&vals, k) != vx {
        return Err(format!("x has value {vx}, not the {k}-th largest"));
    }
    Ok(())
}

/// Verifies the full MoM3 output contract against the hidden values.
pub fn check_sel3(
    values: &[u8],
    elems: &[usize],
    zero: usize,
    one: usize,
    k: usize,
    out: &Sel3,
) -> std::result::Result<(), String> {
    same_members(elems, cat(&[&[out.x], &flatten(&out.pairs), &out.s, &out.l]))?;
    let n = elems.len();
    let r = out.pairs.len();
    if out.pairs.iter().any(|&(a, b)| values[a] == values[b]) {
        return Err("a pair has equal values".into());
    }
    let vx = values[out.x];
    if out.l.iter().any(|&e| values[e] < vx) || out.s.iter().any(|&e| values[e] > vx) {
        return Err("an element is on the wrong side of x".into());
    }
    let vals: Vec<u8> = elems.iter().map(|&e| values[e]).collect();
    if kth_largest(&vals, k) != vx {
        return Err(format!("x has value {vx}, not the {k}-th largest"));
    }
    if r <= (n - k).min(k - 1) {
        if r + out.l.len() != k - 1 {
            return Err(format!("r + |L| = {} but k - 1 = {}", r + out.l.len(), k - 1));
        }
    } else if r > k - 1 {
        if out.x != one || !out.l.is_empty() {
            return Err("too many pairs but the output is not (1, R, rest, {})".into());
        }
    } else if out.x != zero || !out.s.is_empty() {
        return Err("too many pairs but the output is not (0, R, {}, rest)".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explore::{explore, First, Last, RandomChooser};

    #[test]
    fn sort_with_cycle() {
        let mut g = RelationGraph::new(3);
        g.add(0, 1, Cmp::Le);
        g.add(1, 0, Cmp::Le);
        g.add(1, 2, Cmp::Le);
        g.add(0, 2, Cmp::Le);
        let order = sort_from_relations(&g, &[0, 1, 2]).unwrap();
        assert_eq!(order[0], 2);
    }

    #[test]
    fn sort_single_and_missing() {
        let g = RelationGraph::new(1);
        assert_eq!(sort_from_relations(&g, &[0]).unwrap(), vec![0]);
        let g = RelationGraph::new(2);
        assert!(sort_from_relations(&g, &[0, 1]).is_err());
    }

    #[test]
    fn sort5_all_permutations_exact() {
        let mut perm = [0i64, 1, 2, 3, 4];
        let mut count = 0;
        loop {
            let mut sess = PairSession::new(TotalOracle::new(perm.to_vec(), First));
            let d = sort5(&mut sess, [0, 1, 2, 3, 4]).unwrap();
            let vals: Vec<i64> = d.iter().map(|&i| perm[i]).collect();
            assert_eq!(vals, vec![4, 3, 2, 1, 0]);
            assert!(sess.distinct() <= 7);
            count += 1;
            if !next_perm(&mut perm) {
                break;
            }
        }
        assert_eq!(count, 120);
    }

    fn next_perm(a: &mut [i64]) -> bool {
        let n = a.len();
        let Some(i) = (0..n - 1).rev().find(|&i| a[i] < a[i + 1]) else { return false };
        let j = (i + 1..n).rev().find(|&j| a[j] > a[i]).unwrap();
        a.swap(i, j);
        a[i + 1..].reverse();
        true
    }

    #[test]
    fn mom2_small_examples() {
        let mut sess = PairSession::new(TotalOracle::new(vec![5], First));
        let out = mom2_select(&mut sess, &[0], 1, SelectConfig::MOM2_DEFAULT).unwrap();
        assert_eq!(out, Sel2 { x: 0, s: vec![], l: vec![] });
        assert_eq!(sess.distinct(), 0);
        let vals = vec![0, 0, 1];
        let mut sess = PairSession::new(TotalOracle::new(vals.clone(), Last));
        let out = mom2_select(&mut sess, &[0, 1, 2], 2, SelectConfig::MOM2_DEFAULT).unwrap();
        assert_eq!(vals[out.x], 0);
        assert_eq!((out.l.len(), out.s.len()), (1, 1));
        assert!(mom2_select(&mut sess, &[0, 1, 2], 4, SelectConfig::MOM2_DEFAULT).is_err());
    }

    #[test]
    fn mom2_exhaustive_small_base() {
        let cfg = SelectConfig { base: 4 };
        for n in 1..=6usize {
            for code in 0..3usize.pow(n as u32) {
                let vals: Vec<i64> = (0..n).map(|i| (code / 3usize.pow(i as u32) % 3) as i64).collect();
                let elems: Vec<usize> = (0..n).collect();
                for k in 1..=n {
                    explore(1 << 20, |ex| {
                        let mut sess = PairSession::new(TotalOracle::new(vals.clone(), ex));
                        let out = mom2_select(&mut sess, &elems, k, cfg)?;
                        check_sel2(&vals, &elems, k, &out).map_err(Error::Contradiction)?;
                        assert!(sess.distinct() <= 18 * n + 7);
                        Ok(())
                    })
                    .unwrap();
                }
            }
        }
    }

    #[test]
    fn mom3_tiny() {
        let vals = vec![0u8, 1];
        let mut sess = PairSession::new(BinaryOracle::new(vals.clone(), First).unwrap());
        let out = mom3_select(&mut sess, &[0, 1], 0, 1, 1, SelectConfig::MOM3_DEFAULT).unwrap();
        assert_eq!(out, Sel3 { x: 1, pairs: vec![], s: vec![0], l: vec![] });
    }

    #[test]
    fn mom3_exhaustive_small_base() {
        let cfg = SelectConfig { base: 4 };
        for n in 2..=8usize {
            for code in 0..1u32 << (n - 2) {
                let mut vals = vec![0u8, 1];
                vals.extend((0..n - 2).map(|i| (code >> i & 1) as u8));
                let elems: Vec<usize> = (0..n).collect();
                for k in 1..=n {
                    explore(1 << 22, |ex| {
                        let mut sess = PairSession::new(BinaryOracle::new(vals.clone(), ex)?);
                        let out = mom3_select(&mut sess, &elems, 0, 1, k, cfg)?;
                        check_sel3(&vals, &elems, 0, 1, k, &out)
                            .map_err(|e| Error::Contradiction(format!("{vals:?} k={k}: {e}")))?;
                        Ok(())
                    })
                    .unwrap();
                }
            }
        }
    }

    #[test]
    fn mom3_random_larger() {
        for seed in 0..40u64 {
            let n = 20 + (seed as usize * 7) % 120;
            let mut rc = RandomChooser::new(seed);
            let mut vals = vec![0u8, 1];
            vals.extend((0..n - 2).map(|_| rc.choose(2) as u8));
            let elems: Vec<usize> = (0..n).collect();
            for k in [1, 2, n / 3, n / 2 + 1, n - 1, n] {
                for base in [4, 8] {
                    let mut sess = PairSession::new(BinaryOracle::new(vals.clone(), RandomChooser::new(seed + 99)).unwrap());
                    let out = mom3_select(&mut sess, &elems, 0, 1, k, SelectConfig { base }).unwrap();
                    check_sel3(&vals, &elems, 0, 1, k, &out).unwrap();
                }
            }
        }
    }

    #[test]
    fn allpairs_odd_gives_median() {
        for code in 0..1u32 << 3 {
            let mut vals = vec![0u8, 1];
            vals.extend((0..3).map(|i| (code >> i & 1) as u8));
            let elems: Vec<usize> = (0..5).collect();
            explore(1 << 22, |ex| {
                let mut sess = PairSession::new(BinaryOracle::new(vals.clone(), ex)?);
                let x = allpairs_select_kth(&mut sess, &elems, 0, 1, 3)?;
                let mut s = vals.clone();
                s.sort_unstable_by(|a, b| b.cmp(a));
                assert_eq!(vals[x], s[2]);
                Ok(())
            })
            .unwrap();
        }
    }
}
