//! Ball-query strategies: 2DB, the triple gadget, the linear q=3 pipeline, odd and even query sizes, alpha reduction.

use crate::error::{contradiction, domain, Error, Result};
use crate::model::{subsets, Answer, AnswerModel, Query};
use crate::oracle::{legal_set, BallOracle, Session};
use crate::selection::{mom3_select, Cmp, PairOracle, PairSession, SelectConfig};

fn ball_answer<O: BallOracle>(sess: &mut Session<O>, balls: &[usize]) -> Result<usize> {
    match sess.ask(balls)? {
        Answer::Ball(b) => Ok(b),
        a => contradiction(format!("expected a ball answer to {balls:?}, got {a:?}")),
    }
}

/// Sliding-window elimination: ask a window, set the answer aside, slide in the next ball.
/// Returns the balls set aside and the final window.
fn eliminate<O: BallOracle>(sess: &mut Session<O>, balls: &[usize], width: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut window = balls[..width].to_vec();
    let mut removed = Vec::with_capacity(balls.len());
    let mut next = width;
    loop {
        let b = ball_answer(sess, &window)?;
        window.retain(|&x| x != b);
        removed.push(b);
        if next == balls.len() {
            return Ok((removed, window));
        }
        window.push(balls[next]);
        next += 1;
    }
}

/// Two balls of different colors unless `set` is monochromatic, with exactly |set|-2 triple queries.
pub fn two_different_balls<O: BallOracle>(sess: &mut Session<O>, set: &[usize]) -> Result<(usize, usize)> {
    if sess.q() != 3 {
        return domain("two_different_balls needs triple queries");
    }
    if set.len() < 3 {
        return domain(format!("need at least 3 balls, got {}", set.len()));
    }
    let (_, rest) = eliminate(sess, set, 3)?;
    Ok((rest[0], rest[1]))
}

/// Relation between `a` and `b` from the queries {zero,a,b} and {one,a,b}, reading colors as values.
pub fn triple_gadget<O: BallOracle>(sess: &mut Session<O>, zero: usize, one: usize, a: usize, b: usize) -> Result<Cmp> {
    let distinct = [zero, one, a, b];
    if (0..4).any(|i| (i + 1..4).any(|j| distinct[i] == distinct[j])) {
        return domain("gadget needs four distinct balls");
    }
    let a0 = ball_answer(sess, &[zero, a, b])?;
    if a0 == a {
        return Ok(Cmp::Le);
    }
    if a0 == b {
        return Ok(Cmp::Ge);
    }
    let a1 = ball_answer(sess, &[one, a, b])?;
    Ok(if a1 == one {
        Cmp::Ne
    } else if a1 == a {
        Cmp::Ge
    } else {
        Cmp::Le
    })
}

/// Pair comparisons simulated by triple queries against two anchors.
pub struct GadgetOracle<'s, O: BallOracle> {
    sess: &'s mut Session<O>,
    zero: usize,
    one: usize,
}

impl<'s, O: BallOracle> GadgetOracle<'s, O> {
    pub fn new(sess: &'s mut Session<O>, zero: usize, one: usize) -> Self {
        GadgetOracle { sess, zero, one }
    }
}

impl<O: BallOracle> PairOracle for GadgetOracle<'_, O> {
    fn compare(&mut self, a: usize, b: usize) -> Result<Cmp> {
        triple_gadget(self.sess, self.zero, self.one, a, b)
    }
}

/// A non-minority ball with O(n) triple queries: 2DB, then MoM3 for the median through the gadget.
pub fn find_nonminority_adaptive_3<O: BallOracle>(sess: &mut Session<O>, cfg: SelectConfig) -> Result<usize> {
    if sess.q() != 3 {
        return domain("the q=3 pipeline needs triple queries");
    }
    let n = sess.n();
    if n == 0 {
        return domain("no balls");
    }
    if n < 3 {
        return Ok(0);
    }
    let all: Vec<usize> = (0..n).collect();
    let (a, b) = two_different_balls(sess, &all)?;
    let k = n / 2 + 1;
    let mut ps = PairSession::new(GadgetOracle::new(sess, a, b));
    match mom3_select(&mut ps, &all, a, b, k, cfg) {
        Ok(out) => Ok(out.x),
        // Only a monochromatic coloring can produce inconsistent relations; then every ball qualifies.
        Err(Error::Contradiction(_)) => Ok(a),
        Err(e) => Err(e),
    }
}

/// A ball that is non-minority under every coloring legal for `entries`, if one exists.
pub fn deduce_from_all_queries(n: usize, entries: &[(Query, Answer)], model: AnswerModel) -> Result<Option<usize>> {
    let legal = legal_set(n, entries, model)?;
    if legal.is_empty() {
        return contradiction("no coloring is consistent with the answers");
    }
    Ok(legal.deduced_ball())
}

/// Asks every q-subset of `balls` and deduces a ball non-minority among them.
fn solve_by_all_queries<O: BallOracle>(sess: &mut Session<O>, balls: &[usize]) -> Result<usize> {
    let q = sess.q();
    let model = sess.oracle().model();
    let mut local = Vec::new();
    for sub in subsets(balls.len(), q) {
        let real: Vec<usize> = sub.iter().map(|&i| balls[i]).collect();
        let a = sess.ask(&real)?;
        let la = match a {
            Answer::Ball(b) => Answer::Ball(balls.iter().position(|&x| x == b).expect("answer in query")),
            other => other,
        };
        local.push((Query::new(sub)?, la));
    }
    match deduce_from_all_queries(balls.len(), &local, model)? {
        Some(i) => Ok(balls[i]),
        None => contradiction(format!("all queries on {} balls leave no certain ball", balls.len())),
    }
}

/// A non-minority ball for query size q = 2l+1 by repeated window elimination.
pub fn find_nonminority_adaptive_odd<O: BallOracle>(sess: &mut Session<O>, l: usize, cfg: SelectConfig) -> Result<usize> {
    let q = 2 * l + 1;
    if l == 0 || sess.q() != q {
        return domain(format!("query size {} does not match l={l}", sess.q()));
    }
    let n = sess.n();
    if n < q {
        return domain(format!("need n >= {q}, got {n}"));
    }
    if l == 1 {
        return find_nonminority_adaptive_3(sess, cfg);
    }
    let mut balls: Vec<usize> = (0..n).collect();
    loop {
        if balls.len() % 2 == 0 {
            balls.pop();
        }
        if balls.len() == q {
            return ball_answer(sess, &balls);
        }
        if balls.len() <= 4 * l {
            return solve_by_all_queries(sess, &balls);
        }
        let (mut removed, _) = eliminate(sess, &balls, q)?;
        removed.sort_unstable();
        balls = removed;
    }
}

/// A non-minority ball for query size q = 2l with at most n-2l+1 queries.
pub fn find_nonminority_adaptive_even<O: BallOracle>(sess: &mut Session<O>, l: usize) -> Result<usize> {
    let q = 2 * l;
    if l < 2 || sess.q() != q {
        return domain(format!("query size {} does not match l={l} (need l >= 2)", sess.q()));
    }
    if !sess.oracle().model().allows_no_majority() {
        return Err(Error::Config("even strategy needs the majority model with no-majority answers".into()));
    }
    let n = sess.n();
    if n <= q {
        return domain(format!("need n > {q}, got {n}"));
    }
    let mut cur: Vec<usize> = (0..q).collect();
    let mut next = q;
    let mut removed = Vec::new();
    let mut last = None;
    loop {
        match sess.ask(&cur)? {
            Answer::Ball(b) => {
                removed.push(b);
                if next == n {
                    return Ok(removed[0]);
                }
                cur.retain(|&x| x != b);
                cur.push(next);
                last = Some(next);
                next += 1;
            }
            Answer::NoMajority => break,
            a => return contradiction(format!("unexpected answer {a:?}")),
        }
    }
    // cur is balanced; every removed ball differs from the last ball added.
    let a = last.unwrap_or(cur[q - 1]);
    let base: Vec<usize> = cur.iter().copied().filter(|&x| x != a).collect();
    let (mut same, mut diff) = (l, l + removed.len());
    let mut first_diff = removed.first().copied();
    for c in next..n {
        let mut qv = base.clone();
        qv.push(c);
        match sess.ask(&qv)? {
            Answer::NoMajority => same += 1,
            _ => {
                diff += 1;
                first_diff.get_or_insert(c);
            }
        }
    }
    if same >= diff {
        Ok(a)
    } else {
        first_diff.ok_or_else(|| Error::Contradiction("no ball of the larger color".into()))
    }
}

fn interval(n: usize, q: usize, j: usize) -> Vec<usize> {
    (0..q).map(|t| (j + t) % n).collect()
}

/// Cyclic interval queries plus, for each interval, its first ball swapped for every outside ball.
pub fn even_design(n: usize, l: usize) -> Result<Vec<Query>> {
    let q = 2 * l;
    if l < 1 || n <= q {
        return domain(format!("even design needs n > 2l, got n={n}, l={l}"));
    }
    let mut out = std::collections::BTreeSet::new();
    for j in 0..n {
        let iv = interval(n, q, j);
        out.insert(Query::new(iv.clone())?);
        for i in (0..n).filter(|i| !iv.contains(i)) {
            let mut v: Vec<usize> = iv[1..].to_vec();
            v.push(i);
            out.insert(Query::new(v)?);
        }
    }
    Ok(out.into_iter().collect())
}

/// Decodes answers to `even_design(n, l)` into a non-minority ball.
pub fn nonadaptive_even_decode(n: usize, l: usize, answers: &[(Query, Answer)]) -> Result<usize> {
    let q = 2 * l;
    if l < 1 || n <= q {
        return domain(format!("even design needs n > 2l, got n={n}, l={l}"));
    }
    let table: std::collections::HashMap<&Query, Answer> = answers.iter().map(|(q, a)| (q, *a)).collect();
    let look = |v: Vec<usize>| -> Result<Answer> {
        let qu = Query::new(v)?;
        table.get(&qu).copied().ok_or_else(|| Error::Input(format!("missing answer for {:?}", qu.balls())))
    };
    let mut first_ball = None;
    let mut tied = None;
    for j in 0..n {
        match look(interval(n, q, j))? {
            Answer::Ball(b) => {
                first_ball.get_or_insert(b);
            }
            Answer::NoMajority => {
                tied = Some(j);
                break;
            }
            a => return Err(Error::Input(format!("unexpected answer {a:?}"))),
        }
    }
    let Some(j) = tied else {
        return first_ball.ok_or_else(|| Error::Input("no interval answers".into()));
    };
    let iv = interval(n, q, j);
    let a = iv[0];
    let (mut same, mut diff) = (l, l);
    let mut first_diff = None;
    for i in (0..n).filter(|i| !iv.contains(i)) {
        let mut v = iv[1..].to_vec();
        v.push(i);
        match look(v)? {
            Answer::NoMajority => same += 1,
            Answer::Ball(_) => {
                diff += 1;
                first_diff.get_or_insert(i);
            }
            a => return Err(Error::Input(format!("unexpected answer {a:?}"))),
        }
    }
    if same >= diff {
        Ok(a)
    } else {
        first_diff.ok_or_else(|| Error::Contradiction("no ball of the larger color".into()))
    }
}

/// Frozen linear constant for the q=3 pipeline: at most `A3_LINEAR_K * n` queries.
pub const A3_LINEAR_K: usize = 12;

/// Frozen quadratic constant for the odd strategy at l=2, as a fraction: count <= num/den * n^2.
pub const ODD_L2_QUADRATIC: (usize, usize) = (1, 2);

/// Frozen additive slack for `alpha_reduce`: the returned ball has at least ceil((n-1)/A) - ALPHA_SLACK same-colored others.
pub const ALPHA_SLACK: usize = 3;

/// Frozen query bound for `alpha_reduce`.
pub fn alpha_query_bound(n: usize, a: usize) -> usize {
    n * n / (2 * a) + n
}

/// Size at or below which `alpha_reduce` stops and returns its lowest survivor.
pub fn alpha_floor(a: usize) -> usize {
    (a + 1).max(3 * a)
}

/// Repeated elimination with (A+1)-queries; returns an almost 1/A-ball of the whole set.
pub fn alpha_reduce<O: BallOracle>(sess: &mut Session<O>, a: usize) -> Result<usize> {
    if a < 2 || sess.q() != a + 1 {
        return domain(format!("alpha reduction needs A >= 2 and query size A+1, got A={a}, q={}", sess.q()));
    }
    let n = sess.n();
    if n <= a {
        return domain(format!("need n > A, got n={n}"));
    }
    let floor = alpha_floor(a);
    let mut balls: Vec<usize> = (0..n).collect();
    while balls.len() > floor {
        let (mut removed, _) = eliminate(sess, &balls, a + 1)?;
        removed.sort_unstable();
        balls = removed;
    }
    Ok(balls[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explore::explore;
    use crate::model::{is_nonminority_ball, Coloring};
    use crate::oracle::{ChoiceOracle, FixedOracle, Tiebreak};

    fn fixed(colors: &str, q: usize) -> Session<FixedOracle> {
        let c = Coloring::parse(colors).unwrap();
        Session::new(FixedOracle::new(c, q, AnswerModel::Majority, Tiebreak::Lowest).unwrap())
    }

    #[test]
    fn two_db_three_balls() {
        let mut s = fixed("RRB", 3);
        let (a, b) = two_different_balls(&mut s, &[0, 1, 2]).unwrap();
        assert_eq!(s.distinct(), 1);
        assert!([a, b].contains(&2));
    }

    #[test]
    fn two_db_monochromatic() {
        let mut s = fixed("RRRRR", 3);
        two_different_balls(&mut s, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(s.distinct(), 3);
    }

    #[test]
    fn gadget_never_lies() {
        for m in 0..16u64 {
            let c = Coloring::from_mask(4, m).unwrap();
            if c.color(0) != 0 || c.color(1) != 1 {
                continue;
            }
            explore(1000, |ex| {
                let mut s = Session::new(ChoiceOracle::new(c.clone(), 3, AnswerModel::Majority, ex)?);
                let r = triple_gadget(&mut s, 0, 1, 2, 3)?;
                assert!(r.holds(c.color(2), c.color(3)));
                assert!(s.distinct() <= 2);
                Ok(())
            })
            .unwrap();
        }
    }

    #[test]
    fn a3_small_exhaustive() {
        for n in 1..=7usize {
            for m in 0..1u64 << n {
                let c = Coloring::from_mask(n, m).unwrap();
                if n < 3 {
                    continue;
                }
                explore(1 << 24, |ex| {
                    let mut s = Session::new(ChoiceOracle::new(c.clone(), 3, AnswerModel::Majority, ex)?);
                    let x = find_nonminority_adaptive_3(&mut s, SelectConfig::MOM3_DEFAULT)?;
                    let all = Query::new((0..n).collect())?;
                    assert!(is_nonminority_ball(&c, &all, x)?, "n={n} m={m:b} x={x}");
                    Ok(())
                })
                .unwrap();
            }
        }
    }

    #[test]
    fn even_adaptive_examples() {
        let mut s = fixed("RRBBRB", 4);
        let x = find_nonminority_adaptive_even(&mut s, 2).unwrap();
        assert!(s.distinct() <= 3);
        let c = Coloring::parse("RRBBRB").unwrap();
        assert!(is_nonminority_ball(&c, &Query::new((0..6).collect()).unwrap(), x).unwrap());
    }

    #[test]
    fn even_design_size_and_decode() {
        let d = even_design(6, 2).unwrap();
        assert!(d.len() <= 6 * 2);
        let c = Coloring::parse("RRBBRB").unwrap();
        let mut o = FixedOracle::new(c.clone(), 4, AnswerModel::Majority, Tiebreak::Lowest).unwrap();
        let table: Vec<(Query, Answer)> = d.iter().map(|q| (q.clone(), o.answer(q).unwrap())).collect();
        let x = nonadaptive_even_decode(6, 2, &table).unwrap();
        assert!(is_nonminority_ball(&c, &Query::new((0..6).collect()).unwrap(), x).unwrap());
        assert!(matches!(nonadaptive_even_decode(6, 2, &table[1..]), Err(Error::Input(_)) | Ok(_)));
    }

    #[test]
    fn odd_single_query() {
        let mut s = fixed("RBBRB", 5);
        assert_eq!(find_nonminority_adaptive_odd(&mut s, 2, SelectConfig::MOM3_DEFAULT).unwrap(), 1);
        assert_eq!(s.distinct(), 1);
    }

    #[test]
    fn alpha_monochromatic() {
        let c = Coloring::parse("RRRRRRRRR").unwrap();
        let mut s = Session::new(FixedOracle::new(c, 3, AnswerModel::Alpha { num: 1, den: 2 }, Tiebreak::Lowest).unwrap());
        let x = alpha_reduce(&mut s, 2).unwrap();
        assert!(x < 9);
    }
}
