//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero on any failure.
//! Pass criterion numbers as arguments to run a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use majsearch::colorset::ColorSet;
use majsearch::design::{build_counterexample_thm3v, build_design_random56, build_design_thm3ii, codegree_stats, Design};
use majsearch::explore::{explore, Chooser, RandomChooser};
use majsearch::model::{is_valid_answer, subsets, Answer, AnswerModel, Coloring, Query};
use majsearch::oracle::{
    cover_check, legal_set, verify_obs12, BallOracle, BranchingOracle, ChoiceOracle, CoverOutcome, NamedOracle, NamedSpec, Session,
};
use majsearch::search::{
    alpha_query_bound, alpha_reduce, deduce_from_all_queries, even_design, find_nonminority_adaptive_3,
    find_nonminority_adaptive_even, find_nonminority_adaptive_odd, nonadaptive_even_decode, triple_gadget,
    two_different_balls, A3_LINEAR_K, ALPHA_SLACK, ODD_L2_QUADRATIC,
};
use majsearch::selection::{
    check_sel2, check_sel3, mom2_bound, mom2_select, mom3_select, BinaryOracle, Cmp, PairOracle, PairSession,
    SelectConfig, TotalOracle, MOM3_ADDITIVE,
};
use majsearch::solver::{design_determines, exact_adaptive_complexity, Goal, Value};
use majsearch::Error;
use serde_json::Value as Json;

type Check = Result<String, String>;

const MAJ: AnswerModel = AnswerModel::Majority;
const SOLVER_BUDGET: u64 = 500_000_000;

fn golden(name: &str) -> Result<Json, String> {
    let p = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("golden").join(name);
    let text = std::fs::read_to_string(&p).map_err(|e| format!("golden file {}: {e}", p.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("golden file {}: {e}", p.display()))
}

fn golden_u64(doc: &Json, key: &str) -> Result<u64, String> {
    doc[key].as_u64().ok_or_else(|| format!("golden key {key} missing"))
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn violation(msg: String) -> Error {
    Error::Contradiction(msg)
}

fn random_coloring(rc: &mut RandomChooser, n: usize) -> Coloring {
    let bias = 1 + rc.choose(9);
    let colors: Vec<u8> = (0..n).map(|_| u8::from(rc.choose(10) < bias)).collect();
    Coloring::from_colors(&colors).unwrap()
}

fn nonminority_everywhere(set: &ColorSet, b: usize) -> bool {
    set.minority_union() >> b & 1 == 0
}

fn is_nonminority(c: &Coloring, b: usize) -> bool {
    let blue = c.count_blue();
    let same = if c.color(b) == 1 { blue } else { c.n() - blue };
    2 * same >= c.n()
}

// 1. Two different balls, every coloring and adversary, n <= 7.
fn criterion_1() -> Check {
    let mut runs = 0;
    for n in 3..=7usize {
        let all: Vec<usize> = (0..n).collect();
        for m in 0..1u64 << n {
            let c = Coloring::from_mask(n, m).map_err(s)?;
            runs += explore(1 << 24, |ex| {
                let mut sess = Session::new(ChoiceOracle::new(c.clone(), 3.min(n), MAJ, ex)?);
                let (x, y) = two_different_balls(&mut sess, &all)?;
                if c.color(x) == c.color(y) && !c.is_monochromatic() {
                    return Err(violation(format!("{c}: pair ({x},{y}) shares a color")));
                }
                if sess.distinct() != n.saturating_sub(2) {
                    return Err(violation(format!("{c}: {} queries, expected {}", sess.distinct(), n - 2)));
                }
                Ok(())
            })
            .map_err(s)?;
        }
    }
    Ok(format!("{runs} (coloring, adversary) runs for 3 <= n <= 7, all valid with exactly n-2 queries"))
}

// 2. MoM2 certificates over {0,1,2} multisets, plus the 18n+7 bound at scale.
fn criterion_2() -> Check {
    let mut runs = 0u64;
    for cfg in [SelectConfig::MOM2_DEFAULT, SelectConfig { base: 4 }] {
        for n in 1..=7usize {
            let elems: Vec<usize> = (0..n).collect();
            for code in 0..3usize.pow(n as u32) {
                let vals: Vec<i64> = (0..n).map(|i| (code / 3usize.pow(i as u32) % 3) as i64).collect();
                for k in 1..=n {
                    runs += explore(1 << 24, |ex| {
                        let mut sess = PairSession::new(TotalOracle::new(vals.clone(), ex));
                        let out = mom2_select(&mut sess, &elems, k, cfg)?;
                        check_sel2(&vals, &elems, k, &out).map_err(|e| violation(format!("{vals:?} k={k}: {e}")))?;
                        if sess.distinct() > mom2_bound(n) {
                            return Err(violation(format!("{vals:?}: {} comparisons", sess.distinct())));
                        }
                        Ok(())
                    })
                    .map_err(s)?;
                }
            }
        }
    }
    let mut worst = Vec::new();
    for n in [1_000usize, 10_000, 100_000] {
        let mut max = 0;
        for seed in 0..3u64 {
            let mut rc = RandomChooser::new(seed * 31 + n as u64);
            let spread = 1 + rc.choose(n);
            let vals: Vec<i64> = (0..n).map(|_| rc.choose(spread) as i64).collect();
            let elems: Vec<usize> = (0..n).collect();
            for k in [1, n / 2 + 1, n] {
                let mut sess = PairSession::new(TotalOracle::new(vals.clone(), RandomChooser::new(seed)));
                let out = mom2_select(&mut sess, &elems, k, SelectConfig::MOM2_DEFAULT).map_err(s)?;
                check_sel2(&vals, &elems, k, &out).map_err(|e| format!("n={n} k={k}: {e}"))?;
                max = max.max(sess.distinct());
            }
        }
        ensure(max <= mom2_bound(n), || format!("n={n}: {max} comparisons > 18n+7"))?;
        worst.push(format!("n={n}: {max}"));
    }
    Ok(format!("{runs} exhaustive runs (base 16 and 4); max comparisons {} (bound 18n+7)", worst.join(", ")))
}

// 3. MoM3 full output contract over binary multisets, plus the 59n+C bound.
fn criterion_3() -> Check {
    let c = golden_u64(&golden("mom3_additive.json")?, "C")? as usize;
    ensure(c == MOM3_ADDITIVE, || format!("library constant {MOM3_ADDITIVE} differs from golden C={c}"))?;
    let mut runs = 0u64;
    for cfg in [SelectConfig::MOM3_DEFAULT, SelectConfig { base: 4 }] {
        for n in 2..=(if cfg.base == 4 { 8 } else { 9 }) {
            let elems: Vec<usize> = (0..n).collect();
            for code in 0..1u32 << (n - 2) {
                let mut vals = vec![0u8, 1];
                vals.extend((0..n - 2).map(|i| (code >> i & 1) as u8));
                for k in 1..=n {
                    runs += explore(1 << 26, |ex| {
                        let mut sess = PairSession::new(BinaryOracle::new(vals.clone(), ex)?);
                        let out = mom3_select(&mut sess, &elems, 0, 1, k, cfg)?;
                        check_sel3(&vals, &elems, 0, 1, k, &out)
                            .map_err(|e| violation(format!("{vals:?} k={k} base={}: {e}", cfg.base)))
                    })
                    .map_err(s)?;
                }
            }
        }
    }
    let n = 10_000usize;
    let mut realized = i64::MIN;
    for seed in 0..5u64 {
        let mut rc = RandomChooser::new(seed + 500);
        let bias = 1 + rc.choose(9);
        let mut vals = vec![0u8, 1];
        vals.extend((2..n).map(|_| u8::from(rc.choose(10) < bias)));
        let elems: Vec<usize> = (0..n).collect();
        for k in [2, n / 3, n / 2 + 1, n - 1] {
            let mut sess = PairSession::new(BinaryOracle::new(vals.clone(), RandomChooser::new(seed)).map_err(s)?);
            let out = mom3_select(&mut sess, &elems, 0, 1, k, SelectConfig::MOM3_DEFAULT).map_err(s)?;
            check_sel3(&vals, &elems, 0, 1, k, &out).map_err(|e| format!("n={n} k={k}: {e}"))?;
            realized = realized.max(sess.distinct() as i64 - 59 * n as i64);
        }
    }
    ensure(realized <= c as i64, || format!("max(count - 59n) = {realized} exceeds C={c}"))?;
    Ok(format!("{runs} exhaustive runs (base 8 for n <= 9, base 4 for n <= 8); at n=10^4 max(count - 59n) = {realized} <= C = {c}"))
}

/// Comparison oracle with no consistency at all; stands in for gadget answers when the anchors share a color.
struct ArbitraryOracle(RandomChooser);

impl PairOracle for ArbitraryOracle {
    fn compare(&mut self, _a: usize, _b: usize) -> majsearch::Result<Cmp> {
        Ok([Cmp::Le, Cmp::Ge, Cmp::Ne][self.0.choose(3)])
    }
}

// 4. The q=3 pipeline: direct exhaustive runs for n <= 7, composed checks for 8 <= n <= 10, linear counts.
fn criterion_4() -> Check {
    let k_gold = golden_u64(&golden("a3_linear.json")?, "K")? as usize;
    ensure(k_gold == A3_LINEAR_K, || format!("library K={A3_LINEAR_K} differs from golden K={k_gold}"))?;
    let cfg = SelectConfig::MOM3_DEFAULT;
    let mut direct = 0u64;
    for n in 3..=7usize {
        direct += explore(1 << 30, |ex| {
            let mut sess = Session::new(BranchingOracle::new(n, 3, MAJ, ex)?);
            let b = find_nonminority_adaptive_3(&mut sess, cfg)?;
            if !nonminority_everywhere(sess.oracle().consistent(), b) {
                return Err(violation(format!("n={n}: ball {b} is a minority ball for some consistent coloring")));
            }
            Ok(())
        })
        .map_err(s)?;
    }
    // Gadget: truthful comparison of two balls against the anchors' colors.
    for m in 0..16u64 {
        let c = Coloring::from_mask(4, m).map_err(s)?;
        if c.color(0) == c.color(1) {
            continue;
        }
        explore(1 << 10, |ex| {
            let mut sess = Session::new(ChoiceOracle::new(c.clone(), 3, MAJ, ex)?);
            let r = triple_gadget(&mut sess, 0, 1, 2, 3)?;
            let v = |x: usize| u8::from(c.color(x) == c.color(1));
            if !r.holds(v(2), v(3)) || sess.distinct() > 2 {
                return Err(violation(format!("gadget on {c} answered {r:?}")));
            }
            Ok(())
        })
        .map_err(s)?;
    }
    let mut composed = Vec::new();
    for n in 8..=10usize {
        let all: Vec<usize> = (0..n).collect();
        let pairs = explore(1 << 30, |ex| {
            let mut sess = Session::new(BranchingOracle::new(n, 3, MAJ, ex)?);
            let (x, y) = two_different_balls(&mut sess, &all)?;
            let full = (1u64 << n) - 1;
            for m in sess.oracle().consistent().iter() {
                if (m >> x & 1) == (m >> y & 1) && m != 0 && m != full {
                    return Err(violation(format!("n={n}: 2DB pair shares a color under {m:b}")));
                }
            }
            if sess.distinct() != n - 2 {
                return Err(violation("2DB count".into()));
            }
            Ok(())
        })
        .map_err(s)?;
        let k = n / 2 + 1;
        let mut max_cmp = 0;
        let mut sel_runs = 0u64;
        for code in 0..1u32 << (n - 2) {
            let mut vals = vec![0u8, 1];
            vals.extend((0..n - 2).map(|i| (code >> i & 1) as u8));
            let ones = vals.iter().filter(|&&v| v == 1).count();
            sel_runs += explore(1 << 30, |ex| {
                let mut sess = PairSession::new(BinaryOracle::new(vals.clone(), ex)?);
                let out = mom3_select(&mut sess, &all, 0, 1, k, cfg)?;
                check_sel3(&vals, &all, 0, 1, k, &out).map_err(violation)?;
                let same = if vals[out.x] == 1 { ones } else { n - ones };
                if 2 * same < n {
                    return Err(violation(format!("{vals:?}: selected element is in the minority")));
                }
                max_cmp = max_cmp.max(sess.distinct());
                Ok(())
            })
            .map_err(s)?;
        }
        // Monochromatic colorings: any ball is correct; the pipeline must only terminate cleanly.
        for seed in 0..3000u64 {
            let c = Coloring::monochromatic(n, (seed % 2) as u8).map_err(s)?;
            let mut sess = Session::new(ChoiceOracle::new(c, 3, MAJ, RandomChooser::new(seed)).map_err(s)?);
            find_nonminority_adaptive_3(&mut sess, cfg).map_err(|e| format!("monochromatic n={n} seed={seed}: {e}"))?;
            let mut ps = PairSession::new(ArbitraryOracle(RandomChooser::new(seed)));
            match mom3_select(&mut ps, &all, 0, 1, k, cfg) {
                Ok(_) | Err(Error::Contradiction(_)) => {}
                Err(e) => return Err(format!("arbitrary relations n={n} seed={seed}: {e}")),
            }
        }
        composed.push(format!("n={n}: {pairs} 2DB transcripts, {sel_runs} selection runs, <= {} queries", n - 2 + 2 * max_cmp));
    }
    let mut ratios = Vec::new();
    for n in [100usize, 1_000, 10_000, 100_000] {
        let mut max = 0;
        for seed in 0..3u64 {
            let mut rc = RandomChooser::new(seed * 7 + n as u64);
            let c = random_coloring(&mut rc, n);
            let mut sess = Session::new(ChoiceOracle::new(c.clone(), 3, MAJ, RandomChooser::new(seed)).map_err(s)?);
            let b = find_nonminority_adaptive_3(&mut sess, cfg).map_err(s)?;
            ensure(is_nonminority(&c, b), || format!("n={n} seed={seed}: ball {b} is a minority ball"))?;
            max = max.max(sess.distinct());
        }
        ensure(max <= k_gold * n, || format!("n={n}: {max} queries > {k_gold}n"))?;
        ratios.push(format!("{:.2}", max as f64 / n as f64));
    }
    Ok(format!(
        "{direct} transcripts for 3 <= n <= 7; composed {}; max count/n at 10^2..10^5 = {} <= K = {k_gold}",
        composed.join("; "),
        ratios.join(", ")
    ))
}

// 5. Exact solver: impossibility regimes and frozen small values.
fn criterion_5() -> Check {
    let gold = golden("a3_exact.json")?;
    let exact = |n, q, model, goal| exact_adaptive_complexity(n, q, model, goal, SOLVER_BUDGET).map_err(s);
    let nm = AnswerModel::NonMinority;
    for (n, q, goal) in [(5, 4, Goal::NonMinority), (6, 4, Goal::NonMinority), (6, 4, Goal::Fraction(3))] {
        let v = exact(n, q, nm, goal)?;
        ensure(v == Value::Impossible, || format!("n={n} q={q} {goal:?}: {v}, expected impossible"))?;
    }
    // Larger group regimes: the group adversary's full answer table leaves every ball failing under some legal coloring.
    for n in [6usize, 9, 12] {
        let o = NamedOracle::build(NamedSpec::Prop17 { n, q: 4, num: 1, den: 3 }).map_err(s)?;
        let legal = legal_set(n, &o.assignment().map_err(s)?, o.model()).map_err(s)?;
        let failing = legal.iter().fold(0u64, |u, m| u | Goal::Fraction(3).bad_mask(n, m));
        ensure(failing == (1u64 << n) - 1, || format!("n={n}: group adversary leaves balls {failing:b} safe"))?;
    }
    let mut got = Vec::new();
    for n in (1..=9usize).filter(|&n| n != 2) {
        let want = golden_u64(&gold["values"], &n.to_string())? as u32;
        let v = exact(n, 3.min(n), MAJ, Goal::NonMinority)?;
        ensure(v == Value::Finite(want), || format!("A3({n}) = {v}, golden {want}"))?;
        got.push(format!("{n}:{v}"));
    }
    Ok(format!("impossible at (5,4), (6,4) and the three-group regime (6,4) by search, (6,4), (9,4), (12,4) by the group adversary; A3 = {}", got.join(" ")))
}

// 6. Designs: the half-set construction determines, the six-part construction is defeated.
fn criterion_6() -> Check {
    let mut notes = Vec::new();
    for n in [5usize, 7, 9] {
        let d = build_design_thm3ii(n).map_err(s)?;
        let st = codegree_stats(&d);
        ensure(st.delta2 == n / 2 + 1, || format!("n={n}: delta2 {}", st.delta2))?;
        let r = design_determines(&d, MAJ, SOLVER_BUDGET).map_err(s)?;
        ensure(r.determines, || format!("n={n}: design does not determine"))?;
        notes.push(format!("n={n}: |Q|={} delta2={}", st.size, st.delta2));
    }
    for n in [12usize, 13] {
        let (d, adv) = build_counterexample_thm3v(n).map_err(s)?;
        let st = codegree_stats(&d);
        if n == 12 {
            ensure(st.delta2 == 5 * n / 6 - 3, || format!("n=12: delta2 {}", st.delta2))?;
        }
        let table = adv.assignment().map_err(s)?;
        let cover = cover_check(n, &table, MAJ).map_err(s)?;
        ensure(cover == CoverOutcome::Covered, || format!("n={n}: {cover:?}"))?;
        let w = adv.witnesses();
        ensure(w.len() == 3, || format!("n={n}: {} witnesses", w.len()))?;
        for c in w {
            ensure(table.iter().all(|(q, a)| is_valid_answer(c, q, a, MAJ)), || format!("n={n}: witness {c} is not legal"))?;
        }
        notes.push(format!("six-part n={n}: delta2={} defeated", st.delta2));
    }
    Ok(notes.join("; "))
}

// 7. Even query sizes: adaptive and non-adaptive, q=4.
fn criterion_7() -> Check {
    let l = 2;
    let mut notes = Vec::new();
    for n in [6usize, 8] {
        let mut max = 0;
        let leaves = explore(1 << 30, |ex| {
            let mut sess = Session::new(BranchingOracle::new(n, 2 * l, MAJ, ex)?);
            let b = find_nonminority_adaptive_even(&mut sess, l)?;
            if !nonminority_everywhere(sess.oracle().consistent(), b) {
                return Err(violation(format!("n={n}: ball {b} is a minority ball")));
            }
            max = max.max(sess.distinct());
            Ok(())
        })
        .map_err(s)?;
        ensure(max <= n - 2 * l + 1, || format!("n={n}: {max} queries > n-2l+1"))?;
        notes.push(format!("adaptive n={n}: {leaves} transcripts, max {max} queries"));
    }
    let n = 6;
    let design = even_design(n, l).map_err(s)?;
    ensure(design.len() <= n * (n - 2 * l), || format!("design size {} > n(n-2l)", design.len()))?;
    let valid = answer_masks(n, &design)?;
    let mut answers = Vec::with_capacity(design.len());
    let mut tables = 0u64;
    all_tables(&design, &valid, (1u128 << (1 << n)) - 1, &mut answers, &mut |answers, consistent| {
        tables += 1;
        let b = nonadaptive_even_decode(n, l, answers).map_err(s)?;
        let bad = (0..1u32 << n).find(|&m| consistent >> m & 1 == 1 && !is_nonminority(&Coloring::from_mask(n, m as u64).unwrap(), b));
        ensure(bad.is_none(), || format!("decoder chose ball {b}, a minority ball under {:b}", bad.unwrap()))
    })?;
    notes.push(format!("non-adaptive n=6: {} queries, {tables} consistent tables decoded", design.len()));
    Ok(notes.join("; "))
}

/// For each design query, every answer with the set of colorings (bitmask, n <= 7) for which it is valid.
fn answer_masks(n: usize, design: &[Query]) -> Result<Vec<Vec<(Answer, u128)>>, String> {
    let colorings: Vec<Coloring> = (0..1u64 << n).map(|m| Coloring::from_mask(n, m).unwrap()).collect();
    Ok(design
        .iter()
        .map(|q| {
            let mut options: Vec<Answer> = q.balls().iter().map(|&b| Answer::Ball(b)).collect();
            options.push(Answer::NoMajority);
            options
                .into_iter()
                .map(|a| {
                    let mask = colorings.iter().enumerate().filter(|(_, c)| is_valid_answer(c, q, &a, MAJ)).fold(0u128, |m, (i, _)| m | 1 << i);
                    (a, mask)
                })
                .filter(|&(_, m)| m != 0)
                .collect()
        })
        .collect())
}

/// Visits every answer table to `design` that some coloring satisfies, with its consistent set.
fn all_tables(
    design: &[Query],
    valid: &[Vec<(Answer, u128)>],
    consistent: u128,
    answers: &mut Vec<(Query, Answer)>,
    leaf: &mut dyn FnMut(&[(Query, Answer)], u128) -> Result<(), String>,
) -> Result<(), String> {
    let i = answers.len();
    if i == design.len() {
        return leaf(answers, consistent);
    }
    for &(a, m) in &valid[i] {
        let next = consistent & m;
        if next != 0 {
            answers.push((design[i].clone(), a));
            all_tables(design, valid, next, answers, leaf)?;
            answers.pop();
        }
    }
    Ok(())
}

// 8. Odd query sizes at l=2, and full-table deduction at n=5, l=1.
fn criterion_8() -> Check {
    let gold = golden("odd_quadratic.json")?;
    let (num, den) = (golden_u64(&gold, "C_l_num")? as usize, golden_u64(&gold, "C_l_den")? as usize);
    ensure((num, den) == ODD_L2_QUADRATIC, || "library C_l differs from golden".into())?;
    let cfg = SelectConfig::MOM3_DEFAULT;
    let l = 2;
    let q = 2 * l + 1;
    let mut notes = Vec::new();
    let mut counts = Vec::new();
    for n in [5usize, 6, 9] {
        let mut max = 0;
        let leaves = explore(1 << 30, |ex| {
            let mut sess = Session::new(BranchingOracle::new(n, q, MAJ, ex)?);
            let b = find_nonminority_adaptive_odd(&mut sess, l, cfg)?;
            if !nonminority_everywhere(sess.oracle().consistent(), b) {
                return Err(violation(format!("n={n}: ball {b} is a minority ball")));
            }
            max = max.max(sess.distinct());
            Ok(())
        })
        .map_err(s)?;
        notes.push(format!("n={n}: {leaves} transcripts"));
        counts.push((n, max));
    }
    // n=7 and n=8 ask every 5-subset of seven balls; correctness is that every consistent full table deduces a ball.
    let full = Design::complete(7, q).map_err(s)?;
    let r = design_determines(&full, MAJ, SOLVER_BUDGET).map_err(s)?;
    ensure(r.determines, || "the complete 5-subset design on 7 balls does not determine".into())?;
    for n in [7usize, 8] {
        let mut max = 0;
        for seed in 0..200u64 {
            let mut rc = RandomChooser::new(seed + 1000 * n as u64);
            let c = random_coloring(&mut rc, n);
            let mut sess = Session::new(ChoiceOracle::new(c.clone(), q, MAJ, RandomChooser::new(seed)).map_err(s)?);
            let b = find_nonminority_adaptive_odd(&mut sess, l, cfg).map_err(s)?;
            ensure(is_nonminority(&c, b), || format!("n={n}: ball {b} is a minority ball for {c}"))?;
            max = max.max(sess.distinct());
        }
        notes.push(format!("n={n}: full-table design determines ({} nodes)", r.nodes));
        counts.push((n, max));
    }
    for &(n, c) in &counts {
        ensure(c * den <= num * n * n, || format!("n={n}: {c} queries > C_l n^2"))?;
    }
    // Full tables at n=5 with triples.
    let triples: Vec<Query> = subsets(5, 3).into_iter().map(|t| Query::new(t).unwrap()).collect();
    let tables = explore(1 << 30, |ex| {
        let mut oracle = BranchingOracle::new(5, 3, MAJ, ex)?;
        let answers: Vec<(Query, _)> =
            triples.iter().map(|t| oracle.answer(t).map(|a| (t.clone(), a))).collect::<majsearch::Result<_>>()?;
        match deduce_from_all_queries(5, &answers, MAJ)? {
            Some(_) => Ok(()),
            None => Err(violation(format!("undetermined table {answers:?}"))),
        }
    })
    .map_err(s)?;
    let shown: Vec<String> = counts.iter().map(|(n, c)| format!("{n}:{c}")).collect();
    Ok(format!(
        "{}; max counts {} <= {num}/{den} n^2; {tables} full triple tables at n=5 all deduce",
        notes.join(", "),
        shown.join(" ")
    ))
}

// 9. Any three sets below n/2 have two whose union is below 5n/6.
fn criterion_9() -> Check {
    let mut triples = 0u64;
    for n in 1..=10usize {
        let sets: Vec<Vec<usize>> = (0..1u32 << n)
            .filter(|m| 2 * m.count_ones() < n as u32)
            .map(|m| (0..n).filter(|&b| m >> b & 1 == 1).collect())
            .collect();
        for i in 0..sets.len() {
            for j in i..sets.len() {
                for k in j..sets.len() {
                    let r = verify_obs12(n, [&sets[i], &sets[j], &sets[k]]).map_err(s)?;
                    ensure(r.is_some(), || format!("n={n}: {:?} {:?} {:?}", sets[i], sets[j], sets[k]))?;
                    triples += 1;
                }
            }
        }
    }
    Ok(format!("{triples} set triples for n <= 10"))
}

// 10. Sum of co-degrees equals three times the number of triples.
fn criterion_10() -> Check {
    let mut sizes = 0;
    for seed in 0..100u64 {
        let n = 7 + (seed as usize % 14);
        let d = if seed % 2 == 0 {
            build_design_random56(n, seed).map_err(s)?.design
        } else {
            let mut rc = RandomChooser::new(seed);
            let qs: Vec<Query> =
                subsets(n, 3).into_iter().filter(|_| rc.choose(3) == 0).map(|t| Query::new(t).unwrap()).collect();
            Design::new(n, 3, qs, "random").map_err(s)?
        };
        let st = codegree_stats(&d);
        ensure(st.codegree_sum() == 3 * st.size, || format!("seed {seed}: {} != 3 * {}", st.codegree_sum(), st.size))?;
        sizes += st.size;
    }
    Ok(format!("100 designs, {sizes} triples in total, identity exact"))
}

// 11. Alpha reduction: slack and query count.
fn criterion_11() -> Check {
    let gold = golden("alpha_reduce.json")?;
    let c_gold = golden_u64(&gold, "c")? as usize;
    ensure(c_gold == ALPHA_SLACK, || format!("library slack {ALPHA_SLACK} differs from golden c={c_gold}"))?;
    let mut notes = Vec::new();
    for a in [2usize, 3] {
        let mut worst_c = 0usize;
        let mut worst_q = 0usize;
        let mut leaves = 0;
        for n in a + 1..=9 {
            let model = AnswerModel::Alpha { num: 1, den: a as u32 };
            leaves += explore(1 << 30, |ex| {
                let mut sess = Session::new(BranchingOracle::new(n, a + 1, model, ex)?);
                let b = alpha_reduce(&mut sess, a)?;
                let need = (n - 1).div_ceil(a);
                for m in sess.oracle().consistent().iter() {
                    let blue = m.count_ones() as usize;
                    let same = if m >> b & 1 == 1 { blue } else { n - blue };
                    worst_c = worst_c.max(need.saturating_sub(same - 1));
                }
                let bound = n * n / (2 * a) + n;
                if sess.distinct() > bound || bound != alpha_query_bound(n, a) {
                    return Err(violation(format!("A={a} n={n}: {} queries", sess.distinct())));
                }
                worst_q = worst_q.max(sess.distinct());
                Ok(())
            })
            .map_err(s)?;
        }
        ensure(worst_c <= c_gold, || format!("A={a}: realized c={worst_c} > {c_gold}"))?;
        notes.push(format!("A={a}: {leaves} transcripts, realized c={worst_c}, max {worst_q} queries"));
    }
    Ok(format!("{}; c <= {c_gold}, counts <= n^2/(2A) + n", notes.join("; ")))
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Check); 11] = [
        (1, "two different balls", 10, criterion_1),
        (2, "MoM2 selection", 120, criterion_2),
        (3, "MoM3 selection", 120, criterion_3),
        (4, "q=3 pipeline", 300, criterion_4),
        (5, "exact solver", 600, criterion_5),
        (6, "designs", 300, criterion_6),
        (7, "even query sizes", 300, criterion_7),
        (8, "odd query sizes", 600, criterion_8),
        (9, "three small sets", 60, criterion_9),
        (10, "co-degree identity", 60, criterion_10),
        (11, "alpha reduction", 300, criterion_11),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let el = t.elapsed();
        let (ok, detail) = match r {
            Ok(d) if el <= Duration::from_secs(limit) => (true, d),
            Ok(d) => (false, format!("{d}; exceeded the {limit}s limit")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {} [{:>6.1}s / {limit}s] {name}: {detail}",
            if ok { "PASS" } else { "FAIL" },
            el.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
