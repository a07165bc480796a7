//! Non-adaptive query sets: file format, degree statistics, constructions and the bound report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::{binomial, subsets, Answer, AnswerModel, Query};
use crate::oracle::{BallOracle, NamedOracle, NamedSpec, Session, TableOracle};
use crate::search::{two_different_balls, GadgetOracle};
use crate::selection::{mom3_select, PairSession, SelectConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Design {
    n: usize,
    q: usize,
    queries: Vec<Query>,
    provenance: String,
}

impl Design {
    /// Sorts and dedups `queries`; every query must have size q and indices below n.
    pub fn new(n: usize, q: usize, queries: Vec<Query>, provenance: impl Into<String>) -> Result<Self> {
        let mut queries = queries;
        for qu in &queries {
            qu.check(n, q)?;
        }
        queries.sort();
        queries.dedup();
        Ok(Design { n, q, queries, provenance: provenance.into() })
    }

    pub fn complete(n: usize, q: usize) -> Result<Self> {
        if q == 0 || q > n {
            return domain(format!("query size {q} does not fit n={n}"));
        }
        let qs = subsets(n, q).into_iter().map(Query::new).collect::<Result<Vec<_>>>()?;
        Design::new(n, q, qs, "complete")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn contains(&self, q: &Query) -> bool {
        self.queries.binary_search(q).is_ok()
    }

    /// Header "n q", then one ascending query per line in lexicographic order.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.q);
        for qu in &self.queries {
            let line: Vec<String> = qu.balls().iter().map(|b| b.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Input("empty design file".into()))?;
        let nums = parse_ints(header)?;
        let [n, q] = nums[..] else {
            return Err(Error::Input(format!("bad design header {header:?}")));
        };
        let mut qs = Vec::new();
        for l in lines {
            qs.push(Query::new(parse_ints(l)?)?);
        }
        Design::new(n, q, qs, "file").map_err(|e| Error::Input(e.to_string()))
    }

    /// Answers every query of the design from an oracle.
    pub fn answer_all<O: BallOracle>(&self, oracle: &mut O) -> Result<Vec<(Query, Answer)>> {
        self.queries.iter().map(|qu| Ok((qu.clone(), oracle.answer(qu)?))).collect()
    }
}

fn parse_ints(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| Error::Input(format!("bad integer {t:?}: {e}"))))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CodegreeStats {
    pub size: usize,
    pub delta: usize,
    pub delta2: usize,
    #[serde(skip)]
    pub degree: Vec<usize>,
    #[serde(skip)]
    pub codegree: Vec<Vec<usize>>,
}

impl CodegreeStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stats serialize")
    }

    /// Sum of co-degrees over unordered pairs.
    pub fn codegree_sum(&self) -> usize {
        let n = self.degree.len();
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| self.codegree[i][j]).sum()
    }

    /// Smallest d(x,u)+d(x,v)+d(y,u)+d(y,v) over disjoint pairs {x,y}, {u,v}, with the four balls.
    pub fn min_four_sum(&self) -> Option<(usize, [usize; 4])> {
        let n = self.degree.len();
        let c = &self.codegree;
        let mut best: Option<(usize, [usize; 4])> = None;
        for x in 0..n {
            for y in x + 1..n {
                for u in x + 1..n {
                    if u == y {
                        continue;
                    }
                    for v in u + 1..n {
                        if v == y {
                            continue;
                        }
                        let s = c[x][u] + c[x][v] + c[y][u] + c[y][v];
                        if best.is_none_or(|(b, _)| s < b) {
                            best = Some((s, [x, y, u, v]));
                        }
                    }
                }
            }
        }
        best
    }
}

pub fn codegree_stats(d: &Design) -> CodegreeStats {
    let n = d.n();
    let mut degree = vec![0; n];
    let mut codegree = vec![vec![0; n]; n];
    for qu in d.queries() {
        let b = qu.balls();
        for (i, &x) in b.iter().enumerate() {
            degree[x] += 1;
            for &y in &b[i + 1..] {
                codegree[x][y] += 1;
                codegree[y][x] += 1;
            }
        }
    }
    let delta = degree.iter().copied().min().unwrap_or(0);
    let delta2 = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| codegree[i][j]).min().unwrap_or(0);
    CodegreeStats { size: d.len(), delta, delta2, degree, codegree }
}

/// Size of the hitting set S for the half-plus-one design.
pub fn thm3ii_s_size(n: usize) -> usize {
    n / 2 + 1
}

/// All triples meeting S = {0, .., floor(n/2)}.
pub fn build_design_thm3ii(n: usize) -> Result<Design> {
    if n < 3 {
        return domain(format!("need n >= 3, got {n}"));
    }
    let s = thm3ii_s_size(n);
    let qs = subsets(n, 3)
        .into_iter()
        .filter(|t| t[0] < s)
        .map(Query::new)
        .collect::<Result<Vec<_>>>()?;
    Design::new(n, 3, qs, format!("thm3ii n={n}"))
}

/// The decoding strategy for the half-plus-one design; every query it asks meets S.
pub fn thm3ii_strategy<O: BallOracle>(sess: &mut Session<O>, cfg: SelectConfig) -> Result<usize> {
    let n = sess.n();
    if n < 3 || sess.q() != 3 {
        return domain("decoder needs n >= 3 and triple queries");
    }
    let s = thm3ii_s_size(n);
    let sset: Vec<usize> = (0..s).collect();
    let (a, b) = two_different_balls(sess, &sset)?;
    let mut n1 = 0usize;
    let mut keep: Vec<usize> = sset.clone();
    for x in s..n {
        match sess.ask(&[a, b, x])? {
            Answer::Ball(y) if y == b => n1 += 1,
            Answer::Ball(y) if y == a => {}
            _ => keep.push(x),
        }
    }
    let k = n.div_ceil(2) - n1;
    let mut ps = PairSession::new(GadgetOracle::new(sess, a, b));
    match mom3_select(&mut ps, &keep, a, b, k, cfg) {
        Ok(out) => Ok(out.x),
        Err(Error::Contradiction(_)) => Ok(a),
        Err(e) => Err(e),
    }
}

/// Decodes a full answer table of the half-plus-one design.
pub fn decode_thm3ii(d: &Design, table: &[(Query, Answer)], cfg: SelectConfig) -> Result<usize> {
    let expect = build_design_thm3ii(d.n())?;
    if d.queries() != expect.queries() {
        return domain("design is not the half-plus-one construction");
    }
    let mut sess = Session::new(TableOracle::new(d.n(), 3, AnswerModel::Majority, table));
    thm3ii_strategy(&mut sess, cfg)
}

/// Inclusion probability for the random design, capped at 1.
pub fn random56_probability(n: usize) -> f64 {
    (5.0 / 6.0 + (n as f64).powf(-1.0 / 3.0)).min(1.0)
}

#[derive(Clone, Debug)]
pub struct RandomDesign {
    pub design: Design,
    pub delta2: usize,
    /// delta2 > 5n/6
    pub success: bool,
}

/// Each triple, in lexicographic order, kept when a ChaCha8 uniform draw falls below the probability.
pub fn build_design_random56(n: usize, seed: u64) -> Result<RandomDesign> {
    if n < 7 {
        return domain(format!("need n >= 7, got {n}"));
    }
    let p = random56_probability(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut qs = Vec::new();
    for t in subsets(n, 3) {
        let u: f64 = rng.gen();
        if u < p {
            qs.push(Query::new(t)?);
        }
    }
    let design = Design::new(n, 3, qs, format!("random56 n={n} seed={seed}"))?;
    let delta2 = codegree_stats(&design).delta2;
    Ok(RandomDesign { success: 6 * delta2 > 5 * n, delta2, design })
}

/// The six-part design that is defeated by its bundled adversary.
pub fn build_counterexample_thm3v(n: usize) -> Result<(Design, NamedOracle)> {
    if n < 12 {
        return Err(Error::Config(format!("the six-part construction needs n >= 12, got {n}")));
    }
    let adv = NamedOracle::build(NamedSpec::Thm3v { n })?;
    let d = Design::new(n, 3, adv.design(), format!("thm3v n={n}"))?;
    Ok((d, adv))
}

#[derive(Clone, Debug, Serialize)]
pub struct Thm4Report {
    pub n: usize,
    pub size: usize,
    pub delta2: usize,
    pub claims_determining: bool,
    /// Half of all triples (odd n) or an eighth of C(n-2,3) (even n).
    pub size_lower_bound: f64,
    pub size_ok: bool,
    /// (5/6) C(n,3), the leading term of the upper construction.
    pub size_upper_leading: f64,
    /// delta2 >= (n-2)/2 for odd n; no four balls with co-degree sum <= n/2-3 for even n.
    pub codegree_ok: bool,
    pub min_four_sum: Option<usize>,
    pub violations: Vec<String>,
}

pub fn check_thm4_bounds(d: &Design, claims_determining: bool) -> Result<Thm4Report> {
    if d.q() != 3 {
        return domain("bound report is for triple designs");
    }
    let n = d.n();
    let st = codegree_stats(d);
    let all = binomial(n, 3) as f64;
    let (size_lower_bound, codegree_ok, min_four_sum) = if n % 2 == 1 {
        (all / 2.0, 2 * st.delta2 + 2 >= n, None)
    } else {
        let lower = binomial(n.saturating_sub(2), 3) as f64 / 8.0;
        let m = st.min_four_sum().map(|(s, _)| s);
        let ok = match m {
            Some(s) => 2 * s + 6 > n,
            None => true,
        };
        (lower, ok, m)
    };
    let size_ok = st.size as f64 >= size_lower_bound;
    let mut violations = Vec::new();
    if claims_determining {
        if !size_ok {
            violations.push(format!("size {} below the lower bound {size_lower_bound}", st.size));
        }
        if !codegree_ok {
            violations.push(if n % 2 == 1 {
                format!("delta2 = {} < (n-2)/2", st.delta2)
            } else {
                format!("four balls with co-degree sum {} <= n/2-3", min_four_sum.unwrap_or(0))
            });
        }
    }
    Ok(Thm4Report {
        n,
        size: st.size,
        delta2: st.delta2,
        claims_determining,
        size_lower_bound,
        size_ok,
        size_upper_leading: all * 5.0 / 6.0,
        codegree_ok,
        min_four_sum,
        violations,
    })
}
