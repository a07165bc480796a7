//! Bitsets over the 2^n colorings of a small ball set.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Answer, AnswerModel, Query, ENUM_LIMIT};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ColorSet {
    n: usize,
    bits: Vec<u64>,
}

fn words_for(n: usize) -> usize {
    (1usize << n).div_ceil(64)
}

pub fn check_budget(n: usize) -> Result<()> {
    if n > ENUM_LIMIT {
        return Err(Error::Capacity(format!("coloring enumeration needs n <= {ENUM_LIMIT}, got {n}")));
    }
    Ok(())
}

/// Balls outside the minority of coloring `m`, as a mask of the minority.
#[inline]
pub fn minority_mask(n: usize, m: u64) -> u64 {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let blue = m.count_ones() as usize;
    if 2 * blue < n {
        m
    } else if 2 * (n - blue) < n {
        !m & full
    } else {
        0
    }
}

impl ColorSet {
    pub fn empty(n: usize) -> Result<Self> {
        check_budget(n)?;
        Ok(ColorSet { n, bits: vec![0; words_for(n)] })
    }

    pub fn full(n: usize) -> Result<Self> {
        let mut s = Self::empty(n)?;
        let total = 1u64 << n;
        for (i, w) in s.bits.iter_mut().enumerate() {
            let lo = i as u64 * 64;
            let hi = (lo + 64).min(total);
            *w = if hi - lo == 64 { u64::MAX } else { (1u64 << (hi - lo)) - 1 };
        }
        Ok(s)
    }

    pub fn singleton(n: usize, m: u64) -> Result<Self> {
        let mut s = Self::empty(n)?;
        s.insert(m);
        Ok(s)
    }

    pub fn from_iter(n: usize, it: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for m in it {
            s.insert(m);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    #[inline]
    pub fn contains(&self, m: u64) -> bool {
        self.bits[(m / 64) as usize] >> (m % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, m: u64) {
        self.bits[(m / 64) as usize] |= 1 << (m % 64);
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(i as u64 * 64 + t)
            })
        })
    }

    pub fn and(&self, other: &ColorSet) -> ColorSet {
        ColorSet { n: self.n, bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect() }
    }

    pub fn and_assign(&mut self, other: &ColorSet) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
    }

    pub fn intersection_len(&self, other: &ColorSet) -> usize {
        self.bits.iter().zip(&other.bits).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn is_subset(&self, other: &ColorSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Union of the minority sets of all member colorings.
    pub fn minority_union(&self) -> u64 {
        let mut u = 0;
        for m in self.iter() {
            u |= minority_mask(self.n, m);
        }
        u
    }

    /// Lowest ball that is non-minority under every member coloring.
    pub fn deduced_ball(&self) -> Option<usize> {
        let u = self.minority_union();
        (0..self.n).find(|&b| u >> b & 1 == 0)
    }

    /// Colorings of `self` under which `answer` to `query` is legal.
    pub fn filter(&self, query: &Query, answer: &Answer, model: AnswerModel) -> ColorSet {
        let qm = query.mask();
        let mut out = ColorSet { n: self.n, bits: vec![0; self.bits.len()] };
        for m in self.iter() {
            if crate::model::mask_answer_ok(m, qm, answer, model) {
                out.insert(m);
            }
        }
        out
    }
}

/// Memoized sets of colorings legalizing each (query, answer) pair.
pub struct AnswerMasks {
    n: usize,
    model: AnswerModel,
    full: ColorSet,
    cache: HashMap<(u64, Answer), ColorSet>,
}

impl AnswerMasks {
    pub fn new(n: usize, model: AnswerModel) -> Result<Self> {
        Ok(AnswerMasks { n, model, full: ColorSet::full(n)?, cache: HashMap::new() })
    }

    pub fn model(&self) -> AnswerModel {
        self.model
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&mut self, query: &Query, answer: &Answer) -> &ColorSet {
        let key = (query.mask(), *answer);
        let (full, model) = (&self.full, self.model);
        self.cache.entry(key).or_insert_with(|| full.filter(query, answer, model))
    }

    /// Candidate replies to `query`: its balls ascending, then `NoMajority` where the model has it.
    pub fn candidates(&self, query: &Query) -> Vec<Answer> {
        let mut v: Vec<Answer> = query.balls().iter().map(|&b| Answer::Ball(b)).collect();
        if self.model.allows_no_majority() {
            v.push(Answer::NoMajority);
        }
        v
    }
}
