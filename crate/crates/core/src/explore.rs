//! Replay-based enumeration of every branch of an adversary game.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Picks one of `width` options at each adversary decision.
pub trait Chooser {
    fn choose(&mut self, width: usize) -> usize;
}

impl<C: Chooser + ?Sized> Chooser for &mut C {
    fn choose(&mut self, width: usize) -> usize {
        (**self).choose(width)
    }
}

/// Always the first option.
#[derive(Clone, Copy, Debug, Default)]
pub struct First;

impl Chooser for First {
    fn choose(&mut self, _width: usize) -> usize {
        0
    }
}

/// Always the last option.
#[derive(Clone, Copy, Debug, Default)]
pub struct Last;

impl Chooser for Last {
    fn choose(&mut self, width: usize) -> usize {
        width.saturating_sub(1)
    }
}

/// Uniform choices from a seeded ChaCha8 stream.
#[derive(Clone, Debug)]
pub struct RandomChooser(ChaCha8Rng);

impl RandomChooser {
    pub fn new(seed: u64) -> Self {
        RandomChooser(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl Chooser for RandomChooser {
    fn choose(&mut self, width: usize) -> usize {
        if width <= 1 {
            0
        } else {
            self.0.gen_range(0..width)
        }
    }
}

/// Odometer over decision sequences; each run replays a prefix then extends it with zeros.
#[derive(Debug, Default)]
pub struct Explorer {
    path: Vec<(u32, u32)>,
    pos: usize,
}

impl Explorer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Decisions made so far on the current branch, with their widths.
    pub fn depth(&self) -> usize {
        self.pos
    }

    fn advance(&mut self) -> bool {
        self.path.truncate(self.pos);
        while let Some(last) = self.path.last_mut() {
            if last.0 + 1 < last.1 {
                last.0 += 1;
                self.pos = 0;
                return true;
            }
            self.path.pop();
        }
        false
    }
}

impl Chooser for Explorer {
    fn choose(&mut self, width: usize) -> usize {
        if width <= 1 {
            return 0;
        }
        let i = if self.pos < self.path.len() {
            let (c, w) = self.path[self.pos];
            assert_eq!(w as usize, width, "strategy is not deterministic under replay");
            c as usize
        } else {
            self.path.push((0, width as u32));
            0
        };
        self.pos += 1;
        i
    }
}

/// Runs `run` once per leaf of the decision tree. Returns the leaf count.
pub fn explore<F>(limit: u64, mut run: F) -> Result<u64>
where
    F: FnMut(&mut Explorer) -> Result<()>,
{
    let mut ex = Explorer::new();
    let mut leaves = 0u64;
    loop {
        ex.pos = 0;
        run(&mut ex)?;
        leaves += 1;
        if leaves > limit {
            return Err(Error::Capacity(format!("game tree exceeds {limit} leaves")));
        }
        if !ex.advance() {
            return Ok(leaves);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_product_tree() {
        let n = explore(1000, |ex| {
            ex.choose(2);
            ex.choose(3);
            Ok(())
        })
        .unwrap();
        assert_eq!(n, 6);
    }

    #[test]
    fn counts_ragged_tree() {
        let mut seen = Vec::new();
        let n = explore(1000, |ex| {
            let a = ex.choose(3);
            let b = if a == 1 { ex.choose(2) } else { 0 };
            seen.push((a, b));
            Ok(())
        })
        .unwrap();
        assert_eq!(n, 4);
        assert_eq!(seen, vec![(0, 0), (1, 0), (1, 1), (2, 0)]);
    }

    #[test]
    fn limit_is_enforced() {
        let r = explore(3, |ex| {
            ex.choose(2);
            ex.choose(2);
            Ok(())
        });
        assert!(matches!(r, Err(Error::Capacity(_))));
    }

    #[test]
    fn random_chooser_is_reproducible() {
        let mut a = RandomChooser::new(7);
        let mut b = RandomChooser::new(7);
        let xs: Vec<usize> = (0..20).map(|_| a.choose(5)).collect();
        let ys: Vec<usize> = (0..20).map(|_| b.choose(5)).collect();
        assert_eq!(xs, ys);
    }
}
