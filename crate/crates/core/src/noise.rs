//! Adjacent-swap noise.
//!
//! A noisy ranking is produced from a true ranking by flipping a coin with
//! heads probability `p` and, on every heads, swapping a uniformly chosen pair
//! of adjacent positions; the first tails stops the process. The number of
//! swaps is geometric with `P(K = k) = (1 - p) p^k`.
//!
//! Tracking only the two comparison objects lumps the process onto the
//! `n(n-1)` ordered position pairs. [`build_q`] is the one-swap transition
//! matrix of that lumped chain and [`build_m`] the full noise kernel
//! `M = (1 - p)(I - pQ)^{-1}`.

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{input, parameter, Result};
use crate::ranking::{Choice, ObjectPair, Ranking, SimplifiedState};

/// Coin-flip adjacent-swap noise with heads probability `p < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapNoise {
    p: f64,
}

impl SwapNoise {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(parameter(format!(
                "swap noise weight must lie in [0, 1), got {p}"
            )));
        }
        Ok(SwapNoise { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Perturbs `truth` by a geometric number of random adjacent swaps.
    pub fn sample<R: Rng + ?Sized>(&self, truth: &Ranking, rng: &mut R) -> Ranking {
        let mut out = truth.clone();
        let n = truth.len();
        if n < 2 {
            return out;
        }
        while rng.random_bool(self.p) {
            out.swap_adjacent(rng.random_range(1..n));
        }
        out
    }
}

/// Samples a noisy ranking around `truth`.
pub fn sample_noisy_ranking<R: Rng + ?Sized>(
    truth: &Ranking,
    noise: SwapNoise,
    rng: &mut R,
) -> Ranking {
    noise.sample(truth, rng)
}

/// Samples a full noisy ranking and picks the better-ranked object of `pair`.
pub fn sample_choice<R: Rng + ?Sized>(
    truth: &Ranking,
    pair: ObjectPair,
    noise: SwapNoise,
    rng: &mut R,
) -> Result<Choice> {
    let ranking = noise.sample(truth, rng);
    Choice::by_ranking(&ranking, pair)
}

/// Indexing of the `n(n-1)` simplified states.
///
/// States are ordered lexicographically by `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    n: usize,
}

impl StateSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(parameter(format!("need at least 2 objects, got {n}")));
        }
        Ok(StateSpace { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * (self.n - 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, s: SimplifiedState) -> usize {
        let (a, b) = (s.a(), s.b());
        debug_assert!(a <= self.n && b <= self.n);
        (a - 1) * (self.n - 1) + if b > a { b - 2 } else { b - 1 }
    }

    pub fn state(&self, index: usize) -> SimplifiedState {
        let a = index / (self.n - 1) + 1;
        let r = index % (self.n - 1) + 1;
        let b = if r >= a { r + 1 } else { r };
        SimplifiedState::raw(a, b)
    }

    pub fn states(&self) -> impl Iterator<Item = SimplifiedState> + '_ {
        (0..self.len()).map(|k| self.state(k))
    }

    pub(crate) fn check(&self, s: SimplifiedState) -> Result<()> {
        if s.a() > self.n || s.b() > self.n {
            return Err(input(format!("state {s} is outside 1..={}", self.n)));
        }
        Ok(())
    }
}

/// Where position `x` goes when positions `k` and `k + 1` are exchanged.
pub(crate) fn swap_image(x: usize, k: usize) -> usize {
    if x == k {
        k + 1
    } else if x == k + 1 {
        k
    } else {
        x
    }
}

/// One-swap transition matrix of the lumped chain.
///
/// Entries are stored as integer counts out of the `n - 1` adjacent swaps.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapMatrixQ {
    space: StateSpace,
    counts: Vec<u32>,
}

impl SwapMatrixQ {
    pub fn space(&self) -> StateSpace {
        self.space
    }

    /// Number of adjacent swaps (out of `n - 1`) that take `from` to `to`.
    pub fn count(&self, from: SimplifiedState, to: SimplifiedState) -> u32 {
        let d = self.space.len();
        self.counts[self.space.index(from) * d + self.space.index(to)]
    }

    pub fn get(&self, from: SimplifiedState, to: SimplifiedState) -> f64 {
        f64::from(self.count(from, to)) / (self.space.n() - 1) as f64
    }

    /// Raw counts, row-major.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let d = self.space.len();
        let scale = (self.space.n() - 1) as f64;
        DMatrix::from_fn(d, d, |r, c| f64::from(self.counts[r * d + c]) / scale)
    }
}

pub fn build_q(n: usize) -> Result<SwapMatrixQ> {
    let space = StateSpace::new(n)?;
    let d = space.len();
    let mut counts = vec![0u32; d * d];
    for (row, s) in space.states().enumerate() {
        for k in 1..n {
            let t = SimplifiedState::raw(swap_image(s.a(), k), swap_image(s.b(), k));
            counts[row * d + space.index(t)] += 1;
        }
    }
    Ok(SwapMatrixQ { space, counts })
}

/// Noise kernel on simplified states: `M[s, t]` is the probability that the
/// swap process takes the tracked objects from positions `s` to `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixMatrixM {
    space: StateSpace,
    /// Heads probability, or `None` for the fully random limit.
    p: Option<f64>,
    entries: DMatrix<f64>,
}

impl MixMatrixM {
    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    /// Noise weight; `1.0` for the uniform limit.
    pub fn p(&self) -> f64 {
        self.p.unwrap_or(1.0)
    }

    pub fn get(&self, from: SimplifiedState, to: SimplifiedState) -> f64 {
        self.entries[(self.space.index(from), self.space.index(to))]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Writes `from_a,from_b,to_a,to_b,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().from_writer(out);
        w.write_record(["from_a", "from_b", "to_a", "to_b", "value"])?;
        for (r, s) in self.space.states().enumerate() {
            for (c, t) in self.space.states().enumerate() {
                w.write_record([
                    s.a().to_string(),
                    s.b().to_string(),
                    t.a().to_string(),
                    t.b().to_string(),
                    self.entries[(r, c)].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Solves `(I - pQ) M = (1 - p) I` by dense LU.
pub fn build_m(n: usize, p: f64) -> Result<MixMatrixM> {
    SwapNoise::new(p)?;
    let q = build_q(n)?;
    let d = q.space.len();
    let system = DMatrix::<f64>::identity(d, d) - q.to_matrix() * p;
    let rhs = DMatrix::<f64>::identity(d, d) * (1.0 - p);
    let entries = system
        .lu()
        .solve(&rhs)
        .expect("I - pQ is strictly diagonally dominant for p < 1");
    Ok(MixMatrixM {
        space: q.space,
        p: Some(p),
        entries,
    })
}

/// The `p -> 1` limit: every row uniform over all states.
pub fn uniform_limit_m(n: usize) -> Result<MixMatrixM> {
    let space = StateSpace::new(n)?;
    let d = space.len();
    Ok(MixMatrixM {
        space,
        p: None,
        entries: DMatrix::from_element(d, d, 1.0 / d as f64),
    })
}

/// Kernel for weight `p`, switching to [`uniform_limit_m`] at `p == 1`.
pub fn kernel(n: usize, p: f64) -> Result<MixMatrixM> {
    if p == 1.0 {
        uniform_limit_m(n)
    } else {
        build_m(n, p)
    }
}
