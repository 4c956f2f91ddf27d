//! Rankings, comparison pairs, simplified two-object states and the spread
//! statistic.
//!
//! Objects and positions are both numbered `1..=n`. Position 1 is the most
//! desirable. A [`Ranking`] stores the position → object map together with its
//! inverse so both lookups are O(1).

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// A strict total order of `n` objects.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    /// `order[k]` is the object at position `k + 1`.
    order: Vec<usize>,
    /// `positions[o - 1]` is the position of object `o`.
    positions: Vec<usize>,
}

impl Ranking {
    /// The identity ranking: object `k` sits at position `k`.
    pub fn identity(n: usize) -> Self {
        let order: Vec<usize> = (1..=n).collect();
        Ranking {
            positions: order.clone(),
            order,
        }
    }

    /// Builds a ranking from its position → object listing.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut positions = vec![0; n];
        for (k, &obj) in order.iter().enumerate() {
            if obj == 0 || obj > n {
                return Err(input(format!("object {obj} out of range 1..={n}")));
            }
            if positions[obj - 1] != 0 {
                return Err(input(format!("object {obj} appears twice")));
            }
            positions[obj - 1] = k + 1;
        }
        Ok(Ranking { order, positions })
    }

    /// A uniformly random ranking.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (1..=n).collect();
        order.shuffle(rng);
        Self::from_order(order).expect("shuffle of 1..=n is a permutation")
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Position → object listing.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Object ranked at `position`, if the position exists.
    pub fn object_at(&self, position: usize) -> Option<usize> {
        position
            .checked_sub(1)
            .and_then(|k| self.order.get(k))
            .copied()
    }

    /// Position of `object`, if the object exists.
    pub fn position_of(&self, object: usize) -> Option<usize> {
        object
            .checked_sub(1)
            .and_then(|k| self.positions.get(k))
            .copied()
    }

    /// The ranking whose position → object map is this ranking's
    /// object → position map.
    pub fn inverse(&self) -> Ranking {
        Ranking {
            order: self.positions.clone(),
            positions: self.order.clone(),
        }
    }

    /// Exchanges the objects at positions `k` and `k + 1`.
    ///
    /// Panics if `k + 1 > n` or `k == 0`.
    pub fn swap_adjacent(&mut self, k: usize) {
        self.swap_positions(k, k + 1);
    }

    /// Exchanges the objects at two positions. Panics on out-of-range positions.
    pub fn swap_positions(&mut self, x: usize, y: usize) {
        let (ox, oy) = (self.order[x - 1], self.order[y - 1]);
        self.order.swap(x - 1, y - 1);
        self.positions[ox - 1] = y;
        self.positions[oy - 1] = x;
    }

    /// Removes `object` and reinserts it at `target`, shifting the objects in
    /// between by one place. `target` is clamped to `1..=n`.
    pub fn move_object(&mut self, object: usize, target: usize) {
        let from = self.positions[object - 1];
        let to = target.clamp(1, self.len());
        let obj = self.order.remove(from - 1);
        self.order.insert(to - 1, obj);
        let (lo, hi) = (from.min(to), from.max(to));
        for k in lo..=hi {
            self.positions[self.order[k - 1] - 1] = k;
        }
    }

    /// Applies `relabel` (a map from old object ids to new ones) to every
    /// object, keeping positions.
    pub fn relabel(&self, relabel: &Ranking) -> Ranking {
        let order = self.order.iter().map(|&o| relabel.order[o - 1]).collect();
        Ranking::from_order(order).expect("relabelling preserves bijectivity")
    }
}

impl fmt::Debug for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ranking{:?}", self.order)
    }
}

/// Two ranking positions `i < j` used for the stage-two comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PositionPair {
    i: usize,
    j: usize,
}

impl PositionPair {
    pub fn new(i: usize, j: usize, n: usize) -> Result<Self> {
        if !(1 <= i && i < j && j <= n) {
            return Err(input(format!(
                "position pair ({i},{j}) must satisfy 1 <= i < j <= {n}"
            )));
        }
        Ok(PositionPair { i, j })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    /// Gap `j - i`.
    pub fn delta(&self) -> usize {
        self.j - self.i
    }

    /// The pair seen from the bottom of the ranking: `(n+1-j, n+1-i)`.
    pub fn reversed(&self, n: usize) -> PositionPair {
        PositionPair {
            i: n + 1 - self.j,
            j: n + 1 - self.i,
        }
    }

    /// All `n(n-1)/2` pairs in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = PositionPair> {
        (1..=n).flat_map(move |i| (i + 1..=n).map(move |j| PositionPair { i, j }))
    }

    /// The `k`-th pair of [`PositionPair::all`] (0-based).
    pub fn from_index(k: usize, n: usize) -> Option<PositionPair> {
        PositionPair::all(n).nth(k)
    }

    pub fn count(n: usize) -> usize {
        n * n.saturating_sub(1) / 2
    }
}

impl fmt::Display for PositionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Two distinct objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectPair {
    first: usize,
    second: usize,
}

impl ObjectPair {
    pub fn new(first: usize, second: usize, n: usize) -> Result<Self> {
        if first == second || first == 0 || second == 0 || first > n || second > n {
            return Err(input(format!(
                "object pair ({first},{second}) must be two distinct objects in 1..={n}"
            )));
        }
        Ok(ObjectPair { first, second })
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn second(&self) -> usize {
        self.second
    }

    pub fn contains(&self, object: usize) -> bool {
        object == self.first || object == self.second
    }
}

/// Positions `(a, b)` of the two tracked objects in some ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimplifiedState {
    a: usize,
    b: usize,
}

impl SimplifiedState {
    pub fn new(a: usize, b: usize, n: usize) -> Result<Self> {
        if a == b || a == 0 || b == 0 || a > n || b > n {
            return Err(input(format!(
                "state ({a},{b}) must hold two distinct positions in 1..={n}"
            )));
        }
        Ok(SimplifiedState { a, b })
    }

    /// Unchecked constructor for internal enumeration loops.
    pub(crate) fn raw(a: usize, b: usize) -> Self {
        debug_assert!(a != b);
        SimplifiedState { a, b }
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    /// Signed gap `b - a`.
    pub fn gap(&self) -> i64 {
        self.b as i64 - self.a as i64
    }

    /// Whether tracked object 1 is ranked above tracked object 2.
    pub fn first_ahead(&self) -> bool {
        self.a < self.b
    }

    /// Reads the state off a full ranking.
    pub fn of_objects(ranking: &Ranking, objects: ObjectPair) -> Result<Self> {
        let a = ranking
            .position_of(objects.first)
            .ok_or_else(|| input(format!("unknown object {}", objects.first)))?;
        let b = ranking
            .position_of(objects.second)
            .ok_or_else(|| input(format!("unknown object {}", objects.second)))?;
        Ok(SimplifiedState { a, b })
    }
}

impl From<PositionPair> for SimplifiedState {
    fn from(pair: PositionPair) -> Self {
        SimplifiedState {
            a: pair.i,
            b: pair.j,
        }
    }
}

impl fmt::Display for SimplifiedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// Mirror image of a state: position `k` becomes `n + 1 - k`.
pub fn reverse_positions(s: SimplifiedState, n: usize) -> SimplifiedState {
    SimplifiedState {
        a: n + 1 - s.a,
        b: n + 1 - s.b,
    }
}

/// Outcome of the stage-two choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Choice {
    chosen: usize,
    rejected: usize,
}

impl Choice {
    pub fn new(chosen: usize, rejected: usize) -> Result<Self> {
        if chosen == rejected {
            return Err(input("chosen and rejected objects must differ"));
        }
        Ok(Choice { chosen, rejected })
    }

    /// The better-ranked object of `pair` in `ranking`.
    pub fn by_ranking(ranking: &Ranking, pair: ObjectPair) -> Result<Self> {
        let s = SimplifiedState::of_objects(ranking, pair)?;
        Ok(if s.first_ahead() {
            Choice {
                chosen: pair.first,
                rejected: pair.second,
            }
        } else {
            Choice {
                chosen: pair.second,
                rejected: pair.first,
            }
        })
    }

    pub fn chosen(&self) -> usize {
        self.chosen
    }

    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn pair(&self) -> ObjectPair {
        ObjectPair {
            first: self.chosen,
            second: self.rejected,
        }
    }
}

/// Spread between two rankings: how far the chosen object moved up plus how
/// far the rejected object moved down. Positive values mean the second
/// ranking moved toward the choice.
pub fn spread(first: &Ranking, choice: Choice, second: &Ranking) -> Result<i64> {
    let pos = |r: &Ranking, o: usize| {
        r.position_of(o)
            .map(|p| p as i64)
            .ok_or_else(|| input(format!("object {o} not in ranking of size {}", r.len())))
    };
    let chosen_gain = pos(first, choice.chosen)? - pos(second, choice.chosen)?;
    let rejected_loss = pos(second, choice.rejected)? - pos(first, choice.rejected)?;
    Ok(chosen_gain + rejected_loss)
}

/// Orientation of the two-branch simplified spread formula.
///
/// `Standard` is the convention of [`spread`]. `Inverted` swaps the branches
/// and exists only so verification can demonstrate that it is caught.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    #[default]
    Standard,
    Inverted,
}

/// Spread in simplified coordinates.
///
/// The objects at stage-one positions `pair.i()` and `pair.j()` are the tracked
/// objects 1 and 2; `s2` holds their positions in the ranking that drives the
/// choice and `s3` their positions in the final ranking.
pub fn spread_simplified(pair: PositionPair, s2: SimplifiedState, s3: SimplifiedState) -> i64 {
    spread_simplified_with(SignConvention::Standard, pair, s2, s3)
}

pub fn spread_simplified_with(
    convention: SignConvention,
    pair: PositionPair,
    s2: SimplifiedState,
    s3: SimplifiedState,
) -> i64 {
    let delta = pair.delta() as i64;
    let value = if s2.first_ahead() {
        s3.gap() - delta
    } else {
        delta - s3.gap()
    };
    match convention {
        SignConvention::Standard => value,
        SignConvention::Inverted => -value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn st(a: usize, b: usize) -> SimplifiedState {
        SimplifiedState::new(a, b, 12).unwrap()
    }

    #[test]
    fn identical_rankings_have_zero_spread() {
        let r = Ranking::identity(12);
        let c = Choice::new(3, 8).unwrap();
        assert_eq!(spread(&r, c, &r).unwrap(), 0);
    }

    #[test]
    fn chosen_moves_up_one() {
        let r1 = Ranking::identity(12);
        let mut r3 = r1.clone();
        r3.swap_adjacent(6); // object 7 to position 6
        let c = Choice::new(7, 9).unwrap();
        assert_eq!(spread(&r1, c, &r3).unwrap(), 1);
    }

    #[test]
    fn reversal_spread() {
        let r1 = Ranking::identity(12);
        let mut r3 = r1.clone();
        r3.move_object(7, 10);
        r3.move_object(9, 8);
        assert_eq!(r3.position_of(9), Some(8));
        assert_eq!(r3.position_of(7), Some(10));
        let c = Choice::new(9, 7).unwrap();
        assert_eq!(spread(&r1, c, &r3).unwrap(), 4);
    }

    #[test]
    fn unknown_object_is_an_input_error() {
        let r = Ranking::identity(4);
        let c = Choice::new(2, 7).unwrap();
        assert!(matches!(spread(&r, c, &r), Err(crate::Error::Input(_))));
    }

    #[test]
    fn simplified_examples() {
        let pair = PositionPair::new(7, 9, 12).unwrap();
        assert_eq!(spread_simplified(pair, st(1, 2), st(7, 9)), 0);
        assert_eq!(spread_simplified(pair, st(1, 2), st(6, 10)), 2);
        assert_eq!(spread_simplified(pair, st(2, 1), st(6, 10)), -2);
        assert_eq!(
            spread_simplified_with(SignConvention::Inverted, pair, st(1, 2), st(6, 10)),
            -2
        );
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(reverse_positions(st(1, 2), 12), st(12, 11));
        assert_eq!(reverse_positions(st(7, 3), 12), st(6, 10));
        let s = st(4, 9);
        assert_eq!(reverse_positions(reverse_positions(s, 12), 12), s);
    }

    #[test]
    fn invalid_constructions() {
        assert!(SimplifiedState::new(3, 3, 12).is_err());
        assert!(SimplifiedState::new(0, 3, 12).is_err());
        assert!(SimplifiedState::new(1, 13, 12).is_err());
        assert!(PositionPair::new(5, 5, 12).is_err());
        assert!(PositionPair::new(6, 5, 12).is_err());
        assert!(ObjectPair::new(2, 2, 5).is_err());
        assert!(Choice::new(1, 1).is_err());
        assert!(Ranking::from_order(vec![1, 1, 2]).is_err());
        assert!(Ranking::from_order(vec![1, 4, 2]).is_err());
    }

    #[test]
    fn move_object_keeps_inverse_consistent() {
        let mut r = Ranking::identity(6);
        r.move_object(5, 1);
        assert_eq!(r.order(), &[5, 1, 2, 3, 4, 6]);
        r.move_object(5, 99);
        assert_eq!(r.order(), &[1, 2, 3, 4, 6, 5]);
        for p in 1..=6 {
            assert_eq!(r.position_of(r.object_at(p).unwrap()), Some(p));
        }
    }

    #[test]
    fn pair_enumeration() {
        assert_eq!(PositionPair::all(12).count(), 66);
        assert_eq!(PositionPair::count(15), 105);
        assert_eq!(
            PositionPair::from_index(0, 4),
            Some(PositionPair::new(1, 2, 4).unwrap())
        );
        assert_eq!(PositionPair::from_index(6, 4), None);
    }

    fn ranking_strategy(n: usize) -> impl Strategy<Value = Ranking> {
        any::<u64>().prop_map(move |seed| Ranking::random(n, &mut ChaCha8Rng::seed_from_u64(seed)))
    }

    fn full_realization(
        n: usize,
        pair: PositionPair,
        s2: SimplifiedState,
        s3: SimplifiedState,
        seed: u64,
    ) -> (Ranking, Choice, Ranking) {
        // Random completion of three rankings whose tracked objects sit at
        // (i,j), s2 and s3 respectively.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r1 = Ranking::random(n, &mut rng);
        let (x, y) = (
            r1.object_at(pair.i()).unwrap(),
            r1.object_at(pair.j()).unwrap(),
        );
        let place = |s: SimplifiedState, rng: &mut ChaCha8Rng| {
            let mut others: Vec<usize> = (1..=n).filter(|&o| o != x && o != y).collect();
            others.shuffle(rng);
            let mut order = vec![0; n];
            order[s.a() - 1] = x;
            order[s.b() - 1] = y;
            let mut it = others.into_iter();
            for slot in order.iter_mut().filter(|o| **o == 0) {
                *slot = it.next().unwrap();
            }
            Ranking::from_order(order).unwrap()
        };
        let r2 = place(s2, &mut rng);
        let r3 = place(s3, &mut rng);
        let choice = Choice::by_ranking(&r2, ObjectPair::new(x, y, n).unwrap()).unwrap();
        (r1, choice, r3)
    }

    fn states(n: usize) -> Vec<SimplifiedState> {
        (1..=n)
            .flat_map(|a| {
                (1..=n)
                    .filter(move |&b| b != a)
                    .map(move |b| SimplifiedState::raw(a, b))
            })
            .collect()
    }

    #[test]
    fn simplified_agrees_with_full_spread_exhaustively_small_n() {
        for n in 2..=4 {
            for pair in PositionPair::all(n) {
                for &s2 in &states(n) {
                    for &s3 in &states(n) {
                        for seed in 0..4 {
                            let (r1, c, r3) = full_realization(n, pair, s2, s3, seed);
                            assert_eq!(
                                spread(&r1, c, &r3).unwrap(),
                                spread_simplified(pair, s2, s3),
                                "n={n} pair={pair} s2={s2} s3={s3}"
                            );
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn spread_is_antisymmetric(r1 in ranking_strategy(8), r3 in ranking_strategy(8), a in 1usize..=8, b in 1usize..=8) {
            prop_assume!(a != b);
            let c = Choice::new(a, b).unwrap();
            prop_assert_eq!(spread(&r1, c, &r3).unwrap(), -spread(&r3, c, &r1).unwrap());
        }

        #[test]
        fn spread_is_relabel_invariant(r1 in ranking_strategy(7), r3 in ranking_strategy(7), tau in ranking_strategy(7), a in 1usize..=7, b in 1usize..=7) {
            prop_assume!(a != b);
            let c = Choice::new(a, b).unwrap();
            let c_tau = Choice::new(tau.order()[a - 1], tau.order()[b - 1]).unwrap();
            prop_assert_eq!(
                spread(&r1, c, &r3).unwrap(),
                spread(&r1.relabel(&tau), c_tau, &r3.relabel(&tau)).unwrap()
            );
        }

        #[test]
        fn simplified_agrees_with_full_spread(n in 5usize..=6, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let all = states(n);
            let pair = PositionPair::from_index(rng.random_range(0..PositionPair::count(n)), n).unwrap();
            let s2 = all[rng.random_range(0..all.len())];
            let s3 = all[rng.random_range(0..all.len())];
            let (r1, c, r3) = full_realization(n, pair, s2, s3, seed);
            prop_assert_eq!(spread(&r1, c, &r3).unwrap(), spread_simplified(pair, s2, s3));
        }

        #[test]
        fn inverse_is_involution(r in ranking_strategy(9)) {
            prop_assert_eq!(r.inverse().inverse(), r.clone());
            for p in 1..=9 {
                prop_assert_eq!(r.position_of(r.object_at(p).unwrap()), Some(p));
            }
        }
    }
}
