//! Exhaustive enumerations over full rankings.
//!
//! These are independent of the lumped state-space machinery in
//! [`crate::exact`] and serve as its oracle on small object counts.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{parameter, Error, Result};
use crate::ranking::{spread, Choice, ObjectPair, PositionPair, Ranking};

/// Largest object count accepted by the triple enumerations.
pub const MAX_ENUMERATION_OBJECTS: usize = 6;

/// Largest object count accepted by [`brute_force_expected_spread`].
pub const MAX_BRUTE_FORCE_OBJECTS: usize = 5;

/// Probability mass kept when truncating the geometric swap count.
pub const TAIL_CUTOFF: f64 = 1e-12;

/// All `n!` rankings in lexicographic order of their position listing.
pub fn all_rankings(n: usize) -> Vec<Ranking> {
    let mut order: Vec<usize> = (1..=n).collect();
    let mut out = Vec::new();
    loop {
        out.push(Ranking::from_order(order.clone()).expect("permutation"));
        // next lexicographic permutation
        let Some(k) = (0..n.saturating_sub(1))
            .rev()
            .find(|&k| order[k] < order[k + 1])
        else {
            break;
        };
        let l = (k + 1..n)
            .rev()
            .find(|&l| order[k] < order[l])
            .expect("exists");
        order.swap(k, l);
        order[k + 1..].reverse();
    }
    out
}

fn capacity(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::Capacity(format!(
            "exhaustive enumeration supports at most {max} objects, got {n}"
        )));
    }
    if n < 2 {
        return Err(parameter(format!("need at least 2 objects, got {n}")));
    }
    Ok(())
}

/// A probability distribution over all rankings of `n` objects.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingDistribution {
    n: usize,
    rankings: Vec<Ranking>,
    probs: Vec<f64>,
}

impl RankingDistribution {
    /// `probs[k]` is the probability of the `k`-th ranking of [`all_rankings`].
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        capacity(n, MAX_ENUMERATION_OBJECTS)?;
        let rankings = all_rankings(n);
        if probs.len() != rankings.len() {
            return Err(parameter(format!(
                "expected {} probabilities, got {}",
                rankings.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|&x| x.is_nan() || x < 0.0) {
            return Err(parameter("probabilities must be non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(parameter(format!("probabilities sum to {total}, not 1")));
        }
        Ok(RankingDistribution { n, rankings, probs })
    }

    pub fn point_mass(ranking: &Ranking) -> Result<Self> {
        let n = ranking.len();
        capacity(n, MAX_ENUMERATION_OBJECTS)?;
        let rankings = all_rankings(n);
        let probs = rankings
            .iter()
            .map(|r| if r == ranking { 1.0 } else { 0.0 })
            .collect();
        Ok(RankingDistribution { n, rankings, probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        capacity(n, MAX_ENUMERATION_OBJECTS)?;
        let rankings = all_rankings(n);
        let w = 1.0 / rankings.len() as f64;
        let probs = vec![w; rankings.len()];
        Ok(RankingDistribution { n, rankings, probs })
    }

    /// A random distribution: exponential weights with roughly a third of the
    /// rankings given zero mass.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        capacity(n, MAX_ENUMERATION_OBJECTS)?;
        let rankings = all_rankings(n);
        let mut weights: Vec<f64> = rankings
            .iter()
            .map(|_| {
                if rng.random_bool(0.3) {
                    0.0
                } else {
                    -(1.0 - rng.random::<f64>()).ln()
                }
            })
            .collect();
        if weights.iter().all(|&w| w == 0.0) {
            weights[0] = 1.0;
        }
        let total: f64 = weights.iter().sum();
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(RankingDistribution { n, rankings, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ranking, f64)> + '_ {
        self.rankings.iter().zip(self.probs.iter().copied())
    }

    /// Rankings carrying positive probability.
    fn support(&self) -> Vec<(&Ranking, f64)> {
        self.iter().filter(|(_, w)| *w > 0.0).collect()
    }

    pub fn probability(&self, ranking: &Ranking) -> f64 {
        self.iter()
            .find(|(r, _)| *r == ranking)
            .map(|(_, w)| w)
            .unwrap_or(0.0)
    }
}

/// Law of the swap-noise ranking around `truth`, with the geometric swap
/// count truncated once the remaining mass falls below [`TAIL_CUTOFF`].
pub fn swap_noise_distribution(truth: &Ranking, p: f64) -> Result<RankingDistribution> {
    let n = truth.len();
    capacity(n, MAX_ENUMERATION_OBJECTS)?;
    if !(0.0..1.0).contains(&p) {
        return Err(parameter(format!(
            "noise weight must lie in [0, 1), got {p}"
        )));
    }
    let rankings = all_rankings(n);
    let index: HashMap<&[usize], usize> = rankings
        .iter()
        .enumerate()
        .map(|(k, r)| (r.order(), k))
        .collect();
    let successors: Vec<Vec<usize>> = rankings
        .iter()
        .map(|r| {
            (1..n)
                .map(|k| {
                    let mut s = r.clone();
                    s.swap_adjacent(k);
                    index[s.order()]
                })
                .collect()
        })
        .collect();
    let mut current = vec![0.0; rankings.len()];
    current[index[truth.order()]] = 1.0;
    let mut probs = vec![0.0; rankings.len()];
    let mut weight = 1.0 - p; // P(K = k)
    let mut tail = p; // P(K > k)
    loop {
        for (acc, x) in probs.iter_mut().zip(&current) {
            *acc += weight * x;
        }
        if tail < TAIL_CUTOFF {
            break;
        }
        let mut next = vec![0.0; rankings.len()];
        let share = 1.0 / (n - 1) as f64;
        for (from, &mass) in current.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &to in &successors[from] {
                next[to] += mass * share;
            }
        }
        current = next;
        weight *= p;
        tail *= p;
    }
    Ok(RankingDistribution { n, rankings, probs })
}

/// `E[spread]` when the comparison objects are those at stage-one positions
/// `pair` (or the fixed `objects`), by summing over every triple of rankings.
fn triple_expectation(
    first: &RankingDistribution,
    choice: &RankingDistribution,
    last: &RankingDistribution,
    select: impl Fn(&Ranking) -> ObjectPair,
) -> f64 {
    let (s1, s2, s3) = (first.support(), choice.support(), last.support());
    let mut total = 0.0;
    for &(r1, w1) in &s1 {
        let objects = select(r1);
        for &(r2, w2) in &s2 {
            let c = Choice::by_ranking(r2, objects).expect("objects exist");
            for &(r3, w3) in &s3 {
                let value = spread(r1, c, r3).expect("objects exist");
                total += w1 * w2 * w3 * value as f64;
            }
        }
    }
    total
}

fn objects_at(pair: PositionPair) -> impl Fn(&Ranking) -> ObjectPair {
    move |r: &Ranking| {
        ObjectPair::new(
            r.object_at(pair.i()).expect("position exists"),
            r.object_at(pair.j()).expect("position exists"),
            r.len(),
        )
        .expect("distinct positions hold distinct objects")
    }
}

/// Null-model expected spread at stage-one positions `pair`, by enumerating
/// all `(n!)^3` ranking triples of the swap process around the identity.
pub fn brute_force_expected_spread(n: usize, p: f64, pair: PositionPair) -> Result<f64> {
    capacity(n, MAX_BRUTE_FORCE_OBJECTS)?;
    if pair.j() > n {
        return Err(parameter(format!("pair {pair} does not fit {n} objects")));
    }
    let dist = swap_noise_distribution(&Ranking::identity(n), p)?;
    Ok(triple_expectation(&dist, &dist, &dist, objects_at(pair)))
}

/// The control-group-free designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prop1Design {
    /// Same pre-selected objects for everyone.
    E1(ObjectPair),
    /// Position pair drawn uniformly per subject.
    E2,
    /// Every position pair used once; subjects identical.
    E3,
}

/// Expected (average) spread of a design when every ranking, including the
/// one that drives the choice, is drawn independently from `dist`.
pub fn prop1_oracle(dist: &RankingDistribution, design: Prop1Design) -> Result<f64> {
    let n = dist.n();
    match design {
        Prop1Design::E1(objects) => {
            if objects.first() > n || objects.second() > n {
                return Err(parameter("object pair does not fit the distribution"));
            }
            Ok(triple_expectation(dist, dist, dist, move |_| objects))
        }
        Prop1Design::E2 | Prop1Design::E3 => {
            let pairs: Vec<PositionPair> = PositionPair::all(n).collect();
            let total: f64 = pairs
                .iter()
                .map(|&pair| triple_expectation(dist, dist, dist, objects_at(pair)))
                .sum();
            Ok(total / pairs.len() as f64)
        }
    }
}

/// Expected average spread of E3 with one distribution per subject and a
/// uniformly random assignment of subjects to position pairs.
pub fn prop1_oracle_e3_subjects(subjects: &[RankingDistribution]) -> Result<f64> {
    let Some(first) = subjects.first() else {
        return Err(parameter("no subjects"));
    };
    let n = first.n();
    let pairs: Vec<PositionPair> = PositionPair::all(n).collect();
    if subjects.len() != pairs.len() || subjects.iter().any(|d| d.n() != n) {
        return Err(parameter(format!(
            "E3 with {n} objects needs exactly {} subjects of the same size",
            pairs.len()
        )));
    }
    // Each subject meets each pair with probability 1 / |pairs|.
    let mut total = 0.0;
    for dist in subjects {
        for &pair in &pairs {
            total += triple_expectation(dist, dist, dist, objects_at(pair));
        }
    }
    Ok(total / (pairs.len() * pairs.len()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactEngine;
    use crate::noise::build_m;
    use crate::ranking::SimplifiedState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn enumeration_sizes() {
        assert_eq!(all_rankings(1).len(), 1);
        assert_eq!(all_rankings(4).len(), 24);
        assert_eq!(all_rankings(5).len(), 120);
        assert_eq!(all_rankings(3)[0], Ranking::identity(3));
        assert_eq!(all_rankings(3)[5].order(), &[3, 2, 1]);
    }

    #[test]
    fn distribution_validation() {
        assert!(RankingDistribution::new(3, vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.1]).is_err());
        assert!(RankingDistribution::new(3, vec![1.0; 5]).is_err());
        assert!(matches!(
            RankingDistribution::uniform(7),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn swap_distribution_sums_to_one() {
        for n in 2..=5 {
            let d = swap_noise_distribution(&Ranking::identity(n), 0.8).unwrap();
            let total: f64 = d.iter().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn lumping_matches_kernel() {
        for n in 2..=5 {
            for p in [0.3, 0.8] {
                let m = build_m(n, p).unwrap();
                let space = m.space();
                for start in space.states() {
                    // tracked objects 1 and 2 placed at `start`
                    let mut order = vec![0; n];
                    order[start.a() - 1] = 1;
                    order[start.b() - 1] = 2;
                    let mut rest = 3..;
                    for o in order.iter_mut().filter(|o| **o == 0) {
                        *o = rest.next().unwrap();
                    }
                    let truth = Ranking::from_order(order).unwrap();
                    let dist = swap_noise_distribution(&truth, p).unwrap();
                    let mut lumped = vec![0.0; space.len()];
                    let tracked = ObjectPair::new(1, 2, n).unwrap();
                    for (r, w) in dist.iter() {
                        lumped[space.index(SimplifiedState::of_objects(r, tracked).unwrap())] += w;
                    }
                    for t in space.states() {
                        assert!((lumped[space.index(t)] - m.get(start, t)).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_has_same_law() {
        for n in 2..=4 {
            let d = swap_noise_distribution(&Ranking::identity(n), 0.8).unwrap();
            for (r, w) in d.iter() {
                assert!((w - d.probability(&r.inverse())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn brute_force_matches_engine() {
        for (n, p, i, j) in [(3, 0.5, 1, 2), (4, 0.8, 1, 4)] {
            let pair = PositionPair::new(i, j, n).unwrap();
            let oracle = brute_force_expected_spread(n, p, pair).unwrap();
            let engine = ExactEngine::null(n, p)
                .unwrap()
                .expected_spread(pair)
                .unwrap();
            assert!((oracle - engine).abs() < 1e-9, "{oracle} vs {engine}");
        }
        let pair = PositionPair::new(1, 3, 4).unwrap();
        assert_eq!(brute_force_expected_spread(4, 0.0, pair).unwrap(), 0.0);
        assert!(matches!(
            brute_force_expected_spread(6, 0.5, PositionPair::new(1, 2, 6).unwrap()),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn prop1_examples() {
        let point = RankingDistribution::point_mass(&Ranking::identity(3)).unwrap();
        for design in [
            Prop1Design::E1(ObjectPair::new(1, 3, 3).unwrap()),
            Prop1Design::E2,
            Prop1Design::E3,
        ] {
            assert_eq!(prop1_oracle(&point, design).unwrap(), 0.0);
        }
        let uniform = RankingDistribution::uniform(4).unwrap();
        assert!(prop1_oracle(&uniform, Prop1Design::E2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn prop1_random_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.random_range(2..=4);
            let dist = RankingDistribution::random(n, &mut rng).unwrap();
            let objects = ObjectPair::new(1, n, n).unwrap();
            for design in [Prop1Design::E1(objects), Prop1Design::E2, Prop1Design::E3] {
                assert!(prop1_oracle(&dist, design).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn positional_design_is_not_zero_in_general() {
        // fixed positions are exactly what the control-group-free designs avoid
        let dist = swap_noise_distribution(&Ranking::identity(4), 0.8).unwrap();
        let v = triple_expectation(
            &dist,
            &dist,
            &dist,
            objects_at(PositionPair::new(1, 2, 4).unwrap()),
        );
        assert!(v.abs() > 1e-3);
    }

    #[test]
    fn heterogeneous_e3() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let subjects: Vec<_> = (0..6)
            .map(|_| RankingDistribution::random(4, &mut rng).unwrap())
            .collect();
        assert!(prop1_oracle_e3_subjects(&subjects).unwrap().abs() < 1e-12);
        assert!(prop1_oracle_e3_subjects(&subjects[..5]).is_err());
    }
}
