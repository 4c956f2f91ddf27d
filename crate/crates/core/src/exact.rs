//! Exact expected spreads under swap noise.
//!
//! Relabel objects so the subject's true ranking is the identity. If the
//! stage-one comparison positions are `s0 = (i, j)`, the true positions `s1`
//! of the two compared objects have law `M[s0, .]`; given `s1`, the positions
//! `s2` in the ranking that drives the choice and `s3` in the final ranking are
//! independent with laws `M[s1, .]`. The expected spread is therefore
//!
//! ```text
//! E = sum_{s1,s2,s3} M1[s0,s1] Mc[s1,s2] M3[s1,s3] spread(s0, s2, s3)
//!   = sum_{s1} M1[s0,s1] (2 c(s1) - 1) (g(s1) - delta)
//! ```
//!
//! with `c(s1) = P(a2 < b2 | s1)` and `g(s1) = E[b3 - a3 | s1]`. The first line
//! is [`ExactEngine::expected_spread_naive`]; the second, which is what every
//! other routine uses, costs `O(|S|^2)` for a whole table.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{parameter, Error, Result};
use crate::noise::{build_m, kernel, MixMatrixM, StateSpace};
use crate::ranking::{spread_simplified_with, PositionPair, SignConvention, SimplifiedState};

/// Per-state summaries of the choice and final-ranking kernels.
#[derive(Debug, Clone)]
struct StageSummary {
    /// `P(first tracked object ahead at the choice | s1)`.
    ahead: Vec<f64>,
    /// `E[b3 - a3 | s1]`.
    gap: Vec<f64>,
}

impl StageSummary {
    fn new(choice: &MixMatrixM, last: &MixMatrixM) -> Self {
        let space = choice.space();
        let ahead_mask: Vec<f64> = space
            .states()
            .map(|s| if s.first_ahead() { 1.0 } else { 0.0 })
            .collect();
        let gaps: Vec<f64> = space.states().map(|s| s.gap() as f64).collect();
        let dot = |m: &MixMatrixM, v: &[f64], row: usize| -> f64 {
            m.matrix().row(row).iter().zip(v).map(|(x, y)| x * y).sum()
        };
        let d = space.len();
        StageSummary {
            ahead: (0..d).map(|r| dot(choice, &ahead_mask, r)).collect(),
            gap: (0..d).map(|r| dot(last, &gaps, r)).collect(),
        }
    }
}

/// Which choice outcome to condition on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consistency {
    /// The object better ranked in stage one was chosen.
    Consistent,
    /// The worse-ranked object was chosen.
    Reversal,
}

/// Conditional expectation together with the probability of the event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalSpread {
    pub probability: f64,
    pub expected_spread: f64,
}

/// Kernels for the three stages of one arm of an experiment.
#[derive(Debug, Clone)]
pub struct ExactEngine {
    first: Arc<MixMatrixM>,
    choice: Arc<MixMatrixM>,
    last: Arc<MixMatrixM>,
    summary: StageSummary,
    convention: SignConvention,
}

impl ExactEngine {
    /// All three stages share noise weight `p`.
    pub fn null(n: usize, p: f64) -> Result<Self> {
        let m = Arc::new(build_m(n, p)?);
        Ok(Self::from_kernels(m.clone(), m.clone(), m))
    }

    /// Explicit kernels for the first ranking, the choice and the second
    /// ranking. All must share the same object count.
    pub fn from_kernels(
        first: Arc<MixMatrixM>,
        choice: Arc<MixMatrixM>,
        last: Arc<MixMatrixM>,
    ) -> Self {
        assert_eq!(first.n(), choice.n());
        assert_eq!(first.n(), last.n());
        let summary = StageSummary::new(&choice, &last);
        ExactEngine {
            first,
            choice,
            last,
            summary,
            convention: SignConvention::Standard,
        }
    }

    pub fn with_convention(mut self, convention: SignConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn n(&self) -> usize {
        self.first.n()
    }

    fn space(&self) -> StateSpace {
        self.first.space()
    }

    fn sign(&self) -> f64 {
        match self.convention {
            SignConvention::Standard => 1.0,
            SignConvention::Inverted => -1.0,
        }
    }

    fn check_pair(&self, pair: PositionPair) -> Result<()> {
        if pair.j() > self.n() {
            return Err(parameter(format!(
                "pair {pair} does not fit {} objects",
                self.n()
            )));
        }
        Ok(())
    }

    /// Expected spread when the comparison uses stage-one positions `pair`.
    pub fn expected_spread(&self, pair: PositionPair) -> Result<f64> {
        self.check_pair(pair)?;
        let space = self.space();
        let row = self.first.matrix().row(space.index(pair.into()));
        let delta = pair.delta() as f64;
        let total: f64 = row
            .iter()
            .zip(self.summary.ahead.iter().zip(&self.summary.gap))
            .map(|(w, (c, g))| w * (2.0 * c - 1.0) * (g - delta))
            .sum();
        Ok(self.sign() * total)
    }

    /// Same quantity as [`Self::expected_spread`] by the full sum over
    /// `|S|^3` outcome triples.
    pub fn expected_spread_naive(&self, pair: PositionPair) -> Result<f64> {
        self.check_pair(pair)?;
        let space = self.space();
        let (m1, mc, m3) = (
            self.first.matrix(),
            self.choice.matrix(),
            self.last.matrix(),
        );
        let s0 = space.index(pair.into());
        let d = space.len();
        let mut total = 0.0;
        for k1 in 0..d {
            let w1 = m1[(s0, k1)];
            if w1 == 0.0 {
                continue;
            }
            for k2 in 0..d {
                let w2 = mc[(k1, k2)];
                if w2 == 0.0 {
                    continue;
                }
                let s2 = space.state(k2);
                for k3 in 0..d {
                    let s3 = space.state(k3);
                    let value = spread_simplified_with(self.convention, pair, s2, s3);
                    total += w1 * w2 * m3[(k1, k3)] * value as f64;
                }
            }
        }
        Ok(total)
    }

    /// `E[spread | event]` and `P(event)`.
    pub fn conditional(&self, pair: PositionPair, event: Consistency) -> Result<ConditionalSpread> {
        self.check_pair(pair)?;
        let space = self.space();
        let row = self.first.matrix().row(space.index(pair.into()));
        let delta = pair.delta() as f64;
        let (mut mass, mut weighted) = (0.0, 0.0);
        for (w, (c, g)) in row
            .iter()
            .zip(self.summary.ahead.iter().zip(&self.summary.gap))
        {
            let (prob, value) = match event {
                Consistency::Consistent => (*c, g - delta),
                Consistency::Reversal => (1.0 - c, delta - g),
            };
            mass += w * prob;
            weighted += w * prob * value;
        }
        if mass <= 0.0 {
            return Err(Error::Domain(format!(
                "{event:?} choice at {pair} has probability zero"
            )));
        }
        Ok(ConditionalSpread {
            probability: mass,
            expected_spread: self.sign() * weighted / mass,
        })
    }

    /// Expected spread when the compared objects have true positions
    /// `truth` and are fixed in advance rather than picked by position.
    pub fn expected_spread_objects(&self, truth: SimplifiedState) -> Result<f64> {
        let space = self.space();
        space.check(truth)?;
        let t = space.index(truth);
        let gap_first: f64 = self
            .first
            .matrix()
            .row(t)
            .iter()
            .zip(space.states())
            .map(|(w, s)| w * s.gap() as f64)
            .sum();
        let ahead = self.summary.ahead[t];
        Ok(self.sign() * (2.0 * ahead - 1.0) * (self.summary.gap[t] - gap_first))
    }

    /// Every position pair, computed in parallel.
    pub fn table(&self) -> ExpectedSpreadTable {
        let n = self.n();
        let pairs: Vec<PositionPair> = PositionPair::all(n).collect();
        let values: Vec<f64> = pairs
            .par_iter()
            .map(|&pair| self.expected_spread(pair).expect("pair in range"))
            .collect();
        ExpectedSpreadTable {
            n,
            p: self.first.p(),
            values: pairs.into_iter().zip(values).collect(),
        }
    }

    /// Average of [`Self::expected_spread`] over all position pairs.
    pub fn average_over_pairs(&self) -> f64 {
        let t = self.table();
        t.sum() / t.len() as f64
    }
}

/// Expected spread for every position pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedSpreadTable {
    n: usize,
    p: f64,
    values: BTreeMap<PositionPair, f64>,
}

#[derive(Serialize)]
struct TableRow {
    i: usize,
    j: usize,
    expected_spread: f64,
    rounded: String,
}

#[derive(Serialize)]
struct TableJson {
    n: usize,
    p: f64,
    sum: f64,
    entries: Vec<TableRow>,
}

impl ExpectedSpreadTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, pair: PositionPair) -> Option<f64> {
        self.values.get(&pair).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PositionPair, f64)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }

    pub fn sum(&self) -> f64 {
        self.values.values().sum()
    }

    fn rows(&self) -> Vec<TableRow> {
        self.iter()
            .map(|(pair, v)| TableRow {
                i: pair.i(),
                j: pair.j(),
                expected_spread: v,
                rounded: round3(v),
            })
            .collect()
    }

    /// CSV with header `i,j,expected_spread,rounded`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TableJson {
            n: self.n,
            p: self.p,
            sum: self.sum(),
            entries: self.rows(),
        })
        .expect("table serializes")
    }
}

/// Three-decimal display value, rounding half away from zero.
pub fn round3(value: f64) -> String {
    let r = (value * 1000.0).round() / 1000.0;
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.3}")
}

fn check_weight(p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(parameter(format!(
            "noise weight must lie in [0, 1), got {p}"
        )));
    }
    Ok(())
}

pub fn expected_spread_positions(n: usize, p: f64, pair: PositionPair) -> Result<f64> {
    check_weight(p)?;
    ExactEngine::null(n, p)?.expected_spread(pair)
}

pub fn expected_spread_table(n: usize, p: f64) -> Result<ExpectedSpreadTable> {
    check_weight(p)?;
    Ok(ExactEngine::null(n, p)?.table())
}

/// Fixed pair of objects with the given true positions, null model.
pub fn expected_spread_objects_null(n: usize, p: f64, truth: SimplifiedState) -> Result<f64> {
    check_weight(p)?;
    ExactEngine::null(n, p)?.expected_spread_objects(truth)
}

pub fn expected_spread_conditional(
    n: usize,
    p: f64,
    pair: PositionPair,
    event: Consistency,
) -> Result<f64> {
    check_weight(p)?;
    Ok(ExactEngine::null(n, p)?
        .conditional(pair, event)?
        .expected_spread)
}

/// Design and arm for the two-weight model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoParamDesign {
    /// rank, choose, rank at fixed positions.
    E0Experimental(PositionPair),
    /// rank, rank, choose at fixed positions; both rankings use the larger
    /// weight.
    E0Control(PositionPair),
    /// Experimental minus control.
    E0Difference(PositionPair),
    /// Uniformly random position pair per subject.
    E2,
    /// Every position pair once, identical subjects.
    E3,
    /// Fixed objects with the given true positions.
    E1Objects(SimplifiedState),
}

/// Exact expectations when the first ranking has noise weight `big_p` and the
/// choice and final ranking have weight `p`.
#[derive(Debug, Clone)]
pub struct TwoParamEngine {
    experimental: ExactEngine,
    control: ExactEngine,
}

impl TwoParamEngine {
    pub fn new(n: usize, p: f64, big_p: f64) -> Result<Self> {
        check_weight(p)?;
        if !(p..=1.0).contains(&big_p) {
            return Err(parameter(format!(
                "need p <= P <= 1, got p = {p}, P = {big_p}"
            )));
        }
        let small = Arc::new(build_m(n, p)?);
        let large = Arc::new(kernel(n, big_p)?);
        Ok(TwoParamEngine {
            experimental: ExactEngine::from_kernels(large.clone(), small.clone(), small.clone()),
            control: ExactEngine::from_kernels(large.clone(), small, large),
        })
    }

    pub fn expected_spread(&self, design: TwoParamDesign) -> Result<f64> {
        match design {
            TwoParamDesign::E0Experimental(pair) => self.experimental.expected_spread(pair),
            TwoParamDesign::E0Control(pair) => self.control.expected_spread(pair),
            TwoParamDesign::E0Difference(pair) => Ok(
                self.experimental.expected_spread(pair)? - self.control.expected_spread(pair)?
            ),
            TwoParamDesign::E2 | TwoParamDesign::E3 => Ok(self.experimental.average_over_pairs()),
            TwoParamDesign::E1Objects(truth) => self.experimental.expected_spread_objects(truth),
        }
    }
}

pub fn expected_spread_2p(n: usize, p: f64, big_p: f64, design: TwoParamDesign) -> Result<f64> {
    TwoParamEngine::new(n, p, big_p)?.expected_spread(design)
}
