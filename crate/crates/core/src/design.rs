//! Simulated free-choice experiments.
//!
//! Every subject draws from its own ChaCha stream derived from the master
//! seed and the subject index, so a run is reproducible regardless of how
//! subjects are scheduled across threads.

use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, parameter, Result};
use crate::noise::SwapNoise;
use crate::ranking::{spread, Choice, ObjectPair, PositionPair, Ranking};

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for one subject.
pub fn subject_rng(seed: u64, subject: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(subject as u64);
    rng
}

const ASSIGNMENT_SALT: u64 = 0xE3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    /// Fixed comparison positions for everyone.
    Classic,
    /// Experimental arm rank-choose-rank, control arm rank-rank-choose.
    E0,
    /// Fixed comparison objects.
    E1,
    /// Uniformly random position pair per subject.
    E2,
    /// Each position pair assigned to exactly one subject.
    E3,
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DesignKind::Classic => "classic",
            DesignKind::E0 => "e0",
            DesignKind::E1 => "e1",
            DesignKind::E2 => "e2",
            DesignKind::E3 => "e3",
        };
        f.write_str(s)
    }
}

/// A validated experimental protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignConfig {
    kind: DesignKind,
    n: usize,
    positions: Option<PositionPair>,
    objects: Option<ObjectPair>,
    subjects: usize,
}

impl DesignConfig {
    pub fn classic(n: usize, pair: PositionPair, subjects: usize) -> Result<Self> {
        Self::with_positions(DesignKind::Classic, n, pair, subjects)
    }

    /// Subjects with even index go to the experimental arm, odd to control.
    pub fn e0(n: usize, pair: PositionPair, subjects: usize) -> Result<Self> {
        Self::with_positions(DesignKind::E0, n, pair, subjects)
    }

    pub fn e1(n: usize, objects: ObjectPair, subjects: usize) -> Result<Self> {
        check_objects(n)?;
        if objects.first() > n || objects.second() > n {
            return Err(input(format!("object pair does not fit {n} objects")));
        }
        Ok(DesignConfig {
            kind: DesignKind::E1,
            n,
            positions: None,
            objects: Some(objects),
            subjects: nonzero(subjects)?,
        })
    }

    pub fn e2(n: usize, subjects: usize) -> Result<Self> {
        check_objects(n)?;
        Ok(DesignConfig {
            kind: DesignKind::E2,
            n,
            positions: None,
            objects: None,
            subjects: nonzero(subjects)?,
        })
    }

    /// One subject per position pair.
    pub fn e3(n: usize) -> Result<Self> {
        check_objects(n)?;
        Ok(DesignConfig {
            kind: DesignKind::E3,
            n,
            positions: None,
            objects: None,
            subjects: PositionPair::count(n),
        })
    }

    fn with_positions(
        kind: DesignKind,
        n: usize,
        pair: PositionPair,
        subjects: usize,
    ) -> Result<Self> {
        check_objects(n)?;
        if pair.j() > n {
            return Err(input(format!("pair {pair} does not fit {n} objects")));
        }
        Ok(DesignConfig {
            kind,
            n,
            positions: Some(pair),
            objects: None,
            subjects: nonzero(subjects)?,
        })
    }

    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn subjects(&self) -> usize {
        self.subjects
    }

    pub fn positions(&self) -> Option<PositionPair> {
        self.positions
    }

    pub fn objects(&self) -> Option<ObjectPair> {
        self.objects
    }

    /// Same protocol with a different subject count. E3 ignores the request.
    pub fn with_subjects(&self, subjects: usize) -> Result<Self> {
        let mut out = self.clone();
        if self.kind != DesignKind::E3 {
            out.subjects = nonzero(subjects)?;
        }
        Ok(out)
    }

    pub fn arm(&self, subject: usize) -> Arm {
        match self.kind {
            DesignKind::E0 if subject % 2 == 1 => Arm::Control,
            DesignKind::E0 => Arm::Experimental,
            _ => Arm::None,
        }
    }
}

fn check_objects(n: usize) -> Result<()> {
    if n < 2 {
        return Err(parameter(format!("need at least 2 objects, got {n}")));
    }
    Ok(())
}

fn nonzero(subjects: usize) -> Result<usize> {
    if subjects == 0 {
        return Err(parameter("need at least one subject"));
    }
    Ok(subjects)
}

/// How a simulated subject produces rankings and choices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubjectModel {
    /// Every stage is swap noise with weight `p` around a fixed truth.
    Null { p: f64 },
    /// The first ranking uses weight `big_p`; the choice and the second
    /// ranking use `p`. The E0 control group ranks twice with `big_p`.
    TwoParam { p: f64, big_p: f64 },
    /// Null stages, but a final ranking that contradicts the choice has the
    /// two compared objects swapped back.
    Memory { p: f64 },
    /// After a choice with stage-one gap at most `threshold`, the truth moves
    /// the chosen object up and the rejected object down by `shift` places.
    DissonanceShift {
        p: f64,
        shift: usize,
        threshold: usize,
    },
}

impl SubjectModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SubjectModel::Null { p } | SubjectModel::Memory { p } => {
                SwapNoise::new(p)?;
            }
            SubjectModel::TwoParam { p, big_p } => {
                SwapNoise::new(p)?;
                if !(p..=1.0).contains(&big_p) {
                    return Err(parameter(format!(
                        "need p <= P <= 1, got p = {p}, P = {big_p}"
                    )));
                }
            }
            SubjectModel::DissonanceShift { p, threshold, .. } => {
                SwapNoise::new(p)?;
                if threshold < 1 {
                    return Err(parameter("dissonance threshold must be at least 1"));
                }
            }
        }
        Ok(())
    }

    fn small(&self) -> f64 {
        match *self {
            SubjectModel::Null { p }
            | SubjectModel::Memory { p }
            | SubjectModel::TwoParam { p, .. }
            | SubjectModel::DissonanceShift { p, .. } => p,
        }
    }

    fn first_noise(&self) -> Noise {
        match *self {
            SubjectModel::TwoParam { big_p, .. } => Noise::from_weight(big_p),
            _ => Noise::from_weight(self.small()),
        }
    }

    fn choice_noise(&self) -> Noise {
        Noise::from_weight(self.small())
    }

    fn control_second_noise(&self) -> Noise {
        self.first_noise()
    }
}

impl fmt::Display for SubjectModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SubjectModel::Null { p } => write!(f, "null(p={p})"),
            SubjectModel::TwoParam { p, big_p } => write!(f, "two-param(p={p},P={big_p})"),
            SubjectModel::Memory { p } => write!(f, "memory(p={p})"),
            SubjectModel::DissonanceShift {
                p,
                shift,
                threshold,
            } => {
                write!(f, "dissonance(p={p},d={shift},max_gap={threshold})")
            }
        }
    }
}

/// Stage noise: swaps, or a uniformly random ranking in the `p = 1` limit.
#[derive(Debug, Clone, Copy)]
enum Noise {
    Swap(f64),
    Uniform,
}

impl Noise {
    fn from_weight(p: f64) -> Self {
        if p >= 1.0 {
            Noise::Uniform
        } else {
            Noise::Swap(p)
        }
    }

    fn sample<R: Rng + ?Sized>(self, truth: &Ranking, rng: &mut R) -> Ranking {
        match self {
            Noise::Swap(p) => SwapNoise::new(p).expect("validated").sample(truth, rng),
            Noise::Uniform => Ranking::random(truth.len(), rng),
        }
    }
}

/// Where each subject's true ranking comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthModel {
    /// Identity truth for everyone.
    #[default]
    Identity,
    /// An independent uniformly random truth per subject.
    RandomPerSubject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Experimental,
    Control,
    None,
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arm::Experimental => "experimental",
            Arm::Control => "control",
            Arm::None => "none",
        })
    }
}

/// One subject's trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub subject: usize,
    pub arm: Arm,
    /// Stage-one positions of the compared objects.
    pub pair: PositionPair,
    pub first: Ranking,
    pub choice: Choice,
    /// The ranking the spread is measured against: stage three, or the
    /// second ranking of an E0 control subject.
    pub second: Ranking,
    /// The chosen object was the better one in the first ranking.
    pub consistent: bool,
    pub spread: i64,
}

#[derive(Serialize)]
struct RecordRow {
    subject: usize,
    arm: Arm,
    i: usize,
    j: usize,
    consistent: bool,
    spread: i64,
}

impl TrialRecord {
    fn row(&self) -> RecordRow {
        RecordRow {
            subject: self.subject,
            arm: self.arm,
            i: self.pair.i(),
            j: self.pair.j(),
            consistent: self.consistent,
            spread: self.spread,
        }
    }

    /// Recomputes the spread from the stored rankings.
    pub fn recomputed_spread(&self) -> Result<i64> {
        spread(&self.first, self.choice, &self.second)
    }
}

/// CSV with columns `subject,arm,i,j,consistent,spread`.
pub fn write_records_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r.row())?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per line with the same fields as the CSV plus the
/// rankings and choice.
pub fn write_records_jsonl<W: Write>(records: &[TrialRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        let value = serde_json::json!({
            "subject": r.subject,
            "arm": r.arm,
            "i": r.pair.i(),
            "j": r.pair.j(),
            "consistent": r.consistent,
            "spread": r.spread,
            "chosen": r.choice.chosen(),
            "rejected": r.choice.rejected(),
            "first": r.first.order(),
            "second": r.second.order(),
        });
        writeln!(out, "{value}")?;
    }
    Ok(())
}

/// A design, a subject model and a master seed.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: DesignConfig,
    model: SubjectModel,
    truths: TruthModel,
    seed: u64,
    /// E3 only: pair assigned to each subject.
    assignment: Vec<PositionPair>,
}

impl Experiment {
    pub fn new(
        config: DesignConfig,
        model: SubjectModel,
        truths: TruthModel,
        seed: u64,
    ) -> Result<Self> {
        Self::with_assignment_seed(config, model, truths, seed, mix_seed(seed, ASSIGNMENT_SALT))
    }

    /// Like [`Experiment::new`] but with the E3 subject-to-pair permutation
    /// drawn from its own seed.
    pub fn with_assignment_seed(
        config: DesignConfig,
        model: SubjectModel,
        truths: TruthModel,
        seed: u64,
        assignment_seed: u64,
    ) -> Result<Self> {
        model.validate()?;
        let assignment = if config.kind == DesignKind::E3 {
            let mut pairs: Vec<PositionPair> = PositionPair::all(config.n).collect();
            pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(assignment_seed));
            pairs
        } else {
            Vec::new()
        };
        Ok(Experiment {
            config,
            model,
            truths,
            seed,
            assignment,
        })
    }

    pub fn config(&self) -> &DesignConfig {
        &self.config
    }

    pub fn model(&self) -> SubjectModel {
        self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Runs one subject on its own stream.
    pub fn run_subject(&self, subject: usize) -> Result<TrialRecord> {
        if subject >= self.config.subjects {
            return Err(input(format!(
                "subject {subject} out of range for {} subjects",
                self.config.subjects
            )));
        }
        let mut rng = subject_rng(self.seed, subject);
        let truth = match self.truths {
            TruthModel::Identity => Ranking::identity(self.config.n),
            TruthModel::RandomPerSubject => Ranking::random(self.config.n, &mut rng),
        };
        let assigned = self.assignment.get(subject).copied();
        run_subject(
            &self.config,
            &self.model,
            &truth,
            subject,
            assigned,
            &mut rng,
        )
    }

    /// All subjects, in index order.
    pub fn run(&self) -> Result<Vec<TrialRecord>> {
        (0..self.config.subjects)
            .into_par_iter()
            .map(|s| self.run_subject(s))
            .collect()
    }
}

/// Runs one trial with an explicit truth and stream. `assigned` is the E3
/// position pair for this subject.
pub fn run_subject<R: Rng + ?Sized>(
    config: &DesignConfig,
    model: &SubjectModel,
    truth: &Ranking,
    subject: usize,
    assigned: Option<PositionPair>,
    rng: &mut R,
) -> Result<TrialRecord> {
    let n = config.n;
    if truth.len() != n {
        return Err(input(format!(
            "truth has {} objects, design has {n}",
            truth.len()
        )));
    }
    let arm = config.arm(subject);
    let first = model.first_noise().sample(truth, rng);

    let (objects, pair) = match config.kind {
        DesignKind::E1 => {
            let objects = config.objects.expect("E1 carries objects");
            let (a, b) = (
                first.position_of(objects.first()).expect("object exists"),
                first.position_of(objects.second()).expect("object exists"),
            );
            (objects, PositionPair::new(a.min(b), a.max(b), n)?)
        }
        kind => {
            let pair = match kind {
                DesignKind::Classic | DesignKind::E0 => config.positions.expect("fixed positions"),
                DesignKind::E2 => {
                    let k = rng.random_range(0..PositionPair::count(n));
                    PositionPair::from_index(k, n).expect("index in range")
                }
                DesignKind::E3 => assigned
                    .ok_or_else(|| input(format!("E3 subject {subject} has no assigned pair")))?,
                DesignKind::E1 => unreachable!(),
            };
            let objects = ObjectPair::new(
                first.object_at(pair.i()).expect("position exists"),
                first.object_at(pair.j()).expect("position exists"),
                n,
            )?;
            (objects, pair)
        }
    };

    let (choice, second) = if arm == Arm::Control {
        let second = model.control_second_noise().sample(truth, rng);
        let at_choice = model.choice_noise().sample(truth, rng);
        (Choice::by_ranking(&at_choice, objects)?, second)
    } else {
        let at_choice = model.choice_noise().sample(truth, rng);
        let choice = Choice::by_ranking(&at_choice, objects)?;
        let second = final_ranking(model, truth, choice, pair, rng);
        (choice, second)
    };

    let better = first.object_at(pair.i()).expect("position exists");
    let spread = spread(&first, choice, &second)?;
    Ok(TrialRecord {
        subject,
        arm,
        pair,
        first,
        choice,
        second,
        consistent: choice.chosen() == better,
        spread,
    })
}

fn final_ranking<R: Rng + ?Sized>(
    model: &SubjectModel,
    truth: &Ranking,
    choice: Choice,
    pair: PositionPair,
    rng: &mut R,
) -> Ranking {
    let noise = Noise::from_weight(model.small());
    match *model {
        SubjectModel::DissonanceShift {
            shift, threshold, ..
        } if pair.delta() <= threshold => {
            let mut shifted = truth.clone();
            let chosen_at = shifted.position_of(choice.chosen()).expect("object exists");
            shifted.move_object(choice.chosen(), chosen_at.saturating_sub(shift));
            let rejected_at = shifted
                .position_of(choice.rejected())
                .expect("object exists");
            shifted.move_object(choice.rejected(), rejected_at + shift);
            noise.sample(&shifted, rng)
        }
        SubjectModel::Memory { .. } => {
            let mut r = noise.sample(truth, rng);
            let chosen_at = r.position_of(choice.chosen()).expect("object exists");
            let rejected_at = r.position_of(choice.rejected()).expect("object exists");
            if chosen_at > rejected_at {
                r.swap_positions(chosen_at, rejected_at);
            }
            r
        }
        _ => noise.sample(truth, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(i: usize, j: usize, n: usize) -> PositionPair {
        PositionPair::new(i, j, n).unwrap()
    }

    fn all_designs(n: usize, subjects: usize) -> Vec<DesignConfig> {
        vec![
            DesignConfig::classic(n, pair(7, 9, n), subjects).unwrap(),
            DesignConfig::e0(n, pair(7, 9, n), subjects).unwrap(),
            DesignConfig::e1(n, ObjectPair::new(7, 9, n).unwrap(), subjects).unwrap(),
            DesignConfig::e2(n, subjects).unwrap(),
            DesignConfig::e3(n).unwrap(),
        ]
    }

    #[test]
    fn zero_noise_gives_zero_spread() {
        for model in [
            SubjectModel::Null { p: 0.0 },
            SubjectModel::Memory { p: 0.0 },
            SubjectModel::TwoParam { p: 0.0, big_p: 0.0 },
        ] {
            for config in all_designs(12, 30) {
                let records = Experiment::new(config, model, TruthModel::Identity, 5)
                    .unwrap()
                    .run()
                    .unwrap();
                assert!(records.iter().all(|r| r.spread == 0 && r.consistent));
            }
        }
    }

    #[test]
    fn dissonance_shift_example() {
        let n = 12;
        let config = DesignConfig::e1(n, ObjectPair::new(7, 9, n).unwrap(), 1).unwrap();
        let model = SubjectModel::DissonanceShift {
            p: 0.0,
            shift: 1,
            threshold: 2,
        };
        let rec = Experiment::new(config, model, TruthModel::Identity, 0)
            .unwrap()
            .run_subject(0)
            .unwrap();
        assert_eq!(rec.choice.chosen(), 7);
        assert_eq!(rec.second.position_of(7), Some(6));
        assert_eq!(rec.second.position_of(9), Some(10));
        assert_eq!(rec.spread, 2);
    }

    #[test]
    fn dissonance_shift_gated_by_gap() {
        let n = 12;
        let config = DesignConfig::classic(n, pair(2, 9, n), 3).unwrap();
        let model = SubjectModel::DissonanceShift {
            p: 0.0,
            shift: 2,
            threshold: 3,
        };
        let records = Experiment::new(config, model, TruthModel::Identity, 0)
            .unwrap()
            .run()
            .unwrap();
        assert!(records.iter().all(|r| r.spread == 0));
    }

    #[test]
    fn memory_restores_consistency_with_choice() {
        let n = 10;
        let config = DesignConfig::e2(n, 500).unwrap();
        let model = SubjectModel::Memory { p: 0.9 };
        let records = Experiment::new(config, model, TruthModel::Identity, 9)
            .unwrap()
            .run()
            .unwrap();
        for r in records {
            assert!(
                r.second.position_of(r.choice.chosen()) < r.second.position_of(r.choice.rejected())
            );
        }
    }

    #[test]
    fn determinism_and_recomputation() {
        let model = SubjectModel::TwoParam { p: 0.5, big_p: 0.9 };
        for config in all_designs(15, 200) {
            let a = Experiment::new(config.clone(), model, TruthModel::RandomPerSubject, 42)
                .unwrap()
                .run()
                .unwrap();
            let b = Experiment::new(config.clone(), model, TruthModel::RandomPerSubject, 42)
                .unwrap()
                .run()
                .unwrap();
            assert_eq!(a, b);
            for r in &a {
                assert_eq!(r.recomputed_spread().unwrap(), r.spread);
                assert_eq!(
                    r.arm == Arm::Control,
                    config.kind() == DesignKind::E0 && r.subject % 2 == 1
                );
            }
            let c = Experiment::new(config, model, TruthModel::RandomPerSubject, 43)
                .unwrap()
                .run()
                .unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn schedule_independence() {
        let config = DesignConfig::e2(15, 300).unwrap();
        let exp = Experiment::new(
            config,
            SubjectModel::Null { p: 0.8 },
            TruthModel::Identity,
            3,
        )
        .unwrap();
        let parallel = exp.run().unwrap();
        let serial: Vec<_> = (0..300)
            .rev()
            .map(|s| exp.run_subject(s).unwrap())
            .rev()
            .collect();
        assert_eq!(parallel, serial);
    }

    #[test]
    fn e0_split_and_e3_coverage() {
        let config = DesignConfig::e0(15, pair(7, 9, 15), 106).unwrap();
        let records = Experiment::new(
            config,
            SubjectModel::Null { p: 0.8 },
            TruthModel::Identity,
            1,
        )
        .unwrap()
        .run()
        .unwrap();
        assert_eq!(
            records
                .iter()
                .filter(|r| r.arm == Arm::Experimental)
                .count(),
            53
        );
        assert_eq!(records.iter().filter(|r| r.arm == Arm::Control).count(), 53);

        let config = DesignConfig::e3(15).unwrap();
        assert_eq!(config.subjects(), 105);
        let records = Experiment::new(
            config,
            SubjectModel::Null { p: 0.8 },
            TruthModel::Identity,
            1,
        )
        .unwrap()
        .run()
        .unwrap();
        let mut pairs: Vec<_> = records.iter().map(|r| r.pair).collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), 105);
    }

    #[test]
    fn e3_subject_out_of_range() {
        let exp = Experiment::new(
            DesignConfig::e3(5).unwrap(),
            SubjectModel::Null { p: 0.5 },
            TruthModel::Identity,
            0,
        )
        .unwrap();
        assert!(exp.run_subject(10).is_err());
        let mut rng = subject_rng(0, 0);
        let err = run_subject(
            exp.config(),
            &exp.model(),
            &Ranking::identity(5),
            0,
            None,
            &mut rng,
        );
        assert!(matches!(err, Err(crate::Error::Input(_))));
    }

    #[test]
    fn config_validation() {
        assert!(DesignConfig::classic(5, pair(7, 9, 12), 10).is_err());
        assert!(DesignConfig::e2(1, 10).is_err());
        assert!(DesignConfig::e2(5, 0).is_err());
        assert!(SubjectModel::TwoParam { p: 0.6, big_p: 0.5 }
            .validate()
            .is_err());
        assert!(SubjectModel::Null { p: 1.0 }.validate().is_err());
        assert!(SubjectModel::DissonanceShift {
            p: 0.1,
            shift: 1,
            threshold: 0
        }
        .validate()
        .is_err());
        assert!(SubjectModel::TwoParam { p: 0.0, big_p: 1.0 }
            .validate()
            .is_ok());
    }

    #[test]
    fn record_exports() {
        let exp = Experiment::new(
            DesignConfig::e3(4).unwrap(),
            SubjectModel::Null { p: 0.5 },
            TruthModel::Identity,
            0,
        )
        .unwrap();
        let records = exp.run().unwrap();
        let mut csv_out = Vec::new();
        write_records_csv(&records, &mut csv_out).unwrap();
        let text = String::from_utf8(csv_out).unwrap();
        assert!(text.starts_with("subject,arm,i,j,consistent,spread\n"));
        assert_eq!(text.lines().count(), 7);
        let mut jl = Vec::new();
        write_records_jsonl(&records, &mut jl).unwrap();
        let line: serde_json::Value =
            serde_json::from_str(String::from_utf8(jl).unwrap().lines().next().unwrap()).unwrap();
        assert_eq!(line["arm"], "none");
    }
}
