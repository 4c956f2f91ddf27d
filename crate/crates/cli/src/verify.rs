use std::time::Instant;

use freechoice::exact::{round3, ExactEngine, TwoParamDesign, TwoParamEngine};
use freechoice::oracle::{
    brute_force_expected_spread, prop1_oracle, Prop1Design, RankingDistribution,
};
use freechoice::ranking::{ObjectPair, PositionPair, SignConvention};
use freechoice::rational::{parse_ratio, rational_spread_table};
use freechoice::reference::{reference_table, REFERENCE_N, REFERENCE_P};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Failure, Level, VerifyArgs};

type Check = Result<String, String>;

struct Suite {
    convention: SignConvention,
    failures: Vec<String>,
}

impl Suite {
    fn run(&mut self, name: &str, check: impl FnOnce(SignConvention) -> Check) {
        let start = Instant::now();
        let outcome = check(self.convention);
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                println!("FAIL {name}: {detail} ({secs:.2}s)");
                self.failures.push(name.to_string());
            }
        }
    }
}

fn engine(n: usize, p: f64, convention: SignConvention) -> Result<ExactEngine, String> {
    ExactEngine::null(n, p)
        .map(|e| e.with_convention(convention))
        .map_err(|e| e.to_string())
}

fn reference_reproduction(convention: SignConvention) -> Check {
    let table = engine(REFERENCE_N, REFERENCE_P, convention)?.table();
    let mut worst = 0.0f64;
    let mut mismatches = Vec::new();
    for (pair, expect) in reference_table() {
        let got = table.get(pair).ok_or("missing pair")?;
        worst = worst.max((got - expect).abs());
        if (got - expect).abs() > 0.0005 {
            mismatches.push(format!("{pair}={} vs {expect:.3}", round3(got)));
        }
    }
    if mismatches.is_empty() {
        Ok(format!(
            "66 entries within 0.0005 (max deviation {worst:.2e})"
        ))
    } else {
        Err(format!(
            "{} mismatches, e.g. {}",
            mismatches.len(),
            mismatches[0]
        ))
    }
}

fn zero_sum(sizes: &[usize]) -> impl FnOnce(SignConvention) -> Check + '_ {
    move |convention| {
        let mut worst = 0.0f64;
        for &n in sizes {
            for k in 1..=9 {
                let p = k as f64 / 10.0;
                let sum = engine(n, p, convention)?.table().sum();
                worst = worst.max(sum.abs());
                if sum.abs() >= 1e-9 {
                    return Err(format!("n={n} p={p}: sum {sum:e}"));
                }
            }
        }
        Ok(format!("max |sum| {worst:.1e}"))
    }
}

fn reversal_symmetry(convention: SignConvention) -> Check {
    let n = 12;
    for p in [0.2, 0.5, 0.8] {
        let table = engine(n, p, convention)?.table();
        for (pair, v) in table.iter() {
            let mirrored = table.get(pair.reversed(n)).ok_or("missing pair")?;
            if (v - mirrored).abs() > 1e-12 {
                return Err(format!("p={p} {pair}: {v} vs {mirrored}"));
            }
        }
    }
    Ok("n=12, p in {0.2, 0.5, 0.8}".into())
}

fn brute_force(sizes: &[usize]) -> impl FnOnce(SignConvention) -> Check + '_ {
    move |convention| {
        let mut worst = 0.0f64;
        let mut count = 0;
        for &n in sizes {
            for p in [0.3, 0.8] {
                let e = engine(n, p, convention)?;
                for pair in PositionPair::all(n) {
                    let oracle =
                        brute_force_expected_spread(n, p, pair).map_err(|e| e.to_string())?;
                    let got = e.expected_spread(pair).map_err(|e| e.to_string())?;
                    worst = worst.max((oracle - got).abs());
                    count += 1;
                    if (oracle - got).abs() > 1e-9 {
                        return Err(format!(
                            "n={n} p={p} {pair}: engine {got} vs oracle {oracle}"
                        ));
                    }
                }
            }
        }
        Ok(format!("{count} cases, max deviation {worst:.1e}"))
    }
}

fn prop1(max_n: usize, distributions: usize) -> impl FnOnce(SignConvention) -> Check {
    move |_| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        let mut worst = 0.0f64;
        for k in 0..distributions {
            let n = 2 + k % (max_n - 1);
            let dist = RankingDistribution::random(n, &mut rng).map_err(|e| e.to_string())?;
            let objects = ObjectPair::new(1, n, n).map_err(|e| e.to_string())?;
            for design in [Prop1Design::E1(objects), Prop1Design::E2, Prop1Design::E3] {
                let v = prop1_oracle(&dist, design).map_err(|e| e.to_string())?;
                worst = worst.max(v.abs());
                if v.abs() > 1e-12 {
                    return Err(format!("{design:?} on n={n}: {v:e}"));
                }
            }
        }
        Ok(format!(
            "{distributions} distributions, max |E| {worst:.1e}"
        ))
    }
}

fn sixteen_thirds(_: SignConvention) -> Check {
    let e = TwoParamEngine::new(15, 0.0, 1.0).map_err(|e| e.to_string())?;
    let pair = PositionPair::new(7, 9, 15).map_err(|e| e.to_string())?;
    for design in [
        TwoParamDesign::E2,
        TwoParamDesign::E3,
        TwoParamDesign::E0Difference(pair),
    ] {
        let v = e.expected_spread(design).map_err(|e| e.to_string())?;
        if (v - 16.0 / 3.0).abs() > 1e-9 {
            return Err(format!("{design:?}: {v}"));
        }
    }
    Ok("E2, E3 and E0 difference equal 16/3".into())
}

fn mild_two_param(_: SignConvention) -> Check {
    let e = TwoParamEngine::new(15, 0.5, 0.9).map_err(|e| e.to_string())?;
    let v = e
        .expected_spread(TwoParamDesign::E3)
        .map_err(|e| e.to_string())?;
    if (v - 0.14).abs() > 0.005 {
        return Err(format!("E3 = {v}"));
    }
    Ok(format!("E3 = {v:.4}"))
}

fn rational_zero_sum(n: usize) -> impl FnOnce(SignConvention) -> Check {
    move |_| {
        let p = parse_ratio("4/5").map_err(|e| e.to_string())?;
        let table = rational_spread_table(n, &p).map_err(|e| e.to_string())?;
        let sum = table.sum();
        if sum == Default::default() {
            Ok(format!(
                "n={n}, p=4/5: sum of {} exact values is 0",
                table.len()
            ))
        } else {
            Err(format!("sum = {sum}"))
        }
    }
}

fn naive_sum(convention: SignConvention) -> Check {
    let e = engine(12, 0.8, convention)?;
    let pair = PositionPair::new(7, 9, 12).map_err(|e| e.to_string())?;
    let a = e.expected_spread(pair).map_err(|e| e.to_string())?;
    let b = e.expected_spread_naive(pair).map_err(|e| e.to_string())?;
    if (a - b).abs() > 1e-12 {
        return Err(format!("factorized {a} vs triple sum {b}"));
    }
    Ok(format!("(7,9): {a:.6}"))
}

pub fn run(args: &VerifyArgs) -> Result<(), Failure> {
    let mut suite = Suite {
        convention: if args.inject_sign_fault {
            SignConvention::Inverted
        } else {
            SignConvention::Standard
        },
        failures: Vec::new(),
    };
    let full = args.level == Level::Full;
    suite.run("reference-table", reference_reproduction);
    if full {
        suite.run("zero-sum", zero_sum(&[2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]));
    } else {
        suite.run("zero-sum", zero_sum(&[5, 12]));
    }
    suite.run("reversal-symmetry", reversal_symmetry);
    suite.run("sixteen-thirds", sixteen_thirds);
    suite.run("two-param-e3", mild_two_param);
    if full {
        suite.run("brute-force-equivalence", brute_force(&[3, 4, 5]));
        suite.run("prop1-oracle", prop1(4, 100));
        suite.run("rational-zero-sum", rational_zero_sum(12));
        suite.run("triple-sum", naive_sum);
    } else {
        suite.run("brute-force-equivalence", brute_force(&[3, 4]));
        suite.run("prop1-oracle", prop1(3, 10));
        suite.run("rational-zero-sum", rational_zero_sum(6));
    }
    if suite.failures.is_empty() {
        println!("all checks passed");
        Ok(())
    } else {
        println!(
            "{} check(s) failed: {}",
            suite.failures.len(),
            suite.failures.join(", ")
        );
        Err(Failure::Verification)
    }
}
