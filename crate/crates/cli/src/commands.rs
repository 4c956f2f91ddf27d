use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};

use freechoice::design::{
    write_records_csv, write_records_jsonl, DesignConfig, DesignKind, Experiment, SubjectModel,
    TruthModel,
};
use freechoice::exact::{round3, Consistency, ExactEngine, TwoParamDesign, TwoParamEngine};
use freechoice::noise::StateSpace;
use freechoice::ranking::{ObjectPair, PositionPair, SimplifiedState};
use freechoice::rational::{ratio_from_decimal_f64, rational_spread_table};
use freechoice::stats::{power_estimate, summarize_records};
use serde_json::json;

use crate::manifest::{sibling, write_json, RunManifest};
use crate::{
    io_failure, DesignArg, ExperimentArgs, Failure, Format, ModelArg, PowerArgs, SimulateArgs,
    TableArgs,
};

/// Largest object count for `table` (and 12 with `--exact-rational`).
const MAX_TABLE_OBJECTS: usize = 20;
const MAX_RATIONAL_OBJECTS: usize = 12;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn table(args: &TableArgs) -> Result<(), Failure> {
    if !(2..=MAX_TABLE_OBJECTS).contains(&args.n) {
        return Err(usage(format!(
            "--n must lie in 2..={MAX_TABLE_OBJECTS}, got {}",
            args.n
        )));
    }
    if !(0.0..1.0).contains(&args.p) {
        return Err(usage(format!("--p must lie in [0, 1), got {}", args.p)));
    }
    if args.exact_rational && args.n > MAX_RATIONAL_OBJECTS {
        return Err(usage(format!(
            "--exact-rational supports at most {MAX_RATIONAL_OBJECTS} objects"
        )));
    }
    let table = ExactEngine::null(args.n, args.p)?.table();
    let exact = if args.exact_rational {
        Some(rational_spread_table(
            args.n,
            &ratio_from_decimal_f64(args.p)?,
        )?)
    } else {
        None
    };

    let body = match (args.format, &exact) {
        (Format::Csv, None) => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf).map_err(io_failure)?;
            String::from_utf8(buf).expect("csv output is utf-8")
        }
        (Format::Csv, Some(exact)) => {
            let mut out = String::from("i,j,expected_spread,rounded,exact\n");
            for ((pair, v), (_, r)) in table.iter().zip(exact.iter()) {
                let _ = writeln!(out, "{},{},{},{},{}", pair.i(), pair.j(), v, round3(v), r);
            }
            out
        }
        (Format::Json, _) => {
            let mut value = table.to_json();
            if let Some(exact) = &exact {
                for (entry, (_, r)) in value["entries"]
                    .as_array_mut()
                    .expect("entries array")
                    .iter_mut()
                    .zip(exact.iter())
                {
                    entry["exact"] = json!(r.to_string());
                }
                value["exact_sum"] = json!(exact.sum().to_string());
            }
            let mut text = serde_json::to_string_pretty(&value).map_err(io_failure)?;
            text.push('\n');
            text
        }
    };

    match &args.output {
        Some(path) => {
            fs::write(path, body)?;
            RunManifest::new("table", args, None)
                .output(path)
                .write(&sibling(path, ".manifest.json"))?;
        }
        None => io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn parse_pair(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || usage(format!("--pair expects `i,j`, got {text:?}"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn build_model(args: &ExperimentArgs) -> Result<SubjectModel, Failure> {
    let model = match args.model {
        ModelArg::Null => SubjectModel::Null { p: args.p },
        ModelArg::TwoParam => SubjectModel::TwoParam {
            p: args.p,
            big_p: args
                .big_p
                .ok_or_else(|| usage("--model two-param needs --P"))?,
        },
        ModelArg::Memory => SubjectModel::Memory { p: args.p },
        ModelArg::Dissonance => SubjectModel::DissonanceShift {
            p: args.p,
            shift: args.shift,
            threshold: args.max_gap,
        },
    };
    model.validate()?;
    Ok(model)
}

fn build_design(args: &ExperimentArgs) -> Result<DesignConfig, Failure> {
    let n = args.n;
    let pair = || -> Result<(usize, usize), Failure> {
        let text = args
            .pair
            .as_deref()
            .ok_or_else(|| usage("this design needs --pair i,j"))?;
        parse_pair(text)
    };
    let config = match args.design {
        DesignArg::Classic => {
            let (i, j) = pair()?;
            DesignConfig::classic(n, PositionPair::new(i, j, n)?, args.subjects)?
        }
        DesignArg::E0 => {
            let (i, j) = pair()?;
            DesignConfig::e0(n, PositionPair::new(i, j, n)?, args.subjects)?
        }
        DesignArg::E1 => {
            let (a, b) = pair()?;
            DesignConfig::e1(n, ObjectPair::new(a, b, n)?, args.subjects)?
        }
        DesignArg::E2 => DesignConfig::e2(n, args.subjects)?,
        DesignArg::E3 => DesignConfig::e3(n)?,
    };
    Ok(config)
}

fn truths(args: &ExperimentArgs) -> TruthModel {
    if args.random_truths {
        TruthModel::RandomPerSubject
    } else {
        TruthModel::Identity
    }
}

/// Exact expectations for the models the exact engine covers.
fn exact_expectation(
    config: &DesignConfig,
    model: SubjectModel,
    truths: TruthModel,
) -> Result<Option<serde_json::Value>, Failure> {
    let (p, big_p) = match model {
        SubjectModel::Null { p } => (p, p),
        SubjectModel::TwoParam { p, big_p } => (p, big_p),
        _ => return Ok(None),
    };
    let n = config.n();
    let engine = TwoParamEngine::new(n, p, big_p)?;
    let value = match config.kind() {
        DesignKind::Classic => {
            let pair = config.positions().expect("classic has positions");
            let mut v =
                json!({ "mean": engine.expected_spread(TwoParamDesign::E0Experimental(pair))? });
            if p == big_p {
                if let Ok(c) = ExactEngine::null(n, p)?.conditional(pair, Consistency::Consistent) {
                    v["consistent_only"] = json!(c.expected_spread);
                    v["consistent_probability"] = json!(c.probability);
                }
            }
            v
        }
        DesignKind::E0 => {
            let pair = config.positions().expect("e0 has positions");
            json!({
                "experimental": engine.expected_spread(TwoParamDesign::E0Experimental(pair))?,
                "control": engine.expected_spread(TwoParamDesign::E0Control(pair))?,
                "difference": engine.expected_spread(TwoParamDesign::E0Difference(pair))?,
            })
        }
        DesignKind::E1 => {
            let objects = config.objects().expect("e1 has objects");
            let mean = match truths {
                TruthModel::Identity => engine.expected_spread(TwoParamDesign::E1Objects(
                    SimplifiedState::new(objects.first(), objects.second(), n)?,
                ))?,
                // uniformly random true positions for the two objects
                TruthModel::RandomPerSubject => {
                    let space = StateSpace::new(n)?;
                    let mut total = 0.0;
                    for s in space.states() {
                        total += engine.expected_spread(TwoParamDesign::E1Objects(s))?;
                    }
                    total / space.len() as f64
                }
            };
            json!({ "mean": mean })
        }
        DesignKind::E2 | DesignKind::E3 => {
            json!({ "mean": engine.expected_spread(TwoParamDesign::E2)? })
        }
    };
    Ok(Some(value))
}

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let exp_args = &args.experiment;
    let config = build_design(exp_args)?;
    let model = build_model(exp_args)?;
    let truths = truths(exp_args);
    let experiment = Experiment::new(config.clone(), model, truths, exp_args.seed)?;
    let records = experiment.run()?;
    let summary = summarize_records(config.kind(), &records)?;

    let records_path = match args.format {
        Format::Csv => sibling(&args.output, ".csv"),
        Format::Json => sibling(&args.output, ".jsonl"),
    };
    let summary_path = sibling(&args.output, ".summary.json");
    let manifest_path = sibling(&args.output, ".manifest.json");

    let mut out = BufWriter::new(File::create(&records_path)?);
    match args.format {
        Format::Csv => write_records_csv(&records, &mut out).map_err(io_failure)?,
        Format::Json => write_records_jsonl(&records, &mut out)?,
    }
    out.flush()?;

    let report = json!({
        "design": config.kind(),
        "model": model,
        "n": config.n(),
        "subjects": config.subjects(),
        "seed": exp_args.seed,
        "summary": summary,
        "exact": exact_expectation(&config, model, truths)?,
    });
    write_json(&summary_path, &report)?;
    RunManifest::new("simulate", args, Some(exp_args.seed))
        .output(&records_path)
        .output(&summary_path)
        .write(&manifest_path)?;
    println!(
        "{} records, mean spread {:.4}; wrote {}",
        records.len(),
        summary.overall.mean,
        records_path.display()
    );
    Ok(())
}

pub fn power(args: &PowerArgs) -> Result<(), Failure> {
    let exp_args = &args.experiment;
    let config = build_design(exp_args)?;
    let model = build_model(exp_args)?;
    let report = power_estimate(
        &config,
        model,
        truths(exp_args),
        args.replications,
        args.alpha,
        exp_args.seed,
    )?;
    match &args.output {
        Some(path) => {
            write_json(path, &report)?;
            RunManifest::new("power", args, Some(exp_args.seed))
                .output(path)
                .write(&sibling(path, ".manifest.json"))?;
        }
        None => {
            let text = serde_json::to_string_pretty(&report).map_err(io_failure)?;
            println!("{text}");
        }
    }
    Ok(())
}
