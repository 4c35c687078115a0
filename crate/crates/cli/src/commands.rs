use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use roldarp_core::adversary::{
    adaptive_first_horizon, adaptive_last_window, gen_fig1, Fig1Params, FirstHorizonParams, LastWindowParams,
};
use roldarp_core::analysis::{check_hypotheses, BoundId, BoundReport, Counterexample, Evaluation};
use roldarp_core::bipartite::to_bipartite;
use roldarp_core::online::{IdlePolicy, OnlinePolicy};
use roldarp_core::oracle::optimal_offline_capped;
use roldarp_core::random::{gen_random, RandomParams};
use roldarp_core::sbp::{run_sbp, PlanRecord, SbpPolicy};
use roldarp_core::{
    validate_instance, validate_schedule, Instance, Scalar, Schedule, ScheduleVerdict, ValidationReport,
};

use crate::io::{
    csv_bytes, emit, emit_json, instance_id, read_instance, read_json, search_cap, to_json, write_atomic, CliError,
    CliResult, EXIT_FAILED,
};
use crate::{
    AdversaryKind, CheckArgs, Command, DuelArgs, Fig1Args, GenCommand, InOut, OptArgs, PolicyKind, RandomArgs,
    ReduceArgs, ReportArgs, RunCommand, ValidateArgs,
};

pub fn dispatch(command: Command) -> CliResult<u8> {
    match command {
        Command::Gen(GenCommand::Fig1(a)) => gen_fig1_cmd(a),
        Command::Gen(GenCommand::Random(a)) => gen_random_cmd(a),
        Command::Run(RunCommand::Sbp(a)) => run_sbp_cmd(a),
        Command::Opt(a) => opt_cmd(a),
        Command::Duel(a) => duel_cmd(a),
        Command::Check(a) => check_cmd(a),
        Command::Reduce(a) => reduce_cmd(a),
        Command::Report(a) => report_cmd(a),
        Command::Validate(a) => validate_cmd(a),
    }
}

fn lib(e: impl std::fmt::Display) -> CliError {
    CliError::from_library(e)
}

/// Reads an instance and refuses it unless it passes validation.
fn load_valid(path: &Path) -> CliResult<Instance> {
    let inst = read_instance(path)?;
    let report = validate_instance(&inst);
    if !report.is_valid() {
        return Err(CliError::failed("INVALID_INSTANCE", format!("{}: {report}", path.display())));
    }
    Ok(inst)
}

fn gen_fig1_cmd(a: Fig1Args) -> CliResult<u8> {
    let g = gen_fig1(&Fig1Params { f: a.f, h: a.h, b: a.b, eps: a.eps }).map_err(lib)?;
    if let Some(w) = &a.witness {
        write_atomic(w, &to_json(&g.witness))?;
    }
    emit(a.output.as_deref(), g.instance.to_json().as_bytes())?;
    Ok(0)
}

fn gen_random_cmd(a: RandomArgs) -> CliResult<u8> {
    let params = RandomParams {
        vertices: a.vertices,
        requests: a.requests,
        seed: a.seed,
        segments: a.f,
        segment_length: a.segment_length,
        uniform: a.uniform,
        bipartite_k: a.bipartite.then_some(a.k),
    };
    let inst = gen_random(&params).map_err(lib)?;
    emit(a.output.as_deref(), inst.to_json().as_bytes())?;
    Ok(0)
}

#[derive(Serialize)]
struct RunRecord {
    policy: &'static str,
    revenue: Scalar,
    by_segment: Vec<Scalar>,
    schedule: Schedule,
    plans: Vec<PlanRecord>,
}

fn run_sbp_cmd(a: InOut) -> CliResult<u8> {
    let inst = load_valid(&a.input)?;
    let run = run_sbp(&inst).map_err(lib)?;
    let record = RunRecord {
        policy: "sbp",
        revenue: run.profile.total,
        by_segment: run.profile.by_segment,
        schedule: run.schedule,
        plans: run.plans,
    };
    emit_json(a.output.as_deref(), &record)?;
    Ok(0)
}

#[derive(Serialize)]
struct OptRecord {
    revenue: Scalar,
    horizon: Scalar,
    order: Vec<usize>,
    schedule: Schedule,
}

fn opt_cmd(a: OptArgs) -> CliResult<u8> {
    let inst = load_valid(&a.input)?;
    let opt = optimal_offline_capped(&inst, a.horizon.as_ref(), search_cap()?).map_err(lib)?;
    let record = OptRecord { revenue: opt.revenue, horizon: opt.horizon, order: opt.order, schedule: opt.schedule };
    emit_json(a.output.as_deref(), &record)?;
    Ok(0)
}

fn duel_cmd(a: DuelArgs) -> CliResult<u8> {
    let policy: Box<dyn OnlinePolicy> = match a.policy {
        PolicyKind::Sbp => Box::new(SbpPolicy::new()),
        PolicyKind::Idle => Box::new(IdlePolicy),
    };
    let cap = search_cap()?;
    let transcript = match a.adversary {
        AdversaryKind::LastWindow => {
            if a.x.is_some() || a.eps.is_some() {
                return Err(CliError::usage("USAGE", "--X and --eps apply to first-horizon only"));
            }
            let d = LastWindowParams::default();
            let p = LastWindowParams {
                horizon: a.horizon.unwrap_or(d.horizon),
                f: a.f.unwrap_or(d.f),
                uniform: a.uniform,
                k: a.k.unwrap_or(d.k),
                delta: a.delta,
                search_cap: cap,
            };
            adaptive_last_window(policy, &p)
        }
        AdversaryKind::FirstHorizon => {
            if a.horizon.is_some() || a.f.is_some() {
                return Err(CliError::usage("USAGE", "--T and --f apply to last-window only"));
            }
            let d = FirstHorizonParams::default();
            let p = FirstHorizonParams {
                x: a.x.unwrap_or(d.x),
                uniform: a.uniform,
                k: a.k.unwrap_or(d.k),
                eps: a.eps.unwrap_or(d.eps),
                delta: a.delta,
                search_cap: cap,
            };
            adaptive_first_horizon(policy, &p)
        }
    }
    .map_err(lib)?;
    emit_json(a.output.as_deref(), &transcript)?;
    Ok(0)
}

/// One evaluated bound, tagged with the instance it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckRecord {
    instance: String,
    #[serde(flatten)]
    report: BoundReport,
}

#[derive(Clone, Copy)]
enum Selection {
    One(BoundId),
    Applicable,
}

fn parse_selection(s: &str) -> CliResult<Selection> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Selection::Applicable);
    }
    s.parse().map(Selection::One).map_err(|e: String| CliError::usage("USAGE", e))
}

/// Runs the algorithm and the optimum once, then evaluates the selection.
fn evaluate(inst: &Instance, id: &str, sel: Selection, cap: usize) -> CliResult<Vec<(CheckRecord, Counterexample)>> {
    let bounds: Vec<BoundId> = match sel {
        Selection::One(b) => {
            check_hypotheses(inst, b).map_err(lib)?;
            vec![b]
        }
        Selection::Applicable => BoundId::ALL.into_iter().filter(|&b| check_hypotheses(inst, b).is_ok()).collect(),
    };
    let eval = Evaluation::with_cap(inst, cap).map_err(lib)?;
    bounds
        .into_iter()
        .map(|b| {
            let report = eval.check(b).map_err(lib)?;
            let cx = eval.counterexample(&report);
            Ok((CheckRecord { instance: id.to_string(), report }, cx))
        })
        .collect()
}

fn rows(records: &[CheckRecord]) -> Vec<[String; 6]> {
    records.iter().map(|r| r.report.csv_record(&r.instance)).collect()
}

fn check_cmd(a: CheckArgs) -> CliResult<u8> {
    let sel = parse_selection(&a.bound)?;
    let cap = search_cap()?;
    let per_file: Vec<CliResult<Vec<(CheckRecord, Counterexample)>>> = a
        .input
        .par_iter()
        .map(|p| {
            let inst = load_valid(p)?;
            evaluate(&inst, &instance_id(p), sel, cap)
        })
        .collect();
    let mut records = Vec::new();
    let mut failed = Vec::new();
    for r in per_file {
        for (rec, cx) in r? {
            if !rec.report.holds {
                failed.push((rec.clone(), cx));
            }
            records.push(rec);
        }
    }
    if let Some(dir) = &a.dump {
        std::fs::create_dir_all(dir).map_err(|e| CliError::usage("IO", format!("{}: {e}", dir.display())))?;
        for (rec, cx) in &failed {
            write_atomic(&dir.join(format!("{}-{}.json", rec.instance, rec.report.bound)), &to_json(cx))?;
        }
    }
    if let Some(csv) = &a.csv {
        write_atomic(csv, &csv_bytes(&rows(&records), BoundReport::CSV_HEADER))?;
    }
    match (a.input.len(), sel, records.as_slice()) {
        (1, Selection::One(_), [only]) => emit_json(a.output.as_deref(), only)?,
        _ => emit_json(a.output.as_deref(), &records)?,
    }
    Ok(if failed.is_empty() { 0 } else { EXIT_FAILED })
}

fn reduce_cmd(a: ReduceArgs) -> CliResult<u8> {
    let inst = load_valid(&a.input)?;
    let red = to_bipartite(&inst, a.eps.as_ref()).map_err(lib)?;
    if a.record {
        let mut red = red;
        red.instance.canonicalize();
        emit_json(a.output.as_deref(), &red)?;
    } else {
        emit(a.output.as_deref(), red.instance.to_json().as_bytes())?;
    }
    Ok(0)
}

/// Check output (one record or a list) is taken as is; anything else is
/// read as an instance and every applicable bound is evaluated.
fn report_rows(path: &Path, cap: usize) -> CliResult<Vec<CheckRecord>> {
    let value: serde_json::Value = read_json(path)?;
    let bad = |e: serde_json::Error| CliError::usage("BAD_JSON", format!("{}: {e}", path.display()));
    match &value {
        serde_json::Value::Array(_) => serde_json::from_value(value).map_err(bad),
        serde_json::Value::Object(m) if m.contains_key("bound") => {
            Ok(vec![serde_json::from_value(value).map_err(bad)?])
        }
        _ => {
            let inst: Instance = serde_json::from_value(value).map_err(bad)?;
            let report = validate_instance(&inst);
            if !report.is_valid() {
                return Err(CliError::failed("INVALID_INSTANCE", format!("{}: {report}", path.display())));
            }
            Ok(evaluate(&inst, &instance_id(path), Selection::Applicable, cap)?.into_iter().map(|(r, _)| r).collect())
        }
    }
}

fn report_cmd(a: ReportArgs) -> CliResult<u8> {
    let cap = search_cap()?;
    let mut paths: Vec<PathBuf> = glob::glob(&a.glob)
        .map_err(|e| CliError::usage("BAD_GLOB", e.to_string()))?
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::usage("IO", e.to_string()))?;
    paths.sort();
    // Never read our own output back in.
    if let Some(csv) = &a.csv {
        paths.retain(|p| p != csv);
    }
    if paths.is_empty() {
        return Err(CliError::usage("NO_INPUT", format!("no files match `{}`", a.glob)));
    }
    let per_file: Vec<CliResult<Vec<CheckRecord>>> = paths.par_iter().map(|p| report_rows(p, cap)).collect();
    let mut records = Vec::new();
    for r in per_file {
        records.extend(r?);
    }
    emit(a.csv.as_deref(), &csv_bytes(&rows(&records), BoundReport::CSV_HEADER))?;
    Ok(if records.iter().all(|r| r.report.holds) { 0 } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct ValidationRecord {
    instance: ValidationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule: Option<ScheduleVerdict>,
}

fn validate_cmd(a: ValidateArgs) -> CliResult<u8> {
    let inst = read_instance(&a.input)?;
    let instance = validate_instance(&inst);
    let schedule = match &a.schedule {
        Some(p) if instance.is_valid() => {
            let sched: Schedule = read_json(p)?;
            Some(validate_schedule(&inst, &sched).map_err(lib)?)
        }
        _ => None,
    };
    let ok = instance.is_valid() && schedule.as_ref().is_none_or(|v| v.feasible);
    emit_json(a.output.as_deref(), &ValidationRecord { instance, schedule })?;
    Ok(if ok { 0 } else { EXIT_FAILED })
}
