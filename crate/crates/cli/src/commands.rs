use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vdg_core::engine::{classify_values, QualClassification};
use vdg_core::{
    build_model, check, export_dot, export_model, import_model, level_stats, parse_property,
    replay_value, synthesize, BuildOptions, CheckResult, GameParams, LevelStats, PropertyAst,
    TransitionModel,
};

use crate::config::RunConfig;
use crate::CliError;

pub const MODEL_FILE: &str = "model.vdg";
pub const STATS_FILE: &str = "stats.txt";

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn build(params: &GameParams, cap: u64) -> Result<TransitionModel, CliError> {
    Ok(build_model(params, BuildOptions { state_cap: cap })?)
}

/// Text block with per-round counts and the exponential fit `count ≈ A·exp(B·k)`.
pub fn format_stats(stats: &LevelStats) -> String {
    let mut s = String::new();
    let counts: Vec<String> = stats
        .per_round_state_counts
        .iter()
        .map(u64::to_string)
        .collect();
    let _ = writeln!(s, "rounds: {}", counts.len());
    let _ = writeln!(s, "states per round: {}", counts.join(" "));
    let _ = writeln!(s, "total states: {}", stats.cumulative_count);
    match (stats.fitted_log_slope, stats.fitted_log_intercept) {
        (Some(b), Some(a)) => {
            let _ = writeln!(s, "fit: count ~ {:.4} * exp({:.4} * k)", a.exp(), b);
        }
        _ => {
            let _ = writeln!(s, "fit: n/a (fewer than three rounds)");
        }
    }
    if let Some(b) = stats.cumulative_log_slope {
        let _ = writeln!(s, "cumulative fit slope: {b:.4}");
    }
    s
}

#[derive(Debug)]
pub struct BuildReport {
    pub model_path: PathBuf,
    pub stats: LevelStats,
    pub text: String,
}

pub fn cmd_build(cfg: &RunConfig) -> Result<BuildReport, CliError> {
    let model = build(&cfg.params, cfg.state_cap)?;
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    let model_path = cfg.out_dir.join(MODEL_FILE);
    export_model(&model, create(&model_path)?)?;
    let stats = level_stats(&model);
    let text = format_stats(&stats);
    let mut out = create(&cfg.out_dir.join(STATS_FILE))?;
    out.write_all(text.as_bytes()).and_then(|_| out.flush())?;
    Ok(BuildReport {
        model_path,
        stats,
        text,
    })
}

pub fn cmd_stats(model_path: &Path) -> Result<String, CliError> {
    let file = File::open(model_path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", model_path.display())))?;
    let model = import_model(BufReader::new(file))?;
    Ok(format_stats(&level_stats(&model)))
}

/// Resolves `@file` to the file's contents.
pub fn property_text(arg: &str) -> Result<String, CliError> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map(|s| s.trim().to_string())
            .map_err(|e| CliError::Usage(format!("cannot read property file {path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn parse(text: &str, params: &GameParams) -> Result<PropertyAst, CliError> {
    parse_property(text, params)
        .map_err(|e| CliError::Usage(format!("{e}\n  {text}\n  {}^", " ".repeat(e.offset))))
}

#[derive(Debug)]
pub struct CheckReport {
    pub property: PropertyAst,
    pub result: CheckResult,
    pub classification: Option<QualClassification>,
    pub text: String,
}

pub fn format_result(result: &CheckResult) -> String {
    match result.verdict {
        Some(true) => "TRUE".into(),
        Some(false) => "FALSE".into(),
        None => format!("{:.6}", result.value),
    }
}

pub fn format_classification(c: &QualClassification) -> String {
    let ratio = c
        .yes_ratio()
        .map_or("n/a".to_string(), |r| format!("{:.4}", r));
    format!(
        "{:>10} {:>10} {:>10} {:>10}\n{:>10} {:>10} {:>10} {:>10}\n",
        "Y",
        "N",
        "M",
        "Y/(Y+N)",
        c.yes.len(),
        c.no.len(),
        c.maybe.len(),
        ratio
    )
}

pub fn cmd_check(
    cfg: &RunConfig,
    prop: &str,
    classify: bool,
    csv: Option<&Path>,
) -> Result<CheckReport, CliError> {
    let property = parse(prop, &cfg.params)?;
    if classify && !property.query.is_probability() {
        return Err(CliError::Usage(
            "--classify needs a probability query".into(),
        ));
    }
    let model = build(&cfg.params, cfg.state_cap)?;
    let result = check(&model, &property)?;
    let mut text = format!("{}\n", format_result(&result));
    let classification = classify.then(|| classify_values(&result.valuation.values));
    if let Some(c) = &classification {
        text.push_str(&format_classification(c));
    }
    if let Some(path) = csv {
        let mut out = create(path)?;
        write_valuation(&model, &result, &mut out)?;
        out.flush()?;
    }
    Ok(CheckReport {
        property,
        result,
        classification,
        text,
    })
}

fn write_valuation<W: Write>(
    model: &TransitionModel,
    result: &CheckResult,
    out: &mut W,
) -> std::io::Result<()> {
    let n = model.params().n;
    let cols: Vec<String> = (1..=n).map(|i| format!("c{i}")).collect();
    writeln!(out, "id,k,{},value", cols.join(","))?;
    for (id, (state, v)) in model
        .states()
        .iter()
        .zip(&result.valuation.values)
        .enumerate()
    {
        let cs: Vec<String> = state.c.iter().map(u32::to_string).collect();
        writeln!(out, "{id},{},{},{v}", state.k, cs.join(","))?;
    }
    Ok(())
}

#[derive(Debug)]
pub struct SynthReport {
    pub achieved_value: f64,
    pub check_value: f64,
    pub replay_value: Option<f64>,
    pub nodes: usize,
    pub edges: usize,
    pub text: String,
}

pub fn cmd_synth(cfg: &RunConfig, prop: &str, dot: &Path) -> Result<SynthReport, CliError> {
    let property = parse(prop, &cfg.params)?;
    if !matches!(
        property.query,
        vdg_core::proplang::Query::ProbOptimum(_) | vdg_core::proplang::Query::RewardOptimum { .. }
    ) {
        return Err(CliError::Usage(
            "synthesis needs an optimization query (`Pmax=?`, `Rmax=?`, ...)".into(),
        ));
    }
    let model = build(&cfg.params, cfg.state_cap)?;
    let result = check(&model, &property)?;
    let graph = synthesize(&model, &property, &result.valuation)?;
    let mut out = create(dot)?;
    export_dot(&graph, &mut out)?;
    let replay = if graph.cooperative {
        Some(replay_value(&graph, &property)?)
    } else {
        None
    };
    let mut text = format!("achieved value: {:.6}\n", graph.achieved_value);
    match replay {
        Some(r) => {
            let verdict = if r == graph.achieved_value {
                "ok"
            } else {
                "MISMATCH"
            };
            let _ = writeln!(text, "replay value: {r:.6} ({verdict})");
        }
        None => text.push_str("replay: skipped (mixed two-coalition strategy)\n"),
    }
    let _ = writeln!(
        text,
        "strategy graph: {} nodes, {} edges",
        graph.nodes.len(),
        graph.edges.len()
    );
    if replay.is_some_and(|r| r != graph.achieved_value) {
        return Err(CliError::Internal(format!(
            "replay disagrees with synthesis\n{text}"
        )));
    }
    Ok(SynthReport {
        achieved_value: graph.achieved_value,
        check_value: result.value,
        replay_value: replay,
        nodes: graph.nodes.len(),
        edges: graph.edges.len(),
        text,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    RInit,
    RNeeded,
    F,
    KMax,
}

impl std::str::FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "r_init" => Ok(SweepParam::RInit),
            "r_needed" => Ok(SweepParam::RNeeded),
            "f" => Ok(SweepParam::F),
            "k_max" => Ok(SweepParam::KMax),
            other => Err(CliError::Usage(format!(
                "unknown sweep parameter `{other}` (expected r_init, r_needed, f or k_max)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<String>,
    pub property: String,
}

impl SweepSpec {
    pub fn new(param: &str, values: &str, property: &str) -> Result<Self, CliError> {
        let spec = SweepSpec {
            param: param.parse()?,
            values: values.split(',').map(|v| v.trim().to_string()).collect(),
            property: property.to_string(),
        };
        let base = GameParams::default();
        for v in &spec.values {
            spec.apply(&base, v)?;
        }
        Ok(spec)
    }

    /// `base` with the swept parameter set to `value`.
    fn apply(&self, base: &GameParams, value: &str) -> Result<GameParams, CliError> {
        let bad = || CliError::Usage(format!("bad sweep value `{value}`"));
        let mut p = base.clone();
        match self.param {
            SweepParam::RInit => p.r_init = value.parse().map_err(|_| bad())?,
            SweepParam::RNeeded => p.r_needed = value.parse().map_err(|_| bad())?,
            SweepParam::F => p.f = value.parse().map_err(|_| bad())?,
            SweepParam::KMax => p.k_max = value.parse().map_err(|_| bad())?,
        }
        Ok(p)
    }
}

/// One CSV row per (value, truncated horizon k). Failed cells read `ERROR`.
pub fn cmd_sweep(cfg: &RunConfig, spec: &SweepSpec, csv: &Path) -> Result<String, CliError> {
    let mut cells = Vec::new();
    for value in &spec.values {
        let p = spec.apply(&cfg.params, value)?;
        for k in 1..=p.k_max {
            cells.push((
                value.clone(),
                k,
                GameParams {
                    k_max: k,
                    ..p.clone()
                },
            ));
        }
    }
    let results: Vec<String> = cells
        .par_iter()
        .map(|(_, _, params)| {
            let cell = || -> Result<f64, CliError> {
                params.validate()?;
                let property = parse(&spec.property, params)?;
                let model = build(params, cfg.state_cap)?;
                Ok(check(&model, &property)?.value)
            };
            cell().map_or_else(|_| "ERROR".to_string(), |v| format!("{v:.6}"))
        })
        .collect();
    let mut text = String::from("value,k,optimum\n");
    for ((value, k, _), r) in cells.iter().zip(&results) {
        let _ = writeln!(text, "{value},{k},{r}");
    }
    let mut out = create(csv)?;
    out.write_all(text.as_bytes()).and_then(|_| out.flush())?;
    Ok(text)
}
