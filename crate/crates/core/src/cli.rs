//! The `picod` command line.
//!
//! Exit codes: 0 success, 1 an invalid code or a mismatch with the closed
//! form, 2 usage errors, 3 a randomized construction running out of retries.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::construct::{synthesize, ConstructOptions, DEFAULT_RETRY_BUDGET};
use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::model::{DecentralizedCode, KnowledgeMode, ProblemInstance, RationalLength};
use crate::oracle::{self, SearchOptions, SearchSpace, Strategy, Verdict};
use crate::theorems::{centralized_length, optimal_length};
use crate::verify::{validate, VerificationReport};

pub const RETRY_BUDGET_ENV: &str = "PICOD_RETRY_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "picod", version, about = "Decentralized pliable index codes: bounds, synthesis, verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Consecutive,
    Complement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepFamily {
    Consecutive,
    Complement,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Static,
    Sequential,
}

impl From<ModeArg> for KnowledgeMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Static => KnowledgeMode::Static,
            ModeArg::Sequential => KnowledgeMode::Sequential,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Closure,
    Naive,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub t: usize,
    /// Side-information sizes, comma separated; overrides --smin/--smax.
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<usize>>,
    #[arg(long)]
    pub smin: Option<usize>,
    #[arg(long)]
    pub smax: Option<usize>,
}

impl InstanceArgs {
    fn build(&self, family: Family) -> Result<ProblemInstance> {
        if let Some(sizes) = &self.s {
            return ProblemInstance::new(self.m, self.t, sizes.iter().copied());
        }
        let (Some(smin), Some(smax)) = (self.smin, self.smax) else {
            return Err(Error::Usage("give either --s or both --smin and --smax".into()));
        };
        match family {
            Family::Consecutive => ProblemInstance::consecutive(self.m, self.t, smin, smax),
            Family::Complement => ProblemInstance::complement(self.m, self.t, smin, smax),
        }
    }
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Field GF(2^b); defaults to the smallest field the construction supports.
    #[arg(long = "field-bits")]
    pub bits: Option<u32>,
    /// Reduction polynomial with the leading term, e.g. 0x11b.
    #[arg(long, value_parser = parse_poly, requires = "bits")]
    pub poly: Option<u32>,
}

impl FieldArgs {
    fn spec(&self) -> Result<Option<FieldSpec>> {
        match (self.bits, self.poly) {
            (None, _) => Ok(None),
            (Some(b), None) => FieldSpec::with_default_poly(b).map(Some),
            (Some(b), Some(p)) => FieldSpec::new(b, p).map(Some),
        }
    }
}

fn parse_poly(text: &str) -> std::result::Result<u32, String> {
    let parsed = match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16),
        None => text.parse(),
    };
    parsed.map_err(|e| format!("bad polynomial {text:?}: {e}"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form optimal length.
    Bound {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value_t = Family::Consecutive)]
        mode: Family,
    },
    /// Build a code, verify it and write it as JSON.
    Synth {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value_t = Family::Consecutive)]
        mode: Family,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; `-` writes to stdout.
        #[arg(long, default_value = "code.json")]
        out: PathBuf,
        /// Also write the verification report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Verify a code file.
    Verify {
        #[arg(long)]
        code: PathBuf,
        /// Compare against a previously written report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Exhaustive search for short codes.
    Oracle {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Instance family when --smin/--smax are used.
        #[arg(long, value_enum, default_value_t = Family::Consecutive)]
        family: Family,
        #[arg(long = "beta-max", default_value_t = 2)]
        beta_max: usize,
        /// Decide existence at exactly this many sub-slots with beta = --beta-max.
        #[arg(long)]
        subslots: Option<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Static)]
        mode: ModeArg,
        #[arg(long = "field-bits", default_value_t = 1)]
        bits: u32,
        #[arg(long, value_enum, default_value_t = StrategyArg::Closure)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = oracle::DEFAULT_CEILING)]
        ceiling: f64,
        #[arg(long = "no-pruning")]
        no_pruning: bool,
    },
    /// Synthesize and verify every instance in a parameter grid.
    Sweep {
        #[arg(long = "m-min", default_value_t = 2)]
        m_min: usize,
        #[arg(long = "m-max", default_value_t = 6)]
        m_max: usize,
        #[arg(long = "t-max", default_value_t = 2)]
        t_max: usize,
        #[arg(long, value_enum, default_value_t = SweepFamily::Both)]
        mode: SweepFamily,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Exit code and the text destined for stdout.
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Construction { .. } => 3,
        _ => 2,
    }
}

fn retry_budget() -> Result<u32> {
    match std::env::var(RETRY_BUDGET_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{RETRY_BUDGET_ENV} must be a non-negative integer, got {text:?}"))),
        Err(_) => Ok(DEFAULT_RETRY_BUDGET),
    }
}

fn to_json(value: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Bound { instance, mode } => bound(cli.format, &instance.build(*mode)?),
        Command::Synth { instance, mode, field, seed, out, report } => {
            let inst = instance.build(*mode)?;
            let options = ConstructOptions { field: field.spec()?, seed: *seed, retry_budget: retry_budget()? };
            synth(cli.format, &inst, &options, out, report.as_ref())
        }
        Command::Verify { code, report } => verify(cli.format, code, report.as_ref()),
        Command::Oracle { instance, family, beta_max, subslots, mode, bits, strategy, ceiling, no_pruning } => {
            let inst = instance.build(*family)?;
            let options = SearchOptions {
                ceiling: *ceiling,
                strategy: match strategy {
                    StrategyArg::Closure => Strategy::Closure,
                    StrategyArg::Naive => Strategy::Naive,
                },
                symmetry_pruning: !no_pruning,
                ..Default::default()
            };
            let field = FieldSpec::with_default_poly(*bits)?;
            run_oracle(cli.format, &inst, field, *beta_max, *subslots, (*mode).into(), &options)
        }
        Command::Sweep { m_min, m_max, t_max, mode, seed } => {
            sweep(cli.format, *m_min, *m_max, *t_max, *mode, *seed, retry_budget()?)
        }
    }
}

fn comparison_line(dec: RationalLength, cen: RationalLength, t: usize) -> String {
    if cen == RationalLength::integer(t as u64) {
        format!("centralized {cen} = t, so decentralized {dec} differs")
    } else {
        format!("centralized {cen} > t, so decentralized {dec} is the same")
    }
}

fn bound(format: Format, inst: &ProblemInstance) -> Result<Outcome> {
    let b = optimal_length(inst)?;
    let cen = centralized_length(inst)?;
    let stdout = match format {
        Format::Json => to_json(&json!({
            "instance": inst,
            "optimal_length": b.value,
            "kind": b.kind,
            "source": b.source,
            "needs_review": b.needs_review,
            "centralized_length": cen,
        }))?,
        Format::Text => {
            let mut s = format!("{}\n", b.value);
            writeln!(s, "{inst} ({})", b.source).unwrap();
            writeln!(s, "{}", comparison_line(b.value, cen, inst.t())).unwrap();
            if b.needs_review {
                writeln!(s, "warning: value does not exceed t and needs review").unwrap();
            }
            s
        }
    };
    Ok(Outcome { code: 0, stdout })
}

#[derive(Serialize)]
struct SynthSummary<'a> {
    instance: &'a ProblemInstance,
    length: RationalLength,
    optimal_length: RationalLength,
    valid: bool,
    matches_optimum: bool,
}

fn synth(
    format: Format,
    inst: &ProblemInstance,
    options: &ConstructOptions,
    out: &PathBuf,
    report_path: Option<&PathBuf>,
) -> Result<Outcome> {
    let code = synthesize(inst, options)?;
    let report = validate(&code);
    let optimum = optimal_length(inst)?.value;
    let summary = SynthSummary {
        instance: inst,
        length: code.length(),
        optimal_length: optimum,
        valid: report.valid,
        matches_optimum: code.length() == optimum,
    };
    let body = code.to_json()? + "\n";
    let mut stdout = String::new();
    if out.as_os_str() == "-" {
        stdout.push_str(&body);
    } else {
        fs::write(out, &body)?;
    }
    if let Some(path) = report_path {
        fs::write(path, to_json(&report)?)?;
    }
    if out.as_os_str() != "-" {
        match format {
            Format::Json => stdout.push_str(&to_json(&summary)?),
            Format::Text => {
                writeln!(
                    stdout,
                    "{inst}: length {} (optimum {optimum}), {}, wrote {}",
                    summary.length,
                    if report.valid { "valid" } else { "INVALID" },
                    out.display()
                )
                .unwrap();
            }
        }
    }
    let ok = summary.valid && summary.matches_optimum;
    Ok(Outcome { code: if ok { 0 } else { 1 }, stdout })
}

fn text_report(report: &VerificationReport) -> String {
    let mut s = format!(
        "{}: length {}, {} knowledge, {} of {} users satisfied\n",
        if report.valid { "valid" } else { "INVALID" },
        report.length,
        report.knowledge_mode,
        report.per_user.len() - report.unsatisfied().count(),
        report.per_user.len()
    );
    for v in &report.violations {
        writeln!(s, "row {} (position {}) by user {} uses unknown columns {:?}", v.row, v.position, v.user, v.columns)
            .unwrap();
    }
    for u in report.unsatisfied() {
        writeln!(s, "user {} {:?} decodes only {:?}", u.user, u.side_info, u.decodable).unwrap();
    }
    s
}

fn verify(format: Format, code_path: &PathBuf, expected: Option<&PathBuf>) -> Result<Outcome> {
    let code = DecentralizedCode::from_json(&fs::read_to_string(code_path)?)?;
    let report = validate(&code);
    let mut stdout = match format {
        Format::Json => to_json(&report)?,
        Format::Text => text_report(&report),
    };
    let mut ok = report.valid;
    if let Some(path) = expected {
        let stored: VerificationReport = serde_json::from_str(&fs::read_to_string(path)?)?;
        if stored != report {
            ok = false;
            writeln!(stdout, "report differs from {}", path.display()).unwrap();
        }
    }
    Ok(Outcome { code: if ok { 0 } else { 1 }, stdout })
}

fn witness_lines(code: &DecentralizedCode) -> String {
    let users = code.users();
    let mut s = String::new();
    for e in code.schedule().entries() {
        let sender: Vec<usize> = users[e.user].side_info.iter().copied().collect();
        writeln!(s, "  row {:?} sent by user {} {:?}", code.generator().row(e.row), e.user, sender).unwrap();
    }
    s
}

fn run_oracle(
    format: Format,
    inst: &ProblemInstance,
    field: FieldSpec,
    beta_max: usize,
    subslots: Option<usize>,
    mode: KnowledgeMode,
    options: &SearchOptions,
) -> Result<Outcome> {
    if let Some(k) = subslots {
        let space = SearchSpace { instance: inst.clone(), field, beta: beta_max, total_subslots: k, knowledge_mode: mode };
        let report = oracle::exists_valid_code(&space, options)?;
        let stdout = match format {
            Format::Json => to_json(&json!({
                "space": space,
                "exists": report.exists(),
                "search_size": report.search_size,
                "evaluated": report.evaluated,
                "strategy": report.strategy,
                "witness": report.witness(),
            }))?,
            Format::Text => {
                let mut s = format!(
                    "{inst}, beta={beta_max}, {k} sub-slots, {mode}: {} ({} evaluated of at most {:.0})\n",
                    if report.exists() { "valid code exists" } else { "no valid code" },
                    report.evaluated,
                    report.search_size
                );
                if let Verdict::Found(code) = &report.verdict {
                    s.push_str(&witness_lines(code));
                }
                s
            }
        };
        return Ok(Outcome { code: 0, stdout });
    }
    let min = oracle::certified_minimum(inst, field, beta_max, mode, options)?;
    let closed = optimal_length(inst).ok().map(|b| b.value);
    let matches = closed.map(|c| c == min.value);
    let stdout = match format {
        Format::Json => to_json(&json!({
            "instance": inst,
            "minimum": min,
            "closed_form": closed,
            "matches_closed_form": matches,
        }))?,
        Format::Text => {
            let mut s = format!(
                "{inst}: minimum {} at beta={} ({}){}\n",
                min.value,
                min.beta,
                if min.upper_bound_only { "upper bound only" } else { "certified" },
                closed.map(|c| format!(", closed form {c}")).unwrap_or_default()
            );
            s.push_str(&witness_lines(&min.witness));
            s
        }
    };
    let code = if matches == Some(false) && !min.upper_bound_only { 1 } else { 0 };
    Ok(Outcome { code, stdout })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub t: usize,
    pub smin: usize,
    pub smax: usize,
    pub family: &'static str,
    pub optimal_length: RationalLength,
    pub achieved: Option<RationalLength>,
    pub valid: bool,
    #[serde(rename = "match")]
    pub matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn sweep_grid(m_min: usize, m_max: usize, t_max: usize, family: SweepFamily) -> Vec<(Family, usize, usize, usize, usize)> {
    let mut grid = Vec::new();
    for m in m_min.max(2)..=m_max {
        for t in 1..=t_max.min(m - 1) {
            if matches!(family, SweepFamily::Consecutive | SweepFamily::Both) {
                for smin in 0..=m - t {
                    for smax in smin.max(1)..=m - t {
                        grid.push((Family::Consecutive, m, t, smin, smax));
                    }
                }
            }
            if matches!(family, SweepFamily::Complement | SweepFamily::Both) {
                for smin in 1..m - t {
                    for smax in smin..m - t {
                        grid.push((Family::Complement, m, t, smin, smax));
                    }
                }
            }
        }
    }
    grid
}

fn sweep(
    format: Format,
    m_min: usize,
    m_max: usize,
    t_max: usize,
    family: SweepFamily,
    seed: u64,
    retry_budget: u32,
) -> Result<Outcome> {
    let grid = sweep_grid(m_min, m_max, t_max, family);
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&(fam, m, t, smin, smax)| -> Result<SweepRow> {
            let inst = match fam {
                Family::Consecutive => ProblemInstance::consecutive(m, t, smin, smax)?,
                Family::Complement => ProblemInstance::complement(m, t, smin, smax)?,
            };
            let optimum = optimal_length(&inst)?.value;
            let options = ConstructOptions { field: None, seed, retry_budget };
            let label = match fam {
                Family::Consecutive => "consecutive",
                Family::Complement => "complement",
            };
            let mut row = SweepRow {
                m,
                t,
                smin,
                smax,
                family: label,
                optimal_length: optimum,
                achieved: None,
                valid: false,
                matches: false,
                error: None,
            };
            match synthesize(&inst, &options) {
                Ok(code) => {
                    row.valid = validate(&code).valid;
                    row.matches = code.length() == optimum;
                    row.achieved = Some(code.length());
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let all_ok = rows.iter().all(|r| r.valid && r.matches);
    let stdout = match format {
        Format::Json => to_json(&rows)?,
        Format::Text => {
            let mut s = format!(
                "{:>3} {:>2} {:>4} {:>4} {:<11} {:>8} {:>8} {:>5} {:>5}\n",
                "m", "t", "smin", "smax", "family", "optimum", "achieved", "valid", "match"
            );
            for r in &rows {
                writeln!(
                    s,
                    "{:>3} {:>2} {:>4} {:>4} {:<11} {:>8} {:>8} {:>5} {:>5}",
                    r.m,
                    r.t,
                    r.smin,
                    r.smax,
                    r.family,
                    r.optimal_length.to_string(),
                    r.achieved.map_or_else(|| "-".to_string(), |a| a.to_string()),
                    if r.valid { "yes" } else { "no" },
                    if r.matches { "yes" } else { "no" }
                )
                .unwrap();
            }
            s
        }
    };
    Ok(Outcome { code: if all_ok { 0 } else { 1 }, stdout })
}
