use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use branchlab::groupdef::{parse_group_from, zoo, GroupDef, ZooParams, DEFAULT_DEGREE_LIMIT};
use branchlab::hausdorff::{gs_oracle_sequence, hdim_report, log_index_sequence, Ambient};
use branchlab::quotient::{congruence_quotient, DEFAULT_NODE_CAP};
use branchlab::reproduce;
use branchlab::rigidity::{
    augmentation_witness, check_condition_doublestar, check_condition_n, check_condition_star, check_fractal,
    check_index_equation, cp2_dichotomy_check, filtration_search, lemma63_sample_check, theorem4_classify,
    Criterion, FiltrationVerdict, Theorem4Verdict, Verdict,
};
use branchlab::tree::{KeptLevels, Vertex};
use branchlab::{Error, Result};

const DEEP_NODE_CAP: usize = 10_000_000;
const DEEP_DEGREE_LIMIT: usize = 2_000_000;

#[derive(Parser)]
#[command(name = "branchlab", version, about = "Congruence quotients, Hausdorff dimension and rigidity checks for groups acting on rooted trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GroupArgs {
    /// `zoo:NAME`, `oracle:gs` (hdim only) or a group file.
    #[arg(long)]
    group: String,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    /// GGS defining vector, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    e: Option<Vec<i64>>,
    /// Act on the deleted-level tree `T_n` instead (only for `zoo:gn`).
    #[arg(long)]
    deleted: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a group file and print generator truncations.
    Parse {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        check_depth: usize,
    },
    /// Order of the congruence quotient at a depth.
    Quotient {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        depth: usize,
        /// Output is JSON either way.
        #[arg(long)]
        json: bool,
    },
    /// Log-index sequence, `s_n` and partial sums.
    Hdim {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        max_depth: usize,
        #[arg(long, default_value = "wp")]
        ambient: Ambient,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Rigidity criteria.
    Rigidity {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, value_delimiter = ',', default_value = "star,doublestar,N,fractal,theorem4,cp2")]
        criteria: Vec<Criterion>,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Subgroups above a vertex stabilizer and the filtrations through them.
    Filtration {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        vertex: Vertex,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        max_index: usize,
        /// Raise the enumeration budget and the degree limit.
        #[arg(long)]
        deep: bool,
        #[arg(long)]
        json: bool,
    },
    /// Checks for the groups `G_n`: `index-equation`, `lemma63` or `witness`.
    Gn {
        #[arg(long)]
        check: String,
        #[arg(long, default_value_t = 5)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// `l` for the index equation.
        #[arg(long, default_value_t = 2)]
        l: u32,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 7)]
        depth: usize,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Runs the acceptance checks.
    Reproduce {
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Include the depth-7 `G_n` computations (minutes).
        #[arg(long)]
        deep: bool,
        #[arg(long, default_value_t = 4)]
        threads: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn degree_limit() -> Result<usize> {
    match std::env::var("BRANCHLAB_DEGREE_LIMIT") {
        Ok(v) => v
            .parse()
            .map_err(|_| Error::InvalidParams(format!("BRANCHLAB_DEGREE_LIMIT must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_DEGREE_LIMIT),
    }
}

fn load(args: &GroupArgs, limit: usize) -> Result<GroupDef> {
    let def = if let Some(name) = args.group.strip_prefix("zoo:") {
        let zp = ZooParams { p: args.p, n: args.n, e: args.e.clone(), degree_limit: Some(limit) };
        zoo(name, &zp)?
    } else {
        let text = std::fs::read_to_string(&args.group)
            .map_err(|e| Error::Io(format!("cannot read `{}`: {e}", args.group)))?;
        parse_group_from(&text, &args.group, limit)?
    };
    if !args.deleted {
        return Ok(def);
    }
    let gp = def
        .gn_params()
        .copied()
        .ok_or_else(|| Error::InvalidParams("--deleted needs zoo:gn".into()))?;
    def.induce_on_deleted(&KeptLevels::gn(gp.p, gp.n)?)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

/// Exit status of a successful run: 0, or 2 when a report carries a failure verdict.
type Status = u8;

fn cmd_parse(file: &PathBuf, depth: usize) -> Result<Status> {
    let text = std::fs::read_to_string(file).map_err(|e| Error::Io(format!("cannot read `{}`: {e}", file.display())))?;
    let def = parse_group_from(&text, &file.display().to_string(), degree_limit()?)?;
    let mut levels = Vec::new();
    for k in 1..=depth {
        let perms = def.generator_perms(k)?;
        let gens: Vec<Value> = def
            .generator_names()
            .into_iter()
            .zip(perms)
            .map(|(name, g)| json!({ "name": name, "perm": g.to_cycle_string() }))
            .collect();
        levels.push(json!({ "depth": k, "generators": gens }));
    }
    print_json(&json!({
        "group": def.source(),
        "tree": def.shape().literal(),
        "generators": def.generator_names(),
        "truncations": levels,
    }))?;
    Ok(0)
}

fn cmd_quotient(group: &GroupArgs, depth: usize) -> Result<Status> {
    let def = load(group, degree_limit()?)?;
    print_json(&congruence_quotient(&def, depth)?.report())?;
    Ok(0)
}

fn cmd_hdim(group: &GroupArgs, max_depth: usize, ambient: Ambient, format: Format) -> Result<Status> {
    let seq = match group.group.as_str() {
        "oracle:gs" => {
            let p = group.p.ok_or_else(|| Error::InvalidParams("oracle:gs needs --p".into()))?;
            gs_oracle_sequence(p, max_depth)?
        }
        _ => log_index_sequence(&load(group, degree_limit()?)?, max_depth, ambient)?,
    };
    let rep = hdim_report(&seq)?;
    match format {
        Format::Json => print_json(&json!({ "sequence": seq, "report": rep }))?,
        Format::Csv => rep.write_csv(std::io::stdout().lock())?,
    }
    Ok(0)
}

fn cmd_rigidity(group: &GroupArgs, criteria: &[Criterion], depth: usize, samples: usize, seed: u64) -> Result<Status> {
    let def = load(group, degree_limit()?)?;
    let mut reports = Vec::new();
    let mut failed = false;
    for c in criteria {
        let value = match c {
            Criterion::Theorem4 => {
                let r = theorem4_classify(&def, depth)?;
                failed |= r.verdict == Theorem4Verdict::NotRigid;
                serde_json::to_value(&r)
            }
            other => {
                let r = match other {
                    Criterion::Star => check_condition_star(&def, depth)?,
                    Criterion::DoubleStar => check_condition_doublestar(&def, depth)?,
                    Criterion::N => check_condition_n(&def, depth)?,
                    Criterion::Fractal => check_fractal(&def, depth)?,
                    Criterion::Cp2 => cp2_dichotomy_check(&def, depth, samples, seed)?,
                    Criterion::Theorem4 => unreachable!("handled above"),
                };
                failed |= r.verdict == Verdict::FailsWithWitness;
                serde_json::to_value(&r)
            }
        };
        reports.push(value.map_err(|e| Error::Io(e.to_string()))?);
    }
    print_json(&json!({ "group": def.source(), "depth": depth, "seed": seed, "reports": reports }))?;
    Ok(if failed { 2 } else { 0 })
}

fn cmd_filtration(group: &GroupArgs, w: &Vertex, depth: usize, max_index: usize, deep: bool) -> Result<Status> {
    let limit = if deep { degree_limit()?.max(DEEP_DEGREE_LIMIT) } else { degree_limit()? };
    let def = load(group, limit)?;
    let cap = if deep { DEEP_NODE_CAP } else { DEFAULT_NODE_CAP };
    let rep = filtration_search(&def, w, depth, max_index, cap)?;
    print_json(&rep)?;
    Ok(if rep.verdict == FiltrationVerdict::RefutesRigidity { 2 } else { 0 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_gn(check: &str, p: u64, n: usize, l: u32, budget: Option<u64>, depth: usize, samples: usize, seed: u64) -> Result<Status> {
    match check {
        "index-equation" => {
            let r = check_index_equation(p, l, budget.unwrap_or(l as u64))?;
            print_json(&r)?;
            Ok(if r.agrees { 0 } else { 2 })
        }
        "lemma63" => {
            let r = lemma63_sample_check(p, n, depth, samples, seed)?;
            print_json(&r)?;
            Ok(if r.all_hold { 0 } else { 2 })
        }
        "witness" => {
            let r = augmentation_witness(p, n, depth)?;
            print_json(&r)?;
            Ok(if r.climbing_fails { 2 } else { 0 })
        }
        other => Err(Error::InvalidParams(format!(
            "unknown check `{other}` (known: index-equation, lemma63, witness)"
        ))),
    }
}

fn cmd_reproduce(only: &[String], deep: bool, threads: usize, seed: u64, as_json: bool) -> Result<Status> {
    let ids = reproduce::select(only, deep)?;
    let outcomes = reproduce::run(&ids, seed, threads)?;
    if as_json {
        print_json(&outcomes)?;
    } else {
        let mut out = std::io::stdout().lock();
        for o in &outcomes {
            let mark = if o.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{mark}  {:<24} {:>8.2}s  {}", o.id, o.seconds, o.detail).map_err(|e| Error::Io(e.to_string()))?;
        }
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.as_str()).collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("failed: {}", failed.join(", "));
        Ok(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Parse { file, check_depth } => cmd_parse(file, *check_depth),
        Command::Quotient { group, depth, .. } => cmd_quotient(group, *depth),
        Command::Hdim { group, max_depth, ambient, format } => cmd_hdim(group, *max_depth, *ambient, *format),
        Command::Rigidity { group, criteria, depth, samples, seed, .. } => {
            cmd_rigidity(group, criteria, *depth, *samples, *seed)
        }
        Command::Filtration { group, vertex, depth, max_index, deep, .. } => {
            cmd_filtration(group, vertex, *depth, *max_index, *deep)
        }
        Command::Gn { check, p, n, l, budget, depth, samples, seed } => {
            cmd_gn(check, *p, *n, *l, *budget, *depth, *samples, *seed)
        }
        Command::Reproduce { only, deep, threads, seed, json } => cmd_reproduce(only, *deep, *threads, *seed, *json),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
