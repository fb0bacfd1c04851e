use crate::{CoalitionsArgs, Format, ListArgs, ListMethod, Method, OracleArgs, PropertiesArgs, TabulateArgs};
use anyhow::{bail, Context, Result};
use phragmen::methods::{bottom_up_list, irv, quota_phragmen, top_down_list};
use phragmen::oracle::{all_constraints, check_droop, coalitions_json, droop_compliant_sets, DroopVerdict, OracleConfig};
use phragmen::properties::{run_suite, GeneratorConfig, Suite, SuiteReport};
use phragmen::{engine::droop_quota, parse_profile, BallotProfile, ProportionalList, Rational, Scalar};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub struct Run {
    pub output: String,
    pub verification_failed: bool,
}

fn load(path: &Path) -> Result<BallotProfile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_profile(&text).with_context(|| format!("parsing {}", path.display()))
}

fn names(profile: &BallotProfile, order: &[usize]) -> Vec<String> {
    order.iter().map(|&c| profile.name(c).to_string()).collect()
}

fn oracle_config(args: &OracleArgs) -> OracleConfig {
    OracleConfig {
        max_candidates: args.max_candidates,
        exhaustive: false,
    }
}

fn render_verdict(out: &mut String, profile: &BallotProfile, verdict: &DroopVerdict) {
    let seats = match verdict.seats {
        1 => "1 seat".to_string(),
        n => format!("{n} seats"),
    };
    if verdict.is_compliant() {
        let _ = writeln!(out, "Droop check ({seats}): compliant");
        return;
    }
    let _ = writeln!(out, "Droop check ({seats}): VIOLATED");
    for v in &verdict.violations {
        let _ = writeln!(
            out,
            "  {} requires {} winners, has {}",
            v.preferred.display(profile),
            v.required,
            v.elected
        );
    }
}

/// A list, the captions of its counts, and which positions were requested.
struct ListRun {
    list: ProportionalList,
    depth: usize,
    method: ListMethod,
}

fn run_list(profile: &BallotProfile, method: ListMethod, depth: usize) -> Result<ListRun> {
    let n = profile.num_candidates();
    if depth == 0 || depth > n {
        bail!("depth {depth} is outside 1..={n}");
    }
    let list = match method {
        ListMethod::TopDown => top_down_list::<Rational>(profile, depth)?,
        ListMethod::BottomUp => bottom_up_list::<Rational>(profile)?,
    };
    Ok(ListRun { list, depth, method })
}

fn list_caption(profile: &BallotProfile, run: &ListRun, position: usize) -> String {
    let prior = names(profile, &run.list.order[..position - 1]).join(", ");
    match run.method {
        ListMethod::TopDown if position == 1 => "Position 1: one winner".to_string(),
        ListMethod::TopDown => format!("Position {position}: {position} winners, previously elected {prior}"),
        ListMethod::BottomUp => {
            let removed = names(profile, &run.list.order[position..]).join(", ");
            let winners = position - 1;
            let plural = if winners == 1 { "" } else { "s" };
            let mut caption = format!("Position {position}: {winners} winner{plural} from {position} candidates");
            if !removed.is_empty() {
                let _ = write!(caption, ", {removed} removed");
            }
            caption
        }
    }
}

fn emit_list(profile: &BallotProfile, run: &ListRun, oracle: &OracleArgs, format: Format) -> Result<Run> {
    let label = match run.method {
        ListMethod::TopDown => "top-down",
        ListMethod::BottomUp => "bottom-up",
    };
    let shown = &run.list.order[..run.depth.min(run.list.order.len())];
    // bottom-up logs are indexed by the position they decide, last first
    let positions: Vec<usize> = match run.method {
        ListMethod::TopDown => (1..=run.depth).collect(),
        ListMethod::BottomUp => (1..=run.list.order.len()).rev().collect(),
    };
    let verdicts = if oracle.verify_droop {
        let cfg = oracle_config(oracle);
        (1..=shown.len())
            .map(|k| check_droop(profile, &shown[..k], &cfg))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let failed = verdicts.iter().any(|v| !v.is_compliant());
    let output = match format {
        Format::Table => {
            let mut out = String::new();
            if !profile.title().is_empty() {
                let _ = writeln!(out, "{}", profile.title());
            }
            let _ = writeln!(out, "Method: {label} list\n");
            for &pos in &positions {
                let log = &run.list.logs[pos - 1];
                if log.is_empty() {
                    continue;
                }
                out.push_str(&log.render_table(profile, &list_caption(profile, run, pos)));
                out.push('\n');
            }
            let _ = writeln!(out, "List: {}", names(profile, shown).join(" > "));
            for v in &verdicts {
                render_verdict(&mut out, profile, v);
            }
            out
        }
        Format::Json => {
            let counts: Vec<Value> = positions
                .iter()
                .filter(|&&p| !run.list.logs[p - 1].is_empty())
                .map(|&p| {
                    json!({
                        "position": p,
                        "caption": list_caption(profile, run, p),
                        "log": run.list.logs[p - 1].to_json(profile),
                    })
                })
                .collect();
            let doc = json!({
                "title": profile.title(),
                "method": label,
                "list": names(profile, shown),
                "tie_broken": run.list.tie_flag,
                "counts": counts,
                "droop": verdicts.iter().map(|v| v.to_json(profile)).collect::<Vec<_>>(),
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    Ok(Run {
        output,
        verification_failed: failed,
    })
}

pub fn tabulate(args: &TabulateArgs) -> Result<Run> {
    let profile = load(&args.input)?;
    let list_method = match args.method {
        Method::TopDown => Some(ListMethod::TopDown),
        Method::BottomUp => Some(ListMethod::BottomUp),
        _ => None,
    };
    if let Some(method) = list_method {
        let depth = args.depth.or(args.seats).unwrap_or(profile.num_candidates());
        let run = run_list(&profile, method, depth)?;
        return emit_list(&profile, &run, &args.oracle, args.format);
    }
    let seats = args.seats.unwrap_or(profile.seats());
    let (result, label, caption) = match args.method {
        Method::Irv => (irv::<Rational>(&profile)?, "irv", "Instant runoff".to_string()),
        _ => {
            let quota: Rational = droop_quota(profile.total_weight().max(1), seats.max(1))?;
            let (q, _) = quota.to_decimal(2);
            (
                quota_phragmen::<Rational>(&profile, seats)?,
                "quota-phragmen",
                format!("Quota-based Phragmén, {seats} seats, quota {q}"),
            )
        }
    };
    let verdict = if args.oracle.verify_droop {
        Some(check_droop(&profile, &result.winners, &oracle_config(&args.oracle))?)
    } else {
        None
    };
    let failed = verdict.as_ref().is_some_and(|v| !v.is_compliant());
    let output = match args.format {
        Format::Table => {
            let mut out = String::new();
            if !profile.title().is_empty() {
                let _ = writeln!(out, "{}", profile.title());
            }
            let _ = writeln!(out, "Method: {label}\n");
            out.push_str(&result.log.render_table(&profile, &caption));
            let _ = writeln!(out, "\nWinners: {}", names(&profile, &result.winners).join(", "));
            if let Some(v) = &verdict {
                render_verdict(&mut out, &profile, v);
            }
            out
        }
        Format::Json => {
            let doc = json!({
                "title": profile.title(),
                "method": label,
                "winners": names(&profile, &result.winners),
                "tie_broken": result.tie_flag,
                "log": result.log.to_json(&profile),
                "droop": verdict.map(|v| v.to_json(&profile)),
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    Ok(Run {
        output,
        verification_failed: failed,
    })
}

pub fn list(args: &ListArgs) -> Result<Run> {
    let profile = load(&args.input)?;
    let depth = args.depth.unwrap_or(profile.num_candidates());
    let run = run_list(&profile, args.method, depth)?;
    emit_list(&profile, &run, &args.oracle, args.format)
}

pub fn coalitions(args: &CoalitionsArgs) -> Result<Run> {
    let profile = load(&args.input)?;
    let seats = args.seats.unwrap_or(profile.seats());
    let cfg = OracleConfig {
        max_candidates: args.max_candidates,
        exhaustive: args.exhaustive,
    };
    let constraints = all_constraints(&profile, seats, &cfg)?;
    let sets = droop_compliant_sets(&profile, seats, &cfg)?;
    let output = match args.format {
        Format::Table => {
            let mut out = String::new();
            let quota: Rational = droop_quota(profile.total_weight().max(1), seats)?;
            let (q, inexact) = quota.to_decimal(2);
            let _ = writeln!(
                out,
                "Seats: {seats}, Droop quota: {q}{}",
                if inexact { "~" } else { "" }
            );
            let _ = writeln!(out, "Constraints (floor >= 1):");
            let width = constraints
                .iter()
                .map(|c| c.preferred.display(&profile).len())
                .max()
                .unwrap_or(0);
            for c in &constraints {
                let _ = writeln!(
                    out,
                    "  {:<width$}  support {:>4}  floor {}",
                    c.preferred.display(&profile),
                    c.support,
                    c.floor
                );
            }
            let _ = writeln!(out, "Droop-compliant {seats}-sets:");
            for s in &sets {
                let _ = writeln!(out, "  {}", s.display(&profile));
            }
            out
        }
        Format::Json => serde_json::to_string_pretty(&coalitions_json(&profile, seats, &constraints, &sets))? + "\n",
    };
    Ok(Run {
        output,
        verification_failed: false,
    })
}

fn write_counterexamples(dir: &Path, report: &SuiteReport) -> Result<Vec<String>> {
    if report.counterexamples.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for c in &report.counterexamples {
        for (k, profile) in c.profiles.iter().enumerate() {
            let path = dir.join(format!("{}-{}-{}.blt", report.suite, c.index, k));
            let body = format!("# {}: {}\n{}", report.suite, c.message.replace('\n', " "), profile.to_blt());
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            written.push(path.display().to_string());
        }
    }
    Ok(written)
}

pub fn properties(args: &PropertiesArgs) -> Result<Run> {
    let config = GeneratorConfig {
        min_candidates: args.min_candidates,
        max_candidates: args.candidates,
        max_weight: args.max_weight,
    };
    if let Err(msg) = config.validate() {
        bail!(msg);
    }
    let suites: Vec<Suite> = if args.suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        args.suites
            .iter()
            .map(|s| s.parse::<Suite>().map_err(anyhow::Error::msg))
            .collect::<Result<_>>()?
    };
    let mut reports = Vec::new();
    let mut files = Vec::new();
    for suite in suites {
        let report = run_suite(suite, args.seed, args.profiles, &config);
        files.push(write_counterexamples(&args.out, &report)?);
        reports.push(report);
    }
    let failed = reports.iter().any(|r| !r.ok());
    let output = match args.format {
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "seed {}, {} profiles per suite, {}..={} candidates, total weight <= {}",
                args.seed, args.profiles, config.min_candidates, config.max_candidates, config.max_weight
            );
            for (report, written) in reports.iter().zip(&files) {
                let _ = writeln!(out, "{report}");
                for c in &report.counterexamples {
                    let _ = writeln!(out, "  run {}: {}", c.index, c.message);
                }
                for f in written {
                    let _ = writeln!(out, "  wrote {f}");
                }
            }
            out
        }
        Format::Json => {
            let doc: Vec<Value> = reports
                .iter()
                .zip(&files)
                .map(|(r, written)| {
                    json!({
                        "suite": r.suite.name(),
                        "target": r.target,
                        "passed": r.passed,
                        "failed": r.failed,
                        "tied_skipped": r.tied,
                        "counterexamples": written,
                    })
                })
                .collect();
            serde_json::to_string_pretty(&json!({ "seed": args.seed, "suites": doc }))? + "\n"
        }
    };
    Ok(Run {
        output,
        verification_failed: failed,
    })
}
