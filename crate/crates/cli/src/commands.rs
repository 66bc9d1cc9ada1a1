use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use cubesec::acceptance::{self, AcceptanceConfig, Criterion, ALL};
use cubesec::bounds::{bounds_report, extremal_frame};
use cubesec::conditions::verify_section;
use cubesec::frame::FrameFile;
use cubesec::optimizer::{maximize, OptimizerConfig};
use cubesec::polytope::build_section;
use cubesec::{Frame, Tolerances, TightFrame};

use crate::manifest::Run;
use crate::{Format, OptimizeArgs, ReproduceArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: malformed frame file: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] cubesec::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub struct Context {
    pub format: Format,
    pub seed: u64,
}

/// Honors CUBESEC_THREADS as a cap on the worker pool.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("CUBESEC_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("CUBESEC_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Parse errors exit 2; a well-formed file that is not a frame exits 3.
/// Reads a frame file, or the best frame of an `optimize` result file.
fn load_frame(path: &Path) -> Result<Frame> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let parse_err = |e: serde_json::Error| CliError::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(parse_err)?;
    let value = match value.get("best").cloned() {
        Some(best) if value.get("vectors").is_none() => best,
        _ => value,
    };
    let file: FrameFile = serde_json::from_value(value).map_err(parse_err)?;
    Ok(Frame::try_from(file)?)
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn print_rows(rows: &[(&str, String)]) {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    for (k, v) in rows {
        println!("{k:<width$}  {v}");
    }
}

fn note_manifest(path: Option<PathBuf>) {
    if let Some(p) = path {
        eprintln!("manifest: {}", p.display());
    }
}

#[derive(Serialize)]
struct VolumeReport {
    n: usize,
    k: usize,
    volume: f64,
    triangulated_volume: f64,
    vertices: usize,
    facets: usize,
    tight: bool,
}

pub fn volume(ctx: &Context, path: &Path) -> Result<u8> {
    let frame = load_frame(path)?;
    let tol = Tolerances::default();
    let p = build_section(&frame, &tol)?;
    let report = VolumeReport {
        n: frame.n(),
        k: frame.k(),
        volume: p.volume(),
        triangulated_volume: p.polytope.triangulated_volume(),
        vertices: p.vertices().len(),
        facets: p.facets().len(),
        tight: frame.operator().identity_deviation() <= tol.tight,
    };
    match ctx.format {
        Format::Json => print_json(&report),
        Format::Table => print_rows(&[
            ("n", report.n.to_string()),
            ("k", report.k.to_string()),
            ("volume", report.volume.to_string()),
            ("triangulated", report.triangulated_volume.to_string()),
            ("vertices", report.vertices.to_string()),
            ("facets", report.facets.to_string()),
            ("tight", report.tight.to_string()),
        ]),
    }
    Ok(0)
}

pub fn report(ctx: &Context, path: &Path, out: Option<&Path>) -> Result<u8> {
    let frame = load_frame(path)?;
    let p = build_section(&frame, &Tolerances::default())?;
    let dump = json!({
        "volume": p.volume(),
        "section": &p,
    });
    match out {
        Some(out) => {
            let mut run = Run::new("report", json!({ "frame": path }), ctx.seed);
            run.input(path);
            run.write_json(out, &dump).map_err(io_err(out))?;
            note_manifest(run.finish().map_err(io_err(out))?);
            if ctx.format == Format::Table {
                print_rows(&[
                    ("volume", p.volume().to_string()),
                    ("vertices", p.vertices().len().to_string()),
                    ("facets", p.facets().len().to_string()),
                    ("written", out.display().to_string()),
                ]);
            }
        }
        None => print_json(&dump),
    }
    Ok(0)
}

pub fn verify(ctx: &Context, path: &Path, tol: f64) -> Result<u8> {
    if !(tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let tols = Tolerances::default().with_condition_tol(tol);
    let frame = TightFrame::new(load_frame(path)?, &tols)?;
    let p = build_section(&frame, &tols)?;
    let report = verify_section(&frame, &p, &tols);
    match ctx.format {
        Format::Json => print_json(&report),
        Format::Table => {
            println!("{:<22} {:>6} {:>12} {:>10}", "condition", "result", "residual", "tolerance");
            println!("{:<22} {:>6}", "section_identity", "holds");
            for (name, c) in report.checks() {
                println!(
                    "{:<22} {:>6} {:>12.3e} {:>10.1e}{}",
                    name,
                    if c.passed { "pass" } else { "FAIL" },
                    c.residual,
                    c.tolerance,
                    c.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default()
                );
            }
        }
    }
    Ok(if report.passed() { 0 } else { 1 })
}

pub fn bounds(ctx: &Context, n: usize, k: usize, frame: Option<&Path>) -> Result<u8> {
    let frame = frame.map(load_frame).transpose()?;
    let r = bounds_report(n, k, frame.as_ref(), &Tolerances::default())?;
    match ctx.format {
        Format::Json => print_json(&r),
        Format::Table => {
            let mut rows = vec![
                ("n", r.n.to_string()),
                ("k", r.k.to_string()),
                ("vaaler (2^k)", r.vaaler.to_string()),
                ("affine cube 2^k·C", r.conjectured_max.to_string()),
                ("ball upper", r.ball_upper.to_string()),
                ("C(n,k)", r.c_cube.to_string()),
                ("ball ratio", r.ball_ratio.to_string()),
            ];
            if let (Some(a), Some(p)) = (r.achieved, r.position) {
                rows.push(("achieved", a.to_string()));
                rows.push(("position in [vaaler, ball]", format!("{p:.6}")));
            }
            print_rows(&rows);
        }
    }
    Ok(0)
}

fn parse_partition(s: &str) -> Result<Vec<Vec<usize>>> {
    s.split('/')
        .map(|part| {
            part.split(',')
                .map(|i| {
                    i.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Usage(format!("bad partition index {i:?}")))
                })
                .collect()
        })
        .collect()
}

fn parse_signs(s: &str) -> Result<Vec<i8>> {
    s.split(',')
        .map(|x| match x.trim() {
            "1" | "+1" | "+" => Ok(1),
            "-1" | "-" => Ok(-1),
            other => Err(CliError::Usage(format!("bad sign {other:?}"))),
        })
        .collect()
}

pub fn construct_extremal(
    ctx: &Context,
    n: usize,
    k: usize,
    partition: Option<&str>,
    signs: Option<&str>,
    out: Option<&Path>,
) -> Result<u8> {
    let parts = partition.map(parse_partition).transpose()?;
    let signs = signs.map(parse_signs).transpose()?;
    let tol = Tolerances::default();
    let frame = extremal_frame(n, k, parts.as_deref(), signs.as_deref(), &tol)?;
    let vol = build_section(&frame, &tol)?.volume();
    match out {
        Some(out) => {
            let config = json!({ "n": n, "k": k, "partition": partition, "signs": signs });
            let mut run = Run::new("construct-extremal", config, ctx.seed);
            run.write_json(out, &frame).map_err(io_err(out))?;
            note_manifest(run.finish().map_err(io_err(out))?);
            if ctx.format == Format::Table {
                print_rows(&[("volume", vol.to_string()), ("written", out.display().to_string())]);
            }
        }
        None => print_json(&frame),
    }
    Ok(0)
}

pub fn optimize(ctx: &Context, args: &OptimizeArgs) -> Result<u8> {
    let config = OptimizerConfig {
        restarts: args.restarts,
        max_iterations: args.iterations,
        initial_step: args.initial_step,
        decay: args.decay,
        seed: ctx.seed,
        warm_start: !args.no_warm_start,
        ..OptimizerConfig::new(args.n, args.k)
    };
    let result = maximize(&config)?;
    if result.exceeds_conjecture {
        eprintln!(
            "!! n = {}, k = {}: volume {} exceeds the affine-cube value {} — counterexample candidate",
            args.n, args.k, result.best_volume, result.conjectured_max
        );
    }

    let mut run = Run::new("optimize", serde_json::to_value(&config).expect("serializable"), ctx.seed);
    if let Some(out) = &args.out {
        run.write_json(out, &result).map_err(io_err(out))?;
    }
    if let Some(trace) = &args.trace {
        let mut csv = String::from("restart,iteration,volume\n");
        for r in &result.restarts {
            for t in &r.trace {
                writeln!(csv, "{},{},{}", r.index, t.iteration, t.volume).unwrap();
            }
        }
        run.write_text(trace, &csv).map_err(io_err(trace))?;
    }
    let manifest_target = args.out.as_deref().or(args.trace.as_deref()).unwrap_or(Path::new("."));
    note_manifest(run.finish().map_err(io_err(manifest_target))?);

    match ctx.format {
        Format::Json => {
            if args.out.is_none() {
                print_json(&result);
            } else {
                print_json(&json!({
                    "best_volume": result.best_volume,
                    "best_restart": result.best_restart,
                    "conjectured_max": result.conjectured_max,
                    "exceeds_conjecture": result.exceeds_conjecture,
                    "conditions_passed": result.conditions.passed(),
                }));
            }
        }
        Format::Table => {
            let cold = result
                .cold_best()
                .map_or_else(|| "-".to_string(), |c| format!("{} (restart {})", c.volume, c.index));
            print_rows(&[
                ("n", args.n.to_string()),
                ("k", args.k.to_string()),
                ("best volume", result.best_volume.to_string()),
                ("best restart", result.best_restart.to_string()),
                ("best cold start", cold),
                ("affine cube 2^k·C", result.conjectured_max.to_string()),
                ("conditions", if result.conditions.passed() { "pass" } else { "FAIL" }.to_string()),
            ]);
        }
    }
    Ok(0)
}

pub fn reproduce(ctx: &Context, args: &ReproduceArgs) -> Result<u8> {
    let criteria: Vec<Criterion> = if args.only.is_empty() {
        ALL.to_vec()
    } else {
        args.only
            .iter()
            .map(|s| {
                Criterion::parse(s).ok_or_else(|| {
                    let ids: Vec<&str> = ALL.iter().map(|c| c.id()).collect();
                    CliError::Usage(format!("unknown criterion {s:?}; expected 1-10 or one of {}", ids.join(", ")))
                })
            })
            .collect::<Result<_>>()?
    };
    if !(args.eps_tight > 0.0) {
        return Err(CliError::Usage("--eps-tight must be positive".into()));
    }
    let config = AcceptanceConfig {
        seed: ctx.seed,
        n_max: args.n_max,
        restarts: args.restarts,
        samples: args.samples,
        tolerances: Tolerances {
            tight: args.eps_tight,
            ..Tolerances::default()
        },
    };
    let outcomes = acceptance::run(config.clone(), &criteria)?;
    let all_passed = outcomes.iter().all(|o| o.passed);

    if let Some(out) = &args.out {
        let mut run = Run::new("reproduce", serde_json::to_value(&config).expect("serializable"), ctx.seed);
        run.write_json(out, &json!({ "passed": all_passed, "outcomes": &outcomes }))
            .map_err(io_err(out))?;
        note_manifest(run.finish().map_err(io_err(out))?);
    }
    match ctx.format {
        Format::Json => print_json(&json!({ "passed": all_passed, "outcomes": &outcomes })),
        Format::Table => {
            for o in &outcomes {
                println!("{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} passed, {failed} failed", outcomes.len() - failed);
        }
    }
    Ok(if all_passed { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_and_signs_parse() {
        assert_eq!(parse_partition("0,1,2/3,4").unwrap(), vec![vec![0, 1, 2], vec![3, 4]]);
        assert!(parse_partition("0,x").is_err());
        assert_eq!(parse_signs("1,-1,+").unwrap(), vec![1, -1, 1]);
        assert!(parse_signs("2").is_err());
    }
}
