//! `fanweaver` command-line tool.
//!
//! Exit codes: 0 success, 1 verification negative, 2 invalid input,
//! 3 realization or search failure, 4 resource limit.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use fanweaver::atlas::{certificate_for, Atlas, AtlasEntry};
use fanweaver::enumerate::{enumerate_spheres, EnumerateError, EnumerationLimits};
use fanweaver::fan::{Certificate, ProbeConfig, VerificationReport};
use fanweaver::ops::write_script;
use fanweaver::planar_io::{read_planar_code, read_text, write_planar_code, write_text, PLANAR_CODE_HEADER};
use fanweaver::realize::{realize_with, satisfies_hypothesis, RealizeError, SearchConfig};
use fanweaver::{validate, Triangulation};

#[derive(Parser)]
#[command(name = "fanweaver", version, about = "Realize simplicial 2-spheres as non-singular complete fans")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for probe rays and search ordering.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for census and batch realization (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate spheres; print degree profiles.
    Validate {
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Count spheres by vertex count.
    Census {
        #[arg(long)]
        max_vertices: usize,
        #[arg(long, default_value_t = 5)]
        min_degree: usize,
        /// Write every sphere of minimum degree at least `--min-degree` as planar_code.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        memory_gib: usize,
        #[arg(long)]
        time_limit_secs: Option<u64>,
    },
    /// Realize spheres as fans.
    Realize {
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Coordinate bound of the fallback search.
        #[arg(long, default_value_t = 3)]
        bound: i64,
        /// Node budget of the fallback search.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        /// Certificate output (single input only).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Operation script output (single input only).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Verify a certificate.
    Verify { certificate: PathBuf },
    /// Inspect the atlas of minimum-degree-5 spheres.
    Atlas {
        #[command(subcommand)]
        action: AtlasAction,
    },
    /// Convert between text, planar_code and certificate files.
    Convert {
        input: PathBuf,
        #[arg(long, value_enum)]
        from: Option<Format>,
        #[arg(long, value_enum)]
        to: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AtlasAction {
    List,
    Show { label: String },
    VerifyAll,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    PlanarCode,
    Certificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Success = 0,
    Negative = 1,
    Invalid = 2,
    Failed = 3,
    Resource = 4,
}

struct Failure(Status, String);

type CmdResult = Result<Status, Failure>;

fn invalid(msg: impl std::fmt::Display) -> Failure {
    Failure(Status::Invalid, msg.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .expect("thread pool");
    }
    let result = match &cli.command {
        Command::Validate { input, format } => cmd_validate(&cli, input, *format),
        Command::Census {
            max_vertices,
            min_degree,
            out,
            memory_gib,
            time_limit_secs,
        } => {
            let limits = EnumerationLimits {
                memory_bytes: memory_gib << 30,
                time_limit: time_limit_secs.map(Duration::from_secs),
            };
            census(&cli, *max_vertices, *min_degree, out.as_deref(), &limits)
        }
        Command::Realize {
            input,
            format,
            bound,
            budget,
            out,
            log,
        } => {
            let cfg = SearchConfig {
                coordinate_bound: *bound,
                node_budget: *budget,
                seed: cli.seed,
            };
            realize(&cli, input, *format, &cfg, out.as_deref(), log.as_deref())
        }
        Command::Verify { certificate } => verify(&cli, certificate),
        Command::Atlas { action } => atlas_cmd(&cli, action),
        Command::Convert { input, from, to, out } => convert(input, *from, *to, out.as_deref()),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(Failure(status, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(status as u8)
        }
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).map_err(invalid)?;
        Ok(buf)
    } else {
        fs::read(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }
}

fn detect(bytes: &[u8]) -> Format {
    if bytes.starts_with(PLANAR_CODE_HEADER) {
        Format::PlanarCode
    } else if bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{') {
        Format::Certificate
    } else {
        Format::Text
    }
}

fn utf8(bytes: &[u8]) -> Result<&str, Failure> {
    std::str::from_utf8(bytes).map_err(|_| invalid("input is not UTF-8 text"))
}

/// Spheres in the input, plus the certificate when the input is one.
fn read_spheres(bytes: &[u8], format: Option<Format>) -> Result<(Vec<Triangulation>, Option<Certificate>), Failure> {
    match format.unwrap_or_else(|| detect(bytes)) {
        Format::PlanarCode => Ok((read_planar_code(bytes).map_err(invalid)?, None)),
        Format::Text => Ok((vec![read_text(utf8(bytes)?).map_err(invalid)?], None)),
        Format::Certificate => {
            let cert = Certificate::from_json(utf8(bytes)?).map_err(invalid)?;
            let t = if cert.vectors.is_empty() {
                let t = validate(&cert.faces).map_err(invalid)?;
                if t.vertex_count() != cert.m {
                    return Err(invalid(format!("declared m = {} but faces use {}", cert.m, t.vertex_count())));
                }
                t
            } else {
                cert.to_fan().map_err(invalid)?.into_parts().0
            };
            Ok((vec![t], Some(cert)))
        }
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::write(p, bytes).map_err(|e| Failure(Status::Invalid, format!("{}: {e}", p.display())))
        }
        _ => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure(Status::Invalid, e.to_string())),
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).unwrap());
}

fn load_atlas() -> Result<Atlas, Failure> {
    match std::env::var_os("FANWEAVER_ATLAS") {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| invalid(format!("{}: {e}", Path::new(&path).display())))?;
            Atlas::parse(&text, true).map_err(invalid)
        }
        None => Ok(Atlas::builtin().clone()),
    }
}

fn cmd_validate(cli: &Cli, input: &Path, format: Option<Format>) -> CmdResult {
    let (spheres, _) = read_spheres(&read_input(input)?, format)?;
    let reports: Vec<Value> = spheres
        .iter()
        .map(|t| {
            let p = t.degree_profile();
            json!({
                "m": t.vertex_count(),
                "edges": t.edge_count(),
                "faces": t.face_count(),
                "degrees": p.counts.iter().map(|(k, c)| (k.to_string(), json!(c))).collect::<serde_json::Map<_, _>>(),
                "euler_sum": p.euler_sum(),
                "min_degree": t.min_degree(),
            })
        })
        .collect();
    if cli.json {
        print_json(&Value::Array(reports));
    } else {
        for (i, t) in spheres.iter().enumerate() {
            let p = t.degree_profile();
            let degrees: Vec<String> = p.counts.iter().map(|(k, c)| format!("{k}^{c}")).collect();
            println!(
                "#{i}: m={} degrees {} euler_sum={} ok",
                t.vertex_count(),
                degrees.join(" "),
                p.euler_sum()
            );
        }
    }
    Ok(Status::Success)
}

fn census(cli: &Cli, max_m: usize, min_degree: usize, out: Option<&Path>, limits: &EnumerationLimits) -> CmdResult {
    if max_m < 4 {
        return Err(invalid("--max-vertices must be at least 4"));
    }
    let mut rows = Vec::new();
    let mut dump = Vec::new();
    for m in 4..=max_m {
        let all = enumerate_spheres(m, None, limits).map_err(|e| match e {
            EnumerateError::ResourceLimit { .. } => Failure(Status::Resource, e.to_string()),
            _ => invalid(e),
        })?;
        let hits: Vec<_> = all.iter().filter(|c| c.min_degree() >= min_degree).collect();
        if out.is_some() {
            dump.extend(hits.iter().map(|c| c.to_triangulation()));
        }
        let row = json!({"m": m, "total": all.len(), "min_degree": min_degree, "with_min_degree": hits.len()});
        if !cli.json {
            println!("{m:>3} {:>10} {:>6}", all.len(), hits.len());
        }
        rows.push(row);
    }
    if cli.json {
        print_json(&Value::Array(rows));
    }
    if let Some(path) = out {
        write_output(Some(path), &write_planar_code(&dump).map_err(invalid)?)?;
    }
    Ok(Status::Success)
}

fn realize(
    cli: &Cli,
    input: &Path,
    format: Option<Format>,
    cfg: &SearchConfig,
    out: Option<&Path>,
    log: Option<&Path>,
) -> CmdResult {
    let (spheres, _) = read_spheres(&read_input(input)?, format)?;
    if spheres.len() != 1 && (out.is_some() || log.is_some()) {
        return Err(invalid("--out and --log need a single input sphere"));
    }
    let atlas = load_atlas()?;
    let results: Vec<_> = spheres.par_iter().map(|t| realize_with(t, cfg, &atlas)).collect();
    let mut status = Status::Success;
    let mut reports = Vec::new();
    for (i, (t, r)) in spheres.iter().zip(&results).enumerate() {
        match r {
            Ok(r) => {
                reports.push(json!({
                    "index": i,
                    "m": t.vertex_count(),
                    "hypothesis": satisfies_hypothesis(t),
                    "base": r.base.to_string(),
                    "reductions": r.log.len(),
                    "nonsingular": r.report.nonsingular,
                    "complete": r.report.complete,
                }));
                if !cli.json {
                    println!(
                        "#{i}: m={} base {} after {} reductions; nonsingular={} complete={}",
                        t.vertex_count(),
                        r.base,
                        r.log.len(),
                        r.report.nonsingular,
                        r.report.complete
                    );
                }
                if let Some(path) = out {
                    write_output(Some(path), (r.fan.to_certificate().to_json() + "\n").as_bytes())?;
                }
                if let Some(path) = log {
                    write_output(Some(path), write_script(&r.script()).as_bytes())?;
                }
            }
            Err(e) => {
                status = Status::Failed;
                reports.push(json!({"index": i, "m": t.vertex_count(), "error": e.to_string()}));
                eprintln!("#{i}: {e}");
                if let RealizeError::RealizationFailed { stuck, .. } = e {
                    eprintln!("stuck sphere:\n{stuck}");
                }
            }
        }
    }
    if cli.json {
        print_json(&Value::Array(reports));
    }
    Ok(status)
}

fn report_json(r: &VerificationReport) -> Value {
    json!({
        "nonsingular": r.nonsingular,
        "complete": r.complete,
        "orientation": r.orientation,
        "bad_faces": r.bad_faces.iter().map(|(f, d)| json!({"face": f, "det": d})).collect::<Vec<_>>(),
        "covering_count": r.covering_count,
        "probes_used": r.probes_used,
    })
}

fn verify(cli: &Cli, path: &Path) -> CmdResult {
    let bytes = read_input(path)?;
    let cert = Certificate::from_json(utf8(&bytes)?).map_err(invalid)?;
    let fan = cert.to_fan().map_err(invalid)?;
    let probe = ProbeConfig {
        seed: cli.seed,
        ..ProbeConfig::default()
    };
    let r = fan
        .verify_with(&probe)
        .map_err(|e| Failure(Status::Negative, e.to_string()))?;
    if cli.json {
        print_json(&report_json(&r));
    } else {
        println!(
            "m={} nonsingular={} complete={} covering_count={}",
            cert.m, r.nonsingular, r.complete, r.covering_count
        );
        for (f, d) in &r.bad_faces {
            println!("  face {f:?} has determinant {d}");
        }
    }
    Ok(if r.is_valid() { Status::Success } else { Status::Negative })
}

fn entry_json(e: &AtlasEntry) -> Value {
    json!({
        "label": e.label,
        "m": e.vertex_count(),
        "star_vertex": e.star_vertex,
        "k": e.star_k(),
        "provenance": e.provenance.as_str(),
    })
}

fn atlas_cmd(cli: &Cli, action: &AtlasAction) -> CmdResult {
    let atlas = load_atlas()?;
    match action {
        AtlasAction::List => {
            if cli.json {
                print_json(&Value::Array(atlas.entries().iter().map(entry_json).collect()));
            } else {
                for e in atlas.entries() {
                    let star = e
                        .star_vertex
                        .map_or("-".to_string(), |v| format!("{v} (k={})", e.star_k().unwrap()));
                    println!("{:<20} m={:<3} star {:<10} {}", e.label, e.vertex_count(), star, e.provenance.as_str());
                }
            }
            Ok(Status::Success)
        }
        AtlasAction::Show { label } => {
            let e = atlas
                .get(label)
                .ok_or_else(|| invalid(format!("unknown atlas label {label:?}")))?;
            let cert = certificate_for(e).map_err(|err| Failure(Status::Negative, err.to_string()))?;
            if cli.json {
                let mut v = entry_json(e);
                v["certificate"] = serde_json::to_value(cert.to_certificate()).unwrap();
                print_json(&v);
            } else {
                println!("label {}", e.label);
                println!("m={}", e.vertex_count());
                match e.star_vertex {
                    Some(v) => println!("star vertex {v}, k={}", e.star_k().unwrap()),
                    None => println!("star vertex -"),
                }
                println!("certificate {}", e.provenance.as_str());
                println!("{}", cert.to_certificate().to_json());
            }
            Ok(Status::Success)
        }
        AtlasAction::VerifyAll => {
            let mut status = Status::Success;
            let mut out = Vec::new();
            for e in atlas.entries() {
                let ok = certificate_for(e).is_ok();
                if !ok {
                    status = Status::Negative;
                }
                out.push(json!({"label": e.label, "valid": ok}));
                if !cli.json {
                    println!("{:<20} {}", e.label, if ok { "ok" } else { "FAILED" });
                }
            }
            if cli.json {
                print_json(&Value::Array(out));
            }
            Ok(status)
        }
    }
}

fn convert(input: &Path, from: Option<Format>, to: Format, out: Option<&Path>) -> CmdResult {
    let (spheres, cert) = read_spheres(&read_input(input)?, from)?;
    let bytes = match to {
        Format::PlanarCode => write_planar_code(&spheres).map_err(invalid)?,
        Format::Text => {
            if spheres.len() != 1 {
                return Err(invalid("text output holds exactly one sphere"));
            }
            if cert.as_ref().is_some_and(|c| !c.vectors.is_empty()) {
                eprintln!("warning: dropping certificate vectors");
            }
            write_text(&spheres[0]).into_bytes()
        }
        Format::Certificate => {
            if spheres.len() != 1 {
                return Err(invalid("a certificate holds exactly one sphere"));
            }
            let c = cert.unwrap_or_else(|| Certificate {
                faces: spheres[0].faces().to_vec(),
                m: spheres[0].vertex_count(),
                vectors: Vec::new(),
            });
            (c.to_json() + "\n").into_bytes()
        }
    };
    write_output(out, &bytes)?;
    Ok(Status::Success)
}
