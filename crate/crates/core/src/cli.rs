//! `hnd` command-line front end.
//!
//! Every invocation prints exactly one JSON object on stdout. Exit codes:
//! `0` success, `1` a verification failure, `2` a usage error or an
//! unreadable input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact_num::ExactInt;
use crate::factory::{
    self, generate, parse_record, read_manifest, render_records, sha256_hex, verify_dataset,
    verify_records, verify_shard, write_atomic, write_json, DatasetConfig, Plan, ShardVerification,
};
use crate::features::{self, FeatureMeta, NumericPath, EPSILON, FEATURE_HEADER, RATIO_DIGITS};
use crate::float_wall::{wall_scan, write_wall_table};
use crate::hnd::{standard_registry, Base};
use crate::rng::SampleRng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Failures listed in a summary; the count is always complete.
const MAX_REPORTED_FAILURES: usize = 100;

#[derive(Debug, Parser)]
#[command(
    name = "hnd",
    version,
    about = "Exact Pythagorean triple factory and hard-negative suite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a sharded dataset with manifests.
    Gen {
        #[arg(long)]
        start: ExactInt,
        #[arg(long)]
        end: ExactInt,
        #[arg(long, default_value = "dataset")]
        out: PathBuf,
        #[arg(long, default_value_t = factory::DEFAULT_SHARD_SIZE)]
        shard_size: u64,
        /// Fraction of negatives in [0, 1].
        #[arg(long, default_value_t = 0.0)]
        ratio: f64,
        /// Attack weights, e.g. `PA01=0.5,AR02=0.5`.
        #[arg(long, value_delimiter = ',')]
        mix: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Emit a labeled negative stream for one attack.
    Attack {
        #[arg(long)]
        code: String,
        #[arg(long)]
        count: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        base_start: ExactInt,
        /// Defaults to `attack_<CODE>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-classify every record and check the manifest digest.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Defaults to the sibling `<stem>.manifest.json` when present.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Skip the manifest lookup.
        #[arg(long)]
        records_only: bool,
    },
    /// Float-wall table over decimal exponents.
    Floatwall {
        #[arg(long)]
        min_exp: u32,
        #[arg(long)]
        max_exp: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrity sweep over every shard in a directory.
    Shard {
        #[arg(long = "verify")]
        dir: PathBuf,
    },
    /// Feature CSV for a record file.
    Features {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        path: NumericPath,
        #[arg(long)]
        out: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen { .. } => "gen",
            Command::Attack { .. } => "attack",
            Command::Verify { .. } => "verify",
            Command::Floatwall { .. } => "floatwall",
            Command::Shard { .. } => "shard",
            Command::Features { .. } => "features",
        }
    }
}

/// Runs with process stdout/stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs with explicit sinks; returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(err, "{e}");
            if code == EXIT_USAGE {
                emit(
                    out,
                    &json!({"command": null, "ok": false, "error": e.kind().to_string()}),
                );
            }
            return code;
        }
    };
    let name = cli.command.name();
    match dispatch(cli.command, err) {
        Ok((summary, ok)) => {
            emit(out, &summary);
            if ok {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            let _ = writeln!(err, "hnd {name}: {e}");
            emit(
                out,
                &json!({"command": name, "ok": false, "error": e.to_string()}),
            );
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. }
        | Error::Json { .. }
        | Error::Config(_)
        | Error::Domain(_)
        | Error::UnknownAttack(_)
        | Error::Malformed { .. } => EXIT_USAGE,
        _ => EXIT_FAILED,
    }
}

fn emit(out: &mut dyn Write, v: &Value) {
    let _ = writeln!(out, "{v}");
}

fn dispatch(cmd: Command, err: &mut dyn Write) -> Result<(Value, bool)> {
    match cmd {
        Command::Gen {
            start,
            end,
            out,
            shard_size,
            ratio,
            mix,
            seed,
            workers,
        } => {
            let mut config = DatasetConfig::new(start, end);
            config.output_dir = out;
            config.shard_size = shard_size;
            config.negative_ratio = ratio;
            config.seed = seed;
            for item in &mix {
                let (code, w) = item.split_once('=').ok_or_else(|| {
                    Error::Config(format!("mix entry {item:?} is not CODE=WEIGHT"))
                })?;
                let w: f64 = w
                    .parse()
                    .map_err(|_| Error::Config(format!("bad weight in {item:?}")))?;
                if config.attack_mix.insert(code.to_string(), w).is_some() {
                    return Err(Error::Config(format!("attack {code} listed twice")));
                }
            }
            let plan = Plan::new(config.clone())?;
            let index = generate(&config, workers)?;
            let shards: Vec<Value> = index
                .shards
                .iter()
                .map(|m| json!({"shard_id": m.shard_id, "file": m.file, "count": m.count, "sha256": m.sha256}))
                .collect();
            let _ = writeln!(
                err,
                "wrote {} records in {} shards",
                index.total_records,
                shards.len()
            );
            Ok((
                json!({
                    "command": "gen",
                    "ok": true,
                    "out": config.output_dir,
                    "index": factory::INDEX_FILE,
                    "records": index.total_records,
                    "positives": plan.positives(),
                    "negatives": plan.negatives(),
                    "shards": shards,
                }),
                true,
            ))
        }
        Command::Attack {
            code,
            count,
            seed,
            base_start,
            out,
        } => {
            let registry = standard_registry();
            registry.get(&code)?;
            if base_start.is_zero() {
                return Err(Error::Config("--base-start must be >= 1".into()));
            }
            let mut samples = Vec::with_capacity(count.min(1 << 20) as usize);
            for i in 0..count {
                let n = &base_start + i;
                let mut rng = SampleRng::keyed(seed, 0, i);
                let path = format!("{seed}/0/{i}");
                samples.push(registry.apply(&code, &Base::stifel(&n)?, &mut rng, &path)?);
            }
            let out = out.unwrap_or_else(|| PathBuf::from(format!("attack_{code}.csv")));
            let bytes = render_records(&samples);
            write_atomic(&out, &bytes)?;
            let mut labels = std::collections::BTreeMap::<&str, u64>::new();
            for s in &samples {
                *labels.entry(s.label.as_str()).or_default() += 1;
            }
            Ok((
                json!({
                    "command": "attack",
                    "ok": true,
                    "code": code,
                    "out": out,
                    "count": count,
                    "labels": labels,
                    "sha256": sha256_hex(&bytes),
                }),
                true,
            ))
        }
        Command::Verify {
            input,
            manifest,
            records_only,
        } => {
            let manifest_path = if records_only {
                None
            } else {
                manifest.or_else(|| sibling_manifest(&input).filter(|p| p.exists()))
            };
            let v = match &manifest_path {
                Some(p) => verify_shard(&input, &read_manifest(p)?)?,
                None => verify_records(&input)?,
            };
            report_failures(err, &v);
            let ok = v.is_ok();
            let mut summary = verification_json(&v);
            summary["command"] = json!("verify");
            summary["manifest"] = json!(manifest_path);
            Ok((summary, ok))
        }
        Command::Floatwall {
            min_exp,
            max_exp,
            out,
        } => {
            let rows = wall_scan(min_exp, max_exp)?;
            let mut table = Vec::new();
            write_wall_table(&rows, &mut table).expect("writing to a Vec");
            if let Some(path) = &out {
                write_atomic(path, &table)?;
            }
            let first = rows.iter().find(|r| r.report.collides_with_successor);
            let json_rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "decimal_exp": r.decimal_exp,
                        "n": r.n,
                        "b_digits": r.b_digits,
                        "ulp_gap": r.report.ulp_gap,
                        "collision": r.report.collides_with_successor,
                        "hypotenuse_collision": r.hypotenuse_collides,
                    })
                })
                .collect();
            Ok((
                json!({
                    "command": "floatwall",
                    "ok": true,
                    "out": out,
                    "first_collision_exp": first.map(|r| r.decimal_exp),
                    "rows": json_rows,
                }),
                true,
            ))
        }
        Command::Shard { dir } => {
            if !dir.is_dir() {
                return Err(Error::io(
                    &dir,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
                ));
            }
            let sweep = verify_dataset(&dir)?;
            let mut shards = Vec::new();
            for (m, v) in &sweep.shards {
                report_failures(err, v);
                let mut s = verification_json(v);
                s["shard_id"] = json!(m.shard_id);
                shards.push(s);
            }
            for msg in &sweep.index_mismatches {
                let _ = writeln!(err, "{msg}");
            }
            let ok = sweep.is_ok() && !sweep.shards.is_empty();
            Ok((
                json!({
                    "command": "shard",
                    "ok": ok,
                    "dir": dir,
                    "shard_count": sweep.shards.len(),
                    "failed_shards": sweep.shards.iter().filter(|(_, v)| !v.is_ok()).count(),
                    "index_mismatches": sweep.index_mismatches,
                    "shards": shards,
                }),
                ok,
            ))
        }
        Command::Features { input, path, out } => {
            let text = fs::read_to_string(&input).map_err(|e| Error::io(&input, e))?;
            let mut csv = String::with_capacity(text.len());
            csv.push_str(FEATURE_HEADER);
            csv.push('\n');
            let mut rows = 0u64;
            for (i, line) in text.lines().enumerate() {
                let rec = parse_record(line).map_err(|reason| Error::Record {
                    path: input.clone(),
                    line: i + 1,
                    reason,
                })?;
                let fv = features::extract(&rec.triple, path);
                csv.push_str(&features::feature_line(&fv, rec.label.as_str()));
                csv.push('\n');
                rows += 1;
            }
            write_atomic(&out, csv.as_bytes())?;
            let meta = FeatureMeta {
                path,
                epsilon: EPSILON,
                log_base: "e".into(),
                ratio_digits: RATIO_DIGITS,
                source: input.display().to_string(),
                rows,
            };
            let meta_path = meta_path(&out);
            write_json(&meta_path, &meta)?;
            Ok((
                json!({
                    "command": "features",
                    "ok": true,
                    "out": out,
                    "meta": meta_path,
                    "path": path,
                    "rows": rows,
                }),
                true,
            ))
        }
    }
}

/// `dir/shard_3.csv` -> `dir/shard_3.manifest.json`.
fn sibling_manifest(input: &Path) -> Option<PathBuf> {
    let stem = input.file_stem()?.to_str()?;
    Some(input.with_file_name(format!("{stem}.manifest.json")))
}

/// `features.csv` -> `features.csv.meta.json`.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn report_failures(err: &mut dyn Write, v: &ShardVerification) {
    if v.digest_ok == Some(false) {
        let _ = writeln!(err, "{}: sha256 does not match manifest", v.file.display());
    }
    if v.count_ok == Some(false) {
        let _ = writeln!(
            err,
            "{}: record count does not match manifest",
            v.file.display()
        );
    }
    for f in v.failures.iter().take(MAX_REPORTED_FAILURES) {
        let _ = writeln!(err, "{}:{}: {}", v.file.display(), f.line, f.reason);
    }
}

fn verification_json(v: &ShardVerification) -> Value {
    json!({
        "ok": v.is_ok(),
        "file": v.file,
        "records": v.records,
        "digest_ok": v.digest_ok,
        "count_ok": v.count_ok,
        "failure_count": v.failures.len(),
        "failures": &v.failures[..v.failures.len().min(MAX_REPORTED_FAILURES)],
    })
}
