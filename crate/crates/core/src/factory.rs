//! Dataset composition, canonical shards and SHA-256 manifests.
//!
//! A dataset is a sequence of *slots*. Positives are Stifel triples taken in
//! order over `[n_start, n_end]`; negatives are interleaved with a fixed
//! Bresenham pattern: slot `i` is negative iff
//! `floor((i+1) N / T) > floor(i N / T)`, where `N` is the negative count and
//! `T` the slot count. Slot `i` therefore maps straight to its generator
//! index, and any shard can be produced without touching its predecessors.
//!
//! Negative ordinal `q` picks its attack through the same pattern applied
//! level by level over the mix (first code vs the rest, then the second code
//! vs the rest, ...). All remaining randomness (base index, attack internals)
//! comes from [`SampleRng::keyed`]`(seed, shard_id, index_in_shard)`.
//!
//! Record format, one per line, LF-terminated:
//! `a,b,c,label,attack,n` with `attack` / `n` written as `-` when absent.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact_num::ExactInt;
use crate::hnd::{is_valid_code, standard_registry, Base, LabeledSample, Registry};
use crate::rng::SampleRng;
use crate::triple_gen::{classify, stifel, GenParams, Label, Triple};

pub const DEFAULT_SHARD_SIZE: u64 = 100_000;
pub const INDEX_FILE: &str = "dataset.json";
pub const FORMAT_VERSION: &str = "hnd-shards/1";
pub const RNG_CONSTRUCTION: &str = "splitmix64-counter/1";

/// Ratios and mix weights are quantized to this many parts.
const PARTS: u64 = 1_000_000_000;

fn default_shard_size() -> u64 {
    DEFAULT_SHARD_SIZE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub n_start: ExactInt,
    pub n_end: ExactInt,
    #[serde(default = "default_shard_size")]
    pub shard_size: u64,
    #[serde(default)]
    pub negative_ratio: f64,
    #[serde(default)]
    pub attack_mix: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    /// Not serialized: every path in the index is relative to it.
    #[serde(default, skip_serializing)]
    pub output_dir: PathBuf,
}

impl DatasetConfig {
    pub fn new(n_start: ExactInt, n_end: ExactInt) -> DatasetConfig {
        DatasetConfig {
            n_start,
            n_end,
            shard_size: DEFAULT_SHARD_SIZE,
            negative_ratio: 0.0,
            attack_mix: BTreeMap::new(),
            seed: 0,
            output_dir: PathBuf::from("dataset"),
        }
    }
}

fn quantize(v: f64, what: &str) -> Result<u64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Config(format!("{what} must lie in [0, 1], got {v}")));
    }
    Ok((v * PARTS as f64).round() as u64)
}

/// `floor(a * b / c)` without overflow.
fn mul_div(a: u64, b: u64, c: u64) -> u64 {
    (u128::from(a) * u128::from(b) / u128::from(c)) as u64
}

/// A validated config with its slot layout resolved.
#[derive(Debug)]
pub struct Plan<'r> {
    config: DatasetConfig,
    registry: &'r Registry,
    positives: u64,
    negatives: u64,
    total: u64,
    mix: Vec<(String, u64)>,
}

impl Plan<'static> {
    pub fn new(config: DatasetConfig) -> Result<Plan<'static>> {
        Plan::with_registry(config, standard_registry())
    }
}

impl<'r> Plan<'r> {
    pub fn with_registry(config: DatasetConfig, registry: &'r Registry) -> Result<Plan<'r>> {
        if config.n_start.is_zero() {
            return Err(Error::Config("n_start must be >= 1".into()));
        }
        let span = config.n_end.checked_sub(&config.n_start).ok_or_else(|| {
            Error::Config(format!("empty range {}..{}", config.n_start, config.n_end))
        })?;
        let range_len = span
            .to_u64()
            .and_then(|s| s.checked_add(1))
            .ok_or_else(|| Error::Config("range holds more than 2^64 - 1 indices".into()))?;
        if config.shard_size == 0 {
            return Err(Error::Config("shard_size must be positive".into()));
        }
        let ratio = quantize(config.negative_ratio, "negative_ratio")?;

        let mut mix = Vec::new();
        if ratio > 0 {
            let sum: f64 = config.attack_mix.values().sum();
            if config.attack_mix.is_empty() || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "attack_mix weights must sum to 1 when negative_ratio > 0, got {sum}"
                )));
            }
            for (code, &w) in &config.attack_mix {
                if !is_valid_code(code) {
                    return Err(Error::Config(format!("bad attack code {code:?}")));
                }
                registry.get(code)?;
                let units = quantize(w, "attack weight")?;
                if units > 0 {
                    mix.push((code.clone(), units));
                }
            }
        }

        let (positives, negatives) = if ratio == 0 {
            (range_len, 0)
        } else if ratio == PARTS {
            (0, range_len)
        } else {
            let num = u128::from(range_len) * u128::from(ratio) * 2 + u128::from(PARTS - ratio);
            let den = u128::from(PARTS - ratio) * 2;
            let n = u64::try_from(num / den)
                .map_err(|_| Error::Config("negative count overflows".into()))?;
            (range_len, n)
        };
        let total = positives
            .checked_add(negatives)
            .ok_or_else(|| Error::Config("slot count overflows".into()))?;

        Ok(Plan {
            config,
            registry,
            positives,
            negatives,
            total,
            mix,
        })
    }

    pub fn config(&self) -> &DatasetConfig {
        &self.config
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn positives(&self) -> u64 {
        self.positives
    }

    pub fn negatives(&self) -> u64 {
        self.negatives
    }

    pub fn shard_count(&self) -> u64 {
        self.total.div_ceil(self.config.shard_size)
    }

    pub fn shard_slots(&self, shard_id: u64) -> Range<u64> {
        let start = shard_id
            .saturating_mul(self.config.shard_size)
            .min(self.total);
        let end = start.saturating_add(self.config.shard_size).min(self.total);
        start..end
    }

    fn negatives_before(&self, slot: u64) -> u64 {
        if self.total == 0 {
            0
        } else {
            mul_div(slot, self.negatives, self.total)
        }
    }

    pub fn is_negative(&self, slot: u64) -> bool {
        self.negatives_before(slot + 1) > self.negatives_before(slot)
    }

    /// Attack code of the `q`-th negative.
    pub fn attack_for(&self, mut q: u64) -> &str {
        let mut remaining: u64 = self.mix.iter().map(|(_, w)| w).sum();
        let last = self.mix.len() - 1;
        for (code, w) in &self.mix[..last] {
            let before = mul_div(q, *w, remaining);
            if mul_div(q + 1, *w, remaining) > before {
                return code;
            }
            q -= before;
            remaining -= w;
        }
        &self.mix[last].0
    }

    /// The sample at global slot `slot`.
    pub fn sample(&self, slot: u64) -> Result<LabeledSample> {
        let shard_id = slot / self.config.shard_size;
        let index = slot % self.config.shard_size;
        let seed = self.config.seed;
        let seed_path = format!("{seed}/{shard_id}/{index}");
        if self.is_negative(slot) {
            let q = self.negatives_before(slot);
            let code = self.attack_for(q);
            let mut rng = SampleRng::keyed(seed, shard_id, index);
            let n = rng.range_big(&self.config.n_start, &self.config.n_end);
            self.registry
                .apply(code, &Base::stifel(&n)?, &mut rng, &seed_path)
        } else {
            let j = slot - self.negatives_before(slot);
            let n = &self.config.n_start + j;
            Ok(LabeledSample::new(
                stifel(&n)?,
                None,
                Some(GenParams::Stifel { n }),
                seed_path,
            ))
        }
    }

    /// Lazily yields one shard's samples.
    pub fn shard(&self, shard_id: u64) -> impl Iterator<Item = Result<LabeledSample>> + '_ {
        self.shard_slots(shard_id)
            .map(move |slot| self.sample(slot))
    }

    /// Every sample of the dataset, in slot order.
    pub fn stream(&self) -> impl Iterator<Item = Result<LabeledSample>> + '_ {
        (0..self.total).map(move |slot| self.sample(slot))
    }
}

/// Validates `config` and returns its full lazy sample stream.
pub fn compose(config: DatasetConfig) -> Result<impl Iterator<Item = Result<LabeledSample>>> {
    let plan = Plan::new(config)?;
    if plan.total() == 0 {
        return Err(Error::Config("dataset is empty".into()));
    }
    Ok((0..plan.total).map(move |slot| plan.sample(slot)))
}

// ---- records ----

/// A parsed shard line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub triple: Triple,
    pub label: Label,
    pub attack: Option<String>,
    pub n: Option<ExactInt>,
}

/// Canonical record line including the trailing LF.
pub fn record_line(s: &LabeledSample) -> String {
    let attack = s.attack.as_deref().unwrap_or("-");
    let n = s
        .origin
        .as_ref()
        .and_then(GenParams::index)
        .map(|n| n.to_string())
        .unwrap_or_else(|| "-".into());
    format!(
        "{},{},{},{},{},{}\n",
        s.triple.a(),
        s.triple.b(),
        s.triple.c(),
        s.label,
        attack,
        n
    )
}

/// Parses one line (without its LF).
pub fn parse_record(line: &str) -> std::result::Result<Record, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 6 {
        return Err(format!("expected 6 fields, found {}", fields.len()));
    }
    let int = |s: &str| ExactInt::from_decimal(s).map_err(|e| e.to_string());
    let triple = Triple::new(int(fields[0])?, int(fields[1])?, int(fields[2])?)
        .map_err(|e| e.to_string())?;
    let label: Label = fields[3].parse().map_err(|e: Error| e.to_string())?;
    let attack = match fields[4] {
        "-" => None,
        code if is_valid_code(code) => Some(code.to_string()),
        code => return Err(format!("bad attack code {code:?}")),
    };
    let n = match fields[5] {
        "-" => None,
        s => Some(int(s)?),
    };
    Ok(Record {
        triple,
        label,
        attack,
        n,
    })
}

// ---- shards ----

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardManifest {
    pub shard_id: u64,
    pub file: String,
    /// First and last positive generator index in the shard.
    pub n_range: Option<(ExactInt, ExactInt)>,
    pub count: u64,
    pub sha256: String,
    pub seed: u64,
    pub attack_counts: BTreeMap<String, u64>,
}

pub fn shard_file_name(shard_id: u64) -> String {
    format!("shard_{shard_id}.csv")
}

pub fn manifest_file_name(shard_id: u64) -> String {
    format!("shard_{shard_id}.manifest.json")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `path` through a sibling temp file and a rename, so
/// readers never observe a partial file.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp"));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Concatenated canonical records.
pub fn render_records(samples: &[LabeledSample]) -> Vec<u8> {
    samples
        .iter()
        .flat_map(|s| record_line(s).into_bytes())
        .collect()
}

/// Writes `shard_<id>.csv` then `shard_<id>.manifest.json` into `dir`. The
/// digest covers the record bytes only.
pub fn write_shard(
    samples: &[LabeledSample],
    dir: &Path,
    shard_id: u64,
    seed: u64,
) -> Result<ShardManifest> {
    let bytes = render_records(samples);
    let mut attack_counts = BTreeMap::new();
    let mut n_range: Option<(ExactInt, ExactInt)> = None;
    for s in samples {
        if let Some(code) = &s.attack {
            *attack_counts.entry(code.clone()).or_insert(0) += 1;
        } else if let Some(GenParams::Stifel { n }) = &s.origin {
            n_range = Some(match n_range {
                None => (n.clone(), n.clone()),
                Some((lo, hi)) => (lo.min(n.clone()), hi.max(n.clone())),
            });
        }
    }
    let manifest = ShardManifest {
        shard_id,
        file: shard_file_name(shard_id),
        n_range,
        count: samples.len() as u64,
        sha256: sha256_hex(&bytes),
        seed,
        attack_counts,
    };
    write_atomic(&dir.join(&manifest.file), &bytes)?;
    write_json(&dir.join(manifest_file_name(shard_id)), &manifest)?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecordFailure {
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShardVerification {
    pub file: PathBuf,
    /// `None` when no manifest was consulted.
    pub digest_ok: Option<bool>,
    pub count_ok: Option<bool>,
    pub records: u64,
    pub failures: Vec<RecordFailure>,
}

impl ShardVerification {
    pub fn is_ok(&self) -> bool {
        self.digest_ok != Some(false) && self.count_ok != Some(false) && self.failures.is_empty()
    }
}

/// Re-parses every record and checks its stored label against [`classify`].
pub fn verify_records(path: &Path) -> Result<ShardVerification> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(check_records(path, &bytes))
}

fn check_records(path: &Path, bytes: &[u8]) -> ShardVerification {
    let mut failures = Vec::new();
    let mut records = 0u64;
    let text = match std::str::from_utf8(bytes) {
        Ok(t) => t,
        Err(e) => {
            let line = bytes[..e.valid_up_to()]
                .iter()
                .filter(|&&b| b == b'\n')
                .count()
                + 1;
            failures.push(RecordFailure {
                line,
                reason: "invalid utf-8".into(),
            });
            ""
        }
    };
    if !text.is_empty() && !text.ends_with('\n') {
        failures.push(RecordFailure {
            line: text.lines().count(),
            reason: "missing trailing newline".into(),
        });
    }
    for (i, line) in text.lines().enumerate() {
        records += 1;
        match parse_record(line) {
            Ok(rec) => {
                let actual = classify(&rec.triple);
                if actual != rec.label {
                    failures.push(RecordFailure {
                        line: i + 1,
                        reason: format!(
                            "stored label {} but triple classifies as {actual}",
                            rec.label
                        ),
                    });
                }
            }
            Err(reason) => failures.push(RecordFailure {
                line: i + 1,
                reason,
            }),
        }
    }
    ShardVerification {
        file: path.to_path_buf(),
        digest_ok: None,
        count_ok: None,
        records,
        failures,
    }
}

/// Digest check plus per-record re-classification.
pub fn verify_shard(path: &Path, manifest: &ShardManifest) -> Result<ShardVerification> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut v = check_records(path, &bytes);
    v.digest_ok = Some(sha256_hex(&bytes) == manifest.sha256);
    v.count_ok = Some(v.records == manifest.count);
    Ok(v)
}

pub fn read_manifest(path: &Path) -> Result<ShardManifest> {
    read_json(path)
}

/// Index written last, after every shard and manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub format: String,
    pub rng: String,
    pub config: DatasetConfig,
    pub total_records: u64,
    pub shards: Vec<ShardManifest>,
}

/// Produces every shard of `config` with `workers` threads, then the index.
/// Output bytes do not depend on `workers`.
pub fn generate(config: &DatasetConfig, workers: usize) -> Result<DatasetIndex> {
    let plan = Plan::new(config.clone())?;
    if plan.total() == 0 {
        return Err(Error::Config("dataset is empty".into()));
    }
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut shards: Vec<ShardManifest> = pool.install(|| {
        (0..plan.shard_count())
            .into_par_iter()
            .map(|id| {
                let samples = plan.shard(id).collect::<Result<Vec<_>>>()?;
                write_shard(&samples, dir, id, config.seed)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    shards.sort_by_key(|m| m.shard_id);
    let index = DatasetIndex {
        format: FORMAT_VERSION.into(),
        rng: RNG_CONSTRUCTION.into(),
        config: config.clone(),
        total_records: plan.total(),
        shards,
    };
    write_json(&dir.join(INDEX_FILE), &index)?;
    Ok(index)
}

#[derive(Clone, Debug, Serialize)]
pub struct DatasetVerification {
    pub shards: Vec<(ShardManifest, ShardVerification)>,
    /// Index entries whose manifest file is missing or disagrees.
    pub index_mismatches: Vec<String>,
}

impl DatasetVerification {
    pub fn is_ok(&self) -> bool {
        self.index_mismatches.is_empty() && self.shards.iter().all(|(_, v)| v.is_ok())
    }
}

/// Verifies every `shard_*.manifest.json` in `dir` against its shard, and the
/// index (when present) against the manifests.
pub fn verify_dataset(dir: &Path) -> Result<DatasetVerification> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest_paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("shard_") && name.ends_with(".manifest.json") {
            manifest_paths.push(path);
        }
    }
    let mut shards = Vec::new();
    for path in manifest_paths {
        let manifest = read_manifest(&path)?;
        let shard_path = dir.join(&manifest.file);
        let verification = match verify_shard(&shard_path, &manifest) {
            Ok(v) => v,
            Err(e) => ShardVerification {
                file: shard_path,
                digest_ok: Some(false),
                count_ok: None,
                records: 0,
                failures: vec![RecordFailure {
                    line: 0,
                    reason: e.to_string(),
                }],
            },
        };
        shards.push((manifest, verification));
    }
    shards.sort_by_key(|(m, _)| m.shard_id);

    let mut index_mismatches = Vec::new();
    let index_path = dir.join(INDEX_FILE);
    if index_path.exists() {
        let index: DatasetIndex = read_json(&index_path)?;
        for listed in &index.shards {
            match shards.iter().find(|(m, _)| m.shard_id == listed.shard_id) {
                Some((m, _)) if m == listed => {}
                Some(_) => index_mismatches.push(format!(
                    "shard {} manifest differs from index",
                    listed.shard_id
                )),
                None => index_mismatches.push(format!(
                    "shard {} listed in index but missing",
                    listed.shard_id
                )),
            }
        }
    }
    Ok(DatasetVerification {
        shards,
        index_mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(start: u64, end: u64) -> DatasetConfig {
        DatasetConfig::new(start.into(), end.into())
    }

    fn lines(plan: &Plan) -> Vec<String> {
        plan.stream().map(|s| record_line(&s.unwrap())).collect()
    }

    #[test]
    fn positives_only() {
        let plan = Plan::new(cfg(1, 4)).unwrap();
        assert_eq!(
            lines(&plan),
            [
                "3,4,5,pos,-,1\n",
                "5,12,13,pos,-,2\n",
                "7,24,25,pos,-,3\n",
                "9,40,41,pos,-,4\n"
            ]
        );
    }

    #[test]
    fn half_negative_interleaving() {
        let mut c = cfg(1, 2);
        c.negative_ratio = 0.5;
        c.attack_mix.insert("PA01".into(), 1.0);
        c.seed = 7;
        let plan = Plan::new(c.clone()).unwrap();
        let first = lines(&plan);
        assert_eq!(first.len(), 4);
        assert_eq!(first[0], "3,4,5,pos,-,1\n");
        assert_eq!(first[2], "5,12,13,pos,-,2\n");
        assert!(first[1].contains(",neg_eq,PA01,"));
        assert!(first[3].contains(",neg_eq,PA01,"));
        assert_eq!(lines(&Plan::new(c).unwrap()), first);
    }

    #[test]
    fn mix_split_within_one() {
        let mut c = cfg(1, 100_000);
        c.negative_ratio = 0.5;
        c.attack_mix.insert("AR02".into(), 0.5);
        c.attack_mix.insert("ST01".into(), 0.5);
        c.shard_size = 1000;
        let plan = Plan::new(c).unwrap();
        for shard in [0u64, 7, 199] {
            let mut counts: BTreeMap<String, u64> = BTreeMap::new();
            let mut negs = 0u64;
            for s in plan.shard(shard) {
                let s = s.unwrap();
                if let Some(a) = s.attack {
                    negs += 1;
                    *counts.entry(a).or_default() += 1;
                }
            }
            assert!(negs.abs_diff(500) <= 1, "{negs}");
            for code in ["AR02", "ST01"] {
                let got = counts[code] as f64;
                assert!(
                    (got - negs as f64 * 0.5).abs() <= 1.0,
                    "{code} {got} of {negs}"
                );
            }
        }
    }

    #[test]
    fn attack_schedule_three_way() {
        let mut c = cfg(1, 10);
        c.negative_ratio = 0.5;
        c.attack_mix = [("PA01", 0.2), ("AR02", 0.3), ("ST01", 0.5)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let plan = Plan::new(c).unwrap();
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for q in 0..10_000 {
            *counts.entry(plan.attack_for(q)).or_default() += 1;
        }
        assert_eq!(counts["AR02"], 3000);
        assert_eq!(counts["PA01"], 2000);
        assert_eq!(counts["ST01"], 5000);
    }

    #[test]
    fn invalid_configs() {
        assert!(matches!(Plan::new(cfg(5, 4)), Err(Error::Config(_))));
        assert!(Plan::new(cfg(0, 4)).is_err());
        let mut c = cfg(1, 4);
        c.negative_ratio = 0.5;
        assert!(Plan::new(c.clone()).is_err());
        c.attack_mix.insert("PA01".into(), 0.7);
        assert!(Plan::new(c.clone()).is_err());
        c.attack_mix.insert("NOPE".into(), 0.3);
        assert!(Plan::new(c.clone()).is_err());
        c.negative_ratio = 1.5;
        assert!(Plan::new(c).is_err());
        let mut c = cfg(1, 4);
        c.shard_size = 0;
        assert!(Plan::new(c).is_err());
        assert!(compose(cfg(3, 2)).is_err());
    }

    #[test]
    fn all_negative_ratio() {
        let mut c = cfg(1, 5);
        c.negative_ratio = 1.0;
        c.attack_mix.insert("AR03".into(), 1.0);
        let plan = Plan::new(c).unwrap();
        assert_eq!(plan.total(), 5);
        assert!(plan.stream().all(|s| s.unwrap().label == Label::NegEq));
    }

    #[test]
    fn far_shard_without_predecessors() {
        let mut c = DatasetConfig::new(ExactInt::one(), ExactInt::pow10(10));
        c.negative_ratio = 0.25;
        c.attack_mix.insert("PA01".into(), 1.0);
        let plan = Plan::new(c).unwrap();
        let shard: Vec<_> = plan.shard(10_000).take(8).map(|s| s.unwrap()).collect();
        let first_slot = plan.shard_slots(10_000).start;
        assert_eq!(first_slot, 1_000_000_000);
        let pos = shard.iter().find(|s| s.label == Label::Pos).unwrap();
        match &pos.origin {
            Some(GenParams::Stifel { n }) => {
                // 3 of every 4 slots are positive
                let approx = first_slot / 4 * 3;
                assert!(n.to_u64().unwrap().abs_diff(approx) < 10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn record_roundtrip_and_rejections() {
        let rec = parse_record("3,4,5,pos,-,1").unwrap();
        assert_eq!(rec.label, Label::Pos);
        assert_eq!(rec.n, Some(ExactInt::one()));
        assert!(parse_record("3,4,5,pos,-").is_err());
        assert!(parse_record("03,4,5,pos,-,1").is_err());
        assert!(parse_record("3,4,5,yes,-,1").is_err());
        assert!(parse_record("3,4,0,neg_eq,-,1").is_err());
        assert!(parse_record("3,4,5,pos,P A,1").is_err());
    }

    #[test]
    fn empty_shard_digest() {
        let dir = tempfile::tempdir().unwrap();
        let m = write_shard(&[], dir.path(), 0, 1).unwrap();
        assert_eq!(m.count, 0);
        assert_eq!(
            m.sha256,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert!(verify_shard(&dir.path().join(&m.file), &m).unwrap().is_ok());
    }

    #[test]
    fn shard_write_verify_and_tamper() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg(1, 50);
        c.negative_ratio = 0.5;
        c.attack_mix.insert("PA01".into(), 1.0);
        let plan = Plan::new(c).unwrap();
        let samples: Vec<_> = plan.shard(0).map(|s| s.unwrap()).collect();
        let m = write_shard(&samples, dir.path(), 0, 0).unwrap();
        let again = write_shard(&samples, dir.path(), 0, 0).unwrap();
        assert_eq!(m, again);
        assert_eq!(m.attack_counts["PA01"], 50);
        assert_eq!(m.n_range, Some((ExactInt::one(), ExactInt::from(50u64))));
        let path = dir.path().join(&m.file);
        assert!(verify_shard(&path, &m).unwrap().is_ok());
        assert!(!dir.path().join(".shard_0.csv.tmp").exists());

        // one digit altered
        let original = fs::read(&path).unwrap();
        let mut bytes = original.clone();
        bytes[0] = if bytes[0] == b'3' { b'4' } else { b'3' };
        fs::write(&path, &bytes).unwrap();
        let v = verify_shard(&path, &m).unwrap();
        assert_eq!(v.digest_ok, Some(false));
        assert!(!v.is_ok());

        // label flipped with the digest recomputed
        let text = String::from_utf8(original)
            .unwrap()
            .replacen(",pos,", ",neg_eq,", 1);
        fs::write(&path, text.as_bytes()).unwrap();
        let mut forged = m.clone();
        forged.sha256 = sha256_hex(text.as_bytes());
        let v = verify_shard(&path, &forged).unwrap();
        assert_eq!(v.digest_ok, Some(true));
        assert_eq!(v.failures.len(), 1);
        assert_eq!(v.failures[0].line, 1);
        assert!(!v.is_ok());
    }

    #[test]
    fn malformed_record_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        fs::write(&path, "3,4,5,pos,-,1\n3,4,x,pos,-,2\n").unwrap();
        let v = verify_records(&path).unwrap();
        assert_eq!(v.failures.len(), 1);
        assert_eq!(v.failures[0].line, 2);
        assert!(verify_records(&dir.path().join("missing.csv")).is_err());
    }
}
