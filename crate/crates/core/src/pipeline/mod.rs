//! Staged benchmark runs: generate → run → featurize → score → fit → report.
//!
//! Every stage reads only the files written by earlier stages under the
//! manifest's output directory, and writes its own outputs atomically.
//! Outputs depend only on the manifest, so reruns are byte-identical.
//!
//! ```text
//! out/circuits/<id>.json         generate
//! out/circuits/<id>.counts.json  run
//! out/features.csv               featurize
//! out/scores.csv                 score
//! out/model.json, out/fit.json   fit
//! out/report.json                report
//! out/qasm/<id>.qasm             export-qasm
//! ```

mod manifest;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::{BenchmarkSpec, Family, GeneratedBenchmark};
use crate::circuit::{to_qasm, Circuit, CircuitJson};
use crate::counts::Counts;
use crate::features::{feature_vector, sota_features, BranchModel, FEATURE_NAMES, SOTA_NAMES};
use crate::scoring::{experiment_seed, experiments, run_experiments, score_from_counts};
use crate::sim::NoiseModel;
use crate::stats::{self, Dataset, ModelFile, RowMeta, SplitSummary, StatsError, LAMBDA_GRID};

pub use manifest::{Entry, FitConfig, Manifest, Overrides, DEFAULT_SHOTS, DEFAULT_SPLITS};

/// Relative cutoff for counting dominant singular values.
pub const PCA_CUTOFF: f64 = 1.0 / 50.0;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{0}")]
    Validation(String),
    #[error("missing {} (run `dynabench {stage}` first)", path.display())]
    MissingStage { stage: &'static str, path: PathBuf },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{id}: {message}")]
    Stage { id: String, message: String },
}

impl PipelineError {
    /// 2 for bad input, 3 when an earlier stage has not run, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Validation(_) => 2,
            PipelineError::MissingStage { .. } => 3,
            _ => 1,
        }
    }
}

impl From<StatsError> for PipelineError {
    fn from(e: StatsError) -> Self {
        PipelineError::Validation(e.to_string())
    }
}

fn stage_err(id: &str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Stage {
        id: id.to_string(),
        message: e.to_string(),
    }
}

/// Write via a temporary sibling and rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let io = |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, bytes).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn read_stage(path: &Path, stage: &'static str) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => PipelineError::MissingStage {
            stage,
            path: path.to_path_buf(),
        },
        _ => PipelineError::Io {
            path: path.to_path_buf(),
            source,
        },
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(
    path: &Path,
    stage: &'static str,
) -> Result<T, PipelineError> {
    serde_json::from_str(&read_stage(path, stage)?)
        .map_err(|e| PipelineError::Validation(format!("{}: {e}", path.display())))
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Simulator seed for one benchmark, independent of its place in the suite.
fn sim_seed(seed: u64, id: &str) -> u64 {
    let digest = Sha256::digest(id.as_bytes());
    let tag = u64::from_le_bytes(digest[..8].try_into().expect("eight bytes"));
    experiment_seed(seed ^ tag, 0)
}

/// Contents of `circuits/<id>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub id: String,
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub spec: BenchmarkSpec,
    pub circuit: CircuitJson,
    pub branch_model: BranchModel,
    /// SHA-256 of the scoring reference, checked when the file is reloaded.
    pub reference_sha256: String,
}

impl CircuitFile {
    fn new(e: &Entry, b: &GeneratedBenchmark) -> CircuitFile {
        CircuitFile {
            id: e.id.clone(),
            family: e.family,
            n: e.n,
            seed: e.seed,
            spec: b.spec.clone(),
            circuit: CircuitJson::from(&b.circuit),
            branch_model: b.branch_model.clone(),
            reference_sha256: sha256_hex(&b.reference.canonical()),
        }
    }

    /// Rebuild the benchmark from the stored spec and check it against the
    /// stored circuit and reference.
    pub fn benchmark(&self) -> Result<GeneratedBenchmark, PipelineError> {
        let b = self.spec.generate().map_err(|e| stage_err(&self.id, e))?;
        let stored = Circuit::try_from(&self.circuit).map_err(|e| stage_err(&self.id, e))?;
        if stored != b.circuit
            || self.branch_model != b.branch_model
            || self.reference_sha256 != sha256_hex(&b.reference.canonical())
        {
            return Err(PipelineError::Validation(format!(
                "{}: circuit file does not match its spec",
                self.id
            )));
        }
        Ok(b)
    }

    pub fn load(path: &Path) -> Result<CircuitFile, PipelineError> {
        read_json(path, "generate")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCounts {
    pub label: String,
    pub counts: Counts,
}

/// Contents of `circuits/<id>.counts.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsFile {
    pub id: String,
    pub noise: String,
    pub noise_model: NoiseModel,
    pub sim_seed: u64,
    pub experiments: Vec<ExperimentCounts>,
}

fn circuit_path(m: &Manifest, e: &Entry) -> PathBuf {
    m.circuits_dir().join(format!("{}.json", e.id))
}

fn counts_path(m: &Manifest, e: &Entry) -> PathBuf {
    m.circuits_dir().join(format!("{}.counts.json", e.id))
}

pub fn generate(m: &Manifest) -> Result<Vec<PathBuf>, PipelineError> {
    m.entries()
        .par_iter()
        .map(|e| {
            let spec = e
                .family
                .spec(e.n, &m.params_for(e.family), e.seed)
                .map_err(|err| stage_err(&e.id, err))?;
            let b = spec.generate().map_err(|err| stage_err(&e.id, err))?;
            let path = circuit_path(m, e);
            write_json(&path, &CircuitFile::new(e, &b))?;
            Ok(path)
        })
        .collect()
}

pub fn run(m: &Manifest) -> Result<Vec<PathBuf>, PipelineError> {
    let entries = m.entries();
    let files: Vec<CircuitFile> = entries
        .iter()
        .map(|e| CircuitFile::load(&circuit_path(m, e)))
        .collect::<Result<_, _>>()?;
    entries
        .par_iter()
        .zip(files)
        .map(|(e, file)| {
            let b = file.benchmark()?;
            let exps =
                experiments(&b, m.shots, &m.dfe, e.seed).map_err(|err| stage_err(&e.id, err))?;
            let seed = sim_seed(m.seed, &e.id);
            let counts =
                run_experiments(&exps, &m.noise, seed).map_err(|err| stage_err(&e.id, err))?;
            let out = CountsFile {
                id: e.id.clone(),
                noise: m.noise_name.clone(),
                noise_model: m.noise,
                sim_seed: seed,
                experiments: exps
                    .iter()
                    .zip(counts)
                    .map(|(x, counts)| ExperimentCounts {
                        label: x.label.clone(),
                        counts,
                    })
                    .collect(),
            };
            let path = counts_path(m, e);
            write_json(&path, &out)?;
            Ok(path)
        })
        .collect()
}

fn fmt_f64(v: f64) -> String {
    v.to_string()
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)
        .and_then(|_| rows.iter().try_for_each(|r| w.write_record(r)))
        .map_err(|e| stage_err("csv", e))?;
    let bytes = w.into_inner().map_err(|e| stage_err("csv", e))?;
    write_atomic(path, &bytes)
}

/// Data rows, after checking the header.
fn read_csv(
    path: &Path,
    stage: &'static str,
    header: &[String],
) -> Result<Vec<Vec<String>>, PipelineError> {
    let text = read_stage(path, stage)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let bad = |e: csv::Error| PipelineError::Validation(format!("{}: {e}", path.display()));
    let got: Vec<String> = r.headers().map_err(bad)?.iter().map(String::from).collect();
    if got != header {
        return Err(PipelineError::Validation(format!(
            "{}: unexpected columns {got:?}",
            path.display()
        )));
    }
    r.records()
        .map(|rec| Ok(rec.map_err(bad)?.iter().map(String::from).collect()))
        .collect()
}

pub fn features_header() -> Vec<String> {
    ["benchmark", "family", "n", "n_s", "seed"]
        .into_iter()
        .chain(FEATURE_NAMES)
        .chain(SOTA_NAMES)
        .map(String::from)
        .collect()
}

pub fn scores_header() -> Vec<String> {
    ["benchmark", "family", "n", "seed", "noise", "score"]
        .into_iter()
        .map(String::from)
        .collect()
}

pub fn featurize(m: &Manifest) -> Result<PathBuf, PipelineError> {
    let entries = m.entries();
    let rows: Vec<Vec<String>> = entries
        .par_iter()
        .map(|e| {
            let file = CircuitFile::load(&circuit_path(m, e))?;
            let c = Circuit::try_from(&file.circuit).map_err(|err| stage_err(&e.id, err))?;
            let fv = feature_vector(&c, &file.branch_model).map_err(|err| stage_err(&e.id, err))?;
            let mut row = vec![
                e.id.clone(),
                e.family.name().to_string(),
                e.n.to_string(),
                c.system_qubits().len().to_string(),
                e.seed.to_string(),
            ];
            row.extend(fv.values.iter().map(|&v| fmt_f64(v)));
            row.extend(sota_features(&c).iter().map(|&v| fmt_f64(v)));
            Ok(row)
        })
        .collect::<Result<_, PipelineError>>()?;
    let path = m.out.join("features.csv");
    write_csv(&path, &features_header(), &rows)?;
    Ok(path)
}

pub fn score(m: &Manifest) -> Result<PathBuf, PipelineError> {
    let entries = m.entries();
    let rows: Vec<Vec<String>> = entries
        .par_iter()
        .map(|e| {
            let b = CircuitFile::load(&circuit_path(m, e))?.benchmark()?;
            let counts: CountsFile = read_json(&counts_path(m, e), "run")?;
            if counts.noise != m.noise_name {
                return Err(PipelineError::Validation(format!(
                    "{}: counts were produced under `{}`, not `{}`",
                    e.id, counts.noise, m.noise_name
                )));
            }
            let exps =
                experiments(&b, m.shots, &m.dfe, e.seed).map_err(|err| stage_err(&e.id, err))?;
            if exps.len() != counts.experiments.len()
                || exps
                    .iter()
                    .zip(&counts.experiments)
                    .any(|(x, c)| x.label != c.label)
            {
                return Err(PipelineError::Validation(format!(
                    "{}: counts do not match the manifest's experiments",
                    e.id
                )));
            }
            let raw: Vec<Counts> = counts.experiments.into_iter().map(|c| c.counts).collect();
            let r = score_from_counts(&b, &exps, &raw).map_err(|err| stage_err(&e.id, err))?;
            Ok(vec![
                e.id.clone(),
                e.family.name().to_string(),
                e.n.to_string(),
                e.seed.to_string(),
                m.noise_name.clone(),
                fmt_f64(r.score),
            ])
        })
        .collect::<Result<_, PipelineError>>()?;
    let path = m.out.join("scores.csv");
    write_csv(&path, &scores_header(), &rows)?;
    Ok(path)
}

fn parse_num<T: std::str::FromStr>(path: &Path, field: &str) -> Result<T, PipelineError> {
    field
        .parse()
        .map_err(|_| PipelineError::Validation(format!("{}: bad value `{field}`", path.display())))
}

/// Join `features.csv` and `scores.csv` of a run directory. Columns are the
/// 24 features followed by the three baseline columns.
pub fn load_dataset(dir: &Path) -> Result<Dataset, PipelineError> {
    let fpath = dir.join("features.csv");
    let spath = dir.join("scores.csv");
    let features = read_csv(&fpath, "featurize", &features_header())?;
    let scores = read_csv(&spath, "score", &scores_header())?;
    let by_id: BTreeMap<&str, &Vec<String>> = scores.iter().map(|r| (r[0].as_str(), r)).collect();
    let (mut x, mut y, mut meta) = (Vec::new(), Vec::new(), Vec::new());
    for row in &features {
        let s = by_id.get(row[0].as_str()).ok_or_else(|| {
            PipelineError::Validation(format!("{}: no score for {}", spath.display(), row[0]))
        })?;
        x.push(
            row[5..]
                .iter()
                .map(|v| parse_num(&fpath, v))
                .collect::<Result<Vec<f64>, _>>()?,
        );
        y.push(parse_num(&spath, &s[5])?);
        meta.push(RowMeta {
            benchmark: row[0].clone(),
            family: row[1].clone(),
            n: parse_num(&fpath, &row[2])?,
            seed: parse_num(&fpath, &row[4])?,
            backend: s[4].clone(),
        });
    }
    let columns = FEATURE_NAMES
        .iter()
        .chain(SOTA_NAMES.iter())
        .map(|s| s.to_string())
        .collect();
    Ok(Dataset::new(columns, x, y, meta)?)
}

/// Contents of `fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub rows: usize,
    pub lambda: f64,
    /// Whether λ came from cross-validation rather than the manifest.
    pub lambda_from_cv: bool,
    pub train_r2: f64,
    pub splits: SplitSummary,
}

pub fn fit(m: &Manifest) -> Result<(PathBuf, PathBuf), PipelineError> {
    let d = load_dataset(&m.out)?.select(&FEATURE_NAMES)?;
    let (lambda, lambda_from_cv) = match m.fit.lambda {
        Some(l) => (l, false),
        None => (
            stats::cross_validate_lambda(&d, &LAMBDA_GRID, m.fit.folds, m.seed)?,
            true,
        ),
    };
    let f = stats::ridge_fit(&d, lambda)?;
    let splits = stats::split_r2(&d, lambda, m.fit.splits, m.seed)?;
    let model = m.out.join("model.json");
    let summary = m.out.join("fit.json");
    write_json(&model, &f.model_file())?;
    write_json(
        &summary,
        &FitSummary {
            rows: d.len(),
            lambda,
            lambda_from_cv,
            train_r2: f.train_r2,
            splits,
        },
    )?;
    Ok((model, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub run: String,
    pub noise: String,
    pub rows: usize,
    pub r2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub cutoff: f64,
    pub dominant: usize,
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionPoint {
    pub benchmark: String,
    pub family: String,
    pub actual: f64,
    /// Clamped to `[0, 1]`; R² values use the raw prediction.
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    /// Per family: `[n, mean score]`, by increasing n.
    pub fidelity_vs_qubits: BTreeMap<String, Vec<[f64; 2]>>,
    pub singular_values: Vec<f64>,
    pub predicted_vs_actual: Vec<PredictionPoint>,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub noise: String,
    pub rows: usize,
    pub lambda: f64,
    pub full_fit_r2: f64,
    /// Full-data fit on the three baseline columns only.
    pub baseline_full_fit_r2: f64,
    pub splits: SplitSummary,
    /// Test R² per held-out family; `None` when the family's scores are
    /// constant.
    pub holdout: BTreeMap<String, Option<f64>>,
    pub transfer: Vec<TransferResult>,
    pub pca: Pca,
    pub series: Series,
}

fn r2_or_none(r: Result<f64, StatsError>) -> Result<Option<f64>, PipelineError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(StatsError::ZeroVariance | StatsError::TooFewRows { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn report(m: &Manifest) -> Result<PathBuf, PipelineError> {
    let all = load_dataset(&m.out)?;
    let d = all.select(&FEATURE_NAMES)?;
    let model: ModelFile = read_json(&m.out.join("model.json"), "fit")?;
    let summary: FitSummary = read_json(&m.out.join("fit.json"), "fit")?;
    let fit = stats::FitResult::from_model_file(&model)?;
    let lambda = model.lambda;
    let full_fit_r2 = stats::r2(&fit.predict(&d), &d.y)?;
    let baseline = stats::ridge_fit(&all.select(&SOTA_NAMES)?, lambda)?;

    let mut holdout = BTreeMap::new();
    let families: std::collections::BTreeSet<&str> =
        d.meta.iter().map(|r| r.family.as_str()).collect();
    for fam in families {
        let (train, test) = stats::holdout_family(&d, fam)?;
        let r =
            stats::ridge_fit(&train, lambda).and_then(|f| stats::r2(&f.predict(&test), &test.y));
        holdout.insert(fam.to_string(), r2_or_none(r)?);
    }

    let mut transfer = Vec::new();
    for dir in &m.compare {
        let other = load_dataset(dir)?.select(&FEATURE_NAMES)?;
        transfer.push(TransferResult {
            run: dir.display().to_string(),
            noise: other
                .meta
                .first()
                .map(|r| r.backend.clone())
                .unwrap_or_default(),
            rows: other.len(),
            r2: r2_or_none(stats::transfer_evaluate(&fit, &other))?,
        });
    }

    let (z, _, _) = stats::standardize(&d)?;
    let (singular_values, dominant) = stats::pca_screen(&z, PCA_CUTOFF)?;

    let mut by_size: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for (r, &y) in d.meta.iter().zip(&d.y) {
        by_size
            .entry(r.family.clone())
            .or_default()
            .entry(r.n)
            .or_default()
            .push(y);
    }
    let fidelity_vs_qubits = by_size
        .into_iter()
        .map(|(f, sizes)| {
            (
                f,
                sizes
                    .into_iter()
                    .map(|(n, v)| [n as f64, v.iter().sum::<f64>() / v.len() as f64])
                    .collect(),
            )
        })
        .collect();
    let predicted_vs_actual = d
        .meta
        .iter()
        .zip(&d.y)
        .zip(fit.predict(&d))
        .map(|((r, &actual), p)| PredictionPoint {
            benchmark: r.benchmark.clone(),
            family: r.family.clone(),
            actual,
            predicted: p.clamp(0.0, 1.0),
        })
        .collect();

    let report = Report {
        noise: m.noise_name.clone(),
        rows: d.len(),
        lambda,
        full_fit_r2,
        baseline_full_fit_r2: baseline.train_r2,
        splits: summary.splits,
        holdout,
        transfer,
        pca: Pca {
            cutoff: PCA_CUTOFF,
            dominant,
            singular_values: singular_values.clone(),
        },
        series: Series {
            fidelity_vs_qubits,
            singular_values,
            predicted_vs_actual,
        },
    };
    let path = m.out.join("report.json");
    write_json(&path, &report)?;
    Ok(path)
}

/// QASM text of a circuit file written by [`generate`].
pub fn qasm_of_file(path: &Path) -> Result<String, PipelineError> {
    let file = CircuitFile::load(path)?;
    let c = Circuit::try_from(&file.circuit).map_err(|e| stage_err(&file.id, e))?;
    Ok(to_qasm(&c))
}

pub fn export_qasm(m: &Manifest) -> Result<Vec<PathBuf>, PipelineError> {
    m.entries()
        .par_iter()
        .map(|e| {
            let text = qasm_of_file(&circuit_path(m, e))?;
            let path = m.out.join("qasm").join(format!("{}.qasm", e.id));
            write_atomic(&path, text.as_bytes())?;
            Ok(path)
        })
        .collect()
}
