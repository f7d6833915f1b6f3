use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::PipelineError;
use crate::bench::{Family, FamilyParams};
use crate::scoring::DfeConfig;
use crate::sim::NoiseModel;

pub const DEFAULT_SHOTS: u64 = 4096;
pub const DEFAULT_SPLITS: usize = 50;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestToml {
    seed: Option<u64>,
    shots: Option<u64>,
    noise: Option<String>,
    out: Option<PathBuf>,
    instances: Option<u64>,
    suite: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    params: BTreeMap<String, FamilyParams>,
    #[serde(default)]
    noise_presets: BTreeMap<String, PresetToml>,
    #[serde(default)]
    dfe: DfeToml,
    #[serde(default)]
    fit: FitToml,
    #[serde(default)]
    report: ReportToml,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetToml {
    p1: Option<f64>,
    p2: f64,
    pm: f64,
    pidle: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DfeToml {
    k: Option<usize>,
    shots: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitToml {
    lambda: Option<f64>,
    folds: Option<usize>,
    splits: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportToml {
    #[serde(default)]
    compare: Vec<PathBuf>,
}

/// Command-line values that take precedence over the manifest.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub noise: Option<String>,
    pub shots: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Fixed ridge strength; chosen by cross-validation when unset.
    pub lambda: Option<f64>,
    pub folds: usize,
    pub splits: usize,
}

/// A validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub seed: u64,
    pub shots: u64,
    pub noise_name: String,
    pub noise: NoiseModel,
    pub out: PathBuf,
    pub instances: u64,
    pub suite: BTreeMap<Family, Vec<usize>>,
    pub params: BTreeMap<Family, FamilyParams>,
    pub dfe: DfeConfig,
    pub fit: FitConfig,
    /// Output directories of other runs, for transfer evaluation.
    pub compare: Vec<PathBuf>,
}

/// One benchmark instance of the suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub id: String,
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

fn invalid(msg: impl Into<String>) -> PipelineError {
    PipelineError::Validation(msg.into())
}

fn family(name: &str) -> Result<Family, PipelineError> {
    name.parse()
        .map_err(|_| invalid(format!("unknown family `{name}`")))
}

impl Manifest {
    pub fn load(path: &Path, ov: &Overrides) -> Result<Manifest, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read manifest {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Manifest::parse(&text, base, ov)
    }

    /// Relative paths in the manifest resolve against `base`.
    pub fn parse(text: &str, base: &Path, ov: &Overrides) -> Result<Manifest, PipelineError> {
        let raw: ManifestToml =
            toml::from_str(text).map_err(|e| invalid(format!("manifest: {e}")))?;

        let mut presets: BTreeMap<String, NoiseModel> = BTreeMap::new();
        for (name, p) in raw.noise_presets {
            let nm = NoiseModel {
                p1: p.p1.unwrap_or(p.pidle),
                p2: p.p2,
                pm: p.pm,
                pidle: p.pidle,
            };
            nm.validate()
                .map_err(|e| invalid(format!("noise preset `{name}`: {e}")))?;
            presets.insert(name, nm);
        }
        let noise_name = ov
            .noise
            .clone()
            .or(raw.noise)
            .unwrap_or_else(|| "noiseless".into());
        let noise = presets
            .get(&noise_name)
            .copied()
            .or_else(|| NoiseModel::preset(&noise_name))
            .ok_or_else(|| invalid(format!("unknown noise preset `{noise_name}`")))?;

        let shots = ov.shots.or(raw.shots).unwrap_or(DEFAULT_SHOTS);
        if shots == 0 {
            return Err(invalid("shots must be at least 1"));
        }
        let instances = raw.instances.unwrap_or(1);
        if instances == 0 {
            return Err(invalid("instances must be at least 1"));
        }

        let mut params = BTreeMap::new();
        for (name, p) in raw.params {
            params.insert(family(&name)?, p);
        }
        let seed = ov.seed.or(raw.seed).unwrap_or(0);
        let mut suite = BTreeMap::new();
        for (name, sizes) in raw.suite {
            let f = family(&name)?;
            if sizes.is_empty() {
                return Err(invalid(format!("{f}: empty size list")));
            }
            let mut seen = sizes.clone();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid(format!("{f}: repeated size")));
            }
            for &n in &sizes {
                f.spec(n, params.get(&f).unwrap_or(&FamilyParams::default()), seed)
                    .map_err(|e| invalid(format!("{f} n={n}: {e}")))?;
            }
            suite.insert(f, sizes);
        }
        if suite.is_empty() {
            return Err(invalid("suite lists no families"));
        }

        let dfe = DfeConfig {
            k: raw.dfe.k.unwrap_or(DfeConfig::default().k),
            shots: raw.dfe.shots.unwrap_or(shots),
        };
        if dfe.k == 0 || dfe.shots == 0 {
            return Err(invalid("dfe.k and dfe.shots must be at least 1"));
        }
        let fit = FitConfig {
            lambda: raw.fit.lambda,
            folds: raw.fit.folds.unwrap_or(5),
            splits: raw.fit.splits.unwrap_or(DEFAULT_SPLITS),
        };
        if fit.lambda.is_some_and(|l| !(l >= 0.0)) {
            return Err(invalid("fit.lambda must be non-negative"));
        }
        if fit.folds < 2 || fit.splits == 0 {
            return Err(invalid(
                "fit.folds must be at least 2 and fit.splits at least 1",
            ));
        }

        let out = match (&ov.out, raw.out) {
            (Some(o), _) => o.clone(),
            (None, Some(o)) => base.join(o),
            (None, None) => base.join("out"),
        };
        let compare = raw
            .report
            .compare
            .into_iter()
            .map(|p| base.join(p))
            .collect();
        Ok(Manifest {
            seed,
            shots,
            noise_name,
            noise,
            out,
            instances,
            suite,
            params,
            dfe,
            fit,
            compare,
        })
    }

    /// Suite instances in family order, then listed size, then seed.
    pub fn entries(&self) -> Vec<Entry> {
        let mut out = Vec::new();
        for (&family, sizes) in &self.suite {
            for &n in sizes {
                for i in 0..self.instances {
                    let seed = self.seed.wrapping_add(i);
                    let id = format!("{}_n{n}_s{seed}", family.name().to_lowercase());
                    out.push(Entry {
                        id,
                        family,
                        n,
                        seed,
                    });
                }
            }
        }
        out
    }

    pub fn params_for(&self, f: Family) -> FamilyParams {
        self.params.get(&f).cloned().unwrap_or_default()
    }

    pub fn circuits_dir(&self) -> PathBuf {
        self.out.join("circuits")
    }
}
