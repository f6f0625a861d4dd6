use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::table::Schema;
use crate::diagnostics::BaselineConfig;
use crate::error::{Error, Result};
use crate::likelihood::{Dataset, LinkKind};
use crate::mpp::{Interval, DEFAULT_MAX_COVARIATES};
use crate::sampler::{ModelSpec, SamplerConfig};

/// Level range used for the logit link when none is given.
pub const DEFAULT_LOGIT_RANGE: Interval = Interval { lower: -5.0, upper: 5.0 };
/// Wider range for weakly identified, strongly separated data.
pub const WIDE_LOGIT_RANGE: Interval = Interval { lower: -10.0, upper: 10.0 };

/// `[model]` section; counts left out are taken from the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub levels: Option<usize>,
    pub link: LinkKind,
    /// `[lower, upper]`; logit only. Defaults to `[-5, 5]`.
    pub range: Option<[f64; 2]>,
    pub max_covariates: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { levels: None, link: LinkKind::Identity, range: None, max_covariates: DEFAULT_MAX_COVARIATES }
    }
}

impl ModelSection {
    /// Complete model for a dataset.
    pub fn resolve(&self, data: &Dataset) -> Result<ModelSpec> {
        self.resolve_counts(
            self.levels.unwrap_or(data.levels()),
            data.covariates(),
            data.linear_covariates(),
            data.cluster_count(),
        )
    }

    pub fn resolve_counts(&self, levels: usize, covariates: usize, linear: usize, clusters: usize) -> Result<ModelSpec> {
        let range = match (self.link, self.range) {
            (LinkKind::Identity, None) => Interval::unit(),
            (LinkKind::Identity, Some([lo, hi])) if lo == 0.0 && hi == 1.0 => Interval::unit(),
            (LinkKind::Identity, Some(_)) => {
                return Err(Error::invalid("the identity link fixes the level range to [0, 1]"));
            }
            (LinkKind::Logit, None) => DEFAULT_LOGIT_RANGE,
            (LinkKind::Logit, Some([lo, hi])) => Interval::new(lo, hi)?,
        };
        let spec = ModelSpec {
            levels,
            covariates,
            link: self.link,
            range,
            linear_covariates: linear,
            clusters,
            max_covariates: self.max_covariates,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `[data]` section: where the CSV lives and how its columns are used.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    #[serde(flatten)]
    pub schema: Schema,
}

/// Contents of a TOML run configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub model: ModelSection,
    pub sampler: SamplerConfig,
    pub data: DataSection,
    pub baseline: BaselineConfig,
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: FileConfig = toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        cfg.sampler.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative data paths are taken relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(p), Some(dir)) = (cfg.data.path.as_mut(), path.parent()) {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Format(format!("config: {e}")))
    }
}

pub const MANIFEST_FORMAT: &str = "monord-manifest";
pub const MANIFEST_VERSION: u32 = 1;

/// Dataset reference stored in a manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataRef {
    pub path: PathBuf,
    pub schema: Schema,
}

/// Everything needed to repeat a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub format: String,
    pub version: u32,
    pub tool_version: String,
    pub command: String,
    pub model: ModelSpec,
    pub sampler: SamplerConfig,
    pub chains: usize,
    pub data: Option<DataRef>,
    pub output_dir: PathBuf,
    pub created_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, model: ModelSpec, sampler: SamplerConfig, chains: usize, data: Option<DataRef>, output_dir: PathBuf) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            model,
            sampler,
            chains,
            data,
            output_dir,
            created_unix,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        super::table::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let m: RunManifest = super::table::read_json(path)?;
        if m.format != MANIFEST_FORMAT {
            return Err(Error::Format(format!("{}: not a run manifest", path.display())));
        }
        if m.version > MANIFEST_VERSION {
            return Err(Error::Format(format!("{}: manifest version {} is newer than supported", path.display(), m.version)));
        }
        m.model.validate()?;
        m.sampler.validate()?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_sections_resolve() {
        let text = r#"
            [model]
            link = "logit"
            range = [-10.0, 10.0]

            [sampler]
            iterations = 1000
            burn_in = 100
            thin = 5
            seed = 42
            d = 5.0

            [data]
            path = "data.csv"
            response = "grade"
            inverted = ["x2"]
            transform = "ecdf"
        "#;
        let cfg = FileConfig::from_toml(text).unwrap();
        assert_eq!(cfg.sampler.seed, 42);
        assert_eq!(cfg.sampler.a, 0.1);
        assert_eq!(cfg.data.schema.response, "grade");
        let data = Dataset::new(3, vec![vec![0.5, 0.5]], vec![2]).unwrap();
        let spec = cfg.model.resolve(&data).unwrap();
        assert_eq!(spec.range, WIDE_LOGIT_RANGE);
        assert_eq!((spec.levels, spec.covariates), (3, 2));
        let back = FileConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(FileConfig::from_toml("[sampler]\niterashuns = 5\n").is_err());
        assert!(FileConfig::from_toml("[sampler]\nthin = 0\n").is_err());
        let cfg = FileConfig::from_toml("[model]\nrange = [-2.0, 2.0]\n").unwrap();
        assert!(cfg.model.resolve_counts(3, 2, 0, 0).is_err());
    }

    #[test]
    fn manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let m = RunManifest::new(
            "fit",
            ModelSpec::nonparametric(5, 2),
            SamplerConfig::default().with_seed(9),
            2,
            Some(DataRef { path: "d.csv".into(), schema: Schema::default() }),
            dir.path().to_path_buf(),
        );
        let p = dir.path().join("manifest.json");
        m.save(&p).unwrap();
        assert_eq!(RunManifest::load(&p).unwrap(), m);
    }
}
