//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::CliError;
use crate::groups::{GroupSpec, TowerKind, TowerSpec, TowerTop};
use crate::hyperbolic::{Model, ModelPoint, MoebiusMap};
use crate::kernel::{ClosurePolicy, SeriesOptions};
use crate::tower::default_grid;

/// Configurations shipped with the tool, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("trivial", include_str!("../../configs/trivial.toml")),
    ("annulus", include_str!("../../configs/annulus.toml")),
    ("annulus_tower", include_str!("../../configs/annulus_tower.toml")),
    ("schottky_abelian", include_str!("../../configs/schottky_abelian.toml")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Record,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "record" => Ok(OutputFormat::Record),
            _ => Err(format!("unknown format `{s}` (expected csv or record)")),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    group: GroupSection,
    tower: Option<TowerSection>,
    grid: Option<GridSection>,
    series: Option<SeriesSection>,
    #[serde(default)]
    outputs: Vec<OutputSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupSection {
    model: Model,
    #[serde(default)]
    generators: Vec<[f64; 8]>,
    #[serde(default)]
    asserted_free_discrete: bool,
    #[serde(default)]
    asserted_convergence_type: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TowerSection {
    kind: TowerKind,
    schedule: Vec<u64>,
    top: TowerTop,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    basepoint: Option<[f64; 2]>,
    points: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesSection {
    max_word_length: usize,
    tol: Option<f64>,
    closure: Option<String>,
    prune: Option<bool>,
    element_cap: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: OutputFormat,
    pub path: PathBuf,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub group: GroupSpec<f64>,
    pub tower: Option<TowerSpec>,
    pub basepoint: ModelPoint<f64>,
    pub grid: Vec<ModelPoint<f64>>,
    pub series: SeriesOptions<f64>,
    pub outputs: Vec<OutputSection>,
    /// SHA-256 of the configuration text, hex.
    pub hash: String,
    /// Name of the bundled configuration with the same text, if any.
    pub bundled: Option<&'static str>,
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        let hash = sha256_hex(text);
        let bundled = BUNDLED
            .iter()
            .find(|(_, t)| sha256_hex(t) == hash)
            .map(|(n, _)| *n);

        let model = file.group.model;
        let mut generators = Vec::with_capacity(file.group.generators.len());
        for (k, g) in file.group.generators.iter().enumerate() {
            let c = |i: usize| Complex::new(g[2 * i], g[2 * i + 1]);
            let m = MoebiusMap::new(c(0), c(1), c(2), c(3), model)
                .map_err(|e| CliError::Config(format!("generator {k}: {e}")))?;
            generators.push(m);
        }
        let mut group = GroupSpec::new(model, generators).map_err(CliError::from_config)?;
        group.asserted_free_discrete = file.group.asserted_free_discrete;
        group.asserted_convergence_type = file.group.asserted_convergence_type;

        let tower = match file.tower {
            None => None,
            Some(t) => Some(TowerSpec::new(t.kind, t.schedule, t.top, group.rank()).map_err(CliError::from_config)?),
        };

        let point = |p: [f64; 2]| ModelPoint::new(Complex::new(p[0], p[1]), model).map_err(CliError::from_config);
        let (basepoint, grid) = match file.grid {
            None => (ModelPoint::base(model), default_grid(model)),
            Some(g) => {
                let base = match g.basepoint {
                    Some(p) => point(p)?,
                    None => ModelPoint::base(model),
                };
                let grid = match g.points {
                    Some(ps) if ps.is_empty() => return Err(CliError::Config("grid.points is empty".into())),
                    Some(ps) => ps.into_iter().map(point).collect::<Result<Vec<_>, _>>()?,
                    None => default_grid(model),
                };
                (base, grid)
            }
        };

        let mut series = SeriesOptions::new(0);
        if let Some(s) = file.series {
            series.max_len = s.max_word_length;
            if let Some(t) = s.tol {
                if !(t > 0.0) {
                    return Err(CliError::Config(format!("series.tol must be positive, got {t}")));
                }
                series.tol = t;
            }
            if let Some(c) = s.closure {
                series.closure = c.parse::<ClosurePolicy>().map_err(CliError::from_config)?;
            }
            series.prune = s.prune.unwrap_or(false);
            if let Some(cap) = s.element_cap {
                series.element_cap = u128::from(cap);
            }
        }
        if let ClosurePolicy::RightCoset(w) = &series.closure {
            group.word_to_matrix(w).map_err(CliError::from_config)?;
        }

        for o in &file.outputs {
            if let Some(dir) = o.path.parent() {
                if !dir.as_os_str().is_empty() && !dir.is_dir() {
                    return Err(CliError::Config(format!(
                        "output directory {} does not exist",
                        dir.display()
                    )));
                }
            }
        }

        Ok(Self {
            group,
            tower,
            basepoint,
            grid,
            series,
            outputs: file.outputs,
            hash,
            bundled,
        })
    }

    /// Group properties are taken on trust unless the configuration is a bundled one.
    pub fn needs_assertion_warning(&self) -> bool {
        (self.group.asserted_free_discrete || self.group.asserted_convergence_type)
            && self.group.rank() > 0
            && self.bundled.is_none()
    }

    pub fn require_convergence(&self) -> Result<(), CliError> {
        if self.group.rank() > 0 && !self.group.asserted_convergence_type {
            return Err(CliError::Config(
                "series evaluation needs group.asserted_convergence_type = true".into(),
            ));
        }
        Ok(())
    }

    pub fn require_tower(&self) -> Result<&TowerSpec, CliError> {
        self.tower
            .as_ref()
            .ok_or_else(|| CliError::Config("configuration has no [tower] section".into()))
    }
}
