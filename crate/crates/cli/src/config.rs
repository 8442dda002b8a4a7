//! TOML configuration: grid, model choices as descriptor strings, experiments.

use std::path::{Path, PathBuf};

use orlicz_morrey::experiments::{catalog, ExperimentKind, ExperimentSpec};
use orlicz_morrey::norms::MorreyShape;
use orlicz_morrey::operators::{BmoSymbol, CZKernel};
use orlicz_morrey::params::Descriptor;
use orlicz_morrey::{Grid, Weight, YoungFunction};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub left: f64,
    pub right: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapesBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi2: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// One experiment; unset fields fall back to the top-level blocks, then to the
/// defaults of the experiment kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    pub name: String,
    pub kind: ExperimentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub young: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub type_bounds: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_values: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complement_override: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub young: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridBlock>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub shapes: ShapesBlock,
    #[serde(default, skip_serializing_if = "is_default")]
    pub output: OutputBlock,
    #[serde(default, rename = "experiment", skip_serializing_if = "Vec::is_empty")]
    pub experiments: Vec<ExperimentBlock>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

impl Default for Config {
    fn default() -> Self {
        Config {
            schema_version: SCHEMA_VERSION,
            seed: None,
            young: None,
            weight: None,
            kernel: None,
            function: None,
            grid: None,
            shapes: ShapesBlock::default(),
            output: OutputBlock::default(),
            experiments: Vec::new(),
        }
    }
}

/// Resolved model objects shared by the `norm` and `check` subcommands.
pub struct Model {
    pub grid: Grid,
    pub phi: YoungFunction,
    pub w: Weight,
    pub shape1: MorreyShape,
    pub shape2: MorreyShape,
}

fn parse_err(what: &str, e: impl std::fmt::Display) -> String {
    format!("{what}: {e}")
}

pub fn parse_shape(text: &str, phi: &YoungFunction, w: &Weight) -> Result<MorreyShape, String> {
    let d = Descriptor::parse(text).map_err(|e| parse_err("shape", e))?;
    MorreyShape::from_descriptor(&d, phi, w).map_err(|e| parse_err("shape", e))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: Config = toml::from_str(text).map_err(|e| format!("config: {e}"))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "config: schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            ));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Resolves every descriptor so that bad names fail at load time.
    fn validate(&self) -> Result<(), String> {
        self.model(None)?;
        let mut names = std::collections::BTreeSet::new();
        for e in &self.experiments {
            if !names.insert(&e.name) {
                return Err(format!("config: experiment `{}` defined twice", e.name));
            }
        }
        if !self.experiments.is_empty() {
            self.experiment_specs(None, self.seed.unwrap_or(DEFAULT_SEED))?;
            let needs_seed = self.experiments.iter().any(|e| {
                !matches!(e.kind, ExperimentKind::Necessity | ExperimentKind::IdentitySuite)
            });
            if needs_seed && self.seed.is_none() {
                return Err("config: `seed` is required for corpus experiments".into());
            }
        }
        Ok(())
    }

    pub fn grid(&self, points: Option<usize>) -> Result<Grid, String> {
        let grid = match &self.grid {
            Some(g) => Grid::new(g.left, g.right, g.n_points).map_err(|e| parse_err("grid", e))?,
            None => Grid::default(),
        };
        match points {
            Some(n) => grid.with_points(n).map_err(|e| parse_err("grid", e)),
            None => Ok(grid),
        }
    }

    fn young_or(&self, local: Option<&String>) -> Result<YoungFunction, String> {
        match local.or(self.young.as_ref()) {
            Some(t) => YoungFunction::parse(t).map_err(|e| parse_err("young", e)),
            None => Ok(YoungFunction::Power { p: 2.0 }),
        }
    }

    fn weight_or(&self, local: Option<&String>) -> Result<Weight, String> {
        match local.or(self.weight.as_ref()) {
            Some(t) => Weight::parse(t).map_err(|e| parse_err("weight", e)),
            None => Ok(Weight::Constant { c: 1.0 }),
        }
    }

    pub fn model(&self, points: Option<usize>) -> Result<Model, String> {
        let phi = self.young_or(None)?;
        let w = self.weight_or(None)?;
        let shape = |t: &Option<String>| match t {
            Some(t) => parse_shape(t, &phi, &w),
            None => Ok(MorreyShape::power_radius(0.5)),
        };
        if let Some(k) = &self.kernel {
            CZKernel::parse(k).map_err(|e| parse_err("kernel", e))?;
        }
        Ok(Model {
            grid: self.grid(points)?,
            shape1: shape(&self.shapes.phi1)?,
            shape2: shape(&self.shapes.phi2)?,
            phi,
            w,
        })
    }

    /// The configured experiments, or the built-in catalog when there are none.
    pub fn experiment_specs(&self, points: Option<usize>, seed: u64) -> Result<Vec<ExperimentSpec>, String> {
        let grid = self.grid(points)?;
        if self.experiments.is_empty() {
            return Ok(catalog(grid, seed));
        }
        self.experiments.iter().map(|b| self.build(b, grid, seed)).collect()
    }

    fn build(&self, b: &ExperimentBlock, grid: Grid, seed: u64) -> Result<ExperimentSpec, String> {
        let ctx = |e: String| format!("experiment `{}`: {e}", b.name);
        let mut spec = ExperimentSpec::new(&b.name, b.kind, grid, seed);
        if b.young.is_some() || self.young.is_some() {
            spec.phi = self.young_or(b.young.as_ref()).map_err(ctx)?;
        }
        if b.weight.is_some() || self.weight.is_some() {
            spec.w = self.weight_or(b.weight.as_ref()).map_err(ctx)?;
        }
        let (phi, w) = (spec.phi.clone(), spec.w.clone());
        if let Some(t) = b.shape1.as_ref().or(self.shapes.phi1.as_ref()) {
            spec.shape1 = parse_shape(t, &phi, &w).map_err(ctx)?;
        }
        if let Some(t) = b.shape2.as_ref().or(self.shapes.phi2.as_ref()) {
            spec.shape2 = parse_shape(t, &phi, &w).map_err(ctx)?;
        }
        if let Some(t) = b.kernel.as_ref().or(self.kernel.as_ref()) {
            if !matches!(b.kind, ExperimentKind::Maximal | ExperimentKind::MaximalWeak) {
                spec.kernel = Some(CZKernel::parse(t).map_err(|e| ctx(e.to_string()))?);
            }
        }
        if let Some(t) = &b.symbol {
            spec.b = Some(BmoSymbol::parse(t).map_err(|e| ctx(e.to_string()))?);
        }
        if let Some(t) = &b.complement_override {
            spec.complement_override = Some(YoungFunction::parse(t).map_err(|e| ctx(e.to_string()))?);
        }
        spec.q = b.q.or(spec.q);
        spec.components = b.components.unwrap_or(spec.components);
        spec.type_bounds = b.type_bounds.unwrap_or(spec.type_bounds);
        spec.corpus_size = b.corpus_size.unwrap_or(spec.corpus_size);
        spec.drift_bound = b.drift_bound.unwrap_or(spec.drift_bound);
        spec.r0 = b.r0.unwrap_or(spec.r0);
        if let Some(m) = &b.m_values {
            spec.m_values = m.clone();
        }
        spec.validate().map_err(|e| ctx(e.to_string()))?;
        Ok(spec)
    }
}
