//! Plain-text experiment configuration: one `key = value` entry per line,
//! `#` starts a comment, sweep grids are comma lists.
//!
//! ```text
//! lattice_size = 256
//! variant = fixed-h
//! theta = -0.47, -0.17034, 0.13
//! samples = 64
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::{DisorderModel, LatticeSpec, THETA_C};
use crate::network::LinkRule;
use crate::placement::{hexagonal_radius, GAP};
use crate::textio;
use crate::topology::AnalysisOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    FixedH,
    BoxH,
    Diluted,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-h" => Ok(Variant::FixedH),
            "box-h" => Ok(Variant::BoxH),
            "diluted" => Ok(Variant::Diluted),
            _ => Err(Error::Variant(format!(
                "unknown variant {s:?} (fixed-h, box-h, diluted)"
            ))),
        }
    }
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::FixedH => "fixed-h",
            Variant::BoxH => "box-h",
            Variant::Diluted => "diluted",
        }
    }

    /// Name of the parameter swept for this variant.
    pub fn parameter(&self) -> &'static str {
        match self {
            Variant::Diluted => "p",
            _ => "theta",
        }
    }

    pub fn model(&self, value: f64) -> DisorderModel {
        match self {
            Variant::FixedH => DisorderModel::FixedH { theta: value },
            Variant::BoxH => DisorderModel::BoxH { theta: value },
            Variant::Diluted => DisorderModel::Diluted { p: value },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PackingKind {
    Spiral,
    /// Equal disks on a triangular lattice covering the whole torus.
    Hexagonal,
    /// Equal tangent disks in a hexagonal patch around the centre.
    HexagonalPatch,
}

impl PackingKind {
    pub fn name(&self) -> &'static str {
        match self {
            PackingKind::Spiral => "spiral",
            PackingKind::Hexagonal => "hexagonal",
            PackingKind::HexagonalPatch => "hexagonal-patch",
        }
    }
}

impl FromStr for PackingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spiral" => Ok(PackingKind::Spiral),
            "hexagonal" => Ok(PackingKind::Hexagonal),
            "hexagonal-patch" => Ok(PackingKind::HexagonalPatch),
            _ => Err(Error::parameter(format!(
                "unknown packing {s:?} (spiral, hexagonal, hexagonal-patch)"
            ))),
        }
    }
}

/// Every knob of an experiment, with defaults for omitted keys.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub lattice_size: u32,
    pub variant: Variant,
    pub theta: Vec<f64>,
    pub p: Vec<f64>,
    pub packing: PackingKind,
    pub gamma: f64,
    pub r_min: f64,
    /// Defaults to `L / 8`.
    pub r_max: Option<f64>,
    pub coverage: f64,
    /// Hexagonal pitch; by default matched to the node count of the spiral
    /// packing drawn for the same sample.
    pub pitch: Option<f64>,
    /// Patch disk radius; by default chosen so that the patch has as many
    /// nodes as the spiral packing drawn for the same sample.
    pub radius: Option<f64>,
    pub rule: LinkRule,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    /// Path-length sources; automatic when omitted.
    pub sources: Option<usize>,
    pub bin_ratio: f64,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lattice_size: 128,
            variant: Variant::FixedH,
            theta: vec![THETA_C],
            p: vec![0.5],
            packing: PackingKind::Spiral,
            gamma: 2.67,
            r_min: 2.0,
            r_max: None,
            coverage: 0.3,
            pitch: None,
            radius: None,
            rule: LinkRule::NodeExclusive,
            samples: 1,
            seed: 0,
            workers: 1,
            sources: None,
            bin_ratio: 2.0,
            output: PathBuf::from("spinweb-out"),
        }
    }
}

/// Keys accepted in configuration files and as command-line flags.
pub const KEYS: [&str; 18] = [
    "lattice_size",
    "variant",
    "theta",
    "p",
    "packing",
    "gamma",
    "r_min",
    "r_max",
    "coverage",
    "pitch",
    "radius",
    "rule",
    "samples",
    "seed",
    "workers",
    "sources",
    "bin_ratio",
    "output",
];

fn number<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::parameter(format!("{key}: cannot parse {value:?}: {e}")))
}

fn optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if value == "auto" {
        Ok(None)
    } else {
        number(key, value).map(Some)
    }
}

fn grid(key: &str, value: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = value.split(',').map(|v| number(key, v.trim())).collect::<Result<_>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::parameter(format!("{key}: grid values must be finite")));
    }
    Ok(values)
}

impl ExperimentConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "lattice_size" => self.lattice_size = number(key, value)?,
            "variant" => self.variant = value.parse()?,
            "theta" => self.theta = grid(key, value)?,
            "p" => self.p = grid(key, value)?,
            "packing" => self.packing = value.parse()?,
            "gamma" => self.gamma = number(key, value)?,
            "r_min" => self.r_min = number(key, value)?,
            "r_max" => self.r_max = optional(key, value)?,
            "coverage" => self.coverage = number(key, value)?,
            "pitch" => self.pitch = optional(key, value)?,
            "radius" => self.radius = optional(key, value)?,
            "rule" => self.rule = value.parse()?,
            "samples" => self.samples = number(key, value)?,
            "seed" => self.seed = number(key, value)?,
            "workers" => self.workers = number(key, value)?,
            "sources" => self.sources = optional(key, value)?,
            "bin_ratio" => self.bin_ratio = number(key, value)?,
            "output" => self.output = PathBuf::from(value),
            _ => return Err(Error::parameter(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a configuration text on top of `self`.
    pub fn apply_text(&mut self, name: &str, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(name, i + 1, "expected `key = value`"))?;
            self.set(key.trim(), value).map_err(|e| match e {
                Error::Parameter(m) | Error::Variant(m) => Error::parse(name, i + 1, m),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_text(name, text)?;
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&path.display().to_string(), &textio::read_to_string(path)?)
    }

    pub fn spec(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(self.lattice_size)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max.unwrap_or(self.lattice_size as f64 / 8.0)
    }

    /// Values of the swept parameter (a single value for scalar runs).
    pub fn grid(&self) -> &[f64] {
        match self.variant {
            Variant::Diluted => &self.p,
            _ => &self.theta,
        }
    }

    pub fn is_sweep(&self) -> bool {
        self.grid().len() > 1
    }

    pub fn analysis(&self) -> AnalysisOptions {
        AnalysisOptions {
            sources: self.sources,
            seed: self.seed,
            bin_ratio: self.bin_ratio,
        }
    }

    /// Checks every parameter against the module contracts.
    pub fn validate(&self) -> Result<()> {
        let spec = self.spec()?;
        if self.grid().is_empty() {
            return Err(Error::parameter("sweep grid is empty"));
        }
        for &v in self.grid() {
            self.variant.model(v).validate()?;
        }
        if self.samples == 0 {
            return Err(Error::parameter("samples must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::parameter("workers must be at least 1"));
        }
        if self.sources == Some(0) {
            return Err(Error::parameter("sources must be at least 1"));
        }
        if !(self.bin_ratio > 1.0 && self.bin_ratio.is_finite()) {
            return Err(Error::parameter("bin_ratio must exceed 1"));
        }
        if !(self.coverage > 0.0 && self.coverage < 1.0) {
            return Err(Error::parameter("coverage must lie in (0, 1)"));
        }
        let size = spec.size() as f64;
        let matched = match self.packing {
            PackingKind::Spiral => true,
            PackingKind::Hexagonal => self.pitch.is_none(),
            PackingKind::HexagonalPatch => self.radius.is_none(),
        };
        if matched {
            let r_max = self.r_max();
            if !(self.gamma > 1.0 && self.r_min >= 2.0 && self.r_min < r_max) {
                return Err(Error::parameter(format!(
                    "radius law needs gamma > 1 and 2 <= r_min < r_max, got gamma={} r_min={} r_max={r_max}",
                    self.gamma, self.r_min
                )));
            }
            if r_max + GAP >= size / 4.0 {
                return Err(Error::parameter(format!(
                    "r_max {r_max} too large for L = {}",
                    spec.size()
                )));
            }
        }
        if let Some(pitch) = self.pitch {
            if !(pitch > 0.0 && hexagonal_radius(pitch, self.coverage) >= 2.0) {
                return Err(Error::parameter(format!("pitch {pitch} gives node radius below 2")));
            }
        }
        if let Some(radius) = self.radius {
            if !(radius >= 2.0 && radius + GAP < size / 2.0) {
                return Err(Error::parameter(format!("patch radius {radius} outside [2, L/2)")));
            }
        }
        Ok(())
    }

    /// Canonical `key = value` text with every key resolved.
    pub fn canonical(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
        let mut s = String::new();
        let mut put = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        put("lattice_size", self.lattice_size.to_string());
        put("variant", self.variant.name().into());
        put("theta", list(&self.theta));
        put("p", list(&self.p));
        put("packing", self.packing.name().into());
        put("gamma", self.gamma.to_string());
        put("r_min", self.r_min.to_string());
        put("r_max", opt(self.r_max.map(|v| v.to_string())));
        put("coverage", self.coverage.to_string());
        put("pitch", opt(self.pitch.map(|v| v.to_string())));
        put("radius", opt(self.radius.map(|v| v.to_string())));
        put("rule", self.rule.name().into());
        put("samples", self.samples.to_string());
        put("seed", self.seed.to_string());
        put("sources", opt(self.sources.map(|v| v.to_string())));
        put("bin_ratio", self.bin_ratio.to_string());
        s
    }

    /// SHA-256 of the canonical text. Worker count and output directory are
    /// left out: they do not change any result.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
