//! Experiment grid and the flat `key=value` settings format.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, ManifoldSpec, Point};
use crate::mechanisms::Mechanism;

/// Privacy levels swept by default.
pub const DEFAULT_EPSILONS: [f64; 11] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0, 1.5, 2.0, 2.5, 3.0];
pub const DEFAULT_NS: [usize; 3] = [10, 50, 100];
pub const DEFAULT_SEED: u64 = 20_240_601;

/// How the Langevin anchor / EWG footpoint is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Scenario {
    /// The ball centre (public prior information).
    AnchorAtCenter,
    /// A uniform point of the ball, drawn independently of the data.
    AnchorRandomInBall,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::AnchorAtCenter => "center",
            Scenario::AnchorRandomInBall => "random",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "center" | "centre" | "1" => Ok(Scenario::AnchorAtCenter),
            "random" | "2" => Ok(Scenario::AnchorRandomInBall),
            other => Err(Error::Config(format!("unknown anchor scenario `{other}` (use center or random)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub manifold: ManifoldSpec,
    pub center: Point,
    pub r: f64,
    pub n_list: Vec<usize>,
    pub alpha: f64,
    pub epsilon_list: Vec<f64>,
    pub trials: usize,
    pub mechanisms: Vec<Mechanism>,
    pub scenario: Scenario,
    pub master_seed: u64,
    pub lambda: f64,
    pub p: f64,
    /// Draw a fresh dataset for every trial (otherwise one per `n`).
    pub resample_dataset: bool,
    /// Overrides the default diffusion step count.
    pub n_step: Option<usize>,
}

impl ExperimentConfig {
    /// Defaults for a manifold: ball centred at the canonical origin, the
    /// sphere comparing BM with RL and Hadamard spaces comparing Langevin
    /// with RL and EWG.
    pub fn for_manifold(manifold: ManifoldSpec) -> Self {
        let (r, mechanisms) = match manifold.kind() {
            ManifoldKind::Sphere => (PI / 5.0, vec![Mechanism::Bm, Mechanism::Rl]),
            ManifoldKind::Hyperboloid => (3.0, vec![Mechanism::Langevin, Mechanism::Rl, Mechanism::Ewg]),
            ManifoldKind::Euclidean => (1.0, vec![Mechanism::Bm, Mechanism::Rl, Mechanism::Ewg]),
        };
        Self {
            manifold,
            center: manifold.origin(),
            r,
            n_list: DEFAULT_NS.to_vec(),
            alpha: 2.0,
            epsilon_list: DEFAULT_EPSILONS.to_vec(),
            trials: 1000,
            mechanisms,
            scenario: Scenario::AnchorAtCenter,
            master_seed: DEFAULT_SEED,
            lambda: 1.1,
            p: 2.0,
            resample_dataset: true,
            n_step: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return bad("sample sizes must be a non-empty list of positive integers".into());
        }
        if self.epsilon_list.is_empty() || self.epsilon_list.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return bad("privacy budgets must be a non-empty list of positive reals".into());
        }
        if !(self.alpha > 1.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must exceed 1, got {}", self.alpha));
        }
        if !(self.r > 0.0) || !self.r.is_finite() {
            return bad(format!("radius must be positive and finite, got {}", self.r));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return bad(format!("p must exceed 1, got {}", self.p));
        }
        if self.mechanisms.is_empty() {
            return bad("at least one mechanism is required".into());
        }
        if self.center.spec() != &self.manifold {
            return bad(format!("centre lives on {}, not {}", self.center.spec(), self.manifold));
        }
        if self.n_step == Some(0) {
            return bad("steps must be at least 1".into());
        }
        Ok(())
    }

    /// Builds a config from settings, starting from the manifold defaults.
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let manifold: ManifoldSpec = match s.last("manifold") {
            Some(m) => m.parse()?,
            None => ManifoldSpec::sphere(2),
        };
        let mut cfg = Self::for_manifold(manifold);
        if let Some(v) = s.parsed::<f64>("r")? {
            cfg.r = v;
        }
        if let Some(v) = s.parsed::<f64>("alpha")? {
            cfg.alpha = v;
        }
        if let Some(v) = s.parsed::<f64>("p")? {
            cfg.p = v;
        }
        if let Some(v) = s.parsed::<f64>("lambda")? {
            cfg.lambda = v;
        }
        if let Some(v) = s.parsed::<usize>("trials")? {
            cfg.trials = v;
        }
        if let Some(v) = s.parsed::<u64>("seed")? {
            cfg.master_seed = v;
        }
        if let Some(v) = s.parsed::<usize>("steps")? {
            cfg.n_step = Some(v);
        }
        if let Some(v) = s.parsed::<bool>("resample-dataset")? {
            cfg.resample_dataset = v;
        }
        if let Some(v) = s.last("anchor") {
            cfg.scenario = v.parse()?;
        }
        let eps = s.list::<f64>("eps")?;
        if !eps.is_empty() {
            cfg.epsilon_list = eps;
        }
        let ns = s.list::<usize>("n")?;
        if !ns.is_empty() {
            cfg.n_list = ns;
        }
        let mechs = s.all("mechanisms");
        if !mechs.is_empty() {
            cfg.mechanisms = mechs.iter().map(|m| Mechanism::parse(m)).collect::<Result<_>>()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Ordered multi-map of settings. Keys mirror the long CLI flags without
/// dashes (`eps`, `resample-dataset`, ...). Comma-separated values and
/// repeated keys both extend a list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, Vec<String>>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got `{raw}`", i + 1)))?;
            let key = normalize_key(k);
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", i + 1)));
            }
            out.values.entry(key).or_default().extend(split_list(v));
        }
        Ok(out)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    /// Replaces `key` wholesale (command-line values win over the file).
    pub fn set<I, S>(&mut self, key: &str, values: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let vals: Vec<String> = values.into_iter().flat_map(|v| split_list(v.as_ref())).collect();
        if !vals.is_empty() {
            self.values.insert(normalize_key(key), vals);
        }
    }

    pub fn all(&self, key: &str) -> &[String] {
        self.values.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn last(&self, key: &str) -> Option<&str> {
        self.all(key).last().map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.last(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("cannot parse {key} = `{v}`"))))
            .transpose()
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.all(key)
            .iter()
            .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("cannot parse {key} entry `{v}`"))))
            .collect()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches('-').replace('_', "-").to_ascii_lowercase()
}

fn split_list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}
