//! Experiment configuration: one JSON file per run, one system source, and
//! per-subcommand parameter sections with full defaults so a minimal config
//! stays minimal.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::{Matrix3, Vector3};
use nlslab_core::{
    coefficients_to_system, system_to_coefficients, AsymptoticsConfig, CoefficientVector,
    FieldPair, FormTag, Gl2Transform, OdeOptions, StandardForm, SystemRep, C64,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

pub const DEFAULT_TOL: f64 = nlslab_core::eigen::CLUSTER_TOL;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSource,
    /// Seed for the optional template disguise; sweeps inherit it.
    #[serde(default)]
    pub seed: u64,
    /// Relative eigenvalue clustering band used by analysis reports.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub ode: OdeSection,
    #[serde(default)]
    pub pde: PdeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if !(self.tol > 0.0 && self.tol < 1.0) {
            bail!("tol must lie in (0, 1), got {}", self.tol);
        }
        self.ode.validate()?;
        self.pde.validate()?;
        self.output.validate()?;
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        Ok(())
    }
}

/// Exactly one of the three sources: raw couplings, a matrix-vector pair, or
/// a named standard-form template.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSource {
    #[serde(default)]
    pub coefficients: Option<Vec<f64>>,
    /// Row-major 3x3 interaction matrix.
    #[serde(default)]
    pub matrix: Option<Vec<f64>>,
    /// Potential part; defaults to zero when a matrix is given.
    #[serde(default)]
    pub vector: Option<Vec<f64>>,
    #[serde(default)]
    pub template: Option<TemplateSource>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSource {
    /// One of A11, A12, A13, A21, A22.
    pub tag: String,
    pub params: BTreeMap<String, f64>,
    /// Apply a seeded random change of variables to the built system, so the
    /// reduction commands have something to undo.
    #[serde(default)]
    pub disguise: bool,
}

impl SystemSource {
    fn validate(&self) -> Result<()> {
        let sources = [
            self.coefficients.is_some(),
            self.matrix.is_some(),
            self.template.is_some(),
        ];
        match sources.iter().filter(|&&b| b).count() {
            0 => bail!("system needs one of: coefficients, matrix, template"),
            1 => {}
            _ => bail!("system sources are mutually exclusive; give exactly one"),
        }
        if self.vector.is_some() && self.matrix.is_none() {
            bail!("system.vector only accompanies system.matrix");
        }
        if let Some(c) = &self.coefficients {
            if c.len() != 12 {
                bail!(
                    "system.coefficients needs exactly 12 entries, got {}",
                    c.len()
                );
            }
        }
        if let Some(m) = &self.matrix {
            if m.len() != 9 {
                bail!(
                    "system.matrix needs exactly 9 row-major entries, got {}",
                    m.len()
                );
            }
        }
        if let Some(v) = &self.vector {
            if v.len() != 3 {
                bail!("system.vector needs exactly 3 entries, got {}", v.len());
            }
        }
        if let Some(t) = &self.template {
            FormTag::parse(&t.tag).ok_or_else(|| anyhow!("unknown template tag {:?}", t.tag))?;
        }
        Ok(())
    }

    /// Build the system this source describes. Template parameter errors are
    /// configuration errors: the documented ranges are part of the schema.
    pub fn resolve(&self, seed: u64) -> Result<ResolvedSystem> {
        if let Some(c) = &self.coefficients {
            let cv = CoefficientVector::new(core::array::from_fn(|i| c[i]));
            return Ok(ResolvedSystem {
                system: coefficients_to_system(&cv),
                template: None,
                disguise: None,
            });
        }
        if let Some(m) = &self.matrix {
            let v = self.vector.clone().unwrap_or_else(|| vec![0.0; 3]);
            let system = SystemRep::new(Matrix3::from_row_slice(m), Vector3::from_row_slice(&v));
            return Ok(ResolvedSystem {
                system,
                template: None,
                disguise: None,
            });
        }
        let t = self.template.as_ref().expect("validated");
        let form = build_form(t)?;
        let built = form
            .build()
            .with_context(|| format!("template {} parameters out of range", t.tag))?;
        let (system, disguise) = if t.disguise {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (s, m) = nlslab_core::random_disguise(&mut rng, &built);
            (s, Some(m))
        } else {
            (built, None)
        };
        Ok(ResolvedSystem {
            system,
            template: Some(form),
            disguise,
        })
    }
}

pub struct ResolvedSystem {
    pub system: SystemRep,
    pub template: Option<StandardForm>,
    pub disguise: Option<Gl2Transform>,
}

impl ResolvedSystem {
    pub fn coefficients(&self) -> CoefficientVector {
        system_to_coefficients(&self.system)
    }
}

fn build_form(t: &TemplateSource) -> Result<StandardForm> {
    let tag = FormTag::parse(&t.tag).expect("validated");
    let required: &[&str] = match tag {
        FormTag::A11 => &["lambda1", "lambda2", "eta1", "eta2", "eta3"],
        FormTag::A12 => &["lambda", "eta1", "eta2", "eta3", "eta4"],
        FormTag::A13 => &["lambda1", "eta1", "eta2", "eta3"],
        FormTag::A21 => &["lambda1", "lambda2", "eta"],
        FormTag::A22 => &["lambda1", "lambda2", "eta1", "eta2", "eta3"],
    };
    for key in t.params.keys() {
        if !required.contains(&key.as_str()) {
            bail!("template {} does not take parameter {:?}", t.tag, key);
        }
    }
    let get = |name: &str| -> Result<f64> {
        t.params
            .get(name)
            .copied()
            .ok_or_else(|| anyhow!("template {} needs parameter {:?}", t.tag, name))
    };
    Ok(match tag {
        FormTag::A11 => StandardForm::A11 {
            lambda1: get("lambda1")?,
            lambda2: get("lambda2")?,
            eta1: get("eta1")?,
            eta2: get("eta2")?,
            eta3: get("eta3")?,
        },
        FormTag::A12 => StandardForm::A12 {
            lambda: get("lambda")?,
            eta1: get("eta1")?,
            eta2: get("eta2")?,
            eta3: get("eta3")?,
            eta4: get("eta4")?,
        },
        FormTag::A13 => StandardForm::A13 {
            lambda1: get("lambda1")?,
            eta1: get("eta1")?,
            eta2: get("eta2")?,
            eta3: get("eta3")?,
        },
        FormTag::A21 => StandardForm::A21 {
            lambda1: get("lambda1")?,
            lambda2: get("lambda2")?,
            eta: get("eta")?,
        },
        FormTag::A22 => StandardForm::A22 {
            lambda1: get("lambda1")?,
            lambda2: get("lambda2")?,
            eta1: get("eta1")?,
            eta2: get("eta2")?,
            eta3: get("eta3")?,
        },
    })
}

/// Reduced-flow window, data, and integrator knobs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSection {
    /// Initial pair as [Re phi1, Im phi1, Re phi2, Im phi2].
    #[serde(default = "default_y0")]
    pub y0: [f64; 4],
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_t1")]
    pub t1: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub rtol: Option<f64>,
    #[serde(default)]
    pub atol: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

fn default_y0() -> [f64; 4] {
    [1.0, 0.0, 0.5, 0.0]
}
fn default_t1() -> f64 {
    100.0
}
fn default_samples() -> usize {
    201
}

impl Default for OdeSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

impl OdeSection {
    fn validate(&self) -> Result<()> {
        if !(self.t1 > self.t0) {
            bail!("ode.t1 must exceed ode.t0");
        }
        if self.samples < 2 {
            bail!("ode.samples must be at least 2");
        }
        if let Some(r) = self.rtol {
            if !(r > 0.0) {
                bail!("ode.rtol must be positive");
            }
        }
        if let Some(a) = self.atol {
            if !(a > 0.0) {
                bail!("ode.atol must be positive");
            }
        }
        Ok(())
    }

    pub fn initial_state(&self) -> FieldPair {
        FieldPair::new(
            C64::new(self.y0[0], self.y0[1]),
            C64::new(self.y0[2], self.y0[3]),
        )
    }

    pub fn options(&self) -> OdeOptions {
        let mut opts = OdeOptions::default();
        if let Some(r) = self.rtol {
            opts.rtol = r;
        }
        if let Some(a) = self.atol {
            opts.atol = a;
        }
        if let Some(m) = self.max_steps {
            opts.max_steps = m;
        }
        opts
    }
}

/// Dispersive-run knobs; anything omitted falls back to the library default
/// (the full-scale reference configuration).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSection {
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub ell: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_start: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default)]
    pub cone_fraction: Option<f64>,
    #[serde(default)]
    pub profile_tol: Option<f64>,
}

impl PdeSection {
    fn validate(&self) -> Result<()> {
        let cfg = self.asymptotics_config();
        if !(cfg.eps > 0.0 && cfg.eps <= 0.3) {
            bail!("pde.eps must lie in (0, 0.3], got {}", cfg.eps);
        }
        if !(cfg.dt > 0.0) {
            bail!("pde.dt must be positive");
        }
        if !(cfg.t_start > 0.0 && cfg.t_end > cfg.t_start) {
            bail!("pde needs 0 < t_start < t_end");
        }
        if cfg.samples < 2 {
            bail!("pde.samples must be at least 2");
        }
        Ok(())
    }

    pub fn asymptotics_config(&self) -> AsymptoticsConfig {
        let mut cfg = AsymptoticsConfig::default();
        if let Some(x) = self.eps {
            cfg.eps = x;
        }
        if let Some(x) = self.n {
            cfg.n = x;
        }
        if let Some(x) = self.ell {
            cfg.ell = x;
        }
        if let Some(x) = self.dt {
            cfg.dt = x;
        }
        if let Some(x) = self.t_start {
            cfg.t_start = x;
        }
        if let Some(x) = self.t_end {
            cfg.t_end = x;
        }
        if let Some(x) = self.samples {
            cfg.samples = x;
        }
        if let Some([lo, hi]) = self.fit_window {
            cfg.fit_window = (lo, hi);
        }
        if let Some(x) = self.cone_fraction {
            cfg.cone_fraction = x;
        }
        if let Some(x) = self.profile_tol {
            cfg.profile_tol = x;
        }
        cfg
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Default output directory; the --out flag wins.
    #[serde(default)]
    pub dir: Option<String>,
    /// Subset of ["json", "csv", "svg"]; JSON reports are always written.
    #[serde(default)]
    pub formats: Option<Vec<String>>,
}

impl OutputSection {
    fn validate(&self) -> Result<()> {
        if let Some(fs) = &self.formats {
            for f in fs {
                if !matches!(f.as_str(), "json" | "csv" | "svg") {
                    bail!("unknown output format {f:?}; expected json, csv, or svg");
                }
            }
        }
        Ok(())
    }

    pub fn wants(&self, format: &str) -> bool {
        format == "json"
            || self
                .formats
                .as_ref()
                .map_or(true, |fs| fs.iter().any(|f| f == format))
    }
}

/// Cartesian product sweep: every dotted path is substituted with each of its
/// listed values before the per-point config is re-validated.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Subcommand run at each point: analyze, normalize, ode-sim, or pde-sim.
    pub command: String,
    pub substitutions: BTreeMap<String, Vec<serde_json::Value>>,
}

impl SweepSection {
    fn validate(&self) -> Result<()> {
        if !matches!(
            self.command.as_str(),
            "analyze" | "normalize" | "ode-sim" | "pde-sim"
        ) {
            bail!(
                "sweep.command must be analyze, normalize, ode-sim, or pde-sim, got {:?}",
                self.command
            );
        }
        for (path, values) in &self.substitutions {
            if path.is_empty() || path == "sweep" || path.starts_with("sweep.") {
                bail!("sweep paths cannot be empty or target the sweep section itself");
            }
            if values.is_empty() {
                bail!("sweep path {path:?} has an empty value list");
            }
        }
        Ok(())
    }
}

/// Load the config file as both a raw value (kept for sweep substitution) and
/// the validated typed form.
pub fn load(path: &Path) -> Result<(serde_json::Value, ExperimentConfig)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let raw: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("config {} is not valid JSON", path.display()))?;
    let cfg = parse(raw.clone())?;
    Ok((raw, cfg))
}

pub fn parse(raw: serde_json::Value) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        serde_json::from_value(raw).context("config does not match the expected shape")?;
    cfg.validate()?;
    Ok(cfg)
}

/// Assign `value` at a dotted path of object keys, creating intermediate
/// objects as needed; rejects paths that traverse non-objects.
pub fn set_dotted(
    root: &mut serde_json::Value,
    path: &str,
    value: serde_json::Value,
) -> Result<()> {
    let mut cur = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| anyhow!("sweep path {path:?} traverses a non-object at {seg:?}"))?;
        if i + 1 == segments.len() {
            obj.insert((*seg).to_string(), value);
            return Ok(());
        }
        cur = obj
            .entry((*seg).to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!("split never yields zero segments");
}
