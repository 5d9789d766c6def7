//! Scenario files: TOML schema, validation, and the built-in presets.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use openq_core::{
    build_counterexample_model, build_dephasing_model, build_jsquared_model, Grid, Mode, Model,
    ModelParams, State, Vector,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSection,
    pub initial: InitialSection,
    pub grid: GridSection,
    pub analyses: AnalysesSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_j: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<ModeSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub omega: f64,
    pub g_re: f64,
    #[serde(default)]
    pub g_im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// "maximally-coherent" or explicit amplitudes via c_re/c_im.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_re: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_im: Option<Vec<f64>>,
    /// "vacuum" | "maximally-mixed", or explicit diagonal weights.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub environment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_diag: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub t0: f64,
    pub dt: f64,
    pub tmax: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysesSection {
    pub run: Vec<String>,
}

pub const ANALYSIS_ORDER: [&str; 6] = [
    "markov",
    "divisibility",
    "nz",
    "coherence",
    "zassenhaus",
    "envelope",
];

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).context("scenario parse failed")?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self.model.kind.as_str() {
            "dephasing" | "jsquared" | "counterexample" => {}
            other => bail!("unknown model kind '{other}'"),
        }
        if self.grid.dt <= 0.0 {
            bail!("grid.dt must be positive");
        }
        if self.grid.tmax <= self.grid.t0 {
            bail!("grid.tmax must exceed grid.t0");
        }
        if self.analyses.run.is_empty() {
            bail!("at least one analysis must be selected");
        }
        for a in &self.analyses.run {
            if !ANALYSIS_ORDER.contains(&a.as_str()) {
                bail!(
                    "unknown analysis '{a}' (expected one of {})",
                    ANALYSIS_ORDER.join(", ")
                );
            }
        }
        if let Some(sys) = &self.initial.system {
            if sys != "maximally-coherent" {
                bail!("unknown system preset '{sys}'");
            }
            if self.initial.c_re.is_some() || self.initial.c_im.is_some() {
                bail!("give either a system preset or explicit amplitudes, not both");
            }
        }
        if let Some(env) = &self.initial.environment {
            if env != "vacuum" && env != "maximally-mixed" {
                bail!("unknown environment preset '{env}'");
            }
            if self.initial.d_diag.is_some() {
                bail!("give either an environment preset or explicit weights, not both");
            }
        }
        // amplitude normalization is checked against concrete dimensions in build()
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let mut p = match m.kind.as_str() {
            "dephasing" => ModelParams::dephasing_default(),
            "jsquared" => ModelParams::jsquared_default(),
            "counterexample" => ModelParams {
                two_j: 1,
                omega: 1.0,
                modes: Vec::new(),
                beta: 1.0,
                eta: m.strength.unwrap_or(0.4),
                n_max: 1,
            },
            other => bail!("unknown model kind '{other}'"),
        };
        if let Some(v) = m.two_j {
            p.two_j = v;
        }
        if let Some(v) = m.omega {
            p.omega = v;
        }
        if let Some(v) = m.beta {
            p.beta = v;
        }
        if let Some(v) = m.eta {
            p.eta = v;
        }
        if let Some(v) = m.n_max {
            p.n_max = v;
        }
        if !m.modes.is_empty() {
            p.modes = m
                .modes
                .iter()
                .map(|mode| Mode {
                    omega: mode.omega,
                    g: Complex::new(mode.g_re, mode.g_im),
                })
                .collect();
        }
        Ok(p)
    }

    pub fn build_model(&self) -> Result<Model> {
        let p = self.params()?;
        let model = match self.model.kind.as_str() {
            "dephasing" => build_dephasing_model(&p)?,
            "jsquared" => build_jsquared_model(&p)?,
            "counterexample" => build_counterexample_model(self.model.strength.unwrap_or(0.4))?,
            other => bail!("unknown model kind '{other}'"),
        };
        Ok(model)
    }

    pub fn build_state(&self, model: &Model) -> Result<State> {
        let n = model.spec.dim_s;
        let ne = model.spec.dim_e;
        let c: Vector = match (&self.initial.c_re, &self.initial.c_im) {
            (None, None) => {
                Vector::from_element(n, Complex::new(1.0 / (n as f64).sqrt(), 0.0))
            }
            (re, im) => {
                let re = re.clone().unwrap_or_default();
                let im = im.clone().unwrap_or_else(|| vec![0.0; re.len()]);
                if re.len() != n || im.len() != n {
                    bail!("amplitudes must have length {n}");
                }
                let v = Vector::from_vec(
                    re.iter()
                        .zip(im.iter())
                        .map(|(&r, &i)| Complex::new(r, i))
                        .collect(),
                );
                let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                if (norm2 - 1.0).abs() > 1e-9 {
                    bail!("amplitudes not normalized (sum |c|^2 = {norm2})");
                }
                v
            }
        };
        let d = match (&self.initial.environment, &self.initial.d_diag) {
            (Some(p), None) if p == "vacuum" => State::vacuum_env(ne),
            (Some(p), None) if p == "maximally-mixed" => State::maximally_mixed_env(ne),
            (None, Some(w)) => {
                if w.len() != ne {
                    bail!("environment weights must have length {ne}");
                }
                let total: f64 = w.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    bail!("environment weights not normalized (sum = {total})");
                }
                let mut d = openq_core::Matrix::zeros(ne, ne);
                for (k, &v) in w.iter().enumerate() {
                    if v < 0.0 {
                        bail!("environment weights must be non-negative");
                    }
                    d[(k, k)] = Complex::new(v, 0.0);
                }
                d
            }
            (None, None) => State::vacuum_env(ne),
            _ => bail!("conflicting environment specification"),
        };
        State::new(c, d).map_err(|e| anyhow!("initial state invalid: {e}"))
    }

    pub fn build_grid(&self) -> Result<Grid> {
        let steps = ((self.grid.tmax - self.grid.t0) / self.grid.dt).round() as usize;
        if steps == 0 {
            bail!("grid resolves to zero steps");
        }
        Grid::new(self.grid.t0, self.grid.dt, steps).map_err(|e| anyhow!("grid invalid: {e}"))
    }

    /// Selected analyses in the fixed execution order.
    pub fn ordered_analyses(&self) -> Vec<&'static str> {
        ANALYSIS_ORDER
            .iter()
            .copied()
            .filter(|a| self.analyses.run.iter().any(|r| r == a))
            .collect()
    }
}

/// Built-in scenarios reproducing the reference models with default settings.
pub fn preset(name: &str) -> Result<Scenario> {
    let text = match name {
        "dephasing" => {
            r#"
[model]
kind = "dephasing"

[initial]
system = "maximally-coherent"
environment = "vacuum"

[grid]
t0 = 0.0
dt = 0.02
tmax = 20.0

[analyses]
run = ["markov", "divisibility", "coherence"]
"#
        }
        "jsquared" => {
            r#"
[model]
kind = "jsquared"

[initial]
system = "maximally-coherent"
environment = "vacuum"

[grid]
t0 = 0.0
dt = 0.02
tmax = 20.0

[analyses]
run = ["markov", "divisibility", "coherence", "zassenhaus", "envelope"]
"#
        }
        "counterexample" => {
            r#"
[model]
kind = "counterexample"
strength = 0.4

[initial]
system = "maximally-coherent"
environment = "maximally-mixed"

[grid]
t0 = 0.0
dt = 0.02
tmax = 2.0

[analyses]
run = ["markov", "divisibility", "nz", "coherence", "zassenhaus"]
"#
        }
        other => bail!("unknown preset '{other}' (dephasing, jsquared, counterexample)"),
    };
    Scenario::parse(text)
}
