//! Run configuration: the JSON document read by every command and its
//! conversion into a [`Problem`].

use std::fs;
use std::path::{Path, PathBuf};

use multilayer_fv::problem::{InterfaceParams, InterfaceSpec, InterfaceType, ProblemBuilder};
use multilayer_fv::{BoundarySpec, Layer, Problem, ProblemError, Scheme};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    SchemaVersion(u32),
    #[error("layer {layer} initial condition: {source}")]
    Initial { layer: usize, source: ExprError },
    #[error("interface {interface}: {message}")]
    Interface { interface: usize, message: String },
    #[error("layer {layer} conductivity {given} contradicts the value {implied} implied by its interfaces")]
    Conductivity { layer: usize, given: f64, implied: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("config is missing `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub left: f64,
    pub right: f64,
    pub diffusivity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conductivity: Option<f64>,
    /// Expression in `x`; zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub left: BoundarySpec,
    pub right: BoundarySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterfaceKind {
    I,
    II,
    III,
    IV,
    #[serde(rename = "GI")]
    Gi,
    #[serde(rename = "GII")]
    Gii,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceConfig {
    pub kind: InterfaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_left: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_right: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauKeyword {
    Auto,
}

/// Time step: a number or `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSetting {
    Fixed(f64),
    Keyword(TauKeyword),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_eval: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schemes: Option<Vec<Scheme>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub layers: Vec<LayerConfig>,
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub interfaces: Vec<InterfaceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<TauSetting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = serde_json::from_str(text)?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion(config.schema_version));
        }
        Ok(config)
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn problem(&self) -> Result<Problem, ConfigError> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            let mut layer = Layer::new(l.left, l.right, l.diffusivity);
            if let Some(g) = l.conductivity {
                layer = layer.with_conductivity(g);
            }
            if let Some(text) = &l.initial {
                let e = Expr::parse(text).map_err(|source| ConfigError::Initial { layer: i, source })?;
                layer = layer.with_initial(move |x| e.eval(x));
            }
            layers.push(layer);
        }

        let mut builder = ProblemBuilder::new(layers, self.boundary.left, self.boundary.right);
        for (i, ic) in self.interfaces.iter().enumerate() {
            builder = ic.apply(builder, i)?;
        }
        let problem = builder.build()?;

        for (i, l) in self.layers.iter().enumerate() {
            if let Some(given) = l.conductivity {
                let implied = problem.layer(i).conductivity;
                if (given - implied).abs() > 1e-12 * given.abs().max(implied.abs()) {
                    return Err(ConfigError::Conductivity { layer: i, given, implied });
                }
            }
        }
        Ok(problem)
    }

    /// Equivalent config with every interface in general form and every
    /// conductivity explicit. Canonicalising twice changes nothing.
    pub fn canonical(&self) -> Result<RunConfig, ConfigError> {
        let problem = self.problem()?;
        let layers = self
            .layers
            .iter()
            .zip(problem.layers())
            .map(|(lc, l)| LayerConfig {
                conductivity: Some(l.conductivity),
                initial: lc.initial.clone(),
                ..lc.clone()
            })
            .collect();
        let interfaces = problem
            .interfaces()
            .iter()
            .enumerate()
            .map(|(i, spec)| InterfaceConfig {
                kind: if spec.is_gi() { InterfaceKind::Gi } else { InterfaceKind::Gii },
                transfer: spec.transfer(),
                theta: Some(spec.theta()),
                gamma_left: Some(problem.layer(i).conductivity),
                gamma_right: Some(problem.layer(i + 1).conductivity),
            })
            .collect();
        Ok(RunConfig {
            layers,
            interfaces,
            ..self.clone()
        })
    }
}

impl InterfaceConfig {
    fn apply(&self, builder: ProblemBuilder, i: usize) -> Result<ProblemBuilder, ConfigError> {
        let params = InterfaceParams {
            transfer: self.transfer,
            theta: self.theta,
            gamma_left: self.gamma_left,
            gamma_right: self.gamma_right,
        };
        let gammas = (self.gamma_left, self.gamma_right);
        let theta = self.theta.unwrap_or(1.0);
        match self.kind {
            InterfaceKind::I => Ok(builder.classical(InterfaceType::I, params)),
            InterfaceKind::II => Ok(builder.classical(InterfaceType::II, params)),
            InterfaceKind::III => Ok(builder.classical(InterfaceType::III, params)),
            InterfaceKind::IV => Ok(builder.classical(InterfaceType::IV, params)),
            InterfaceKind::Gi => {
                if self.transfer.is_some() {
                    return Err(ConfigError::Interface {
                        interface: i,
                        message: "GI interface does not take parameter `transfer`".into(),
                    });
                }
                Ok(builder.general(InterfaceSpec::Gi { theta }, gammas))
            }
            InterfaceKind::Gii => {
                let transfer = self.transfer.ok_or_else(|| ConfigError::Interface {
                    interface: i,
                    message: "GII interface requires parameter `transfer`".into(),
                })?;
                Ok(builder.general(InterfaceSpec::Gii { theta, transfer }, gammas))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE_B: &str = r#"{
        "schema_version": 1,
        "layers": [
            {"left": 0, "right": 0.5, "diffusivity": 1},
            {"left": 0.5, "right": 1, "diffusivity": 0.1, "initial": "x^2"}
        ],
        "boundary": {"left": {"a": 1, "b": 0, "c": 1}, "right": {"a": 0, "b": 1, "c": 0}},
        "interfaces": [{"kind": "II", "transfer": 0.5}],
        "n": 20,
        "scheme": "forward_euler",
        "tau": "auto",
        "t_end": 0.1
    }"#;

    fn same_problem(a: &Problem, b: &Problem) {
        assert_eq!(a.num_layers(), b.num_layers());
        for (x, y) in a.layers().iter().zip(b.layers()) {
            assert_eq!((x.left, x.right, x.diffusivity, x.conductivity), (y.left, y.right, y.diffusivity, y.conductivity));
            for k in 0..=10 {
                let s = x.left + k as f64 * x.width() / 10.0;
                assert_eq!(x.initial_at(s), y.initial_at(s));
            }
        }
        assert_eq!(a.bc_left(), b.bc_left());
        assert_eq!(a.bc_right(), b.bc_right());
        assert_eq!(a.interfaces(), b.interfaces());
    }

    #[test]
    fn parses_and_builds() {
        let c = RunConfig::from_json(CASE_B).unwrap();
        assert_eq!(c.tau, Some(TauSetting::Keyword(TauKeyword::Auto)));
        assert_eq!(c.scheme, Some(Scheme::ForwardEuler));
        let p = c.problem().unwrap();
        assert_eq!(p.interfaces(), &[InterfaceSpec::Gii { theta: 1.0, transfer: 0.5 }]);
        assert_eq!(p.layer(1).initial_at(0.75), 0.5625);
    }

    #[test]
    fn canonical_round_trip() {
        let c = RunConfig::from_json(CASE_B).unwrap();
        let canon = c.canonical().unwrap();
        assert_eq!(canon.interfaces[0].kind, InterfaceKind::Gii);
        assert_eq!(canon.interfaces[0].gamma_right, Some(0.1));
        same_problem(&c.problem().unwrap(), &canon.problem().unwrap());

        let reparsed = RunConfig::from_json(&canon.to_json()).unwrap();
        assert_eq!(reparsed, canon);
        assert_eq!(reparsed.canonical().unwrap(), canon);
    }

    #[test]
    fn numeric_tau() {
        let text = CASE_B.replace("\"auto\"", "2.5e-4");
        let c = RunConfig::from_json(&text).unwrap();
        assert_eq!(c.tau, Some(TauSetting::Fixed(2.5e-4)));
        assert!(RunConfig::from_json(&CASE_B.replace("\"auto\"", "\"fast\"")).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        let zero = r#"{"schema_version": 1, "layers": [],
            "boundary": {"left": {"a": 1, "b": 0, "c": 1}, "right": {"a": 1, "b": 0, "c": 0}}}"#;
        let err = RunConfig::from_json(zero).unwrap().problem().unwrap_err();
        assert!(err.to_string().contains("no layers"), "{err}");

        assert!(matches!(
            RunConfig::from_json(&CASE_B.replace("\"schema_version\": 1", "\"schema_version\": 7")),
            Err(ConfigError::SchemaVersion(7))
        ));
        assert!(RunConfig::from_json(&CASE_B.replace("\"n\"", "\"mesh\"")).is_err());

        let missing = CASE_B.replace(", \"transfer\": 0.5", "");
        assert!(RunConfig::from_json(&missing).unwrap().problem().is_err());

        let bad_expr = CASE_B.replace("x^2", "sin(x)");
        assert!(matches!(
            RunConfig::from_json(&bad_expr).unwrap().problem(),
            Err(ConfigError::Initial { layer: 1, .. })
        ));
    }

    #[test]
    fn explicit_conductivity_must_agree() {
        let text = CASE_B.replace("\"diffusivity\": 0.1,", "\"diffusivity\": 0.1, \"conductivity\": 3,");
        let err = RunConfig::from_json(&text).unwrap().problem().unwrap_err();
        assert!(matches!(err, ConfigError::Conductivity { layer: 1, .. }), "{err}");
    }

    #[test]
    fn general_forms() {
        let text = CASE_B.replace(
            r#"{"kind": "II", "transfer": 0.5}"#,
            r#"{"kind": "GI", "theta": 1.2, "gamma_left": 2, "gamma_right": 3}"#,
        );
        let p = RunConfig::from_json(&text).unwrap().problem().unwrap();
        assert_eq!(p.interfaces(), &[InterfaceSpec::Gi { theta: 1.2 }]);
        assert_eq!((p.layer(0).conductivity, p.layer(1).conductivity), (2.0, 3.0));

        let gi_default = CASE_B.replace(r#"{"kind": "II", "transfer": 0.5}"#, r#"{"kind": "GI"}"#);
        let p = RunConfig::from_json(&gi_default).unwrap().problem().unwrap();
        assert_eq!(p.interfaces(), &[InterfaceSpec::Gi { theta: 1.0 }]);
        assert_eq!(p.layer(1).conductivity, 0.1);

        let gi_transfer = CASE_B.replace(r#""kind": "II""#, r#""kind": "GI""#);
        assert!(RunConfig::from_json(&gi_transfer).unwrap().problem().is_err());
    }
}
