//! JSON configuration documents.

use compaction_core::{BasinParams, RawParams, RunConfig, Warning};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::ConfigError;

/// Physical parameters as they appear in a document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamsDoc {
    pub lambda: f64,
    pub beta: f64,
    pub m: u32,
    pub phi0: f64,
    pub psi0: f64,
    pub a0: f64,
    pub zstar: f64,
    pub sdot: f64,
}

impl Default for ParamsDoc {
    fn default() -> Self {
        RawParams::default().into()
    }
}

impl From<RawParams> for ParamsDoc {
    fn from(r: RawParams) -> Self {
        Self {
            lambda: r.lambda,
            beta: r.beta,
            m: r.m,
            phi0: r.phi0,
            psi0: r.psi0,
            a0: r.a0,
            zstar: r.zstar,
            sdot: r.sdot,
        }
    }
}

impl From<ParamsDoc> for RawParams {
    fn from(d: ParamsDoc) -> Self {
        Self {
            lambda: d.lambda,
            beta: d.beta,
            m: d.m,
            phi0: d.phi0,
            psi0: d.psi0,
            a0: d.a0,
            zstar: d.zstar,
            sdot: d.sdot,
        }
    }
}

/// Numerical settings as they appear in a document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunDoc {
    pub n_nodes: usize,
    pub dt: f64,
    pub t_end: f64,
    pub h0: f64,
    pub output_every: f64,
    pub exp_clamp: f64,
    pub corrector_iters: usize,
    pub newton_tol: f64,
    pub newton_max: usize,
}

impl Default for RunDoc {
    fn default() -> Self {
        RunConfig::default().into()
    }
}

impl From<RunConfig> for RunDoc {
    fn from(c: RunConfig) -> Self {
        Self {
            n_nodes: c.n_nodes,
            dt: c.dt,
            t_end: c.t_end,
            h0: c.h0,
            output_every: c.output_every,
            exp_clamp: c.exp_clamp,
            corrector_iters: c.corrector_iters,
            newton_tol: c.newton_tol,
            newton_max: c.newton_max,
        }
    }
}

impl From<RunDoc> for RunConfig {
    fn from(d: RunDoc) -> Self {
        Self {
            n_nodes: d.n_nodes,
            dt: d.dt,
            t_end: d.t_end,
            h0: d.h0,
            output_every: d.output_every,
            exp_clamp: d.exp_clamp,
            corrector_iters: d.corrector_iters,
            newton_tol: d.newton_tol,
            newton_max: d.newton_max,
        }
    }
}

/// Complete flat document: every key has a default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigDoc {
    #[serde(flatten)]
    pub params: ParamsDoc,
    #[serde(flatten)]
    pub run: RunDoc,
}

/// Keys accepted at the top level of a document.
pub const KEYS: [&str; 17] = [
    "lambda",
    "beta",
    "m",
    "phi0",
    "psi0",
    "a0",
    "zstar",
    "sdot",
    "n_nodes",
    "dt",
    "t_end",
    "h0",
    "output_every",
    "exp_clamp",
    "corrector_iters",
    "newton_tol",
    "newton_max",
];

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub doc: ConfigDoc,
    pub params: BasinParams,
    pub config: RunConfig,
    pub warnings: Vec<Warning>,
}

/// Parses a JSON document. Blank text is the empty document.
pub fn parse_config(text: &str) -> Result<Resolved, ConfigError> {
    if text.trim().is_empty() {
        return resolve_object(&Map::new());
    }
    match serde_json::from_str(text).map_err(ConfigError::Syntax)? {
        Value::Object(map) => resolve_object(&map),
        _ => Err(ConfigError::NotAnObject),
    }
}

/// Applies defaults to `map` and validates the result.
pub fn resolve_object(map: &Map<String, Value>) -> Result<Resolved, ConfigError> {
    let unknown: Vec<String> = map
        .keys()
        .filter(|k| !KEYS.contains(&k.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown));
    }
    let value = Value::Object(map.clone());
    let doc = ConfigDoc {
        params: typed(&value)?,
        run: typed(&value)?,
    };
    resolve(doc)
}

// Each half ignores the other's keys; deserializing them apart keeps error paths intact.
fn typed<T: serde::de::DeserializeOwned>(value: &Value) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Type {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Validates an already typed document.
pub fn resolve(doc: ConfigDoc) -> Result<Resolved, ConfigError> {
    let params = BasinParams::derive(doc.params.into()).map_err(ConfigError::Invalid)?;
    let config: RunConfig = doc.run.into();
    let mut warnings = params.warnings();
    warnings.extend(config.validate(&params).map_err(ConfigError::Invalid)?);
    Ok(Resolved {
        doc,
        params,
        config,
        warnings,
    })
}

/// Parses `key=v1,v2,...` into a key and JSON values.
pub fn parse_axis(spec: &str) -> Result<(String, Vec<Value>), ConfigError> {
    let bad = || ConfigError::Axis(spec.to_string());
    let (key, values) = spec.split_once('=').ok_or_else(bad)?;
    let key = key.trim();
    if !KEYS.contains(&key) {
        return Err(ConfigError::UnknownKeys(vec![key.to_string()]));
    }
    let values = values
        .split(',')
        .map(|v| serde_json::from_str(v.trim()).map_err(|_| bad()))
        .collect::<Result<Vec<Value>, _>>()?;
    if values.is_empty() {
        return Err(bad());
    }
    Ok((key.to_string(), values))
}

/// Cartesian product of the axes applied on top of `base`, last axis fastest.
pub fn grid(
    base: &ConfigDoc,
    axes: &[(String, Vec<Value>)],
) -> Result<Vec<Map<String, Value>>, ConfigError> {
    let Value::Object(base) = serde_json::to_value(base).expect("documents serialize") else {
        unreachable!("documents serialize to objects")
    };
    let mut points = vec![base];
    for (key, values) in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(key.clone(), v.clone());
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

/// One-line description of a warning.
pub fn describe(w: &Warning) -> String {
    match w {
        Warning::WeakActivation { beta } => {
            format!("beta = {beta} gives a weakly activated reaction front")
        }
        Warning::UnderResolved { n_nodes, required } => {
            format!("n_nodes = {n_nodes} under-resolves the reaction layer (need {required})")
        }
        Warning::Overfilled { sum } => format!("phi0 + psi0 = {sum} leaves almost no solid"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        for text in ["", "{}", "  \n"] {
            let r = parse_config(text).unwrap();
            assert_eq!(r.doc, ConfigDoc::default());
            assert_eq!(r.params, BasinParams::derive(RawParams::default()).unwrap());
        }
    }

    #[test]
    fn partial_override() {
        let r = parse_config(r#"{"sdot": 2.0}"#).unwrap();
        let expected = ConfigDoc {
            params: ParamsDoc {
                sdot: 2.0,
                ..ParamsDoc::default()
            },
            ..ConfigDoc::default()
        };
        assert_eq!(r.doc, expected);
    }

    #[test]
    fn small_exponent_is_rejected() {
        let err = parse_config(r#"{"m": 5}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)), "{err}");
        assert!(err.to_string().contains('m'));
    }

    #[test]
    fn unknown_keys_are_listed() {
        let err = parse_config(r#"{"sdot": 1, "gamma": 2, "alpha": 3}"#).unwrap_err();
        let ConfigError::UnknownKeys(keys) = &err else {
            panic!("{err}")
        };
        assert_eq!(keys, &["alpha", "gamma"]);
        assert!(err.to_string().contains("alpha") && err.to_string().contains("gamma"));
    }

    #[test]
    fn type_errors_carry_the_key() {
        let err = parse_config(r#"{"beta": "large"}"#).unwrap_err();
        let ConfigError::Type { path, .. } = &err else {
            panic!("{err}")
        };
        assert_eq!(path, "beta");
        assert!(matches!(
            parse_config(r#"{"n_nodes": 1.5}"#),
            Err(ConfigError::Type { .. })
        ));
        assert!(matches!(parse_config("[1]"), Err(ConfigError::NotAnObject)));
        assert!(matches!(parse_config("{"), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn round_trip_through_json_is_exact() {
        let r = parse_config(r#"{"sdot": 0.1, "dt": 3e-3}"#).unwrap();
        let text = serde_json::to_string(&r.doc).unwrap();
        assert_eq!(parse_config(&text).unwrap().doc, r.doc);
    }

    #[test]
    fn axes_expand_cartesian() {
        let a = parse_axis("sdot=0.5,1,2").unwrap();
        let b = parse_axis("beta = 15, 21").unwrap();
        let pts = grid(&ConfigDoc::default(), &[a, b]).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1]["beta"], 21);
        assert_eq!(pts[2]["sdot"], 1);
        assert!(parse_axis("sdot").is_err());
        assert!(parse_axis("sdot=x").is_err());
        assert!(matches!(
            parse_axis("nope=1"),
            Err(ConfigError::UnknownKeys(_))
        ));
    }
}
