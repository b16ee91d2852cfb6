//! Scenario documents.
//!
//! A scenario is a JSON document; every field is optional until the
//! document is resolved against the experiment kind. Command-line flags are
//! merged on top of the document with [`ScenarioDoc::merge`].

use std::fmt;
use std::path::PathBuf;

use inls_core::model::{classify_regime, Regime};
use inls_core::{ModelParams, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum Kind {
    #[serde(rename = "ground-state")]
    GroundState,
    #[serde(rename = "identities")]
    Identities,
    #[serde(rename = "d-omega-sweep")]
    DOmegaSweep,
    #[serde(rename = "classify")]
    Classify,
    #[serde(rename = "evolve")]
    Evolve,
    #[serde(rename = "stability")]
    Stability,
    #[serde(rename = "instability")]
    Instability,
    #[serde(rename = "mass-critical")]
    MassCritical,
    #[serde(rename = "normalized")]
    Normalized,
    #[serde(rename = "m-c-sweep")]
    MCSweep,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::GroundState => "ground-state",
            Kind::Identities => "identities",
            Kind::DOmegaSweep => "d-omega-sweep",
            Kind::Classify => "classify",
            Kind::Evolve => "evolve",
            Kind::Stability => "stability",
            Kind::Instability => "instability",
            Kind::MassCritical => "mass-critical",
            Kind::Normalized => "normalized",
            Kind::MCSweep => "m-c-sweep",
        }
    }

    /// Kinds that work at a fixed frequency and default it to 1.
    fn uses_omega(self) -> bool {
        !matches!(self, Kind::Normalized | Kind::MCSweep)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Datum {
    Gaussian,
    GroundState,
    Instability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Global,
    Blowup,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<u32>,
    /// A number, or a string such as `"5/2"` for an exact ratio.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

/// Kind-specific settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
    /// Fixed time step; adaptive stepping when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    /// Central-difference step in `λ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_ladder: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    /// Number of random fields for the identity checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fields: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub datum: Option<Datum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expect>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Settings {
    pub fn merge(&mut self, o: &Settings) {
        overlay!(self, o; t_final, sample_dt, dt, dt_max, epsilon, lambda, lambdas, delta, omegas, c,
            c_ladder, seeds, fields, input, datum, amplitude, expect);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    pub params: ParamsDoc,
    pub grid: GridDoc,
    pub settings: Settings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ScenarioDoc {
    /// Fields set in `o` replace those in `self`.
    pub fn merge(&mut self, o: &ScenarioDoc) {
        overlay!(self, o; name, kind, seed, out);
        overlay!(self.params, o.params; dim, b, p, omega);
        overlay!(self.grid, o.grid; radius, nodes);
        self.settings.merge(&o.settings);
    }

    /// Fills defaults and checks the settings against the regime.
    pub fn resolve(&self) -> LabResult<Scenario> {
        let kind = self.kind.ok_or_else(|| LabError::Invalid("scenario has no kind".into()))?;
        let name = self.name.clone().unwrap_or_else(|| kind.name().to_string());
        check_name(&name)?;
        let dim = self.params.dim.ok_or_else(|| LabError::Invalid("missing dimension N".into()))?;
        let b = scalar(self.params.b.as_ref(), "b")?;
        let p = scalar(self.params.p.as_ref(), "p")?;
        let mut params = ModelParams::new(dim, b, p);
        if kind.uses_omega() {
            params = params.with_omega(self.params.omega.unwrap_or(1.0));
        }
        let grid = match (self.grid.radius, self.grid.nodes) {
            (None, None) => None,
            (Some(radius), Some(nodes)) => Some(GridSpec { radius, nodes }),
            _ => return Err(LabError::Invalid("grid needs both R and M".into())),
        };
        let s = Scenario {
            name,
            kind,
            params,
            grid,
            settings: self.settings.clone(),
            seed: self.seed,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("inls-out")),
        };
        s.validate()?;
        Ok(s)
    }
}

fn check_name(name: &str) -> LabResult<()> {
    let ok = !name.is_empty()
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(LabError::Invalid(format!("scenario name {name:?} must be non-empty [A-Za-z0-9._-]")))
    }
}

/// Integers become exact ratios, other numbers reals, and strings are parsed
/// as `"a/b"` or decimals.
fn scalar(v: Option<&Value>, what: &str) -> LabResult<Scalar> {
    let v = v.ok_or_else(|| LabError::Invalid(format!("missing parameter {what}")))?;
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Scalar::ratio(i, 1)),
            None => n.as_f64().map(Scalar::Real).ok_or_else(|| LabError::Invalid(format!("bad {what}"))),
        },
        Value::String(s) => Ok(s.parse::<Scalar>()?),
        _ => Err(LabError::Invalid(format!("parameter {what} must be a number or a string"))),
    }
}

/// JSON form of a scalar that [`scalar`] maps back to the same value.
pub fn scalar_json(s: Scalar) -> Value {
    match s {
        Scalar::Real(x) => serde_json::json!(x),
        Scalar::Ratio { num, den: 1 } => serde_json::json!(num),
        Scalar::Ratio { num, den } => Value::String(format!("{num}/{den}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radius: f64,
    pub nodes: usize,
}

/// A resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    pub params: ModelParams,
    pub grid: Option<GridSpec>,
    pub settings: Settings,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

fn positive(x: Option<f64>, what: &str) -> LabResult<()> {
    match x {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(LabError::Invalid(format!("{what} = {v} must be positive"))),
        _ => Ok(()),
    }
}

fn need_regime(params: &ModelParams, want: Regime, kind: Kind) -> LabResult<()> {
    let got = classify_regime(params);
    if got == want {
        Ok(())
    } else {
        Err(inls_core::Error::Regime(format!("{kind} needs the {want} regime, got {got}")).into())
    }
}

impl Scenario {
    fn validate(&self) -> LabResult<()> {
        self.params.validate()?;
        self.params.require_admissible()?;
        if let Some(w) = self.params.omega {
            if !(w > 0.0) {
                return Err(inls_core::Error::Nonexistence { omega: w }.into());
            }
        }
        if let Some(g) = self.grid {
            inls_core::grid::make_grid(self.params.dim, g.radius, g.nodes)?;
        }
        let st = &self.settings;
        positive(st.t_final, "T")?;
        positive(st.sample_dt, "sample_dt")?;
        positive(st.dt, "dt")?;
        positive(st.dt_max, "dt_max")?;
        positive(st.delta, "delta")?;
        positive(st.c, "c")?;
        positive(st.amplitude, "amplitude")?;
        if let Some(e) = st.epsilon {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(LabError::Invalid(format!("epsilon = {e} must be >= 0")));
            }
        }
        for w in st.omegas.iter().flatten() {
            positive(Some(*w), "omega")?;
        }
        for c in st.c_ladder.iter().flatten() {
            positive(Some(*c), "c")?;
        }
        if st.fields == Some(0) {
            return Err(LabError::Invalid("fields must be at least 1".into()));
        }
        match self.kind {
            Kind::Stability | Kind::Normalized | Kind::MCSweep => {
                need_regime(&self.params, Regime::MassSubcritical, self.kind)?
            }
            Kind::MassCritical => {
                need_regime(&self.params, Regime::MassCritical, self.kind)?;
                if let Some(l) = st.lambdas.iter().flatten().find(|l| !(**l >= 1.0 && l.is_finite())) {
                    return Err(LabError::Invalid(format!("lambda_n = {l} must be >= 1")));
                }
            }
            Kind::Classify if st.input.is_none() => {
                return Err(LabError::Invalid("classify needs --input".into()));
            }
            Kind::Evolve if st.input.is_some() && st.datum.is_some() => {
                return Err(LabError::Invalid("give either an input file or a datum, not both".into()));
            }
            _ => {}
        }
        if let Some(l) = st.lambda {
            if !l.is_finite() {
                return Err(LabError::Invalid(format!("lambda = {l} must be finite")));
            }
        }
        Ok(())
    }

    /// The document that resolves back to this scenario.
    pub fn to_doc(&self) -> ScenarioDoc {
        ScenarioDoc {
            name: Some(self.name.clone()),
            kind: Some(self.kind),
            params: ParamsDoc {
                dim: Some(self.params.dim),
                b: Some(scalar_json(self.params.b)),
                p: Some(scalar_json(self.params.p)),
                omega: self.params.omega,
            },
            grid: GridDoc { radius: self.grid.map(|g| g.radius), nodes: self.grid.map(|g| g.nodes) },
            settings: self.settings.clone(),
            seed: self.seed,
            out: Some(self.out.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn doc(v: Value) -> ScenarioDoc {
        serde_json::from_value(v).unwrap()
    }

    #[test]
    fn flags_override_document() {
        let mut d = doc(json!({"kind": "evolve", "params": {"dim": 3, "b": 1, "p": 2.5, "omega": 2.0},
            "settings": {"t_final": 3.0, "sample_dt": 0.1}}));
        let mut flags = ScenarioDoc::default();
        flags.params.omega = Some(0.5);
        flags.settings.t_final = Some(1.0);
        d.merge(&flags);
        let s = d.resolve().unwrap();
        assert_eq!(s.params.omega, Some(0.5));
        assert_eq!(s.settings.t_final, Some(1.0));
        assert_eq!(s.settings.sample_dt, Some(0.1));
        assert_eq!(s.name, "evolve");
    }

    #[test]
    fn integer_exponent_is_exact() {
        let s = doc(json!({"kind": "mass-critical", "params": {"dim": 3, "b": 1, "p": 3}})).resolve().unwrap();
        assert_eq!(s.params.p, Scalar::ratio(3, 1));
        let s = doc(json!({"kind": "mass-critical", "params": {"dim": 3, "b": "1", "p": "6/2"}})).resolve().unwrap();
        assert!(s.params.is_mass_critical());
    }

    #[test]
    fn doc_round_trip() {
        let s = doc(json!({"name": "x1", "kind": "stability", "params": {"dim": 3, "b": 1, "p": "5/2"},
            "grid": {"radius": 16.0, "nodes": 1024}, "settings": {"seeds": [3, 4], "epsilon": 0.01}, "seed": 9}))
        .resolve()
        .unwrap();
        let text = serde_json::to_string(&s.to_doc()).unwrap();
        let back: ScenarioDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.resolve().unwrap(), s);
    }

    #[test]
    fn regime_checked_before_compute() {
        let e = doc(json!({"kind": "stability", "params": {"dim": 3, "b": 1, "p": 4}})).resolve().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = doc(json!({"kind": "mass-critical", "params": {"dim": 3, "b": 1, "p": 2.5}})).resolve().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = doc(json!({"kind": "normalized", "params": {"dim": 3, "b": 1, "p": 3}})).resolve().unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn bad_documents_rejected() {
        for v in [
            json!({"params": {"dim": 3, "b": 1, "p": 2.5}}),
            json!({"kind": "evolve", "params": {"b": 1, "p": 2.5}}),
            json!({"kind": "evolve", "params": {"dim": 3, "b": 1, "p": 2.5, "omega": -1.0}}),
            json!({"kind": "evolve", "params": {"dim": 3, "b": 1, "p": 2.5}, "grid": {"radius": 10.0}}),
            json!({"kind": "evolve", "params": {"dim": 3, "b": 1, "p": 2.5}, "name": "../x"}),
            json!({"kind": "classify", "params": {"dim": 3, "b": 1, "p": 2.5}}),
            json!({"kind": "evolve", "params": {"dim": 3, "b": 1, "p": 2.5}, "settings": {"t_final": -1.0}}),
        ] {
            assert_eq!(doc(v.clone()).resolve().unwrap_err().exit_code(), 2, "{v}");
        }
        assert!(serde_json::from_value::<ScenarioDoc>(json!({"kind": "evolve", "bogus": 1})).is_err());
    }
}
