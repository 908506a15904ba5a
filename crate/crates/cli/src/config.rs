//! The JSON run configuration shared by `evolve` and `audit`. The schema is
//! documented in `docs/config.md`.

use std::path::{Path, PathBuf};

use blochsig::bloch::joint_to_bloch;
use blochsig::random::stream_rng;
use blochsig::{
    AuditConfig, Bipartite, BlochHamiltonian, DensityMatrix, EvolutionLaw, IntegratorOptions, JointBlochState,
    ProjectiveObservable, Projector, Qudit, XiFunctions,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::matrix;

fn default_times() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dims: [usize; 2],
    #[serde(default)]
    pub hamiltonian: Option<Value>,
    #[serde(default)]
    pub law: LawSpec,
    #[serde(default)]
    pub state: Option<Value>,
    #[serde(default)]
    pub observables: ObservablesSpec,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub integrator: IntegratorOptions,
    #[serde(default)]
    pub audit: AuditConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum LawSpec {
    #[default]
    Linear,
    Xi {
        #[serde(default = "default_xi")]
        xi: String,
    },
    Polesink {
        epsilon: f64,
    },
}

fn default_xi() -> String {
    "one".into()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesSpec {
    #[serde(default)]
    pub remote: Option<[Value; 2]>,
    #[serde(default)]
    pub local: Option<Value>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// A labelled measurement, echoed in reports.
#[derive(Debug, Clone, Serialize)]
pub struct NamedObservable {
    pub label: String,
    pub outcomes: ProjectiveObservable,
}

/// A configuration turned into domain objects.
#[derive(Debug)]
pub struct Resolved {
    pub sys: Bipartite,
    pub hamiltonian: BlochHamiltonian,
    pub hamiltonian_label: String,
    pub law_spec: LawSpec,
    pub law: EvolutionLaw,
    pub state: JointBlochState,
    pub state_label: String,
    pub remote: [NamedObservable; 2],
    pub local: NamedObservable,
    pub times: Vec<f64>,
    pub integrator: IntegratorOptions,
    pub audit: AuditConfig,
    pub output: OutputSpec,
}

pub fn load(path: &Path) -> CliResult<Resolved> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let raw: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError::config(path, field, e.into_inner())
    })?;
    resolve(raw, path)
}

fn seed_of(text: &str, prefix: &str) -> Option<Result<u64, String>> {
    text.strip_prefix(prefix)
        .map(|s| s.parse::<u64>().map_err(|_| format!("{s:?} is not a valid seed")))
}

pub fn law_from_spec(spec: &LawSpec) -> Result<EvolutionLaw, String> {
    match spec {
        LawSpec::Linear => Ok(EvolutionLaw::Linear),
        LawSpec::Xi { xi } => XiFunctions::preset(xi).map(EvolutionLaw::Xi).map_err(|e| e.to_string()),
        LawSpec::Polesink { epsilon } if epsilon.is_finite() => Ok(EvolutionLaw::polesink(*epsilon)),
        LawSpec::Polesink { .. } => Err("epsilon must be finite".into()),
    }
}

fn hamiltonian(sys: &Bipartite, v: Option<&Value>, base: &Path) -> Result<(BlochHamiltonian, String), String> {
    let h = match v {
        None => return Ok((BlochHamiltonian::zero(sys), "zero".into())),
        Some(Value::String(s)) if s == "zero" => return Ok((BlochHamiltonian::zero(sys), s.clone())),
        Some(Value::String(s)) => {
            if let Some(seed) = seed_of(s, "random:") {
                BlochHamiltonian::random(sys, 1.0, &mut stream_rng(seed?, 0))
            } else if let Some(seed) = seed_of(s, "random-local:") {
                BlochHamiltonian::random(sys, 1.0, &mut stream_rng(seed?, 0)).local_part()
            } else {
                return Err(format!(
                    "unknown preset {s:?} (expected \"zero\", \"random:SEED\", \"random-local:SEED\", {{\"file\": PATH}} or inline coefficients)"
                ));
            }
        }
        Some(Value::Object(o)) if o.contains_key("file") => {
            if o.len() != 1 {
                return Err("a file reference takes no other fields".into());
            }
            let rel = o["file"].as_str().ok_or("file must be a string")?;
            let file = base.join(rel);
            let text = std::fs::read_to_string(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", file.display()))?
        }
        Some(other) => serde_json::from_value(other.clone()).map_err(|e| e.to_string())?,
    };
    if h.dims() != sys.dims() {
        return Err(format!(
            "coefficients describe dims {:?}, config has {:?}",
            h.dims(),
            sys.dims()
        ));
    }
    let label = match v {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Object(o)) if o.contains_key("file") => format!("file:{}", o["file"].as_str().unwrap_or("")),
        _ => "inline".into(),
    };
    Ok((h, label))
}

fn state(sys: &Bipartite, v: Option<&Value>) -> Result<(JointBlochState, String), String> {
    let preset = match v {
        None if sys.dims() == (2, 2) => "singlet".to_string(),
        None if sys.dims().0 == sys.dims().1 => "maximally-entangled".to_string(),
        None => "random:0".to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Object(o)) => {
            let mut o = o.clone();
            let (n1, n2) = sys.dims();
            let dims = o.entry("dims").or_insert_with(|| serde_json::json!([n1, n2])).clone();
            if dims != serde_json::json!([n1, n2]) {
                return Err(format!("dims {dims} disagree with the config dims [{n1}, {n2}]"));
            }
            let s = if let Some(rho) = o.get("rho") {
                if o.len() != 2 {
                    return Err("a density matrix takes only \"dims\" and \"rho\"".into());
                }
                let m = matrix::from_json(rho).map_err(|e| format!("rho: {e}"))?;
                let rho = DensityMatrix::new(m).map_err(|e| e.to_string())?;
                joint_to_bloch(&rho, sys).map_err(|e| e.to_string())?
            } else {
                serde_json::from_value::<JointBlochState>(Value::Object(o)).map_err(|e| e.to_string())?
            };
            blochsig::bloch::joint_from_bloch(&s, sys).map_err(|e| e.to_string())?;
            return Ok((s, "explicit".into()));
        }
        Some(_) => return Err("expected a preset name or an explicit state object".into()),
    };
    let s = match preset.as_str() {
        "singlet" => sys.singlet().map_err(|e| e.to_string())?,
        "maximally-entangled" => sys.maximally_entangled().map_err(|e| e.to_string())?,
        "product" => sys.ground_product().map_err(|e| e.to_string())?,
        other => match seed_of(other, "random:") {
            Some(seed) => sys.random_state(&mut stream_rng(seed?, 0)),
            None => {
                return Err(format!(
                    "unknown preset {other:?} (expected \"singlet\", \"product\", \"maximally-entangled\", \"random:SEED\" or an explicit state)"
                ))
            }
        },
    };
    Ok((s, preset))
}

pub fn observable(q: &Qudit, v: &Value) -> Result<NamedObservable, String> {
    let (outcomes, label) = match v {
        Value::String(s) => {
            let obs = match s.as_str() {
                "computational" => ProjectiveObservable::computational(q),
                "hadamard-like" => ProjectiveObservable::fourier(q),
                other => match seed_of(other, "random:") {
                    Some(seed) => ProjectiveObservable::random(q, &mut stream_rng(seed?, 0)),
                    None => {
                        return Err(format!(
                            "unknown preset {other:?} (expected \"computational\", \"hadamard-like\", \"random:SEED\", {{\"projectors\": [...]}} or a list of {{u0, u}} records)"
                        ))
                    }
                },
            };
            (obs, s.clone())
        }
        Value::Object(o) if o.len() == 1 && o.contains_key("projectors") => {
            let list = o["projectors"]
                .as_array()
                .ok_or("projectors must be a list of matrices")?;
            let mats = list
                .iter()
                .enumerate()
                .map(|(k, m)| matrix::from_json(m).map_err(|e| format!("projectors[{k}]: {e}")))
                .collect::<Result<Vec<_>, _>>()?;
            let obs = ProjectiveObservable::from_projector_matrices(&mats, q).map_err(|e| e.to_string())?;
            (obs, "explicit".into())
        }
        Value::Array(_) => {
            let records: Vec<Projector> = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
            let obs = ProjectiveObservable::new(records, q).map_err(|e| e.to_string())?;
            (obs, "explicit".into())
        }
        _ => return Err("expected a preset name, {\"projectors\": [...]} or a list of {u0, u} records".into()),
    };
    Ok(NamedObservable { label, outcomes })
}

fn resolve(raw: RunConfig, path: &Path) -> CliResult<Resolved> {
    let err = |field: &str, msg: String| CliError::config(path, field, msg);
    let [n1, n2] = raw.dims;
    let sys = Bipartite::new(n1, n2).map_err(|e| err("dims", e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let (hamiltonian, hamiltonian_label) =
        self::hamiltonian(&sys, raw.hamiltonian.as_ref(), base).map_err(|m| err("hamiltonian", m))?;
    let law = law_from_spec(&raw.law).map_err(|m| err("law", m))?;
    let (state, state_label) = self::state(&sys, raw.state.as_ref()).map_err(|m| err("state", m))?;
    let [a, b] = raw
        .observables
        .remote
        .unwrap_or_else(|| [Value::from("computational"), Value::from("hadamard-like")]);
    let remote = [
        observable(sys.second(), &a).map_err(|m| err("observables.remote[0]", m))?,
        observable(sys.second(), &b).map_err(|m| err("observables.remote[1]", m))?,
    ];
    let local_v = raw.observables.local.unwrap_or_else(|| Value::from("computational"));
    let local = observable(sys.first(), &local_v).map_err(|m| err("observables.local", m))?;
    if raw.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || raw.times.windows(2).any(|w| w[1] < w[0]) {
        return Err(err(
            "times",
            "sample times must be finite, ≥ 0 and nondecreasing".into(),
        ));
    }
    raw.integrator
        .validate()
        .map_err(|e| err("integrator", e.to_string()))?;
    raw.audit.validate().map_err(|e| err("audit", e.to_string()))?;
    Ok(Resolved {
        sys,
        hamiltonian,
        hamiltonian_label,
        law_spec: raw.law,
        law,
        state,
        state_label,
        remote,
        local,
        times: raw.times,
        integrator: raw.integrator,
        audit: raw.audit,
        output: raw.output,
    })
}
