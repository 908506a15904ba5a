//! Density matrix ↔ Bloch coordinates, for one system (`"dims": [N]`) or a pair (`"dims": [N1, N2]`).

use std::path::Path;

use blochsig::bloch::{from_bloch, joint_from_bloch, joint_to_bloch, to_bloch};
use blochsig::{Bipartite, BlochState, DensityMatrix, JointBlochState, Qudit};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::{matrix, output};

fn input_err(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {msg}", path.display()))
}

pub fn run(input: &Path, out: Option<&Path>) -> CliResult<()> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| input_err(input, e))?;
    let dims: Vec<usize> = v
        .get("dims")
        .and_then(|d| serde_json::from_value(d.clone()).ok())
        .ok_or_else(|| input_err(input, "dims: expected [N] or [N1, N2]"))?;
    let result = match (dims.as_slice(), v.get_mut("rho").map(Value::take)) {
        (&[n], Some(rho)) => {
            let q = Qudit::new(n)?;
            let m = matrix::from_json(&rho).map_err(|e| input_err(input, format!("rho: {e}")))?;
            serde_json::to_value(to_bloch(&DensityMatrix::new(m)?, &q)?)
        }
        (&[n1, n2], Some(rho)) => {
            let sys = Bipartite::new(n1, n2)?;
            let m = matrix::from_json(&rho).map_err(|e| input_err(input, format!("rho: {e}")))?;
            serde_json::to_value(joint_to_bloch(&DensityMatrix::new(m)?, &sys)?)
        }
        (&[n], None) => {
            let q = Qudit::new(n)?;
            let s: BlochState = serde_json::from_value(v).map_err(|e| input_err(input, e))?;
            let rho = from_bloch(&s, &q)?;
            Ok(json!({"dims": [n], "rho": matrix::to_json(rho.matrix())}))
        }
        (&[n1, n2], None) => {
            let sys = Bipartite::new(n1, n2)?;
            let s: JointBlochState = serde_json::from_value(v).map_err(|e| input_err(input, e))?;
            let rho = joint_from_bloch(&s, &sys)?;
            Ok(json!({"dims": [n1, n2], "rho": matrix::to_json(rho.matrix())}))
        }
        _ => return Err(input_err(input, "dims: expected [N] or [N1, N2]")),
    }
    .map_err(|e| CliError::Io(e.to_string()))?;
    output::emit(&output::json(&result)?, out)
}
