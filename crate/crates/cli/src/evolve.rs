use std::path::Path;

use blochsig::dynamics::{trajectory, Evolved};
use blochsig::oracle::unitary_evolution;
use blochsig::{IntegratorOptions, JointBlochState};
use serde::Serialize;

use crate::config::{self, Format, LawSpec};
use crate::error::CliResult;
use crate::output;

#[derive(Serialize)]
struct OracleCheck {
    /// Largest coordinate deviation from `e^{−iHt} ρ₀ e^{iHt}` over all samples.
    max_deviation: f64,
    deviations: Vec<f64>,
}

#[derive(Serialize)]
struct EvolveOutput<'a> {
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
    dims: (usize, usize),
    law: &'a LawSpec,
    hamiltonian: &'a str,
    state: &'a str,
    initial: &'a JointBlochState,
    integrator: &'a IntegratorOptions,
    samples: Vec<Evolved>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleCheck>,
}

fn csv(samples: &[Evolved], oracle: Option<&OracleCheck>) -> String {
    let Some(first) = samples.first() else {
        return String::new();
    };
    let (d1, d2) = (first.state.r1.len(), first.state.r2.len());
    let mut header = vec!["time".to_string(), "physical".into(), "min_eigenvalue".into()];
    header.extend((0..d1).map(|i| format!("r1_{i}")));
    header.extend((0..d2).map(|j| format!("r2_{j}")));
    header.extend((0..d1).flat_map(|i| (0..d2).map(move |j| format!("r12_{i}_{j}"))));
    if oracle.is_some() {
        header.push("oracle_deviation".into());
    }
    let mut out = header.join(",") + "\n";
    for (n, s) in samples.iter().enumerate() {
        let mut row = vec![
            output::csv_float(s.time),
            s.physical.to_string(),
            output::csv_float(s.min_eigenvalue),
        ];
        row.extend(s.state.to_flat().into_iter().map(output::csv_float));
        if let Some(o) = oracle {
            row.push(output::csv_float(o.deviations[n]));
        }
        out += &(row.join(",") + "\n");
    }
    out
}

pub fn run(
    config_path: &Path,
    out: Option<&Path>,
    format: Option<Format>,
    check_oracle: bool,
    no_timestamp: bool,
) -> CliResult<()> {
    let cfg = config::load(config_path)?;
    let samples = trajectory(
        &cfg.sys,
        &cfg.law,
        &cfg.hamiltonian,
        &cfg.state,
        &cfg.times,
        &cfg.integrator,
    )?;
    let oracle = check_oracle.then(|| {
        let deviations: Vec<f64> = samples
            .iter()
            .map(|s| {
                s.state
                    .max_abs_diff(&unitary_evolution(&cfg.sys, &cfg.hamiltonian, &cfg.state, s.time))
            })
            .collect();
        OracleCheck {
            max_deviation: deviations.iter().copied().fold(0.0, f64::max),
            deviations,
        }
    });
    if let Some(o) = &oracle {
        eprintln!("oracle max deviation: {:.3e}", o.max_deviation);
    }
    let text = match format.or(cfg.output.format).unwrap_or_default() {
        Format::Csv => csv(&samples, oracle.as_ref()),
        Format::Json => output::json(&EvolveOutput {
            version: blochsig::VERSION,
            timestamp: output::timestamp(no_timestamp),
            dims: cfg.sys.dims(),
            law: &cfg.law_spec,
            hamiltonian: &cfg.hamiltonian_label,
            state: &cfg.state_label,
            initial: &cfg.state,
            integrator: &cfg.integrator,
            samples,
            oracle,
        })?,
    };
    output::emit(&text, out.or(cfg.output.path.as_deref()))
}
