use std::path::Path;

use blochsig::Qudit;
use serde::Serialize;

use crate::error::CliResult;
use crate::{matrix, output};

#[derive(Serialize)]
struct BasisOutput {
    version: &'static str,
    dim: usize,
    generators: Vec<Vec<Vec<[f64; 2]>>>,
    /// `f[i][j][k]`
    f: Vec<Vec<Vec<f64>>>,
    /// `g[i][j][k]`
    g: Vec<Vec<Vec<f64>>>,
}

pub fn run(dim: usize, out: Option<&Path>) -> CliResult<()> {
    let q = Qudit::new(dim)?;
    let report = BasisOutput {
        version: blochsig::VERSION,
        dim,
        generators: q.basis().generators().iter().map(matrix::to_json).collect(),
        f: q.constants().f_nested(),
        g: q.constants().g_nested(),
    };
    output::emit(&output::json(&report)?, out)
}
