//! Complex matrices in JSON as nested rows of `[re, im]` pairs (a bare number is a real entry).

use blochsig::linalg::CMatrix;
use num_complex::Complex64;
use serde_json::Value;

pub fn to_json(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn entry(v: &Value) -> Result<Complex64, String> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(|x| Complex64::new(x, 0.0))
            .ok_or_else(|| "bad number".to_string()),
        Value::Array(pair) if pair.len() == 2 => match (pair[0].as_f64(), pair[1].as_f64()) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => Err("entries must be numbers or [re, im] pairs".into()),
        },
        _ => Err("entries must be numbers or [re, im] pairs".into()),
    }
}

pub fn from_json(v: &Value) -> Result<CMatrix, String> {
    let rows = v.as_array().ok_or("a matrix must be an array of rows")?;
    let n = rows.len();
    if n == 0 {
        return Err("a matrix must not be empty".into());
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or("a matrix must be an array of rows")?;
        if row.len() != n {
            return Err(format!(
                "row {i} has {} entries, expected {n} (matrices must be square)",
                row.len()
            ));
        }
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = entry(x).map_err(|e| format!("[{i}][{j}]: {e}"))?;
        }
    }
    Ok(m)
}
