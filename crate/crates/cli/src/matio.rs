//! CSV readers and writers for matrices and grids.
//!
//! A `dim x dim` complex matrix is `dim` rows of `2*dim` numbers,
//! interleaved `re, im` pairs, row-major. Alpha grids are rows of
//! `re, im`. All emitted numbers carry 17 significant digits.

use num_complex::Complex64;
use statecone::linalg::CMatrix;

pub fn parse_matrix(text: &str, dim: usize) -> Result<CMatrix<f64>, String> {
    let rows: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if rows.len() != dim {
        return Err(format!("expected {dim} rows, got {}", rows.len()));
    }
    let mut m = CMatrix::<f64>::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<f64> = row
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1)))
            .collect::<Result<_, _>>()?;
        if cells.len() != 2 * dim {
            return Err(format!(
                "row {}: expected {} numbers (re, im pairs), got {}",
                i + 1,
                2 * dim,
                cells.len()
            ));
        }
        for j in 0..dim {
            m[(i, j)] = Complex64::new(cells[2 * j], cells[2 * j + 1]);
        }
    }
    Ok(m)
}

#[cfg(test)]
pub fn format_matrix(m: &CMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .flat_map(|j| {
                let z = m[(i, j)];
                [format!("{:.16e}", z.re), format!("{:.16e}", z.im)]
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_alpha_grid(text: &str) -> Result<Vec<Complex64>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("alpha") {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 2 {
            return Err(format!("alpha grid row {}: expected `re, im`", i + 1));
        }
        let re: f64 = cells[0].parse().map_err(|e| format!("row {}: {e}", i + 1))?;
        let im: f64 = cells[1].parse().map_err(|e| format!("row {}: {e}", i + 1))?;
        out.push(Complex64::new(re, im));
    }
    if out.is_empty() {
        return Err("alpha grid is empty".into());
    }
    Ok(out)
}

/// Parse a complex scalar: `1.5`, `0.5+0.5i`, `-0.2i`, `1-2i`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(re) = s.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Err(format!("cannot parse complex number `{text}`"));
    };
    // split at the last +/- that is not an exponent sign or leading
    let chars: Vec<char> = body.chars().collect();
    for split in (1..chars.len()).rev() {
        let c = chars[split];
        if (c == '+' || c == '-') && chars[split - 1] != 'e' && chars[split - 1] != 'E' {
            let re_part: String = chars[..split].iter().collect();
            let im_part: String = chars[split..].iter().collect();
            let im_val: f64 = match im_part.as_str() {
                "+" => 1.0,
                "-" => -1.0,
                other => other.parse().map_err(|e| format!("imag `{other}`: {e}"))?,
            };
            let re_val: f64 = re_part.parse().map_err(|e| format!("real `{re_part}`: {e}"))?;
            return Ok(Complex64::new(re_val, im_val));
        }
    }
    // pure imaginary
    let im_val: f64 = match body {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse().map_err(|e| format!("imag `{other}`: {e}"))?,
    };
    Ok(Complex64::new(0.0, im_val))
}
