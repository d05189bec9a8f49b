//! Helpers for the acceptance suite: locating the bundled problem files and
//! comparing computed sequences against reference tables.

use std::path::PathBuf;

use picard_bvp::problem::file::ProblemFile;

/// Directory holding the bundled JSON problems.
pub fn examples_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../cli/examples")
}

pub fn load_problem(file: &str) -> ProblemFile {
    let path = examples_dir().join(file);
    ProblemFile::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Indices where `got` and `want` differ by more than `tol`, with both values.
pub fn table_mismatches(got: &[f64], want: &[f64], tol: f64) -> Vec<(usize, f64, f64)> {
    let mut out: Vec<_> = got
        .iter()
        .zip(want)
        .enumerate()
        .filter(|(_, (g, w))| (*g - *w).abs() > tol || !g.is_finite())
        .map(|(i, (g, w))| (i, *g, *w))
        .collect();
    if got.len() != want.len() {
        out.push((got.len().min(want.len()), f64::NAN, f64::NAN));
    }
    out
}

/// Maclaurin coefficients of `cos t + sin t`: signs `+ + − − + + …` over `i!`.
pub fn cos_plus_sin_series(len: usize) -> Vec<f64> {
    let mut fact = 1.0;
    (0..len)
        .map(|i| {
            if i > 0 {
                fact *= i as f64;
            }
            let sign = if (i / 2) % 2 == 0 { 1.0 } else { -1.0 };
            sign / fact
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_prefix() {
        let s = cos_plus_sin_series(5);
        assert_eq!(s, vec![1.0, 1.0, -0.5, -1.0 / 6.0, 1.0 / 24.0]);
    }

    #[test]
    fn mismatch_reporting() {
        assert!(table_mismatches(&[1.0, 2.0], &[1.0, 2.00001], 1e-4).is_empty());
        assert_eq!(table_mismatches(&[1.0, 2.1], &[1.0, 2.0], 1e-4).len(), 1);
        assert_eq!(table_mismatches(&[1.0], &[1.0, 2.0], 1e-4).len(), 1);
    }

    #[test]
    fn bundled_files_load() {
        for f in ["harmonic_pi8.json", "harmonic_pi4.json", "cubic_forcing.json", "log_cos.json"] {
            load_problem(f).to_spec().unwrap();
        }
    }
}
