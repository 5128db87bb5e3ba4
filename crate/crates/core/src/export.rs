//! CSV and JSON emitters for the data files behind the figures.
//!
//! All floating-point output uses 17 significant digits so files
//! round-trip to the exact binary values. Emitters produce strings; the
//! command-line layer prepends reproducibility headers and writes files.

use nalgebra::DMatrix;

use crate::ensemble::BinnedBox;
use crate::lindblad::DensityMatrix;
use crate::optimizer::TrajectoryPoint;

/// Format a float with 17 significant digits (round-trip exact).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{:.16e}", x)
    }
}

fn join_row(values: impl IntoIterator<Item = String>) -> String {
    values.into_iter().collect::<Vec<_>>().join(",")
}

/// `(Gamma, eta)` curve as CSV.
pub fn curve_csv(curve: &[(f64, f64)]) -> String {
    let mut out = String::from("gamma,eta\n");
    for (g, e) in curve {
        out.push_str(&join_row([fmt_f64(*g), fmt_f64(*e)]));
        out.push('\n');
    }
    out
}

/// Site-indexed columns (e.g. energies, rates, populations) as CSV. All
/// columns must share the length of the site index.
pub fn site_columns_csv(names: &[&str], columns: &[&[f64]]) -> String {
    assert_eq!(names.len(), columns.len());
    let n = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == n));
    let mut out = String::from("site");
    for name in names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for k in 0..n {
        out.push_str(&(k + 1).to_string());
        for col in columns {
            out.push(',');
            out.push_str(&fmt_f64(col[k]));
        }
        out.push('\n');
    }
    out
}

/// Real matrix (coherence map, ratio map) as CSV, one matrix row per
/// line. NaN entries (masked ratios) print as `nan`.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        out.push_str(&join_row((0..m.ncols()).map(|c| fmt_f64(m[(r, c)]))));
        out.push('\n');
    }
    out
}

/// Density matrix as CSV: row-major with paired real/imaginary columns
/// `re_c0,im_c0,re_c1,im_c1,...` per matrix row.
pub fn density_matrix_csv(rho: &DensityMatrix) -> String {
    let n = rho.n_sites();
    let mut out = String::new();
    for r in 0..n {
        let mut cells = Vec::with_capacity(2 * n);
        for c in 0..n {
            let v = rho.element(r, c);
            cells.push(fmt_f64(v.re));
            cells.push(fmt_f64(v.im));
        }
        out.push_str(&join_row(cells));
        out.push('\n');
    }
    out
}

/// Density matrix as a JSON object with separate real and imaginary
/// row-major nested arrays.
pub fn density_matrix_json(rho: &DensityMatrix) -> serde_json::Value {
    let n = rho.n_sites();
    let part = |imag: bool| -> Vec<Vec<f64>> {
        (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        let v = rho.element(r, c);
                        if imag {
                            v.im
                        } else {
                            v.re
                        }
                    })
                    .collect()
            })
            .collect()
    };
    serde_json::json!({
        "n_sites": n,
        "re": part(false),
        "im": part(true),
    })
}

/// Optimization trajectory as CSV: `step,eta,gamma_1..gamma_N`.
pub fn trajectory_csv(trajectory: &[TrajectoryPoint]) -> String {
    let n = trajectory.first().map_or(0, |p| p.gammas.len());
    let mut out = String::from("step,eta");
    for k in 1..=n {
        out.push_str(&format!(",gamma_{k}"));
    }
    out.push('\n');
    for p in trajectory {
        out.push_str(&p.step.to_string());
        out.push(',');
        out.push_str(&fmt_f64(p.flux));
        for g in &p.gammas {
            out.push(',');
            out.push_str(&fmt_f64(*g));
        }
        out.push('\n');
    }
    out
}

/// Histogram `(bin_center, count)` rows as CSV.
pub fn histogram_csv(hist: &[(f64, usize)]) -> String {
    let mut out = String::from("bin_center,count\n");
    for (center, count) in hist {
        out.push_str(&format!("{},{}\n", fmt_f64(*center), count));
    }
    out
}

/// Binned boxplot statistics as CSV.
pub fn binned_boxplot_csv(boxes: &[BinnedBox]) -> String {
    let mut out = String::from("bin_center,count,q1,median,q3,whisker_low,whisker_high,n_outliers\n");
    for b in boxes {
        out.push_str(&join_row([
            fmt_f64(b.bin_center),
            b.count.to_string(),
            fmt_f64(b.stats.q1),
            fmt_f64(b.stats.median),
            fmt_f64(b.stats.q3),
            fmt_f64(b.stats.whisker_low),
            fmt_f64(b.stats.whisker_high),
            b.stats.outliers.len().to_string(),
        ]));
        out.push('\n');
    }
    out
}

/// `(gamma2, gamma3, value)` grid rows as CSV, for flux landscapes.
pub fn landscape_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("gamma2,gamma3,eta\n");
    for (g2, g3, eta) in rows {
        out.push_str(&join_row([fmt_f64(*g2), fmt_f64(*g3), fmt_f64(*eta)]));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [1.0 / 3.0, 1.87e-3, f64::MIN_POSITIVE, -0.458333333333333333, 7.2e100] {
            let back: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(back, x, "value {x:e} did not round-trip");
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn density_matrix_csv_pairs_re_im() {
        let mut m = DMatrix::from_diagonal_element(2, 2, Complex::new(0.5, 0.0));
        m[(0, 1)] = Complex::new(0.1, -0.2);
        m[(1, 0)] = Complex::new(0.1, 0.2);
        let rho = DensityMatrix::new(m).unwrap();
        let csv = density_matrix_csv(&rho);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        let first: Vec<f64> = lines[0].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(first.len(), 4);
        assert_eq!(first[0], 0.5); // re(0,0)
        assert_eq!(first[2], 0.1); // re(0,1)
        assert_eq!(first[3], -0.2); // im(0,1)
    }

    #[test]
    fn site_columns_align() {
        let csv = site_columns_csv(&["energy", "gamma"], &[&[0.0, -0.5], &[0.1, 0.2]]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "site,energy,gamma");
        assert!(lines[1].starts_with("1,"));
        assert!(lines[2].starts_with("2,"));
    }

    #[test]
    fn matrix_csv_masks_nan() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = f64::NAN;
        let csv = matrix_csv(&m);
        assert!(csv.lines().next().unwrap().contains("nan"));
    }
}
