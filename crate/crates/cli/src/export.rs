//! CSV field exports.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use cornerflow::analysis::Window;
use cornerflow::compressible::CompressibleSolution;
use cornerflow::incompressible::FlowField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ExportStats {
    pub rows: usize,
    pub masked: usize,
}

/// Samples an incompressible flow at the `n x n` cell centers of `window`.
/// Rows are `x,y,psi,speed,masked`; masked cells (inside or on the body)
/// carry `nan`.
pub fn export_field<F: FlowField<f64> + ?Sized>(flow: &F, window: &Window<f64>, n: usize, path: &Path) -> Result<ExportStats> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "x,y,psi,speed,masked")?;
    let mut stats = ExportStats { rows: 0, masked: 0 };
    for z in window.cell_centers(n) {
        let inside = flow.body().is_some_and(|b| b.contains(z));
        let sample = if inside {
            None
        } else {
            flow.stream(z).ok().zip(flow.velocity(z).ok())
        };
        match sample {
            Some((psi, w)) => writeln!(out, "{},{},{},{},0", z.re, z.im, psi, w.norm())?,
            None => {
                stats.masked += 1;
                writeln!(out, "{},{},nan,nan,1", z.re, z.im)?
            }
        }
        stats.rows += 1;
    }
    out.flush()?;
    Ok(stats)
}

/// Writes every grid node as `r,theta,x,y,psi,rho,mach`, where `r, theta`
/// are circle-plane polar coordinates. Plate edges carry `nan`.
pub fn export_nodes(sol: &CompressibleSolution<f64>, path: &Path) -> Result<ExportStats> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "r,theta,x,y,psi,rho,mach")?;
    let grid = &sol.grid;
    let mut stats = ExportStats { rows: 0, masked: 0 };
    for i in 0..grid.n_r {
        for j in 0..grid.n_theta {
            let k = grid.index(i, j);
            let (r, theta) = grid.sigma(i, j).to_polar();
            let z = grid.nodes[k];
            if grid.is_flagged(k) {
                stats.masked += 1;
            }
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r, theta, z.re, z.im, sol.psi[k], sol.density[k], sol.mach[k]
            )?;
            stats.rows += 1;
        }
    }
    out.flush()?;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cornerflow::incompressible::{ComplexFlow, FarField};
    use num_complex::Complex;

    fn rows(path: &Path) -> Vec<Vec<String>> {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn circle_export_masks_interior() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let flow = ComplexFlow::circle(1.0, FarField::new(Complex::new(1.0, 0.0), 0.0)).unwrap();
        let window = Window { x_min: -3.0, x_max: 3.0, y_min: -3.0, y_max: 3.0 };
        let stats = export_field(&flow, &window, 200, &path).unwrap();
        assert_eq!(stats.rows, 40000);
        for r in rows(&path) {
            let (x, y): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
            assert_eq!(r[4] == "1", x * x + y * y < 1.0, "{x} {y}");
        }
    }

    #[test]
    fn uniform_stream_column_is_linear() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let w = Complex::new(1.5, 0.0);
        let window = Window { x_min: -2.0, x_max: 1.0, y_min: -1.0, y_max: 4.0 };
        export_field(&ComplexFlow::uniform(w), &window, 30, &path).unwrap();
        for r in rows(&path) {
            let y: f64 = r[1].parse().unwrap();
            let psi: f64 = r[2].parse().unwrap();
            assert!((psi - 1.5 * y).abs() < 1e-12);
        }
    }
}
