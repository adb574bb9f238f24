//! Curve (CSV) and field (legacy ASCII VTK) output.

use std::io::Write as _;
use std::path::Path;

use crate::bench::CurveRecord;
use crate::error::{Error, Result};
use crate::fem::Mesh;
use crate::material::{log_strain_measures, PrincipalState};
use crate::solver::SolveReport;
use crate::tensor::jacobi_eigen;

/// Writes curve records as CSV: one header line, comma separated, 17
/// significant digits, one row per point with its series tag.
pub fn emit_curves(path: &Path, records: &[CurveRecord]) -> Result<()> {
    let mut out = String::new();
    let (xl, yl) = records
        .first()
        .map(|r| (r.abscissa_label.as_str(), r.ordinate_label.as_str()))
        .unwrap_or(("abscissa", "ordinate"));
    out.push_str(&format!("{xl},{yl},series\n"));
    for r in records {
        for (x, y) in r.abscissa.iter().zip(r.ordinate.iter()) {
            out.push_str(&format!("{x:.16e},{y:.16e},{}\n", r.tag));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes mesh, displacement field and Gauss-averaged strain measures as a
/// legacy ASCII VTK unstructured grid: point-data vector `displacement`,
/// cell-data scalars `max_principal_log_strain`, `omega_iso`, `omega_vol`.
pub fn emit_fields(path: &Path, mesh: &Mesh, u: &[f64], title: &str) -> Result<()> {
    let dim = mesh.dim;
    let n = mesh.n_nodes();
    let ne = mesh.n_elems();
    let en = mesh.kind.n_nodes();

    let mut max_log = vec![0.0; ne];
    let mut iso = vec![0.0; ne];
    let mut vol = vec![0.0; ne];
    for e in 0..ne {
        let states = mesh.gauss_states(e, u)?;
        let m = states.len() as f64;
        for gp in &states {
            let sp = jacobi_eigen(&gp.b)?;
            let ps = PrincipalState::from_spectral_of_b(&sp)?;
            let (oi, ov) = log_strain_measures(&ps);
            max_log[e] += ps.loglam[..dim].iter().cloned().fold(f64::MIN, f64::max) / m;
            iso[e] += oi / m;
            vol[e] += ov / m;
        }
    }

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(title);
    out.push('\n');
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    out.push_str(&format!("POINTS {n} double\n"));
    for x in &mesh.nodes {
        out.push_str(&format!("{:.16e} {:.16e} {:.16e}\n", x[0], x[1], x[2]));
    }
    out.push_str(&format!("CELLS {ne} {}\n", ne * (1 + en)));
    for e in 0..ne {
        out.push_str(&format!("{en}"));
        for &node in mesh.element(e) {
            out.push_str(&format!(" {node}"));
        }
        out.push('\n');
    }
    out.push_str(&format!("CELL_TYPES {ne}\n"));
    let cell_type = match mesh.kind {
        crate::fem::ElementKind::Q4 => 9,
        crate::fem::ElementKind::H8 => 12,
    };
    for _ in 0..ne {
        out.push_str(&format!("{cell_type}\n"));
    }
    out.push_str(&format!("POINT_DATA {n}\n"));
    out.push_str("VECTORS displacement double\n");
    for node in 0..n {
        let mut d = [0.0; 3];
        for i in 0..dim {
            d[i] = u[node * dim + i];
        }
        out.push_str(&format!("{:.16e} {:.16e} {:.16e}\n", d[0], d[1], d[2]));
    }
    out.push_str(&format!("CELL_DATA {ne}\n"));
    for (name, data) in [
        ("max_principal_log_strain", &max_log),
        ("omega_iso", &iso),
        ("omega_vol", &vol),
    ] {
        out.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
        for v in data {
            out.push_str(&format!("{v:.16e}\n"));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Human-readable run record: per-step iteration counts, cuts and reaction
/// resultants.
pub fn write_report(path: &Path, header: &str, report: &SolveReport) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    out.push_str(&format!("program: {}\n", report.description));
    out.push_str(&format!(
        "steps completed: {}{}\n",
        report.steps.len(),
        if report.aborted { " (ABORTED)" } else { "" }
    ));
    if let Some(reason) = &report.abort_reason {
        out.push_str(&format!("abort reason: {reason}\n"));
    }
    out.push_str(&format!("wall time: {:.3} s\n", report.wall.as_secs_f64()));
    out.push_str("step  dirichlet[mm]  load[N]  iters  cuts  reaction[N]  residuals\n");
    for (i, s) in report.steps.iter().enumerate() {
        let hist = s
            .traces
            .last()
            .map(|t| {
                t.residual_history
                    .iter()
                    .map(|r| format!("{r:.2e}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .unwrap_or_default();
        out.push_str(&format!(
            "{:4}  {:13.6}  {:7.3}  {:5}  {:4}  {:11.5e}  {hist}\n",
            i + 1,
            s.target.dirichlet,
            s.target.load,
            s.iterations(),
            s.cuts,
            s.reaction
        ));
    }
    let max_iters = report.steps.iter().map(|s| s.iterations()).max().unwrap_or(0);
    out.push_str(&format!("max iterations over steps: {max_iters}\n"));
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
