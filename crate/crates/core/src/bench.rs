//! Benchmark cases and desk-scale drivers: uniaxial cube, 3D/2D footing,
//! arc buckling, Cook's membrane, a homogeneous material-point driver for
//! stress-stretch curves, and the incompressible uniaxial formula with its
//! least-squares calibration.

use crate::error::{Error, Result};
use crate::fem::{DofMap, ElementKind, Mesh};
use crate::material::{
    d2w, principal_tau, MaterialParams, Model, PrincipalState,
};
use crate::solver::{LoadProgram, NewtonConfig, Problem, SolveReport, Solver};

/// Geometric tolerance for node classification on generated meshes (mm).
const GEO_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    /// 20×20×20 mm³ cube under uniform prescribed axial displacement.
    UniaxialCube,
    /// Same cube, prescribed displacement on half the top face.
    Footing3d,
    /// Clamped 60° arc, R_i = 100 mm, t = 4 mm, crown displacement control.
    Arc2d,
    /// Tapered membrane clamped at the left edge, distributed end load.
    Cook2d,
    /// 20×20 mm² square, prescribed displacement on half the top edge.
    Footing2d,
    /// Homogeneous material point (no mesh).
    Mpoint,
}

impl CaseId {
    pub fn name(&self) -> &'static str {
        match self {
            CaseId::UniaxialCube => "uniaxial_cube",
            CaseId::Footing3d => "footing3d",
            CaseId::Arc2d => "arc2d",
            CaseId::Cook2d => "cook2d",
            CaseId::Footing2d => "footing2d",
            CaseId::Mpoint => "mpoint",
        }
    }

    pub fn parse(s: &str) -> Result<CaseId> {
        match s {
            "uniaxial_cube" | "uniaxial" | "cube" => Ok(CaseId::UniaxialCube),
            "footing3d" => Ok(CaseId::Footing3d),
            "arc2d" | "arc" => Ok(CaseId::Arc2d),
            "cook2d" | "cook" => Ok(CaseId::Cook2d),
            "footing2d" => Ok(CaseId::Footing2d),
            "mpoint" => Ok(CaseId::Mpoint),
            other => Err(Error::Config(format!("unknown case '{other}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CaseId::UniaxialCube | CaseId::Footing3d | CaseId::Mpoint => 3,
            _ => 2,
        }
    }
}

/// Benchmark parameter set: κ = 4.7 μ, k = 2, k̂ = 3, J_m = 5.
pub fn default_material(model: Model, dim: usize, mu: f64) -> Result<MaterialParams> {
    match model {
        Model::ExpHencky => MaterialParams::exp_hencky(dim, mu, 4.7 * mu, 2.0, 3.0),
        Model::QuadHencky => MaterialParams::quad_hencky(dim, mu, 4.7 * mu),
        Model::NeoHooke => MaterialParams::neo_hooke(mu, 4.7 * mu),
        Model::Gent => MaterialParams::gent(mu, 4.7 * mu, 5.0),
    }
}

/// A named benchmark configuration.
#[derive(Debug, Clone)]
pub struct CaseSpec {
    pub case: CaseId,
    pub material: MaterialParams,
    /// Mesh density; meaning is per case (elements per edge for the cubes
    /// and squares, mesh index 1–3 for the named arc refinements, elements
    /// per side for Cook's membrane).
    pub density: usize,
    pub steps: usize,
    /// Per-step increment: prescribed displacement (mm) for the
    /// displacement-controlled cases, load increment (N) for Cook.
    pub step: f64,
}

impl CaseSpec {
    /// Per-case defaults matching the reference runs.
    pub fn new(case: CaseId, model: Model) -> Result<Self> {
        let (density, steps, step) = match case {
            CaseId::UniaxialCube => (4, 15, -1.0),
            CaseId::Footing3d => (16, 12, -1.0),
            CaseId::Arc2d => (2, 60, -0.25),
            CaseId::Cook2d => (16, 10, 20.0),
            CaseId::Footing2d => (30, 24, -0.5),
            CaseId::Mpoint => (1, 110, 0.0),
        };
        let material = default_material(model, case.dim(), 1.0)?;
        let spec = CaseSpec {
            case,
            material,
            density,
            steps,
            step,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        if self.density == 0 {
            return Err(Error::Config("mesh density must be >= 1".into()));
        }
        if self.material.dim != self.case.dim() {
            return Err(Error::Config(format!(
                "case {} needs a {}d material, got {}d",
                self.case.name(),
                self.case.dim(),
                self.material.dim
            )));
        }
        Ok(())
    }
}

/// Generated discrete problem for one case.
pub struct Case {
    pub mesh: Mesh,
    pub dofmap: DofMap,
    pub program: LoadProgram,
    pub f_ext: Option<Vec<f64>>,
    /// Dofs whose reactions form the reported resultant.
    pub reaction_dofs: Vec<usize>,
    /// Dof probed for the case's displacement readout (Cook tip, arc crown).
    pub probe_dof: Option<usize>,
}

// ---------------------------------------------------------------------------
// Structured mesh generators
// ---------------------------------------------------------------------------

/// Regular H8 grid on [0,lx]×[0,ly]×[0,lz] with nx×ny×nz elements.
pub fn grid_mesh_3d(nx: usize, ny: usize, nz: usize, lx: f64, ly: f64, lz: f64) -> Mesh {
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([
                    lx * i as f64 / nx as f64,
                    ly * j as f64 / ny as f64,
                    lz * k as f64 / nz as f64,
                ]);
            }
        }
    }
    let id = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut conn = Vec::with_capacity(nx * ny * nz * 8);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                conn.extend_from_slice(&[
                    id(i, j, k),
                    id(i + 1, j, k),
                    id(i + 1, j + 1, k),
                    id(i, j + 1, k),
                    id(i, j, k + 1),
                    id(i + 1, j, k + 1),
                    id(i + 1, j + 1, k + 1),
                    id(i, j + 1, k + 1),
                ]);
            }
        }
    }
    Mesh::new(ElementKind::H8, nodes, conn).expect("regular grid is valid")
}

/// Regular Q4 grid on [0,lx]×[0,ly] with nx×ny elements.
pub fn grid_mesh_2d(nx: usize, ny: usize, lx: f64, ly: f64) -> Mesh {
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([lx * i as f64 / nx as f64, ly * j as f64 / ny as f64, 0.0]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut conn = Vec::with_capacity(nx * ny * 4);
    for j in 0..ny {
        for i in 0..nx {
            conn.extend_from_slice(&[id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(ElementKind::Q4, nodes, conn).expect("regular grid is valid")
}

/// Annular sector grid: `nthick` elements through the thickness, `ncirc`
/// along the circumference, spanning `span_deg` degrees symmetric about the
/// vertical.
pub fn arc_mesh(nthick: usize, ncirc: usize, r_inner: f64, thickness: f64, span_deg: f64) -> Mesh {
    let theta0 = (90.0 - span_deg / 2.0).to_radians();
    let theta1 = (90.0 + span_deg / 2.0).to_radians();
    let mut nodes = Vec::with_capacity((nthick + 1) * (ncirc + 1));
    for c in 0..=ncirc {
        let th = theta0 + (theta1 - theta0) * c as f64 / ncirc as f64;
        for t in 0..=nthick {
            let r = r_inner + thickness * t as f64 / nthick as f64;
            nodes.push([r * th.cos(), r * th.sin(), 0.0]);
        }
    }
    let id = |t: usize, c: usize| c * (nthick + 1) + t;
    let mut conn = Vec::with_capacity(nthick * ncirc * 4);
    for c in 0..ncirc {
        for t in 0..nthick {
            conn.extend_from_slice(&[id(t, c), id(t + 1, c), id(t + 1, c + 1), id(t, c + 1)]);
        }
    }
    Mesh::new(ElementKind::Q4, nodes, conn).expect("arc grid is valid")
}

/// Tapered quadrilateral with corners (0,0), (48,44), (48,60), (0,44),
/// meshed n×n by a bilinear map.
pub fn cook_mesh(n: usize) -> Mesh {
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        let t = j as f64 / n as f64;
        for i in 0..=n {
            let s = i as f64 / n as f64;
            let x = 48.0 * s;
            let y_bottom = 44.0 * s;
            let y_top = 44.0 + 16.0 * s;
            nodes.push([x, y_bottom * (1.0 - t) + y_top * t, 0.0]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut conn = Vec::with_capacity(n * n * 4);
    for j in 0..n {
        for i in 0..n {
            conn.extend_from_slice(&[id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(ElementKind::Q4, nodes, conn).expect("cook grid is valid")
}

/// The named arc refinements: (elements through thickness, circumferential).
pub fn arc_named_density(index: usize) -> Result<(usize, usize)> {
    match index {
        1 => Ok((3, 30)),
        2 => Ok((10, 90)),
        3 => Ok((20, 180)),
        other => Err(Error::Config(format!(
            "arc2d density must be the mesh index 1, 2 or 3 (got {other})"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Case assembly
// ---------------------------------------------------------------------------

/// Builds mesh, Dirichlet program and load pattern for a case.
pub fn generate_case(spec: &CaseSpec) -> Result<Case> {
    spec.validate()?;
    match spec.case {
        CaseId::UniaxialCube => {
            let d = spec.density;
            let edge = 20.0;
            let mesh = grid_mesh_3d(d, d, d, edge, edge, edge);
            let mut dm = DofMap::new(3, mesh.n_nodes());
            let mut reaction_dofs = Vec::new();
            for (n, x) in mesh.nodes.iter().enumerate() {
                if x[0].abs() < GEO_EPS {
                    dm.constrain(n, 0, 0.0);
                }
                if x[1].abs() < GEO_EPS {
                    dm.constrain(n, 1, 0.0);
                }
                if x[2].abs() < GEO_EPS {
                    dm.constrain(n, 2, 0.0);
                }
                if (x[2] - edge).abs() < GEO_EPS {
                    dm.constrain(n, 2, 1.0);
                    reaction_dofs.push(n * 3 + 2);
                }
            }
            let program = LoadProgram::proportional(
                spec.steps,
                spec.step * spec.steps as f64,
                0.0,
                "uniaxial cube",
            );
            Ok(Case {
                mesh,
                dofmap: dm,
                program,
                f_ext: None,
                reaction_dofs,
                probe_dof: None,
            })
        }
        CaseId::Footing3d => {
            let d = spec.density;
            let edge = 20.0;
            let mesh = grid_mesh_3d(d, d, d, edge, edge, edge);
            let mut dm = DofMap::new(3, mesh.n_nodes());
            let mut reaction_dofs = Vec::new();
            for (n, x) in mesh.nodes.iter().enumerate() {
                // Bottom face fixed in all components.
                if x[2].abs() < GEO_EPS {
                    dm.constrain(n, 0, 0.0);
                    dm.constrain(n, 1, 0.0);
                    dm.constrain(n, 2, 0.0);
                }
                // Lateral faces constrained in their normal directions.
                if x[0].abs() < GEO_EPS || (x[0] - edge).abs() < GEO_EPS {
                    dm.constrain(n, 0, 0.0);
                }
                if x[1].abs() < GEO_EPS || (x[1] - edge).abs() < GEO_EPS {
                    dm.constrain(n, 1, 0.0);
                }
                // Loaded strip: half of the top face (x <= 10).
                if (x[2] - edge).abs() < GEO_EPS && x[0] <= edge / 2.0 + GEO_EPS {
                    dm.constrain(n, 2, 1.0);
                    reaction_dofs.push(n * 3 + 2);
                }
            }
            let program = LoadProgram::proportional(
                spec.steps,
                spec.step * spec.steps as f64,
                0.0,
                "footing 3d",
            );
            Ok(Case {
                mesh,
                dofmap: dm,
                program,
                f_ext: None,
                reaction_dofs,
                probe_dof: None,
            })
        }
        CaseId::Arc2d => {
            let (nthick, ncirc) = arc_named_density(spec.density)?;
            let (r_inner, thickness, span) = (100.0, 4.0, 60.0);
            let mesh = arc_mesh(nthick, ncirc, r_inner, thickness, span);
            let mut dm = DofMap::new(2, mesh.n_nodes());
            // Clamp both end columns.
            let nt1 = nthick + 1;
            for c in [0, ncirc] {
                for t in 0..nt1 {
                    let n = c * nt1 + t;
                    dm.constrain(n, 0, 0.0);
                    dm.constrain(n, 1, 0.0);
                }
            }
            // Crown: the middle node of the upper (outer) edge.
            let crown = (ncirc / 2) * nt1 + nthick;
            dm.constrain(crown, 1, 1.0);
            let program = LoadProgram::proportional(
                spec.steps,
                spec.step * spec.steps as f64,
                0.0,
                "arc buckling",
            );
            Ok(Case {
                mesh,
                dofmap: dm,
                program,
                f_ext: None,
                reaction_dofs: vec![crown * 2 + 1],
                probe_dof: Some(crown * 2 + 1),
            })
        }
        CaseId::Cook2d => {
            let n = spec.density;
            if n % 2 != 0 {
                return Err(Error::Config(
                    "cook2d needs an even element count per side (mid-edge probe node)".into(),
                ));
            }
            let mesh = cook_mesh(n);
            let mut dm = DofMap::new(2, mesh.n_nodes());
            let mut reaction_dofs = Vec::new();
            for (node, x) in mesh.nodes.iter().enumerate() {
                if x[0].abs() < GEO_EPS {
                    dm.constrain(node, 0, 0.0);
                    dm.constrain(node, 1, 0.0);
                    reaction_dofs.push(node * 2 + 1);
                }
            }
            // Uniform traction on the right edge as consistent nodal loads:
            // the pattern carries the per-unit-load distribution; the
            // program scales it to the running total.
            let mut f_ext = vec![0.0; mesh.n_dofs()];
            let id = |i: usize, j: usize| j * (n + 1) + i;
            let edge_len = 16.0 / n as f64;
            for j in 0..n {
                let t = 1.0 / 16.0 * edge_len / 2.0; // per unit total load
                f_ext[id(n, j) * 2 + 1] += t;
                f_ext[id(n, j + 1) * 2 + 1] += t;
            }
            // Probe: node A at the middle of the right edge.
            let probe = id(n, n / 2) * 2 + 1;
            let total = spec.step * spec.steps as f64;
            let program = LoadProgram::proportional(spec.steps, 0.0, total, "cook membrane");
            Ok(Case {
                mesh,
                dofmap: dm,
                program,
                f_ext: Some(f_ext),
                reaction_dofs,
                probe_dof: Some(probe),
            })
        }
        CaseId::Footing2d => {
            let n = spec.density;
            let edge = 20.0;
            let mesh = grid_mesh_2d(n, n, edge, edge);
            let mut dm = DofMap::new(2, mesh.n_nodes());
            let mut reaction_dofs = Vec::new();
            for (node, x) in mesh.nodes.iter().enumerate() {
                if x[1].abs() < GEO_EPS {
                    dm.constrain(node, 0, 0.0);
                    dm.constrain(node, 1, 0.0);
                }
                if x[0].abs() < GEO_EPS || (x[0] - edge).abs() < GEO_EPS {
                    dm.constrain(node, 0, 0.0);
                }
                if (x[1] - edge).abs() < GEO_EPS && x[0] <= edge / 2.0 + GEO_EPS {
                    dm.constrain(node, 1, 1.0);
                    reaction_dofs.push(node * 2 + 1);
                }
            }
            let program = LoadProgram::proportional(
                spec.steps,
                spec.step * spec.steps as f64,
                0.0,
                "footing 2d",
            );
            Ok(Case {
                mesh,
                dofmap: dm,
                program,
                f_ext: None,
                reaction_dofs,
                probe_dof: None,
            })
        }
        CaseId::Mpoint => Err(Error::Config(
            "mpoint is a material-point driver, not a mesh case".into(),
        )),
    }
}

/// Outcome of one FE case run.
pub struct CaseRun {
    pub case: Case,
    pub u: Vec<f64>,
    pub report: SolveReport,
}

/// Generates, assembles and runs a case with the given Newton settings.
pub fn run_case(spec: &CaseSpec, cfg: NewtonConfig) -> Result<CaseRun> {
    let case = generate_case(spec)?;
    let mut problem = Problem::new(case.mesh.clone(), case.dofmap.clone(), spec.material)?;
    problem.f_ext = case.f_ext.clone();
    problem.reaction_dofs = case.reaction_dofs.clone();
    let solver = Solver::new(&problem, cfg);
    let (u, report) = solver.run_program(&case.program, None);
    Ok(CaseRun { case, u, report })
}

// ---------------------------------------------------------------------------
// Material-point driver
// ---------------------------------------------------------------------------

/// A simulated curve: x values, y values, labels.
#[derive(Debug, Clone)]
pub struct CurveRecord {
    pub abscissa: Vec<f64>,
    pub ordinate: Vec<f64>,
    pub abscissa_label: String,
    pub ordinate_label: String,
    pub tag: String,
}

/// Uniaxial stress state at a homogeneous material point: for each axial
/// stretch λ₃, solves S₁¹ = S₁² = 0 for the lateral stretch λ₁ = λ₂ by a
/// scalar Newton on log λ₁, and records the nominal stress S₁³/μ.
///
/// States where the lateral solve fails (e.g. beyond a locking limit) are
/// recorded as gaps (skipped points).
pub fn material_point_uniaxial(p: &MaterialParams, lambdas: &[f64]) -> CurveRecord {
    debug_assert_eq!(p.dim, 3);
    let mut abscissa = Vec::with_capacity(lambdas.len());
    let mut ordinate = Vec::with_capacity(lambdas.len());
    let mut x_guess = 0.0; // log λ₁ seed carried across the sweep
    for &l3 in lambdas {
        match solve_lateral(p, l3, x_guess) {
            Ok((x1, s13)) => {
                x_guess = x1;
                abscissa.push(l3);
                ordinate.push(s13 / p.mu);
            }
            Err(_) => {}
        }
    }
    CurveRecord {
        abscissa,
        ordinate,
        abscissa_label: "stretch".into(),
        ordinate_label: "nominal_stress_over_mu".into(),
        tag: p.model.name().into(),
    }
}

/// Lateral equilibrium at fixed λ₃: returns (log λ₁, S₁³).
pub fn solve_lateral(p: &MaterialParams, l3: f64, x_start: f64) -> Result<(f64, f64)> {
    let eval = |x: f64| -> Result<(f64, f64)> {
        // (S1_lateral, dS1_lateral/dx) at λ₁ = λ₂ = eˣ.
        let s = PrincipalState::from_stretches(3, &[x.exp(), x.exp(), l3])?;
        let st = principal_tau(p, &s)?;
        let d = d2w(p, &s)?;
        let s1 = st.s1[0];
        // d(τ₁ e^{-x})/dx with both lateral logs moving together.
        let ds1 = (d[0][0] + d[0][1] - st.tau[0]) * (-x).exp();
        Ok((s1, ds1))
    };
    let mut x = x_start;
    let mut fx = match eval(x) {
        Ok(v) => v,
        Err(_) => {
            // Seed outside the admissible domain; restart near zero.
            x = 0.0;
            eval(x)?
        }
    };
    for _ in 0..200 {
        // 1e-12 tolerance, scaled by the local stiffness so stress scales
        // far above 1 MPa stay solvable within f64 resolution.
        let tol = 1e-12 * fx.1.abs().max(1.0);
        if fx.0.abs() <= tol {
            let s = PrincipalState::from_stretches(3, &[x.exp(), x.exp(), l3])?;
            let st = principal_tau(p, &s)?;
            return Ok((x, st.s1[2]));
        }
        let mut dx = -fx.0 / fx.1;
        // Keep the update inside a trust region and inside the admissible
        // domain (locking limits).
        dx = dx.clamp(-0.2, 0.2);
        let mut step = dx;
        loop {
            match eval(x + step) {
                Ok(v) => {
                    x += step;
                    fx = v;
                    break;
                }
                Err(e) => {
                    step *= 0.5;
                    if step.abs() < 1e-15 {
                        return Err(e);
                    }
                }
            }
        }
    }
    Err(Error::NonConvergence {
        step: 0,
        iterations: 200,
        residual: fx.0.abs(),
    })
}

// ---------------------------------------------------------------------------
// Incompressible uniaxial formula and calibration
// ---------------------------------------------------------------------------

/// Ideal-incompressibility uniaxial nominal stress
/// S₁¹ = 3μ exp(³⁄₂ k ln²λ) lnλ/λ.
pub fn uniaxial_incompressible_stress(mu: f64, k: f64, lambda: f64) -> f64 {
    let l = lambda.ln();
    3.0 * mu * (1.5 * k * l * l).exp() * l / lambda
}

/// Least-squares calibration of (μ, k) on (λ, stress) pairs against the
/// incompressible uniaxial formula. Gauss-Newton with μ initialized from the
/// small-strain slope and k from 0. Returns (μ, k, final sum of squares).
pub fn fit_uniaxial(data: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if data.len() < 2 {
        return Err(Error::FitFailure(format!(
            "need at least 2 data points, got {}",
            data.len()
        )));
    }
    if !data.iter().any(|&(l, _)| (l - 1.0).abs() > 1e-12) {
        return Err(Error::FitFailure(
            "all data points at lambda = 1; rank deficient".into(),
        ));
    }
    for &(l, _) in data {
        if !(l > 0.0) {
            return Err(Error::FitFailure(format!("nonpositive stretch {l}")));
        }
    }

    // Small-strain initialization: S ≈ 3 μ lnλ/λ.
    let mut num = 0.0;
    let mut den = 0.0;
    for &(l, s) in data {
        let m = 3.0 * l.ln() / l;
        num += s * m;
        den += m * m;
    }
    if den == 0.0 {
        return Err(Error::FitFailure("degenerate data (zero slope basis)".into()));
    }
    let mut mu = num / den;
    let mut k = 0.0f64;
    if mu == 0.0 {
        mu = 1e-12;
    }

    let sum_sq = |mu: f64, k: f64| -> f64 {
        data.iter()
            .map(|&(l, s)| {
                let r = uniaxial_incompressible_stress(mu, k, l) - s;
                r * r
            })
            .sum()
    };

    for it in 0..100 {
        // Normal equations for the 2-parameter Gauss-Newton step.
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(l, s) in data {
            let model = uniaxial_incompressible_stress(mu, k, l);
            let r = model - s;
            let ll = l.ln();
            let dmu = model / mu;
            let dk = model * 1.5 * ll * ll;
            a11 += dmu * dmu;
            a12 += dmu * dk;
            a22 += dk * dk;
            b1 += dmu * r;
            b2 += dk * r;
        }
        let det = a11 * a22 - a12 * a12;
        let scale = a11.abs().max(a22.abs());
        // The k column vanishes for data clustered at λ = 1: fall back to a
        // μ-only update instead of dividing by a numerically zero det.
        let (dmu, dk) = if a22 <= 1e-14 * scale.max(1e-300) || det <= 1e-14 * scale * scale {
            if a11 == 0.0 {
                return Err(Error::FitFailure("singular normal equations".into()));
            }
            (-b1 / a11, 0.0)
        } else {
            ((-b1 * a22 + b2 * a12) / det, (-b2 * a11 + b1 * a12) / det)
        };
        let mut alpha = 1.0;
        let base = sum_sq(mu, k);
        // Backtrack if the full step overshoots (the exponential model can
        // blow up for large k trials).
        for _ in 0..30 {
            let (mt, kt) = (mu + alpha * dmu, k + alpha * dk);
            if mt > 0.0 && sum_sq(mt, kt).is_finite() && sum_sq(mt, kt) <= base {
                break;
            }
            alpha *= 0.5;
        }
        mu += alpha * dmu;
        k += alpha * dk;
        if (alpha * dmu).abs() <= 1e-14 * mu.abs().max(1.0)
            && (alpha * dk).abs() <= 1e-14 * k.abs().max(1.0)
        {
            return Ok((mu, k, sum_sq(mu, k)));
        }
        if it == 99 {
            return Err(Error::FitFailure(format!(
                "no convergence after 100 iterations (mu = {mu}, k = {k}, ss = {})",
                sum_sq(mu, k)
            )));
        }
    }
    Ok((mu, k, sum_sq(mu, k)))
}

/// Reaction/prescribed-displacement trajectory of a run as a curve record.
pub fn reaction_curve(report: &SolveReport, tag: &str, displacement_controlled: bool) -> CurveRecord {
    let (abscissa, ordinate): (Vec<f64>, Vec<f64>) = if displacement_controlled {
        report.trajectory().into_iter().unzip()
    } else {
        report.load_trajectory().into_iter().unzip()
    };
    CurveRecord {
        abscissa,
        ordinate,
        abscissa_label: if displacement_controlled {
            "prescribed_displacement_mm".into()
        } else {
            "load_n".into()
        },
        ordinate_label: "reaction_n".into(),
        tag: tag.into(),
    }
}
