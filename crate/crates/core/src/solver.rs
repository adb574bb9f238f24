//! Displacement/load-stepped Newton-Raphson driver with direct sparse
//! solves.
//!
//! Each load step applies its Dirichlet targets to the displacement vector,
//! then iterates full Newton updates K Δu = −R on the free dofs until the
//! residual norm satisfies ‖R‖ ≤ max(tol_abs, tol_rel·‖R₀‖). Steps that fail
//! (no convergence, inverted element, singular tangent) are bisected up to a
//! cut budget. The linear solver is a sparse LU with partial pivoting, which
//! keeps factoring past limit points where the tangent loses positive
//! definiteness under displacement control.

use std::time::{Duration, Instant};

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};
use crate::fem::{Assembler, DofMap, DofPartition, Mesh, SparseMat};
use crate::material::MaterialParams;

/// Newton iteration control.
#[derive(Debug, Clone, Copy)]
pub struct NewtonConfig {
    /// Absolute residual floor (N).
    pub tol_res_abs: f64,
    /// Relative residual reduction.
    pub tol_res_rel: f64,
    /// Displacement-increment stagnation tolerance (mm).
    pub tol_increment: f64,
    pub max_iter: usize,
    pub max_step_cuts: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol_res_abs: 1e-9,
            tol_res_rel: 1e-10,
            tol_increment: 1e-14,
            max_iter: 25,
            max_step_cuts: 6,
        }
    }
}

/// One target of a load program: absolute scales applied to the Dirichlet
/// patterns and to the external load pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadStep {
    pub dirichlet: f64,
    pub load: f64,
}

/// A sequence of load steps (absolute targets, applied in order).
#[derive(Debug, Clone)]
pub struct LoadProgram {
    pub steps: Vec<LoadStep>,
    pub description: String,
}

impl LoadProgram {
    /// Ramp both scales linearly to their final values over `nsteps`.
    pub fn proportional(nsteps: usize, dirichlet: f64, load: f64, description: &str) -> Self {
        let steps = (1..=nsteps)
            .map(|s| {
                let f = s as f64 / nsteps as f64;
                LoadStep {
                    dirichlet: f * dirichlet,
                    load: f * load,
                }
            })
            .collect();
        LoadProgram {
            steps,
            description: description.to_string(),
        }
    }
}

/// The discrete problem a program is run on.
pub struct Problem {
    pub mesh: Mesh,
    pub dofmap: DofMap,
    pub material: MaterialParams,
    /// External load pattern per dof (N); scaled by the step's load factor.
    pub f_ext: Option<Vec<f64>>,
    /// Dofs whose reactions are summed into the reported resultant.
    pub reaction_dofs: Vec<usize>,
}

impl Problem {
    pub fn new(mesh: Mesh, dofmap: DofMap, material: MaterialParams) -> Result<Self> {
        if material.dim != mesh.dim {
            return Err(Error::Config(format!(
                "material dim {} does not match mesh dim {}",
                material.dim, mesh.dim
            )));
        }
        if dofmap.n_dofs() != mesh.n_dofs() {
            return Err(Error::Config(format!(
                "dofmap has {} dofs, mesh has {}",
                dofmap.n_dofs(),
                mesh.n_dofs()
            )));
        }
        Ok(Problem {
            mesh,
            dofmap,
            material,
            f_ext: None,
            reaction_dofs: Vec::new(),
        })
    }
}

/// Residual history of one Newton solve (first entry is the initial
/// residual norm after applying the step's Dirichlet values).
#[derive(Debug, Clone)]
pub struct NewtonTrace {
    pub dirichlet: f64,
    pub load: f64,
    pub residual_history: Vec<f64>,
}

impl NewtonTrace {
    pub fn iterations(&self) -> usize {
        self.residual_history.len().saturating_sub(1)
    }
}

/// Converged result of one program step (possibly after bisection).
#[derive(Debug, Clone)]
pub struct StepReport {
    pub target: LoadStep,
    pub cuts: usize,
    pub traces: Vec<NewtonTrace>,
    /// Sum of reactions over `Problem::reaction_dofs` at convergence (N).
    pub reaction: f64,
    /// Total strain energy at convergence (mJ).
    pub energy: f64,
}

impl StepReport {
    pub fn iterations(&self) -> usize {
        self.traces.iter().map(|t| t.iterations()).sum()
    }
}

/// Outcome of a whole program run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub description: String,
    pub steps: Vec<StepReport>,
    /// True if the run stopped early (step-cut budget exhausted).
    pub aborted: bool,
    pub abort_reason: Option<String>,
    pub wall: Duration,
}

impl SolveReport {
    /// (prescribed Dirichlet scale, reaction resultant) per completed step.
    pub fn trajectory(&self) -> Vec<(f64, f64)> {
        self.steps
            .iter()
            .map(|s| (s.target.dirichlet, s.reaction))
            .collect()
    }

    /// (load scale, reaction resultant) per completed step.
    pub fn load_trajectory(&self) -> Vec<(f64, f64)> {
        self.steps
            .iter()
            .map(|s| (s.target.load, s.reaction))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Linear solve
// ---------------------------------------------------------------------------

/// Direct sparse solve K x = rhs by LU with partial pivoting. The solution
/// satisfies ‖K x − rhs‖ ≤ 1e-10 ‖rhs‖ (one refinement pass if needed).
pub fn linear_solve(k: &SparseMat, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = k.n;
    debug_assert_eq!(rhs.len(), n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut triplets = Vec::with_capacity(k.nnz());
    for i in 0..n {
        for idx in k.row_ptr[i]..k.row_ptr[i + 1] {
            triplets.push(Triplet::new(i, k.col_idx[idx], k.values[idx]));
        }
    }
    let a = SparseColMat::try_new_from_triplets(n, n, &triplets).map_err(|_| {
        Error::SingularTangent {
            step: 0,
            iteration: 0,
        }
    })?;
    let lu = a.sp_lu().map_err(|_| Error::SingularTangent {
        step: 0,
        iteration: 0,
    })?;
    let b = faer::Mat::from_fn(n, 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    let mut sol: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();

    let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let residual = |s: &[f64]| -> Vec<f64> {
        let ks = k.mul_vec(s);
        (0..n).map(|i| rhs[i] - ks[i]).collect()
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut r = residual(&sol);
    if !(norm(&r) <= 1e-10 * rhs_norm) {
        // One step of iterative refinement (NaN also lands here).
        let rb = faer::Mat::from_fn(n, 1, |i, _| r[i]);
        let dx = lu.solve(&rb);
        for i in 0..n {
            sol[i] += dx[(i, 0)];
        }
        r = residual(&sol);
        if !(norm(&r) <= 1e-10 * rhs_norm) {
            return Err(Error::SingularTangent {
                step: 0,
                iteration: 0,
            });
        }
    }
    Ok(sol)
}

// ---------------------------------------------------------------------------
// Newton driver
// ---------------------------------------------------------------------------

pub struct Solver<'a> {
    pub problem: &'a Problem,
    pub cfg: NewtonConfig,
    assembler: Assembler,
    partition: DofPartition,
}

struct StepOutcome {
    trace: NewtonTrace,
    reaction: f64,
    energy: f64,
}

impl<'a> Solver<'a> {
    pub fn new(problem: &'a Problem, cfg: NewtonConfig) -> Self {
        let assembler = Assembler::new(&problem.mesh);
        let partition = problem.dofmap.partition();
        Solver {
            problem,
            cfg,
            assembler,
            partition,
        }
    }

    fn residual_free(&self, f_int: &[f64], load: f64) -> Vec<f64> {
        self.partition
            .free_dofs
            .iter()
            .map(|&dof| {
                let fe = self.problem.f_ext.as_ref().map_or(0.0, |f| f[dof]);
                f_int[dof] - load * fe
            })
            .collect()
    }

    fn reaction_sum(&self, f_int: &[f64], load: f64) -> f64 {
        self.problem
            .reaction_dofs
            .iter()
            .map(|&dof| {
                let fe = self.problem.f_ext.as_ref().map_or(0.0, |f| f[dof]);
                f_int[dof] - load * fe
            })
            .sum()
    }

    /// Extracts the free-dof block of the assembled tangent.
    fn condense(&self, k: &SparseMat) -> SparseMat {
        let nf = self.partition.n_free();
        let fidx = &self.partition.free_index;
        let mut row_ptr = Vec::with_capacity(nf + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &dof in &self.partition.free_dofs {
            for idx in k.row_ptr[dof]..k.row_ptr[dof + 1] {
                let col = k.col_idx[idx];
                if fidx[col] != usize::MAX {
                    col_idx.push(fidx[col]);
                    values.push(k.values[idx]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMat {
            n: nf,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// One Newton solve toward `target`. Applies the Dirichlet values, then
    /// iterates full updates on the free dofs.
    fn newton_to_target(
        &self,
        u: &mut [f64],
        target: LoadStep,
        step_idx: usize,
    ) -> Result<StepOutcome> {
        for &(dof, pattern) in &self.partition.constrained {
            u[dof] = pattern * target.dirichlet;
        }
        let mut history: Vec<f64> = Vec::new();
        loop {
            let asm = self
                .assembler
                .assemble(&self.problem.mesh, &self.problem.material, u)?;
            let r = self.residual_free(&asm.f_int, target.load);
            let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !rnorm.is_finite() {
                return Err(Error::NonConvergence {
                    step: step_idx,
                    iterations: history.len(),
                    residual: rnorm,
                });
            }
            history.push(rnorm);
            let r0 = history[0];
            if rnorm <= self.cfg.tol_res_abs.max(self.cfg.tol_res_rel * r0) {
                return Ok(StepOutcome {
                    trace: NewtonTrace {
                        dirichlet: target.dirichlet,
                        load: target.load,
                        residual_history: history,
                    },
                    reaction: self.reaction_sum(&asm.f_int, target.load),
                    energy: asm.energy,
                });
            }
            if history.len() > self.cfg.max_iter {
                return Err(Error::NonConvergence {
                    step: step_idx,
                    iterations: history.len() - 1,
                    residual: rnorm,
                });
            }
            let kff = self.condense(&asm.k);
            let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
            let du = linear_solve(&kff, &neg_r).map_err(|e| match e {
                Error::SingularTangent { .. } => Error::SingularTangent {
                    step: step_idx,
                    iteration: history.len(),
                },
                other => other,
            })?;
            let mut du_max: f64 = 0.0;
            for (i, &dof) in self.partition.free_dofs.iter().enumerate() {
                u[dof] += du[i];
                du_max = du_max.max(du[i].abs());
            }
            if du_max < self.cfg.tol_increment {
                // Displacement stagnation: accept on the next residual pass.
                continue;
            }
        }
    }

    /// One program step with bisection on failure.
    pub fn solve_step(
        &self,
        u: &mut Vec<f64>,
        from: LoadStep,
        target: LoadStep,
        step_idx: usize,
    ) -> Result<StepReport> {
        let mut reached = from;
        let mut cuts = 0usize;
        let mut frac = 1.0f64;
        let mut traces = Vec::new();
        let mut last: Option<StepOutcome> = None;
        while reached != target {
            let sub = LoadStep {
                dirichlet: reached.dirichlet + frac * (target.dirichlet - reached.dirichlet),
                load: reached.load + frac * (target.load - reached.load),
            };
            let backup = u.clone();
            match self.newton_to_target(u, sub, step_idx) {
                Ok(out) => {
                    traces.push(out.trace.clone());
                    reached = sub;
                    last = Some(out);
                    if frac >= 1.0 {
                        break;
                    }
                }
                Err(e) => {
                    *u = backup;
                    cuts += 1;
                    if cuts > self.cfg.max_step_cuts {
                        return Err(e);
                    }
                    frac *= 0.5;
                }
            }
        }
        let out = last.expect("at least one sub-step");
        Ok(StepReport {
            target,
            cuts,
            traces,
            reaction: out.reaction,
            energy: out.energy,
        })
    }

    /// Runs a whole program from `u0` (zeros if `None`). Steps are applied
    /// sequentially; the converged state of each step seeds the next. An
    /// exhausted cut budget aborts the run and keeps the partial trajectory.
    pub fn run_program(
        &self,
        program: &LoadProgram,
        u0: Option<Vec<f64>>,
    ) -> (Vec<f64>, SolveReport) {
        let start = Instant::now();
        let mut u = u0.unwrap_or_else(|| vec![0.0; self.problem.mesh.n_dofs()]);
        let mut report = SolveReport {
            description: program.description.clone(),
            steps: Vec::new(),
            aborted: false,
            abort_reason: None,
            wall: Duration::ZERO,
        };
        let mut from = LoadStep {
            dirichlet: 0.0,
            load: 0.0,
        };
        for (i, &target) in program.steps.iter().enumerate() {
            match self.solve_step(&mut u, from, target, i) {
                Ok(step) => {
                    report.steps.push(step);
                    from = target;
                }
                Err(e) => {
                    report.aborted = true;
                    report.abort_reason = Some(e.to_string());
                    break;
                }
            }
        }
        report.wall = start.elapsed();
        (u, report)
    }
}
