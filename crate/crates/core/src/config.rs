//! Run configuration: a flat key/value text format plus programmatic
//! construction.
//!
//! Grammar: one `key = value` pair per line; blank lines and lines starting
//! with `#` are ignored; keys are lowercase with underscores; values are
//! parsed by type (string, integer, float). Unknown keys are errors. The
//! same grammar is emitted by [`RunConfig::to_config_string`], so
//! parse → serialize → parse is idempotent.

use std::path::{Path, PathBuf};

use crate::bench::{CaseId, CaseSpec};
use crate::error::{Error, Result};
use crate::material::{MaterialParams, Model};
use crate::solver::NewtonConfig;

/// Everything a `run` or `mesh-info` invocation needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: CaseId,
    pub model: Model,
    pub mu: f64,
    pub kappa: f64,
    pub k: f64,
    pub khat: f64,
    pub jm: f64,
    pub mesh_density: usize,
    pub steps: usize,
    pub step: f64,
    pub out: PathBuf,
    pub tol_res_abs: f64,
    pub tol_res_rel: f64,
    pub max_iter: usize,
    pub max_step_cuts: usize,
}

impl RunConfig {
    /// Defaults for a case/model pair (benchmark parameter set at μ = 1 MPa).
    pub fn defaults(case: CaseId, model: Model) -> Result<Self> {
        let spec = CaseSpec::new(case, model)?;
        let newton = NewtonConfig::default();
        Ok(RunConfig {
            case,
            model,
            mu: spec.material.mu,
            kappa: spec.material.kappa,
            k: spec.material.k,
            khat: spec.material.khat,
            jm: spec.material.jm,
            mesh_density: spec.density,
            steps: spec.steps,
            step: spec.step,
            out: PathBuf::from("out"),
            tol_res_abs: newton.tol_res_abs,
            tol_res_rel: newton.tol_res_rel,
            max_iter: newton.max_iter,
            max_step_cuts: newton.max_step_cuts,
        })
    }

    pub fn material(&self) -> Result<MaterialParams> {
        let dim = self.case.dim();
        let p = match self.model {
            Model::ExpHencky => {
                MaterialParams::exp_hencky(dim, self.mu, self.kappa, self.k, self.khat)?
            }
            Model::QuadHencky => MaterialParams::quad_hencky(dim, self.mu, self.kappa)?,
            Model::NeoHooke => MaterialParams::neo_hooke(self.mu, self.kappa)?,
            Model::Gent => MaterialParams::gent(self.mu, self.kappa, self.jm)?,
        };
        Ok(p)
    }

    pub fn to_case_spec(&self) -> Result<CaseSpec> {
        let spec = CaseSpec {
            case: self.case,
            material: self.material()?,
            density: self.mesh_density,
            steps: self.steps,
            step: self.step,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn newton_config(&self) -> NewtonConfig {
        NewtonConfig {
            tol_res_abs: self.tol_res_abs,
            tol_res_rel: self.tol_res_rel,
            max_iter: self.max_iter,
            max_step_cuts: self.max_step_cuts,
            ..NewtonConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.to_case_spec().map(|_| ())
    }

    /// Parses the flat key/value format. Defaults come from the `case` and
    /// `model` keys (looked up first), then every line is applied in order.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut case = CaseId::UniaxialCube;
        let mut model = Model::ExpHencky;
        for (key, value) in kv_lines(text)? {
            match key.as_str() {
                "case" => case = CaseId::parse(&value)?,
                "model" => model = Model::parse(&value)?,
                _ => {}
            }
        }
        let mut cfg = RunConfig::defaults(case, model)?;
        for (key, value) in kv_lines(text)? {
            cfg.apply(&key, &value)?;
        }
        Ok(cfg)
    }

    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text)
    }

    /// Applies one key/value pair (also used for flag overrides).
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let fnum = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad number '{v}' for key '{key}'")))
        };
        let unum = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad integer '{v}' for key '{key}'")))
        };
        match key {
            "case" => self.case = CaseId::parse(value)?,
            "model" => self.model = Model::parse(value)?,
            "mu" => self.mu = fnum(value)?,
            "kappa" => self.kappa = fnum(value)?,
            "k" => self.k = fnum(value)?,
            "khat" => self.khat = fnum(value)?,
            "jm" => self.jm = fnum(value)?,
            "mesh_density" => self.mesh_density = unum(value)?,
            "steps" => self.steps = unum(value)?,
            "step" => self.step = fnum(value)?,
            "out" => self.out = PathBuf::from(value),
            "tol_res_abs" => self.tol_res_abs = fnum(value)?,
            "tol_res_rel" => self.tol_res_rel = fnum(value)?,
            "max_iter" => self.max_iter = unum(value)?,
            "max_step_cuts" => self.max_step_cuts = unum(value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn to_config_string(&self) -> String {
        format!(
            "case = {}\nmodel = {}\nmu = {}\nkappa = {}\nk = {}\nkhat = {}\njm = {}\n\
             mesh_density = {}\nsteps = {}\nstep = {}\nout = {}\n\
             tol_res_abs = {}\ntol_res_rel = {}\nmax_iter = {}\nmax_step_cuts = {}\n",
            self.case.name(),
            self.model.name(),
            self.mu,
            self.kappa,
            self.k,
            self.khat,
            self.jm,
            self.mesh_density,
            self.steps,
            self.step,
            self.out.display(),
            self.tol_res_abs,
            self.tol_res_rel,
            self.max_iter,
            self.max_step_cuts,
        )
    }

    /// Output file stem `<case>_<model>_<mesh>`.
    pub fn file_stem(&self) -> String {
        format!(
            "{}_{}_{}",
            self.case.name(),
            self.model.name(),
            self.mesh_density
        )
    }
}

fn kv_lines(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}
