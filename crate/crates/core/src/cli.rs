//! Command-line front end: benchmark runs, material-point curves,
//! calibration, and the verification suite.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, CaseId, CurveRecord};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::material::{MaterialParams, Model};
use crate::output;
use crate::verify;

#[derive(Parser)]
#[command(
    name = "hencky-fem",
    about = "Finite-strain hyperelastic FE solver in principal logarithmic stretches",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an FE benchmark case (writes CSV curve, VTK field and report.txt)
    Run {
        /// Config file (flat key = value format); flags override its values
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Material-point uniaxial stress-stretch curves
    Mpoint {
        /// Model (exp-hencky, quad-hencky, neo-hooke, gent); default all four
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Bulk modulus; defaults to 4.7 mu
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        k: f64,
        /// Defaults to 3
        #[arg(long)]
        khat: Option<f64>,
        #[arg(long, default_value_t = 5.0)]
        jm: f64,
        #[arg(long, default_value_t = 0.25)]
        lambda_min: f64,
        #[arg(long, default_value_t = 4.5)]
        lambda_max: f64,
        /// Number of stretch increments
        #[arg(long, default_value_t = 85)]
        steps: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Calibrate (mu, k) on uniaxial (lambda, stress) data against the
    /// incompressible formula
    Fit {
        /// CSV file with two columns: stretch, nominal stress (MPa)
        csv: PathBuf,
    },
    /// Run the finite-difference/oracle invariant suite
    Verify {
        /// Random states per check
        #[arg(long, default_value_t = 1000)]
        states: usize,
    },
    /// Print element/node/dof counts for a case
    MeshInfo {
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    khat: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    jm: Option<f64>,
    #[arg(long)]
    mesh_density: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    step: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit codes: 0 success, 1 config error, 2 nonconvergence/aborted run,
/// 3 verification failure.
pub fn run(args: &[String]) -> i32 {
    setup_threads();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::Io { .. }
        | Error::Incompressibility(_) => 1,
        _ => 2,
    }
}

/// Caps rayon (and thereby the sparse solver) to HENCKY_FEM_THREADS;
/// 1 selects the bit-reproducible sequential mode.
fn setup_threads() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| {
        if let Ok(v) = std::env::var("HENCKY_FEM_THREADS") {
            if let Ok(n) = v.parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                    if n == 1 {
                        faer::set_global_parallelism(faer::Par::Seq);
                    }
                }
            }
        }
    });
}

fn build_config(config: Option<PathBuf>, ov: &Overrides) -> Result<RunConfig> {
    let mut cfg = match &config {
        Some(path) => RunConfig::parse_file(path)?,
        None => {
            let case = match &ov.case {
                Some(c) => CaseId::parse(c)?,
                None => CaseId::UniaxialCube,
            };
            let model = match &ov.model {
                Some(m) => Model::parse(m)?,
                None => Model::ExpHencky,
            };
            RunConfig::defaults(case, model)?
        }
    };
    if let Some(c) = &ov.case {
        cfg.apply("case", c)?;
    }
    if let Some(m) = &ov.model {
        cfg.apply("model", m)?;
    }
    if let Some(v) = ov.mu {
        cfg.mu = v;
    }
    if let Some(v) = ov.kappa {
        cfg.kappa = v;
    }
    if let Some(v) = ov.k {
        cfg.k = v;
    }
    if let Some(v) = ov.khat {
        cfg.khat = v;
    }
    if let Some(v) = ov.jm {
        cfg.jm = v;
    }
    if let Some(v) = ov.mesh_density {
        cfg.mesh_density = v;
    }
    if let Some(v) = ov.steps {
        cfg.steps = v;
    }
    if let Some(v) = ov.step {
        cfg.step = v;
    }
    if let Some(v) = &ov.out {
        cfg.out = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Command::Run { config, overrides } => cmd_run(config, &overrides),
        Command::Mpoint {
            model,
            mu,
            kappa,
            k,
            khat,
            jm,
            lambda_min,
            lambda_max,
            steps,
            out,
        } => cmd_mpoint(
            model, mu, kappa, k, khat, jm, lambda_min, lambda_max, steps, out,
        ),
        Command::Fit { csv } => cmd_fit(&csv),
        Command::Verify { states } => Ok(cmd_verify(states)),
        Command::MeshInfo { config, overrides } => {
            let cfg = build_config(config, &overrides)?;
            println!("{}", mesh_info_string(&cfg)?);
            Ok(0)
        }
    }
}

/// `elements=… nodes=… dofs=…` for the configured case.
pub fn mesh_info_string(cfg: &RunConfig) -> Result<String> {
    let case = bench::generate_case(&cfg.to_case_spec()?)?;
    Ok(format!(
        "elements={} nodes={} dofs={}",
        case.mesh.n_elems(),
        case.mesh.n_nodes(),
        case.mesh.n_dofs()
    ))
}

fn cmd_run(config: Option<PathBuf>, overrides: &Overrides) -> Result<i32> {
    let cfg = build_config(config, overrides)?;
    if cfg.case == CaseId::Mpoint {
        return Err(Error::Config(
            "the material-point driver has its own subcommand: mpoint".into(),
        ));
    }
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let spec = cfg.to_case_spec()?;
    println!(
        "running {} ({}, mesh density {}, {} steps of {})",
        cfg.case.name(),
        cfg.model.name(),
        cfg.mesh_density,
        cfg.steps,
        cfg.step
    );
    let run = bench::run_case(&spec, cfg.newton_config())?;
    for (i, s) in run.report.steps.iter().enumerate() {
        println!(
            "step {:3}: dirichlet {:9.4} load {:9.3} iters {:2} cuts {} reaction {:13.6e}",
            i + 1,
            s.target.dirichlet,
            s.target.load,
            s.iterations(),
            s.cuts,
            s.reaction
        );
    }

    let stem = cfg.file_stem();
    let displacement_controlled = run
        .case
        .program
        .steps
        .last()
        .map(|s| s.dirichlet != 0.0)
        .unwrap_or(true);
    let curve = bench::reaction_curve(&run.report, &stem, displacement_controlled);
    output::emit_curves(&cfg.out.join(format!("{stem}.csv")), &[curve])?;
    output::emit_fields(
        &cfg.out.join(format!("{stem}.vtk")),
        &run.case.mesh,
        &run.u,
        &stem,
    )?;
    let header = format!(
        "hencky-fem run: {}\nconfig:\n{}",
        stem,
        cfg.to_config_string()
    );
    output::write_report(&cfg.out.join("report.txt"), &header, &run.report)?;

    if run.report.aborted {
        eprintln!(
            "run aborted after {} steps: {}",
            run.report.steps.len(),
            run.report.abort_reason.as_deref().unwrap_or("unknown")
        );
        return Ok(2);
    }
    println!("wrote {}/{{{stem}.csv,{stem}.vtk,report.txt}}", cfg.out.display());
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_mpoint(
    model: Option<String>,
    mu: f64,
    kappa: Option<f64>,
    k: f64,
    khat: Option<f64>,
    jm: f64,
    lambda_min: f64,
    lambda_max: f64,
    steps: usize,
    out: PathBuf,
) -> Result<i32> {
    if !(lambda_min > 0.0) || lambda_max <= lambda_min || steps == 0 {
        return Err(Error::Config(format!(
            "bad stretch range [{lambda_min}, {lambda_max}] / steps {steps}"
        )));
    }
    let kappa = kappa.unwrap_or(4.7 * mu);
    let khat = khat.unwrap_or(3.0);
    let models: Vec<Model> = match &model {
        Some(m) => vec![Model::parse(m)?],
        None => vec![
            Model::ExpHencky,
            Model::QuadHencky,
            Model::NeoHooke,
            Model::Gent,
        ],
    };
    let lambdas: Vec<f64> = (0..=steps)
        .map(|i| lambda_min + (lambda_max - lambda_min) * i as f64 / steps as f64)
        .collect();
    let mut records: Vec<CurveRecord> = Vec::new();
    for m in models {
        let p = match m {
            Model::ExpHencky => MaterialParams::exp_hencky(3, mu, kappa, k, khat)?,
            Model::QuadHencky => MaterialParams::quad_hencky(3, mu, kappa)?,
            Model::NeoHooke => MaterialParams::neo_hooke(mu, kappa)?,
            Model::Gent => MaterialParams::gent(mu, kappa, jm)?,
        };
        let rec = bench::material_point_uniaxial(&p, &lambdas);
        println!(
            "{}: {} of {} stretch points admissible",
            m.name(),
            rec.abscissa.len(),
            lambdas.len()
        );
        records.push(rec);
    }
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let name = format!(
        "mpoint_{}_{}.csv",
        model.as_deref().unwrap_or("all"),
        steps
    );
    let path = out.join(name);
    output::emit_curves(&path, &records)?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_fit(csv: &PathBuf) -> Result<i32> {
    let text = std::fs::read_to_string(csv).map_err(|e| Error::io(csv, e))?;
    let mut data = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        if fields.len() < 2 {
            continue;
        }
        match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
            (Ok(l), Ok(s)) => data.push((l, s)),
            _ => continue, // header line
        }
    }
    let (mu, k, ss) = bench::fit_uniaxial(&data)?;
    println!("fitted {} points: mu = {mu:.9} MPa, k = {k:.9}, sum_sq = {ss:.6e}", data.len());
    Ok(0)
}

fn cmd_verify(states: usize) -> i32 {
    let checks = verify::run_all(states, 0xacce97);
    let mut failed = 0;
    for c in &checks {
        println!(
            "{} {} — {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        if !c.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("verification: all {} checks passed", checks.len());
        0
    } else {
        println!("verification: {failed} of {} checks FAILED", checks.len());
        3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(args: &[&str]) -> Vec<String> {
        std::iter::once("hencky-fem")
            .chain(args.iter().copied())
            .map(String::from)
            .collect()
    }

    #[test]
    fn mesh_info_matches_quoted_counts() {
        let cfg = RunConfig::defaults(CaseId::UniaxialCube, Model::ExpHencky).unwrap();
        assert_eq!(
            mesh_info_string(&cfg).unwrap(),
            "elements=64 nodes=125 dofs=375"
        );
        let cfg = RunConfig::defaults(CaseId::Footing3d, Model::ExpHencky).unwrap();
        assert_eq!(
            mesh_info_string(&cfg).unwrap(),
            "elements=4096 nodes=4913 dofs=14739"
        );
    }

    #[test]
    fn mesh_info_subcommand_exit_code() {
        assert_eq!(run(&argv(&["mesh-info", "--case", "uniaxial_cube"])), 0);
    }

    #[test]
    fn invalid_parameter_exits_one() {
        assert_eq!(run(&argv(&["run", "--case", "cube", "--mu", "-1"])), 1);
        assert_eq!(run(&argv(&["mesh-info", "--case", "nosuch"])), 1);
    }

    #[test]
    fn fit_subcommand_runs_from_file() {
        let dir = std::env::temp_dir().join("hencky_fem_cli_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("uniaxial.csv");
        let mut text = String::from("stretch,stress\n");
        for l in [0.5f64, 0.8, 1.2, 1.5, 2.0, 2.5, 3.0] {
            text.push_str(&format!(
                "{l},{}\n",
                bench::uniaxial_incompressible_stress(0.612, 1.173, l)
            ));
        }
        std::fs::write(&path, text).unwrap();
        assert_eq!(run(&argv(&["fit", path.to_str().unwrap()])), 0);
        assert_eq!(run(&argv(&["fit", "/no/such/file.csv"])), 1);
    }
}
