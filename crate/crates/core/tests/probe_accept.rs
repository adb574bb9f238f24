use hencky_fem::bench::{default_material, run_case, solve_lateral, CaseId, CaseSpec};
use hencky_fem::material::{MaterialParams, Model};
use hencky_fem::solver::NewtonConfig;

#[test]
fn probe() {
    // solve_lateral at criterion-7 checkpoints
    let p = default_material(Model::ExpHencky, 3, 1.0).unwrap();
    for lambda in [0.25, 0.5, 2.0, 3.0, 4.5] {
        match solve_lateral(&p, lambda, 0.0) {
            Ok((x, s)) => println!("eH lambda {lambda}: x1 = {x:.6}, S13 = {s:.6}"),
            Err(e) => println!("eH lambda {lambda}: ERR {e}"),
        }
    }
    // criterion 8 params
    let (mu, k) = (0.612, 1.173);
    let p8 = MaterialParams::exp_hencky(3, mu, 1e4 * mu, k, 1.5 * k).unwrap();
    let mut x = 0.0;
    for i in 0..=25 {
        let lambda = 0.5 + 2.5 * i as f64 / 25.0;
        if (lambda - 1.0).abs() < 1e-9 { continue; }
        match solve_lateral(&p8, lambda, x) {
            Ok((xr, s)) => { x = xr; if i % 5 == 0 { println!("ic lambda {lambda:.2}: x = {xr:.6}, S = {s:.4}"); } }
            Err(e) => { println!("ic lambda {lambda:.2}: ERR {e}"); break; }
        }
    }
    // criterion 5: per-step iterations, tension run
    let mut spec = CaseSpec::new(CaseId::UniaxialCube, Model::ExpHencky).unwrap();
    spec.steps = 70;
    spec.step = 1.0;
    let run = run_case(&spec, NewtonConfig::default()).unwrap();
    for (i, s) in run.report.steps.iter().enumerate() {
        if s.iterations() > 5 || s.cuts > 0 {
            println!("T step {}: iters {} cuts {} traces {}", i + 1, s.iterations(), s.cuts, s.traces.len());
            for t in &s.traces {
                println!("   history: {:?}", t.residual_history.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>());
            }
        }
    }
    let mut spec = CaseSpec::new(CaseId::UniaxialCube, Model::ExpHencky).unwrap();
    spec.steps = 15;
    spec.step = -1.0;
    let run = run_case(&spec, NewtonConfig::default()).unwrap();
    for (i, s) in run.report.steps.iter().enumerate() {
        if s.iterations() > 5 || s.cuts > 0 {
            println!("C step {}: iters {} cuts {} traces {}", i + 1, s.iterations(), s.cuts, s.traces.len());
            for t in &s.traces {
                println!("   history: {:?}", t.residual_history.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>());
            }
        }
    }
}
