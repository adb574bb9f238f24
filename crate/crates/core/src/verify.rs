//! Finite-difference and cross-route verification of the constitutive and
//! element layers.
//!
//! Every analytic quantity with an independent route gets checked against it:
//! principal stresses against finite differences of the energy, second
//! derivatives against finite differences of the stresses, the mixed modulus
//! against finite differences of S₁(F), the spatial modulus against the
//! push-forward of the material one, χ's divided difference against its
//! analytic limit and the model-specific closed forms, and the element
//! stiffness against finite differences of the internal force. The `verify`
//! CLI subcommand runs the whole suite; the acceptance tests assert it.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::material::{
    self, chi, chi_limit, d2w, energy, first_pk_stress, material_tangent, mixed_tangent,
    principal_tau, spatial_tangent_and_stress, MaterialParams, Model, PrincipalState,
};
use crate::tensor::{voigt_pairs, voigt_size, voigt_unpack, Matrix, SymTensor};

/// Outcome of one verification check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from_max_err(name: &str, max_err: f64, tol: f64) -> Self {
        Check {
            name: name.to_string(),
            passed: max_err <= tol,
            detail: format!("max rel err {max_err:.3e} (tol {tol:.1e})"),
        }
    }
}

/// The four models with the benchmark parameter set (κ/μ = 4.7, k = 2,
/// k̂ = 3, J_m = 5) at μ = 1 MPa.
pub fn benchmark_models() -> Vec<MaterialParams> {
    vec![
        MaterialParams::exp_hencky(3, 1.0, 4.7, 2.0, 3.0).unwrap(),
        MaterialParams::quad_hencky(3, 1.0, 4.7).unwrap(),
        MaterialParams::neo_hooke(1.0, 4.7).unwrap(),
        MaterialParams::gent(1.0, 4.7, 5.0).unwrap(),
    ]
}

/// Uniform random rotation (2D from an angle, 3D from a quaternion).
pub fn random_rotation(rng: &mut impl Rng, dim: usize) -> Matrix {
    if dim == 2 {
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (s, c) = a.sin_cos();
        Matrix::from_rows(2, [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 0.0]])
    } else {
        let u1: f64 = rng.gen_range(0.0..1.0);
        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let u3: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
        let q = [a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos()];
        let (x, y, z, w) = (q[0], q[1], q[2], q[3]);
        Matrix::from_rows(
            3,
            [
                [
                    1.0 - 2.0 * (y * y + z * z),
                    2.0 * (x * y - z * w),
                    2.0 * (x * z + y * w),
                ],
                [
                    2.0 * (x * y + z * w),
                    1.0 - 2.0 * (x * x + z * z),
                    2.0 * (y * z - x * w),
                ],
                [
                    2.0 * (x * z - y * w),
                    2.0 * (y * z + x * w),
                    1.0 - 2.0 * (x * x + y * y),
                ],
            ],
        )
    }
}

/// Random stretches in [0.3, 4], resampled until the state is admissible for
/// the given model (Gent needs margin to its locking limit).
pub fn random_stretches(rng: &mut impl Rng, p: &MaterialParams) -> [f64; 3] {
    loop {
        let mut l = [1.0; 3];
        for li in l.iter_mut().take(p.dim) {
            *li = rng.gen_range(0.3..4.0);
        }
        if p.model == Model::Gent {
            let s = PrincipalState::from_stretches(p.dim, &l[..p.dim]).unwrap();
            let i1b: f64 = (0..p.dim).map(|i| (2.0 * s.loglam_bar[i]).exp()).sum();
            if i1b - 3.0 >= 0.85 * p.jm {
                continue;
            }
        }
        return l;
    }
}

/// Random deformation gradient F = Q₁ diag(λ) Q₂ᵀ with admissible stretches.
pub fn random_f(rng: &mut impl Rng, p: &MaterialParams) -> Matrix {
    let l = random_stretches(rng, p);
    let q1 = random_rotation(rng, p.dim);
    let q2 = random_rotation(rng, p.dim);
    let mut d = Matrix::zero(p.dim);
    for i in 0..p.dim {
        d.m[i][i] = l[i];
    }
    q1.mul(&d).mul(&q2.transpose())
}

fn state_with_loglam(dim: usize, loglam: &[f64; 3]) -> PrincipalState {
    let mut lam = [1.0; 3];
    for i in 0..dim {
        lam[i] = loglam[i].exp();
    }
    PrincipalState::from_stretches(dim, &lam[..dim]).unwrap()
}

// ---------------------------------------------------------------------------
// Tangent consistency (FD oracles)
// ---------------------------------------------------------------------------

/// τ_k against central finite differences of W in log λ_k (h = 1e-6).
pub fn check_tau_vs_energy_fd(p: &MaterialParams, n_states: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let mut max_err: f64 = 0.0;
    for _ in 0..n_states {
        let l = random_stretches(&mut rng, p);
        let s = PrincipalState::from_stretches(p.dim, &l[..p.dim]).unwrap();
        let st = principal_tau(p, &s).unwrap();
        let scale = (0..p.dim).map(|k| st.tau[k].abs()).fold(0.0, f64::max);
        for k in 0..p.dim {
            let mut lp = s.loglam;
            lp[k] += h;
            let mut lm = s.loglam;
            lm[k] -= h;
            let wp = energy(p, &state_with_loglam(p.dim, &lp)).unwrap();
            let wm = energy(p, &state_with_loglam(p.dim, &lm)).unwrap();
            let fd = (wp - wm) / (2.0 * h);
            max_err = max_err.max((st.tau[k] - fd).abs() / scale.max(1e-8));
        }
    }
    Check::from_max_err(
        &format!("{} ({}d): tau vs FD of W", p.model.name(), p.dim),
        max_err,
        1e-6,
    )
}

/// ∂²W/∂(logλ)² against central finite differences of τ (h = 1e-5).
pub fn check_d2w_vs_tau_fd(p: &MaterialParams, n_states: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut max_err: f64 = 0.0;
    for _ in 0..n_states {
        let l = random_stretches(&mut rng, p);
        let s = PrincipalState::from_stretches(p.dim, &l[..p.dim]).unwrap();
        let d2 = d2w(p, &s).unwrap();
        let scale = (0..p.dim)
            .flat_map(|i| (0..p.dim).map(move |j| (i, j)))
            .map(|(i, j)| d2[i][j].abs())
            .fold(0.0, f64::max);
        for j in 0..p.dim {
            let mut lp = s.loglam;
            lp[j] += h;
            let mut lm = s.loglam;
            lm[j] -= h;
            let tp = principal_tau(p, &state_with_loglam(p.dim, &lp)).unwrap();
            let tm = principal_tau(p, &state_with_loglam(p.dim, &lm)).unwrap();
            for i in 0..p.dim {
                let fd = (tp.tau[i] - tm.tau[i]) / (2.0 * h);
                max_err = max_err.max((d2[i][j] - fd).abs() / scale.max(1e-8));
            }
        }
    }
    Check::from_max_err(
        &format!("{} ({}d): d2W vs FD of tau", p.model.name(), p.dim),
        max_err,
        5e-4,
    )
}

/// Mixed modulus action C̄ : ΔF against central finite differences of S₁(F).
pub fn check_mixed_vs_s1_fd(p: &MaterialParams, n_states: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let mut max_err: f64 = 0.0;
    for _ in 0..n_states {
        let f = random_f(&mut rng, p);
        let cbar = match mixed_tangent(p, &f) {
            Ok(c) => c,
            Err(_) => continue,
        };
        // Random unit direction in F-space.
        let mut df = Matrix::zero(p.dim);
        let mut norm = 0.0;
        for i in 0..p.dim {
            for j in 0..p.dim {
                let v: f64 = rng.gen_range(-1.0..1.0);
                df.m[i][j] = v;
                norm += v * v;
            }
        }
        let norm = norm.sqrt();
        for i in 0..p.dim {
            for j in 0..p.dim {
                df.m[i][j] /= norm;
            }
        }
        let mut fp = f;
        let mut fm = f;
        for i in 0..p.dim {
            for j in 0..p.dim {
                fp.m[i][j] += h * df.m[i][j];
                fm.m[i][j] -= h * df.m[i][j];
            }
        }
        let (s1p, s1m) = match (first_pk_stress(p, &fp), first_pk_stress(p, &fm)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        let action = cbar.contract_mat(&df);
        let mut diff = 0.0;
        let mut scale = 0.0;
        for i in 0..p.dim {
            for j in 0..p.dim {
                let fd = (s1p.m[i][j] - s1m.m[i][j]) / (2.0 * h);
                diff += (action.m[i][j] - fd) * (action.m[i][j] - fd);
                scale += fd * fd;
            }
        }
        max_err = max_err.max(diff.sqrt() / scale.sqrt().max(1e-8));
    }
    Check::from_max_err(
        &format!("{} ({}d): mixed modulus vs FD of S1", p.model.name(), p.dim),
        max_err,
        5e-4,
    )
}

/// Spatial modulus against the push-forward F F Ĉ Fᵀ Fᵀ of the material one.
pub fn check_spatial_vs_pushforward(p: &MaterialParams, n_states: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_err: f64 = 0.0;
    for _ in 0..n_states {
        let f = random_f(&mut rng, p);
        let (ctilde, chat) = match (
            spatial_tangent_and_stress(p, &f.b_left()),
            material_tangent(p, &f.c_right()),
        ) {
            (Ok(a), Ok(b)) => (a.c_spatial, b),
            _ => continue,
        };
        let chat_full = voigt_unpack(&chat);
        let dim = p.dim;
        let pairs = voigt_pairs(dim);
        let mut diff = 0.0;
        let mut scale = 0.0;
        for &(i, j) in pairs {
            for &(k, l) in pairs {
                let mut pf = 0.0;
                for ii in 0..dim {
                    for jj in 0..dim {
                        for kk in 0..dim {
                            for ll in 0..dim {
                                pf += f.m[i][ii]
                                    * f.m[j][jj]
                                    * f.m[k][kk]
                                    * f.m[l][ll]
                                    * chat_full[ii][jj][kk][ll];
                            }
                        }
                    }
                }
                let d = ctilde.comp(i, j, k, l) - pf;
                diff += d * d;
                scale += pf * pf;
            }
        }
        max_err = max_err.max(diff.sqrt() / scale.sqrt().max(1e-300));
    }
    Check::from_max_err(
        &format!(
            "{} ({}d): spatial vs push-forward of material",
            p.model.name(),
            p.dim
        ),
        max_err,
        1e-12,
    )
}

/// Voigt matrix of the spatial modulus is symmetric (major symmetry).
pub fn check_spatial_major_symmetry(p: &MaterialParams, n_states: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_err: f64 = 0.0;
    for _ in 0..n_states {
        let f = random_f(&mut rng, p);
        let c = match spatial_tangent_and_stress(p, &f.b_left()) {
            Ok(o) => o.c_spatial,
            Err(_) => continue,
        };
        let n = voigt_size(p.dim);
        let scale = c.frob_norm();
        for a in 0..n {
            for b in 0..n {
                max_err = max_err.max((c.m[a][b] - c.m[b][a]).abs() / scale.max(1e-300));
            }
        }
    }
    Check::from_max_err(
        &format!("{}: spatial modulus major symmetry", p.model.name()),
        max_err,
        1e-12,
    )
}

// ---------------------------------------------------------------------------
// χ: equal-eigenvalue branch
// ---------------------------------------------------------------------------

/// Divided difference at λ_l = λ_k(1+ε) converges to the analytic limit
/// with error O(ε).
pub fn check_chi_epsilon_sweep(p: &MaterialParams, n_states: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passed = true;
    let mut detail = String::new();
    for &eps in &[1e-5, 1e-6, 1e-7] {
        let mut max_err: f64 = 0.0;
        for _ in 0..n_states {
            let l = random_stretches(&mut rng, p);
            let mut le = l;
            le[1] = le[0];
            let s_eq = PrincipalState::from_stretches(p.dim, &le[..p.dim]).unwrap();
            let lim = match chi_limit(p, &s_eq, 0, 1) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let mut ln = le;
            ln[1] = ln[0] * (1.0 + eps);
            let s_near = PrincipalState::from_stretches(p.dim, &ln[..p.dim]).unwrap();
            let dd = match chi(p, &s_near, 0, 1) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let st = principal_tau(p, &s_eq).unwrap();
            let scale = lim
                .abs()
                .max((0..p.dim).map(|k| st.tau[k].abs()).fold(0.0, f64::max))
                .max(p.mu);
            max_err = max_err.max((dd - lim).abs() / scale);
        }
        // O(ε) convergence with a generous constant.
        if max_err > 1e3 * eps {
            passed = false;
        }
        detail.push_str(&format!("eps {eps:.0e}: err {max_err:.3e}; "));
    }
    Check {
        name: format!("{}: chi divided difference is O(eps)", p.model.name()),
        passed,
        detail,
    }
}

/// The model-specific closed forms match the generic limit at equal-stretch
/// states: μ e^(kΣ(logλ̄)²) − τ_k (both displayed lines) for ExpHencky and
/// μ − τ_k for QuadHencky.
pub fn check_chi_closed_forms(n_states: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eh = MaterialParams::exp_hencky(3, 1.0, 4.7, 2.0, 3.0).unwrap();
    let qh = MaterialParams::quad_hencky(3, 1.0, 4.7).unwrap();
    let mut err_eh_a: f64 = 0.0;
    let mut err_eh_b: f64 = 0.0;
    let mut err_qh: f64 = 0.0;
    for _ in 0..n_states {
        let l0: f64 = rng.gen_range(0.3..4.0);
        let l2: f64 = rng.gen_range(0.3..4.0);
        let s = PrincipalState::from_stretches(3, &[l0, l0, l2]).unwrap();

        let lim = chi_limit(&eh, &s, 0, 1).unwrap();
        let st = principal_tau(&eh, &s).unwrap();
        let ssum: f64 = (0..3).map(|i| s.loglam_bar[i] * s.loglam_bar[i]).sum();
        let t: f64 = s.loglam.iter().sum();
        let e1 = (eh.k * ssum).exp();
        let e2 = (eh.khat * t * t).exp();
        // First displayed line: μ e1 − τ_k.
        let a = eh.mu * e1 - st.tau[0];
        // Second displayed line: μ e1 (1 − 2 logλ̄_k) − κ e2 Σ logλ.
        let b = eh.mu * e1 * (1.0 - 2.0 * s.loglam_bar[0]) - eh.kappa * e2 * t;
        let scale = lim.abs().max(st.tau[0].abs()).max(eh.mu);
        err_eh_a = err_eh_a.max((a - lim).abs() / scale);
        err_eh_b = err_eh_b.max((b - lim).abs() / scale);

        let limq = chi_limit(&qh, &s, 0, 1).unwrap();
        let stq = principal_tau(&qh, &s).unwrap();
        let cq = qh.mu - stq.tau[0];
        let scaleq = limq.abs().max(stq.tau[0].abs()).max(qh.mu);
        err_qh = err_qh.max((cq - limq).abs() / scaleq);
    }
    vec![
        Check::from_max_err("exp-hencky: chi closed form (line 1)", err_eh_a, 1e-12),
        Check::from_max_err("exp-hencky: chi closed form (line 2)", err_eh_b, 1e-12),
        Check::from_max_err("quad-hencky: chi = mu - tau_k", err_qh, 1e-12),
    ]
}

// ---------------------------------------------------------------------------
// Limit and invariance properties
// ---------------------------------------------------------------------------

/// ExpHencky with k = k̂ = 1e-9 reproduces the QuadHencky stresses and
/// second derivatives.
pub fn check_quad_hencky_limit(n_states: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eh = MaterialParams::exp_hencky(3, 1.0, 4.7, 1e-9, 1e-9).unwrap();
    let qh = MaterialParams::quad_hencky(3, 1.0, 4.7).unwrap();
    let mut max_err: f64 = 0.0;
    for _ in 0..n_states {
        let l = random_stretches(&mut rng, &qh);
        let s = PrincipalState::from_stretches(3, &l).unwrap();
        let te = principal_tau(&eh, &s).unwrap();
        let tq = principal_tau(&qh, &s).unwrap();
        let scale = (0..3)
            .map(|k| tq.tau[k].abs())
            .fold(0.0, f64::max)
            .max(1e-8);
        for k in 0..3 {
            max_err = max_err.max((te.tau[k] - tq.tau[k]).abs() / scale);
        }
        let de = d2w(&eh, &s).unwrap();
        let dq = d2w(&qh, &s).unwrap();
        let dscale = dq[0][0].abs().max(1e-8);
        for i in 0..3 {
            for j in 0..3 {
                max_err = max_err.max((de[i][j] - dq[i][j]).abs() / dscale);
            }
        }
    }
    Check::from_max_err("exp-hencky k=khat=1e-9 matches quad-hencky", max_err, 1e-6)
}

/// Objectivity/isotropy: the update at Q B Qᵀ is the rotation of the update
/// at B.
pub fn check_objectivity(p: &MaterialParams, n_states: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_stress_err: f64 = 0.0;
    let mut max_mod_err: f64 = 0.0;
    for _ in 0..n_states {
        let f = random_f(&mut rng, p);
        let b = f.b_left();
        let out = match spatial_tangent_and_stress(p, &b) {
            Ok(o) => o,
            Err(_) => continue,
        };
        let q = random_rotation(&mut rng, p.dim);
        // Q B Qᵀ
        let bf = b.to_full();
        let mut qbqt = [[0.0; 3]; 3];
        for i in 0..p.dim {
            for j in 0..p.dim {
                let mut acc = 0.0;
                for a in 0..p.dim {
                    for c in 0..p.dim {
                        acc += q.m[i][a] * bf[a][c] * q.m[j][c];
                    }
                }
                qbqt[i][j] = acc;
            }
        }
        let rot = match spatial_tangent_and_stress(p, &SymTensor::from_full_sym(p.dim, &qbqt)) {
            Ok(o) => o,
            Err(_) => continue,
        };
        // Rotate stress: Q τ Qᵀ.
        let tf = out.tau.to_full();
        let mut qtqt = [[0.0; 3]; 3];
        for i in 0..p.dim {
            for j in 0..p.dim {
                let mut acc = 0.0;
                for a in 0..p.dim {
                    for c in 0..p.dim {
                        acc += q.m[i][a] * tf[a][c] * q.m[j][c];
                    }
                }
                qtqt[i][j] = acc;
            }
        }
        let sscale = out.tau.frob_norm().max(p.mu);
        for i in 0..p.dim {
            for j in 0..p.dim {
                max_stress_err =
                    max_stress_err.max((rot.tau.get(i, j) - qtqt[i][j]).abs() / sscale);
            }
        }
        // Rotate modulus componentwise.
        let cf = voigt_unpack(&out.c_spatial);
        let pairs = voigt_pairs(p.dim);
        let cscale = out.c_spatial.frob_norm();
        for &(i, j) in pairs {
            for &(k, l) in pairs {
                let mut acc = 0.0;
                for a in 0..p.dim {
                    for bb in 0..p.dim {
                        for c in 0..p.dim {
                            for d in 0..p.dim {
                                acc += q.m[i][a]
                                    * q.m[j][bb]
                                    * q.m[k][c]
                                    * q.m[l][d]
                                    * cf[a][bb][c][d];
                            }
                        }
                    }
                }
                max_mod_err =
                    max_mod_err.max((rot.c_spatial.comp(i, j, k, l) - acc).abs() / cscale);
            }
        }
    }
    let passed = max_stress_err <= 1e-12 && max_mod_err <= 1e-10;
    Check {
        name: format!("{}: objectivity under rotations", p.model.name()),
        passed,
        detail: format!(
            "stress err {max_stress_err:.3e} (tol 1e-12), modulus err {max_mod_err:.3e} (tol 1e-10)"
        ),
    }
}

/// Permuting the spectral labels leaves τ and the spatial modulus unchanged.
pub fn check_permutation_invariance(p: &MaterialParams, n_states: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_err: f64 = 0.0;
    for _ in 0..n_states {
        let f = random_f(&mut rng, p);
        let sp = match crate::tensor::jacobi_eigen(&f.b_left()) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let base = match material::spatial_tangent_from_spectral(p, &sp) {
            Ok(o) => o,
            Err(_) => continue,
        };
        // Cyclic label permutation (swap for 2D).
        let mut perm = sp;
        if p.dim == 2 {
            perm.values.swap(0, 1);
            perm.vectors.swap(0, 1);
        } else {
            let v = perm.values;
            perm.values = [v[1], v[2], v[0]];
            let w = perm.vectors;
            perm.vectors = [w[1], w[2], w[0]];
        }
        let permuted = match material::spatial_tangent_from_spectral(p, &perm) {
            Ok(o) => o,
            Err(_) => continue,
        };
        let sscale = base.tau.frob_norm().max(p.mu);
        max_err = max_err.max(permuted.tau.sub(&base.tau).frob_norm() / sscale);
        let cscale = base.c_spatial.frob_norm();
        max_err = max_err.max(permuted.c_spatial.sub(&base.c_spatial).frob_norm() / cscale);
    }
    Check::from_max_err(
        &format!("{}: eigenvalue-permutation invariance", p.model.name()),
        max_err,
        1e-12,
    )
}

/// Jaumann shift against a brute-force component loop of the formula.
pub fn check_jaumann_component_formula(n_states: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_err: f64 = 0.0;
    for dim in [2usize, 3] {
        let p = MaterialParams::exp_hencky(dim, 1.0, 4.7, 2.0, 3.0).unwrap();
        for _ in 0..n_states {
            let f = random_f(&mut rng, &p);
            let out = spatial_tangent_and_stress(&p, &f.b_left()).unwrap();
            let shifted = material::jaumann_modulus(&out.c_spatial, &out.tau);
            let pairs = voigt_pairs(dim);
            let scale = out.tau.frob_norm().max(1e-8);
            for &(i, j) in pairs {
                for &(k, l) in pairs {
                    let del = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let brute = 0.5
                        * (out.tau.get(i, k) * del(j, l)
                            + out.tau.get(j, k) * del(i, l)
                            + out.tau.get(i, l) * del(j, k)
                            + out.tau.get(j, l) * del(i, k));
                    let got = shifted.comp(i, j, k, l) - out.c_spatial.comp(i, j, k, l);
                    max_err = max_err.max((got - brute).abs() / scale);
                }
            }
        }
    }
    Check::from_max_err("jaumann shift equals component formula", max_err, 1e-14)
}

// ---------------------------------------------------------------------------
// Element-level checks
// ---------------------------------------------------------------------------

/// Single-element stiffness against central finite differences of the
/// internal force (h = 1e-7), for every model on H8 and for the planar
/// Hencky-type models on Q4.
pub fn check_element_stiffness_fd(seed: u64) -> Vec<Check> {
    use crate::bench::{grid_mesh_2d, grid_mesh_3d};
    use crate::fem::Assembler;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut cases: Vec<(crate::fem::Mesh, MaterialParams)> = benchmark_models()
        .into_iter()
        .map(|p| (grid_mesh_3d(1, 1, 1, 1.0, 1.0, 1.0), p))
        .collect();
    cases.push((
        grid_mesh_2d(1, 1, 1.0, 1.0),
        MaterialParams::exp_hencky(2, 1.0, 4.7, 2.0, 3.0).unwrap(),
    ));
    cases.push((
        grid_mesh_2d(1, 1, 1.0, 1.0),
        MaterialParams::quad_hencky(2, 1.0, 4.7).unwrap(),
    ));

    for (mesh, p) in cases {
        let ndof = mesh.n_dofs();
        let asm = Assembler::new(&mesh);
        let mut u = vec![0.0; ndof];
        for v in u.iter_mut() {
            *v = rng.gen_range(-0.02..0.02);
        }
        let a0 = asm.assemble(&mesh, &p, &u).unwrap();
        let h = 1e-7;
        let scale = a0
            .k
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let mut max_err: f64 = 0.0;
        for c in 0..ndof {
            let mut up = u.clone();
            up[c] += h;
            let mut um = u.clone();
            um[c] -= h;
            let fp = asm.assemble(&mesh, &p, &up).unwrap().f_int;
            let fm = asm.assemble(&mesh, &p, &um).unwrap().f_int;
            for r in 0..ndof {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                max_err = max_err.max((a0.k.get(r, c) - fd).abs() / scale);
            }
        }
        out.push(Check::from_max_err(
            &format!(
                "{} ({}): element K vs FD of f_int",
                p.model.name(),
                mesh.kind.name()
            ),
            max_err,
            1e-5,
        ));
    }
    out
}

/// Patch test: an affine deformation prescribed on all boundary nodes of a
/// distorted multi-element mesh produces constant F and τ at every Gauss
/// point and zero residual at the interior dofs.
pub fn check_patch_test() -> Vec<Check> {
    use crate::bench::{grid_mesh_2d, grid_mesh_3d};
    use crate::fem::DofMap;
    use crate::solver::{LoadProgram, NewtonConfig, Problem, Solver};

    let mut out = Vec::new();
    for dim in [3usize, 2] {
        let mut mesh = if dim == 3 {
            grid_mesh_3d(2, 2, 2, 1.0, 1.0, 1.0)
        } else {
            grid_mesh_2d(3, 3, 1.0, 1.0)
        };
        // Perturb the interior nodes so the patch is genuinely irregular.
        let interior: Vec<usize> = (0..mesh.n_nodes())
            .filter(|&n| {
                (0..dim).all(|i| {
                    mesh.nodes[n][i] > 1e-12 && mesh.nodes[n][i] < 1.0 - 1e-12
                })
            })
            .collect();
        let offsets = [0.061, -0.043, 0.052];
        for (c, &n) in interior.iter().enumerate() {
            for i in 0..dim {
                mesh.nodes[n][i] += offsets[(c + i) % 3] * if c % 2 == 0 { 1.0 } else { -0.7 };
            }
        }
        mesh.validate_reference().unwrap();

        // Affine map A = 1 + G.
        let g3 = [
            [0.05, 0.02, -0.03],
            [0.01, -0.04, 0.02],
            [-0.02, 0.03, 0.06],
        ];
        let p = MaterialParams::exp_hencky(dim, 1.0, 4.7, 2.0, 3.0).unwrap();
        let mut dm = DofMap::new(dim, mesh.n_nodes());
        for (n, x) in mesh.nodes.iter().enumerate() {
            let boundary = (0..dim).any(|i| x[i] < 1e-12 || x[i] > 1.0 - 1e-12);
            if boundary {
                for i in 0..dim {
                    let mut v = 0.0;
                    for j in 0..dim {
                        v += g3[i][j] * x[j];
                    }
                    dm.constrain(n, i, v);
                }
            }
        }
        let problem = Problem::new(mesh.clone(), dm, p).unwrap();
        let cfg = NewtonConfig {
            tol_res_abs: 1e-13,
            tol_res_rel: 1e-15,
            max_iter: 30,
            ..NewtonConfig::default()
        };
        let solver = Solver::new(&problem, cfg);
        let program = LoadProgram::proportional(1, 1.0, 0.0, "patch");
        let (u, report) = solver.run_program(&program, None);
        if report.aborted {
            out.push(Check {
                name: format!("patch test ({dim}d)"),
                passed: false,
                detail: format!("solver aborted: {:?}", report.abort_reason),
            });
            continue;
        }

        let mut f_err: f64 = 0.0;
        let mut tau_err: f64 = 0.0;
        let mut tau_scale: f64 = 0.0;
        let mut tau_ref: Option<crate::tensor::SymTensor> = None;
        for e in 0..mesh.n_elems() {
            for gp in mesh.gauss_states(e, &u).unwrap() {
                for i in 0..dim {
                    for j in 0..dim {
                        let a = if i == j { 1.0 } else { 0.0 } + g3[i][j];
                        f_err = f_err.max((gp.f.m[i][j] - a).abs());
                    }
                }
                let sat = spatial_tangent_and_stress(&p, &gp.b).unwrap();
                match &tau_ref {
                    None => {
                        tau_ref = Some(sat.tau);
                        tau_scale = sat.tau.frob_norm();
                    }
                    Some(t0) => {
                        tau_err = tau_err.max(sat.tau.sub(t0).frob_norm());
                    }
                }
            }
        }
        // Interior residual, relative to the boundary force scale.
        let sys = crate::fem::assemble(&mesh, &problem.dofmap, &p, &u, None).unwrap();
        let rmax = sys.r_free.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let fscale = sys
            .reactions
            .iter()
            .fold(0.0f64, |m, &(_, v)| m.max(v.abs()))
            .max(p.mu);
        let passed =
            f_err <= 1e-12 && tau_err <= 1e-12 * tau_scale.max(1.0) && rmax <= 1e-12 * fscale;
        out.push(Check {
            name: format!("patch test ({dim}d)"),
            passed,
            detail: format!(
                "max |F - A| {f_err:.2e}, tau spread {tau_err:.2e}, interior residual {:.2e} (tols 1e-12)",
                rmax / fscale
            ),
        });
    }
    out
}

/// Rigid rotation produces zero internal force: residual ≤ 1e-10 · μ · V.
pub fn check_rigid_rotation_residual(seed: u64) -> Check {
    use crate::bench::grid_mesh_3d;
    use crate::fem::element_force_and_stiffness;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = grid_mesh_3d(1, 1, 1, 1.0, 1.0, 1.0);
    let p = MaterialParams::exp_hencky(3, 1.0, 4.7, 2.0, 3.0).unwrap();
    let mut max_err: f64 = 0.0;
    for _ in 0..20 {
        let r = random_rotation(&mut rng, 3);
        let mut u = vec![0.0; mesh.n_dofs()];
        for (n, x) in mesh.nodes.iter().enumerate() {
            let rx = r.mul_vec(x);
            for i in 0..3 {
                u[n * 3 + i] = rx[i] - x[i];
            }
        }
        let em = element_force_and_stiffness(&p, &mesh.gauss_states(0, &u).unwrap()).unwrap();
        for v in em.f_int.iter() {
            max_err = max_err.max(v.abs());
        }
    }
    // Volume is 1 mm³ and μ = 1 MPa.
    Check::from_max_err("rigid rotation residual", max_err, 1e-10)
}

/// The generated benchmark meshes reproduce the quoted element/node/dof
/// counts exactly.
pub fn check_mesh_counts() -> Check {
    use crate::bench::{generate_case, CaseId, CaseSpec};
    use crate::material::Model;

    let mut failures = Vec::new();
    let expect = |case: &crate::bench::Case, e: usize, n: usize, d: usize, what: &str| {
        if case.mesh.n_elems() != e || case.mesh.n_nodes() != n || case.mesh.n_dofs() != d {
            Some(format!(
                "{what}: got {}/{}/{}, want {e}/{n}/{d}",
                case.mesh.n_elems(),
                case.mesh.n_nodes(),
                case.mesh.n_dofs()
            ))
        } else {
            None
        }
    };

    let spec = CaseSpec::new(CaseId::UniaxialCube, Model::ExpHencky).unwrap();
    failures.extend(expect(&generate_case(&spec).unwrap(), 64, 125, 375, "uniaxial d4"));
    let spec = CaseSpec::new(CaseId::Footing3d, Model::ExpHencky).unwrap();
    failures.extend(expect(
        &generate_case(&spec).unwrap(),
        4096,
        4913,
        14739,
        "footing3d d16",
    ));
    for (idx, e, n, d) in [(1, 90, 124, 248), (2, 900, 1001, 2002), (3, 3600, 3801, 7602)] {
        let mut spec = CaseSpec::new(CaseId::Arc2d, Model::ExpHencky).unwrap();
        spec.density = idx;
        failures.extend(expect(
            &generate_case(&spec).unwrap(),
            e,
            n,
            d,
            &format!("arc mesh {idx}"),
        ));
    }
    Check {
        name: "benchmark mesh counts".into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "64/125/375, 4096/4913/14739, 90/248, 900/2002, 3600/7602".into()
        } else {
            failures.join("; ")
        },
    }
}

/// Element and mesh-bookkeeping checks.
pub fn element_checks(seed: u64) -> Vec<Check> {
    let mut checks = check_element_stiffness_fd(seed);
    checks.extend(check_patch_test());
    checks.push(check_rigid_rotation_residual(seed + 1));
    checks.push(check_mesh_counts());
    checks
}

/// The whole invariant suite (constitutive + element layers).
pub fn run_all(n_states: usize, seed: u64) -> Vec<Check> {
    let mut checks = material_checks(n_states, seed);
    checks.extend(element_checks(seed + 1000));
    checks
}

/// All constitutive-layer checks. `n_states` scales the random sampling
/// (the acceptance suite uses 1000).
pub fn material_checks(n_states: usize, seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    for p in benchmark_models() {
        checks.push(check_tau_vs_energy_fd(&p, n_states, seed));
        checks.push(check_d2w_vs_tau_fd(&p, n_states, seed + 1));
        checks.push(check_mixed_vs_s1_fd(&p, n_states, seed + 2));
        checks.push(check_spatial_vs_pushforward(&p, n_states, seed + 3));
        checks.push(check_spatial_major_symmetry(&p, n_states / 10 + 1, seed + 4));
        checks.push(check_chi_epsilon_sweep(&p, n_states / 10 + 1, seed + 5));
        checks.push(check_objectivity(&p, n_states / 20 + 1, seed + 6));
        checks.push(check_permutation_invariance(&p, n_states / 10 + 1, seed + 7));
    }
    // Planar variants of the Hencky-type models.
    for p in [
        MaterialParams::exp_hencky(2, 1.0, 4.7, 2.0, 3.0).unwrap(),
        MaterialParams::quad_hencky(2, 1.0, 4.7).unwrap(),
    ] {
        checks.push(check_tau_vs_energy_fd(&p, n_states, seed + 8));
        checks.push(check_d2w_vs_tau_fd(&p, n_states, seed + 9));
        checks.push(check_mixed_vs_s1_fd(&p, n_states, seed + 10));
        checks.push(check_spatial_vs_pushforward(&p, n_states, seed + 11));
    }
    checks.extend(check_chi_closed_forms(n_states / 10 + 1, seed + 12));
    checks.push(check_quad_hencky_limit(n_states, seed + 13));
    checks.push(check_jaumann_component_formula(n_states / 10 + 1, seed + 14));
    checks
}
