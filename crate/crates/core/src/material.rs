//! Hyperelastic models as energies of principal logarithmic stretches.
//!
//! Four models share one constitutive interface: an exponentiated Hencky
//! model
//!
//! ```text
//! W = μ/k · exp(k Σ (log λ̄_i)²) + κ/(2k̂) · exp(k̂ (Σ log λ_i)²),
//! ```
//!
//! the classical quadratic Hencky model, and compressible Neo-Hooke and Gent
//! models (3D only) with a common volumetric part. Here λ̄_i = J^(−1/n) λ_i
//! are the modified (isochoric) stretches and J = det F.
//!
//! From the principal Kirchhoff stresses τ_k = ∂W/∂(log λ_k) and the second
//! derivatives ∂²W/∂(log λ_k)∂(log λ_l), the spatial tangent modulus is
//! reconstructed in the eigenframe of B = FFᵀ:
//!
//! ```text
//! C̃ = Σ_kl [∂²W/∂(logλ_k)∂(logλ_l) − 2 δ_kl τ_l] n^k⊗n^k⊗n^l⊗n^l
//!    + Σ_{k≠l} χ_kl n^k⊗n^l⊗(n^k⊗n^l + n^l⊗n^k),
//! χ_kl = (τ_k λ_l² − τ_l λ_k²)/(λ_k² − λ_l²),
//! ```
//!
//! where χ switches to its l'Hôpital limit
//! ½(∂²W/∂(logλ_k)² − ∂²W/∂(logλ_k)∂(logλ_l)) − τ_l when the squared
//! stretches coincide within [`EQUAL_EIGENVALUE_TOL`]. The material modulus
//! Ĉ = 4 ∂²W/∂C², the mixed modulus ∂²W/∂F², and the Jaumann-shifted form
//! used by host codes expecting corotational rates are assembled from the
//! same ingredients.

use crate::error::{Error, Result};
use crate::tensor::{jacobi_eigen, voigt_pairs, Matrix, Spectral, SymTensor, Tangent4};

/// Relative tolerance below which two squared stretches count as equal and
/// the divided difference χ switches to its analytic limit.
pub const EQUAL_EIGENVALUE_TOL: f64 = 1e-8;

/// Which strain energy drives the response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Exponentiated Hencky; parameters μ, κ, k, k̂. Defined for n = 2 and 3.
    ExpHencky,
    /// Quadratic Hencky; parameters μ, κ. Defined for n = 2 and 3.
    QuadHencky,
    /// Compressible Neo-Hooke; parameters μ, κ. 3D only.
    NeoHooke,
    /// Compressible Gent; parameters μ, κ, J_m. 3D only.
    Gent,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::ExpHencky => "exp-hencky",
            Model::QuadHencky => "quad-hencky",
            Model::NeoHooke => "neo-hooke",
            Model::Gent => "gent",
        }
    }

    pub fn parse(s: &str) -> Result<Model> {
        match s {
            "exp-hencky" | "exphencky" | "eh" => Ok(Model::ExpHencky),
            "quad-hencky" | "quadhencky" | "hencky" => Ok(Model::QuadHencky),
            "neo-hooke" | "neohooke" | "nh" => Ok(Model::NeoHooke),
            "gent" => Ok(Model::Gent),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }
}

/// Material parameters. Stress units are MPa throughout (mm–MPa–N system).
#[derive(Debug, Clone, Copy)]
pub struct MaterialParams {
    pub model: Model,
    /// Spatial dimension n ∈ {2, 3}. The planar (n = 2) variants exist only
    /// for the Hencky-type models.
    pub dim: usize,
    /// Infinitesimal shear modulus μ > 0.
    pub mu: f64,
    /// Infinitesimal bulk modulus κ > 0.
    pub kappa: f64,
    /// Isochoric hardening exponent k ≥ 0 (ExpHencky). The energy value
    /// diverges as k → 0 (stress and tangent stay finite); use QuadHencky
    /// for the k = k̂ = 0 response.
    pub k: f64,
    /// Volumetric hardening exponent k̂ ≥ 0 (ExpHencky).
    pub khat: f64,
    /// Limiting extensibility J_m (Gent).
    pub jm: f64,
}

impl MaterialParams {
    pub fn exp_hencky(dim: usize, mu: f64, kappa: f64, k: f64, khat: f64) -> Result<Self> {
        let p = MaterialParams {
            model: Model::ExpHencky,
            dim,
            mu,
            kappa,
            k,
            khat,
            jm: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn quad_hencky(dim: usize, mu: f64, kappa: f64) -> Result<Self> {
        let p = MaterialParams {
            model: Model::QuadHencky,
            dim,
            mu,
            kappa,
            k: 0.0,
            khat: 0.0,
            jm: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn neo_hooke(mu: f64, kappa: f64) -> Result<Self> {
        let p = MaterialParams {
            model: Model::NeoHooke,
            dim: 3,
            mu,
            kappa,
            k: 0.0,
            khat: 0.0,
            jm: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn gent(mu: f64, kappa: f64, jm: f64) -> Result<Self> {
        let p = MaterialParams {
            model: Model::Gent,
            dim: 3,
            mu,
            kappa,
            k: 0.0,
            khat: 0.0,
            jm,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidParameter(format!("dim = {}", self.dim)));
        }
        if !(self.mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu = {} <= 0", self.mu)));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa = {} <= 0",
                self.kappa
            )));
        }
        match self.model {
            Model::ExpHencky => {
                if !(self.k >= 0.0) || !(self.khat >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "k = {}, khat = {} must be >= 0",
                        self.k, self.khat
                    )));
                }
            }
            Model::QuadHencky => {}
            Model::NeoHooke | Model::Gent => {
                if self.dim != 3 {
                    return Err(Error::InvalidParameter(format!(
                        "{} is defined in 3D only",
                        self.model.name()
                    )));
                }
                if self.model == Model::Gent && !(self.jm > 0.0) {
                    return Err(Error::InvalidParameter(format!("Jm = {} <= 0", self.jm)));
                }
            }
        }
        Ok(())
    }

    /// Infinitesimal Young's modulus and Poisson ratio implied by (μ, κ).
    pub fn engineering_constants(&self) -> (f64, f64) {
        let e = 9.0 * self.kappa * self.mu / (3.0 * self.kappa + self.mu);
        let nu = (3.0 * self.kappa - 2.0 * self.mu) / (6.0 * self.kappa + 2.0 * self.mu);
        (e, nu)
    }
}

/// ExpHencky parameters from engineering constants: μ = E/(2(1+ν)),
/// κ = E/(3(1−2ν)). `khat = None` couples the exponents as k̂ = 3k/2, which
/// keeps zero lateral contraction exact at finite strain when ν = 0.
pub fn params_from_engineering(
    dim: usize,
    e: f64,
    nu: f64,
    k: f64,
    khat: Option<f64>,
) -> Result<MaterialParams> {
    if !(e > 0.0) {
        return Err(Error::InvalidParameter(format!("E = {e} <= 0")));
    }
    if nu <= -1.0 {
        return Err(Error::InvalidParameter(format!("nu = {nu} <= -1")));
    }
    if nu >= 0.5 {
        return Err(Error::Incompressibility(nu));
    }
    let mu = e / (2.0 * (1.0 + nu));
    let kappa = e / (3.0 * (1.0 - 2.0 * nu));
    MaterialParams::exp_hencky(dim, mu, kappa, k, khat.unwrap_or(1.5 * k))
}

/// Principal stretches with their logarithmic and modified-logarithmic
/// companions; λ̄_k = J^(−1/n) λ_k so that Σ log λ̄_k = 0.
#[derive(Debug, Clone, Copy)]
pub struct PrincipalState {
    pub dim: usize,
    pub lambda: [f64; 3],
    pub loglam: [f64; 3],
    pub loglam_bar: [f64; 3],
    /// J = det F = Π λ_k.
    pub j: f64,
}

impl PrincipalState {
    pub fn from_stretches(dim: usize, lambda: &[f64]) -> Result<Self> {
        debug_assert!(dim == 2 || dim == 3);
        debug_assert_eq!(lambda.len(), dim);
        let mut lam = [1.0; 3];
        let mut loglam = [0.0; 3];
        let mut j = 1.0;
        for i in 0..dim {
            if !(lambda[i] > 0.0) || !lambda[i].is_finite() {
                return Err(Error::InvalidDeformation(format!(
                    "principal stretch {} not positive",
                    lambda[i]
                )));
            }
            lam[i] = lambda[i];
            loglam[i] = lambda[i].ln();
            j *= lambda[i];
        }
        let logj_over_n: f64 = loglam.iter().take(dim).sum::<f64>() / dim as f64;
        let mut loglam_bar = [0.0; 3];
        for i in 0..dim {
            loglam_bar[i] = loglam[i] - logj_over_n;
        }
        Ok(PrincipalState {
            dim,
            lambda: lam,
            loglam,
            loglam_bar,
            j,
        })
    }

    /// State from the spectral decomposition of B = FFᵀ (eigenvalues λ_k²).
    pub fn from_spectral_of_b(s: &Spectral) -> Result<Self> {
        let mut lam = [0.0; 3];
        for k in 0..s.dim {
            if !(s.values[k] > 0.0) {
                return Err(Error::InvalidDeformation(format!(
                    "B has nonpositive eigenvalue {}",
                    s.values[k]
                )));
            }
            lam[k] = s.values[k].sqrt();
        }
        Self::from_stretches(s.dim, &lam[..s.dim])
    }
}

/// Principal first/second Piola-Kirchhoff and Kirchhoff stresses, related by
/// S₁^k = τ_k/λ_k and S₂^k = τ_k/λ_k².
#[derive(Debug, Clone, Copy)]
pub struct PrincipalStresses {
    pub tau: [f64; 3],
    pub s1: [f64; 3],
    pub s2: [f64; 3],
}

/// Kirchhoff stress, spatial tangent modulus and energy density at one state.
#[derive(Debug, Clone, Copy)]
pub struct StressAndTangent {
    pub tau: SymTensor,
    pub c_spatial: Tangent4,
    pub energy: f64,
}

/// Full fourth-order tensor without minor symmetry; carrier for the mixed
/// modulus ∂²W/∂F².
#[derive(Debug, Clone)]
pub struct Full4 {
    pub dim: usize,
    pub t: [[[[f64; 3]; 3]; 3]; 3],
}

impl Full4 {
    pub fn zero(dim: usize) -> Self {
        Full4 {
            dim,
            t: [[[[0.0; 3]; 3]; 3]; 3],
        }
    }

    #[inline]
    pub fn comp(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.t[i][j][k][l]
    }

    /// (T : A)_ij = T_ijkl A_kl for a general second-order A.
    pub fn contract_mat(&self, a: &Matrix) -> Matrix {
        let mut r = Matrix::zero(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut acc = 0.0;
                for k in 0..self.dim {
                    for l in 0..self.dim {
                        acc += self.t[i][j][k][l] * a.get(k, l);
                    }
                }
                r.set(i, j, acc);
            }
        }
        r
    }

    pub fn frob_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    for l in 0..self.dim {
                        s += self.t[i][j][k][l] * self.t[i][j][k][l];
                    }
                }
            }
        }
        s.sqrt()
    }
}

// ---------------------------------------------------------------------------
// Energies, principal stresses, second derivatives
// ---------------------------------------------------------------------------

/// Common volumetric part of the Neo-Hooke and Gent models and its first two
/// derivatives with respect to log λ_i (identical for every i).
fn volumetric_nh(kappa: f64, j: f64) -> (f64, f64, f64) {
    let j43 = j.powf(4.0 / 3.0);
    let jm23 = j.powf(-2.0 / 3.0);
    let w = 0.375 * kappa * (j43 + 2.0 * jm23 - 3.0);
    let dw = 0.5 * kappa * (j43 - jm23);
    let ddw = kappa / 6.0 * (4.0 * j43 + 2.0 * jm23);
    (w, dw, ddw)
}

/// Isochoric invariant Σ λ̄_k² = ‖F/(det F)^(1/3)‖² (by isotropy).
fn i1_bar(s: &PrincipalState) -> f64 {
    (0..s.dim).map(|i| (2.0 * s.loglam_bar[i]).exp()).sum()
}

fn gent_factor(p: &MaterialParams, s: &PrincipalState) -> Result<f64> {
    let x = i1_bar(s) - 3.0;
    if x >= p.jm {
        return Err(Error::LockingLimit {
            i1bar_minus_3: x,
            jm: p.jm,
        });
    }
    Ok(p.jm / (p.jm - x))
}

/// Strain energy density W(log λ₁, …, log λₙ).
pub fn energy(p: &MaterialParams, s: &PrincipalState) -> Result<f64> {
    debug_assert_eq!(p.dim, s.dim);
    let t: f64 = s.loglam.iter().take(s.dim).sum();
    match p.model {
        Model::ExpHencky => {
            let ssum: f64 = (0..s.dim).map(|i| s.loglam_bar[i] * s.loglam_bar[i]).sum();
            Ok(p.mu / p.k * (p.k * ssum).exp() + p.kappa / (2.0 * p.khat) * (p.khat * t * t).exp())
        }
        Model::QuadHencky => {
            let ssum: f64 = (0..s.dim).map(|i| s.loglam_bar[i] * s.loglam_bar[i]).sum();
            Ok(p.mu * ssum + 0.5 * p.kappa * t * t)
        }
        Model::NeoHooke => {
            let (wv, _, _) = volumetric_nh(p.kappa, s.j);
            Ok(0.5 * p.mu * (i1_bar(s) - 3.0) + wv)
        }
        Model::Gent => {
            let g = gent_factor(p, s)?;
            let (wv, _, _) = volumetric_nh(p.kappa, s.j);
            Ok(0.5 * p.jm * p.mu * g.ln() + wv)
        }
    }
}

/// Principal Kirchhoff stresses τ_k = ∂W/∂(log λ_k), with S₁ and S₂ filled
/// via the ratio relations.
pub fn principal_tau(p: &MaterialParams, s: &PrincipalState) -> Result<PrincipalStresses> {
    debug_assert_eq!(p.dim, s.dim);
    let t: f64 = s.loglam.iter().take(s.dim).sum();
    let mut tau = [0.0; 3];
    match p.model {
        Model::ExpHencky => {
            let ssum: f64 = (0..s.dim).map(|i| s.loglam_bar[i] * s.loglam_bar[i]).sum();
            let e1 = (p.k * ssum).exp();
            let e2 = (p.khat * t * t).exp();
            for i in 0..s.dim {
                tau[i] = 2.0 * p.mu * e1 * s.loglam_bar[i] + p.kappa * e2 * t;
            }
        }
        Model::QuadHencky => {
            for i in 0..s.dim {
                tau[i] = 2.0 * p.mu * s.loglam_bar[i] + p.kappa * t;
            }
        }
        Model::NeoHooke => {
            let i1b = i1_bar(s);
            let (_, dwv, _) = volumetric_nh(p.kappa, s.j);
            for i in 0..s.dim {
                let lb2 = (2.0 * s.loglam_bar[i]).exp();
                tau[i] = p.mu * (lb2 - i1b / 3.0) + dwv;
            }
        }
        Model::Gent => {
            let i1b = i1_bar(s);
            let g = gent_factor(p, s)?;
            let (_, dwv, _) = volumetric_nh(p.kappa, s.j);
            for i in 0..s.dim {
                let lb2 = (2.0 * s.loglam_bar[i]).exp();
                tau[i] = p.mu * g * (lb2 - i1b / 3.0) + dwv;
            }
        }
    }
    let mut s1 = [0.0; 3];
    let mut s2 = [0.0; 3];
    for i in 0..s.dim {
        s1[i] = tau[i] / s.lambda[i];
        s2[i] = tau[i] / (s.lambda[i] * s.lambda[i]);
    }
    Ok(PrincipalStresses { tau, s1, s2 })
}

/// Second derivatives ∂²W/∂(log λ_i)∂(log λ_j), returned as a symmetric
/// dim×dim block.
pub fn d2w(p: &MaterialParams, s: &PrincipalState) -> Result<[[f64; 3]; 3]> {
    debug_assert_eq!(p.dim, s.dim);
    let n = s.dim as f64;
    let t: f64 = s.loglam.iter().take(s.dim).sum();
    let mut d = [[0.0; 3]; 3];
    match p.model {
        Model::ExpHencky => {
            let ssum: f64 = (0..s.dim).map(|i| s.loglam_bar[i] * s.loglam_bar[i]).sum();
            let e1 = (p.k * ssum).exp();
            let e2 = (p.khat * t * t).exp();
            let vol = p.kappa * e2 * (2.0 * p.khat * t * t + 1.0);
            for i in 0..s.dim {
                for j in 0..s.dim {
                    let del = if i == j { 1.0 } else { 0.0 };
                    d[i][j] = 2.0
                        * p.mu
                        * e1
                        * (2.0 * p.k * s.loglam_bar[i] * s.loglam_bar[j] + del - 1.0 / n)
                        + vol;
                }
            }
        }
        Model::QuadHencky => {
            for i in 0..s.dim {
                for j in 0..s.dim {
                    let del = if i == j { 1.0 } else { 0.0 };
                    d[i][j] = 2.0 * p.mu * (del - 1.0 / n) + p.kappa;
                }
            }
        }
        Model::NeoHooke | Model::Gent => {
            let i1b = i1_bar(s);
            let (_, _, ddwv) = volumetric_nh(p.kappa, s.j);
            let (g, dg_scale) = if p.model == Model::Gent {
                let g = gent_factor(p, s)?;
                // ∂g/∂(logλ_j) = (2g²/Jm)(λ̄_j² − I1bar/3)
                (g, 2.0 * g * g / p.jm)
            } else {
                (1.0, 0.0)
            };
            for i in 0..s.dim {
                let lbi = (2.0 * s.loglam_bar[i]).exp();
                for j in 0..s.dim {
                    let del = if i == j { 1.0 } else { 0.0 };
                    let lbj = (2.0 * s.loglam_bar[j]).exp();
                    let dev_i = lbi - i1b / 3.0;
                    let dev_j = lbj - i1b / 3.0;
                    d[i][j] = p.mu * dg_scale * dev_i * dev_j
                        + 2.0 * p.mu * g * (lbi * del - lbi / 3.0 - lbj / 3.0 + i1b / 9.0)
                        + ddwv;
                }
            }
        }
    }
    Ok(d)
}

// ---------------------------------------------------------------------------
// The divided-difference factor χ and its equal-eigenvalue limit
// ---------------------------------------------------------------------------

/// χ_kl = (τ_k λ_l² − τ_l λ_k²)/(λ_k² − λ_l²), switching to [`chi_limit`]
/// when λ_k² and λ_l² coincide within [`EQUAL_EIGENVALUE_TOL`].
pub fn chi(p: &MaterialParams, s: &PrincipalState, k: usize, l: usize) -> Result<f64> {
    let st = principal_tau(p, s)?;
    let d2 = d2w(p, s)?;
    Ok(chi_from_parts(&st, &d2, s, k, l))
}

/// The l'Hôpital limit ½(∂²W/∂(logλ_k)² − ∂²W/∂(logλ_k)∂(logλ_l)) − τ_l,
/// valid for all four models; the production path for coincident stretches.
pub fn chi_limit(p: &MaterialParams, s: &PrincipalState, k: usize, l: usize) -> Result<f64> {
    let st = principal_tau(p, s)?;
    let d2 = d2w(p, s)?;
    Ok(chi_limit_from_parts(&st, &d2, k, l))
}

#[inline]
fn stretches_coincide(s: &PrincipalState, k: usize, l: usize) -> bool {
    let lk2 = s.lambda[k] * s.lambda[k];
    let ll2 = s.lambda[l] * s.lambda[l];
    (lk2 - ll2).abs() <= EQUAL_EIGENVALUE_TOL * lk2.max(ll2)
}

#[inline]
fn chi_from_parts(
    st: &PrincipalStresses,
    d2: &[[f64; 3]; 3],
    s: &PrincipalState,
    k: usize,
    l: usize,
) -> f64 {
    if stretches_coincide(s, k, l) {
        chi_limit_from_parts(st, d2, k, l)
    } else {
        let lk2 = s.lambda[k] * s.lambda[k];
        let ll2 = s.lambda[l] * s.lambda[l];
        (st.tau[k] * ll2 - st.tau[l] * lk2) / (lk2 - ll2)
    }
}

#[inline]
fn chi_limit_from_parts(st: &PrincipalStresses, d2: &[[f64; 3]; 3], k: usize, l: usize) -> f64 {
    0.5 * (d2[k][k] - d2[k][l]) - st.tau[l]
}

// ---------------------------------------------------------------------------
// Tangent moduli
// ---------------------------------------------------------------------------

/// Local constitutive update at one integration point: spectral
/// decomposition of B, principal Kirchhoff stresses, the reconstituted
/// stress tensor, χ per pair, and the spatial tangent modulus in Voigt form.
pub fn spatial_tangent_and_stress(p: &MaterialParams, b: &SymTensor) -> Result<StressAndTangent> {
    debug_assert_eq!(p.dim, b.dim());
    let sp = jacobi_eigen(b)?;
    spatial_tangent_from_spectral(p, &sp)
}

/// Same update from an already-computed spectral decomposition of B. The
/// result does not depend on how the eigenpairs are labelled.
pub fn spatial_tangent_from_spectral(
    p: &MaterialParams,
    sp: &Spectral,
) -> Result<StressAndTangent> {
    let s = PrincipalState::from_spectral_of_b(sp)?;
    let st = principal_tau(p, &s)?;
    let d2 = d2w(p, &s)?;
    let w = energy(p, &s)?;
    let dim = p.dim;

    let mut tau = SymTensor::zero(dim);
    for k in 0..dim {
        tau = tau.add(&SymTensor::from_dyad(dim, &sp.vectors[k]).scale(st.tau[k]));
    }

    let mut chi_pq = [[0.0; 3]; 3];
    for a in 0..dim {
        for b in 0..dim {
            if a != b {
                chi_pq[a][b] = chi_from_parts(&st, &d2, &s, a, b);
            }
        }
    }

    let n = &sp.vectors;
    let pairs = voigt_pairs(dim);
    let mut c = Tangent4::zero(dim);
    for (va, &(i, j)) in pairs.iter().enumerate() {
        for (vb, &(k, l)) in pairs.iter().enumerate() {
            let mut acc = 0.0;
            for a in 0..dim {
                for b in 0..dim {
                    if a == b {
                        let coef = d2[a][a] - 2.0 * st.tau[a];
                        acc += coef * n[a][i] * n[a][j] * n[a][k] * n[a][l];
                    } else {
                        acc += d2[a][b] * n[a][i] * n[a][j] * n[b][k] * n[b][l];
                        acc += chi_pq[a][b]
                            * n[a][i]
                            * n[b][j]
                            * (n[a][k] * n[b][l] + n[b][k] * n[a][l]);
                    }
                }
            }
            c.m[va][vb] = acc;
        }
    }

    Ok(StressAndTangent {
        tau,
        c_spatial: c,
        energy: w,
    })
}

/// Material tangent modulus Ĉ = 4 ∂²W/∂C² in the material eigenframe of C.
/// Verification-grade companion of [`spatial_tangent_and_stress`]; the pair
/// factor (S₂^k − S₂^l)/(λ_k² − λ_l²) equals χ/(λ_k²λ_l²) exactly, so the
/// same equal-eigenvalue branch applies.
pub fn material_tangent(p: &MaterialParams, c_right: &SymTensor) -> Result<Tangent4> {
    debug_assert_eq!(p.dim, c_right.dim());
    let sp = jacobi_eigen(c_right)?;
    let s = PrincipalState::from_spectral_of_b(&sp)?;
    let st = principal_tau(p, &s)?;
    let d2 = d2w(p, &s)?;
    let dim = p.dim;

    let nvec = &sp.vectors;
    let pairs = voigt_pairs(dim);
    let mut c = Tangent4::zero(dim);
    for (va, &(i, j)) in pairs.iter().enumerate() {
        for (vb, &(k, l)) in pairs.iter().enumerate() {
            let mut acc = 0.0;
            for a in 0..dim {
                let la2 = s.lambda[a] * s.lambda[a];
                for b in 0..dim {
                    let lb2 = s.lambda[b] * s.lambda[b];
                    if a == b {
                        let coef = (d2[a][a] - 2.0 * st.tau[a]) / (la2 * la2);
                        acc += coef * nvec[a][i] * nvec[a][j] * nvec[a][k] * nvec[a][l];
                    } else {
                        acc += d2[a][b] / (la2 * lb2)
                            * nvec[a][i]
                            * nvec[a][j]
                            * nvec[b][k]
                            * nvec[b][l];
                        let g = chi_from_parts(&st, &d2, &s, a, b) / (la2 * lb2);
                        acc += g
                            * nvec[a][i]
                            * nvec[b][j]
                            * (nvec[a][k] * nvec[b][l] + nvec[b][k] * nvec[a][l]);
                    }
                }
            }
            c.m[va][vb] = acc;
        }
    }
    Ok(c)
}

/// First Piola-Kirchhoff stress S₁ = Σ_k (τ_k/λ_k) n^k ⊗ N^k.
pub fn first_pk_stress(p: &MaterialParams, f: &Matrix) -> Result<Matrix> {
    debug_assert_eq!(p.dim, f.dim());
    if f.det() <= 0.0 {
        return Err(Error::InvalidDeformation(format!("det F = {}", f.det())));
    }
    let sp = jacobi_eigen(&f.c_right())?;
    let s = PrincipalState::from_spectral_of_b(&sp)?;
    let st = principal_tau(p, &s)?;
    let dim = p.dim;
    let mut s1 = Matrix::zero(dim);
    for k in 0..dim {
        // n^k = F N^k / λ_k
        let nk = f.mul_vec(&sp.vectors[k]);
        for i in 0..dim {
            for j in 0..dim {
                s1.m[i][j] += st.s1[k] / s.lambda[k] * nk[i] * sp.vectors[k][j];
            }
        }
    }
    Ok(s1)
}

/// Mixed tangent modulus ∂²W/∂F² = ∂S₁/∂F as a full fourth-order tensor
/// (no minor symmetry), assembled from n^k ⊗ N^l dyads.
///
/// The two pair structures carry distinct coefficients:
/// (τ_k − τ_l)/(λ_k² − λ_l²) on n^k⊗N^l⊗n^k⊗N^l and
/// (S₁^k λ_l − S₁^l λ_k)/(λ_k² − λ_l²) = χ/(λ_kλ_l) on n^k⊗N^l⊗n^l⊗N^k;
/// both switch to analytic limits for coincident stretches.
pub fn mixed_tangent(p: &MaterialParams, f: &Matrix) -> Result<Full4> {
    debug_assert_eq!(p.dim, f.dim());
    if f.det() <= 0.0 {
        return Err(Error::InvalidDeformation(format!("det F = {}", f.det())));
    }
    let dim = p.dim;
    let sp = jacobi_eigen(&f.c_right())?;
    let s = PrincipalState::from_spectral_of_b(&sp)?;
    let st = principal_tau(p, &s)?;
    let d2 = d2w(p, &s)?;

    // Spatial principal directions from the material ones.
    let mut n = [[0.0; 3]; 3];
    for k in 0..dim {
        let fk = f.mul_vec(&sp.vectors[k]);
        for i in 0..dim {
            n[k][i] = fk[i] / s.lambda[k];
        }
    }
    let nn = &sp.vectors;

    let mut out = Full4::zero(dim);
    for a in 0..dim {
        let la = s.lambda[a];
        for b in 0..dim {
            let lb = s.lambda[b];
            // ∂S₁^a/∂λ_b = (1/(λ_a λ_b)) [∂²W/∂(logλ_a)∂(logλ_b) − δ_ab τ_a]
            let diag = (d2[a][b] - if a == b { st.tau[a] } else { 0.0 }) / (la * lb);
            for i in 0..dim {
                for j in 0..dim {
                    for kk in 0..dim {
                        for ll in 0..dim {
                            out.t[i][j][kk][ll] += diag * n[a][i] * nn[a][j] * n[b][kk] * nn[b][ll];
                        }
                    }
                }
            }
            if a != b {
                let la2 = la * la;
                let lb2 = lb * lb;
                let (c1, c2) = if stretches_coincide(&s, a, b) {
                    let c1 = 0.5 * (d2[a][a] - d2[a][b]) / la2;
                    let c2 = chi_limit_from_parts(&st, &d2, a, b) / (la * lb);
                    (c1, c2)
                } else {
                    let c1 = (st.tau[a] - st.tau[b]) / (la2 - lb2);
                    let c2 = (st.s1[a] * lb - st.s1[b] * la) / (la2 - lb2);
                    (c1, c2)
                };
                for i in 0..dim {
                    for j in 0..dim {
                        for kk in 0..dim {
                            for ll in 0..dim {
                                out.t[i][j][kk][ll] += c1 * n[a][i] * nn[b][j] * n[a][kk] * nn[b][ll]
                                    + c2 * n[a][i] * nn[b][j] * n[b][kk] * nn[a][ll];
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Shift a spatial modulus to the Jaumann form expected by host codes:
/// adds ½(τ_ik δ_jl + τ_jk δ_il + τ_il δ_jk + τ_jl δ_ik).
pub fn jaumann_modulus(c: &Tangent4, tau: &SymTensor) -> Tangent4 {
    let dim = c.dim();
    debug_assert_eq!(dim, tau.dim());
    let mut out = *c;
    let pairs = voigt_pairs(dim);
    for (va, &(i, j)) in pairs.iter().enumerate() {
        for (vb, &(k, l)) in pairs.iter().enumerate() {
            let del = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            out.m[va][vb] += 0.5
                * (tau.get(i, k) * del(j, l)
                    + tau.get(j, k) * del(i, l)
                    + tau.get(i, l) * del(j, k)
                    + tau.get(j, l) * del(i, k));
        }
    }
    out
}

/// Cauchy stress σ = τ/J.
pub fn cauchy_from_kirchhoff(tau: &SymTensor, j: f64) -> Result<SymTensor> {
    if !(j > 0.0) {
        return Err(Error::InvalidDeformation(format!("det F = {j} <= 0")));
    }
    Ok(tau.scale(1.0 / j))
}

/// Volumetric and isochoric logarithmic strain measures
/// (ω_iso, ω_vol) = (‖dev_n log V‖, |tr log V|).
pub fn log_strain_measures(s: &PrincipalState) -> (f64, f64) {
    let iso: f64 = (0..s.dim)
        .map(|i| s.loglam_bar[i] * s.loglam_bar[i])
        .sum::<f64>()
        .sqrt();
    let vol: f64 = s.loglam.iter().take(s.dim).sum::<f64>().abs();
    (iso, vol)
}
