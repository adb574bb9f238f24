//! Small dense tensor algebra in 2D/3D.
//!
//! Everything the constitutive layer needs to work in principal axes:
//! symmetric second-order tensors with spectral decomposition by the cyclic
//! Jacobi method, the principal matrix logarithm, deviatoric split, general
//! (two-point) matrices, and minor-symmetric fourth-order tensors in Voigt
//! storage.
//!
//! Voigt order is 11, 22, 33, 12, 23, 13 in 3D and 11, 22, 12 in 2D. The
//! fourth-order storage keeps raw tensor components (no engineering-shear
//! doubling); the factor 2 on shear lives in the discrete strain operator of
//! the element routines.

use crate::error::{Error, Result};

/// Voigt slot for the index pair (i, j), 3D.
const SYM_IDX_3: [[usize; 3]; 3] = [[0, 3, 5], [3, 1, 4], [5, 4, 2]];
/// Voigt slot for the index pair (i, j), 2D.
const SYM_IDX_2: [[usize; 2]; 2] = [[0, 2], [2, 1]];
/// Representative index pairs per Voigt slot, 3D.
pub const VOIGT_PAIRS_3: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)];
/// Representative index pairs per Voigt slot, 2D.
pub const VOIGT_PAIRS_2: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

/// Voigt slot of the pair (i, j) for the given dimension.
#[inline]
pub fn voigt_slot(dim: usize, i: usize, j: usize) -> usize {
    match dim {
        2 => SYM_IDX_2[i][j],
        _ => SYM_IDX_3[i][j],
    }
}

/// Number of Voigt slots (3 in 2D, 6 in 3D).
#[inline]
pub fn voigt_size(dim: usize) -> usize {
    if dim == 2 {
        3
    } else {
        6
    }
}

/// Representative (i, j) pairs for each Voigt slot.
#[inline]
pub fn voigt_pairs(dim: usize) -> &'static [(usize, usize)] {
    if dim == 2 {
        &VOIGT_PAIRS_2
    } else {
        &VOIGT_PAIRS_3
    }
}

// ---------------------------------------------------------------------------
// Symmetric second-order tensors
// ---------------------------------------------------------------------------

/// Symmetric second-order tensor in 2D or 3D; only the upper triangle is
/// stored, in Voigt order [11, 22, 33, 12, 23, 13] (2D uses slots 0, 1, 3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor {
    dim: usize,
    s: [f64; 6],
}

impl SymTensor {
    pub fn zero(dim: usize) -> Self {
        debug_assert!(dim == 2 || dim == 3);
        SymTensor { dim, s: [0.0; 6] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zero(dim);
        for i in 0..dim {
            t.set(i, i, 1.0);
        }
        t
    }

    pub fn from_diag(dim: usize, d: &[f64]) -> Self {
        let mut t = Self::zero(dim);
        for i in 0..dim {
            t.set(i, i, d[i]);
        }
        t
    }

    /// Symmetric part of a full matrix.
    pub fn from_full_sym(dim: usize, m: &[[f64; 3]; 3]) -> Self {
        let mut t = Self::zero(dim);
        for i in 0..dim {
            for j in i..dim {
                t.set(i, j, 0.5 * (m[i][j] + m[j][i]));
            }
        }
        t
    }

    /// Dyadic product v ⊗ v.
    pub fn from_dyad(dim: usize, v: &[f64; 3]) -> Self {
        let mut t = Self::zero(dim);
        for i in 0..dim {
            for j in i..dim {
                t.set(i, j, v[i] * v[j]);
            }
        }
        t
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.s[self.slot(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j);
        self.s[k] = v;
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.dim && j < self.dim);
        // 2D pairs reuse the 3D upper-triangle layout (12 sits in slot 3).
        SYM_IDX_3[i][j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        let mut n = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                n += self.get(i, j) * self.get(i, j);
            }
        }
        n.sqrt()
    }

    /// Deviatoric part dev_n X = X − (tr X / n) 1, with n the tensor dimension.
    pub fn dev(&self) -> SymTensor {
        let p = self.trace() / self.dim as f64;
        let mut t = *self;
        for i in 0..self.dim {
            t.set(i, i, self.get(i, i) - p);
        }
        t
    }

    pub fn scale(&self, c: f64) -> SymTensor {
        let mut t = *self;
        for v in t.s.iter_mut() {
            *v *= c;
        }
        t
    }

    pub fn add(&self, other: &SymTensor) -> SymTensor {
        debug_assert_eq!(self.dim, other.dim);
        let mut t = *self;
        for (v, w) in t.s.iter_mut().zip(other.s.iter()) {
            *v += w;
        }
        t
    }

    pub fn sub(&self, other: &SymTensor) -> SymTensor {
        self.add(&other.scale(-1.0))
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut r = [0.0; 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                r[i] += self.get(i, j) * v[j];
            }
        }
        r
    }

    pub fn to_full(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[i][j] = self.get(i, j);
            }
        }
        m
    }
}

// ---------------------------------------------------------------------------
// General (non-symmetric) small matrices
// ---------------------------------------------------------------------------

/// General dim×dim matrix; carrier for the deformation gradient F and the
/// first Piola-Kirchhoff stress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix {
    dim: usize,
    pub m: [[f64; 3]; 3],
}

impl Matrix {
    pub fn zero(dim: usize) -> Self {
        debug_assert!(dim == 2 || dim == 3);
        Matrix {
            dim,
            m: [[0.0; 3]; 3],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut a = Self::zero(dim);
        for i in 0..dim {
            a.m[i][i] = 1.0;
        }
        a
    }

    pub fn from_rows(dim: usize, rows: [[f64; 3]; 3]) -> Self {
        Matrix { dim, m: rows }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.m[i][j] = v;
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        match self.dim {
            2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
            _ => {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            }
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.m[i][j] = self.m[j][i];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.dim, other.dim);
        let mut r = Matrix::zero(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut s = 0.0;
                for k in 0..self.dim {
                    s += self.m[i][k] * other.m[k][j];
                }
                r.m[i][j] = s;
            }
        }
        r
    }

    pub fn mul_vec(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut r = [0.0; 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                r[i] += self.m[i][j] * v[j];
            }
        }
        r
    }

    /// Inverse by adjugate; errors on a vanishing determinant.
    pub fn inverse(&self) -> Result<Matrix> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(Error::InvalidDeformation(format!(
                "singular {}x{} matrix (det = {d})",
                self.dim, self.dim
            )));
        }
        let m = &self.m;
        let mut inv = Matrix::zero(self.dim);
        match self.dim {
            2 => {
                inv.m[0][0] = m[1][1] / d;
                inv.m[0][1] = -m[0][1] / d;
                inv.m[1][0] = -m[1][0] / d;
                inv.m[1][1] = m[0][0] / d;
            }
            _ => {
                inv.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
                inv.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
                inv.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
                inv.m[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
                inv.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
                inv.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
                inv.m[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
                inv.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
                inv.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
            }
        }
        Ok(inv)
    }

    /// Left Cauchy-Green tensor B = F Fᵀ.
    pub fn b_left(&self) -> SymTensor {
        let mut b = SymTensor::zero(self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let mut s = 0.0;
                for k in 0..self.dim {
                    s += self.m[i][k] * self.m[j][k];
                }
                b.set(i, j, s);
            }
        }
        b
    }

    /// Right Cauchy-Green tensor C = Fᵀ F.
    pub fn c_right(&self) -> SymTensor {
        let mut c = SymTensor::zero(self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let mut s = 0.0;
                for k in 0..self.dim {
                    s += self.m[k][i] * self.m[k][j];
                }
                c.set(i, j, s);
            }
        }
        c
    }
}

// ---------------------------------------------------------------------------
// Spectral decomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Maximum number of Jacobi sweeps; never reached for 2×2/3×3 symmetric input.
const JACOBI_MAX_SWEEPS: usize = 50;

/// Eigenvalues and orthonormal eigenvectors of a [`SymTensor`].
///
/// Eigenvalues are sorted descending; ties keep the order the rotations
/// produced, so the output is deterministic. In 3D the frame is made
/// right-handed.
#[derive(Debug, Clone, Copy)]
pub struct Spectral {
    pub dim: usize,
    /// Eigenvalues, descending. Only the first `dim` entries are meaningful.
    pub values: [f64; 3],
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: [[f64; 3]; 3],
}

impl Spectral {
    /// Σ λ_k v_k ⊗ v_k.
    pub fn reconstruct(&self) -> SymTensor {
        let mut t = SymTensor::zero(self.dim);
        for k in 0..self.dim {
            t = t.add(&SymTensor::from_dyad(self.dim, &self.vectors[k]).scale(self.values[k]));
        }
        t
    }
}

/// Spectral decomposition of a symmetric tensor by the cyclic Jacobi method.
///
/// Rotations below 1e-15·‖a‖_F are skipped; on exit the off-diagonal norm of
/// the rotated matrix is below 1e-14·‖a‖_F.
pub fn jacobi_eigen(a: &SymTensor) -> Result<Spectral> {
    let dim = a.dim();
    let norm = a.frob_norm();

    let mut m = a.to_full();
    let mut q = [[0.0; 3]; 3];
    for (i, row) in q.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    if norm > 0.0 {
        let threshold = 1e-15 * norm;
        let pairs: &[(usize, usize)] = if dim == 2 {
            &[(0, 1)]
        } else {
            &[(0, 1), (0, 2), (1, 2)]
        };
        let mut converged = false;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            let mut off = 0.0;
            for &(p, r) in pairs {
                off += 2.0 * m[p][r] * m[p][r];
            }
            if off.sqrt() < 1e-14 * norm {
                converged = true;
                break;
            }
            for &(p, r) in pairs {
                if m[p][r].abs() <= threshold {
                    continue;
                }
                // Classical Jacobi rotation annihilating m[p][r].
                let theta = (m[r][r] - m[p][p]) / (2.0 * m[p][r]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let mkp = m[k][p];
                    let mkr = m[k][r];
                    m[k][p] = c * mkp - s * mkr;
                    m[k][r] = s * mkp + c * mkr;
                }
                for k in 0..dim {
                    let mpk = m[p][k];
                    let mrk = m[r][k];
                    m[p][k] = c * mpk - s * mrk;
                    m[r][k] = s * mpk + c * mrk;
                }
                for row in q.iter_mut().take(dim) {
                    let qkp = row[p];
                    let qkr = row[r];
                    row[p] = c * qkp - s * qkr;
                    row[r] = s * qkp + c * qkr;
                }
            }
        }
        if !converged {
            let mut off = 0.0;
            for &(p, r) in pairs {
                off += 2.0 * m[p][r] * m[p][r];
            }
            if off.sqrt() >= 1e-14 * norm {
                return Err(Error::JacobiNonConvergence(JACOBI_MAX_SWEEPS));
            }
        }
    }

    // Sort descending; stable so exact ties keep the rotation-produced frame.
    let mut order: [usize; 3] = [0, 1, 2];
    order[..dim].sort_by(|&i, &j| m[j][j].partial_cmp(&m[i][i]).unwrap());

    let mut values = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    if dim == 2 {
        vectors[2] = [0.0, 0.0, 1.0];
    }
    for k in 0..dim {
        values[k] = m[order[k]][order[k]];
        for i in 0..dim {
            vectors[k][i] = q[i][order[k]];
        }
    }

    // Make the frame right-handed by flipping the last vector if needed.
    let handed = if dim == 2 {
        vectors[0][0] * vectors[1][1] - vectors[0][1] * vectors[1][0]
    } else {
        let c = cross(&vectors[0], &vectors[1]);
        dot(&c, &vectors[2])
    };
    if handed < 0.0 {
        for v in vectors[dim - 1].iter_mut() {
            *v = -*v;
        }
    }

    Ok(Spectral { dim, values, vectors })
}

/// Principal matrix logarithm of V = √B from the spectral decomposition of B:
/// log V = Σ ½ log(λ_k²) n⊗n. Errors on nonpositive eigenvalues (inverted
/// deformation state).
pub fn spectral_log(s: &Spectral) -> Result<SymTensor> {
    let mut t = SymTensor::zero(s.dim);
    for k in 0..s.dim {
        if s.values[k] <= 0.0 {
            return Err(Error::InvalidDeformation(format!(
                "nonpositive eigenvalue {} of B; element inversion",
                s.values[k]
            )));
        }
        let l = 0.5 * s.values[k].ln();
        t = t.add(&SymTensor::from_dyad(s.dim, &s.vectors[k]).scale(l));
    }
    Ok(t)
}

#[inline]
pub fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

// ---------------------------------------------------------------------------
// Fourth-order tensors in Voigt storage
// ---------------------------------------------------------------------------

/// Minor-symmetric fourth-order tensor stored as a Voigt matrix (3×3 in 2D
/// with order 11, 22, 12; 6×6 in 3D with order 11, 22, 33, 12, 23, 13).
///
/// Entries are raw tensor components; shear rows/columns carry no factor 2.
/// Major symmetry holds for the spatial and material moduli but is not
/// enforced by the storage (the mixed and Jaumann forms need not have it).
#[derive(Debug, Clone, Copy)]
pub struct Tangent4 {
    dim: usize,
    pub m: [[f64; 6]; 6],
}

impl Tangent4 {
    pub fn zero(dim: usize) -> Self {
        debug_assert!(dim == 2 || dim == 3);
        Tangent4 {
            dim,
            m: [[0.0; 6]; 6],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of Voigt rows/columns in use.
    #[inline]
    pub fn vsize(&self) -> usize {
        voigt_size(self.dim)
    }

    /// Component T_ijkl (minor symmetries resolved by the storage).
    #[inline]
    pub fn comp(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.m[voigt_slot(self.dim, i, j)][voigt_slot(self.dim, k, l)]
    }

    #[inline]
    pub fn set_comp(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.m[voigt_slot(self.dim, i, j)][voigt_slot(self.dim, k, l)] = v;
    }

    #[inline]
    pub fn add_comp(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.m[voigt_slot(self.dim, i, j)][voigt_slot(self.dim, k, l)] += v;
    }

    pub fn add(&self, other: &Tangent4) -> Tangent4 {
        debug_assert_eq!(self.dim, other.dim);
        let mut t = *self;
        for a in 0..6 {
            for b in 0..6 {
                t.m[a][b] += other.m[a][b];
            }
        }
        t
    }

    pub fn sub(&self, other: &Tangent4) -> Tangent4 {
        debug_assert_eq!(self.dim, other.dim);
        let mut t = *self;
        for a in 0..6 {
            for b in 0..6 {
                t.m[a][b] -= other.m[a][b];
            }
        }
        t
    }

    pub fn frob_norm(&self) -> f64 {
        let n = self.vsize();
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += self.m[a][b] * self.m[a][b];
            }
        }
        s.sqrt()
    }

    /// Double contraction with a symmetric tensor: (T : s)_ij = T_ijkl s_kl.
    pub fn contract_sym(&self, s: &SymTensor) -> SymTensor {
        let mut r = SymTensor::zero(self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let mut acc = 0.0;
                for k in 0..self.dim {
                    for l in 0..self.dim {
                        acc += self.comp(i, j, k, l) * s.get(k, l);
                    }
                }
                r.set(i, j, acc);
            }
        }
        r
    }
}

/// Pack a minor-symmetric fourth-order component array into Voigt storage.
pub fn voigt_pack(dim: usize, t: &[[[[f64; 3]; 3]; 3]; 3]) -> Tangent4 {
    let mut out = Tangent4::zero(dim);
    let pairs = voigt_pairs(dim);
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for (b, &(k, l)) in pairs.iter().enumerate() {
            out.m[a][b] = t[i][j][k][l];
        }
    }
    out
}

/// Expand Voigt storage back to the full component array (minor symmetries
/// replicated).
pub fn voigt_unpack(t: &Tangent4) -> [[[[f64; 3]; 3]; 3]; 3] {
    let dim = t.dim;
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    out[i][j][k][l] = t.comp(i, j, k, l);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    fn random_spd(rng: &mut impl Rng, dim: usize) -> SymTensor {
        // A = M Mᵀ + ε1 with random M keeps eigenvalues positive.
        let mut m = Matrix::zero(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        m.b_left().add(&SymTensor::identity(dim).scale(0.05))
    }

    #[test]
    fn jacobi_diagonal_input() {
        let a = SymTensor::from_diag(3, &[4.0, 1.0, 1.0]);
        let s = jacobi_eigen(&a).unwrap();
        assert_eq!(s.values[0], 4.0);
        assert_eq!(s.values[1], 1.0);
        assert_eq!(s.values[2], 1.0);
        // Eigenvectors are a (signed) permutation of the standard basis.
        for k in 0..3 {
            let v = s.vectors[k];
            let big = v.iter().filter(|x| x.abs() > 0.9).count();
            let small = v.iter().filter(|x| x.abs() < 1e-12).count();
            assert_eq!(big, 1);
            assert_eq!(small, 2);
        }
    }

    #[test]
    fn jacobi_identity_input() {
        let s = jacobi_eigen(&SymTensor::identity(3)).unwrap();
        for k in 0..3 {
            assert_eq!(s.values[k], 1.0);
        }
        // Orthonormal frame.
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(&s.vectors[i], &s.vectors[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_reconstruction_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for dim in [2usize, 3] {
            for _ in 0..1000 {
                let a = random_spd(&mut rng, dim);
                let s = jacobi_eigen(&a).unwrap();
                let r = s.reconstruct();
                let err = r.sub(&a).frob_norm() / a.frob_norm();
                assert!(err < 1e-10, "reconstruction error {err} for dim {dim}");
                // Orthonormality of the frame to 1e-12.
                for i in 0..dim {
                    for j in 0..dim {
                        let d = dot(&s.vectors[i], &s.vectors[j]);
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((d - expect).abs() < 1e-12);
                    }
                }
                // Descending order.
                for k in 1..dim {
                    assert!(s.values[k - 1] >= s.values[k]);
                }
                // Right-handed frame.
                let handed = if dim == 2 {
                    s.vectors[0][0] * s.vectors[1][1] - s.vectors[0][1] * s.vectors[1][0]
                } else {
                    dot(&cross(&s.vectors[0], &s.vectors[1]), &s.vectors[2])
                };
                assert!(handed > 0.0);
            }
        }
    }

    #[test]
    fn spectral_log_identity_is_zero() {
        let s = jacobi_eigen(&SymTensor::identity(3)).unwrap();
        let l = spectral_log(&s).unwrap();
        assert!(l.frob_norm() < 1e-15);
    }

    #[test]
    fn spectral_log_diagonal() {
        let b = SymTensor::from_diag(3, &[4.0, 1.0, 1.0]);
        let l = spectral_log(&jacobi_eigen(&b).unwrap()).unwrap();
        assert!(rel_err(l.get(0, 0), 2f64.ln()) < 1e-14);
        assert!(l.get(1, 1).abs() < 1e-14);
        assert!(l.get(2, 2).abs() < 1e-14);
    }

    #[test]
    fn spectral_log_exp_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let b = random_spd(&mut rng, 3);
            let sb = jacobi_eigen(&b).unwrap();
            let logv = spectral_log(&sb).unwrap();
            // exp(log V) recomposed must equal V = √B.
            let sl = jacobi_eigen(&logv).unwrap();
            let mut expv = SymTensor::zero(3);
            for k in 0..3 {
                expv = expv.add(
                    &SymTensor::from_dyad(3, &sl.vectors[k]).scale(sl.values[k].exp()),
                );
            }
            let mut v = SymTensor::zero(3);
            for k in 0..3 {
                v = v.add(&SymTensor::from_dyad(3, &sb.vectors[k]).scale(sb.values[k].sqrt()));
            }
            let err = expv.sub(&v).frob_norm() / v.frob_norm();
            assert!(err < 1e-10, "exp/log round trip error {err}");
        }
    }

    #[test]
    fn spectral_log_scaling_shift() {
        // Scaling B by c² shifts log V by (ln c)·1.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let b = random_spd(&mut rng, 3);
            let c: f64 = rng.gen_range(0.1..10.0);
            let l0 = spectral_log(&jacobi_eigen(&b).unwrap()).unwrap();
            let l1 = spectral_log(&jacobi_eigen(&b.scale(c * c)).unwrap()).unwrap();
            let shift = l1.sub(&l0).sub(&SymTensor::identity(3).scale(c.ln()));
            assert!(shift.frob_norm() < 1e-10 * (1.0 + l1.frob_norm()));
        }
    }

    #[test]
    fn spectral_log_rejects_nonpositive() {
        let b = SymTensor::from_diag(3, &[1.0, 1.0, -0.5]);
        let s = jacobi_eigen(&b).unwrap();
        assert!(matches!(
            spectral_log(&s),
            Err(Error::InvalidDeformation(_))
        ));
    }

    #[test]
    fn dev_cases() {
        assert!(SymTensor::identity(3).dev().frob_norm() < 1e-15);

        let d = SymTensor::from_diag(3, &[2f64.ln(), 0.0, 0.0]).dev();
        assert!(rel_err(d.get(0, 0), 2.0 / 3.0 * 2f64.ln()) < 1e-14);
        assert!(rel_err(d.get(1, 1), -1.0 / 3.0 * 2f64.ln()) < 1e-14);
        assert!(rel_err(d.get(2, 2), -1.0 / 3.0 * 2f64.ln()) < 1e-14);

        let d2 = SymTensor::from_diag(2, &[0.7, 0.1]).dev();
        assert!(rel_err(d2.get(0, 0), 0.3) < 1e-14);
        assert!(rel_err(d2.get(1, 1), -0.3) < 1e-14);
    }

    #[test]
    fn dev_is_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for dim in [2usize, 3] {
            for _ in 0..50 {
                let a = random_spd(&mut rng, dim);
                let d = a.dev();
                assert!(d.trace().abs() < 1e-14 * a.frob_norm().max(1.0));
                assert!(d.dev().sub(&d).frob_norm() < 1e-14 * a.frob_norm().max(1.0));
            }
        }
    }

    #[test]
    fn voigt_identity_tensor() {
        // I_ijkl = ½(δik δjl + δil δjk) packs to diag(1, 1, 1, ½, ½, ½).
        let mut id = [[[[0.0; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let dik = (i == k) as usize as f64;
                        let djl = (j == l) as usize as f64;
                        let dil = (i == l) as usize as f64;
                        let djk = (j == k) as usize as f64;
                        id[i][j][k][l] = 0.5 * (dik * djl + dil * djk);
                    }
                }
            }
        }
        let v = voigt_pack(3, &id);
        for a in 0..6 {
            for b in 0..6 {
                let expect = match (a, b) {
                    (a, b) if a == b && a < 3 => 1.0,
                    (a, b) if a == b => 0.5,
                    _ => 0.0,
                };
                assert_eq!(v.m[a][b], expect, "slot ({a},{b})");
            }
        }
    }

    #[test]
    fn voigt_pack_unpack_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for dim in [2usize, 3] {
            // Random minor-symmetric tensor.
            let mut t = [[[[0.0; 3]; 3]; 3]; 3];
            for i in 0..dim {
                for j in i..dim {
                    for k in 0..dim {
                        for l in k..dim {
                            let v = rng.gen_range(-1.0..1.0);
                            t[i][j][k][l] = v;
                            t[j][i][k][l] = v;
                            t[i][j][l][k] = v;
                            t[j][i][l][k] = v;
                        }
                    }
                }
            }
            let packed = voigt_pack(dim, &t);
            let unpacked = voigt_unpack(&packed);
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        for l in 0..dim {
                            assert_eq!(unpacked[i][j][k][l], t[i][j][k][l]);
                        }
                    }
                }
            }
            let repacked = voigt_pack(dim, &unpacked);
            for a in 0..6 {
                for b in 0..6 {
                    assert_eq!(repacked.m[a][b], packed.m[a][b]);
                }
            }
        }
    }

    #[test]
    fn voigt_zero() {
        let z = [[[[0.0; 3]; 3]; 3]; 3];
        let v = voigt_pack(3, &z);
        assert_eq!(v.frob_norm(), 0.0);
    }

    #[test]
    fn jacobi_zero_matrix() {
        let s = jacobi_eigen(&SymTensor::zero(3)).unwrap();
        assert_eq!(s.values, [0.0; 3]);
        assert!(s.reconstruct().frob_norm() == 0.0);
    }
}
