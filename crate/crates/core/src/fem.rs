//! Isoparametric Q4/H8 elements, Gauss quadrature, element kernels and
//! sparse global assembly.
//!
//! The discrete problem follows the standard updated-kinematics form with
//! reference-volume integration: at each Gauss point the deformation
//! gradient is interpolated as F = Σ_A (X_A + u_A) ⊗ ∇_X N^A, spatial shape
//! gradients follow from ∇_x N^A = F⁻ᵀ ∇_X N^A, and the element
//! contributions are
//!
//! ```text
//! f_int^A = ∫ τ ∇_x N^A dV,
//! K^AB    = ∫ 𝔹ᵀ[N^A] C̃ 𝔹[N^B] dV + (∫ ∇_x N^A · τ ∇_x N^B dV) I_n,
//! ```
//!
//! with full 2^n Gauss quadrature. The strain operator 𝔹 carries the factor
//! 2 on shear rows; the modulus stores plain tensor components.

use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::material::{spatial_tangent_and_stress, MaterialParams};
use crate::tensor::{voigt_size, Matrix, SymTensor};

/// Maximum nodes per element (H8).
pub const MAX_EN: usize = 8;
/// Maximum element dofs (H8: 8 nodes × 3).
pub const MAX_EDOF: usize = 24;

// ---------------------------------------------------------------------------
// Elements and quadrature
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    /// 4-node bilinear quadrilateral (2D).
    Q4,
    /// 8-node trilinear hexahedron (3D).
    H8,
}

impl ElementKind {
    pub fn dim(&self) -> usize {
        match self {
            ElementKind::Q4 => 2,
            ElementKind::H8 => 3,
        }
    }

    pub fn n_nodes(&self) -> usize {
        match self {
            ElementKind::Q4 => 4,
            ElementKind::H8 => 8,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ElementKind::Q4 => "q4",
            ElementKind::H8 => "h8",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "q4" | "Q4" => Ok(ElementKind::Q4),
            "h8" | "H8" => Ok(ElementKind::H8),
            other => Err(Error::Config(format!("unknown element kind '{other}'"))),
        }
    }
}

/// Reference coordinates of the element nodes (isoparametric corners).
pub(crate) const H8_CORNERS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];
pub(crate) const Q4_CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// Shape function values and gradients with respect to the isoparametric
/// coordinates at ζ. Only the first `n_nodes` slots are meaningful.
pub fn shape_functions(kind: ElementKind, zeta: &[f64; 3]) -> ([f64; MAX_EN], [[f64; 3]; MAX_EN]) {
    let mut n = [0.0; MAX_EN];
    let mut g = [[0.0; 3]; MAX_EN];
    match kind {
        ElementKind::Q4 => {
            for (a, c) in Q4_CORNERS.iter().enumerate() {
                n[a] = 0.25 * (1.0 + c[0] * zeta[0]) * (1.0 + c[1] * zeta[1]);
                g[a][0] = 0.25 * c[0] * (1.0 + c[1] * zeta[1]);
                g[a][1] = 0.25 * (1.0 + c[0] * zeta[0]) * c[1];
            }
        }
        ElementKind::H8 => {
            for (a, c) in H8_CORNERS.iter().enumerate() {
                let f0 = 1.0 + c[0] * zeta[0];
                let f1 = 1.0 + c[1] * zeta[1];
                let f2 = 1.0 + c[2] * zeta[2];
                n[a] = 0.125 * f0 * f1 * f2;
                g[a][0] = 0.125 * c[0] * f1 * f2;
                g[a][1] = 0.125 * f0 * c[1] * f2;
                g[a][2] = 0.125 * f0 * f1 * c[2];
            }
        }
    }
    (n, g)
}

/// Full Gauss quadrature: 2^dim points at ±1/√3, unit weights.
pub fn gauss_points(kind: ElementKind) -> Vec<([f64; 3], f64)> {
    let a = 1.0 / 3f64.sqrt();
    match kind {
        ElementKind::Q4 => vec![
            ([-a, -a, 0.0], 1.0),
            ([a, -a, 0.0], 1.0),
            ([a, a, 0.0], 1.0),
            ([-a, a, 0.0], 1.0),
        ],
        ElementKind::H8 => {
            let mut pts = Vec::with_capacity(8);
            for &z in &[-a, a] {
                for &y in &[-a, a] {
                    for &x in &[-a, a] {
                        pts.push(([x, y, z], 1.0));
                    }
                }
            }
            pts
        }
    }
}

// ---------------------------------------------------------------------------
// Mesh
// ---------------------------------------------------------------------------

/// Nodes and connectivity of a Q4 or H8 mesh. Coordinates in mm.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    pub kind: ElementKind,
    pub nodes: Vec<[f64; 3]>,
    conn: Vec<usize>,
}

impl Mesh {
    pub fn new(kind: ElementKind, nodes: Vec<[f64; 3]>, conn: Vec<usize>) -> Result<Self> {
        let en = kind.n_nodes();
        if conn.len() % en != 0 {
            return Err(Error::Config(format!(
                "connectivity length {} is not a multiple of {en}",
                conn.len()
            )));
        }
        if let Some(&bad) = conn.iter().find(|&&i| i >= nodes.len()) {
            return Err(Error::Config(format!(
                "connectivity index {bad} out of range ({} nodes)",
                nodes.len()
            )));
        }
        Ok(Mesh {
            dim: kind.dim(),
            kind,
            nodes,
            conn,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elems(&self) -> usize {
        self.conn.len() / self.kind.n_nodes()
    }

    pub fn n_dofs(&self) -> usize {
        self.dim * self.n_nodes()
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let en = self.kind.n_nodes();
        &self.conn[e * en..(e + 1) * en]
    }

    /// Checks that the reference configuration has positive Jacobians at all
    /// Gauss points.
    pub fn validate_reference(&self) -> Result<()> {
        let zero = vec![0.0; self.n_dofs()];
        for e in 0..self.n_elems() {
            self.gauss_states(e, &zero)?;
        }
        Ok(())
    }

    /// Deformation state at all Gauss points of element `e` under the global
    /// displacement vector `u`.
    pub fn gauss_states(&self, e: usize, u: &[f64]) -> Result<Vec<GaussPointState>> {
        let en = self.kind.n_nodes();
        let mut xe = [[0.0; 3]; MAX_EN];
        let mut ue = [[0.0; 3]; MAX_EN];
        for (a, &node) in self.element(e).iter().enumerate() {
            xe[a] = self.nodes[node];
            for i in 0..self.dim {
                ue[a][i] = u[node * self.dim + i];
            }
        }
        gauss_points(self.kind)
            .iter()
            .map(|&(zeta, w)| deformation_gradient(self.kind, &xe[..en], &ue[..en], &zeta, w, e))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Plain-text mesh format
// ---------------------------------------------------------------------------

/// Reads the plain-text mesh format: a header line `dim nnodes nelems kind`,
/// `nnodes` coordinate lines, then `nelems` 0-based connectivity lines.
pub fn read_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty mesh file", path.display())))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 {
        return Err(Error::Config(format!(
            "{}: header must be 'dim nnodes nelems kind'",
            path.display()
        )));
    }
    let parse_usize = |s: &str, what: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Config(format!("{}: bad {what} '{s}'", path.display())))
    };
    let dim = parse_usize(h[0], "dim")?;
    let nnodes = parse_usize(h[1], "nnodes")?;
    let nelems = parse_usize(h[2], "nelems")?;
    let kind = ElementKind::parse(h[3])?;
    if kind.dim() != dim {
        return Err(Error::Config(format!(
            "{}: kind {} does not match dim {dim}",
            path.display(),
            kind.name()
        )));
    }
    let mut nodes = Vec::with_capacity(nnodes);
    for _ in 0..nnodes {
        let line = lines
            .next()
            .ok_or_else(|| Error::Config(format!("{}: missing node lines", path.display())))?;
        let c: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::Config(format!("{}: bad coordinate '{t}'", path.display())))
            })
            .collect::<Result<_>>()?;
        if c.len() != dim {
            return Err(Error::Config(format!(
                "{}: expected {dim} coordinates per node",
                path.display()
            )));
        }
        let mut x = [0.0; 3];
        x[..dim].copy_from_slice(&c);
        nodes.push(x);
    }
    let en = kind.n_nodes();
    let mut conn = Vec::with_capacity(nelems * en);
    for _ in 0..nelems {
        let line = lines.next().ok_or_else(|| {
            Error::Config(format!("{}: missing connectivity lines", path.display()))
        })?;
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(|t| parse_usize(t, "node index"))
            .collect::<Result<_>>()?;
        if ids.len() != en {
            return Err(Error::Config(format!(
                "{}: expected {en} indices per element",
                path.display()
            )));
        }
        conn.extend(ids);
    }
    Mesh::new(kind, nodes, conn)
}

/// Writes the plain-text mesh format (exact round-trip coordinates).
pub fn write_mesh(path: &Path, mesh: &Mesh) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::new();
    out.push_str(&format!(
        "{} {} {} {}\n",
        mesh.dim,
        mesh.n_nodes(),
        mesh.n_elems(),
        mesh.kind.name()
    ));
    for x in &mesh.nodes {
        for i in 0..mesh.dim {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{}", x[i]));
        }
        out.push('\n');
    }
    for e in 0..mesh.n_elems() {
        let ids = mesh.element(e);
        for (i, id) in ids.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{id}"));
        }
        out.push('\n');
    }
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Dirichlet bookkeeping
// ---------------------------------------------------------------------------

/// Constrained-dof table. Each constrained dof carries a pattern value; the
/// load program scales the pattern per step (fixed dofs have pattern 0).
#[derive(Debug, Clone)]
pub struct DofMap {
    pub dim: usize,
    pub n_nodes: usize,
    constraints: BTreeMap<usize, f64>,
}

impl DofMap {
    pub fn new(dim: usize, n_nodes: usize) -> Self {
        DofMap {
            dim,
            n_nodes,
            constraints: BTreeMap::new(),
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.dim * self.n_nodes
    }

    /// Constrains component `comp` of `node` with the given pattern value.
    pub fn constrain(&mut self, node: usize, comp: usize, pattern: f64) {
        debug_assert!(node < self.n_nodes && comp < self.dim);
        self.constraints.insert(node * self.dim + comp, pattern);
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constraints.contains_key(&dof)
    }

    pub fn n_constrained(&self) -> usize {
        self.constraints.len()
    }

    pub fn constrained(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.constraints.iter().map(|(&d, &p)| (d, p))
    }

    /// Free/constrained partition with a dof → free-index map.
    pub fn partition(&self) -> DofPartition {
        let ndof = self.n_dofs();
        let mut free_index = vec![usize::MAX; ndof];
        let mut free_dofs = Vec::with_capacity(ndof - self.constraints.len());
        for dof in 0..ndof {
            if !self.constraints.contains_key(&dof) {
                free_index[dof] = free_dofs.len();
                free_dofs.push(dof);
            }
        }
        DofPartition {
            free_index,
            free_dofs,
            constrained: self.constraints.iter().map(|(&d, &p)| (d, p)).collect(),
        }
    }
}

/// Frozen free/constrained split of the dof set.
#[derive(Debug, Clone)]
pub struct DofPartition {
    /// Per dof: its index in `free_dofs`, or `usize::MAX` if constrained.
    pub free_index: Vec<usize>,
    pub free_dofs: Vec<usize>,
    /// Constrained dofs with their pattern values, ascending by dof.
    pub constrained: Vec<(usize, f64)>,
}

impl DofPartition {
    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }
}

// ---------------------------------------------------------------------------
// Kinematics at a Gauss point
// ---------------------------------------------------------------------------

/// Deformation data at one Gauss point.
#[derive(Debug, Clone)]
pub struct GaussPointState {
    pub f: Matrix,
    pub b: SymTensor,
    /// Quadrature weight × reference Jacobian determinant (mm^dim).
    pub dvol: f64,
    /// Spatial shape-function gradients ∇_x N^A (1/mm).
    pub grad_x: Vec<[f64; 3]>,
}

/// Deformation gradient and spatial shape gradients at ζ for an element with
/// reference nodes `xe` and nodal displacements `ue`.
pub fn deformation_gradient(
    kind: ElementKind,
    xe: &[[f64; 3]],
    ue: &[[f64; 3]],
    zeta: &[f64; 3],
    weight: f64,
    elem_id: usize,
) -> Result<GaussPointState> {
    let dim = kind.dim();
    let en = kind.n_nodes();
    let (_, gz) = shape_functions(kind, zeta);

    // Isoparametric Jacobian J = ∂X/∂ζ.
    let mut jmat = Matrix::zero(dim);
    for a in 0..en {
        for i in 0..dim {
            for j in 0..dim {
                jmat.m[i][j] += xe[a][i] * gz[a][j];
            }
        }
    }
    let detj = jmat.det();
    if detj <= 0.0 {
        return Err(Error::DegenerateElement {
            element: elem_id,
            detj,
        });
    }
    let jinv = jmat.inverse()?;

    // Reference gradients ∇_X N^A = J⁻ᵀ ∇_ζ N^A.
    let mut grad_ref = vec![[0.0; 3]; en];
    for a in 0..en {
        for i in 0..dim {
            for j in 0..dim {
                grad_ref[a][i] += jinv.m[j][i] * gz[a][j];
            }
        }
    }

    // F = Σ (X_A + u_A) ⊗ ∇_X N^A.
    let mut f = Matrix::zero(dim);
    for a in 0..en {
        for i in 0..dim {
            for j in 0..dim {
                f.m[i][j] += (xe[a][i] + ue[a][i]) * grad_ref[a][j];
            }
        }
    }
    let detf = f.det();
    if detf <= 0.0 {
        return Err(Error::InvertedElement {
            element: elem_id,
            detf,
        });
    }

    // Spatial gradients ∇_x N^A = F⁻ᵀ ∇_X N^A.
    let finv = f.inverse()?;
    let mut grad_x = vec![[0.0; 3]; en];
    for a in 0..en {
        for i in 0..dim {
            for j in 0..dim {
                grad_x[a][i] += finv.m[j][i] * grad_ref[a][j];
            }
        }
    }

    Ok(GaussPointState {
        f,
        b: f.b_left(),
        dvol: weight * detj,
        grad_x,
    })
}

// ---------------------------------------------------------------------------
// Element kernels
// ---------------------------------------------------------------------------

/// Internal force vector, tangent stiffness and integrated strain energy of
/// one element.
#[derive(Debug, Clone)]
pub struct ElementMatrices {
    pub n_edof: usize,
    pub f_int: [f64; MAX_EDOF],
    pub k: [[f64; MAX_EDOF]; MAX_EDOF],
    pub energy: f64,
}

/// Integrates f_int and the two-term stiffness over the element's Gauss
/// points.
pub fn element_force_and_stiffness(
    p: &MaterialParams,
    states: &[GaussPointState],
) -> Result<ElementMatrices> {
    let dim = p.dim;
    let vs = voigt_size(dim);
    let en = states[0].grad_x.len();
    let n_edof = en * dim;

    let mut f_int = [0.0; MAX_EDOF];
    let mut k = [[0.0; MAX_EDOF]; MAX_EDOF];
    let mut energy = 0.0;

    for gp in states {
        let sat = spatial_tangent_and_stress(p, &gp.b)?;
        let dv = gp.dvol;
        energy += sat.energy * dv;

        // f_int^A = τ ∇_x N^A dV
        for a in 0..en {
            let tg = sat.tau.mul_vec(&gp.grad_x[a]);
            for i in 0..dim {
                f_int[a * dim + i] += tg[i] * dv;
            }
        }

        // Strain operator 𝔹 (engineering shear rows).
        let mut bmat = [[0.0; MAX_EDOF]; 6];
        for a in 0..en {
            let g = &gp.grad_x[a];
            if dim == 2 {
                bmat[0][a * 2] = g[0];
                bmat[1][a * 2 + 1] = g[1];
                bmat[2][a * 2] = g[1];
                bmat[2][a * 2 + 1] = g[0];
            } else {
                bmat[0][a * 3] = g[0];
                bmat[1][a * 3 + 1] = g[1];
                bmat[2][a * 3 + 2] = g[2];
                bmat[3][a * 3] = g[1];
                bmat[3][a * 3 + 1] = g[0];
                bmat[4][a * 3 + 1] = g[2];
                bmat[4][a * 3 + 2] = g[1];
                bmat[5][a * 3] = g[2];
                bmat[5][a * 3 + 2] = g[0];
            }
        }

        // Material part: 𝔹ᵀ C̃ 𝔹 dV, via CB = C̃ 𝔹 first.
        let mut cb = [[0.0; MAX_EDOF]; 6];
        for r in 0..vs {
            for c in 0..n_edof {
                let mut acc = 0.0;
                for s in 0..vs {
                    acc += sat.c_spatial.m[r][s] * bmat[s][c];
                }
                cb[r][c] = acc;
            }
        }
        for r in 0..n_edof {
            for c in 0..n_edof {
                let mut acc = 0.0;
                for s in 0..vs {
                    acc += bmat[s][r] * cb[s][c];
                }
                k[r][c] += acc * dv;
            }
        }

        // Geometric part: (∇_x N^A · τ ∇_x N^B) I_n dV.
        for a in 0..en {
            let ta = sat.tau.mul_vec(&gp.grad_x[a]);
            for b in 0..en {
                let mut g = 0.0;
                for i in 0..dim {
                    g += ta[i] * gp.grad_x[b][i];
                }
                g *= dv;
                for i in 0..dim {
                    k[a * dim + i][b * dim + i] += g;
                }
            }
        }
    }

    Ok(ElementMatrices {
        n_edof,
        f_int,
        k,
        energy,
    })
}

// ---------------------------------------------------------------------------
// Sparse assembly
// ---------------------------------------------------------------------------

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone)]
pub struct SparseMat {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseMat {
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
        y
    }

    /// Largest |a_ij − a_ji| over the stored pattern.
    pub fn symmetry_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                e = e.max((self.values[k] - self.get(j, i)).abs());
            }
        }
        e
    }

    pub fn frob_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Assembled global system at one displacement state.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub k: SparseMat,
    pub f_int: Vec<f64>,
    pub energy: f64,
}

/// Reusable assembler holding the sparsity pattern of the mesh.
#[derive(Debug, Clone)]
pub struct Assembler {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl Assembler {
    pub fn new(mesh: &Mesh) -> Self {
        let dim = mesh.dim;
        let ndof = mesh.n_dofs();
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); ndof];
        for e in 0..mesh.n_elems() {
            let nodes = mesh.element(e);
            for &na in nodes {
                for i in 0..dim {
                    let row = na * dim + i;
                    for &nb in nodes {
                        for j in 0..dim {
                            cols[row].push(nb * dim + j);
                        }
                    }
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(ndof + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for c in cols.iter_mut() {
            c.sort_unstable();
            c.dedup();
            col_idx.extend_from_slice(c);
            row_ptr.push(col_idx.len());
        }
        Assembler { row_ptr, col_idx }
    }

    /// Assembles the global tangent and internal force at state `u`.
    /// Element contributions are computed in parallel and merged in element
    /// order, so the result does not depend on the thread count.
    pub fn assemble(&self, mesh: &Mesh, p: &MaterialParams, u: &[f64]) -> Result<Assembly> {
        debug_assert_eq!(u.len(), mesh.n_dofs());
        let dim = mesh.dim;
        let elems: Vec<ElementMatrices> = (0..mesh.n_elems())
            .into_par_iter()
            .map(|e| {
                let states = mesh.gauss_states(e, u)?;
                element_force_and_stiffness(p, &states)
            })
            .collect::<Result<_>>()?;

        let mut values = vec![0.0; self.col_idx.len()];
        let mut f_int = vec![0.0; mesh.n_dofs()];
        let mut energy = 0.0;
        for (e, em) in elems.iter().enumerate() {
            energy += em.energy;
            let nodes = mesh.element(e);
            for (a, &na) in nodes.iter().enumerate() {
                for i in 0..dim {
                    let row = na * dim + i;
                    f_int[row] += em.f_int[a * dim + i];
                    let lo = self.row_ptr[row];
                    let hi = self.row_ptr[row + 1];
                    for (b, &nb) in nodes.iter().enumerate() {
                        for j in 0..dim {
                            let col = nb * dim + j;
                            let k = lo + self.col_idx[lo..hi].binary_search(&col).unwrap();
                            values[k] += em.k[a * dim + i][b * dim + j];
                        }
                    }
                }
            }
        }
        Ok(Assembly {
            k: SparseMat {
                n: mesh.n_dofs(),
                row_ptr: self.row_ptr.clone(),
                col_idx: self.col_idx.clone(),
                values,
            },
            f_int,
            energy,
        })
    }
}

/// Spec-shaped one-shot assembly result: global sparse tangent, residual
/// R = f_int − f_ext on free dofs, and reactions (f_int − f_ext) at
/// constrained dofs.
pub struct AssembledSystem {
    /// Full tangent (structure from connectivity, no condensation).
    pub k_full: SparseMat,
    /// Residual on free dofs, in `partition.free_dofs` order.
    pub r_free: Vec<f64>,
    /// (dof, reaction force) at each constrained dof.
    pub reactions: Vec<(usize, f64)>,
    pub partition: DofPartition,
    pub energy: f64,
}

pub fn assemble(
    mesh: &Mesh,
    dofmap: &DofMap,
    p: &MaterialParams,
    u: &[f64],
    f_ext: Option<&[f64]>,
) -> Result<AssembledSystem> {
    let asm = Assembler::new(mesh);
    let a = asm.assemble(mesh, p, u)?;
    let partition = dofmap.partition();
    let mut r_free = Vec::with_capacity(partition.n_free());
    for &dof in &partition.free_dofs {
        let fe = f_ext.map_or(0.0, |f| f[dof]);
        r_free.push(a.f_int[dof] - fe);
    }
    let reactions = partition
        .constrained
        .iter()
        .map(|&(dof, _)| {
            let fe = f_ext.map_or(0.0, |f| f[dof]);
            (dof, a.f_int[dof] - fe)
        })
        .collect();
    Ok(AssembledSystem {
        k_full: a.k,
        r_free,
        reactions,
        partition,
        energy: a.energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::MaterialParams;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn unit_cube() -> Mesh {
        let nodes = H8_CORNERS
            .iter()
            .map(|c| [0.5 * (c[0] + 1.0), 0.5 * (c[1] + 1.0), 0.5 * (c[2] + 1.0)])
            .collect();
        Mesh::new(ElementKind::H8, nodes, (0..8).collect()).unwrap()
    }

    fn unit_square() -> Mesh {
        let nodes = Q4_CORNERS
            .iter()
            .map(|c| [0.5 * (c[0] + 1.0), 0.5 * (c[1] + 1.0), 0.0])
            .collect();
        Mesh::new(ElementKind::Q4, nodes, (0..4).collect()).unwrap()
    }

    fn eh(dim: usize) -> MaterialParams {
        MaterialParams::exp_hencky(dim, 1.0, 4.7, 2.0, 3.0).unwrap()
    }

    #[test]
    fn q4_center_values() {
        let (n, _) = shape_functions(ElementKind::Q4, &[0.0, 0.0, 0.0]);
        for a in 0..4 {
            assert!((n[a] - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn h8_kronecker_at_corners() {
        for (a, c) in H8_CORNERS.iter().enumerate() {
            let (n, _) = shape_functions(ElementKind::H8, c);
            for b in 0..8 {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((n[b] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [ElementKind::Q4, ElementKind::H8] {
            for _ in 0..100 {
                let mut z = [0.0; 3];
                for zi in z.iter_mut().take(kind.dim()) {
                    *zi = rng.gen_range(-1.0..1.0);
                }
                let (n, g) = shape_functions(kind, &z);
                let sum: f64 = n.iter().take(kind.n_nodes()).sum();
                assert!((sum - 1.0).abs() < 1e-15);
                for j in 0..kind.dim() {
                    let gsum: f64 = (0..kind.n_nodes()).map(|a| g[a][j]).sum();
                    assert!(gsum.abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn deformation_gradient_zero_displacement() {
        let mesh = unit_cube();
        let u = vec![0.0; mesh.n_dofs()];
        for gp in mesh.gauss_states(0, &u).unwrap() {
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((gp.f.m[i][j] - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn deformation_gradient_affine_exact() {
        let mesh = unit_cube();
        let a = [[1.1, 0.2, -0.1], [0.05, 0.9, 0.1], [-0.02, 0.03, 1.2]];
        let mut u = vec![0.0; mesh.n_dofs()];
        for (n, x) in mesh.nodes.iter().enumerate() {
            for i in 0..3 {
                let mut v = -x[i];
                for j in 0..3 {
                    v += a[i][j] * x[j];
                }
                u[n * 3 + i] = v;
            }
        }
        for gp in mesh.gauss_states(0, &u).unwrap() {
            for i in 0..3 {
                for j in 0..3 {
                    assert!(
                        (gp.f.m[i][j] - a[i][j]).abs() < 1e-14,
                        "F[{i}][{j}] = {}",
                        gp.f.m[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn deformation_gradient_vs_fd_of_map() {
        // F at ζ from the code vs (∂x/∂ζ)(∂X/∂ζ)⁻¹ by finite differences of
        // the isoparametric maps.
        let mesh = unit_cube();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut u = vec![0.0; mesh.n_dofs()];
        for v in u.iter_mut() {
            *v = rng.gen_range(-0.05..0.05);
        }
        let zeta = [0.3, -0.2, 0.6];
        let en = 8;
        let mut xe = [[0.0; 3]; 8];
        let mut ue = [[0.0; 3]; 8];
        for (a, &node) in mesh.element(0).iter().enumerate() {
            xe[a] = mesh.nodes[node];
            for i in 0..3 {
                ue[a][i] = u[node * 3 + i];
            }
        }
        let gp = deformation_gradient(ElementKind::H8, &xe, &ue, &zeta, 1.0, 0).unwrap();

        let map = |z: &[f64; 3], deformed: bool| -> [f64; 3] {
            let (n, _) = shape_functions(ElementKind::H8, z);
            let mut x = [0.0; 3];
            for a in 0..en {
                for i in 0..3 {
                    x[i] += n[a] * (xe[a][i] + if deformed { ue[a][i] } else { 0.0 });
                }
            }
            x
        };
        let h = 1e-6;
        let mut dxdz = Matrix::zero(3);
        let mut dxrefdz = Matrix::zero(3);
        for j in 0..3 {
            let mut zp = zeta;
            zp[j] += h;
            let mut zm = zeta;
            zm[j] -= h;
            let (xp, xm) = (map(&zp, true), map(&zm, true));
            let (rp, rm) = (map(&zp, false), map(&zm, false));
            for i in 0..3 {
                dxdz.m[i][j] = (xp[i] - xm[i]) / (2.0 * h);
                dxrefdz.m[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let f_fd = dxdz.mul(&dxrefdz.inverse().unwrap());
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (gp.f.m[i][j] - f_fd.m[i][j]).abs() < 1e-8,
                    "F[{i}][{j}]: {} vs {}",
                    gp.f.m[i][j],
                    f_fd.m[i][j]
                );
            }
        }
    }

    #[test]
    fn degenerate_and_inverted_detection() {
        // Flatten the element to a plane: degenerate reference Jacobian.
        let mut nodes: Vec<[f64; 3]> = H8_CORNERS.to_vec();
        for x in nodes.iter_mut() {
            x[2] = 0.0;
        }
        let mesh = Mesh::new(ElementKind::H8, nodes, (0..8).collect()).unwrap();
        assert!(matches!(
            mesh.validate_reference(),
            Err(Error::DegenerateElement { .. })
        ));

        // Invert an element by displacement.
        let mesh = unit_cube();
        let mut u = vec![0.0; mesh.n_dofs()];
        for n in 0..8 {
            // u_z = -2 z flips the element.
            u[n * 3 + 2] = -2.0 * mesh.nodes[n][2];
        }
        assert!(matches!(
            mesh.gauss_states(0, &u),
            Err(Error::InvertedElement { .. })
        ));
    }

    #[test]
    fn gauss_integrates_volume_exactly() {
        let mesh = unit_cube();
        let u = vec![0.0; mesh.n_dofs()];
        let v: f64 = mesh
            .gauss_states(0, &u)
            .unwrap()
            .iter()
            .map(|g| g.dvol)
            .sum();
        assert!((v - 1.0).abs() < 1e-14);

        // Sheared parallelepiped: volume is preserved by the shear.
        let mut nodes: Vec<[f64; 3]> = unit_cube().nodes.clone();
        for x in nodes.iter_mut() {
            x[0] += 0.3 * x[2];
        }
        let sheared = Mesh::new(ElementKind::H8, nodes, (0..8).collect()).unwrap();
        let v: f64 = sheared
            .gauss_states(0, &u)
            .unwrap()
            .iter()
            .map(|g| g.dvol)
            .sum();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn element_reference_state() {
        let mesh = unit_cube();
        let p = eh(3);
        let u = vec![0.0; mesh.n_dofs()];
        let states = mesh.gauss_states(0, &u).unwrap();
        let em = element_force_and_stiffness(&p, &states).unwrap();
        for i in 0..24 {
            assert!(em.f_int[i].abs() < 1e-13);
        }

        // K at u = 0 equals the small-strain stiffness ∫ 𝔹ᵀ C̃(1) 𝔹 dV,
        // assembled independently here.
        let c0 = spatial_tangent_and_stress(&p, &SymTensor::identity(3))
            .unwrap()
            .c_spatial;
        let mut k_ref = [[0.0; 24]; 24];
        for gp in &states {
            let mut bmat = [[0.0; 24]; 6];
            for a in 0..8 {
                let g = &gp.grad_x[a];
                bmat[0][a * 3] = g[0];
                bmat[1][a * 3 + 1] = g[1];
                bmat[2][a * 3 + 2] = g[2];
                bmat[3][a * 3] = g[1];
                bmat[3][a * 3 + 1] = g[0];
                bmat[4][a * 3 + 1] = g[2];
                bmat[4][a * 3 + 2] = g[1];
                bmat[5][a * 3] = g[2];
                bmat[5][a * 3 + 2] = g[0];
            }
            for r in 0..24 {
                for c in 0..24 {
                    let mut acc = 0.0;
                    for s in 0..6 {
                        for t in 0..6 {
                            acc += bmat[s][r] * c0.m[s][t] * bmat[t][c];
                        }
                    }
                    k_ref[r][c] += acc * gp.dvol;
                }
            }
        }
        for r in 0..24 {
            for c in 0..24 {
                assert!(
                    (em.k[r][c] - k_ref[r][c]).abs() < 1e-12,
                    "K[{r}][{c}]: {} vs {}",
                    em.k[r][c],
                    k_ref[r][c]
                );
            }
        }
    }

    #[test]
    fn element_stiffness_matches_fd_of_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (mesh, p) in [(unit_cube(), eh(3)), (unit_square(), eh(2))] {
            let ndof = mesh.n_dofs();
            let mut u = vec![0.0; ndof];
            for v in u.iter_mut() {
                *v = rng.gen_range(-0.02..0.02);
            }
            let states = mesh.gauss_states(0, &u).unwrap();
            let em = element_force_and_stiffness(&p, &states).unwrap();

            let h = 1e-7;
            let scale = (0..ndof)
                .flat_map(|r| (0..ndof).map(move |c| (r, c)))
                .map(|(r, c)| em.k[r][c].abs())
                .fold(0.0, f64::max);
            for c in 0..ndof {
                let mut up = u.clone();
                up[c] += h;
                let mut um = u.clone();
                um[c] -= h;
                let fp = element_force_and_stiffness(&p, &mesh.gauss_states(0, &up).unwrap())
                    .unwrap()
                    .f_int;
                let fm = element_force_and_stiffness(&p, &mesh.gauss_states(0, &um).unwrap())
                    .unwrap()
                    .f_int;
                for r in 0..ndof {
                    let fd = (fp[r] - fm[r]) / (2.0 * h);
                    assert!(
                        (em.k[r][c] - fd).abs() / scale < 1e-5,
                        "K[{r}][{c}] = {} vs FD {}",
                        em.k[r][c],
                        fd
                    );
                }
            }
        }
    }

    #[test]
    fn rigid_rotation_gives_zero_residual() {
        let mesh = unit_cube();
        let p = eh(3);
        let ang = 25f64.to_radians();
        let (s, c) = ang.sin_cos();
        let r = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let mut u = vec![0.0; mesh.n_dofs()];
        for (n, x) in mesh.nodes.iter().enumerate() {
            for i in 0..3 {
                let mut v = -x[i];
                for j in 0..3 {
                    v += r[i][j] * x[j];
                }
                u[n * 3 + i] = v;
            }
        }
        let em = element_force_and_stiffness(&p, &mesh.gauss_states(0, &u).unwrap()).unwrap();
        let volume = 1.0;
        for i in 0..24 {
            assert!(em.f_int[i].abs() < 1e-10 * p.mu * volume, "{}", em.f_int[i]);
        }
    }

    #[test]
    fn assembly_single_element_matches_element() {
        let mesh = unit_cube();
        let p = eh(3);
        let mut u = vec![0.0; mesh.n_dofs()];
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for v in u.iter_mut() {
            *v = rng.gen_range(-0.02..0.02);
        }
        let asm = Assembler::new(&mesh);
        let a = asm.assemble(&mesh, &p, &u).unwrap();
        let em = element_force_and_stiffness(&p, &mesh.gauss_states(0, &u).unwrap()).unwrap();
        for r in 0..24 {
            assert!((a.f_int[r] - em.f_int[r]).abs() < 1e-14);
            for c in 0..24 {
                assert!((a.k.get(r, c) - em.k[r][c]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn assembly_two_stacked_h8_dense_oracle() {
        // Two unit cubes sharing a face; compare against dense accumulation.
        let mut nodes = Vec::new();
        for z in 0..3 {
            for y in 0..2 {
                for x in 0..2 {
                    nodes.push([x as f64, y as f64, z as f64]);
                }
            }
        }
        let layer = |z: usize, y: usize, x: usize| z * 4 + y * 2 + x;
        let mut conn = Vec::new();
        for e in 0..2usize {
            conn.extend_from_slice(&[
                layer(e, 0, 0),
                layer(e, 0, 1),
                layer(e, 1, 1),
                layer(e, 1, 0),
                layer(e + 1, 0, 0),
                layer(e + 1, 0, 1),
                layer(e + 1, 1, 1),
                layer(e + 1, 1, 0),
            ]);
        }
        let mesh = Mesh::new(ElementKind::H8, nodes, conn).unwrap();
        let p = eh(3);
        let mut u = vec![0.0; mesh.n_dofs()];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for v in u.iter_mut() {
            *v = rng.gen_range(-0.02..0.02);
        }

        let asm = Assembler::new(&mesh);
        let a = asm.assemble(&mesh, &p, &u).unwrap();

        let ndof = mesh.n_dofs();
        let mut k_dense = vec![vec![0.0; ndof]; ndof];
        let mut f_dense = vec![0.0; ndof];
        for e in 0..2 {
            let em = element_force_and_stiffness(&p, &mesh.gauss_states(e, &u).unwrap()).unwrap();
            let nodes = mesh.element(e);
            for (ai, &na) in nodes.iter().enumerate() {
                for i in 0..3 {
                    f_dense[na * 3 + i] += em.f_int[ai * 3 + i];
                    for (bi, &nb) in nodes.iter().enumerate() {
                        for j in 0..3 {
                            k_dense[na * 3 + i][nb * 3 + j] += em.k[ai * 3 + i][bi * 3 + j];
                        }
                    }
                }
            }
        }
        for r in 0..ndof {
            assert!((a.f_int[r] - f_dense[r]).abs() < 1e-13);
            for c in 0..ndof {
                assert!((a.k.get(r, c) - k_dense[r][c]).abs() < 1e-13);
            }
        }
        // Global symmetry.
        assert!(a.k.symmetry_error() < 1e-10 * a.k.frob_norm().max(1.0));
    }

    #[test]
    fn assembly_zero_state_and_translation_invariance() {
        let mesh = unit_cube();
        let p = eh(3);
        let u0 = vec![0.0; mesh.n_dofs()];
        let asm = Assembler::new(&mesh);
        let a0 = asm.assemble(&mesh, &p, &u0).unwrap();
        for r in &a0.f_int {
            assert!(r.abs() < 1e-13);
        }

        let mut dofmap = DofMap::new(3, mesh.n_nodes());
        dofmap.constrain(0, 0, 0.0);
        let sys = assemble(&mesh, &dofmap, &p, &u0, None).unwrap();
        for (_, r) in &sys.reactions {
            assert!(r.abs() < 1e-13);
        }
        for r in &sys.r_free {
            assert!(r.abs() < 1e-13);
        }

        // Adding a constant vector to u changes neither R nor K.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut u = vec![0.0; mesh.n_dofs()];
        for v in u.iter_mut() {
            *v = rng.gen_range(-0.02..0.02);
        }
        let mut ut = u.clone();
        for n in 0..mesh.n_nodes() {
            ut[n * 3] += 0.37;
            ut[n * 3 + 1] -= 0.11;
            ut[n * 3 + 2] += 0.05;
        }
        let a = asm.assemble(&mesh, &p, &u).unwrap();
        let at = asm.assemble(&mesh, &p, &ut).unwrap();
        for r in 0..mesh.n_dofs() {
            assert!((a.f_int[r] - at.f_int[r]).abs() < 1e-12);
        }
        let mut kerr: f64 = 0.0;
        for (va, vb) in a.k.values.iter().zip(at.k.values.iter()) {
            kerr = kerr.max((va - vb).abs());
        }
        assert!(kerr < 1e-11 * a.k.frob_norm().max(1.0));
    }

    #[test]
    fn mesh_text_round_trip() {
        let dir = std::env::temp_dir().join("hencky_fem_mesh_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cube.mesh");
        let mesh = unit_cube();
        write_mesh(&path, &mesh).unwrap();
        let back = read_mesh(&path).unwrap();
        assert_eq!(back.dim, 3);
        assert_eq!(back.n_nodes(), 8);
        assert_eq!(back.n_elems(), 1);
        for (a, b) in mesh.nodes.iter().zip(back.nodes.iter()) {
            assert_eq!(a, b);
        }
        assert_eq!(mesh.element(0), back.element(0));

        // Bad connectivity is rejected.
        let bad = Mesh::new(ElementKind::Q4, vec![[0.0; 3]; 3], vec![0, 1, 2, 3]);
        assert!(bad.is_err());
    }

    #[test]
    fn dofmap_partition_is_complete() {
        let mut dm = DofMap::new(2, 4);
        dm.constrain(0, 0, 0.0);
        dm.constrain(0, 1, 0.0);
        dm.constrain(3, 1, -1.0);
        let p = dm.partition();
        assert_eq!(p.n_free() + p.constrained.len(), 8);
        for (i, &dof) in p.free_dofs.iter().enumerate() {
            assert_eq!(p.free_index[dof], i);
        }
        for &(dof, _) in &p.constrained {
            assert_eq!(p.free_index[dof], usize::MAX);
        }
        assert_eq!(p.constrained, vec![(0, 0.0), (1, 0.0), (7, -1.0)]);
    }
}
