//! Plane-strain linear elasticity on P1 triangles: material law, stiffness
//! and load assembly, Dirichlet elimination and the sparse SPD solve.

use nalgebra::{Matrix3, SMatrix};

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};
use crate::sparse::{CsrMatrix, SparseCholesky};

/// Midpoint rule on the reference triangle, exact for quadratics.
pub const TRI_QUAD: [[f64; 3]; 3] = [
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
];

/// 2-point Gauss abscissae on [0, 1].
pub const EDGE_GAUSS_2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Isotropic Hooke material, plane strain.
///
/// σ = 2μ ε(u) + λ tr(ε(u)) I with shear modulus μ > 0 and first Lamé
/// parameter λ ≥ 0, which keeps the elasticity tensor uniformly elliptic
/// and bounded.
#[derive(Debug, Clone, Copy)]
pub struct Material {
    mu: f64,
    lambda: f64,
}

impl Material {
    pub fn new(mu: f64, lambda: f64) -> Result<Material> {
        if !(mu > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "shear modulus must be positive, got {mu}"
            )));
        }
        if !(lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "first Lamé parameter must be nonnegative, got {lambda}"
            )));
        }
        Ok(Material { mu, lambda })
    }

    /// Converts Young's modulus and Poisson ratio (plane strain).
    pub fn from_young_poisson(e: f64, nu: f64) -> Result<Material> {
        if !(e > 0.0) || !(0.0..0.5).contains(&nu) {
            return Err(Error::InvalidArgument(format!(
                "need E > 0 and 0 <= nu < 1/2, got E = {e}, nu = {nu}"
            )));
        }
        let mu = e / (2.0 * (1.0 + nu));
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        Material::new(mu, lambda)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Constitutive matrix in Voigt order (ε_xx, ε_yy, γ_xy).
    pub fn d_matrix(&self) -> Matrix3<f64> {
        let d = 2.0 * self.mu + self.lambda;
        Matrix3::new(
            d,
            self.lambda,
            0.0,
            self.lambda,
            d,
            0.0,
            0.0,
            0.0,
            self.mu,
        )
    }
}

/// Strain-displacement matrix and double area of a triangle.
///
/// Rows of B are (ε_xx, ε_yy, γ_xy); columns follow the local dof order
/// (u1x, u1y, u2x, u2y, u3x, u3y).
pub fn strain_matrix(coords: &[[f64; 2]; 3]) -> (SMatrix<f64, 3, 6>, f64) {
    let [p1, p2, p3] = *coords;
    let det = (p2[0] - p1[0]) * (p3[1] - p1[1]) - (p3[0] - p1[0]) * (p2[1] - p1[1]);
    let dn = [
        [(p2[1] - p3[1]) / det, (p3[0] - p2[0]) / det],
        [(p3[1] - p1[1]) / det, (p1[0] - p3[0]) / det],
        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
    ];
    let mut b = SMatrix::<f64, 3, 6>::zeros();
    for i in 0..3 {
        b[(0, 2 * i)] = dn[i][0];
        b[(1, 2 * i + 1)] = dn[i][1];
        b[(2, 2 * i)] = dn[i][1];
        b[(2, 2 * i + 1)] = dn[i][0];
    }
    (b, det)
}

/// Exact P1 element stiffness (the integrand is constant per triangle).
pub fn element_stiffness(coords: &[[f64; 2]; 3], mat: &Material) -> Result<SMatrix<f64, 6, 6>> {
    let (b, det) = strain_matrix(coords);
    let area = 0.5 * det;
    if area <= 1e-14 {
        return Err(Error::Assembly(format!(
            "degenerate triangle with area {area:.3e}"
        )));
    }
    Ok(b.transpose() * mat.d_matrix() * b * area)
}

/// Assembles the global stiffness matrix over all 2·(node count) dofs,
/// in triangle index order.
pub fn assemble_stiffness(mesh: &Mesh, mat: &Material) -> Result<CsrMatrix> {
    let n_dofs = 2 * mesh.num_nodes();
    let mut triplets = Vec::with_capacity(36 * mesh.num_triangles());
    for tri in mesh.triangles() {
        let coords = [
            mesh.nodes()[tri[0]],
            mesh.nodes()[tri[1]],
            mesh.nodes()[tri[2]],
        ];
        let ke = element_stiffness(&coords, mat)?;
        let dofs = [
            2 * tri[0],
            2 * tri[0] + 1,
            2 * tri[1],
            2 * tri[1] + 1,
            2 * tri[2],
            2 * tri[2] + 1,
        ];
        for (r, &gr) in dofs.iter().enumerate() {
            for (c, &gc) in dofs.iter().enumerate() {
                triplets.push((gr, gc, ke[(r, c)]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(n_dofs, n_dofs, &triplets))
}

/// Assembles the load functional: volume force by the 3-point midpoint rule
/// (exact for quadratic integrands) plus Neumann tractions by 2-point Gauss
/// per tagged edge.
pub fn assemble_load<F, G>(mesh: &Mesh, f: F, g: G) -> Vec<f64>
where
    F: Fn(f64, f64) -> [f64; 2],
    G: Fn(f64, f64) -> [f64; 2],
{
    let mut load = vec![0.0; 2 * mesh.num_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = 0.5 * mesh.double_signed_area(t);
        let pts = [
            mesh.nodes()[tri[0]],
            mesh.nodes()[tri[1]],
            mesh.nodes()[tri[2]],
        ];
        for q in &TRI_QUAD {
            let x = q[0] * pts[0][0] + q[1] * pts[1][0] + q[2] * pts[2][0];
            let y = q[0] * pts[0][1] + q[1] * pts[1][1] + q[2] * pts[2][1];
            let fv = f(x, y);
            let w = area / 3.0;
            for (k, &node) in tri.iter().enumerate() {
                load[2 * node] += w * q[k] * fv[0];
                load[2 * node + 1] += w * q[k] * fv[1];
            }
        }
    }
    for e in mesh.boundary_edges() {
        if e.tag != BoundaryTag::Neumann {
            continue;
        }
        let pa = mesh.nodes()[e.nodes[0]];
        let pb = mesh.nodes()[e.nodes[1]];
        let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
        for &t in &EDGE_GAUSS_2 {
            let x = pa[0] + t * (pb[0] - pa[0]);
            let y = pa[1] + t * (pb[1] - pa[1]);
            let gv = g(x, y);
            let w = 0.5 * len;
            load[2 * e.nodes[0]] += w * (1.0 - t) * gv[0];
            load[2 * e.nodes[0] + 1] += w * (1.0 - t) * gv[1];
            load[2 * e.nodes[1]] += w * t * gv[0];
            load[2 * e.nodes[1] + 1] += w * t * gv[1];
        }
    }
    load
}

/// Pointwise Lagrange interpolation of a displacement field onto the mesh
/// nodes.
pub fn interpolate_nodal<U>(mesh: &Mesh, u: U) -> Vec<f64>
where
    U: Fn(f64, f64) -> [f64; 2],
{
    let mut out = vec![0.0; 2 * mesh.num_nodes()];
    for (i, p) in mesh.nodes().iter().enumerate() {
        let v = u(p[0], p[1]);
        out[2 * i] = v[0];
        out[2 * i + 1] = v[1];
    }
    out
}

/// Maps nodes to displacement dofs and carries the Dirichlet constraints.
///
/// Node `i` owns dofs `2i` (x) and `2i + 1` (y). The constrained set is
/// exactly the dofs of the mesh's Dirichlet nodes, with prescribed values
/// sampled from the supplied data.
#[derive(Debug, Clone)]
pub struct DofMap {
    n_dofs: usize,
    constraints: Vec<(usize, f64)>,
    positions: Vec<[f64; 2]>,
}

impl DofMap {
    pub fn new<D>(mesh: &Mesh, dirichlet_data: D) -> DofMap
    where
        D: Fn(f64, f64) -> [f64; 2],
    {
        let mut constraints = Vec::new();
        for node in mesh.dirichlet_node_ids() {
            let p = mesh.nodes()[node];
            let v = dirichlet_data(p[0], p[1]);
            constraints.push((2 * node, v[0]));
            constraints.push((2 * node + 1, v[1]));
        }
        constraints.sort_by_key(|&(d, _)| d);
        let mut positions = Vec::with_capacity(2 * mesh.num_nodes());
        for p in mesh.nodes() {
            positions.push(*p);
            positions.push(*p);
        }
        DofMap {
            n_dofs: 2 * mesh.num_nodes(),
            constraints,
            positions,
        }
    }

    pub fn num_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Constrained (dof, prescribed value) pairs, sorted by dof.
    pub fn constraints(&self) -> &[(usize, f64)] {
        &self.constraints
    }

    /// Position of the node owning each dof, used by the fill-reducing
    /// ordering.
    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }
}

/// Reduced SPD system after constraint elimination, with the bookkeeping
/// needed to expand a free-dof solution back to the full nodal vector.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    reduced: CsrMatrix,
    rhs: Vec<f64>,
    /// free index -> full dof index.
    free: Vec<usize>,
    /// Prescribed value per full dof (0 on free dofs).
    prescribed: Vec<f64>,
    is_constrained: Vec<bool>,
    positions: Vec<[f64; 2]>,
}

impl SparseSystem {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.reduced
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    /// Positions of the free dofs (for the solver ordering).
    pub fn free_positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    /// Expands a free-dof vector into a full vector containing the
    /// prescribed values at constrained dofs.
    pub fn expand(&self, u_free: &[f64]) -> Vec<f64> {
        let mut full = self.prescribed.clone();
        for (k, &dof) in self.free.iter().enumerate() {
            full[dof] = u_free[k];
        }
        full
    }

    /// Restriction of a full vector to the free dofs.
    pub fn restrict_vec(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| full[d]).collect()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.is_constrained[dof]
    }
}

/// Eliminates the given (dof, value) constraints from K U = F: constrained
/// rows and columns are dropped and the prescribed values are moved to the
/// right-hand side.
pub fn apply_constraints(
    k: &CsrMatrix,
    f: &[f64],
    constraints: &[(usize, f64)],
    positions: &[[f64; 2]],
) -> Result<SparseSystem> {
    let n = k.nrows();
    assert_eq!(f.len(), n);
    assert_eq!(positions.len(), n);
    if constraints.is_empty() {
        return Err(Error::IllPosed(
            "no Dirichlet constraints: the Dirichlet boundary must have positive measure".into(),
        ));
    }
    let mut is_constrained = vec![false; n];
    let mut prescribed = vec![0.0; n];
    for &(dof, val) in constraints {
        if dof >= n {
            return Err(Error::InvalidArgument(format!(
                "constraint on dof {dof} outside system of size {n}"
            )));
        }
        if is_constrained[dof] {
            return Err(Error::InvalidArgument(format!(
                "dof {dof} constrained twice"
            )));
        }
        is_constrained[dof] = true;
        prescribed[dof] = val;
    }
    let free: Vec<usize> = (0..n).filter(|&d| !is_constrained[d]).collect();
    // rhs = F_free - K_fc * prescribed.
    let mut rhs = Vec::with_capacity(free.len());
    for &d in &free {
        let (cols, vals) = k.row(d);
        let mut acc = f[d];
        for (c, v) in cols.iter().zip(vals) {
            if is_constrained[*c] {
                acc -= v * prescribed[*c];
            }
        }
        rhs.push(acc);
    }
    let reduced = k.restrict(&free);
    let pos: Vec<[f64; 2]> = free.iter().map(|&d| positions[d]).collect();
    Ok(SparseSystem {
        reduced,
        rhs,
        free,
        prescribed,
        is_constrained,
        positions: pos,
    })
}

/// Dirichlet elimination: wraps [`apply_constraints`] with the constraint
/// set of a [`DofMap`].
pub fn apply_dirichlet(k: &CsrMatrix, f: &[f64], dofs: &DofMap) -> Result<SparseSystem> {
    apply_constraints(k, f, dofs.constraints(), dofs.positions())
}

/// Relative residual bound honoured by [`solve_spd`].
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-12;

/// Solves the reduced SPD system by sparse Cholesky with iterative
/// refinement, returning the expanded full nodal vector. The relative
/// residual ‖K U − F‖ / ‖F‖ is verified to be at most 1e-12.
pub fn solve_spd(sys: &SparseSystem) -> Result<Vec<f64>> {
    let chol = SparseCholesky::factorize(sys.matrix(), Some(sys.free_positions()))?;
    let mut u = chol.solve(sys.rhs());
    let norm_f = norm2(sys.rhs());
    if norm_f == 0.0 {
        return Ok(sys.expand(&vec![0.0; sys.num_free()]));
    }
    for _ in 0..3 {
        let r = residual(sys.matrix(), &u, sys.rhs());
        if norm2(&r) <= SOLVE_RESIDUAL_TOL * norm_f {
            return Ok(sys.expand(&u));
        }
        let du = chol.solve(&r);
        for (ui, di) in u.iter_mut().zip(&du) {
            *ui += di;
        }
    }
    let r = residual(sys.matrix(), &u, sys.rhs());
    let rel = norm2(&r) / norm_f;
    if rel <= SOLVE_RESIDUAL_TOL {
        Ok(sys.expand(&u))
    } else {
        Err(Error::SingularSystem(format!(
            "iterative refinement stalled at relative residual {rel:.3e}"
        )))
    }
}

fn residual(k: &CsrMatrix, u: &[f64], f: &[f64]) -> Vec<f64> {
    let ku = k.mul_vec(u);
    f.iter().zip(&ku).map(|(a, b)| a - b).collect()
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
