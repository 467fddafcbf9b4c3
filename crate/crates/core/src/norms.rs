//! Error norms and trace-space operators for the convergence studies.
//!
//! Volume errors between nested meshes are integrated exactly: the coarse
//! P1 field restricted to a fine triangle is again linear, so the
//! three-point midpoint rule integrates the squared error without
//! quadrature crime.
//!
//! Fractional Sobolev norms on the contact trace are realized spectrally:
//! with (θ_i, φ_i) the M-orthonormal eigenpairs of the 1D Laplace-Beltrami
//! stiffness A against the mass M on Γ_C, the norm of order s ∈ [−1, 1] is
//! ‖v‖_s² = Σ (1+θ_i)^s (φ_iᵀ M v)². This discrete scale is exact at
//! s ∈ {−1, 0, 1} and norm-equivalent in between, which is all the
//! dual-norm boundedness checks require.

use nalgebra::{DMatrix, DVector};

use crate::elasticity::{strain_matrix, Material, TRI_QUAD};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, TraceMesh};

/// 4-point Gauss rule on [−1, 1].
const GAUSS_4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
];

/// Piecewise-linear function on the contact trace.
#[derive(Debug, Clone)]
pub struct TraceFunction {
    mesh: TraceMesh,
    values: Vec<f64>,
}

impl TraceFunction {
    pub fn new(mesh: TraceMesh, values: Vec<f64>) -> Result<TraceFunction> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::InvalidArgument(format!(
                "trace function has {} values for {} nodes",
                values.len(),
                mesh.num_nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "trace function values must be finite".into(),
            ));
        }
        Ok(TraceFunction { mesh, values })
    }

    pub fn mesh(&self) -> &TraceMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Evaluates the piecewise-linear interpolant at x (clamped to Γ_C).
    pub fn eval(&self, x: f64) -> f64 {
        let xs = &self.mesh.xs;
        let n = xs.len();
        if x <= xs[0] {
            return self.values[0];
        }
        if x >= xs[n - 1] {
            return self.values[n - 1];
        }
        // Uniform spacing: index arithmetic, then guard against roundoff.
        let h = self.mesh.element_length(0);
        let mut e = (((x - xs[0]) / h) as usize).min(n - 2);
        if x < xs[e] {
            e -= 1;
        } else if x > xs[e + 1] {
            e += 1;
        }
        let t = (x - xs[e]) / (xs[e + 1] - xs[e]);
        self.values[e] * (1.0 - t) + self.values[e + 1] * t
    }
}

/// Tridiagonal 1D mass matrix of the trace mesh (dense storage; trace
/// meshes stay small).
pub fn trace_mass_matrix(trace: &TraceMesh) -> DMatrix<f64> {
    let n = trace.num_nodes();
    let mut m = DMatrix::zeros(n, n);
    for e in 0..trace.num_elements() {
        let h = trace.element_length(e);
        m[(e, e)] += h / 3.0;
        m[(e + 1, e + 1)] += h / 3.0;
        m[(e, e + 1)] += h / 6.0;
        m[(e + 1, e)] += h / 6.0;
    }
    m
}

/// 1D stiffness (Laplace-Beltrami with natural boundary conditions).
fn trace_stiffness_matrix(trace: &TraceMesh) -> DMatrix<f64> {
    let n = trace.num_nodes();
    let mut a = DMatrix::zeros(n, n);
    for e in 0..trace.num_elements() {
        let h = trace.element_length(e);
        a[(e, e)] += 1.0 / h;
        a[(e + 1, e + 1)] += 1.0 / h;
        a[(e, e + 1)] -= 1.0 / h;
        a[(e + 1, e)] -= 1.0 / h;
    }
    a
}

/// Exact L²(Γ_C) norm of a trace function (vᵀ M v).
pub fn trace_l2_norm(f: &TraceFunction) -> f64 {
    let m = trace_mass_matrix(f.mesh());
    let v = DVector::from_column_slice(f.values());
    (v.transpose() * (&m * &v))[(0, 0)].max(0.0).sqrt()
}

/// L²(Γ_C)-projection onto the piecewise-linear trace space: solves
/// M x = (v, φ_i) with the load integrated by 4-point Gauss per element.
pub fn l2_projection<F>(trace: &TraceMesh, v: F) -> Result<TraceFunction>
where
    F: Fn(f64) -> f64,
{
    let n = trace.num_nodes();
    let mut load = DVector::zeros(n);
    for e in 0..trace.num_elements() {
        let xa = trace.xs[e];
        let xb = trace.xs[e + 1];
        let mid = 0.5 * (xa + xb);
        let half = 0.5 * (xb - xa);
        for (t, w) in GAUSS_4 {
            let x = mid + half * t;
            let val = v(x);
            let phi_b = 0.5 * (1.0 + t);
            load[e] += half * w * val * (1.0 - phi_b);
            load[e + 1] += half * w * val * phi_b;
        }
    }
    let m = trace_mass_matrix(trace);
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("trace mass matrix not positive definite".into()))?;
    let x = chol.solve(&load);
    TraceFunction::new(trace.clone(), x.as_slice().to_vec())
}

/// Spectral realization of the fractional norms on Γ_C.
pub struct FractionalNormOperator {
    mesh: TraceMesh,
    /// Generalized eigenvalues of A φ = θ M φ, ascending, θ_0 = 0.
    theta: Vec<f64>,
    /// M-orthonormal eigenvectors, one column per mode.
    phi: DMatrix<f64>,
    mass: DMatrix<f64>,
}

impl FractionalNormOperator {
    pub fn new(trace: &TraceMesh) -> Result<FractionalNormOperator> {
        let m = trace_mass_matrix(trace);
        let a = trace_stiffness_matrix(trace);
        let chol = m.clone().cholesky().ok_or_else(|| {
            Error::SingularSystem("trace mass matrix not positive definite".into())
        })?;
        let l = chol.l();
        // B = L⁻¹ A L⁻ᵀ, symmetrized against roundoff.
        let t = l
            .solve_lower_triangular(&a)
            .ok_or_else(|| Error::SingularSystem("singular mass Cholesky factor".into()))?;
        let b = l
            .solve_lower_triangular(&t.transpose())
            .ok_or_else(|| Error::SingularSystem("singular mass Cholesky factor".into()))?;
        let b = (&b + b.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::new(b);
        let n = trace.num_nodes();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut theta = Vec::with_capacity(n);
        let mut psi = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            let lam = eig.eigenvalues[i];
            if lam < -1e-9 {
                return Err(Error::SingularSystem(format!(
                    "negative trace eigenvalue {lam:.3e}"
                )));
            }
            theta.push(lam.max(0.0));
            psi.set_column(col, &eig.eigenvectors.column(i));
        }
        // φ = L⁻ᵀ ψ restores M-orthonormality.
        let phi = l
            .transpose()
            .solve_upper_triangular(&psi)
            .ok_or_else(|| Error::SingularSystem("singular mass Cholesky factor".into()))?;
        Ok(FractionalNormOperator {
            mesh: trace.clone(),
            theta,
            phi,
            mass: m,
        })
    }

    pub fn mesh(&self) -> &TraceMesh {
        &self.mesh
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.theta
    }

    /// M-orthonormal eigenvector of mode `i` as a trace function.
    pub fn mode(&self, i: usize) -> TraceFunction {
        TraceFunction::new(self.mesh.clone(), self.phi.column(i).as_slice().to_vec())
            .expect("eigenvector length matches the trace")
    }

    /// ‖v‖_s = (Σ (1+θ_i)^s (φ_iᵀ M v)²)^{1/2} for s ∈ [−1, 1].
    pub fn fractional_norm(&self, v: &TraceFunction, s: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!(
                "fractional order must lie in [-1, 1], got {s}"
            )));
        }
        if !v.mesh().same_as(&self.mesh) {
            return Err(Error::InvalidArgument(
                "trace function lives on a different trace mesh".into(),
            ));
        }
        let mv = &self.mass * DVector::from_column_slice(v.values());
        let coeff = self.phi.transpose() * mv;
        let mut acc = 0.0;
        for (c, th) in coeff.iter().zip(&self.theta) {
            acc += (1.0 + th).powf(s) * c * c;
        }
        Ok(acc.sqrt())
    }

    /// Constant of the discrete inverse inequality
    /// ‖w‖_{1/2} ≤ C h^{ν−1/2} ‖w‖_ν over the trace space, from the
    /// spectral extremes; stable across refinement levels.
    pub fn inverse_inequality_constant(&self, h: f64, nu: f64) -> f64 {
        let theta_max = *self.theta.last().unwrap_or(&0.0);
        (h * h * (1.0 + theta_max)).powf(0.5 * (0.5 - nu))
    }
}

/// Transfers a coarse nodal field to the fine mesh by point location; exact
/// for nested meshes because the coarse P1 field is linear on each fine
/// triangle.
pub fn transfer_to_fine(fine: &Mesh, coarse: &Mesh, u_coarse: &[f64]) -> Result<Vec<f64>> {
    if !fine.is_refinement_of(coarse) {
        return Err(Error::InvalidArgument(
            "meshes are not a nested coarse/fine pair".into(),
        ));
    }
    let mut out = vec![0.0; 2 * fine.num_nodes()];
    for (i, p) in fine.nodes().iter().enumerate() {
        let (t, bary) = coarse.locate_point(*p)?;
        let tri = coarse.triangles()[t];
        for c in 0..2 {
            out[2 * i + c] = bary[0] * u_coarse[2 * tri[0] + c]
                + bary[1] * u_coarse[2 * tri[1] + c]
                + bary[2] * u_coarse[2 * tri[2] + c];
        }
    }
    Ok(out)
}

/// L², H¹-seminorm and energy norms of u_ref − u_h, with u_h transferred
/// from the coarse mesh. Errors are integrated by the 3-point midpoint
/// rule per fine triangle, which is exact here.
pub fn h1_error(
    fine: &Mesh,
    u_ref: &[f64],
    coarse: &Mesh,
    u_h: &[f64],
    mat: &Material,
) -> Result<(f64, f64, f64)> {
    let transferred = transfer_to_fine(fine, coarse, u_h)?;
    let e: Vec<f64> = u_ref
        .iter()
        .zip(&transferred)
        .map(|(a, b)| a - b)
        .collect();
    let d = mat.d_matrix();
    let mut l2_sq = 0.0;
    let mut h1_sq = 0.0;
    let mut energy_sq = 0.0;
    for (t, tri) in fine.triangles().iter().enumerate() {
        let coords = [
            fine.nodes()[tri[0]],
            fine.nodes()[tri[1]],
            fine.nodes()[tri[2]],
        ];
        let area = 0.5 * fine.double_signed_area(t);
        let local = [
            e[2 * tri[0]],
            e[2 * tri[0] + 1],
            e[2 * tri[1]],
            e[2 * tri[1] + 1],
            e[2 * tri[2]],
            e[2 * tri[2] + 1],
        ];
        for q in &TRI_QUAD {
            let ex = q[0] * local[0] + q[1] * local[2] + q[2] * local[4];
            let ey = q[0] * local[1] + q[1] * local[3] + q[2] * local[5];
            l2_sq += area / 3.0 * (ex * ex + ey * ey);
        }
        let (b, _) = strain_matrix(&coords);
        // Component gradients are constant: ∇e_x = (B00·ex1 + ..., B2·...).
        let mut gx = [0.0; 2];
        let mut gy = [0.0; 2];
        for i in 0..3 {
            gx[0] += b[(0, 2 * i)] * local[2 * i];
            gx[1] += b[(2, 2 * i)] * local[2 * i];
            gy[0] += b[(1, 2 * i + 1)] * local[2 * i + 1];
        }
        // ∂e_y/∂x sits in the γ row of the y columns.
        let mut gyx = 0.0;
        for i in 0..3 {
            gyx += b[(2, 2 * i + 1)] * local[2 * i + 1];
        }
        h1_sq += area * (gx[0] * gx[0] + gx[1] * gx[1] + gy[0] * gy[0] + gyx * gyx);
        let local_v = nalgebra::SVector::<f64, 6>::from_column_slice(&local);
        let strain = b * local_v;
        energy_sq += area * (strain.transpose() * d * strain)[(0, 0)];
    }
    Ok((l2_sq.sqrt(), h1_sq.sqrt(), energy_sq.max(0.0).sqrt()))
}

/// L² and H^{−ν} norms of the contact residual σ_n + (1/ε)[u_n]_+ formed
/// nodewise on the trace.
pub fn contact_residual_norms(
    op: &FractionalNormOperator,
    sigma_ref: &TraceFunction,
    u_n: &TraceFunction,
    epsilon: f64,
    nu: f64,
) -> Result<(f64, f64)> {
    if !sigma_ref.mesh().same_as(u_n.mesh()) || !sigma_ref.mesh().same_as(op.mesh()) {
        return Err(Error::InvalidArgument(
            "contact residual inputs live on different trace meshes".into(),
        ));
    }
    let scale = sigma_ref
        .values()
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    if sigma_ref.values().iter().any(|&v| v > 1e-10 * (1.0 + scale)) {
        return Err(Error::InvalidArgument(
            "reference normal stress must be nonpositive".into(),
        ));
    }
    let values: Vec<f64> = sigma_ref
        .values()
        .iter()
        .zip(u_n.values())
        .map(|(&s, &un)| s + un.max(0.0) / epsilon)
        .collect();
    let r = TraceFunction::new(sigma_ref.mesh().clone(), values)?;
    let l2 = trace_l2_norm(&r);
    let neg = op.fractional_norm(&r, -nu)?;
    Ok((l2, neg))
}

/// Both sides of the dual-norm bound: returns
/// (‖r‖_{−ν},  (eps_or_h)^ν ‖r‖₀ + (eps_or_h)^{ν−1/2} ‖e‖₁) without any
/// assumption on the unknowable constant between them.
pub fn dual_bound_check(
    op: &FractionalNormOperator,
    r: &TraceFunction,
    u_err_h1: f64,
    eps_or_h: f64,
    nu: f64,
) -> Result<(f64, f64)> {
    let lhs = op.fractional_norm(r, -nu)?;
    let rhs = eps_or_h.powf(nu) * trace_l2_norm(r) + eps_or_h.powf(nu - 0.5) * u_err_h1;
    Ok((lhs, rhs))
}
