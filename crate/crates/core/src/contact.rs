//! Discrete penalty formulation of the contact conditions.
//!
//! The contact inequality is replaced by the boundary condition
//! σ_n = −(1/ε)[u_n]_+ on Γ_C. The resulting penalty term
//! (1/ε)∫ [u_n]_+ v_n dΓ is integrated exactly: on every contact edge the
//! normal trace u_n is linear, the sub-interval where it is positive is
//! computed from the two endpoint values, and the polynomial integrals on
//! that sub-interval are evaluated in closed form. This removes any
//! quadrature error from the convergence studies; observed rates measure
//! the method, not the integration.
//!
//! The nonsmooth system K U + (1/ε)C(U) = F is solved by a semismooth
//! Newton method whose generalized Jacobian takes the derivative of [·]_+
//! at 0 to be 0 (kink nodes count as inactive). A halving line search
//! engages only if a step fails to decrease the residual, so runs are
//! deterministic.

use crate::cases::ProblemCase;
use crate::elasticity::{
    apply_dirichlet, assemble_load, assemble_stiffness, norm2, solve_spd, DofMap,
};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};
use crate::sparse::{CsrMatrix, SparseCholesky};

/// Positive part [a]_+ = max(a, 0).
#[inline]
pub fn positive_part(a: f64) -> f64 {
    a.max(0.0)
}

/// Parameters of the penalty solve.
///
/// The generalized derivative of [·]_+ at exactly 0 is fixed to 0 (the
/// "inactive" convention): any value in [0, 1] is admissible for the
/// semismooth Newton method, and 0 keeps the Jacobian contribution minimal
/// and the iteration deterministic.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyConfig {
    /// Penalty parameter ε > 0; an O(ε) penetration is allowed.
    pub epsilon: f64,
    /// Relative residual tolerance for the Newton iteration.
    pub newton_tol: f64,
    /// Iteration cap.
    pub max_iters: usize,
}

impl PenaltyConfig {
    pub fn new(epsilon: f64) -> PenaltyConfig {
        PenaltyConfig {
            epsilon,
            newton_tol: 1e-10,
            max_iters: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "penalty parameter must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidArgument("newton_tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of a penalty solve.
#[derive(Debug, Clone)]
pub struct PenaltyState {
    /// Full nodal displacement vector (2 dofs per node).
    pub displacement: Vec<f64>,
    /// Normal trace u_n = −u_y per contact node, left to right.
    pub contact_normal_trace: Vec<f64>,
    /// Residual norm before each Newton update, then the final residual.
    pub residual_history: Vec<f64>,
    /// Penalty energy at the initial guess and after each accepted update.
    pub energy_history: Vec<f64>,
    /// Number of Newton updates performed.
    pub iterations: usize,
}

impl PenaltyState {
    /// Largest penetration max [u_n]_+ over the contact nodes.
    pub fn max_penetration(&self) -> f64 {
        self.contact_normal_trace
            .iter()
            .map(|&v| positive_part(v))
            .fold(0.0, f64::max)
    }
}

/// Contact edges as (left node, right node, length), left to right.
fn contact_edges(mesh: &Mesh) -> Vec<(usize, usize, f64)> {
    let mut edges: Vec<(usize, usize, f64)> = mesh
        .boundary_edges()
        .iter()
        .filter(|e| e.tag == BoundaryTag::Contact)
        .map(|e| {
            let (a, b) = (e.nodes[0], e.nodes[1]);
            let (xa, xb) = (mesh.nodes()[a][0], mesh.nodes()[b][0]);
            if xa <= xb {
                (a, b, xb - xa)
            } else {
                (b, a, xa - xb)
            }
        })
        .collect();
    edges.sort_by(|l, r| mesh.nodes()[l.0][0].total_cmp(&mesh.nodes()[r.0][0]));
    edges
}

/// Active sub-interval {t ∈ [0,1] : α(1−t) + βt > 0}, or None when the
/// trace is nonpositive on the whole edge.
fn active_interval(alpha: f64, beta: f64) -> Option<(f64, f64)> {
    if alpha <= 0.0 && beta <= 0.0 {
        return None;
    }
    if alpha > 0.0 && beta > 0.0 {
        return Some((0.0, 1.0));
    }
    let t_star = alpha / (alpha - beta);
    if alpha > 0.0 {
        Some((0.0, t_star))
    } else {
        Some((t_star, 1.0))
    }
}

/// ∫ [u_n]_+ φ_a dΓ and ∫ [u_n]_+ φ_b dΓ on one edge, in closed form.
fn edge_clipped_moments(alpha: f64, beta: f64, len: f64) -> (f64, f64) {
    let Some((t0, t1)) = active_interval(alpha, beta) else {
        return (0.0, 0.0);
    };
    // m(t)(1−t) = α + (β−2α)t − (β−α)t²  and  m(t)t = αt + (β−α)t².
    let fa = |t: f64| alpha * t + 0.5 * (beta - 2.0 * alpha) * t * t
        - (beta - alpha) * t * t * t / 3.0;
    let fb = |t: f64| 0.5 * alpha * t * t + (beta - alpha) * t * t * t / 3.0;
    (len * (fa(t1) - fa(t0)), len * (fb(t1) - fb(t0)))
}

/// ∫ over the active sub-interval of φ_i φ_j, the generalized derivative of
/// the clipped moments with the sub-interval held fixed.
fn edge_active_mass(alpha: f64, beta: f64, len: f64) -> [[f64; 2]; 2] {
    let Some((t0, t1)) = active_interval(alpha, beta) else {
        return [[0.0; 2]; 2];
    };
    let gaa = |t: f64| -(1.0 - t).powi(3) / 3.0;
    let gab = |t: f64| 0.5 * t * t - t * t * t / 3.0;
    let gbb = |t: f64| t * t * t / 3.0;
    let aa = len * (gaa(t1) - gaa(t0));
    let ab = len * (gab(t1) - gab(t0));
    let bb = len * (gbb(t1) - gbb(t0));
    [[aa, ab], [ab, bb]]
}

/// ∫ [u_n]²_+ dΓ on one edge.
fn edge_clipped_square(alpha: f64, beta: f64, len: f64) -> f64 {
    let Some((t0, t1)) = active_interval(alpha, beta) else {
        return 0.0;
    };
    if (beta - alpha).abs() < 1e-300 {
        return len * alpha * alpha * (t1 - t0);
    }
    let m = |t: f64| alpha + (beta - alpha) * t;
    len * (m(t1).powi(3) - m(t0).powi(3)) / (3.0 * (beta - alpha))
}

/// Normal trace u_n = −u_y at the contact nodes, left to right.
pub fn contact_normal_trace(mesh: &Mesh, u: &[f64]) -> Vec<f64> {
    mesh.contact_node_ids()
        .iter()
        .map(|&i| -u[2 * i + 1])
        .collect()
}

/// Assembles (1/ε)⟨[u_n]_+, v_n⟩ against all test functions: the gradient
/// of the penalty energy. Nonzero only at the y-dofs of contact nodes.
pub fn penalty_force(mesh: &Mesh, u: &[f64], cfg: &PenaltyConfig) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for (a, b, len) in contact_edges(mesh) {
        let alpha = -u[2 * a + 1];
        let beta = -u[2 * b + 1];
        let (ia, ib) = edge_clipped_moments(alpha, beta, len);
        // v_n = −v_y on Γ_C, so the y-dof coefficient picks up a sign.
        out[2 * a + 1] -= ia / cfg.epsilon;
        out[2 * b + 1] -= ib / cfg.epsilon;
    }
    out
}

/// Generalized derivative of [`penalty_force`]: (1/ε) times the mass matrix
/// of the active sub-intervals, in the normal-normal (here y-y) block.
/// Symmetric positive semidefinite.
pub fn penalty_jacobian(mesh: &Mesh, u: &[f64], cfg: &PenaltyConfig) -> CsrMatrix {
    let n = u.len();
    let mut triplets = Vec::new();
    for (a, b, len) in contact_edges(mesh) {
        let alpha = -u[2 * a + 1];
        let beta = -u[2 * b + 1];
        let m = edge_active_mass(alpha, beta, len);
        if m[0][0] == 0.0 && m[1][1] == 0.0 {
            continue;
        }
        let (da, db) = (2 * a + 1, 2 * b + 1);
        // The two sign flips (u_n = −u_y on both sides) cancel.
        triplets.push((da, da, m[0][0] / cfg.epsilon));
        triplets.push((da, db, m[0][1] / cfg.epsilon));
        triplets.push((db, da, m[1][0] / cfg.epsilon));
        triplets.push((db, db, m[1][1] / cfg.epsilon));
    }
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// Penalty energy J_ε(u) = ½a(u,u) − L(u) + (1/2ε)‖[u_n]_+‖²₀ using the
/// same exact integration as the assembly.
pub fn penalty_energy(mesh: &Mesh, u: &[f64], case: &ProblemCase, cfg: &PenaltyConfig) -> Result<f64> {
    let k = assemble_stiffness(mesh, &case.material)?;
    let f = assemble_load(mesh, case.volume_force.as_ref(), case.traction.as_ref());
    Ok(energy_from_parts(&k, &f, mesh, u, cfg.epsilon))
}

fn energy_from_parts(k: &CsrMatrix, f: &[f64], mesh: &Mesh, u: &[f64], epsilon: f64) -> f64 {
    let elastic = 0.5 * k.quadratic_form(u, u);
    let load: f64 = f.iter().zip(u).map(|(a, b)| a * b).sum();
    let mut pen = 0.0;
    for (a, b, len) in contact_edges(mesh) {
        pen += edge_clipped_square(-u[2 * a + 1], -u[2 * b + 1], len);
    }
    elastic - load + pen / (2.0 * epsilon)
}

/// Solves the discrete penalty problem by semismooth Newton from the
/// unconstrained elastic solution.
///
/// Terminates when ‖K U + (1/ε)C(U) − F‖ ≤ newton_tol·‖F‖ on the free
/// dofs. The iterate history (residual norms and penalty energies) is kept
/// for diagnostics and carried by the non-convergence error.
pub fn solve_penalty(mesh: &Mesh, case: &ProblemCase, cfg: &PenaltyConfig) -> Result<PenaltyState> {
    cfg.validate()?;
    let k = assemble_stiffness(mesh, &case.material)?;
    let f = assemble_load(mesh, case.volume_force.as_ref(), case.traction.as_ref());
    let dofs = DofMap::new(mesh, case.dirichlet.as_ref());
    let sys = apply_dirichlet(&k, &f, &dofs)?;

    // Initial guess: the pure elastic solve. Its contact trace predicts the
    // first active set well.
    let mut u = solve_spd(&sys)?;

    let scale = {
        let s = norm2(sys.rhs());
        if s > 0.0 {
            s
        } else {
            1.0
        }
    };

    let free = sys.free_dofs().to_vec();
    let positions = sys.free_positions().to_vec();
    let residual_free = |u_full: &[f64]| -> Vec<f64> {
        let ku = k.mul_vec(u_full);
        let pf = penalty_force(mesh, u_full, cfg);
        free.iter().map(|&d| ku[d] + pf[d] - f[d]).collect()
    };

    let mut residual_history = Vec::new();
    let mut energy_history = vec![energy_from_parts(&k, &f, mesh, &u, cfg.epsilon)];
    let mut res = norm2(&residual_free(&u));
    residual_history.push(res);

    let mut iterations = 0;
    while res > cfg.newton_tol * scale {
        if iterations >= cfg.max_iters {
            return Err(Error::NonConvergence {
                iterations,
                last_residual: res,
                history: residual_history,
            });
        }
        let jac = penalty_jacobian(mesh, &u, cfg);
        let system = k.add_scaled(&jac, 1.0).restrict(&free);
        let chol = SparseCholesky::factorize(&system, Some(&positions))?;
        let rhs: Vec<f64> = residual_free(&u).iter().map(|r| -r).collect();
        let delta = chol.solve(&rhs);

        // Full step first; halve only if the residual fails to decrease.
        let mut step = 1.0;
        let mut trial_res;
        let mut trial;
        loop {
            trial = u.clone();
            for (idx, &d) in free.iter().enumerate() {
                trial[d] += step * delta[idx];
            }
            trial_res = norm2(&residual_free(&trial));
            if trial_res < res || step < 1e-12 {
                break;
            }
            step *= 0.5;
        }
        u = trial;
        res = trial_res;
        iterations += 1;
        residual_history.push(res);
        energy_history.push(energy_from_parts(&k, &f, mesh, &u, cfg.epsilon));
    }

    Ok(PenaltyState {
        contact_normal_trace: contact_normal_trace(mesh, &u),
        displacement: u,
        residual_history,
        energy_history,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::ProblemCase;
    use crate::mesh::{SideTagging, TraceMesh};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn contact_mesh(n: usize) -> Mesh {
        Mesh::generate_structured_square(
            n,
            SideTagging::contact_bottom(
                BoundaryTag::Dirichlet,
                BoundaryTag::Neumann,
                BoundaryTag::Dirichlet,
            ),
        )
        .unwrap()
    }

    #[test]
    fn positive_part_basics() {
        assert_eq!(positive_part(3.0), 3.0);
        assert_eq!(positive_part(-2.0), 0.0);
        assert_eq!(positive_part(0.0), 0.0);
    }

    proptest! {
        /// a ≤ [a]_+ and a[a]_+ = [a]²_+ hold exactly.
        #[test]
        fn positive_part_identities(a in -1e6f64..1e6) {
            let pa = positive_part(a);
            prop_assert!(a <= pa);
            prop_assert_eq!(a * pa, pa * pa);
        }

        /// ([a]_+ − [b]_+)(a − b) ≥ ([a]_+ − [b]_+)² ≥ 0 and the Lipschitz
        /// bound |[a]_+ − [b]_+| ≤ |a − b|.
        #[test]
        fn positive_part_monotonicity(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let d = positive_part(a) - positive_part(b);
            prop_assert!(d * (a - b) >= d * d);
            prop_assert!(d * d >= 0.0);
            prop_assert!(d.abs() <= (a - b).abs());
        }
    }

    #[test]
    fn config_validation() {
        assert!(PenaltyConfig::new(0.0).validate().is_err());
        assert!(PenaltyConfig::new(-1.0).validate().is_err());
        let mut cfg = PenaltyConfig::new(0.1);
        cfg.max_iters = 0;
        assert!(cfg.validate().is_err());
        assert!(PenaltyConfig::new(0.1).validate().is_ok());
    }

    #[test]
    fn inactive_trace_gives_zero_force() {
        let mesh = contact_mesh(4);
        let cfg = PenaltyConfig::new(0.01);
        // Uplift everywhere: u_y > 0 so u_n = −u_y < 0.
        let mut u = vec![0.0; 2 * mesh.num_nodes()];
        for i in 0..mesh.num_nodes() {
            u[2 * i + 1] = 0.3;
        }
        assert!(penalty_force(&mesh, &u, &cfg).iter().all(|&v| v == 0.0));
        assert_eq!(penalty_jacobian(&mesh, &u, &cfg).nnz(), 0);
    }

    #[test]
    fn constant_penetration_force_sums_to_exact_integral() {
        let mesh = contact_mesh(8);
        let eps = 0.05;
        let cfg = PenaltyConfig::new(eps);
        let c = 0.02;
        let mut u = vec![0.0; 2 * mesh.num_nodes()];
        for i in 0..mesh.num_nodes() {
            u[2 * i + 1] = -c; // uniform downward displacement: u_n = c
        }
        let pf = penalty_force(&mesh, &u, &cfg);
        // Sum over normal direction: Σ (−pf_y) = (1/ε)∫ [c]_+ = c/ε.
        let total: f64 = pf.iter().skip(1).step_by(2).map(|v| -v).sum();
        assert_relative_eq!(total, c / eps, epsilon = 1e-12);
        // Non-contact dofs carry nothing.
        for i in 0..mesh.num_nodes() {
            assert_eq!(pf[2 * i], 0.0);
            if mesh.nodes()[i][1] > 0.0 {
                assert_eq!(pf[2 * i + 1], 0.0);
            }
        }
    }

    #[test]
    fn clipped_edge_integration_closed_form() {
        // Endpoint values u_n = −1, +1: the positive part integrates to
        // len/4, split 1/24 : 5/24 between the two nodal test functions.
        let len = 0.37;
        let (ia, ib) = edge_clipped_moments(-1.0, 1.0, len);
        assert_relative_eq!(ia, len / 24.0, epsilon = 1e-15);
        assert_relative_eq!(ib, 5.0 * len / 24.0, epsilon = 1e-15);
        assert_relative_eq!(ia + ib, len / 4.0, epsilon = 1e-15);
        // Mirror image swaps the roles.
        let (ia2, ib2) = edge_clipped_moments(1.0, -1.0, len);
        assert_relative_eq!(ia2, 5.0 * len / 24.0, epsilon = 1e-15);
        assert_relative_eq!(ib2, len / 24.0, epsilon = 1e-15);
        // Energy integrand.
        assert_relative_eq!(edge_clipped_square(-1.0, 1.0, len), len / 6.0, epsilon = 1e-15);
        assert_relative_eq!(edge_clipped_square(2.0, 2.0, len), 4.0 * len, epsilon = 1e-15);
    }

    #[test]
    fn jacobian_is_boundary_mass_when_fully_active() {
        let mesh = contact_mesh(4);
        let eps = 0.125;
        let cfg = PenaltyConfig::new(eps);
        let mut u = vec![0.0; 2 * mesh.num_nodes()];
        for i in 0..mesh.num_nodes() {
            u[2 * i + 1] = -0.1;
        }
        let jac = penalty_jacobian(&mesh, &u, &cfg);
        // Oracle: assemble the 1D boundary mass matrix on the trace.
        let trace: TraceMesh = mesh.contact_trace_mesh().unwrap();
        let n = trace.num_nodes();
        let mut mass = nalgebra::DMatrix::<f64>::zeros(n, n);
        for e in 0..trace.num_elements() {
            let h = trace.element_length(e);
            mass[(e, e)] += h / 3.0;
            mass[(e + 1, e + 1)] += h / 3.0;
            mass[(e, e + 1)] += h / 6.0;
            mass[(e + 1, e)] += h / 6.0;
        }
        for (i, &ni) in trace.node_ids.iter().enumerate() {
            for (j, &nj) in trace.node_ids.iter().enumerate() {
                assert_relative_eq!(
                    jac.get(2 * ni + 1, 2 * nj + 1),
                    mass[(i, j)] / eps,
                    epsilon = 1e-14
                );
            }
        }
        assert!(jac.asymmetry() < 1e-14);
    }

    #[test]
    fn jacobian_matches_finite_differences_away_from_kinks() {
        let mesh = contact_mesh(6);
        let cfg = PenaltyConfig::new(0.07);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n_dofs = 2 * mesh.num_nodes();
        // Random state, nudged so every nodal u_n is at least 1e-3 from 0.
        let mut u: Vec<f64> = (0..n_dofs).map(|_| rng.random_range(-0.5..0.5)).collect();
        for &i in &mesh.contact_node_ids() {
            let un = -u[2 * i + 1];
            if un.abs() < 1e-3 {
                u[2 * i + 1] -= 2e-3; // push into penetration
            }
        }
        let jac = penalty_jacobian(&mesh, &u, &cfg);
        let delta: Vec<f64> = (0..n_dofs).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t = 1e-6;
        let mut up = u.clone();
        let mut um = u.clone();
        for i in 0..n_dofs {
            up[i] += t * delta[i];
            um[i] -= t * delta[i];
        }
        let fp = penalty_force(&mesh, &up, &cfg);
        let fm = penalty_force(&mesh, &um, &cfg);
        let jd = jac.mul_vec(&delta);
        let fd: Vec<f64> = fp
            .iter()
            .zip(&fm)
            .map(|(p, m)| (p - m) / (2.0 * t))
            .collect();
        let scale = norm2(&jd).max(1e-30);
        let diff: f64 = jd
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(diff / scale < 1e-6, "relative FD mismatch {}", diff / scale);
    }

    #[test]
    fn discrete_operator_monotonicity() {
        // (B_h V − B_h W)·(V − W) ≥ (V − W)ᵀ K (V − W) ≥ 0 where
        // B_h U = K U + penalty_force(U).
        let mesh = contact_mesh(4);
        let mat = crate::elasticity::Material::new(1.0, 0.4).unwrap();
        let k = assemble_stiffness(&mesh, &mat).unwrap();
        let cfg = PenaltyConfig::new(0.02);
        let n_dofs = 2 * mesh.num_nodes();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let v: Vec<f64> = (0..n_dofs).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..n_dofs).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a - b).collect();
            let bv: Vec<f64> = k
                .mul_vec(&v)
                .iter()
                .zip(&penalty_force(&mesh, &v, &cfg))
                .map(|(a, b)| a + b)
                .collect();
            let bw: Vec<f64> = k
                .mul_vec(&w)
                .iter()
                .zip(&penalty_force(&mesh, &w, &cfg))
                .map(|(a, b)| a + b)
                .collect();
            let lhs: f64 = bv.iter().zip(&bw).zip(&d).map(|((a, b), c)| (a - b) * c).sum();
            let kd = k.quadratic_form(&d, &d);
            let slack = 1e-12 * norm2(&d).powi(2).max(1.0);
            assert!(lhs >= kd - slack, "monotonicity violated: {lhs} < {kd}");
            assert!(kd >= -slack);
        }
    }

    #[test]
    fn tension_case_keeps_penalty_inactive() {
        let mesh = contact_mesh(4);
        let case = ProblemCase::tension(0.5);
        let cfg = PenaltyConfig::new(1e-3);
        let state = solve_penalty(&mesh, &case, &cfg).unwrap();
        // Pure elastic solve for comparison.
        let k = assemble_stiffness(&mesh, &case.material).unwrap();
        let f = assemble_load(&mesh, case.volume_force.as_ref(), case.traction.as_ref());
        let dofs = DofMap::new(&mesh, case.dirichlet.as_ref());
        let sys = apply_dirichlet(&k, &f, &dofs).unwrap();
        let elastic = solve_spd(&sys).unwrap();
        for i in 0..elastic.len() {
            assert!((state.displacement[i] - elastic[i]).abs() < 1e-12);
        }
        assert_eq!(state.iterations, 0);
        assert_eq!(state.max_penetration(), 0.0);
    }

    #[test]
    fn patch_penetration_is_epsilon_times_pressure() {
        let p = 1.0;
        for (n, eps) in [(4usize, 1e-1), (4, 1e-3), (16, 1e-1), (16, 1e-3)] {
            let case = ProblemCase::patch(p, eps * p);
            let mesh = case.mesh(n).unwrap();
            let mut cfg = PenaltyConfig::new(eps);
            cfg.newton_tol = 1e-12;
            let state = solve_penalty(&mesh, &case, &cfg).unwrap();
            let exact = ProblemCase::patch_exact(p, eps);
            for un in &state.contact_normal_trace {
                assert!(
                    (un - eps * p).abs() < 1e-10,
                    "penetration {un} vs {} (n={n}, eps={eps})",
                    eps * p
                );
            }
            for (i, node) in mesh.nodes().iter().enumerate() {
                let ex = exact(node[0], node[1]);
                assert!((state.displacement[2 * i] - ex[0]).abs() < 1e-10);
                assert!((state.displacement[2 * i + 1] - ex[1]).abs() < 1e-10);
            }
            // Recovered pressure is compressive at every contact node.
            for un in &state.contact_normal_trace {
                assert!(-(positive_part(*un)) / eps <= 0.0);
            }
        }
    }

    #[test]
    fn penalty_energy_zero_state() {
        let mesh = contact_mesh(2);
        let mut case = ProblemCase::tension(1.0);
        case.traction = std::sync::Arc::new(|_, _| [0.0, 0.0]);
        let cfg = PenaltyConfig::new(0.1);
        let u = vec![0.0; 2 * mesh.num_nodes()];
        let e = penalty_energy(&mesh, &u, &case, &cfg).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn solution_minimizes_penalty_energy() {
        let case = ProblemCase::flat_punch(1.0);
        let mesh = case.mesh(8).unwrap();
        let cfg = PenaltyConfig::new(0.05);
        let state = solve_penalty(&mesh, &case, &cfg).unwrap();
        let e_star = penalty_energy(&mesh, &state.displacement, &case, &cfg).unwrap();
        let dofs = DofMap::new(&mesh, case.dirichlet.as_ref());
        let constrained: Vec<usize> = dofs.constraints().iter().map(|&(d, _)| d).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let mut pert = state.displacement.clone();
            let mut dir: Vec<f64> = (0..pert.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            for &d in &constrained {
                dir[d] = 0.0;
            }
            let nrm = norm2(&dir);
            for (p, d) in pert.iter_mut().zip(&dir) {
                *p += 1e-3 * d / nrm;
            }
            let e = penalty_energy(&mesh, &pert, &case, &cfg).unwrap();
            assert!(e >= e_star - 1e-14, "perturbed energy {e} below minimum {e_star}");
        }
    }

    #[test]
    fn flat_punch_newton_iterations_and_energy_descent() {
        let case = ProblemCase::flat_punch(1.0);
        let mesh = case.mesh(16).unwrap();
        let mut cfg = PenaltyConfig::new(mesh.h());
        cfg.newton_tol = 1e-10;
        let state = solve_penalty(&mesh, &case, &cfg).unwrap();
        assert!(
            state.iterations <= 15,
            "expected at most 15 Newton iterations, took {}",
            state.iterations
        );
        // Energy decreases monotonically after the first accepted update.
        for w in state.energy_history[1..].windows(2) {
            assert!(w[1] <= w[0] + 1e-14, "energy increased: {} -> {}", w[0], w[1]);
        }
        // Residual history tail is strictly decreasing once the active set
        // settles; check the final two steps.
        let hist = &state.residual_history;
        if hist.len() >= 3 {
            assert!(hist[hist.len() - 1] < hist[hist.len() - 2]);
        }
        // An interior contact zone forms: some nodes penetrate, some not.
        let active = state
            .contact_normal_trace
            .iter()
            .filter(|&&v| v > 0.0)
            .count();
        assert!(active > 0 && active < state.contact_normal_trace.len());
    }

    #[test]
    fn max_iters_exhaustion_carries_history() {
        let case = ProblemCase::flat_punch(1.0);
        let mesh = case.mesh(8).unwrap();
        let mut cfg = PenaltyConfig::new(0.01);
        cfg.max_iters = 1;
        // Unreachable tolerance forces iteration-budget exhaustion.
        cfg.newton_tol = 1e-30;
        match solve_penalty(&mesh, &case, &cfg) {
            Err(Error::NonConvergence { history, .. }) => assert!(!history.is_empty()),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
