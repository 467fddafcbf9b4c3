//! Constrained reference solver for the contact variational inequality.
//!
//! The discrete cone is {v : v_n ≤ 0 at every contact node}, which for P1
//! traces on the straight contact segment coincides with v_n ≤ 0 on all of
//! Γ_C. A primal-dual active-set iteration enforces u_n = 0 on the active
//! nodes by elimination (the same machinery as Dirichlet constraints),
//! reads the multipliers off the residual, and updates the set until it is
//! stationary. Complementarity then holds by construction: active nodes
//! have u_n = 0 exactly, inactive nodes have λ = 0 exactly.

use crate::cases::ProblemCase;
use crate::elasticity::{
    apply_constraints, apply_dirichlet, assemble_load, assemble_stiffness, solve_spd, DofMap,
};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, TraceMesh};
use crate::norms::TraceFunction;
use crate::sparse::CsrMatrix;

/// Maximum number of active-set sweeps before reporting cycling.
const MAX_SWEEPS: usize = 100;

/// Solution of the constrained problem.
#[derive(Debug, Clone)]
pub struct VISolution {
    /// Full nodal displacement vector.
    pub displacement: Vec<f64>,
    /// Contact node ids, left to right.
    pub contact_nodes: Vec<usize>,
    /// Lumped contact multiplier λ ≥ 0 per contact node (a force; zero at
    /// inactive nodes).
    pub multipliers: Vec<f64>,
    /// Active flag per contact node.
    pub active: Vec<bool>,
    /// Number of active-set sweeps performed.
    pub sweeps: usize,
}

impl VISolution {
    /// Normal trace u_n = −u_y per contact node.
    pub fn contact_normal_trace(&self) -> Vec<f64> {
        self.contact_nodes
            .iter()
            .map(|&i| -self.displacement[2 * i + 1])
            .collect()
    }

    /// Total contact force Σ λ_i.
    pub fn total_contact_force(&self) -> f64 {
        self.multipliers.iter().sum()
    }

    /// Worst complementarity product |λ_i · u_{n,i}| over contact nodes.
    pub fn worst_complementarity(&self) -> f64 {
        self.contact_nodes
            .iter()
            .zip(&self.multipliers)
            .map(|(&i, &l)| (l * self.displacement[2 * i + 1]).abs())
            .fold(0.0, f64::max)
    }
}

/// Solves the variational inequality by primal-dual active set.
///
/// `tol` bounds the accepted violations when validating the discrete
/// contact conditions λ ≥ −tol, u_n ≤ tol and |λ u_n| ≤ tol at return.
pub fn solve_vi(mesh: &Mesh, case: &ProblemCase, tol: f64) -> Result<VISolution> {
    let k = assemble_stiffness(mesh, &case.material)?;
    let f = assemble_load(mesh, case.volume_force.as_ref(), case.traction.as_ref());
    let dofs = DofMap::new(mesh, case.dirichlet.as_ref());
    let contact_nodes = mesh.contact_node_ids();
    if contact_nodes.is_empty() {
        return Err(Error::InvalidArgument(
            "case mesh has no contact nodes".into(),
        ));
    }

    // Predict the first active set from the unconstrained elastic solve.
    let elastic = {
        let sys = apply_dirichlet(&k, &f, &dofs)?;
        solve_spd(&sys)?
    };
    let mut active: Vec<bool> = contact_nodes
        .iter()
        .map(|&i| -elastic[2 * i + 1] > 0.0)
        .collect();

    for sweep in 1..=MAX_SWEEPS {
        let mut constraints = dofs.constraints().to_vec();
        for (ci, &node) in contact_nodes.iter().enumerate() {
            if active[ci] {
                constraints.push((2 * node + 1, 0.0));
            }
        }
        constraints.sort_by_key(|&(d, _)| d);
        let sys = apply_constraints(&k, &f, &constraints, dofs.positions())?;
        let displacement = solve_spd(&sys)?;

        // Multipliers are the constraint reactions: λ_i = (K U − F) at the
        // vertical dof of an active node.
        let ku = k.mul_vec(&displacement);
        let multipliers: Vec<f64> = contact_nodes
            .iter()
            .enumerate()
            .map(|(ci, &node)| {
                if active[ci] {
                    ku[2 * node + 1] - f[2 * node + 1]
                } else {
                    0.0
                }
            })
            .collect();

        let next: Vec<bool> = contact_nodes
            .iter()
            .enumerate()
            .map(|(ci, &node)| {
                if active[ci] {
                    multipliers[ci] > 0.0
                } else {
                    -displacement[2 * node + 1] > 0.0
                }
            })
            .collect();

        if next == active {
            let sol = VISolution {
                displacement,
                contact_nodes,
                multipliers,
                active,
                sweeps: sweep,
            };
            validate_contact_conditions(&sol, tol)?;
            return Ok(sol);
        }
        active = next;
    }
    Err(Error::NonConvergence {
        iterations: MAX_SWEEPS,
        last_residual: f64::NAN,
        history: Vec::new(),
    })
}

fn validate_contact_conditions(sol: &VISolution, tol: f64) -> Result<()> {
    for (ci, &node) in sol.contact_nodes.iter().enumerate() {
        let un = -sol.displacement[2 * node + 1];
        let l = sol.multipliers[ci];
        if l < -tol || un > tol || (l * un).abs() > tol {
            return Err(Error::SingularSystem(format!(
                "contact conditions violated at node {node}: lambda = {l:.3e}, u_n = {un:.3e}"
            )));
        }
    }
    Ok(())
}

/// Converts the lumped nodal multipliers into the piecewise-linear contact
/// pressure density −σ_n(u) ≥ 0 on the trace, dividing by the lumped
/// boundary mass weights. The integral of the density over Γ_C equals
/// Σ λ_i exactly.
pub fn multiplier_as_trace_function(sol: &VISolution, trace: &TraceMesh) -> Result<TraceFunction> {
    if trace.node_ids != sol.contact_nodes {
        return Err(Error::InvalidArgument(
            "trace mesh does not match the solution's contact nodes".into(),
        ));
    }
    let n = trace.num_nodes();
    let mut weights = vec![0.0; n];
    for e in 0..trace.num_elements() {
        let h = trace.element_length(e);
        weights[e] += 0.5 * h;
        weights[e + 1] += 0.5 * h;
    }
    let values: Vec<f64> = sol
        .multipliers
        .iter()
        .zip(&weights)
        .map(|(&l, &w)| l / w)
        .collect();
    TraceFunction::new(trace.clone(), values)
}

/// Diagnostic for the residual identity linking the two solvers on one
/// mesh: returns ‖K(U_vi − U_ε) − Λ − (1/ε)C(U_ε)‖ where Λ carries the
/// lumped multipliers at the contact y-dofs.
pub fn residual_identity_gap(
    k: &CsrMatrix,
    sol: &VISolution,
    penalty_displacement: &[f64],
    penalty_force: &[f64],
    free_dofs: &[usize],
) -> f64 {
    let n = sol.displacement.len();
    let mut lambda_vec = vec![0.0; n];
    for (ci, &node) in sol.contact_nodes.iter().enumerate() {
        lambda_vec[2 * node + 1] = sol.multipliers[ci];
    }
    let diff: Vec<f64> = sol
        .displacement
        .iter()
        .zip(penalty_displacement)
        .map(|(a, b)| a - b)
        .collect();
    let kd = k.mul_vec(&diff);
    let mut worst = 0.0_f64;
    for &d in free_dofs {
        let gap = kd[d] - lambda_vec[d] - penalty_force[d];
        worst = worst.max(gap.abs());
    }
    worst
}
