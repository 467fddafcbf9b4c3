//! Benchmark problem definitions for the contact solvers and studies.

use std::sync::Arc;

use crate::elasticity::Material;
use crate::error::Result;
use crate::mesh::{BoundaryTag, Mesh, SideTag, SideTagging};

/// Position-dependent vector field (volume force, traction or boundary data).
pub type Field = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

/// One benchmark instance: material, loads, Dirichlet data and side tags.
#[derive(Clone)]
pub struct ProblemCase {
    pub name: String,
    pub description: String,
    pub material: Material,
    pub volume_force: Field,
    pub traction: Field,
    pub dirichlet: Field,
    pub tagging: SideTagging,
}

impl std::fmt::Debug for ProblemCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemCase")
            .field("name", &self.name)
            .field("material", &self.material)
            .finish_non_exhaustive()
    }
}

fn zero_field() -> Field {
    Arc::new(|_, _| [0.0, 0.0])
}

fn on_top(y: f64) -> bool {
    y > 1.0 - 1e-9
}

impl ProblemCase {
    /// Builds the structured mesh for this case's tagging.
    pub fn mesh(&self, n: usize) -> Result<Mesh> {
        Mesh::generate_structured_square(n, self.tagging)
    }

    /// Uniform compression against the foundation.
    ///
    /// Poisson-free material (λ = 0, μ = 1/2, so E = 1), traction (0, −p)
    /// on the top side and Dirichlet data on the left/right sides tracing
    /// the uniform state u = (0, −p·y − penetration). With
    /// `penetration = ε·p` this is the exact solution of the penalty
    /// problem at parameter ε; with `penetration = 0` it is the exact
    /// constrained solution, whose contact pressure density is p.
    pub fn patch(pressure: f64, penetration: f64) -> ProblemCase {
        let p = pressure;
        ProblemCase {
            name: "patch".into(),
            description: "uniform compression with full bottom contact".into(),
            material: Material::new(0.5, 0.0).expect("valid material"),
            volume_force: zero_field(),
            traction: Arc::new(move |_, y| if on_top(y) { [0.0, -p] } else { [0.0, 0.0] }),
            dirichlet: Arc::new(move |_, y| [0.0, -p * y - penetration]),
            tagging: SideTagging::contact_bottom(
                BoundaryTag::Dirichlet,
                BoundaryTag::Neumann,
                BoundaryTag::Dirichlet,
            ),
        }
    }

    /// Exact displacement field of the penalized patch problem.
    pub fn patch_exact(pressure: f64, epsilon: f64) -> impl Fn(f64, f64) -> [f64; 2] {
        move |_x, y| [0.0, -pressure * (y + epsilon)]
    }

    /// Rocking pressure on the top edge with the upper halves of both
    /// sides clamped: the compressive lobe of g = (0, −p sin(2πx)) presses
    /// the left part of the body onto the foundation while the right part
    /// lifts off. The contact zone is a strict subset of the bottom edge
    /// with a free boundary near x ≈ 0.34, stable under refinement, which
    /// is what the convergence studies need. Centered punch profiles press
    /// the whole bottom edge into contact on this geometry and leave no
    /// free boundary to study.
    pub fn flat_punch(pressure: f64) -> ProblemCase {
        let p = pressure;
        let split = SideTag::Split {
            at: 0.5,
            below: BoundaryTag::Neumann,
            above: BoundaryTag::Dirichlet,
        };
        ProblemCase {
            name: "flat_punch".into(),
            description: "rocking top load, partial contact with free boundary".into(),
            material: Material::from_young_poisson(1.0, 0.3).expect("valid material"),
            volume_force: zero_field(),
            traction: Arc::new(move |x, y| {
                if on_top(y) {
                    [0.0, -p * (2.0 * std::f64::consts::PI * x).sin()]
                } else {
                    [0.0, 0.0]
                }
            }),
            dirichlet: zero_field(),
            tagging: SideTagging {
                bottom: SideTag::Uniform(BoundaryTag::Contact),
                right: split,
                top: SideTag::Uniform(BoundaryTag::Neumann),
                left: split,
            },
        }
    }

    /// Upward traction: the contact constraint never activates and both
    /// contact solvers agree with the plain elastic solve.
    pub fn tension(pressure: f64) -> ProblemCase {
        let p = pressure;
        ProblemCase {
            name: "tension".into(),
            description: "upward pull, contact inactive".into(),
            material: Material::new(1.0, 1.0).expect("valid material"),
            volume_force: zero_field(),
            traction: Arc::new(move |_, y| if on_top(y) { [0.0, p] } else { [0.0, 0.0] }),
            dirichlet: zero_field(),
            tagging: SideTagging::contact_bottom(
                BoundaryTag::Dirichlet,
                BoundaryTag::Neumann,
                BoundaryTag::Dirichlet,
            ),
        }
    }
}

/// Benchmark selector: knows how to produce the ε-coupled penalty case and
/// the constrained reference case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Benchmark {
    Patch { pressure: f64 },
    FlatPunch { pressure: f64 },
    Tension { pressure: f64 },
}

impl Benchmark {
    pub fn from_name(name: &str) -> Result<Benchmark> {
        match name {
            "patch" => Ok(Benchmark::Patch { pressure: 1.0 }),
            "flat_punch" => Ok(Benchmark::FlatPunch { pressure: 1.0 }),
            "tension" => Ok(Benchmark::Tension { pressure: 1.0 }),
            other => Err(crate::error::Error::InvalidArgument(format!(
                "unknown case `{other}` (expected patch, flat_punch or tension)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Benchmark::Patch { .. } => "patch",
            Benchmark::FlatPunch { .. } => "flat_punch",
            Benchmark::Tension { .. } => "tension",
        }
    }

    pub fn pressure(&self) -> f64 {
        match *self {
            Benchmark::Patch { pressure }
            | Benchmark::FlatPunch { pressure }
            | Benchmark::Tension { pressure } => pressure,
        }
    }

    /// Case solved by the penalty method at parameter ε. The patch Dirichlet
    /// data traces the penalized uniform state, so it depends on ε.
    pub fn penalty_case(&self, epsilon: f64) -> ProblemCase {
        match *self {
            Benchmark::Patch { pressure } => ProblemCase::patch(pressure, epsilon * pressure),
            Benchmark::FlatPunch { pressure } => ProblemCase::flat_punch(pressure),
            Benchmark::Tension { pressure } => ProblemCase::tension(pressure),
        }
    }

    /// Case solved by the constrained reference solver (zero penetration).
    pub fn vi_case(&self) -> ProblemCase {
        match *self {
            Benchmark::Patch { pressure } => ProblemCase::patch(pressure, 0.0),
            Benchmark::FlatPunch { pressure } => ProblemCase::flat_punch(pressure),
            Benchmark::Tension { pressure } => ProblemCase::tension(pressure),
        }
    }
}
