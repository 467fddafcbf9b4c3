//! Command line driver for the convergence studies and mesh tooling.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use unicontact::cases::Benchmark;
use unicontact::error::Error;
use unicontact::mesh::{BoundaryTag, Mesh, SideTagging};
use unicontact::study::{
    emit_report, run_eps_study, run_h_study, ReportFormat, StudyConfig, StudyMode,
};

#[derive(Parser)]
#[command(name = "unicontact", version, about = "Penalty and active-set solvers for 2D unilateral contact, with convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Mesh refinement study with ε = c·hᶿ against an overkill reference.
    H,
    /// ε sweep on a fixed mesh against the constrained solve.
    Eps,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Md,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and write a CSV or markdown table.
    Study {
        /// Benchmark case.
        #[arg(long, value_parser = ["patch", "flat_punch", "tension"])]
        case: String,
        /// Study mode.
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Level range A..B (mesh n = 2^level).
        #[arg(long, default_value = "3..6")]
        levels: String,
        /// Exponent in ε = eps_scale · h^theta.
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        /// Scale in ε = eps_scale · h^theta.
        #[arg(long = "eps-scale", default_value_t = 1.0)]
        eps_scale: f64,
        /// Fractional order for the dual-norm columns.
        #[arg(long, default_value_t = 0.5)]
        nu: f64,
        /// Reference refinement beyond the finest level (h mode).
        #[arg(long = "ref-offset", default_value_t = 2)]
        ref_offset: u32,
        /// Start of the ε sweep (eps mode).
        #[arg(long, default_value_t = 1e-1)]
        eps0: f64,
        /// Number of ε halvings (eps mode).
        #[arg(long = "eps-steps", default_value_t = 8)]
        eps_steps: usize,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        /// Report format.
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Generate a structured contact mesh and write the plain-text format.
    Mesh {
        /// Subdivisions per side.
        #[arg(long)]
        n: usize,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        /// Refine the generated mesh this many times.
        #[arg(long, default_value_t = 0)]
        refine: u32,
    },
}

fn parse_levels(s: &str) -> Result<(u32, u32), Error> {
    let parts: Vec<&str> = s.split("..").collect();
    if parts.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "levels must look like A..B, got `{s}`"
        )));
    }
    let a: u32 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad level `{}`", parts[0])))?;
    let b: u32 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad level `{}`", parts[1])))?;
    Ok((a, b))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Study {
            case,
            mode,
            levels,
            theta,
            eps_scale,
            nu,
            ref_offset,
            eps0,
            eps_steps,
            out,
            format,
        } => {
            let bench = Benchmark::from_name(&case)?;
            let (level_min, level_max) = parse_levels(&levels)?;
            let mode = match (mode, &bench) {
                (ModeArg::Eps, _) => StudyMode::EpsStudy,
                (ModeArg::H, Benchmark::Patch { .. }) => StudyMode::Patch,
                (ModeArg::H, _) => StudyMode::HStudy,
            };
            let mut cfg = StudyConfig::new(bench, mode);
            cfg.level_min = level_min;
            cfg.level_max = level_max;
            cfg.theta = theta;
            cfg.eps_scale = eps_scale;
            cfg.nu = nu;
            cfg.ref_offset = ref_offset;
            cfg.eps0 = eps0;
            cfg.eps_steps = eps_steps;
            cfg.validate()?;
            let records = match cfg.mode {
                StudyMode::EpsStudy => run_eps_study(&cfg)?,
                _ => run_h_study(&cfg)?,
            };
            let fmt = match format {
                FormatArg::Csv => ReportFormat::Csv,
                FormatArg::Md => ReportFormat::Markdown,
            };
            emit_report(&records, fmt, &cfg.provenance(), &out)?;
            println!("{}", cfg.provenance());
            println!("wrote {} rows to {}", records.len(), out.display());
            Ok(())
        }
        Command::Mesh { n, out, refine } => {
            let tagging = SideTagging::contact_bottom(
                BoundaryTag::Dirichlet,
                BoundaryTag::Neumann,
                BoundaryTag::Dirichlet,
            );
            let mut mesh = Mesh::generate_structured_square(n, tagging)?;
            for _ in 0..refine {
                mesh = mesh.refine_uniform();
            }
            mesh.write_text(&out)?;
            println!(
                "wrote mesh with {} nodes, {} triangles to {}",
                mesh.num_nodes(),
                mesh.num_triangles(),
                out.display()
            );
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::Parse(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own help/version output counts as success.
            if e.use_stderr() {
                let _ = e.print();
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
