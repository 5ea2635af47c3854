use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use jamstress_cli::config::{GeneratorKind, GeneratorSpec, RunConfig};
use jamstress_cli::{pipeline, presets};
use jamstress_core::geometry::write_mesh;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "jamstress",
    version,
    about = "Interface forces and reconstructed stress fields in jammed polygonal packings"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mesh utilities.
    Mesh {
        #[command(subcommand)]
        cmd: MeshCmd,
    },
    /// Run the pipeline from a TOML configuration file.
    Run {
        /// Configuration path.
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Materialize a named preset into a directory and run it.
    Preset {
        /// One of: verif1, verif2, shear-brick, compress60, twocell,
        /// twocell-tension.
        name: String,
        /// Output directory for config.toml and the run artifacts.
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Generate a mesh and write it as a .jmsh file.
    Gen {
        #[arg(long, value_enum)]
        kind: GeneratorKind,
        /// Grid columns (kind = grid).
        #[arg(long)]
        nx: Option<usize>,
        /// Grid rows (kind = grid).
        #[arg(long)]
        ny: Option<usize>,
        /// Brick rows (kind = brick).
        #[arg(long)]
        rows: Option<usize>,
        /// Bricks per even row (kind = brick).
        #[arg(long)]
        cols: Option<usize>,
        /// Voronoi seed count (kind = voronoi).
        #[arg(long)]
        n_seeds: Option<usize>,
        /// PRNG seed for the Voronoi generator.
        #[arg(long)]
        seed: Option<u64>,
        /// Domain rectangle "x0,y0,x1,y1".
        #[arg(long, default_value = "0,0,1,1")]
        domain: DomainArg,
        /// Output file.
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone)]
struct DomainArg([f64; 4]);

impl FromStr for DomainArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse().map_err(|_| format!("bad coordinate '{p}'")))
            .collect::<Result<_, _>>()?;
        let [x0, y0, x1, y1]: [f64; 4] =
            parts.try_into().map_err(|_| "expected x0,y0,x1,y1".to_string())?;
        Ok(DomainArg([x0, y0, x1, y1]))
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Mesh { cmd: MeshCmd::Gen { kind, nx, ny, rows, cols, n_seeds, seed, domain, output } } => {
            let spec = GeneratorSpec { kind, nx, ny, rows, cols, n_seeds, seed, domain: domain.0 };
            let mesh = jamstress_cli::config::generate_mesh(&spec)?;
            std::fs::write(&output, write_mesh(&mesh))
                .with_context(|| format!("writing {}", output.display()))?;
            println!(
                "wrote {} ({} cells, {} edges, {} internal)",
                output.display(),
                mesh.cells().len(),
                mesh.edges().len(),
                mesh.internal_edges().len()
            );
            Ok(0)
        }
        Cmd::Run { config } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let config = RunConfig::from_toml(&text)?;
            let out_dir = PathBuf::from(&config.output.dir);
            let report = pipeline::run_pipeline(&config, &out_dir)?;
            print_summary(&report);
            Ok(report.exit_code)
        }
        Cmd::Preset { name, output } => {
            let Some(toml_text) = presets::preset_toml(&name) else {
                bail!("unknown preset '{name}'; available: {}", presets::PRESET_NAMES.join(", "));
            };
            let config = RunConfig::from_toml(toml_text)?;
            std::fs::create_dir_all(&output)
                .with_context(|| format!("creating {}", output.display()))?;
            std::fs::write(output.join("config.toml"), toml_text)?;
            let report = pipeline::run_pipeline(&config, &output)?;
            print_summary(&report);
            Ok(report.exit_code)
        }
    }
}

fn print_summary(report: &pipeline::RunReport) {
    let objective = if report.stability == "mechanism" {
        "unbounded".to_string()
    } else {
        format!("{:.3e}", report.solver.primal_objective)
    };
    println!(
        "{} | cells {} | objective {} | gap {:.2e} | iterations {}",
        report.stability,
        report.mesh.cells,
        objective,
        report.solver.duality_gap,
        report.solver.iterations
    );
    if let Some(a) = &report.audits {
        println!(
            "audits {} | balance {:.2e} | tension {:.2e} | tresca {:.2e} | complementarity {:.2e}",
            if a.pass { "pass" } else { "FAIL" },
            a.cell_balance,
            a.tension,
            a.tresca_excess,
            a.contact_complementarity
        );
    }
    if let Some(r) = &report.reconstruction {
        println!(
            "reconstruction {} | cells {} | div {:.2e} | weak symmetry {:.2e} | flux {:.2e}",
            if r.pass { "pass" } else { "FAIL" },
            r.cells,
            r.max_div_norm,
            r.max_weak_symmetry,
            r.max_flux_error
        );
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("total {:.1} ms", report.timings_ms.total);
}
