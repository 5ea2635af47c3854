//! TOML run configuration.
//!
//! ```toml
//! [mesh]
//! source = "generate"        # or "file" with `path = "wall.jmsh"`
//! kind = "voronoi"           # voronoi | grid | brick
//! n_seeds = 60
//! seed = 4242
//! domain = [0.0, 0.0, 1.0, 1.0]
//!
//! [friction]
//! s_t = 10.0
//!
//! [traction]
//! mode = "matrix"            # matrix | per-side | per-edge
//! s = [[-1.0, 0.0], [0.0, -1.0]]
//!
//! [solver]                   # optional
//! tol_feas = 1e-8
//! tol_gap = 1e-7
//! max_iter = 200
//!
//! [audit]                    # optional
//! tol = 1e-7
//!
//! [parallel]                 # optional; JAMSTRESS_THREADS overrides
//! threads = 0                # 0 = one worker per core
//!
//! [output]                   # optional
//! dir = "out"
//! ```

use anyhow::{bail, Context, Result};
use jamstress_core::geometry::{
    generate_brick_wall, generate_grid, generate_voronoi, load_mesh, PolygonalMesh, Rect,
};
use jamstress_core::primal::FrictionProblem;
use jamstress_core::{Mat2, Point, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshSource,
    pub friction: FrictionConfig,
    pub traction: TractionSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub audit: AuditConfig,
    #[serde(default)]
    pub parallel: ParallelConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeshSource {
    File { path: String },
    Generate(GeneratorSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    #[serde(default)]
    pub nx: Option<usize>,
    #[serde(default)]
    pub ny: Option<usize>,
    #[serde(default)]
    pub rows: Option<usize>,
    #[serde(default)]
    pub cols: Option<usize>,
    #[serde(default)]
    pub n_seeds: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// `[x0, y0, x1, y1]`, defaults to the unit square.
    #[serde(default = "default_domain")]
    pub domain: [f64; 4],
}

fn default_domain() -> [f64; 4] {
    [0.0, 0.0, 1.0, 1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Voronoi,
    Grid,
    Brick,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionConfig {
    pub s_t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TractionSpec {
    /// `g_e = S n_e` on every boundary edge; `s` is row-major.
    Matrix { s: [[f64; 2]; 2] },
    /// Constant vectors keyed by the dominant outward-normal direction.
    PerSide {
        #[serde(default)]
        left: [f64; 2],
        #[serde(default)]
        right: [f64; 2],
        #[serde(default)]
        top: [f64; 2],
        #[serde(default)]
        bottom: [f64; 2],
    },
    /// Explicit table; must cover every boundary edge.
    PerEdge { edges: Vec<EdgeEntry> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub edge: usize,
    pub g: [f64; 2],
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol_feas: 1e-8, tol_gap: 1e-7, max_iter: 200 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditConfig {
    /// Equilibrium / contact / friction audit tolerance.
    pub tol: f64,
    /// Scaled per-triangle weak-symmetry threshold.
    pub weak_symmetry_tol: f64,
    /// Boundary-flux reproduction threshold.
    pub flux_tol: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { tol: 1e-7, weak_symmetry_tol: 1e-9, flux_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParallelConfig {
    /// Worker count for the per-cell reconstruction; 0 = one per core.
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid run configuration")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Reconstruction worker count, with the `JAMSTRESS_THREADS` environment
    /// variable taking precedence over the config.
    pub fn effective_threads(&self) -> usize {
        std::env::var("JAMSTRESS_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(self.parallel.threads)
    }
}

/// Uniform seeds in the interior of a rectangle from a fixed 64-bit seed.
pub fn seeded_points(n: usize, seed: u64, domain: Rect) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin_x = 0.02 * domain.width();
    let margin_y = 0.02 * domain.height();
    (0..n)
        .map(|_| {
            Point::new(
                rng.random_range(domain.min.x + margin_x..domain.max.x - margin_x),
                rng.random_range(domain.min.y + margin_y..domain.max.y - margin_y),
            )
        })
        .collect()
}

pub fn build_mesh(source: &MeshSource) -> Result<PolygonalMesh> {
    match source {
        MeshSource::File { path } => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            load_mesh(&text).with_context(|| format!("parsing {path}"))
        }
        MeshSource::Generate(spec) => generate_mesh(spec),
    }
}

pub fn generate_mesh(spec: &GeneratorSpec) -> Result<PolygonalMesh> {
    let [x0, y0, x1, y1] = spec.domain;
    if !(x1 > x0 && y1 > y0) {
        bail!("domain [{x0}, {y0}, {x1}, {y1}] is empty");
    }
    let rect = Rect::new(x0, y0, x1, y1);
    let mesh = match spec.kind {
        GeneratorKind::Grid => {
            let nx = spec.nx.context("grid generator needs nx")?;
            let ny = spec.ny.context("grid generator needs ny")?;
            generate_grid(nx, ny, rect)?
        }
        GeneratorKind::Brick => {
            let rows = spec.rows.context("brick generator needs rows")?;
            let cols = spec.cols.context("brick generator needs cols")?;
            generate_brick_wall(rows, cols, rect)?
        }
        GeneratorKind::Voronoi => {
            let n = spec.n_seeds.context("voronoi generator needs n_seeds")?;
            let seed = spec.seed.unwrap_or(0);
            let seeds = seeded_points(n, seed, rect);
            generate_voronoi(&seeds, &rect.corners())?
        }
    };
    Ok(mesh)
}

/// Assemble the friction problem described by the configuration.
pub fn build_problem(config: &RunConfig) -> Result<FrictionProblem> {
    let mesh = build_mesh(&config.mesh)?;
    let s_t = config.friction.s_t;
    let problem = match &config.traction {
        TractionSpec::Matrix { s } => {
            let m = Mat2::new(s[0][0], s[0][1], s[1][0], s[1][1]);
            FrictionProblem::with_boundary_stress(mesh, s_t, m)?
        }
        TractionSpec::PerSide { left, right, top, bottom } => {
            let entries: Vec<(usize, Vec2)> = mesh
                .boundary_edges()
                .iter()
                .map(|&e| {
                    let n = mesh.edge(e).normal;
                    let g = if n.x.abs() >= n.y.abs() {
                        if n.x >= 0.0 {
                            right
                        } else {
                            left
                        }
                    } else if n.y >= 0.0 {
                        top
                    } else {
                        bottom
                    };
                    (e, Vec2::new(g[0], g[1]))
                })
                .collect();
            FrictionProblem::new(mesh, s_t, entries)?
        }
        TractionSpec::PerEdge { edges } => {
            let entries: Vec<(usize, Vec2)> =
                edges.iter().map(|t| (t.edge, Vec2::new(t.g[0], t.g[1]))).collect();
            FrictionProblem::new(mesh, s_t, entries)?
        }
    };
    Ok(problem)
}
