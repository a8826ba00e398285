//! Command-line front end: body registry, capacities, volumes, systolic
//! ratios, face queries, cuts, sweeps, combinatorial cuts, and orbit export.
//!
//! Exit codes: 0 on success with a certified result, 2 when a search returns
//! an uncertified incumbent, 1 on user error.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ehz::nalgebra::DVector;

use ehz::cuts;
use ehz::exact::ExactBody;
use ehz::json::{BodyJson, OrbitJson};
use ehz::orbit;
use ehz::solver::{self, CapacitySequence, Engine, SolverConfig};
use ehz::{bodies, faces, HPolytope};

#[derive(Parser)]
#[command(name = "ehz", version, about = "EHZ capacities and closed characteristics of convex polytopes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the EHZ capacity of a body.
    Capacity {
        #[command(flatten)]
        body: BodyArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Verify the best maximizer as an exact rational certificate.
        #[arg(long)]
        rational: bool,
    },
    /// Euclidean volume.
    Volume {
        #[command(flatten)]
        body: BodyArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Systolic ratio c^n / (n! vol).
    Systolic {
        #[command(flatten)]
        body: BodyArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Vertex enumeration.
    Vertices {
        #[command(flatten)]
        body: BodyArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Face lattice queries.
    Faces {
        #[command(flatten)]
        body: BodyArgs,
        /// Only the Lagrangian 2-faces.
        #[arg(long)]
        lagrangian: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cut a body along a hyperplane and report both pieces and the defect.
    Cut {
        #[command(flatten)]
        body: BodyArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        cutloc: CutLocArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sweep the cut level along a direction; emits CSV.
    Sweep {
        #[command(flatten)]
        body: BodyArgs,
        #[command(flatten)]
        solve: SolveArgs,
        /// Cut normal, comma-separated.
        #[arg(long, value_parser = parse_vector)]
        normal: DVector<f64>,
        /// Level range `a:b:n` (n evenly spaced levels from a to b).
        #[arg(long)]
        levels: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Search for combinatorial cuts at depth t along a direction.
    CombCut {
        #[command(flatten)]
        body: BodyArgs,
        #[command(flatten)]
        solve: SolveArgs,
        /// Cut normal, comma-separated.
        #[arg(long, value_parser = parse_vector)]
        normal: DVector<f64>,
        /// Depth below the support value: the cut sits at h_K(v) - t.
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Reconstruct the closed characteristic of a maximizing sequence.
    Orbit {
        #[command(flatten)]
        body: BodyArgs,
        #[command(flatten)]
        solve: SolveArgs,
        /// Sequence JSON file; defaults to the solved best maximizer.
        #[arg(long)]
        seq_file: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Verify a sequence and report the capacity upper bound it certifies.
    Certify {
        #[command(flatten)]
        body: BodyArgs,
        /// Sequence JSON file.
        #[arg(long)]
        seq_file: PathBuf,
        /// Verify in exact rational arithmetic (library bodies only).
        #[arg(long)]
        rational: bool,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct BodyArgs {
    /// Library body name.
    #[arg(long, conflicts_with = "body_file")]
    body: Option<String>,
    /// Body JSON file (halfspaces or vertices).
    #[arg(long)]
    body_file: Option<PathBuf>,
    /// Ambient dimension for dimension-generic bodies (default 4).
    #[arg(long)]
    dim: Option<usize>,
}

impl BodyArgs {
    fn load(&self) -> Result<HPolytope> {
        match (&self.body, &self.body_file) {
            (Some(name), None) => Ok(bodies::by_name(name, self.dim)?),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let parsed: BodyJson = serde_json::from_str(&text)?;
                Ok(parsed.to_polytope()?)
            }
            _ => bail!("specify exactly one of --body or --body-file"),
        }
    }

    fn name(&self) -> Option<&str> {
        self.body.as_deref()
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum EngineArg {
    Brute,
    Bnb,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "bnb")]
    engine: EngineArg,
    /// Cap on the maximizer support size (default: facet count).
    #[arg(long)]
    max_subset: Option<usize>,
    /// Node budget for the search.
    #[arg(long)]
    budget: Option<u64>,
    /// Target relative bound gap for certification.
    #[arg(long)]
    gap: Option<f64>,
}

impl SolveArgs {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        cfg.engine = match self.engine {
            EngineArg::Brute => Engine::Brute,
            EngineArg::Bnb => Engine::Bnb,
        };
        cfg.max_subset_size = self.max_subset;
        if let Some(b) = self.budget {
            cfg.node_budget = b;
        }
        if let Some(g) = self.gap {
            cfg.target_gap = g;
        }
        cfg
    }
}

#[derive(Args)]
struct CutLocArgs {
    /// Cut normal, comma-separated.
    #[arg(long, value_parser = parse_vector)]
    normal: DVector<f64>,
    /// Absolute cut level s: the hyperplane {<x, v> = s}.
    #[arg(long, conflicts_with = "t")]
    level: Option<f64>,
    /// Depth below the support value: the cut sits at h_K(v) - t.
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Args)]
struct OutArgs {
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArgs {
    fn write(&self, content: &str) -> Result<()> {
        match &self.out {
            Some(path) => {
                std::fs::write(path, content)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            None => {
                std::io::stdout().write_all(content.as_bytes())?;
            }
        }
        Ok(())
    }
}

fn parse_vector(s: &str) -> Result<DVector<f64>, String> {
    let coords: Result<Vec<f64>, _> =
        s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    match coords {
        Ok(v) if !v.is_empty() => Ok(DVector::from_vec(v)),
        _ => Err(format!("cannot parse vector from `{s}`")),
    }
}

fn parse_levels(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("levels must be a:b:n");
    }
    let a: f64 = parts[0].parse()?;
    let b: f64 = parts[1].parse()?;
    let n: usize = parts[2].parse()?;
    if n == 0 {
        bail!("levels count must be positive");
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

/// 0 = certified, 2 = uncertified incumbent.
struct Outcome {
    uncertified: bool,
}

fn run(cli: Cli) -> Result<Outcome> {
    let mut outcome = Outcome { uncertified: false };
    match cli.cmd {
        Cmd::Capacity { body, solve, out, rational } => {
            let poly = body.load()?;
            let cfg = solve.config();
            let result = solver::capacity(&poly, &cfg)?;
            outcome.uncertified = !result.certified;
            let mut doc = serde_json::to_value(&result)?;
            if rational {
                let name = body
                    .name()
                    .ok_or_else(|| anyhow!("--rational needs a --body library name"))?;
                let exact = ExactBody::from_name(name, body.dim)?;
                let best = result
                    .maximizers
                    .first()
                    .ok_or_else(|| anyhow!("no maximizer to certify"))?;
                let entries = exact.sequence_from_float(&best.sequence, 1 << 20)?;
                let bound = exact.certify(&entries)?;
                doc.as_object_mut().unwrap().insert(
                    "exact_certificate".into(),
                    serde_json::json!({
                        "capacity_upper_bound": bound.to_string(),
                        "capacity_upper_bound_float": ehz::exact::to_f64(&bound),
                    }),
                );
            }
            out.write(&format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
        }
        Cmd::Volume { body, out } => {
            let poly = body.load()?;
            let vol = poly.volume()?;
            out.write(&format!("{}\n", serde_json::json!({ "volume": vol })))?;
        }
        Cmd::Systolic { body, solve, out } => {
            let poly = body.load()?;
            let cfg = solve.config();
            let result = solver::capacity(&poly, &cfg)?;
            outcome.uncertified = !result.certified;
            let rho = solver::systolic_ratio_from(&poly, result.capacity)?;
            out.write(&format!(
                "{}\n",
                serde_json::json!({
                    "systolic_ratio": rho,
                    "capacity": result.capacity,
                    "volume": poly.volume()?,
                    "certified": result.certified,
                    "gap": result.gap,
                })
            ))?;
        }
        Cmd::Vertices { body, out } => {
            let poly = body.load()?;
            let verts = poly.vertices()?;
            out.write(&format!(
                "{}\n",
                serde_json::to_string_pretty(&BodyJson::from_v(&verts))?
            ))?;
        }
        Cmd::Faces { body, lagrangian, out } => {
            let poly = body.load()?;
            let list = if lagrangian {
                faces::lagrangian_faces(&poly)?
            } else {
                faces::face_lattice(&poly)?
            };
            let doc: Vec<serde_json::Value> = list
                .iter()
                .map(|f| {
                    serde_json::json!({
                        "active_facets": f.active,
                        "dim": f.dim,
                        "class": format!("{:?}", f.class),
                        "vertex_count": f.vertices.len(),
                    })
                })
                .collect();
            out.write(&format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
        }
        Cmd::Cut { body, solve, cutloc, out } => {
            let poly = body.load()?;
            let cfg = solve.config();
            let unit = &cutloc.normal / cutloc.normal.norm();
            let spec = match (cutloc.level, cutloc.t) {
                (Some(s), None) => cuts::CutSpec::new(unit.clone(), s)?,
                (None, Some(t)) => cuts::CutSpec::from_depth(&poly, unit.clone(), t)?,
                _ => bail!("specify exactly one of --level or --t"),
            };
            let ctx = cuts::CutContext::analyze(&poly, &spec, &cfg)?;
            outcome.uncertified = !(ctx.k_result.certified
                && ctx.k1_result.certified
                && ctx.k2_result.certified);
            let found = cuts::find_in_context(&poly, &spec, &ctx, &cfg)?;
            let doc = serde_json::json!({
                "level": spec.level,
                "t": spec.depth(&poly)?,
                "analysis": ctx.analysis(),
                "k1": BodyJson::from_h(&ctx.pieces.k1),
                "k2": BodyJson::from_h(&ctx.pieces.k2),
                "combinatorial_cuts": found,
            });
            out.write(&format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
        }
        Cmd::Sweep { body, solve, normal, levels, out } => {
            let poly = body.load()?;
            let cfg = solve.config();
            let levels = parse_levels(&levels)?;
            let table = cuts::sweep(&poly, &normal, &levels, &cfg)?;
            outcome.uncertified = table.rows.iter().any(|r| r.error.is_some());
            out.write(&table.to_csv())?;
        }
        Cmd::CombCut { body, solve, normal, t, out } => {
            let poly = body.load()?;
            let cfg = solve.config();
            let search = cuts::find_combinatorial_cut(&poly, &normal, t, &cfg)?;
            let doc = serde_json::json!({
                "t": t,
                "analysis": search.analysis,
                "found": !search.cuts.is_empty(),
                "cuts": search.cuts,
            });
            out.write(&format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
        }
        Cmd::Orbit { body, solve, seq_file, out } => {
            let poly = body.load()?;
            let seq = match seq_file {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str::<CapacitySequence>(&text)?
                }
                None => {
                    let cfg = solve.config();
                    let result = solver::capacity(&poly, &cfg)?;
                    outcome.uncertified = !result.certified;
                    result
                        .maximizers
                        .first()
                        .ok_or_else(|| anyhow!("no maximizer found"))?
                        .sequence
                        .clone()
                }
            };
            let orbit = orbit::orbit_from_sequence(&poly, &seq)?;
            orbit::verify_orbit(&poly, &orbit, 1e-7)?;
            out.write(&format!(
                "{}\n",
                serde_json::to_string_pretty(&OrbitJson::from_orbit(&orbit))?
            ))?;
        }
        Cmd::Certify { body, seq_file, rational, out } => {
            let poly = body.load()?;
            let text = std::fs::read_to_string(&seq_file)
                .with_context(|| format!("reading {}", seq_file.display()))?;
            let seq: CapacitySequence = serde_json::from_str(&text)?;
            let bound = solver::certify(&poly, &seq, 1e-9)?;
            let mut doc = serde_json::json!({
                "capacity_upper_bound": bound,
                "value": solver::sequence_action(&poly, &seq)?,
            });
            if rational {
                let name = body
                    .name()
                    .ok_or_else(|| anyhow!("--rational needs a --body library name"))?;
                let exact = ExactBody::from_name(name, body.dim)?;
                let entries = exact.sequence_from_float(&seq, 1 << 20)?;
                let exact_bound = exact.certify(&entries)?;
                doc.as_object_mut().unwrap().insert(
                    "exact_capacity_upper_bound".into(),
                    serde_json::json!(exact_bound.to_string()),
                );
            }
            out.write(&format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
        }
    }
    Ok(outcome)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit with 2; reserve 2 for uncertified results.
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome { uncertified: false }) => {}
        Ok(Outcome { uncertified: true }) => std::process::exit(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
