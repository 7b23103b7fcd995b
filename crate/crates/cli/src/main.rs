//! `rtn`: command-line driver for the random tensor network experiments.
//!
//! Every subcommand writes JSON (or CSV for tables and time series) to
//! `--out` or standard output. Exit codes: 0 success, 2 invalid input,
//! 3 resource limit.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rtn_core::contraction::{
    expected_norm, expected_norm_second_moment_ratio, mc_norm_stats, mc_overlap4, BulkState, Reference,
    TensorKind,
};
use rtn_core::dynamics::{run_geometry, HamiltonianSpec, Model, TimeGrid};
use rtn_core::effdim::{
    hierarchy_table, inverse_effdim_bound, inverse_effdim_closed_form, HierarchyGeometry,
};
use rtn_core::ensembles::{verify_moments, Ensemble};
use rtn_core::exact::{self, Rational};
use rtn_core::geometry::{
    build_hyperbolic_patch, build_rtt, build_single_tensor, build_square_disc, fuse_vertices,
    inflation_counts, min_cut, DiscLegs, Dual, Geometry, Seed, TilingSpec,
};
use rtn_core::ising::{
    bound_recursive, elimination_order, partition_exact, partition_with_boundary_field, OrderKind,
};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "rtn", version, about = "Equilibration diagnostics for random tensor network states")]
struct Cli {
    /// Base seed for every random stream; RTN_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build, fuse or describe a geometry.
    Geometry {
        #[command(subcommand)]
        action: GeometryCmd,
    },
    /// Exact rescaled Ising partition function, optionally with bounds.
    Partition {
        #[arg(long)]
        geometry: PathBuf,
        /// Also report elimination bounds.
        #[arg(long)]
        bounds: bool,
        #[arg(long, value_enum, default_value_t = Order::Natural)]
        order: Order,
        /// Use the boundary-field partition function instead.
        #[arg(long)]
        field: bool,
    },
    /// Inverse effective dimension report.
    Effdim {
        #[arg(long)]
        geometry: PathBuf,
        /// Require a closed form (tensor trains and single tensors).
        #[arg(long)]
        closed_form: bool,
    },
    /// Scaled inverse effective dimensions across geometries, as CSV.
    Hierarchy {
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Inclusive range `lo:hi`.
        #[arg(long, default_value = "2:10")]
        b_range: String,
        /// Comma-separated subset of rtt, square-disc, hyperbolic-patch,
        /// black-hole-center, single-tensor.
        #[arg(long)]
        geometries: Option<String>,
    },
    /// Monte-Carlo norm or overlap statistics of sampled network states.
    Mc {
        #[arg(long)]
        geometry: PathBuf,
        #[arg(long, value_enum, default_value_t = What::Norm)]
        what: What,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Tensors::Unitary)]
        tensors: Tensors,
        /// `zero` or `epr:i,j` (maximally entangled pair on legs i and j).
        #[arg(long, default_value = "zero")]
        reference: String,
    },
    /// Monte-Carlo check of Haar moments against the Weingarten evaluators.
    Moments {
        #[arg(long, value_enum, default_value_t = EnsembleArg::Cue)]
        ensemble: EnsembleArg,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Time evolution of a sampled network state on a qubit chain.
    Dynamics(DynamicsArgs),
    /// Minimal cut separating a set of boundary legs from the rest.
    Mincut {
        #[arg(long)]
        geometry: PathBuf,
        /// Comma-separated leg indices.
        #[arg(long)]
        region: String,
    },
}

#[derive(Subcommand, Debug)]
enum GeometryCmd {
    /// Random tensor train.
    Rtt {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        closed: bool,
        #[arg(long, default_value_t = 2)]
        a: u64,
        #[arg(long, default_value_t = 2)]
        b: u64,
        #[arg(long, default_value_t = 1)]
        d: u64,
    },
    /// One tensor with n legs.
    Single {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        a: u64,
        #[arg(long, default_value_t = 1)]
        d: u64,
    },
    /// Diamond cut of the square lattice with exactly n legs.
    SquareDisc {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = LegsArg::BoundaryVertex)]
        legs: LegsArg,
        #[arg(long, default_value_t = 2)]
        a: u64,
        #[arg(long, default_value_t = 2)]
        b: u64,
        #[arg(long, default_value_t = 1)]
        d: u64,
    },
    /// Patch of a {p,q} hyperbolic tiling.
    Hyperbolic {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        layers: usize,
        #[arg(long, value_enum, default_value_t = SeedArg::Vertex)]
        seed_kind: SeedArg,
        #[arg(long, value_enum, default_value_t = DualArg::Tile)]
        dual: DualArg,
        #[arg(long, default_value_t = 2)]
        a: u64,
        #[arg(long, default_value_t = 2)]
        b: u64,
        #[arg(long, default_value_t = 1)]
        d: u64,
    },
    /// Substitution-matrix layer counts.
    Inflation {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        layers: usize,
        #[arg(long, value_enum, default_value_t = SeedArg::Tile)]
        seed_kind: SeedArg,
    },
    /// Fuse two edge-connected vertices.
    Fuse {
        #[arg(long)]
        geometry: PathBuf,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        k: usize,
    },
    /// Counts and tensor dimensions.
    Info {
        #[arg(long)]
        geometry: PathBuf,
    },
}

#[derive(Args, Debug)]
struct DynamicsArgs {
    #[arg(long)]
    geometry: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelArg::IsingClosed)]
    hamiltonian: ModelArg,
    /// Pauli string with 1-based sites, e.g. `X:1` or `X:1*X:2`.
    #[arg(long, default_value = "X:1")]
    observable: String,
    #[arg(long, default_value_t = 1000.0)]
    t_max: f64,
    #[arg(long, default_value_t = 2000)]
    points: usize,
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,
    #[arg(long, default_value_t = 1.0)]
    field: f64,
    #[arg(long, default_value_t = 0.0)]
    disorder: f64,
    /// Summary JSON path when `--out` receives the series (default: stdout).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Order {
    Natural,
    MinDegree,
    MaxDegree,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum What {
    Norm,
    Overlap4,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Tensors {
    Unitary,
    Orthogonal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EnsembleArg {
    Cue,
    Coe,
    Cse,
    Orthogonal,
    Symplectic,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LegsArg {
    BoundaryVertex,
    CutBond,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SeedArg {
    Vertex,
    Tile,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DualArg {
    Tile,
    Vertex,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    IsingClosed,
    IsingOpen,
    DenseRandomHermitian,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<rtn_core::Error> for Failure {
    fn from(e: rtn_core::Error) -> Self {
        Failure { code: if e.is_resource_limit() { 3 } else { 2 }, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read_geometry(path: &Path) -> CliResult<Geometry> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok(Geometry::from_json(&text)?)
}

fn rational_json(x: &Rational) -> Value {
    Value::String(exact::display(x))
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| invalid(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| invalid(e.to_string())),
    }
}

fn emit_json(out: &Option<PathBuf>, v: &impl serde::Serialize) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| invalid(e.to_string()))?;
    s.push('\n');
    emit(out, s.as_bytes())
}

fn parse_b_range(s: &str) -> CliResult<std::ops::RangeInclusive<u64>> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| invalid(format!("b range '{s}' must be lo:hi")))?;
    let lo: u64 = lo.parse().map_err(|_| invalid(format!("bad lower end in '{s}'")))?;
    let hi: u64 = hi.parse().map_err(|_| invalid(format!("bad upper end in '{s}'")))?;
    if lo < 1 || hi < lo {
        return Err(invalid(format!("b range '{s}' must satisfy 1 <= lo <= hi")));
    }
    Ok(lo..=hi)
}

fn parse_reference(s: &str, g: &Geometry) -> CliResult<Reference> {
    if s == "zero" {
        return Ok(Reference::Zero);
    }
    let pair = s.strip_prefix("epr:").ok_or_else(|| invalid(format!("unknown reference '{s}'")))?;
    let (i, j) = pair.split_once(',').ok_or_else(|| invalid("epr reference must be epr:i,j"))?;
    let i: usize = i.trim().parse().map_err(|_| invalid("bad leg index in reference"))?;
    let j: usize = j.trim().parse().map_err(|_| invalid("bad leg index in reference"))?;
    Ok(Reference::epr_pair(g, i, j)?)
}

fn geometry_cmd(action: &GeometryCmd, out: &Option<PathBuf>) -> CliResult<()> {
    match *action {
        GeometryCmd::Rtt { n, closed, a, b, d } => emit_json(out, &build_rtt(n, closed, a, b, d)?),
        GeometryCmd::Single { n, a, d } => emit_json(out, &build_single_tensor(n, a, d)?),
        GeometryCmd::SquareDisc { n, legs, a, b, d } => {
            let legs = match legs {
                LegsArg::BoundaryVertex => DiscLegs::BoundaryVertex,
                LegsArg::CutBond => DiscLegs::CutBond,
            };
            emit_json(out, &build_square_disc(n, legs, a, b, d)?.geometry)
        }
        GeometryCmd::Hyperbolic { p, q, layers, seed_kind, dual, a, b, d } => {
            let spec = TilingSpec { p, q, layers, seed: seed_of(seed_kind) };
            let dual = match dual {
                DualArg::Tile => Dual::Tile,
                DualArg::Vertex => Dual::Vertex,
            };
            emit_json(out, &build_hyperbolic_patch(spec, dual, a, b, d)?.geometry)
        }
        GeometryCmd::Inflation { p, q, layers, seed_kind } => {
            let inf = inflation_counts(p, q, layers, seed_of(seed_kind))?;
            let layers: Vec<Value> =
                inf.layers.iter().map(|&(beta, gamma)| json!({"n_beta": beta, "n_gamma": gamma})).collect();
            emit_json(
                out,
                &json!({
                    "matrix": inf.matrix,
                    "layers": layers,
                    "dominant_eigenvalue": inf.dominant_eigenvalue,
                    "asymptotic_ratio": inf.asymptotic_ratio,
                }),
            )
        }
        GeometryCmd::Fuse { ref geometry, j, k } => {
            let g = read_geometry(geometry)?;
            emit_json(out, &fuse_vertices(&g, j, k)?.geometry)
        }
        GeometryCmd::Info { ref geometry } => {
            let g = read_geometry(geometry)?;
            let q: Vec<String> = (0..g.n_vertices()).map(|k| g.tensor_dimension(k).to_string()).collect();
            emit_json(
                out,
                &json!({
                    "n_vertices": g.n_vertices(),
                    "n_internal": g.n_internal(),
                    "n_legs": g.n_legs(),
                    "tensor_dimensions": q,
                    "boundary_dimension": g.boundary_dimension().to_string(),
                    "bulk_dimension": g.bulk_dimension().to_string(),
                }),
            )
        }
    }
}

fn seed_of(s: SeedArg) -> Seed {
    match s {
        SeedArg::Vertex => Seed::Vertex,
        SeedArg::Tile => Seed::Tile,
    }
}

fn run(cli: &Cli, seed: u64) -> CliResult<()> {
    let out = &cli.out;
    match &cli.command {
        Command::Geometry { action } => geometry_cmd(action, out),
        Command::Partition { geometry, bounds, order, field } => {
            let g = read_geometry(geometry)?;
            let z = if *field { partition_with_boundary_field(&g)? } else { partition_exact(&g)? };
            let (lower, upper) = if *bounds {
                let kind = match order {
                    Order::Natural => OrderKind::Natural,
                    Order::MinDegree => OrderKind::MinDegree,
                    Order::MaxDegree => OrderKind::MaxDegree,
                };
                let bp = bound_recursive(&g, &elimination_order(&g, kind))?;
                (rational_json(&bp.lower), rational_json(&bp.upper))
            } else {
                (Value::Null, Value::Null)
            };
            emit_json(
                out,
                &json!({
                    "exact_num": z.exact.numer().to_string(),
                    "exact_den": z.exact.denom().to_string(),
                    "log_value": z.log_value,
                    "lower": lower,
                    "upper": upper,
                }),
            )
        }
        Command::Effdim { geometry, closed_form } => {
            let g = read_geometry(geometry)?;
            let report = if *closed_form { inverse_effdim_closed_form(&g)? } else { inverse_effdim_bound(&g)? };
            emit_json(out, &report)
        }
        Command::Hierarchy { n, b_range, geometries } => {
            let range = parse_b_range(b_range)?;
            let kinds: Vec<HierarchyGeometry> = match geometries {
                None => HierarchyGeometry::ALL.to_vec(),
                Some(list) => list
                    .split(',')
                    .map(|s| HierarchyGeometry::parse(s.trim()))
                    .collect::<Result<_, _>>()?,
            };
            let rows = hierarchy_table(*n, range, &kinds)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["geometry", "b", "a", "n", "inv_deff_num", "inv_deff_den", "scaled_float"])
                .map_err(|e| invalid(e.to_string()))?;
            for r in &rows {
                let an = exact::pow(&exact::int(r.a), r.n as u64);
                let inv = &r.inv_deff_scaled / an;
                w.write_record([
                    r.geometry_name.clone(),
                    r.b.to_string(),
                    r.a.to_string(),
                    r.n.to_string(),
                    inv.numer().to_string(),
                    inv.denom().to_string(),
                    format!("{}", r.scaled_float),
                ])
                .map_err(|e| invalid(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
            emit(out, &bytes)
        }
        Command::Mc { geometry, what, samples, tensors, reference } => {
            let g = read_geometry(geometry)?;
            let kind = match tensors {
                Tensors::Unitary => TensorKind::Unitary,
                Tensors::Orthogonal => TensorKind::Orthogonal,
            };
            let unitary = matches!(kind, TensorKind::Unitary);
            let (stats, analytic) = match what {
                What::Norm => {
                    let s = mc_norm_stats(&g, kind, *samples, seed)?;
                    let ratio = if unitary { expected_norm_second_moment_ratio(&g).ok() } else { None };
                    let a = json!({
                        "expected_norm": rational_json(&expected_norm(&g)),
                        "expected_norm_float": exact::to_f64(&expected_norm(&g)),
                        "second_moment_ratio": ratio.as_ref().map(rational_json),
                        "second_moment_ratio_float": ratio.as_ref().map(exact::to_f64),
                    });
                    (s, a)
                }
                What::Overlap4 => {
                    let r = parse_reference(reference, &g)?;
                    let s = mc_overlap4(&g, kind, BulkState::Product, &r, *samples, seed)?;
                    let bound = inverse_effdim_bound(&g).ok().and_then(|rep| rep.inv_deff);
                    let a = json!({
                        "inv_deff_product": bound.as_ref().map(rational_json),
                        "inv_deff_product_float": bound.as_ref().map(exact::to_f64),
                    });
                    (s, a)
                }
            };
            emit_json(out, &json!({ "seed": seed, "stats": stats, "analytic": analytic }))
        }
        Command::Moments { ensemble, dim, samples } => {
            let e = match ensemble {
                EnsembleArg::Cue => Ensemble::Cue,
                EnsembleArg::Coe => Ensemble::Coe,
                EnsembleArg::Cse => Ensemble::Cse,
                EnsembleArg::Orthogonal => Ensemble::Orthogonal,
                EnsembleArg::Symplectic => Ensemble::Symplectic,
            };
            emit_json(out, &verify_moments(e, *dim, *samples, seed)?)
        }
        Command::Dynamics(args) => dynamics(args, out, seed),
        Command::Mincut { geometry, region } => {
            let g = read_geometry(geometry)?;
            let legs: Vec<usize> = region
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| invalid(format!("bad leg index '{s}'"))))
                .collect::<CliResult<_>>()?;
            let c = min_cut(&g, &legs)?;
            emit_json(out, &json!({ "cut_weight": c.cut_weight, "cut_edges": c.cut_edges, "cut_legs": c.cut_legs }))
        }
    }
}

fn dynamics(args: &DynamicsArgs, out: &Option<PathBuf>, seed: u64) -> CliResult<()> {
    let g = read_geometry(&args.geometry)?;
    let model = match args.hamiltonian {
        ModelArg::IsingClosed => Model::IsingClosed,
        ModelArg::IsingOpen => Model::IsingOpen,
        ModelArg::DenseRandomHermitian => Model::DenseRandomHermitian,
    };
    let spec = HamiltonianSpec {
        n_sites: g.n_legs(),
        model,
        coupling: args.coupling,
        field: args.field,
        disorder_eps: args.disorder,
        seed,
    };
    let grid = TimeGrid { t_max: args.t_max, points: args.points };
    let r = run_geometry(&g, &spec, &args.observable, grid, seed)?;
    let report = inverse_effdim_bound(&g)?;
    let bound = report.inv_deff.as_ref().unwrap_or(&report.upper);
    let summary = json!({
        "seed": seed,
        "time_avg": r.time_avg,
        "grid_mean": r.grid_mean,
        "time_std": r.time_std,
        "fluct_exact": r.fluct_exact,
        "inv_deff_state": r.inv_deff_state,
        "loschmidt_avg": r.loschmidt_avg,
        "inv_deff_bound": rational_json(bound),
        "sqrt_inv_deff_bound": exact::to_f64(bound).sqrt(),
        "degenerate_levels": r.degenerate_levels,
        "degenerate_gaps": r.degenerate_gaps,
        "fluct_is_approximate": r.fluct_is_approximate,
    });
    match out {
        Some(_) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t", "expval"]).map_err(|e| invalid(e.to_string()))?;
            for (t, x) in r.time_grid.iter().zip(&r.expvals) {
                w.write_record([t.to_string(), x.to_string()]).map_err(|e| invalid(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
            emit(out, &bytes)?;
            emit_json(&args.summary, &summary)
        }
        None => emit_json(&args.summary, &summary),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let seed = match std::env::var("RTN_SEED") {
        Ok(s) => match s.trim().parse() {
            Ok(v) => v,
            Err(_) => {
                eprintln!("error: RTN_SEED must be an unsigned integer");
                return ExitCode::from(2);
            }
        },
        Err(_) => cli.seed,
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli, seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
