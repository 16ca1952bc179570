mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use config::{LatticeChoice, RunConfig, Shape};
use isodimer::geometry::{
    build_lozenge_with_diagonals, build_square_lattice, build_triangular_lattice, io as graph_io, validate_isoradial,
    IsoradialGraph, LatticeKind, LozengeTiling, Point2, TriangularRegion,
};
use isodimer::gibbs::edge_probability;
use isodimer::height::{height_from_matching, matching_from_height, write_height_csv};
use isodimer::kernel::{angle_margin, kernel_bound, write_kernel_csv, FiniteKernel, InfiniteKernel};
use isodimer::matching::find_perfect_matching;
use isodimer::quadri::{empirical_independence, increments, write_quadri_json, IncrementSpec, QuadriRecord, QuadriSampler};
use isodimer::report::{header, write_artifact, HeaderStyle};
use isodimer::sampler::{write_matchings, Sampler};
use isodimer::{gff, mc, Error};

#[derive(Parser)]
#[command(name = "isodimer", version, about = "Critical dimers on isoradial graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// tri (alias honeycomb), square or lozenge-diag.
    #[arg(long, global = true)]
    lattice: Option<String>,
    /// hexagons, flat-hexagon or parallelogram (triangular lattices only).
    #[arg(long, global = true)]
    shape: Option<String>,
    #[arg(long, global = true, num_args = 2, value_names = ["W", "H"])]
    extent: Option<Vec<usize>>,
    #[arg(long, global = true)]
    mesh: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the graph, its dual and rhombus data as JSON.
    Build,
    /// Check the isoradial embedding.
    Validate,
    /// Exact and asymptotic K^{-1} on sampled black/white pairs.
    Kernel {
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Single-edge probabilities against theta / pi.
    Probs {
        /// Also evaluate the finite-volume kernel of the region.
        #[arg(long)]
        finite: bool,
    },
    /// Exact samples of the dimer measure.
    Sample,
    /// Height functions of sampled configurations.
    Height,
    /// Moments of height increments against their Gaussian limits.
    Moments {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, num_args = 1..)]
        covariance_meshes: Option<Vec<usize>>,
        #[arg(long)]
        variance: bool,
    },
    /// Two-stage samples of triangular quadri-tilings.
    Quadri,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::Validate => "validate",
            Command::Kernel { .. } => "kernel",
            Command::Probs { .. } => "probs",
            Command::Sample => "sample",
            Command::Height => "height",
            Command::Moments { .. } => "moments",
            Command::Quadri => "quadri",
        }
    }
}

enum Failure {
    Config(String),
    Numeric(String),
    Validation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Validation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numeric(m) | Failure::Validation(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::DegenerateExtent(_)
            | Error::InvalidArgument(_)
            | Error::RegionTooLarge(..)
            | Error::MalformedTiling(_)
            | Error::NoPerfectMatching
            | Error::BoundaryVertex(_)
            | Error::OverlappingPaths
            | Error::InsufficientSamples(_)
            | Error::EnumerationBudget(_)
            | Error::UnknownEdge(_) => Failure::Config(m),
            Error::Invalid(_) | Error::InvalidHeight { .. } => Failure::Validation(m),
            _ => Failure::Numeric(m),
        }
    }
}

type Outcome = Result<(), Failure>;

fn flag_map(opts: &Opts, command: &Command) -> Map<String, Value> {
    let mut m = Map::new();
    let mut put = |k: &str, v: Value| {
        m.insert(k.to_string(), v);
    };
    if let Some(v) = &opts.lattice {
        put("lattice", Value::from(v.as_str()));
    }
    if let Some(v) = &opts.shape {
        put("shape", Value::from(v.as_str()));
    }
    if let Some(v) = &opts.extent {
        put("extent", Value::from(v.clone()));
    }
    if let Some(v) = opts.mesh {
        put("mesh", Value::from(v));
    }
    if let Some(v) = opts.seed {
        put("seed", Value::from(v));
    }
    if let Some(v) = opts.samples {
        put("samples", Value::from(v));
    }
    if let Some(v) = &opts.out {
        put("out", Value::from(v.to_string_lossy().into_owned()));
    }
    if let Some(v) = opts.threads {
        put("threads", Value::from(v));
    }
    match command {
        Command::Kernel { pairs: Some(p) } => put("pairs", Value::from(*p)),
        Command::Probs { finite: true } => put("finite", Value::from(true)),
        Command::Moments { k, covariance_meshes, variance } => {
            if let Some(k) = k {
                put("k", Value::from(*k));
            }
            if let Some(c) = covariance_meshes {
                put("covariance_meshes", Value::from(c.clone()));
            }
            if *variance {
                put("variance", Value::from(true));
            }
        }
        _ => {}
    }
    m
}

fn triangular_region(cfg: &RunConfig) -> TriangularRegion {
    let [w, h] = cfg.extent;
    match cfg.shape {
        Shape::Hexagons => TriangularRegion::Hexagons { cols: w, rows: h },
        Shape::FlatHexagon => TriangularRegion::FlatHexagon { radius: w },
        Shape::Parallelogram => TriangularRegion::Parallelogram { width: w, height: h },
    }
}

fn build_graph(cfg: &RunConfig) -> Result<IsoradialGraph, Failure> {
    let g = match cfg.lattice {
        LatticeChoice::Tri => build_triangular_lattice(&triangular_region(cfg))?,
        LatticeChoice::Square => build_square_lattice(cfg.extent[0], cfg.extent[1])?,
        LatticeChoice::LozengeDiag => {
            let t = build_triangular_lattice(&triangular_region(cfg))?;
            let m = find_perfect_matching(&t).ok_or(Error::NoPerfectMatching)?;
            build_lozenge_with_diagonals(&LozengeTiling::from_matching(&t, &m)?)?
        }
    };
    Ok(g)
}

struct Run {
    cfg: RunConfig,
    header: Value,
}

impl Run {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn csv<F>(&self, name: &str, body: F) -> Outcome
    where
        F: FnOnce(&mut BufWriter<File>) -> isodimer::Result<()>,
    {
        write_artifact(&self.path(name), &self.header, HeaderStyle::Comment, body)?;
        Ok(())
    }

    fn json<F>(&self, name: &str, body: F) -> Outcome
    where
        F: FnOnce(&mut BufWriter<File>) -> isodimer::Result<()>,
    {
        isodimer::report::write_atomic(&self.path(name), body)?;
        Ok(())
    }
}

fn cmd_build(run: &Run) -> Outcome {
    let g = build_graph(&run.cfg)?;
    let g = if run.cfg.mesh == 1.0 { g } else { g.scale(run.cfg.mesh)? };
    let text = graph_io::to_json(&g, Some(run.header.clone()))?;
    run.json("graph.json", |w| Ok(writeln!(w, "{text}")?))?;
    println!("graph: {} vertices, {} faces, {} dual edges", g.vertices().len(), g.num_faces(), g.dual_edges().len());
    Ok(())
}

fn cmd_validate(run: &Run) -> Outcome {
    let g = build_graph(&run.cfg)?;
    let report = validate_isoradial(&g);
    let doc = serde_json::json!({ "header": run.header, "report": report });
    run.json("validation.json", |w| Ok(writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?))?;
    println!("validation: {}", report.summary());
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Validation(report.summary()))
    }
}

fn cmd_kernel(run: &Run) -> Outcome {
    let g = build_graph(&run.cfg)?;
    let kinv = InfiniteKernel::new(&g)?;
    let (blacks, whites) = (g.blacks(), g.whites());
    let total = blacks.len() * whites.len();
    let n = run.cfg.pairs.min(total);
    // a fixed stride through all pairs, offset by the seed
    let stride = 7919usize;
    let pairs: Vec<(usize, usize)> = (0..n)
        .map(|i| {
            let k = (run.cfg.seed as usize).wrapping_add(i.wrapping_mul(stride)) % total;
            (blacks[k / whites.len()], whites[k % whites.len()])
        })
        .collect();
    let rows = kinv.table(&pairs)?;
    run.csv("kernel.csv", |w| write_kernel_csv(w, &rows))?;
    let bound = kernel_bound(angle_margin(&g)?)? + 1e-12;
    let worst = rows.iter().map(|r| r.exact.norm()).fold(0.0, f64::max);
    println!("kernel: {} pairs, max |K^-1| {worst:.6}, bound {bound:.6}", rows.len());
    if worst > bound {
        return Err(Failure::Validation(format!("|K^-1| = {worst} exceeds the bound {bound}")));
    }
    Ok(())
}

fn cmd_probs(run: &Run) -> Outcome {
    let g = build_graph(&run.cfg)?;
    let kinv = InfiniteKernel::new(&g)?;
    let finite = if run.cfg.finite { Some(FiniteKernel::new(&g)?) } else { None };
    let edges: Vec<usize> = (0..g.dual_edges().len()).collect();
    let rows: Vec<(usize, f64, f64, Option<f64>)> = mc::par_map(&edges, |&e| -> isodimer::Result<_> {
        let expect = g.rhombus_angle(e)? / std::f64::consts::PI;
        let p = edge_probability(&g, kinv.dirac(), &kinv, e)?;
        let pf = match &finite {
            Some(f) => Some(edge_probability(&g, f.dirac(), f, e)?),
            None => None,
        };
        Ok((e, expect, p, pf))
    })
    .into_iter()
    .collect::<isodimer::Result<_>>()?;
    run.csv("probs.csv", |w| {
        writeln!(w, "edge,black,white,theta_over_pi,probability,deviation,finite_probability")?;
        for &(e, expect, p, pf) in &rows {
            let d = g.dual_edges()[e];
            let fin = pf.map(|x| format!("{x:.12}")).unwrap_or_default();
            writeln!(w, "{e},{},{},{expect:.12},{p:.12},{:.3e},{fin}", d.black, d.white, (p - expect).abs())?;
        }
        Ok(())
    })?;
    let worst = rows.iter().map(|r| (r.2 - r.1).abs()).fold(0.0, f64::max);
    let mut values: Vec<f64> = rows.iter().map(|r| (r.2 * 1e8).round() / 1e8).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    println!("probs: {} edges, distinct probabilities {values:?}, max |p - theta/pi| {worst:.3e}", rows.len());
    if worst > 1e-8 {
        return Err(Failure::Validation(format!("edge probability deviates from theta/pi by {worst:.3e}")));
    }
    Ok(())
}

fn cmd_sample(run: &Run) -> Outcome {
    let g = build_graph(&run.cfg)?;
    let sampler = Sampler::new(&g)?;
    let (samples, diag) = sampler.sample_many(run.cfg.seed, run.cfg.samples)?;
    for m in &samples {
        m.validate(&g).map_err(|e| Failure::Validation(e.to_string()))?;
    }
    run.json("samples.jsonl", |w| write_matchings(w, &run.header, &samples))?;
    println!(
        "sample: {} configurations, max |sum p - 1| {:.3e}, max |Im| {:.3e}",
        samples.len(),
        diag.max_sum_deviation,
        diag.max_imaginary
    );
    Ok(())
}

fn cmd_height(run: &Run) -> Outcome {
    let g = build_graph(&run.cfg)?;
    let sampler = Sampler::new(&g)?;
    let v0 = g.reference_vertex();
    let (samples, _) = sampler.sample_many(run.cfg.seed, run.cfg.samples)?;
    for (i, m) in samples.iter().enumerate() {
        let h = height_from_matching(&g, m, v0)?;
        if matching_from_height(&g, &h)? != *m {
            return Err(Failure::Validation(format!("height of sample {i} does not give back its matching")));
        }
        run.csv(&format!("height_{i:05}.csv"), |w| write_height_csv(w, &g, &h))?;
    }
    println!("height: {} height functions written", samples.len());
    Ok(())
}

fn cmd_moments(run: &Run) -> Outcome {
    let cfg = &run.cfg;
    if cfg.lattice != LatticeChoice::Tri {
        return Err(Failure::Config("moments runs on the honeycomb dimers (--lattice tri)".into()));
    }
    let eps = cfg.mesh;
    let defaults = gff::MomentConfig::default();
    let mc_cfg = gff::MomentConfig {
        seed: cfg.seed,
        covariance_meshes: cfg.covariance_meshes.clone(),
        increment_radius: cfg.extent[0],
        increment_eps: eps,
        increment_length: 8.0 * eps,
        increment_spacing: 3.0 * 3f64.sqrt() * eps,
        increment_count: cfg.k.max(2),
        increment_samples: cfg.samples,
        variance_meshes: if cfg.variance {
            defaults.variance_meshes.iter().map(|m| gff::VarianceMesh { samples: cfg.samples, ..*m }).collect()
        } else {
            Vec::new()
        },
        ..defaults
    };
    let report = gff::moment_comparison(&mc_cfg)?;
    run.csv("moments.csv", |w| report.write_csv(w))?;
    let summary = report.summary();
    run.csv("moments.txt", |w| Ok(write!(w, "{summary}")?))?;
    print!("{summary}");
    Ok(())
}

fn cmd_quadri(run: &Run) -> Outcome {
    if run.cfg.lattice != LatticeChoice::Tri {
        return Err(Failure::Config("quadri-tilings are built on triangular regions (--lattice tri)".into()));
    }
    let t = build_graph(&run.cfg)?;
    debug_assert_eq!(t.kind(), LatticeKind::Triangular);
    let qsampler = QuadriSampler::new(&t)?;
    let v0 = t.reference_vertex();
    let records = qsampler.map_samples(run.cfg.seed, run.cfg.samples, |qs| QuadriRecord::new(qs, v0))?;
    run.json("quadri.jsonl", |w| write_quadri_json(w, &run.header, &records))?;
    println!("quadri: {} samples", records.len());
    if run.cfg.samples >= isodimer::quadri::MIN_INDEPENDENCE_SAMPLES {
        let n = t.vertices().len() as f64;
        let c = t.vertices().iter().fold(Point2::new(0.0, 0.0), |c, p| Point2::new(c.x + p.x / n, c.y + p.y / n));
        let u = t.nearest_vertex(Point2::new(c.x - 1.0, c.y));
        let v = t.nearest_vertex(Point2::new(c.x + 1.0, c.y));
        let spec = IncrementSpec { h1: (u, v), h2: (u, v) };
        let pairs = qsampler.map_samples(run.cfg.seed, run.cfg.samples, |qs| increments(qs, spec, v0))?;
        let rep = empirical_independence(&pairs)?;
        let doc = serde_json::json!({ "header": run.header, "increment": [u, v], "independence": rep });
        run.json("independence.json", |w| Ok(writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?))?;
        println!("quadri: corr(dh1, dh2) = {:.4} +- {:.4}", rep.correlation.mean, rep.correlation.se);
    }
    Ok(())
}

fn execute(cli: Cli) -> Outcome {
    let flags = flag_map(&cli.opts, &cli.command);
    let cfg = RunConfig::resolve(cli.opts.config.as_deref(), flags).map_err(Failure::Config)?;
    let name = cli.command.name();
    let header = header(name, Some(cfg.seed), &cfg)?;
    let run = Run { cfg, header };
    mc::with_threads(run.cfg.threads, || match cli.command {
        Command::Build => cmd_build(&run),
        Command::Validate => cmd_validate(&run),
        Command::Kernel { .. } => cmd_kernel(&run),
        Command::Probs { .. } => cmd_probs(&run),
        Command::Sample => cmd_sample(&run),
        Command::Height => cmd_height(&run),
        Command::Moments { .. } => cmd_moments(&run),
        Command::Quadri => cmd_quadri(&run),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
