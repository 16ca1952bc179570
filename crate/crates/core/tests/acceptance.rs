//! Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
//! arguments to run a subset, e.g. `cargo test --test acceptance -- 1 8`.
//! Failing criteria are reported but only fail the process under `--strict`,
//! so the remaining test binaries of the workspace still run.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use isodimer::geometry::{
    build_lozenge_with_diagonals, build_square_lattice, build_triangular_lattice, IsoradialGraph, LozengeTiling, Point2,
    TriangularRegion,
};
use isodimer::gff::{
    cauchy_zero_diag_det, covariance_trend, dirichlet_energy, dirichlet_energy_gradient, functional_variance,
    increment_moments, pairing_sum, stacked_increments, EnergyOptions, MomentConfig,
    Placement, TestFunction, VarianceRow,
};
use isodimer::gibbs::{brute_force_subregion, edge_probability, local_statistic};
use isodimer::height::{
    height_from_matching, height_increment_representation, height_mean_along, lattice_paths, matching_from_height,
    random_walk_path, IncrementRepresentation,
};
use isodimer::kernel::{angle_margin, kernel_bound, FiniteKernel, InfiniteKernel};
use isodimer::matching::{find_perfect_matching, DimerConfiguration};
use isodimer::mc::{batch_means, correlation_estimate, with_threads};
use isodimer::quadri::{increments, IncrementSpec, QuadriSampler};
use isodimer::sampler::{write_matchings, RngStream, Sampler};
use isodimer::Result;
use rand::Rng;

type Verdict = Result<(bool, String)>;

fn honeycomb(cols: usize, rows: usize) -> IsoradialGraph {
    build_triangular_lattice(&TriangularRegion::Hexagons { cols, rows }).unwrap()
}

fn lozenge_diag(t: &IsoradialGraph, m: &DimerConfiguration) -> IsoradialGraph {
    build_lozenge_with_diagonals(&LozengeTiling::from_matching(t, m).unwrap()).unwrap()
}

fn sampled_lozenge_diag(cols: usize, rows: usize, seed: u64) -> IsoradialGraph {
    let t = honeycomb(cols, rows);
    let m = Sampler::new(&t).unwrap().sample(&mut RngStream::new(seed, 0)).unwrap();
    lozenge_diag(&t, &m)
}

fn stride_pairs(g: &IsoradialGraph, n: usize, seed: usize) -> Vec<(usize, usize)> {
    let (blacks, whites) = (g.blacks(), g.whites());
    let total = blacks.len() * whites.len();
    (0..n.min(total))
        .map(|i| {
            let k = (seed + i * 7919) % total;
            (blacks[k / whites.len()], whites[k % whites.len()])
        })
        .collect()
}

fn c1_edge_probabilities() -> Verdict {
    let t0 = Instant::now();
    let t = honeycomb(4, 3);
    let lstar = lozenge_diag(&t, &find_perfect_matching(&t).unwrap());
    let cases = [("honeycomb", honeycomb(4, 3), 1.0 / 3.0), ("square", build_square_lattice(4, 4)?, 0.25), ("L*", lstar, 0.5)];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, g, special) in &cases {
        let k = InfiniteKernel::new(g)?;
        let mut worst: f64 = 0.0;
        let mut hit = false;
        for e in 0..g.dual_edges().len() {
            let theta = g.rhombus_angle(e)?;
            let p = edge_probability(g, k.dirac(), &k, e)?;
            worst = worst.max((p - theta / PI).abs());
            hit |= (p - special).abs() <= 1e-8;
        }
        ok &= worst <= 1e-8 && hit;
        notes.push(format!("{name} max|p-theta/pi| {worst:.1e}"));
    }
    let secs = t0.elapsed().as_secs_f64();
    ok &= secs < 5.0;
    Ok((ok, format!("{} in {secs:.2}s", notes.join(", "))))
}

fn c2_kernel_bound() -> Verdict {
    let t = honeycomb(4, 3);
    let lstar = lozenge_diag(&t, &find_perfect_matching(&t).unwrap());
    let cases = [("honeycomb", honeycomb(6, 5)), ("square", build_square_lattice(10, 10)?), ("L*", lstar)];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, g) in &cases {
        let k = InfiniteKernel::new(g)?;
        let pairs = stride_pairs(g, 1200, 17);
        let rows = k.table(&pairs)?;
        let bound = kernel_bound(angle_margin(g)?)?;
        let worst = rows.iter().map(|r| r.exact.norm()).fold(0.0, f64::max);
        ok &= rows.len() >= 1000 && worst <= bound + 1e-12;
        notes.push(format!("{name} {} pairs max {worst:.4} <= {bound:.4}", rows.len()));
    }
    Ok((ok, notes.join(", ")))
}

/// Least-squares slope of `log err` against `log d` for the largest error in
/// each of a set of log-spaced distance bins.
fn envelope_slope(rows: &[(f64, f64)], lo: f64, hi: f64, bins: usize) -> f64 {
    let mut top = vec![0.0f64; bins];
    let width = (hi / lo).ln() / bins as f64;
    for &(d, e) in rows {
        if d >= lo && d <= hi {
            let k = (((d / lo).ln() / width) as usize).min(bins - 1);
            top[k] = top[k].max(e);
        }
    }
    let pts: Vec<(f64, f64)> = top
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > 0.0)
        .map(|(k, e)| ((lo.ln() + (k as f64 + 0.5) * width), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn c3_asymptotic_order() -> Verdict {
    let cases = [
        ("honeycomb", build_triangular_lattice(&TriangularRegion::Parallelogram { width: 34, height: 6 })?),
        ("square", build_square_lattice(40, 4)?),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, g) in &cases {
        let k = InfiniteKernel::new(g)?;
        let whites = g.whites();
        // distances in units of the rhombus side
        let unit = g.radius() * g.mesh();
        let w0 = *whites.iter().min_by(|a, b| g.face(**a).center.x.total_cmp(&g.face(**b).center.x)).unwrap();
        let mut pairs = Vec::new();
        for &w in whites.iter().filter(|&&w| g.face(w).center.dist(g.face(w0).center) < 3.0 * unit) {
            for b in g.blacks() {
                let d = g.face(b).center.dist(g.face(w).center) / unit;
                if (5.0..=50.0).contains(&d) {
                    pairs.push((b, w));
                }
            }
        }
        let rows: Vec<(f64, f64)> = k.table(&pairs)?.iter().map(|r| (r.distance, r.abs_err)).collect();
        let dmax = rows.iter().map(|r| r.0).fold(0.0, f64::max);
        let slope = envelope_slope(&rows, 5.0, 50.0_f64.min(dmax), 10);
        ok &= slope <= -1.7;
        notes.push(format!("{name} slope {slope:.2} ({} pairs, d up to {dmax:.1})", rows.len()));
    }
    Ok((ok, notes.join(", ")))
}

fn c4_oracle() -> Verdict {
    let t = honeycomb(2, 1);
    let mut regions = vec![
        ("hex 1x1", honeycomb(1, 1)),
        ("hex 2x1", honeycomb(2, 1)),
        ("hex 2x2", honeycomb(2, 2)),
        ("hex 3x2", honeycomb(3, 2)),
        ("square 2x2", build_square_lattice(2, 2)?),
        ("square 4x2", build_square_lattice(4, 2)?),
        ("square 4x4", build_square_lattice(4, 4)?),
        ("L* 1x1", sampled_lozenge_diag(1, 1, 3)),
    ];
    regions.push(("L* 2x1", lozenge_diag(&t, &find_perfect_matching(&t).unwrap())));
    let mut worst: f64 = 0.0;
    let mut events = 0;
    let mut used = Vec::new();
    for (name, g) in &regions {
        let all: Vec<usize> = (0..g.num_faces()).collect();
        let Ok(table) = brute_force_subregion(g, &all, 1000) else { continue };
        let k = FiniteKernel::new(g)?;
        let ne = g.dual_edges().len();
        for e in 0..ne {
            let p = local_statistic(g, k.dirac(), &k, &[e])?.value;
            worst = worst.max((p - table.cylinder(&[e])).abs());
            events += 1;
            for f in (e + 1..ne).step_by(3) {
                let p = local_statistic(g, k.dirac(), &k, &[e, f])?.value;
                worst = worst.max((p - table.cylinder(&[e, f])).abs());
                events += 1;
            }
        }
        used.push(format!("{name} ({})", table.len()));
    }
    Ok((worst <= 1e-8 && used.len() == regions.len(), format!("{events} events on {}: max error {worst:.1e}", used.join(", "))))
}

fn frequency_check(g: &IsoradialGraph, n: usize, seed: u64) -> Result<(bool, f64)> {
    let all: Vec<usize> = (0..g.num_faces()).collect();
    let table = brute_force_subregion(g, &all, 1000)?;
    let (samples, _) = Sampler::new(g)?.sample_many(seed, n)?;
    let mut freq: HashMap<&DimerConfiguration, usize> = HashMap::new();
    for s in &samples {
        *freq.entry(s).or_insert(0) += 1;
    }
    let mut ok = freq.len() <= table.len();
    let mut zmax: f64 = 0.0;
    for (m, p) in table.matchings.iter().zip(&table.probabilities) {
        let f = *freq.get(m).unwrap_or(&0) as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let z = (f - p).abs() / se;
        zmax = zmax.max(z);
        ok &= z <= 3.0;
    }
    Ok((ok, zmax))
}

fn c5_sampler() -> Verdict {
    let n = 100_000;
    let (ok_h, z_h) = frequency_check(&honeycomb(1, 1), n, 5)?;
    let (ok_s, z_s) = frequency_check(&build_square_lattice(2, 2)?, n, 6)?;
    let g = honeycomb(3, 3);
    let sampler = Sampler::new(&g)?;
    let bytes = |threads: usize| -> Result<Vec<u8>> {
        let (s, _) = with_threads(threads, || sampler.sample_many(42, 200))?;
        let mut buf = Vec::new();
        write_matchings(&mut buf, &serde_json::json!({"seed": 42}), &s)?;
        Ok(buf)
    };
    let (a, b, c) = (bytes(0)?, bytes(0)?, bytes(1)?);
    let same = a == b && a == c;
    Ok((
        ok_h && ok_s && same,
        format!("max |z| hexagon {z_h:.2}, 2x2 {z_s:.2} at N={n}; replay identical: {same}"),
    ))
}

fn c6_height_bijection() -> Verdict {
    let cases = [
        ("honeycomb", honeycomb(4, 3)),
        ("square", build_square_lattice(6, 6)?),
        ("L*", sampled_lozenge_diag(3, 2, 8)),
    ];
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for (name, g) in &cases {
        let sampler = Sampler::new(g)?;
        let v0 = g.reference_vertex();
        let (samples, _) = sampler.sample_many(60, 100)?;
        let mut trips = 0;
        for m in &samples {
            let h = height_from_matching(g, m, v0)?;
            if matching_from_height(g, &h)? == *m {
                trips += 1;
            }
        }
        let mut rng = RngStream::new(61, 0);
        for m in samples.iter().take(100) {
            let h = height_from_matching(g, m, v0)?;
            let u = rng.random_range(0..g.vertices().len());
            let steps = rng.random_range(1..60);
            let path = random_walk_path(g, u, steps, &mut rng);
            let rep = height_increment_representation(g, &path)?;
            let v = *path.last().unwrap();
            worst = worst.max((rep.evaluate(&m.indicator(g)) - h.increment(u, v)).abs());
        }
        ok &= trips == samples.len();
        notes.push(format!("{name} {trips}/100"));
    }
    ok &= worst <= 1e-12;
    Ok((ok, format!("round trips {}; representation max error {worst:.1e} on 300 paths", notes.join(", "))))
}

/// One set of samples on the flat hexagon serves the mean-zero and Wick checks.
struct Shared {
    increments: Vec<Vec<f64>>,
    endpoints: Vec<(Point2, Point2)>,
    pair_values: Vec<Vec<f64>>,
    pairs: Vec<(usize, usize, f64)>,
    exact_means: Vec<f64>,
    secs: f64,
}

const SHARED_SAMPLES: usize = 20_000;
const MEAN_SAMPLES: usize = 10_000;

fn shared() -> &'static Result<Shared> {
    static CELL: OnceLock<Result<Shared>> = OnceLock::new();
    CELL.get_or_init(|| {
        let t0 = Instant::now();
        let cfg = MomentConfig::default();
        let g = build_triangular_lattice(&TriangularRegion::FlatHexagon { radius: cfg.increment_radius })?;
        let placement = Placement { origin: Point2::new(0.0, 0.0), eps: cfg.increment_eps };
        let probes =
            stacked_increments(&g, placement, cfg.increment_length, cfg.increment_spacing, cfg.increment_count)?;
        // ten vertex pairs within a third of the radius of the centre
        let reach = cfg.increment_radius as f64 / 3.0;
        let central: Vec<usize> = (0..g.vertices().len()).filter(|&v| g.vertex(v).dist(Point2::new(0.0, 0.0)) <= reach).collect();
        let mut rng = RngStream::new(7, 0);
        let mut pairs = Vec::new();
        let mut reps: Vec<IncrementRepresentation> = Vec::new();
        while pairs.len() < 10 {
            let (u, v) = (central[rng.random_range(0..central.len())], central[rng.random_range(0..central.len())]);
            if u == v {
                continue;
            }
            reps.push(height_increment_representation(&g, &lattice_paths(&g, u, v)?[0])?);
            pairs.push((u, v, g.vertex(u).dist(g.vertex(v))));
        }
        let kinv = FiniteKernel::new(&g)?;
        let exact_means = reps.iter().map(|r| height_mean_along(&g, kinv.dirac(), &kinv, r)).collect::<Result<_>>()?;
        let sampler = Sampler::new(&g)?;
        let (rows, _) = sampler.map_samples(cfg.seed, SHARED_SAMPLES, |m| {
            let ind = m.indicator(&g);
            Ok((probes.iter().map(|p| p.value(&ind)).collect::<Vec<f64>>(), reps.iter().map(|r| r.evaluate(&ind)).collect::<Vec<f64>>()))
        })?;
        let (increments, pair_values) = rows.into_iter().unzip();
        Ok(Shared {
            increments,
            endpoints: probes.iter().map(|p| p.endpoints).collect(),
            pair_values,
            pairs,
            exact_means,
            secs: t0.elapsed().as_secs_f64(),
        })
    })
}

fn c7_mean_zero() -> Verdict {
    let s = shared().as_ref().map_err(|e| isodimer::Error::InvalidArgument(format!("shared samples: {e}")))?;
    let mut ok = true;
    let mut zs = Vec::new();
    let (mut worst_exact, mut worst_bias) = (0.0f64, 0.0f64);
    for k in 0..s.pairs.len() {
        let xs: Vec<f64> = s.pair_values[..MEAN_SAMPLES].iter().map(|r| r[k]).collect();
        let est = batch_means(&xs, 20)?;
        let z = est.z_score(0.0);
        ok &= z.abs() <= 3.0;
        zs.push(format!("{z:+.2}"));
        // the same sample against the exact mean on this finite region
        worst_exact = worst_exact.max(est.z_score(s.exact_means[k]).abs());
        worst_bias = worst_bias.max(s.exact_means[k].abs() / est.se);
    }
    Ok((
        ok,
        format!(
            "z = [{}] at N={MEAN_SAMPLES}; against exact finite-volume means max |z| {worst_exact:.2}; \
             finite-volume mean up to {worst_bias:.2} SE (pairs up to {:.1} apart)",
            zs.join(", "),
            s.pairs.iter().map(|p| p.2).fold(0.0, f64::max)
        ),
    ))
}

fn c8_covariance() -> Verdict {
    let t0 = Instant::now();
    let rows = covariance_trend(&[8, 16, 32, 64])?;
    let secs = t0.elapsed().as_secs_f64();
    let decreasing = rows.windows(2).all(|w| w[1].abs_error < w[0].abs_error);
    let last = rows.last().unwrap();
    let errs: Vec<String> = rows.iter().map(|r| format!("1/{} {:+.2e}", r.n, r.rel_error)).collect();
    Ok((
        decreasing && last.rel_error.abs() <= 0.05 && secs <= 600.0,
        format!("rel errors {} (target {:.5}) in {secs:.1}s", errs.join(", "), last.target),
    ))
}

fn c9_wick() -> Verdict {
    let s = shared().as_ref().map_err(|e| isodimer::Error::InvalidArgument(format!("shared samples: {e}")))?;
    let rows = increment_moments(&s.increments, &s.endpoints, 20)?;
    let k3 = rows.iter().find(|r| r.k == 3).unwrap();
    let k4 = rows.iter().find(|r| r.k == 4).unwrap();
    let ok = k3.target == 0.0 && k3.z.abs() <= 3.0 && k4.z.abs() <= 3.0;
    Ok((
        ok,
        format!(
            "k=3 {:.5} +- {:.5} (z {:+.2}); k=4 {:.5} +- {:.5} vs {:.5} (z {:+.2}); eps 1/32, N={SHARED_SAMPLES}, {:.0}s",
            k3.estimate.mean, k3.estimate.se, k3.z, k4.estimate.mean, k4.estimate.se, k4.target, k4.z, s.secs
        ),
    ))
}

fn c10_cauchy() -> Verdict {
    let mut rng = RngStream::new(10, 0);
    let mut worst_even: f64 = 0.0;
    let mut worst_odd: f64 = 0.0;
    let mut worst_scaled: f64 = 0.0;
    for k in [2, 4, 6] {
        for _ in 0..20 {
            let xs: Vec<num_complex::Complex64> =
                (0..k).map(|_| num_complex::Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
            let (d, s) = (cauchy_zero_diag_det(&xs)?, pairing_sum(&xs)?);
            worst_even = worst_even.max((d - s).norm() / s.norm());
        }
    }
    for k in [1, 3, 5, 7] {
        for _ in 0..20 {
            let xs: Vec<num_complex::Complex64> =
                (0..k).map(|_| num_complex::Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
            let det = cauchy_zero_diag_det(&xs)?.norm();
            worst_odd = worst_odd.max(det);
            // the product of the largest entry in each row bounds |det| up to k!
            let rows: f64 = (0..k)
                .map(|i| (0..k).filter(|&j| j != i).map(|j| (xs[i] - xs[j]).norm().recip()).fold(0.0, f64::max))
                .product();
            worst_scaled = worst_scaled.max(if k == 1 { det } else { det / rows });
        }
    }
    Ok((
        worst_even <= 1e-9 && worst_odd <= 1e-12,
        format!(
            "even k max rel error {worst_even:.1e}, odd k max |det| {worst_odd:.1e} ({worst_scaled:.1e} relative to row scale); points in [-2,2]^2"
        ),
    ))
}

fn c11_functional_variance() -> Verdict {
    let cfg = MomentConfig::default();
    let phi = TestFunction::standard();
    let rows: Vec<VarianceRow> = cfg
        .variance_meshes
        .iter()
        .enumerate()
        .map(|(i, m)| functional_variance(&phi, m.eps, m.radius, cfg.seed + 1 + i as u64, m.samples, 20, true))
        .collect::<Result<_>>()?;
    let last = rows.last().unwrap();
    let trend = rows.windows(2).all(|w| w[1].rel_error.abs() < w[0].rel_error.abs());
    let notes: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "eps {:.2} (region radius {:.1}, N={}) {:.4} +- {:.4} rel {:+.3}, finite-volume exact {:.4}",
                r.eps,
                r.continuum_radius,
                r.estimate.n,
                r.estimate.mean,
                r.estimate.se,
                r.rel_error,
                r.exact_finite.unwrap_or(f64::NAN)
            )
        })
        .collect();
    Ok((last.rel_error.abs() <= 0.15 && trend, format!("target {:.5}; {}", last.target, notes.join("; "))))
}

fn c12_quadri() -> Verdict {
    let t = honeycomb(12, 8);
    let qs = QuadriSampler::new(&t)?;
    let v0 = t.reference_vertex();
    let n = t.vertices().len() as f64;
    let c = t.vertices().iter().fold(Point2::new(0.0, 0.0), |c, p| Point2::new(c.x + p.x / n, c.y + p.y / n));
    // both heights read across the same central segment
    let (u, v) = (t.nearest_vertex(Point2::new(c.x - 3.0, c.y)), t.nearest_vertex(Point2::new(c.x + 3.0, c.y)));
    let spec = IncrementSpec { h1: (u, v), h2: (u, v) };
    let pairs = qs.map_samples(12, 10_000, |q| increments(q, spec, v0))?;
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let corr = correlation_estimate(&x, &y, 20)?;
    let corr_ok = corr.mean.abs() <= 3.0 * corr.se;

    // stage 2 on one hexagon: conditional frequencies given the lozenge tiling
    let hex = honeycomb(1, 1);
    let all: Vec<usize> = (0..hex.num_faces()).collect();
    let stage1 = brute_force_subregion(&hex, &all, 1000)?;
    let qh = QuadriSampler::new(&hex)?;
    let n2 = 20_000;
    let draws = qh.map_samples(13, n2, |q| Ok((q.lozenge_matching.clone(), q.matching.clone())))?;
    let mut zmax: f64 = 0.0;
    let mut cells = 0;
    for m in &stage1.matchings {
        let l = lozenge_diag(&hex, m);
        let lall: Vec<usize> = (0..l.num_faces()).collect();
        let stage2 = brute_force_subregion(&l, &lall, 1000)?;
        let given: Vec<&DimerConfiguration> = draws.iter().filter(|d| &d.0 == m).map(|d| &d.1).collect();
        let nm = given.len() as f64;
        for (q, p) in stage2.matchings.iter().zip(&stage2.probabilities) {
            let f = given.iter().filter(|g| **g == q).count() as f64 / nm;
            zmax = zmax.max((f - p).abs() / (p * (1.0 - p) / nm).sqrt());
            cells += 1;
        }
    }
    Ok((
        corr_ok && zmax <= 3.0,
        format!(
            "corr(dh1, dh2) {:+.4} +- {:.4} at N=10000; stage-2 max |z| {zmax:.2} over {cells} conditional cells",
            corr.mean, corr.se
        ),
    ))
}

fn c13_dirichlet() -> Verdict {
    let phi = TestFunction::standard();
    let a = dirichlet_energy(&phi, &phi)?;
    let b = dirichlet_energy_gradient(&phi, &phi, EnergyOptions::default())?;
    let rel = ((a - b) / a).abs();
    Ok((rel <= 1e-3, format!("double integral {a:.8}, gradient form {b:.8}, rel {rel:.1e}")))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 13] = [
        ("edge probabilities", c1_edge_probabilities),
        ("kernel bound", c2_kernel_bound),
        ("asymptotic order", c3_asymptotic_order),
        ("oracle equivalence", c4_oracle),
        ("sampler exactness", c5_sampler),
        ("height bijection", c6_height_bijection),
        ("mean-zero heights", c7_mean_zero),
        ("covariance trend", c8_covariance),
        ("Wick structure", c9_wick),
        ("Cauchy determinant", c10_cauchy),
        ("functional variance", c11_functional_variance),
        ("quadri independence", c12_quadri),
        ("Dirichlet energy", c13_dirichlet),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let strict = std::env::args().any(|a| a == "--strict");
    let (mut ran, mut failed) = (0, 0);
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let t0 = Instant::now();
        let (ok, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        ran += 1;
        failed += usize::from(!ok);
        println!(
            "{} criterion {n:>2} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
