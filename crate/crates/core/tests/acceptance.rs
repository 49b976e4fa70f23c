//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nearfield_ma::analog::{
    grad_min_snr_apv, grad_min_snr_phase, init_phases, min_snr, min_snr_upper_bound,
    optimal_power_allocation, optimize_analog, snr_per_user,
};
use nearfield_ma::arrays::{init_subregion_grid, subarray_offsets, RegionSpec};
use nearfield_ma::channel::{
    channel_matrix, element_positions, ArrayGeometry, Point2, Position3, UserChannel,
};
use nearfield_ma::closedform::{
    check_analog_condition, check_digital_condition, construct_analog_apv, construct_digital_apv,
};
use nearfield_ma::digital::{
    grad_min_sinr_apv, min_sinr_upper_bound, optimize_digital, sinr_from_channel, zf_min_sinr,
    zf_min_sinr_from_channel, zf_precoder,
};
use nearfield_ma::harness::experiment::trial_users;
use nearfield_ma::harness::{
    beam_pattern, compare_schemes, focused_weights, parse_config, run_experiment, write_results,
    Architecture, BeamGridSpec, Scheme,
};
use nearfield_ma::search::{OptimizerConfig, Termination};
use nearfield_ma::units::to_db;
use nearfield_ma::{Complex64, Link};

const LAMBDA: f64 = 0.01;

fn desk_link() -> Link {
    // 20 dBm transmit power, -80 dBm noise
    Link::new(LAMBDA, 100.0, 1e-8).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn los_user(p: Position3, phase: f64) -> UserChannel {
    UserChannel::single_path(p, Complex64::from_polar(LAMBDA / (4.0 * PI * p.norm()), phase)).unwrap()
}

fn random_user(rng: &mut ChaCha8Rng, nlos: usize) -> UserChannel {
    let r = rng.random_range(5.0..50.0);
    let theta = rng.random_range(0.0..PI);
    let los = Position3::new(r * theta.cos(), -15.0, r * theta.sin());
    let amp = LAMBDA / (4.0 * PI * los.norm());
    let mut anchors = vec![los];
    let mut prv = vec![Complex64::from_polar(amp, rng.random_range(0.0..2.0 * PI))];
    for _ in 0..nlos {
        anchors.push(Position3::new(
            rng.random_range(-20.0..20.0),
            rng.random_range(-15.0..0.0),
            rng.random_range(2.0..40.0),
        ));
        prv.push(Complex64::from_polar(0.1 * amp, rng.random_range(0.0..2.0 * PI)));
    }
    UserChannel::new(anchors, prv).unwrap()
}

fn random_geometry(rng: &mut ChaCha8Rng, m: usize, nx: usize, ny: usize) -> ArrayGeometry {
    let region = RegionSpec::new(100.0 * LAMBDA, 0.0).unwrap();
    let h = region.half() * 0.95;
    let centers = (0..m).map(|_| Point2::new(rng.random_range(-h..h), rng.random_range(-h..h))).collect();
    ArrayGeometry::new(centers, subarray_offsets(nx, ny, LAMBDA), region).unwrap()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    diff / b.iter().map(|y| y * y).sum::<f64>().sqrt()
}

fn central_difference(x: &[f64], step: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let (mut p, mut m) = (x.to_vec(), x.to_vec());
            p[i] += step;
            m[i] -= step;
            (f(&p) - f(&m)) / (2.0 * step)
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let link = desk_link();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = [0.0f64; 3];
    for i in 0..50 {
        let (nx, ny) = if i % 2 == 0 { (1, 1) } else { (2, 1) };
        let k = 2 + (i / 2) % 2;
        let nlos = if (i / 4) % 2 == 0 { 0 } else { 2 };
        let geom = random_geometry(&mut rng, 4, nx, ny);
        let users: Vec<UserChannel> = (0..k).map(|_| random_user(&mut rng, nlos)).collect();
        let phases: Vec<f64> = (0..geom.element_count()).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let apv = geom.apv();
        let at = |v: &[f64]| geom.with_apv(v).unwrap();

        let g = grad_min_sinr_apv(&geom, &users, &link).unwrap();
        let fd = central_difference(&apv, 1e-7, |v| zf_min_sinr(&at(v), &users, &link).unwrap());
        worst[0] = worst[0].max(rel_err(&g, &fd));

        let g = grad_min_snr_apv(&geom, &phases, &users, &link).unwrap();
        let fd = central_difference(&apv, 1e-7, |v| min_snr(&at(v), &phases, &users, &link).unwrap());
        worst[1] = worst[1].max(rel_err(&g, &fd));

        let g = grad_min_snr_phase(&geom, &phases, &users, &link).unwrap();
        let fd = central_difference(&phases, 1e-7, |p| min_snr(&geom, p, &users, &link).unwrap());
        worst[2] = worst[2].max(rel_err(&g, &fd));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst.iter().all(|w| *w <= 1e-4) && secs < 10.0,
        format!(
            "max rel err digital-apv {:.2e}, analog-apv {:.2e}, analog-phase {:.2e}; {secs:.2} s",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let link = desk_link();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut resid, mut power, mut spread, mut consist) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let m = rng.random_range(8..=64);
        let k = rng.random_range(2..=8);
        let geom = random_geometry(&mut rng, m, 1, 1);
        let users: Vec<UserChannel> = (0..k).map(|_| random_user(&mut rng, 0)).collect();
        let h = channel_matrix(&geom, &users, LAMBDA).unwrap();
        let w = zf_precoder(&h, link.power).unwrap();
        let hw = h.adjoint() * &w;
        let c = hw.trace() / Complex64::from(k as f64);
        resid = resid.max((&hw - DMatrix::identity(k, k) * c).norm() / hw.norm());
        power = power.max((w.norm_squared() - link.power).abs() / link.power);
        let sinr = sinr_from_channel(&h, &w, link.noise).unwrap();
        let lo = sinr.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = sinr.iter().copied().fold(0.0, f64::max);
        spread = spread.max((hi - lo) / lo);
        let gamma = zf_min_sinr_from_channel(&h, &link).unwrap();
        consist = consist.max(sinr.iter().map(|s| (s - gamma).abs() / gamma).fold(0.0, f64::max));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        resid <= 1e-9 && power <= 1e-10 && spread <= 1e-9 && consist <= 1e-9 && secs < 5.0,
        format!(
            "ZF residual {resid:.1e}, power err {power:.1e}, SINR spread {spread:.1e}, \
             consistency {consist:.1e}; {secs:.2} s"
        ),
    )
}

fn criterion_3() -> Outcome {
    let link = desk_link();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let (nx, ny) = [(1, 1), (2, 2), (4, 1)][i % 3];
        let geom = random_geometry(&mut rng, 1 + i % 16, nx, ny);
        let user = random_user(&mut rng, 0);
        let b2 = user.prv()[0].norm_sqr();
        let bound = link.snr() * geom.element_count() as f64 * b2;
        let gamma = zf_min_sinr(&geom, &[user], &link).unwrap();
        worst = worst.max((gamma - bound).abs() / bound);
    }
    // desk parameters: 64 elements, user at horizontal range 25 m
    let region = RegionSpec::new(100.0 * LAMBDA, LAMBDA / 2.0).unwrap();
    let geom = init_subregion_grid(64, region, 1.0, &[Point2::default()]).unwrap();
    let user = los_user(Position3::new(0.0, -15.0, 25.0), 0.3);
    let desk = to_db(zf_min_sinr(&geom, &[user], &link).unwrap());
    outcome(
        worst <= 1e-12 && (desk - 26.8).abs() < 0.05,
        format!("max rel deviation from bound {worst:.1e}; desk case {desk:.3} dB"),
    )
}

fn theorem_users() -> Vec<UserChannel> {
    vec![los_user(Position3::new(-12.0, -15.0, 30.0), 0.4), los_user(Position3::new(18.0, -15.0, 22.0), 2.1)]
}

/// Moves subarray `index` by a quarter wavelength along the gradient of
/// the normalised path-length difference between the two users.
fn perturbed(geom: &ArrayGeometry, users: &[UserChannel], index: usize) -> ArrayGeometry {
    let (s1, s2) = (users[0].anchors()[0], users[1].anchors()[0]);
    let c = geom.centers()[index];
    let t = c.lift();
    let (d1, d2) = (t.distance(&s1), t.distance(&s2));
    let gx = (c.x - s1.x) / d1 - (c.x - s2.x) / d2;
    let gy = (c.y - s1.y) / d1 - (c.y - s2.y) / d2;
    let n = gx.hypot(gy);
    let mut apv = geom.apv();
    apv[2 * index] += LAMBDA / 4.0 * gx / n;
    apv[2 * index + 1] += LAMBDA / 4.0 * gy / n;
    geom.with_apv(&apv).unwrap()
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let link = desk_link();
    let users = theorem_users();
    let region = RegionSpec::new(100.0 * LAMBDA, LAMBDA / 2.0).unwrap();
    let geom = match construct_digital_apv(&users, 8, region, LAMBDA) {
        Ok(g) => g,
        Err(e) => return outcome(false, format!("construction failed: {e}")),
    };
    let cert = check_digital_condition(&geom, &users, LAMBDA).unwrap();
    let bound = min_sinr_upper_bound(&users, 8, 1, &link).unwrap().value;
    let gamma = zf_min_sinr(&geom, &users, &link).unwrap();
    let gap = to_db(bound) - to_db(gamma);
    let moved = perturbed(&geom, &users, 3);
    let broken = !check_digital_condition(&moved, &users, LAMBDA).unwrap().pass;
    let gamma_moved = zf_min_sinr(&moved, &users, &link).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        cert.pass && gap.abs() <= 0.01 && broken && gamma_moved < gamma && secs < 5.0,
        format!(
            "certified {} (residual {:.1e}), gap to bound {gap:.2e} dB; perturbed: certified {}, \
             min-SINR {:.3} -> {:.3} dB; {secs:.2} s",
            cert.pass,
            cert.pairs[0].residual,
            !broken,
            to_db(gamma),
            to_db(gamma_moved)
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let link = desk_link();
    let users = theorem_users();
    let region = RegionSpec::new(100.0 * LAMBDA, LAMBDA / 2.0).unwrap();
    let geom = match construct_analog_apv(&users, 8, region, LAMBDA) {
        Ok(g) => g,
        Err(e) => return outcome(false, format!("construction failed: {e}")),
    };
    let cert = check_analog_condition(&geom, &users, LAMBDA).unwrap();
    let bound = min_snr_upper_bound(&users, 8, 1, &link).unwrap();
    // phase-aligned with user 1, hence with every fully correlated user
    let aligned: Vec<f64> =
        channel_matrix(&geom, &users[..1], LAMBDA).unwrap().iter().map(|z| z.arg()).collect();
    let eta = min_snr(&geom, &aligned, &users, &link).unwrap();
    let gap = to_db(bound) - to_db(eta);
    let moved = perturbed(&geom, &users, 3);
    let broken = !check_analog_condition(&moved, &users, LAMBDA).unwrap().pass;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        cert.pass && gap.abs() <= 0.01 && broken && secs < 5.0,
        format!(
            "certified {} (correlation 1 - {:.1e}), gap to bound {gap:.2e} dB; perturbed certified {}; {secs:.2} s",
            cert.pass,
            cert.pairs[0].residual,
            !broken
        ),
    )
}

fn criterion_6() -> Outcome {
    let link = desk_link();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut worst_d, mut worst_a) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let k = rng.random_range(1..=6);
        let nlos = if i % 2 == 0 { 0 } else { 2 };
        let m = rng.random_range(6..=16);
        let geom = random_geometry(&mut rng, m, 1 + i % 2, 1);
        let users: Vec<UserChannel> = (0..k).map(|_| random_user(&mut rng, nlos)).collect();
        let (m, n) = (geom.subarrays(), geom.elements_per_subarray());
        let bound = min_sinr_upper_bound(&users, m, n, &link).unwrap().value;
        if let Ok(gamma) = zf_min_sinr(&geom, &users, &link) {
            worst_d = worst_d.max(gamma / bound);
        }
        let eta_bound = min_snr_upper_bound(&users, m, n, &link).unwrap();
        let init = init_phases(&geom, &users, LAMBDA).unwrap().phases;
        let random: Vec<f64> = (0..geom.element_count()).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        for phases in [init, random] {
            if let Ok(eta) = min_snr(&geom, &phases, &users, &link) {
                worst_a = worst_a.max(eta / eta_bound);
            }
        }
    }
    outcome(
        worst_d <= 1.0 + 1e-9 && worst_a <= 1.0 + 1e-9,
        format!("max achieved/bound: digital {worst_d:.6}, analog {worst_a:.6}"),
    )
}

const HOTSPOT_DESK: &str = "\
[scenario]
wavelength = 0.01
subarrays = 16
users = 4
region_side_wavelengths = 50
[users]
distribution = \"hotspots\"
";

const ANNULUS_DESK: &str = "\
[scenario]
wavelength = 0.01
subarrays = 16
users = 4
region_side_wavelengths = 50
";

struct Runs {
    digital_monotone: usize,
    analog_monotone: usize,
    converged_within_50: usize,
    worst_iterations: usize,
    worst_modulus: f64,
    /// Smallest share of the total AO gain already reached after 50 iterations.
    worst_share_at_50: f64,
}

fn desk_runs() -> Runs {
    let analog_cfg = parse_config(HOTSPOT_DESK).unwrap();
    let digital_cfg = parse_config(ANNULUS_DESK).unwrap();
    let link = analog_cfg.scenario.link();
    let opt = OptimizerConfig::for_wavelength(LAMBDA);
    let init = nearfield_ma::harness::experiment::ma_initial_geometry(&analog_cfg).unwrap();
    let mut runs = Runs {
        digital_monotone: 0,
        analog_monotone: 0,
        converged_within_50: 0,
        worst_iterations: 0,
        worst_modulus: 0.0,
        worst_share_at_50: 1.0,
    };
    for seed in 0..100 {
        let users = trial_users(&digital_cfg, seed).unwrap();
        let run = optimize_digital(&init, &users, &link, &opt).unwrap();
        if run.trace.windows(2).all(|w| w[1].objective >= w[0].objective) {
            runs.digital_monotone += 1;
        }

        let users = trial_users(&analog_cfg, seed).unwrap();
        let run = optimize_analog(&init, &users, &link, &opt).unwrap();
        let monotone = run
            .trace
            .windows(2)
            .all(|w| w[1].after_apv >= w[0].objective && w[1].objective >= w[1].after_apv);
        if monotone {
            runs.analog_monotone += 1;
        }
        if run.termination == Termination::Converged && run.iterations <= 50 {
            runs.converged_within_50 += 1;
        }
        runs.worst_iterations = runs.worst_iterations.max(run.iterations);
        let first = run.trace[0].objective;
        let last = run.trace.last().unwrap().objective;
        let at_50 = run.trace[run.trace.len().min(51) - 1].objective;
        if last > first {
            runs.worst_share_at_50 = runs.worst_share_at_50.min((at_50 - first) / (last - first));
        }
        let modulus = run.trace.iter().map(|t| t.modulus_error).fold(0.0, f64::max);
        runs.worst_modulus = runs.worst_modulus.max(modulus);
    }
    runs
}

fn criterion_7(runs: &Runs) -> Outcome {
    outcome(
        runs.digital_monotone == 100 && runs.analog_monotone == 100 && runs.converged_within_50 == 100,
        format!(
            "monotone traces: digital {}/100, analog {}/100; AO converged within 50 iterations {}/100 \
             (slowest {} iterations, at least {:.1}% of the final gain reached by iteration 50)",
            runs.digital_monotone,
            runs.analog_monotone,
            runs.converged_within_50,
            runs.worst_iterations,
            100.0 * runs.worst_share_at_50
        ),
    )
}

fn criterion_8() -> Outcome {
    let link = desk_link();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let (mut spread, mut total) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let k = rng.random_range(2..=32);
        let m = rng.random_range(4..=16);
        let geom = random_geometry(&mut rng, m, 1 + i % 2, 1);
        let users: Vec<UserChannel> = (0..k).map(|_| random_user(&mut rng, i % 3)).collect();
        let phases: Vec<f64> = (0..geom.element_count()).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let p = optimal_power_allocation(&geom, &phases, &users, &link).unwrap();
        total = total.max((p.iter().sum::<f64>() - link.power).abs() / link.power);
        let snr = snr_per_user(&geom, &phases, &p, &users, &link).unwrap();
        let lo = snr.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = snr.iter().copied().fold(0.0, f64::max);
        spread = spread.max((hi - lo) / lo);
    }
    outcome(spread <= 1e-9 && total <= 1e-12, format!("SNR spread {spread:.1e}, power-sum error {total:.1e}"))
}

fn criterion_9(runs: &Runs) -> Outcome {
    outcome(
        runs.worst_modulus <= 1e-12,
        format!("max | sqrt(MN)|w_n| - 1 | over all accepted phase updates: {:.1e}", runs.worst_modulus),
    )
}

fn trend_config(base: &str, users: usize, architecture: &str, schemes: &[&str]) -> String {
    let base = base.replace("users = 4", &format!("users = {users}"));
    let list = schemes.iter().map(|s| format!("\"{s}\"")).collect::<Vec<_>>().join(", ");
    format!(
        "{base}[run]\nseed = 2024\ntrials = 50\nstatistical_realizations = 50\n\
         architectures = [\"{architecture}\"]\nschemes = [{list}]\n"
    )
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for k in [4, 8] {
        let cfg = parse_config(&trend_config(
            ANNULUS_DESK,
            k,
            "digital",
            &["ma_instant", "ma_statistical", "v_sparse_upa", "dense_upa", "upper_bound"],
        ))
        .unwrap();
        let res = run_experiment(&cfg).unwrap();
        let report = &compare_schemes(&res)[0];
        let order = [
            Scheme::MaInstant,
            Scheme::MaStatistical,
            Scheme::Fixed(nearfield_ma::arrays::BenchmarkKind::VSparseUpa),
            Scheme::Fixed(nearfield_ma::arrays::BenchmarkKind::DenseUpa),
        ];
        let db = |s: Scheme| res.summary(Architecture::Digital, s).unwrap().mean_db;
        let ordered = report.holds(&order);
        let gap = db(Scheme::UpperBound) - db(Scheme::MaInstant);
        ok &= ordered && (k != 4 || gap <= 3.0);
        detail.push(format!(
            "digital K={k}: {} dB (ordered {ordered}, gap {gap:.2} dB)",
            order.iter().map(|s| format!("{:.2}", db(*s))).collect::<Vec<_>>().join(" / ")
        ));
    }
    for k in [4, 8] {
        let cfg = parse_config(&trend_config(
            HOTSPOT_DESK,
            k,
            "analog",
            &["ma_instant", "dense_upa", "sparse_upa", "upper_bound"],
        ))
        .unwrap();
        let res = run_experiment(&cfg).unwrap();
        let report = &compare_schemes(&res)[0];
        let order = [
            Scheme::MaInstant,
            Scheme::Fixed(nearfield_ma::arrays::BenchmarkKind::DenseUpa),
            Scheme::Fixed(nearfield_ma::arrays::BenchmarkKind::SparseUpa),
        ];
        let db = |s: Scheme| res.summary(Architecture::Analog, s).unwrap().mean_db;
        let ordered = report.holds(&order);
        let gap = db(Scheme::UpperBound) - db(Scheme::MaInstant);
        ok &= ordered && gap <= 3.0;
        detail.push(format!(
            "analog K={k}: {} dB (ordered {ordered}, gap {gap:.2} dB)",
            order.iter().map(|s| format!("{:.2}", db(*s))).collect::<Vec<_>>().join(" / ")
        ));
    }
    detail.push(format!("{:.1} s", start.elapsed().as_secs_f64()));
    outcome(ok, detail.join("; "))
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let geom = random_geometry(&mut rng, 16, 1, 1);
    let spec = BeamGridSpec {
        focus: [3.0, -15.0, 20.0],
        x_range: [-2.0, 8.0],
        z_range: [15.0, 25.0],
        resolution: [11, 11],
        height: None,
        wavelength: LAMBDA,
    };
    let w = focused_weights(&geom, &spec.focus_point(), LAMBDA).unwrap();
    let grid = beam_pattern(&geom, &w, &spec).unwrap();
    let mn = geom.element_count() as f64;
    let focus_err = (grid.gain(5, 5) - mn).abs() / mn;

    let elems = element_positions(&geom);
    let k = 2.0 * PI / LAMBDA;
    let mut worst = 0.0f64;
    for (iz, z) in grid.z.iter().enumerate() {
        for (ix, x) in grid.x.iter().enumerate() {
            let s = Position3::new(*x, -15.0, *z);
            let mut acc = Complex64::new(0.0, 0.0);
            for (e, t) in elems.iter().enumerate() {
                let a = Complex64::from_polar(1.0, k * t.distance(&s));
                acc += a.conj() * w[e];
            }
            worst = worst.max((acc.norm_sqr() - grid.gain(ix, iz)).abs());
        }
    }
    outcome(
        focus_err <= 1e-12 && worst <= 1e-10,
        format!("focus gain {:.12} for MN = {mn}; max brute-force deviation {worst:.1e}", grid.gain(5, 5)),
    )
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn criterion_12() -> Outcome {
    let text = "\
[scenario]
wavelength = 0.01
subarrays = 9
users = 3
region_side_wavelengths = 50
nlos = 1
[optimizer]
max_iters = 40
[run]
seed = 99
trials = 6
statistical_realizations = 4
write_traces = true
write_geometry = true
";
    let cfg = parse_config(text).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let res = run_experiment(&cfg).unwrap();
        write_results(&res, d.path()).unwrap();
    }
    let (a, b) = (read_tree(dirs[0].path()), read_tree(dirs[1].path()));
    outcome(!a.is_empty() && a == b, format!("{} files compared, identical: {}", a.len(), a == b))
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() {
    let started = Instant::now();
    let runs = desk_runs();
    let criteria: Vec<(&str, Check)> = vec![
        ("gradient oracles", Box::new(criterion_1)),
        ("zero-forcing algebra", Box::new(criterion_2)),
        ("single-user exactness", Box::new(criterion_3)),
        ("digital bound construction", Box::new(criterion_4)),
        ("analog bound construction", Box::new(criterion_5)),
        ("bound dominance", Box::new(criterion_6)),
        ("monotonicity and convergence", Box::new(|| criterion_7(&runs))),
        ("analog power allocation", Box::new(criterion_8)),
        ("constant modulus", Box::new(|| criterion_9(&runs))),
        ("trend reproduction", Box::new(criterion_10)),
        ("beam pattern", Box::new(criterion_11)),
        ("determinism", Box::new(criterion_12)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
