//! Acceptance gate. Each test prints one `criterion N: PASS|FAIL` line.
//!
//! Run with `cargo test -p ulam --test acceptance -- --nocapture --test-threads 1`.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ulam::experiments::{self, counterexample_orbits, fit_scaling_exponent, run_counterexample, SweepConfig, SweepRun};
use ulam::interval_maps::{verify_local_conditions, DEFAULT_SAMPLES};
use ulam::measures::{check_key_inequality, project, pushforward, random_monotonic_on, IntervalPair};
use ulam::stationary::check_unique_ergodicity;
use ulam::ulam_operator::Direction;
use ulam::{
    counterexample_map, mp_map, stationary_distribution, Interval, Partition, SolverOptions, StepMeasure, UlamMatrix,
};

fn report(n: u32, ok: bool, elapsed: Duration, detail: String) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} ({:.2}s) {detail}", elapsed.as_secs_f64());
}

/// Root of `z + z^(1+alpha) = target` on `[0, target]`, by plain bisection.
fn oracle_root(alpha: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, target);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid + mid.powf(1.0 + alpha) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn powers_of_two(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

struct Sweep {
    runs: Vec<SweepRun>,
    elapsed: Duration,
}

fn sweep_half() -> &'static Sweep {
    static CELL: OnceLock<Sweep> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let runs = experiments::run_sweep_detailed(&SweepConfig::uniform(0.5, powers_of_two(8, 15), 0.1)).unwrap();
        Sweep { runs, elapsed: t.elapsed() }
    })
}

fn sweep_three_halves() -> &'static Sweep {
    static CELL: OnceLock<Sweep> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let runs = experiments::run_sweep_detailed(&SweepConfig::uniform(1.5, powers_of_two(8, 14), 0.1)).unwrap();
        Sweep { runs, elapsed: t.elapsed() }
    })
}

#[test]
fn criterion_01_row_stochastic_and_mass_conserving() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_row, mut worst_mass) = (0.0f64, 0.0f64);
    for alpha in [0.0, 0.25, 0.5, 1.0, 1.5] {
        let map = mp_map(alpha).unwrap();
        for n in [1 << 8, 1 << 10, 1 << 12] {
            for partition in [Partition::uniform(n).unwrap(), Partition::quasi_uniform(n, 2.0, rng.gen()).unwrap()] {
                let p = UlamMatrix::build(&map, &partition).unwrap();
                worst_row = worst_row.max(p.max_row_correction());
                let mut w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                let s: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= s);
                let out = p.apply(&w, Direction::Left).unwrap();
                worst_mass = worst_mass.max((out.iter().sum::<f64>() - 1.0).abs());
            }
        }
    }
    let elapsed = t.elapsed();
    let ok = worst_row < 1e-10 && worst_mass < 1e-13 && elapsed < Duration::from_secs(10);
    report(1, ok, elapsed, format!("max row-sum residual {worst_row:e}, max mass drift {worst_mass:e}"));
    assert!(ok);
}

#[test]
fn criterion_02_doubling_oracle() {
    let t = Instant::now();
    let p = UlamMatrix::build(&mp_map(0.0).unwrap(), &Partition::uniform(4096).unwrap()).unwrap();
    let r = stationary_distribution(&p, &SolverOptions::default()).unwrap();
    let l1: f64 = r.pi.iter().map(|x| (x - 1.0 / 4096.0).abs()).sum();
    let e = check_unique_ergodicity(&p, 64);
    let elapsed = t.elapsed();
    let ok = l1 <= 1e-10 && e.n_positive_power == Some(12) && elapsed < Duration::from_secs(5);
    report(2, ok, elapsed, format!("L1 error {l1:e}, n_delta {:?}", e.n_positive_power));
    assert!(ok);
}

#[test]
fn criterion_03_first_row_closed_forms() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for alpha in [0.25, 0.5, 1.5] {
        let map = mp_map(alpha).unwrap();
        for k in 8..=14 {
            let n = 1usize << k;
            let delta = 1.0 / n as f64;
            let p = UlamMatrix::build(&map, &Partition::uniform(n).unwrap()).unwrap();
            let z1 = oracle_root(alpha, delta);
            let dev = (p.get(0, 0) - z1 / delta).abs();
            worst = worst.max(dev);
            let p12 = p.get(0, 1);
            let (lo, hi) = (2f64.powf(-1.0 - alpha) * delta.powf(alpha), delta.powf(alpha));
            let beyond = p.row(0).0.iter().any(|&j| j > 1);
            if dev > 1e-10 || !(lo <= p12 && p12 <= hi) || beyond {
                failures.push(format!("alpha {alpha} n {n}: dev {dev:e} p12 {p12} in [{lo}, {hi}] beyond {beyond}"));
            }
        }
    }
    let ok = failures.is_empty();
    report(3, ok, t.elapsed(), format!("21 cases, max |p11 - z1/delta| {worst:e} {failures:?}"));
    assert!(ok);
}

#[test]
fn criterion_04_scaling_at_alpha_half() {
    let sweep = sweep_half();
    let recs: Vec<_> = sweep.runs.iter().map(|r| r.record.clone()).collect();
    let all_ok = recs.iter().all(|r| r.is_ok());
    let ratios: Vec<f64> = recs.iter().map(|r| r.pi1_over_delta).collect();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let growth = ratios.last().unwrap() / ratios[0];
    let band: Vec<f64> = recs.iter().map(|r| r.pi1_over_delta_pow).collect();
    let spread = band.iter().cloned().fold(f64::MIN, f64::max) / band.iter().cloned().fold(f64::MAX, f64::min);
    let fit = fit_scaling_exponent(&recs).unwrap();
    let ok = all_ok
        && increasing
        && growth >= 2.0
        && spread <= 10.0
        && (0.35..=0.98).contains(&fit.slope)
        && sweep.elapsed < Duration::from_secs(300);
    report(
        4,
        ok,
        sweep.elapsed,
        format!(
            "pi1/delta {:.3} -> {:.3} (x{growth:.2}), pi1/delta^0.5 spread x{spread:.3}, slope {:.4} (r2 {:.5})",
            ratios[0],
            ratios.last().unwrap(),
            fit.slope,
            fit.r_squared
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_05_collapse_at_alpha_three_halves() {
    let sweep = sweep_three_halves();
    let recs: Vec<_> = sweep.runs.iter().map(|r| &r.record).collect();
    let all_ok = recs.iter().all(|r| r.is_ok());
    let tails: Vec<f64> = recs.iter().map(|r| r.tail_mass).collect();
    let pis: Vec<f64> = recs.iter().map(|r| r.pi1).collect();
    let ok = all_ok
        && tails.windows(2).all(|w| w[1] < w[0])
        && *tails.last().unwrap() < 0.5 * tails[0]
        && pis.windows(2).all(|w| w[1] > w[0])
        && sweep.elapsed < Duration::from_secs(300);
    report(
        5,
        ok,
        sweep.elapsed,
        format!(
            "tail mass {:.4e} -> {:.4e}, pi1 {:.4} -> {:.4}",
            tails[0],
            tails.last().unwrap(),
            pis[0],
            pis.last().unwrap()
        ),
    );
    assert!(ok);
}

fn random_pair(rng: &mut ChaCha8Rng) -> IntervalPair {
    loop {
        let mut xs: [f64; 4] = [rng.gen(), rng.gen(), rng.gen(), rng.gen()];
        xs.sort_by(f64::total_cmp);
        // a = [x0, x1 or x2], b = [x1 or x2 .., x3] ordered endpoint-wise
        let (a, b) = if rng.gen_bool(0.5) {
            (Interval::new(xs[0], xs[2]), Interval::new(xs[1], xs[3]))
        } else {
            (Interval::new(xs[0], xs[1]), Interval::new(xs[2], xs[3]))
        };
        if let Ok(pair) = IntervalPair::new(a.unwrap(), b.unwrap()) {
            return pair;
        }
    }
}

#[test]
fn criterion_06_monotone_calculus() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut key = 0;
    for _ in 0..1000 {
        let part = Partition::quasi_uniform(rng.gen_range(1..=200), 3.0, rng.gen()).unwrap();
        let mu = random_monotonic_on(&mut rng, part, 0.3);
        key += usize::from(check_key_inequality(&mu, &random_pair(&mut rng)).unwrap());
    }
    let mut projected = 0;
    for _ in 0..100 {
        let part = Partition::quasi_uniform(rng.gen_range(1..=300), 3.0, rng.gen()).unwrap();
        let mu = random_monotonic_on(&mut rng, part, 0.3);
        let target = Partition::quasi_uniform(rng.gen_range(1..=300), 3.0, rng.gen()).unwrap();
        projected += usize::from(project(&mu, &target).is_monotonic(1e-12).holds);
    }
    let mut pushed = 0;
    let output = Partition::uniform(1 << 10).unwrap();
    for alpha in [0.5, 1.5] {
        let map = mp_map(alpha).unwrap();
        for _ in 0..100 {
            let part = Partition::quasi_uniform(rng.gen_range(1..=300), 2.0, rng.gen()).unwrap();
            let mu = random_monotonic_on(&mut rng, part, 0.3);
            pushed += usize::from(pushforward(&map, &mu, &output).is_monotonic(1e-10).holds);
        }
    }
    let elapsed = t.elapsed();
    let ok = key == 1000 && projected == 100 && pushed == 200 && elapsed < Duration::from_secs(120);
    report(6, ok, elapsed, format!("key inequality {key}/1000, projection {projected}/100, push-forward {pushed}/200"));
    assert!(ok);
}

#[test]
fn criterion_07_computed_measures_are_monotone() {
    let mut checked = 0;
    let mut bad = Vec::new();
    for sweep in [sweep_half(), sweep_three_halves()] {
        for run in &sweep.runs {
            let srb = run.srb.as_ref().expect("sweep entry failed");
            let m = srb.as_step_measure().is_monotonic(1e-10);
            checked += 1;
            if !m.holds {
                bad.push((run.record.alpha, run.record.n_cells, m.witness));
            }
        }
    }
    let ok = bad.is_empty() && checked == 15;
    report(7, ok, Duration::ZERO, format!("{}/{checked} stationary measures monotone {bad:?}", checked - bad.len()));
    assert!(ok);
}

#[test]
fn criterion_08_counterexample() {
    let t = Instant::now();
    let orbits = counterexample_orbits(10_000, 1_000, 8, 1e-9).unwrap();
    let recs =
        run_counterexample(&[12, 60, 120, 240, 480], experiments::DEFAULT_WINDOW, false, &SolverOptions::default())
            .unwrap();
    let masses: Vec<f64> = recs.iter().map(|r| r.mass_near_half).collect();
    let bounded = masses.iter().all(|&m| m <= 0.9);
    let monotone_to_one = masses.windows(2).all(|w| w[1] >= w[0]) && (1.0 - masses.last().unwrap()).abs() < 1e-9;
    let elapsed = t.elapsed();
    let ok = orbits.all_within() && bounded && !monotone_to_one && elapsed < Duration::from_secs(60);
    report(
        8,
        ok,
        elapsed,
        format!("orbits {}/{} within 1e-9 of 1/2; masses near 1/2 {masses:?}", orbits.within, orbits.starts),
    );
    assert!(ok);
}

#[test]
fn criterion_09_matrix_equals_projected_pushforward() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let map = if trial % 5 == 4 { counterexample_map() } else { mp_map(rng.gen_range(0.0..2.0)).unwrap() };
        let part = Partition::quasi_uniform(rng.gen_range(2..=400), 2.0, rng.gen()).unwrap();
        let masses: Vec<f64> = (0..part.n_cells()).map(|_| rng.gen::<f64>()).collect();
        let mu = StepMeasure::from_cell_masses(part.clone(), &masses).unwrap();
        let p = UlamMatrix::build(&map, &part).unwrap();
        let via_matrix = p.apply(&mu.cell_masses(), Direction::Left).unwrap();
        let via_operators = project(&pushforward(&map, &mu, &part), &part).cell_masses();
        for (a, b) in via_matrix.iter().zip(&via_operators) {
            worst = worst.max((a - b).abs());
        }
    }
    let ok = worst <= 1e-10;
    report(9, ok, t.elapsed(), format!("50 measures, max cell-mass difference {worst:e}"));
    assert!(ok);
}

#[test]
fn criterion_10_local_form_conditions() {
    let t = Instant::now();
    let mp = verify_local_conditions(&mp_map(0.5).unwrap(), 0.5, 1.0, DEFAULT_SAMPLES);
    let fit = mp.local_exponent_fit.clone().unwrap();
    let ce = verify_local_conditions(&counterexample_map(), 0.5, 1.0, DEFAULT_SAMPLES);
    let witness = ce.witnesses("noncontracting").next().cloned();
    let ok = mp.local_conditions_hold()
        && (fit.c - 1.0).abs() <= 1e-3
        && mp.branch_count_bound == 2
        && ce.noncontracting == Some(false)
        && witness.as_ref().is_some_and(|w| (w.value - 0.25).abs() < 1e-12);
    report(
        10,
        ok,
        t.elapsed(),
        format!("mp(0.5): C {:.6} M {}; counterexample witness {:?}", fit.c, mp.branch_count_bound, witness),
    );
    assert!(ok);
}
