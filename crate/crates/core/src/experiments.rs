//! Resolution sweeps over the Manneville–Pomeau family and the
//! counterexample scenario.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::interval_maps::{counterexample_map, mp_map};
use crate::partitions::Partition;
use crate::stationary::{srb_from_pi, stationary_distribution, DiscreteSrb, SolverOptions};
use crate::ulam_operator::{first_row_diagnostics_for, UlamMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PartitionKind {
    Uniform,
    QuasiUniform { k: f64, seed: u64 },
}

impl PartitionKind {
    pub fn build(&self, n: usize) -> Result<Partition> {
        match *self {
            PartitionKind::Uniform => Partition::uniform(n),
            PartitionKind::QuasiUniform { k, seed } => Partition::quasi_uniform(n, k, seed),
        }
    }
}

/// One row of a sweep. Serializes to the CSV columns
/// `alpha,n_cells,delta,K,pi1,pi1_over_delta,pi1_over_delta_pow,tail_z,tail_mass,p11,p12,p12_lo,p12_hi,residual,unique`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub n_cells: usize,
    pub delta: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub pi1: f64,
    pub pi1_over_delta: f64,
    /// `pi1 / delta^(1 - alpha)`
    pub pi1_over_delta_pow: f64,
    pub tail_z: f64,
    pub tail_mass: f64,
    pub p11: f64,
    pub p12: f64,
    pub p12_lo: f64,
    pub p12_hi: f64,
    pub residual: f64,
    pub unique: bool,
    /// Why this record is unusable, if it is.
    #[serde(skip)]
    pub error: Option<String>,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    fn failed(alpha: f64, n: usize, z: f64, err: impl ToString) -> Self {
        SweepRecord {
            alpha,
            n_cells: n,
            delta: f64::NAN,
            k: f64::NAN,
            pi1: f64::NAN,
            pi1_over_delta: f64::NAN,
            pi1_over_delta_pow: f64::NAN,
            tail_z: z,
            tail_mass: f64::NAN,
            p11: f64::NAN,
            p12: f64::NAN,
            p12_lo: f64::NAN,
            p12_hi: f64::NAN,
            residual: f64::NAN,
            unique: false,
            error: Some(err.to_string()),
        }
    }
}

/// A sweep record together with the measure it was computed from.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub record: SweepRecord,
    pub srb: Option<DiscreteSrb>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub alpha: f64,
    pub cell_counts: Vec<usize>,
    pub partition: PartitionKind,
    pub z: f64,
    pub solver: SolverOptions,
}

impl SweepConfig {
    pub fn uniform(alpha: f64, cell_counts: Vec<usize>, z: f64) -> Self {
        SweepConfig { alpha, cell_counts, partition: PartitionKind::Uniform, z, solver: SolverOptions::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be nonnegative, got {}", self.alpha)));
        }
        if !(self.z > 0.0 && self.z <= 1.0) {
            return Err(Error::InvalidParameter(format!("z must lie in (0, 1], got {}", self.z)));
        }
        if self.cell_counts.is_empty() || self.cell_counts.windows(2).any(|w| w[0] >= w[1]) || self.cell_counts[0] == 0
        {
            return Err(Error::InvalidParameter("cell counts must be positive and strictly increasing".into()));
        }
        Ok(())
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    Ok(run_sweep_detailed(config)?.into_iter().map(|r| r.record).collect())
}

/// Like [`run_sweep`], also returning each computed measure. Entries run
/// concurrently and come back in input order.
pub fn run_sweep_detailed(config: &SweepConfig) -> Result<Vec<SweepRun>> {
    config.validate()?;
    let map = mp_map(config.alpha)?;
    Ok(config
        .cell_counts
        .par_iter()
        .map(|&n| match sweep_entry(config, &map, n) {
            Ok(run) => run,
            Err(e) => {
                log::warn!("sweep entry n={n} failed: {e}");
                SweepRun { record: SweepRecord::failed(config.alpha, n, config.z, e), srb: None }
            }
        })
        .collect())
}

fn sweep_entry(config: &SweepConfig, map: &crate::IntervalMap, n: usize) -> Result<SweepRun> {
    let partition = config.partition.build(n)?;
    let matrix = UlamMatrix::build(map, &partition)?;
    record_for(&matrix, config.alpha, config.z, &config.solver)
}

/// Solves `matrix` and fills a sweep record. `alpha` is the exponent of the
/// Manneville–Pomeau map the matrix was built from; the first-row bounds
/// are left as NaN when they do not apply.
pub fn record_for(matrix: &UlamMatrix, alpha: f64, z: f64, solver: &SolverOptions) -> Result<SweepRun> {
    let partition = matrix.partition();
    let n = partition.n_cells();
    let solved = stationary_distribution(matrix, solver)?;
    let srb = srb_from_pi(&solved.pi, partition)?;
    let delta = partition.delta();
    let pi1 = solved.pi[0];
    let (p12_lo, p12_hi) = match first_row_diagnostics_for(alpha, matrix) {
        Ok(d) => (d.lower, d.upper),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let error = (!solved.unique).then(|| "chain is not uniquely ergodic".to_string());
    let record = SweepRecord {
        alpha,
        n_cells: n,
        delta,
        k: partition.ratio_k(),
        pi1,
        pi1_over_delta: pi1 / delta,
        pi1_over_delta_pow: pi1 / delta.powf(1.0 - alpha),
        tail_z: z,
        tail_mass: srb.tail_mass(z)?,
        p11: matrix.get(0, 0),
        p12: matrix.get(0, 1),
        p12_lo,
        p12_hi,
        residual: solved.residual,
        unique: solved.unique,
        error,
    };
    log::info!("alpha={alpha} n={n} pi1={pi1:e} iterations={}", solved.iterations);
    Ok(SweepRun { record, srb: Some(srb) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least squares fit of `ln pi1` against `ln delta` over the usable records.
pub fn fit_scaling_exponent(records: &[SweepRecord]) -> Result<ScalingFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.is_ok() && r.pi1 > 0.0 && r.delta > 0.0)
        .map(|r| (r.delta.ln(), r.pi1.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 usable records, got {}", pts.len())));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx < 1e-12 {
        return Err(Error::Fit("cell sizes do not vary".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ScalingFit { slope, intercept, r_squared, points: pts.len() })
}

pub const DEFAULT_WINDOW: f64 = 1.0 / 24.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRecord {
    pub n_cells: usize,
    pub window: f64,
    /// `mu([1/2 - window, 1/2 + window])`
    pub mass_near_half: f64,
    /// Cell carrying the largest stationary mass, numbered from 1.
    pub pi_argmax_cell: usize,
    pub residual: f64,
    pub unique: bool,
}

/// Stationary mass near the attracting fixed point `1/2` of the
/// counterexample map, on uniform partitions. Cell counts must be multiples
/// of 12 unless `allow_unaligned` is set.
pub fn run_counterexample(
    cell_counts: &[usize],
    window: f64,
    allow_unaligned: bool,
    solver: &SolverOptions,
) -> Result<Vec<CounterexampleRecord>> {
    if !(window > 0.0 && window <= 0.5) {
        return Err(Error::InvalidParameter(format!("window must lie in (0, 1/2], got {window}")));
    }
    if let Some(&n) = cell_counts.iter().find(|&&n| n == 0 || (!allow_unaligned && n % 12 != 0)) {
        return Err(Error::InvalidParameter(format!("cell count {n} is not a positive multiple of 12")));
    }
    let map = counterexample_map();
    cell_counts
        .par_iter()
        .map(|&n| {
            let partition = Partition::uniform(n)?;
            let matrix = UlamMatrix::build(&map, &partition)?;
            let solved = stationary_distribution(&matrix, solver)?;
            let srb = srb_from_pi(&solved.pi, &partition)?;
            let near = Interval { lo: 0.5 - window, hi: 0.5 + window };
            let argmax = solved
                .pi
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
                .0;
            Ok(CounterexampleRecord {
                n_cells: n,
                window,
                mass_near_half: srb.measure_of_interval(&near),
                pi_argmax_cell: argmax + 1,
                residual: solved.residual,
                unique: solved.unique,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitReport {
    pub starts: usize,
    pub steps: usize,
    pub max_distance: f64,
    pub within: usize,
}

impl OrbitReport {
    pub fn all_within(&self) -> bool {
        self.within == self.starts
    }
}

/// Iterates the counterexample map from `starts` uniform random points and
/// reports the distance of each endpoint from `1/2`.
pub fn counterexample_orbits(starts: usize, steps: usize, seed: u64, tol: f64) -> Result<OrbitReport> {
    let map = counterexample_map();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_distance: f64 = 0.0;
    let mut within = 0;
    for _ in 0..starts {
        let mut x: f64 = rng.gen();
        for _ in 0..steps {
            x = map.eval(x)?;
        }
        let d = (x - 0.5).abs();
        max_distance = max_distance.max(d);
        within += usize::from(d <= tol);
    }
    Ok(OrbitReport { starts, steps, max_distance, within })
}
