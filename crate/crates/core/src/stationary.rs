//! Stationary distribution of the Ulam chain and the discrete SRB measure.
//!
//! Two solvers share one stopping rule, `‖πP − π‖₁ < tol`:
//!
//! - power iteration from the uniform vector, optionally Cesàro-averaged;
//! - Gauss–Seidel sweeps in cell order (the default).

use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::measures::StepMeasure;
use crate::partitions::Partition;
use crate::ulam_operator::UlamMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Power,
    GaussSeidel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    /// Average the power iterates; ignored by Gauss–Seidel.
    pub cesaro: bool,
    /// Largest matrix power tried by the positivity check.
    pub n_max: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { method: Method::GaussSeidel, tol: 1e-13, max_iter: 1_000_000, cesaro: false, n_max: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryResult {
    pub pi: Vec<f64>,
    /// `‖πP − π‖₁` of the returned vector.
    pub residual: f64,
    pub iterations: usize,
    pub unique: bool,
    /// First power of `P` found entrywise positive.
    pub n_delta: Option<usize>,
}

fn l1_residual(p: &UlamMatrix, pi: &[f64], scratch: &mut [f64]) -> f64 {
    p.left_apply_into(pi, scratch);
    scratch.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum()
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

pub fn stationary_distribution(p: &UlamMatrix, options: &SolverOptions) -> Result<StationaryResult> {
    let (pi, residual, iterations) = match options.method {
        Method::Power => power_iteration(p, options)?,
        Method::GaussSeidel => gauss_seidel(p, options)?,
    };
    let ergodicity = check_unique_ergodicity(p, options.n_max);
    Ok(StationaryResult { pi, residual, iterations, unique: ergodicity.unique, n_delta: ergodicity.n_positive_power })
}

fn power_iteration(p: &UlamMatrix, options: &SolverOptions) -> Result<(Vec<f64>, f64, usize)> {
    let n = p.n();
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut avg = pi.clone();
    let mut residual = f64::INFINITY;
    for it in 1..=options.max_iter {
        p.left_apply_into(&pi, &mut next);
        normalize(&mut next);
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if options.cesaro {
            let w = 1.0 / (it + 1) as f64;
            avg.iter_mut().zip(&pi).for_each(|(a, x)| *a += w * (x - *a));
            residual = l1_residual(p, &avg, &mut scratch);
        }
        if residual < options.tol {
            let out = if options.cesaro { avg } else { pi };
            return Ok((out, residual, it));
        }
    }
    Err(Error::NoConvergence { iterations: options.max_iter, residual })
}

fn gauss_seidel(p: &UlamMatrix, options: &SolverOptions) -> Result<(Vec<f64>, f64, usize)> {
    let n = p.n();
    let incoming = p.columns();
    // Escape probability of each cell, summed off the diagonal.
    let escape: Vec<f64> = (0..n)
        .map(|k| {
            let (cols, vals) = p.row(k);
            cols.iter().zip(vals).filter(|(&j, _)| j != k).map(|(_, v)| v).sum()
        })
        .collect();
    let mut pi = vec![1.0 / n as f64; n];
    let mut scratch = vec![0.0; n];
    let mut residual = l1_residual(p, &pi, &mut scratch);
    if residual < options.tol {
        return Ok((pi, residual, 0));
    }
    for it in 1..=options.max_iter {
        for k in 0..n {
            if escape[k] > 0.0 {
                let inflow = incoming[k].iter().filter(|(i, _)| *i != k).fold(0.0, |acc, &(i, v)| acc + pi[i] * v);
                pi[k] = inflow / escape[k];
            }
        }
        normalize(&mut pi);
        residual = l1_residual(p, &pi, &mut scratch);
        if residual < options.tol {
            return Ok((pi, residual, it));
        }
    }
    Err(Error::NoConvergence { iterations: options.max_iter, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ergodicity {
    pub unique: bool,
    pub n_positive_power: Option<usize>,
    pub closed_classes: usize,
    /// Period one for the closed class (meaningful when `unique`).
    pub aperiodic: bool,
}

/// Matrices larger than this skip the boolean-power search (its memory is
/// quadratic in the cell count); uniqueness is still decided exactly from
/// the communicating classes.
pub const POWER_CHECK_MAX_CELLS: usize = 8192;

/// Decides whether the chain has exactly one stationary distribution.
///
/// First looks for an entrywise positive power `P^k`, `k <= n_max`, with
/// boolean reachability sets; failing that, counts the closed
/// communicating classes of the support graph and measures the period of
/// the closed class.
pub fn check_unique_ergodicity(p: &UlamMatrix, n_max: usize) -> Ergodicity {
    if p.n() <= POWER_CHECK_MAX_CELLS {
        if let Some(k) = first_positive_power(p, n_max) {
            return Ergodicity { unique: true, n_positive_power: Some(k), closed_classes: 1, aperiodic: true };
        }
    }
    let (closed, aperiodic) = closed_class_structure(p);
    Ergodicity { unique: closed == 1, n_positive_power: None, closed_classes: closed, aperiodic }
}

fn first_positive_power(p: &UlamMatrix, n_max: usize) -> Option<usize> {
    let n = p.n();
    let words = n.div_ceil(64);
    let full_last = if n.is_multiple_of(64) { u64::MAX } else { (1u64 << (n % 64)) - 1 };
    let is_full = |row: &[u64]| row[..words - 1].iter().all(|&w| w == u64::MAX) && row[words - 1] == full_last;

    let mut reach = vec![0u64; n * words];
    for i in 0..n {
        for &j in p.row(i).0 {
            reach[i * words + j / 64] |= 1 << (j % 64);
        }
    }
    let mut next = vec![0u64; n * words];
    for k in 1..=n_max {
        if reach.chunks(words).all(is_full) {
            return Some(k);
        }
        if k == n_max {
            break;
        }
        // P^(k+1) = P · P^k: row i reaches whatever its successors reach.
        next.par_chunks_mut(words).enumerate().for_each(|(i, out)| {
            out.iter_mut().for_each(|w| *w = 0);
            for &j in p.row(i).0 {
                let src = &reach[j * words..(j + 1) * words];
                out.iter_mut().zip(src).for_each(|(o, s)| *o |= s);
            }
        });
        std::mem::swap(&mut reach, &mut next);
    }
    None
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Number of closed classes, and whether the first closed class is aperiodic.
fn closed_class_structure(p: &UlamMatrix) -> (usize, bool) {
    let n = p.n();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, p.nnz());
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for &j in p.row(i).0 {
            graph.add_edge(nodes[i], nodes[j], ());
        }
    }
    let sccs = kosaraju_scc(&graph);
    let mut comp = vec![0usize; n];
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            comp[v.index()] = c;
        }
    }
    let mut closed = vec![true; sccs.len()];
    for i in 0..n {
        for &j in p.row(i).0 {
            if comp[i] != comp[j] {
                closed[comp[i]] = false;
            }
        }
    }
    let closed_ids: Vec<usize> = (0..sccs.len()).filter(|&c| closed[c]).collect();
    let aperiodic = closed_ids.first().is_some_and(|&c| class_period(p, &comp, c, sccs[c][0].index()) == 1);
    (closed_ids.len(), aperiodic)
}

/// Period of a strongly connected class: gcd of `level(u) + 1 - level(v)`
/// over its edges, with BFS levels from `root`.
fn class_period(p: &UlamMatrix, comp: &[usize], class: usize, root: usize) -> usize {
    let mut level = vec![usize::MAX; p.n()];
    level[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut g = 0;
    while let Some(u) = queue.pop_front() {
        for &v in p.row(u).0 {
            if comp[v] != class {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                g = gcd(g, (level[u] + 1).abs_diff(level[v]));
            }
        }
    }
    g
}

/// Discrete SRB approximant: density `π_i / |D_i|` on cell `i`, so that
/// each cell carries mass `π_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteSrb {
    pub partition: Partition,
    pub pi: Vec<f64>,
    pub densities: Vec<f64>,
}

pub fn srb_from_pi(pi: &[f64], partition: &Partition) -> Result<DiscreteSrb> {
    if pi.len() != partition.n_cells() {
        return Err(Error::Dimension { expected: partition.n_cells(), got: pi.len() });
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > 1e-12 || pi.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidParameter(format!("pi must be a probability vector (sum {total})")));
    }
    let densities = pi.iter().enumerate().map(|(i, x)| x / partition.cell_len(i)).collect();
    Ok(DiscreteSrb { partition: partition.clone(), pi: pi.to_vec(), densities })
}

impl DiscreteSrb {
    pub fn as_step_measure(&self) -> StepMeasure {
        StepMeasure { atom0: 0.0, partition: self.partition.clone(), densities: self.densities.clone() }
    }

    pub fn measure_of_interval(&self, iv: &Interval) -> f64 {
        self.partition.overlapping(iv).fold(0.0, |acc, i| acc + self.densities[i] * self.partition.cell(i).overlap(iv))
    }

    /// `μ([z, 1])` for `z` in `(0, 1]`.
    pub fn tail_mass(&self, z: f64) -> Result<f64> {
        if !(z > 0.0 && z <= 1.0) {
            return Err(Error::InvalidParameter(format!("tail point {z} must lie in (0, 1]")));
        }
        Ok(self.measure_of_interval(&Interval { lo: z, hi: 1.0 }))
    }
}
