//! The Ulam transition matrix `p_ij = m(D_i ∩ T^-1 D_j) / m(D_i)`.
//!
//! Assembly works from the preimages of the partition breakpoints under
//! each branch: the preimage of a cell under a monotone branch is a single
//! interval, so a row entry is the length of an intersection of two
//! intervals. Rows are independent and are assembled in parallel.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::interval_maps::{mp_map, IntervalMap};
use crate::partitions::Partition;
use crate::roots::{bisect, BISECTION_MAX_ITER, BISECTION_TOL};

/// Rows whose raw sum is further than this from one abort assembly.
pub const ASSEMBLY_ERROR_TOL: f64 = 1e-8;
/// Expected accuracy of the raw row sums.
pub const ROW_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `w P`, the action on measures (row vectors).
    Left,
    /// `P w`, the action on observables (column vectors).
    Right,
}

/// Sparse row-stochastic matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct UlamMatrix {
    partition: Partition,
    map_name: String,
    params: BTreeMap<String, f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    max_row_correction: f64,
}

impl UlamMatrix {
    pub fn build(map: &IntervalMap, partition: &Partition) -> Result<Self> {
        let n = partition.n_cells();
        let preimages: Vec<Vec<f64>> =
            map.branches().iter().map(|b| b.breakpoint_preimages(partition.breakpoints())).collect();

        let rows: Vec<(Vec<(usize, f64)>, f64)> =
            (0..n).into_par_iter().map(|i| assemble_row(map, partition, &preimages, i)).collect::<Result<_>>()?;

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut max_row_correction = 0.0f64;
        row_ptr.push(0);
        for (entries, correction) in rows {
            max_row_correction = max_row_correction.max(correction);
            for (j, p) in entries {
                cols.push(j);
                vals.push(p);
            }
            row_ptr.push(cols.len());
        }
        if max_row_correction > ROW_SUM_TOL {
            log::warn!("row-sum correction {max_row_correction:e} exceeds {ROW_SUM_TOL:e}");
        } else {
            log::debug!("max row-sum correction {max_row_correction:e}");
        }
        Ok(UlamMatrix {
            partition: partition.clone(),
            map_name: map.name().to_string(),
            params: map.params().clone(),
            row_ptr,
            cols,
            vals,
            max_row_correction,
        })
    }

    /// Assembles from explicit rows (zero-based columns), renormalizing each
    /// row exactly. Used when reading matrices back from disk.
    pub fn from_rows(
        partition: Partition,
        map_name: impl Into<String>,
        params: BTreeMap<String, f64>,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        let n = partition.n_cells();
        if rows.len() != n {
            return Err(Error::Dimension { expected: n, got: rows.len() });
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut max_row_correction = 0.0f64;
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|e| e.0);
            if let Some(&(j, _)) = row.iter().find(|e| e.0 >= n) {
                return Err(Error::Dimension { expected: n, got: j + 1 });
            }
            if let Some(&(_, p)) = row.iter().find(|e| !(e.1 >= 0.0)) {
                return Err(Error::InvalidParameter(format!("negative transition probability {p} in row {i}")));
            }
            let sum: f64 = row.iter().map(|e| e.1).sum();
            if (sum - 1.0).abs() > ASSEMBLY_ERROR_TOL {
                return Err(Error::Assembly { row: i, sum });
            }
            max_row_correction = max_row_correction.max((sum - 1.0).abs());
            for (j, p) in row {
                cols.push(j);
                vals.push(p / sum);
            }
            row_ptr.push(cols.len());
        }
        Ok(UlamMatrix { partition, map_name: map_name.into(), params, row_ptr, cols, vals, max_row_correction })
    }

    pub fn n(&self) -> usize {
        self.partition.n_cells()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn map_name(&self) -> &str {
        &self.map_name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Largest `|1 - raw row sum|` seen before renormalization.
    pub fn max_row_correction(&self) -> f64 {
        self.max_row_correction
    }

    /// Column indices and probabilities of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn max_row_support(&self) -> usize {
        self.row_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    pub fn apply(&self, w: &[f64], direction: Direction) -> Result<Vec<f64>> {
        let n = self.n();
        if w.len() != n {
            return Err(Error::Dimension { expected: n, got: w.len() });
        }
        Ok(match direction {
            Direction::Left => {
                let mut out = vec![0.0; n];
                self.left_apply_into(w, &mut out);
                out
            }
            Direction::Right => (0..n)
                .map(|i| {
                    let (cols, vals) = self.row(i);
                    cols.iter().zip(vals).map(|(&j, p)| p * w[j]).sum()
                })
                .collect(),
        })
    }

    pub(crate) fn left_apply_into(&self, w: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (i, wi) in w.iter().enumerate() {
            if *wi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&j, p) in cols.iter().zip(vals) {
                out[j] += wi * p;
            }
        }
    }

    /// Incoming transitions per column: `(i, p_ij)` lists, rows ascending.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.n()];
        for i in 0..self.n() {
            let (c, v) = self.row(i);
            for (&j, &p) in c.iter().zip(v) {
                cols[j].push((i, p));
            }
        }
        cols
    }

    pub fn to_file_format(&self) -> MatrixFile {
        MatrixFile {
            n: self.n(),
            map: self.map_name.clone(),
            params: self.params.clone(),
            partition: self.partition.clone(),
            max_row_correction: self.max_row_correction,
            rows: (0..self.n())
                .map(|i| {
                    let (c, v) = self.row(i);
                    c.iter().zip(v).map(|(&j, &p)| (j + 1, p)).collect()
                })
                .collect(),
            config: None,
        }
    }

    pub fn from_file_format(file: MatrixFile) -> Result<Self> {
        if file.n != file.partition.n_cells() {
            return Err(Error::Dimension { expected: file.partition.n_cells(), got: file.n });
        }
        let rows = file
            .rows
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|(j, p)| {
                        j.checked_sub(1)
                            .map(|j| (j, p))
                            .ok_or_else(|| Error::InvalidParameter("column indices are 1-based".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(file.partition, file.map, file.params, rows)
    }

    /// Writes `i j p` lines with 1-based indices.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.n() {
            let (c, v) = self.row(i);
            for (&j, &p) in c.iter().zip(v) {
                writeln!(out, "{} {} {}", i + 1, j + 1, p)?;
            }
        }
        Ok(())
    }
}

/// JSON container for a matrix. Column indices in `rows` are 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub map: String,
    pub params: BTreeMap<String, f64>,
    pub partition: Partition,
    #[serde(default)]
    pub max_row_correction: f64,
    pub rows: Vec<Vec<(usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

fn assemble_row(
    map: &IntervalMap,
    partition: &Partition,
    preimages: &[Vec<f64>],
    i: usize,
) -> Result<(Vec<(usize, f64)>, f64)> {
    let n = partition.n_cells();
    let cell = partition.cell(i);
    let len = cell.len();
    let mut entries: Vec<(usize, f64)> = Vec::new();
    for (branch, xs) in map.branches().iter().zip(preimages) {
        let d = branch.domain();
        let piece = Interval { lo: cell.lo.max(d.lo), hi: cell.hi.min(d.hi) };
        if piece.is_degenerate() {
            continue;
        }
        let (ya, yb) = (branch.forward(piece.lo), branch.forward(piece.hi));
        let first = partition.locate_clamped(ya.min(yb).clamp(0.0, 1.0)).saturating_sub(1);
        let last = (partition.locate_clamped(ya.max(yb).clamp(0.0, 1.0)) + 1).min(n - 1);
        for j in first..=last {
            let pre = Interval { lo: xs[j].min(xs[j + 1]), hi: xs[j].max(xs[j + 1]) };
            let overlap = pre.overlap(&piece);
            if overlap > 0.0 {
                entries.push((j, overlap / len));
            }
        }
    }
    entries.sort_by_key(|e| e.0);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
    for (j, p) in entries {
        match merged.last_mut() {
            Some(last) if last.0 == j => last.1 += p,
            _ => merged.push((j, p)),
        }
    }
    let sum: f64 = merged.iter().map(|e| e.1).sum();
    if (sum - 1.0).abs() > ASSEMBLY_ERROR_TOL {
        return Err(Error::Assembly { row: i, sum });
    }
    merged.iter_mut().for_each(|e| e.1 /= sum);
    Ok((merged, (sum - 1.0).abs()))
}

/// Closed-form first-row quantities for the Manneville–Pomeau chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstRowDiagnostics {
    pub alpha: f64,
    pub delta: f64,
    /// `|D_1|`
    pub cell1: f64,
    /// `|D_2|`
    pub cell2: f64,
    /// Root of `z + z^(1+alpha) = |D_1|`.
    pub z1: f64,
    /// Root of `z + z^(1+alpha) = min(|D_1| + |D_1|^(1+alpha), |D_1| + |D_2|)`.
    pub z2: f64,
    pub p11: f64,
    pub p12: f64,
    /// `2^(-1-alpha) |D_1|^alpha`; equals `2^(-1-alpha) delta^alpha` on a
    /// uniform partition.
    pub lower: f64,
    /// `|D_1|^alpha`, at most `delta^alpha`.
    pub upper: f64,
    pub matrix_p11: f64,
    pub matrix_p12: f64,
    /// Number of nonzero entries in the assembled first row.
    pub matrix_row1_support: usize,
}

/// Agreement required between the closed forms and the assembled row.
pub const FIRST_ROW_TOL: f64 = 1e-10;

impl FirstRowDiagnostics {
    pub fn matches_matrix(&self) -> bool {
        (self.p11 - self.matrix_p11).abs() <= FIRST_ROW_TOL && (self.p12 - self.matrix_p12).abs() <= FIRST_ROW_TOL
    }

    pub fn p12_in_bounds(&self) -> bool {
        self.lower <= self.p12 && self.p12 <= self.upper
    }
}

/// First-row closed forms for `mp_map(alpha)` on `partition`, cross-checked
/// against a freshly assembled matrix.
pub fn first_row_diagnostics(alpha: f64, partition: &Partition) -> Result<FirstRowDiagnostics> {
    let matrix = UlamMatrix::build(&mp_map(alpha)?, partition)?;
    first_row_diagnostics_for(alpha, &matrix)
}

/// As [`first_row_diagnostics`], reusing an assembled `mp_map(alpha)` matrix.
pub fn first_row_diagnostics_for(alpha: f64, matrix: &UlamMatrix) -> Result<FirstRowDiagnostics> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be nonnegative, got {alpha}")));
    }
    let partition = matrix.partition();
    if partition.n_cells() < 2 {
        return Err(Error::Precondition("delta not small enough: the partition has a single cell".into()));
    }
    let (d1, d2) = (partition.cell_len(0), partition.cell_len(1));
    let e = 1.0 + alpha;
    // At equality both candidates in the min coincide, so z2 = |D_1| still.
    if d1.powf(e) > d2 {
        return Err(Error::Precondition(format!(
            "delta not small enough: |D_1|^(1+alpha) = {} exceeds |D_2| = {}",
            d1.powf(e),
            d2
        )));
    }
    let solve = |target: f64, hi: f64| {
        bisect(|z| z + z.powf(e) - target, 0.0, hi, BISECTION_TOL, BISECTION_MAX_ITER)
            .ok_or_else(|| Error::Precondition(format!("no root for target {target}")))
    };
    let z1 = solve(d1, d1)?;
    let z2 = solve((d1 + d1.powf(e)).min(d1 + d2), d1 + d2)?;
    let (cols, _) = matrix.row(0);
    Ok(FirstRowDiagnostics {
        alpha,
        delta: partition.delta(),
        cell1: d1,
        cell2: d2,
        z1,
        z2,
        p11: z1 / d1,
        p12: (z2 - z1) / d1,
        lower: 2f64.powf(-e) * d1.powf(alpha),
        upper: d1.powf(alpha),
        matrix_p11: matrix.get(0, 0),
        matrix_p12: matrix.get(0, 1),
        matrix_row1_support: cols.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_maps::{counterexample_map, identity_map};

    #[test]
    fn doubling_rows() {
        let p = Partition::uniform(4).unwrap();
        let m = UlamMatrix::build(&mp_map(0.0).unwrap(), &p).unwrap();
        assert_eq!(m.row(0), (&[0usize, 1][..], &[0.5, 0.5][..]));
        assert_eq!(m.row(2), (&[0usize, 1][..], &[0.5, 0.5][..]));
        assert_eq!(m.row(3), (&[2usize, 3][..], &[0.5, 0.5][..]));
        assert_eq!(m.max_row_correction(), 0.0);
    }

    #[test]
    fn mp_first_row_has_two_entries() {
        let p = Partition::uniform(1024).unwrap();
        let m = UlamMatrix::build(&mp_map(0.5).unwrap(), &p).unwrap();
        let (cols, _) = m.row(0);
        assert_eq!(cols, &[0, 1]);
        assert!(m.max_row_correction() < ROW_SUM_TOL);
    }

    #[test]
    fn counterexample_first_row() {
        let m = UlamMatrix::build(&counterexample_map(), &Partition::uniform(12).unwrap()).unwrap();
        assert_eq!(m.row(0), (&[6usize][..], &[1.0][..]));
    }

    #[test]
    fn identity_matrix_fixes_vectors() {
        let m = UlamMatrix::build(&identity_map(), &Partition::uniform(9).unwrap()).unwrap();
        let w: Vec<f64> = (0..9).map(|i| i as f64 * 0.3 + 1.0).collect();
        assert_eq!(m.apply(&w, Direction::Left).unwrap(), w);
        assert_eq!(m.apply(&w, Direction::Right).unwrap(), w);
    }

    #[test]
    fn doubling_preserves_uniform() {
        let m = UlamMatrix::build(&mp_map(0.0).unwrap(), &Partition::uniform(4).unwrap()).unwrap();
        assert_eq!(m.apply(&[0.25; 4], Direction::Left).unwrap(), vec![0.25; 4]);
        assert!(matches!(m.apply(&[0.25; 3], Direction::Left), Err(Error::Dimension { expected: 4, got: 3 })));
    }

    #[test]
    fn unit_mass_in_first_cell_reads_first_row() {
        let m = UlamMatrix::build(&mp_map(0.5).unwrap(), &Partition::uniform(1024).unwrap()).unwrap();
        let mut e1 = vec![0.0; 1024];
        e1[0] = 1.0;
        let out = m.apply(&e1, Direction::Left).unwrap();
        assert_eq!(out[0], m.get(0, 0));
        assert_eq!(out[1], m.get(0, 1));
        assert!(out[2..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rows_respect_sparsity_bound() {
        for alpha in [0.0, 0.5, 1.5] {
            let map = mp_map(alpha).unwrap();
            let p = Partition::quasi_uniform(500, 2.0, 3).unwrap();
            let m = UlamMatrix::build(&map, &p).unwrap();
            let bound = map.branches().len() * ((map.sampled_max_slope(1025).ceil() * p.ratio_k()).ceil() as usize + 2);
            assert!(m.max_row_support() <= bound, "alpha {alpha}: {} > {bound}", m.max_row_support());
        }
    }

    #[test]
    fn diagnostics_at_alpha_zero() {
        let d = first_row_diagnostics(0.0, &Partition::uniform(64).unwrap()).unwrap();
        assert!((d.z1 - 1.0 / 128.0).abs() < 1e-15);
        assert!((d.p11 - 0.5).abs() < 1e-12 && (d.p12 - 0.5).abs() < 1e-12);
        assert!(d.matches_matrix());
    }

    #[test]
    fn diagnostics_bracket_alpha_half() {
        let p = Partition::uniform(1024).unwrap();
        let d = first_row_diagnostics(0.5, &p).unwrap();
        assert!((d.lower - 2f64.powf(-1.5) * 2f64.powi(-5)).abs() < 1e-15);
        assert!((d.upper - 0.03125).abs() < 1e-15);
        assert!(d.p12_in_bounds());
        assert!(d.matches_matrix());
        assert_eq!(d.matrix_row1_support, 2);
    }

    #[test]
    fn diagnostics_z1_range_alpha_three_halves() {
        let p = Partition::uniform(1024).unwrap();
        let d = first_row_diagnostics(1.5, &p).unwrap();
        assert!(d.cell1 / 2.0 <= d.z1 && d.z1 <= d.cell1);
        assert!(d.matches_matrix());
    }

    #[test]
    fn diagnostics_precondition() {
        let p = Partition::new(vec![0.0, 0.9, 1.0]).unwrap();
        assert!(matches!(first_row_diagnostics(0.5, &p), Err(Error::Precondition(_))));
        assert!(first_row_diagnostics(0.5, &Partition::uniform(1).unwrap()).is_err());
    }

    #[test]
    fn file_format_round_trip() {
        let m = UlamMatrix::build(&mp_map(0.5).unwrap(), &Partition::uniform(16).unwrap()).unwrap();
        let text = serde_json::to_string(&m.to_file_format()).unwrap();
        let back = UlamMatrix::from_file_format(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.n(), 16);
        for i in 0..16 {
            assert_eq!(back.row(i).0, m.row(i).0);
            for (a, b) in back.row(i).1.iter().zip(m.row(i).1) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        let mut buf = Vec::new();
        m.write_triplets(&mut buf).unwrap();
        let first = String::from_utf8(buf).unwrap().lines().next().unwrap().to_string();
        assert!(first.starts_with("1 1 "));
    }

    #[test]
    fn from_rows_rejects_non_stochastic() {
        let p = Partition::uniform(2).unwrap();
        let rows = vec![vec![(0, 0.5)], vec![(1, 1.0)]];
        assert!(matches!(UlamMatrix::from_rows(p, "x", BTreeMap::new(), rows), Err(Error::Assembly { row: 0, .. })));
    }
}
