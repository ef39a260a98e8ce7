//! Monotonic measures in normal form: an atom at the origin plus a
//! non-increasing density, piecewise constant on a partition.
//!
//! Every measure the pipeline produces has this form: projections onto a
//! partition are absolutely continuous, and push-forwards of step measures
//! are re-averaged onto an output partition. An atom can only persist at a
//! fixed origin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::interval_maps::IntervalMap;
use crate::partitions::Partition;

/// Tolerance on total mass for probability measures.
pub const MASS_TOL: f64 = 1e-12;
/// Slack in the average-density comparison.
pub const KEY_INEQUALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMeasure {
    pub atom0: f64,
    #[serde(flatten)]
    pub partition: Partition,
    pub densities: Vec<f64>,
}

/// Outcome of [`StepMeasure::is_monotonic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Monotonicity {
    pub holds: bool,
    /// First cell `i` with `f[i+1] > f[i] + tol`.
    pub witness: Option<usize>,
}

impl StepMeasure {
    /// A probability measure: nonnegative parts summing to one.
    pub fn new(atom0: f64, partition: Partition, densities: Vec<f64>) -> Result<Self> {
        let mu = Self::finite(atom0, partition, densities)?;
        let total = mu.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidParameter(format!("total mass {total} is not 1")));
        }
        Ok(mu)
    }

    /// A finite nonnegative measure of any total mass.
    pub fn finite(atom0: f64, partition: Partition, densities: Vec<f64>) -> Result<Self> {
        if densities.len() != partition.n_cells() {
            return Err(Error::Dimension { expected: partition.n_cells(), got: densities.len() });
        }
        if !(atom0 >= 0.0) || !atom0.is_finite() {
            return Err(Error::InvalidParameter(format!("atom weight {atom0} must be nonnegative")));
        }
        if let Some(f) = densities.iter().find(|f| !(**f >= 0.0) || !f.is_finite()) {
            return Err(Error::InvalidParameter(format!("density {f} must be nonnegative and finite")));
        }
        Ok(StepMeasure { atom0, partition, densities })
    }

    /// Lebesgue measure on `[0, 1]`.
    pub fn lebesgue(partition: Partition) -> Self {
        let n = partition.n_cells();
        StepMeasure { atom0: 0.0, partition, densities: vec![1.0; n] }
    }

    /// Unit mass at the origin.
    pub fn dirac_at_zero(partition: Partition) -> Self {
        let n = partition.n_cells();
        StepMeasure { atom0: 1.0, partition, densities: vec![0.0; n] }
    }

    /// Builds the measure with the given cell masses (no atom).
    pub fn from_cell_masses(partition: Partition, masses: &[f64]) -> Result<Self> {
        if masses.len() != partition.n_cells() {
            return Err(Error::Dimension { expected: partition.n_cells(), got: masses.len() });
        }
        let densities = masses.iter().enumerate().map(|(i, m)| m / partition.cell_len(i)).collect();
        Self::finite(0.0, partition, densities)
    }

    /// Discretizes a density by its cell averages, approximated with the
    /// midpoint rule on `sub` points per cell.
    pub fn from_density_fn(partition: Partition, f: impl Fn(f64) -> f64, sub: usize) -> Result<Self> {
        let sub = sub.max(1);
        let densities = partition
            .cells()
            .map(|c| (0..sub).map(|k| f(c.lo + c.len() * (k as f64 + 0.5) / sub as f64)).sum::<f64>() / sub as f64)
            .collect();
        Self::finite(0.0, partition, densities)
    }

    pub fn cell_mass(&self, i: usize) -> f64 {
        self.densities[i] * self.partition.cell_len(i)
    }

    pub fn cell_masses(&self) -> Vec<f64> {
        (0..self.densities.len()).map(|i| self.cell_mass(i)).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.atom0 + (0..self.densities.len()).map(|i| self.cell_mass(i)).sum::<f64>()
    }

    /// Mass of the absolutely continuous part on `iv`.
    pub fn ac_mass(&self, iv: &Interval) -> f64 {
        self.partition.overlapping(iv).fold(0.0, |acc, i| acc + self.densities[i] * self.partition.cell(i).overlap(iv))
    }

    /// `mu(I)` for a closed interval `I`.
    pub fn measure_of_interval(&self, iv: &Interval) -> f64 {
        let atom = if iv.contains(0.0) { self.atom0 } else { 0.0 };
        atom + self.ac_mass(iv)
    }

    /// `mu(I) / |I|`, and zero for a degenerate interval.
    pub fn avg_density(&self, iv: &Interval) -> f64 {
        if iv.len() > 0.0 {
            self.measure_of_interval(iv) / iv.len()
        } else {
            0.0
        }
    }

    pub fn is_monotonic(&self, tol: f64) -> Monotonicity {
        let witness = self.densities.windows(2).position(|w| w[1] > w[0] + tol);
        Monotonicity { holds: witness.is_none(), witness }
    }

    /// Slopes of `x -> mu((0, x])` between consecutive breakpoints, read
    /// off the cumulative function rather than the stored densities.
    pub fn cdf_slopes(&self) -> Vec<f64> {
        let b = self.partition.breakpoints();
        let cdf: Vec<f64> = b.iter().map(|&x| self.ac_mass(&Interval { lo: 0.0, hi: x })).collect();
        cdf.windows(2).zip(b.windows(2)).map(|(c, x)| (c[1] - c[0]) / (x[1] - x[0])).collect()
    }

    pub fn cdf_slopes_non_increasing(&self, tol: f64) -> bool {
        self.cdf_slopes().windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

/// Two nondegenerate intervals with `inf A <= inf B` and `sup A <= sup B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalPair {
    a: Interval,
    b: Interval,
}

impl IntervalPair {
    pub fn new(a: Interval, b: Interval) -> Result<Self> {
        if a.is_degenerate() || b.is_degenerate() || !a.is_within_unit() || !b.is_within_unit() {
            return Err(Error::Precondition(format!("{a} and {b} must be nondegenerate subintervals of [0, 1]")));
        }
        if a.lo > b.lo || a.hi > b.hi {
            return Err(Error::Precondition(format!("{a} is not to the left of {b}")));
        }
        Ok(IntervalPair { a, b })
    }

    pub fn a(&self) -> Interval {
        self.a
    }

    pub fn b(&self) -> Interval {
        self.b
    }
}

/// Average density decays to the right: `mu(A)/|A| >= mu(B)/|B|` for every
/// monotonic `mu` and ordered pair `A <= B`.
pub fn check_key_inequality(mu: &StepMeasure, pair: &IntervalPair) -> Result<bool> {
    let m = mu.is_monotonic(KEY_INEQUALITY_TOL);
    if !m.holds {
        return Err(Error::Precondition(format!("measure is not monotonic (cell {:?})", m.witness)));
    }
    Ok(mu.avg_density(&pair.a) >= mu.avg_density(&pair.b) - KEY_INEQUALITY_TOL)
}

/// Random monotonic probability measure on the uniform partition with
/// `n_cells` cells. See [`random_monotonic_on`].
pub fn random_monotonic(seed: u64, n_cells: usize, atom_prob: f64) -> Result<StepMeasure> {
    let partition = Partition::uniform(n_cells)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(random_monotonic_on(&mut rng, partition, atom_prob))
}

/// Draws an atom (zero with probability `1 - atom_prob`, else uniform in
/// `[0, 0.9]`) and a non-increasing density built from nonnegative
/// increments accumulated from the right, some of them zero.
pub fn random_monotonic_on<R: Rng>(rng: &mut R, partition: Partition, atom_prob: f64) -> StepMeasure {
    let atom0 = if rng.gen::<f64>() < atom_prob { rng.gen_range(0.0..=0.9) } else { 0.0 };
    let n = partition.n_cells();
    let mut densities = vec![0.0; n];
    let mut acc = rng.gen_range(0.0..1.0);
    for f in densities.iter_mut().rev() {
        if rng.gen::<f64>() >= 0.2 {
            acc += rng.gen::<f64>();
        }
        *f = acc;
    }
    if densities[0] == 0.0 {
        densities.iter_mut().for_each(|f| *f = 1.0);
    }
    let ac: f64 = densities.iter().enumerate().map(|(i, f)| f * partition.cell_len(i)).sum();
    let scale = (1.0 - atom0) / ac;
    // Rescaling by a positive factor keeps the order, including ties.
    densities.iter_mut().for_each(|f| *f *= scale);
    StepMeasure { atom0, partition, densities }
}

/// Conditional expectation onto `target`: average `mu` over each cell.
/// The result is absolutely continuous; an atom at the origin is spread
/// over the first cell.
pub fn project(mu: &StepMeasure, target: &Partition) -> StepMeasure {
    let densities = target.cells().map(|c| mu.measure_of_interval(&c) / c.len()).collect();
    StepMeasure { atom0: 0.0, partition: target.clone(), densities }
}

/// Push-forward `mu(T^-1 A)`, averaged onto the cells of `output`.
///
/// Each output cell collects the masses of its preimages under every
/// branch. The atom at the origin stays an atom when `T(0) = 0`; otherwise
/// it lands in the cell owning `T(0)` and becomes density.
pub fn pushforward(map: &IntervalMap, mu: &StepMeasure, output: &Partition) -> StepMeasure {
    let n = output.n_cells();
    let mut masses = vec![0.0; n];
    for branch in map.branches() {
        let xs = branch.breakpoint_preimages(output.breakpoints());
        for (j, w) in xs.windows(2).enumerate() {
            let iv = Interval { lo: w[0].min(w[1]), hi: w[0].max(w[1]) };
            if iv.len() > 0.0 {
                masses[j] += mu.ac_mass(&iv);
            }
        }
    }
    let mut atom0 = 0.0;
    if mu.atom0 > 0.0 {
        let image = map.branches()[0].forward(0.0);
        if image == 0.0 {
            atom0 = mu.atom0;
        } else {
            masses[output.locate_clamped(image)] += mu.atom0;
        }
    }
    let densities = masses.iter().enumerate().map(|(j, m)| m / output.cell_len(j)).collect();
    StepMeasure { atom0, partition: output.clone(), densities }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_maps::{counterexample_map, mp_map};

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn steps(n: usize, densities: Vec<f64>) -> StepMeasure {
        StepMeasure::finite(0.0, Partition::uniform(n).unwrap(), densities).unwrap()
    }

    #[test]
    fn measure_of_interval_examples() {
        let leb = StepMeasure::lebesgue(Partition::uniform(8).unwrap());
        assert!((leb.measure_of_interval(&iv(0.25, 0.75)) - 0.5).abs() < 1e-15);

        let atom = StepMeasure::dirac_at_zero(Partition::uniform(8).unwrap());
        assert_eq!(atom.measure_of_interval(&iv(0.0, 0.1)), 1.0);
        assert_eq!(atom.measure_of_interval(&iv(0.1, 1.0)), 0.0);

        // closed form: integral of 1 - x over [1/4, 1/2] is 5/32
        let f = StepMeasure::from_density_fn(Partition::uniform(10_000).unwrap(), |x| 1.0 - x, 1).unwrap();
        assert!((f.measure_of_interval(&iv(0.25, 0.5)) - 5.0 / 32.0).abs() < 1e-4);
    }

    #[test]
    fn average_density_remark_values() {
        // Closed-form oracle: for f = 1 - x, avg over [0,1] is 1/2 and
        // over [1/4,1/2] is 4 * 5/32 = 5/8. For f = 2 - 2x both double.
        let p = Partition::uniform(10_000).unwrap();
        let f = StepMeasure::from_density_fn(p.clone(), |x| 1.0 - x, 1).unwrap();
        assert!((f.avg_density(&iv(0.0, 1.0)) - 0.5).abs() < 1e-12);
        assert!((f.avg_density(&iv(0.25, 0.5)) - 0.625).abs() < 1e-12);
        let g = StepMeasure::new(0.0, p, f.densities.iter().map(|d| 2.0 * d).collect()).unwrap();
        assert!((g.avg_density(&iv(0.0, 1.0)) - 1.0).abs() < 1e-12);
        assert!((g.avg_density(&iv(0.25, 0.5)) - 1.25).abs() < 1e-12);
        // the pair violates sup A <= sup B, and so does the inequality
        assert!(IntervalPair::new(iv(0.0, 1.0), iv(0.25, 0.5)).is_err());
    }

    #[test]
    fn average_density_trivia() {
        let leb = StepMeasure::lebesgue(Partition::uniform(7).unwrap());
        assert!((leb.avg_density(&iv(0.1, 0.83)) - 1.0).abs() < 1e-14);
        assert_eq!(leb.avg_density(&iv(0.3, 0.3)), 0.0);
        let atom = StepMeasure::dirac_at_zero(Partition::uniform(7).unwrap());
        assert_eq!(atom.avg_density(&iv(0.5, 0.6)), 0.0);
    }

    #[test]
    fn monotonicity_examples() {
        assert!(steps(3, vec![3.0, 2.0, 1.0]).is_monotonic(0.0).holds);
        let m = steps(2, vec![1.0, 2.0]).is_monotonic(0.0);
        assert!(!m.holds);
        assert_eq!(m.witness, Some(0));
        let mixed = StepMeasure::new(0.5, Partition::uniform(4).unwrap(), vec![0.5; 4]).unwrap();
        assert!(mixed.is_monotonic(0.0).holds);
        assert!(mixed.cdf_slopes_non_increasing(1e-12));
    }

    #[test]
    fn key_inequality_examples() {
        let mu = StepMeasure::new(0.0, Partition::uniform(2).unwrap(), vec![1.5, 0.5]).unwrap();
        let a = iv(0.1, 0.4);
        assert!(check_key_inequality(&mu, &IntervalPair::new(a, a).unwrap()).unwrap());
        let mu = steps(2, vec![2.0, 1.0]);
        let pair = IntervalPair::new(iv(0.0, 0.5), iv(0.5, 1.0)).unwrap();
        assert!(check_key_inequality(&mu, &pair).unwrap());
        let bad = steps(2, vec![1.0, 2.0]);
        assert!(matches!(check_key_inequality(&bad, &pair), Err(Error::Precondition(_))));
    }

    #[test]
    fn random_monotonic_contract() {
        let mu = random_monotonic(3, 50, 0.0).unwrap();
        assert_eq!(mu.atom0, 0.0);
        assert!(mu.is_monotonic(0.0).holds);
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        assert_eq!(mu, random_monotonic(3, 50, 0.0).unwrap());
        let with_atom = random_monotonic(5, 50, 1.0).unwrap();
        assert!(with_atom.atom0 > 0.0 && with_atom.atom0 <= 0.9);
        assert!((with_atom.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn project_examples() {
        let p = Partition::uniform(6).unwrap();
        let mu = StepMeasure::new(0.0, p.clone(), vec![2.0, 1.5, 1.0, 0.75, 0.5, 0.25]).unwrap();
        let q = project(&mu, &p);
        for (a, b) in q.densities.iter().zip(&mu.densities) {
            assert!((a - b).abs() < 1e-14);
        }

        let target = Partition::uniform(10).unwrap();
        let atom = project(&StepMeasure::dirac_at_zero(p), &target);
        assert_eq!(atom.atom0, 0.0);
        assert!((atom.densities[0] - 10.0).abs() < 1e-12);
        assert!(atom.densities[1..].iter().all(|&d| d == 0.0));

        // closed form: f = 2 - 2x has masses 3/4 and 1/4 on the halves
        let f = StepMeasure::from_density_fn(Partition::uniform(10_000).unwrap(), |x| 2.0 - 2.0 * x, 1).unwrap();
        let halves = project(&f, &Partition::uniform(2).unwrap());
        assert!((halves.cell_mass(0) - 0.75).abs() < 1e-10);
        assert!((halves.densities[0] - 1.5).abs() < 1e-10);
        assert!((halves.densities[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn pushforward_examples() {
        let p = Partition::uniform(64).unwrap();
        let leb = pushforward(&mp_map(0.0).unwrap(), &StepMeasure::lebesgue(p.clone()), &p);
        assert!(leb.densities.iter().all(|d| (d - 1.0).abs() < 1e-13));

        for alpha in [0.0, 0.5, 1.5] {
            let out = pushforward(&mp_map(alpha).unwrap(), &StepMeasure::dirac_at_zero(p.clone()), &p);
            assert_eq!(out.atom0, 1.0);
            assert!(out.densities.iter().all(|&d| d == 0.0));
        }

        // T(0) = 1/2 for the counterexample: the atom becomes cell mass
        let twelve = Partition::uniform(12).unwrap();
        let out = pushforward(&counterexample_map(), &StepMeasure::dirac_at_zero(p), &twelve);
        assert_eq!(out.atom0, 0.0);
        assert!((out.cell_mass(6) - 1.0).abs() < 1e-15);
        assert!((out.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pushforward_conserves_mass_on_counterexample() {
        let mu = random_monotonic(11, 37, 0.5).unwrap();
        let out = pushforward(&counterexample_map(), &mu, &Partition::uniform(120).unwrap());
        assert!((out.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_shape() {
        let mu = StepMeasure::new(0.25, Partition::uniform(2).unwrap(), vec![1.0, 0.5]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&mu).unwrap();
        assert_eq!(v["atom0"], 0.25);
        assert_eq!(v["breakpoints"].as_array().unwrap().len(), 3);
        assert_eq!(v["densities"].as_array().unwrap().len(), 2);
        let back: StepMeasure = serde_json::from_value(v).unwrap();
        assert_eq!(back, mu);
    }
}
