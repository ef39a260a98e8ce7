//! Sample-based checks of the structural hypotheses on a map: the
//! piecewise-convex family (convex increasing branches whose images all
//! contain the origin) and the neutral-point conditions (local form
//! `x + C x^(1+alpha)`, noncontraction, bounded preimage count).

use serde::Serialize;

use super::{IntervalMap, Orientation};

/// Default grid size for the sampled checks.
pub const DEFAULT_SAMPLES: usize = 1025;

const CONVEXITY_TOL: f64 = -1e-12;
const ORIGIN_TOL: f64 = 1e-15;
const NONCONTRACTION_TOL: f64 = 1e-10;
const LOCAL_FIT_REL_TOL: f64 = 1e-3;
/// Scales `x = 2^-k` probed by the local fit.
const LOCAL_FIT_SCALES: std::ops::RangeInclusive<i32> = 10..=40;
/// A scale is usable only while `T(x) - x` is resolved to this relative
/// precision in double arithmetic.
const LOCAL_FIT_MAX_ROUNDING: f64 = 1e-8;
const LOCAL_FIT_CHECKED_SCALES: usize = 3;

/// A sample point where a condition failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub condition: &'static str,
    pub branch: usize,
    pub x: f64,
    /// The offending quantity: second difference, image minimum, slope or
    /// local ratio depending on `condition`.
    pub value: f64,
}

/// Fit of `(T(x) - x) / x^(1+alpha)` on a geometric grid towards zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalFit {
    /// Ratio at the smallest usable scale.
    pub c: f64,
    /// Exponent from a log-log fit of `T(x) - x`, minus one.
    pub alpha: f64,
    pub scales_used: usize,
    pub max_rel_deviation: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub map: String,
    pub is_piecewise_convex: Vec<bool>,
    pub is_increasing: Vec<bool>,
    pub origin_in_each_image: Vec<bool>,
    /// Condition (ii); `None` until [`verify_local_conditions`] runs.
    pub noncontracting: Option<bool>,
    /// Condition (iii): every point has at most one preimage per branch.
    pub branch_count_bound: usize,
    /// Condition (i); `None` until [`verify_local_conditions`] runs.
    pub local_exponent_fit: Option<LocalFit>,
    pub violations: Vec<Witness>,
}

impl FamilyReport {
    pub fn in_family(&self) -> bool {
        self.is_piecewise_convex.iter().all(|&b| b)
            && self.is_increasing.iter().all(|&b| b)
            && self.origin_in_each_image.iter().all(|&b| b)
    }

    pub fn local_conditions_hold(&self) -> bool {
        self.in_family()
            && self.noncontracting == Some(true)
            && self.local_exponent_fit.as_ref().is_some_and(|f| f.passes)
    }

    pub fn witnesses(&self, condition: &str) -> impl Iterator<Item = &Witness> {
        let condition = condition.to_owned();
        self.violations.iter().filter(move |w| w.condition == condition)
    }
}

fn grid(lo: f64, hi: f64, samples: usize) -> impl Iterator<Item = f64> {
    (0..samples).map(move |k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
}

/// Checks membership in the piecewise-convex family on `samples` grid
/// points per branch (at least 3).
pub fn verify_family_t(map: &IntervalMap, samples: usize) -> FamilyReport {
    let samples = samples.max(3);
    let mut report = FamilyReport {
        map: map.name().to_string(),
        is_piecewise_convex: Vec::new(),
        is_increasing: Vec::new(),
        origin_in_each_image: Vec::new(),
        noncontracting: None,
        branch_count_bound: map.branches().len(),
        local_exponent_fit: None,
        violations: Vec::new(),
    };
    for (i, b) in map.branches().iter().enumerate() {
        let d = b.domain();
        let xs: Vec<f64> = grid(d.lo, d.hi, samples).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| b.forward(x)).collect();
        let worst =
            (1..samples - 1).map(|k| (xs[k], ys[k - 1] - 2.0 * ys[k] + ys[k + 1])).min_by(|a, b| a.1.total_cmp(&b.1));
        let convex = match worst {
            Some((x, second)) if second < CONVEXITY_TOL => {
                report.violations.push(Witness { condition: "convexity", branch: i, x, value: second });
                false
            }
            _ => true,
        };
        report.is_piecewise_convex.push(convex);

        let increasing = b.orientation() == Orientation::Increasing;
        if !increasing {
            report.violations.push(Witness { condition: "increasing", branch: i, x: d.lo, value: b.forward(d.lo) });
        }
        report.is_increasing.push(increasing);

        let origin = b.image().lo <= ORIGIN_TOL;
        if !origin {
            report.violations.push(Witness { condition: "origin_in_image", branch: i, x: d.lo, value: b.image().lo });
        }
        report.origin_in_each_image.push(origin);
    }
    report
}

/// Adds the neutral-point conditions to the family report: (i) local form
/// `T x = x + C x^(1+alpha) + o(x^(1+alpha))`, (ii) noncontraction on a
/// sample grid, (iii) the branch-count bound on preimages.
///
/// Conditions are evaluated even when the map is outside the family, so
/// that every failure comes with a witness; [`FamilyReport::local_conditions_hold`]
/// requires family membership as well.
pub fn verify_local_conditions(map: &IntervalMap, alpha: f64, c: f64, samples: usize) -> FamilyReport {
    let samples = samples.max(3);
    let mut report = verify_family_t(map, samples);

    let mut noncontracting = true;
    for (i, b) in map.branches().iter().enumerate() {
        let d = b.domain();
        let xs: Vec<f64> = grid(d.lo, d.hi, samples).collect();
        let worst = xs
            .windows(2)
            .map(|w| (w[0], ((b.forward(w[1]) - b.forward(w[0])) / (w[1] - w[0])).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((x, slope)) = worst {
            if slope < 1.0 - NONCONTRACTION_TOL {
                noncontracting = false;
                report.violations.push(Witness { condition: "noncontracting", branch: i, x, value: slope });
            }
        }
    }
    report.noncontracting = Some(noncontracting);

    let fit = local_fit(map, alpha, c);
    if !fit.passes {
        report.violations.push(Witness {
            condition: "local_form",
            branch: 0,
            x: 2f64.powi(-LOCAL_FIT_SCALES.start()),
            value: fit.c,
        });
    }
    report.local_exponent_fit = Some(fit);
    report
}

fn local_fit(map: &IntervalMap, alpha: f64, c: f64) -> LocalFit {
    let branch = &map.branches()[0];
    let usable: Vec<(f64, f64)> = LOCAL_FIT_SCALES
        .map(|k| 2f64.powi(-k))
        .filter(|&x| branch.domain().contains(x))
        .map(|x| (x, branch.forward(x) - x))
        .filter(|&(x, d)| d > 0.0 && f64::EPSILON * x / d < LOCAL_FIT_MAX_ROUNDING)
        .collect();
    if usable.len() < LOCAL_FIT_CHECKED_SCALES {
        return LocalFit {
            c: f64::NAN,
            alpha: f64::NAN,
            scales_used: usable.len(),
            max_rel_deviation: f64::INFINITY,
            passes: false,
        };
    }
    let ratios: Vec<f64> = usable.iter().map(|&(x, d)| d / x.powf(1.0 + alpha)).collect();
    let smallest = &ratios[ratios.len() - LOCAL_FIT_CHECKED_SCALES..];
    let max_rel_deviation = smallest.iter().map(|r| ((r - c) / c).abs()).fold(0.0, f64::max);

    let (lx, ld): (Vec<f64>, Vec<f64>) = usable.iter().map(|&(x, d)| (x.ln(), d.ln())).unzip();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let md = ld.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ld).map(|(x, d)| (x - mx) * (d - md)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();

    LocalFit {
        c: *ratios.last().expect("nonempty"),
        alpha: sxy / sxx - 1.0,
        scales_used: usable.len(),
        max_rel_deviation,
        passes: max_rel_deviation < LOCAL_FIT_REL_TOL,
    }
}
