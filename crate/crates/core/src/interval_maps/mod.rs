//! Piecewise-monotone maps of the unit interval.
//!
//! A map is an ordered list of [`Branch`]es whose domains tile `[0, 1]`.
//! Shared endpoints belong to the branch on the right (`[a, b)` convention),
//! the last branch is closed.

mod branch;
mod family;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use branch::{Branch, Formula, Orientation};
pub use family::{verify_family_t, verify_local_conditions, FamilyReport, LocalFit, Witness, DEFAULT_SAMPLES};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::roots::{bisect, BISECTION_MAX_ITER, BISECTION_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalMap {
    name: String,
    params: BTreeMap<String, f64>,
    branches: Vec<Branch>,
}

impl IntervalMap {
    /// Assembles a map, checking that the branch domains tile `[0, 1]` from
    /// left to right.
    pub fn new(name: impl Into<String>, params: BTreeMap<String, f64>, branches: Vec<Branch>) -> Result<Self> {
        let (first, last) = match (branches.first(), branches.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::InvalidParameter("a map needs at least one branch".into())),
        };
        if first.domain().lo != 0.0 || last.domain().hi != 1.0 {
            return Err(Error::InvalidParameter("branch domains must start at 0 and end at 1".into()));
        }
        for pair in branches.windows(2) {
            if pair[0].domain().hi != pair[1].domain().lo {
                return Err(Error::InvalidParameter(format!(
                    "branch domains {} and {} do not share an endpoint",
                    pair[0].domain(),
                    pair[1].domain()
                )));
            }
        }
        for b in &branches {
            if b.image().lo < -1e-12 || b.image().hi > 1.0 + 1e-12 {
                return Err(Error::InvalidParameter(format!("branch image {} leaves [0, 1]", b.image())));
            }
        }
        Ok(IntervalMap { name: name.into(), params, branches })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, index: usize) -> Result<&Branch> {
        self.branches.get(index).ok_or_else(|| {
            Error::InvalidParameter(format!("branch index {index} out of range (map has {})", self.branches.len()))
        })
    }

    /// Index of the branch owning `x`.
    pub fn branch_of(&self, x: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(x));
        }
        let idx = self.branches.partition_point(|b| b.domain().hi <= x);
        Ok(idx.min(self.branches.len() - 1))
    }

    /// `T(x)`, clamped to `[0, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let idx = self.branch_of(x)?;
        Ok(self.branches[idx].forward(x).clamp(0.0, 1.0))
    }

    pub fn branch_preimage(&self, branch_index: usize, y: f64) -> Result<Option<f64>> {
        Ok(self.branch(branch_index)?.preimage(y))
    }

    pub fn preimage_of_interval(&self, branch_index: usize, target: &Interval) -> Result<Option<Interval>> {
        Ok(self.branch(branch_index)?.preimage_of_interval(target))
    }

    pub fn fixes_origin(&self) -> bool {
        self.branches[0].forward(0.0) == 0.0
    }

    /// Largest absolute slope over a sample grid, used for sparsity bounds.
    pub fn sampled_max_slope(&self, samples: usize) -> f64 {
        let samples = samples.max(2);
        self.branches
            .iter()
            .flat_map(|b| {
                let d = b.domain();
                (0..samples - 1).map(move |k| {
                    let x0 = d.lo + d.len() * k as f64 / (samples - 1) as f64;
                    let x1 = d.lo + d.len() * (k + 1) as f64 / (samples - 1) as f64;
                    ((b.forward(x1) - b.forward(x0)) / (x1 - x0)).abs()
                })
            })
            .fold(0.0, f64::max)
    }

    /// Loads a user map from its JSON description.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MapSpec = serde_json::from_str(text)?;
        spec.build()
    }
}

/// Right endpoint `c` of the first Manneville–Pomeau branch, the root of
/// `c + c^(1 + alpha) = 1`.
pub fn mp_critical_point(alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be a finite nonnegative number, got {alpha}")));
    }
    bisect(|c| c + c.powf(1.0 + alpha) - 1.0, 0.0, 1.0, BISECTION_TOL, BISECTION_MAX_ITER)
        .ok_or_else(|| Error::InvalidParameter("critical point not bracketed".into()))
}

/// The Manneville–Pomeau map `x + x^(1 + alpha) mod 1`.
///
/// For `alpha = 0` this is the doubling map and both branches are stored
/// in affine form.
pub fn mp_map(alpha: f64) -> Result<IntervalMap> {
    let c = if alpha == 0.0 { 0.5 } else { mp_critical_point(alpha)? };
    let (left, right) = if alpha == 0.0 {
        (Formula::Affine { offset: 0.0, slope: 2.0 }, Formula::Affine { offset: -1.0, slope: 2.0 })
    } else {
        let exponent = 1.0 + alpha;
        (
            Formula::Power { c0: 0.0, c1: 1.0, c2: 1.0, exponent },
            Formula::Power { c0: -1.0, c1: 1.0, c2: 1.0, exponent },
        )
    };
    let branches = vec![
        Branch::new(Interval { lo: 0.0, hi: c }, left)?.with_image(Interval::unit()),
        Branch::new(Interval { lo: c, hi: 1.0 }, right)?.with_image(Interval::unit()),
    ];
    let params = BTreeMap::from([("alpha".to_string(), alpha), ("c_alpha".to_string(), c)]);
    IntervalMap::new("mp", params, branches)
}

/// Uniquely ergodic three-branch map whose equal-cell Ulam approximations
/// need not converge to its invariant measure (a Dirac mass at 1/2).
pub fn counterexample_map() -> IntervalMap {
    let branches = vec![
        Branch::new(Interval { lo: 0.0, hi: 5.0 / 12.0 }, Formula::Affine { offset: 0.5, slope: 0.25 }),
        Branch::new(Interval { lo: 5.0 / 12.0, hi: 0.5 }, Formula::Affine { offset: 1.0, slope: -2.0 }),
        Branch::new(Interval { lo: 0.5, hi: 1.0 }, Formula::Affine { offset: 0.25, slope: 0.5 }),
    ]
    .into_iter()
    .collect::<Result<Vec<_>>>()
    .expect("counterexample branches are valid");
    IntervalMap::new("counterexample", BTreeMap::new(), branches).expect("counterexample domains tile [0, 1]")
}

/// `x -> x` as a single affine branch.
pub fn identity_map() -> IntervalMap {
    let b = Branch::new(Interval::unit(), Formula::Affine { offset: 0.0, slope: 1.0 }).expect("identity is monotone");
    IntervalMap::new("identity", BTreeMap::new(), vec![b]).expect("identity covers [0, 1]")
}

/// JSON description of a user map:
///
/// ```json
/// {"name": "my-map", "branches": [
///   {"domain": [0.0, 0.5], "kind": "affine", "coefficients": [0.0, 2.0]},
///   {"domain": [0.5, 1.0], "kind": "power", "coefficients": [-1.0, 1.0, 1.0, 1.5]}
/// ]}
/// ```
///
/// `affine` takes `[offset, slope]`; `power` takes `[c0, c1, c2, p]` for
/// `c0 + c1 x + c2 x^p`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapSpec {
    #[serde(default = "default_user_name")]
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub branches: Vec<BranchSpec>,
}

fn default_user_name() -> String {
    "user".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchSpec {
    pub domain: [f64; 2],
    pub kind: String,
    pub coefficients: Vec<f64>,
}

impl BranchSpec {
    fn formula(&self) -> Result<Formula> {
        match (self.kind.as_str(), self.coefficients.as_slice()) {
            ("affine", &[offset, slope]) => Ok(Formula::Affine { offset, slope }),
            ("power", &[c0, c1, c2, exponent]) => Ok(Formula::Power { c0, c1, c2, exponent }),
            ("affine", c) | ("power", c) => {
                Err(Error::InvalidParameter(format!("branch kind {} got {} coefficients", self.kind, c.len())))
            }
            (other, _) => Err(Error::InvalidParameter(format!("unknown branch kind {other:?}"))),
        }
    }
}

impl MapSpec {
    pub fn build(&self) -> Result<IntervalMap> {
        let branches = self
            .branches
            .iter()
            .map(|b| Branch::new(Interval::new(b.domain[0], b.domain[1])?, b.formula()?))
            .collect::<Result<Vec<_>>>()?;
        IntervalMap::new(self.name.clone(), self.params.clone(), branches)
    }
}
