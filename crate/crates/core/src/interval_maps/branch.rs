use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::roots::{bisect, BISECTION_MAX_ITER, BISECTION_TOL};

/// Closed-form expression of a branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Formula {
    /// `offset + slope * x`
    Affine { offset: f64, slope: f64 },
    /// `c0 + c1 * x + c2 * x^exponent`
    Power { c0: f64, c1: f64, c2: f64, exponent: f64 },
}

impl Formula {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Formula::Affine { offset, slope } => offset + slope * x,
            Formula::Power { c0, c1, c2, exponent } => c0 + c1 * x + c2 * x.powf(exponent),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Increasing,
    Decreasing,
}

/// One strictly monotone piece of an interval map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    domain: Interval,
    orientation: Orientation,
    formula: Formula,
    image: Interval,
}

const MONOTONICITY_SAMPLES: usize = 257;

impl Branch {
    /// Builds a branch, checking strict monotonicity on a sample grid.
    pub fn new(domain: Interval, formula: Formula) -> Result<Self> {
        if domain.is_degenerate() || !domain.is_within_unit() {
            return Err(Error::InvalidParameter(format!(
                "branch domain {domain} must be a nondegenerate subinterval of [0, 1]"
            )));
        }
        let (ya, yb) = (formula.eval(domain.lo), formula.eval(domain.hi));
        if !ya.is_finite() || !yb.is_finite() || ya == yb {
            return Err(Error::InvalidParameter(format!("branch on {domain} is not strictly monotone")));
        }
        let orientation = if ya < yb { Orientation::Increasing } else { Orientation::Decreasing };
        let mut prev = ya;
        for k in 1..MONOTONICITY_SAMPLES {
            let x = domain.lo + domain.len() * k as f64 / (MONOTONICITY_SAMPLES - 1) as f64;
            let y = formula.eval(x);
            let ordered = match orientation {
                Orientation::Increasing => y > prev,
                Orientation::Decreasing => y < prev,
            };
            if !ordered {
                return Err(Error::InvalidParameter(format!(
                    "branch on {domain} is not strictly monotone near x = {x}"
                )));
            }
            prev = y;
        }
        let image = Interval { lo: ya.min(yb), hi: ya.max(yb) };
        Ok(Branch { domain, orientation, formula, image })
    }

    /// Replaces the sampled image with its analytically known value, used
    /// where the domain endpoint itself came out of a root solve.
    pub(crate) fn with_image(mut self, image: Interval) -> Self {
        self.image = image;
        self
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn formula(&self) -> Formula {
        self.formula
    }

    pub fn image(&self) -> Interval {
        self.image
    }

    pub fn forward(&self, x: f64) -> f64 {
        self.formula.eval(x)
    }

    /// Domain endpoint mapped to the lower end of the image.
    fn preimage_of_image_lo(&self) -> f64 {
        match self.orientation {
            Orientation::Increasing => self.domain.lo,
            Orientation::Decreasing => self.domain.hi,
        }
    }

    fn preimage_of_image_hi(&self) -> f64 {
        match self.orientation {
            Orientation::Increasing => self.domain.hi,
            Orientation::Decreasing => self.domain.lo,
        }
    }

    /// The unique `x` in the domain with `forward(x) = y`, or `None` when
    /// `y` is outside the image.
    pub fn preimage(&self, y: f64) -> Option<f64> {
        if !self.image.contains(y) {
            return None;
        }
        Some(self.clamped_preimage(y))
    }

    /// Like [`Branch::preimage`] but saturating: values below (above) the
    /// image map to the domain endpoint whose value is the image minimum
    /// (maximum). The result is monotone in `y`.
    pub fn clamped_preimage(&self, y: f64) -> f64 {
        if y <= self.image.lo {
            return self.preimage_of_image_lo();
        }
        if y >= self.image.hi {
            return self.preimage_of_image_hi();
        }
        let x = match self.formula {
            Formula::Affine { offset, slope } => (y - offset) / slope,
            Formula::Power { .. } => {
                let f = |x: f64| self.formula.eval(x) - y;
                match bisect(f, self.domain.lo, self.domain.hi, BISECTION_TOL, BISECTION_MAX_ITER) {
                    Some(x) => x,
                    // y sits inside the declared image but beyond the
                    // rounded endpoint values.
                    None => {
                        if (self.image.hi - y) < (y - self.image.lo) {
                            self.preimage_of_image_hi()
                        } else {
                            self.preimage_of_image_lo()
                        }
                    }
                }
            }
        };
        x.clamp(self.domain.lo, self.domain.hi)
    }

    /// `{x in domain : forward(x) in target}`, or `None` when that set is
    /// empty or a single point.
    pub fn preimage_of_interval(&self, target: &Interval) -> Option<Interval> {
        let hit = self.image.intersect(target)?;
        if hit.is_degenerate() {
            return None;
        }
        let a = self.clamped_preimage(hit.lo);
        let b = self.clamped_preimage(hit.hi);
        let out = Interval { lo: a.min(b), hi: a.max(b) };
        (!out.is_degenerate()).then_some(out)
    }

    /// Preimages of every breakpoint of a partition, saturated at the
    /// domain ends. Consecutive entries bound the preimage of each cell.
    pub fn breakpoint_preimages(&self, breakpoints: &[f64]) -> Vec<f64> {
        breakpoints.iter().map(|&y| self.clamped_preimage(y)).collect()
    }
}
