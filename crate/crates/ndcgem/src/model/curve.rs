use serde::{Deserialize, Serialize};

/// Convex piecewise-linear curve given by its breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseCurve {
    pub breakpoints: Vec<(f64, f64)>,
}

impl PiecewiseCurve {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Self {
        Self { breakpoints }
    }

    pub fn validate(&self) -> Result<(), String> {
        let b = &self.breakpoints;
        if b.len() < 2 {
            return Err("curve needs at least 2 breakpoints".into());
        }
        if b.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err("curve breakpoints must be finite".into());
        }
        if b.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err("curve x values must be strictly increasing".into());
        }
        let s = self.slopes();
        if s.windows(2).any(|w| w[1] < w[0] - 1e-12) {
            return Err("curve is not convex".into());
        }
        if s[0] < 0.0 {
            return Err("curve is not nondecreasing".into());
        }
        Ok(())
    }

    pub fn x_min(&self) -> f64 {
        self.breakpoints[0].0
    }

    pub fn x_max(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1].0
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.breakpoints
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }

    /// `(slope, intercept)` of every segment; the curve is their pointwise
    /// maximum.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        self.breakpoints
            .windows(2)
            .map(|w| {
                let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                (s, w[0].1 - s * w[0].0)
            })
            .collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.segments()
            .into_iter()
            .map(|(s, c)| s * x + c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Slope of the segment active at `x`; at a breakpoint, the segment to
    /// its right.
    pub fn right_slope(&self, x: f64) -> f64 {
        let s = self.slopes();
        let b = &self.breakpoints;
        for k in 0..s.len() {
            if x < b[k + 1].0 {
                return s[k];
            }
        }
        s[s.len() - 1]
    }
}
