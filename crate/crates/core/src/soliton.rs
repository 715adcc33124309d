//! Closed-form solitary waves on a single edge.
//!
//! With `A = 0` and `β + c > 0` the travelling-wave profile is
//!
//! ```text
//! φ(y) = -(3(β+c)/γ) · sech²( √((β+c)/α)/2 · (y - y0) )
//! ```
//!
//! and `u(t, x) = φ(x - c t)`. All derivatives are coded from the
//! `sech²`/`tanh` identities, never by differencing.

use thiserror::Error;

use crate::graph::EdgeParams;

/// Beyond this `|z|`, `sech z` is treated as exactly zero.
const SECH_CLAMP: f64 = 350.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolitonError {
    #[error("no solitary wave: beta + c = {0} is not positive")]
    NonPositiveMargin(f64),
    #[error("invalid edge parameters: {0}")]
    InvalidParams(String),
}

fn sech(z: f64) -> f64 {
    if z.abs() > SECH_CLAMP {
        0.0
    } else {
        2.0 / (z.exp() + (-z).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonProfile {
    params: EdgeParams,
    amplitude: f64,
    width_rate: f64,
}

impl SolitonProfile {
    pub fn new(p: &EdgeParams) -> Result<Self, SolitonError> {
        if !(p.alpha > 0.0) || p.gamma == 0.0 || !p.gamma.is_finite() {
            return Err(SolitonError::InvalidParams(format!(
                "alpha = {}, gamma = {}",
                p.alpha, p.gamma
            )));
        }
        let m = p.margin();
        if !(m > 0.0) {
            return Err(SolitonError::NonPositiveMargin(m));
        }
        Ok(Self {
            params: *p,
            amplitude: -3.0 * m / p.gamma,
            width_rate: (m / p.alpha).sqrt() / 2.0,
        })
    }

    pub fn params(&self) -> &EdgeParams {
        &self.params
    }

    /// Peak value `φ(y0)`.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Inverse width `k = √((β+c)/α)/2` of the `sech²` argument.
    pub fn width_rate(&self) -> f64 {
        self.width_rate
    }

    pub fn y0(&self) -> f64 {
        self.params.y0
    }

    pub fn speed(&self) -> f64 {
        self.params.c
    }

    /// Copy with the amplitude multiplied by `factor`. The result is no
    /// longer a KdV solution; it exists for negative tests.
    pub fn with_amplitude_scaled(&self, factor: f64) -> Self {
        Self {
            amplitude: self.amplitude * factor,
            ..*self
        }
    }

    /// `[φ, φ', φ'', φ''']` at `y`.
    pub fn derivatives(&self, y: f64) -> [f64; 4] {
        let k = self.width_rate;
        let z = k * (y - self.params.y0);
        let s = sech(z);
        let s2 = s * s;
        let th = z.tanh();
        let a = self.amplitude;
        // d^n/dz^n sech²z in terms of s2 = sech²z and th = tanh z
        let d0 = s2;
        let d1 = -2.0 * s2 * th;
        let d2 = 4.0 * s2 - 6.0 * s2 * s2;
        let d3 = th * s2 * (24.0 * s2 - 8.0);
        [a * d0, a * k * d1, a * k * k * d2, a * k * k * k * d3]
    }

    /// `φ⁽ᵒʳᵈᵉʳ⁾(y)` for `order` in `0..=3`.
    pub fn eval(&self, y: f64, order: usize) -> f64 {
        assert!(order <= 3, "derivative order {order} not available");
        self.derivatives(y)[order]
    }

    /// `u(t, x) = φ(x - c t)`.
    pub fn travelling_wave(&self, t: f64, x: f64) -> f64 {
        self.eval(x - self.params.c * t, 0)
    }

    /// `-α φ''' + (β+c) φ' + γ φ φ'`, zero for an exact solution.
    pub fn kdv_residual(&self, y: f64) -> f64 {
        let [phi, d1, _, d3] = self.derivatives(y);
        let p = &self.params;
        -p.alpha * d3 + p.margin() * d1 + p.gamma * phi * d1
    }

    /// Rows `(y, φ, φ', φ'', φ''', residual)` on `y_min, y_min + step, ...`
    /// up to `y_max`.
    pub fn sample(&self, y_min: f64, y_max: f64, step: f64) -> Vec<[f64; 6]> {
        let n = ((y_max - y_min) / step).round() as usize + 1;
        (0..n)
            .map(|i| {
                let y = y_min + i as f64 * step;
                let [a, b, c, d] = self.derivatives(y);
                [y, a, b, c, d, self.kdv_residual(y)]
            })
            .collect()
    }
}

/// [`SolitonProfile::new`] as a free function.
pub fn build_profile(p: &EdgeParams) -> Result<SolitonProfile, SolitonError> {
    SolitonProfile::new(p)
}
