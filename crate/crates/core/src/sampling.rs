//! Heavy-tailed variates: Cauchy via the inverse CDF and general Lévy
//! alpha-stable draws via the Chambers-Mallows-Stuck transform.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use thiserror::Error;

use crate::rng::RngStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("scale must be positive and finite, got {0}")]
    Scale(f64),
    #[error("location must be finite, got {0}")]
    Location(f64),
    #[error("stability alpha must lie in (0, 2], got {0}")]
    Alpha(f64),
    #[error("skewness beta must lie in [-1, 1], got {0}")]
    Beta(f64),
}

/// Cauchy location `x0` and scale `gamma > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyParams {
    x0: f64,
    gamma: f64,
}

impl CauchyParams {
    pub fn new(x0: f64, gamma: f64) -> Result<Self, SamplingError> {
        if !x0.is_finite() {
            return Err(SamplingError::Location(x0));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(SamplingError::Scale(gamma));
        }
        Ok(Self { x0, gamma })
    }

    pub fn location(&self) -> f64 {
        self.x0
    }

    pub fn scale(&self) -> f64 {
        self.gamma
    }
}

pub fn cauchy_pdf(x: f64, p: CauchyParams) -> f64 {
    let d = x - p.x0;
    p.gamma / (d * d + p.gamma * p.gamma) / PI
}

pub fn cauchy_cdf(x: f64, p: CauchyParams) -> f64 {
    ((x - p.x0) / p.gamma).atan() / PI + 0.5
}

/// Inverse CDF of the Cauchy distribution for `u` in `(0, 1)`.
pub fn cauchy_quantile(u: f64, p: CauchyParams) -> f64 {
    p.x0 + p.gamma * (PI * (u - 0.5)).tan()
}

/// Uniform on the open interval `(0, 1)`; an exact zero is redrawn.
pub(crate) fn open_uniform<R: RngStream + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = rng.uniform();
        if u > 0.0 {
            return u;
        }
    }
}

/// One Cauchy draw, consuming one uniform (more only if a zero comes up).
pub fn cauchy_sample<R: RngStream + ?Sized>(p: CauchyParams, rng: &mut R) -> f64 {
    cauchy_quantile(open_uniform(rng), p)
}

/// `x0 + gamma * tan(pi (u - 1/2))` without parameter validation. Used on the
/// hot path where the scale is a compile-time constant.
pub(crate) fn cauchy_sample_unchecked<R: RngStream + ?Sized>(x0: f64, gamma: f64, rng: &mut R) -> f64 {
    x0 + gamma * (PI * (open_uniform(rng) - 0.5)).tan()
}

/// Parameters of `S_alpha(beta, c, mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    alpha: f64,
    beta: f64,
    c: f64,
    mu: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, c: f64, mu: f64) -> Result<Self, SamplingError> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(SamplingError::Alpha(alpha));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(SamplingError::Beta(beta));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(SamplingError::Scale(c));
        }
        if !mu.is_finite() {
            return Err(SamplingError::Location(mu));
        }
        Ok(Self { alpha, beta, c, mu })
    }

    /// Symmetric (`beta = 0`) law with the given stability, scale and location.
    pub fn symmetric(alpha: f64, c: f64, mu: f64) -> Result<Self, SamplingError> {
        Self::new(alpha, 0.0, c, mu)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn scale(&self) -> f64 {
        self.c
    }

    pub fn location(&self) -> f64 {
        self.mu
    }

    pub fn with_location(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }
}

/// Chambers-Mallows-Stuck map from `v` in `(-pi/2, pi/2)` and `w > 0` to a
/// draw of `S_alpha(beta, c, mu)`.
pub fn stable_transform(p: StableParams, v: f64, w: f64) -> f64 {
    let StableParams { alpha, beta, c, mu } = p;
    if alpha == 1.0 {
        // (2/pi)(pi/2 + beta v) tan v is split as tan v + (2/pi) beta v tan v
        // so that beta = 0 reduces to tan v exactly.
        let skew = if beta == 0.0 {
            0.0
        } else {
            let log_term = (FRAC_PI_2 * w * v.cos() / (FRAC_PI_2 + beta * v)).ln();
            FRAC_2_PI * beta * (v * v.tan() - log_term)
        };
        let x = v.tan() + skew;
        let shift = if beta == 0.0 { 0.0 } else { FRAC_2_PI * beta * c * c.ln() };
        c * x + shift + mu
    } else {
        let t = (PI * alpha / 2.0).tan();
        let b = (beta * t).atan() / alpha;
        let s = (1.0 + beta * beta * t * t).powf(1.0 / (2.0 * alpha));
        let a_vb = alpha * (v + b);
        let x = s * a_vb.sin() / v.cos().powf(1.0 / alpha)
            * ((v - a_vb).cos() / w).powf((1.0 - alpha) / alpha);
        c * x + mu
    }
}

/// One stable draw. Consumes `V` (an open uniform mapped to
/// `(-pi/2, pi/2)`) then `W` (a standard exponential, redrawn if zero).
pub fn stable_sample<R: RngStream + ?Sized>(p: StableParams, rng: &mut R) -> f64 {
    let v = PI * (open_uniform(rng) - 0.5);
    let w = loop {
        let w = rng.standard_exponential();
        if w > 0.0 {
            break w;
        }
    };
    stable_transform(p, v, w)
}
