//! Benchmark problems: classic analytic functions and a shift/rotation
//! wrapper `f(M (x - o)) + bias` that accepts external data files.

mod data_file;
pub mod registry;

pub use data_file::{load_problem_data, parse_problem_data, write_problem_data};

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{Bounds, ModelError, ObjectiveFunction};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown base function {0:?}")]
    UnknownFunction(String),
    #[error("unknown problem {0:?}")]
    UnknownProblem(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{function} needs at least {min} dimensions")]
    DimensionTooSmall { function: BaseFunction, min: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("rotation matrix is not orthogonal (max |M^T M - I| = {deviation:e})")]
    NotOrthogonal { deviation: f64 },
    #[error("optimizer component {index} ({value}) lies outside the bounds")]
    OptimumOutOfBounds { index: usize, value: f64 },
    #[error(transparent)]
    Bounds(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Tolerance on `max |M^T M - I|`.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-9;

/// Analytic test functions, each with minimum value 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseFunction {
    Sphere,
    /// High-conditioned elliptic, condition number 1e6.
    Ellipsoid,
    /// Schwefel 1.2 double sum (the "rotated ellipsoid").
    Schwefel12,
    /// Schwefel 2.22: `sum |x| + prod |x|`.
    Schwefel222,
    Rastrigin,
    Rosenbrock,
    Ackley,
    Griewank,
}

impl BaseFunction {
    pub const ALL: [BaseFunction; 8] = [
        BaseFunction::Sphere,
        BaseFunction::Ellipsoid,
        BaseFunction::Schwefel12,
        BaseFunction::Schwefel222,
        BaseFunction::Rastrigin,
        BaseFunction::Rosenbrock,
        BaseFunction::Ackley,
        BaseFunction::Griewank,
    ];

    pub fn id(self) -> &'static str {
        match self {
            BaseFunction::Sphere => "sphere",
            BaseFunction::Ellipsoid => "ellipsoid",
            BaseFunction::Schwefel12 => "schwefel-1.2",
            BaseFunction::Schwefel222 => "schwefel-2.22",
            BaseFunction::Rastrigin => "rastrigin",
            BaseFunction::Rosenbrock => "rosenbrock",
            BaseFunction::Ackley => "ackley",
            BaseFunction::Griewank => "griewank",
        }
    }

    pub fn is_unimodal(self) -> bool {
        matches!(
            self,
            BaseFunction::Sphere | BaseFunction::Ellipsoid | BaseFunction::Schwefel12 | BaseFunction::Schwefel222
        )
    }

    pub fn min_dimension(self) -> usize {
        match self {
            BaseFunction::Rosenbrock => 2,
            _ => 1,
        }
    }

    /// Minimizer in the function's own coordinates.
    pub fn canonical_optimum(self, dim: usize) -> Vec<f64> {
        match self {
            BaseFunction::Rosenbrock => vec![1.0; dim],
            _ => vec![0.0; dim],
        }
    }

    pub fn evaluate(self, z: &[f64]) -> f64 {
        match self {
            BaseFunction::Sphere => z.iter().map(|v| v * v).sum(),
            BaseFunction::Ellipsoid => {
                let n = z.len();
                if n == 1 {
                    return z[0] * z[0];
                }
                z.iter()
                    .enumerate()
                    .map(|(i, v)| 1e6f64.powf(i as f64 / (n - 1) as f64) * v * v)
                    .sum()
            }
            BaseFunction::Schwefel12 => {
                let mut partial = 0.0;
                let mut total = 0.0;
                for v in z {
                    partial += v;
                    total += partial * partial;
                }
                total
            }
            BaseFunction::Schwefel222 => {
                let sum: f64 = z.iter().map(|v| v.abs()).sum();
                let prod: f64 = z.iter().map(|v| v.abs()).product();
                sum + prod
            }
            BaseFunction::Rastrigin => z
                .iter()
                .map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
                .sum(),
            BaseFunction::Rosenbrock => z
                .windows(2)
                .map(|w| {
                    let a = w[1] - w[0] * w[0];
                    let b = w[0] - 1.0;
                    100.0 * a * a + b * b
                })
                .sum(),
            BaseFunction::Ackley => {
                let n = z.len() as f64;
                let sq: f64 = z.iter().map(|v| v * v).sum::<f64>() / n;
                let cs: f64 = z.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
                20.0 * (1.0 - (-0.2 * sq.sqrt()).exp()) + (E - cs.exp())
            }
            BaseFunction::Griewank => {
                let sum: f64 = z.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let prod: f64 = z
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                    .product();
                sum - prod + 1.0
            }
        }
    }
}

impl fmt::Display for BaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for BaseFunction {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BaseFunction::ALL
            .into_iter()
            .find(|b| b.id() == s)
            .ok_or_else(|| BenchError::UnknownFunction(s.to_owned()))
    }
}

/// Evaluates a base function by id.
pub fn evaluate_base(id: &str, x: &[f64]) -> Result<f64, BenchError> {
    Ok(id.parse::<BaseFunction>()?.evaluate(x))
}

/// A benchmark problem `f(M (x - o)) + bias` on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub base: BaseFunction,
    pub bounds: Bounds,
    pub shift: Option<Vec<f64>>,
    /// Row-major `D x D` orthogonal matrix.
    pub rotation: Option<Vec<f64>>,
    pub bias: f64,
}

impl ProblemSpec {
    /// Untransformed problem on `[-100, 100]^dim`.
    pub fn new(name: impl Into<String>, base: BaseFunction, dim: usize) -> Result<Self, BenchError> {
        if dim < base.min_dimension() {
            return Err(BenchError::DimensionTooSmall {
                function: base,
                min: base.min_dimension(),
            });
        }
        Ok(Self {
            name: name.into(),
            base,
            bounds: Bounds::uniform(dim, -100.0, 100.0)?,
            shift: None,
            rotation: None,
            bias: 0.0,
        })
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Result<Self, BenchError> {
        self.check_len(bounds.dimension())?;
        self.bounds = bounds;
        self.validate()?;
        Ok(self)
    }

    pub fn with_shift(mut self, shift: Vec<f64>) -> Result<Self, BenchError> {
        self.check_len(shift.len())?;
        self.shift = Some(shift);
        self.validate()?;
        Ok(self)
    }

    pub fn with_rotation(mut self, rotation: Vec<f64>) -> Result<Self, BenchError> {
        self.check_len_sq(rotation.len())?;
        self.rotation = Some(rotation);
        self.validate()?;
        Ok(self)
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    pub fn dimension(&self) -> usize {
        self.bounds.dimension()
    }

    fn check_len(&self, found: usize) -> Result<(), BenchError> {
        if found != self.dimension() {
            return Err(BenchError::DimensionMismatch {
                expected: self.dimension(),
                found,
            });
        }
        Ok(())
    }

    fn check_len_sq(&self, found: usize) -> Result<(), BenchError> {
        let d = self.dimension();
        if found != d * d {
            return Err(BenchError::DimensionMismatch {
                expected: d * d,
                found,
            });
        }
        Ok(())
    }

    /// Checks dimensions, orthogonality of the rotation and that the
    /// optimizer lies within the bounds.
    pub fn validate(&self) -> Result<(), BenchError> {
        let d = self.dimension();
        if d < self.base.min_dimension() {
            return Err(BenchError::DimensionTooSmall {
                function: self.base,
                min: self.base.min_dimension(),
            });
        }
        if let Some(o) = &self.shift {
            self.check_len(o.len())?;
        }
        if let Some(m) = &self.rotation {
            self.check_len_sq(m.len())?;
            let deviation = orthogonality_deviation(m, d);
            if !(deviation <= ORTHOGONALITY_TOLERANCE) {
                return Err(BenchError::NotOrthogonal { deviation });
            }
        }
        let opt = self.optimizer();
        for (index, (&v, (&lo, &hi))) in opt
            .iter()
            .zip(self.bounds.lower().iter().zip(self.bounds.upper()))
            .enumerate()
        {
            // Rounding in M^T z* may overshoot a bound by a few ulps.
            let slack = 1e-9 * (hi - lo);
            if !(v >= lo - slack && v <= hi + slack) {
                return Err(BenchError::OptimumOutOfBounds { index, value: v });
            }
        }
        Ok(())
    }

    /// The global minimizer `o + M^T z*`.
    pub fn optimizer(&self) -> Vec<f64> {
        let d = self.dimension();
        let z = self.base.canonical_optimum(d);
        let mut x = match &self.rotation {
            Some(m) => (0..d).map(|j| (0..d).map(|i| m[i * d + j] * z[i]).sum()).collect(),
            None => z,
        };
        if let Some(o) = &self.shift {
            for (v, s) in x.iter_mut().zip(o) {
                *v += s;
            }
        }
        x
    }

    pub fn optimum(&self) -> f64 {
        self.bias
    }

    fn transform(&self, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let shifted: Vec<f64> = match &self.shift {
            Some(o) => x.iter().zip(o).map(|(a, b)| a - b).collect(),
            None => x.to_vec(),
        };
        match &self.rotation {
            Some(m) => (0..d)
                .map(|i| m[i * d..(i + 1) * d].iter().zip(&shifted).map(|(a, b)| a * b).sum())
                .collect(),
            None => shifted,
        }
    }

    fn evaluate_unchecked(&self, x: &[f64]) -> f64 {
        if self.shift.is_none() && self.rotation.is_none() {
            return self.base.evaluate(x) + self.bias;
        }
        self.base.evaluate(&self.transform(x)) + self.bias
    }
}

/// `base(M (x - o)) + bias`.
pub fn evaluate_transformed(spec: &ProblemSpec, x: &[f64]) -> Result<f64, BenchError> {
    spec.check_len(x.len())?;
    Ok(spec.evaluate_unchecked(x))
}

impl ObjectiveFunction for ProblemSpec {
    fn dimension(&self) -> usize {
        ProblemSpec::dimension(self)
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension());
        self.evaluate_unchecked(x)
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(self.bias)
    }
}

/// `max |M^T M - I|` for a row-major `d x d` matrix.
pub fn orthogonality_deviation(m: &[f64], d: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in a..d {
            let dot: f64 = (0..d).map(|k| m[k * d + a] * m[k * d + b]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            let dev = (dot - target).abs();
            if dev.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(dev);
        }
    }
    worst
}

/// Row-major identity.
pub fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}
