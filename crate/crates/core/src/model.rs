//! Domain types shared by every optimizer: bounds, individuals, the
//! population with its external archive, and the objective contract.

use thiserror::Error;

use crate::rng::RngStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("bounds must have at least one dimension")]
    EmptyBounds,
    #[error("bounds have {lower} lower and {upper} upper entries")]
    BoundsLength { lower: usize, upper: usize },
    #[error("invalid bounds at index {index}: lower {lower} must be below upper {upper}")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("population needs at least {needed} members, got {found}")]
    PopulationTooSmall { needed: usize, found: usize },
    #[error("objective returned NaN")]
    NanObjective,
}

/// Box constraints `lower[j] < upper[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ModelError> {
        if lower.len() != upper.len() {
            return Err(ModelError::BoundsLength {
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(ModelError::EmptyBounds);
        }
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            // Also rejects NaN.
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(ModelError::InvalidBounds {
                    index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The hypercube `[lo, hi]^dim`.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self, ModelError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }
}

/// A bounded minimization problem.
///
/// `evaluate` must be deterministic in `x`; runs executing concurrently may
/// share one objective.
pub trait ObjectiveFunction {
    fn dimension(&self) -> usize;

    fn bounds(&self) -> &Bounds;

    fn evaluate(&self, x: &[f64]) -> f64;

    /// Known global minimum `f(x*)`, when there is one.
    fn optimum_value(&self) -> Option<f64> {
        None
    }
}

/// Objective built from a closure.
pub struct FnObjective<F> {
    bounds: Bounds,
    optimum: Option<f64>,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64]) -> f64,
{
    pub fn new(bounds: Bounds, f: F) -> Self {
        Self {
            bounds,
            optimum: None,
            f,
        }
    }

    pub fn with_optimum(mut self, value: f64) -> Self {
        self.optimum = Some(value);
        self
    }
}

impl<F> ObjectiveFunction for FnObjective<F>
where
    F: Fn(&[f64]) -> f64,
{
    fn dimension(&self) -> usize {
        self.bounds.dimension()
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn optimum_value(&self) -> Option<f64> {
        self.optimum
    }
}

impl<T: ObjectiveFunction + ?Sized> ObjectiveFunction for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn bounds(&self) -> &Bounds {
        (**self).bounds()
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        (**self).evaluate(x)
    }

    fn optimum_value(&self) -> Option<f64> {
        (**self).optimum_value()
    }
}

/// A decision vector with its cached objective value and the control
/// parameters it was produced with.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub x: Vec<f64>,
    pub f: f64,
    pub scale: f64,
    pub crossover_rate: f64,
}

impl Individual {
    pub fn new(x: Vec<f64>, f: f64) -> Self {
        Self {
            x,
            f,
            scale: 0.5,
            crossover_rate: 0.5,
        }
    }
}

/// Members, external archive and budget counters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<Individual>,
    pub archive: Vec<Individual>,
    pub generation: usize,
    pub nfe: usize,
    pub nfe_max: usize,
}

impl Population {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Index of the member with the lowest objective value. The first one
    /// wins on ties.
    pub fn best_index(&self) -> usize {
        best_index(&self.members)
    }

    pub fn best(&self) -> &Individual {
        &self.members[self.best_index()]
    }

    /// Stable sort, best first.
    pub fn sort_best_first(&mut self) {
        sort_best_first(&mut self.members);
    }

    pub fn remaining_budget(&self) -> usize {
        self.nfe_max.saturating_sub(self.nfe)
    }
}

pub(crate) fn best_index(members: &[Individual]) -> usize {
    let mut best = 0;
    for (i, m) in members.iter().enumerate().skip(1) {
        if m.f < members[best].f {
            best = i;
        }
    }
    best
}

pub(crate) fn sort_best_first(members: &mut [Individual]) {
    members.sort_by(|a, b| a.f.total_cmp(&b.f));
}

/// Evaluates `x`, rejecting NaN.
pub fn evaluate_checked<O: ObjectiveFunction + ?Sized>(obj: &O, x: &[f64]) -> Result<f64, ModelError> {
    let f = obj.evaluate(x);
    if f.is_nan() {
        Err(ModelError::NanObjective)
    } else {
        Ok(f)
    }
}

/// Samples `np` members uniformly inside the bounds and evaluates each one.
///
/// Components are drawn member by member, dimension by dimension:
/// `x[j] = lower[j] + u * (upper[j] - lower[j])`.
pub fn initialize_population<O, R>(
    np: usize,
    dimension: usize,
    nfe_max: usize,
    obj: &O,
    rng: &mut R,
) -> Result<Population, ModelError>
where
    O: ObjectiveFunction + ?Sized,
    R: RngStream + ?Sized,
{
    if np < 4 {
        return Err(ModelError::PopulationTooSmall { needed: 4, found: np });
    }
    if obj.dimension() != dimension {
        return Err(ModelError::DimensionMismatch {
            expected: dimension,
            found: obj.dimension(),
        });
    }
    let bounds = obj.bounds();
    if bounds.dimension() != dimension {
        return Err(ModelError::DimensionMismatch {
            expected: dimension,
            found: bounds.dimension(),
        });
    }
    let mut members = Vec::with_capacity(np);
    for _ in 0..np {
        let x = sample_uniform_point(bounds, rng);
        let f = evaluate_checked(obj, &x)?;
        members.push(Individual::new(x, f));
    }
    Ok(Population {
        members,
        archive: Vec::new(),
        generation: 0,
        nfe: np,
        nfe_max,
    })
}

/// One uniform point inside `bounds`.
pub fn sample_uniform_point<R: RngStream + ?Sized>(bounds: &Bounds, rng: &mut R) -> Vec<f64> {
    bounds
        .lower()
        .iter()
        .zip(bounds.upper())
        .map(|(&lo, &hi)| {
            let v = lo + rng.uniform() * (hi - lo);
            // Rounding can land exactly on `hi` plus one ulp for huge ranges.
            v.min(hi)
        })
        .collect()
}

/// Pulls violated components halfway back toward the (feasible) parent.
pub fn repair_bounds(x: &mut [f64], parent: &[f64], bounds: &Bounds) {
    for (j, v) in x.iter_mut().enumerate() {
        let lo = bounds.lower[j];
        let hi = bounds.upper[j];
        if *v < lo {
            *v = (lo + parent[j]) / 2.0;
        } else if *v > hi {
            *v = (hi + parent[j]) / 2.0;
        } else if v.is_nan() {
            *v = parent[j];
        }
    }
}
