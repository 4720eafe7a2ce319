//! Random streams injected into every stochastic operation.
//!
//! All randomness in a run flows through a single [`RngStream`]. The
//! production stream is [`SeededRng`]; [`ScriptedRng`] replays a fixed list
//! of uniforms so that individual operators and whole generations can be
//! checked against hand-written references.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

/// Source of the four draw kinds the optimizer needs.
pub trait RngStream {
    /// Uniform draw on `[0, 1)`.
    fn uniform(&mut self) -> f64;

    /// Uniform integer on `0..n`. `n` must be positive.
    fn index(&mut self, n: usize) -> usize;

    /// Standard normal draw.
    fn standard_normal(&mut self) -> f64;

    /// Exponential draw with mean 1.
    fn standard_exponential(&mut self) -> f64;
}

impl<R: RngStream + ?Sized> RngStream for &mut R {
    fn uniform(&mut self) -> f64 {
        (**self).uniform()
    }

    fn index(&mut self, n: usize) -> usize {
        (**self).index(n)
    }

    fn standard_normal(&mut self) -> f64 {
        (**self).standard_normal()
    }

    fn standard_exponential(&mut self) -> f64 {
        (**self).standard_exponential()
    }
}

/// ChaCha8-backed stream. Identical seeds give bit-identical draw sequences
/// on every platform.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl RngStream for SeededRng {
    fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        self.inner.random_range(0..n)
    }

    fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    fn standard_exponential(&mut self) -> f64 {
        self.inner.sample(Exp1)
    }
}

/// Replays a fixed list of uniforms in `[0, 1)`.
///
/// Every draw kind is a fixed function of the script:
///
/// * `uniform` consumes one value `u` and returns it.
/// * `index(n)` consumes one value `u` and returns `min(floor(u * n), n - 1)`.
/// * `standard_normal` consumes two values `u1, u2` and returns the
///   Box-Muller draw `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`.
/// * `standard_exponential` consumes one value `u` and returns `-ln(1 - u)`.
///
/// Running past the end of the script panics.
#[derive(Debug, Clone, Default)]
pub struct ScriptedRng {
    script: VecDeque<f64>,
    consumed: usize,
}

impl ScriptedRng {
    pub fn new(values: impl IntoIterator<Item = f64>) -> Self {
        let script: VecDeque<f64> = values.into_iter().collect();
        assert!(
            script.iter().all(|u| (0.0..1.0).contains(u)),
            "scripted uniforms must lie in [0, 1)"
        );
        Self {
            script,
            consumed: 0,
        }
    }

    /// Number of script values consumed so far.
    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn remaining(&self) -> usize {
        self.script.len()
    }

    fn next(&mut self) -> f64 {
        let u = self
            .script
            .pop_front()
            .unwrap_or_else(|| panic!("scripted stream exhausted after {} draws", self.consumed));
        self.consumed += 1;
        u
    }
}

impl RngStream for ScriptedRng {
    fn uniform(&mut self) -> f64 {
        self.next()
    }

    fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        let u = self.next();
        ((u * n as f64).floor() as usize).min(n - 1)
    }

    fn standard_normal(&mut self) -> f64 {
        let u1 = self.next();
        let u2 = self.next();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn standard_exponential(&mut self) -> f64 {
        -(1.0 - self.next()).ln()
    }
}
