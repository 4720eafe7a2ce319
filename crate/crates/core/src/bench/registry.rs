//! Named problems. Every base function is available plain (`<id>`) and as
//! `shifted-rotated-<id>`, whose shift, rotation and bias are generated from a
//! fixed seed per function and dimension.

use crate::rng::{RngStream, SeededRng};

use super::{BaseFunction, BenchError, ProblemSpec};

pub const SHIFTED_ROTATED_PREFIX: &str = "shifted-rotated-";

/// Shift components are drawn from `[-SHIFT_RANGE, SHIFT_RANGE]`.
pub const SHIFT_RANGE: f64 = 80.0;

/// Haar-distributed orthogonal matrix (row-major) from Gram-Schmidt on
/// Gaussian columns.
pub fn random_rotation<R: RngStream + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let mut degenerate = false;
        for _ in 0..dim {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
            // Two passes keep the basis orthogonal to machine precision.
            for _ in 0..2 {
                for c in &cols {
                    let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                    for (x, y) in v.iter_mut().zip(c) {
                        *x -= dot * y;
                    }
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 1e-8) {
                degenerate = true;
                break;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
        if degenerate {
            continue;
        }
        let mut m = vec![0.0; dim * dim];
        for (j, c) in cols.iter().enumerate() {
            for (i, &v) in c.iter().enumerate() {
                m[i * dim + j] = v;
            }
        }
        return m;
    }
}

pub fn random_shift<R: RngStream + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim)
        .map(|_| SHIFT_RANGE * (2.0 * rng.uniform() - 1.0))
        .collect()
}

fn data_seed(index: usize, dim: usize) -> u64 {
    0x9e37_79b9_7f4a_7c15 ^ ((index as u64) << 32) ^ dim as u64
}

/// Looks up a registered problem.
pub fn problem(name: &str, dim: usize) -> Result<ProblemSpec, BenchError> {
    if let Some(id) = name.strip_prefix(SHIFTED_ROTATED_PREFIX) {
        let base: BaseFunction = id
            .parse()
            .map_err(|_| BenchError::UnknownProblem(name.to_owned()))?;
        let index = BaseFunction::ALL.iter().position(|&b| b == base).unwrap_or(0);
        let mut rng = SeededRng::new(data_seed(index, dim));
        let spec = ProblemSpec::new(name, base, dim)?;
        let rotation = random_rotation(dim, &mut rng);
        let shift = random_shift(dim, &mut rng);
        return spec
            .with_bias(100.0 * (index + 1) as f64)
            .with_rotation(rotation)?
            .with_shift(shift);
    }
    let base: BaseFunction = name
        .parse()
        .map_err(|_| BenchError::UnknownProblem(name.to_owned()))?;
    ProblemSpec::new(name, base, dim)
}

/// Registered problem names in a stable order.
pub fn names() -> Vec<String> {
    let plain = BaseFunction::ALL.iter().map(|b| b.id().to_owned());
    let transformed = BaseFunction::ALL
        .iter()
        .map(|b| format!("{SHIFTED_ROTATED_PREFIX}{}", b.id()));
    plain.chain(transformed).collect()
}

/// `(name, one-line description)` for every registered problem.
pub fn list() -> Vec<(String, String)> {
    names()
        .into_iter()
        .map(|name| {
            let base_id = name.strip_prefix(SHIFTED_ROTATED_PREFIX).unwrap_or(&name);
            let base: BaseFunction = base_id.parse().expect("registered id");
            let kind = if base.is_unimodal() { "unimodal" } else { "multimodal" };
            let desc = if name.starts_with(SHIFTED_ROTATED_PREFIX) {
                format!("{kind}, shifted and rotated, bias {}", problem(&name, 2).map(|p| p.bias).unwrap_or(0.0))
            } else {
                format!("{kind}, minimum 0 at {}", if base == BaseFunction::Rosenbrock { "ones" } else { "origin" })
            };
            (name, desc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{evaluate_transformed, orthogonality_deviation};
    use proptest::prelude::*;

    #[test]
    fn every_problem_hits_its_optimum() {
        for name in names() {
            for dim in [2, 10, 30] {
                let spec = problem(&name, dim).unwrap();
                let v = evaluate_transformed(&spec, &spec.optimizer()).unwrap();
                assert!((v - spec.optimum()).abs() <= 1e-10, "{name} D={dim}: {v}");
            }
        }
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(problem("bogus", 3), Err(BenchError::UnknownProblem(_))));
        assert!(matches!(
            problem("shifted-rotated-bogus", 3),
            Err(BenchError::UnknownProblem(_))
        ));
    }

    #[test]
    fn generated_data_is_stable() {
        let a = problem("shifted-rotated-rastrigin", 10).unwrap();
        let b = problem("shifted-rotated-rastrigin", 10).unwrap();
        assert_eq!(a, b);
        assert_eq!(list().len(), 16);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn rotations_are_orthogonal(seed in any::<u64>(), dim in 1usize..12) {
            let m = random_rotation(dim, &mut SeededRng::new(seed));
            prop_assert!(orthogonality_deviation(&m, dim) <= 1e-12);
        }
    }
}
