//! Mutation and recombination operators.
//!
//! Covers the six classical DE mutations, binomial and exponential
//! crossover, and DE/current-to-pbest/r with rank-based donor selection in
//! both its plain form and the target-perturbed form used by iLSHADE-RSP.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{best_index, Individual};
use crate::rng::RngStream;
use crate::sampling::{cauchy_sample_unchecked, stable_sample, SamplingError, StableParams};

/// Cap on rejection attempts per distinct index, as a multiple of NP.
const ATTEMPTS_PER_MEMBER: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("strategy needs at least {needed} members, population has {found}")]
    PopulationTooSmall { needed: usize, found: usize },
    #[error("no admissible donor index after {attempts} attempts")]
    IndexExhausted { attempts: usize },
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("invalid perturbation {0:?}")]
    InvalidPerturbation(String),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// Classical mutation strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassicStrategy {
    Rand1,
    Rand2,
    Best1,
    Best2,
    CurrentToBest1,
    CurrentToRand1,
}

impl ClassicStrategy {
    pub const ALL: [ClassicStrategy; 6] = [
        ClassicStrategy::Rand1,
        ClassicStrategy::Rand2,
        ClassicStrategy::Best1,
        ClassicStrategy::Best2,
        ClassicStrategy::CurrentToBest1,
        ClassicStrategy::CurrentToRand1,
    ];

    /// Number of random donors `r1, r2, ...` the strategy draws.
    pub fn donor_count(self) -> usize {
        match self {
            ClassicStrategy::Rand1 => 3,
            ClassicStrategy::Rand2 => 5,
            ClassicStrategy::Best1 => 2,
            ClassicStrategy::Best2 => 4,
            ClassicStrategy::CurrentToBest1 => 2,
            ClassicStrategy::CurrentToRand1 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassicStrategy::Rand1 => "rand/1",
            ClassicStrategy::Rand2 => "rand/2",
            ClassicStrategy::Best1 => "best/1",
            ClassicStrategy::Best2 => "best/2",
            ClassicStrategy::CurrentToBest1 => "current-to-best/1",
            ClassicStrategy::CurrentToRand1 => "current-to-rand/1",
        }
    }
}

impl fmt::Display for ClassicStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassicStrategy {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassicStrategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| StrategyError::UnknownStrategy(s.to_owned()))
    }
}

/// Draws `count` mutually distinct indices in `0..np`, all different from
/// `exclude`, by rejection.
pub fn distinct_indices<R: RngStream + ?Sized>(
    np: usize,
    exclude: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>, StrategyError> {
    if np < count + 1 {
        return Err(StrategyError::PopulationTooSmall {
            needed: count + 1,
            found: np,
        });
    }
    let cap = ATTEMPTS_PER_MEMBER * np;
    let mut picked = Vec::with_capacity(count);
    for _ in 0..count {
        let mut attempts = 0;
        loop {
            if attempts == cap {
                return Err(StrategyError::IndexExhausted { attempts });
            }
            attempts += 1;
            let r = rng.index(np);
            if r != exclude && !picked.contains(&r) {
                picked.push(r);
                break;
            }
        }
    }
    Ok(picked)
}

/// Classical mutant for member `i`. Donors are drawn first; current-to-rand/1
/// then draws its `K` weight.
pub fn classical_mutation<R: RngStream + ?Sized>(
    kind: ClassicStrategy,
    i: usize,
    members: &[Individual],
    scale: f64,
    rng: &mut R,
) -> Result<Vec<f64>, StrategyError> {
    let r = distinct_indices(members.len(), i, kind.donor_count(), rng)?;
    let x = |k: usize| members[k].x.as_slice();
    let diff = |a: usize, b: usize, j: usize| x(a)[j] - x(b)[j];
    let dim = members[i].x.len();
    let best = best_index(members);
    let mutant = match kind {
        ClassicStrategy::Rand1 => (0..dim)
            .map(|j| x(r[0])[j] + scale * diff(r[1], r[2], j))
            .collect(),
        ClassicStrategy::Rand2 => (0..dim)
            .map(|j| x(r[0])[j] + scale * diff(r[1], r[2], j) + scale * diff(r[3], r[4], j))
            .collect(),
        ClassicStrategy::Best1 => (0..dim)
            .map(|j| x(best)[j] + scale * diff(r[0], r[1], j))
            .collect(),
        ClassicStrategy::Best2 => (0..dim)
            .map(|j| x(best)[j] + scale * diff(r[0], r[1], j) + scale * diff(r[2], r[3], j))
            .collect(),
        ClassicStrategy::CurrentToBest1 => (0..dim)
            .map(|j| x(i)[j] + scale * diff(best, i, j) + scale * diff(r[0], r[1], j))
            .collect(),
        ClassicStrategy::CurrentToRand1 => {
            let k = rng.uniform();
            (0..dim)
                .map(|j| x(i)[j] + k * diff(r[0], i, j) + scale * diff(r[1], r[2], j))
                .collect()
        }
    };
    Ok(mutant)
}

/// Selection probabilities over a best-first population:
/// `Rank_i = k (np - i) + 1` for 1-based `i`, normalized to sum to one.
pub fn rank_probabilities(np: usize, k: f64) -> Vec<f64> {
    let selector = RankSelector::new(np, k);
    selector.probabilities()
}

/// Roulette-wheel selector over rank weights of a best-first population.
#[derive(Debug, Clone, PartialEq)]
pub struct RankSelector {
    k: f64,
    ranks: Vec<f64>,
    total: f64,
}

impl RankSelector {
    pub fn new(np: usize, k: f64) -> Self {
        let ranks: Vec<f64> = (1..=np).map(|i| k * (np - i) as f64 + 1.0).collect();
        let total = ranks.iter().sum();
        Self { k, ranks, total }
    }

    pub fn greediness(&self) -> f64 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Unnormalized rank weights.
    pub fn ranks(&self) -> &[f64] {
        &self.ranks
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.ranks.iter().map(|r| r / self.total).collect()
    }

    /// Draws a population position; consumes one uniform.
    pub fn sample<R: RngStream + ?Sized>(&self, rng: &mut R) -> usize {
        roulette(&self.ranks, 0, rng.uniform() * self.total)
    }

    /// Draws from the population followed by `archive_len` archive slots of
    /// weight one (the lowest rank weight). Positions at or beyond `len()`
    /// refer to archive slots. Consumes one uniform.
    pub fn sample_with_archive<R: RngStream + ?Sized>(&self, archive_len: usize, rng: &mut R) -> usize {
        let target = rng.uniform() * (self.total + archive_len as f64);
        if target < self.total || archive_len == 0 {
            roulette(&self.ranks, 0, target)
        } else {
            let slot = (target - self.total).floor() as usize;
            self.ranks.len() + slot.min(archive_len - 1)
        }
    }
}

fn roulette(weights: &[f64], offset: usize, target: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return offset + i;
        }
    }
    offset + weights.len() - 1
}

/// Fraction of the population forming the pbest pool:
/// `0.085 (1 + nfe / nfe_max)`.
pub fn pbest_fraction(nfe: usize, nfe_max: usize) -> f64 {
    0.085 * (1.0 + nfe as f64 / nfe_max as f64)
}

/// Pool size `max(2, ceil(p np))`, capped at `np`.
pub fn pbest_pool_size(p: f64, np: usize) -> usize {
    ((p * np as f64).ceil() as usize).max(2).min(np)
}

/// Multiplier `F_w / F` of the pbest term: 0.7 below 20% of the budget,
/// 0.8 below 40%, 1.2 afterwards.
pub fn fw_multiplier(nfe: usize, nfe_max: usize) -> f64 {
    let nfe = nfe as f64;
    let max = nfe_max as f64;
    if nfe < 0.2 * max {
        0.7
    } else if nfe < 0.4 * max {
        0.8
    } else {
        1.2
    }
}

/// Everything DE/current-to-pbest/r needs from the current generation.
#[derive(Debug, Clone)]
pub struct MutationContext<'a> {
    /// Sorted best-first.
    pub members: &'a [Individual],
    pub archive: &'a [Individual],
    pub selector: &'a RankSelector,
    /// pbest fraction `p`.
    pub p: f64,
    pub fw_multiplier: f64,
}

impl<'a> MutationContext<'a> {
    pub fn new(
        members: &'a [Individual],
        archive: &'a [Individual],
        selector: &'a RankSelector,
        nfe: usize,
        nfe_max: usize,
    ) -> Self {
        debug_assert_eq!(selector.len(), members.len());
        Self {
            members,
            archive,
            selector,
            p: pbest_fraction(nfe, nfe_max),
            fw_multiplier: fw_multiplier(nfe, nfe_max),
        }
    }

    pub fn pool_size(&self) -> usize {
        pbest_pool_size(self.p, self.members.len())
    }

    fn donor_vector(&self, d: Donor) -> &[f64] {
        match d {
            Donor::Member(k) => &self.members[k].x,
            Donor::Archive(k) => &self.archive[k].x,
        }
    }
}

/// Where the second difference vector comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Donor {
    Member(usize),
    Archive(usize),
}

/// Donor indices of one DE/current-to-pbest/r mutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Donors {
    pub pbest: usize,
    pub pr1: usize,
    pub pr2: Donor,
}

/// Draws pbest (uniform over the pool, not `i`), pr1 (rank-weighted, not
/// `i`) and pr2 (rank-weighted over population and archive, neither `i` nor
/// pr1), in that order.
pub fn select_donors<R: RngStream + ?Sized>(
    i: usize,
    ctx: &MutationContext<'_>,
    rng: &mut R,
) -> Result<Donors, StrategyError> {
    let np = ctx.members.len();
    if np < 3 {
        return Err(StrategyError::PopulationTooSmall { needed: 3, found: np });
    }
    let cap = ATTEMPTS_PER_MEMBER * np;
    let pool = ctx.pool_size();

    let pbest = retry(cap, || {
        let r = rng.index(pool);
        (r != i).then_some(r)
    })?;
    let pr1 = retry(cap, || {
        let r = ctx.selector.sample(rng);
        (r != i).then_some(r)
    })?;
    let archive_len = ctx.archive.len();
    let pr2 = retry(cap, || {
        let r = ctx.selector.sample_with_archive(archive_len, rng);
        if r >= np {
            Some(Donor::Archive(r - np))
        } else if r != i && r != pr1 {
            Some(Donor::Member(r))
        } else {
            None
        }
    })?;
    Ok(Donors { pbest, pr1, pr2 })
}

fn retry<T>(cap: usize, mut draw: impl FnMut() -> Option<T>) -> Result<T, StrategyError> {
    for _ in 0..cap {
        if let Some(v) = draw() {
            return Ok(v);
        }
    }
    Err(StrategyError::IndexExhausted { attempts: cap })
}

#[inline]
fn mutant_component(ctx: &MutationContext<'_>, i: usize, d: &Donors, scale: f64, j: usize) -> f64 {
    let xi = ctx.members[i].x[j];
    let fw = ctx.fw_multiplier * scale;
    xi + fw * (ctx.members[d.pbest].x[j] - xi)
        + scale * (ctx.members[d.pr1].x[j] - ctx.donor_vector(d.pr2)[j])
}

/// `v = x_i + F_w (x_pbest - x_i) + F (x_pr1 - x~_pr2)`.
pub fn current_to_pbest_r<R: RngStream + ?Sized>(
    i: usize,
    ctx: &MutationContext<'_>,
    scale: f64,
    rng: &mut R,
) -> Result<Vec<f64>, StrategyError> {
    let donors = select_donors(i, ctx, rng)?;
    Ok(mutant_from_donors(i, ctx, &donors, scale))
}

pub fn mutant_from_donors(i: usize, ctx: &MutationContext<'_>, donors: &Donors, scale: f64) -> Vec<f64> {
    (0..ctx.members[i].x.len())
        .map(|j| mutant_component(ctx, i, donors, scale, j))
        .collect()
}

/// Binomial crossover. Draws `j_rand` then one uniform per component.
pub fn binomial_crossover<R: RngStream + ?Sized>(
    target: &[f64],
    mutant: &[f64],
    cr: f64,
    rng: &mut R,
) -> Result<Vec<f64>, StrategyError> {
    if target.len() != mutant.len() {
        return Err(StrategyError::LengthMismatch(target.len(), mutant.len()));
    }
    let j_rand = rng.index(target.len());
    Ok(target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (&t, &m))| if rng.uniform() < cr || j == j_rand { m } else { t })
        .collect())
}

/// Exponential crossover: a cyclic block of `L` mutant components starting
/// at a random position. `L` grows while a fresh uniform is below `cr` and
/// `L < D`.
pub fn exponential_crossover<R: RngStream + ?Sized>(
    target: &[f64],
    mutant: &[f64],
    cr: f64,
    rng: &mut R,
) -> Result<Vec<f64>, StrategyError> {
    if target.len() != mutant.len() {
        return Err(StrategyError::LengthMismatch(target.len(), mutant.len()));
    }
    let dim = target.len();
    let start = rng.index(dim);
    let mut len = 0;
    loop {
        len += 1;
        if !(rng.uniform() < cr && len < dim) {
            break;
        }
    }
    let mut trial = target.to_vec();
    for offset in 0..len {
        let j = (start + offset) % dim;
        trial[j] = mutant[j];
    }
    Ok(trial)
}

/// Distribution used to perturb non-crossover components of the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    Cauchy { scale: f64 },
    /// Symmetric alpha-stable law.
    Stable { alpha: f64, scale: f64 },
}

impl Perturbation {
    pub const DEFAULT_SCALE: f64 = 0.1;

    pub fn cauchy() -> Self {
        Perturbation::Cauchy {
            scale: Self::DEFAULT_SCALE,
        }
    }

    pub fn stable(alpha: f64) -> Result<Self, StrategyError> {
        StableParams::symmetric(alpha, Self::DEFAULT_SCALE, 0.0)?;
        Ok(Perturbation::Stable {
            alpha,
            scale: Self::DEFAULT_SCALE,
        })
    }

    pub fn sample<R: RngStream + ?Sized>(&self, location: f64, rng: &mut R) -> f64 {
        match *self {
            Perturbation::Cauchy { scale } => cauchy_sample_unchecked(location, scale, rng),
            Perturbation::Stable { alpha, scale } => {
                let p = StableParams::symmetric(alpha, scale, location)
                    .expect("stable perturbation validated at construction");
                stable_sample(p, rng)
            }
        }
    }
}

impl Default for Perturbation {
    fn default() -> Self {
        Self::cauchy()
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::Cauchy { .. } => f.write_str("cauchy"),
            Perturbation::Stable { alpha, .. } => write!(f, "stable:{alpha}"),
        }
    }
}

impl FromStr for Perturbation {
    type Err = StrategyError;

    /// `cauchy` or `stable:<alpha>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "cauchy" {
            return Ok(Self::cauchy());
        }
        if let Some(alpha) = s.strip_prefix("stable:") {
            let alpha: f64 = alpha
                .trim()
                .parse()
                .map_err(|_| StrategyError::InvalidPerturbation(s.to_owned()))?;
            return Self::stable(alpha);
        }
        Err(StrategyError::InvalidPerturbation(s.to_owned()))
    }
}

/// Fused DE/current-to-pbest/r mutation and binomial crossover.
///
/// Draw order: donors (pbest, pr1, pr2), `j_rand`, then for each component
/// one crossover uniform followed, when `perturbation` is set and the
/// component does not cross over, by one perturbation draw located at
/// `x_i[j]`.
pub fn recombine<R: RngStream + ?Sized>(
    i: usize,
    ctx: &MutationContext<'_>,
    scale: f64,
    cr: f64,
    perturbation: Option<&Perturbation>,
    rng: &mut R,
) -> Result<Vec<f64>, StrategyError> {
    let donors = select_donors(i, ctx, rng)?;
    let target = &ctx.members[i].x;
    let j_rand = rng.index(target.len());
    let mut trial = Vec::with_capacity(target.len());
    for (j, &xj) in target.iter().enumerate() {
        let crosses = rng.uniform() < cr || j == j_rand;
        let value = if crosses {
            mutant_component(ctx, i, &donors, scale, j)
        } else if let Some(p) = perturbation {
            p.sample(xj, rng)
        } else {
            xj
        };
        trial.push(value);
    }
    Ok(trial)
}

/// Trial vector that keeps the target's value at non-crossover positions.
pub fn recombine_original<R: RngStream + ?Sized>(
    i: usize,
    ctx: &MutationContext<'_>,
    scale: f64,
    cr: f64,
    rng: &mut R,
) -> Result<Vec<f64>, StrategyError> {
    recombine(i, ctx, scale, cr, None, rng)
}

/// Trial vector whose non-crossover positions are Cauchy draws centred on
/// the target's value with scale 0.1, one draw per component.
pub fn recombine_cauchy<R: RngStream + ?Sized>(
    i: usize,
    ctx: &MutationContext<'_>,
    scale: f64,
    cr: f64,
    rng: &mut R,
) -> Result<Vec<f64>, StrategyError> {
    recombine(i, ctx, scale, cr, Some(&Perturbation::cauchy()), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{ScriptedRng, SeededRng};
    use proptest::prelude::*;

    fn members(xs: &[&[f64]]) -> Vec<Individual> {
        xs.iter()
            .enumerate()
            .map(|(k, x)| Individual::new(x.to_vec(), k as f64))
            .collect()
    }

    /// Script value that makes `index(n)` return `k`.
    fn pick(k: usize, n: usize) -> f64 {
        (k as f64 + 0.5) / n as f64
    }

    #[test]
    fn rand1_hand_example() {
        // Member 0 is the target; r1 = 1, r2 = 2, r3 = 3.
        let pop = members(&[&[9.0], &[1.0], &[3.0], &[1.0]]);
        let mut rng = ScriptedRng::new([pick(1, 4), pick(2, 4), pick(3, 4)]);
        let v = classical_mutation(ClassicStrategy::Rand1, 0, &pop, 0.5, &mut rng).unwrap();
        assert_eq!(v, vec![2.0]);
    }

    #[test]
    fn best1_with_zero_scale_returns_best() {
        let pop = members(&[&[0.0, 1.0], &[2.0, 3.0], &[4.0, 5.0], &[6.0, 7.0]]);
        let mut rng = SeededRng::new(3);
        let v = classical_mutation(ClassicStrategy::Best1, 2, &pop, 0.0, &mut rng).unwrap();
        assert_eq!(v, pop[0].x);
    }

    #[test]
    fn current_to_best_vanishing_differences() {
        // Target is the best and r1, r2 coincide in value.
        let pop = members(&[&[1.0, 2.0], &[5.0, 5.0], &[5.0, 5.0], &[8.0, 8.0]]);
        let mut rng = ScriptedRng::new([pick(1, 4), pick(2, 4)]);
        let v = classical_mutation(ClassicStrategy::CurrentToBest1, 0, &pop, 0.9, &mut rng).unwrap();
        assert_eq!(v, pop[0].x);
    }

    #[test]
    fn current_to_rand_draws_k_after_donors() {
        let pop = members(&[&[0.0], &[4.0], &[2.0], &[1.0]]);
        // r1 = 1, r2 = 2, r3 = 3, K = 0.25.
        let mut rng = ScriptedRng::new([pick(1, 4), pick(2, 4), pick(3, 4), 0.25]);
        let v = classical_mutation(ClassicStrategy::CurrentToRand1, 0, &pop, 0.5, &mut rng).unwrap();
        assert_eq!(v, vec![0.0 + 0.25 * 4.0 + 0.5 * (2.0 - 1.0)]);
    }

    #[test]
    fn classic_rejects_small_populations() {
        let pop = members(&[&[0.0], &[1.0], &[2.0], &[3.0], &[4.0]]);
        let mut rng = SeededRng::new(0);
        assert_eq!(
            classical_mutation(ClassicStrategy::Rand2, 0, &pop, 0.5, &mut rng),
            Err(StrategyError::PopulationTooSmall { needed: 6, found: 5 })
        );
        assert!(classical_mutation(ClassicStrategy::Rand1, 0, &pop[..3], 0.5, &mut rng).is_err());
        for kind in ClassicStrategy::ALL {
            let pop6 = members(&[&[0.0], &[1.0], &[2.0], &[3.0], &[4.0], &[5.0]]);
            assert!(classical_mutation(kind, 5, &pop6, 0.5, &mut rng).is_ok(), "{kind}");
            assert_eq!(kind.name().parse::<ClassicStrategy>().unwrap(), kind);
        }
    }

    #[test]
    fn distinct_indices_respect_exclusion() {
        let mut rng = SeededRng::new(11);
        for _ in 0..1000 {
            let r = distinct_indices(6, 2, 5, &mut rng).unwrap();
            assert!(!r.contains(&2));
            let mut s = r.clone();
            s.sort();
            s.dedup();
            assert_eq!(s.len(), 5);
        }
    }

    #[test]
    fn distinct_indices_hit_attempt_cap() {
        // Every draw returns index 0, which is excluded.
        let mut rng = ScriptedRng::new(std::iter::repeat_n(0.0, 400));
        assert_eq!(
            distinct_indices(4, 0, 1, &mut rng),
            Err(StrategyError::IndexExhausted { attempts: 400 })
        );
    }

    #[test]
    fn rank_probability_examples() {
        let p = rank_probabilities(4, 3.0);
        let expected = [10.0 / 22.0, 7.0 / 22.0, 4.0 / 22.0, 1.0 / 22.0];
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(rank_probabilities(1, 3.0), vec![1.0]);
        let p = rank_probabilities(3, 1.0);
        for (a, b) in p.iter().zip([0.5, 1.0 / 3.0, 1.0 / 6.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn archive_slots_have_unit_weight() {
        let sel = RankSelector::new(2, 1.0); // ranks [2, 1], total 3
        // Total with two archive slots is 5; targets 3.5 and 4.5 fall in the archive.
        let mut rng = ScriptedRng::new([0.1, 0.5, 0.7, 0.9]);
        assert_eq!(sel.sample_with_archive(2, &mut rng), 0);
        assert_eq!(sel.sample_with_archive(2, &mut rng), 1);
        assert_eq!(sel.sample_with_archive(2, &mut rng), 2);
        assert_eq!(sel.sample_with_archive(2, &mut rng), 3);
    }

    #[test]
    fn schedule_endpoints() {
        assert_eq!(pbest_fraction(0, 1000), 0.085);
        assert_eq!(pbest_fraction(1000, 1000), 0.17);
        assert_eq!(fw_multiplier(100, 1000), 0.7);
        assert_eq!(fw_multiplier(300, 1000), 0.8);
        assert_eq!(fw_multiplier(500, 1000), 1.2);
        assert_eq!(fw_multiplier(199, 1000), 0.7);
        assert_eq!(fw_multiplier(200, 1000), 0.8);
        assert_eq!(fw_multiplier(400, 1000), 1.2);
        assert_eq!(0.5 * fw_multiplier(100, 1000), 0.35);
        assert_eq!(0.5 * fw_multiplier(500, 1000), 0.6);
        assert_eq!(pbest_pool_size(0.085, 5), 2);
        assert_eq!(pbest_pool_size(0.17, 100), 17);
        assert_eq!(pbest_pool_size(0.9, 3), 3);
    }

    fn sample_members(np: usize, dim: usize, seed: u64) -> Vec<Individual> {
        let mut rng = SeededRng::new(seed);
        let mut v: Vec<Individual> = (0..np)
            .map(|_| {
                let x: Vec<f64> = (0..dim).map(|_| rng.uniform() * 10.0 - 5.0).collect();
                let f = x.iter().map(|a| a * a).sum();
                Individual::new(x, f)
            })
            .collect();
        crate::model::sort_best_first(&mut v);
        v
    }

    #[test]
    fn zero_weights_return_target() {
        let pop = sample_members(8, 4, 1);
        let sel = RankSelector::new(8, 3.0);
        let ctx = MutationContext::new(&pop, &[], &sel, 0, 100);
        let mut rng = SeededRng::new(9);
        let v = current_to_pbest_r(3, &ctx, 0.0, &mut rng).unwrap();
        assert_eq!(v, pop[3].x);
        let u = recombine_original(3, &ctx, 0.0, 0.4, &mut rng).unwrap();
        assert_eq!(u, pop[3].x);
    }

    #[test]
    fn full_crossover_matches_plain_mutant() {
        let pop = sample_members(10, 5, 2);
        let archive = sample_members(4, 5, 3);
        let sel = RankSelector::new(10, 3.0);
        let ctx = MutationContext::new(&pop, &archive, &sel, 300, 1000);
        for seed in 0..50 {
            let v = current_to_pbest_r(4, &ctx, 0.6, &mut SeededRng::new(seed)).unwrap();
            let u = recombine_original(4, &ctx, 0.6, 1.0, &mut SeededRng::new(seed)).unwrap();
            let c = recombine_cauchy(4, &ctx, 0.6, 1.0, &mut SeededRng::new(seed)).unwrap();
            assert_eq!(v, u);
            assert_eq!(u, c);
        }
    }

    #[test]
    fn single_dimension_always_mutates() {
        let pop = sample_members(6, 1, 4);
        let sel = RankSelector::new(6, 3.0);
        let ctx = MutationContext::new(&pop, &[], &sel, 0, 100);
        for seed in 0..20 {
            let v = current_to_pbest_r(2, &ctx, 0.5, &mut SeededRng::new(seed)).unwrap();
            let u = recombine_cauchy(2, &ctx, 0.5, 0.0, &mut SeededRng::new(seed)).unwrap();
            assert_eq!(v, u);
        }
    }

    #[test]
    fn cauchy_recombination_branch_counts() {
        let pop = sample_members(6, 5, 5);
        let sel = RankSelector::new(6, 3.0);
        let ctx = MutationContext::new(&pop, &[], &sel, 0, 100);
        // Donors: pbest pool is 2, i = 4 so pbest index 0; pr1 and pr2 via roulette.
        // j_rand = 2; CR = 0 so positions 0, 1, 3, 4 each take a Cauchy draw.
        let mut script = vec![0.1, 0.05, 0.5, pick(2, 5)];
        let cauchy_u = [0.5, 0.75, 0.25, 0.5];
        let mut k = 0;
        for j in 0..5 {
            script.push(0.9); // crossover uniform, never below CR = 0
            if j != 2 {
                script.push(cauchy_u[k]);
                k += 1;
            }
        }
        let mut rng = ScriptedRng::new(script);
        let u = recombine_cauchy(4, &ctx, 0.5, 0.0, &mut rng).unwrap();
        assert_eq!(rng.remaining(), 0);
        let x = &pop[4].x;
        assert_eq!(u[0], x[0]);
        assert!((u[1] - (x[1] + 0.1)).abs() < 1e-12);
        assert!((u[3] - (x[3] - 0.1)).abs() < 1e-12);
        assert_eq!(u[4], x[4]);
        // Position 2 is the mutant expression.
        let mut rng = ScriptedRng::new([0.1, 0.05, 0.5]);
        let donors = select_donors(4, &ctx, &mut rng).unwrap();
        let v = mutant_from_donors(4, &ctx, &donors, 0.5);
        assert_eq!(u[2], v[2]);
    }

    #[test]
    fn binomial_examples() {
        let t = [0.0, 0.0, 0.0, 0.0];
        let m = [1.0, 2.0, 3.0, 4.0];
        let mut rng = SeededRng::new(0);
        assert_eq!(binomial_crossover(&t, &m, 1.0, &mut rng).unwrap(), m.to_vec());
        for _ in 0..100 {
            let u = binomial_crossover(&t, &m, 0.0, &mut rng).unwrap();
            assert_eq!(u.iter().filter(|v| **v != 0.0).count(), 1);
            assert_eq!(binomial_crossover(&[0.0], &[7.0], 0.0, &mut rng).unwrap(), vec![7.0]);
        }
        assert!(binomial_crossover(&t, &m[..2], 0.5, &mut rng).is_err());
    }

    #[test]
    fn exponential_examples() {
        let t = [0.0, 0.0, 0.0];
        let m = [1.0, 2.0, 3.0];
        // CR = 0: one component only.
        let mut rng = ScriptedRng::new([pick(1, 3), 0.3]);
        assert_eq!(exponential_crossover(&t, &m, 0.0, &mut rng).unwrap(), vec![0.0, 2.0, 0.0]);
        // CR = 1: the loop runs to D.
        let mut rng = SeededRng::new(1);
        assert_eq!(exponential_crossover(&t, &m, 1.0, &mut rng).unwrap(), m.to_vec());
        // Start at the last position with L = 2 wraps to the first.
        let mut rng = ScriptedRng::new([pick(2, 3), 0.1, 0.9]);
        assert_eq!(exponential_crossover(&t, &m, 0.5, &mut rng).unwrap(), vec![1.0, 0.0, 3.0]);
        assert_eq!(rng.remaining(), 0);
    }

    #[test]
    fn perturbation_parsing() {
        assert_eq!("cauchy".parse::<Perturbation>().unwrap(), Perturbation::cauchy());
        assert_eq!(
            "stable:1.5".parse::<Perturbation>().unwrap(),
            Perturbation::Stable { alpha: 1.5, scale: 0.1 }
        );
        assert!("stable:2.5".parse::<Perturbation>().is_err());
        assert!("gauss".parse::<Perturbation>().is_err());
        let p = Perturbation::stable(1.25).unwrap();
        assert_eq!(p.to_string().parse::<Perturbation>().unwrap(), p);
    }

    #[test]
    fn donor_indices_are_admissible() {
        let pop = sample_members(5, 3, 6);
        let archive = sample_members(3, 3, 7);
        let sel = RankSelector::new(5, 3.0);
        let ctx = MutationContext::new(&pop, &archive, &sel, 10, 100);
        let mut rng = SeededRng::new(8);
        for n in 0..10_000 {
            let i = n % 5;
            let d = select_donors(i, &ctx, &mut rng).unwrap();
            assert_ne!(d.pbest, i);
            assert!(d.pbest < ctx.pool_size());
            assert_ne!(d.pr1, i);
            assert_ne!(d.pr2, Donor::Member(i));
            assert_ne!(d.pr2, Donor::Member(d.pr1));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn rank_probabilities_normalized(np in 1usize..=1000, k in prop::sample::select(vec![1.0, 2.0, 3.0, 5.0])) {
            let p = rank_probabilities(np, k);
            prop_assert_eq!(p.len(), np);
            let sum: f64 = p.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(p.iter().all(|v| *v > 0.0));
            prop_assert!(p.windows(2).all(|w| w[0] > w[1]));
        }

        #[test]
        fn cauchy_equals_original_at_full_crossover(seed in any::<u64>(), i in 0usize..7, scale in 0.01f64..1.0) {
            let pop = sample_members(7, 4, seed ^ 0x55);
            let archive = sample_members(3, 4, seed ^ 0xaa);
            let sel = RankSelector::new(7, 3.0);
            let ctx = MutationContext::new(&pop, &archive, &sel, 50, 100);
            let a = recombine_original(i, &ctx, scale, 1.0, &mut SeededRng::new(seed)).unwrap();
            let b = recombine_cauchy(i, &ctx, scale, 1.0, &mut SeededRng::new(seed)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
