//! Success-history adaptation of the scaling factor F and crossover rate CR.

use thiserror::Error;

use crate::rng::RngStream;
use crate::sampling::cauchy_sample_unchecked;

/// Initial F memory value for every updatable slot.
pub const INITIAL_F: f64 = 0.3;
/// Initial CR memory value for every updatable slot.
pub const INITIAL_CR: f64 = 0.8;
/// Value pinned in the last slot of both memories.
pub const FIXED_SLOT_VALUE: f64 = 0.9;
/// Scale of the Cauchy (F) and normal (CR) draws around a memory value.
pub const PARAMETER_SPREAD: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdaptError {
    #[error("memory size must be at least 2, got {0}")]
    MemorySize(usize),
    #[error("mean of an empty sample")]
    Empty,
    #[error("values and weights differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("weights must be nonnegative with a positive weighted sum")]
    DegenerateWeights,
}

/// One CR memory slot. A terminal slot forces CR = 0 for every individual
/// that draws it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrSlot {
    Value(f64),
    Terminal,
}

impl CrSlot {
    pub fn value(self) -> Option<f64> {
        match self {
            CrSlot::Value(v) => Some(v),
            CrSlot::Terminal => None,
        }
    }
}

/// Circular memories of successful F and CR means. The last slot stays at
/// 0.9/0.9; updates cycle over the others.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoricalMemory {
    m_f: Vec<f64>,
    m_cr: Vec<CrSlot>,
    update_pos: usize,
}

/// Control parameters assigned to one individual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    pub scale: f64,
    pub crossover_rate: f64,
    /// Memory slot the parameters were drawn around.
    pub slot: usize,
}

impl HistoricalMemory {
    pub fn new(size: usize) -> Result<Self, AdaptError> {
        if size < 2 {
            return Err(AdaptError::MemorySize(size));
        }
        let mut m_f = vec![INITIAL_F; size];
        let mut m_cr = vec![CrSlot::Value(INITIAL_CR); size];
        m_f[size - 1] = FIXED_SLOT_VALUE;
        m_cr[size - 1] = CrSlot::Value(FIXED_SLOT_VALUE);
        Ok(Self {
            m_f,
            m_cr,
            update_pos: 0,
        })
    }

    pub fn size(&self) -> usize {
        self.m_f.len()
    }

    pub fn f_values(&self) -> &[f64] {
        &self.m_f
    }

    pub fn cr_slots(&self) -> &[CrSlot] {
        &self.m_cr
    }

    /// Next slot to be written, in `0..size - 1`.
    pub fn update_pos(&self) -> usize {
        self.update_pos
    }

    /// Draws (F, CR) for one individual.
    ///
    /// Draw order: slot `r`, Cauchy F draws (repeated while F <= 0), then one
    /// normal CR draw unless the slot is terminal.
    pub fn assign_parameters<R: RngStream + ?Sized>(
        &self,
        nfe: usize,
        nfe_max: usize,
        rng: &mut R,
    ) -> ControlParams {
        let slot = rng.index(self.size());
        let (mean_f, mean_cr) = if slot == self.size() - 1 {
            (FIXED_SLOT_VALUE, CrSlot::Value(FIXED_SLOT_VALUE))
        } else {
            (self.m_f[slot], self.m_cr[slot])
        };

        let mut scale = loop {
            let f = cauchy_sample_unchecked(mean_f, PARAMETER_SPREAD, rng);
            if f > 0.0 {
                break f.min(1.0);
            }
        };
        let progress = nfe as f64;
        let max = nfe_max as f64;
        if progress < 0.6 * max && scale > 0.7 {
            scale = 0.7;
        }

        let mut cr = match mean_cr {
            CrSlot::Terminal => 0.0,
            CrSlot::Value(m) => (m + PARAMETER_SPREAD * rng.standard_normal()).clamp(0.0, 1.0),
        };
        if progress < 0.25 * max {
            cr = cr.max(0.7);
        } else if progress < 0.5 * max {
            cr = cr.max(0.6);
        }

        ControlParams {
            scale,
            crossover_rate: cr,
            slot,
        }
    }

    /// Writes the weighted Lehmer means of a nonempty success set into the
    /// current slot and advances it. An empty set leaves the memory
    /// untouched. A batch whose CRs are all zero marks the slot terminal,
    /// and a terminal slot stays terminal.
    pub fn update(&mut self, success: &SuccessSet) {
        if success.is_empty() {
            return;
        }
        let pos = self.update_pos;
        self.m_f[pos] = weighted_lehmer_mean(&success.s_f, &success.deltas)
            .expect("successful F values are positive");
        let max_cr = success.s_cr.iter().copied().fold(0.0, f64::max);
        self.m_cr[pos] = match self.m_cr[pos] {
            CrSlot::Terminal => CrSlot::Terminal,
            _ if max_cr == 0.0 => CrSlot::Terminal,
            _ => CrSlot::Value(
                weighted_lehmer_mean(&success.s_cr, &success.deltas)
                    .expect("at least one successful CR is positive"),
            ),
        };
        self.update_pos = (pos + 1) % (self.size() - 1);
    }
}

/// Parameters and fitness improvements of the trials that beat their parents.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuccessSet {
    pub s_f: Vec<f64>,
    pub s_cr: Vec<f64>,
    pub deltas: Vec<f64>,
}

impl SuccessSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a success. Returns `false` and records nothing when `delta`
    /// is not strictly positive.
    pub fn push(&mut self, scale: f64, crossover_rate: f64, delta: f64) -> bool {
        if !(delta > 0.0) {
            return false;
        }
        self.s_f.push(scale);
        self.s_cr.push(crossover_rate);
        self.deltas.push(delta);
        true
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

/// `sum(w v^2) / sum(w v)` with `w = weights / sum(weights)`.
pub fn weighted_lehmer_mean(values: &[f64], weights: &[f64]) -> Result<f64, AdaptError> {
    if values.is_empty() {
        return Err(AdaptError::Empty);
    }
    if values.len() != weights.len() {
        return Err(AdaptError::LengthMismatch(values.len(), weights.len()));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(AdaptError::DegenerateWeights);
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(AdaptError::DegenerateWeights);
    }
    let (num, den) = values
        .iter()
        .zip(weights)
        .fold((0.0, 0.0), |(n, d), (&v, &w)| {
            let w = w / total;
            (n + w * v * v, d + w * v)
        });
    if den == 0.0 {
        return Err(AdaptError::DegenerateWeights);
    }
    Ok(num / den)
}
