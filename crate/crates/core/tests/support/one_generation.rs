//! Straight-line reference for one iLSHADE-RSP generation (NP = 5, D = 3)
//! reading the same scripted uniforms as the engine.

#![allow(dead_code)]

use std::f64::consts::PI;

use ilshade::adapt::CrSlot;
use ilshade::bench::registry;
use ilshade::engine::{IlshadeRsp, RunConfig};
use ilshade::rng::ScriptedRng;

const NP: usize = 5;
const D: usize = 3;
const NFE_MAX: usize = 15;
const LO: f64 = -100.0;
const HI: f64 = 100.0;

/// Uniforms in [0, 1) from a 64-bit LCG (Knuth's MMIX constants).
pub fn lcg_script(seed: u64, n: usize) -> Vec<f64> {
    let mut s = seed;
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

struct Tape {
    u: Vec<f64>,
    pos: usize,
}

impl Tape {
    fn u(&mut self) -> f64 {
        let v = self.u[self.pos];
        self.pos += 1;
        v
    }
    fn idx(&mut self, n: usize) -> usize {
        ((self.u() * n as f64).floor() as usize).min(n - 1)
    }
    fn normal(&mut self) -> f64 {
        let u1 = self.u();
        let u2 = self.u();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * PI * u2).cos()
    }
    fn cauchy(&mut self, loc: f64, scale: f64) -> f64 {
        let mut u = self.u();
        while u == 0.0 {
            u = self.u();
        }
        loc + scale * (PI * (u - 0.5)).tan()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ind {
    x: Vec<f64>,
    f: f64,
    sf: f64,
    scr: f64,
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn sort(v: &mut [Ind]) {
    v.sort_by(|a, b| a.f.total_cmp(&b.f));
}

fn lehmer(v: &[f64], w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..v.len() {
        let wk = w[k] / total;
        num += wk * v[k] * v[k];
        den += wk * v[k];
    }
    num / den
}

pub struct Reference {
    pub pop: Vec<Ind>,
    pub archive: Vec<Ind>,
    pub m_f: Vec<f64>,
    pub m_cr: Vec<Option<f64>>,
    pub update_pos: usize,
    pub s_f: Vec<f64>,
    pub s_cr: Vec<f64>,
    pub deltas: Vec<f64>,
    pub trials: Vec<Vec<f64>>,
    pub perturbed: Vec<bool>,
    pub nfe: usize,
    pub consumed: usize,
    pub trimmed: bool,
}

fn reference(script: &[f64], jumping_rate: f64) -> Reference {
    let mut t = Tape {
        u: script.to_vec(),
        pos: 0,
    };

    // Initialization: member by member, component by component.
    let mut pop: Vec<Ind> = (0..NP)
        .map(|_| {
            let x: Vec<f64> = (0..D).map(|_| (LO + t.u() * (HI - LO)).min(HI)).collect();
            Ind {
                f: sphere(&x),
                x,
                sf: 0.5,
                scr: 0.5,
            }
        })
        .collect();
    let mut nfe = NP;

    // Memory: four adaptive slots at (0.3, 0.8) and a fixed slot at 0.9.
    let mut m_f = vec![0.3, 0.3, 0.3, 0.3, 0.9];
    let mut m_cr = vec![Some(0.8), Some(0.8), Some(0.8), Some(0.8), Some(0.9)];

    // Schedules at nfe = 5 of 15.
    let progress = nfe as f64 / NFE_MAX as f64;
    assert!((0.2..0.4).contains(&progress));
    let fw_mult = 0.8;
    let p = 0.085 * (1.0 + nfe as f64 / NFE_MAX as f64);
    let pool = ((p * NP as f64).ceil() as usize).max(2);
    assert_eq!(pool, 2);

    sort(&mut pop);
    // Rank weights 3 (NP - i) + 1 for 1-based i.
    let ranks = [13.0, 10.0, 7.0, 4.0, 1.0];
    let total_rank = 35.0;
    let roulette = |target: f64| {
        let mut acc = 0.0;
        for (k, r) in ranks.iter().enumerate() {
            acc += r;
            if target < acc {
                return k;
            }
        }
        NP - 1
    };

    let mut trials = Vec::new();
    let mut params = Vec::new();
    let mut perturbed = Vec::new();
    for i in 0..NP {
        let slot = t.idx(5);
        let (mf, mcr) = if slot == 4 { (0.9, Some(0.9)) } else { (m_f[slot], m_cr[slot]) };
        let mut f = loop {
            let c = t.cauchy(mf, 0.1);
            if c > 0.0 {
                break c.min(1.0);
            }
        };
        // nfe < 0.6 nfe_max caps F at 0.7.
        if f > 0.7 {
            f = 0.7;
        }
        let mut cr = match mcr {
            Some(m) => (m + 0.1 * t.normal()).clamp(0.0, 1.0),
            None => 0.0,
        };
        // 0.25 nfe_max <= nfe < 0.5 nfe_max: CR floor 0.6.
        cr = cr.max(0.6);

        let gate = t.u();
        let jump = gate < jumping_rate;

        let pbest = loop {
            let r = t.idx(pool);
            if r != i {
                break r;
            }
        };
        let pr1 = loop {
            let r = roulette(t.u() * total_rank);
            if r != i {
                break r;
            }
        };
        // Archive is empty in the first generation.
        assert!(pop.len() == NP);
        let pr2 = loop {
            let r = roulette(t.u() * total_rank);
            if r != i && r != pr1 {
                break r;
            }
        };
        let j_rand = t.idx(D);
        let xi = pop[i].x.clone();
        let mut trial = vec![0.0; D];
        for j in 0..D {
            let crosses = t.u() < cr || j == j_rand;
            trial[j] = if crosses {
                xi[j] + fw_mult * f * (pop[pbest].x[j] - xi[j]) + f * (pop[pr1].x[j] - pop[pr2].x[j])
            } else if jump {
                t.cauchy(xi[j], 0.1)
            } else {
                xi[j]
            };
            if trial[j] < LO {
                trial[j] = (LO + xi[j]) / 2.0;
            } else if trial[j] > HI {
                trial[j] = (HI + xi[j]) / 2.0;
            }
        }
        trials.push(trial);
        params.push((f, cr));
        perturbed.push(jump);
    }

    let mut archive = Vec::new();
    let (mut s_f, mut s_cr, mut deltas) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..NP {
        let fu = sphere(&trials[i]);
        nfe += 1;
        if fu <= pop[i].f {
            let delta = pop[i].f - fu;
            if delta > 0.0 {
                s_f.push(params[i].0);
                s_cr.push(params[i].1);
                deltas.push(delta);
            }
            archive.push(pop[i].clone());
            pop[i] = Ind {
                x: trials[i].clone(),
                f: fu,
                sf: params[i].0,
                scr: params[i].1,
            };
        }
    }

    // LPSR: round(5 - 10/15 * 1) = 4.
    let next = (NP as f64 - nfe as f64 / NFE_MAX as f64 * (NP as f64 - 4.0)).round() as usize;
    assert_eq!(next, 4);
    sort(&mut pop);
    pop.truncate(next);
    let trimmed = archive.len() > next;
    while archive.len() > next {
        let k = t.idx(archive.len());
        archive.swap_remove(k);
    }

    let mut update_pos = 0;
    if !deltas.is_empty() {
        m_f[0] = lehmer(&s_f, &deltas);
        let max_cr = s_cr.iter().cloned().fold(0.0, f64::max);
        m_cr[0] = if max_cr == 0.0 { None } else { Some(lehmer(&s_cr, &deltas)) };
        update_pos = 1;
    }

    Reference {
        pop,
        archive,
        m_f,
        m_cr,
        update_pos,
        s_f,
        s_cr,
        deltas,
        trials,
        perturbed,
        nfe,
        consumed: t.pos,
        trimmed,
    }
}

macro_rules! ensure_eq {
    ($a:expr, $b:expr) => {
        if $a != $b {
            return Err(format!("{} != {}: {:?} vs {:?}", stringify!($a), stringify!($b), $a, $b));
        }
    };
}

/// Runs the engine and the reference on the same script and compares every
/// field exactly.
pub fn check(seed: u64, jumping_rate: f64) -> Result<Reference, String> {
    let script = lcg_script(seed, 2000);
    let expected = reference(&script, jumping_rate);

    let problem = registry::problem("sphere", D).map_err(|e| e.to_string())?;
    let cfg = RunConfig::new(D)
        .with_np_init(NP)
        .with_budget(NFE_MAX)
        .with_jumping_rate(jumping_rate);
    let mut rng = ScriptedRng::new(script.iter().copied());
    let mut engine = IlshadeRsp::new(cfg, &problem, &mut rng).map_err(|e| e.to_string())?;
    let report = engine.step(&mut rng).map_err(|e| e.to_string())?;

    let pop = engine.population();
    ensure_eq!(pop.nfe, expected.nfe);
    ensure_eq!(pop.members.len(), expected.pop.len());
    for (m, e) in pop.members.iter().zip(&expected.pop) {
        ensure_eq!(m.x, e.x);
        ensure_eq!(m.f, e.f);
        ensure_eq!(m.scale, e.sf);
        ensure_eq!(m.crossover_rate, e.scr);
    }
    ensure_eq!(pop.archive.len(), expected.archive.len());
    for (m, e) in pop.archive.iter().zip(&expected.archive) {
        ensure_eq!((&m.x, m.f, m.scale, m.crossover_rate), (&e.x, e.f, e.sf, e.scr));
    }

    let mem = engine.memory();
    ensure_eq!(mem.f_values(), expected.m_f.as_slice());
    let slots: Vec<Option<f64>> = mem
        .cr_slots()
        .iter()
        .map(|s| match s {
            CrSlot::Value(v) => Some(*v),
            CrSlot::Terminal => None,
        })
        .collect();
    ensure_eq!(slots, expected.m_cr);
    ensure_eq!(mem.update_pos(), expected.update_pos);

    ensure_eq!(report.success.s_f, expected.s_f);
    ensure_eq!(report.success.s_cr, expected.s_cr);
    ensure_eq!(report.success.deltas, expected.deltas);
    let trial_x: Vec<Vec<f64>> = report.trials.iter().map(|t| t.x.clone()).collect();
    ensure_eq!(trial_x, expected.trials);
    let flags: Vec<bool> = report.trials.iter().map(|t| t.perturbed).collect();
    ensure_eq!(flags, expected.perturbed);
    ensure_eq!(engine.perturbed_trials(), flags.iter().filter(|&&b| b).count() as u64);
    ensure_eq!(rng.consumed(), expected.consumed);
    Ok(expected)
}
