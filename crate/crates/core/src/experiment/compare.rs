use std::fmt::Write as _;

use crate::stats::{self, FriedmanResult, PostHocRow, Verdict};

use super::records::ResultRow;
use super::ExperimentError;

/// Wilcoxon verdicts of every algorithm against a control, per problem
/// cell, plus Friedman ranks over the cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub control: String,
    /// All algorithms in first-seen order, control included.
    pub algorithms: Vec<String>,
    /// `(problem, D)` in first-seen order.
    pub cells: Vec<(String, usize)>,
    /// Mean FEV per cell and algorithm.
    pub means: Vec<Vec<f64>>,
    /// `verdicts[cell][alg]`: `+` when the algorithm beats the control;
    /// `None` in the control's column.
    pub verdicts: Vec<Vec<Option<Verdict>>>,
    /// `(+, =, -)` per algorithm; zero for the control.
    pub summary: Vec<(usize, usize, usize)>,
    /// Present when there are at least two cells.
    pub friedman: Option<FriedmanResult>,
    pub post_hoc: Vec<PostHocRow>,
}

fn first_seen<T: PartialEq + Clone>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

/// Compares result rows at significance `alpha` against `control`.
pub fn compare(rows: &[ResultRow], alpha: f64, control: &str) -> Result<Comparison, ExperimentError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ExperimentError::Compare(format!("alpha {alpha} outside (0, 1)")));
    }
    let algorithms = first_seen(rows.iter().map(|r| r.algorithm.clone()));
    let control_idx = algorithms
        .iter()
        .position(|a| a == control)
        .ok_or_else(|| ExperimentError::Compare(format!("control {control:?} has no results")))?;
    if algorithms.len() < 2 {
        return Err(ExperimentError::Compare("need at least two algorithms".into()));
    }
    let cells = first_seen(rows.iter().map(|r| (r.problem.clone(), r.dimension)));

    let mut samples = vec![vec![Vec::new(); algorithms.len()]; cells.len()];
    for r in rows {
        let c = cells.iter().position(|(p, d)| *p == r.problem && *d == r.dimension).expect("seen");
        let a = algorithms.iter().position(|x| *x == r.algorithm).expect("seen");
        samples[c][a].push(r.fev);
    }

    let mut verdicts = Vec::with_capacity(cells.len());
    let mut means = Vec::with_capacity(cells.len());
    let mut summary = vec![(0, 0, 0); algorithms.len()];
    for (c, cell) in cells.iter().enumerate() {
        let base = &samples[c][control_idx];
        let mut row = Vec::with_capacity(algorithms.len());
        let mut row_means = Vec::with_capacity(algorithms.len());
        for (a, sample) in samples[c].iter().enumerate() {
            if sample.is_empty() {
                return Err(ExperimentError::Compare(format!(
                    "{} has no runs on {} D={}",
                    algorithms[a], cell.0, cell.1
                )));
            }
            row_means.push(sample.iter().sum::<f64>() / sample.len() as f64);
            if a == control_idx {
                row.push(None);
                continue;
            }
            let verdict = stats::wilcoxon_rank_sum(sample, base, alpha)?.verdict;
            match verdict {
                Verdict::Better => summary[a].0 += 1,
                Verdict::Indistinguishable => summary[a].1 += 1,
                Verdict::Worse => summary[a].2 += 1,
            }
            row.push(Some(verdict));
        }
        verdicts.push(row);
        means.push(row_means);
    }

    let (friedman, post_hoc) = if cells.len() >= 2 {
        for (c, cell) in cells.iter().enumerate() {
            let n0 = samples[c][0].len();
            if let Some(a) = samples[c].iter().position(|s| s.len() != n0) {
                return Err(ExperimentError::Compare(format!(
                    "mismatched run counts on {} D={}: {} has {}, {} has {}",
                    cell.0,
                    cell.1,
                    algorithms[0],
                    n0,
                    algorithms[a],
                    samples[c][a].len()
                )));
            }
        }
        let result = stats::friedman(&means)?;
        let post = stats::post_hoc_vs_control(&result, control_idx)?;
        (Some(result), post)
    } else {
        (None, Vec::new())
    };

    Ok(Comparison {
        control: control.to_owned(),
        algorithms,
        cells,
        means,
        verdicts,
        summary,
        friedman,
        post_hoc,
    })
}

impl Comparison {
    /// Plain-text report: verdict table, summary row, Friedman section.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let width = self.algorithms.iter().map(|a| a.len()).max().unwrap_or(0).max(12);
        let cell_width = self
            .cells
            .iter()
            .map(|(p, d)| p.len() + d.to_string().len() + 3)
            .max()
            .unwrap_or(0)
            .max(8);
        let _ = write!(out, "{:<cell_width$}", "problem");
        for a in &self.algorithms {
            let _ = write!(out, "  {a:>width$}");
        }
        out.push('\n');
        for (c, (p, d)) in self.cells.iter().enumerate() {
            let _ = write!(out, "{:<cell_width$}", format!("{p} D={d}"));
            for (a, v) in self.verdicts[c].iter().enumerate() {
                let mark = v.map(|v| v.symbol()).unwrap_or(' ');
                let _ = write!(out, "  {:>width$}", format!("{:.2e} {mark}", self.means[c][a]));
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<cell_width$}", "+/=/-");
        for (a, (b, e, w)) in self.summary.iter().enumerate() {
            let text = if self.algorithms[a] == self.control {
                "control".to_owned()
            } else {
                format!("{b}/{e}/{w}")
            };
            let _ = write!(out, "  {text:>width$}");
        }
        out.push('\n');
        if let Some(f) = &self.friedman {
            let _ = writeln!(
                out,
                "\nFriedman: N = {}, chi-square = {:.2}, df = {}, p = {:.3e}",
                f.n, f.chi_square, f.df, f.p_value
            );
            let _ = writeln!(
                out,
                "{:<width$}  {:>8}  {:>10}  {:>10}  {:>10}",
                "algorithm", "rank", "z", "p", "adj. p"
            );
            for (a, name) in self.algorithms.iter().enumerate() {
                let rank = f.avg_ranks[a];
                match self.post_hoc.iter().find(|r| r.index == a) {
                    Some(r) => {
                        let _ = writeln!(
                            out,
                            "{name:<width$}  {rank:>8.2}  {:>10.3e}  {:>10.3e}  {:>10.3e}",
                            r.z, r.p_value, r.adjusted_p
                        );
                    }
                    None => {
                        let _ = writeln!(out, "{name:<width$}  {rank:>8.2}  {:>10}", "control");
                    }
                }
            }
        }
        out
    }
}
