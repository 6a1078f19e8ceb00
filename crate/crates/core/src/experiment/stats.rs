//! Order statistics and best-so-far curve aggregation.

use crate::evolve::RunLog;

/// Lower median: the element at rank `⌈n/2⌉` of the sorted values.
pub fn lower_median<T: Copy + PartialOrd>(sorted: &[T]) -> Option<T> {
    (!sorted.is_empty()).then(|| sorted[(sorted.len() - 1) / 2])
}

/// Nearest-rank percentile for `p` in `(0, 1]`.
pub fn nearest_rank<T: Copy>(sorted: &[T], p: f64) -> Option<T> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (p * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

/// Evaluations-to-solve of one replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveRecord {
    pub replicate: usize,
    pub seed: u64,
    /// Budget + 1 when unsolved.
    pub evals_to_solve: usize,
    pub solved: bool,
    /// The run stopped on an error; excluded from all statistics.
    pub failed: bool,
}

/// Solve statistics over the completed replicates. Unsolved runs take part
/// with their censored value, so a median is censored when it lands on one.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveStats {
    pub completed: usize,
    pub solved: usize,
    pub median: usize,
    pub q1: usize,
    pub q3: usize,
    pub median_censored: bool,
}

impl SolveStats {
    pub fn from_records(records: &[SolveRecord]) -> Option<SolveStats> {
        let mut done: Vec<(usize, bool)> = records
            .iter()
            .filter(|r| !r.failed)
            .map(|r| (r.evals_to_solve, r.solved))
            .collect();
        // Solved runs sort ahead of censored ones with the same count.
        done.sort_by_key(|&(e, s)| (e, !s));
        let (median, solved) = lower_median(&done)?;
        Some(SolveStats {
            completed: done.len(),
            solved: done.iter().filter(|d| d.1).count(),
            median,
            q1: nearest_rank(&done, 0.25)?.0,
            q3: nearest_rank(&done, 0.75)?.0,
            median_censored: !solved,
        })
    }
}

/// One row of the aggregated best-so-far curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub eval_index: usize,
    pub median: f64,
    pub std_dev: f64,
}

/// Median and standard deviation of best-so-far across runs at every
/// evaluation index. Runs that stopped early carry their last value forward.
pub fn best_so_far_curve(logs: &[&RunLog]) -> Vec<CurvePoint> {
    let len = logs.iter().map(|l| l.records.len()).max().unwrap_or(0);
    let mut column = Vec::with_capacity(logs.len());
    (0..len)
        .map(|i| {
            column.clear();
            column.extend(logs.iter().filter_map(|l| {
                let r = &l.records;
                (!r.is_empty()).then(|| r[i.min(r.len() - 1)].best_so_far)
            }));
            let mean = column.iter().sum::<f64>() / column.len() as f64;
            let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / column.len() as f64;
            column.sort_by(f64::total_cmp);
            CurvePoint {
                eval_index: i + 1,
                median: lower_median(&column).unwrap_or(f64::NAN),
                std_dev: var.sqrt(),
            }
        })
        .collect()
}
