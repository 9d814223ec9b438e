use rand::Rng;

use crate::autodiff::{Graph, Scalar};
use crate::data::{valid_len, valid_region, ItemId, SessionBatch};
use crate::error::Result;
use crate::masking::sample_gaps;
use crate::model::{rank_of, ModelKind, Network, Recommender};
use crate::train::metrics::{hr_at_n, mrr_at_n, ndcg_at_n};
use crate::train::EvalReport;

pub const CUTOFFS: [usize; 2] = [5, 20];

const CHUNK: usize = 512;

/// Ranks the last valid item of every row given the items before it.
///
/// Rows with fewer than two items have no query and are counted in
/// `n_skipped`.
pub fn evaluate_last_item<R: Recommender + ?Sized>(model: &R, rows: &[Vec<ItemId>]) -> Result<EvalReport> {
    let mut report = EvalReport::default();
    let queries: Vec<&[ItemId]> = rows
        .iter()
        .map(|r| valid_region(r))
        .filter(|v| v.len() >= 2)
        .collect();
    report.n_skipped = rows.len() - queries.len();
    let mut sums = [[0.0f64; 2]; 3];
    for chunk in queries.chunks(CHUNK) {
        let prefixes: Vec<&[ItemId]> = chunk.iter().map(|q| &q[..q.len() - 1]).collect();
        let scores = model.score(&prefixes)?;
        for (q, s) in chunk.iter().zip(&scores) {
            let rank = rank_of(s, *q.last().unwrap());
            for (c, &n) in CUTOFFS.iter().enumerate() {
                sums[0][c] += mrr_at_n(rank, n);
                sums[1][c] += hr_at_n(rank, n);
                sums[2][c] += ndcg_at_n(rank, n);
            }
        }
    }
    let n = queries.len();
    report.n_queries = n;
    if n > 0 {
        let nf = n as f64;
        report.mrr5 = sums[0][0] / nf;
        report.mrr20 = sums[0][1] / nf;
        report.hr5 = sums[1][0] / nf;
        report.hr20 = sums[1][1] / nf;
        report.ndcg5 = sums[2][0] / nf;
        report.ndcg20 = sums[2][1] / nf;
    }
    Ok(report)
}

/// Fraction of training prediction sites whose arg-max (padding excluded)
/// is the target. Gap-filling models draw fresh gaps from `rng`.
pub fn site_accuracy<T: Scalar, R: Rng + ?Sized>(
    net: &Network<T>,
    rows: &[Vec<ItemId>],
    rng: &mut R,
) -> Result<f64> {
    let rows: Vec<&Vec<ItemId>> = rows.iter().filter(|r| valid_len(r) >= 2).collect();
    let mut hits = 0usize;
    let mut total = 0usize;
    for chunk in rows.chunks(CHUNK) {
        let batch = SessionBatch::from_rows(chunk);
        let plans = if net.kind().uses_gaps() {
            chunk
                .iter()
                .map(|r| sample_gaps(r, net.config().gamma, net.config().mask_id(), rng))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let mut g = Graph::new();
        let p = net.bind(&mut g, false);
        let out = net.loss(&mut g, &p, &batch, &plans)?;
        let n = g.value(out.logits).last_dim();
        for (row, &target) in g.data(out.logits).chunks_exact(n).zip(&out.targets) {
            let best = (1..n)
                .max_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap().then(b.cmp(&a)))
                .unwrap();
            hits += usize::from(best == target);
            total += 1;
        }
    }
    debug_assert!(net.kind() != ModelKind::MostPop);
    Ok(if total == 0 { 0.0 } else { hits as f64 / total as f64 })
}
