//! Single-ground-truth top-N metrics. `rank` is 1-based.

pub fn mrr_at_n(rank: usize, n: usize) -> f64 {
    debug_assert!(rank >= 1);
    if rank <= n {
        1.0 / rank as f64
    } else {
        0.0
    }
}

pub fn hr_at_n(rank: usize, n: usize) -> f64 {
    if rank <= n {
        1.0
    } else {
        0.0
    }
}

pub fn ndcg_at_n(rank: usize, n: usize) -> f64 {
    if rank <= n {
        1.0 / (rank as f64 + 1.0).log2()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_is_perfect() {
        for n in [1, 5, 20] {
            assert_eq!((mrr_at_n(1, n), hr_at_n(1, n), ndcg_at_n(1, n)), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn rank_three() {
        assert!((mrr_at_n(3, 5) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(ndcg_at_n(3, 5), 0.5);
    }

    #[test]
    fn cutoff_boundary() {
        for n in [5, 20] {
            assert_eq!(mrr_at_n(n, n), 1.0 / n as f64);
            assert_eq!(hr_at_n(n, n), 1.0);
            assert_eq!(ndcg_at_n(n, n), 1.0 / ((n + 1) as f64).log2());
            assert_eq!((mrr_at_n(n + 1, n), hr_at_n(n + 1, n), ndcg_at_n(n + 1, n)), (0.0, 0.0, 0.0));
        }
        assert_eq!(mrr_at_n(7, 5), 0.0);
        assert_eq!(mrr_at_n(7, 20), 1.0 / 7.0);
    }
}
