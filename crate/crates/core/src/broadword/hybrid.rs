use crate::model::lg;

/// Which top-d counter to run at the start of a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountingMethod {
    /// Block-wise counting with a scratch table.
    Tradeoff,
    /// Per-position word-packed counting.
    BitParallel,
}

/// Cost estimates of the two counters for one round, in abstract units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridCosts {
    pub tradeoff: f64,
    pub bitparallel: f64,
}

impl HybridCosts {
    /// `(n−f)·n·lg f / f` for the block counter and
    /// `(n−f)²·lg lg lg n / log_τ n` for the word-packed one. Logarithms are
    /// clamped at one so tiny inputs do not produce zero or negative costs.
    pub fn estimate(f_k: usize, n: usize, tau: u64) -> Self {
        let f = f_k.max(1) as f64;
        let nf = n as f64;
        let rest = (nf - f).max(0.0);
        let lgn = lg(n as u64);
        let lglglg = lgn.log2().max(1.0).log2().max(1.0);
        let log_tau_n = (lgn / lg(tau)).max(1.0);
        HybridCosts {
            tradeoff: rest * nf * f.log2().max(1.0) / f,
            bitparallel: rest * rest * lglglg / log_tau_n,
        }
    }
}

/// Chooses the counter for a round with capacity `f_k` on a text of length
/// `n` over `tau` symbols.
///
/// When `τ ≥ n` a word holds a single symbol and packing buys nothing, so
/// the block counter is used; otherwise the cheaper estimate wins.
pub fn hybrid_pick(_round: usize, f_k: usize, n: usize, tau: u64) -> CountingMethod {
    if tau >= n as u64 {
        return CountingMethod::Tradeoff;
    }
    let c = HybridCosts::estimate(f_k, n, tau);
    if c.bitparallel < c.tradeoff {
        CountingMethod::BitParallel
    } else {
        CountingMethod::Tradeoff
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_table_prefers_packed_counting() {
        assert_eq!(hybrid_pick(0, 3, 1 << 20, 4), CountingMethod::BitParallel);
    }

    #[test]
    fn large_table_prefers_blocks() {
        let n = 1 << 20;
        assert_eq!(hybrid_pick(40, n / 2, n, 4), CountingMethod::Tradeoff);
    }

    #[test]
    fn wide_alphabet_prefers_blocks() {
        assert_eq!(hybrid_pick(0, 3, 100, 100), CountingMethod::Tradeoff);
        assert_eq!(hybrid_pick(0, 3, 100, 1000), CountingMethod::Tradeoff);
    }
}
