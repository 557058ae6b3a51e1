use super::{clog2, lg};

/// Parameters governing how fast the frequency table may grow.
///
/// `c` is the constant of the `(n/c)·lg n` term of the space budget, `alpha`
/// the number of table-sized regions that must fit in the freed space (the
/// table itself plus the block counter's scratch table), `f0` the capacity
/// of the very first table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityPolicy {
    pub c: u32,
    pub alpha: f64,
    pub f0: usize,
}

impl Default for CapacityPolicy {
    fn default() -> Self {
        CapacityPolicy {
            c: 4,
            alpha: 2.0,
            f0: 3,
        }
    }
}

impl CapacityPolicy {
    pub fn new(c: u32, alpha: f64, f0: usize) -> Self {
        assert!(c >= 1, "c must be positive");
        assert!(alpha >= 1.0, "alpha must be at least one");
        assert!(f0 >= 1, "initial capacity must be positive");
        CapacityPolicy { c, alpha, f0 }
    }

    /// Bits per table entry: `⌈lg(σ²·n_i/2)⌉` for the alphabet size after
    /// the next replacement.
    pub fn entry_bits(sigma_next: u64, n_i: u64) -> u32 {
        let sigma = sigma_next.max(1) as u128;
        let v = (sigma * sigma * n_i.max(2) as u128) / 2;
        let v = u64::try_from(v).unwrap_or(u64::MAX);
        clog2(v).max(1)
    }

    /// Characters that must be freed to pay for one more table entry:
    /// `β = min(δ/⌈lg σ⌉, c·δ/lg n)`.
    pub fn beta(&self, sigma_next: u64, n_i: u64, n: u64) -> f64 {
        let delta = f64::from(Self::entry_bits(sigma_next, n_i));
        let per_char = f64::from(clog2(sigma_next).max(1));
        (delta / per_char).min(f64::from(self.c) * delta / lg(n))
    }

    /// Minimum growth factor `γ = 1 + 2/(5αβ)` of the table between rounds.
    pub fn gamma(&self, sigma_next: u64, n_i: u64, n: u64) -> f64 {
        1.0 + 2.0 / (5.0 * self.alpha * self.beta(sigma_next, n_i, n))
    }

    /// Capacity of the next round's table:
    /// `f + ⌈max(2, (f-1)/2) / (αβ)⌉`, never below `⌈γ·f⌉`.
    pub fn next_capacity(&self, f_k: usize, n: u64, n_i: u64, sigma_next: u64) -> usize {
        let ab = self.alpha * self.beta(sigma_next, n_i, n);
        let gain = 2f64.max((f_k as f64 - 1.0) / 2.0) / ab;
        let grown = f_k + gain.ceil() as usize;
        let floor = (self.gamma(sigma_next, n_i, n) * f_k as f64).ceil() as usize;
        grown.max(floor)
    }

    /// Same update with an explicit `αβ` product, mainly for checking the
    /// arithmetic in isolation.
    pub fn grow_with(f_k: usize, alpha_beta: f64) -> usize {
        let gain = 2f64.max((f_k as f64 - 1.0) / 2.0) / alpha_beta;
        let gamma = 1.0 + 2.0 / (5.0 * alpha_beta);
        (f_k + gain.ceil() as usize).max((gamma * f_k as f64).ceil() as usize)
    }
}
