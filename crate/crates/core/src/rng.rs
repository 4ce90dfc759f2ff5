//! Deterministic pseudo-random sampling.
//!
//! Every sampling operation in this crate is a pure function of its inputs
//! and a 64-bit seed. The generator is SplitMix64 (Steele, Lea & Flood's
//! mixing function, the same one `java.util.SplittableRandom` uses), chosen
//! because it is tiny, fast, and precisely specified — two implementations
//! of this toolkit that agree on the seed agree on every sample they draw.
//!
//! Bounded draws use rejection sampling on the top of the 64-bit output, so
//! there is no modulo bias and the draw sequence is fully determined by the
//! seed. Shuffles are Fisher-Yates.

/// SplitMix64 generator state.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)` built from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)` without modulo bias.
    pub fn gen_range(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "gen_range bound must be positive");
        // Rejection sampling: retry while the draw falls in the biased tail.
        let zone = u64::MAX - (u64::MAX % bound) - 1;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }

    /// Standard normal deviate (Box-Muller, polar-free form).
    pub fn next_gaussian(&mut self) -> f64 {
        // Draw u in (0,1] to keep ln finite.
        let u = 1.0 - self.next_f64();
        let v = self.next_f64();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.gen_range(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// `k` distinct indices drawn uniformly from `0..n`, in draw order.
    ///
    /// Partial Fisher-Yates over an index table; panics if `k > n`.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} items from {n}");
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.gen_range((n - i) as u64) as usize;
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx
    }

    /// Derive an independent child generator. The child stream does not
    /// overlap the parent's future output for any practical draw count.
    pub fn fork(&mut self) -> Rng {
        Rng::new(self.next_u64())
    }
}

/// FNV-1a hash of a string, used to mix identifiers into seeds so per-user
/// sampling is independent of iteration order.
pub fn hash_str(s: &str) -> u64 {
    let mut h: u64 = 0xCBF29CE484222325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001B3);
    }
    h
}

/// Combine a run seed with a string label into a derived seed.
pub fn mix_seed(seed: u64, label: &str) -> u64 {
    // One extra SplitMix64 round decorrelates neighbouring seeds.
    Rng::new(seed ^ hash_str(label)).next_u64()
}
