//! Stateless counter-based generator.
//!
//! Output `i` for key `k` is the SplitMix64 finaliser applied to
//! `k + (i + 1)·γ` with `γ = 0x9E3779B97F4A7C15`, so the stream for a seed is
//! exactly the standard SplitMix64 sequence and any index can be computed
//! directly. Disjoint counter ranges can be handed to separate workers and
//! merged without changing results.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: seed }
    }

    #[inline]
    pub fn u64_at(&self, counter: u64) -> u64 {
        mix64(self.key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GAMMA)))
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn f64_at(&self, counter: u64) -> f64 {
        (self.u64_at(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Independent child generator for stream `id`.
    pub fn split(&self, id: u64) -> CounterRng {
        CounterRng {
            key: mix64(self.key ^ mix64(id.wrapping_add(GAMMA))),
        }
    }

    /// Sequential cursor starting at `counter`.
    pub fn cursor(&self, counter: u64) -> Cursor {
        Cursor {
            rng: *self,
            counter,
        }
    }
}

/// Sequential view of a [`CounterRng`].
#[derive(Debug, Clone)]
pub struct Cursor {
    rng: CounterRng,
    counter: u64,
}

impl Cursor {
    pub fn next_u64(&mut self) -> u64 {
        let v = self.rng.u64_at(self.counter);
        self.counter += 1;
        v
    }

    pub fn next_f64(&mut self) -> f64 {
        let v = self.rng.f64_at(self.counter);
        self.counter += 1;
        v
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}
