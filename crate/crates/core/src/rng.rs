//! Counter-based random number streams (Philox2x64-10).
//!
//! Every stream is a pure function of `(seed, stream id, counter)`, so
//! parallel sampling is reproducible: components derive their stream id by
//! hashing a component name, and identical seeds give bit-identical output
//! regardless of call interleaving.

#[allow(unused_imports)]
use num_traits::Float;

const PHILOX_M: u64 = 0xD2B74407B1CE6E93;
const WEYL: u64 = 0x9E3779B97F4A7C15;

/// FNV-1a 64-bit hash, used to derive per-component stream ids.
pub fn component_stream(name: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn philox2x64(mut c0: u64, c1: u64, mut key: u64) -> (u64, u64) {
    let mut x1 = c1;
    for _ in 0..10 {
        let prod = (c0 as u128) * (PHILOX_M as u128);
        let hi = (prod >> 64) as u64;
        let lo = prod as u64;
        c0 = hi ^ key ^ x1;
        x1 = lo;
        key = key.wrapping_add(WEYL);
    }
    (c0, x1)
}

/// A counter-based generator: one Philox2x64-10 block per two outputs.
#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    stream: u64,
    counter: u64,
    buffer: u64,
    have_buffer: bool,
    spare_normal: Option<f64>,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        CounterRng { seed, stream, counter: 0, buffer: 0, have_buffer: false, spare_normal: None }
    }

    /// Stream derived from a component name, e.g. `"gue"` or `"fid-jumps"`.
    pub fn for_component(seed: u64, name: &str) -> Self {
        CounterRng::new(seed, component_stream(name))
    }

    pub fn next_u64(&mut self) -> u64 {
        if self.have_buffer {
            self.have_buffer = false;
            return self.buffer;
        }
        let (a, b) = philox2x64(self.counter, self.stream, self.seed);
        self.counter = self.counter.wrapping_add(1);
        self.buffer = b;
        self.have_buffer = true;
        a
    }

    /// Uniform in `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller; the second value of each pair is
    /// cached.
    pub fn normal(&mut self) -> f64 {
        if let Some(v) = self.spare_normal.take() {
            return v;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * core::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Exact Poisson sample; large means are split into exact chunks.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        assert!(mean >= 0.0 && mean.is_finite());
        let mut remaining = mean;
        let mut total = 0u64;
        while remaining > 0.0 {
            let chunk = remaining.min(30.0);
            remaining -= chunk;
            // Knuth: count uniforms until the product drops below e^{-chunk}
            let limit = (-chunk).exp();
            let mut prod = self.uniform();
            let mut k = 0u64;
            while prod > limit {
                prod *= self.uniform();
                k += 1;
            }
            total += k;
        }
        total
    }
}
