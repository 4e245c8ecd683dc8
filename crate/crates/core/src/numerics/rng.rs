use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use super::DenseMatrix;

/// Portable seeded generator.
///
/// The stream is xoshiro256** (Blackman & Vigna) whose 256-bit state is
/// expanded from the 64-bit seed with SplitMix64:
///
/// ```text
/// splitmix64: z = (s += 0x9e3779b97f4a7c15);
///             z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9;
///             z = (z ^ (z >> 27)) * 0x94d049bb133111eb;
///             return z ^ (z >> 31)
/// xoshiro256**: out = rotl(s1 * 5, 7) * 9; t = s1 << 17;
///               s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)
/// ```
///
/// Uniforms take the top 53 bits: `(next >> 11) * 2⁻⁵³`. Normals use the
/// Box-Muller transform on two consecutive uniforms, emitting the cosine
/// branch first and caching the sine branch.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: Xoshiro256StarStar,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            seed,
            inner: Xoshiro256StarStar::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// `rows × cols` matrix of i.i.d. standard normals, filled row-major.
pub fn gaussian(rng: &mut SeededRng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.normal())
}
