//! Gaussian input noise and counter-based random streams.
//!
//! Every Monte-Carlo sample draws its noise from its own ChaCha stream keyed
//! by `(seed, stream tag)` and selected by the sample index, so a sample's
//! noise never depends on how many other samples were drawn or on which
//! thread drew them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{real, Float};

/// Which family of samples a stream belongs to. FoBG and ZoBG batches never
/// share noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    Fobg,
    Zobg,
    Eval,
    Custom(u64),
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Fobg => 0x666f_6267,
            Stream::Zobg => 0x7a6f_6267,
            Stream::Eval => 0x6576_616c,
            Stream::Custom(t) => t.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x6375_7374,
        }
    }
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed, a label and a real value
/// (FNV-1a over the label bytes and the value's bit pattern, then SplitMix).
pub fn derive_seed(seed: u64, label: &str, value: f64) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = FNV_OFFSET;
    for b in label
        .bytes()
        .chain(value.to_bits().to_le_bytes())
        .chain(seed.to_le_bytes())
    {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(h)
}

/// The random generator for sample `index` of `stream`.
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(stream.tag())));
    rng.set_stream(index);
    rng
}

/// Isotropic Gaussian `N(0, σ²·I_m)` injected on each control input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel<T> {
    sigma: T,
    dim: usize,
}

impl<T: Float> NoiseModel<T> {
    pub fn new(sigma: T, dim: usize) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::Domain(format!("noise sigma must be positive, got {sigma}")));
        }
        Ok(Self { sigma, dim })
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `∇ψ(w) = w/σ²` for `ψ(w) = ‖w‖²/2σ²`.
    pub fn score(&self, w: &[T]) -> Vec<T> {
        let inv = T::one() / (self.sigma * self.sigma);
        w.iter().map(|&wi| wi * inv).collect()
    }

    /// `ψ(w) = ‖w‖²/2σ²`, the negative log density up to a constant.
    pub fn potential(&self, w: &[T]) -> T {
        let two = real::<T>(2.0);
        w.iter().map(|&wi| wi * wi).sum::<T>() / (two * self.sigma * self.sigma)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, horizon: usize) -> Vec<Vec<T>> {
        (0..horizon)
            .map(|_| {
                (0..self.dim)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        real::<T>(z) * self.sigma
                    })
                    .collect()
            })
            .collect()
    }

    /// Noise path for sample `index` of `stream`.
    pub fn stream(&self, seed: u64, stream: Stream, index: u64, horizon: usize) -> Vec<Vec<T>> {
        self.sample(&mut stream_rng(seed, stream, index), horizon)
    }

    pub fn zeros(&self, horizon: usize) -> Vec<Vec<T>> {
        vec![vec![T::zero(); self.dim]; horizon]
    }
}
