//! Counter-based Gaussian streams.
//!
//! A stream is keyed by `(seed, purpose, trial)`; the value of element `e` is a
//! pure function of that key and `e`. Every element consumes exactly two
//! 64-bit ChaCha outputs (one Box-Muller draw), so sequential generation and
//! random access agree and results do not depend on execution order.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// ChaCha words (u32) consumed per element.
const WORDS_PER_ELEMENT: u128 = 4;

/// What a stream is used for. Distinct purposes never share randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StreamPurpose {
    Input,
    BobNoise,
    EveNoise,
    MeasurementPenalty,
    Auxiliary(u32),
}

impl StreamPurpose {
    fn code(self) -> u64 {
        match self {
            StreamPurpose::Input => 1,
            StreamPurpose::BobNoise => 2,
            StreamPurpose::EveNoise => 3,
            StreamPurpose::MeasurementPenalty => 4,
            StreamPurpose::Auxiliary(tag) => 0x1_0000_0000 | tag as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    seed: u64,
    purpose: StreamPurpose,
    trial: u64,
    offset: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, purpose: StreamPurpose, trial: u64) -> Self {
        Self {
            seed,
            purpose,
            trial,
            offset: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trial(&self) -> u64 {
        self.trial
    }

    pub fn purpose(&self) -> StreamPurpose {
        self.purpose
    }

    /// Same stream with element indices shifted by `elements`.
    pub fn offset(mut self, elements: u64) -> Self {
        self.offset += elements;
        self
    }

    fn generator(&self, element: u64) -> ChaCha8Rng {
        let mut state = self.seed ^ self.purpose.code().rotate_left(32);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.trial);
        rng.set_word_pos(u128::from(self.offset + element) * WORDS_PER_ELEMENT);
        rng
    }

    fn draw(rng: &mut ChaCha8Rng) -> f64 {
        // (0, 1] and [0, 1) uniforms with 53-bit resolution
        let u1 = ((rng.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64;
        let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    /// Standard normal variate at `element`.
    pub fn normal(&self, element: u64) -> f64 {
        Self::draw(&mut self.generator(element))
    }

    /// Fills `out` with the standard normals at elements `0..out.len()`.
    pub fn fill_standard_normal(&self, out: &mut [f64]) {
        let mut rng = self.generator(0);
        for v in out.iter_mut() {
            *v = Self::draw(&mut rng);
        }
    }

    pub fn standard_normals(&self, count: usize) -> Vec<f64> {
        let mut out = vec![0.0; count];
        self.fill_standard_normal(&mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_matches_random_access() {
        let s = RngStream::new(7, StreamPurpose::BobNoise, 3);
        let seq = s.standard_normals(10);
        for (e, v) in seq.iter().enumerate() {
            assert_eq!(*v, s.normal(e as u64));
        }
        let shifted = s.offset(4).standard_normals(3);
        assert_eq!(&shifted[..], &seq[4..7]);
    }

    #[test]
    fn purposes_and_trials_are_independent() {
        let a = RngStream::new(1, StreamPurpose::Input, 0).standard_normals(4);
        let b = RngStream::new(1, StreamPurpose::EveNoise, 0).standard_normals(4);
        let c = RngStream::new(1, StreamPurpose::Input, 1).standard_normals(4);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn moments_look_standard() {
        let v = RngStream::new(99, StreamPurpose::Auxiliary(5), 0).standard_normals(200_000);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 5.0 / n.sqrt());
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n).sqrt());
    }
}
