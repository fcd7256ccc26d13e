//! Seeded random trace-normalised piecewise-constant Hamiltonians.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::hamiltonian::{families::gamma_entries, Entries, HamiltonianModel, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomHamSpec {
    pub seed: u64,
    pub n_segments: usize,
    /// Segment lengths are log-uniform on this range.
    pub length_range: (f64, f64),
}

impl RandomHamSpec {
    pub fn new(seed: u64) -> Self {
        RandomHamSpec {
            seed,
            n_segments: 8,
            length_range: (1e-4, 1.0),
        }
    }
}

/// Segments `Gamma[sigma, e^{2 i phi}]` with `sigma ~ U[0,1]`, `phi ~ U[0, pi)`,
/// followed by the tail `(1/2, 1/2, 1/2)`.
pub fn gen_random_ham(spec: &RandomHamSpec) -> HamiltonianModel {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.length_range;
    let (llo, lhi) = (lo.ln(), hi.ln());
    let segments = (0..spec.n_segments.max(1))
        .map(|_| {
            let len = if lhi > llo { rng.random_range(llo..lhi).exp() } else { lo };
            let sigma: f64 = rng.random_range(0.0..=1.0);
            let phi: f64 = rng.random_range(0.0..PI);
            Segment {
                len,
                h: gamma_entries(sigma, Complex64::from_polar(1.0, 2.0 * phi)),
            }
        })
        .collect();
    HamiltonianModel::piecewise(segments, Entries::new(0.5, 0.5, 0.5)).expect("Gamma entries are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        for seed in 1..=20 {
            let spec = RandomHamSpec::new(seed);
            let a = gen_random_ham(&spec);
            assert_eq!(a, gen_random_ham(&spec));
            assert!(a.is_trace_normalized());
            let HamiltonianModel::PiecewiseConstant(pc) = &a else { panic!() };
            assert_eq!(pc.segments().len(), 8);
            for s in pc.segments() {
                assert!(s.h.is_psd() && (s.h.trace() - 1.0).abs() < 1e-15);
                assert!(s.len >= 1e-4 && s.len <= 1.0);
            }
        }
        assert_ne!(gen_random_ham(&RandomHamSpec::new(1)), gen_random_ham(&RandomHamSpec::new(2)));
    }

    #[test]
    fn golden_single_segment() {
        let spec = RandomHamSpec {
            n_segments: 1,
            ..RandomHamSpec::new(1)
        };
        let h = gen_random_ham(&spec);
        assert_eq!(h.digest(), GOLDEN_SEED1_N1, "{}", h.to_json());
    }

    const GOLDEN_SEED1_N1: &str = "715387773d6b0833582cee8e146817b63b9bb5e7fdcc74ffe5c0508ae4cddb65";
}
