//! Seeded synthetic compressed-sensing instances.
//!
//! Randomness comes from ChaCha20 keyed by a 64-bit seed, with independent streams selected by
//! the ChaCha stream id. Normal deviates use the trigonometric Box-Muller transform, so a
//! given `(seed, stream)` yields the same instance on every platform with IEEE-754 `ln`,
//! `sqrt`, `sin` and `cos`.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::LAMBDA_RULE_FRACTION;
use crate::error::{Error, Result};
use crate::model::{norm_inf, DenseMatrix, MeasurementProblem};

/// Recorded in experiment metadata.
pub const NORMAL_METHOD: &str = "box-muller/chacha20";
/// Recorded in experiment metadata.
pub const ROUNDING_RULE: &str = "round-half-up";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: usize,
    /// `M / N`
    pub delta: f64,
    /// `S / M`
    pub rho: f64,
    #[serde(default = "default_noise_var")]
    pub noise_var: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

fn default_noise_var() -> f64 {
    1e-4
}

impl ProblemParams {
    pub fn new(n: usize, delta: f64, rho: f64) -> Self {
        ProblemParams {
            n,
            delta,
            rho,
            noise_var: default_noise_var(),
            seed: 0,
            stream: 0,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        ProblemParams { seed, ..self }
    }

    pub fn with_stream(self, stream: RngStream) -> Self {
        ProblemParams {
            seed: stream.seed,
            stream: stream.stream_id,
            ..self
        }
    }

    pub fn with_noise_var(self, noise_var: f64) -> Self {
        ProblemParams { noise_var, ..self }
    }

    /// Number of measurements, `round(δN)`.
    pub fn m(&self) -> usize {
        round_half_up(self.delta * self.n as f64)
    }

    /// Sparsity, `round(ρM)`.
    pub fn s(&self) -> usize {
        round_half_up(self.rho * self.m() as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v <= 1.0;
        if !in_unit(self.delta) || !in_unit(self.rho) {
            return Err(Error::InvalidParameter(format!(
                "delta and rho must lie in (0, 1], got ({}, {})",
                self.delta, self.rho
            )));
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be nonnegative, got {}",
                self.noise_var
            )));
        }
        let (m, s) = (self.m(), self.s());
        if m == 0 || s == 0 {
            return Err(Error::InvalidParameter(format!(
                "n = {}, delta = {}, rho = {} rounds to M = {m}, S = {s}",
                self.n, self.delta, self.rho
            )));
        }
        debug_assert!(s <= m && m <= self.n);
        Ok(())
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Stream for `trial` of grid cell `(row, col)`.
///
/// The triple is packed as `trial << 32 | row << 16 | col` (so `trial < 2³²` and
/// `row, col < 2¹⁶`), offset by one, and passed through the SplitMix64 finalizer. Both steps
/// are bijective, so distinct triples never share a stream, and no derived id equals the
/// default stream 0. This mapping is part of the reproducibility contract and must not change.
///
/// # Panics
/// If `trial`, `row` or `col` exceed the packing widths.
pub fn derive_stream(seed: u64, trial: usize, cell: (usize, usize)) -> RngStream {
    let (row, col) = cell;
    assert!(
        trial < 1 << 32 && row < 1 << 16 && col < 1 << 16,
        "stream coordinates out of range: trial {trial}, cell ({row}, {col})"
    );
    let packed = ((trial as u64) << 32) | ((row as u64) << 16) | col as u64;
    RngStream {
        seed,
        stream_id: splitmix64(packed.wrapping_add(1)),
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Standard normal deviates by the Box-Muller transform; the second value of each pair is
/// kept for the next call.
pub struct Gaussian<R> {
    rng: R,
    spare: Option<f64>,
}

impl<R: Rng> Gaussian<R> {
    pub fn new(rng: R) -> Self {
        Gaussian { rng, spare: None }
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // (0, 1] keeps the logarithm finite
        let u1: f64 = 1.0 - self.rng.gen::<f64>();
        let u2: f64 = self.rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }
}

/// Draw `(problem, truth)`.
///
/// Order of draws: `Φ` row-major, support (uniform without replacement), nonzero amplitudes in
/// increasing index order, then measurement noise. `Φ` columns are normalized before `y` is
/// formed, and `λ` is set by the `0.01‖Φᵀy‖∞` rule.
pub fn generate(params: &ProblemParams) -> Result<(MeasurementProblem, Vec<f64>)> {
    params.validate()?;
    let (n, m, s) = (params.n, params.m(), params.s());
    let stream = RngStream {
        seed: params.seed,
        stream_id: params.stream,
    };
    let mut gauss = Gaussian::new(stream.rng());

    let mut data: Vec<f64> = (0..m * n).map(|_| gauss.sample()).collect();
    let mut norms = vec![0.0; n];
    for row in data.chunks(n) {
        for (acc, v) in norms.iter_mut().zip(row) {
            *acc += v * v;
        }
    }
    for norm in norms.iter_mut() {
        *norm = norm.sqrt();
    }
    for row in data.chunks_mut(n) {
        for (v, norm) in row.iter_mut().zip(&norms) {
            *v /= norm;
        }
    }
    let phi = DenseMatrix::new(m, n, data)?;

    let mut support = index::sample(gauss.rng_mut(), n, s).into_vec();
    support.sort_unstable();
    let mut truth = vec![0.0; n];
    for &i in &support {
        truth[i] = gauss.sample();
    }
    let sigma = params.noise_var.sqrt();
    let mut y = phi.matvec(&truth);
    for yi in y.iter_mut() {
        *yi += sigma * gauss.sample();
    }

    let lambda = LAMBDA_RULE_FRACTION * norm_inf(&phi.matvec_t(&y));
    if lambda == 0.0 {
        return Err(Error::Domain("generated measurements are zero".into()));
    }
    let problem = MeasurementProblem::new(phi, y, lambda, None, Some(truth.clone()))?;
    Ok((problem, truth))
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::model::residual;

    #[test]
    fn sizes_and_normalization() {
        let params = ProblemParams::new(100, 0.5, 0.2).with_seed(3);
        assert_eq!((params.m(), params.s()), (50, 10));
        let (p, truth) = generate(&params).unwrap();
        assert_eq!((p.m(), p.n()), (50, 100));
        for norm in p.phi().column_norms() {
            assert!((norm - 1.0).abs() <= 1e-12);
        }
        assert_eq!(truth.iter().filter(|v| **v != 0.0).count(), 10);
        assert_eq!(p.truth().unwrap(), truth.as_slice());
    }

    #[test]
    fn noiseless_single_spike_is_consistent() {
        let params = ProblemParams::new(40, 0.5, 0.05)
            .with_noise_var(0.0)
            .with_seed(9);
        assert_eq!(params.s(), 1);
        let (p, truth) = generate(&params).unwrap();
        assert_eq!(
            residual(&p, &truth).iter().map(|r| r.abs()).sum::<f64>(),
            0.0
        );
    }

    #[test]
    fn fixed_seed_is_bitwise_reproducible() {
        let params = ProblemParams::new(60, 0.6, 0.3).with_seed(42);
        let (a, ta) = generate(&params).unwrap();
        let (b, tb) = generate(&params).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        let (c, _) = generate(&params.with_seed(43)).unwrap();
        assert_ne!(a.y(), c.y());
    }

    #[test]
    fn zero_sparsity_is_rejected() {
        assert!(generate(&ProblemParams::new(10, 0.1, 0.1)).is_err());
        assert!(generate(&ProblemParams::new(10, 1.5, 0.5)).is_err());
    }

    #[test]
    fn rounding_is_half_up() {
        let p = ProblemParams::new(10, 0.25, 0.5);
        assert_eq!(p.m(), 3);
        assert_eq!(p.s(), 2);
    }

    #[test]
    fn derived_streams_are_distinct() {
        assert_eq!(derive_stream(5, 3, (1, 2)), derive_stream(5, 3, (1, 2)));
        assert_ne!(derive_stream(5, 0, (0, 0)), derive_stream(5, 1, (0, 0)));
        let mut seen = HashSet::new();
        for trial in 0..100 {
            for row in 0..10 {
                for col in 0..10 {
                    let s = derive_stream(1, trial, (row, col));
                    assert_ne!(s.stream_id, 0);
                    assert!(seen.insert(s.stream_id));
                }
            }
        }
        assert_eq!(seen.len(), 10_000);
    }

    #[test]
    fn noise_variance_estimate() {
        let var = 1e-4f64;
        let mut g = Gaussian::new(
            RngStream {
                seed: 11,
                stream_id: 0,
            }
            .rng(),
        );
        let samples: Vec<f64> = (0..100_000).map(|_| var.sqrt() * g.sample()).collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let est =
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
        assert!((est - var).abs() <= 0.05 * var, "estimate {est}");
    }

    #[test]
    fn column_coherence_is_moderate() {
        for seed in 0..3 {
            let (p, _) = generate(&ProblemParams::new(200, 0.5, 0.1).with_seed(seed)).unwrap();
            let g = crate::model::gram_minus_identity(p.phi()).unwrap();
            let max = g.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(max < 0.6, "coherence {max}");
        }
    }
}
