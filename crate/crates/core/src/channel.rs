//! Channel model: per-user power, main and eavesdropper noise variances,
//! and the reproducible complex Gaussian noise sampler.
//!
//! Noise is drawn from counter-based substreams: a splitmix64-style
//! generator whose state is derived by hashing `(seed, r1, r2, sample)`.
//! Every noise draw is therefore a pure function of those indices, so
//! estimates are bit-identical no matter how the work is scheduled across
//! threads, and rotation sweeps can reuse identical draws per angle
//! (common random numbers).

use num_complex::Complex;

use crate::scalar::{lit, Scalar};
use crate::{Error, Result};

/// Two-user GMAC (wiretap) channel parameters.
///
/// `sigma1_sq` is the main-channel noise variance `E|W1|²`, `sigma2_sq` the
/// eavesdropper's `E|W2|²`. Wiretap computations additionally require the
/// degraded ordering `sigma2_sq >= sigma1_sq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<T> {
    /// Per-user transmit power P (linear). Both users share the same budget.
    pub power_per_user: T,
    /// Main-channel complex noise variance σ1².
    pub sigma1_sq: T,
    /// Eavesdropper complex noise variance σ2².
    pub sigma2_sq: T,
}

impl<T: Scalar> ChannelParams<T> {
    pub fn new(power_per_user: T, sigma1_sq: T, sigma2_sq: T) -> Result<Self> {
        if !(power_per_user >= T::zero()) {
            return Err(Error::InvalidInput(format!(
                "power must be nonnegative, got {power_per_user}"
            )));
        }
        if !(sigma1_sq > T::zero()) || !(sigma2_sq > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "noise variances must be positive, got sigma1_sq={sigma1_sq}, sigma2_sq={sigma2_sq}"
            )));
        }
        Ok(ChannelParams {
            power_per_user,
            sigma1_sq,
            sigma2_sq,
        })
    }

    /// Builds parameters from per-user SNRs in dB.
    ///
    /// Convention: unit-energy constellations, P = 1, per-user SNR = P/σ², so
    /// the noise variance carries the SNR: `σ² = 10^(-snr_db/10)`. With no
    /// eavesdropper SNR given, Eve's channel equals the main one.
    pub fn from_snr_db(snr_db: T, eve_snr_db: Option<T>) -> Self {
        let ten: T = lit(10.0);
        let sigma1_sq = ten.powf(-snr_db / ten);
        let sigma2_sq = match eve_snr_db {
            Some(db) => ten.powf(-db / ten),
            None => sigma1_sq,
        };
        ChannelParams {
            power_per_user: T::one(),
            sigma1_sq,
            sigma2_sq,
        }
    }

    /// Errors unless the eavesdropper channel is degraded
    /// (`sigma2_sq >= sigma1_sq`).
    pub fn ensure_degraded(&self) -> Result<()> {
        if self.sigma2_sq < self.sigma1_sq {
            return Err(Error::NotDegraded {
                sigma1_sq: self.sigma1_sq.to_f64().unwrap_or(f64::NAN),
                sigma2_sq: self.sigma2_sq.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }
}

/// Monte Carlo sampling configuration.
///
/// `n_samples` counts noise draws per outer symbol pair `(r1, r2)`; the
/// substream for draw k of pair (r1, r2) is derived from
/// `(seed, r1, r2, k)`, never from a shared sequential generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MCConfig {
    pub n_samples: u64,
    pub seed: u64,
}

impl MCConfig {
    pub fn new(n_samples: u64, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::InvalidInput("n_samples must be >= 1".into()));
        }
        Ok(MCConfig { n_samples, seed })
    }
}

impl Default for MCConfig {
    /// 10^4 draws per outer pair, fixed seed.
    fn default() -> Self {
        MCConfig {
            n_samples: 10_000,
            seed: 1,
        }
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(state: u64, word: u64) -> u64 {
    mix64(state ^ word.wrapping_mul(GOLDEN_GAMMA))
}

/// Derives an independent seed for a named consumer of the base seed, so
/// different estimator terms never share draws by accident.
pub fn derive_stream_seed(seed: u64, label: u64) -> u64 {
    absorb(mix64(seed.wrapping_add(GOLDEN_GAMMA)), label)
}

/// Counter-based noise substream.
///
/// Construction hashes the identifying indices into an initial state; each
/// output advances the state by a fixed increment and finalizes it, so the
/// sequence depends only on `(seed, r1, r2, sample)` and the draw index.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    state: u64,
}

impl NoiseStream {
    pub fn substream(seed: u64, r1: u32, r2: u32, sample: u64) -> Self {
        let mut s = mix64(seed.wrapping_add(GOLDEN_GAMMA));
        s = absorb(s, r1 as u64);
        s = absorb(s, r2 as u64);
        s = absorb(s, sample);
        NoiseStream { state: s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in (0, 1]; never returns 0 so `ln` stays finite.
    #[inline]
    fn next_uniform_pos(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in [0, 1).
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// One standard-normal pair via Box-Muller.
    #[inline]
    pub fn next_normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_uniform_pos();
        let u2 = self.next_uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * u2;
        (r * phi.cos(), r * phi.sin())
    }
}

/// Draws a circularly symmetric complex Gaussian with `E|W|² = sigma_sq`
/// (variance `sigma_sq/2` per real dimension) from the given substream.
#[inline]
pub fn sample_noise<T: Scalar>(sigma_sq: T, stream: &mut NoiseStream) -> Complex<T> {
    let (z1, z2) = stream.next_normal_pair();
    let scale = (sigma_sq / lit(2.0)).sqrt();
    Complex::new(scale * lit(z1), scale * lit(z2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn params_from_snr_values() {
        let p = ChannelParams::<f64>::from_snr_db(0.0, None);
        assert_eq!(p.power_per_user, 1.0);
        assert_eq!(p.sigma1_sq, 1.0);
        assert_eq!(p.sigma2_sq, 1.0);

        let p = ChannelParams::<f64>::from_snr_db(10.0, None);
        assert_abs_diff_eq!(p.sigma1_sq, 0.1, epsilon = 1e-15);

        let p = ChannelParams::<f64>::from_snr_db(20.0, Some(10.0));
        assert_abs_diff_eq!(p.sigma1_sq, 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(p.sigma2_sq, 0.1, epsilon = 1e-15);
        assert!(p.ensure_degraded().is_ok());
    }

    #[test]
    fn degradedness_is_enforced() {
        let p = ChannelParams::<f64>::from_snr_db(10.0, Some(13.0));
        assert!(matches!(p.ensure_degraded(), Err(Error::NotDegraded { .. })));
    }

    #[test]
    fn params_validation() {
        assert!(ChannelParams::new(-1.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 0.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 1.0, -2.0).is_err());
        assert!(ChannelParams::new(0.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn mc_config_validation() {
        assert!(MCConfig::new(0, 7).is_err());
        assert_eq!(MCConfig::default().n_samples, 10_000);
    }

    #[test]
    fn noise_is_deterministic_per_indices() {
        let draw = |seed, r1, r2, k| {
            let mut s = NoiseStream::substream(seed, r1, r2, k);
            sample_noise::<f64>(1.0, &mut s)
        };
        assert_eq!(draw(7, 1, 2, 3), draw(7, 1, 2, 3));
        assert_ne!(draw(7, 1, 2, 3), draw(7, 1, 2, 4));
        assert_ne!(draw(7, 1, 2, 3), draw(7, 2, 1, 3));
        assert_ne!(draw(7, 1, 2, 3), draw(8, 1, 2, 3));

        let mut a = NoiseStream::substream(42, 0, 0, 0);
        let mut b = NoiseStream::substream(42, 0, 0, 0);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn noise_moments_match_contract() {
        // 10^6 draws at σ² = 1: |mean| below ~5 standard errors of the mean,
        // E|W|² within 0.01 (chi-square concentration).
        let n = 1_000_000u64;
        let sigma_sq = 1.0f64;
        let mut sum = Complex::new(0.0, 0.0);
        let mut sum_sq = 0.0;
        for k in 0..n {
            let mut s = NoiseStream::substream(2024, 0, 0, k);
            let w = sample_noise(sigma_sq, &mut s);
            sum += w;
            sum_sq += w.norm_sqr();
        }
        let mean = sum / n as f64;
        let sigma = sigma_sq.sqrt();
        assert!(mean.norm() < 5.0 * sigma / 1000.0, "mean = {mean}");
        let energy = sum_sq / n as f64;
        assert!((energy - sigma_sq).abs() < 0.01, "E|W|² = {energy}");
    }

    #[test]
    fn noise_is_rotation_invariant_in_distribution() {
        // Compare first/second moments and Re/Im cross-correlation of
        // e^{jφ}·W against the CN(0,σ²) contract at ~5 standard errors.
        let n = 400_000u64;
        let phi = 0.83f64;
        let rot = Complex::new(phi.cos(), phi.sin());
        let mut sum = Complex::new(0.0, 0.0);
        let mut sum_re2 = 0.0;
        let mut sum_im2 = 0.0;
        let mut sum_cross = 0.0;
        for k in 0..n {
            let mut s = NoiseStream::substream(99, 3, 4, k);
            let w = sample_noise::<f64>(1.0, &mut s) * rot;
            sum += w;
            sum_re2 += w.re * w.re;
            sum_im2 += w.im * w.im;
            sum_cross += w.re * w.im;
        }
        let nf = n as f64;
        let se_mean = (0.5f64 / nf).sqrt();
        assert!((sum.re / nf).abs() < 5.0 * se_mean);
        assert!((sum.im / nf).abs() < 5.0 * se_mean);
        // Var of re², im² is 2·(1/2)² = 0.5; se ≈ sqrt(0.5/n).
        let se_var = (0.5f64 / nf).sqrt();
        assert!((sum_re2 / nf - 0.5).abs() < 5.0 * se_var);
        assert!((sum_im2 / nf - 0.5).abs() < 5.0 * se_var);
        let se_cross = (0.25f64 / nf).sqrt();
        assert!((sum_cross / nf).abs() < 5.0 * se_cross);
    }

    #[test]
    fn substreams_from_distinct_indices_decorrelate() {
        // Sample cross-correlation between streams keyed by different
        // (r1, r2) should vanish within ~5 standard errors.
        let n = 200_000u64;
        let mut dot = 0.0;
        for k in 0..n {
            let mut sa = NoiseStream::substream(5, 0, 1, k);
            let mut sb = NoiseStream::substream(5, 1, 0, k);
            let a = sample_noise::<f64>(1.0, &mut sa);
            let b = sample_noise::<f64>(1.0, &mut sb);
            dot += a.re * b.re + a.im * b.im;
        }
        let nf = n as f64;
        // Each product term has variance 1/4; two terms per draw.
        let se = (0.5f64 / nf).sqrt();
        assert!((dot / nf).abs() < 5.0 * se, "corr = {}", dot / nf);
    }

    #[test]
    fn derived_seeds_differ_by_label() {
        assert_ne!(derive_stream_seed(1, 1), derive_stream_seed(1, 2));
        assert_ne!(derive_stream_seed(1, 1), derive_stream_seed(2, 1));
        assert_eq!(derive_stream_seed(9, 3), derive_stream_seed(9, 3));
    }
}
