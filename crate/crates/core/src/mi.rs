//! Monte Carlo mutual-information estimators for the two-user channel.
//!
//! One generic marginal kernel covers every "user B against receiver Z"
//! term: with `Z = √P·A + √P·B + W`, `W ~ CN(0, σ²)`,
//!
//! ```text
//! I(B;Z) = log2(M_B) − (1/(M_A·M_B)) Σ_{r_a,r_b} E_W[ log2(N/D) ]
//!   N = Σ_{t_a,t_b} exp(−|Δ_a + Δ_b + W|²/σ²)
//!   D = Σ_{t_a}     exp(−|Δ_a + W|²/σ²)
//! ```
//!
//! with symbol differences `Δ_a = √P(a(r_a) − a(t_a))`. Instantiating the
//! kernel with the main-channel or eavesdropper noise variance (and with the
//! users' roles swapped) yields every marginal the wiretap bound needs; the
//! conditional terms use the single-sum analogue. All exponent sums are
//! evaluated as max-shifted log-sum-exp on the *differences* of squared
//! magnitudes, so nothing overflows even at σ² = 1e-8 with unit-energy
//! points.
//!
//! Every estimate is a pure function of `(inputs, MCConfig)`: noise comes
//! from counter-based substreams keyed by `(seed, r_a, r_b, draw)`, outer
//! pairs are reduced in a fixed order, and parallelism never changes the
//! result.

use num_complex::Complex;
use rayon::prelude::*;

use crate::channel::{derive_stream_seed, sample_noise, ChannelParams, MCConfig, NoiseStream};
use crate::constellation::Constellation;
use crate::scalar::{lit, Scalar};
use crate::{Error, Result};

/// How an estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MonteCarlo,
    Quadrature,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::MonteCarlo => "monte-carlo",
            Method::Quadrature => "quadrature",
        })
    }
}

/// A mutual-information estimate in bits with its standard error.
///
/// For Monte Carlo estimates the standard error is derived from the
/// per-draw sample variance of the pair-averaged log terms; quadrature
/// estimates carry zero standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MIEstimate<T> {
    pub bits: T,
    pub std_error: T,
    pub n_samples: u64,
    pub method: Method,
}

impl<T: Scalar> MIEstimate<T> {
    pub fn quadrature(bits: T) -> Self {
        MIEstimate {
            bits,
            std_error: T::zero(),
            n_samples: 0,
            method: Method::Quadrature,
        }
    }

    /// Sum of two independent estimates; standard errors combine in
    /// quadrature.
    pub fn add(&self, other: &Self) -> Self {
        MIEstimate {
            bits: self.bits + other.bits,
            std_error: (self.std_error * self.std_error
                + other.std_error * other.std_error)
                .sqrt(),
            n_samples: self.n_samples.max(other.n_samples),
            method: if self.method == other.method {
                self.method
            } else {
                Method::MonteCarlo
            },
        }
    }
}

/// Achievable-rate corner of the two-user region: the two conditional
/// single-user bounds plus the sum-rate bound, reported jointly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair<T> {
    pub r1: MIEstimate<T>,
    pub r2: MIEstimate<T>,
    pub sum: MIEstimate<T>,
}

impl<T: Scalar> RatePair<T> {
    pub fn r1_bits(&self) -> T {
        self.r1.bits
    }

    pub fn r2_bits(&self) -> T {
        self.r2.bits
    }

    pub fn sum_bits(&self) -> T {
        self.sum.bits
    }
}

/// The raw mutual-information terms a secrecy computation is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyComponents<T> {
    /// I(X2;Y).
    pub main_marginal_u2: MIEstimate<T>,
    /// I(X1;Y|X2).
    pub main_conditional_u1: MIEstimate<T>,
    /// I(X2;Y|X1).
    pub main_conditional_u2: MIEstimate<T>,
    /// I(X1;Ye).
    pub eve_marginal_u1: MIEstimate<T>,
    /// I(X2;Ye).
    pub eve_marginal_u2: MIEstimate<T>,
    /// I(X1,X2;Y) = I(X2;Y) + I(X1;Y|X2).
    pub sum_rate: MIEstimate<T>,
    /// Unclamped per-user secrecy rates and secrecy sum rate.
    pub r1_sec_raw: T,
    pub r2_sec_raw: T,
    pub ssr_raw: T,
}

/// Secrecy rates clamped at zero, with the raw components retained for
/// diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyRates<T> {
    pub r1_sec_bits: T,
    pub r2_sec_bits: T,
    pub ssr_bits: T,
    /// Standard error of the (raw) secrecy sum rate, combined in quadrature
    /// from its four terms.
    pub ssr_std_error: T,
    pub components: SecrecyComponents<T>,
}

// Substream labels, so marginal and conditional terms never share draws.
const TAG_MARGINAL: u64 = 0x4d41_5247;
const TAG_CONDITIONAL: u64 = 0x434f_4e44;

// Outer pairs are processed in fixed-size batches: parallel within a batch,
// batches accumulated in order, so results are independent of thread count.
const PAIR_BATCH: usize = 64;

fn ensure_normalized<T: Scalar>(c: &Constellation<T>) -> Result<()> {
    if !c.is_normalized() {
        return Err(Error::NotNormalized(c.name().to_string()));
    }
    Ok(())
}

fn ensure_valid_noise<T: Scalar>(sigma_sq: T) -> Result<()> {
    if !(sigma_sq > T::zero()) || !sigma_sq.is_finite() {
        return Err(Error::InvalidInput(format!(
            "noise variance must be positive and finite, got {sigma_sq}"
        )));
    }
    Ok(())
}

/// Symbol-difference table `d[r·M + t] = pts[r] − pts[t]` with cached
/// squared norms.
fn diff_table<T: Scalar>(pts: &[Complex<T>]) -> Vec<(Complex<T>, T)> {
    let m = pts.len();
    let mut table = Vec::with_capacity(m * m);
    for r in 0..m {
        for t in 0..m {
            let d = pts[r] - pts[t];
            table.push((d, d.norm_sqr()));
        }
    }
    table
}

/// `ln Σ_k exp(−(|d_k|² + 2⟨d_k, w⟩)/σ²)` by max-shifted log-sum-exp. The
/// exponents are the differences `|w|² − |d_k + w|²` scaled by 1/σ², so the
/// `t = r` entry is exactly zero and the shift never underflows the whole
/// sum. Terms more than 45 log units below the maximum cannot move the sum
/// at f64 precision and are skipped before the exp.
#[inline]
fn lse_folded<T: Scalar>(
    deltas: &[(Complex<T>, T)],
    w: Complex<T>,
    inv_sigma_sq: T,
    scratch: &mut [T],
) -> T {
    let two: T = lit(2.0);
    let cutoff: T = lit(-45.0);
    let mut max_e = T::neg_infinity();
    for (e, &(d, norm)) in scratch.iter_mut().zip(deltas) {
        let dot = d.re * w.re + d.im * w.im;
        *e = -(norm + two * dot) * inv_sigma_sq;
        if *e > max_e {
            max_e = *e;
        }
    }
    let floor = max_e + cutoff;
    let sum = scratch.iter().fold(T::zero(), |acc, &e| {
        if e > floor {
            acc + (e - max_e).exp()
        } else {
            acc
        }
    });
    max_e + sum.ln()
}

/// Mean and standard error over the per-draw pair-averaged terms.
fn mean_and_std_error<T: Scalar>(g: &[T]) -> (T, T) {
    let n = g.len();
    let nf: T = lit(n as f64);
    let mean = g.iter().fold(T::zero(), |a, &x| a + x) / nf;
    if n < 2 {
        return (mean, T::zero());
    }
    let var = g
        .iter()
        .fold(T::zero(), |a, &x| a + (x - mean) * (x - mean))
        / lit((n - 1) as f64);
    (mean, (var / nf).sqrt())
}

/// Core marginal estimator over pre-scaled point sets: I(B;Z) for
/// `Z = A + B + W` (any power already folded into the points).
fn marginal_estimate<T: Scalar>(
    a_pts: &[Complex<T>],
    b_pts: &[Complex<T>],
    sigma_sq: T,
    mc: &MCConfig,
) -> Result<MIEstimate<T>> {
    let (ma, mb) = (a_pts.len(), b_pts.len());
    let n = mc.n_samples as usize;
    let stream_seed = derive_stream_seed(mc.seed, TAG_MARGINAL);
    let diff_a = diff_table(a_pts);
    let diff_b = diff_table(b_pts);
    let inv_sigma_sq = sigma_sq.recip();
    let pair_count = ma * mb;

    let mut g = vec![T::zero(); n];
    let mut batch_terms: Vec<Vec<T>> = Vec::new();
    for batch_start in (0..pair_count).step_by(PAIR_BATCH) {
        let batch_end = (batch_start + PAIR_BATCH).min(pair_count);
        (batch_start..batch_end)
            .into_par_iter()
            .map(|pair| {
                let (ra, rb) = (pair / mb, pair % mb);
                let mut deltas = Vec::with_capacity(ma * mb);
                for ta in 0..ma {
                    let da = diff_a[ra * ma + ta].0;
                    for tb in 0..mb {
                        let d = da + diff_b[rb * mb + tb].0;
                        deltas.push((d, d.norm_sqr()));
                    }
                }
                let denom: Vec<(Complex<T>, T)> =
                    (0..ma).map(|ta| diff_a[ra * ma + ta]).collect();
                let mut num_scratch = vec![T::zero(); deltas.len()];
                let mut den_scratch = vec![T::zero(); denom.len()];
                let mut terms = Vec::with_capacity(n);
                for k in 0..n {
                    let mut stream =
                        NoiseStream::substream(stream_seed, ra as u32, rb as u32, k as u64);
                    let w = sample_noise(sigma_sq, &mut stream);
                    let num = lse_folded(&deltas, w, inv_sigma_sq, &mut num_scratch);
                    let den = lse_folded(&denom, w, inv_sigma_sq, &mut den_scratch);
                    terms.push((num - den) / T::LN_2());
                }
                terms
            })
            .collect_into_vec(&mut batch_terms);
        for terms in &batch_terms {
            for (gk, &t) in g.iter_mut().zip(terms) {
                *gk += t;
            }
        }
    }
    let inv_pairs: T = lit(1.0 / pair_count as f64);
    for gk in &mut g {
        *gk *= inv_pairs;
    }

    let (mean, std_error) = mean_and_std_error(&g);
    let bits = lit::<T>(mb as f64).log2() - mean;
    if !bits.is_finite() || !std_error.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "marginal estimate produced non-finite value (bits={bits}, se={std_error})"
        )));
    }
    Ok(MIEstimate {
        bits,
        std_error,
        n_samples: mc.n_samples,
        method: Method::MonteCarlo,
    })
}

/// Core conditional estimator over a pre-scaled point set: I(A;Z|B) for
/// `Z = A + B + W`. Conditioning removes B exactly, so only A's geometry
/// enters.
fn conditional_estimate<T: Scalar>(
    a_pts: &[Complex<T>],
    sigma_sq: T,
    mc: &MCConfig,
) -> Result<MIEstimate<T>> {
    let ma = a_pts.len();
    let n = mc.n_samples as usize;
    let stream_seed = derive_stream_seed(mc.seed, TAG_CONDITIONAL);
    let diff_a = diff_table(a_pts);
    let inv_sigma_sq = sigma_sq.recip();

    let mut g = vec![T::zero(); n];
    let mut batch_terms: Vec<Vec<T>> = Vec::new();
    for batch_start in (0..ma).step_by(PAIR_BATCH) {
        let batch_end = (batch_start + PAIR_BATCH).min(ma);
        (batch_start..batch_end)
            .into_par_iter()
            .map(|ra| {
                let deltas = &diff_a[ra * ma..(ra + 1) * ma];
                let mut scratch = vec![T::zero(); ma];
                let mut terms = Vec::with_capacity(n);
                for k in 0..n {
                    let mut stream = NoiseStream::substream(stream_seed, ra as u32, 0, k as u64);
                    let w = sample_noise(sigma_sq, &mut stream);
                    terms.push(lse_folded(deltas, w, inv_sigma_sq, &mut scratch) / T::LN_2());
                }
                terms
            })
            .collect_into_vec(&mut batch_terms);
        for terms in &batch_terms {
            for (gk, &t) in g.iter_mut().zip(terms) {
                *gk += t;
            }
        }
    }
    let inv_pairs: T = lit(1.0 / ma as f64);
    for gk in &mut g {
        *gk *= inv_pairs;
    }

    let (mean, std_error) = mean_and_std_error(&g);
    let bits = lit::<T>(ma as f64).log2() - mean;
    if !bits.is_finite() || !std_error.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "conditional estimate produced non-finite value (bits={bits}, se={std_error})"
        )));
    }
    Ok(MIEstimate {
        bits,
        std_error,
        n_samples: mc.n_samples,
        method: Method::MonteCarlo,
    })
}

fn scaled_points<T: Scalar>(c: &Constellation<T>, scale: T) -> Vec<Complex<T>> {
    c.points().iter().map(|p| p * scale).collect()
}

/// I(B;Z) for `Z = A + B + W`, `W ~ CN(0, sigma_sq)`, unit power per user.
/// A is the interfering user summed out of the receiver's mixture.
pub fn mi_marginal<T: Scalar>(
    a: &Constellation<T>,
    b: &Constellation<T>,
    sigma_sq: T,
    mc: &MCConfig,
) -> Result<MIEstimate<T>> {
    ensure_normalized(a)?;
    ensure_normalized(b)?;
    ensure_valid_noise(sigma_sq)?;
    marginal_estimate(a.points(), b.points(), sigma_sq, mc)
}

/// I(A;Z|B) for `Z = A + B + W`, unit power per user. `b` is accepted for
/// interface symmetry but conditioning removes it exactly, so only its
/// normalization is checked.
pub fn mi_conditional<T: Scalar>(
    a: &Constellation<T>,
    b: &Constellation<T>,
    sigma_sq: T,
    mc: &MCConfig,
) -> Result<MIEstimate<T>> {
    ensure_normalized(a)?;
    ensure_normalized(b)?;
    ensure_valid_noise(sigma_sq)?;
    conditional_estimate(a.points(), sigma_sq, mc)
}

/// Sum rate I(X1,X2;Y) = I(X2;Y) + I(X1;Y|X2) over the main channel.
pub fn sum_rate<T: Scalar>(
    c1: &Constellation<T>,
    c2: &Constellation<T>,
    params: &ChannelParams<T>,
    mc: &MCConfig,
) -> Result<MIEstimate<T>> {
    ensure_normalized(c1)?;
    ensure_normalized(c2)?;
    ensure_valid_noise(params.sigma1_sq)?;
    let scale = params.power_per_user.sqrt();
    let p1 = scaled_points(c1, scale);
    let p2 = scaled_points(c2, scale);
    let marginal = marginal_estimate(&p1, &p2, params.sigma1_sq, mc)?;
    let conditional = conditional_estimate(&p1, params.sigma1_sq, mc)?;
    Ok(marginal.add(&conditional))
}

/// The corner point of the achievable region: r1 = I(X1;Y|X2),
/// r2 = I(X2;Y|X1), and the sum-rate bound.
pub fn rate_region_corner<T: Scalar>(
    c1: &Constellation<T>,
    c2: &Constellation<T>,
    params: &ChannelParams<T>,
    mc: &MCConfig,
) -> Result<RatePair<T>> {
    ensure_normalized(c1)?;
    ensure_normalized(c2)?;
    ensure_valid_noise(params.sigma1_sq)?;
    let scale = params.power_per_user.sqrt();
    let p1 = scaled_points(c1, scale);
    let p2 = scaled_points(c2, scale);
    let r1 = conditional_estimate(&p1, params.sigma1_sq, mc)?;
    let r2 = conditional_estimate(&p2, params.sigma1_sq, mc)?;
    let marginal = marginal_estimate(&p1, &p2, params.sigma1_sq, mc)?;
    let sum = marginal.add(&r1);
    Ok(RatePair { r1, r2, sum })
}

/// Secrecy rates of the degraded wiretap model. Refuses non-degraded
/// parameters (`sigma2_sq < sigma1_sq`) instead of silently clamping.
pub fn secrecy_rates<T: Scalar>(
    c1: &Constellation<T>,
    c2: &Constellation<T>,
    params: &ChannelParams<T>,
    mc: &MCConfig,
) -> Result<SecrecyRates<T>> {
    ensure_normalized(c1)?;
    ensure_normalized(c2)?;
    ensure_valid_noise(params.sigma1_sq)?;
    ensure_valid_noise(params.sigma2_sq)?;
    params.ensure_degraded()?;

    let scale = params.power_per_user.sqrt();
    let p1 = scaled_points(c1, scale);
    let p2 = scaled_points(c2, scale);

    let main_marginal_u2 = marginal_estimate(&p1, &p2, params.sigma1_sq, mc)?;
    let main_conditional_u1 = conditional_estimate(&p1, params.sigma1_sq, mc)?;
    let main_conditional_u2 = conditional_estimate(&p2, params.sigma1_sq, mc)?;
    let eve_marginal_u1 = marginal_estimate(&p2, &p1, params.sigma2_sq, mc)?;
    let eve_marginal_u2 = marginal_estimate(&p1, &p2, params.sigma2_sq, mc)?;
    let sum = main_marginal_u2.add(&main_conditional_u1);

    let r1_sec_raw = main_conditional_u1.bits - eve_marginal_u1.bits;
    let r2_sec_raw = main_conditional_u2.bits - eve_marginal_u2.bits;
    let ssr_raw = sum.bits - eve_marginal_u1.bits - eve_marginal_u2.bits;
    let ssr_std_error = (sum.std_error * sum.std_error
        + eve_marginal_u1.std_error * eve_marginal_u1.std_error
        + eve_marginal_u2.std_error * eve_marginal_u2.std_error)
        .sqrt();

    Ok(SecrecyRates {
        r1_sec_bits: r1_sec_raw.max(T::zero()),
        r2_sec_bits: r2_sec_raw.max(T::zero()),
        ssr_bits: ssr_raw.max(T::zero()),
        ssr_std_error,
        components: SecrecyComponents {
            main_marginal_u2,
            main_conditional_u1,
            main_conditional_u2,
            eve_marginal_u1,
            eve_marginal_u2,
            sum_rate: sum,
            r1_sec_raw,
            r2_sec_raw,
            ssr_raw,
        },
    })
}
