//! Rotation-angle optimization of user 2's constellation.
//!
//! Only the *relative* rotation between the two users matters (jointly
//! rotating both constellations leaves every rate invariant by circular
//! symmetry of the noise), so the sweep rotates user 2 alone. All angles at
//! one sweep share the same noise substreams — common random numbers — so
//! differences along the curve are far less noisy than the individual
//! estimates.

use rayon::prelude::*;

use crate::channel::{ChannelParams, MCConfig};
use crate::constellation::Constellation;
use crate::mi::{self, MIEstimate, Method, RatePair, SecrecyComponents, SecrecyRates};
use crate::oracle::{self, QuadratureConfig};
use crate::scalar::{lit, Scalar};
use crate::{Error, Result};

/// What the sweep maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    SumRate,
    SecrecySumRate,
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Objective::SumRate => "sum_rate",
            Objective::SecrecySumRate => "secrecy_sum_rate",
        })
    }
}

/// Half-open angle grid `[start, stop)` in radians. A grid whose span is
/// empty still yields the single angle `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleGrid<T> {
    pub start: T,
    pub stop: T,
    pub step: T,
}

impl<T: Scalar> AngleGrid<T> {
    pub fn new(start: T, stop: T, step: T) -> Result<Self> {
        if !(step > T::zero()) || !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidInput(format!(
                "bad angle grid: start={start}, stop={stop}, step={step}"
            )));
        }
        Ok(AngleGrid { start, stop, step })
    }

    /// Default sweep `[0, π/2)` in half-degree steps: the fundamental domain
    /// for four-fold-symmetric families. Families with larger symmetry-free
    /// ranges can pass an explicit wider grid.
    pub fn default_quarter() -> Self {
        AngleGrid {
            start: T::zero(),
            stop: T::FRAC_PI_2(),
            step: T::PI() / lit(360.0),
        }
    }

    pub fn angles(&self) -> Vec<T> {
        let eps: T = lit(1e-12);
        let mut angles = Vec::new();
        let mut i = 0usize;
        loop {
            let theta = self.start + self.step * lit(i as f64);
            if theta >= self.stop - eps {
                break;
            }
            angles.push(theta);
            i += 1;
        }
        if angles.is_empty() {
            angles.push(self.start);
        }
        angles
    }
}

/// Evaluation engine shared by sweeps and the CLI: the same objective can be
/// estimated by Monte Carlo or computed by quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator {
    pub method: Method,
    pub mc: MCConfig,
    pub quad: QuadratureConfig,
}

impl Evaluator {
    pub fn monte_carlo(mc: MCConfig) -> Self {
        Evaluator {
            method: Method::MonteCarlo,
            mc,
            quad: QuadratureConfig::default(),
        }
    }

    pub fn quadrature(quad: QuadratureConfig) -> Self {
        Evaluator {
            method: Method::Quadrature,
            mc: MCConfig::default(),
            quad,
        }
    }

    pub fn sum_rate<T: Scalar>(
        &self,
        c1: &Constellation<T>,
        c2: &Constellation<T>,
        params: &ChannelParams<T>,
    ) -> Result<MIEstimate<T>> {
        match self.method {
            Method::MonteCarlo => mi::sum_rate(c1, c2, params, &self.mc),
            Method::Quadrature => {
                let t = oracle::quad_mi_terms(c1, c2, params, &self.quad)?;
                Ok(MIEstimate::quadrature(t.sum_rate()))
            }
        }
    }

    pub fn rate_corner<T: Scalar>(
        &self,
        c1: &Constellation<T>,
        c2: &Constellation<T>,
        params: &ChannelParams<T>,
    ) -> Result<RatePair<T>> {
        match self.method {
            Method::MonteCarlo => mi::rate_region_corner(c1, c2, params, &self.mc),
            Method::Quadrature => {
                let t = oracle::quad_mi_terms(c1, c2, params, &self.quad)?;
                Ok(RatePair {
                    r1: MIEstimate::quadrature(t.main_conditional_u1),
                    r2: MIEstimate::quadrature(t.main_conditional_u2),
                    sum: MIEstimate::quadrature(t.sum_rate()),
                })
            }
        }
    }

    pub fn secrecy<T: Scalar>(
        &self,
        c1: &Constellation<T>,
        c2: &Constellation<T>,
        params: &ChannelParams<T>,
    ) -> Result<SecrecyRates<T>> {
        match self.method {
            Method::MonteCarlo => mi::secrecy_rates(c1, c2, params, &self.mc),
            Method::Quadrature => {
                params.ensure_degraded()?;
                let t = oracle::quad_mi_terms(c1, c2, params, &self.quad)?;
                let sum = t.sum_rate();
                let r1_sec_raw = t.main_conditional_u1 - t.eve_marginal_u1;
                let r2_sec_raw = t.main_conditional_u2 - t.eve_marginal_u2;
                let ssr_raw = t.secrecy_sum_rate_raw();
                Ok(SecrecyRates {
                    r1_sec_bits: r1_sec_raw.max(T::zero()),
                    r2_sec_bits: r2_sec_raw.max(T::zero()),
                    ssr_bits: ssr_raw.max(T::zero()),
                    ssr_std_error: T::zero(),
                    components: SecrecyComponents {
                        main_marginal_u2: MIEstimate::quadrature(t.main_marginal_u2),
                        main_conditional_u1: MIEstimate::quadrature(t.main_conditional_u1),
                        main_conditional_u2: MIEstimate::quadrature(t.main_conditional_u2),
                        eve_marginal_u1: MIEstimate::quadrature(t.eve_marginal_u1),
                        eve_marginal_u2: MIEstimate::quadrature(t.eve_marginal_u2),
                        sum_rate: MIEstimate::quadrature(sum),
                        r1_sec_raw,
                        r2_sec_raw,
                        ssr_raw,
                    },
                })
            }
        }
    }

    /// The scalar objective a sweep maximizes. The secrecy objective is the
    /// clamped secrecy sum rate.
    pub fn objective<T: Scalar>(
        &self,
        objective: Objective,
        c1: &Constellation<T>,
        c2: &Constellation<T>,
        params: &ChannelParams<T>,
    ) -> Result<MIEstimate<T>> {
        match objective {
            Objective::SumRate => self.sum_rate(c1, c2, params),
            Objective::SecrecySumRate => {
                let sec = self.secrecy(c1, c2, params)?;
                Ok(MIEstimate {
                    bits: sec.ssr_bits,
                    std_error: sec.ssr_std_error,
                    n_samples: sec.components.sum_rate.n_samples,
                    method: self.method,
                })
            }
        }
    }
}

/// Result of a rotation sweep over user 2's angle.
#[derive(Debug, Clone)]
pub struct SweepResult<T> {
    pub angles: Vec<T>,
    pub values: Vec<MIEstimate<T>>,
    pub theta_opt: T,
    pub value_opt: MIEstimate<T>,
    pub objective: Objective,
    /// Objective at θ = 0 (the without-rotation reference).
    pub baseline: MIEstimate<T>,
}

/// Evaluates the objective at `objective(c1, rotate(c2, θ))` for every grid
/// angle and reports the argmax together with the θ = 0 baseline. Noise
/// substreams depend only on `(seed, symbol indices, draw)`, so every angle
/// of a Monte Carlo sweep reuses identical draws.
pub fn sweep_rotation<T: Scalar>(
    c1: &Constellation<T>,
    c2: &Constellation<T>,
    params: &ChannelParams<T>,
    objective: Objective,
    grid: &AngleGrid<T>,
    eval: &Evaluator,
) -> Result<SweepResult<T>> {
    let angles = grid.angles();
    let values: Vec<MIEstimate<T>> = angles
        .par_iter()
        .map(|&theta| eval.objective(objective, c1, &c2.rotate(theta), params))
        .collect::<Result<_>>()?;

    let baseline = if angles[0] == T::zero() {
        values[0]
    } else {
        eval.objective(objective, c1, c2, params)?
    };

    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.bits > values[best].bits {
            best = i;
        }
    }

    Ok(SweepResult {
        theta_opt: angles[best],
        value_opt: values[best],
        angles,
        values,
        objective,
        baseline,
    })
}

/// Outcome of a grid-cell refinement.
#[derive(Debug, Clone, Copy)]
pub struct RefinedOptimum<T> {
    pub theta_opt: T,
    pub value_opt: MIEstimate<T>,
    /// Set when the bracket failed the unimodality check (an end value
    /// exceeded the interior) and the sweep argmax was kept.
    pub fell_back: bool,
}

/// Golden-section refinement inside the grid cell bracketing the sweep
/// argmax. Uses the quadrature objective when the joint alphabet fits the
/// configured limit, fixed-seed Monte Carlo otherwise. The returned value is
/// never below the refine objective at the sweep argmax.
pub fn refine_rotation<T: Scalar>(
    sweep: &SweepResult<T>,
    c1: &Constellation<T>,
    c2: &Constellation<T>,
    params: &ChannelParams<T>,
    eval: &Evaluator,
    tol_radians: T,
) -> Result<RefinedOptimum<T>> {
    if sweep.angles.len() < 3 {
        return Err(Error::InvalidInput(
            "refinement needs a sweep with at least 3 angles".into(),
        ));
    }
    if !(tol_radians > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol_radians}"
        )));
    }

    let joint = c1.order() * c2.order();
    let refine_eval = if joint <= eval.quad.joint_size_limit {
        Evaluator::quadrature(eval.quad)
    } else {
        Evaluator::monte_carlo(eval.mc)
    };
    let f = |theta: T| -> Result<MIEstimate<T>> {
        refine_eval.objective(sweep.objective, c1, &c2.rotate(theta), params)
    };

    let idx = sweep
        .angles
        .iter()
        .position(|&a| a == sweep.theta_opt)
        .unwrap_or(0);
    let lo = if idx == 0 { 0 } else { idx - 1 };
    let hi = (idx + 1).min(sweep.angles.len() - 1);
    let mut a = sweep.angles[lo];
    let mut b = sweep.angles[hi];

    let mut best_theta = sweep.theta_opt;
    let mut best_value = f(sweep.theta_opt)?;
    let record = |theta: T, value: MIEstimate<T>, best_t: &mut T, best_v: &mut MIEstimate<T>| {
        if value.bits > best_v.bits {
            *best_t = theta;
            *best_v = value;
        }
    };

    // Golden ratio section of the bracket.
    let ratio: T = lit(0.618_033_988_749_894_9);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let fa = f(a)?;
    let fb = f(b)?;
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    record(a, fa, &mut best_theta, &mut best_value);
    record(b, fb, &mut best_theta, &mut best_value);
    record(x1, f1, &mut best_theta, &mut best_value);
    record(x2, f2, &mut best_theta, &mut best_value);

    if fa.bits.max(fb.bits) > f1.bits.max(f2.bits) {
        // Bracket is not unimodal; keep the sweep argmax.
        let value = f(sweep.theta_opt)?;
        return Ok(RefinedOptimum {
            theta_opt: sweep.theta_opt,
            value_opt: value,
            fell_back: true,
        });
    }

    let mut iterations = 0usize;
    while b - a > tol_radians && iterations < 200 {
        if f1.bits < f2.bits {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2)?;
            record(x2, f2, &mut best_theta, &mut best_value);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1)?;
            record(x1, f1, &mut best_theta, &mut best_value);
        }
        iterations += 1;
    }

    Ok(RefinedOptimum {
        theta_opt: best_theta,
        value_opt: best_value,
        fell_back: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{gen_square_qam, gen_star_qam, Constellation};
    use num_complex::Complex;

    fn bpsk() -> Constellation<f64> {
        Constellation::custom(
            "BPSK",
            vec![Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)],
        )
        .unwrap()
        .normalize()
        .unwrap()
    }

    fn qpsk() -> Constellation<f64> {
        gen_square_qam(4).unwrap().normalize().unwrap()
    }

    #[test]
    fn angle_grid_defaults_cover_quarter_turn() {
        let grid = AngleGrid::<f64>::default_quarter();
        let angles = grid.angles();
        assert_eq!(angles.len(), 180);
        assert_eq!(angles[0], 0.0);
        assert!(angles.last().unwrap() < &std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn degenerate_grid_keeps_baseline() {
        let grid = AngleGrid::new(0.0, 0.0, 0.1).unwrap();
        assert_eq!(grid.angles(), vec![0.0]);
        let eval = Evaluator::monte_carlo(MCConfig::new(500, 7).unwrap());
        let p = ChannelParams::from_snr_db(10.0, None);
        let sweep =
            sweep_rotation(&qpsk(), &qpsk(), &p, Objective::SumRate, &grid, &eval).unwrap();
        assert_eq!(sweep.theta_opt, 0.0);
        assert_eq!(sweep.value_opt.bits, sweep.baseline.bits);
    }

    #[test]
    fn bpsk_sweep_finds_rotation_gain_at_high_snr() {
        let grid = AngleGrid::new(0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI / 90.0)
            .unwrap();
        let eval = Evaluator::monte_carlo(MCConfig::new(2_000, 11).unwrap());
        let p = ChannelParams::from_snr_db(40.0, None);
        let sweep = sweep_rotation(&bpsk(), &bpsk(), &p, Objective::SumRate, &grid, &eval).unwrap();
        assert!((sweep.baseline.bits - 1.5).abs() < 0.05, "baseline {}", sweep.baseline.bits);
        assert!((sweep.value_opt.bits - 2.0).abs() < 0.05, "opt {}", sweep.value_opt.bits);
        // The true optimum is a plateau; any strictly positive angle is a win.
        assert!(sweep.theta_opt > 0.0);
        assert!(sweep.value_opt.bits >= sweep.baseline.bits);
    }

    #[test]
    fn sweep_is_reproducible_per_seed() {
        let grid = AngleGrid::new(0.0, 0.3, 0.1).unwrap();
        let eval = Evaluator::monte_carlo(MCConfig::new(400, 13).unwrap());
        let p = ChannelParams::from_snr_db(10.0, None);
        let a = sweep_rotation(&qpsk(), &qpsk(), &p, Objective::SumRate, &grid, &eval).unwrap();
        let b = sweep_rotation(&qpsk(), &qpsk(), &p, Objective::SumRate, &grid, &eval).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(x.bits.to_bits(), y.bits.to_bits());
        }
    }

    #[test]
    fn square_objective_has_quarter_turn_symmetry() {
        let eval = Evaluator::quadrature(QuadratureConfig::default());
        let p = ChannelParams::from_snr_db(12.0, None);
        let c1 = qpsk();
        let c2 = qpsk();
        let v1 = eval
            .objective(Objective::SumRate, &c1, &c2.rotate(0.3), &p)
            .unwrap();
        let v2 = eval
            .objective(
                Objective::SumRate,
                &c1,
                &c2.rotate(0.3 + std::f64::consts::FRAC_PI_2),
                &p,
            )
            .unwrap();
        assert!((v1.bits - v2.bits).abs() < 1e-9);
    }

    #[test]
    fn star_objective_has_eighth_turn_symmetry() {
        let eval = Evaluator::quadrature(QuadratureConfig::default());
        let p = ChannelParams::from_snr_db(10.0, None);
        let c1 = gen_star_qam::<f64>(8, None).unwrap().normalize().unwrap();
        let c2 = c1.clone();
        let v1 = eval
            .objective(Objective::SumRate, &c1, &c2.rotate(0.2), &p)
            .unwrap();
        let v2 = eval
            .objective(
                Objective::SumRate,
                &c1,
                &c2.rotate(0.2 + std::f64::consts::FRAC_PI_4),
                &p,
            )
            .unwrap();
        assert!((v1.bits - v2.bits).abs() < 1e-9);
    }

    #[test]
    fn refine_improves_on_the_grid_value() {
        let grid = AngleGrid::new(0.0, std::f64::consts::FRAC_PI_2, 0.2).unwrap();
        let eval = Evaluator::quadrature(QuadratureConfig::default());
        let p = ChannelParams::from_snr_db(40.0, None);
        let c1 = bpsk();
        let c2 = bpsk();
        let sweep = sweep_rotation(&c1, &c2, &p, Objective::SumRate, &grid, &eval).unwrap();
        let refined = refine_rotation(&sweep, &c1, &c2, &p, &eval, 1e-3).unwrap();
        assert!(refined.value_opt.bits >= sweep.value_opt.bits - 1e-12);
        assert!(!refined.fell_back);
    }

    #[test]
    fn refine_flags_non_unimodal_bracket() {
        // On a strictly rising stretch of the objective the bracket end
        // beats the interior, which must trip the fallback.
        let grid = AngleGrid::new(0.002, 0.0081, 0.002).unwrap();
        let eval = Evaluator::quadrature(QuadratureConfig::default());
        let p = ChannelParams::from_snr_db(40.0, None);
        let c1 = bpsk();
        let c2 = bpsk();
        let sweep = sweep_rotation(&c1, &c2, &p, Objective::SumRate, &grid, &eval).unwrap();
        assert_eq!(sweep.theta_opt, *sweep.angles.last().unwrap());
        let refined = refine_rotation(&sweep, &c1, &c2, &p, &eval, 1e-4).unwrap();
        assert!(refined.fell_back);
        assert_eq!(refined.theta_opt, sweep.theta_opt);
    }

    #[test]
    fn refine_needs_enough_angles() {
        let grid = AngleGrid::new(0.0, 0.15, 0.1).unwrap();
        let eval = Evaluator::monte_carlo(MCConfig::new(100, 3).unwrap());
        let p = ChannelParams::from_snr_db(10.0, None);
        let sweep =
            sweep_rotation(&qpsk(), &qpsk(), &p, Objective::SumRate, &grid, &eval).unwrap();
        assert!(refine_rotation(&sweep, &qpsk(), &qpsk(), &p, &eval, 1e-3).is_err());
    }

    #[test]
    fn secrecy_objective_respects_degradedness() {
        let grid = AngleGrid::new(0.0, 0.1, 0.05).unwrap();
        let eval = Evaluator::monte_carlo(MCConfig::new(100, 3).unwrap());
        let p = ChannelParams::from_snr_db(10.0, Some(13.0));
        assert!(sweep_rotation(
            &qpsk(),
            &qpsk(),
            &p,
            Objective::SecrecySumRate,
            &grid,
            &eval
        )
        .is_err());
    }
}
