//! Scratch validation of quadrature precision and criterion margins.

use ccc_rates::channel::ChannelParams;
use ccc_rates::constellation::{gen_hex_qam, gen_square_qam, gen_star_qam, Constellation};
use ccc_rates::optimizer::{sweep_rotation, AngleGrid, Evaluator, Objective};
use ccc_rates::oracle::{quad_mi_terms, sumset_entropy, QuadratureConfig};
use num_complex::Complex;

fn main() {
    let qpsk = gen_square_qam::<f64>(4).unwrap().normalize().unwrap();
    let bpsk = Constellation::custom(
        "BPSK",
        vec![Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)],
    )
    .unwrap()
    .normalize()
    .unwrap();
    let psk8 = gen_star_qam::<f64>(8, None).unwrap().normalize().unwrap();
    let q64 = QuadratureConfig::new(64, 256).unwrap();
    let q128 = QuadratureConfig::new(128, 256).unwrap();

    let mut worst_drift: f64 = 0.0;
    for (c1, c2) in [(&qpsk, &qpsk), (&bpsk, &psk8)] {
        for snr in [-10.0, 0.0, 10.0, 20.0] {
            let p = ChannelParams::from_snr_db(snr, Some(snr - 3.0));
            let a = quad_mi_terms(c1, c2, &p, &q64).unwrap();
            let b = quad_mi_terms(c1, c2, &p, &q128).unwrap();
            let drift = [
                (a.main_marginal_u2 - b.main_marginal_u2).abs(),
                (a.main_conditional_u1 - b.main_conditional_u1).abs(),
                (a.main_conditional_u2 - b.main_conditional_u2).abs(),
                (a.eve_marginal_u1 - b.eve_marginal_u1).abs(),
                (a.eve_marginal_u2 - b.eve_marginal_u2).abs(),
            ]
            .into_iter()
            .fold(0.0f64, f64::max);
            worst_drift = worst_drift.max(drift);
        }
    }
    println!("worst node-doubling drift: {worst_drift:.3e}");

    let p = ChannelParams::from_snr_db(10.0, None);
    let base = quad_mi_terms(&qpsk, &qpsk, &p, &q64).unwrap().sum_rate();
    let mut worst_rot: f64 = 0.0;
    for phi in [0.3, 1.0, 2.2] {
        let r = quad_mi_terms(&qpsk.rotate(phi), &qpsk.rotate(phi), &p, &q64)
            .unwrap()
            .sum_rate();
        worst_rot = worst_rot.max((r - base).abs());
    }
    println!("worst joint-rotation delta: {worst_rot:.3e}");

    let qam16 = gen_square_qam::<f64>(16).unwrap().normalize().unwrap();
    let single = Constellation::custom("pt", vec![Complex::new(1.0, 0.0)])
        .unwrap()
        .normalize()
        .unwrap();
    let p60 = ChannelParams::from_snr_db(60.0, None);
    let t = quad_mi_terms(&qam16, &single, &p60, &q64).unwrap();
    println!("16qam x single @60dB: {:.9} (target 4.0 ± 1e-3)", t.sum_rate());
    let t = quad_mi_terms(&qpsk, &qpsk, &p60, &q64).unwrap();
    println!(
        "qpsk/qpsk @60dB vs sumset: diff {:.3e}",
        (t.sum_rate() - sumset_entropy(&qpsk, &qpsk)).abs()
    );

    // Criterion 7/8 true gains under the final rule.
    let eval = Evaluator::quadrature(q64);
    let hex = gen_hex_qam::<f64>(16, 1.0).unwrap().normalize().unwrap();
    let star = gen_star_qam::<f64>(16, None).unwrap().normalize().unwrap();

    let p12 = ChannelParams::from_snr_db(12.0, None);
    let grid = AngleGrid::new(0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI / 90.0).unwrap();
    let sweep = sweep_rotation(&hex, &hex, &p12, Objective::SumRate, &grid, &eval).unwrap();
    println!(
        "hex16 12dB SR: WOR={:.4} WR={:.4} at {:.3} (gain {:.4})",
        sweep.baseline.bits,
        sweep.value_opt.bits,
        sweep.theta_opt,
        sweep.value_opt.bits - sweep.baseline.bits
    );

    let p25 = ChannelParams::from_snr_db(25.0, None);
    let sweep = sweep_rotation(&star, &star, &p25, Objective::SumRate, &grid, &eval).unwrap();
    println!(
        "star16 25dB SR: WOR={:.4} WR={:.4} at {:.3} (gain {:.4})",
        sweep.baseline.bits,
        sweep.value_opt.bits,
        sweep.theta_opt,
        sweep.value_opt.bits - sweep.baseline.bits
    );

    let p_ssr = ChannelParams::from_snr_db(10.0, Some(7.0));
    let grid_fine = AngleGrid::new(0.0, 0.5, 0.01).unwrap();
    let sweep =
        sweep_rotation(&hex, &hex, &p_ssr, Objective::SecrecySumRate, &grid_fine, &eval).unwrap();
    println!(
        "hex16 10/-3dB SSR: WOR={:.5} WR={:.5} at {:.3} (gain {:.5})",
        sweep.baseline.bits,
        sweep.value_opt.bits,
        sweep.theta_opt,
        sweep.value_opt.bits - sweep.baseline.bits
    );
}
