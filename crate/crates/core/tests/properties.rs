//! Cross-module invariants.

use proptest::prelude::*;
use quantumness::analysis::{delta_qc, fit_ab, log_grid, Route};
use quantumness::spectra::{rabi_spectrum_with, TruncationOptions};
use quantumness::thermo::quantum::{fq_numeric, partition_sum};
use quantumness::ModelParams;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn block_levels_agree_with_diagonalization(
        w in 0.3f64..2.0, big in 0.3f64..4.0, g in 0.0f64..1.5, anti in any::<bool>(), beta in 0.5f64..3.0
    ) {
        let (g1, g2) = if anti { (0.0, g) } else { (g, 0.0) };
        let p = ModelParams::dimensionless(w, big, g1, g2, beta).unwrap();
        let blocks = fq_numeric(&p, beta, 1e-11).unwrap().value;
        let spec = rabi_spectrum_with(&p, beta, 1e-11, &TruncationOptions::default()).unwrap();
        let diag = partition_sum(&spec, beta).unwrap().value + 0.5 * w;
        prop_assert!((blocks - diag).abs() < 1e-9 * (1.0 + diag.abs()));
    }

    #[test]
    fn quantumness_scales_with_energy_unit(x in 25.0f64..200.0, q in 0.1f64..1.4, eta in 0.0f64..1.0, s in 0.5f64..2.0) {
        prop_assume!((q - 1.0).abs() > 0.05);
        let base = ModelParams::from_dimensionless(x, q, eta, 1.0, 2.0, 1.0).unwrap();
        let scaled = ModelParams::from_dimensionless(x, q, eta, s, 2.0 / s, 1.0).unwrap();
        let a = delta_qc(&base, 2.0, Route::Numeric, 1e-10).unwrap().value;
        let b = delta_qc(&scaled, 2.0 / s, Route::Numeric, 1e-10).unwrap().value;
        prop_assert!((b - s * a).abs() < 1e-8, "{} vs {}", b, s * a);
    }

    #[test]
    fn hbar_and_gc_trade_off(x in 25.0f64..200.0, q in 0.1f64..0.9, h in 0.5f64..2.0) {
        // only ħ·gc enters the energies
        let a = ModelParams::from_dimensionless(x, q, 0.5, 1.0, 1.5, h).unwrap();
        let b = ModelParams::from_dimensionless(x, q, 0.5, h, 1.5, 1.0).unwrap();
        let da = delta_qc(&a, 1.5, Route::Numeric, 1e-10).unwrap().value;
        let db = delta_qc(&b, 1.5, Route::Numeric, 1e-10).unwrap().value;
        prop_assert!((da - db).abs() < 1e-9);
    }
}

#[test]
fn fitted_a_sign_structure() {
    let xs = log_grid(1e2, 1e4, 8);
    for q in [0.2, 0.5, 0.9, 1.1, 1.4] {
        for (eta, sign) in [(1.0, 1.0), (0.0, -1.0)] {
            let d: Vec<f64> = xs
                .iter()
                .map(|&x| {
                    let p = ModelParams::from_dimensionless(x, q, eta, 1.0, 2.0, 1.0).unwrap();
                    delta_qc(&p, 2.0, Route::Numeric, 1e-10).unwrap().value
                })
                .collect();
            let fit = fit_ab(&xs, &d, 2.0).unwrap();
            assert!(sign * fit.a > 0.0, "eta={eta} q={q}: A={}", fit.a);
        }
    }
}

#[test]
fn oscillator_quantumness_is_positive_and_vanishing() {
    let mut last = f64::INFINITY;
    for x in [25.0, 100.0, 400.0, 1600.0] {
        let p = ModelParams::from_dimensionless(x, 0.0, 1.0, 1.0, 2.0, 1.0).unwrap();
        let d = delta_qc(&p, 2.0, Route::Numeric, 1e-10).unwrap().value;
        assert!(d > 0.0 && d < last);
        last = d;
    }
}
