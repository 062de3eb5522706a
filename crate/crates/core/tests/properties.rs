//! Property tests of the log-domain arithmetic, the recursion and the
//! ordering probe, each against a direct computation.

use proptest::prelude::*;

use hclab::probes::{ordering_cells, saut_bound, CellOrdering};
use hclab::schedule::{build_sequence, RecursionParams};
use hclab::seqspace::{
    apply_backward, apply_forward, Interval, LogCoeff, Norm, SparseLogVector, TruncatedVector,
    WeightFamily, WeightKind,
};

fn family() -> impl Strategy<Value = WeightFamily> {
    prop_oneof![
        Just(WeightKind::Rolewicz),
        (0.1f64..=1.0).prop_map(|alpha| WeightKind::ExpPower { alpha }),
        (0.1f64..=1.0).prop_map(|alpha| WeightKind::OnePlusPower { alpha }),
        Just(WeightKind::PolyLog {
            base: None,
            alpha: None
        }),
        Just(WeightKind::OnePlusOverN),
        Just(WeightKind::PowerBase),
    ]
    .prop_map(|kind| WeightFamily::new(kind, Interval::new(0.2, 3.0)).unwrap())
}

/// `log w_j(a)` straight from the definition of each family.
fn direct_log_weight(w: &WeightFamily, a: f64, j: usize) -> f64 {
    let n = j as f64;
    match w.kind {
        WeightKind::Rolewicz => a,
        WeightKind::ExpPower { alpha } => a * (n.powf(alpha) - (n - 1.0).powf(alpha)),
        WeightKind::OnePlusPower { alpha } => (1.0 + a / n.powf(1.0 - alpha)).ln(),
        WeightKind::PolyLog { .. } => {
            2f64.ln() + a * (n.ln() - (n - 1.0).max(1.0).ln()) * (j > 1) as u8 as f64
        }
        WeightKind::OnePlusOverN => (1.0 + a / n).ln(),
        WeightKind::PowerBase => a * (1.0 + 1.0 / n).ln(),
        _ => unreachable!(),
    }
}

proptest! {
    #[test]
    fn increments_add_up(w in family(), a in 0.2f64..3.0, l in 0usize..500, n1 in 0usize..300, n2 in 0usize..300) {
        let whole = w.increment(a, l, n1 + n2);
        let parts = w.increment(a, l, n1) + w.increment(a, l + n1, n2);
        prop_assert!((whole - parts).abs() <= 1e-9 * (1.0 + whole.abs()));
    }

    #[test]
    fn increments_match_summed_weights(w in family(), a in 0.2f64..3.0, l in 0usize..200, n in 1usize..200) {
        let direct: f64 = (l + 1..=l + n).map(|j| direct_log_weight(&w, a, j)).sum();
        let got = w.increment(a, l, n);
        prop_assert!((got - direct).abs() <= 1e-9 * (1.0 + direct.abs()), "{got} vs {direct}");
    }

    #[test]
    fn cumulative_log_is_increasing_in_the_parameter(w in family(), a in 0.2f64..2.9, h in 1e-3f64..0.1, n in 1usize..1000) {
        prop_assert!(w.increment(a + h, 0, n) > w.increment(a, 0, n));
    }

    #[test]
    fn shifts_invert_each_other(w in family(), a in 0.2f64..3.0, n in 1usize..64,
                                coeffs in prop::collection::vec(-1.0f64..1.0, 1..64)) {
        let x = TruncatedVector::new(coeffs, Norm::Sup).unwrap();
        let y = apply_forward(&w, a, &x, n).unwrap();
        let back = apply_backward(&w, a, &y.vector, n).unwrap();
        for (c, d) in x.coeffs().iter().zip(back.vector.coeffs()) {
            prop_assert!((c - d).abs() <= 1e-12 * c.abs());
        }
    }

    #[test]
    fn log_norms_match_direct_norms(coeffs in prop::collection::vec(-1e3f64..1e3, 1..40), p in 1.0f64..4.0) {
        let mut v = SparseLogVector::new();
        for (i, &c) in coeffs.iter().enumerate() {
            v.add_at(i, LogCoeff::from_value(c));
        }
        let sup = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let ellp = coeffs.iter().map(|c| c.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        let got_sup = v.log_norm(Norm::Sup).exp();
        let got_ellp = v.log_norm(Norm::Ellp { p }).exp();
        prop_assert!((got_sup - sup).abs() <= 1e-12 * sup.max(1e-300));
        prop_assert!((got_ellp - ellp).abs() <= 1e-11 * ellp.max(1e-300));
    }

    #[test]
    fn log_coefficients_add_like_reals(x in -1e6f64..1e6, y in -1e6f64..1e6) {
        let s = LogCoeff::from_value(x).add(&LogCoeff::from_value(y)).value();
        prop_assert!((s - (x + y)).abs() <= 1e-9 * (x.abs() + y.abs()).max(1e-300));
    }

    #[test]
    fn recursion_is_spaced_and_increasing(alpha in 0.3f64..0.9, r in 2usize..=4, m in 1usize..=5,
                                          n1 in 1u64..10_000, gap in 1u64..100, t in 0.05f64..0.8) {
        let rho = (t / r as f64).powf(alpha);
        let seq = build_sequence(&RecursionParams::new(alpha, rho, r, m, n1, gap)).unwrap();
        prop_assert_eq!(seq.len(), r.pow(m as u32));
        prop_assert!(seq.windows(2).all(|w| w[1] >= w[0] + gap));
    }

    #[test]
    fn jump_bound_is_monotone(a_k in 1.0f64..2.0, drop in 0.0f64..0.99, alpha in 0.2f64..0.5, n_k in 1u64..1_000_000) {
        let a_j = a_k * (1.0 - drop);
        let b = saut_bound(a_k, a_j, alpha, n_k).unwrap();
        prop_assert!(b >= n_k);
        // the defining inequality holds at the returned time
        let factor = 1.0 / (1.0 - ((a_k - a_j) / a_k).powf(1.0 / alpha));
        prop_assert!(b as f64 >= factor * n_k as f64 * (1.0 - 1e-12));
        prop_assert!(saut_bound(a_k, a_j, alpha, n_k + 1).unwrap() >= b);
    }
}

#[test]
fn every_ordering_visits_each_cell_once() {
    for m in 1..=6 {
        for ordering in [
            CellOrdering::First,
            CellOrdering::Second,
            CellOrdering::Third,
        ] {
            let mut cells = ordering_cells(m, ordering);
            let side = 1usize << m;
            assert_eq!(cells.len(), side * side);
            cells.sort_unstable();
            cells.dedup();
            assert_eq!(cells.len(), side * side);
        }
    }
}
