//! End-to-end runs: set -> schedule -> criterion, and set -> synthesized
//! vector -> orbit distances recomputed from the stored coefficients.

use hclab::constructor::{synthesize, ScheduleSource, SynthesisOptions};
use hclab::criteria::check_caracstandard;
use hclab::paramsets::ParamSet;
use hclab::schedule::{
    lipschitz_schedule, solve_covering, AdaptiveParams, CoveringParams, LipschitzParams,
};
use hclab::seqspace::{Norm, TruncatedVector, WeightFamily};

#[test]
fn covering_pieces_cover_a_grid_with_spaced_times() {
    let set = ParamSet::cube(vec![1.0, 1.0], 0.5).with_budget(2000);
    let params = CoveringParams {
        tau: 5.0,
        delta: 0.1,
        spacing: 10,
        alpha: 0.4,
        beta: 0.9,
        d_const: 1.0,
        max_depth: 64,
    };
    let solution = solve_covering(&set, &params).unwrap();
    assert!(solution.verified());
    for piece in &solution.pieces {
        let times = piece.times();
        assert!(times[0] >= 10 && times.windows(2).all(|t| t[1] >= t[0] + 10));
        assert!(times.iter().map(|&t| (t as f64).powf(-0.9)).sum::<f64>() < 0.1);
    }
    // Every grid point is within tau / n^alpha of some anchor, in sup distance.
    for i in 0..=40 {
        for j in 0..=40 {
            let x = [1.0 + i as f64 / 80.0, 1.0 + j as f64 / 80.0];
            let slack = solution
                .pieces
                .iter()
                .flat_map(|p| p.entries.iter())
                .map(|e| {
                    let d = x
                        .iter()
                        .zip(&e.anchor)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    5.0 / (e.n as f64).powf(0.4) - d
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(slack >= -1e-12, "{x:?} uncovered by {slack}");
        }
    }
}

#[test]
fn standard_schedule_on_a_segment_satisfies_the_criterion() {
    let set = ParamSet::segment(vec![1.0, 2.0], vec![1.5, 1.5]);
    let schedule = lipschitz_schedule(
        &set,
        &LipschitzParams {
            tau: 2.0,
            spacing: 10,
            step: 18,
            offset: 0,
            max_cells: 100_000,
        },
    )
    .unwrap();
    let report = check_caracstandard(&schedule, &set, 2.0, 10).unwrap();
    assert!(report.passed(), "{}", report.table());
}

/// `‖B^n x(λ) − y‖_∞` per coordinate for Rolewicz weights, where
/// `(B^n x)_j = e^{λ n} x_{j+n}`.
fn rolewicz_orbit_distance(
    x: &hclab::seqspace::SparseLogVector,
    lambda: f64,
    n: usize,
    target: &[f64],
) -> f64 {
    let mut shifted = vec![0.0; target.len()];
    let mut tail = 0.0f64;
    for (m, c) in x.iter() {
        if m < n {
            continue;
        }
        let v = (c.log_mag + lambda * n as f64).exp() * if c.negative { -1.0 } else { 1.0 };
        match shifted.get_mut(m - n) {
            Some(s) => *s += v,
            None => tail = tail.max(v.abs()),
        }
    }
    shifted
        .iter()
        .zip(target)
        .map(|(s, t)| (s - t).abs())
        .fold(tail, f64::max)
}

#[test]
fn synthesized_vector_reaches_every_target_along_a_segment() {
    let w = WeightFamily::rolewicz(0.5, 3.0);
    let set = ParamSet::segment(vec![1.0, 2.0], vec![1.02, 1.98]);
    let source = ScheduleSource::Adaptive {
        params: AdaptiveParams {
            theta: 0.09,
            spacing: 3,
            offset: 0,
            support: 1,
            cross_budget: 0.05,
            window: 64,
            max_cells: 100_000,
        },
    };
    let e0 = TruncatedVector::basis(0, Norm::Sup);
    let both = TruncatedVector::new(vec![1.0, 1.0], Norm::Sup).unwrap();
    let targets = vec![vec![e0.clone(), e0.clone()], vec![both, e0]];
    let u = vec![
        TruncatedVector::zeros(1, Norm::Sup),
        TruncatedVector::zeros(1, Norm::Sup),
    ];
    let eps = 0.1;
    let c = synthesize(
        &w,
        &u,
        &targets,
        &set,
        eps,
        &source,
        &SynthesisOptions::default(),
    )
    .unwrap();

    for (k, round) in c.rounds.iter().enumerate() {
        let times = round.schedule.as_ref().unwrap().times();
        for s in 0..=100 {
            let t = s as f64 / 100.0;
            let lambda = [1.0 + 0.02 * t, 2.0 - 0.02 * t];
            let best = times
                .iter()
                .map(|&n| {
                    (0..2)
                        .map(|i| {
                            rolewicz_orbit_distance(
                                &c.x[i],
                                lambda[i],
                                n as usize,
                                targets[k][i].coeffs(),
                            )
                        })
                        .fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < eps, "round {} at t = {t}: distance {best}", k + 1);
        }
    }
}
