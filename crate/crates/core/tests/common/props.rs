//! Property checks run both by the property suite and by the acceptance gate.

use fesl::ensemble::{delta_select, EnsembleState};
use fesl::harness::metrics::best_switch_loss;
use fesl::losses::{loss, loss_gradient_wrt_model, LossKind};
use fesl::streams::build_cycle;
use fesl::types::{project_ball, FeatureVector, Label, LinearModel, Phase, StreamSchedule, Task};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

type Check = std::result::Result<(), TestCaseError>;

pub fn projection_input() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (proptest::collection::vec(-50.0f64..50.0, 1..12), 0.1f64..40.0)
}

pub fn projection_is_idempotent((v, r): (Vec<f64>, f64)) -> Check {
    let v = DVector::from_vec(v);
    let p = project_ball(&v, r).unwrap();
    prop_assert!(p.norm() <= r + 1e-12);
    prop_assert!(p.norm() <= v.norm() + 1e-12);
    let pp = project_ball(&p, r).unwrap();
    prop_assert!((pp - &p).amax() <= 1e-12);
    if v.norm() <= r {
        prop_assert_eq!(p, v);
    }
    Ok(())
}

pub fn gradient_input() -> impl Strategy<Value = (LossKind, Vec<(f64, f64)>, f64)> {
    (
        prop_oneof![Just(LossKind::Logistic), Just(LossKind::Square)],
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..7),
        -3.0f64..3.0,
    )
}

/// Analytic gradient against central differences with step 1e-6.
pub fn gradient_matches_finite_differences((kind, wx, y): (LossKind, Vec<(f64, f64)>, f64)) -> Check {
    let (w, x): (Vec<f64>, Vec<f64>) = wx.into_iter().unzip();
    let label = match kind {
        LossKind::Logistic => Label::classification(y >= 0.0),
        LossKind::Square => Label::new(y, Task::Regression).unwrap(),
    };
    let model = LinearModel::new(DVector::from_vec(w.clone()), 1e3).unwrap();
    let grad = loss_gradient_wrt_model(kind, &model, &FeatureVector::new(x.clone()).unwrap(), label).unwrap();
    let at = |w: &[f64]| {
        let f: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
        loss(kind, f, label).unwrap()
    };
    let h = 1e-6;
    let fd = DVector::from_fn(w.len(), |i, _| {
        let mut plus = w.clone();
        let mut minus = w.clone();
        plus[i] += h;
        minus[i] -= h;
        (at(&plus) - at(&minus)) / (2.0 * h)
    });
    let rel = (&grad - &fd).norm() / grad.norm().max(1e-8);
    prop_assert!(rel <= 1e-5, "relative error {}: {} vs {}", rel, grad, fd);
    Ok(())
}

pub fn share_input() -> impl Strategy<Value = (usize, Vec<(f64, f64)>, bool)> {
    (
        3usize..3000,
        proptest::collection::vec((0.0f64..5.0, 0.0f64..5.0), 1..300),
        any::<bool>(),
    )
}

/// Every selection weight stays at or above `delta / 2`.
pub fn fixed_share_floor((t2, losses, clip): (usize, Vec<(f64, f64)>, bool)) -> Check {
    let delta = delta_select(t2).unwrap();
    let mut state = EnsembleState::select(t2, 1, clip).unwrap();
    for (a, b) in losses {
        state.update_select(a, b).unwrap();
        let al = state.alpha();
        prop_assert!(al[0] >= delta / 2.0 - 1e-12 && al[1] >= delta / 2.0 - 1e-12, "{:?}", al);
    }
    Ok(())
}

/// Weights of both ensembles sum to one after every update.
pub fn weights_stay_normalized((t2, losses, clip): (usize, Vec<(f64, f64)>, bool)) -> Check {
    let mut select = EnsembleState::select(t2, 1, clip).unwrap();
    let mut combine = EnsembleState::combine(t2, clip).unwrap();
    for (a, b) in losses {
        select.update(a, b).unwrap();
        combine.update(a, b).unwrap();
        for al in [select.alpha(), combine.alpha()] {
            prop_assert!((al[0] + al[1] - 1.0).abs() <= 1e-12);
            prop_assert!(al[0] >= 0.0 && al[1] >= 0.0);
        }
    }
    Ok(())
}

pub fn switch_input() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 12)
}

pub fn switch_loss_is_exhaustive_minimum(pairs: Vec<(f64, f64)>) -> Check {
    let (l1, l2): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (s, total) = best_switch_loss(&l1, &l2).unwrap();
    let (s_ref, total_ref) = super::exhaustive_switch(&l1, &l2);
    prop_assert!((total - total_ref).abs() <= 1e-12);
    // ties within rounding may pick a neighbouring index; the loss must agree
    if s != s_ref {
        let at_s: f64 = l1[..s].iter().sum::<f64>() + l2[s..].iter().sum::<f64>();
        prop_assert!((at_s - total_ref).abs() <= 1e-12);
    }
    let single = l1.iter().sum::<f64>().min(l2.iter().sum::<f64>());
    prop_assert!(total <= single + 1e-12);
    Ok(())
}

pub fn cycle_input() -> impl Strategy<Value = (usize, usize, usize, usize, u64)> {
    (2usize..60, 0usize..1000, 3usize..60, 0usize..10, any::<u64>())
}

/// Old-only, overlap and new-only rounds have the scheduled counts and order.
pub fn cycle_phases_partition((t1, b_pick, t2, extra, seed): (usize, usize, usize, usize, u64)) -> Check {
    let b = 1 + b_pick % (t1 - 1);
    let schedule = StreamSchedule::new(t1, t2, b, 3, 2).unwrap();
    let n = t1 + t2 + extra;
    let old = DMatrix::from_fn(n, 3, |i, j| (i * 3 + j) as f64);
    let new = DMatrix::from_fn(n, 2, |i, j| -((i * 2 + j) as f64));
    let labels: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let stream = build_cycle(&old, &new, &labels, Task::Classification, schedule, seed).unwrap();
    prop_assert_eq!(stream.instances().len(), t1 + t2);
    prop_assert_eq!(stream.phase(Phase::OldOnly).count(), t1 - b);
    prop_assert_eq!(stream.phase(Phase::Overlap).count(), b);
    prop_assert_eq!(stream.phase(Phase::NewOnly).count(), t2);
    for (k, inst) in stream.instances().iter().enumerate() {
        prop_assert_eq!(inst.round(), k + 1);
        prop_assert_eq!(inst.phase(), schedule.phase_of(k + 1).unwrap());
    }
    Ok(())
}
