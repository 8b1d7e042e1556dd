mod oracles;

use omma::metrics::{list_metrics, registered_metrics};
use omma::{Averaging, Metric, TaskKind};
use oracles::{chord_gap, fd_suite};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn analytic_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (checked, worst, which) = fd_suite(&mut rng, 10, 1e-6);
    assert_eq!(checked, registered_metrics().len() * 2 * 10);
    assert!(worst <= 1e-5, "worst relative error {worst:e} for {which}");
}

fn chord_tasks(metric: &Metric) -> Vec<TaskKind> {
    match metric.averaging {
        Averaging::BinaryDirect => vec![TaskKind::Multilabel(1)],
        Averaging::Macro | Averaging::Micro => vec![TaskKind::Multilabel(3), TaskKind::Multiclass(3)],
        Averaging::MulticlassNative => vec![TaskKind::Multiclass(4)],
    }
}

#[test]
fn concave_metrics_pass_the_chord_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for metric in registered_metrics().into_iter().filter(|m| m.base.is_concave()) {
        for task in chord_tasks(&metric) {
            for _ in 0..500 {
                let gap = chord_gap(&mut rng, &metric, task);
                assert!(gap >= -1e-12, "{} on {task:?}: chord gap {gap:e}", metric.name());
            }
        }
    }
}

#[test]
fn non_concave_flags_are_not_vacuous() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for info in list_metrics().into_iter().filter(|i| !i.concave) {
        let metric = Metric::new(info.base, Averaging::BinaryDirect).unwrap();
        let violated = (0..5000).any(|_| chord_gap(&mut rng, &metric, TaskKind::Multilabel(1)) < -1e-9);
        assert!(violated, "no chord violation found for {}", info.name);
    }
}
