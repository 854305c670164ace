use gaspipe_core::transferfn::{self, Channel, ResolventEvaluator};
use gaspipe_core::{build_state_space, derive_constants, Complex64, DerivedConstants, DiscretizationGrid, PipeParameters};

fn consts() -> DerivedConstants {
    derive_constants(&PipeParameters::case_study()).unwrap()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn resolvent(k: &DerivedConstants, n: usize) -> ResolventEvaluator {
    let model = build_state_space(k, &DiscretizationGrid::for_pipe(k, n).unwrap()).unwrap();
    ResolventEvaluator::new(&model)
}

#[test]
fn resolvent_matches_truncated_in_mid_band() {
    let k = consts();
    let ev = resolvent(&k, 400);
    let mut worst = 0.0f64;
    for w in log_grid(1e-3, 3e-2, 40) {
        let s = Complex64::new(0.0, w);
        let a = ev.response(s).unwrap();
        let b = transferfn::truncated_response(&k, 200, s).unwrap();
        for ch in Channel::ALL {
            worst = worst.max(rel(a.get(ch), b.get(ch)));
        }
    }
    assert!(worst < 0.02, "worst relative gap {worst}");
}

#[test]
fn joint_refinement_shrinks_gap() {
    let k = consts();
    let probe: Vec<Complex64> = log_grid(2e-3, 5e-2, 12).into_iter().map(|w| Complex64::new(0.0, w)).collect();
    let gap = |n_seg: usize, order: usize| {
        let ev = resolvent(&k, n_seg);
        probe
            .iter()
            .map(|&s| rel(ev.response(s).unwrap().g11, transferfn::truncated_response(&k, order, s).unwrap().g11))
            .fold(0.0, f64::max)
    };
    let coarse = gap(50, 25);
    let mid = gap(100, 50);
    let fine = gap(200, 100);
    assert!(mid < coarse && fine < mid, "{coarse} {mid} {fine}");
    assert!(fine < 0.6 * coarse, "{coarse} {fine}");
}

#[test]
fn real_axis_values_are_real() {
    let k = consts();
    let ev = resolvent(&k, 60);
    for x in [1e-4, 1e-3, 0.01, 0.1, 1.0] {
        let s = Complex64::new(x, 0.0);
        for r in [
            ev.response(s).unwrap(),
            transferfn::truncated_response(&k, 100, s).unwrap(),
            transferfn::compact_response(&k, s).unwrap(),
        ] {
            for ch in Channel::ALL {
                let v = r.get(ch);
                assert!(v.im.abs() <= 1e-12 * v.norm(), "{ch:?} at {x}: {v}");
            }
        }
    }
}

#[test]
fn cross_channel_keeps_sign_on_positive_axis() {
    let k = consts();
    let ev = resolvent(&k, 80);
    for x in log_grid(1e-5, 0.2, 60) {
        let s = Complex64::new(x, 0.0);
        assert!(transferfn::compact_response(&k, s).unwrap().g12.re < 0.0);
        assert!(transferfn::truncated_response(&k, 100, s).unwrap().g12.re < 0.0);
        assert!(ev.response(s).unwrap().g12.re < 0.0);
    }
}

#[test]
fn cross_channel_has_no_notch_on_imaginary_axis() {
    let k = consts();
    let fr = transferfn::bode(
        &k,
        transferfn::FrequencyGrid {
            omega_min: 1e-4,
            omega_max: 1.0,
            points: 2000,
        },
        transferfn::Evaluator::Truncated { order: 200 },
    )
    .unwrap();
    let db = fr.magnitude_db(Channel::G21);
    for w in db.windows(3) {
        // a notch would show as a sharp local minimum
        assert!(!(w[1] < w[0] - 3.0 && w[1] < w[2] - 3.0));
    }
}

#[test]
fn compact_normalized_agrees_with_compact() {
    let k = consts();
    for w in log_grid(1e-4, 1.0, 30) {
        let s = Complex64::new(0.0, w);
        let a = transferfn::compact_response(&k, s).unwrap();
        let b = transferfn::compact_response_normalized(&k, s).unwrap();
        for ch in Channel::ALL {
            assert!(rel(b.get(ch), a.get(ch)) < 1e-6);
        }
    }
}
