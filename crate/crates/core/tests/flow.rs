use proptest::prelude::*;
use shiftcert_core::flow::{
    apriori_enclosure, ball3, integrate_segment, jacobian_bounds, local_error_bound, logarithmic_norm, points3,
    propagate_error, rk4_step, section_crossing, vector_field, AffineField, Axis, FlowError, FlowParams,
    Orientation, PoincareEvaluator, SectionSpec, VectorField, DEFAULT_STEP, V3,
};
use shiftcert_core::Interval;
use shiftcert_oracle::dd::DD;
use shiftcert_oracle::lorenz::{self as reference, Params};
use shiftcert_oracle::rng::SplitMix;

fn lorenz() -> FlowParams {
    FlowParams::default()
}

fn contains3(b: &V3, p: &[DD; 3]) -> bool {
    (0..3).all(|i| {
        let lo = DD::new(b[i].lo());
        let hi = DD::new(b[i].hi());
        (p[i] - lo).hi >= 0.0 && (hi - p[i]).hi >= 0.0
    })
}

/// A point near the attractor, from a long pilot run.
fn attractor_points(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let f = lorenz();
    let mut rng = SplitMix::new(seed);
    let mut x = [1.0, 1.0, 50.0];
    for _ in 0..20_000 {
        x = shiftcert_core::flow::pilot_rk4(&f, &x, 1e-4);
    }
    let mut out = vec![];
    while out.len() < n {
        let k = 50 + rng.below(400) as usize;
        for _ in 0..k {
            x = shiftcert_core::flow::pilot_rk4(&f, &x, 1e-4);
        }
        out.push(x);
    }
    out
}

#[test]
fn default_parameters_and_field_value() {
    let f = lorenz();
    assert_eq!((f.s, f.r, f.q), (45.0, 54.0, 10.0));
    let v = vector_field(&f, &points3(&[1.0, 1.0, 1.0]));
    assert!(v[0].contains(0.0) && v[1].contains(52.0) && v[2].contains(-9.0));
}

#[test]
fn log_norm_at_origin_is_53() {
    let j = jacobian_bounds(&lorenz(), &points3(&[0.0, 0.0, 0.0]));
    assert_eq!(logarithmic_norm(&j), 53.0);
}

#[test]
fn propagated_error_example() {
    let bound = propagate_error(1e-10, 0.25, 53.0);
    let exact = (DD::new(1e-10) * DD::new(13.25).exp()).to_f64();
    assert!(bound >= exact);
    assert!(bound >= 5.6e-5 && bound <= exact * (1.0 + 1e-12));
}

#[test]
fn log_norm_bounds_random_boxes() {
    // criterion: 10^3 boxes, every sampled Jacobian has log norm below the bound
    let f = lorenz();
    let mut rng = SplitMix::new(17);
    let mut violations = 0;
    for _ in 0..1000 {
        let c = [rng.range(-40.0, 40.0), rng.range(-50.0, 50.0), rng.range(0.0, 100.0)];
        let r = rng.range(0.0, 2.0);
        let b = ball3(&c, r);
        let bound = logarithmic_norm(&jacobian_bounds(&f, &b));
        for _ in 0..20 {
            let p: Vec<f64> = (0..3).map(|i| rng.range(b[i].lo(), b[i].hi())).collect();
            let j = [
                [-f.s, f.s, 0.0],
                [f.r - p[2], -1.0, -p[0]],
                [p[1], p[0], -f.q],
            ];
            let mu = (0..3)
                .map(|i| j[i][i] + (0..3).filter(|&k| k != i).map(|k| j[i][k].abs()).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            if mu > bound * (1.0 + 1e-12) + 1e-12 {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn mirror_symmetry_of_the_field() {
    let f = lorenz();
    let mut rng = SplitMix::new(2);
    for _ in 0..500 {
        let c = [rng.range(-30.0, 30.0), rng.range(-30.0, 30.0), rng.range(0.0, 90.0)];
        let r = rng.range(0.0, 1.0);
        let b = ball3(&c, r);
        let m = [-b[0], -b[1], b[2]];
        let fb = f.eval(&b);
        let fm = f.eval(&m);
        assert_eq!(fm[0], -fb[0]);
        assert_eq!(fm[1], -fb[1]);
        assert_eq!(fm[2], fb[2]);
    }
}

#[test]
fn local_error_shrinks_with_the_step() {
    let f = lorenz();
    for p in attractor_points(50, 3) {
        let x = points3(&p);
        let e1 = local_error_bound(&f, &x, DEFAULT_STEP).unwrap();
        let e2 = local_error_bound(&f, &x, DEFAULT_STEP / 2.0).unwrap();
        let m1 = e1.iter().cloned().fold(0.0, f64::max);
        let m2 = e2.iter().cloned().fold(0.0, f64::max);
        assert!(m1 >= 16.0 * m2, "{m1} vs {m2}");
    }
}

#[test]
fn oversized_step_fails_enclosure() {
    let x = points3(&[10.0, 10.0, 30.0]);
    assert_eq!(apriori_enclosure(&lorenz(), &x, 1.0), Err(FlowError::EnclosureFailure));
}

#[test]
fn bailout_triggers_overflow_escape() {
    let x = points3(&[10.0, 10.0, 30.0]);
    assert_eq!(rk4_step(&lorenz(), &x, DEFAULT_STEP, 5.0), Err(FlowError::OverflowEscape));
}

#[test]
fn rk4_steps_enclose_reference_flow() {
    // criterion: 500 Lorenz starts, validated step contains the reference
    let f = lorenz();
    let p = Params::default();
    let mut violations = 0;
    for x0 in attractor_points(500, 5) {
        let b = rk4_step(&f, &points3(&x0), DEFAULT_STEP, 1e3).unwrap();
        let y = reference::flow(&p, x0, DEFAULT_STEP, 16);
        violations += !contains3(&b, &y) as usize;
    }
    assert_eq!(violations, 0);
}

#[test]
fn bundle_segment_encloses_sampled_trajectories() {
    let f = lorenz();
    let p = Params::default();
    let mut rng = SplitMix::new(8);
    let eta = 1e-3;
    for c in attractor_points(20, 9) {
        let seg = integrate_segment(&f, c, eta, DEFAULT_STEP, 300, 1e3).unwrap();
        for w in seg.steps.windows(2) {
            assert!(w[1].delta >= w[0].delta, "error radius must not decrease");
        }
        for _ in 0..5 {
            let x0 = [c[0] + rng.range(-eta, eta), c[1] + rng.range(-eta, eta), c[2] + rng.range(-eta, eta)];
            let mut y = reference::to_dd(x0);
            let h = DD::new(DEFAULT_STEP) / DD::new(4.0);
            for s in &seg.steps {
                assert!(contains3(&s.start_box(), &y), "start box");
                for _ in 0..4 {
                    y = reference::rk4(&p, &y, h);
                    assert!(contains3(&s.apriori, &y), "a-priori box");
                }
            }
        }
    }
}

#[test]
fn constant_field_crossing_is_exact() {
    // x' = 1, y' = 2, z' = -3 from (0, 0, 1): hits z = 0 at t = 1/3, (1/3, 2/3)
    let f = AffineField { a: [[0.0; 3]; 3], c: [1.0, 2.0, -3.0] };
    let seg = integrate_segment(&f, [0.0, 0.0, 1.0], 0.0, 1.0 / 64.0, 40, 1e3).unwrap();
    let sec = SectionSpec::new(Axis::Z, 0.0, Orientation::Downward);
    let c = section_crossing(&f, &seg, &sec, false).unwrap().unwrap();
    assert!(c.time.contains(1.0 / 3.0) && c.time.width() < 1e-12);
    assert!(c.point[0].contains(1.0 / 3.0) && c.point[1].contains(2.0 / 3.0));
    assert!(c.point[0].width() < 1e-12 && c.point[1].width() < 1e-12);
    // wrong orientation: never hit
    let up = SectionSpec::new(Axis::Z, 0.0, Orientation::Upward);
    assert_eq!(section_crossing(&f, &seg, &up, false).unwrap(), None);
}

#[test]
fn grazing_trajectory_is_flagged() {
    // x' = 1, z' = x from (-1, 0, 0.5): z = (t - 1)^2 / 2 touches z = 0 at t = 1
    let f = AffineField { a: [[0.0; 3], [0.0; 3], [1.0, 0.0, 0.0]], c: [1.0, 0.0, 0.0] };
    let seg = integrate_segment(&f, [-1.0, 0.0, 0.5], 1e-9, 1.0 / 64.0, 128, 1e3).unwrap();
    let sec = SectionSpec::new(Axis::Z, 0.0, Orientation::Either);
    assert_eq!(section_crossing(&f, &seg, &sec, false), Err(FlowError::TangencySuspected));
}

#[test]
fn never_reaching_the_section_escapes() {
    let f = AffineField { a: [[0.0; 3]; 3], c: [0.0, 0.0, 1.0] };
    let mut ev = PoincareEvaluator::new(
        f,
        SectionSpec::new(Axis::Z, 0.0, Orientation::Downward),
        SectionSpec::new(Axis::Z, -1.0, Orientation::Downward),
    );
    ev.h = 1.0 / 16.0;
    ev.max_time = 2.0;
    assert_eq!(ev.eval([0.0, 0.0], 0.01), Err(FlowError::Escaped));
}

fn interval_contains_dd(i: &Interval, v: DD) -> bool {
    (v - DD::new(i.lo())).hi >= 0.0 && (DD::new(i.hi()) - v).hi >= 0.0
}

#[test]
fn lorenz_crossings_enclose_reference_hits() {
    // criterion: 500 starts through integration, error control and crossing
    let f = lorenz();
    let p = Params::default();
    let from = SectionSpec::new(Axis::Z, 53.0, Orientation::Downward);
    let to = SectionSpec::new(Axis::Z, 30.0, Orientation::Downward);
    let ev = PoincareEvaluator::new(f, from, to);
    let mut rng = SplitMix::new(21);
    let mut violations = 0;
    let mut checked = 0;
    while checked < 500 {
        let x = rng.range(-8.0, 8.0);
        let y = rng.range(-8.0, 8.0);
        // downward crossing of z = 53 needs x y < 530
        if x * y > 400.0 {
            continue;
        }
        let eta = 1e-6;
        let Ok(img) = ev.eval([x, y], eta) else { continue };
        let enc = img.enclosure(eta);
        for _ in 0..2 {
            let s = [x + rng.range(-eta, eta), y + rng.range(-eta, eta)];
            let Some((hit, t)) = reference::first_crossing(&p, [s[0], s[1], 53.0], 2, 30.0, -1, DEFAULT_STEP / 4.0, 10.0)
            else {
                continue;
            };
            let ok = interval_contains_dd(&enc[0], DD::new(hit[0]))
                && interval_contains_dd(&enc[1], DD::new(hit[1]))
                && t <= img.flight_time + DEFAULT_STEP;
            violations += !ok as usize;
        }
        checked += 1;
    }
    assert_eq!(violations, 0);
}

#[test]
fn start_box_straddling_the_plane_after_a_clear_step_resolves() {
    // the step before the crossing clears z = 25, but the next start box
    // (a different enclosure of the same points) already reaches it
    let from = SectionSpec::new(Axis::Z, 27.5, Orientation::Downward);
    let to = SectionSpec::new(Axis::Z, 25.0, Orientation::Downward);
    let mut ev = PoincareEvaluator::new(lorenz(), from, to);
    ev.max_time = 1.0;
    let (c, eta) = ([-1.296875, -1.578125], 1.0 / 64.0);
    let img = ev.eval(c, eta).unwrap();
    let enc = img.enclosure(eta);
    let mut rng = SplitMix::new(22);
    for _ in 0..20 {
        let s = [c[0] + rng.range(-eta, eta), c[1] + rng.range(-eta, eta)];
        let (hit, _) = reference::first_crossing(&Params::default(), [s[0], s[1], 27.5], 2, 25.0, -1, DEFAULT_STEP / 4.0, 1.0).unwrap();
        assert!(interval_contains_dd(&enc[0], DD::new(hit[0])) && interval_contains_dd(&enc[1], DD::new(hit[1])));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn error_radius_is_monotone(x in -20.0f64..20.0, y in -20.0f64..20.0, z in 10.0f64..80.0, eta in 0.0f64..1e-2) {
        let seg = integrate_segment(&lorenz(), [x, y, z], eta, DEFAULT_STEP, 64, 1e3).unwrap();
        for w in seg.steps.windows(2) {
            prop_assert!(w[1].delta >= w[0].delta);
            prop_assert!(w[1].radius >= w[1].delta);
        }
    }
}
