use std::f64::consts::PI;

use convex_sensor::experiments::{gamma_sweep, StudyConfig, StudyKind};
use convex_sensor::fourier::{fourier_area, fourier_objective, FourierProblem, FourierShape};
use convex_sensor::geometry::{
    hausdorff_from_supports, perimeter_from_support, polygon_area, reconstruct_boundary, support_samples,
};
use convex_sensor::nlp::{solve_nlp, LinearConstraint, NlpProblem, SolverParams};
use convex_sensor::nodal::{
    anchor_start, nodal_area, nodal_objective, random_start, solve_nodal, InitPolicy, NodalProblem,
};
use convex_sensor::oracles::{brute_force_nodal, inner_parallel_optimum};
use convex_sensor::solve::ObjectiveForm;
use convex_sensor::{ContainerSpec, Exponent, SolveOptions, SupportSamples};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn polygon_from(angles: &[f64], radius: f64, center: [f64; 2]) -> ContainerSpec {
    let mut a = angles.to_vec();
    a.sort_by(f64::total_cmp);
    a.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
    let v: Vec<[f64; 2]> = a
        .iter()
        .map(|t| [center[0] + radius * t.cos(), center[1] + radius * t.sin()])
        .collect();
    ContainerSpec::polygon(&v)
}

fn angles() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..2.0 * PI, 3..9)
}

fn rel_err(fd: f64, g: f64) -> f64 {
    (fd - g).abs() / g.abs().max(1e-6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn minkowski_sum_adds_support(a in angles(), b in angles(), ra in 0.2..2.0f64, rb in 0.2..2.0f64, t in 0.0..2.0 * PI) {
        let (p, q) = (polygon_from(&a, ra, [0.3, -0.1]), polygon_from(&b, rb, [-0.5, 0.2]));
        prop_assume!(p.validate().is_ok() && q.validate().is_ok());
        let sum = ContainerSpec::MinkowskiSum { left: Box::new(p.clone()), right: Box::new(q.clone()) };
        prop_assert!((sum.support(t) - p.support(t) - q.support(t)).abs() <= 1e-12 * (1.0 + ra + rb));
    }

    #[test]
    fn scaling_and_translation_act_on_support(a in angles(), s in 0.1..5.0f64, dx in -2.0..2.0f64, dy in -2.0..2.0f64, t in 0.0..2.0 * PI) {
        let p = polygon_from(&a, 1.0, [0.0, 0.0]);
        prop_assume!(p.validate().is_ok());
        let scaled = ContainerSpec::Scaled { base: Box::new(p.clone()), factor: s };
        let moved = ContainerSpec::Translated { base: Box::new(p.clone()), offset: [dx, dy] };
        prop_assert!((scaled.support(t) - s * p.support(t)).abs() <= 1e-12 * s.max(1.0));
        prop_assert!((moved.support(t) - p.support(t) - dx * t.cos() - dy * t.sin()).abs() <= 1e-12 * 4.0);
        prop_assert!((scaled.area() - s * s * p.area()).abs() <= 1e-10 * s * s * p.area().max(1.0));
    }

    #[test]
    fn discrete_convexity_gives_convex_chain(a in angles(), n in 8usize..200) {
        let p = polygon_from(&a, 1.0, [0.2, 0.1]);
        prop_assume!(p.validate().is_ok());
        let h = support_samples(&p, n).unwrap();
        prop_assert!(h.is_convex());
        let chain = reconstruct_boundary(&h).unwrap();
        prop_assert!(chain.is_convex(1e-9));
    }

    #[test]
    fn normalized_p_mean_is_monotone(seed in any::<u64>(), p1 in 1.0..32.0f64, dp in 0.0..32.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..64).map(|_| rng.gen_range(0.0..2.0)).collect();
        let mean = |p: f64| (g.iter().map(|x| x.powf(p)).sum::<f64>() / g.len() as f64).powf(1.0 / p);
        prop_assert!(mean(p1) <= mean(p1 + dp) + 1e-10);
    }

    #[test]
    fn inner_parallel_area_hits_target(alpha in 0.05..0.95f64, which in 0usize..3) {
        let rounded_square = ContainerSpec::MinkowskiSum {
            left: Box::new(ContainerSpec::square(1.0)),
            right: Box::new(ContainerSpec::disk(0.3)),
        };
        let c = [ContainerSpec::disk(1.0), rounded_square, ContainerSpec::stadium(1.0, 0.7)][which].clone();
        let Ok((d, inner)) = inner_parallel_optimum(&c, alpha) else {
            // offsets deeper than the rounding radius are rejected by design
            prop_assume!(which == 1);
            return Ok(());
        };
        prop_assert!(d >= 0.0);
        prop_assert!((inner.area() - alpha * c.area()).abs() <= 1e-9 * c.area());
    }
}

#[test]
fn inclusion_matches_support_order() {
    let (disk, square) = (ContainerSpec::disk(1.0), ContainerSpec::square(1.0));
    let (hd, hs) = (support_samples(&disk, 720).unwrap(), support_samples(&square, 720).unwrap());
    assert!(hd.values().iter().zip(hs.values()).all(|(a, b)| a <= b));
    let big = ContainerSpec::disk(1.2);
    let hb = support_samples(&big, 720).unwrap();
    assert!(hb.values().iter().zip(hs.values()).any(|(a, b)| a > b));
}

#[test]
fn reconstruction_area_converges_at_second_order() {
    for c in [ContainerSpec::disk(1.0), ContainerSpec::stadium(1.0, 1.0)] {
        let err = |n: usize| {
            let chain = reconstruct_boundary(&support_samples(&c, n).unwrap()).unwrap();
            (polygon_area(&chain).unwrap() - c.area()).abs()
        };
        let ratio = err(64) / err(128);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
    // the discrete area of a disk is exact, so only the stadium shows the rate
    let c = ContainerSpec::stadium(1.0, 1.0);
    let nodal = |n: usize| (nodal_area(&support_samples(&c, n).unwrap()).0 - c.area()).abs();
    let ratio = nodal(64) / nodal(128);
    assert!((3.5..=4.5).contains(&ratio), "nodal ratio {ratio}");
}

#[test]
fn nodal_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [1.0, 2.0, 3.5, 10.0] {
        let prob = NodalProblem::new(ContainerSpec::square(1.0), 48, Exponent::Finite(p), 0.4).unwrap();
        let hc = prob.container_samples().values().to_vec();
        for _ in 0..3 {
            let h = random_start(&prob, &mut rng);
            let (_, g) = nodal_objective(&h, &prob).unwrap();
            let (_, ga) = nodal_area(&h);
            for k in 0..h.n() {
                if hc[k] - h.values()[k] < 1e-4 {
                    continue;
                }
                let eps = 1e-6;
                let shifted = |s: f64| {
                    let mut v = h.values().to_vec();
                    v[k] += s;
                    SupportSamples::new(v).unwrap()
                };
                let fd = (nodal_objective(&shifted(eps), &prob).unwrap().0
                    - nodal_objective(&shifted(-eps), &prob).unwrap().0)
                    / (2.0 * eps);
                assert!(rel_err(fd, g[k]) <= 1e-5, "p={p} k={k} fd={fd} g={}", g[k]);
                // quadratic in h: a large step is exact and avoids cancellation
                let fd = (nodal_area(&shifted(1e-2)).0 - nodal_area(&shifted(-1e-2)).0) / 2e-2;
                assert!(rel_err(fd, ga[k]) <= 1e-5, "area k={k}");
            }
        }
    }
}

#[test]
fn fourier_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let prob = FourierProblem::new(ContainerSpec::disk(1.0), 8, 256, 512, Exponent::Finite(3.0), 0.3).unwrap();
    for _ in 0..3 {
        let mut x: Vec<f64> = (0..17).map(|_| rng.gen_range(-0.02..0.02)).collect();
        x[0] = 0.5;
        let shape = FourierShape::from_coeffs(8, &x);
        let (_, g) = fourier_objective(&shape, &prob).unwrap();
        let (_, ga) = fourier_area(&shape);
        for i in 0..x.len() {
            let eps = 1e-6;
            let at = |s: f64| {
                let mut y = x.clone();
                y[i] += s;
                FourierShape::from_coeffs(8, &y)
            };
            let fd = (fourier_objective(&at(eps), &prob).unwrap().0 - fourier_objective(&at(-eps), &prob).unwrap().0)
                / (2.0 * eps);
            assert!(rel_err(fd, g[i]) <= 1e-5 || (fd - g[i]).abs() <= 1e-9, "i={i} fd={fd} g={}", g[i]);
            let fd = (fourier_area(&at(eps)).0 - fourier_area(&at(-eps)).0) / (2.0 * eps);
            assert!((fd - ga[i]).abs() <= 1e-9 * ga[i].abs().max(1.0), "area i={i}");
        }
    }
}

#[test]
fn fourier_objective_is_translation_invariant_for_joint_shift() {
    let c = ContainerSpec::square(1.0);
    let moved = ContainerSpec::Translated { base: Box::new(c.clone()), offset: [0.3, -0.2] };
    let p0 = FourierProblem::new(c, 6, 256, 512, Exponent::Finite(2.0), 0.5).unwrap();
    let p1 = FourierProblem::new(moved, 6, 256, 512, Exponent::Finite(2.0), 0.5).unwrap();
    let mut x = vec![0.0; 13];
    x[0] = 0.6;
    x[4] = 0.05;
    let mut y = x.clone();
    y[1] += 0.3; // a_1
    y[7] += -0.2; // b_1
    let f0 = fourier_objective(&FourierShape::from_coeffs(6, &x), &p0).unwrap().0;
    let f1 = fourier_objective(&FourierShape::from_coeffs(6, &y), &p1).unwrap().0;
    assert!((f0 - f1).abs() <= 1e-9 * f0.max(1.0), "{f0} vs {f1}");
}

#[test]
fn powered_and_rooted_objectives_share_the_minimizer() {
    let prob = NodalProblem::new(ContainerSpec::square(1.0), 32, Exponent::Finite(2.0), 0.5).unwrap();
    let base = SolveOptions { seeds: 1, ..Default::default() };
    let rooted = SolveOptions { objective_form: ObjectiveForm::Rooted, ..base.clone() };
    let a = solve_nodal(&prob, &InitPolicy::AnchorAndRandom, &base).unwrap();
    let b = solve_nodal(&prob, &InitPolicy::AnchorAndRandom, &rooted).unwrap();
    let d = hausdorff_from_supports(&a.shape, &b.shape).unwrap();
    assert!(d <= 1e-6, "minimizers differ by {d}");
}

#[test]
fn warm_start_never_loses_to_its_start() {
    let prob = NodalProblem::new(ContainerSpec::stadium(1.0, 0.5), 48, Exponent::Finite(4.0), 0.5).unwrap();
    let start = anchor_start(&prob);
    let start_energy = nodal_objective(&start, &prob).unwrap().0.powf(0.25);
    let r = solve_nodal(&prob, &InitPolicy::Warm(start), &SolveOptions { seeds: 1, ..Default::default() }).unwrap();
    assert!(r.energy <= start_energy + 1e-9);
}

#[test]
fn nodal_solves_are_deterministic() {
    let prob = NodalProblem::new(ContainerSpec::square(1.0), 32, Exponent::Finite(3.0), 0.4).unwrap();
    let opts = SolveOptions { seeds: 3, base_seed: 42, ..Default::default() };
    let a = solve_nodal(&prob, &InitPolicy::Random, &opts).unwrap();
    let b = solve_nodal(&prob, &InitPolicy::Random, &opts).unwrap();
    assert_eq!(a.shape, b.shape);
    assert_eq!(a.energy.to_bits(), b.energy.to_bits());
    assert_eq!(a.history, b.history);
}

/// Exhaustive active-set enumeration for a strictly convex QP.
fn qp_by_active_sets(q: &DMatrix<f64>, c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (n, m) = (q.nrows(), a.nrows());
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << m) {
        let act: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        if act.len() > n {
            continue;
        }
        let k = act.len();
        let mut kkt = DMatrix::zeros(n + k, n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(q);
        let mut rhs = DVector::zeros(n + k);
        rhs.rows_mut(0, n).copy_from(&(-c));
        for (j, &i) in act.iter().enumerate() {
            for col in 0..n {
                kkt[(n + j, col)] = a[(i, col)];
                kkt[(col, n + j)] = a[(i, col)];
            }
            rhs[n + j] = b[i];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else { continue };
        let x = sol.rows(0, n).into_owned();
        if (0..k).any(|j| sol[n + j] < -1e-10) || (a * &x - b).iter().any(|v| *v > 1e-10) {
            continue;
        }
        let f = 0.5 * x.dot(&(q * &x)) + c.dot(&x);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, x));
        }
    }
    best.expect("feasible by construction").1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn qp_matches_active_set_enumeration(seed in any::<u64>(), n in 2usize..=8, m in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let q = &l * l.transpose() + DMatrix::identity(n, n) * 0.5;
        let c = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
        let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
        let x_feas = DVector::from_fn(n, |_, _| rng.gen_range(-0.5..0.5));
        let b = &a * &x_feas + DVector::from_fn(m, |_, _| rng.gen_range(0.0..0.3));
        let expected = qp_by_active_sets(&q, &c, &a, &b);

        let (qf, cf) = (q.clone(), c.clone());
        let objective = move |x: &[f64], g: &mut [f64]| {
            let xv = DVector::from_column_slice(x);
            let qx = &qf * &xv;
            for i in 0..x.len() {
                g[i] = qx[i] + cf[i];
            }
            0.5 * xv.dot(&qx) + cf.dot(&xv)
        };
        let rows = (0..m)
            .map(|i| LinearConstraint::dense(&a.row(i).iter().copied().collect::<Vec<_>>(), b[i]))
            .collect();
        let problem = NlpProblem::new(n, objective).with_inequalities(rows);
        let params = SolverParams { kkt_tolerance: 1e-9, ..Default::default() };
        let r = solve_nlp(&problem, x_feas.as_slice(), &params).unwrap();
        let err = r.x.iter().zip(expected.iter()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-6, "err {err}");

        // Violation at the end of each outer iteration never grows after the
        // first multiplier update, beyond a small slack; values under the
        // feasibility tolerance count as zero.
        let mut v: Vec<f64> = Vec::new();
        for (i, h) in r.history.iter().enumerate() {
            if r.history.get(i + 1).is_none_or(|next| next.outer_iter != h.outer_iter) {
                v.push(h.max_violation);
            }
        }
        for w in v.windows(2) {
            prop_assert!(w[1] <= (1.01 * w[0]).max(params.feasibility_tolerance), "violation {:?}", v);
        }
    }
}

#[test]
fn brute_force_beats_random_grid_points() {
    let c = ContainerSpec::disk(1.0);
    let levels = 9;
    let bf = brute_force_nodal(&c, 4, Exponent::Finite(2.0), 0.25, levels).unwrap();
    let hc = support_samples(&c, 4).unwrap();
    let target = 0.25 * nodal_area(&hc).0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 100 {
        let v: Vec<f64> = hc
            .values()
            .iter()
            .map(|h| h * rng.gen_range(0..levels) as f64 / (levels - 1) as f64)
            .collect();
        let s = SupportSamples::new(v.clone()).unwrap();
        let area = nodal_area(&s).0;
        if !s.is_convex() || (area - target).abs() > bf.area_slack {
            continue;
        }
        let e = v.iter().zip(hc.values()).map(|(a, b)| (b - a).powi(2)).sum::<f64>() * s.step();
        assert!(bf.powered <= e + 1e-12, "grid point {e} beats oracle {}", bf.powered);
        checked += 1;
    }
}

#[test]
fn p1_optimum_has_at_least_the_scaled_copy_perimeter() {
    let c = ContainerSpec::square(1.0);
    let prob = NodalProblem::new(c.clone(), 64, Exponent::Finite(1.0), 0.5).unwrap();
    let r = solve_nodal(&prob, &InitPolicy::AnchorAndRandom, &SolveOptions { seeds: 2, ..Default::default() }).unwrap();
    let scaled = anchor_start(&prob);
    assert!(perimeter_from_support(&r.shape) >= perimeter_from_support(&scaled) - 1e-6);
}

#[test]
fn gamma_sweep_is_bounded_by_minimax() {
    let mut cfg = StudyConfig::new(
        StudyKind::GammaSweep,
        ContainerSpec::disk(1.0),
        vec![0.25],
        [1.0, 4.0, 16.0].map(Exponent::Finite).to_vec(),
    );
    cfg.grid.n = 64;
    cfg.options.seeds = 2;
    let g = gamma_sweep(&cfg).unwrap();
    for w in g.rows.windows(2) {
        assert!(w[0].sigma <= w[1].sigma + 1e-6);
    }
    for r in &g.rows {
        assert!(r.sigma <= g.sigma_inf + 1e-8);
    }
    let a = gamma_sweep(&cfg).unwrap().table().to_csv().unwrap();
    assert_eq!(a, g.table().to_csv().unwrap());
}
