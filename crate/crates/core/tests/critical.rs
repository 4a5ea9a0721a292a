use rectlattice::critical::*;
use rectlattice::energy::{lattice_energy, LatticeState};
use rectlattice::expansion::{expansion_series, landau_pair};
use rectlattice::potential::PotentialSpec;
use rectlattice::quadrature::QuadratureConfig;
use rectlattice::Error;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn dy() -> PotentialSpec {
    PotentialSpec::double_yukawa(9.8, 2.0).unwrap()
}

#[test]
fn critical_density_double_yukawa() {
    let t = find_transition(&dy(), None, &q()).unwrap();
    assert!(rel(t.a_star, 2.61449322978) < 1e-9);
    assert_eq!(t.order, TransitionOrder::Second);
    assert!(t.bracket.0 <= t.a_star && t.a_star <= t.bracket.1);
    let near = find_transition_near(&dy(), 2.5, &q()).unwrap();
    assert!(rel(near.a_star, t.a_star) < 1e-12);
}

#[test]
fn yukawa_has_no_transition() {
    let spec = PotentialSpec::yukawa(1.0, 1.0).unwrap();
    assert!(matches!(find_transition(&spec, None, &q()), Err(Error::Bracket { .. })));
}

#[test]
fn order_flips_at_tricritical_coupling() {
    let v1t = 6.7951845011079;
    let above = find_transition(&PotentialSpec::double_yukawa(v1t * 1.01, 2.0).unwrap(), None, &q()).unwrap();
    let below = find_transition(&PotentialSpec::double_yukawa(v1t * 0.99, 2.0).unwrap(), None, &q()).unwrap();
    assert_eq!(above.order, TransitionOrder::Second);
    assert!(above.e4_at_a_star > 0.0);
    assert_eq!(below.order, TransitionOrder::First);
    assert!(below.e4_at_a_star < 0.0);
}

#[test]
fn tricritical_points() {
    let p = find_tricritical(TricriticalFamily::DoubleYukawa { kappa1: 2.0 }, None, &q()).unwrap();
    assert!(rel(p.a_t, 2.7163619942262467) < 1e-10);
    assert!(rel(p.param_t, 6.7951845011079) < 1e-9);
    let seeded = find_tricritical(TricriticalFamily::DoubleYukawa { kappa1: 2.0 }, Some((2.7, 6.8)), &q()).unwrap();
    assert!(rel(seeded.a_t, p.a_t) < 1e-12 && rel(seeded.param_t, p.param_t) < 1e-11);

    let yc = find_tricritical(TricriticalFamily::YukawaCoulomb, None, &q()).unwrap();
    assert!(rel(yc.a_t, 2.795433950879) < 1e-9);
    assert!(rel(yc.param_t, 2.036517758847) < 1e-9);
}

#[test]
fn no_tricritical_point_below_lower_bound() {
    let r = find_tricritical(TricriticalFamily::DoubleYukawa { kappa1: 1.2 }, None, &q());
    let err = r.expect_err("no tricritical point for kappa1 = 1.2");
    assert!(matches!(err, Error::NonConvergence(_) | Error::Domain(_)), "{err}");
}

#[test]
fn locus_lower_bound() {
    let k = kappa1_lower((1.3, 1.7), &q()).unwrap();
    assert!((1.43..=1.44).contains(&k), "{k}");
}

#[test]
fn locus_upper_bound_meets_admissibility_line() {
    let k = kappa1_upper((1.9, 2.2), &q()).unwrap();
    // the upper end coincides with the Yukawa-Coulomb tricritical point
    let yc = find_tricritical(TricriticalFamily::YukawaCoulomb, None, &q()).unwrap();
    assert!(rel(k, yc.param_t) < 1e-8, "{k} vs {}", yc.param_t);
    let below = find_tricritical(TricriticalFamily::DoubleYukawa { kappa1: k - 0.01 }, None, &q()).unwrap();
    assert!(below.param_t > rectlattice::potential::double_yukawa_v1_bound(k - 0.01));
}

#[test]
fn square_lattice_below_critical_density() {
    let t = find_transition(&dy(), None, &q()).unwrap();
    let (eps, _) = minimize_aspect(&dy(), t.a_star * (1.0 - 1e-4), &q(), 0.0).unwrap();
    assert_eq!(eps, 0.0);
    let yukawa = PotentialSpec::yukawa(1.0, 1.0).unwrap();
    for a in [0.5, 1.0, 3.0] {
        assert_eq!(minimize_aspect(&yukawa, a, &q(), 0.0).unwrap().0, 0.0);
    }
}

#[test]
fn square_root_law_above_critical_density() {
    let spec = dy();
    let t = find_transition(&spec, None, &q()).unwrap();
    let amp = second_order_amplitude(&spec, t.a_star, &q()).unwrap();
    for k in 0..=4 {
        let d = t.a_star * 1e-6 * 100f64.powf(k as f64 / 4.0);
        let (eps, _) = minimize_aspect(&spec, t.a_star + d, &q(), 0.0).unwrap();
        let (below, _) = minimize_aspect(&spec, t.a_star - d, &q(), 0.0).unwrap();
        assert_eq!(below, 0.0);
        assert!(rel(eps / d.sqrt(), amp) < 0.02, "δ = {d}: {} vs {amp}", eps / d.sqrt());
    }
}

#[test]
fn energy_and_slope_continuous_at_second_order_transition() {
    let spec = dy();
    let t = find_transition(&spec, None, &q()).unwrap();
    let best = |a: f64| minimize_aspect(&spec, a, &q(), 0.0).unwrap().1;
    let (a, h) = (t.a_star, 1e-6 * t.a_star);
    let left = (3.0 * best(a) - 4.0 * best(a - h) + best(a - 2.0 * h)) / (2.0 * h);
    let right = (-3.0 * best(a) + 4.0 * best(a + h) - best(a + 2.0 * h)) / (2.0 * h);
    assert!((left - right).abs() < 1e-8, "{left} vs {right}");
    let e_sq = lattice_energy(&spec, LatticeState::square(t.a_star + 1e-9).unwrap(), &q()).unwrap();
    assert!((best(t.a_star + 1e-9) - e_sq).abs() < 1e-8);
}

#[test]
fn quartic_root_law_at_tricritical_point() {
    let p = find_tricritical(TricriticalFamily::DoubleYukawa { kappa1: 2.0 }, None, &q()).unwrap();
    let spec = PotentialSpec::double_yukawa(p.param_t, 2.0).unwrap();
    let b = e2_slope(&spec, p.a_t, &q()).unwrap();
    let e6 = expansion_series(&spec, p.a_t, &q()).unwrap().e6.unwrap();
    let amp = (b / (3.0 * e6)).powf(0.25);
    for d in [1e-9, 1e-8, 1e-7].map(|x| x * p.a_t) {
        let (eps, _) = minimize_aspect(&spec, p.a_t + d, &q(), 0.0).unwrap();
        assert!(rel(eps / d.powf(0.25), amp) < 0.05, "δ = {d}: {} vs {amp}", eps / d.powf(0.25));
    }
}

#[test]
fn first_order_transition_yukawa_coulomb() {
    let spec = PotentialSpec::yukawa_coulomb(2.0365).unwrap();
    let f = find_first_order(&spec, None, None, &q()).unwrap();
    assert!(rel(f.a_trans, 2.795443562576) < 1e-9);
    assert!(rel(f.energy_rect, f.energy_square) < 1e-11);
    assert!(f.eps_jump > f.eps_floor && f.eps_floor > 0.0);

    let branch = |a: f64| {
        let e0 = lattice_energy(&spec, LatticeState::square(a).unwrap(), &q()).unwrap();
        let (eps, e) = minimize_aspect(&spec, a, &q(), f.eps_floor).unwrap();
        (eps, e - e0)
    };
    let (_, g_before) = branch(2.79544356250);
    assert!(g_before > 0.0, "square lattice must prevail before the transition: {g_before}");
    let (eps_after, g_after) = branch(2.795443562606);
    assert!(g_after < 0.0 && eps_after > 0.0);
}

#[test]
fn first_order_jump_dwarfs_second_order_growth() {
    let spec = PotentialSpec::yukawa_coulomb(2.0365).unwrap();
    let f = find_first_order(&spec, None, None, &q()).unwrap();
    let second = PotentialSpec::yukawa_coulomb(2.2).unwrap();
    let t = find_transition(&second, None, &q()).unwrap();
    assert_eq!(t.order, TransitionOrder::Second);
    let d = (f.a_trans - f.a_star).abs().max(1e-8 * t.a_star);
    let (eps, _) = minimize_aspect(&second, t.a_star + d, &q(), 0.0).unwrap();
    assert!(f.eps_jump > 10.0 * eps, "{} vs {eps}", f.eps_jump);
}

#[test]
fn first_order_rejects_second_order_family() {
    assert!(matches!(find_first_order(&dy(), None, None, &q()), Err(Error::Classification(_))));
}

#[test]
fn exponents() {
    let spec = dy();
    let t = find_transition(&spec, None, &q()).unwrap();
    let fit = fit_exponent(&spec, t.a_star, &default_fit_deltas(t.a_star), &q()).unwrap();
    assert!((0.49..=0.51).contains(&fit.beta), "{}", fit.beta);
    assert!(fit.r_squared > 0.999);
    let amp = second_order_amplitude(&spec, t.a_star, &q()).unwrap();
    assert!(rel(fit.amplitude, amp) < 0.05);

    let p = find_tricritical(TricriticalFamily::YukawaCoulomb, None, &q()).unwrap();
    let yc = PotentialSpec::yukawa_coulomb(p.param_t).unwrap();
    let fit = fit_exponent(&yc, p.a_t, &default_fit_deltas(p.a_t), &q()).unwrap();
    assert!((0.24..=0.26).contains(&fit.beta), "{}", fit.beta);
}

#[test]
fn fit_needs_positive_offsets() {
    assert!(matches!(fit_exponent(&dy(), 2.6, &[1e-6, -1e-6], &q()), Err(Error::Domain(_))));
}

#[test]
fn minimal_critical_density() {
    assert!(rel(a_star_min(2.0, &q()).unwrap(), 2.186262818188) < 1e-9);
    let (num, den) = a_star_min_zero_limit_parts(&q()).unwrap();
    assert!(num.is_finite() && den.is_finite() && num > 0.0 && den > 0.0);
    let limit = a_star_min_zero_limit(&q()).unwrap();
    assert!((limit - 5.71344).abs() < 5e-5, "{limit}");
    assert!(rel(a_star_min(0.01, &q()).unwrap(), limit) < 0.01);
    let grid = [0.05, 0.3, 1.0, 2.0, 5.0, 20.0, 50.0];
    let values: Vec<f64> = grid.iter().map(|&k| a_star_min(k, &q()).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    assert!(values.iter().all(|&a| a > 1.0));
}

#[test]
fn critical_curve_approaches_minimal_density() {
    let amin = a_star_min(2.0, &q()).unwrap();
    let t = find_transition(&PotentialSpec::double_yukawa(1e7, 2.0).unwrap(), None, &q()).unwrap();
    assert!(t.a_star > amin && rel(t.a_star, amin) < 1e-3, "{} vs {amin}", t.a_star);
}

#[test]
fn landau_pair_at_tricritical_point_vanishes() {
    let spec = PotentialSpec::double_yukawa(6.7951845011079, 2.0).unwrap();
    let (e2, e4) = landau_pair(&spec, 2.7163619942262467, &q()).unwrap();
    assert!(e2.abs() < 1e-12 && e4.abs() < 1e-11, "{e2} {e4}");
}
