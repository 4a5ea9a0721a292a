use proptest::prelude::*;
use rectlattice::critical::{find_tricritical, TricriticalFamily};
use rectlattice::energy::{lattice_energy, LatticeState};
use rectlattice::expansion::{e0, e2_bracket, e2_closed, e4_closed, expansion_closed, expansion_series, ExpansionMethod};
use rectlattice::potential::PotentialSpec;
use rectlattice::quadrature::QuadratureConfig;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Relative agreement, switching to absolute `1e-12` near zeros.
fn agree(a: f64, b: f64) -> bool {
    let d = (a - b).abs();
    d <= 1e-10 * a.abs().max(b.abs()) || d <= 1e-12
}

#[test]
fn e0_is_the_square_lattice_energy() {
    let spec = PotentialSpec::double_yukawa(9.8, 2.0).unwrap();
    let a = 2.61449322978;
    let e = e0(&spec, a, &q()).unwrap();
    assert_eq!(e, lattice_energy(&spec, LatticeState::square(a).unwrap(), &q()).unwrap());
    assert!(e < 0.0);
}

#[test]
fn second_order_regime_at_critical_density() {
    let spec = PotentialSpec::double_yukawa(9.8, 2.0).unwrap();
    let a = 2.61449322978;
    assert!(e2_closed(&spec, a, &q()).unwrap().abs() < 1e-9);
    assert!(e4_closed(&spec, a, &q()).unwrap() > 0.0);
}

#[test]
fn closed_and_series_agree_on_grid() {
    for i in 0..5 {
        let area = 1.8 + 0.45 * i as f64;
        for j in 0..5 {
            let v1 = 4.0 * 25f64.powf(j as f64 / 4.0);
            let spec = PotentialSpec::double_yukawa(v1, 2.0).unwrap();
            let c = expansion_closed(&spec, area, &q()).unwrap();
            let s = expansion_series(&spec, area, &q()).unwrap();
            assert_eq!(c.method, ExpansionMethod::ClosedForm);
            assert_eq!(s.method, ExpansionMethod::Series);
            assert!(agree(c.e0, s.e0), "e0 at ({area}, {v1})");
            assert!(agree(c.e2, s.e2), "e2 at ({area}, {v1}): {} vs {}", c.e2, s.e2);
            assert!(agree(c.e4, s.e4), "e4 at ({area}, {v1}): {} vs {}", c.e4, s.e4);
        }
    }
}

#[test]
fn odd_coefficients_vanish() {
    for spec in [PotentialSpec::double_yukawa(9.8, 2.0).unwrap(), PotentialSpec::yukawa_coulomb(2.0).unwrap()] {
        for area in [1.0, 2.7, 6.0] {
            let s = expansion_series(&spec, area, &q()).unwrap();
            let scale = s.e0.abs().max(s.e2.abs()).max(s.e4.abs());
            for c in s.odd.unwrap() {
                assert!(c.abs() < 1e-12 * scale, "{c}");
            }
        }
    }
}

#[test]
fn tricritical_yukawa_coulomb_has_positive_e6() {
    let p = find_tricritical(TricriticalFamily::YukawaCoulomb, None, &q()).unwrap();
    let spec = PotentialSpec::yukawa_coulomb(p.param_t).unwrap();
    let s = expansion_series(&spec, p.a_t, &q()).unwrap();
    assert!(s.e6.unwrap() > 0.0);
    assert!(s.e2.abs() < 1e-12 && s.e4.abs() < 1e-12);
}

#[test]
fn no_transition_for_completely_monotone_potentials() {
    let specs = [
        PotentialSpec::yukawa(0.5, 1.0).unwrap(),
        PotentialSpec::yukawa(1.0, 1.0).unwrap(),
        PotentialSpec::yukawa(4.0, 2.0).unwrap(),
        PotentialSpec::riesz(3.0).unwrap(),
    ];
    for spec in &specs {
        for i in 0..30 {
            let area = 0.2 * 50f64.powf(i as f64 / 29.0);
            assert!(e2_closed(spec, area, &q()).unwrap() > 0.0, "{spec:?} at {area}");
        }
    }
}

fn curvature(spec: &PotentialSpec, area: f64, h: f64) -> f64 {
    let e = |eps: f64| lattice_energy(spec, LatticeState::new(area, eps).unwrap(), &q()).unwrap();
    (e(h) - 2.0 * e(0.0) + e(-h)) / (2.0 * h * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn finite_difference_curvature_matches_e2(v1 in 4.0f64..60.0, area in 1.0f64..4.0) {
        let spec = PotentialSpec::double_yukawa(v1, 2.0).unwrap();
        let e2 = e2_closed(&spec, area, &q()).unwrap();
        let e4 = e4_closed(&spec, area, &q()).unwrap();
        // the O(ε²) remainder is E4 ε², so stay away from the zero of E2
        prop_assume!(e2.abs() > 0.5 * e4.abs());
        let fd = curvature(&spec, area, 1e-3);
        prop_assert!((fd - e2).abs() <= 1e-5 * e2.abs(), "{fd} vs {e2}");
    }

    #[test]
    fn e2_bracket_is_positive(u in 1e-3f64..60.0) {
        prop_assert!(e2_bracket(u) > 0.0);
    }
}
