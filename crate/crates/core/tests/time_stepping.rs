use std::f64::consts::PI;

use quasi1d::physics::euler::Primitive;
use quasi1d::physics::{Euler, EulerAux, InterfaceFlux, ShallowWater, SweAux};
use quasi1d::sbp::SbpOperator;
use quasi1d::semidisc::{BoundaryConditions, Mesh1D, Semidiscretization};
use quasi1d::time_integration::{integrate, integrate_observed, Control, IntegratorConfig};

fn euler_pulse(flux: InterfaceFlux) -> (Semidiscretization<Euler>, Vec<f64>) {
    let semi = Semidiscretization::new(
        Euler::default(),
        SbpOperator::new(3).unwrap(),
        Mesh1D::uniform(-1.0, 1.0, 16).unwrap(),
        |x| EulerAux::new(1.0 + 0.2 * (PI * x).cos()),
        flux,
        BoundaryConditions::periodic(),
    )
    .unwrap();
    let eq = *semi.equation();
    let u = semi.project(|x, aux| {
        let bump = (-20.0 * x * x).exp();
        eq.conservative(Primitive { rho: 1.0 + 0.5 * bump, vel: 0.2, p: 1.0 + 0.5 * bump }, aux)
    });
    (semi, u)
}

#[test]
fn ec_run_conserves_mass_energy_and_entropy() {
    let (semi, mut u) = euler_pulse(InterfaceFlux::EntropyConservative);
    let totals0 = semi.conserved_totals(&u).unwrap();
    let s0 = semi.total_entropy(&u).unwrap();
    let mut worst: f64 = 0.0;
    let cfg = IntegratorConfig::adaptive(0.3, 1e-10);
    integrate_observed(&semi, &mut u, &cfg, |info, state| {
        let du = semi.rhs_vec(info.t, state).unwrap();
        worst = worst.max(semi.entropy_rate(state, &du).unwrap().rate.abs());
        Control::Continue
    })
    .unwrap();
    let totals1 = semi.conserved_totals(&u).unwrap();
    for var in [0, 2] {
        assert!(((totals1[var] - totals0[var]) / totals0[var]).abs() < 1e-12);
    }
    assert!(worst < 1e-11, "{worst}");
    let s1 = semi.total_entropy(&u).unwrap();
    assert!(((s1 - s0) / s0).abs() < 1e-7, "{s0} {s1}");
}

#[test]
fn lxf_run_decreases_entropy() {
    let (semi, mut u) = euler_pulse(InterfaceFlux::LaxFriedrichs);
    let mut history = Vec::new();
    integrate_observed(&semi, &mut u, &IntegratorConfig::rk4_cfl(0.5, 0.3), |_, state| {
        history.push(semi.total_entropy(state).unwrap());
        Control::Continue
    })
    .unwrap();
    assert!(history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(history.last().unwrap() < &history[0]);
}

#[test]
fn lake_at_rest_is_preserved_in_time() {
    let semi = Semidiscretization::new(
        ShallowWater::default(),
        SbpOperator::new(3).unwrap(),
        Mesh1D::uniform(0.0, 1.0, 20).unwrap(),
        |x| {
            let step = if x > 0.3 && x < 0.7 { 1.0 } else { 0.0 };
            SweAux::new(1.0 + 0.5 * step, 0.1 + 0.4 * step)
        },
        InterfaceFlux::WellBalanced,
        BoundaryConditions::periodic(),
    )
    .unwrap();
    let u0 = semi.project(|_, aux| [aux.a * (1.0 - aux.b), 0.0]);
    let mut u = u0.clone();
    integrate(&semi, &mut u, &IntegratorConfig::rk4_cfl(0.2, 0.5)).unwrap();
    let err = u.iter().zip(&u0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-13, "{err}");
}
