use num_complex::Complex64;
use softguide::bs::trap_eigenvalues;
use softguide::measure::{area_measure, KatoMeasure, Region};
use softguide::resonance::{
    fit_decay, sokhotski_check, sokhotski_integral, Inversion, PoleOptions, ResonanceSystem,
};
use softguide::transverse::{solve_modes, TransverseProfile};
use softguide::Error;

fn guide() -> TransverseProfile<f64> {
    TransverseProfile::constant(1.0, 5.0).unwrap()
}

fn disk_at(rho: f64, order: usize) -> KatoMeasure {
    area_measure(&Region::Disk { center: [0.0, 2.0 + rho], radius: 1.0 }, order, 1.0).unwrap()
}

fn system(rho: f64, beta: f64) -> ResonanceSystem {
    let p = guide();
    let modes = solve_modes(&p, 1e-14).unwrap();
    let m = disk_at(rho, 7);
    let states = trap_eigenvalues(&m, beta, 1e-12).unwrap();
    ResonanceSystem::from_parts(&m, &p, &modes, &states, 1, None).unwrap()
}

#[test]
fn neumann_and_direct_inversions_agree() {
    let sys = system(2.5, 3.0);
    for z in [Complex64::new(sys.state.energy, -1e-4), Complex64::new(sys.state.energy + 0.05, -0.02)] {
        let a = sys.eta_with(z, Inversion::Neumann).unwrap();
        let b = sys.eta_with(z, Inversion::Direct).unwrap();
        assert!(a.terms > 0 && b.terms == 0);
        assert!((a.value - b.value).norm() <= 1e-12);
        assert_eq!(sys.eta(z).unwrap().method, Inversion::Neumann);
    }
}

#[test]
fn pole_lies_below_the_axis_near_the_golden_rule() {
    let sys = system(2.5, 3.0);
    assert_eq!(sys.segment, 1);
    let gr = sys.golden_rule().unwrap();
    assert!(gr.rel_diff.iter().all(|d| *d < 1e-10), "{:?}", gr.rel_diff);
    assert!(gr.overlap < 0.0 && gr.channels.len() == 1);
    let pole = sys.find_pole(&PoleOptions { multistart: 2, ..Default::default() }).unwrap();
    assert!(pole.z.im < 0.0);
    assert!(pole.newton_residual <= 1e-10);
    assert!(((pole.z.im - gr.overlap) / gr.overlap).abs() < 0.01);
    assert!((pole.gamma - 2.0 * pole.z.im.abs()).abs() == 0.0);
    let leading = sys.leading_guess().unwrap();
    assert!((leading - pole.z).norm() < 0.1 * (pole.z - pole.trap_energy).norm());
    assert!(pole.multistart.iter().all(|z| (z - pole.z).norm() < 1e-8));
}

#[test]
fn level_below_the_guide_continuum_gives_a_real_root() {
    let sys = system(2.0, 8.0);
    assert!(sys.state.energy < sys.modes()[0].energy);
    assert_eq!(sys.segment, 0);
    let pole = sys.find_pole(&PoleOptions::default()).unwrap();
    assert_eq!(pole.z.im, 0.0);
    assert_eq!(pole.gamma_leading, 0.0);
    assert!(matches!(sys.golden_rule(), Ok(g) if g.channels.is_empty() && g.overlap == 0.0));
}

#[test]
fn regime_violation_is_reported() {
    let sys = system(0.05, 3.0);
    let err = sys.find_pole(&PoleOptions { regime_limit: 1e-3, ..Default::default() });
    assert!(matches!(err, Err(Error::Regime(_))), "{err:?}");
}

#[test]
fn threshold_guard() {
    let p = guide();
    let modes = solve_modes(&p, 1e-14).unwrap();
    let m = disk_at(2.0, 5);
    let mut states = trap_eigenvalues(&m, 3.0, 1e-12).unwrap();
    states[0].energy = modes[0].energy + 1e-9;
    assert!(matches!(
        ResonanceSystem::from_parts(&m, &p, &modes, &states, 1, None),
        Err(Error::Threshold(_))
    ));
    assert!(matches!(
        ResonanceSystem::from_parts(&m, &p, &modes, &states, 2, None),
        Err(Error::Config(_))
    ));
}

#[test]
fn sokhotski_limits() {
    let open = sokhotski_check(2.0, 0.7).unwrap();
    assert!((open.order - 1.0).abs() < 0.1, "order {}", open.order);
    assert!(open.errors.windows(2).all(|e| e[1] < e[0]));
    let root = 2f64.sqrt();
    let pv = -std::f64::consts::PI / root * (root * 0.7).sin();
    assert!((open.principal_value - pv).abs() < 1e-14);
    let closed = sokhotski_check(-1.5, 0.4).unwrap();
    let v = closed.closed_channel.unwrap();
    assert!((v - closed.limit).norm() < 1e-8 && v.im.abs() < 1e-12);
    assert!(matches!(sokhotski_check(0.0, 1.0), Err(Error::Threshold(_))));
    assert!(matches!(sokhotski_integral(Complex64::new(1.0, 0.0), 1.0), Err(Error::BranchCut(_))));
}

#[test]
fn decay_fit_requires_positive_samples() {
    assert!(matches!(fit_decay(&[(1.0, 1.0), (2.0, 0.5), (3.0, 0.25)]), Err(Error::Domain(_))));
    assert!(matches!(fit_decay(&[(1.0, 1.0), (2.0, -0.5), (3.0, 0.25), (4.0, 0.1)]), Err(Error::Domain(_))));
    let s: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, (-1.5 * k as f64).exp())).collect();
    assert!((fit_decay(&s).unwrap().slope + 1.5).abs() < 1e-12);
}

#[test]
fn eta_slope_is_one_far_from_the_guide() {
    let sys = system(4.0, 3.0);
    let z = Complex64::new(sys.state.energy + 0.01, -1e-3);
    let h = 1e-6;
    let d = (sys.eta(z + h).unwrap().value - sys.eta(z - h).unwrap().value) / (2.0 * h);
    assert!((d - 1.0).norm() < 1e-3, "{d}");
}

#[test]
fn sokhotski_reference_cases() {
    let r = sokhotski_check(1.0, 1.0).unwrap();
    assert!((r.order - 1.0).abs() < 0.05);
    let at_zero = sokhotski_check(1.0, 0.0).unwrap();
    assert!((at_zero.limit - Complex64::new(0.0, std::f64::consts::PI)).norm() < 1e-15);
    assert!(at_zero.errors[2] < 1e-3);
}

#[test]
fn golden_rule_self_convergence() {
    let p = guide();
    let modes = solve_modes(&p, 1e-14).unwrap();
    let width = |order: usize| {
        let m = disk_at(3.0, order);
        let states = trap_eigenvalues(&m, 3.0, 1e-13).unwrap();
        let sys = ResonanceSystem::from_parts(&m, &p, &modes, &states, 1, None).unwrap();
        softguide::resonance::golden_rule_width(&sys.state, &modes, &m, 3.0).unwrap().0
    };
    let (a, b, c) = (width(8), width(16), width(24));
    // limited by the trap eigenfunction, which converges algebraically in the order
    assert!(((b - c) / c).abs() < 1e-5);
    assert!((b - c).abs() < 0.25 * (a - c).abs());
}
