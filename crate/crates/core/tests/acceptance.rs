//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

mod common;

use num_complex::Complex64;
use softguide::bs::trap_eigenvalues;
use softguide::measure::{area_measure, KatoMeasure, Region};
use softguide::resonance::{fit_decay, sokhotski_check, PoleOptions, ResonancePole, ResonanceSystem};
use softguide::strip::{embedding_hs_norm_squared, fourier_route_kernel, rc_kernel, rd_kernel, SheetConfig};
use softguide::transverse::{solve_modes, TransverseMode, TransverseProfile};

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn record(out: &mut Vec<Outcome>, name: &'static str, pass: bool, detail: String) {
    out.push(Outcome { name, pass, detail });
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

const STRIP_WIDTH: f64 = 1.0;
const STRIP_DEPTH: f64 = 5.0;
const TRAP_BETA: f64 = 3.0;
const TRAP_ORDER: usize = 10;

fn guide() -> TransverseProfile<f64> {
    TransverseProfile::constant(STRIP_WIDTH, STRIP_DEPTH).unwrap()
}

fn disk(rho: f64, order: usize) -> KatoMeasure {
    area_measure(&Region::Disk { center: [0.0, STRIP_WIDTH + rho + 1.0], radius: 1.0 }, order, STRIP_WIDTH).unwrap()
}

fn transverse_oracle(out: &mut Vec<Outcome>) {
    let mut worst: f64 = 0.0;
    let mut counts_ok = true;
    for (alpha, d) in [(1.0, 2.0), (5.0, 2.0), (20.0, 2.0), (STRIP_DEPTH, STRIP_WIDTH), (40.0, 0.5)] {
        let modes = solve_modes(&TransverseProfile::constant(d, alpha).unwrap(), 1e-14).unwrap();
        let oracle = common::square_well_levels(alpha, d);
        counts_ok &= modes.len() == oracle.len();
        for (m, e) in modes.iter().zip(&oracle) {
            worst = worst.max((m.energy - e).abs());
        }
    }
    record(out, "1 transverse levels vs square-well oracle", counts_ok && worst <= 1e-10, format!("max |dE| = {worst:.2e} (tol 1e-10), counts match: {counts_ok}"));
}

fn disk_oracle(out: &mut Vec<Outcome>) {
    let oracle = common::disk_ground_state(TRAP_BETA, 1.0);
    let err = |order: usize| {
        let s = trap_eigenvalues(&disk(2.0, order), TRAP_BETA, 1e-13).unwrap();
        common::rel(s[0].energy, oracle)
    };
    let (e12, e24) = (err(12), err(24));
    let pass = e24 <= 1e-4 && e12 / e24 >= 4.0;
    record(out, "2 disk trap level vs radial oracle", pass, format!("rel err order 24 = {e24:.2e} (tol 1e-4), order 12 -> 24 gain {:.1} (need 4)", e12 / e24));
}

fn dual_route(out: &mut Vec<Outcome>, modes: &[TransverseMode<f64>]) {
    let p = guide();
    let sheet = SheetConfig::physical(modes.len());
    let xs = [[0.0, 3.2], [0.7, 3.5], [-0.4, 4.1], [1.3, 2.6], [0.2, -2.0]];
    let ys = [[0.5, 4.0], [-0.9, 3.0], [0.05, 3.7], [2.0, 4.4], [-0.3, -2.5]];
    let mut worst: f64 = 0.0;
    let zs = [modes[0].energy - 0.3, -3.5, -5.0];
    for z in zs {
        let z = Complex64::new(z, 0.0);
        for x in xs {
            for y in ys {
                let f = fourier_route_kernel(&p, z, x, y, 1e-12).unwrap();
                let d = rd_kernel(modes, z, &sheet, x, y).unwrap() + rc_kernel(&p, z, x, y, 1e-12).unwrap();
                worst = worst.max((d - f).norm() / f.norm().max(1e-3));
            }
        }
    }
    record(out, "3 mode-sum vs Fourier route, 5x5 grid, 3 energies below E_1", worst <= 1e-6, format!("max rel diff {worst:.2e} (tol 1e-6) at z = {zs:.3?}"));
}

fn golden_rule(out: &mut Vec<Outcome>, sys: &ResonanceSystem) {
    let gr = sys.golden_rule().unwrap();
    let worst = gr.rel_diff.iter().fold(0.0f64, |a, b| a.max(*b));
    record(
        out,
        "4 golden rule by overlap, cosine and G^I routes",
        worst <= 1e-6 && gr.overlap < 0.0,
        format!("Gamma = {:.6e}, {:.6e}, {:.6e}; max pairwise rel diff {worst:.2e} (tol 1e-6)", gr.overlap, gr.cosine, gr.g_imag),
    );
}

fn sweep_checks(out: &mut Vec<Outcome>, poles: &[ResonancePole], e1: f64) {
    let widths: Vec<(f64, f64)> = poles.iter().map(|p| (p.rho, p.gamma)).collect();
    let fit = fit_decay(&widths).unwrap();
    let want = -2.0 * e1.abs().sqrt();
    let rel = ((fit.slope - want) / want).abs();
    record(out, "5 decay rate of Gamma vs -2 sqrt|E_1|", rel <= 0.1, format!("slope {:.4}, expected {want:.4}, rel dev {rel:.3} (tol 0.1)", fit.slope));

    let e = poles[0].trap_energy;
    let shifts: Vec<(f64, f64)> = poles.iter().map(|p| (p.rho, (p.z.re - e).abs())).collect();
    let fit = fit_decay(&shifts).unwrap();
    let need = 0.9 * (2.0 * e.abs()).sqrt();
    let below = poles.iter().all(|p| p.z.im <= 0.0);
    record(
        out,
        "6 level shift decay and Im z <= 0",
        -fit.slope >= need && below,
        format!("|Re z - E| decay rate {:.4} (need >= {need:.4}); all Im z <= 0: {below}", -fit.slope),
    );

    let rel: Vec<f64> = poles.iter().map(|p| ((p.z.im - p.gamma_leading) / p.gamma_leading).abs()).collect();
    let monotone = rel.windows(2).all(|w| w[1] < w[0]);
    record(out, "10 |Im z - Gamma| / |Gamma| decreases along the sweep", monotone, format!("relative gaps {}", sci(&rel)));
}

fn newton_checks(out: &mut Vec<Outcome>, sys: &ResonanceSystem) {
    let pole = sys.find_pole(&PoleOptions { multistart: 5, ..Default::default() }).unwrap();
    let spread = pole.multistart.iter().map(|z| (z - pole.z).norm()).fold(0.0f64, f64::max);
    let pass = pole.newton_residual <= 1e-10 && pole.multistart.len() == 5 && spread <= 1e-8;
    record(
        out,
        "7 Newton residual and 5-point multistart",
        pass,
        format!("|eta(z)| = {:.2e} (tol 1e-10), multistart spread {spread:.2e} (tol 1e-8)", pole.newton_residual),
    );
}

fn sokhotski(out: &mut Vec<Outcome>) {
    let open = sokhotski_check(1.0, 1.0).unwrap();
    let closed = sokhotski_check(-1.5, 0.4).unwrap();
    let closed_err = (closed.closed_channel.unwrap() - closed.limit).norm();
    let linear = (open.order - 1.0).abs() <= 0.1 && open.errors.windows(2).all(|e| e[1] < e[0]);
    record(
        out,
        "8 Sokhotski-Plemelj limit and closed channel",
        linear && closed_err <= 1e-8,
        format!("open-channel error order {:.3} (errors {}); closed-channel error {closed_err:.2e} (tol 1e-8)", open.order, sci(&open.errors)),
    );
}

fn hs_decay(out: &mut Vec<Outcome>) {
    let z = Complex64::new(-1.0, 0.0);
    let t_z = 1.0;
    let samples: Vec<(f64, f64)> = [1.0, 1.5, 2.0, 2.5, 3.0]
        .iter()
        .map(|rho| {
            let m = area_measure(&Region::Disk { center: [0.0, STRIP_WIDTH + rho + 0.5], radius: 0.5 }, 6, STRIP_WIDTH).unwrap();
            (*rho, embedding_hs_norm_squared(&m, STRIP_WIDTH, z, 1e-10).unwrap().value)
        })
        .collect();
    let fit = fit_decay(&samples).unwrap();
    let bound = -0.95 * 2f64.sqrt() * t_z;
    record(out, "9 Hilbert-Schmidt norm decay at z = -1", fit.slope <= bound, format!("log-slope of squared norm {:.4} (need <= {bound:.4})", fit.slope));
}

#[test]
fn acceptance() {
    let mut out = Vec::new();
    let p = guide();
    let modes = solve_modes(&p, 1e-14).unwrap();
    transverse_oracle(&mut out);
    disk_oracle(&mut out);
    dual_route(&mut out, &modes);

    let base = disk(2.0, TRAP_ORDER);
    let states = trap_eigenvalues(&base, TRAP_BETA, 1e-12).unwrap();
    let n = 6;
    // the leading-order gap changes sign near rho = 2.2 and peaks near 2.6;
    // the sweep starts past that, where the gap is in its asymptotic decay
    let rho0 = 3.0;
    let rhos: Vec<f64> = (0..n).map(|k| rho0 * 2f64.powf(k as f64 / (n - 1) as f64)).collect();
    let systems: Vec<ResonanceSystem> = rhos
        .iter()
        .map(|rho| ResonanceSystem::from_parts(&base.translated(0.0, rho - 2.0), &p, &modes, &states, 1, None).unwrap())
        .collect();
    golden_rule(&mut out, &systems[2]);
    let poles: Vec<ResonancePole> = systems.iter().map(|s| s.find_pole(&PoleOptions { tol: 1e-14, ..Default::default() }).unwrap()).collect();
    for pole in &poles {
        println!("  rho {:.4}  z {:.12}  gamma {:.6e}  gamma_leading {:.6e}", pole.rho, pole.z, pole.gamma, pole.gamma_leading);
    }
    sweep_checks(&mut out, &poles, modes[0].energy);
    newton_checks(&mut out, &systems[2]);
    sokhotski(&mut out);
    hs_decay(&mut out);

    out.sort_by_key(|o| o.name.split(' ').next().unwrap().parse::<u32>().unwrap());
    for o in &out {
        println!("[{}] {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed: Vec<&Outcome> = out.iter().filter(|o| !o.pass).collect();
    println!("{} of {} criteria pass", out.len() - failed.len(), out.len());
    assert!(failed.is_empty(), "failed: {:?}", failed.iter().map(|o| (o.name, &o.detail)).collect::<Vec<_>>());
}
