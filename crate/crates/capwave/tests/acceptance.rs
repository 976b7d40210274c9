//! Acceptance suite. Each test prints one `PASS`/`FAIL` line (to the raw
//! stderr handle, so it shows up even under output capture) and then asserts.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use capwave::dynamics::Params;
use capwave::experiments::*;
use capwave::linear::WindowSpec;

const DISPERSION_REL_ERR: f64 = 1e-3;
const DISPERSION_BUDGET: Duration = Duration::from_secs(30);
const LINEAR_DRIFT: f64 = 1e-12;
const LINEAR_BUDGET: Duration = Duration::from_secs(1);
const INVARIANT_DRIFT: f64 = 1e-6;
const INVARIANT_BUDGET: Duration = Duration::from_secs(30);
const GAIN_GROWTH: f64 = 1.2;
const GAIN_CAUCHY: f64 = 1e-2;
const GAIN_BUDGET: Duration = Duration::from_secs(120);
const FLAT_DRIFT: f64 = 1e-13;
const FLAT_BUDGET: Duration = Duration::from_secs(5);
const RESIDUAL_SLOPE: (f64, f64) = (1.7, 2.3);
const RESIDUAL_FINEST: f64 = 1e-6;
const RESIDUAL_BUDGET: Duration = Duration::from_secs(60);
const R_KAPPA_STEEPER: f64 = 1.0 - 0.5;
const R_P_STEEPER: f64 = 2.0 - 0.5;
const REMAINDER_BUDGET: Duration = Duration::from_secs(30);
const BR_VS_PV: f64 = 1e-6;
const COMMUTATOR_FORMS: f64 = 1e-9;
const COMMUTATOR_IDENTITY: f64 = 1e-10;
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
const SCALING: f64 = 1e-8;
const SCALING_BUDGET: Duration = Duration::from_secs(30);
const SMALL_DATA_EPS: f64 = 1e-3;
const SMALL_DATA_RATIO: f64 = 1.0 + 10.0 * SMALL_DATA_EPS;
const SMALL_DATA_BUDGET: Duration = Duration::from_secs(60);
const BOUND_GROWTH: f64 = 1.1;
const DIVIDED_DIFFERENCE_SLACK: f64 = 1e-12;
const BOUND_BUDGET: Duration = Duration::from_secs(60);

const GAIN_NS: [usize; 3] = [1024, 2048, 4096];

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    let line = format!("acceptance {id:>2} {} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn localized_window() -> WindowSpec {
    WindowSpec::new(280.0, 20.0, 200.0 * PI).unwrap()
}

#[test]
fn c01_dispersion_relation() {
    let start = Instant::now();
    let params = Params::default();
    let results: Vec<_> = (1..=4)
        .map(|k| dispersion_mode(k, 256, 1e-5, params, 2.0, 64).unwrap())
        .collect();
    let elapsed = start.elapsed();
    let worst = results.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let per_mode: Vec<String> = results.iter().map(|r| format!("k={} {:.2e}", r.mode, r.rel_err)).collect();
    verdict(
        1,
        "dispersion relation",
        worst <= DISPERSION_REL_ERR && elapsed <= DISPERSION_BUDGET,
        format!("max rel err {worst:.2e} <= {DISPERSION_REL_ERR:e} [{}], {elapsed:.2?}", per_mode.join(", ")),
    );
}

#[test]
fn c02_linear_energy_conservation() {
    let start = Instant::now();
    let drift = linear_energy_drift(256, 1, 100.0, 1000).unwrap();
    let elapsed = start.elapsed();
    verdict(
        2,
        "linear energy conservation",
        drift <= LINEAR_DRIFT && elapsed <= LINEAR_BUDGET,
        format!("drift {drift:.2e} <= {LINEAR_DRIFT:e}, {elapsed:.2?}"),
    );
}

#[test]
fn c03_gamma2_energy_identity() {
    let start = Instant::now();
    let r = invariant_energy_drift(4096, 200.0 * PI, Params::default(), localized_window(), 100.0, 1.0).unwrap();
    let elapsed = start.elapsed();
    verdict(
        3,
        "gamma2 energy identity",
        r.drift <= INVARIANT_DRIFT && r.t_end > 0.0 && elapsed <= INVARIANT_BUDGET,
        format!(
            "drift {:.2e} <= {INVARIANT_DRIFT:e} up to t={} (boundary mass {:.1e}), {elapsed:.2?}",
            r.drift, r.t_end, r.max_boundary_mass
        ),
    );
}

#[test]
fn c04_gravity_contrast() {
    let start = Instant::now();
    let gravity = Params { inv_we: 0.0, gravity: 1.0 };
    let r = invariant_energy_drift(4096, 200.0 * PI, gravity, localized_window(), 100.0, 1.0).unwrap();
    let setup = GainSetup::default();
    let cap = gain_dichotomy(1, Params::default(), &GAIN_NS, &setup).unwrap();
    let grav = gain_dichotomy(1, gravity, &GAIN_NS, &setup).unwrap();
    let elapsed = start.elapsed();
    let cap_change = cap.weighted_change().into_iter().fold(0.0, f64::max);
    let grav_change = grav.weighted_change().into_iter().fold(f64::INFINITY, f64::min);
    verdict(
        4,
        "gravity contrast",
        r.drift <= INVARIANT_DRIFT
            && r.t_end > 0.0
            && cap_change <= GAIN_CAUCHY
            && grav_change > GAIN_CAUCHY
            && elapsed <= INVARIANT_BUDGET,
        format!(
            "gamma_g drift {:.2e} <= {INVARIANT_DRIFT:e} up to t={}; weighted change capillary {cap_change:.2e} <= {GAIN_CAUCHY:e}, gravity {grav_change:.2e} > {GAIN_CAUCHY:e}, {elapsed:.2?}",
            r.drift, r.t_end
        ),
    );
}

#[test]
fn c05_gain_of_regularity() {
    let start = Instant::now();
    let setup = GainSetup::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for k in [1, 2] {
        let r = gain_dichotomy(k, Params::default(), &GAIN_NS, &setup).unwrap();
        let growth = r.growth();
        let change = r.weighted_change();
        pass &= growth.iter().all(|&g| g >= GAIN_GROWTH) && change.iter().all(|&c| c <= GAIN_CAUCHY);
        let change: Vec<String> = change.iter().map(|c| format!("{c:.2e}")).collect();
        detail.push(format!("k={k} growth {growth:.3?} weighted change [{}]", change.join(", ")));
    }
    let elapsed = start.elapsed();
    verdict(
        5,
        "gain of regularity",
        pass && elapsed <= GAIN_BUDGET,
        format!("{} (growth >= {GAIN_GROWTH}, change <= {GAIN_CAUCHY:e}), {elapsed:.2?}", detail.join("; ")),
    );
}

#[test]
fn c06_flat_equilibrium() {
    let start = Instant::now();
    let drift = flat_equilibrium_drift(64, 0.5, 1e-2, 1000).unwrap();
    let elapsed = start.elapsed();
    verdict(
        6,
        "flat equilibrium",
        drift <= FLAT_DRIFT && elapsed <= FLAT_BUDGET,
        format!("drift {drift:.2e} <= {FLAT_DRIFT:e} over 1000 steps, {elapsed:.2?}"),
    );
}

#[test]
fn c07_first_order_residual() {
    let start = Instant::now();
    let pts = residual_convergence(64, 1e-2, &[4e-3, 2e-3, 1e-3, 5e-4]).unwrap();
    let elapsed = start.elapsed();
    let ldt: Vec<f64> = pts.iter().map(|p| p.dt.ln()).collect();
    let sk = fit_slope(&ldt, &pts.iter().map(|p| p.kappa.ln()).collect::<Vec<_>>());
    let su = fit_slope(&ldt, &pts.iter().map(|p| p.u.ln()).collect::<Vec<_>>());
    let last = pts.last().unwrap();
    let in_range = |s: f64| (RESIDUAL_SLOPE.0..=RESIDUAL_SLOPE.1).contains(&s);
    verdict(
        7,
        "first-order system residual",
        in_range(sk) && in_range(su) && last.kappa < RESIDUAL_FINEST && last.u < RESIDUAL_FINEST && elapsed <= RESIDUAL_BUDGET,
        format!(
            "slopes kappa {sk:.3} u {su:.3} in {RESIDUAL_SLOPE:?}; finest {:.2e} {:.2e} < {RESIDUAL_FINEST:e}, {elapsed:.2?}",
            last.kappa, last.u
        ),
    );
}

#[test]
fn c08_remainder_smoothness() {
    let start = Instant::now();
    let s = remainder_slopes(512, 4.0, 1e-2, 0.0, 1, 1e-3, 1).unwrap();
    let elapsed = start.elapsed();
    let dk = s.r_kappa - s.kappa;
    let dp = s.r_p - s.p_alpha;
    verdict(
        8,
        "remainder smoothness",
        dk <= -R_KAPPA_STEEPER && dp <= -R_P_STEEPER && elapsed <= REMAINDER_BUDGET,
        format!(
            "r_kappa steeper by {:.2} >= {R_KAPPA_STEEPER}, r_p steeper by {:.2} >= {R_P_STEEPER} (band {:?}), {elapsed:.2?}",
            -dk, -dp, s.band
        ),
    );
}

#[test]
fn c09_operator_oracles() {
    let start = Instant::now();
    let r = operator_oracles(1, 512, 256, 0.2).unwrap();
    let elapsed = start.elapsed();
    verdict(
        9,
        "operator oracles",
        r.birkhoff_rott_vs_pv <= BR_VS_PV
            && r.commutator_forms <= COMMUTATOR_FORMS
            && r.identity_cos <= COMMUTATOR_IDENTITY
            && r.identity_sin <= COMMUTATOR_IDENTITY
            && elapsed <= ORACLE_BUDGET,
        format!(
            "BR vs PV {:.2e} <= {BR_VS_PV:e}, commutator forms {:.2e} <= {COMMUTATOR_FORMS:e}, identities {:.2e} {:.2e} <= {COMMUTATOR_IDENTITY:e}, {elapsed:.2?}",
            r.birkhoff_rott_vs_pv, r.commutator_forms, r.identity_cos, r.identity_sin
        ),
    );
}

#[test]
fn c10_scaling_symmetry() {
    let start = Instant::now();
    let err = scaling_commutation(64, 2.0, 1e-3, 0.1, 50).unwrap();
    let elapsed = start.elapsed();
    verdict(
        10,
        "scaling symmetry",
        err <= SCALING && elapsed <= SCALING_BUDGET,
        format!("commutation error {err:.2e} <= {SCALING:e}, {elapsed:.2?}"),
    );
}

#[test]
fn c11_small_data_boundedness() {
    let start = Instant::now();
    let r = small_data_energy(64, 6, SMALL_DATA_EPS, 2, 200).unwrap();
    let elapsed = start.elapsed();
    verdict(
        11,
        "small-data boundedness",
        r.ratio <= SMALL_DATA_RATIO && !r.kappa_flagged && elapsed <= SMALL_DATA_BUDGET,
        format!("E0_2 max/min {:.5} <= {SMALL_DATA_RATIO}, {elapsed:.2?}", r.ratio),
    );
}

#[test]
fn c12_operator_bound_stability() {
    let start = Instant::now();
    let r = operator_bounds(1..=100, &[128, 256, 512]).unwrap();
    let elapsed = start.elapsed();
    let cg = r.commutator[2] / r.commutator[0];
    let sg = r.smoothing[2] / r.smoothing[0];
    verdict(
        12,
        "operator bound stability",
        cg <= BOUND_GROWTH
            && sg <= BOUND_GROWTH
            && r.divided_difference_excess <= DIVIDED_DIFFERENCE_SLACK
            && elapsed <= BOUND_BUDGET,
        format!(
            "commutator {:.3?} (growth {cg:.3} <= {BOUND_GROWTH}), smoothing {:.4?} (growth {sg:.3}), Q excess {:.1e} <= {DIVIDED_DIFFERENCE_SLACK:e}, {elapsed:.2?}",
            r.commutator, r.smoothing, r.divided_difference_excess
        ),
    );
}
