//! Desk-scale numerical experiments shared by the command-line campaigns and
//! the acceptance suite. Each returns raw measurements; pass/fail thresholds
//! live with the callers.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{initial, scaling_transform, Model, Params, StepperConfig, SurfaceState};
use crate::error::{Error, Result};
use crate::linear::{data, omega, LinearSolution, WindowSpec};
use crate::singular::{
    birkhoff_rott, commutator_hilbert, commutator_hilbert_quadrature, divided_difference_real, pv_oracle,
};
use crate::spectral::{max_abs, max_abs_complex, SpectralGrid};

const TWO_PI: f64 = 2.0 * PI;

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Log-log slope of `|ĉ_m|` over `lo ≤ m ≤ hi`.
pub fn spectral_slope(grid: &SpectralGrid, f: &[f64], lo: usize, hi: usize) -> f64 {
    let c = grid.coefficients(f);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (lo..=hi)
        .map(|m| ((m as f64).ln(), (c[m].norm() + 1e-300).ln()))
        .unzip();
    fit_slope(&xs, &ys)
}

/// Times at which the samples cross zero, located by cubic interpolation
/// through the four nearest samples.
pub fn zero_crossings(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut out = Vec::new();
    for i in 0..n.saturating_sub(1) {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            out.push(times[i]);
            continue;
        }
        if a * b >= 0.0 {
            continue;
        }
        let lo = i.saturating_sub(1).min(n.saturating_sub(4));
        let ts = &times[lo..lo + 4];
        let vs = &values[lo..lo + 4];
        let cubic = |t: f64| -> f64 {
            (0..4)
                .map(|j| {
                    let mut w = vs[j];
                    for k in 0..4 {
                        if k != j {
                            w *= (t - ts[k]) / (ts[j] - ts[k]);
                        }
                    }
                    w
                })
                .sum()
        };
        let (mut l, mut r) = (times[i], times[i + 1]);
        let mut fl = cubic(l);
        for _ in 0..80 {
            let m = 0.5 * (l + r);
            let fm = cubic(m);
            if fl * fm <= 0.0 {
                r = m;
            } else {
                l = m;
                fl = fm;
            }
        }
        out.push(0.5 * (l + r));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DispersionResult {
    pub mode: u32,
    pub measured: f64,
    pub exact: f64,
    pub rel_err: f64,
    pub crossings: usize,
}

/// Oscillation frequency of a small single-mode standing wave evolved by the
/// nonlinear solver, from a straight-line fit of the zero crossings of the
/// mode's cosine coefficient.
pub fn dispersion_mode(
    mode: u32,
    n: usize,
    amplitude: f64,
    params: Params,
    periods: f64,
    steps_per_period: usize,
) -> Result<DispersionResult> {
    let grid = SpectralGrid::new(n, TWO_PI)?;
    let k = mode as f64;
    let exact = omega(k, params.inv_we, params.gravity);
    let period = TWO_PI / exact;
    let dt = period / steps_per_period as f64;
    let model = Model::new(grid.clone(), StepperConfig { dt, ..Default::default() })?;
    let mut state = initial::single_mode(&grid, mode, amplitude, 0.0, 0.0, params)?;
    let steps = (periods * steps_per_period as f64).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        times.push(state.t);
        values.push(grid.coefficients(&state.theta)[mode as usize].re);
        if i < steps {
            state = model.step(&state).map_err(|f| f.error)?;
        }
    }
    let zc = zero_crossings(&times, &values);
    if zc.len() < 2 {
        return Err(Error::Domain(format!("only {} zero crossings observed", zc.len())));
    }
    let idx: Vec<f64> = (0..zc.len()).map(|i| i as f64).collect();
    let half_period = fit_slope(&idx, &zc);
    let measured = PI / half_period;
    Ok(DispersionResult {
        mode,
        measured,
        exact,
        rel_err: (measured - exact).abs() / exact,
        crossings: zc.len(),
    })
}

/// Largest relative drift of the linear energy of random band-limited data
/// sampled over `[0, t_final]`.
pub fn linear_energy_drift(n: usize, seed: u64, t_final: f64, samples: usize) -> Result<f64> {
    let grid = SpectralGrid::new(n, TWO_PI)?;
    let c0 = data::band_limited(&grid, n / 3, seed);
    let c1 = data::band_limited(&grid, n / 3, seed.wrapping_add(1));
    let sol = LinearSolution::new(grid, c0, c1, 2.0, 0.0)?;
    let e0 = sol.energy_linear(0.0);
    Ok((1..=samples)
        .map(|i| {
            let t = t_final * i as f64 / samples as f64;
            (sol.energy_linear(t) - e0).abs() / e0
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantEnergyResult {
    pub drift: f64,
    pub t_end: f64,
    pub samples: usize,
    pub max_boundary_mass: f64,
}

/// Drift of the vector-field energy (`Γ₂` with surface tension, `Γ_g`
/// without) of a Gaussian packet, sampled every `dt_sample` until the window
/// precondition would fail or `t_max` is reached.
pub fn invariant_energy_drift(
    n: usize,
    period: f64,
    params: Params,
    window: WindowSpec,
    t_max: f64,
    dt_sample: f64,
) -> Result<InvariantEnergyResult> {
    let grid = SpectralGrid::new(n, period)?;
    let k0 = data::gaussian_packet(&grid, 1.0, 6.0);
    let sol = LinearSolution::from_fields(grid, &k0, &vec![0.0; n], params.inv_we, params.gravity)?
        .with_window(window)?;
    let capillary = params.inv_we > 0.0;
    let energy = |t: f64| {
        if capillary {
            sol.energy_gamma2(t)
        } else {
            sol.energy_gamma_g(t)
        }
    };
    let e0 = energy(0.0)?;
    let mut drift: f64 = 0.0;
    let mut mass: f64 = 0.0;
    let mut t_end = 0.0;
    let mut samples = 1;
    let mut t = dt_sample;
    while t <= t_max + 1e-12 {
        match sol.check_window(t) {
            Ok(m) => mass = mass.max(m),
            Err(Error::WindowViolation(_)) => break,
            Err(e) => return Err(e),
        }
        drift = drift.max((energy(t)? - e0).abs() / e0);
        t_end = t;
        samples += 1;
        t += dt_sample;
    }
    Ok(InvariantEnergyResult {
        drift,
        t_end,
        samples,
        max_boundary_mass: mass,
    })
}

/// Parameters of the rough-tail gain experiment.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GainSetup {
    pub period: f64,
    pub amplitude: f64,
    pub tail_width: f64,
    pub tail_k_low: f64,
    pub bulk_width: f64,
    pub focus_time: f64,
    pub seed: u64,
    pub n_ref: usize,
    pub window: WindowSpec,
}

impl Default for GainSetup {
    fn default() -> Self {
        let period = 20.0 * PI;
        Self {
            period,
            amplitude: 6.0,
            tail_width: 3.0,
            tail_k_low: 2.0,
            bulk_width: 1.0,
            focus_time: 1.0,
            seed: 7,
            n_ref: 16384,
            window: WindowSpec {
                radius: 26.0,
                taper: 4.0,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GainResult {
    pub k: u32,
    pub ns: Vec<usize>,
    /// `‖Λ^{k/2+1/2}∂^{k+3}κ₀‖` per resolution.
    pub unweighted: Vec<f64>,
    /// `t^k‖⟨α⟩^{-k}Λ^{k/2+1/2}∂^{k+3}κ(t)‖` at the focus time per resolution.
    pub weighted: Vec<f64>,
}

impl GainResult {
    /// Ratios of successive unweighted norms.
    pub fn growth(&self) -> Vec<f64> {
        self.unweighted.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Relative changes of successive weighted norms.
    pub fn weighted_change(&self) -> Vec<f64> {
        self.weighted
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() / w[1].abs())
            .collect()
    }
}

/// Initial data for the gain experiment: a rough tail in `H^{k+3.5-}` plus a
/// smooth bulk arranged to refocus at `focus_time`.
pub fn gain_data(grid: &SpectralGrid, k: u32, params: Params, setup: &GainSetup) -> Result<LinearSolution> {
    let s = k as f64 + 3.5;
    let tail = data::rough_tail(grid, s, setup.amplitude, setup.tail_width, setup.tail_k_low, setup.seed, setup.n_ref)?;
    let bulk = data::gaussian_packet(grid, setup.bulk_width, 0.0);
    let (mut c0, c1) = data::refocused(grid, &bulk, setup.focus_time, params.inv_we, params.gravity)?;
    for (c, r) in c0.iter_mut().zip(grid.coefficients(&tail)) {
        *c += r;
    }
    LinearSolution::new(grid.clone(), c0, c1, params.inv_we, params.gravity)?.with_window(setup.window)
}

pub fn gain_dichotomy(k: u32, params: Params, ns: &[usize], setup: &GainSetup) -> Result<GainResult> {
    let mut unweighted = Vec::new();
    let mut weighted = Vec::new();
    for &n in ns {
        let grid = SpectralGrid::new(n, setup.period)?;
        let sol = gain_data(&grid, k, params, setup)?;
        unweighted.push(sol.unweighted_gain_norm(0.0, k)?);
        weighted.push(sol.weighted_gain_norm(setup.focus_time, k)?);
    }
    Ok(GainResult {
        k,
        ns: ns.to_vec(),
        unweighted,
        weighted,
    })
}

/// Largest drift of θ, γ and σ over `steps` steps from a flat state.
pub fn flat_equilibrium_drift(n: usize, gamma: f64, dt: f64, steps: usize) -> Result<f64> {
    let grid = SpectralGrid::new(n, TWO_PI)?;
    let model = Model::new(grid.clone(), StepperConfig { dt, ..Default::default() })?;
    let s0 = SurfaceState::flat(&grid, gamma, Params::default());
    let mut s = s0.clone();
    let mut drift: f64 = 0.0;
    for _ in 0..steps {
        s = model.step(&s).map_err(|f| f.error)?;
        let d = s
            .theta
            .iter()
            .zip(&s0.theta)
            .chain(s.gamma.iter().zip(&s0.gamma))
            .fold((s.sigma - s0.sigma).abs(), |a, (x, y)| a.max((x - y).abs()));
        drift = drift.max(d);
    }
    Ok(drift)
}

/// Smooth two-mode test state used by the residual experiments.
pub fn analytic_state(grid: &SpectralGrid, eps: f64, params: Params) -> Result<SurfaceState> {
    let theta = grid
        .nodes()
        .iter()
        .map(|x| eps * (x.cos() + 0.5 * (2.0 * x).sin()))
        .collect();
    let gamma = grid
        .nodes()
        .iter()
        .map(|x| eps * (x.sin() + 0.3 * (3.0 * x).cos()))
        .collect();
    SurfaceState::from_angle(grid, theta, gamma, params)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub dt: f64,
    pub kappa: f64,
    pub u: f64,
    pub second_order: f64,
}

/// L² norms of the curvature-system residuals at the middle of three states
/// `dt` apart, for each `dt`.
pub fn residual_convergence(n: usize, eps: f64, dts: &[f64]) -> Result<Vec<ResidualPoint>> {
    let grid = SpectralGrid::new(n, TWO_PI)?;
    let s0 = analytic_state(&grid, eps, Params::default())?;
    dts.iter()
        .map(|&dt| {
            let model = Model::new(grid.clone(), StepperConfig { dt, ..Default::default() })?;
            let s1 = model.step(&s0).map_err(|f| f.error)?;
            let s2 = model.step(&s1).map_err(|f| f.error)?;
            let r = model.residual_kappa_u(&[s0.clone(), s1, s2])?;
            Ok(ResidualPoint {
                dt,
                kappa: grid.l2_norm(&r.kappa),
                u: grid.l2_norm(&r.u),
                second_order: grid.l2_norm(&r.second_order),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemainderSlopes {
    pub kappa: f64,
    pub r_kappa: f64,
    pub p_alpha: f64,
    pub r_p: f64,
    pub band: (usize, usize),
}

/// Mid-band spectral slopes of κ, r^κ, p_α and r^p for algebraically decaying
/// tangent-angle data with sheet strength of amplitude `gamma_amplitude`,
/// evaluated after `steps` steps.
pub fn remainder_slopes(
    n: usize,
    exponent: f64,
    eps: f64,
    gamma_amplitude: f64,
    seed: u64,
    dt: f64,
    steps: usize,
) -> Result<RemainderSlopes> {
    let grid = SpectralGrid::new(n, TWO_PI)?;
    let model = Model::new(grid.clone(), StepperConfig { dt, ..Default::default() })?;
    let mut s = initial::algebraic_spectrum(&grid, exponent, eps, gamma_amplitude, seed, Params::default())?;
    for _ in 0..steps {
        s = model.step(&s).map_err(|f| f.error)?;
    }
    let f = model.derived_fields(&s)?;
    let p_alpha: Vec<f64> = grid.derivative(&f.p, 1)?.iter().map(|v| v / s.sigma).collect();
    let band = (n / 32, n / 6);
    let sl = |x: &[f64]| spectral_slope(&grid, x, band.0, band.1);
    Ok(RemainderSlopes {
        kappa: sl(&f.kappa),
        r_kappa: sl(&f.r_kappa),
        p_alpha: sl(&p_alpha),
        r_p: sl(&f.r_p),
        band,
    })
}

/// ∞-norm of `κ'(T/λ^{3/2}) - λκ(T)` where `'` is the evolution of the scaled
/// initial data with the scaled step.
pub fn scaling_commutation(n: usize, lambda: f64, eps: f64, t_final: f64, steps: usize) -> Result<f64> {
    let grid = SpectralGrid::new(n, TWO_PI)?;
    let s0 = initial::single_mode(&grid, 1, eps, eps, 0.0, Params::default())?;
    let s0 = SurfaceState {
        theta: s0.theta.iter().zip(grid.nodes()).map(|(t, x)| t + 0.5 * eps * (2.0 * x).sin()).collect(),
        ..s0
    };
    let s0 = SurfaceState::from_angle(&grid, s0.theta, s0.gamma, s0.params)?;
    let (grid2, s0_scaled) = scaling_transform(&grid, &s0, lambda)?;
    let dt = t_final / steps as f64;
    let m1 = Model::new(grid.clone(), StepperConfig { dt, ..Default::default() })?;
    let m2 = Model::new(grid2.clone(), StepperConfig { dt: dt * lambda.powf(-1.5), ..Default::default() })?;
    let (mut a, mut b) = (s0, s0_scaled);
    for _ in 0..steps {
        a = m1.step(&a).map_err(|f| f.error)?;
        b = m2.step(&b).map_err(|f| f.error)?;
    }
    let ka = grid.derivative(&a.theta, 1)?;
    let kb = grid2.derivative(&b.theta, 1)?;
    Ok((0..n)
        .map(|j| (kb[j] / b.sigma - lambda * ka[j] / a.sigma).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallDataResult {
    pub e_min: f64,
    pub e_max: f64,
    pub ratio: f64,
    pub steps: usize,
    pub kappa_flagged: bool,
}

/// `E⁰_k` along a single-mode run over one linear period.
pub fn small_data_energy(n: usize, mode: u32, eps: f64, order: usize, steps: usize) -> Result<SmallDataResult> {
    let grid = SpectralGrid::new(n, TWO_PI)?;
    let params = Params::default();
    let period = TWO_PI / omega(mode as f64, params.inv_we, params.gravity);
    let model = Model::new(grid.clone(), StepperConfig { dt: period / steps as f64, ..Default::default() })?;
    let mut s = initial::single_mode(&grid, mode, eps, 0.0, 0.0, params)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut flagged = false;
    for i in 0..=steps {
        let f = model.derived_fields(&s)?;
        let e = model.energy_e0k(&s, &f, order)?;
        if !e.value.is_finite() {
            return Err(Error::NonFinite);
        }
        flagged |= e.kappa_flag;
        lo = lo.min(e.value);
        hi = hi.max(e.value);
        if i < steps {
            s = model.step(&s).map_err(|f| f.error)?;
        }
    }
    Ok(SmallDataResult {
        e_min: lo,
        e_max: hi,
        ratio: hi / lo,
        steps,
        kappa_flagged: flagged,
    })
}

/// Seeded smooth real field with modes `1..=modes` and amplitudes `m^{-2}`,
/// independent of the grid size.
pub fn smooth_field(grid: &SpectralGrid, modes: usize, seed: u64) -> Vec<f64> {
    let n = grid.n_points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for m in 1..=modes.min(n / 2 - 1) {
        let v = Complex64::from_polar((m as f64).powi(-2), TWO_PI * rng.random::<f64>());
        c[m] = v;
        c[n - m] = v.conj();
    }
    grid.synthesize_real(&c)
}

/// Seeded rough field with spectrum `|m|^{-decay}` for `|m| < n/3`,
/// normalized in L². Phases are drawn in mode order so coarser grids see a
/// prefix of the same sequence. The band limit keeps products with the
/// low-mode fields of [`operator_bounds`] free of aliasing.
pub fn rough_field(grid: &SpectralGrid, decay: f64, seed: u64) -> Vec<f64> {
    let n = grid.n_points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for m in 1..n.div_ceil(3) {
        let v = Complex64::from_polar((m as f64).powf(-decay), TWO_PI * rng.random::<f64>());
        c[m] = v;
        c[n - m] = v.conj();
    }
    let f = grid.synthesize_real(&c);
    let norm = grid.l2_norm(&f);
    f.iter().map(|v| v / norm).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReport {
    /// `‖birkhoff_rott - pv_oracle‖_∞` on a perturbed curve.
    pub birkhoff_rott_vs_pv: f64,
    /// Spectral against Q-kernel commutator.
    pub commutator_forms: f64,
    /// `‖[H, cos]∂cos + 1/2‖_∞`.
    pub identity_cos: f64,
    /// `‖[H, sin]∂cos‖_∞`.
    pub identity_sin: f64,
}

/// Operator cross-checks with seeded random data.
pub fn operator_oracles(seed: u64, n_br: usize, n_comm: usize, perturbation: f64) -> Result<OracleReport> {
    let grid = SpectralGrid::new(n_br, TWO_PI)?;
    let shape = smooth_field(&grid, 3, seed);
    let scale = perturbation / max_abs(&shape).max(f64::MIN_POSITIVE);
    let theta: Vec<f64> = shape.iter().map(|v| scale * v).collect();
    let gamma: Vec<f64> = smooth_field(&grid, 4, seed.wrapping_add(1000))
        .iter()
        .map(|v| v + 0.3)
        .collect();
    let state = SurfaceState::from_angle(&grid, theta, gamma, Params::default())?;
    let z = crate::dynamics::reconstruct_curve(&grid, &state.theta, state.sigma)?;
    let w = birkhoff_rott(&grid, &z, &state.gamma, state.sigma)?;
    let pv = pv_oracle(&grid, &z, &state.gamma)?;
    let br_err = max_abs_complex(&w.iter().zip(&pv).map(|(a, b)| a - b).collect::<Vec<_>>());

    let g2 = SpectralGrid::new(n_comm, TWO_PI)?;
    let a = smooth_field(&g2, 6, seed.wrapping_add(2000));
    let f = smooth_field(&g2, 6, seed.wrapping_add(3000));
    let fa = g2.derivative(&f, 1)?;
    let spec = commutator_hilbert(&g2, &a, &fa)?;
    let quad = commutator_hilbert_quadrature(&g2, &a, &fa)?;
    let comm_err = spec.iter().zip(&quad).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);

    let cos: Vec<f64> = g2.nodes().iter().map(|x| x.cos()).collect();
    let sin: Vec<f64> = g2.nodes().iter().map(|x| x.sin()).collect();
    let dcos = g2.derivative(&cos, 1)?;
    let c1 = commutator_hilbert(&g2, &cos, &dcos)?;
    let c2 = commutator_hilbert(&g2, &sin, &dcos)?;
    Ok(OracleReport {
        birkhoff_rott_vs_pv: br_err,
        commutator_forms: comm_err,
        identity_cos: c1.iter().map(|v| (v + 0.5).abs()).fold(0.0, f64::max),
        identity_sin: max_abs(&c2),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub ns: Vec<usize>,
    /// Max over seeds of `‖[H,a]∂f‖ / (‖a_α‖_∞‖f‖)` per resolution.
    pub commutator: Vec<f64>,
    /// Max over seeds and resolutions of `max|Qa| - ‖a_α‖_∞`.
    pub divided_difference_excess: f64,
    /// Max over seeds of `|∫a f_α Λf| / (‖a_αα‖_∞‖f‖²)` per resolution.
    pub smoothing: Vec<f64>,
}

fn sup_oversampled(grid: &SpectralGrid, f: &[f64], factor: usize) -> Result<f64> {
    Ok(max_abs(&grid.resample(f, grid.n_points() * factor)?))
}

/// Empirical operator-bound ratios over seeds and resolutions.
pub fn operator_bounds(seeds: std::ops::RangeInclusive<u64>, ns: &[usize]) -> Result<BoundReport> {
    let mut commutator = vec![0.0f64; ns.len()];
    let mut smoothing = vec![0.0f64; ns.len()];
    let mut excess = f64::NEG_INFINITY;
    for (i, &n) in ns.iter().enumerate() {
        let grid = SpectralGrid::new(n, TWO_PI)?;
        for seed in seeds.clone() {
            let a = smooth_field(&grid, 8, seed);
            let f = rough_field(&grid, 0.6, seed.wrapping_add(1 << 20));
            let a_a = grid.derivative(&a, 1)?;
            let a_aa = grid.derivative(&a, 2)?;
            let sup_a = sup_oversampled(&grid, &a_a, 16)?;
            let sup_aa = sup_oversampled(&grid, &a_aa, 16)?;
            let f_norm = grid.l2_norm(&f);

            let fa = grid.derivative(&f, 1)?;
            let c = commutator_hilbert(&grid, &a, &fa)?;
            commutator[i] = commutator[i].max(grid.l2_norm(&c) / (sup_a * f_norm));

            let q = divided_difference_real(&grid, &a)?;
            excess = excess.max(q.max_abs() - sup_a);

            let lf = grid.lambda_pow(&f, 1.0)?;
            let integrand: Vec<f64> = (0..n).map(|j| a[j] * fa[j] * lf[j]).collect();
            let s = grid.integrate(&integrand).abs() / (sup_aa * f_norm * f_norm);
            smoothing[i] = smoothing[i].max(s);
        }
    }
    Ok(BoundReport {
        ns: ns.to_vec(),
        commutator,
        divided_difference_excess: excess,
        smoothing,
    })
}
