//! Nonlinear interface dynamics in the uniform-arclength frame.
//!
//! The curve is `z_α = σ e^{iθ}` with `σ(t)` uniform in `α`. With the tangent
//! `T = e^{iθ}` and normal `N = iT`, the normal velocity is `U⊥ = W·N`, the
//! tangential gauge velocity `U∥` is the zero-mean antiderivative of
//! `θ_α U⊥ - mean`, and `σ_t = -mean(θ_α U⊥)`. Every α-derivative of the
//! unit-speed equations becomes an arclength derivative `σ⁻¹∂_α`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::singular::{Curve, CurveOperators};
use crate::spectral::{max_abs, mean, mean_complex, SpectralGrid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Curvature bound of the small-data operating envelope.
pub const KAPPA_MAX: f64 = 0.25;
/// Closure tolerance relative to the period.
pub const CLOSURE_TOL: f64 = 1e-6;
/// Tolerance on `||z_α| - σ| / σ`.
pub const UNIFORM_TOL: f64 = 1e-8;

/// `a · b = Re(conj(a) b)` for complex numbers viewed as plane vectors.
fn dot(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

fn cplx(f: &[f64]) -> Vec<Complex64> {
    f.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Surface-tension coefficient `1/We`.
    pub inv_we: f64,
    /// Gravity.
    pub gravity: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            inv_we: 2.0,
            gravity: 0.0,
        }
    }
}

/// Complete dynamical state.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceState {
    pub t: f64,
    pub theta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub sigma: f64,
    pub params: Params,
}

impl SurfaceState {
    /// State with `σ` chosen so that the curve closes horizontally. The
    /// tangent angle is first shifted by a constant so that `mean(sin θ) = 0`.
    pub fn from_angle(
        grid: &SpectralGrid,
        theta: Vec<f64>,
        gamma: Vec<f64>,
        params: Params,
    ) -> Result<Self> {
        grid.validate(&theta)?;
        grid.validate(&gamma)?;
        let s = mean(&theta.iter().map(|x| x.sin()).collect::<Vec<_>>());
        let c = mean(&theta.iter().map(|x| x.cos()).collect::<Vec<_>>());
        if c <= 0.0 {
            return Err(Error::Domain(format!(
                "mean of cos(theta) must be positive, got {c}"
            )));
        }
        let shift = s.atan2(c);
        let theta: Vec<f64> = if shift == 0.0 {
            theta
        } else {
            theta.iter().map(|x| x - shift).collect()
        };
        let c = mean(&theta.iter().map(|x| x.cos()).collect::<Vec<_>>());
        Ok(Self {
            t: 0.0,
            theta,
            gamma,
            sigma: 1.0 / c,
            params,
        })
    }

    /// Flat interface carrying a uniform sheet strength.
    pub fn flat(grid: &SpectralGrid, gamma: f64, params: Params) -> Self {
        let n = grid.n_points();
        Self {
            t: 0.0,
            theta: vec![0.0; n],
            gamma: vec![gamma; n],
            sigma: 1.0,
            params,
        }
    }
}

/// Time-stepper settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperConfig {
    pub dt: f64,
    pub cutoff_fraction: f64,
    pub floor: f64,
    pub gamma_t_tol: f64,
    pub gamma_t_max_iter: usize,
    pub q_min: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            cutoff_fraction: 2.0 / 3.0,
            floor: 1e-13,
            gamma_t_tol: 1e-13,
            gamma_t_max_iter: 100,
            q_min: 0.5,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.cutoff_fraction > 0.0 && self.cutoff_fraction <= 1.0) {
            return Err(Error::Domain("cutoff_fraction must lie in (0, 1]".into()));
        }
        if !(self.floor >= 0.0) {
            return Err(Error::Domain("floor must be non-negative".into()));
        }
        if !(self.gamma_t_tol >= 1e-14) {
            return Err(Error::Domain("gamma_t_tol must be at least 1e-14".into()));
        }
        if self.gamma_t_max_iter == 0 {
            return Err(Error::Domain("gamma_t_max_iter must be positive".into()));
        }
        if !(self.q_min > 0.0) {
            return Err(Error::Domain("q_min must be positive".into()));
        }
        Ok(())
    }
}

/// `|∫σe^{iθ}dα - P| / P`.
pub fn closure_residual(_grid: &SpectralGrid, theta: &[f64], sigma: f64) -> f64 {
    let m = mean_complex(&theta.iter().map(|&t| Complex64::from_polar(sigma, t)).collect::<Vec<_>>());
    (m - 1.0).norm()
}

/// Curve with `z_α = σe^{iθ}`: `z = α + ∂⁻¹(σe^{iθ} - mean)`, mean height 0.
pub fn reconstruct_curve(grid: &SpectralGrid, theta: &[f64], sigma: f64) -> Result<Vec<Complex64>> {
    grid.validate(theta)?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let res = closure_residual(grid, theta, sigma);
    if res > CLOSURE_TOL {
        return Err(Error::Closure(res));
    }
    Ok(curve_samples(grid, theta, sigma))
}

fn curve_samples(grid: &SpectralGrid, theta: &[f64], sigma: f64) -> Vec<Complex64> {
    let za: Vec<Complex64> = theta.iter().map(|&t| Complex64::from_polar(sigma, t)).collect();
    let m = mean_complex(&za);
    let fluct: Vec<Complex64> = za.iter().map(|z| z - m).collect();
    let anti = grid.antiderivative_complex(&fluct);
    anti.iter()
        .zip(grid.nodes())
        .map(|(a, &x)| a + x)
        .collect()
}

/// `max ||z_α| - σ| / σ` with `z_α` the spectral derivative of the samples.
pub fn uniformity_error(grid: &SpectralGrid, z: &[Complex64], sigma: f64) -> f64 {
    let fluct: Vec<Complex64> = z.iter().zip(grid.nodes()).map(|(z, x)| z - x).collect();
    grid.derivative_complex(&fluct, 1)
        .iter()
        .map(|d| ((d + 1.0).norm() - sigma).abs() / sigma)
        .fold(0.0, f64::max)
}

/// Minimum over node pairs of the periodic chord of `z` relative to `σ` times
/// the periodic chord of the parameter; exactly 1 on the flat curve.
pub fn chord_arc_ratio(grid: &SpectralGrid, z: &[Complex64], sigma: f64) -> f64 {
    let n = grid.n_points();
    let scale = 2.0 * PI / grid.period();
    // |sin(π(z_i-z_j)/P)| = |w_i - w_j| / (2 |w_i|^½ |w_j|^½), w = e^{2πiz/P}
    let w: Vec<Complex64> = z.iter().map(|zj| (I * scale * zj).exp()).collect();
    let root: Vec<f64> = w.iter().map(|x| x.norm().sqrt()).collect();
    let base: Vec<f64> = (0..n)
        .map(|d| (PI * d as f64 / n as f64).sin().abs())
        .collect();
    let mut ratio = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let num = (w[i] - w[j]).norm() / (2.0 * root[i] * root[j]);
            let r = num / (sigma * base[j - i]);
            ratio = ratio.min(r);
        }
    }
    ratio
}

fn frame_curve(grid: &SpectralGrid, state: &SurfaceState) -> Result<Curve> {
    let z = reconstruct_curve(grid, &state.theta, state.sigma)?;
    let za: Vec<Complex64> = state
        .theta
        .iter()
        .map(|&t| Complex64::from_polar(state.sigma, t))
        .collect();
    let theta_a = grid.derivative(&state.theta, 1)?;
    let zaa: Vec<Complex64> = za.iter().zip(&theta_a).map(|(z, ta)| I * ta * z).collect();
    Ok(Curve::from_parts(z, za, zaa))
}

/// Birkhoff-Rott velocity and the frame velocities.
#[derive(Debug, Clone)]
pub struct Kinematics {
    pub w: Vec<Complex64>,
    pub u_perp: Vec<f64>,
    pub u_par: Vec<f64>,
    pub sigma_t: f64,
}

fn kinematics_from(
    grid: &SpectralGrid,
    ops: &CurveOperators<'_>,
    state: &SurfaceState,
    theta_a: &[f64],
) -> Kinematics {
    let w = ops.birkhoff_rott(&state.gamma);
    let tangent: Vec<Complex64> = state.theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
    let u_perp: Vec<f64> = w.iter().zip(&tangent).map(|(w, t)| dot(*w, I * t)).collect();
    let stretch: Vec<f64> = u_perp.iter().zip(theta_a).map(|(u, t)| u * t).collect();
    let m = mean(&stretch);
    let centered: Vec<Complex64> = stretch.iter().map(|s| Complex64::new(s - m, 0.0)).collect();
    let u_par = grid
        .antiderivative_complex(&centered)
        .into_iter()
        .map(|c| c.re)
        .collect();
    Kinematics {
        w,
        u_perp,
        u_par,
        sigma_t: -m,
    }
}

/// `(W, U⊥, U∥, σ_t)` of a state.
pub fn kinematic_fields(grid: &SpectralGrid, state: &SurfaceState) -> Result<Kinematics> {
    let curve = frame_curve(grid, state)?;
    let ops = CurveOperators::new(grid, curve)?;
    let theta_a = grid.derivative(&state.theta, 1)?;
    Ok(kinematics_from(grid, &ops, state, &theta_a))
}

/// `θ_t = (U⊥_α + U∥ θ_α) / σ`.
pub fn theta_rhs(grid: &SpectralGrid, state: &SurfaceState, kin: &Kinematics) -> Result<Vec<f64>> {
    let theta_a = grid.derivative(&state.theta, 1)?;
    let up_a = grid.derivative(&kin.u_perp, 1)?;
    Ok((0..theta_a.len())
        .map(|j| (up_a[j] + kin.u_par[j] * theta_a[j]) / state.sigma)
        .collect())
}

/// Output of the `γ_t` integral-equation solve.
#[derive(Debug, Clone)]
pub struct GammaTSolve {
    pub gamma_t: Vec<f64>,
    pub rhs: Vec<f64>,
    pub iterations: usize,
}

/// Everything the time derivative needs, computed once per evaluation.
struct Evaluation<'g> {
    ops: CurveOperators<'g>,
    theta_a: Vec<f64>,
    tangent: Vec<Complex64>,
    kin: Kinematics,
    theta_t: Vec<f64>,
    c: Vec<f64>,
    z_t: Vec<Complex64>,
    solve: GammaTSolve,
    t2: Vec<Complex64>,
    b_gamma: Vec<Complex64>,
}

/// Right-hand side of the evolution system.
#[derive(Debug, Clone)]
pub struct Rhs {
    pub theta_t: Vec<f64>,
    pub gamma_t: Vec<f64>,
    pub sigma_t: f64,
    pub iterations: usize,
}

/// All per-step diagnostic fields.
#[derive(Debug, Clone)]
pub struct DerivedFields {
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub u_perp: Vec<f64>,
    pub u_par: Vec<f64>,
    pub sigma_t: f64,
    pub q: Vec<f64>,
    pub u: Vec<f64>,
    pub kappa: Vec<f64>,
    pub p: Vec<f64>,
    pub m: Vec<Complex64>,
    pub r_kappa: Vec<f64>,
    pub r_u: Vec<f64>,
    pub r_p: Vec<f64>,
    pub theta_t: Vec<f64>,
    pub gamma_t: Vec<f64>,
    pub z_t: Vec<Complex64>,
    pub w_t: Vec<Complex64>,
    /// Material derivative of θ, `θ_t + (q/σ)θ_α`.
    pub d_theta: Vec<f64>,
    /// Material derivative of κ, `φ`.
    pub phi: Vec<f64>,
    pub gamma_t_iterations: usize,
}

/// Why a step or run stopped. `ClosureAbort` covers both an open curve and a
/// loss of uniform parametrization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    ChordArcAbort,
    GammaTNonconvergence,
    WindowViolation,
    NanAbort,
    ClosureAbort,
    CurvatureAbort,
}

impl Termination {
    /// Classify an error together with its offending value.
    pub fn classify(err: &Error) -> (Self, f64) {
        match err {
            Error::ChordArc { ratio, .. } => (Self::ChordArcAbort, *ratio),
            Error::SingularKernel { .. } => (Self::ChordArcAbort, 0.0),
            Error::GammaTNonConvergence { ratio, .. } => (Self::GammaTNonconvergence, *ratio),
            Error::WindowViolation(v) => (Self::WindowViolation, *v),
            Error::Closure(v) | Error::NonUniform(v) => (Self::ClosureAbort, *v),
            Error::CurvatureBound(v) => (Self::CurvatureAbort, *v),
            _ => (Self::NanAbort, f64::NAN),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::ChordArcAbort => "chord-arc-abort",
            Self::GammaTNonconvergence => "gamma-t-nonconvergence",
            Self::WindowViolation => "window-violation",
            Self::NanAbort => "nan-abort",
            Self::ClosureAbort => "closure-abort",
            Self::CurvatureAbort => "curvature-abort",
        }
    }
}

/// A failed step: the classified reason plus the last accepted state.
#[derive(Debug, Clone)]
pub struct StepFailure {
    pub reason: Termination,
    pub value: f64,
    pub error: Error,
    pub last_good: Box<SurfaceState>,
}

/// Invariant report of an accepted state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Invariants {
    pub closure: f64,
    pub chord_arc: f64,
    pub kappa_max: f64,
}

/// Residual fields of the first- and second-order curvature equations.
#[derive(Debug, Clone)]
pub struct Residuals {
    pub kappa: Vec<f64>,
    pub u: Vec<f64>,
    /// `D²κ - τ H ∂_s³ κ`.
    pub second_order: Vec<f64>,
}

/// Value of the `E⁰_k` energy and whether the curvature bound was exceeded.
#[derive(Debug, Clone, Copy)]
pub struct EnergyE0 {
    pub value: f64,
    pub kappa_flag: bool,
}

/// Nonlinear solver bound to one grid and stepper configuration.
#[derive(Debug, Clone)]
pub struct Model {
    pub grid: SpectralGrid,
    pub cfg: StepperConfig,
}

impl Model {
    pub fn new(grid: SpectralGrid, cfg: StepperConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { grid, cfg })
    }

    fn check_state(&self, state: &SurfaceState) -> Result<()> {
        self.grid.validate(&state.theta)?;
        self.grid.validate(&state.gamma)?;
        if !(state.sigma.is_finite() && state.sigma > 0.0) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// Check the state invariants: finiteness, closure, chord-arc and the
    /// curvature envelope.
    pub fn validate_state(&self, state: &SurfaceState) -> Result<Invariants> {
        self.check_state(state)?;
        let closure = closure_residual(&self.grid, &state.theta, state.sigma);
        if closure > CLOSURE_TOL {
            return Err(Error::Closure(closure));
        }
        let z = curve_samples(&self.grid, &state.theta, state.sigma);
        let speed = uniformity_error(&self.grid, &z, state.sigma);
        if speed > UNIFORM_TOL {
            return Err(Error::NonUniform(speed));
        }
        let chord_arc = chord_arc_ratio(&self.grid, &z, state.sigma);
        if !(chord_arc >= self.cfg.q_min) {
            return Err(Error::ChordArc {
                ratio: chord_arc,
                min: self.cfg.q_min,
            });
        }
        let theta_a = self.grid.derivative(&state.theta, 1)?;
        let kappa_max = max_abs(&theta_a) / state.sigma;
        if kappa_max > KAPPA_MAX {
            return Err(Error::CurvatureBound(kappa_max));
        }
        Ok(Invariants {
            closure,
            chord_arc,
            kappa_max,
        })
    }

    fn evaluate(&self, state: &SurfaceState) -> Result<Evaluation<'_>> {
        self.check_state(state)?;
        let g = &self.grid;
        let n = g.n_points();
        let sigma = state.sigma;
        let p = state.params;
        let curve = frame_curve(g, state)?;
        let ratio = chord_arc_ratio(g, &curve.z, sigma);
        if !(ratio >= self.cfg.q_min) {
            return Err(Error::ChordArc {
                ratio,
                min: self.cfg.q_min,
            });
        }
        let ops = CurveOperators::new(g, curve)?;
        let theta_a = g.derivative(&state.theta, 1)?;
        let kin = kinematics_from(g, &ops, state, &theta_a);
        let theta_t = theta_rhs(g, state, &kin)?;
        let tangent: Vec<Complex64> = state.theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let za = &ops.curve().za;

        let a: Vec<f64> = kin.w.iter().zip(&tangent).map(|(w, t)| dot(*w, *t)).collect();
        let c: Vec<f64> = (0..n).map(|j| a[j] + state.gamma[j] / (2.0 * sigma)).collect();
        let z_t: Vec<Complex64> = (0..n)
            .map(|j| (kin.u_perp[j] * I + kin.u_par[j]) * tangent[j])
            .collect();
        let za_t: Vec<Complex64> = (0..n)
            .map(|j| za[j] * (kin.sigma_t / sigma + I * theta_t[j]))
            .collect();

        // T₂ = -(1/2i) H(γ z_αt / z_α²) - 𝒲(γ z_αt / z_α)
        let gz1: Vec<Complex64> = (0..n).map(|j| state.gamma[j] * za_t[j] / (za[j] * za[j])).collect();
        let gz2: Vec<Complex64> = (0..n).map(|j| state.gamma[j] * za_t[j] / za[j]).collect();
        let h1 = g.hilbert_complex(&gz1);
        let w2 = ops.apply_w(&gz2);
        let t2: Vec<Complex64> = (0..n).map(|j| -h1[j] / (2.0 * I) - w2[j]).collect();
        let b_gamma = ops.apply_b(&z_t, &cplx(&state.gamma));

        let theta_aa = g.derivative(&state.theta, 2)?;
        let flux: Vec<f64> = (0..n)
            .map(|j| {
                let b = kin.u_perp[j];
                b * b - c[j] * c[j] + 2.0 * kin.u_par[j] * c[j]
            })
            .collect();
        let flux_a = g.derivative(&flux, 1)?;
        let rhs: Vec<f64> = (0..n)
            .map(|j| {
                p.inv_we * theta_aa[j] / sigma - 2.0 * p.gravity * sigma * state.theta[j].sin() + flux_a[j]
                    - 2.0 * dot(kin.w[j], za_t[j])
                    - 2.0 * (za[j] * (t2[j] + b_gamma[j])).re
            })
            .collect();
        let solve = self.solve_gamma_t(&ops, rhs)?;
        Ok(Evaluation {
            ops,
            theta_a,
            tangent,
            kin,
            theta_t,
            c,
            z_t,
            solve,
            t2,
            b_gamma,
        })
    }

    /// Fixed-point iteration `γ_t ← RHS - 2𝒥γ_t` started from `RHS`.
    fn solve_gamma_t(&self, ops: &CurveOperators<'_>, rhs: Vec<f64>) -> Result<GammaTSolve> {
        let g = &self.grid;
        let scale = g.l2_norm(&rhs);
        let mut current = rhs.clone();
        let mut last_ratio = f64::INFINITY;
        for it in 1..=self.cfg.gamma_t_max_iter {
            let j = ops.apply_j(&current);
            let next: Vec<f64> = rhs.iter().zip(&j).map(|(r, x)| r - 2.0 * x).collect();
            let delta: Vec<f64> = next.iter().zip(&current).map(|(a, b)| a - b).collect();
            let change = g.l2_norm(&delta);
            current = next;
            if current.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
            if change <= self.cfg.gamma_t_tol * scale {
                return Ok(GammaTSolve {
                    gamma_t: current,
                    rhs,
                    iterations: it,
                });
            }
            last_ratio = if scale > 0.0 { change / scale } else { change };
        }
        Err(Error::GammaTNonConvergence {
            iterations: self.cfg.gamma_t_max_iter,
            ratio: last_ratio,
        })
    }

    /// Solve for `γ_t` of a state (the full kinematic pipeline is evaluated).
    pub fn solve_gamma_t_for(&self, state: &SurfaceState) -> Result<GammaTSolve> {
        Ok(self.evaluate(state)?.solve)
    }

    /// Residual `(1 + 2𝒥)γ_t - RHS` of a solve, for verification.
    pub fn gamma_t_residual(&self, state: &SurfaceState, solve: &GammaTSolve) -> Result<Vec<f64>> {
        let curve = frame_curve(&self.grid, state)?;
        let ops = CurveOperators::new(&self.grid, curve)?;
        let j = ops.apply_j(&solve.gamma_t);
        Ok((0..j.len())
            .map(|k| solve.gamma_t[k] + 2.0 * j[k] - solve.rhs[k])
            .collect())
    }

    pub fn rhs(&self, state: &SurfaceState) -> Result<Rhs> {
        let e = self.evaluate(state)?;
        Ok(Rhs {
            theta_t: e.theta_t,
            gamma_t: e.solve.gamma_t,
            sigma_t: e.kin.sigma_t,
            iterations: e.solve.iterations,
        })
    }

    /// All diagnostic fields of a state.
    pub fn derived_fields(&self, state: &SurfaceState) -> Result<DerivedFields> {
        let e = self.evaluate(state)?;
        let g = &self.grid;
        let n = g.n_points();
        let sigma = state.sigma;
        let s2 = sigma * sigma;
        let tau = 0.5 * state.params.inv_we;
        let za = &e.ops.curve().za;
        let gamma_t = e.solve.gamma_t.clone();

        let t1 = e.ops.t1(&cplx(&gamma_t));
        let w_t: Vec<Complex64> = (0..n).map(|j| (t1[j] + e.t2[j] + e.b_gamma[j]).conj()).collect();

        let m = e.ops.m_field(&state.gamma);
        let mz: Vec<f64> = (0..n).map(|j| dot(m[j], za[j])).collect();
        let miz: Vec<f64> = (0..n).map(|j| dot(m[j], I * za[j])).collect();
        let gamma_a = g.derivative(&state.gamma, 1)?;
        let g_th: Vec<f64> = (0..n).map(|j| state.gamma[j] * e.theta_a[j]).collect();
        let h_gth = g.hilbert(&g_th)?;
        let h_mz = g.hilbert(&mz)?;
        let h_ga = g.hilbert(&gamma_a)?;

        let q: Vec<f64> = (0..n).map(|j| e.c[j] - e.kin.u_par[j]).collect();
        let u: Vec<f64> = (0..n)
            .map(|j| (0.5 * gamma_a[j] - 0.5 * h_gth[j] + mz[j]) / s2 - e.kin.sigma_t / sigma)
            .collect();
        let kappa: Vec<f64> = e.theta_a.iter().map(|t| t / sigma).collect();
        let r_kappa: Vec<f64> = (0..n).map(|j| (miz[j] - h_mz[j]) / s2).collect();
        let d_theta: Vec<f64> = (0..n).map(|j| e.theta_t[j] + q[j] * e.theta_a[j] / sigma).collect();
        let p: Vec<f64> = (0..n)
            .map(|j| {
                let normal = I * e.tangent[j];
                let ws_n = (0.5 * h_ga[j] + miz[j]) / s2;
                dot(w_t[j], normal) + q[j] * ws_n + state.gamma[j] / (2.0 * sigma) * d_theta[j]
            })
            .collect();
        let h_u = g.hilbert(&u)?;
        let r_u: Vec<f64> = (0..n)
            .map(|j| {
                let v = h_u[j] + r_kappa[j];
                v * v - u[j] * u[j]
            })
            .collect();
        let p_a = g.derivative(&p, 1)?;
        let kappa_aa = g.derivative(&kappa, 2)?;
        let h_kaa = g.hilbert(&kappa_aa)?;
        let r_p: Vec<f64> = (0..n).map(|j| p_a[j] / sigma - tau * h_kaa[j] / s2).collect();

        // φ = κ_t + (q/σ)κ_α with κ_t = ∂_α θ_t / σ - (σ_t/σ) κ
        let theta_ta = g.derivative(&e.theta_t, 1)?;
        let kappa_a = g.derivative(&kappa, 1)?;
        let phi: Vec<f64> = (0..n)
            .map(|j| theta_ta[j] / sigma - e.kin.sigma_t / sigma * kappa[j] + q[j] * kappa_a[j] / sigma)
            .collect();

        Ok(DerivedFields {
            z: e.ops.curve().z.clone(),
            w: e.kin.w.clone(),
            u_perp: e.kin.u_perp.clone(),
            u_par: e.kin.u_par.clone(),
            sigma_t: e.kin.sigma_t,
            q,
            u,
            kappa,
            p,
            m,
            r_kappa,
            r_u,
            r_p,
            theta_t: e.theta_t,
            gamma_t,
            z_t: e.z_t,
            w_t,
            d_theta,
            phi,
            gamma_t_iterations: e.solve.iterations,
        })
    }

    /// Per-mode linear coefficients `(a_k, b_k)` of
    /// `θ̂_t = a_k γ̂`, `γ̂_t = -b_k θ̂` at frozen `σ`.
    fn linear_coefficients(&self, sigma: f64, params: Params) -> (Vec<f64>, Vec<f64>) {
        let k = self.grid.wavenumbers();
        let a = k.iter().map(|k| k.abs() / (2.0 * sigma * sigma)).collect();
        let b = k
            .iter()
            .map(|k| params.inv_we * k * k / sigma + 2.0 * params.gravity * sigma)
            .collect();
        (a, b)
    }

    /// One integrating-factor RK4 step followed by filtering and invariant
    /// checks.
    pub fn step(&self, state: &SurfaceState) -> std::result::Result<SurfaceState, StepFailure> {
        self.try_step(state).map_err(|error| {
            let (reason, value) = Termination::classify(&error);
            StepFailure {
                reason,
                value,
                error,
                last_good: Box::new(state.clone()),
            }
        })
    }

    fn try_step(&self, state: &SurfaceState) -> Result<SurfaceState> {
        let g = &self.grid;
        let n = g.n_points();
        let h = self.cfg.dt;
        let (la, lb) = self.linear_coefficients(state.sigma, state.params);

        let propagate = |t: f64, th: &[Complex64], ga: &[Complex64]| -> (Vec<Complex64>, Vec<Complex64>) {
            let mut out_t = Vec::with_capacity(n);
            let mut out_g = Vec::with_capacity(n);
            for j in 0..n {
                let om2 = la[j] * lb[j];
                let (c, s_over) = if om2 > 0.0 {
                    let om = om2.sqrt();
                    ((om * t).cos(), (om * t).sin() / om)
                } else {
                    (1.0, t)
                };
                out_t.push(c * th[j] + la[j] * s_over * ga[j]);
                out_g.push(-lb[j] * s_over * th[j] + c * ga[j]);
            }
            (out_t, out_g)
        };

        let nonlinear = |th: &[Complex64], ga: &[Complex64], sigma: f64| -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
            let st = SurfaceState {
                t: state.t,
                theta: g.synthesize_real(th),
                gamma: g.synthesize_real(ga),
                sigma,
                params: state.params,
            };
            let r = self.rhs(&st)?;
            let mut ft = g.coefficients(&r.theta_t);
            let mut fg = g.coefficients(&r.gamma_t);
            for j in 0..n {
                ft[j] -= la[j] * ga[j];
                fg[j] += lb[j] * th[j];
            }
            Ok((ft, fg, r.sigma_t))
        };

        let axpy = |x: &[Complex64], a: f64, y: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(y).map(|(x, y)| x + a * y).collect()
        };

        let th0 = g.coefficients(&state.theta);
        let ga0 = g.coefficients(&state.gamma);
        let s0 = state.sigma;

        let k1 = nonlinear(&th0, &ga0, s0)?;
        let (at, ag) = propagate(0.5 * h, &axpy(&th0, 0.5 * h, &k1.0), &axpy(&ga0, 0.5 * h, &k1.1));
        let k2 = nonlinear(&at, &ag, s0 + 0.5 * h * k1.2)?;
        let (et, eg) = propagate(0.5 * h, &th0, &ga0);
        let k3 = nonlinear(&axpy(&et, 0.5 * h, &k2.0), &axpy(&eg, 0.5 * h, &k2.1), s0 + 0.5 * h * k2.2)?;
        let (ft, fg) = propagate(h, &th0, &ga0);
        let (p3t, p3g) = propagate(0.5 * h, &k3.0, &k3.1);
        let k4 = nonlinear(&axpy(&ft, h, &p3t), &axpy(&fg, h, &p3g), s0 + h * k3.2)?;

        let (p1t, p1g) = propagate(h, &k1.0, &k1.1);
        let s23t: Vec<Complex64> = k2.0.iter().zip(&k3.0).map(|(a, b)| a + b).collect();
        let s23g: Vec<Complex64> = k2.1.iter().zip(&k3.1).map(|(a, b)| a + b).collect();
        let (p23t, p23g) = propagate(0.5 * h, &s23t, &s23g);
        let th1: Vec<Complex64> = (0..n)
            .map(|j| ft[j] + h / 6.0 * (p1t[j] + 2.0 * p23t[j] + k4.0[j]))
            .collect();
        let ga1: Vec<Complex64> = (0..n)
            .map(|j| fg[j] + h / 6.0 * (p1g[j] + 2.0 * p23g[j] + k4.1[j]))
            .collect();
        let sigma = s0 + h / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2);

        let theta = g.filter_unchecked(&g.synthesize_real(&th1), self.cfg.cutoff_fraction, self.cfg.floor);
        let gamma = g.filter_unchecked(&g.synthesize_real(&ga1), self.cfg.cutoff_fraction, self.cfg.floor);
        let next = SurfaceState {
            t: state.t + h,
            theta,
            gamma,
            sigma,
            params: state.params,
        };
        if next.theta.iter().chain(&next.gamma).any(|x| !x.is_finite()) || !sigma.is_finite() {
            return Err(Error::NonFinite);
        }
        self.validate_state(&next)?;
        Ok(next)
    }

    /// Residuals of the first-order curvature system at the middle of three
    /// equispaced states, with centered time differences.
    pub fn residual_kappa_u(&self, history: &[SurfaceState]) -> Result<Residuals> {
        if history.len() != 3 {
            return Err(Error::History(format!("need 3 states, got {}", history.len())));
        }
        for s in history {
            self.check_state(s)?;
            if s.params != history[0].params {
                return Err(Error::History("states carry different parameters".into()));
            }
        }
        let dt = history[1].t - history[0].t;
        let dt2 = history[2].t - history[1].t;
        if !(dt > 0.0) || (dt2 - dt).abs() > 1e-9 * dt {
            return Err(Error::History(format!("states are not equispaced: {dt}, {dt2}")));
        }
        let g = &self.grid;
        let n = g.n_points();
        let f: Vec<DerivedFields> = history
            .iter()
            .map(|s| self.derived_fields(s))
            .collect::<Result<_>>()?;
        let mid = &f[1];
        let state = &history[1];
        let sigma = state.sigma;
        let tau = 0.5 * state.params.inv_we;
        let ds = |x: &[f64]| -> Result<Vec<f64>> {
            Ok(g.derivative(x, 1)?.into_iter().map(|v| v / sigma).collect())
        };
        let rho: Vec<f64> = f.iter().zip(history).map(|(d, s)| d.sigma_t / s.sigma).collect();
        let rho_t = (rho[2] - rho[0]) / (2.0 * dt);
        let r = rho[1];

        let kappa_t: Vec<f64> = (0..n).map(|j| (f[2].kappa[j] - f[0].kappa[j]) / (2.0 * dt)).collect();
        let u_t: Vec<f64> = (0..n).map(|j| (f[2].u[j] - f[0].u[j]) / (2.0 * dt)).collect();
        let kappa_s = ds(&mid.kappa)?;
        let u_s = ds(&mid.u)?;
        let kappa_ss = ds(&kappa_s)?;
        let h_us = g.hilbert(&u_s)?;
        let rk_s = ds(&mid.r_kappa)?;

        let kappa_res: Vec<f64> = (0..n)
            .map(|j| {
                let dk = kappa_t[j] + mid.q[j] * kappa_s[j];
                dk - (h_us[j] + rk_s[j] - mid.u[j] * mid.kappa[j] - r * mid.kappa[j])
            })
            .collect();
        let u_res: Vec<f64> = (0..n)
            .map(|j| {
                let du = u_t[j] + mid.q[j] * u_s[j];
                let k = mid.kappa[j];
                let forcing = tau * kappa_ss[j] - state.params.gravity * k * state.theta[j].cos() - mid.p[j] * k
                    + mid.d_theta[j] * mid.d_theta[j]
                    - mid.u[j] * mid.u[j]
                    - rho_t
                    - 2.0 * mid.u[j] * r
                    - r * r;
                du - forcing
            })
            .collect();

        let phi_t: Vec<f64> = (0..n).map(|j| (f[2].phi[j] - f[0].phi[j]) / (2.0 * dt)).collect();
        let phi_s = ds(&mid.phi)?;
        let kappa_sss = ds(&kappa_ss)?;
        let h_ksss = g.hilbert(&kappa_sss)?;
        let second: Vec<f64> = (0..n)
            .map(|j| phi_t[j] + mid.q[j] * phi_s[j] - tau * h_ksss[j])
            .collect();
        Ok(Residuals {
            kappa: kappa_res,
            u: u_res,
            second_order: second,
        })
    }

    /// `E⁰_k = Σ_{j≤k} e⁰_j + ‖u‖² + ‖γ‖²` in arclength variables.
    pub fn energy_e0k(&self, state: &SurfaceState, fields: &DerivedFields, k: usize) -> Result<EnergyE0> {
        let g = &self.grid;
        let sigma = state.sigma;
        let ds_weight = g.spacing() * sigma;
        let integral = |f: &[f64]| f.iter().sum::<f64>() * ds_weight;
        let sq = |f: &[f64]| integral(&f.iter().map(|x| x * x).collect::<Vec<_>>());
        let ds_pow = |f: &[f64], m: u32| -> Result<Vec<f64>> {
            let s = sigma.powi(m as i32);
            Ok(g.derivative(f, m)?.into_iter().map(|v| v / s).collect())
        };
        let kappa = &fields.kappa;
        let mut total = sq(kappa) + sq(&fields.phi);
        for j in 1..=k {
            let dk = ds_pow(kappa, j as u32 + 1)?;
            let lam: Vec<f64> = g.lambda_pow(&dk, 1.0)?.into_iter().map(|v| v / sigma).collect();
            let dphi = ds_pow(&fields.phi, j as u32)?;
            let integrand: Vec<f64> = (0..dk.len())
                .map(|i| dk[i] * lam[i] + dphi[i] * dphi[i] + 2.0 * kappa[i] * dk[i] * dk[i])
                .collect();
            total += 0.5 * integral(&integrand);
        }
        total += sq(&fields.u) + sq(&state.gamma);
        Ok(EnergyE0 {
            value: total,
            kappa_flag: max_abs(kappa) >= KAPPA_MAX,
        })
    }
}

/// Rescale a state by `λ`: same samples on a box `λ` times smaller, with
/// `γ ↦ λ^{1/2}γ` and `t ↦ λ^{-3/2}t`.
pub fn scaling_transform(
    grid: &SpectralGrid,
    state: &SurfaceState,
    lambda: f64,
) -> Result<(SpectralGrid, SurfaceState)> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain(format!("scaling factor must be positive and finite, got {lambda}")));
    }
    grid.validate(&state.theta)?;
    let g = SpectralGrid::new(grid.n_points(), grid.period() / lambda)?;
    let root = lambda.sqrt();
    Ok((
        g,
        SurfaceState {
            t: state.t * lambda.powf(-1.5),
            theta: state.theta.clone(),
            gamma: state.gamma.iter().map(|x| root * x).collect(),
            sigma: state.sigma,
            params: state.params,
        },
    ))
}

/// Initial-data generators for the nonlinear solver.
pub mod initial {
    use super::*;

    /// `θ = ε cos(mα')`, `γ = γ₀ + a sin(mα')` with `α' = 2πα/P`.
    pub fn single_mode(
        grid: &SpectralGrid,
        mode: u32,
        amplitude: f64,
        gamma_amplitude: f64,
        gamma_mean: f64,
        params: Params,
    ) -> Result<SurfaceState> {
        let k = 2.0 * PI * mode as f64 / grid.period();
        let theta = grid.nodes().iter().map(|x| amplitude * (k * x).cos()).collect();
        let gamma = grid
            .nodes()
            .iter()
            .map(|x| gamma_mean + gamma_amplitude * (k * x).sin())
            .collect();
        SurfaceState::from_angle(grid, theta, gamma, params)
    }

    /// Band-limited data with modal magnitudes `m^{-s}` for `1 ≤ m < n/3` and
    /// seeded random phases; both θ and γ are drawn.
    pub fn algebraic_spectrum(
        grid: &SpectralGrid,
        exponent: f64,
        amplitude: f64,
        gamma_amplitude: f64,
        seed: u64,
        params: Params,
    ) -> Result<SurfaceState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = grid.n_points();
        let mut draw = |amp: f64| {
            let mut c = vec![Complex64::new(0.0, 0.0); n];
            for m in 1..n.div_ceil(3) {
                let phase = 2.0 * PI * rng.random::<f64>();
                let v = Complex64::from_polar(0.5 * amp * (m as f64).powf(-exponent), phase);
                c[m] = v;
                c[n - m] = v.conj();
            }
            grid.synthesize_real(&c)
        };
        let theta = draw(amplitude);
        let gamma = draw(gamma_amplitude);
        SurfaceState::from_angle(grid, theta, gamma, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    fn grid(n: usize) -> SpectralGrid {
        make_grid(n, 2.0 * PI).unwrap()
    }

    fn model(n: usize, dt: f64) -> Model {
        Model::new(
            grid(n),
            StepperConfig {
                dt,
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn small_state(g: &SpectralGrid, eps: f64) -> SurfaceState {
        let theta = g
            .nodes()
            .iter()
            .map(|x| eps * (x.cos() + 0.5 * (2.0 * x).sin()))
            .collect();
        let gamma = g
            .nodes()
            .iter()
            .map(|x| eps * (x.sin() + 0.3 * (3.0 * x).cos()) + 0.2)
            .collect();
        SurfaceState::from_angle(g, theta, gamma, Params::default()).unwrap()
    }

    #[test]
    fn reconstruct_flat_and_small_mode() {
        let g = grid(64);
        let z = reconstruct_curve(&g, &vec![0.0; 64], 1.0).unwrap();
        for (zj, x) in z.iter().zip(g.nodes()) {
            assert!((zj - x).norm() < 1e-14);
        }
        let eps = 1e-3;
        let theta: Vec<f64> = g.nodes().iter().map(|x| eps * x.cos()).collect();
        let z = reconstruct_curve(&g, &theta, 1.0).unwrap();
        for (zj, x) in z.iter().zip(g.nodes()) {
            assert!((zj.im - eps * x.sin()).abs() <= 1e-8);
        }
        let bad: Vec<f64> = vec![0.1; 64];
        assert!(matches!(reconstruct_curve(&g, &bad, 1.0), Err(Error::Closure(_))));
    }

    #[test]
    fn chord_arc_examples() {
        let g = grid(64);
        let z = reconstruct_curve(&g, &vec![0.0; 64], 1.0).unwrap();
        let r = chord_arc_ratio(&g, &z, 1.0);
        assert!((r - 1.0).abs() <= 1e-12);
        let mut z2 = z.clone();
        z2[40] = z2[10] + Complex64::new(0.0, 1e-3);
        assert!(chord_arc_ratio(&g, &z2, 1.0) < 0.01);
    }

    #[test]
    fn kinematics_examples() {
        let g = grid(64);
        let flat = SurfaceState::flat(&g, 0.8, Params::default());
        let k = kinematic_fields(&g, &flat).unwrap();
        assert!(k.w.iter().all(|w| w.norm() < 1e-14));
        assert!(max_abs(&k.u_par) < 1e-14 && k.sigma_t.abs() < 1e-14);
        let mut s = SurfaceState::flat(&g, 0.0, Params::default());
        s.gamma = g.nodes().iter().map(|x| x.cos()).collect();
        let k = kinematic_fields(&g, &s).unwrap();
        for (u, x) in k.u_perp.iter().zip(g.nodes()) {
            assert!((u - 0.5 * x.sin()).abs() < 1e-13);
        }
        assert!(max_abs(&k.u_par) == 0.0 && k.sigma_t == 0.0);
        let th = theta_rhs(&g, &s, &k).unwrap();
        for (t, x) in th.iter().zip(g.nodes()) {
            assert!((t - 0.5 * x.cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn flat_state_is_equilibrium() {
        let m = model(32, 1e-2);
        let s = SurfaceState::flat(&m.grid, 0.4, Params::default());
        let r = m.rhs(&s).unwrap();
        // kernel roundoff only
        assert!(max_abs(&r.theta_t) < 1e-13 && max_abs(&r.gamma_t) < 1e-13);
        assert_eq!(r.sigma_t, 0.0);
        let s0 = SurfaceState::flat(&m.grid, 0.0, Params::default());
        let r = m.rhs(&s0).unwrap();
        assert!(max_abs(&r.gamma_t) == 0.0 && r.iterations == 1);
    }

    #[test]
    fn rhs_matches_linearization() {
        let g = grid(64);
        let m = Model::new(g.clone(), StepperConfig::default()).unwrap();
        for eps in [1e-3, 1e-4] {
            let theta = g.nodes().iter().map(|x| eps * x.cos()).collect();
            let gamma = g.nodes().iter().map(|x| eps * x.sin()).collect();
            let s = SurfaceState::from_angle(&g, theta, gamma, Params::default()).unwrap();
            let r = m.rhs(&s).unwrap();
            let et = r
                .theta_t
                .iter()
                .zip(g.nodes())
                .fold(0.0f64, |a, (t, x)| a.max((t - 0.5 * eps * x.sin()).abs()));
            let eg = r
                .gamma_t
                .iter()
                .zip(g.nodes())
                .fold(0.0f64, |a, (t, x)| a.max((t + 2.0 * eps * x.cos()).abs()));
            assert!(et < 5.0 * eps * eps && eg < 5.0 * eps * eps, "{et} {eg}");
        }
    }

    #[test]
    fn flat_state_survives_many_steps() {
        let m = model(32, 1e-2);
        let s0 = SurfaceState::flat(&m.grid, 0.4, Params::default());
        let mut s = s0.clone();
        for _ in 0..1000 {
            s = m.step(&s).unwrap();
        }
        let drift = s
            .theta
            .iter()
            .zip(&s0.theta)
            .chain(s.gamma.iter().zip(&s0.gamma))
            .fold((s.sigma - 1.0).abs(), |a, (x, y)| a.max((x - y).abs()));
        assert!(drift <= 1e-13, "{drift}");
    }

    #[test]
    fn stepper_is_fourth_order() {
        let g = grid(32);
        let s0 = small_state(&g, 0.05);
        let t_final = 0.2;
        let run = |dt: f64| {
            let m = Model::new(g.clone(), StepperConfig { dt, ..Default::default() }).unwrap();
            let mut s = s0.clone();
            for _ in 0..(t_final / dt).round() as usize {
                s = m.step(&s).unwrap();
            }
            s.theta
        };
        let reference = run(0.02 / 32.0);
        let errs: Vec<f64> = [0.02, 0.01, 0.005]
            .iter()
            .map(|&dt| {
                let th = run(dt);
                th.iter().zip(&reference).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((3.5..=4.5).contains(&order), "{errs:?}");
        }
    }

    #[test]
    fn rhs_rejects_chord_arc_violation() {
        let m = model(64, 1e-3);
        let s = initial::single_mode(&m.grid, 1, 2.0, 0.0, 0.0, Params::default()).unwrap();
        assert!(matches!(m.rhs(&s), Err(Error::ChordArc { .. })));
    }

    #[test]
    fn gamma_t_solve_residual() {
        let m = model(64, 1e-3);
        let s = small_state(&m.grid, 0.05);
        let solve = m.solve_gamma_t_for(&s).unwrap();
        let res = m.gamma_t_residual(&s, &solve).unwrap();
        assert!(m.grid.l2_norm(&res) <= 1e-10 * m.grid.l2_norm(&solve.rhs));
    }

    #[test]
    fn gamma_t_time_derivative_matches_finite_difference() {
        // W_t from the decomposition against a centered difference of W along
        // the straight path (θ + sθ_t, γ + sγ_t, σ + sσ_t)
        let m = model(64, 1e-3);
        let s = small_state(&m.grid, 0.05);
        let f = m.derived_fields(&s).unwrap();
        let h = 1e-5;
        let shifted = |sign: f64| {
            let st = SurfaceState {
                t: 0.0,
                theta: s.theta.iter().zip(&f.theta_t).map(|(a, b)| a + sign * h * b).collect(),
                gamma: s.gamma.iter().zip(&f.gamma_t).map(|(a, b)| a + sign * h * b).collect(),
                sigma: s.sigma + sign * h * f.sigma_t,
                params: s.params,
            };
            kinematic_fields(&m.grid, &st).unwrap().w
        };
        let wp = shifted(1.0);
        let wm = shifted(-1.0);
        let err = (0..64)
            .map(|j| ((wp[j] - wm[j]) / (2.0 * h) - f.w_t[j]).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn material_fields_examples() {
        let m = model(64, 1e-3);
        let g = &m.grid;
        let flat = SurfaceState::flat(g, 0.6, Params::default());
        let f = m.derived_fields(&flat).unwrap();
        assert!(f.q.iter().all(|q| (q - 0.3).abs() < 1e-14));
        assert!(max_abs(&f.u) < 1e-14 && max_abs(&f.kappa) == 0.0 && max_abs(&f.p) < 1e-14);
        let mut s = SurfaceState::flat(g, 0.0, Params::default());
        s.gamma = g.nodes().iter().map(|x| 2.0 * x.sin()).collect();
        let f = m.derived_fields(&s).unwrap();
        for j in 0..64 {
            let x = g.nodes()[j];
            assert!((f.u[j] - x.cos()).abs() < 1e-13);
            assert!(f.r_kappa[j].abs() < 1e-13);
            assert!((f.r_u[j] + (2.0 * x).cos()).abs() < 1e-12);
        }
        let zero = SurfaceState::flat(g, 0.0, Params::default());
        let f = m.derived_fields(&zero).unwrap();
        for v in [&f.r_kappa, &f.r_u, &f.r_p, &f.p] {
            assert!(max_abs(v) == 0.0);
        }
    }

    #[test]
    fn u_is_arclength_derivative_of_q() {
        let m = model(64, 1e-3);
        let s = small_state(&m.grid, 0.05);
        let f = m.derived_fields(&s).unwrap();
        let qs: Vec<f64> = m.grid.derivative(&f.q, 1).unwrap().iter().map(|v| v / s.sigma).collect();
        let err = qs.iter().zip(&f.u).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(err <= 1e-9 * max_abs(&f.u), "{err}");
    }

    #[test]
    fn pressure_matches_linear_prediction() {
        let m = model(64, 1e-3);
        let g = &m.grid;
        let eps = 1e-3;
        let s = initial::single_mode(g, 1, eps, 0.0, 0.0, Params::default()).unwrap();
        let f = m.derived_fields(&s).unwrap();
        // p ≈ τ H κ_α with κ = θ_α: p ≈ -τ ε sin α
        let c = g.coefficients(&f.p);
        let predicted = g.coefficients(&g.nodes().iter().map(|x| -eps * x.sin()).collect::<Vec<_>>());
        let rel = (c[1] - predicted[1]).norm() / predicted[1].norm();
        assert!(rel <= 10.0 * eps, "{rel}");
    }

    #[test]
    fn scaling_transform_examples() {
        let g = grid(32);
        let s = initial::single_mode(&g, 1, 1e-3, 1e-3, 0.0, Params::default()).unwrap();
        let (g1, s1) = scaling_transform(&g, &s, 1.0).unwrap();
        assert_eq!(g1, g);
        assert_eq!(s1, s);
        let (g2, s2) = scaling_transform(&g, &s, 2.0).unwrap();
        assert!((g2.period() - PI).abs() < 1e-15);
        let c = g2.coefficients(&s2.gamma);
        // mode 1 on a box of length π is wavenumber 2
        assert!((g2.wavenumbers()[1] - 2.0).abs() < 1e-15);
        assert!((c[1].norm() - 2f64.sqrt() * 0.5e-3).abs() < 1e-15);
        assert!(scaling_transform(&g, &s, 0.0).is_err());
        assert!(scaling_transform(&g, &s, f64::NAN).is_err());
    }

    #[test]
    fn energy_e0k_flat_cases() {
        let m = model(32, 1e-3);
        let g = &m.grid;
        let zero = SurfaceState::flat(g, 0.0, Params::default());
        let f = m.derived_fields(&zero).unwrap();
        assert_eq!(m.energy_e0k(&zero, &f, 2).unwrap().value, 0.0);
        let c = 0.7;
        let flat = SurfaceState::flat(g, c, Params::default());
        let f = m.derived_fields(&flat).unwrap();
        let e = m.energy_e0k(&flat, &f, 2).unwrap();
        assert!((e.value - c * c * 2.0 * PI).abs() < 1e-12);
        assert!(!e.kappa_flag);
    }

    #[test]
    fn step_rejects_self_contact() {
        let m = model(64, 1e-3);
        let s = initial::single_mode(&m.grid, 1, 2.0, 0.0, 0.0, Params::default()).unwrap();
        match m.validate_state(&s) {
            Err(Error::ChordArc { ratio, .. }) => assert!(ratio < 0.5),
            other => panic!("expected chord-arc error, got {other:?}"),
        }
        let fail = m.step(&s).unwrap_err();
        assert_eq!(fail.reason, Termination::ChordArcAbort);
        assert_eq!(*fail.last_good, s);
    }

    #[test]
    fn residual_requires_equispaced_history() {
        let m = model(32, 1e-3);
        let s = SurfaceState::flat(&m.grid, 0.0, Params::default());
        let mut b = s.clone();
        b.t = 1.0;
        let mut c = s.clone();
        c.t = 3.0;
        assert!(matches!(m.residual_kappa_u(&[s.clone(), b, c]), Err(Error::History(_))));
        assert!(m.residual_kappa_u(&[s.clone(), s.clone()]).is_err());
    }

    #[test]
    fn flat_residuals_vanish() {
        let m = model(32, 1e-2);
        let mut states = vec![SurfaceState::flat(&m.grid, 0.3, Params::default())];
        for _ in 0..2 {
            let next = m.step(states.last().unwrap()).unwrap();
            states.push(next);
        }
        let r = m.residual_kappa_u(&states).unwrap();
        assert!(max_abs(&r.kappa) < 1e-12 && max_abs(&r.u) < 1e-12);
    }
}
