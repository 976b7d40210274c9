//! Periodic pseudospectral toolbox on a uniform grid.
//!
//! Fourier coefficients follow the convention `f(x) = Σ c_m e^{i k_m x}` with
//! `k_m = 2πm / period`, so that `∫ f² dx = period · Σ |c_m|²`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid with cached FFT plans.
#[derive(Clone)]
pub struct SpectralGrid {
    n: usize,
    period: f64,
    nodes: Vec<f64>,
    /// Wavenumbers in FFT storage order; index `n/2` is the Nyquist mode.
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.n)
            .field("period", &self.period)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.period == other.period
    }
}

/// Build a grid with `n` nodes on `[-period/2, period/2)`.
pub fn make_grid(n: usize, period: f64) -> Result<SpectralGrid> {
    SpectralGrid::new(n, period)
}

impl SpectralGrid {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n must be even and at least 8, got {n}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period must be positive, got {period}"
            )));
        }
        let h = period / n as f64;
        let nodes = (0..n).map(|j| -0.5 * period + h * j as f64).collect();
        let wavenumbers = (0..n)
            .map(|j| 2.0 * PI * mode_index(j, n) as f64 / period)
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            n,
            period,
            nodes,
            wavenumbers,
            forward,
            inverse,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Wavenumbers in FFT storage order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Largest resolved wavenumber magnitude, `π n / period`.
    pub fn k_max(&self) -> f64 {
        PI * self.n as f64 / self.period
    }

    /// Integer mode number of storage slot `j`.
    pub fn mode(&self, j: usize) -> i64 {
        mode_index(j, self.n)
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    /// Check sample count and finiteness.
    pub fn validate(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: f.len(),
            });
        }
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    pub fn validate_complex(&self, f: &[Complex64]) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: f.len(),
            });
        }
        if f.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// Fourier coefficients `c_m` (FFT divided by n).
    pub fn coefficients(&self, f: &[f64]) -> Vec<Complex64> {
        let buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.coefficients_complex(&buf)
    }

    pub fn coefficients_complex(&self, f: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.n, "field length does not match grid");
        let mut buf = f.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Complex samples from Fourier coefficients.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(coeffs.len(), self.n, "coefficient length does not match grid");
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        buf
    }

    /// Real samples from Fourier coefficients (imaginary part discarded).
    pub fn synthesize_real(&self, coeffs: &[Complex64]) -> Vec<f64> {
        self.synthesize(coeffs).into_iter().map(|c| c.re).collect()
    }

    /// Apply a Fourier multiplier given per storage slot.
    pub fn apply_multiplier_complex<F>(&self, f: &[Complex64], symbol: F) -> Vec<Complex64>
    where
        F: Fn(usize, f64) -> Complex64,
    {
        let mut c = self.coefficients_complex(f);
        for (j, cj) in c.iter_mut().enumerate() {
            *cj *= symbol(j, self.wavenumbers[j]);
        }
        self.synthesize(&c)
    }

    pub fn apply_multiplier<F>(&self, f: &[f64], symbol: F) -> Vec<f64>
    where
        F: Fn(usize, f64) -> Complex64,
    {
        let mut c = self.coefficients(f);
        for (j, cj) in c.iter_mut().enumerate() {
            *cj *= symbol(j, self.wavenumbers[j]);
        }
        self.synthesize_real(&c)
    }

    fn derivative_symbol(&self, m: u32) -> impl Fn(usize, f64) -> Complex64 + '_ {
        move |j, k| {
            if m == 0 {
                Complex64::new(1.0, 0.0)
            } else if m % 2 == 1 && self.is_nyquist(j) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k).powu(m)
            }
        }
    }

    /// `m`-th derivative of complex samples.
    pub fn derivative_complex(&self, f: &[Complex64], m: u32) -> Vec<Complex64> {
        self.apply_multiplier_complex(f, self.derivative_symbol(m))
    }

    /// Hilbert transform of complex samples (applied linearly to both parts).
    pub fn hilbert_complex(&self, f: &[Complex64]) -> Vec<Complex64> {
        self.apply_multiplier_complex(f, |j, k| self.hilbert_symbol(j, k))
    }

    fn hilbert_symbol(&self, j: usize, k: f64) -> Complex64 {
        if self.is_nyquist(j) || k == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -k.signum())
        }
    }

    /// Zero-mean antiderivative of complex samples; the mean mode is dropped.
    pub fn antiderivative_complex(&self, f: &[Complex64]) -> Vec<Complex64> {
        self.apply_multiplier_complex(f, |j, k| {
            if k == 0.0 || self.is_nyquist(j) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / k)
            }
        })
    }

    /// Spectral `∂^m f`; the Nyquist mode is zeroed for odd `m`.
    pub fn derivative(&self, f: &[f64], m: u32) -> Result<Vec<f64>> {
        self.validate(f)?;
        Ok(self.apply_multiplier(f, self.derivative_symbol(m)))
    }

    /// Hilbert transform with symbol `-i sgn(k)`.
    pub fn hilbert(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.validate(f)?;
        Ok(self.apply_multiplier(f, |j, k| self.hilbert_symbol(j, k)))
    }

    /// `Λ^s f` with symbol `|k|^s`; the mean maps to zero.
    pub fn lambda_pow(&self, f: &[f64], s: f64) -> Result<Vec<f64>> {
        self.validate(f)?;
        if s < 0.0 {
            let m = mean(f);
            if m.abs() > 1e-13 * max_abs(f).max(1.0) {
                return Err(Error::Domain(format!(
                    "negative power {s} requires zero mean, mean is {m:e}"
                )));
            }
        }
        Ok(self.apply_multiplier(f, |_, k| lambda_symbol(k, s)))
    }

    /// Zero-mean antiderivative; the input must have zero mean.
    pub fn antiderivative(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.validate(f)?;
        let m = mean(f);
        let scale = rms(f);
        if m.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) && m != 0.0 {
            return Err(Error::Domain(format!(
                "antiderivative requires zero mean, mean is {m:e}"
            )));
        }
        let c: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Ok(self.antiderivative_complex(&c).into_iter().map(|z| z.re).collect())
    }

    /// Dealiasing cutoff plus relative magnitude floor.
    pub fn filter(&self, f: &[f64], cutoff_fraction: f64, floor: f64) -> Result<Vec<f64>> {
        self.validate(f)?;
        if !(cutoff_fraction > 0.0 && cutoff_fraction <= 1.0) || floor < 0.0 {
            return Err(Error::Domain(format!(
                "filter needs cutoff in (0,1] and floor >= 0, got {cutoff_fraction}, {floor}"
            )));
        }
        Ok(self.filter_unchecked(f, cutoff_fraction, floor))
    }

    pub(crate) fn filter_unchecked(&self, f: &[f64], cutoff_fraction: f64, floor: f64) -> Vec<f64> {
        if cutoff_fraction >= 1.0 && floor == 0.0 {
            return f.to_vec();
        }
        let mut c = self.coefficients(f);
        let limit = cutoff_fraction * (self.n / 2) as f64;
        for (j, cj) in c.iter_mut().enumerate() {
            if self.mode(j).unsigned_abs() as f64 > limit {
                *cj = Complex64::new(0.0, 0.0);
            }
        }
        let peak = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if floor > 0.0 && peak > 0.0 {
            let threshold = floor * peak;
            for cj in &mut c {
                if cj.norm() < threshold {
                    *cj = Complex64::new(0.0, 0.0);
                }
            }
        }
        self.synthesize_real(&c)
    }

    /// `(period · Σ (1+k²)^s |c_k|²)^{1/2}`.
    pub fn sobolev_norm(&self, f: &[f64], s: f64) -> Result<f64> {
        self.validate(f)?;
        let c = self.coefficients(f);
        let sum: f64 = c
            .iter()
            .zip(&self.wavenumbers)
            .map(|(cj, &k)| (1.0 + k * k).powf(s) * cj.norm_sqr())
            .sum();
        Ok((sum * self.period).sqrt())
    }

    /// Trapezoid integral over one period.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.spacing()
    }

    /// `(∫ f²)^{1/2}` by the trapezoid rule.
    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        (f.iter().map(|x| x * x).sum::<f64>() * self.spacing()).sqrt()
    }

    /// Spectral interpolation onto a grid with `m` points and the same period.
    pub fn resample(&self, f: &[f64], m: usize) -> Result<Vec<f64>> {
        let target = SpectralGrid::new(m, self.period)?;
        let c = self.coefficients(f);
        Ok(target.synthesize_real(&self.transfer_coefficients(&c, &target)))
    }

    pub fn resample_complex(&self, f: &[Complex64], m: usize) -> Result<Vec<Complex64>> {
        let target = SpectralGrid::new(m, self.period)?;
        let c = self.coefficients_complex(f);
        Ok(target.synthesize(&self.transfer_coefficients(&c, &target)))
    }

    /// Move coefficients to another grid of the same period, splitting or
    /// folding the Nyquist mode symmetrically.
    fn transfer_coefficients(&self, c: &[Complex64], target: &SpectralGrid) -> Vec<Complex64> {
        let m = target.n;
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for (j, &cj) in c.iter().enumerate() {
            let mode = self.mode(j);
            if self.is_nyquist(j) && m > self.n {
                let half = cj * 0.5;
                let p = (self.n / 2) as i64;
                out[slot(p, m)] += half;
                out[slot(-p, m)] += half;
                continue;
            }
            if mode.unsigned_abs() as usize <= m / 2 {
                out[slot(mode, m)] += cj;
            }
        }
        out
    }
}

fn mode_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn slot(mode: i64, n: usize) -> usize {
    mode.rem_euclid(n as i64) as usize
}

/// Symbol of `Λ^s`, zero at `k = 0`.
pub fn lambda_symbol(k: f64, s: f64) -> Complex64 {
    if k == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(k.abs().powf(s), 0.0)
    }
}

pub fn mean(f: &[f64]) -> f64 {
    f.iter().sum::<f64>() / f.len() as f64
}

pub fn mean_complex(f: &[Complex64]) -> Complex64 {
    f.iter().sum::<Complex64>() / f.len() as f64
}

pub fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_complex(f: &[Complex64]) -> f64 {
    f.iter().fold(0.0, |m, x| m.max(x.norm()))
}

pub fn rms(f: &[f64]) -> f64 {
    (f.iter().map(|x| x * x).sum::<f64>() / f.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> SpectralGrid {
        make_grid(n, 2.0 * PI).unwrap()
    }

    fn sample(g: &SpectralGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        g.nodes().iter().map(|&x| f(x)).collect()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn grid_layout() {
        let g = grid(8);
        assert_eq!(g.n_points(), 8);
        assert!((g.spacing() - PI / 4.0).abs() < 1e-15);
        assert_eq!(g.nodes()[0], -PI);
        assert!((g.nodes()[1] + 3.0 * PI / 4.0).abs() < 1e-15);
        let mut ks: Vec<f64> = g.wavenumbers().to_vec();
        ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(ks, vec![-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        let g = grid(256);
        assert!((g.spacing() - 2.0 * PI / 256.0).abs() < 1e-16);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(make_grid(7, 2.0 * PI).is_err());
        assert!(make_grid(6, 2.0 * PI).is_err());
        assert!(make_grid(8, 0.0).is_err());
        assert!(make_grid(8, -1.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let g = grid(64);
        let d = g.derivative(&sample(&g, f64::sin), 1).unwrap();
        assert!(max_diff(&d, &sample(&g, f64::cos)) <= 1e-12);
        let d2 = g.derivative(&sample(&g, |x| (2.0 * x).cos()), 2).unwrap();
        assert!(max_diff(&d2, &sample(&g, |x| -4.0 * (2.0 * x).cos())) <= 1e-11);
        let dc = g.derivative(&vec![3.0; 64], 1).unwrap();
        assert!(max_abs(&dc) <= 1e-14);
    }

    #[test]
    fn derivative_rejects_nan() {
        let g = grid(8);
        let mut f = vec![0.0; 8];
        f[3] = f64::NAN;
        assert_eq!(g.derivative(&f, 1), Err(Error::NonFinite));
        assert!(matches!(
            g.derivative(&[0.0; 4], 1),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn hilbert_examples() {
        let g = grid(64);
        let h = g.hilbert(&sample(&g, |x| (3.0 * x).cos())).unwrap();
        assert!(max_diff(&h, &sample(&g, |x| (3.0 * x).sin())) <= 1e-13);
        let h = g.hilbert(&sample(&g, f64::sin)).unwrap();
        assert!(max_diff(&h, &sample(&g, |x| -x.cos())) <= 1e-13);
        let h = g.hilbert(&vec![5.0; 64]).unwrap();
        assert!(max_abs(&h) <= 1e-14);
    }

    #[test]
    fn lambda_examples() {
        let g = grid(64);
        let c2 = sample(&g, |x| (2.0 * x).cos());
        let l = g.lambda_pow(&c2, 0.5).unwrap();
        assert!(max_diff(&l, &sample(&g, |x| 2f64.sqrt() * (2.0 * x).cos())) <= 1e-13);
        let l = g.lambda_pow(&c2, 3.0).unwrap();
        assert!(max_diff(&l, &sample(&g, |x| 8.0 * (2.0 * x).cos())) <= 1e-11);
        assert!(g.lambda_pow(&sample(&g, |x| x.sin() + 7.0), -1.0).is_err());
        assert!(g.lambda_pow(&sample(&g, f64::sin), -1.0).is_ok());
    }

    #[test]
    fn antiderivative_examples() {
        let g = grid(64);
        let a = g.antiderivative(&sample(&g, f64::cos)).unwrap();
        assert!(max_diff(&a, &sample(&g, f64::sin)) <= 1e-13);
        let a = g.antiderivative(&sample(&g, |x| (2.0 * x).sin())).unwrap();
        assert!(max_diff(&a, &sample(&g, |x| -(2.0 * x).cos() / 2.0)) <= 1e-13);
        assert!(g.antiderivative(&vec![1.0; 64]).is_err());
    }

    #[test]
    fn filter_examples() {
        let g = grid(64);
        let f = sample(&g, |x| x.sin() + 0.3 * (7.0 * x).cos());
        assert_eq!(g.filter(&f, 1.0, 0.0).unwrap(), f);
        let top = sample(&g, |x| (32.0 * x).cos());
        assert!(max_abs(&g.filter(&top, 2.0 / 3.0, 0.0).unwrap()) == 0.0);
        // modes 22..31 lie above two thirds of k_max = 32
        let f = sample(&g, |x| (22.0 * x).cos() + (21.0 * x).cos());
        let kept = g.filter(&f, 2.0 / 3.0, 0.0).unwrap();
        assert!(max_diff(&kept, &sample(&g, |x| (21.0 * x).cos())) <= 1e-13);
    }

    #[test]
    fn filter_floor_zeroes_small_modes() {
        let g = grid(32);
        let f = sample(&g, |x| x.cos() + 1e-15 * (5.0 * x).sin());
        let out = g.filter(&f, 1.0, 1e-13).unwrap();
        let c = g.coefficients(&out);
        for (j, cj) in c.iter().enumerate() {
            if g.mode(j).abs() != 1 {
                assert!(cj.norm() < 1e-16, "mode {}", g.mode(j));
            }
        }
    }

    #[test]
    fn sobolev_examples() {
        let g = grid(64);
        assert_eq!(g.sobolev_norm(&vec![0.0; 64], 3.0).unwrap(), 0.0);
        let c = sample(&g, f64::cos);
        assert!((g.sobolev_norm(&c, 0.0).unwrap() - PI.sqrt()).abs() < 1e-13);
        assert!((g.sobolev_norm(&c, 1.0).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn resample_round_trip() {
        let g = grid(32);
        let f = sample(&g, |x| (x.sin()).exp());
        let fine = g.resample(&f, 128).unwrap();
        let gf = grid(128);
        let exact = sample(&gf, |x| (x.sin()).exp());
        assert!(max_diff(&fine, &exact) < 1e-9);
        let back = gf.resample(&fine, 32).unwrap();
        assert!(max_diff(&back, &f) < 1e-13);
    }
}
