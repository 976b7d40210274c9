//! Kernel operators on periodic curves: divided differences, the smooth
//! remainder of the Birkhoff-Rott integral, commutators with the Hilbert
//! transform, and the `𝒲`, `ℬ`, `𝒥`, `𝐦` operators.
//!
//! The periodic point-vortex kernel `k(x) = (π/P) cot(πx/P)` replaces `1/x`
//! throughout.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::SpectralGrid;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// How the diagonal of a kernel matrix was populated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalRule {
    LimitValue,
    Zero,
    Excluded,
}

/// Dense row-major `n × n` kernel.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub n: usize,
    pub entries: Vec<Complex64>,
    pub diagonal_rule: DiagonalRule,
}

impl KernelMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    /// `weight · Σ_j K_ij f_j`.
    pub fn apply(&self, f: &[Complex64], weight: Complex64) -> Vec<Complex64> {
        matvec(&self.entries, self.n, f)
            .into_iter()
            .map(|v| v * weight)
            .collect()
    }

    /// Largest entry magnitude over off-diagonal pairs (and the diagonal when
    /// it holds limit values).
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j && self.diagonal_rule != DiagonalRule::LimitValue {
                    continue;
                }
                m = m.max(self.get(i, j).norm());
            }
        }
        m
    }
}

fn matvec(a: &[Complex64], n: usize, f: &[Complex64]) -> Vec<Complex64> {
    a.chunks_exact(n)
        .map(|row| row.iter().zip(f).map(|(k, x)| k * x).sum())
        .collect()
}

/// Periodic kernel `(π/P) cot(πx/P)` by direct evaluation.
pub fn periodic_cot(period: f64, x: Complex64) -> Complex64 {
    let arg = x * (PI / period);
    (PI / period) / arg.tan()
}

/// Periodic chord `(P/π) tan(π d / P)` standing in for `d = α - β`.
pub fn periodic_chord(period: f64, d: f64) -> f64 {
    period / PI * (PI * d / period).tan()
}

fn to_complex(a: &[f64]) -> Vec<Complex64> {
    a.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Divided difference `Qa(α_i, α_j)` with the spectral derivative on the
/// diagonal.
pub fn divided_difference(grid: &SpectralGrid, a: &[Complex64]) -> Result<KernelMatrix> {
    grid.validate_complex(a)?;
    let n = grid.n_points();
    let nodes = grid.nodes();
    let da = grid.derivative_complex(a, 1);
    let mut entries = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = if i == j {
                da[i]
            } else {
                (a[i] - a[j]) / periodic_chord(grid.period(), nodes[i] - nodes[j])
            };
        }
    }
    Ok(KernelMatrix {
        n,
        entries,
        diagonal_rule: DiagonalRule::LimitValue,
    })
}

pub fn divided_difference_real(grid: &SpectralGrid, a: &[f64]) -> Result<KernelMatrix> {
    divided_difference(grid, &to_complex(a))
}

/// Spectral commutator `[H, a] g = H(a g) - a H(g)`.
pub fn commutator_hilbert(grid: &SpectralGrid, a: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    grid.validate(a)?;
    grid.validate(g)?;
    let ag: Vec<f64> = a.iter().zip(g).map(|(x, y)| x * y).collect();
    let h_ag = grid.hilbert(&ag)?;
    let h_g = grid.hilbert(g)?;
    Ok(h_ag.iter().zip(a.iter().zip(&h_g)).map(|(p, (x, q))| p - x * q).collect())
}

/// Complex-coefficient commutator, `H` acting linearly on complex samples.
pub fn commutator_hilbert_complex(
    grid: &SpectralGrid,
    a: &[Complex64],
    g: &[Complex64],
) -> Vec<Complex64> {
    let ag: Vec<Complex64> = a.iter().zip(g).map(|(x, y)| x * y).collect();
    let h_ag = grid.hilbert_complex(&ag);
    let h_g = grid.hilbert_complex(g);
    h_ag.iter().zip(a.iter().zip(&h_g)).map(|(p, (x, q))| p - x * q).collect()
}

/// Quadrature form `-(1/π) ∫ Qa(α,β) g(β) dβ` of the same commutator.
pub fn commutator_hilbert_quadrature(grid: &SpectralGrid, a: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    grid.validate(g)?;
    let q = divided_difference_real(grid, a)?;
    let weight = Complex64::new(-grid.spacing() / PI, 0.0);
    Ok(q.apply(&to_complex(g), weight).into_iter().map(|c| c.re).collect())
}

/// Sampled curve with its parametric derivatives.
#[derive(Debug, Clone)]
pub struct Curve {
    pub z: Vec<Complex64>,
    pub za: Vec<Complex64>,
    pub zaa: Vec<Complex64>,
}

impl Curve {
    /// Derivatives from samples of a curve with `z(α + P) = z(α) + P`.
    pub fn from_samples(grid: &SpectralGrid, z: &[Complex64]) -> Result<Self> {
        grid.validate_complex(z)?;
        let periodic: Vec<Complex64> = z
            .iter()
            .zip(grid.nodes())
            .map(|(zj, &a)| zj - a)
            .collect();
        let dz = grid.derivative_complex(&periodic, 1);
        let za: Vec<Complex64> = dz.iter().map(|d| d + 1.0).collect();
        let zaa = grid.derivative_complex(&periodic, 2);
        Ok(Self {
            z: z.to_vec(),
            za,
            zaa,
        })
    }

    /// Curve with externally supplied derivatives.
    pub fn from_parts(z: Vec<Complex64>, za: Vec<Complex64>, zaa: Vec<Complex64>) -> Self {
        Self { z, za, zaa }
    }
}

/// Kernel machinery for one curve: the cotangent matrix `k(z_i - z_j)` and
/// the `𝒲` kernel, assembled once and reused by every operator.
pub struct CurveOperators<'g> {
    grid: &'g SpectralGrid,
    curve: Curve,
    /// `k(z_i - z_j)`, zero on the diagonal.
    cot: Vec<Complex64>,
    /// `𝒲` kernel with its limit diagonal.
    kernel: Vec<Complex64>,
}

impl<'g> CurveOperators<'g> {
    pub fn new(grid: &'g SpectralGrid, curve: Curve) -> Result<Self> {
        let n = grid.n_points();
        grid.validate_complex(&curve.z)?;
        grid.validate_complex(&curve.za)?;
        grid.validate_complex(&curve.zaa)?;
        let p = grid.period();
        let scale = PI / p;
        // cot(π(z_i - z_j)/P) = i (w_i + w_j) / (w_i - w_j) with w = e^{2πiz/P}
        let w: Vec<Complex64> = curve.z.iter().map(|z| (I * (2.0 * scale) * z).exp()).collect();
        let mut cot = vec![ZERO; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let den = w[i] - w[j];
                if den.norm() <= 1e-12 * (w[i].norm() + w[j].norm()) {
                    return Err(Error::SingularKernel { i, j });
                }
                let c = I * scale * (w[i] + w[j]) / den;
                cot[i * n + j] = c;
                cot[j * n + i] = -c;
            }
        }
        let flat: Vec<f64> = (0..n)
            .map(|d| if d == 0 { 0.0 } else { scale / (PI * d as f64 / n as f64).tan() })
            .collect();
        let inv_za: Vec<Complex64> = curve.za.iter().map(|z| 1.0 / z).collect();
        let mut kernel = vec![ZERO; n * n];
        for i in 0..n {
            let row = &mut kernel[i * n..(i + 1) * n];
            let crow = &cot[i * n..(i + 1) * n];
            for j in 0..n {
                row[j] = if i == j {
                    -curve.zaa[i] * inv_za[i] * inv_za[i] * 0.5
                } else {
                    crow[j] - flat[(i + n - j) % n] * inv_za[j]
                };
            }
        }
        Ok(Self {
            grid,
            curve,
            cot,
            kernel,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.grid
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    fn weight(&self) -> Complex64 {
        Complex64::new(self.grid.spacing() / (2.0 * PI), 0.0) / I
    }

    /// The `𝒲` kernel as a matrix (without the quadrature weight).
    pub fn kernel_matrix(&self) -> KernelMatrix {
        KernelMatrix {
            n: self.grid.n_points(),
            entries: self.kernel.clone(),
            diagonal_rule: DiagonalRule::LimitValue,
        }
    }

    /// `𝒲 f = (1/2πi) ∫ K(α,β) f(β) dβ` by the trapezoid rule.
    pub fn apply_w(&self, f: &[Complex64]) -> Vec<Complex64> {
        let w = self.weight();
        matvec(&self.kernel, self.grid.n_points(), f)
            .into_iter()
            .map(|v| v * w)
            .collect()
    }

    /// `(1/2i) H(f / z_α) + 𝒲 f`.
    pub fn t1(&self, f: &[Complex64]) -> Vec<Complex64> {
        let q: Vec<Complex64> = f.iter().zip(&self.curve.za).map(|(x, z)| x / z).collect();
        let h = self.grid.hilbert_complex(&q);
        let wf = self.apply_w(f);
        h.iter().zip(&wf).map(|(a, b)| a / (2.0 * I) + b).collect()
    }

    /// Birkhoff-Rott velocity `W` (the conjugate of `(1/2i)H(γ/z_α) + 𝒲γ`).
    pub fn birkhoff_rott(&self, gamma: &[f64]) -> Vec<Complex64> {
        self.t1(&to_complex(gamma)).into_iter().map(|c| c.conj()).collect()
    }

    /// `ℬf = (1/2πi) ∫ k(z(α)-z(β)) (z_t(α) - z_t(β)) ∂_β(f/z_β) dβ`, diagonal
    /// `z_tα / z_α`.
    pub fn apply_b(&self, zt: &[Complex64], f: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n_points();
        let q: Vec<Complex64> = f.iter().zip(&self.curve.za).map(|(x, z)| x / z).collect();
        let g = self.grid.derivative_complex(&q, 1);
        let zta = self.grid.derivative_complex(zt, 1);
        let ztg: Vec<Complex64> = zt.iter().zip(&g).map(|(a, b)| a * b).collect();
        let cg = matvec(&self.cot, n, &g);
        let cztg = matvec(&self.cot, n, &ztg);
        let w = self.weight();
        (0..n)
            .map(|i| {
                let diag = zta[i] / self.curve.za[i] * g[i];
                (zt[i] * cg[i] - cztg[i] + diag) * w
            })
            .collect()
    }

    /// `𝒥f = Re(z_α 𝒲f + (z_α/2i)[H, 1/z_α] f)`.
    pub fn apply_j(&self, f: &[f64]) -> Vec<f64> {
        let fc = to_complex(f);
        let inv: Vec<Complex64> = self.curve.za.iter().map(|z| 1.0 / z).collect();
        let comm = commutator_hilbert_complex(self.grid, &inv, &fc);
        let wf = self.apply_w(&fc);
        self.curve
            .za
            .iter()
            .zip(wf.iter().zip(&comm))
            .map(|(z, (a, c))| (z * a + z / (2.0 * I) * c).re)
            .collect()
    }

    /// `𝐦` from `𝐦̄ = z_α 𝒲(F_α) + (z_α/2i)[H, 1/z_α²](z_α F_α)`, `F = γ/z_α`.
    pub fn m_field(&self, gamma: &[f64]) -> Vec<Complex64> {
        let za = &self.curve.za;
        let zaa = &self.curve.zaa;
        let gc = to_complex(gamma);
        let ga = self.grid.derivative_complex(&gc, 1);
        // z_α F_α = γ_α - γ z_αα / z_α
        let za_fa: Vec<Complex64> = (0..gc.len())
            .map(|j| ga[j] - gc[j] * zaa[j] / za[j])
            .collect();
        let fa: Vec<Complex64> = za_fa.iter().zip(za).map(|(a, z)| a / z).collect();
        let wfa = self.apply_w(&fa);
        let inv2: Vec<Complex64> = za.iter().map(|z| 1.0 / (z * z)).collect();
        let comm = commutator_hilbert_complex(self.grid, &inv2, &za_fa);
        za.iter()
            .zip(wfa.iter().zip(&comm))
            .map(|(z, (a, c))| (z * a + z / (2.0 * I) * c).conj())
            .collect()
    }
}

/// The `𝒲` kernel of a sampled curve.
pub fn remainder_kernel(grid: &SpectralGrid, z: &[Complex64]) -> Result<KernelMatrix> {
    let ops = CurveOperators::new(grid, Curve::from_samples(grid, z)?)?;
    Ok(ops.kernel_matrix())
}

pub fn apply_w(grid: &SpectralGrid, z: &[Complex64], f: &[Complex64]) -> Result<Vec<Complex64>> {
    grid.validate_complex(f)?;
    let ops = CurveOperators::new(grid, Curve::from_samples(grid, z)?)?;
    Ok(ops.apply_w(f))
}

/// Check `|z_α| = σ` to `1e-8` relative.
pub fn check_uniform(curve: &Curve, sigma: f64) -> Result<()> {
    let dev = curve
        .za
        .iter()
        .map(|z| (z.norm() - sigma).abs() / sigma)
        .fold(0.0, f64::max);
    if dev > 1e-8 {
        return Err(Error::NonUniform(dev));
    }
    Ok(())
}

/// Birkhoff-Rott velocity of a uniformly parametrized curve.
pub fn birkhoff_rott(
    grid: &SpectralGrid,
    z: &[Complex64],
    gamma: &[f64],
    sigma: f64,
) -> Result<Vec<Complex64>> {
    grid.validate(gamma)?;
    let curve = Curve::from_samples(grid, z)?;
    check_uniform(&curve, sigma)?;
    let ops = CurveOperators::new(grid, curve)?;
    Ok(ops.birkhoff_rott(gamma))
}

/// Reference Birkhoff-Rott velocity by alternating-point trapezoid quadrature
/// of the principal value integral.
pub fn pv_oracle(grid: &SpectralGrid, z: &[Complex64], gamma: &[f64]) -> Result<Vec<Complex64>> {
    grid.validate_complex(z)?;
    grid.validate(gamma)?;
    let n = grid.n_points();
    let p = grid.period();
    let w = Complex64::new(2.0 * grid.spacing() / (2.0 * PI), 0.0) / I;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = ZERO;
        for j in ((i + 1) % 2..n).step_by(2) {
            acc += gamma[j] * periodic_cot(p, z[i] - z[j]);
        }
        out.push((acc * w).conj());
    }
    Ok(out)
}

pub fn apply_b(
    grid: &SpectralGrid,
    z: &[Complex64],
    zt: &[Complex64],
    f: &[Complex64],
) -> Result<Vec<Complex64>> {
    grid.validate_complex(zt)?;
    grid.validate_complex(f)?;
    let ops = CurveOperators::new(grid, Curve::from_samples(grid, z)?)?;
    Ok(ops.apply_b(zt, f))
}

pub fn apply_j(grid: &SpectralGrid, z: &[Complex64], f: &[f64]) -> Result<Vec<f64>> {
    grid.validate(f)?;
    let curve = Curve::from_samples(grid, z)?;
    let floor = curve.za.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if floor < 1e-8 {
        return Err(Error::Domain(format!("degenerate z_alpha, min |z_alpha| = {floor:e}")));
    }
    let ops = CurveOperators::new(grid, curve)?;
    Ok(ops.apply_j(f))
}

pub fn m_field(grid: &SpectralGrid, z: &[Complex64], gamma: &[f64]) -> Result<Vec<Complex64>> {
    grid.validate(gamma)?;
    let ops = CurveOperators::new(grid, Curve::from_samples(grid, z)?)?;
    Ok(ops.m_field(gamma))
}
