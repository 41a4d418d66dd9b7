//! Homogeneous-modulus microelasticity in Fourier space.
//!
//! For a transformation strain `[e0]` the elastic energy of any arrangement of
//! inclusions is `W = (1/2|Ω|) Σ_{k≠0} B(k) |θ(k)|²` where `θ` is the Fourier
//! transform of the inclusion indicator and
//!
//! ```text
//! Z⁻¹_ij(k) = Σ_mn k_m λ_imnj k_n
//! Ψ(k)      = λ − λ k Z(k) k λ
//! B(k)      = [e0] Ψ(k) [e0]
//! ```
//!
//! `B` depends only on the direction of `k`. On a 2-D grid the wavevectors are
//! embedded as `(kx, ky, 0)`, i.e. the microstructure is columnar along z.
//!
//! The module also provides the square-lattice spring model, whose kernel is
//! periodic over the Brillouin zone instead of direction-only.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rayon::prelude::*;

use crate::elastic::{AppliedStress, StiffnessTensor, Tensor2, Tensor4, ZERO2};
use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::grid::{GridSpec, ScalarField};

fn norm3(k: &[f64; 3]) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

/// Z⁻¹ for an arbitrary fourth-rank array restricted to the first `dim` axes.
///
/// The contraction is `Σ_jn k_j T_ijmn k_n`, which equals the usual
/// `Σ k_m λ_imnj k_n` whenever `T` has minor symmetry.
pub fn acoustic_matrix_general(t: &Tensor4, k: &[f64; 3], dim: usize) -> Matrix3<f64> {
    let mut z = Matrix3::zeros();
    for i in 0..dim {
        for m in 0..dim {
            let mut s = 0.0;
            for j in 0..dim {
                for n in 0..dim {
                    s += k[j] * t.get(i, j, m, n) * k[n];
                }
            }
            z[(i, m)] = s;
        }
    }
    z
}

/// (Z⁻¹)_ij = Σ_mn k_m λ_imnj k_n.
pub fn acoustic_matrix(lambda: &StiffnessTensor, k: &[f64; 3]) -> Result<Matrix3<f64>> {
    if norm3(k) == 0.0 {
        return Err(Error::invalid("acoustic matrix needs k != 0"));
    }
    Ok(acoustic_matrix_general(lambda.as_tensor4(), k, 3))
}

fn invert_acoustic(zinv: &Matrix3<f64>, k: &[f64; 3], dim: usize) -> Result<Matrix3<f64>> {
    let singular = || Error::Singular {
        k: *k,
        what: "acoustic matrix".into(),
    };
    let mut z = Matrix3::zeros();
    if dim == 3 {
        z = zinv.cholesky().ok_or_else(singular)?.inverse();
    } else {
        let sub: Matrix2<f64> = zinv.fixed_view::<2, 2>(0, 0).into_owned();
        let inv = sub.cholesky().ok_or_else(singular)?.inverse();
        z.fixed_view_mut::<2, 2>(0, 0).copy_from(&inv);
    }
    Ok(z)
}

/// Ψ = T − T k Z k T for an arbitrary (major-symmetric) array on `dim` axes.
pub fn psi_general(t: &Tensor4, k: &[f64; 3], dim: usize) -> Result<Tensor4> {
    if norm3(k) == 0.0 {
        return Err(Error::invalid("psi needs k != 0"));
    }
    let z = invert_acoustic(&acoustic_matrix_general(t, k, dim), k, dim)?;
    // tk[a][b][i] = Σ_j T_abij k_j
    let mut tk = [[[0.0; 3]; 3]; 3];
    for a in 0..dim {
        for b in 0..dim {
            for i in 0..dim {
                tk[a][b][i] = (0..dim).map(|j| t.get(a, b, i, j) * k[j]).sum();
            }
        }
    }
    let mut out = Tensor4::zeros();
    for a in 0..dim {
        for b in 0..dim {
            for m in 0..dim {
                for n in 0..dim {
                    let mut s = 0.0;
                    for i in 0..dim {
                        for p in 0..dim {
                            s += tk[a][b][i] * z[(i, p)] * tk[m][n][p];
                        }
                    }
                    out.0[a][b][m][n] = t.get(a, b, m, n) - s;
                }
            }
        }
    }
    Ok(out)
}

pub fn psi(lambda: &StiffnessTensor, k: &[f64; 3]) -> Result<Tensor4> {
    psi_general(lambda.as_tensor4(), k, 3)
}

/// Evaluates `[e0] Ψ(k) [e0]` without forming Ψ: with σ0 = λ[e0] and
/// v_i = Σ_j σ0_ij k_j, B = [e0]:σ0 − v·Z·v.
#[derive(Debug, Clone, Copy)]
struct ContinuumB {
    lambda: StiffnessTensor,
    sigma0: Tensor2,
    self_energy: f64,
}

impl ContinuumB {
    fn new(lambda: &StiffnessTensor, de0: &Tensor2) -> Self {
        let sigma0 = lambda.as_tensor4().contract2(de0);
        let self_energy = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| de0[i][j] * sigma0[i][j])
            .sum();
        Self {
            lambda: *lambda,
            sigma0,
            self_energy,
        }
    }

    fn eval(&self, k: &[f64; 3]) -> Result<f64> {
        if self.self_energy == 0.0 {
            return Ok(0.0);
        }
        let zinv = acoustic_matrix_general(self.lambda.as_tensor4(), k, 3);
        let v = Vector3::from_fn(|i, _| (0..3).map(|j| self.sigma0[i][j] * k[j]).sum());
        let chol = zinv.cholesky().ok_or(Error::Singular {
            k: *k,
            what: "acoustic matrix".into(),
        })?;
        let zv = chol.solve(&v);
        Ok(self.self_energy - v.dot(&zv))
    }
}

/// Spring constants of the square-lattice model: longitudinal and transverse
/// nearest-neighbour springs and longitudinal next-nearest-neighbour springs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringSet {
    pub l_nn: f64,
    pub t_nn: f64,
    pub l_nnn: f64,
}

/// Continuum constants of a [`SpringSet`] in the long-wavelength limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringContinuum {
    pub c11: f64,
    /// Transverse acoustic slope, D_yy/k² along [10].
    pub c44: f64,
    /// C12 + C44 from the off-diagonal slope along [11].
    pub c12_plus_c44: f64,
}

struct Bond {
    d: [f64; 2],
    e: [f64; 2],
    len: f64,
    long: f64,
    trans: f64,
}

impl SpringSet {
    pub fn new(l_nn: f64, t_nn: f64, l_nnn: f64) -> Result<Self> {
        let ok = l_nn > 0.0 && t_nn >= 0.0 && l_nnn >= 0.0 && t_nn + l_nnn > 0.0;
        if !ok || ![l_nn, t_nn, l_nnn].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid(format!(
                "spring set needs L_nn > 0, T_nn >= 0, L_nnn >= 0 and T_nn + L_nnn > 0 (got {l_nn}, {t_nn}, {l_nnn})"
            )));
        }
        Ok(Self { l_nn, t_nn, l_nnn })
    }

    /// One entry per bond pair type (each site owns two NN and two NNN bonds).
    fn bonds(&self) -> [Bond; 4] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        [
            Bond {
                d: [1.0, 0.0],
                e: [1.0, 0.0],
                len: 1.0,
                long: self.l_nn,
                trans: self.t_nn,
            },
            Bond {
                d: [0.0, 1.0],
                e: [0.0, 1.0],
                len: 1.0,
                long: self.l_nn,
                trans: self.t_nn,
            },
            Bond {
                d: [1.0, 1.0],
                e: [r, r],
                len: 2f64.sqrt(),
                long: self.l_nnn,
                trans: 0.0,
            },
            Bond {
                d: [1.0, -1.0],
                e: [r, -r],
                len: 2f64.sqrt(),
                long: self.l_nnn,
                trans: 0.0,
            },
        ]
    }

    /// D(k) = Σ_b 4 sin²(k·d/2) (K_b ê êᵀ + T_b ê⊥ ê⊥ᵀ), lattice constant 1.
    pub fn dynamical_matrix(&self, k: [f64; 2]) -> Matrix2<f64> {
        let mut d = Matrix2::zeros();
        for b in self.bonds() {
            let s = (0.5 * (k[0] * b.d[0] + k[1] * b.d[1])).sin();
            let w = 4.0 * s * s;
            let e = Vector2::new(b.e[0], b.e[1]);
            let p = Vector2::new(-b.e[1], b.e[0]);
            d += w * (b.long * e * e.transpose() + b.trans * p * p.transpose());
        }
        d
    }

    /// Magnitude of the misfit force, f(k) = i·g(k) with
    /// g = Σ_b K_b s|d| 2 sin(k·d) ê.
    pub fn misfit_force(&self, k: [f64; 2], amp: f64) -> Vector2<f64> {
        let mut g = Vector2::zeros();
        for b in self.bonds() {
            let s = (k[0] * b.d[0] + k[1] * b.d[1]).sin();
            g += b.long * amp * b.len * 2.0 * s * Vector2::new(b.e[0], b.e[1]);
        }
        g
    }

    /// φ0(k) = Σ_b K_b s² |d|² 4 cos²(k·d/2), the energy of the unrelaxed lattice.
    pub fn unrelaxed(&self, k: [f64; 2], amp: f64) -> f64 {
        self.bonds()
            .iter()
            .map(|b| {
                let c = (0.5 * (k[0] * b.d[0] + k[1] * b.d[1])).cos();
                b.long * amp * amp * b.len * b.len * 4.0 * c * c
            })
            .sum()
    }

    /// 𝖡(k) = φ0 − f†D⁻¹f for k ≠ 0 (mod the reciprocal lattice).
    pub fn relaxed(&self, k: [f64; 2], amp: f64) -> Result<f64> {
        if amp == 0.0 {
            return Ok(0.0);
        }
        let d = self.dynamical_matrix(k);
        let g = self.misfit_force(k, amp);
        let chol = d.cholesky().ok_or(Error::Singular {
            k: [k[0], k[1], 0.0],
            what: "spring dynamical matrix".into(),
        })?;
        Ok(self.unrelaxed(k, amp) - g.dot(&chol.solve(&g)))
    }

    /// Closed-form long-wavelength constants. Numerically these are the
    /// acoustic slopes of D(k); the tests extract them independently.
    pub fn continuum(&self) -> SpringContinuum {
        SpringContinuum {
            c11: self.l_nn + self.l_nnn,
            c44: self.t_nn + self.l_nnn,
            c12_plus_c44: 2.0 * self.l_nnn,
        }
    }
}

/// Where a kernel table came from.
#[derive(Debug, Clone, Copy, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum KernelSource {
    Continuum { lambda: StiffnessTensor, de0: Tensor2 },
    Springs { springs: SpringSet, amp: f64 },
}

/// B(k) tabulated on the reciprocal lattice of a grid, B(0) = 0.
#[derive(Debug, Clone)]
pub struct ElasticKernel {
    grid: GridSpec,
    values: Vec<f64>,
    source: KernelSource,
}

impl ElasticKernel {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Table indexed like the DFT output.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> &KernelSource {
        &self.source
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Minimum over k ≠ 0.
    pub fn min_nonzero(&self) -> f64 {
        self.values.iter().skip(1).cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// B along a direction in the xy-plane. Continuum kernels are exact; a
    /// spring kernel is sampled at the shortest grid wavelength |k| = 2π/(n a).
    pub fn along(&self, theta: f64) -> Result<f64> {
        let dir = [theta.cos(), theta.sin(), 0.0];
        match &self.source {
            KernelSource::Continuum { lambda, de0 } => ContinuumB::new(lambda, de0).eval(&dir),
            KernelSource::Springs { springs, amp } => {
                let kmag = 2.0 * PI / self.grid.extents()[0] as f64;
                springs.relaxed([kmag * dir[0], kmag * dir[1]], *amp)
            }
        }
    }

    /// The field-format view of the table (k index layout, k = 0 at the origin).
    pub fn to_field(&self) -> ScalarField {
        ScalarField::new(self.grid, self.values.clone()).expect("table matches grid")
    }
}

/// Tabulates B(k) = [e0]Ψ(k)[e0] over every nonzero reciprocal vector.
pub fn build_kernel(grid: &GridSpec, lambda: &StiffnessTensor, de0: &Tensor2) -> Result<ElasticKernel> {
    let b = ContinuumB::new(lambda, de0);
    let values = (0..grid.sites())
        .into_par_iter()
        .map(|i| if i == 0 { Ok(0.0) } else { b.eval(&grid.wavevector(i)) })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ElasticKernel {
        grid: *grid,
        values,
        source: KernelSource::Continuum {
            lambda: *lambda,
            de0: *de0,
        },
    })
}

/// 𝖡(k) of the spring lattice over the first Brillouin zone of a square grid
/// with lattice constant 1. `amp` is the slope s of the natural bond length,
/// δl = s|d|(γ_p + γ_p').
pub fn spring_kernel(grid: &GridSpec, springs: &SpringSet, amp: f64) -> Result<ElasticKernel> {
    if grid.dim() != 2 {
        return Err(Error::invalid("spring kernel is defined on square (2-D) grids only"));
    }
    let values = (0..grid.sites())
        .into_par_iter()
        .map(|i| {
            if i == 0 {
                return Ok(0.0);
            }
            let m = grid.mode(i);
            let n = grid.extents();
            let k = [2.0 * PI * m[0] as f64 / n[0] as f64, 2.0 * PI * m[1] as f64 / n[1] as f64];
            springs.relaxed(k, amp)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ElasticKernel {
        grid: *grid,
        values,
        source: KernelSource::Springs { springs: *springs, amp },
    })
}

/// Σ_{k≠0} B(k) |ũ(k)|² with ũ the unnormalized DFT.
pub(crate) fn spectral_quadratic(plan: &FftPlan, kernel: &ElasticKernel, values: &[f64]) -> f64 {
    let t = plan.forward_real(values);
    t.iter().zip(kernel.values()).skip(1).map(|(c, b)| b * c.norm_sqr()).sum()
}

/// W = (1/2|Ω|) Σ_{k≠0} B(k) |θ(k)|² = (a^d / 2N) Σ B |DFT(θ)|².
///
/// Field values are used directly as the indicator θ (1 inside inclusions,
/// 0 in the matrix). For an occupation field γ ∈ {−1,+1} this gives
/// (1/2N) Σ B|γ̃|², i.e. four times the energy of the indicator (1+γ)/2,
/// which is the lattice-model convention.
pub fn elastic_energy(field: &ScalarField, kernel: &ElasticKernel) -> Result<f64> {
    field.grid().check_same(kernel.grid())?;
    let g = field.grid();
    let plan = FftPlan::new(g);
    let w = spectral_quadratic(&plan, kernel, field.values());
    Ok(w * g.cell_volume() / (2.0 * g.sites() as f64))
}

/// V_el(p) = (1/N) Σ_k B(k) e^{ik·p}, indexed by lattice offset.
pub fn vel_realspace(kernel: &ElasticKernel) -> ScalarField {
    let plan = FftPlan::new(kernel.grid());
    let spec = kernel
        .values()
        .iter()
        .map(|&b| rustfft::num_complex::Complex64::new(b, 0.0))
        .collect();
    ScalarField::new(*kernel.grid(), plan.inverse_real(spec)).expect("table matches grid")
}

/// Result of coupling a configuration to a uniform applied stress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExternalWork {
    pub energy: f64,
    /// ē = ē0 + e_ext
    pub mean_strain: Tensor2,
    pub applied_strain: Tensor2,
}

/// W_ext = −|Ω| Σ t_ij (ē0_ij + ½ e_ext_ij) with ē0 = φ[e0] (matrix reference)
/// and λ e_ext = t_ext.
pub fn external_work(field: &ScalarField, lambda: &StiffnessTensor, de0: &Tensor2, t_ext: &AppliedStress) -> Result<ExternalWork> {
    let e_ext = lambda.solve_strain(&t_ext.t_ext)?;
    let phi = field.mean();
    let mut mean_e0 = ZERO2;
    let mut mean_strain = ZERO2;
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            mean_e0[i][j] = phi * de0[i][j];
            mean_strain[i][j] = mean_e0[i][j] + e_ext[i][j];
            s += t_ext.t_ext[i][j] * (mean_e0[i][j] + 0.5 * e_ext[i][j]);
        }
    }
    Ok(ExternalWork {
        energy: -field.grid().volume() * s,
        mean_strain,
        applied_strain: e_ext,
    })
}
