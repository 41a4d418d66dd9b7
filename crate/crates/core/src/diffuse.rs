//! Elastic Cahn-Hilliard dynamics on a periodic grid.
//!
//! The free energy is
//!
//! ```text
//! F = a^d Σ_x [ f(c) + ½χ Σ_d ((c(x+e_d) − c(x))/a)² ] + (a^d/2N) Σ_{k≠0} V̂(k) |c̃(k)|²
//! f(c) = μ_eq c + 2T0 c(1−c) + T (c ln c + (1−c) ln(1−c))
//! ```
//!
//! with `V̂(k) = b Ψ(k) b` for the Vegard slope `b` (η² Σ Ψ_iimm when
//! dilatational). The forward difference makes the functional gradient of
//! the gradient term exactly `−χ Δ_h c` with the (2d+1)-point Laplacian,
//! whose symbol is `k_eff² = Σ_d (4/a²) sin²(k_d a/2)`.
//!
//! Read on a lattice with a = 1 the same stepper is the discrete
//! (Khachaturyan) kinetic equation with nearest-neighbour gradient coupling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::elastic::{MisfitSpec, StiffnessTensor};
use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::grid::{GridSpec, ScalarField};
use crate::kernel::{build_kernel, ElasticKernel};

/// Logarithms in f are evaluated on c clamped to [ε, 1 − ε].
pub const LOG_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CHParams {
    pub chi: f64,
    pub temperature: f64,
    pub t0: f64,
    pub mu_eq: f64,
    pub mobility: f64,
    pub dt: f64,
    pub noise_amp: f64,
    pub seed: u64,
}

impl CHParams {
    pub fn validated(self) -> Result<Self> {
        if !(self.chi > 0.0) {
            return Err(Error::invalid(format!("chi must be positive, got {}", self.chi)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.mobility > 0.0) {
            return Err(Error::invalid(format!("mobility must be positive, got {}", self.mobility)));
        }
        if !(self.noise_amp >= 0.0) {
            return Err(Error::invalid("noise amplitude must be non-negative"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::invalid("temperature must be positive"));
        }
        Ok(self)
    }

    /// M = D c̄(1 − c̄)/T, held constant over the field.
    pub fn mobility_from_diffusivity(d: f64, cbar: f64, temperature: f64) -> f64 {
        d * cbar * (1.0 - cbar) / temperature
    }
}

fn guard(c: f64) -> f64 {
    c.clamp(LOG_GUARD, 1.0 - LOG_GUARD)
}

/// Mean-field free energy density of the binary alloy (k_B = 1).
pub fn bulk_f(c: f64, p: &CHParams) -> f64 {
    let c = guard(c);
    p.mu_eq * c + 2.0 * p.t0 * c * (1.0 - c) + p.temperature * (c * c.ln() + (1.0 - c) * (1.0 - c).ln())
}

pub fn bulk_df(c: f64, p: &CHParams) -> f64 {
    let c = guard(c);
    p.mu_eq + 2.0 * p.t0 * (1.0 - 2.0 * c) + p.temperature * (c / (1.0 - c)).ln()
}

/// f'' = −4T0 + T/(c(1−c)); f''(½) = 4(T − T0).
pub fn bulk_d2f(c: f64, p: &CHParams) -> f64 {
    let c = guard(c);
    -4.0 * p.t0 + p.temperature / (c * (1.0 - c))
}

/// Coexisting compositions of the symmetric mean-field model (μ_eq = 0),
/// or None above the critical temperature T0.
pub fn binodal(p: &CHParams) -> Option<(f64, f64)> {
    if p.temperature >= p.t0 {
        return None;
    }
    // f' is odd about ½, so solve f'(c) = 0 on (0, ½) by bisection
    let q = CHParams { mu_eq: 0.0, ..*p };
    let (mut lo, mut hi) = (LOG_GUARD, 0.5 - 1e-12);
    if bulk_df(lo, &q) > 0.0 {
        return None;
    }
    // f' < 0 near 0 and f' > 0 just below ½ in the two-phase region
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bulk_df(mid, &q) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    Some((c, 1.0 - c))
}

/// V̂ for a Vegard slope; None when the misfit vanishes.
pub fn ch_kernel(grid: &GridSpec, lambda: &StiffnessTensor, misfit: &MisfitSpec) -> Result<Option<ElasticKernel>> {
    let k = build_kernel(grid, lambda, &misfit.slope())?;
    Ok((!k.is_zero()).then_some(k))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergy {
    pub bulk: f64,
    pub gradient: f64,
    pub elastic: f64,
}

impl FreeEnergy {
    pub fn total(&self) -> f64 {
        self.bulk + self.gradient + self.elastic
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub energy: FreeEnergy,
}

/// Concentration field plus the stepper's cached spectral data.
pub struct CHState {
    c: ScalarField,
    c_hat: Vec<Complex64>,
    t: f64,
    steps: u64,
    kernel: Option<ElasticKernel>,
    plan: FftPlan,
    k2: Vec<f64>,
    rng: ChaCha8Rng,
    mass: Complex64,
    pub energy_series: Vec<EnergySample>,
}

impl std::fmt::Debug for CHState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CHState")
            .field("grid", self.c.grid())
            .field("t", &self.t)
            .field("steps", &self.steps)
            .field("elastic", &self.kernel.is_some())
            .finish()
    }
}

impl CHState {
    pub fn new(c: ScalarField, kernel: Option<ElasticKernel>, seed: u64) -> Result<Self> {
        if let Some(k) = &kernel {
            c.grid().check_same(k.grid())?;
        }
        let g = *c.grid();
        let plan = FftPlan::new(&g);
        let c_hat = plan.forward_real(c.values());
        let k2 = (0..g.sites()).map(|i| g.laplacian_symbol(i)).collect();
        let mass = c_hat[0];
        Ok(Self {
            c,
            c_hat,
            t: 0.0,
            steps: 0,
            kernel,
            plan,
            k2,
            rng: ChaCha8Rng::seed_from_u64(seed),
            mass,
            energy_series: Vec::new(),
        })
    }

    pub fn field(&self) -> &ScalarField {
        &self.c
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn kernel(&self) -> Option<&ElasticKernel> {
        self.kernel.as_ref()
    }

    pub fn grid(&self) -> &GridSpec {
        self.c.grid()
    }

    /// Appends (t, F) to the energy series and returns F.
    pub fn record_energy(&mut self, p: &CHParams) -> FreeEnergy {
        let e = total_free_energy(self, p);
        self.energy_series.push(EnergySample { t: self.t, energy: e });
        e
    }
}

/// Random initial state c̄ + ζ with ζ uniform in [−δ, δ], shifted so that
/// the mean is exactly c̄ up to rounding.
pub fn initial_condition(grid: &GridSpec, cbar: f64, delta: f64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-delta, delta);
    let mut z: Vec<f64> = (0..grid.sites()).map(|_| dist.sample(&mut rng)).collect();
    let m = z.iter().sum::<f64>() / z.len() as f64;
    z.iter_mut().for_each(|v| *v = cbar + (*v - m));
    ScalarField::new(*grid, z).expect("sized to grid")
}

/// Bulk, gradient and elastic parts of F.
pub fn total_free_energy(s: &CHState, p: &CHParams) -> FreeEnergy {
    let g = s.grid();
    let vol = g.cell_volume();
    let a2 = g.spacing() * g.spacing();
    let c = s.c.values();
    let dims = g.dim();
    // fixed chunks summed in order, so the result does not depend on the
    // thread count
    const BLOCK: usize = 4096;
    let n = g.sites();
    let partial: Vec<(f64, f64)> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = (0.0, 0.0);
            for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
                let mut gsum = 0.0;
                for d in 0..dims {
                    let mut off = [0isize; 3];
                    off[d] = 1;
                    let dc = c[g.shifted(i, off)] - c[i];
                    gsum += dc * dc / a2;
                }
                acc.0 += bulk_f(c[i], p);
                acc.1 += 0.5 * p.chi * gsum;
            }
            acc
        })
        .collect();
    let (bulk, grad) = partial.iter().fold((0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    let elastic = match &s.kernel {
        Some(k) => {
            let w: f64 = s.c_hat.iter().zip(k.values()).skip(1).map(|(z, b)| b * z.norm_sqr()).sum();
            vol * w / (2.0 * g.sites() as f64)
        }
        None => 0.0,
    };
    FreeEnergy {
        bulk: vol * bulk,
        gradient: vol * grad,
        elastic,
    }
}

/// μ̂ = f'(c) + V_el ⋆ (c − c̄); the gradient term is left to the stepper.
pub fn diffusion_potential(s: &CHState, p: &CHParams) -> ScalarField {
    let mut mu: Vec<f64> = s.c.values().par_iter().map(|&c| bulk_df(c, p)).collect();
    if let Some(k) = &s.kernel {
        let conv: Vec<Complex64> = s.c_hat.iter().zip(k.values()).map(|(z, b)| z * b).collect();
        let conv = s.plan.inverse_real(conv);
        mu.iter_mut().zip(conv).for_each(|(m, v)| *m += v);
    }
    ScalarField::new(*s.grid(), mu).expect("sized to grid")
}

/// Full functional gradient of F per unit volume, μ̂ − χ Δ_h c.
pub fn chemical_potential(s: &CHState, p: &CHParams) -> ScalarField {
    let g = s.grid();
    let mut mu = diffusion_potential(s, p);
    let c = s.c.values();
    let a2 = g.spacing() * g.spacing();
    let lap: Vec<f64> = (0..g.sites())
        .map(|i| {
            let mut l = 0.0;
            for d in 0..g.dim() {
                let mut off = [0isize; 3];
                off[d] = 1;
                l += c[g.shifted(i, off)] + c[g.shifted(i, off.map(|x| -x))] - 2.0 * c[i];
            }
            l / a2
        })
        .collect();
    mu.values_mut().iter_mut().zip(lap).for_each(|(m, l)| *m -= p.chi * l);
    mu
}

/// Conserved noise: divergence of a white random flux on the grid bonds,
/// returned in Fourier space with the k = 0 mode removed.
fn noise_divergence(s: &mut CHState, amp: f64) -> Vec<Complex64> {
    let g = *s.grid();
    let a = g.spacing();
    let mut div = vec![0.0; g.sites()];
    for d in 0..g.dim() {
        let flux: Vec<f64> = (0..g.sites()).map(|_| StandardNormal.sample(&mut s.rng)).collect();
        let mut back = [0isize; 3];
        back[d] = -1;
        for i in 0..g.sites() {
            div[i] -= (flux[i] - flux[g.shifted(i, back)]) / a;
        }
    }
    let mut hat = s.plan.forward_real(&div);
    hat[0] = Complex64::new(0.0, 0.0);
    hat.iter_mut().for_each(|z| *z *= amp);
    hat
}

/// One semi-implicit step: f' and the elastic convolution explicit, the
/// χk⁴ term implicit, the k = 0 mode untouched.
pub fn step_ch(s: &mut CHState, p: &CHParams) -> Result<()> {
    let mut g_hat = {
        let df: Vec<f64> = s.c.values().par_iter().map(|&c| bulk_df(c, p)).collect();
        s.plan.forward_real(&df)
    };
    let noise = (p.noise_amp > 0.0).then(|| noise_divergence(s, p.noise_amp * p.dt.sqrt()));
    let dtm = p.dt * p.mobility;
    let kern = s.kernel.as_ref().map(|k| k.values());
    for i in 1..s.c_hat.len() {
        let k2 = s.k2[i];
        let mut rhs = g_hat[i];
        if let Some(v) = kern {
            rhs += s.c_hat[i] * v[i];
        }
        let mut num = s.c_hat[i] - rhs * (dtm * k2);
        if let Some(n) = &noise {
            num += n[i];
        }
        g_hat[i] = num / (1.0 + dtm * p.chi * k2 * k2);
    }
    g_hat[0] = s.mass;
    s.c_hat.copy_from_slice(&g_hat);
    let c = s.plan.inverse_real(g_hat);
    s.steps += 1;
    s.t += p.dt;
    let blown = c.iter().any(|v| !v.is_finite() || *v < -1.0 || *v > 2.0);
    s.c.values_mut().copy_from_slice(&c);
    if blown {
        let mu = diffusion_potential(s, p);
        let max_mu = mu.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        return Err(Error::Numerical(format!(
            "Cahn-Hilliard step {} left the physical range (max |mu| = {max_mu:e}); reduce dt",
            s.steps
        )));
    }
    Ok(())
}

/// Runs `steps` steps, calling `observe` after every `every` steps (and
/// once before the first step).
pub fn run_ch(s: &mut CHState, p: &CHParams, steps: u64, every: u64, mut observe: impl FnMut(&mut CHState) -> Result<()>) -> Result<()> {
    observe(s)?;
    for n in 1..=steps {
        step_ch(s, p)?;
        if every > 0 && n % every == 0 {
            observe(s)?;
        }
    }
    Ok(())
}

/// Largest dt for which every mode with f'' + V̂ + χk² > 0 has a linearized
/// amplification factor above −1 (so no stable mode oscillates or grows),
/// given the largest curvature `f2_max` and kernel value `vmax` in play.
///
/// The factor is (1 − dt M k² L)/(1 + dt M χ k⁴) with L = f2_max + vmax; it
/// stays above −1 while dt M (k² L − χ k⁴) < 2.
pub fn stable_dt(grid: &GridSpec, p: &CHParams, f2_max: f64, vmax: f64) -> f64 {
    let l = f2_max + vmax;
    let kmax2 = grid.dim() as f64 * 4.0 / (grid.spacing() * grid.spacing());
    let k2 = (l / (2.0 * p.chi)).clamp(0.0, kmax2);
    let h = k2 * l - p.chi * k2 * k2;
    if h <= 0.0 {
        f64::INFINITY
    } else {
        2.0 / (p.mobility * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> CHParams {
        CHParams {
            chi: 2.0,
            temperature: 0.75,
            t0: 1.0,
            mu_eq: 0.0,
            mobility: 1.0 / 3.0,
            dt: 0.1,
            noise_amp: 0.0,
            seed: 1,
        }
    }

    #[test]
    fn bulk_values() {
        let p = params();
        assert_relative_eq!(bulk_f(0.5, &p), 0.5 - 0.75 * 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(bulk_d2f(0.5, &p), 4.0 * (0.75 - 1.0), epsilon = 1e-14);
        let q = CHParams { mu_eq: 0.3, ..p };
        for c in [0.1, 0.23, 0.4] {
            let l = bulk_f(c, &q) - 0.3 * c;
            let r = bulk_f(1.0 - c, &q) - 0.3 * (1.0 - c);
            assert_relative_eq!(l, r, epsilon = 1e-14);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = CHParams { mu_eq: -0.2, ..params() };
        let h = 1e-6;
        for c in [0.05, 0.3, 0.5, 0.77] {
            let fd = (bulk_f(c + h, &p) - bulk_f(c - h, &p)) / (2.0 * h);
            assert_relative_eq!(bulk_df(c, &p), fd, epsilon = 1e-8);
            let fd2 = (bulk_df(c + h, &p) - bulk_df(c - h, &p)) / (2.0 * h);
            assert_relative_eq!(bulk_d2f(c, &p), fd2, max_relative = 1e-7);
        }
    }

    #[test]
    fn binodal_is_a_common_tangent() {
        let p = params();
        let (lo, hi) = binodal(&p).unwrap();
        assert!(lo > 0.05 && lo < 0.15);
        assert!(bulk_df(lo, &p).abs() < 1e-10);
        assert_relative_eq!(lo + hi, 1.0, epsilon = 1e-15);
        assert!(binodal(&CHParams { temperature: 1.2, ..p }).is_none());
    }

    #[test]
    fn uniform_state_is_a_fixed_point() {
        let g = GridSpec::square(16).unwrap();
        let mut s = CHState::new(ScalarField::constant(g, 0.4), None, 0).unwrap();
        for _ in 0..20 {
            step_ch(&mut s, &params()).unwrap();
        }
        assert!(s.field().values().iter().all(|&v| (v - 0.4).abs() < 1e-14));
    }

    #[test]
    fn mass_conserved_with_noise() {
        let g = GridSpec::square(16).unwrap();
        let c = initial_condition(&g, 0.3, 0.01, 3);
        let m0 = c.mean();
        let mut s = CHState::new(c, None, 9).unwrap();
        let p = CHParams {
            noise_amp: 0.01,
            ..params()
        };
        for _ in 0..500 {
            step_ch(&mut s, &p).unwrap();
        }
        assert!((s.field().mean() - m0).abs() < 1e-12);
    }

    #[test]
    fn stable_dt_bounds_the_amplification() {
        let g = GridSpec::square(64).unwrap();
        let p = params();
        let f2 = 6.0;
        let dt = stable_dt(&g, &p, f2, 0.0);
        for i in 1..g.sites() {
            let k2 = g.laplacian_symbol(i);
            let dtm = 0.99 * dt * p.mobility;
            let amp = (1.0 - dtm * k2 * f2) / (1.0 + dtm * p.chi * k2 * k2);
            assert!(amp > -1.0 && amp < 1.0);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(CHParams { chi: 0.0, ..params() }.validated().is_err());
        assert!(CHParams { dt: -1.0, ..params() }.validated().is_err());
        assert!(CHParams {
            noise_amp: -0.1,
            ..params()
        }
        .validated()
        .is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let g = GridSpec::square(8).unwrap();
        let c = initial_condition(&g, 0.5, 0.3, 1);
        let mut s = CHState::new(c, None, 0).unwrap();
        let p = CHParams {
            dt: 1e4,
            chi: 1e-3,
            ..params()
        };
        let mut err = None;
        for _ in 0..50 {
            if let Err(e) = step_ch(&mut s, &p) {
                err = Some(e);
                break;
            }
        }
        let e = err.expect("huge dt should blow up");
        assert_eq!(e.exit_code(), 2);
    }
}
