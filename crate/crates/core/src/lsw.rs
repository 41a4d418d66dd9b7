//! Mean-field (LSW) coarsening of an ensemble of spheres.
//!
//! Each radius follows `dR/dt = (A/R)(1/R* − 1/R)` with a common critical
//! radius `R*` fixed by conservation of Σ R³. Integration is explicit in
//! u = R³, where the conservation law is linear and therefore exact under
//! Euler steps.

use rand::Rng;

use crate::error::{Error, Result};
use crate::sharp::{far_field_concentration, lsw_prefactor, PhasePair};

/// Radii of the surviving precipitates and the far-field concentration.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecipitateEnsemble {
    pub radii: Vec<f64>,
    pub c_far: f64,
}

impl PrecipitateEnsemble {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::invalid("ensemble radii must be positive and non-empty"));
        }
        Ok(Self { radii, c_far: f64::NAN })
    }

    /// Σ (4π/3) R³
    pub fn total_volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.radii.iter().map(|r| r.powi(3)).sum::<f64>()
    }

    pub fn mean_radius(&self) -> f64 {
        self.radii.iter().sum::<f64>() / self.radii.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LswSample {
    pub t: f64,
    pub mean_radius: f64,
    pub count: usize,
    pub r_star: f64,
    pub c_far: f64,
    /// Relative change of Σ R³ over the step, before deletions.
    pub volume_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LswOptions {
    /// Upper bound on dt in units of R*³/(3A).
    pub accuracy: f64,
    /// Radii below this fraction of the mean radius are removed.
    pub deletion_floor: f64,
    /// Record one sample every this many steps.
    pub sample_every: usize,
}

impl Default for LswOptions {
    fn default() -> Self {
        Self {
            accuracy: 0.01,
            deletion_floor: 1e-6,
            sample_every: 1,
        }
    }
}

/// Solves Σ R_i² dR_i/dt = 0 for R* by bisection on a bracket around the
/// radius range. The root always equals the mean radius; the bracketed
/// solve keeps the closure general for rate laws without that shortcut.
pub fn solve_critical_radius(radii: &[f64]) -> Result<f64> {
    // Σ R² (A/R)(1/R* − 1/R) ∝ Σ (R/R* − 1)
    let g = |rs: f64| radii.iter().map(|&r| r / rs - 1.0).sum::<f64>();
    let lo0 = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi0 = radii.iter().cloned().fold(0.0, f64::max);
    let (mut lo, mut hi) = (lo0 * (1.0 - 1e-12), hi0 * (1.0 + 1e-12));
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo >= 0.0 && ghi <= 0.0) {
        return Err(Error::Numerical(format!(
            "critical radius not bracketed in [{lo}, {hi}] (g = {glo}, {ghi})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Stationary LSW size distribution in ρ = R/R*, supported on [0, 3/2).
pub fn lsw_stationary_density(rho: f64) -> f64 {
    if !(0.0..1.5).contains(&rho) {
        return 0.0;
    }
    rho * rho * (3.0 / (3.0 + rho)).powf(7.0 / 3.0) * (1.5 / (1.5 - rho)).powf(11.0 / 3.0) * (-rho / (1.5 - rho)).exp()
}

/// `n` radii drawn from the stationary LSW distribution with critical
/// radius `r_star`, by rejection under the density's maximum (≈ 4.84).
pub fn lsw_stationary_radii(n: usize, r_star: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let rho = rng.gen_range(1e-6..1.5);
        if rng.gen_range(0.0..4.9) < lsw_stationary_density(rho) {
            out.push(rho * r_star);
        }
    }
    out
}

/// Advances the ensemble until `t_end` or until `max_steps` steps.
///
/// The step is limited by the accuracy bound and by the earliest
/// extinction time, so a vanishing precipitate lands exactly on R = 0 and is
/// removed without losing volume.
pub fn lsw_evolve(ens: &mut PrecipitateEnsemble, p: &PhasePair, t_end: f64, max_steps: usize, opts: &LswOptions) -> Result<Vec<LswSample>> {
    let a = lsw_prefactor(p);
    if !(a > 0.0) {
        return Err(Error::invalid("LSW prefactor 2σDc_eq/(T[c_eq]) must be positive"));
    }
    let mut u: Vec<f64> = ens.radii.iter().map(|r| r.powi(3)).collect();
    let mut t = 0.0;
    let mut out = Vec::new();
    let mut step = 0;
    let record = |t: f64, radii: &[f64], rs: f64, drift: f64, out: &mut Vec<LswSample>| {
        out.push(LswSample {
            t,
            mean_radius: radii.iter().sum::<f64>() / radii.len() as f64,
            count: radii.len(),
            r_star: rs,
            c_far: far_field_concentration(rs, p),
            volume_drift: drift,
        });
    };
    let rs0 = solve_critical_radius(&ens.radii)?;
    ens.c_far = far_field_concentration(rs0, p);
    record(0.0, &ens.radii, rs0, 0.0, &mut out);
    while t < t_end && step < max_steps && ens.radii.len() > 1 {
        let rs = solve_critical_radius(&ens.radii)?;
        let rates: Vec<f64> = ens.radii.iter().map(|&r| 3.0 * a * (r / rs - 1.0)).collect();
        let mut dt = opts.accuracy * rs.powi(3) / (3.0 * a);
        let mut first_out = None;
        for (i, (&ui, &du)) in u.iter().zip(&rates).enumerate() {
            if du < 0.0 {
                let te = ui / -du;
                if te <= dt {
                    dt = te;
                    first_out = Some(i);
                }
            }
        }
        dt = dt.min(t_end - t).max(0.0);
        let before: f64 = u.iter().sum();
        for (ui, du) in u.iter_mut().zip(&rates) {
            *ui += dt * du;
        }
        let after: f64 = u.iter().sum();
        let drift = (after - before) / before;
        if let Some(i) = first_out {
            if t + dt < t_end || dt == 0.0 {
                u[i] = 0.0;
            }
        }
        t += dt;
        step += 1;
        let mut radii: Vec<f64> = u.iter().map(|&x| x.max(0.0).cbrt()).collect();
        let mean = radii.iter().sum::<f64>() / radii.len() as f64;
        let floor = opts.deletion_floor * mean;
        let keep: Vec<bool> = radii.iter().map(|&r| r > floor).collect();
        let mut k = keep.iter();
        radii.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        u.retain(|_| *k.next().unwrap());
        ens.radii = radii;
        if ens.radii.is_empty() {
            return Err(Error::Numerical("every precipitate dissolved".into()));
        }
        let rs_new = solve_critical_radius(&ens.radii)?;
        ens.c_far = far_field_concentration(rs_new, p);
        if step % opts.sample_every.max(1) == 0 || t >= t_end {
            record(t, &ens.radii, rs_new, drift, &mut out);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_distribution_has_unit_mean() {
        let peak = (1..15_000).map(|i| lsw_stationary_density(i as f64 / 1e4)).fold(0.0, f64::max);
        assert!(peak < 4.9 && peak > 4.8);
        // R* equals the mean radius in the self-similar state
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let r = lsw_stationary_radii(200_000, 2.0, &mut rng);
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        assert!((mean / 2.0 - 1.0).abs() < 5e-3, "{mean}");
        assert!(r.iter().all(|&x| x > 0.0 && x < 3.0));
    }

    fn pair() -> PhasePair {
        PhasePair {
            sigma: 1.0,
            diffusivity: 1.0,
            c_eq_a: 0.9,
            c_eq_b: 0.1,
            c0_a: 1.0,
            temperature: 0.8,
            ..PhasePair::elastic(1.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap()
        }
    }

    #[test]
    fn critical_radius_is_mean() {
        let r = [0.5, 1.0, 2.5, 0.7];
        let rs = solve_critical_radius(&r).unwrap();
        assert!((rs - 1.175).abs() < 1e-12);
    }

    #[test]
    fn single_precipitate_is_stationary() {
        let mut e = PrecipitateEnsemble::new(vec![1.3]).unwrap();
        let s = lsw_evolve(&mut e, &pair(), 10.0, 100, &LswOptions::default()).unwrap();
        assert_eq!(e.radii, vec![1.3]);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn larger_of_two_wins() {
        let mut e = PrecipitateEnsemble::new(vec![1.0, 0.8]).unwrap();
        let v0 = e.total_volume();
        let s = lsw_evolve(&mut e, &pair(), 1e9, 1_000_000, &LswOptions::default()).unwrap();
        assert_eq!(e.radii.len(), 1);
        assert!(e.radii[0] > 1.0);
        assert!((e.total_volume() - v0).abs() < 1e-9 * v0);
        assert!(s.windows(2).all(|w| w[1].t >= w[0].t));
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(PrecipitateEnsemble::new(vec![]).is_err());
        assert!(PrecipitateEnsemble::new(vec![1.0, -1.0]).is_err());
    }
}
