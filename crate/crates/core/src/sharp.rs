//! Closed-form sharp-interface results for two isotropic phases.
//!
//! Phase α is the precipitate and β the matrix; stress-free strains are
//! measured from the matrix lattice. Every function here is pure.

use std::f64::consts::PI;

use crate::elastic::{young_poisson, CubicModuli, IsotropicModuli, StiffnessTensor};
use crate::error::{Error, Result};
use crate::kernel::psi;

/// Material and thermodynamic data for a precipitate/matrix pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePair {
    pub k_a: f64,
    pub g_a: f64,
    pub k_b: f64,
    pub g_b: f64,
    pub q_a: f64,
    pub q_b: f64,
    pub sigma: f64,
    pub diffusivity: f64,
    pub c_eq_a: f64,
    pub c_eq_b: f64,
    pub c0_a: f64,
    pub temperature: f64,
}

impl PhasePair {
    /// Elastic-only pair with placeholder thermodynamics, handy for the
    /// energy formulas that ignore them.
    pub fn elastic(k_a: f64, g_a: f64, k_b: f64, g_b: f64, q_a: f64, q_b: f64) -> Result<Self> {
        Self {
            k_a,
            g_a,
            k_b,
            g_b,
            q_a,
            q_b,
            sigma: 0.0,
            diffusivity: 1.0,
            c_eq_a: 1.0,
            c_eq_b: 0.0,
            c0_a: 1.0,
            temperature: 1.0,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let moduli = [self.k_a, self.g_a, self.k_b, self.g_b];
        if moduli.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::invalid(format!("phase moduli must be positive, got {moduli:?}")));
        }
        if !(0.0 <= self.c_eq_b && self.c_eq_b < self.c_eq_a && self.c_eq_a <= self.c0_a && self.c0_a <= 1.0) {
            return Err(Error::invalid(format!(
                "need 0 <= c_eq_b < c_eq_a <= c0_a <= 1, got {} {} {}",
                self.c_eq_b, self.c_eq_a, self.c0_a
            )));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::invalid("surface tension must be non-negative"));
        }
        if !(self.diffusivity > 0.0) || !(self.temperature > 0.0) {
            return Err(Error::invalid("diffusivity and temperature must be positive"));
        }
        Ok(self)
    }

    /// [q] = q_α − q_β
    pub fn dq(&self) -> f64 {
        self.q_a - self.q_b
    }

    /// [G] = G_α − G_β
    pub fn dg(&self) -> f64 {
        self.g_a - self.g_b
    }

    /// [c_eq] = c_eq_α − c_eq_β
    pub fn dc_eq(&self) -> f64 {
        self.c_eq_a - self.c_eq_b
    }

    /// Elastic energy per unit volume of an isolated coherent sphere,
    /// 18 K_α G_β [q]² / (3K_α + 4G_β).
    pub fn sphere_self_energy(&self) -> f64 {
        18.0 * self.k_a * self.g_b * self.dq().powi(2) / (3.0 * self.k_a + 4.0 * self.g_b)
    }

    /// Swaps the roles of the two phases.
    pub fn swapped(&self) -> Self {
        Self {
            k_a: self.k_b,
            g_a: self.g_b,
            k_b: self.k_a,
            g_b: self.g_a,
            q_a: self.q_b,
            q_b: self.q_a,
            ..*self
        }
    }
}

fn check_fraction(phi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&phi) {
        Ok(())
    } else {
        Err(Error::invalid(format!("volume fraction must lie in [0, 1], got {phi}")))
    }
}

/// K* of alternating plates.
pub fn k_star(p: &PhasePair, phi: f64) -> f64 {
    let inv = (1.0 - phi) / p.k_a + phi / p.k_b + 0.75 * ((1.0 - phi) / p.g_a + phi / p.g_b);
    1.0 / inv
}

/// K• of concentric spheres.
pub fn k_bullet(p: &PhasePair, phi: f64) -> f64 {
    let inv = (1.0 - phi) / p.k_a + phi / p.k_b + 0.75 / p.g_b;
    1.0 / inv
}

/// Mean elastic energy density of a stack of α and β plates, α fraction φ.
pub fn plate_energy(p: &PhasePair, phi: f64) -> Result<f64> {
    check_fraction(phi)?;
    Ok(4.5 * phi * (1.0 - phi) * k_star(p, phi) * p.dq().powi(2))
}

/// Mean elastic energy density of an α sphere in a β shell, α fraction φ.
pub fn sphere_energy(p: &PhasePair, phi: f64) -> Result<f64> {
    check_fraction(phi)?;
    Ok(4.5 * phi * (1.0 - phi) * k_bullet(p, phi) * p.dq().powi(2))
}

/// Energy per unit precipitate volume of an isolated plate (φ → 0).
pub fn plate_dilute_energy(p: &PhasePair) -> f64 {
    18.0 * p.g_a * p.k_a * p.dq().powi(2) / (3.0 * p.k_a + 4.0 * p.g_a)
}

/// Axial deviatoric part of the mean strain of a plate stack,
/// (3/4)(1/G_α − 1/G_β) K* [q].
pub fn plate_deviatoric_strain(p: &PhasePair, phi: f64) -> Result<f64> {
    check_fraction(phi)?;
    Ok(0.75 * (1.0 / p.g_a - 1.0 / p.g_b) * k_star(p, phi) * p.dq())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaftOrientation {
    Parallel,
    Perpendicular,
    Indeterminate,
}

/// Plates align parallel to the stress axis when t_axial·[q]·[G] > 0 and
/// perpendicular to it when the product is negative.
pub fn raft_orientation(t_axial: f64, dq: f64, dg: f64) -> RaftOrientation {
    let s = t_axial.signum() * dq.signum() * dg.signum();
    if t_axial == 0.0 || dq == 0.0 || dg == 0.0 {
        RaftOrientation::Indeterminate
    } else if s > 0.0 {
        RaftOrientation::Parallel
    } else {
        RaftOrientation::Perpendicular
    }
}

/// First-order-in-[G] interaction energy of two coherent spheres a distance
/// `d` apart, with Poisson's ratio taken from the matrix.
pub fn eshelby_pair(r1: f64, r2: f64, d: f64, p: &PhasePair) -> Result<f64> {
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::invalid("radii must be positive"));
    }
    if d <= r1 + r2 {
        return Err(Error::invalid(format!("spheres overlap: D = {d} <= R1 + R2 = {}", r1 + r2)));
    }
    let (_, nu) = young_poisson(p.k_b, p.g_b);
    let pref = 8.0 * PI / 81.0 * ((1.0 + nu) / (1.0 - nu)).powi(2) * p.dq().powi(2) * p.dg();
    let t1 = r1.powi(6) * r2.powi(3) / (d * d - r2 * r2).powi(3);
    let t2 = r2.powi(6) * r1.powi(3) / (d * d - r1 * r1).powi(3);
    Ok(pref * (t1 + t2))
}

/// Interfacial jump [π] = 2σ/R + elastic self-energy of a sphere.
pub fn interface_potential_jump(r: f64, p: &PhasePair) -> f64 {
    2.0 * p.sigma / r + p.sphere_self_energy()
}

/// Interfacial concentrations (c_α, c_β) of a sphere of radius `r`.
pub fn gibbs_thomson(r: f64, p: &PhasePair) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {r}")));
    }
    let x = interface_potential_jump(r, p) / (p.temperature * p.dc_eq());
    Ok((p.c_eq_a + (p.c0_a - p.c_eq_a) * x, p.c_eq_b + p.c_eq_b * x))
}

/// Critical radius from the far-field concentration:
/// 2σ/R* = T[c_eq](c∞ − c_eq_β)/c_eq_β − elastic self-energy.
/// Returns None when the right side is not positive (every sphere shrinks).
pub fn critical_radius(c_far: f64, p: &PhasePair) -> Option<f64> {
    let drive = p.temperature * p.dc_eq() * (c_far - p.c_eq_b) / p.c_eq_b - p.sphere_self_energy();
    (drive > 0.0 && p.sigma > 0.0).then(|| 2.0 * p.sigma / drive)
}

/// Inverse of [`critical_radius`]: the far-field concentration that makes
/// `r_star` stationary.
pub fn far_field_concentration(r_star: f64, p: &PhasePair) -> f64 {
    p.c_eq_b + p.c_eq_b * interface_potential_jump(r_star, p) / (p.temperature * p.dc_eq())
}

/// Rate prefactor 2σ D c_eq_β / (T [c_eq]).
pub fn lsw_prefactor(p: &PhasePair) -> f64 {
    2.0 * p.sigma * p.diffusivity * p.c_eq_b / (p.temperature * p.dc_eq())
}

/// dR/dt = (2σ D c_eq_β / (T[c_eq] R)) (1/R* − 1/R)
pub fn lsw_rate(r: f64, r_star: f64, p: &PhasePair) -> f64 {
    lsw_prefactor(p) / r * (1.0 / r_star - 1.0 / r)
}

/// f'' + 2η²·18KG/(3K+4G); positive means the uniform state is stable.
pub fn stability_margin_isotropic(f2: f64, eta: f64, m: &IsotropicModuli) -> f64 {
    f2 + 2.0 * eta * eta * m.cahn_modulus()
}

pub fn stability_isotropic(f2: f64, eta: f64, m: &IsotropicModuli) -> bool {
    stability_margin_isotropic(f2, eta, m) > 0.0
}

fn dilatational_trace(lambda: &StiffnessTensor, n: &[f64; 3]) -> f64 {
    psi(lambda, n).map(|p| p.double_trace()).unwrap_or(f64::INFINITY)
}

/// Minimum over directions of Σ_im Ψ_iimm(n).
///
/// Samples a Fibonacci sphere of 2·10⁴ directions together with every
/// ⟨100⟩, ⟨110⟩ and ⟨111⟩ axis, then polishes the best sample with a
/// shrinking local search.
pub fn min_dilatational_trace(lambda: &StiffnessTensor) -> (f64, [f64; 3]) {
    let mut cands: Vec<[f64; 3]> = Vec::new();
    for a in [-1.0, 0.0, 1.0] {
        for b in [-1.0, 0.0, 1.0] {
            for c in [-1.0, 0.0, 1.0] {
                if a != 0.0 || b != 0.0 || c != 0.0 {
                    cands.push([a, b, c]);
                }
            }
        }
    }
    let n = 20_000;
    let golden = PI * (3.0 - 5f64.sqrt());
    for i in 0..n {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let t = golden * i as f64;
        cands.push([r * t.cos(), r * t.sin(), z]);
    }
    let unit = |v: [f64; 3]| {
        let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / l, v[1] / l, v[2] / l]
    };
    let (mut best, mut dir) = cands
        .iter()
        .map(|&v| (dilatational_trace(lambda, &v), unit(v)))
        .fold((f64::INFINITY, [1.0, 0.0, 0.0]), |acc, x| if x.0 < acc.0 { x } else { acc });
    let mut step = 0.02;
    while step > 1e-9 {
        let mut improved = false;
        for axis in 0..3 {
            for sgn in [-1.0, 1.0] {
                let mut v = dir;
                v[axis] += sgn * step;
                let v = unit(v);
                let val = dilatational_trace(lambda, &v);
                if val < best {
                    best = val;
                    dir = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, dir)
}

/// f'' + η²·min_n Σ_im Ψ_iimm(n). On isotropic input this equals
/// [`stability_margin_isotropic`], since Σ Ψ_iimm = 36KG/(3K+4G) there.
pub fn stability_margin_anisotropic(f2: f64, eta: f64, lambda: &StiffnessTensor) -> f64 {
    f2 + eta * eta * min_dilatational_trace(lambda).0
}

pub fn stability_anisotropic(f2: f64, eta: f64, lambda: &StiffnessTensor) -> bool {
    stability_margin_anisotropic(f2, eta, lambda) > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlateNormal {
    Axis100,
    Diagonal111,
}

impl PlateNormal {
    /// Classifies a direction; anything other than a cube axis or body
    /// diagonal is rejected.
    pub fn from_vector(n: [f64; 3]) -> Result<Self> {
        let a: Vec<f64> = n.iter().map(|v| v.abs()).collect();
        let max = a.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return Err(Error::invalid("plate normal must be nonzero"));
        }
        let nonzero: Vec<f64> = a.iter().cloned().filter(|&v| v > 1e-12 * max).collect();
        match nonzero.len() {
            1 => Ok(Self::Axis100),
            3 if nonzero.iter().all(|&v| (v - max).abs() <= 1e-12 * max) => Ok(Self::Diagonal111),
            _ => Err(Error::invalid(format!("unsupported plate normal {n:?}; use <100> or <111>"))),
        }
    }
}

/// Effective isotropic (K, G) for a plate in a cubic crystal.
pub fn cubic_plate_moduli(c: &CubicModuli, normal: PlateNormal) -> (f64, f64) {
    let k = (c.c11 + 2.0 * c.c12) / 3.0;
    let g = match normal {
        PlateNormal::Axis100 => (c.c11 - c.c12) / 2.0,
        PlateNormal::Diagonal111 => c.c44,
    };
    (k, g)
}
