use misfit_core::elastic::{CubicModuli, IsotropicModuli};
use misfit_core::lsw::*;
use misfit_core::sharp::*;
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Isotropic energy density of a diagonal strain mismatch (d, d, d33).
fn w_iso(k: f64, g: f64, d: f64, d33: f64) -> f64 {
    let tr = 2.0 * d + d33;
    0.5 * ((k - 2.0 * g / 3.0) * tr * tr + 2.0 * g * (2.0 * d * d + d33 * d33))
}

/// Mean energy of a coherent α/β laminate (α fraction φ, layer normal z),
/// minimized over the shared in-plane strain and both normal strains.
fn laminate_minimum(p: &PhasePair, phi: f64) -> f64 {
    let w = |x: &Vector3<f64>| {
        phi * w_iso(p.k_a, p.g_a, x[0] - p.q_a, x[1] - p.q_a) + (1.0 - phi) * w_iso(p.k_b, p.g_b, x[0] - p.q_b, x[2] - p.q_b)
    };
    // exact for a quadratic: Hessian and gradient from unit-step differences
    let e = |i: usize| Vector3::from_fn(|r, _| if r == i { 1.0 } else { 0.0 });
    let mut h = Matrix3::zeros();
    let mut grad = Vector3::zeros();
    for i in 0..3 {
        grad[i] = 0.5 * (w(&e(i)) - w(&-e(i)));
        for j in 0..3 {
            h[(i, j)] = 0.25 * (w(&(e(i) + e(j))) - w(&(e(i) - e(j))) - w(&(-e(i) + e(j))) + w(&(-e(i) - e(j))));
        }
    }
    let x = -h.lu().solve(&grad).unwrap();
    w(&x)
}

fn pair(k_a: f64, g_a: f64, k_b: f64, g_b: f64, q_a: f64, q_b: f64) -> PhasePair {
    PhasePair::elastic(k_a, g_a, k_b, g_b, q_a, q_b).unwrap()
}

#[test]
fn plate_energy_is_the_laminate_minimum() {
    let p = pair(1.0, 1.0, 1.0, 1.0, 0.01, 0.0);
    let lam = laminate_minimum(&p, 0.5);
    assert!((lam - 6.428571428571429e-5).abs() < 1e-16);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let p = pair(
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.2..5.0),
            rng.gen_range(-0.05..0.05),
            rng.gen_range(-0.05..0.05),
        );
        let phi = rng.gen_range(0.0..1.0);
        let closed = plate_energy(&p, phi).unwrap();
        let oracle = laminate_minimum(&p, phi);
        assert!(
            (closed - oracle).abs() <= 1e-10 * oracle.abs().max(1e-12),
            "{p:?} {phi}: {closed} vs {oracle}"
        );
    }
}

#[test]
fn dilute_plate_limit_uses_the_plate_moduli() {
    let p = pair(1.0, 2.0, 1.0, 1.0, 1.0, 0.0);
    let phi = 1e-7;
    let per_volume = plate_energy(&p, phi).unwrap() / phi;
    assert!((per_volume - 36.0 / 11.0).abs() < 1e-5);
    assert!((plate_dilute_energy(&p) - 36.0 / 11.0).abs() < 1e-14);
    let sphere = sphere_energy(&p, phi).unwrap() / phi;
    assert!((sphere - 18.0 / 7.0).abs() < 1e-5);
    assert!(sphere < per_volume);
}

#[test]
fn deviatoric_strain_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let p = pair(
            1.0,
            rng.gen_range(0.2..3.0),
            1.2,
            rng.gen_range(0.2..3.0),
            rng.gen_range(-0.1..0.1),
            0.0,
        );
        let e = plate_deviatoric_strain(&p, 0.3).unwrap();
        let s = -(p.dg() * p.dq()).signum();
        assert_eq!(e.signum(), s, "{p:?}");
    }
    assert_eq!(plate_deviatoric_strain(&pair(1.0, 1.0, 2.0, 1.0, 0.1, 0.0), 0.4).unwrap(), 0.0);
    assert_eq!(plate_deviatoric_strain(&pair(1.0, 2.0, 2.0, 1.0, 0.0, 0.0), 0.4).unwrap(), 0.0);
}

/// Scans R1 at fixed D and fixed R1³ + R2³; returns (argmin, argmax).
fn scan_pair(p: &PhasePair, v: f64, d: f64) -> (f64, f64) {
    let n = 20_000;
    let (mut lo, mut hi) = ((f64::INFINITY, 0.0), (f64::NEG_INFINITY, 0.0));
    for i in 1..n {
        let r1 = v.cbrt() * i as f64 / n as f64;
        let w = eshelby_pair(r1, (v - r1.powi(3)).cbrt(), d, p).unwrap();
        if w < lo.0 {
            lo = (w, r1);
        }
        if w > hi.0 {
            hi = (w, r1);
        }
    }
    (lo.1, hi.1)
}

#[test]
fn equal_sizes_are_the_extremum_of_the_pair_interaction() {
    let (v, d) = (2.0f64, 10.0);
    let eq = (v / 2.0).cbrt();
    // rigid inclusions: positive interaction, largest for equal sizes
    let hard = pair(1.0, 1.5, 1.0, 1.0, 0.02, 0.0);
    let (_, argmax) = scan_pair(&hard, v, d);
    assert!((argmax - eq).abs() < 2e-3, "argmax {argmax} vs {eq}");
    assert!(eshelby_pair(eq, eq, d, &hard).unwrap() > 0.0);
    // soft inclusions: negative interaction, least for equal sizes
    let soft = pair(1.0, 0.6, 1.0, 1.0, 0.02, 0.0);
    let (argmin, _) = scan_pair(&soft, v, d);
    assert!((argmin - eq).abs() < 2e-3, "argmin {argmin} vs {eq}");
    assert_eq!(eshelby_pair(1.0, 1.0, 3.0, &pair(1.0, 1.0, 1.0, 1.0, 0.1, 0.0)).unwrap(), 0.0);
    assert!(eshelby_pair(1.0, 1.0, 1.5, &hard).is_err());
}

#[test]
fn pair_interaction_decays_as_inverse_sixth_power() {
    let p = pair(1.0, 1.5, 1.0, 1.0, 0.02, 0.0);
    let w1 = eshelby_pair(1.0, 0.7, 1e3, &p).unwrap();
    let w2 = eshelby_pair(1.0, 0.7, 2e3, &p).unwrap();
    assert!((w1 / w2 - 64.0).abs() < 1e-3);
}

fn thermo(q: f64) -> PhasePair {
    PhasePair {
        sigma: 0.3,
        diffusivity: 1.0,
        c_eq_a: 0.85,
        c_eq_b: 0.05,
        c0_a: 0.9,
        temperature: 0.6,
        ..pair(1.2, 0.8, 1.0, 0.9, q, 0.0)
    }
}

#[test]
fn gibbs_thomson_capillary_and_elastic_parts() {
    let p = thermo(0.0);
    let (_, b1) = gibbs_thomson(2.0, &p).unwrap();
    let (_, b2) = gibbs_thomson(1.0, &p).unwrap();
    assert!(((b2 - p.c_eq_b) / (b1 - p.c_eq_b) - 2.0).abs() < 1e-12);
    let (a, b) = gibbs_thomson(1e15, &p).unwrap();
    assert!((a - p.c_eq_a).abs() < 1e-12 && (b - p.c_eq_b).abs() < 1e-12);

    let pe = thermo(0.03);
    let (_, b_el) = gibbs_thomson(1e15, &pe).unwrap();
    let offset = pe.c_eq_b * 18.0 * pe.k_a * pe.g_b * 0.03f64.powi(2) / ((3.0 * pe.k_a + 4.0 * pe.g_b) * pe.temperature * pe.dc_eq());
    assert!((b_el - pe.c_eq_b - offset).abs() < 1e-12);
    assert!(gibbs_thomson(0.0, &p).is_err());
}

#[test]
fn elastic_term_shifts_the_critical_radius_exactly() {
    let c_far = 0.09;
    let plain = thermo(0.0);
    let elastic = thermo(0.02);
    let r0 = critical_radius(c_far, &plain).unwrap();
    let r1 = critical_radius(c_far, &elastic).unwrap();
    // 2σ/R* loses exactly the sphere self-energy
    let e = 18.0 * elastic.k_a * elastic.g_b * 0.02f64.powi(2) / (3.0 * elastic.k_a + 4.0 * elastic.g_b);
    assert!((2.0 * plain.sigma / r0 - 2.0 * elastic.sigma / r1 - e).abs() < 1e-12);
    assert!(r1 > r0);
    // and the inverse map recovers the far field
    assert!((far_field_concentration(r1, &elastic) - c_far).abs() < 1e-14);
    // the growth law itself does not see the elastic term
    assert_eq!(lsw_rate(1.7, r1, &plain), lsw_rate(1.7, r1, &elastic));
}

#[test]
fn lsw_rate_signs() {
    let p = thermo(0.0);
    assert_eq!(lsw_rate(1.0, 1.0, &p), 0.0);
    assert!(lsw_rate(1.5, 1.0, &p) > 0.0);
    assert!(lsw_rate(0.5, 1.0, &p) < 0.0);
}

#[test]
fn lsw_two_particles_ripen() {
    let p = thermo(0.0);
    let mut e = PrecipitateEnsemble::new(vec![1.2, 0.9]).unwrap();
    let v0 = e.total_volume();
    let s = lsw_evolve(&mut e, &p, 1e6, 100_000, &LswOptions::default()).unwrap();
    assert_eq!(e.radii.len(), 1);
    assert!((e.radii[0] - (1.2f64.powi(3) + 0.9f64.powi(3)).cbrt()).abs() < 1e-9);
    assert!((e.total_volume() - v0).abs() < 1e-9 * v0);
    assert!(s.iter().all(|x| x.volume_drift.abs() < 1e-9));
}

#[test]
fn cubic_plates_prefer_soft_normals() {
    let soft = CubicModuli::new(2.5, 1.5, 1.25).unwrap();
    assert!(soft.anisotropy() < 0.0);
    let energy = |n: PlateNormal| {
        let (k, g) = cubic_plate_moduli(&soft, n);
        plate_energy(&pair(k, g, k, g, 0.01, 0.0), 0.2).unwrap()
    };
    assert!(energy(PlateNormal::Axis100) < energy(PlateNormal::Diagonal111));

    let iso = CubicModuli::from_isotropic(IsotropicModuli::new(1.4, 0.6).unwrap());
    for n in [PlateNormal::Axis100, PlateNormal::Diagonal111] {
        let (k, g) = cubic_plate_moduli(&iso, n);
        assert!((k - 1.4).abs() < 1e-14 && (g - 0.6).abs() < 1e-14);
    }
    assert!(PlateNormal::from_vector([1.0, 1.0, 0.0]).is_err());
}
