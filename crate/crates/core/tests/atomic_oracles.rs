use misfit_core::atomic::*;
use misfit_core::grid::GridSpec;
use misfit_core::kernel::{spring_kernel, ElasticKernel, SpringSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(t: f64) -> MCParams {
    MCParams {
        temperature: t,
        j_nn: 1.0,
        j_nnn: 0.5,
        rule: Acceptance::Metropolis,
        seed: 1,
    }
}

fn springs(g: &GridSpec, amp: f64) -> ElasticKernel {
    spring_kernel(g, &SpringSet::new(1.0, 0.5, 0.5).unwrap(), amp).unwrap()
}

/// ½ Σ_p Σ_q γ_p V(p − q) γ_q with V summed naively from the kernel.
fn position_space_elastic(l: &SpinLattice) -> f64 {
    let g = *l.grid();
    let k = l.kernel().unwrap();
    let n = g.sites();
    let v: Vec<f64> = (0..n)
        .map(|p| {
            let x = g.coords(p);
            (0..n)
                .map(|i| {
                    let kv = g.wavevector(i);
                    k.values()[i] * (kv[0] * x[0] as f64 + kv[1] * x[1] as f64).cos()
                })
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let e = g.extents();
    let gm = l.gamma();
    let mut w = 0.0;
    for p in 0..n {
        for q in 0..n {
            let (a, b) = (g.coords(p), g.coords(q));
            let off = g.index((a[0] + e[0] - b[0]) % e[0], (a[1] + e[1] - b[1]) % e[1], 0);
            w += gm[p] as f64 * v[off] * gm[q] as f64;
        }
    }
    0.5 * w
}

#[test]
fn fourier_elastic_part_matches_position_space() {
    let g = GridSpec::square(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let l = SpinLattice::random(g, 0.4, Some(springs(&g, 0.2)), &mut rng).unwrap();
    let fourier = elastic_energy_lattice(&l);
    let oracle = position_space_elastic(&l);
    assert!(((fourier - oracle) / oracle).abs() < 1e-9, "{fourier} vs {oracle}");
}

#[test]
fn every_exchange_matches_a_full_recompute() {
    let g = GridSpec::square(12).unwrap();
    let p = params(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let l = SpinLattice::random(g, 0.5, Some(springs(&g, 0.3)), &mut rng).unwrap();
    let e0 = total_energy(&l, &p).total();
    let mut checked = 0;
    for a in 0..g.sites() {
        for off in [[1isize, 0, 0], [0, 1, 0]] {
            let b = g.shifted(a, off);
            if l.gamma()[a] == l.gamma()[b] {
                continue;
            }
            let df = delta_f_exchange(&l, &p, a, b).unwrap();
            let mut m = l.clone();
            apply_exchange(&mut m, a, b).unwrap();
            let brute = total_energy(&m, &p).total() - e0;
            assert!((df - brute).abs() < 1e-9 * e0.abs().max(1.0), "{a}-{b}: {df} vs {brute}");
            let back = delta_f_exchange(&m, &p, a, b).unwrap();
            assert!((back + df).abs() <= 1e-12 * df.abs().max(1.0));
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn hand_counted_bonds() {
    // A −1 dimer at (4,4),(4,5) in a +1 sea; moving (4,5) to (5,5) turns it
    // into a diagonal pair. Unlike NN bonds go 6 → 8, unlike NNN bonds 8 → 6,
    // and each unlike bond costs 2J, so ΔF = 4 J_nn − 4 J_nnn.
    let g = GridSpec::square(10).unwrap();
    let mut gamma = vec![1i8; g.sites()];
    gamma[g.index(4, 4, 0)] = -1;
    gamma[g.index(4, 5, 0)] = -1;
    let l = SpinLattice::new(g, gamma, None).unwrap();
    let p = MCParams {
        j_nn: 1.0,
        j_nnn: 0.3,
        ..params(1.0)
    };
    let df = delta_f_exchange(&l, &p, g.index(4, 5, 0), g.index(5, 5, 0)).unwrap();
    assert!((df - (4.0 * 1.0 - 4.0 * 0.3)).abs() < 1e-14);
    // without a kernel the reverse move is exactly the negative
    let (a, b) = (g.index(4, 5, 0), g.index(5, 5, 0));
    let mut m = l.clone();
    apply_exchange(&mut m, a, b).unwrap();
    assert_eq!(delta_f_exchange(&m, &p, a, b).unwrap(), -df);
    let all_up = SpinLattice::new(g, vec![1; g.sites()], None).unwrap();
    assert_eq!(total_energy(&all_up, &p).total(), -(2.0 + 2.0 * 0.3) * g.sites() as f64);
}

#[test]
fn cached_potential_stays_exact() {
    let g = GridSpec::square(24).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut l = SpinLattice::random(g, 0.5, Some(springs(&g, 0.3)), &mut rng).unwrap();
    let m0 = l.magnetization();
    let mut accepted = 0;
    run_mc(&mut l, &params(3.0), 300, 10, |_, l, st| {
        accepted += st.accepted;
        assert!(l.phi_drift() <= 1e-9);
        Ok(())
    })
    .unwrap();
    assert!(accepted > RESYNC_EVERY);
    assert_eq!(l.magnetization(), m0);
}

/// ⟨γ_p γ_{p+x}⟩ sampled with batch means; returns (mean, standard error).
fn batch_stats(xs: &[f64]) -> (f64, f64) {
    let nb = 20;
    let len = xs.len() / nb;
    let means: Vec<f64> = (0..nb)
        .map(|b| xs[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64)
        .collect();
    let m = means.iter().sum::<f64>() / nb as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (nb - 1) as f64;
    (m, (var / nb as f64).sqrt())
}

fn nn_correlation(g: &GridSpec, gm: &[i8]) -> f64 {
    (0..gm.len()).map(|i| (gm[i] * gm[g.shifted(i, [1, 0, 0])]) as f64).sum::<f64>() / gm.len() as f64
}

/// Same ensemble, different dynamics: swap any two unlike sites and judge
/// the move by recomputing the whole energy.
fn nonlocal_reference(g: &GridSpec, p: &MCParams, sweeps: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gamma = SpinLattice::random(*g, 0.5, None, &mut rng).unwrap().gamma().to_vec();
    let energy = |gm: &[i8]| {
        let t = SpinLattice::new(*g, gm.to_vec(), None).unwrap();
        total_energy(&t, p).total()
    };
    let mut e = energy(&gamma);
    let mut out = Vec::with_capacity(sweeps);
    for s in 0..sweeps + 1000 {
        for _ in 0..gamma.len() {
            let (a, b) = (rng.gen_range(0..gamma.len()), rng.gen_range(0..gamma.len()));
            if gamma[a] == gamma[b] {
                continue;
            }
            gamma.swap(a, b);
            let e1 = energy(&gamma);
            if e1 <= e || rng.gen::<f64>() < (-(e1 - e) / p.temperature).exp() {
                e = e1;
            } else {
                gamma.swap(a, b);
            }
        }
        if s >= 1000 {
            out.push(nn_correlation(g, &gamma));
        }
    }
    assert_eq!(gamma.iter().map(|&x| x as i32).sum::<i32>(), 0);
    out
}

#[test]
fn eight_by_eight_correlations_match_an_independent_sampler() {
    let g = GridSpec::square(8).unwrap();
    let p = MCParams {
        temperature: 3.0,
        j_nn: 1.0,
        j_nnn: 0.0,
        ..params(3.0)
    };
    let sweeps = 20_000;
    let reference = nonlocal_reference(&g, &p, sweeps, 11);

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut l = SpinLattice::random(g, 0.5, None, &mut rng).unwrap();
    let mut ours = Vec::new();
    run_mc(&mut l, &p, (sweeps + 1000) as u64, 1, |s, l, _| {
        if s > 1000 {
            ours.push(nn_correlation(&g, l.gamma()));
        }
        Ok(())
    })
    .unwrap();
    let (a, ea) = batch_stats(&ours);
    let (b, eb) = batch_stats(&reference);
    let sigma = (ea * ea + eb * eb).sqrt();
    assert!((a - b).abs() < 4.0 * sigma, "{a} ± {ea} vs {b} ± {eb}");
    assert!(a > 0.05, "attractive NN must correlate like neighbours: {a}");
}

/// Repulsive NN, attractive NNN at half strength, 35% composition, T = 0.567 J:
/// ordered precipitates of both antiphase variants.
#[test]
fn ordered_precipitates_show_both_variants() {
    let g = GridSpec::square(64).unwrap();
    let p = MCParams {
        temperature: 0.567,
        j_nn: -1.0,
        j_nnn: 0.5,
        rule: Acceptance::Metropolis,
        seed: 8,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut l = SpinLattice::random(g, 0.35, None, &mut rng).unwrap();
    run_mc(&mut l, &p, 400, 0, |_, _, _| Ok(())).unwrap();
    let labels = sublattice_labels(&l, 0.6);
    let ordered = labels.iter().filter(|&&x| x != 0).count();
    assert!(ordered > g.sites() / 10 && ordered < g.sites(), "{ordered} ordered sites");
    assert!(ordered_variant_count(&labels, g.sites() / 50) >= 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn composition_is_bit_identical(seed in any::<u64>(), frac in 0.1f64..0.9, sweeps in 1u64..30) {
        let g = GridSpec::square(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut l = SpinLattice::random(g, frac, Some(springs(&g, 0.2)), &mut rng).unwrap();
        let m0 = l.magnetization();
        run_mc(&mut l, &MCParams { seed, ..params(1.5) }, sweeps, 0, |_, _, _| Ok(())).unwrap();
        prop_assert_eq!(l.magnetization(), m0);
    }
}
