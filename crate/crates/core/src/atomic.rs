//! Kawasaki-exchange Monte Carlo on a square lattice.
//!
//! Hamiltonian, with γ_p = ±1 the occupation of site p:
//!
//! ```text
//! H = −J_nn Σ_⟨nn⟩ γγ − J_nnn Σ_⟨nnn⟩ γγ + ½ Σ_p Σ_p' γ_p V_el(p − p') γ_p'
//! ```
//!
//! The elastic term is kept exact through the cached potential
//! φ(p) = Σ_p' V_el(p − p') γ_p'. Exchanging unlike neighbours a, b changes
//! γ by δ = −2γ on both sites, so
//!
//! ```text
//! ΔW = δ_a φ_a + δ_b φ_b + 4 V_el(0) − 4 V_el(a − b)
//! ```
//!
//! and an accepted exchange updates φ in O(N).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::grid::{GridSpec, ScalarField};
use crate::kernel::{spectral_quadratic, vel_realspace, ElasticKernel};

/// Accepted exchanges between full recomputations of φ.
pub const RESYNC_EVERY: u64 = 10_000;

const NN: [[isize; 2]; 4] = [[1, 0], [-1, 0], [0, 1], [0, -1]];
const NNN: [[isize; 2]; 4] = [[1, 1], [1, -1], [-1, 1], [-1, -1]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceptance {
    /// min(1, e^{−x/T})
    Metropolis,
    /// 1 / (1 + e^{x/T})
    Glauber,
}

impl Acceptance {
    pub fn probability(self, de: f64, t: f64) -> f64 {
        match self {
            Acceptance::Metropolis => (-de / t).exp().min(1.0),
            Acceptance::Glauber => 1.0 / (1.0 + (de / t).exp()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCParams {
    pub temperature: f64,
    pub j_nn: f64,
    pub j_nnn: f64,
    pub rule: Acceptance,
    pub seed: u64,
}

impl MCParams {
    pub fn validated(self) -> Result<Self> {
        if !(self.temperature > 0.0) {
            return Err(Error::invalid(format!("temperature must be positive, got {}", self.temperature)));
        }
        Ok(self)
    }
}

/// Occupations plus the cached elastic potential.
#[derive(Debug, Clone)]
pub struct SpinLattice {
    grid: GridSpec,
    gamma: Vec<i8>,
    /// V_el indexed by offset; empty when there is no elastic term.
    vel: Vec<f64>,
    kernel: Option<ElasticKernel>,
    phi: Vec<f64>,
    accepted_since_sync: u64,
    /// Per site: the four NN offsets then the four NNN offsets.
    nbr: Vec<[u32; 8]>,
}

impl SpinLattice {
    pub fn new(grid: GridSpec, gamma: Vec<i8>, kernel: Option<ElasticKernel>) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::invalid("the atomic model lives on a square (2-D) lattice"));
        }
        if gamma.len() != grid.sites() || gamma.iter().any(|&g| g != 1 && g != -1) {
            return Err(Error::invalid("occupations must be ±1, one per site"));
        }
        if let Some(k) = &kernel {
            grid.check_same(k.grid())?;
        }
        let vel = kernel.as_ref().map(|k| vel_realspace(k).into_values()).unwrap_or_default();
        let mut l = Self {
            grid,
            gamma,
            vel,
            kernel,
            phi: Vec::new(),
            accepted_since_sync: 0,
            nbr: Vec::new(),
        };
        l.nbr = (0..l.gamma.len())
            .map(|i| {
                let mut t = [0u32; 8];
                for (k, off) in NN.iter().chain(NNN.iter()).enumerate() {
                    t[k] = l.site(i, *off) as u32;
                }
                t
            })
            .collect();
        l.phi = l.compute_phi();
        Ok(l)
    }

    /// Random arrangement with exactly round(fraction·N) sites at +1.
    pub fn random(grid: GridSpec, fraction_up: f64, kernel: Option<ElasticKernel>, rng: &mut impl Rng) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction_up) {
            return Err(Error::invalid(format!(
                "fraction of +1 sites must lie in [0, 1], got {fraction_up}"
            )));
        }
        let n = grid.sites();
        let up = (fraction_up * n as f64).round() as usize;
        let mut gamma: Vec<i8> = (0..n).map(|i| if i < up { 1 } else { -1 }).collect();
        gamma.shuffle(rng);
        Self::new(grid, gamma, kernel)
    }

    pub fn from_field(field: &ScalarField, kernel: Option<ElasticKernel>) -> Result<Self> {
        let gamma = field.values().iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect();
        Self::new(*field.grid(), gamma, kernel)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn gamma(&self) -> &[i8] {
        &self.gamma
    }

    pub fn kernel(&self) -> Option<&ElasticKernel> {
        self.kernel.as_ref()
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Σ γ
    pub fn magnetization(&self) -> i64 {
        self.gamma.iter().map(|&g| g as i64).sum()
    }

    /// Fraction of +1 sites, (1 + m)/2.
    pub fn composition(&self) -> f64 {
        0.5 * (1.0 + self.magnetization() as f64 / self.gamma.len() as f64)
    }

    pub fn to_field(&self) -> ScalarField {
        ScalarField::new(self.grid, self.gamma.iter().map(|&g| g as f64).collect()).expect("sized to grid")
    }

    fn site(&self, i: usize, off: [isize; 2]) -> usize {
        self.grid.shifted(i, [off[0], off[1], 0])
    }

    #[inline]
    fn offset_index(&self, p: usize, q: usize) -> usize {
        let n = self.grid.extents();
        let (px, py) = (p / n[1], p % n[1]);
        let (qx, qy) = (q / n[1], q % n[1]);
        let dx = (px + n[0] - qx) % n[0];
        let dy = (py + n[1] - qy) % n[1];
        dx * n[1] + dy
    }

    /// φ by FFT convolution.
    fn compute_phi(&self) -> Vec<f64> {
        let Some(k) = &self.kernel else {
            return vec![0.0; self.gamma.len()];
        };
        let plan = FftPlan::new(&self.grid);
        let g: Vec<f64> = self.gamma.iter().map(|&x| x as f64).collect();
        let mut hat = plan.forward_real(&g);
        hat.iter_mut().zip(k.values()).for_each(|(z, b)| *z *= b);
        plan.inverse_real(hat)
    }

    /// Largest |φ_cached − φ_exact|.
    pub fn phi_drift(&self) -> f64 {
        self.compute_phi()
            .iter()
            .zip(&self.phi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Recomputes φ and returns the drift that was removed.
    pub fn resync(&mut self) -> f64 {
        let exact = self.compute_phi();
        let drift = exact.iter().zip(&self.phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if drift > 1e-7 {
            log::warn!("elastic potential drifted by {drift:e} before resync");
        }
        self.phi = exact;
        self.accepted_since_sync = 0;
        drift
    }

    #[inline]
    fn local_field(&self, i: usize, skip: usize, p: &MCParams) -> f64 {
        let t = &self.nbr[i];
        let mut nn = 0i32;
        for &j in &t[..4] {
            if j as usize != skip {
                nn += self.gamma[j as usize] as i32;
            }
        }
        let nnn: i32 = t[4..].iter().map(|&j| self.gamma[j as usize] as i32).sum();
        p.j_nn * nn as f64 + p.j_nnn * nnn as f64
    }
}

/// Chemical pair energy, each bond counted once. Bond sums are integers, so
/// the result is exact up to the final two products.
pub fn chemical_energy(l: &SpinLattice, p: &MCParams) -> f64 {
    let (mut nn, mut nnn) = (0i64, 0i64);
    for i in 0..l.gamma.len() {
        let gi = l.gamma[i] as i64;
        let t = &l.nbr[i];
        // +x, +y and the two +x diagonals
        nn += gi * (l.gamma[t[0] as usize] as i64 + l.gamma[t[2] as usize] as i64);
        nnn += gi * (l.gamma[t[4] as usize] as i64 + l.gamma[t[5] as usize] as i64);
    }
    -(p.j_nn * nn as f64 + p.j_nnn * nnn as f64)
}

/// (1/2N) Σ_{k≠0} 𝖡(k) |γ̃(k)|²
pub fn elastic_energy_lattice(l: &SpinLattice) -> f64 {
    match &l.kernel {
        Some(k) => {
            let plan = FftPlan::new(&l.grid);
            let g: Vec<f64> = l.gamma.iter().map(|&x| x as f64).collect();
            spectral_quadratic(&plan, k, &g) / (2.0 * l.gamma.len() as f64)
        }
        None => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeEnergy {
    pub chemical: f64,
    pub elastic: f64,
}

impl LatticeEnergy {
    pub fn total(&self) -> f64 {
        self.chemical + self.elastic
    }
}

pub fn total_energy(l: &SpinLattice, p: &MCParams) -> LatticeEnergy {
    LatticeEnergy {
        chemical: chemical_energy(l, p),
        elastic: elastic_energy_lattice(l),
    }
}

fn check_pair(l: &SpinLattice, a: usize, b: usize) -> Result<()> {
    if a == b || a >= l.gamma.len() || b >= l.gamma.len() {
        return Err(Error::invalid(format!("exchange needs two distinct sites, got {a} and {b}")));
    }
    if !NN.iter().any(|&off| l.site(a, off) == b) {
        return Err(Error::invalid(format!("sites {a} and {b} are not nearest neighbours")));
    }
    if l.gamma[a] == l.gamma[b] {
        return Err(Error::invalid(format!("sites {a} and {b} hold the same species")));
    }
    Ok(())
}

fn delta_unchecked(l: &SpinLattice, p: &MCParams, a: usize, b: usize) -> f64 {
    let (ga, gb) = (l.gamma[a] as f64, l.gamma[b] as f64);
    let chem = 2.0 * ga * l.local_field(a, b, p) + 2.0 * gb * l.local_field(b, a, p);
    if l.vel.is_empty() {
        return chem;
    }
    let (da, db) = (-2.0 * ga, -2.0 * gb);
    let elastic = da * l.phi[a] + db * l.phi[b] + 4.0 * l.vel[0] - 4.0 * l.vel[l.offset_index(a, b)];
    chem + elastic
}

/// Energy change of exchanging the unlike nearest neighbours `a` and `b`.
pub fn delta_f_exchange(l: &SpinLattice, p: &MCParams, a: usize, b: usize) -> Result<f64> {
    check_pair(l, a, b)?;
    Ok(delta_unchecked(l, p, a, b))
}

/// Performs the exchange and updates φ.
pub fn apply_exchange(l: &mut SpinLattice, a: usize, b: usize) -> Result<()> {
    check_pair(l, a, b)?;
    apply_unchecked(l, a, b);
    Ok(())
}

fn apply_unchecked(l: &mut SpinLattice, a: usize, b: usize) {
    let (da, db) = (-2.0 * l.gamma[a] as f64, -2.0 * l.gamma[b] as f64);
    l.gamma[a] = -l.gamma[a];
    l.gamma[b] = -l.gamma[b];
    if l.vel.is_empty() {
        return;
    }
    let n = l.grid.extents();
    let (nx, ny) = (n[0], n[1]);
    let (ax, ay) = (a / ny, a % ny);
    let (bx, by) = (b / ny, b % ny);
    for px in 0..nx {
        let ra = ((px + nx - ax) % nx) * ny;
        let rb = ((px + nx - bx) % nx) * ny;
        let row = &mut l.phi[px * ny..(px + 1) * ny];
        for (py, phi) in row.iter_mut().enumerate() {
            let ya = (py + ny - ay) % ny;
            let yb = (py + ny - by) % ny;
            *phi += da * l.vel[ra + ya] + db * l.vel[rb + yb];
        }
    }
    l.accepted_since_sync += 1;
    if l.accepted_since_sync >= RESYNC_EVERY {
        l.resync();
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepStats {
    pub attempts: u64,
    pub unlike: u64,
    pub accepted: u64,
    /// Sum of accepted energy changes.
    pub energy_change: f64,
}

impl SweepStats {
    pub fn acceptance(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempts as f64
        }
    }
}

/// N exchange attempts. Each picks a random site and one of its four
/// neighbours; like pairs count as rejected attempts.
pub fn kawasaki_sweep(l: &mut SpinLattice, p: &MCParams, rng: &mut impl Rng) -> SweepStats {
    let n = l.gamma.len();
    let mut st = SweepStats::default();
    for _ in 0..n {
        st.attempts += 1;
        let r = rng.gen_range(0..4 * n);
        let a = r / 4;
        let b = l.nbr[a][r % 4] as usize;
        if l.gamma[a] == l.gamma[b] {
            continue;
        }
        st.unlike += 1;
        let de = delta_unchecked(l, p, a, b);
        let accept = match p.rule {
            Acceptance::Metropolis => de <= 0.0 || rng.gen::<f64>() < (-de / p.temperature).exp(),
            Acceptance::Glauber => rng.gen::<f64>() < p.rule.probability(de, p.temperature),
        };
        if accept {
            apply_unchecked(l, a, b);
            st.accepted += 1;
            st.energy_change += de;
        }
    }
    st
}

/// Runs `sweeps` sweeps from a seeded generator, calling `observe` before
/// the first sweep and after every `every` sweeps with the sweep count.
pub fn run_mc(
    l: &mut SpinLattice,
    p: &MCParams,
    sweeps: u64,
    every: u64,
    mut observe: impl FnMut(u64, &SpinLattice, &SweepStats) -> Result<()>,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut acc = SweepStats::default();
    observe(0, l, &acc)?;
    for s in 1..=sweeps {
        let st = kawasaki_sweep(l, p, &mut rng);
        acc.attempts += st.attempts;
        acc.unlike += st.unlike;
        acc.accepted += st.accepted;
        acc.energy_change += st.energy_change;
        if every > 0 && s % every == 0 {
            observe(s, l, &acc)?;
            acc = SweepStats::default();
        }
    }
    Ok(())
}

/// Ordered-variant labels for checkerboard order: +1 or −1 where the local
/// staggered order parameter γ_p (−1)^{x+y}, averaged over the site and its
/// four neighbours, exceeds `threshold` in magnitude; 0 elsewhere.
pub fn sublattice_labels(l: &SpinLattice, threshold: f64) -> Vec<i8> {
    let n = l.grid.extents();
    let stag = |i: usize| {
        let c = l.grid.coords(i);
        let s = if (c[0] + c[1]).is_multiple_of(2) { 1.0 } else { -1.0 };
        s * l.gamma[i] as f64
    };
    debug_assert!(n[0].is_multiple_of(2) && n[1].is_multiple_of(2));
    (0..l.gamma.len())
        .map(|i| {
            let mut s = stag(i);
            for off in NN {
                s += stag(l.site(i, off));
            }
            let m = s / 5.0;
            if m > threshold {
                1
            } else if m < -threshold {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// Number of ordered variants covering at least `min_sites` sites.
pub fn ordered_variant_count(labels: &[i8], min_sites: usize) -> usize {
    let plus = labels.iter().filter(|&&x| x == 1).count();
    let minus = labels.iter().filter(|&&x| x == -1).count();
    [plus, minus].iter().filter(|&&c| c >= min_sites).count()
}
