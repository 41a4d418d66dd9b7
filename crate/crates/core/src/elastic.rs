//! Elastic-constant algebra: moduli, fourth-rank stiffness tensors, Hooke's
//! law and the compositional (Vegard) misfit.
//!
//! Index conventions: tensors are stored with all four indices explicit
//! (`[i][j][m][n]`), zero based, Cartesian axes 0..3. The undeformed
//! reference lattice is the matrix phase, so a stress-free strain of zero
//! means "matrix".

use nalgebra::{Matrix6, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric second-rank tensor (strain or stress).
pub type Tensor2 = [[f64; 3]; 3];

pub const ZERO2: Tensor2 = [[0.0; 3]; 3];

pub fn identity2() -> Tensor2 {
    let mut d = ZERO2;
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    d
}

pub fn scale2(t: &Tensor2, s: f64) -> Tensor2 {
    let mut out = *t;
    out.iter_mut().flatten().for_each(|v| *v *= s);
    out
}

pub fn sub2(a: &Tensor2, b: &Tensor2) -> Tensor2 {
    let mut out = ZERO2;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j] - b[i][j];
        }
    }
    out
}

pub fn is_symmetric2(t: &Tensor2, tol: f64) -> bool {
    (0..3).all(|i| (0..3).all(|j| (t[i][j] - t[j][i]).abs() <= tol))
}

pub fn trace2(t: &Tensor2) -> f64 {
    t[0][0] + t[1][1] + t[2][2]
}

/// Raw fourth-rank array with no symmetry guarantees.
///
/// Used directly for lattice "gradient stiffnesses" that are not invariant
/// under rigid rotation and therefore lack minor symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor4(pub [[[[f64; 3]; 3]; 3]; 3]);

impl Tensor4 {
    pub fn zeros() -> Self {
        Tensor4([[[[0.0; 3]; 3]; 3]; 3])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, m: usize, n: usize) -> f64 {
        self.0[i][j][m][n]
    }

    /// Σ_mn T_ijmn e_mn
    pub fn contract2(&self, e: &Tensor2) -> Tensor2 {
        let mut out = ZERO2;
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for m in 0..3 {
                    for n in 0..3 {
                        s += self.0[i][j][m][n] * e[m][n];
                    }
                }
                out[i][j] = s;
            }
        }
        out
    }

    /// Σ_ijmn a_ij T_ijmn b_mn
    pub fn quadratic(&self, a: &Tensor2, b: &Tensor2) -> f64 {
        let tb = self.contract2(b);
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += a[i][j] * tb[i][j];
            }
        }
        s
    }

    /// Σ_im T_iimm, the dilatational trace used by the Vegard-law kernels.
    pub fn double_trace(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for m in 0..3 {
                s += self.0[i][i][m][m];
            }
        }
        s
    }
}

/// Bulk and shear modulus of an isotropic solid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicModuli {
    pub bulk: f64,
    pub shear: f64,
}

impl IsotropicModuli {
    pub fn new(bulk: f64, shear: f64) -> Result<Self> {
        if !(bulk > 0.0 && shear > 0.0) {
            return Err(Error::invalid(format!(
                "isotropic moduli need K > 0 and G > 0 (got K = {bulk}, G = {shear})"
            )));
        }
        Ok(Self { bulk, shear })
    }

    /// Builds moduli from Young's modulus and Poisson's ratio.
    pub fn from_young_poisson(young: f64, poisson: f64) -> Result<Self> {
        if !(young > 0.0 && poisson > -1.0 && poisson < 0.5) {
            return Err(Error::invalid(format!(
                "need E > 0 and -1 < nu < 1/2 (got E = {young}, nu = {poisson})"
            )));
        }
        Self::new(young / (3.0 * (1.0 - 2.0 * poisson)), young / (2.0 * (1.0 + poisson)))
    }

    /// (E, ν) with E = 9KG/(3K+G), ν = (3K−2G)/(6K+2G).
    pub fn young_poisson(&self) -> (f64, f64) {
        young_poisson(self.bulk, self.shear)
    }

    /// 18KG/(3K+4G), which equals E/(1−ν).
    pub fn cahn_modulus(&self) -> f64 {
        18.0 * self.bulk * self.shear / (3.0 * self.bulk + 4.0 * self.shear)
    }
}

/// (E, ν) for raw (K, G). Accepts G = 0 so the incompressible limit can be
/// probed; callers validate moduli themselves.
pub fn young_poisson(bulk: f64, shear: f64) -> (f64, f64) {
    let e = 9.0 * bulk * shear / (3.0 * bulk + shear);
    let nu = (3.0 * bulk - 2.0 * shear) / (6.0 * bulk + 2.0 * shear);
    (e, nu)
}

/// Cubic elastic constants in Voigt notation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicModuli {
    pub c11: f64,
    pub c12: f64,
    pub c44: f64,
}

impl CubicModuli {
    pub fn new(c11: f64, c12: f64, c44: f64) -> Result<Self> {
        if !(c44 > 0.0 && c11 > c12.abs() && c11 + 2.0 * c12 > 0.0) {
            return Err(Error::invalid(format!(
                "cubic constants not positive definite (C11 = {c11}, C12 = {c12}, C44 = {c44})"
            )));
        }
        Ok(Self { c11, c12, c44 })
    }

    /// The cubic constants that reproduce an isotropic solid.
    pub fn from_isotropic(m: IsotropicModuli) -> Self {
        Self {
            c11: m.bulk + 4.0 * m.shear / 3.0,
            c12: m.bulk - 2.0 * m.shear / 3.0,
            c44: m.shear,
        }
    }

    /// A = C11 − C12 − 2·C44; zero for an isotropic solid.
    pub fn anisotropy(&self) -> f64 {
        self.c11 - self.c12 - 2.0 * self.c44
    }

    /// Central-force crystals obey C12 = C44.
    pub fn satisfies_cauchy_relation(&self) -> bool {
        (self.c12 - self.c44).abs() <= 1e-12 * self.c11.abs().max(self.c44.abs())
    }

    pub fn bulk_modulus(&self) -> f64 {
        (self.c11 + 2.0 * self.c12) / 3.0
    }
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Fourth-rank stiffness λ_ijmn with full minor and major symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffnessTensor {
    t: Tensor4,
}

impl StiffnessTensor {
    /// Wraps an arbitrary array, checking the index symmetries exactly and
    /// positive definiteness on symmetric tensors.
    pub fn from_tensor(t: Tensor4) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                for m in 0..3 {
                    for n in 0..3 {
                        let v = t.0[i][j][m][n];
                        if v != t.0[j][i][m][n] || v != t.0[i][j][n][m] || v != t.0[m][n][i][j] {
                            return Err(Error::invalid(format!("stiffness lacks index symmetry at ({i},{j},{m},{n})")));
                        }
                    }
                }
            }
        }
        let s = Self { t };
        let eig = SymmetricEigen::new(s.mandel()).eigenvalues;
        if eig.iter().any(|&l| l <= 0.0) {
            return Err(Error::invalid("stiffness is not positive definite"));
        }
        Ok(s)
    }

    pub fn isotropic(m: IsotropicModuli) -> Self {
        let lame = m.bulk - 2.0 * m.shear / 3.0;
        let mut t = Tensor4::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t.0[i][j][k][l] =
                            lame * delta(i, j) * delta(k, l) + m.shear * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k));
                    }
                }
            }
        }
        Self { t }
    }

    pub fn cubic(m: CubicModuli) -> Self {
        let a = m.anisotropy();
        let mut t = Tensor4::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let all_equal = if i == j && j == k && k == l { 1.0 } else { 0.0 };
                        t.0[i][j][k][l] = m.c12 * delta(i, j) * delta(k, l)
                            + m.c44 * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k))
                            + a * all_equal;
                    }
                }
            }
        }
        // diagonal: C12 + 2·C44 + A = C11
        Self { t }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, m: usize, n: usize) -> f64 {
        self.t.0[i][j][m][n]
    }

    pub fn as_tensor4(&self) -> &Tensor4 {
        &self.t
    }

    /// λ_1111 − λ_1122 − 2λ_2323.
    pub fn cubic_anisotropy(&self) -> f64 {
        self.get(0, 0, 0, 0) - self.get(0, 0, 1, 1) - 2.0 * self.get(1, 2, 1, 2)
    }

    /// 6×6 Mandel matrix (shear rows scaled by √2) so that the quadratic
    /// form on symmetric tensors is preserved.
    pub fn mandel(&self) -> Matrix6<f64> {
        const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
        let w = |a: usize| if a < 3 { 1.0 } else { std::f64::consts::SQRT_2 };
        Matrix6::from_fn(|a, b| {
            let (i, j) = PAIRS[a];
            let (m, n) = PAIRS[b];
            w(a) * w(b) * self.get(i, j, m, n)
        })
    }

    /// Solves Σ_mn λ_ijmn e_mn = t_ij for symmetric e.
    pub fn solve_strain(&self, stress: &Tensor2) -> Result<Tensor2> {
        const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
        let s2 = std::f64::consts::SQRT_2;
        let rhs = nalgebra::Vector6::from_fn(|a, _| {
            let (i, j) = PAIRS[a];
            if a < 3 {
                stress[i][j]
            } else {
                s2 * stress[i][j]
            }
        });
        let lu = self.mandel().lu();
        let sol = lu.solve(&rhs).ok_or_else(|| Error::Singular {
            k: [0.0; 3],
            what: "stiffness matrix (solving for the applied strain)".into(),
        })?;
        let mut e = ZERO2;
        for (a, &(i, j)) in PAIRS.iter().enumerate() {
            let v = if a < 3 { sol[a] } else { sol[a] / s2 };
            e[i][j] = v;
            e[j][i] = v;
        }
        Ok(e)
    }

    /// w(Δe) = ½ Σ λ_ijmn Δe_ij Δe_mn
    pub fn energy_density(&self, de: &Tensor2) -> f64 {
        0.5 * self.t.quadratic(de, de)
    }
}

/// Hooke's law t_ij = Σ λ_ijmn (e_mn − e0_mn).
pub fn stress_from_strain(lambda: &StiffnessTensor, e: &Tensor2, e0: &Tensor2) -> Tensor2 {
    lambda.as_tensor4().contract2(&sub2(e, e0))
}

/// Linear (Vegard) dependence of the stress-free strain on concentration:
/// e0_ij(c) = b_ij (c − c0), with b_ij = η δ_ij unless a full tensor is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisfitSpec {
    pub eta: f64,
    pub c0: f64,
    b: Option<Tensor2>,
}

impl MisfitSpec {
    pub fn dilatational(eta: f64, c0: f64) -> Self {
        Self { eta, c0, b: None }
    }

    pub fn with_tensor(b: Tensor2, c0: f64) -> Result<Self> {
        if !is_symmetric2(&b, 0.0) {
            return Err(Error::invalid("Vegard tensor b_ij must be symmetric"));
        }
        Ok(Self {
            eta: trace2(&b) / 3.0,
            c0,
            b: Some(b),
        })
    }

    /// Stress-free strain per unit concentration.
    pub fn slope(&self) -> Tensor2 {
        self.b.unwrap_or_else(|| scale2(&identity2(), self.eta))
    }

    pub fn is_dilatational(&self) -> bool {
        self.b.is_none()
    }

    pub fn stress_free_strain(&self, c: f64) -> Tensor2 {
        scale2(&self.slope(), c - self.c0)
    }
}

/// Uniform externally applied stress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppliedStress {
    pub t_ext: Tensor2,
}

impl AppliedStress {
    pub fn new(t_ext: Tensor2) -> Result<Self> {
        if !is_symmetric2(&t_ext, 0.0) {
            return Err(Error::invalid("applied stress must be symmetric"));
        }
        Ok(Self { t_ext })
    }

    pub fn uniaxial(sigma: f64) -> Self {
        let mut t = ZERO2;
        t[2][2] = sigma;
        Self { t_ext: t }
    }

    /// (2 t33 − t11 − t22)/3; positive for tension along axis 3.
    pub fn axial(&self) -> f64 {
        (2.0 * self.t_ext[2][2] - self.t_ext[0][0] - self.t_ext[1][1]) / 3.0
    }
}
