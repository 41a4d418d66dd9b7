//! Morphology metrics for concentration and occupation snapshots.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::grid::{GridSpec, ScalarField};

/// Angular half-width of the ⟨10⟩ and ⟨11⟩ lobes.
pub const LOBE_HALF_WIDTH_DEG: f64 = 10.0;

/// Default relative half-width of the ring around the peak |k| used by
/// the anisotropy ratio.
pub const RING_HALF_WIDTH: f64 = 0.5;

/// |f̃(k)|²/N over the reciprocal lattice with the k = 0 entry zeroed.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    s: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBin {
    /// Bin centre, |k|
    pub k: f64,
    pub mean: f64,
    pub count: usize,
}

pub fn structure_factor(field: &ScalarField) -> Spectrum {
    let g = *field.grid();
    let t = FftPlan::new(&g).forward_real(field.values());
    let n = g.sites() as f64;
    let mut s: Vec<f64> = t.iter().map(|z| z.norm_sqr() / n).collect();
    s[0] = 0.0;
    Spectrum { grid: g, s }
}

impl Spectrum {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.s
    }

    pub fn total(&self) -> f64 {
        self.s.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.s.iter().all(|&v| v == 0.0)
    }

    /// Pointwise mean of spectra on the same grid (time or replica average).
    pub fn average(spectra: &[Spectrum]) -> Result<Spectrum> {
        let first = spectra.first().ok_or_else(|| Error::invalid("nothing to average"))?;
        let mut s = vec![0.0; first.s.len()];
        for sp in spectra {
            sp.grid.check_same(&first.grid)?;
            s.iter_mut().zip(&sp.s).for_each(|(a, b)| *a += b);
        }
        let m = spectra.len() as f64;
        s.iter_mut().for_each(|v| *v /= m);
        Ok(Spectrum { grid: first.grid, s })
    }

    fn dk(&self) -> f64 {
        let n = self.grid.extents()[..self.grid.dim()].iter().cloned().max().unwrap();
        2.0 * PI / (n as f64 * self.grid.spacing())
    }

    fn kmag(&self, i: usize) -> f64 {
        let k = self.grid.wavevector(i);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
    }

    /// Azimuthal (shell) average in bins of width 2π/(n a), k = 0 excluded.
    pub fn azimuthal(&self) -> Vec<RadialBin> {
        let dk = self.dk();
        let mut sum: Vec<f64> = Vec::new();
        let mut cnt: Vec<usize> = Vec::new();
        for i in 1..self.s.len() {
            let b = (self.kmag(i) / dk).round() as usize;
            if b >= sum.len() {
                sum.resize(b + 1, 0.0);
                cnt.resize(b + 1, 0);
            }
            sum[b] += self.s[i];
            cnt[b] += 1;
        }
        (1..sum.len())
            .filter(|&b| cnt[b] > 0)
            .map(|b| RadialBin {
                k: b as f64 * dk,
                mean: sum[b] / cnt[b] as f64,
                count: cnt[b],
            })
            .collect()
    }

    /// |k| of the azimuthal bin with the largest mean intensity.
    pub fn peak_k(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        self.azimuthal()
            .into_iter()
            .fold(None, |best: Option<RadialBin>, b| match best {
                Some(x) if x.mean >= b.mean => Some(x),
                _ => Some(b),
            })
            .map(|b| b.k)
    }

    /// Mean intensity in ±10° lobes about ⟨10⟩ over that about ⟨11⟩, on the
    /// ring |k| ∈ k_peak·[1 − w, 1 + w] with w = [`RING_HALF_WIDTH`]. Only
    /// wavevectors in the xy-plane count. An empty spectrum reports 1; intensity
    /// confined to the axis lobes reports infinity.
    pub fn anisotropy_ratio(&self) -> f64 {
        self.anisotropy_ratio_with(RING_HALF_WIDTH)
    }

    pub fn anisotropy_ratio_with(&self, ring_half_width: f64) -> f64 {
        let Some(kp) = self.peak_k() else {
            return 1.0;
        };
        let (lo, hi) = (kp * (1.0 - ring_half_width), kp * (1.0 + ring_half_width));
        let half = LOBE_HALF_WIDTH_DEG.to_radians();
        let (mut ax, mut nax, mut dg, mut ndg) = (0.0, 0usize, 0.0, 0usize);
        for i in 1..self.s.len() {
            let k = self.grid.wavevector(i);
            if k[2] != 0.0 {
                continue;
            }
            let m = self.kmag(i);
            if m < lo || m > hi {
                continue;
            }
            // angle folded into [0, π/2)
            let th = k[1].atan2(k[0]).rem_euclid(PI / 2.0);
            let to_axis = th.min(PI / 2.0 - th);
            let to_diag = (th - PI / 4.0).abs();
            if to_axis <= half + 1e-12 {
                ax += self.s[i];
                nax += 1;
            } else if to_diag <= half + 1e-12 {
                dg += self.s[i];
                ndg += 1;
            }
        }
        if nax == 0 || ndg == 0 || (ax == 0.0 && dg == 0.0) {
            return 1.0;
        }
        if dg == 0.0 {
            return f64::INFINITY;
        }
        (ax / nax as f64) / (dg / ndg as f64)
    }
}

/// Area of the minority phase over its boundary length, where the boundary
/// is the count of unlike nearest-neighbour bonds times a·π/4. The π/4
/// undoes the taxicab overestimate of staircase boundaries, so a digitized
/// disk of radius R gives R/2.
pub fn domain_size(field: &ScalarField, threshold: f64) -> Result<f64> {
    let g = field.grid();
    let v = field.values();
    let inside: Vec<bool> = v.iter().map(|&x| x > threshold).collect();
    let n_in = inside.iter().filter(|&&b| b).count();
    let minority = n_in.min(inside.len() - n_in);
    let mut bonds = 0usize;
    for i in 0..inside.len() {
        for d in 0..g.dim() {
            let mut off = [0isize; 3];
            off[d] = 1;
            if inside[i] != inside[g.shifted(i, off)] {
                bonds += 1;
            }
        }
    }
    if bonds == 0 {
        return Err(Error::invalid("single-phase field has no interface"));
    }
    let a = g.spacing();
    let area = minority as f64 * g.cell_volume();
    Ok(area / (bonds as f64 * g.cell_volume() / a * PI / 4.0))
}

/// (t, R) samples of a growth law.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GrowthSeries {
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub stderr: f64,
    pub points: usize,
}

impl GrowthSeries {
    pub fn push(&mut self, t: f64, r: f64) {
        self.samples.push((t, r));
    }

    /// Samples with t in [t_max/10, t_max].
    pub fn final_decade(&self) -> GrowthSeries {
        let tmax = self.samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
        self.window(tmax / 10.0, tmax)
    }

    pub fn window(&self, t_lo: f64, t_hi: f64) -> GrowthSeries {
        GrowthSeries {
            samples: self.samples.iter().cloned().filter(|s| s.0 >= t_lo && s.0 <= t_hi).collect(),
        }
    }
}

/// Least-squares fit of log R = log λ + n log t.
pub fn growth_exponent(series: &GrowthSeries) -> Result<PowerLawFit> {
    let s = &series.samples;
    if s.len() < 8 {
        return Err(Error::invalid(format!("power-law fit needs at least 8 samples, got {}", s.len())));
    }
    if s.iter().any(|&(t, r)| !(t > 0.0 && r > 0.0)) {
        return Err(Error::invalid("power-law fit needs positive t and R"));
    }
    if s.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::invalid("times must be strictly increasing"));
    }
    let n = s.len() as f64;
    let xs: Vec<f64> = s.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = s.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: icpt.exp(),
        stderr,
        points: s.len(),
    })
}

/// 8-bit grey levels of log(1 + S/S_ref) with k = 0 at the image centre,
/// S_ref = 10⁻⁴ max S. Rows run along the first axis. For a 3-D grid the
/// kz = 0 plane is drawn.
pub fn saxs_pixels(sp: &Spectrum) -> (usize, usize, Vec<u8>) {
    let n = sp.grid.extents();
    let (nx, ny) = (n[0], n[1]);
    let max = sp.s.iter().cloned().fold(0.0, f64::max);
    let mut px = vec![0u8; nx * ny];
    if max > 0.0 {
        let sref = 1e-4 * max;
        let top = (1.0 + max / sref).ln();
        for r in 0..nx {
            for c in 0..ny {
                let kx = (r + nx / 2) % nx;
                let ky = (c + ny / 2) % ny;
                let v = sp.s[sp.grid.index(kx, ky, 0)];
                px[r * ny + c] = ((1.0 + v / sref).ln() / top * 255.0).round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    (nx, ny, px)
}

/// Writes [`saxs_pixels`] as a binary PGM.
pub fn saxs_image(sp: &Spectrum, path: &Path) -> Result<()> {
    let (rows, cols, px) = saxs_pixels(sp);
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(f, "P5\n{cols} {rows}\n255\n")?;
    f.write_all(&px)?;
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cosine_gives_two_quarter_peaks() {
        let g = GridSpec::square(32).unwrap();
        let f = ScalarField::from_fn(g, |c| (2.0 * PI * 5.0 * c[1] as f64 / 32.0).cos());
        let sp = structure_factor(&f);
        let big: Vec<usize> = (0..g.sites()).filter(|&i| sp.values()[i] > 1e-9).collect();
        assert_eq!(big, vec![g.index(0, 5, 0), g.index(0, 27, 0)]);
        assert_relative_eq!(sp.values()[big[0]], 256.0, epsilon = 1e-9);
    }

    #[test]
    fn stripes_are_strongly_anisotropic() {
        let g = GridSpec::square(64).unwrap();
        let f = ScalarField::from_fn(g, |c| if (c[0] / 4) % 2 == 0 { 1.0 } else { 0.0 });
        assert!(structure_factor(&f).anisotropy_ratio() > 3.0);
    }

    #[test]
    fn constant_field_is_empty() {
        let g = GridSpec::square(8).unwrap();
        let sp = structure_factor(&ScalarField::constant(g, 0.3));
        assert!(sp.is_empty());
        assert_eq!(sp.anisotropy_ratio(), 1.0);
        assert!(saxs_pixels(&sp).2.iter().all(|&p| p == 0));
    }

    #[test]
    fn checkerboard_and_single_phase_sizes() {
        let g = GridSpec::square(4).unwrap();
        let f = ScalarField::from_fn(g, |c| ((c[0] + c[1]) % 2) as f64);
        // 8 minority sites, 32 unlike bonds
        assert_relative_eq!(domain_size(&f, 0.5).unwrap(), 8.0 / (32.0 * PI / 4.0), epsilon = 1e-15);
        assert!(domain_size(&ScalarField::constant(g, 1.0), 0.5).is_err());
    }

    #[test]
    fn power_laws() {
        let mut s = GrowthSeries::default();
        for i in 0..20 {
            let t = 10f64.powf(1.0 + i as f64 * 0.1);
            s.push(t, 2.5 * t.sqrt());
        }
        let fit = growth_exponent(&s).unwrap();
        assert_relative_eq!(fit.exponent, 0.5, epsilon = 1e-12);
        assert_relative_eq!(fit.prefactor, 2.5, max_relative = 1e-10);
        assert!(growth_exponent(&GrowthSeries {
            samples: s.samples[..5].to_vec()
        })
        .is_err());
    }

    #[test]
    fn final_decade_window() {
        let s = GrowthSeries {
            samples: (1..=100).map(|i| (i as f64, 1.0)).collect(),
        };
        let w = s.final_decade();
        assert_eq!(w.samples.first().unwrap().0, 10.0);
        assert_eq!(w.samples.len(), 91);
    }
}
