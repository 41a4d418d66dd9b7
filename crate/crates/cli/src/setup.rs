//! Core objects built from a config.

use misfit_core::atomic::{Acceptance, MCParams};
use misfit_core::diffuse::{ch_kernel, CHParams};
use misfit_core::elastic::{identity2, scale2, CubicModuli, IsotropicModuli, MisfitSpec, StiffnessTensor};
use misfit_core::kernel::{build_kernel, spring_kernel, ElasticKernel, SpringSet};
use misfit_core::sharp::PhasePair;
use misfit_core::{Error, GridSpec, Result};

use crate::keys::Cfg;

pub fn grid(c: &Cfg) -> Result<GridSpec> {
    let n: usize = c.get("grid.n")?;
    let dim: usize = c.get("grid.dim")?;
    let ext = match dim {
        2 => vec![n, n],
        3 => vec![n, n, n],
        _ => return Err(Error::InvalidParameter(format!("grid.dim must be 2 or 3, got {dim}"))),
    };
    GridSpec::new(&ext, c.get("grid.a")?)
}

pub fn stiffness(c: &Cfg) -> Result<StiffnessTensor> {
    match c.text("elastic.kind")?.as_str() {
        "isotropic" => Ok(StiffnessTensor::isotropic(isotropic(c)?)),
        "cubic" => Ok(StiffnessTensor::cubic(CubicModuli::new(
            c.get("elastic.c11")?,
            c.get("elastic.c12")?,
            c.get("elastic.c44")?,
        )?)),
        other => Err(Error::InvalidParameter(format!(
            "elastic.kind must be `isotropic` or `cubic`, got `{other}`"
        ))),
    }
}

pub fn isotropic(c: &Cfg) -> Result<IsotropicModuli> {
    IsotropicModuli::new(c.get("elastic.bulk")?, c.get("elastic.shear")?)
}

pub fn springs(c: &Cfg) -> Result<(SpringSet, f64)> {
    Ok((
        SpringSet::new(c.get("springs.l")?, c.get("springs.t")?, c.get("springs.lnnn")?)?,
        c.get("springs.amp")?,
    ))
}

/// The kernel selected by `kernel.source`.
pub fn kernel(c: &Cfg, g: &GridSpec) -> Result<ElasticKernel> {
    match c.text("kernel.source")?.as_str() {
        "continuum" => {
            let eta: f64 = c.get("misfit.eta")?;
            build_kernel(g, &stiffness(c)?, &scale2(&identity2(), eta))
        }
        "springs" => {
            let (s, amp) = springs(c)?;
            spring_kernel(g, &s, amp)
        }
        other => Err(Error::InvalidParameter(format!(
            "kernel.source must be `continuum` or `springs`, got `{other}`"
        ))),
    }
}

/// The Cahn-Hilliard kernel, or `None` when misfit.eta = 0.
pub fn ch_elastic(c: &Cfg, g: &GridSpec) -> Result<Option<ElasticKernel>> {
    let eta: f64 = c.get("misfit.eta")?;
    if eta == 0.0 {
        return Ok(None);
    }
    ch_kernel(g, &stiffness(c)?, &MisfitSpec::dilatational(eta, c.get("misfit.c0")?))
}

/// The spring kernel for Monte Carlo, or `None` when springs.amp = 0.
pub fn mc_elastic(c: &Cfg, g: &GridSpec) -> Result<Option<ElasticKernel>> {
    let (s, amp) = springs(c)?;
    if amp == 0.0 {
        return Ok(None);
    }
    spring_kernel(g, &s, amp).map(Some)
}

pub fn ch_params(c: &Cfg) -> Result<CHParams> {
    CHParams {
        chi: c.get("ch.chi")?,
        temperature: c.get("ch.temperature")?,
        t0: c.get("ch.t0")?,
        mu_eq: c.get("ch.mu_eq")?,
        mobility: c.get("ch.mobility")?,
        dt: c.get("ch.dt")?,
        noise_amp: c.get("ch.noise_amp")?,
        seed: c.get("seed")?,
    }
    .validated()
}

pub fn mc_params(c: &Cfg) -> Result<MCParams> {
    let rule = match c.text("mc.rule")?.as_str() {
        "metropolis" => Acceptance::Metropolis,
        "glauber" => Acceptance::Glauber,
        other => {
            return Err(Error::InvalidParameter(format!(
                "mc.rule must be `metropolis` or `glauber`, got `{other}`"
            )))
        }
    };
    MCParams {
        temperature: c.get("mc.temperature")?,
        j_nn: c.get("mc.j_nn")?,
        j_nnn: c.get("mc.j_nnn")?,
        rule,
        seed: c.get("seed")?,
    }
    .validated()
}

pub fn phase_elastic(c: &Cfg) -> Result<PhasePair> {
    PhasePair::elastic(
        c.get("phase.k_a")?,
        c.get("phase.g_a")?,
        c.get("phase.k_b")?,
        c.get("phase.g_b")?,
        c.get("phase.q_a")?,
        c.get("phase.q_b")?,
    )
}

pub fn phase_full(c: &Cfg) -> Result<PhasePair> {
    PhasePair {
        sigma: c.get("phase.sigma")?,
        diffusivity: c.get("phase.diffusivity")?,
        c_eq_a: c.get("phase.c_eq_a")?,
        c_eq_b: c.get("phase.c_eq_b")?,
        c0_a: c.get("phase.c0_a")?,
        temperature: c.get("phase.temperature")?,
        ..phase_elastic(c)?
    }
    .validated()
}
