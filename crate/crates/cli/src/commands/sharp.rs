use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use misfit_core::lsw::{lsw_evolve, lsw_stationary_radii, LswOptions, PrecipitateEnsemble};
use misfit_core::sharp::{self as sh, RaftOrientation};
use misfit_core::Error;

use crate::keys::{self, Cfg, Key};
use crate::manifest::OutDir;
use crate::setup;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Plate,
    Sphere,
    Pair,
    Gt,
    Lsw,
    Stability,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::Plate => "plate",
            Which::Sphere => "sphere",
            Which::Pair => "pair",
            Which::Gt => "gt",
            Which::Lsw => "lsw",
            Which::Stability => "stability",
        }
    }

    pub fn keys(self) -> &'static [&'static [Key]] {
        match self {
            Which::Plate => &[keys::PHASE_ELASTIC, keys::PLATE],
            Which::Sphere => &[keys::PHASE_ELASTIC, keys::SPHERE],
            Which::Pair => &[keys::PHASE_ELASTIC, keys::PAIR],
            Which::Gt => &[keys::PHASE_ELASTIC, keys::PHASE_THERMO, keys::GT],
            Which::Lsw => &[keys::SEED, keys::PHASE_ELASTIC, keys::PHASE_THERMO, keys::LSW],
            Which::Stability => &[keys::STABILITY, keys::ELASTIC],
        }
    }

    pub fn columns(self) -> &'static str {
        match self {
            Which::Plate => "phi,k_star,k_bullet,energy,dilute_energy,deviatoric_strain,raft",
            Which::Sphere => "phi,k_star,k_bullet,energy,self_energy",
            Which::Pair => "r1,r2,d,interaction",
            Which::Gt => "r,c_alpha,c_beta,potential_jump",
            Which::Lsw => "t,mean_radius,count,r_star,c_far,volume_drift",
            Which::Stability => "f2,eta,min_trace,n_x,n_y,n_z,margin,stable",
        }
    }
}

pub fn help(w: Which) -> String {
    let notes = match w {
        Which::Plate => "\nenergy is per unit volume; raft is the plate alignment under sharp.t_axial.",
        Which::Sphere => "\nenergy is per unit volume.",
        Which::Pair => "\ninteraction is the elastic energy of the pair at distance d, zero at infinite separation.",
        Which::Gt => "",
        Which::Lsw => "\nOne row every lsw.sample_every steps; volume_drift is the relative change of the summed R^3 over the step.",
        Which::Stability => "\nmin_trace is the minimum over directions n of the dilatational kernel sum (n_x, n_y, n_z empty for isotropic media); stable is margin > 0.",
    };
    format!("{}\nCSV columns: {}{}", keys::help(w.keys()), w.columns(), notes)
}

fn raft(r: RaftOrientation) -> &'static str {
    match r {
        RaftOrientation::Parallel => "parallel",
        RaftOrientation::Perpendicular => "perpendicular",
        RaftOrientation::Indeterminate => "indeterminate",
    }
}

/// The CSV body for one subcommand, header included.
pub fn table(w: Which, c: &Cfg) -> anyhow::Result<String> {
    let mut s = format!("{}\n", w.columns());
    match w {
        Which::Plate => {
            let p = setup::phase_elastic(c)?;
            let phi: f64 = c.get("sharp.phi")?;
            let ks = sh::k_star(&p, phi);
            let kb = sh::k_bullet(&p, phi);
            let e = sh::plate_energy(&p, phi)?;
            let dev = sh::plate_deviatoric_strain(&p, phi)?;
            let r = sh::raft_orientation(c.get("sharp.t_axial")?, p.dq(), p.dg());
            s += &format!("{phi},{ks},{kb},{e},{},{dev},{}\n", sh::plate_dilute_energy(&p), raft(r));
        }
        Which::Sphere => {
            let p = setup::phase_elastic(c)?;
            let phi: f64 = c.get("sharp.phi")?;
            let e = sh::sphere_energy(&p, phi)?;
            s += &format!(
                "{phi},{},{},{e},{}\n",
                sh::k_star(&p, phi),
                sh::k_bullet(&p, phi),
                p.sphere_self_energy()
            );
        }
        Which::Pair => {
            let p = setup::phase_elastic(c)?;
            let (r1, r2, d): (f64, f64, f64) = (c.get("sharp.r1")?, c.get("sharp.r2")?, c.get("sharp.d")?);
            s += &format!("{r1},{r2},{d},{}\n", sh::eshelby_pair(r1, r2, d, &p)?);
        }
        Which::Gt => {
            let p = setup::phase_full(c)?;
            let r: f64 = c.get("sharp.r")?;
            let (ca, cb) = sh::gibbs_thomson(r, &p)?;
            s += &format!("{r},{ca},{cb},{}\n", sh::interface_potential_jump(r, &p));
        }
        Which::Lsw => {
            let p = setup::phase_full(c)?;
            let mut ens = PrecipitateEnsemble::new(initial_radii(c)?)?;
            let opts = LswOptions {
                accuracy: c.get("lsw.accuracy")?,
                sample_every: c.get("lsw.sample_every")?,
                ..LswOptions::default()
            };
            if !(opts.accuracy > 0.0) || opts.sample_every == 0 {
                return Err(Error::InvalidParameter("lsw.accuracy must be positive and lsw.sample_every at least 1".into()).into());
            }
            for x in lsw_evolve(&mut ens, &p, c.get("lsw.t_end")?, c.get("lsw.max_steps")?, &opts)? {
                s += &format!(
                    "{},{},{},{},{},{}\n",
                    x.t, x.mean_radius, x.count, x.r_star, x.c_far, x.volume_drift
                );
            }
        }
        Which::Stability => {
            let f2: f64 = c.get("stab.f2")?;
            let eta: f64 = c.get("misfit.eta")?;
            let (trace, dir, margin) = if c.text("elastic.kind")? == "isotropic" {
                let m = setup::isotropic(c)?;
                (
                    2.0 * m.cahn_modulus(),
                    String::from(",,"),
                    sh::stability_margin_isotropic(f2, eta, &m),
                )
            } else {
                let l = setup::stiffness(c)?;
                let (t, n) = sh::min_dilatational_trace(&l);
                (
                    t,
                    format!("{},{},{}", n[0], n[1], n[2]),
                    sh::stability_margin_anisotropic(f2, eta, &l),
                )
            };
            s += &format!("{f2},{eta},{trace},{dir},{margin},{}\n", margin > 0.0);
        }
    }
    Ok(s)
}

fn initial_radii(c: &Cfg) -> anyhow::Result<Vec<f64>> {
    let n: usize = c.get("lsw.count")?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.get("seed")?);
    match c.text("lsw.initial")?.as_str() {
        "lsw" => {
            let rs: f64 = c.get("lsw.r_star")?;
            if !(rs > 0.0) {
                return Err(Error::InvalidParameter(format!("lsw.r_star must be positive, got {rs}")).into());
            }
            Ok(lsw_stationary_radii(n, rs, &mut rng))
        }
        "uniform" => {
            let (lo, hi): (f64, f64) = (c.get("lsw.r_min")?, c.get("lsw.r_max")?);
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::InvalidParameter(format!("need 0 < lsw.r_min < lsw.r_max, got {lo}, {hi}")).into());
            }
            Ok((0..n).map(|_| rng.gen_range(lo..hi)).collect())
        }
        other => Err(Error::InvalidParameter(format!("lsw.initial must be `lsw` or `uniform`, got `{other}`")).into()),
    }
}

pub fn run(w: Which, config: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let kv = super::load_config(config)?;
    let c = Cfg::new(&kv, w.keys());
    c.warn_unknown();
    let body = table(w, &c)?;
    match out {
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
        Some(dir) => {
            let mut d = OutDir::create(dir)?;
            std::fs::write(d.record(&format!("{}.csv", w.name())), body)?;
            let seed = (w == Which::Lsw).then(|| c.get("seed")).transpose()?;
            d.finish(&format!("sharp {}", w.name()), Some(&kv), seed)?;
        }
    }
    Ok(())
}
