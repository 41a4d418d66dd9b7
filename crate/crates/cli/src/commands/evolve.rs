use std::io::Write;
use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use misfit_core::atomic::{kawasaki_sweep, total_energy, SpinLattice, SweepStats};
use misfit_core::diffuse::{initial_condition, run_ch, CHState};
use misfit_core::Error;

use crate::keys::{self, Cfg, Key};
use crate::manifest::OutDir;
use crate::setup;

pub const CH_KEYS: &[&[Key]] = &[keys::SEED, keys::GRID, keys::CH, keys::ELASTIC, keys::MISFIT];
pub const MC_KEYS: &[&[Key]] = &[keys::SEED, keys::GRID, keys::MC, keys::SPRINGS];

/// The initial field and the noise draw from separate streams of one seed.
const INIT_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn snapshot_name(n: u64) -> String {
    format!("snapshot_{n:06}.fld")
}

pub fn ch(config: &Path, out: &Path, steps: u64, snap_every: u64) -> anyhow::Result<()> {
    let kv = super::load_config(config)?;
    let c = Cfg::new(&kv, CH_KEYS);
    c.warn_unknown();
    let g = setup::grid(&c)?;
    let p = setup::ch_params(&c)?;
    let kernel = setup::ch_elastic(&c, &g)?;
    let cbar: f64 = c.get("ch.cbar")?;
    let delta: f64 = c.get("ch.delta")?;
    if !(cbar > 0.0 && cbar < 1.0 && delta >= 0.0 && cbar - 2.0 * delta > 0.0 && cbar + 2.0 * delta < 1.0) {
        return Err(Error::InvalidParameter(format!("ch.cbar ± 2·ch.delta must stay inside (0, 1), got {cbar} ± 2·{delta}")).into());
    }
    let mut s = CHState::new(initial_condition(&g, cbar, delta, p.seed ^ INIT_STREAM), kernel, p.seed)?;

    let mut dir = OutDir::create(out)?;
    let mut energy = dir.writer("energy.csv")?;
    let mut index = dir.writer("snapshots.csv")?;
    writeln!(energy, "t,F,F_bulk,F_grad,F_elastic")?;
    writeln!(index, "file,step,t")?;
    let mut names = Vec::new();
    let mut emit = |s: &mut CHState| -> misfit_core::Result<()> {
        let e = s.record_energy(&p);
        let io = |r: std::io::Result<()>| r.map_err(Error::from);
        io(writeln!(
            energy,
            "{},{},{},{},{}",
            s.time(),
            e.total(),
            e.bulk,
            e.gradient,
            e.elastic
        ))?;
        let name = snapshot_name(s.steps());
        io(writeln!(index, "{name},{},{}", s.steps(), s.time()))?;
        names.push(name.clone());
        s.field().save(&out.join(&name))
    };
    run_ch(&mut s, &p, steps, snap_every, &mut emit)?;
    if steps > 0 && (snap_every == 0 || !steps.is_multiple_of(snap_every)) {
        emit(&mut s)?;
    }
    energy.flush()?;
    index.flush()?;
    drop((energy, index));
    for n in &names {
        dir.record(n);
    }

    let series = &s.energy_series;
    let monotone = series
        .windows(2)
        .all(|w| w[1].energy.total() <= w[0].energy.total() + 1e-12 * w[0].energy.total().abs());
    let f = s.field();
    let (lo, hi) = f
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mut w = dir.writer("summary.csv")?;
    writeln!(w, "steps,t,F_initial,F_final,energy_nonincreasing,mean_c,min_c,max_c")?;
    writeln!(
        w,
        "{},{},{},{},{monotone},{},{lo},{hi}",
        s.steps(),
        s.time(),
        series[0].energy.total(),
        series[series.len() - 1].energy.total(),
        f.mean()
    )?;
    w.flush()?;
    drop(w);
    dir.finish("evolve-ch", Some(&kv), Some(p.seed))?;
    Ok(())
}

pub fn mc(config: &Path, out: &Path, sweeps: u64, snap_every: u64) -> anyhow::Result<()> {
    let kv = super::load_config(config)?;
    let c = Cfg::new(&kv, MC_KEYS);
    c.warn_unknown();
    let g = setup::grid(&c)?;
    if g.dim() != 2 {
        return Err(Error::InvalidParameter("evolve-mc runs on the square lattice; set grid.dim = 2".into()).into());
    }
    let p = setup::mc_params(&c)?;
    let kernel = setup::mc_elastic(&c, &g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ INIT_STREAM);
    let mut l = SpinLattice::random(g, c.get("mc.composition")?, kernel, &mut rng)?;

    let mut dir = OutDir::create(out)?;
    let mut energy = dir.writer("energy.csv")?;
    let mut index = dir.writer("snapshots.csv")?;
    writeln!(energy, "mcs,F_chem,F_elastic,acceptance")?;
    writeln!(index, "file,step,t")?;
    let mut names = Vec::new();
    let mut total = SweepStats::default();
    let mut emit = |s: u64, l: &SpinLattice, acc: f64| -> misfit_core::Result<()> {
        let e = total_energy(l, &p);
        let io = |r: std::io::Result<()>| r.map_err(Error::from);
        io(writeln!(energy, "{s},{},{},{acc}", e.chemical, e.elastic))?;
        let name = snapshot_name(s);
        io(writeln!(index, "{name},{s},{s}"))?;
        names.push(name.clone());
        l.to_field().save(&out.join(&name))
    };
    // Same chain as atomic::run_mc, plus a row for the final sweep.
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    emit(0, &l, 0.0)?;
    let mut acc = SweepStats::default();
    for s in 1..=sweeps {
        let st = kawasaki_sweep(&mut l, &p, &mut rng);
        acc.attempts += st.attempts;
        acc.accepted += st.accepted;
        if (snap_every > 0 && s % snap_every == 0) || s == sweeps {
            emit(s, &l, acc.acceptance())?;
            total.attempts += acc.attempts;
            total.accepted += acc.accepted;
            acc = SweepStats::default();
        }
    }
    energy.flush()?;
    index.flush()?;
    drop((energy, index));
    for n in &names {
        dir.record(n);
    }

    let e = total_energy(&l, &p);
    let mut w = dir.writer("summary.csv")?;
    writeln!(w, "sweeps,composition,F_chem,F_elastic,acceptance")?;
    writeln!(
        w,
        "{sweeps},{},{},{},{}",
        l.composition(),
        e.chemical,
        e.elastic,
        total.acceptance()
    )?;
    w.flush()?;
    drop(w);
    dir.finish("evolve-mc", Some(&kv), Some(p.seed))?;
    Ok(())
}
