use std::io::Write;
use std::path::Path;

use crate::keys::{self, Cfg, Key};
use crate::manifest::OutDir;
use crate::setup;

pub const KEYS: &[&[Key]] = &[keys::GRID, keys::KERNEL, keys::ELASTIC, keys::MISFIT, keys::SPRINGS];

pub const RAYS: usize = 360;

pub fn dump(config: &Path, out: &Path) -> anyhow::Result<()> {
    let kv = super::load_config(config)?;
    let c = Cfg::new(&kv, KEYS);
    c.warn_unknown();
    let g = setup::grid(&c)?;
    let k = setup::kernel(&c, &g)?;
    let mut dir = OutDir::create(out)?;
    k.to_field().save(&dir.record("kernel.fld"))?;
    let mut w = dir.writer("kernel_rays.csv")?;
    writeln!(w, "theta_deg,B")?;
    for i in 0..RAYS {
        let deg = i as f64 * 360.0 / RAYS as f64;
        writeln!(w, "{deg},{}", k.along(deg.to_radians())?)?;
    }
    w.flush()?;
    drop(w);
    dir.finish("kernel dump", Some(&kv), None)?;
    Ok(())
}
