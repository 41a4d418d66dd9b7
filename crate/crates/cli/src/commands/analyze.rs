use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;

use misfit_core::analysis::{domain_size, growth_exponent, saxs_image, structure_factor, GrowthSeries, RadialBin};
use misfit_core::{Error, ScalarField};

use crate::manifest::OutDir;

#[derive(Args)]
#[command(after_help = "Reads snapshots.csv from --in when present, otherwise every snapshot_*.fld \
(t taken from the file number).\nOutputs: metrics.csv (t, domain_size, anisotropy); sk_azimuthal.csv \
(t, k, S, count); saxs_NNNNNN.pgm per snapshot; growth.csv (exponent, prefactor, stderr, points) \
when the final decade holds enough samples.\nWithout --threshold each snapshot is cut at the midpoint \
of its own value range.")]
pub struct AnalyzeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Two-phase cut for the domain size
    #[arg(long)]
    pub threshold: Option<f64>,
}

struct Snap {
    file: String,
    t: f64,
}

fn snapshot_list(dir: &Path) -> anyhow::Result<Vec<Snap>> {
    let index = dir.join("snapshots.csv");
    let mut out = Vec::new();
    if index.exists() {
        let text = std::fs::read_to_string(&index)?;
        for (i, line) in text.lines().enumerate().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            let bad = || Error::Format(format!("{}: line {} is not `file,step,t`", index.display(), i + 1));
            if cols.len() != 3 {
                return Err(bad().into());
            }
            out.push(Snap {
                file: cols[0].to_string(),
                t: cols[2].parse().map_err(|_| bad())?,
            });
        }
    } else {
        for e in std::fs::read_dir(dir)? {
            let name = e?.file_name().to_string_lossy().into_owned();
            if let Some(n) = name.strip_prefix("snapshot_").and_then(|s| s.strip_suffix(".fld")) {
                if let Ok(t) = n.parse::<u64>() {
                    out.push(Snap { file: name, t: t as f64 });
                }
            }
        }
        out.sort_by(|a, b| a.t.total_cmp(&b.t));
    }
    if out.is_empty() {
        return Err(Error::Format(format!("no snapshots in {}", dir.display())).into());
    }
    Ok(out)
}

struct Row {
    domain: f64,
    anisotropy: f64,
    bins: Vec<RadialBin>,
    image: String,
}

fn midpoint(f: &ScalarField) -> f64 {
    let (lo, hi) = f
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    0.5 * (lo + hi)
}

pub fn run(a: &AnalyzeArgs) -> anyhow::Result<()> {
    let snaps = snapshot_list(&a.input)?;
    let mut dir = OutDir::create(&a.out)?;
    let rows: Vec<Row> = snaps
        .par_iter()
        .enumerate()
        .map(|(i, s)| -> misfit_core::Result<Row> {
            let f = ScalarField::load(&a.input.join(&s.file))?;
            let sp = structure_factor(&f);
            let th = a.threshold.unwrap_or_else(|| midpoint(&f));
            // A single-phase snapshot has no domains; report NaN rather
            // than failing the whole series.
            let domain = domain_size(&f, th).unwrap_or(f64::NAN);
            let image = format!("saxs_{i:06}.pgm");
            saxs_image(&sp, &a.out.join(&image))?;
            Ok(Row {
                domain,
                anisotropy: sp.anisotropy_ratio(),
                bins: sp.azimuthal(),
                image,
            })
        })
        .collect::<misfit_core::Result<_>>()?;

    let mut m = dir.writer("metrics.csv")?;
    let mut sk = dir.writer("sk_azimuthal.csv")?;
    writeln!(m, "t,domain_size,anisotropy")?;
    writeln!(sk, "t,k,S,count")?;
    let mut series = GrowthSeries::default();
    for (s, r) in snaps.iter().zip(&rows) {
        writeln!(m, "{},{},{}", s.t, r.domain, r.anisotropy)?;
        for b in &r.bins {
            writeln!(sk, "{},{},{},{}", s.t, b.k, b.mean, b.count)?;
        }
        if s.t > 0.0 && r.domain.is_finite() && r.domain > 0.0 {
            series.push(s.t, r.domain);
        }
    }
    m.flush()?;
    sk.flush()?;
    drop((m, sk));
    for r in &rows {
        dir.record(&r.image);
    }

    match growth_exponent(&series.final_decade()) {
        Ok(fit) => {
            let mut w = dir.writer("growth.csv")?;
            writeln!(w, "exponent,prefactor,stderr,points")?;
            writeln!(w, "{},{},{},{}", fit.exponent, fit.prefactor, fit.stderr, fit.points)?;
            w.flush()?;
        }
        Err(e) => eprintln!("warning: no growth fit: {e}"),
    }
    dir.finish("analyze", None, None)?;
    Ok(())
}
