//! Config keys: one table drives `--help`, defaults and required-key errors.

use std::fmt::Display;
use std::str::FromStr;

use misfit_core::{Error, KvConfig};

pub struct Key {
    pub name: &'static str,
    pub unit: &'static str,
    /// `None` marks a required key.
    pub default: Option<&'static str>,
    pub doc: &'static str,
}

const fn key(name: &'static str, unit: &'static str, default: Option<&'static str>, doc: &'static str) -> Key {
    Key { name, unit, default, doc }
}

pub const SEED: &[Key] = &[key("seed", "-", Some("0"), "random seed; equal seeds give identical runs")];

pub const GRID: &[Key] = &[
    key("grid.n", "sites", Some("64"), "sites per side (even, >= 4)"),
    key("grid.dim", "-", Some("2"), "2 or 3"),
    key("grid.a", "length", Some("1"), "lattice spacing"),
];

pub const ELASTIC: &[Key] = &[
    key("elastic.kind", "-", Some("cubic"), "`isotropic` or `cubic`"),
    key("elastic.bulk", "energy/length^d", None, "bulk modulus K (isotropic)"),
    key("elastic.shear", "energy/length^d", None, "shear modulus G (isotropic)"),
    key("elastic.c11", "energy/length^d", None, "C11 (cubic)"),
    key("elastic.c12", "energy/length^d", None, "C12 (cubic)"),
    key("elastic.c44", "energy/length^d", None, "C44 (cubic)"),
];

pub const MISFIT: &[Key] = &[
    key(
        "misfit.eta",
        "strain",
        Some("0"),
        "dilatational misfit per unit concentration; 0 disables elasticity",
    ),
    key(
        "misfit.c0",
        "concentration",
        Some("0.5"),
        "reference concentration of the stress-free strain",
    ),
];

pub const SPRINGS: &[Key] = &[
    key(
        "springs.l",
        "energy/length^2",
        Some("1"),
        "nearest-neighbour longitudinal stiffness",
    ),
    key(
        "springs.t",
        "energy/length^2",
        Some("0.5"),
        "nearest-neighbour transverse stiffness",
    ),
    key(
        "springs.lnnn",
        "energy/length^2",
        Some("0.5"),
        "next-nearest-neighbour longitudinal stiffness",
    ),
    key(
        "springs.amp",
        "length",
        Some("0"),
        "misfit amplitude of the spring lattice; 0 disables elasticity",
    ),
];

pub const KERNEL: &[Key] = &[key(
    "kernel.source",
    "-",
    Some("continuum"),
    "`continuum` (elastic.*, misfit.eta) or `springs` (springs.*, 2-D)",
)];

pub const CH: &[Key] = &[
    key("ch.temperature", "energy", None, "temperature T"),
    key("ch.t0", "energy", Some("1"), "mean-field ordering temperature T0"),
    key("ch.chi", "energy*length^2", Some("1"), "gradient-energy coefficient"),
    key("ch.mu_eq", "energy", Some("0"), "linear term of the bulk free energy"),
    key("ch.mobility", "length^2/(energy*time)", Some("1"), "mobility M"),
    key("ch.dt", "time", Some("0.1"), "time step"),
    key("ch.noise_amp", "-", Some("0"), "conserved-noise amplitude; 0 disables noise"),
    key("ch.cbar", "concentration", Some("0.5"), "mean concentration"),
    key(
        "ch.delta",
        "concentration",
        Some("0.05"),
        "half-width of the uniform initial fluctuations",
    ),
];

pub const MC: &[Key] = &[
    key("mc.temperature", "energy", None, "temperature T"),
    key(
        "mc.j_nn",
        "energy",
        Some("1"),
        "nearest-neighbour coupling; positive attracts like atoms",
    ),
    key("mc.j_nnn", "energy", Some("0"), "next-nearest-neighbour coupling"),
    key("mc.composition", "fraction", Some("0.5"), "fraction of +1 sites"),
    key("mc.rule", "-", Some("metropolis"), "`metropolis` or `glauber`"),
];

pub const PHASE_ELASTIC: &[Key] = &[
    key("phase.k_a", "energy/length^3", None, "bulk modulus of the precipitate (α)"),
    key("phase.g_a", "energy/length^3", None, "shear modulus of the precipitate (α)"),
    key("phase.k_b", "energy/length^3", None, "bulk modulus of the matrix (β)"),
    key("phase.g_b", "energy/length^3", None, "shear modulus of the matrix (β)"),
    key("phase.q_a", "strain", None, "stress-free dilatation of α"),
    key("phase.q_b", "strain", Some("0"), "stress-free dilatation of β"),
];

pub const PHASE_THERMO: &[Key] = &[
    key("phase.sigma", "energy/length^2", None, "interfacial tension"),
    key("phase.diffusivity", "length^2/time", Some("1"), "matrix diffusivity"),
    key(
        "phase.c_eq_a",
        "concentration",
        None,
        "flat-interface equilibrium concentration in α",
    ),
    key(
        "phase.c_eq_b",
        "concentration",
        None,
        "flat-interface equilibrium concentration in β",
    ),
    key(
        "phase.c0_a",
        "concentration",
        Some("1"),
        "α composition used for the volume balance",
    ),
    key("phase.temperature", "energy", None, "temperature"),
];

pub const PLATE: &[Key] = &[
    key("sharp.phi", "fraction", None, "volume fraction of α"),
    key(
        "sharp.t_axial",
        "energy/length^3",
        Some("0"),
        "axial applied stress, for the raft column",
    ),
];

pub const SPHERE: &[Key] = &[key("sharp.phi", "fraction", None, "volume fraction of α")];

pub const PAIR: &[Key] = &[
    key("sharp.r1", "length", None, "radius of the first sphere"),
    key("sharp.r2", "length", None, "radius of the second sphere"),
    key("sharp.d", "length", None, "centre distance, > r1 + r2"),
];

pub const GT: &[Key] = &[key("sharp.r", "length", None, "precipitate radius")];

pub const LSW: &[Key] = &[
    key("lsw.count", "-", Some("1000"), "initial number of precipitates"),
    key("lsw.initial", "-", Some("lsw"), "`lsw` (stationary distribution) or `uniform`"),
    key("lsw.r_star", "length", Some("1"), "initial critical radius for `lsw` starts"),
    key("lsw.r_min", "length", Some("0.5"), "smallest radius for `uniform` starts"),
    key("lsw.r_max", "length", Some("1.5"), "largest radius for `uniform` starts"),
    key("lsw.t_end", "time", None, "end time"),
    key("lsw.max_steps", "-", Some("10000000"), "step cap"),
    key("lsw.accuracy", "-", Some("0.01"), "largest step in units of R*^3/(3A)"),
    key("lsw.sample_every", "-", Some("1"), "steps between CSV rows"),
];

pub const STABILITY: &[Key] = &[
    key("stab.f2", "energy", None, "curvature f'' of the bulk free energy"),
    key("misfit.eta", "strain", None, "dilatational misfit per unit concentration"),
];

/// `--help` text for a set of key groups.
pub fn help(groups: &[&[Key]]) -> String {
    let mut s = String::from("Config keys (key [unit] = default):\n");
    for k in groups.iter().flat_map(|g| g.iter()) {
        let d = k.default.unwrap_or("required");
        s.push_str(&format!("  {} [{}] = {}\n      {}\n", k.name, k.unit, d, k.doc));
    }
    s
}

/// A config file read against the key table.
pub struct Cfg<'a> {
    pub kv: &'a KvConfig,
    groups: Vec<&'static [Key]>,
}

impl<'a> Cfg<'a> {
    pub fn new(kv: &'a KvConfig, groups: &[&'static [Key]]) -> Self {
        Self {
            kv,
            groups: groups.to_vec(),
        }
    }

    fn lookup(&self, name: &str) -> Option<&'static Key> {
        self.groups.iter().flat_map(|g| g.iter()).find(|k| k.name == name)
    }

    pub fn get<T: FromStr>(&self, name: &str) -> Result<T, Error>
    where
        T::Err: Display,
    {
        if self.kv.contains(name) {
            return self.kv.require(name);
        }
        match self.lookup(name).and_then(|k| k.default) {
            Some(d) => d.parse().map_err(|e: T::Err| Error::BadValue {
                key: name.to_string(),
                value: d.to_string(),
                reason: e.to_string(),
            }),
            None => Err(Error::MissingKey(name.to_string())),
        }
    }

    pub fn text(&self, name: &str) -> Result<String, Error> {
        self.get::<String>(name)
    }

    /// Keys in the file that no group knows about, usually typos.
    pub fn unknown_keys(&self) -> Vec<String> {
        self.kv
            .iter()
            .filter(|(k, _)| self.lookup(k).is_none())
            .map(|(k, _)| k.to_string())
            .collect()
    }

    pub fn warn_unknown(&self) {
        for k in self.unknown_keys() {
            eprintln!("warning: unknown config key `{k}` ignored");
        }
    }
}
