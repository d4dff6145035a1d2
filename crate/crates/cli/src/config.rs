//! Config-file parsing: TOML with mandatory unit suffixes on dimensional
//! quantities, converted to SI at parse time. Unknown keys are rejected.

use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;
use toml::Value;

use gravcat_core::constants::PhysicalConstants;
use gravcat_core::grid::GridOptions;
use gravcat_core::params::CollapseParams;
use gravcat_core::protocol::{ExperimentProtocol, ProtocolName, Violation};
use gravcat_core::rates::TheoryId;
use gravcat_core::scenario::EngineKind;
use gravcat_core::sn::SnBudget;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("field `{key}` requires a unit suffix (e.g. \"{example}\")")]
    MissingUnit { key: String, example: &'static str },

    #[error("field `{key}`: unknown unit `{unit}`; valid units: {valid}")]
    UnknownUnit {
        key: String,
        unit: String,
        valid: &'static str,
    },

    #[error("field `{key}`: {message}")]
    BadValue { key: String, message: String },

    #[error("protocol invariants violated:\n{}", list_violations(.0))]
    InvalidProtocol(Vec<Violation>),

    #[error("{0}")]
    Invalid(String),
}

fn list_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("  - {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Dimension of a config quantity; selects the unit table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Mass,
    Time,
    Rate,
    MassDensity,
    VolumeRate,
    Energy,
    Force,
    Dimensionless,
}

impl Dimension {
    fn units(&self) -> &'static [(&'static str, f64)] {
        const AMU: f64 = 1.660_539_066_60e-27;
        const EV: f64 = 1.602_176_634e-19;
        match self {
            Dimension::Length => &[
                ("m", 1.0),
                ("cm", 1e-2),
                ("mm", 1e-3),
                ("um", 1e-6),
                ("µm", 1e-6),
                ("nm", 1e-9),
                ("pm", 1e-12),
                ("fm", 1e-15),
            ],
            Dimension::Mass => &[
                ("kg", 1.0),
                ("g", 1e-3),
                ("mg", 1e-6),
                ("ug", 1e-9),
                ("µg", 1e-9),
                ("ng", 1e-12),
                ("pg", 1e-15),
                ("amu", AMU),
                ("u", AMU),
            ],
            Dimension::Time => &[
                ("s", 1.0),
                ("ms", 1e-3),
                ("us", 1e-6),
                ("µs", 1e-6),
                ("ns", 1e-9),
            ],
            Dimension::Rate => &[("1/s", 1.0), ("Hz", 1.0), ("kHz", 1e3), ("mHz", 1e-3)],
            Dimension::MassDensity => &[
                ("kg/m3", 1.0),
                ("kg/m^3", 1.0),
                ("g/cm3", 1e3),
                ("g/cm^3", 1e3),
            ],
            Dimension::VolumeRate => &[("m3/s", 1.0), ("m^3/s", 1.0)],
            Dimension::Energy => &[("J", 1.0), ("eV", EV), ("aJ", 1e-18), ("zJ", 1e-21)],
            Dimension::Force => &[
                ("N", 1.0),
                ("pN", 1e-12),
                ("fN", 1e-15),
                ("aN", 1e-18),
                ("zN", 1e-21),
            ],
            Dimension::Dimensionless => &[],
        }
    }

    fn valid_list(&self) -> &'static str {
        match self {
            Dimension::Length => "m, cm, mm, um, nm, pm, fm",
            Dimension::Mass => "kg, g, mg, ug, ng, pg, amu",
            Dimension::Time => "s, ms, us, ns",
            Dimension::Rate => "1/s, Hz, kHz, mHz",
            Dimension::MassDensity => "kg/m3, g/cm3",
            Dimension::VolumeRate => "m3/s",
            Dimension::Energy => "J, eV, aJ, zJ",
            Dimension::Force => "N, pN, fN, aN, zN",
            Dimension::Dimensionless => "(none)",
        }
    }

    fn example(&self) -> &'static str {
        match self {
            Dimension::Length => "1 pm",
            Dimension::Mass => "4.0 ng",
            Dimension::Time => "0.5 s",
            Dimension::Rate => "10 1/s",
            Dimension::MassDensity => "11.34 g/cm3",
            Dimension::VolumeRate => "1e-36 m3/s",
            Dimension::Energy => "1e-19 J",
            Dimension::Force => "14 zN",
            Dimension::Dimensionless => "2.0",
        }
    }
}

/// Parse "<number> <unit>" into SI. Dimensionless quantities take bare
/// numbers; everything else must carry a suffix. The number is the longest
/// leading substring that parses as f64, so "1e-7 m" splits correctly.
pub fn parse_quantity(raw: &Value, key: &str, dim: Dimension) -> Result<f64, ConfigError> {
    match raw {
        Value::String(s) => {
            let text = s.trim();
            if dim == Dimension::Dimensionless {
                return text.parse::<f64>().map_err(|_| ConfigError::BadValue {
                    key: key.into(),
                    message: format!("cannot parse number from `{text}`"),
                });
            }
            let mut best: Option<(f64, &str)> = None;
            for i in 1..=text.len() {
                if !text.is_char_boundary(i) {
                    continue;
                }
                if let Ok(number) = text[..i].trim().parse::<f64>() {
                    best = Some((number, text[i..].trim()));
                }
            }
            let (number, unit) = best.ok_or_else(|| ConfigError::BadValue {
                key: key.into(),
                message: format!("cannot parse a number from `{text}`"),
            })?;
            if unit.is_empty() {
                return Err(ConfigError::MissingUnit {
                    key: key.into(),
                    example: dim.example(),
                });
            }
            for (name, factor) in dim.units() {
                if *name == unit {
                    return Ok(number * factor);
                }
            }
            Err(ConfigError::UnknownUnit {
                key: key.into(),
                unit: unit.into(),
                valid: dim.valid_list(),
            })
        }
        Value::Integer(i) if dim == Dimension::Dimensionless => Ok(*i as f64),
        Value::Float(f) if dim == Dimension::Dimensionless => Ok(*f),
        Value::Integer(_) | Value::Float(_) => Err(ConfigError::MissingUnit {
            key: key.into(),
            example: dim.example(),
        }),
        other => Err(ConfigError::BadValue {
            key: key.into(),
            message: format!("expected a quantity string, got {}", other.type_str()),
        }),
    }
}

#[cfg(test)]
fn parse_si(text: &str, dim: Dimension) -> Result<f64, ConfigError> {
    parse_quantity(&Value::String(text.into()), "test", dim)
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ProtocolSection {
    preset: Option<String>,
    sphere_mass: Option<Value>,
    sphere_radius: Option<Value>,
    sphere_density: Option<Value>,
    #[serde(rename = "cat_separation_L")]
    cat_separation_l: Option<Value>,
    probe_mass: Option<Value>,
    surface_gap_a: Option<Value>,
    tunneling_rate_nu: Option<Value>,
    probe_resolution_tau: Option<Value>,
    coherence_time: Option<Value>,
    slit_width: Option<Value>,
    probe_pointer_nucleons: Option<Value>,
    pointer_separation: Option<Value>,
    probe_sensitivity: Option<Value>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunSection {
    theories: Option<Vec<String>>,
    engine: Option<String>,
    n_traj: Option<u64>,
    horizon: Option<Value>,
    dt: Option<Value>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<String>,
    formats: Option<Vec<String>>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CollapseSection {
    lambda_grw: Option<Value>,
    sigma_grw: Option<Value>,
    gamma_csl: Option<Value>,
    r_c: Option<Value>,
    gamma_td_csl: Option<Value>,
    sigma_td_csl: Option<Value>,
    sigma_td_dp: Option<Value>,
    r0_dp: Option<Value>,
    kappa_td: Option<Value>,
}

/// Constant overrides take bare numbers: they exist exactly for rescaled-unit
/// runs, where the values are already in the run's unit system.
#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConstantsSection {
    #[serde(rename = "G")]
    g: Option<f64>,
    hbar: Option<f64>,
    c: Option<f64>,
    k_b: Option<f64>,
    m_nucleon: Option<f64>,
    l_planck: Option<f64>,
    amu: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SnSection {
    sigma0: Option<Value>,
    mass: Option<Value>,
    dt: Option<Value>,
    n_steps: Option<u64>,
    n_intervals: Option<u64>,
    box_sigmas: Option<f64>,
    mass_lo: Option<Value>,
    mass_hi: Option<Value>,
    horizon: Option<Value>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct GridSection {
    n: Option<u64>,
    sigma_fraction: Option<f64>,
    well_width_fraction: Option<f64>,
    well_depth: Option<Value>,
    max_substeps: Option<u64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    protocol: Option<ProtocolSection>,
    run: Option<RunSection>,
    output: Option<OutputSection>,
    collapse: Option<CollapseSection>,
    constants: Option<ConstantsSection>,
    sn: Option<SnSection>,
    grid: Option<GridSection>,
}

/// Output file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(ConfigError::Invalid(format!(
                "unknown output format `{other}`; valid formats: csv, json"
            ))),
        }
    }
}

/// Settings for the radial SN subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct SnSettings {
    pub sigma0: f64,
    pub mass: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub mass_lo: f64,
    pub mass_hi: f64,
    pub budget: SnBudget,
}

impl Default for SnSettings {
    fn default() -> Self {
        let consts = PhysicalConstants::default();
        let sigma0 = 0.5e-6;
        let mass = 1e10 * consts.amu;
        // collapse-regime demo: run far enough to see the contraction set in,
        // stopping before the post-collapse bounce
        let time_unit = mass * sigma0 * sigma0 / consts.hbar;
        Self {
            sigma0,
            mass,
            dt: 0.35 * time_unit / 600.0,
            n_steps: 600,
            mass_lo: 1e9 * consts.amu,
            mass_hi: 3.2e10 * consts.amu,
            budget: SnBudget::default(),
        }
    }
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub protocol: ExperimentProtocol,
    pub theories: Vec<TheoryId>,
    pub engine: EngineKind,
    pub n_traj: usize,
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    pub collapse: CollapseParams,
    pub constants: PhysicalConstants,
    pub sn: SnSettings,
    pub grid: GridOptions,
    /// Quoted probe force sensitivity, N; carried through to outputs only.
    pub probe_sensitivity: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            protocol: ExperimentProtocol::romero_isart(),
            theories: vec![TheoryId::CqtNewton],
            engine: EngineKind::TwoSite,
            n_traj: 0,
            horizon: 2.0,
            dt: 0.01,
            seed: 1,
            out_dir: PathBuf::from("."),
            formats: vec![OutputFormat::Csv, OutputFormat::Json],
            collapse: CollapseParams::default(),
            constants: PhysicalConstants::default(),
            sn: SnSettings::default(),
            grid: GridOptions::default(),
            probe_sensitivity: None,
        }
    }
}

/// Read and fully validate a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

/// Parse a config from TOML text.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    let mut cfg = RunConfig::default();

    if let Some(section) = raw.constants {
        let c = &mut cfg.constants;
        if let Some(v) = section.g {
            c.g = v;
        }
        if let Some(v) = section.hbar {
            c.hbar = v;
        }
        if let Some(v) = section.c {
            c.c = v;
        }
        if let Some(v) = section.k_b {
            c.k_b = v;
        }
        if let Some(v) = section.m_nucleon {
            c.m_nucleon = v;
        }
        if let Some(v) = section.l_planck {
            c.l_planck = v;
        }
        if let Some(v) = section.amu {
            c.amu = v;
        }
        cfg.constants
            .validate()
            .map_err(|field| ConfigError::BadValue {
                key: format!("constants.{field}"),
                message: "must be strictly positive".into(),
            })?;
    }

    if let Some(section) = raw.collapse {
        let p = &mut cfg.collapse;
        let q = |v: &Option<Value>, key: &str, dim| -> Result<Option<f64>, ConfigError> {
            v.as_ref()
                .map(|raw| parse_quantity(raw, &format!("collapse.{key}"), dim))
                .transpose()
        };
        if let Some(v) = q(&section.lambda_grw, "lambda_grw", Dimension::Rate)? {
            p.lambda_grw = v;
        }
        if let Some(v) = q(&section.sigma_grw, "sigma_grw", Dimension::Length)? {
            p.sigma_grw = v;
        }
        if let Some(v) = q(&section.gamma_csl, "gamma_csl", Dimension::VolumeRate)? {
            p.gamma_csl = v;
        }
        if let Some(v) = q(&section.r_c, "r_c", Dimension::Length)? {
            p.r_c = v;
        }
        if let Some(v) = q(&section.gamma_td_csl, "gamma_td_csl", Dimension::VolumeRate)? {
            p.gamma_td_csl = v;
        }
        if let Some(v) = q(&section.sigma_td_csl, "sigma_td_csl", Dimension::Length)? {
            p.sigma_td_csl = v;
        }
        if let Some(v) = q(&section.sigma_td_dp, "sigma_td_dp", Dimension::Length)? {
            p.sigma_td_dp = v;
        }
        if let Some(v) = q(&section.r0_dp, "r0_dp", Dimension::Length)? {
            p.r0_dp = v;
        }
        if let Some(v) = q(&section.kappa_td, "kappa_td", Dimension::Dimensionless)? {
            p.kappa_td = v;
        }
        cfg.collapse
            .validate()
            .map_err(|field| ConfigError::BadValue {
                key: format!("collapse.{field}"),
                message: "must be strictly positive".into(),
            })?;
    }

    if let Some(section) = raw.protocol {
        cfg.protocol = resolve_protocol(&section)?;
        if let Some(v) = &section.probe_sensitivity {
            cfg.probe_sensitivity = Some(parse_quantity(
                v,
                "protocol.probe_sensitivity",
                Dimension::Force,
            )?);
        }
    }

    if let Some(section) = raw.run {
        if let Some(names) = section.theories {
            let mut theories = Vec::with_capacity(names.len());
            for name in &names {
                let t = TheoryId::from_str(name)
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                theories.push(t);
            }
            if theories.is_empty() {
                return Err(ConfigError::Invalid(
                    "run.theories must not be empty".into(),
                ));
            }
            cfg.theories = theories;
        }
        if let Some(engine) = section.engine {
            cfg.engine = match engine.as_str() {
                "two_site" => EngineKind::TwoSite,
                "grid" => EngineKind::Grid,
                other => {
                    return Err(ConfigError::Invalid(format!(
                        "unknown engine `{other}`; valid engines: two_site, grid"
                    )))
                }
            };
        }
        if let Some(n) = section.n_traj {
            cfg.n_traj = n as usize;
        }
        if let Some(v) = &section.horizon {
            cfg.horizon = parse_quantity(v, "run.horizon", Dimension::Time)?;
        }
        if let Some(v) = &section.dt {
            cfg.dt = parse_quantity(v, "run.dt", Dimension::Time)?;
        }
        if let Some(s) = section.seed {
            cfg.seed = s;
        }
    }

    if let Some(section) = raw.output {
        if let Some(dir) = section.dir {
            cfg.out_dir = PathBuf::from(dir);
        }
        if let Some(formats) = section.formats {
            let parsed: Result<Vec<OutputFormat>, _> =
                formats.iter().map(|f| OutputFormat::from_str(f)).collect();
            cfg.formats = parsed?;
        }
    }

    if let Some(section) = raw.sn {
        let sn = &mut cfg.sn;
        if let Some(v) = &section.sigma0 {
            sn.sigma0 = parse_quantity(v, "sn.sigma0", Dimension::Length)?;
        }
        if let Some(v) = &section.mass {
            sn.mass = parse_quantity(v, "sn.mass", Dimension::Mass)?;
        }
        if let Some(v) = &section.dt {
            sn.dt = parse_quantity(v, "sn.dt", Dimension::Time)?;
        }
        if let Some(v) = section.n_steps {
            sn.n_steps = v as usize;
        }
        if let Some(v) = section.n_intervals {
            sn.budget.n_intervals = v as usize;
        }
        if let Some(v) = section.box_sigmas {
            sn.budget.box_sigmas = v;
        }
        if let Some(v) = &section.mass_lo {
            sn.mass_lo = parse_quantity(v, "sn.mass_lo", Dimension::Mass)?;
        }
        if let Some(v) = &section.mass_hi {
            sn.mass_hi = parse_quantity(v, "sn.mass_hi", Dimension::Mass)?;
        }
        if let Some(v) = &section.horizon {
            sn.budget.horizon = parse_quantity(v, "sn.horizon", Dimension::Time)?;
        }
    }

    if let Some(section) = raw.grid {
        let g = &mut cfg.grid;
        if let Some(v) = section.n {
            g.n = v as usize;
        }
        if let Some(v) = section.sigma_fraction {
            g.sigma_fraction = v;
        }
        if let Some(v) = section.well_width_fraction {
            g.well_width_fraction = v;
        }
        if let Some(v) = &section.well_depth {
            g.well_depth = parse_quantity(v, "grid.well_depth", Dimension::Energy)?;
        }
        if let Some(v) = section.max_substeps {
            g.max_substeps = v as usize;
        }
    }

    validate_run(&cfg)?;
    Ok(cfg)
}

fn resolve_protocol(section: &ProtocolSection) -> Result<ExperimentProtocol, ConfigError> {
    let mut protocol = match &section.preset {
        Some(name) => {
            let parsed = ProtocolName::from_str(name)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            ExperimentProtocol::preset(parsed).map_err(|e| ConfigError::Invalid(e.to_string()))?
        }
        None => ExperimentProtocol {
            name: ProtocolName::Custom,
            ..ExperimentProtocol::romero_isart()
        },
    };
    let q = |v: &Option<Value>, key: &str, dim| -> Result<Option<f64>, ConfigError> {
        v.as_ref()
            .map(|raw| parse_quantity(raw, &format!("protocol.{key}"), dim))
            .transpose()
    };
    if let Some(v) = q(&section.sphere_mass, "sphere_mass", Dimension::Mass)? {
        protocol.sphere_mass = v;
    }
    if let Some(v) = q(&section.sphere_radius, "sphere_radius", Dimension::Length)? {
        protocol.sphere_radius = v;
    }
    if let Some(v) = q(&section.sphere_density, "sphere_density", Dimension::MassDensity)? {
        protocol.sphere_density = v;
    }
    if let Some(v) = q(&section.cat_separation_l, "cat_separation_L", Dimension::Length)? {
        protocol.cat_separation_l = v;
    }
    if let Some(v) = q(&section.probe_mass, "probe_mass", Dimension::Mass)? {
        protocol.probe_mass = v;
    }
    if let Some(v) = q(&section.surface_gap_a, "surface_gap_a", Dimension::Length)? {
        protocol.surface_gap_a = v;
    }
    if let Some(v) = q(&section.tunneling_rate_nu, "tunneling_rate_nu", Dimension::Rate)? {
        protocol.tunneling_rate_nu = v;
    }
    if let Some(v) = q(&section.probe_resolution_tau, "probe_resolution_tau", Dimension::Time)? {
        protocol.probe_resolution_tau = v;
    }
    if let Some(v) = q(&section.coherence_time, "coherence_time", Dimension::Time)? {
        protocol.coherence_time = v;
    }
    if let Some(v) = q(&section.slit_width, "slit_width", Dimension::Length)? {
        protocol.slit_width = Some(v);
    }
    if let Some(v) = q(
        &section.probe_pointer_nucleons,
        "probe_pointer_nucleons",
        Dimension::Dimensionless,
    )? {
        protocol.probe_pointer_nucleons = v;
    }
    if let Some(v) = q(&section.pointer_separation, "pointer_separation", Dimension::Length)? {
        protocol.pointer_separation = v;
    }
    let violations = protocol.validate();
    if !violations.is_empty() {
        return Err(ConfigError::InvalidProtocol(violations));
    }
    Ok(protocol)
}

fn validate_run(cfg: &RunConfig) -> Result<(), ConfigError> {
    if !(cfg.dt > 0.0) {
        return Err(ConfigError::BadValue {
            key: "run.dt".into(),
            message: format!("must be > 0, got {}", cfg.dt),
        });
    }
    if cfg.horizon < cfg.dt {
        return Err(ConfigError::BadValue {
            key: "run.horizon".into(),
            message: format!("must be >= dt, got {} < {}", cfg.horizon, cfg.dt),
        });
    }
    Ok(())
}

/// Full-precision significand formatting: 17 significant digits round-trips
/// any f64 exactly.
pub fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Emit a config whose parse reproduces `cfg` field for field. Quantities are
/// written in base SI units at full precision.
pub fn emit_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let p = &cfg.protocol;
    out.push_str("[protocol]\n");
    if p.name != ProtocolName::Custom {
        out.push_str(&format!("preset = \"{}\"\n", p.name));
    }
    out.push_str(&format!("sphere_mass = \"{} kg\"\n", fmt_full(p.sphere_mass)));
    out.push_str(&format!("sphere_radius = \"{} m\"\n", fmt_full(p.sphere_radius)));
    out.push_str(&format!("sphere_density = \"{} kg/m3\"\n", fmt_full(p.sphere_density)));
    out.push_str(&format!("cat_separation_L = \"{} m\"\n", fmt_full(p.cat_separation_l)));
    out.push_str(&format!("probe_mass = \"{} kg\"\n", fmt_full(p.probe_mass)));
    out.push_str(&format!("surface_gap_a = \"{} m\"\n", fmt_full(p.surface_gap_a)));
    out.push_str(&format!("tunneling_rate_nu = \"{} 1/s\"\n", fmt_full(p.tunneling_rate_nu)));
    out.push_str(&format!("probe_resolution_tau = \"{} s\"\n", fmt_full(p.probe_resolution_tau)));
    out.push_str(&format!("coherence_time = \"{} s\"\n", fmt_full(p.coherence_time)));
    if let Some(w) = p.slit_width {
        out.push_str(&format!("slit_width = \"{} m\"\n", fmt_full(w)));
    }
    out.push_str(&format!(
        "probe_pointer_nucleons = \"{}\"\n",
        fmt_full(p.probe_pointer_nucleons)
    ));
    out.push_str(&format!("pointer_separation = \"{} m\"\n", fmt_full(p.pointer_separation)));
    if let Some(s) = cfg.probe_sensitivity {
        out.push_str(&format!("probe_sensitivity = \"{} N\"\n", fmt_full(s)));
    }

    out.push_str("\n[run]\n");
    let names: Vec<String> = cfg.theories.iter().map(|t| format!("\"{t}\"")).collect();
    out.push_str(&format!("theories = [{}]\n", names.join(", ")));
    out.push_str(&format!("engine = \"{}\"\n", cfg.engine));
    out.push_str(&format!("n_traj = {}\n", cfg.n_traj));
    out.push_str(&format!("horizon = \"{} s\"\n", fmt_full(cfg.horizon)));
    out.push_str(&format!("dt = \"{} s\"\n", fmt_full(cfg.dt)));
    out.push_str(&format!("seed = {}\n", cfg.seed));

    out.push_str("\n[output]\n");
    out.push_str(&format!("dir = \"{}\"\n", cfg.out_dir.display()));
    let formats: Vec<&str> = cfg
        .formats
        .iter()
        .map(|f| match f {
            OutputFormat::Csv => "\"csv\"",
            OutputFormat::Json => "\"json\"",
        })
        .collect();
    out.push_str(&format!("formats = [{}]\n", formats.join(", ")));

    let cp = &cfg.collapse;
    out.push_str("\n[collapse]\n");
    out.push_str(&format!("lambda_grw = \"{} 1/s\"\n", fmt_full(cp.lambda_grw)));
    out.push_str(&format!("sigma_grw = \"{} m\"\n", fmt_full(cp.sigma_grw)));
    out.push_str(&format!("gamma_csl = \"{} m3/s\"\n", fmt_full(cp.gamma_csl)));
    out.push_str(&format!("r_c = \"{} m\"\n", fmt_full(cp.r_c)));
    out.push_str(&format!("gamma_td_csl = \"{} m3/s\"\n", fmt_full(cp.gamma_td_csl)));
    out.push_str(&format!("sigma_td_csl = \"{} m\"\n", fmt_full(cp.sigma_td_csl)));
    out.push_str(&format!("sigma_td_dp = \"{} m\"\n", fmt_full(cp.sigma_td_dp)));
    out.push_str(&format!("r0_dp = \"{} m\"\n", fmt_full(cp.r0_dp)));
    out.push_str(&format!("kappa_td = {}\n", fmt_full(cp.kappa_td)));

    let c = &cfg.constants;
    out.push_str("\n[constants]\n");
    out.push_str(&format!("G = {}\n", fmt_full(c.g)));
    out.push_str(&format!("hbar = {}\n", fmt_full(c.hbar)));
    out.push_str(&format!("c = {}\n", fmt_full(c.c)));
    out.push_str(&format!("k_b = {}\n", fmt_full(c.k_b)));
    out.push_str(&format!("m_nucleon = {}\n", fmt_full(c.m_nucleon)));
    out.push_str(&format!("l_planck = {}\n", fmt_full(c.l_planck)));
    out.push_str(&format!("amu = {}\n", fmt_full(c.amu)));

    let sn = &cfg.sn;
    out.push_str("\n[sn]\n");
    out.push_str(&format!("sigma0 = \"{} m\"\n", fmt_full(sn.sigma0)));
    out.push_str(&format!("mass = \"{} kg\"\n", fmt_full(sn.mass)));
    out.push_str(&format!("dt = \"{} s\"\n", fmt_full(sn.dt)));
    out.push_str(&format!("n_steps = {}\n", sn.n_steps));
    out.push_str(&format!("n_intervals = {}\n", sn.budget.n_intervals));
    out.push_str(&format!("box_sigmas = {}\n", fmt_full(sn.budget.box_sigmas)));
    out.push_str(&format!("mass_lo = \"{} kg\"\n", fmt_full(sn.mass_lo)));
    out.push_str(&format!("mass_hi = \"{} kg\"\n", fmt_full(sn.mass_hi)));
    out.push_str(&format!("horizon = \"{} s\"\n", fmt_full(sn.budget.horizon)));

    let g = &cfg.grid;
    out.push_str("\n[grid]\n");
    out.push_str(&format!("n = {}\n", g.n));
    out.push_str(&format!("sigma_fraction = {}\n", fmt_full(g.sigma_fraction)));
    out.push_str(&format!("well_width_fraction = {}\n", fmt_full(g.well_width_fraction)));
    out.push_str(&format!("well_depth = \"{} J\"\n", fmt_full(g.well_depth)));
    out.push_str(&format!("max_substeps = {}\n", g.max_substeps));

    out
}
