//! Plain-text configuration files for the command-line tool.
//!
//! The format is sectioned `key = value` text. Blank lines and lines
//! starting with `#` are ignored. Sections:
//!
//! ```text
//! [distribution]
//! kind = deterministic | exponential | lognormal | lognormal_from_moments | empirical
//! size = ...              # deterministic, bytes
//! mean = ...              # exponential / lognormal_from_moments, bytes
//! std = ...               # lognormal_from_moments, bytes
//! mu = ...                # lognormal, log-bytes
//! sigma = ...             # lognormal, log-bytes
//! path = sizes.txt        # empirical, one size per line, relative to the config file
//!
//! [link]
//! capacity = 54 Mbps      # suffix one of bps|kbps|Mbps|Gbps|Bps (decimal, bits vs bytes)
//! header = 38             # bytes per packet
//!
//! [traffic]
//! lambda = 678            # messages per second
//!
//! [payload]
//! size = 1500             # bytes; required by analyze/simulate
//! grid_min = 100          # the three grid keys configure sweep/optimize...
//! grid_max = 100000
//! points_per_decade = 10
//! grid = default          # ...or ask for the built-in default grid instead
//!
//! [tolerance]             # optional
//! eps_rel = 1e-9
//! n_max = 4194304
//!
//! [sim]                   # optional; required by simulate
//! warmup_messages = 10000
//! measured_messages = 1000000
//! replications = 10
//! base_seed = 20080211
//! confidence_level = 0.95
//! ```
//!
//! Every value is validated while parsing and errors carry the offending
//! line number. Reprinting a parsed file (`Display`) and parsing it again
//! reproduces the same configuration.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::dist::MessageSizeDistribution;
use crate::error::Error;
use crate::queue::{LinkParams, Scenario};
use crate::segment::Tolerance;
use crate::sim::SimConfig;

/// Message-size distribution as written in the file (unresolved: the
/// empirical sample file is loaded on demand).
#[derive(Debug, Clone, PartialEq)]
pub enum DistSpec {
    Deterministic { size: f64 },
    Exponential { mean: f64 },
    Lognormal { mu: f64, sigma: f64 },
    LognormalFromMoments { mean: f64, std: f64 },
    Empirical { path: String },
}

/// Capacity unit suffix. The bit units are decimal (kbps = 1000 bits/s);
/// `Bps` is bytes per second directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityUnit {
    BitsPerSec,
    KilobitsPerSec,
    MegabitsPerSec,
    GigabitsPerSec,
    BytesPerSec,
}

impl CapacityUnit {
    fn parse(token: &str) -> Option<Self> {
        match token {
            "bps" => Some(Self::BitsPerSec),
            "kbps" => Some(Self::KilobitsPerSec),
            "Mbps" => Some(Self::MegabitsPerSec),
            "Gbps" => Some(Self::GigabitsPerSec),
            "Bps" => Some(Self::BytesPerSec),
            _ => None,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Self::BitsPerSec => "bps",
            Self::KilobitsPerSec => "kbps",
            Self::MegabitsPerSec => "Mbps",
            Self::GigabitsPerSec => "Gbps",
            Self::BytesPerSec => "Bps",
        }
    }

    /// Converts a capacity in this unit to bytes per second.
    pub fn bytes_per_second(self, value: f64) -> f64 {
        match self {
            Self::BitsPerSec => value / 8.0,
            Self::KilobitsPerSec => value * 125.0,
            Self::MegabitsPerSec => value * 125_000.0,
            Self::GigabitsPerSec => value * 125_000_000.0,
            Self::BytesPerSec => value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub capacity_value: f64,
    pub capacity_unit: CapacityUnit,
    /// Header bytes per packet.
    pub header: f64,
}

impl LinkSpec {
    pub fn bytes_per_second(&self) -> f64 {
        self.capacity_unit.bytes_per_second(self.capacity_value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// Use [`crate::sweep::default_grid`].
    Default,
    Explicit {
        min: f64,
        max: f64,
        points_per_decade: u32,
    },
}

impl GridSpec {
    /// Expands an explicit grid to its log-spaced payload list. `Default`
    /// needs distribution and traffic context; callers resolve it through
    /// [`crate::sweep::default_grid`].
    pub fn expand(&self) -> Option<Vec<f64>> {
        match *self {
            GridSpec::Default => None,
            GridSpec::Explicit {
                min,
                max,
                points_per_decade,
            } => {
                let steps = ((max / min).log10() * points_per_decade as f64).ceil() as usize;
                let mut grid: Vec<f64> = (0..steps)
                    .map(|k| min * 10f64.powf(k as f64 / points_per_decade as f64))
                    .take_while(|&p| p < max)
                    .collect();
                grid.push(max);
                Some(grid)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayloadSpec {
    /// Single payload size for analyze/simulate.
    pub size: Option<f64>,
    /// Payload grid for sweep/optimize.
    pub grid: Option<GridSpec>,
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub distribution: DistSpec,
    pub link: LinkSpec,
    /// Messages per second.
    pub lambda: f64,
    pub payload: PayloadSpec,
    pub tolerance: Tolerance,
    pub sim: Option<SimConfig>,
    /// Directory empirical sample paths are resolved against.
    pub base_dir: PathBuf,
}

struct Entry {
    value: String,
    line: usize,
    used: std::cell::Cell<bool>,
}

struct Sections {
    label: String,
    entries: HashMap<(String, String), Entry>,
    section_lines: HashMap<String, usize>,
}

impl Sections {
    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.label.clone(),
            line,
            msg: msg.into(),
        }
    }

    fn get(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|e| {
                e.used.set(true);
                (e.value.as_str(), e.line)
            })
    }

    fn f64_opt(&self, section: &str, key: &str) -> Result<Option<(f64, usize)>, Error> {
        match self.get(section, key) {
            None => Ok(None),
            Some((raw, line)) => {
                let value: f64 = raw
                    .parse()
                    .map_err(|_| self.err(line, format!("{key}: not a number: {raw:?}")))?;
                Ok(Some((value, line)))
            }
        }
    }

    fn f64_req(&self, section: &str, key: &str) -> Result<(f64, usize), Error> {
        self.f64_opt(section, key)?.ok_or_else(|| {
            self.err(
                self.section_line(section),
                format!("[{section}] is missing the {key} key"),
            )
        })
    }

    fn u64_opt(&self, section: &str, key: &str) -> Result<Option<(u64, usize)>, Error> {
        match self.get(section, key) {
            None => Ok(None),
            Some((raw, line)) => {
                let value: u64 = raw.parse().map_err(|_| {
                    self.err(line, format!("{key}: not a non-negative integer: {raw:?}"))
                })?;
                Ok(Some((value, line)))
            }
        }
    }

    fn section_line(&self, section: &str) -> usize {
        self.section_lines.get(section).copied().unwrap_or(1)
    }

    fn has_section(&self, section: &str) -> bool {
        self.section_lines.contains_key(section)
    }
}

const SECTIONS: [&str; 6] = [
    "distribution",
    "link",
    "traffic",
    "payload",
    "tolerance",
    "sim",
];

fn collect_sections(text: &str, label: &str) -> Result<Sections, Error> {
    let mut sections = Sections {
        label: label.to_string(),
        entries: HashMap::new(),
        section_lines: HashMap::new(),
    };
    let mut current: Option<String> = None;
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(sections.err(line_no, "malformed section header"));
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(sections.err(line_no, format!("unknown section [{name}]")));
            }
            if sections.section_lines.contains_key(name) {
                return Err(sections.err(line_no, format!("duplicate section [{name}]")));
            }
            sections.section_lines.insert(name.to_string(), line_no);
            current = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(sections.err(line_no, format!("expected `key = value`, got {line:?}")));
        };
        let Some(section) = current.clone() else {
            return Err(sections.err(line_no, "key outside any [section]"));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if sections
            .entries
            .insert(
                (section, key.clone()),
                Entry {
                    value,
                    line: line_no,
                    used: std::cell::Cell::new(false),
                },
            )
            .is_some()
        {
            return Err(sections.err(line_no, format!("duplicate key {key}")));
        }
    }
    Ok(sections)
}

fn parse_distribution(s: &Sections) -> Result<DistSpec, Error> {
    let (kind, kind_line) = s
        .get("distribution", "kind")
        .ok_or_else(|| s.err(s.section_line("distribution"), "[distribution] needs a kind"))?;
    let check = |result: Result<MessageSizeDistribution, Error>, line: usize| match result {
        Ok(_) => Ok(()),
        Err(e) => Err(s.err(line, e.to_string())),
    };
    match kind {
        "deterministic" => {
            let (size, line) = s.f64_req("distribution", "size")?;
            check(MessageSizeDistribution::deterministic(size), line)?;
            Ok(DistSpec::Deterministic { size })
        }
        "exponential" => {
            let (mean, line) = s.f64_req("distribution", "mean")?;
            check(MessageSizeDistribution::exponential(mean), line)?;
            Ok(DistSpec::Exponential { mean })
        }
        "lognormal" => {
            let (mu, mu_line) = s.f64_req("distribution", "mu")?;
            let (sigma, _) = s.f64_req("distribution", "sigma")?;
            check(MessageSizeDistribution::lognormal(mu, sigma), mu_line)?;
            Ok(DistSpec::Lognormal { mu, sigma })
        }
        "lognormal_from_moments" => {
            let (mean, mean_line) = s.f64_req("distribution", "mean")?;
            let (std, _) = s.f64_req("distribution", "std")?;
            check(
                MessageSizeDistribution::lognormal_from_moments(mean, std),
                mean_line,
            )?;
            Ok(DistSpec::LognormalFromMoments { mean, std })
        }
        "empirical" => {
            let (path, line) = s
                .get("distribution", "path")
                .ok_or_else(|| s.err(kind_line, "empirical distribution needs a path"))?;
            if path.is_empty() {
                return Err(s.err(line, "empirical path must not be empty"));
            }
            Ok(DistSpec::Empirical {
                path: path.to_string(),
            })
        }
        other => Err(s.err(kind_line, format!("unknown distribution kind {other:?}"))),
    }
}

fn parse_link(s: &Sections) -> Result<LinkSpec, Error> {
    let (capacity_raw, capacity_line) = s
        .get("link", "capacity")
        .ok_or_else(|| s.err(s.section_line("link"), "[link] needs a capacity"))?;
    let mut tokens = capacity_raw.split_whitespace();
    let (value_token, unit_token) = match (tokens.next(), tokens.next(), tokens.next()) {
        (Some(v), Some(u), None) => (v, u),
        _ => {
            return Err(s.err(
                capacity_line,
                format!("capacity must be `value unit`, got {capacity_raw:?}"),
            ))
        }
    };
    let capacity_value: f64 = value_token.parse().map_err(|_| {
        s.err(
            capacity_line,
            format!("capacity: not a number: {value_token:?}"),
        )
    })?;
    let capacity_unit = CapacityUnit::parse(unit_token).ok_or_else(|| {
        s.err(
            capacity_line,
            format!("capacity: unknown unit {unit_token:?} (expected bps|kbps|Mbps|Gbps|Bps)"),
        )
    })?;
    let (header, header_line) = s.f64_req("link", "header")?;
    let spec = LinkSpec {
        capacity_value,
        capacity_unit,
        header,
    };
    LinkParams::new(spec.bytes_per_second(), header)
        .map_err(|e| s.err(capacity_line.min(header_line), e.to_string()))?;
    Ok(spec)
}

fn parse_payload(s: &Sections) -> Result<PayloadSpec, Error> {
    let size = match s.f64_opt("payload", "size")? {
        None => None,
        Some((size, line)) => {
            if !(size.is_finite() && size > 0.0) {
                return Err(s.err(
                    line,
                    format!("payload size must be positive and finite, got {size}"),
                ));
            }
            Some(size)
        }
    };
    let grid_keyword = s.get("payload", "grid");
    let min = s.f64_opt("payload", "grid_min")?;
    let max = s.f64_opt("payload", "grid_max")?;
    let ppd = s.u64_opt("payload", "points_per_decade")?;
    let grid = match (grid_keyword, min, max, ppd) {
        (None, None, None, None) => None,
        (Some((word, line)), None, None, None) => {
            if word == "default" {
                Some(GridSpec::Default)
            } else {
                return Err(s.err(line, format!("grid: expected `default`, got {word:?}")));
            }
        }
        (Some((_, line)), _, _, _) => {
            return Err(s.err(
                line,
                "grid = default cannot be combined with grid_min/grid_max/points_per_decade",
            ));
        }
        (None, Some((min, min_line)), Some((max, _)), Some((ppd, ppd_line))) => {
            if !(min.is_finite() && min > 0.0 && max.is_finite() && max > min) {
                return Err(s.err(
                    min_line,
                    format!("grid needs 0 < grid_min < grid_max, got {min} and {max}"),
                ));
            }
            if ppd == 0 || ppd > 10_000 {
                return Err(s.err(
                    ppd_line,
                    format!("points_per_decade must lie in 1..=10000, got {ppd}"),
                ));
            }
            Some(GridSpec::Explicit {
                min,
                max,
                points_per_decade: ppd as u32,
            })
        }
        (None, ..) => {
            return Err(s.err(
                s.section_line("payload"),
                "grid needs all of grid_min, grid_max, points_per_decade",
            ));
        }
    };
    if size.is_none() && grid.is_none() {
        return Err(s.err(
            s.section_line("payload"),
            "[payload] needs a size, a grid, or both",
        ));
    }
    Ok(PayloadSpec { size, grid })
}

fn parse_tolerance(s: &Sections) -> Result<Tolerance, Error> {
    let defaults = Tolerance::default();
    let (eps_rel, eps_line) = match s.f64_opt("tolerance", "eps_rel")? {
        Some((v, line)) => (v, line),
        None => (defaults.eps_rel, s.section_line("tolerance")),
    };
    let n_max = match s.u64_opt("tolerance", "n_max")? {
        Some((v, _)) => v,
        None => defaults.n_max,
    };
    Tolerance::new(eps_rel, n_max).map_err(|e| s.err(eps_line, e.to_string()))
}

fn parse_sim(s: &Sections) -> Result<SimConfig, Error> {
    let defaults = SimConfig::default();
    let mut cfg = defaults;
    if let Some((v, _)) = s.u64_opt("sim", "warmup_messages")? {
        cfg.warmup_messages = v;
    }
    if let Some((v, line)) = s.u64_opt("sim", "measured_messages")? {
        if v < 1000 {
            return Err(s.err(
                line,
                format!("measured_messages must be at least 1000, got {v}"),
            ));
        }
        cfg.measured_messages = v;
    }
    if let Some((v, line)) = s.u64_opt("sim", "replications")? {
        if !(2..=100_000).contains(&v) {
            return Err(s.err(line, format!("replications must lie in 2..=100000, got {v}")));
        }
        cfg.replications = v as u32;
    }
    if let Some((v, _)) = s.u64_opt("sim", "base_seed")? {
        cfg.base_seed = v;
    }
    if let Some((v, line)) = s.f64_opt("sim", "confidence_level")? {
        if !(v > 0.0 && v < 1.0) {
            return Err(s.err(
                line,
                format!("confidence_level must lie in (0, 1), got {v}"),
            ));
        }
        cfg.confidence_level = v;
    }
    Ok(cfg)
}

/// Parses configuration text. `label` names the source in error messages;
/// `base_dir` anchors relative empirical sample paths.
pub fn parse_config_str(text: &str, label: &str, base_dir: &Path) -> Result<ConfigFile, Error> {
    let s = collect_sections(text, label)?;
    for required in ["distribution", "link", "traffic", "payload"] {
        if !s.has_section(required) {
            return Err(s.err(1, format!("missing required section [{required}]")));
        }
    }
    let distribution = parse_distribution(&s)?;
    let link = parse_link(&s)?;
    let (lambda, lambda_line) = s.f64_req("traffic", "lambda")?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(s.err(
            lambda_line,
            format!("lambda must be positive and finite, got {lambda}"),
        ));
    }
    let payload = parse_payload(&s)?;
    let tolerance = parse_tolerance(&s)?;
    let sim = if s.has_section("sim") {
        Some(parse_sim(&s)?)
    } else {
        None
    };
    for ((section, key), entry) in &s.entries {
        if !entry.used.get() {
            return Err(s.err(entry.line, format!("unknown key {key} in [{section}]")));
        }
    }
    Ok(ConfigFile {
        distribution,
        link,
        lambda,
        payload,
        tolerance,
        sim,
        base_dir: base_dir.to_path_buf(),
    })
}

/// Loads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ConfigFile, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config_str(&text, &path.display().to_string(), base_dir)
}

impl ConfigFile {
    /// Builds the message-size distribution, loading the empirical sample
    /// file if one is configured.
    pub fn distribution(&self) -> Result<MessageSizeDistribution, Error> {
        match &self.distribution {
            DistSpec::Deterministic { size } => MessageSizeDistribution::deterministic(*size),
            DistSpec::Exponential { mean } => MessageSizeDistribution::exponential(*mean),
            DistSpec::Lognormal { mu, sigma } => MessageSizeDistribution::lognormal(*mu, *sigma),
            DistSpec::LognormalFromMoments { mean, std } => {
                MessageSizeDistribution::lognormal_from_moments(*mean, *std)
            }
            DistSpec::Empirical { path } => {
                let resolved = self.base_dir.join(path);
                MessageSizeDistribution::empirical_from_file(resolved)
            }
        }
    }

    pub fn link_params(&self) -> Result<LinkParams, Error> {
        LinkParams::new(self.link.bytes_per_second(), self.link.header)
    }

    /// The single-payload scenario, with an optional arrival-rate override.
    pub fn scenario(&self, lambda_override: Option<f64>) -> Result<Scenario, Error> {
        let Some(size) = self.payload.size else {
            return Err(Error::InvalidParameter(
                "this command needs a payload size (set `size` in [payload])".into(),
            ));
        };
        Scenario::new(
            self.distribution()?,
            size,
            self.link_params()?,
            lambda_override.unwrap_or(self.lambda),
        )
    }
}

impl fmt::Display for ConfigFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[distribution]")?;
        match &self.distribution {
            DistSpec::Deterministic { size } => {
                writeln!(f, "kind = deterministic")?;
                writeln!(f, "size = {size}")?;
            }
            DistSpec::Exponential { mean } => {
                writeln!(f, "kind = exponential")?;
                writeln!(f, "mean = {mean}")?;
            }
            DistSpec::Lognormal { mu, sigma } => {
                writeln!(f, "kind = lognormal")?;
                writeln!(f, "mu = {mu}")?;
                writeln!(f, "sigma = {sigma}")?;
            }
            DistSpec::LognormalFromMoments { mean, std } => {
                writeln!(f, "kind = lognormal_from_moments")?;
                writeln!(f, "mean = {mean}")?;
                writeln!(f, "std = {std}")?;
            }
            DistSpec::Empirical { path } => {
                writeln!(f, "kind = empirical")?;
                writeln!(f, "path = {path}")?;
            }
        }
        writeln!(f)?;
        writeln!(f, "[link]")?;
        writeln!(
            f,
            "capacity = {} {}",
            self.link.capacity_value,
            self.link.capacity_unit.suffix()
        )?;
        writeln!(f, "header = {}", self.link.header)?;
        writeln!(f)?;
        writeln!(f, "[traffic]")?;
        writeln!(f, "lambda = {}", self.lambda)?;
        writeln!(f)?;
        writeln!(f, "[payload]")?;
        if let Some(size) = self.payload.size {
            writeln!(f, "size = {size}")?;
        }
        match &self.payload.grid {
            None => {}
            Some(GridSpec::Default) => writeln!(f, "grid = default")?,
            Some(GridSpec::Explicit {
                min,
                max,
                points_per_decade,
            }) => {
                writeln!(f, "grid_min = {min}")?;
                writeln!(f, "grid_max = {max}")?;
                writeln!(f, "points_per_decade = {points_per_decade}")?;
            }
        }
        writeln!(f)?;
        writeln!(f, "[tolerance]")?;
        writeln!(f, "eps_rel = {}", self.tolerance.eps_rel)?;
        writeln!(f, "n_max = {}", self.tolerance.n_max)?;
        if let Some(sim) = &self.sim {
            writeln!(f)?;
            writeln!(f, "[sim]")?;
            writeln!(f, "warmup_messages = {}", sim.warmup_messages)?;
            writeln!(f, "measured_messages = {}", sim.measured_messages)?;
            writeln!(f, "replications = {}", sim.replications)?;
            writeln!(f, "base_seed = {}", sim.base_seed)?;
            writeln!(f, "confidence_level = {}", sim.confidence_level)?;
        }
        Ok(())
    }
}
