//! Scenario files: a flat `key = value` text format with `#` comments,
//! resolved against built-in defaults into a fully-specified
//! [`ScenarioConfig`].
//!
//! Parsing is strict: unknown keys, duplicate keys, type mismatches, and
//! parameters that only make sense for a different mode are all errors
//! that name the offending line or key. Questionable-but-legal values
//! (e.g. transmit power outside the usual sweep range) come back as
//! warnings instead.

use crate::channel::{FadingModel, LinkParams, PathlossModel, TopologyParams};
use crate::fbc::CodingConfig;
use crate::harq::{HarqConfig, HarqVariant};
use crate::sim::{PathMode, TrafficProcess};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

// --- resolved configuration ---------------------------------------------

/// Retransmission-protocol settings (the coding budget lives in
/// [`ScenarioConfig::coding`]).
#[derive(Debug, Clone, PartialEq)]
pub struct HarqSettings {
    pub variant: HarqVariant,
    pub l0_margin: f64,
    pub processing_delay_cu: u64,
}

/// Radio parameters of the three link classes plus destination-side
/// interference. Satellite link distances default to the geometry; the
/// explicit overrides exist for controlled experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioConfig {
    pub sat_gbs: LinkParams,
    pub sat_dest: LinkParams,
    pub terr: LinkParams,
    /// Probability that a non-serving ground station transmits co-channel
    /// during a given round (0 disables interference).
    pub interference_activity: f64,
    pub sat_gbs_distance_km: Option<f64>,
    pub sat_dest_distance_km: Option<f64>,
}

/// Violation thresholds and optional explicit fit grids. Absent scalar
/// thresholds are chosen adaptively at run time (twice the observed mean).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThresholdSettings {
    pub delay_violation_cu: Option<u64>,
    pub peak_aoi_violation_cu: Option<u64>,
    pub delay_grid_cu: Option<Vec<f64>>,
    pub aoi_grid_cu: Option<Vec<f64>>,
}

/// A fully-resolved scenario: defaults applied, every field concrete.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub horizon_cu: u64,
    pub mode: PathMode,
    pub traffic: TrafficProcess,
    pub coding: CodingConfig,
    pub harq: HarqSettings,
    pub topology: TopologyParams,
    pub radio: RadioConfig,
    pub thresholds: ThresholdSettings,
}

impl ScenarioConfig {
    /// The built-in default scenario: integrated mode over a 600 km
    /// satellite and a 2-10 km annulus of four ground stations, fast
    /// retransmissions, light Poisson traffic.
    pub fn baseline(seed: u64) -> Self {
        ScenarioConfig {
            seed,
            horizon_cu: 10_000_000,
            mode: PathMode::Stin,
            traffic: TrafficProcess::Poisson { rate_per_cu: 1e-4 },
            coding: CodingConfig {
                payload_bits: 256,
                sub_blocklength: 300,
                max_rounds: 4,
            },
            harq: HarqSettings {
                variant: HarqVariant::Fast,
                l0_margin: 0.1,
                processing_delay_cu: 100,
            },
            topology: TopologyParams {
                altitude_km: 600.0,
                gbs_count: 4,
                inner_radius_km: 2.0,
                outer_radius_km: 10.0,
            },
            radio: RadioConfig {
                sat_gbs: LinkParams {
                    tx_power_dbm: 30.0,
                    antenna_gain_dbi: 20.0,
                    noise_power_dbm: -110.0,
                    carrier_ghz: 2.0,
                    pathloss: PathlossModel::FreeSpace,
                    fading: FadingModel::Rician { k: 10.0 },
                },
                sat_dest: LinkParams {
                    tx_power_dbm: 30.0,
                    antenna_gain_dbi: 20.0,
                    noise_power_dbm: -100.0,
                    carrier_ghz: 2.0,
                    pathloss: PathlossModel::FreeSpace,
                    fading: FadingModel::Rician { k: 10.0 },
                },
                terr: LinkParams {
                    tx_power_dbm: 30.0,
                    antenna_gain_dbi: 10.0,
                    noise_power_dbm: -100.0,
                    carrier_ghz: 2.0,
                    pathloss: PathlossModel::FreeSpace,
                    fading: FadingModel::Rayleigh,
                },
                interference_activity: 0.0,
                sat_gbs_distance_km: None,
                sat_dest_distance_km: None,
            },
            thresholds: ThresholdSettings::default(),
        }
    }

    /// Assemble the per-link retransmission config.
    pub fn harq_config(&self) -> HarqConfig {
        HarqConfig {
            variant: self.harq.variant,
            coding: self.coding,
            l0_margin: self.harq.l0_margin,
            processing_delay_cu: self.harq.processing_delay_cu,
        }
    }

    /// Cross-field validation, shared by the parser and the simulator.
    pub fn validate_semantics(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, message: String| ConfigError::Invalid {
            key: key.into(),
            message,
        };
        if self.horizon_cu == 0 {
            return Err(invalid("horizon_cu", "horizon must be >= 1".into()));
        }
        self.traffic
            .validate()
            .map_err(|e| invalid("traffic", e.to_string()))?;
        self.coding
            .validate()
            .map_err(|e| invalid("coding", e))?;
        if !(self.harq.l0_margin >= 0.0 && self.harq.l0_margin.is_finite()) {
            return Err(invalid(
                "harq.l0_margin",
                format!("must be finite and >= 0, got {}", self.harq.l0_margin),
            ));
        }
        self.topology
            .validate()
            .map_err(|e| invalid("topology", e.to_string()))?;
        if self.mode == PathMode::Stin && self.topology.gbs_count == 0 {
            return Err(invalid(
                "topology.gbs_count",
                "integrated mode needs at least one ground station".into(),
            ));
        }
        for (key, link) in [
            ("radio.sat_gbs", &self.radio.sat_gbs),
            ("radio.sat_dest", &self.radio.sat_dest),
            ("radio.terr", &self.radio.terr),
        ] {
            link.validate().map_err(|e| invalid(key, e.to_string()))?;
        }
        if !(0.0..=1.0).contains(&self.radio.interference_activity) {
            return Err(invalid(
                "radio.interference_activity",
                format!(
                    "must lie in [0, 1], got {}",
                    self.radio.interference_activity
                ),
            ));
        }
        for (key, d) in [
            ("radio.sat_gbs.distance_km", self.radio.sat_gbs_distance_km),
            ("radio.sat_dest.distance_km", self.radio.sat_dest_distance_km),
        ] {
            if let Some(d) = d {
                if !(d > 0.0) {
                    return Err(invalid(key, format!("must be positive, got {d}")));
                }
            }
        }
        for (key, grid) in [
            ("thresholds.delay_grid_cu", &self.thresholds.delay_grid_cu),
            ("thresholds.aoi_grid_cu", &self.thresholds.aoi_grid_cu),
        ] {
            if let Some(g) = grid {
                if g.len() < 2 || g.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid(
                        key,
                        "threshold grid must be strictly ascending with >= 2 entries".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Advisory findings on a valid configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (key, link) in [
            ("radio.sat_gbs", &self.radio.sat_gbs),
            ("radio.sat_dest", &self.radio.sat_dest),
            ("radio.terr", &self.radio.terr),
        ] {
            if !(10.0..=50.0).contains(&link.tx_power_dbm) {
                out.push(format!(
                    "{key}.tx_power_dbm = {} dBm lies outside the usual 10..50 dBm range",
                    link.tx_power_dbm
                ));
            }
        }
        out
    }

    /// Canonical `key = value` dump of the resolved configuration, in a
    /// fixed order. Parsing the dump reproduces the configuration.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        fn push(kv: &mut Vec<(String, String)>, k: &str, v: String) {
            kv.push((k.to_string(), v));
        }
        let mut kv: Vec<(String, String)> = Vec::new();
        push(&mut kv, "seed", self.seed.to_string());
        push(&mut kv, "horizon_cu", self.horizon_cu.to_string());
        push(
            &mut kv,
            "mode",
            match self.mode {
                PathMode::Stin => "stin".into(),
                PathMode::Psn => "psn".into(),
            },
        );
        match self.traffic {
            TrafficProcess::Periodic { period_cu } => {
                push(&mut kv, "traffic.process", "periodic".into());
                push(&mut kv, "traffic.period_cu", period_cu.to_string());
            }
            TrafficProcess::Poisson { rate_per_cu } => {
                push(&mut kv, "traffic.process", "poisson".into());
                push(&mut kv, "traffic.rate_per_cu", rate_per_cu.to_string());
            }
            TrafficProcess::Bernoulli { prob_per_cu } => {
                push(&mut kv, "traffic.process", "bernoulli".into());
                push(&mut kv, "traffic.prob_per_cu", prob_per_cu.to_string());
            }
        }
        push(
            &mut kv,
            "coding.payload_bits",
            self.coding.payload_bits.to_string(),
        );
        push(
            &mut kv,
            "coding.sub_blocklength",
            self.coding.sub_blocklength.to_string(),
        );
        push(
            &mut kv,
            "coding.max_rounds",
            self.coding.max_rounds.to_string(),
        );
        push(
            &mut kv,
            "harq.variant",
            match self.harq.variant {
                HarqVariant::Standard => "standard".into(),
                HarqVariant::Fast => "fast".into(),
            },
        );
        push(&mut kv, "harq.l0_margin", self.harq.l0_margin.to_string());
        push(
            &mut kv,
            "harq.processing_delay_cu",
            self.harq.processing_delay_cu.to_string(),
        );
        push(
            &mut kv,
            "topology.altitude_km",
            self.topology.altitude_km.to_string(),
        );
        push(
            &mut kv,
            "topology.gbs_count",
            self.topology.gbs_count.to_string(),
        );
        push(
            &mut kv,
            "topology.inner_radius_km",
            self.topology.inner_radius_km.to_string(),
        );
        push(
            &mut kv,
            "topology.outer_radius_km",
            self.topology.outer_radius_km.to_string(),
        );
        push(
            &mut kv,
            "radio.interference_activity",
            self.radio.interference_activity.to_string(),
        );
        for (prefix, link, dist) in [
            ("sat_gbs", &self.radio.sat_gbs, self.radio.sat_gbs_distance_km),
            (
                "sat_dest",
                &self.radio.sat_dest,
                self.radio.sat_dest_distance_km,
            ),
            ("terr", &self.radio.terr, None),
        ] {
            let key = |suffix: &str| format!("radio.{prefix}.{suffix}");
            kv.push((key("tx_power_dbm"), link.tx_power_dbm.to_string()));
            kv.push((key("antenna_gain_dbi"), link.antenna_gain_dbi.to_string()));
            kv.push((key("noise_power_dbm"), link.noise_power_dbm.to_string()));
            kv.push((key("carrier_ghz"), link.carrier_ghz.to_string()));
            match &link.pathloss {
                PathlossModel::FreeSpace => kv.push((key("pathloss"), "free_space".into())),
                PathlossModel::LogDistance {
                    exponent,
                    ref_distance_km,
                    ref_loss_db,
                } => {
                    kv.push((key("pathloss"), "log_distance".into()));
                    kv.push((key("pathloss_exponent"), exponent.to_string()));
                    kv.push((key("pathloss_ref_km"), ref_distance_km.to_string()));
                    kv.push((key("pathloss_ref_loss_db"), ref_loss_db.to_string()));
                }
            }
            match &link.fading {
                FadingModel::None => kv.push((key("fading"), "none".into())),
                FadingModel::Rayleigh => kv.push((key("fading"), "rayleigh".into())),
                FadingModel::Rician { k } => {
                    kv.push((key("fading"), "rician".into()));
                    kv.push((key("rician_k"), k.to_string()));
                }
                FadingModel::ShadowedRician { b, m, omega } => {
                    kv.push((key("fading"), "shadowed_rician".into()));
                    kv.push((key("shadow_b"), b.to_string()));
                    kv.push((key("shadow_m"), m.to_string()));
                    kv.push((key("shadow_omega"), omega.to_string()));
                }
            }
            if let Some(d) = dist {
                kv.push((key("distance_km"), d.to_string()));
            }
        }
        if let Some(v) = self.thresholds.delay_violation_cu {
            push(&mut kv, "thresholds.delay_violation_cu", v.to_string());
        }
        if let Some(v) = self.thresholds.peak_aoi_violation_cu {
            push(&mut kv, "thresholds.peak_aoi_violation_cu", v.to_string());
        }
        if let Some(g) = &self.thresholds.delay_grid_cu {
            push(&mut kv, "thresholds.delay_grid_cu", join_list(g));
        }
        if let Some(g) = &self.thresholds.aoi_grid_cu {
            push(&mut kv, "thresholds.aoi_grid_cu", join_list(g));
        }
        kv
    }

    /// The canonical dump as one parseable text block.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.to_key_values() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

fn join_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

// --- parser -------------------------------------------------------------

struct RawEntries {
    entries: BTreeMap<String, (usize, String)>,
    used: std::collections::BTreeSet<String>,
}

impl RawEntries {
    fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let stripped = raw_line
                .split_once('#')
                .map(|(before, _)| before)
                .unwrap_or(raw_line)
                .trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("expected `key = value`, got `{stripped}`"),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    message: "key and value must both be non-empty".into(),
                });
            }
            if entries.insert(key.clone(), (line, value)).is_some() {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(RawEntries {
            entries,
            used: Default::default(),
        })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.used.insert(key.to_string());
        self.entries.get(key).cloned()
    }

    fn opt_str(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|(_, v)| v)
    }

    fn opt_u64(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.replace('_', "").parse::<u64>().map(Some).map_err(|_| {
                ConfigError::Parse {
                    line,
                    message: format!("{key}: expected an unsigned integer, got `{v}`"),
                }
            }),
        }
    }

    fn opt_u32(&mut self, key: &str) -> Result<Option<u32>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.replace('_', "").parse::<u32>().map(Some).map_err(|_| {
                ConfigError::Parse {
                    line,
                    message: format!("{key}: expected an unsigned 32-bit integer, got `{v}`"),
                }
            }),
        }
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.replace('_', "").parse::<f64>().map(Some).map_err(|_| {
                ConfigError::Parse {
                    line,
                    message: format!("{key}: expected a number, got `{v}`"),
                }
            }),
        }
    }

    fn opt_f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    let part = part.trim();
                    out.push(part.replace('_', "").parse::<f64>().map_err(|_| {
                        ConfigError::Parse {
                            line,
                            message: format!("{key}: expected a number list, got `{part}`"),
                        }
                    })?);
                }
                Ok(Some(out))
            }
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map(|&(l, _)| l).unwrap_or(0)
    }

    fn reject_unknown(&self) -> Result<(), ConfigError> {
        for (key, &(line, _)) in &self.entries {
            if !self.used.contains(key) {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("unknown key `{key}`"),
                });
            }
        }
        Ok(())
    }
}

fn parse_link(
    raw: &mut RawEntries,
    prefix: &str,
    defaults: &LinkParams,
) -> Result<LinkParams, ConfigError> {
    let key = |suffix: &str| format!("radio.{prefix}.{suffix}");
    let mut link = defaults.clone();
    if let Some(v) = raw.opt_f64(&key("tx_power_dbm"))? {
        link.tx_power_dbm = v;
    }
    if let Some(v) = raw.opt_f64(&key("antenna_gain_dbi"))? {
        link.antenna_gain_dbi = v;
    }
    if let Some(v) = raw.opt_f64(&key("noise_power_dbm"))? {
        link.noise_power_dbm = v;
    }
    if let Some(v) = raw.opt_f64(&key("carrier_ghz"))? {
        link.carrier_ghz = v;
    }

    let pathloss_name = raw.opt_str(&key("pathloss"));
    let pl_exponent = raw.opt_f64(&key("pathloss_exponent"))?;
    let pl_ref_km = raw.opt_f64(&key("pathloss_ref_km"))?;
    let pl_ref_loss = raw.opt_f64(&key("pathloss_ref_loss_db"))?;
    let effective = match pathloss_name.as_deref() {
        None => link.pathloss.clone(),
        Some("free_space") => PathlossModel::FreeSpace,
        Some("log_distance") => {
            let ref_distance_km = pl_ref_km.unwrap_or(0.1);
            PathlossModel::LogDistance {
                exponent: pl_exponent.unwrap_or(3.5),
                ref_distance_km,
                // Default calibration: free-space loss at the reference
                // distance and this link's carrier.
                ref_loss_db: pl_ref_loss.unwrap_or_else(|| {
                    92.45 + 20.0 * ref_distance_km.log10() + 20.0 * link.carrier_ghz.log10()
                }),
            }
        }
        Some(other) => {
            return Err(ConfigError::Parse {
                line: raw.line_of(&key("pathloss")),
                message: format!(
                    "{}: expected `free_space` or `log_distance`, got `{other}`",
                    key("pathloss")
                ),
            })
        }
    };
    if !matches!(effective, PathlossModel::LogDistance { .. })
        && (pl_exponent.is_some() || pl_ref_km.is_some() || pl_ref_loss.is_some())
    {
        return Err(ConfigError::Invalid {
            key: key("pathloss_exponent"),
            message: "log-distance parameters are only valid with pathloss = log_distance".into(),
        });
    }
    link.pathloss = effective;

    let fading_name = raw.opt_str(&key("fading"));
    let rician_k = raw.opt_f64(&key("rician_k"))?;
    let shadow_b = raw.opt_f64(&key("shadow_b"))?;
    let shadow_m = raw.opt_f64(&key("shadow_m"))?;
    let shadow_omega = raw.opt_f64(&key("shadow_omega"))?;
    let effective = match fading_name.as_deref() {
        None => link.fading.clone(),
        Some("none") => FadingModel::None,
        Some("rayleigh") => FadingModel::Rayleigh,
        Some("rician") => FadingModel::Rician {
            k: rician_k.unwrap_or(10.0),
        },
        Some("shadowed_rician") => FadingModel::ShadowedRician {
            b: shadow_b.unwrap_or(0.126),
            m: shadow_m.unwrap_or(10.1),
            omega: shadow_omega.unwrap_or(0.835),
        },
        Some(other) => {
            return Err(ConfigError::Parse {
                line: raw.line_of(&key("fading")),
                message: format!(
                    "{}: expected one of none, rayleigh, rician, shadowed_rician; got `{other}`",
                    key("fading")
                ),
            })
        }
    };
    if rician_k.is_some() && !matches!(effective, FadingModel::Rician { .. }) {
        return Err(ConfigError::Invalid {
            key: key("rician_k"),
            message: "only valid with fading = rician".into(),
        });
    }
    if (shadow_b.is_some() || shadow_m.is_some() || shadow_omega.is_some())
        && !matches!(effective, FadingModel::ShadowedRician { .. })
    {
        return Err(ConfigError::Invalid {
            key: key("shadow_b"),
            message: "only valid with fading = shadowed_rician".into(),
        });
    }
    link.fading = effective;
    Ok(link)
}

/// Parse a scenario from text. Returns the resolved configuration plus
/// advisory warnings.
pub fn parse_config(text: &str) -> Result<(ScenarioConfig, Vec<String>), ConfigError> {
    let mut raw = RawEntries::from_text(text)?;

    let seed = raw.opt_u64("seed")?.ok_or_else(|| ConfigError::Invalid {
        key: "seed".into(),
        message: "required key is missing".into(),
    })?;
    let mut cfg = ScenarioConfig::baseline(seed);

    if let Some(v) = raw.opt_u64("horizon_cu")? {
        cfg.horizon_cu = v;
    }
    if let Some(mode) = raw.opt_str("mode") {
        cfg.mode = match mode.as_str() {
            "stin" => PathMode::Stin,
            "psn" => PathMode::Psn,
            other => {
                return Err(ConfigError::Parse {
                    line: raw.line_of("mode"),
                    message: format!("mode: expected `stin` or `psn`, got `{other}`"),
                })
            }
        };
    }

    let process = raw
        .opt_str("traffic.process")
        .ok_or_else(|| ConfigError::Invalid {
            key: "traffic.process".into(),
            message: "required key is missing".into(),
        })?;
    let period = raw.opt_u64("traffic.period_cu")?;
    let rate = raw.opt_f64("traffic.rate_per_cu")?;
    let prob = raw.opt_f64("traffic.prob_per_cu")?;
    let only_for = |param: &str, process: &str| ConfigError::Invalid {
        key: format!("traffic.{param}"),
        message: format!("only valid with traffic.process = {process}"),
    };
    cfg.traffic = match process.as_str() {
        "periodic" => {
            if rate.is_some() {
                return Err(only_for("rate_per_cu", "poisson"));
            }
            if prob.is_some() {
                return Err(only_for("prob_per_cu", "bernoulli"));
            }
            TrafficProcess::Periodic {
                period_cu: period.ok_or_else(|| ConfigError::Invalid {
                    key: "traffic.period_cu".into(),
                    message: "required for periodic traffic".into(),
                })?,
            }
        }
        "poisson" => {
            if period.is_some() {
                return Err(only_for("period_cu", "periodic"));
            }
            if prob.is_some() {
                return Err(only_for("prob_per_cu", "bernoulli"));
            }
            TrafficProcess::Poisson {
                rate_per_cu: rate.ok_or_else(|| ConfigError::Invalid {
                    key: "traffic.rate_per_cu".into(),
                    message: "required for Poisson traffic".into(),
                })?,
            }
        }
        "bernoulli" => {
            if period.is_some() {
                return Err(only_for("period_cu", "periodic"));
            }
            if rate.is_some() {
                return Err(only_for("rate_per_cu", "poisson"));
            }
            TrafficProcess::Bernoulli {
                prob_per_cu: prob.ok_or_else(|| ConfigError::Invalid {
                    key: "traffic.prob_per_cu".into(),
                    message: "required for Bernoulli traffic".into(),
                })?,
            }
        }
        other => {
            return Err(ConfigError::Parse {
                line: raw.line_of("traffic.process"),
                message: format!(
                    "traffic.process: expected periodic, poisson, or bernoulli; got `{other}`"
                ),
            })
        }
    };

    if let Some(v) = raw.opt_u32("coding.payload_bits")? {
        cfg.coding.payload_bits = v;
    }
    if let Some(v) = raw.opt_u32("coding.sub_blocklength")? {
        cfg.coding.sub_blocklength = v;
    }
    if let Some(v) = raw.opt_u32("coding.max_rounds")? {
        cfg.coding.max_rounds = v;
    }
    // The total blocklength is derived; an explicit value must agree.
    if let Some(n) = raw.opt_u32("coding.blocklength")? {
        let derived = cfg.coding.max_rounds * cfg.coding.sub_blocklength;
        if n != derived {
            return Err(ConfigError::Invalid {
                key: "coding.blocklength".into(),
                message: format!(
                    "blocklength {n} does not equal max_rounds {} * sub_blocklength {} = {derived}",
                    cfg.coding.max_rounds, cfg.coding.sub_blocklength
                ),
            });
        }
    }

    if let Some(v) = raw.opt_str("harq.variant") {
        cfg.harq.variant = match v.as_str() {
            "standard" => HarqVariant::Standard,
            "fast" => HarqVariant::Fast,
            other => {
                return Err(ConfigError::Parse {
                    line: raw.line_of("harq.variant"),
                    message: format!("harq.variant: expected `standard` or `fast`, got `{other}`"),
                })
            }
        };
    }
    if let Some(v) = raw.opt_f64("harq.l0_margin")? {
        cfg.harq.l0_margin = v;
    }
    if let Some(v) = raw.opt_u64("harq.processing_delay_cu")? {
        cfg.harq.processing_delay_cu = v;
    }

    if let Some(v) = raw.opt_f64("topology.altitude_km")? {
        cfg.topology.altitude_km = v;
    }
    if let Some(v) = raw.opt_u32("topology.gbs_count")? {
        cfg.topology.gbs_count = v;
    }
    if let Some(v) = raw.opt_f64("topology.inner_radius_km")? {
        cfg.topology.inner_radius_km = v;
    }
    if let Some(v) = raw.opt_f64("topology.outer_radius_km")? {
        cfg.topology.outer_radius_km = v;
    }

    if let Some(v) = raw.opt_f64("radio.interference_activity")? {
        cfg.radio.interference_activity = v;
    }
    let defaults = cfg.radio.clone();
    cfg.radio.sat_gbs = parse_link(&mut raw, "sat_gbs", &defaults.sat_gbs)?;
    cfg.radio.sat_dest = parse_link(&mut raw, "sat_dest", &defaults.sat_dest)?;
    cfg.radio.terr = parse_link(&mut raw, "terr", &defaults.terr)?;
    cfg.radio.sat_gbs_distance_km = raw.opt_f64("radio.sat_gbs.distance_km")?;
    cfg.radio.sat_dest_distance_km = raw.opt_f64("radio.sat_dest.distance_km")?;

    cfg.thresholds.delay_violation_cu = raw.opt_u64("thresholds.delay_violation_cu")?;
    cfg.thresholds.peak_aoi_violation_cu = raw.opt_u64("thresholds.peak_aoi_violation_cu")?;
    cfg.thresholds.delay_grid_cu = raw.opt_f64_list("thresholds.delay_grid_cu")?;
    cfg.thresholds.aoi_grid_cu = raw.opt_f64_list("thresholds.aoi_grid_cu")?;

    raw.reject_unknown()?;
    cfg.validate_semantics()?;
    Ok((cfg.clone(), cfg.warnings()))
}

/// Read and parse a scenario file.
pub fn load_config(path: &Path) -> Result<(ScenarioConfig, Vec<String>), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

// ------------------------------------------------------------------------
