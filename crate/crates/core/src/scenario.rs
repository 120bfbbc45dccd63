//! Scenario configuration: TOML schema, presets, validation and
//! environment overrides.
//!
//! A scenario file is either complete, or names a `preset` at top level and
//! overrides some of its keys:
//!
//! ```toml
//! preset = "table1-open"
//!
//! [engine]
//! n_snapshots = 100
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{thermal_noise_mw, PropagationParams};
use crate::error::{Error, Result};
use crate::geometry::ServiceArea;
use crate::link::db_to_linear;
use crate::static_cellular::StaticParams;
use crate::wifi::WifiParams;
use crate::zf::ZfParams;

/// Prefix of environment variables that override scenario keys, e.g.
/// `INDOORDIM__ENGINE__N_SNAPSHOTS=50`.
pub const ENV_PREFIX: &str = "INDOORDIM__";

pub const PRESETS: &[&str] = &["table1-open", "table1-obstructed"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub area: ServiceArea,
    pub propagation: PropagationParams,
    pub traffic: TrafficSection,
    pub radio: RadioSection,
    pub wifi: WifiSection,
    pub static_cellular: StaticSection,
    pub zf: ZfSection,
    pub engine: EngineSection,
    pub demand: DemandSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    /// Busy-hour fraction of the day.
    pub omega: f64,
    /// Mean user density, users/km^2.
    pub lambda_u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    /// Total system bandwidth W, MHz.
    pub bandwidth_mhz: f64,
    pub pt_mw: f64,
    /// Minimum SINR for a served user, dB.
    pub gamma_t_db: f64,
    /// Outage probability constraint.
    pub beta: f64,
    pub temperature_k: f64,
    /// Fading variance.
    pub sigma_z2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WifiSection {
    /// Baseline carrier-sense threshold, dBm.
    pub cs_thr_dbm: f64,
    pub cs_thr_aggressive_dbm: f64,
    pub k_wifi: usize,
    pub eta_wifi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticSection {
    pub eta_sta: f64,
    pub k_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZfSection {
    pub eta_zf: f64,
    /// Outdated-CSIT probability used by `zf-erroneous`.
    pub delta: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    pub n_snapshots: usize,
    pub seed: u64,
    /// Largest AP count on the grid ladder.
    pub max_aps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSection {
    /// Ascending demand points, GB/month/user.
    pub grid: Vec<f64>,
}

fn default_demand_grid() -> Vec<f64> {
    vec![
        1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 40.0, 60.0, 80.0, 100.0, 150.0, 200.0, 300.0, 400.0,
    ]
}

impl Scenario {
    /// Named preset. `table1-open` has no walls and `alpha = 2`;
    /// `table1-obstructed` has 4 + 4 walls (25 rooms), `alpha = 4`, 10 dB per wall.
    pub fn preset(name: &str) -> Result<Scenario> {
        let open = Scenario {
            name: "table1-open".into(),
            area: ServiceArea {
                lx: 100.0,
                ly: 100.0,
                wx: 0,
                wy: 0,
            },
            propagation: PropagationParams {
                l0_db: 37.0,
                alpha: 2.0,
                lw_db: 0.0,
            },
            traffic: TrafficSection {
                omega: 0.2,
                lambda_u: 1e5,
            },
            radio: RadioSection {
                bandwidth_mhz: 60.0,
                pt_mw: 100.0,
                gamma_t_db: 3.0,
                beta: 0.05,
                temperature_k: 300.0,
                sigma_z2: 1.0,
            },
            wifi: WifiSection {
                cs_thr_dbm: -85.0,
                cs_thr_aggressive_dbm: -65.0,
                k_wifi: 3,
                eta_wifi: 2.7,
            },
            static_cellular: StaticSection {
                eta_sta: 3.75,
                k_max: 12,
            },
            zf: ZfSection {
                eta_zf: 3.75,
                delta: 0.02,
                rho: 0.9,
            },
            engine: EngineSection {
                n_snapshots: 500,
                seed: 1,
                max_aps: 100,
            },
            demand: DemandSection {
                grid: default_demand_grid(),
            },
        };
        match name {
            "table1-open" => Ok(open),
            "table1-obstructed" => Ok(Scenario {
                name: "table1-obstructed".into(),
                area: ServiceArea {
                    wx: 4,
                    wy: 4,
                    ..open.area
                },
                propagation: PropagationParams {
                    l0_db: 37.0,
                    alpha: 4.0,
                    lw_db: 10.0,
                },
                ..open
            }),
            other => Err(Error::config(
                "preset",
                format!("unknown preset `{other}`, expected one of {PRESETS:?}"),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(key, format!("expected a positive number, got {v}")))
            }
        }
        positive("area.lx", self.area.lx)?;
        positive("area.ly", self.area.ly)?;
        if !self.propagation.l0_db.is_finite() {
            return Err(Error::config("propagation.l0_db", "expected a finite number"));
        }
        if !(self.propagation.alpha.is_finite() && self.propagation.alpha >= 0.0) {
            return Err(Error::config("propagation.alpha", "expected a number >= 0"));
        }
        if !(self.propagation.lw_db.is_finite() && self.propagation.lw_db >= 0.0) {
            return Err(Error::config("propagation.lw_db", "expected a number >= 0"));
        }
        positive("traffic.omega", self.traffic.omega)?;
        if self.traffic.omega > 1.0 {
            return Err(Error::config("traffic.omega", "expected a fraction in (0, 1]"));
        }
        positive("traffic.lambda_u", self.traffic.lambda_u)?;
        if self.user_count() == 0 {
            return Err(Error::config(
                "traffic.lambda_u",
                "user density times area rounds to zero users",
            ));
        }
        positive("radio.bandwidth_mhz", self.radio.bandwidth_mhz)?;
        positive("radio.pt_mw", self.radio.pt_mw)?;
        if !self.radio.gamma_t_db.is_finite() {
            return Err(Error::config("radio.gamma_t_db", "expected a finite number"));
        }
        if !(self.radio.beta > 0.0 && self.radio.beta < 1.0) {
            return Err(Error::config(
                "radio.beta",
                format!("expected a probability in (0, 1), got {}", self.radio.beta),
            ));
        }
        positive("radio.temperature_k", self.radio.temperature_k)?;
        positive("radio.sigma_z2", self.radio.sigma_z2)?;
        if self.wifi.cs_thr_dbm.is_nan() {
            return Err(Error::config("wifi.cs_thr_dbm", "expected a number"));
        }
        if self.wifi.cs_thr_aggressive_dbm.is_nan() {
            return Err(Error::config("wifi.cs_thr_aggressive_dbm", "expected a number"));
        }
        if self.wifi.k_wifi == 0 {
            return Err(Error::config("wifi.k_wifi", "expected an integer >= 1"));
        }
        positive("wifi.eta_wifi", self.wifi.eta_wifi)?;
        positive("static_cellular.eta_sta", self.static_cellular.eta_sta)?;
        if self.static_cellular.k_max == 0 {
            return Err(Error::config("static_cellular.k_max", "expected an integer >= 1"));
        }
        positive("zf.eta_zf", self.zf.eta_zf)?;
        if !(0.0..=1.0).contains(&self.zf.delta) {
            return Err(Error::config("zf.delta", "expected a probability in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.zf.rho) {
            return Err(Error::config("zf.rho", "expected a correlation in [0, 1]"));
        }
        if self.engine.n_snapshots == 0 {
            return Err(Error::config("engine.n_snapshots", "expected an integer >= 1"));
        }
        if self.engine.seed > i64::MAX as u64 {
            // TOML integers are signed
            return Err(Error::config(
                "engine.seed",
                "expected an integer <= 9223372036854775807",
            ));
        }
        if self.engine.max_aps == 0 {
            return Err(Error::config("engine.max_aps", "expected an integer >= 1"));
        }
        if self.demand.grid.is_empty() {
            return Err(Error::config("demand.grid", "expected at least one demand point"));
        }
        if self.demand.grid.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::config("demand.grid", "expected non-negative demands"));
        }
        if self.demand.grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::config("demand.grid", "expected ascending demands"));
        }
        Ok(())
    }

    /// Users dropped per snapshot: `round(lambda_u * area)`.
    pub fn user_count(&self) -> usize {
        (self.traffic.lambda_u * self.area.area_km2()).round() as usize
    }

    /// Thermal noise over the whole band, mW.
    pub fn noise_mw(&self) -> f64 {
        thermal_noise_mw(self.radio.temperature_k, self.radio.bandwidth_mhz)
    }

    pub fn gamma_t_linear(&self) -> f64 {
        db_to_linear(self.radio.gamma_t_db)
    }

    pub fn wifi_params(&self, aggressive: bool) -> WifiParams {
        WifiParams {
            cs_thr_dbm: if aggressive {
                self.wifi.cs_thr_aggressive_dbm
            } else {
                self.wifi.cs_thr_dbm
            },
            k_wifi: self.wifi.k_wifi,
            eta_wifi: self.wifi.eta_wifi,
            pt_mw: self.radio.pt_mw,
        }
    }

    pub fn static_params(&self) -> StaticParams {
        StaticParams {
            eta_sta: self.static_cellular.eta_sta,
            pt_mw: self.radio.pt_mw,
        }
    }

    pub fn zf_params(&self, erroneous: bool) -> ZfParams {
        ZfParams {
            eta_zf: self.zf.eta_zf,
            pt_mw: self.radio.pt_mw,
            delta: if erroneous { self.zf.delta } else { 0.0 },
            rho: self.zf.rho,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses a scenario document, resolving a top-level `preset` key.
    pub fn from_toml_str(text: &str) -> Result<Scenario> {
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        Self::from_table(doc)
    }

    fn from_table(mut doc: toml::Table) -> Result<Scenario> {
        let merged = match doc.remove("preset") {
            Some(toml::Value::String(name)) => {
                let mut base = preset_table(&name)?;
                merge(&mut base, doc, "");
                base
            }
            Some(other) => {
                return Err(Error::config(
                    "preset",
                    format!("expected a string, got {}", other.type_str()),
                ))
            }
            None => doc,
        };
        let scenario = deserialize_table(merged)?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Applies `INDOORDIM__SECTION__KEY=value` overrides. Values are parsed
    /// as TOML literals, falling back to strings.
    pub fn with_env_overrides<I>(&self, vars: I) -> Result<Scenario>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut doc = toml::Table::try_from(self).map_err(|e| Error::Parse(e.to_string()))?;
        let mut touched = false;
        for (name, raw) in vars {
            let Some(rest) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let path: Vec<String> = rest.split("__").map(|s| s.to_ascii_lowercase()).collect();
            let value = parse_literal(&raw);
            set_path(&mut doc, &path, value).map_err(|_| {
                Error::config(
                    path.join("."),
                    format!("environment override {name} names an unknown key"),
                )
            })?;
            touched = true;
        }
        if !touched {
            return Ok(self.clone());
        }
        let s = deserialize_table(doc)?;
        s.validate()?;
        Ok(s)
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    let probe = format!("v = {raw}");
    match probe.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_path(doc: &mut toml::Table, path: &[String], value: toml::Value) -> std::result::Result<(), ()> {
    match path {
        [] => Err(()),
        [leaf] => match doc.get_mut(leaf) {
            Some(slot) if !slot.is_table() => {
                *slot = coerce_like(slot, value);
                Ok(())
            }
            _ => Err(()),
        },
        [head, tail @ ..] => match doc.get_mut(head) {
            Some(toml::Value::Table(t)) => set_path(t, tail, value),
            _ => Err(()),
        },
    }
}

/// Environment strings like `100` should still fill float-typed keys.
fn coerce_like(existing: &toml::Value, value: toml::Value) -> toml::Value {
    match (existing, &value) {
        (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(*i as f64),
        _ => value,
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table, prefix: &str) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                merge(b, o, &format!("{prefix}{k}."));
            }
            (Some(slot), v) => *slot = coerce_like(slot, v),
            (None, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn preset_table(name: &str) -> Result<toml::Table> {
    let s = Scenario::preset(name)?;
    toml::Table::try_from(&s).map_err(|e| Error::Parse(e.to_string()))
}

fn deserialize_table(doc: toml::Table) -> Result<Scenario> {
    let text = toml::to_string(&doc).map_err(|e| Error::Parse(e.to_string()))?;
    toml::from_str::<Scenario>(&text).map_err(|e| schema_error(&e))
}

fn schema_error(e: &toml::de::Error) -> Error {
    let msg = e.message().to_string();
    // serde messages quote the offending field as `name`
    let key = msg
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<document>".into());
    Error::config(key, msg)
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    Scenario::from_toml_str(&text)
}
