//! System configuration.
//!
//! [`SystemParams`] is the single source of truth for every constant used by
//! the simulator. Powers are configured in dBm and the noise floor in dBm/Hz;
//! all computations go through the linear accessors (watts, Hz, meters,
//! seconds).
//!
//! The on-disk format is a flat TOML table whose keys are the field names
//! below (channel variances use `var_<link>` keys). Missing keys take their
//! defaults and unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable holding the path of a config file.
pub const CONFIG_ENV: &str = "NOMASEC_CONFIG";

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// Channel labels used for the variance table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkLabel {
    /// BS transmit array to BS receive antenna (self-interference).
    Bb,
    /// BS array to the center vehicle.
    BAlpha,
    /// BS array to the eavesdropper.
    Be,
    BetaAlpha,
    AlphaB,
    AlphaE,
    BetaE,
    /// Relay self-interference loop.
    AlphaAlpha,
}

/// Variances of the circularly-symmetric Gaussian channel coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelVariances {
    pub var_bb: f64,
    pub var_b_alpha: f64,
    pub var_be: f64,
    pub var_beta_alpha: f64,
    pub var_alpha_b: f64,
    pub var_alpha_e: f64,
    pub var_beta_e: f64,
    pub var_alpha_alpha: f64,
}

impl Default for ChannelVariances {
    fn default() -> Self {
        Self {
            var_bb: 1.0,
            var_b_alpha: 1.0,
            var_be: 1.0,
            var_beta_alpha: 1.0,
            var_alpha_b: 1.0,
            var_alpha_e: 1.0,
            var_beta_e: 1.0,
            var_alpha_alpha: 1.0,
        }
    }
}

impl ChannelVariances {
    pub fn get(&self, link: LinkLabel) -> f64 {
        match link {
            LinkLabel::Bb => self.var_bb,
            LinkLabel::BAlpha => self.var_b_alpha,
            LinkLabel::Be => self.var_be,
            LinkLabel::BetaAlpha => self.var_beta_alpha,
            LinkLabel::AlphaB => self.var_alpha_b,
            LinkLabel::AlphaE => self.var_alpha_e,
            LinkLabel::BetaE => self.var_beta_e,
            LinkLabel::AlphaAlpha => self.var_alpha_alpha,
        }
    }

    fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("var_bb", self.var_bb),
            ("var_b_alpha", self.var_b_alpha),
            ("var_be", self.var_be),
            ("var_beta_alpha", self.var_beta_alpha),
            ("var_alpha_b", self.var_alpha_b),
            ("var_alpha_e", self.var_alpha_e),
            ("var_beta_e", self.var_beta_e),
            ("var_alpha_alpha", self.var_alpha_alpha),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemParams {
    /// Number of legitimate vehicles.
    pub n_vehicles: usize,
    /// Tasks per vehicle.
    pub m_tasks: usize,
    /// Gauss-Legendre nodes for the edge-vehicle outage integral.
    pub quad_nodes: usize,
    pub cell_radius_m: f64,
    pub center_radius_m: f64,
    /// BS antennas; one receives, the others radiate artificial noise.
    pub bs_antennas: usize,
    pub bandwidth_hz: f64,
    /// Total artificial-noise power of the BS.
    pub p_an_dbm: f64,
    /// Transmit power of center (relay) vehicles.
    pub p_center_dbm: f64,
    /// Transmit power of edge vehicles.
    pub p_edge_dbm: f64,
    pub noise_density_dbm_hz: f64,
    pub f_mec_hz: f64,
    pub f_local_hz: f64,
    pub cycles_per_bit: f64,
    pub task_bits: f64,
    pub path_loss_exp: f64,
    /// Target secrecy rate in bit/s/Hz.
    pub secrecy_rate_target: f64,
    /// Maximum tolerated secrecy outage probability per vehicle.
    pub sop_tolerance: f64,
    /// Maximum tolerated completion delay in seconds.
    pub max_delay_s: f64,
    pub bs_height_m: f64,
    pub max_speed_mps: f64,
    /// Residual self-interference power at the full-duplex relay.
    pub p_si_dbm: f64,
    /// Vehicle-to-vehicle distances are clamped from below to this value.
    pub min_link_distance_m: f64,
    #[serde(flatten)]
    pub channel_variances: ChannelVariances,
    pub rng_seed: u64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            n_vehicles: 40,
            m_tasks: 10,
            quad_nodes: 500,
            cell_radius_m: 500.0,
            center_radius_m: 300.0,
            bs_antennas: 10,
            bandwidth_hz: 1e6,
            p_an_dbm: 40.0,
            p_center_dbm: 10.0,
            p_edge_dbm: 10.0,
            noise_density_dbm_hz: -174.0,
            f_mec_hz: 5e10,
            f_local_hz: 5e8,
            cycles_per_bit: 1000.0,
            task_bits: 1e5,
            path_loss_exp: 3.0,
            secrecy_rate_target: 0.1,
            sop_tolerance: 0.5,
            max_delay_s: 3.0,
            bs_height_m: 10.0,
            max_speed_mps: 20.0,
            p_si_dbm: -60.0,
            min_link_distance_m: 1.0,
            channel_variances: ChannelVariances::default(),
            rng_seed: 42,
        }
    }
}

impl SystemParams {
    /// Parses and validates a flat TOML config. Empty text yields defaults.
    pub fn load(config_text: &str) -> Result<Self> {
        let table: toml::Table = config_text
            .parse()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        Self::from_table(table)
    }

    /// Loads from an optional file (falling back to `$NOMASEC_CONFIG`), then
    /// applies `key=value` overrides.
    pub fn from_sources(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let env_path = std::env::var_os(CONFIG_ENV).map(std::path::PathBuf::from);
        let path = path.map(Path::to_path_buf).or(env_path);
        let mut table = match path {
            Some(p) => std::fs::read_to_string(&p)?
                .parse::<toml::Table>()
                .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?,
            None => toml::Table::new(),
        };
        for ov in overrides {
            let (key, value) = parse_override(ov)?;
            table.insert(key, value);
        }
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let known = toml::Table::try_from(SystemParams::default())
            .map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(bad) = table.keys().find(|k| !known.contains_key(*k)) {
            return Err(Error::Parse(format!("unknown key `{bad}`")));
        }
        let params: SystemParams = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    /// Serialises to the canonical flat TOML form.
    pub fn to_config_text(&self) -> String {
        toml::to_string(self).expect("SystemParams is always serialisable")
    }

    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 14] = [
            ("cell_radius_m", self.cell_radius_m),
            ("center_radius_m", self.center_radius_m),
            ("bandwidth_hz", self.bandwidth_hz),
            ("f_mec_hz", self.f_mec_hz),
            ("f_local_hz", self.f_local_hz),
            ("cycles_per_bit", self.cycles_per_bit),
            ("task_bits", self.task_bits),
            ("path_loss_exp", self.path_loss_exp),
            ("secrecy_rate_target", self.secrecy_rate_target),
            ("sop_tolerance", self.sop_tolerance),
            ("max_delay_s", self.max_delay_s),
            ("bs_height_m", self.bs_height_m),
            ("max_speed_mps", self.max_speed_mps),
            ("min_link_distance_m", self.min_link_distance_m),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(field, format!("must be finite and > 0, got {v}")));
            }
        }
        for (field, v) in [
            ("p_an_dbm", self.p_an_dbm),
            ("p_center_dbm", self.p_center_dbm),
            ("p_edge_dbm", self.p_edge_dbm),
            ("noise_density_dbm_hz", self.noise_density_dbm_hz),
            ("p_si_dbm", self.p_si_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(field, "must be finite"));
            }
        }
        for (field, v) in self.channel_variances.entries() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(field, format!("variance must be > 0, got {v}")));
            }
        }
        if self.center_radius_m >= self.cell_radius_m {
            return Err(Error::invalid(
                "center_radius_m",
                format!(
                    "must be smaller than cell_radius_m ({} >= {})",
                    self.center_radius_m, self.cell_radius_m
                ),
            ));
        }
        if self.sop_tolerance > 1.0 {
            return Err(Error::invalid("sop_tolerance", "must be <= 1"));
        }
        if self.quad_nodes < 2 {
            return Err(Error::invalid("quad_nodes", "must be >= 2"));
        }
        if self.bs_antennas < 3 {
            return Err(Error::invalid("bs_antennas", "must be >= 3"));
        }
        if self.n_vehicles == 0 {
            return Err(Error::invalid("n_vehicles", "must be >= 1"));
        }
        Ok(())
    }

    pub fn p_an_w(&self) -> f64 {
        dbm_to_watts(self.p_an_dbm)
    }

    /// AN power per transmitting antenna, `P_B / (K - 1)`.
    pub fn p_an_per_antenna_w(&self) -> f64 {
        self.p_an_w() / (self.bs_antennas - 1) as f64
    }

    pub fn p_center_w(&self) -> f64 {
        dbm_to_watts(self.p_center_dbm)
    }

    pub fn p_edge_w(&self) -> f64 {
        dbm_to_watts(self.p_edge_dbm)
    }

    pub fn p_si_w(&self) -> f64 {
        dbm_to_watts(self.p_si_dbm)
    }

    /// AWGN power over the whole band in watts.
    pub fn noise_power(&self) -> f64 {
        noise_power(self.noise_density_dbm_hz, self.bandwidth_hz)
    }

    pub fn variance(&self, link: LinkLabel) -> f64 {
        self.channel_variances.get(link)
    }

    /// Rate parameter of the exponential gain `|h|^2`, i.e. `1 / variance`.
    pub fn gain_rate(&self, link: LinkLabel) -> f64 {
        1.0 / self.variance(link)
    }

    pub fn with_edge_power_dbm(&self, dbm: f64) -> Self {
        Self {
            p_edge_dbm: dbm,
            ..self.clone()
        }
    }
}

/// `N_0 * B` with `N_0` in dBm/Hz.
pub fn noise_power(density_dbm_hz: f64, bandwidth_hz: f64) -> f64 {
    dbm_to_watts(density_dbm_hz) * bandwidth_hz
}

fn parse_override(s: &str) -> Result<(String, toml::Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("override `{s}` is not key=value")))?;
    let key = key.trim().to_string();
    let doc = format!("v = {}", raw.trim());
    let mut table: toml::Table = doc
        .parse()
        .map_err(|e: toml::de::Error| Error::Parse(format!("override `{s}`: {e}")))?;
    let value = table.remove("v").expect("key inserted above");
    Ok((key, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_config_gives_defaults() {
        let p = SystemParams::load("").unwrap();
        assert_eq!(p.n_vehicles, 40);
        assert_eq!(p, SystemParams::default());
    }

    #[test]
    fn an_power_40_dbm_is_10_watts() {
        let p = SystemParams::load("p_an_dbm = 40.0").unwrap();
        assert!((p.p_an_w() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn center_radius_beyond_cell_is_rejected() {
        let err = SystemParams::load("center_radius_m = 600.0\ncell_radius_m = 500.0").unwrap_err();
        assert!(err.to_string().contains("center_radius_m"), "{err}");
    }

    #[test]
    fn unknown_key_and_bad_syntax_are_rejected() {
        assert!(matches!(SystemParams::load("nonsense = 1"), Err(Error::Parse(_))));
        assert!(matches!(SystemParams::load("n_vehicles = "), Err(Error::Parse(_))));
    }

    #[test]
    fn variance_keys_are_flat() {
        let p = SystemParams::load("var_be = 2.0").unwrap();
        assert_eq!(p.variance(LinkLabel::Be), 2.0);
        assert_eq!(p.gain_rate(LinkLabel::Be), 0.5);
        assert!(SystemParams::load("var_be = 0.0").is_err());
    }

    #[test]
    fn noise_power_values() {
        let p = SystemParams::default();
        assert!((p.noise_power() / 3.981e-15 - 1.0).abs() < 1e-3);
        let doubled = noise_power(-174.0, 2e6);
        assert!((doubled / p.noise_power() - 2.0).abs() < 1e-12);
        assert!((noise_power(0.0, 1.0) - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn overrides_take_precedence() {
        let p = SystemParams::from_sources(None, &["p_edge_dbm = 25".into(), "m_tasks=4".into()])
            .unwrap();
        assert_eq!(p.p_edge_dbm, 25.0);
        assert_eq!(p.m_tasks, 4);
        assert!(SystemParams::from_sources(None, &["p_edge_dbm".into()]).is_err());
    }

    #[test]
    fn round_trip_is_stable() {
        let p = SystemParams {
            p_edge_dbm: 17.5,
            rng_seed: 9,
            ..Default::default()
        };
        let once = SystemParams::load(&p.to_config_text()).unwrap();
        assert_eq!(once, p);
        assert_eq!(once.to_config_text(), p.to_config_text());
    }

    proptest! {
        #[test]
        fn ten_db_is_a_factor_of_ten(x in -200.0f64..100.0) {
            let r = dbm_to_watts(x + 10.0) / (10.0 * dbm_to_watts(x));
            prop_assert!((r - 1.0).abs() < 1e-12);
        }

        #[test]
        fn load_serialize_load_is_idempotent(
            pe in -20.0f64..40.0, m in 0usize..20, seed in 0u64..(i64::MAX as u64), v in 0.1f64..5.0
        ) {
            let mut p = SystemParams { p_edge_dbm: pe, m_tasks: m, rng_seed: seed, ..Default::default() };
            p.channel_variances.var_alpha_e = v;
            let a = SystemParams::load(&p.to_config_text()).unwrap();
            let b = SystemParams::load(&a.to_config_text()).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(&a, &p);
        }
    }
}
