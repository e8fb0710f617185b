//! TOML run configuration for `rds identify`. Any key present here wins over
//! the matching command-line flag.
//!
//! ```toml
//! [identify]
//! n = 64
//! alpha = 1.0
//! grid = 101
//! skip = 1
//! validation_points = 256
//!
//! [box]
//! temperature = [250.0, 300.0]
//! time = [250.0, 300.0]
//!
//! [tolerances]
//! rel = 1e-8
//! abs = 1e-10
//!
//! [kinetics]
//! e1 = 2500.2
//! e2 = 5000.1
//! k1_ref = 0.0666
//! k2_ref = 10333.5
//! r_gas = 8.314
//! ca0 = 2000.0
//! volume = 1.0
//! ```

use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub identify: IdentifySection,
    #[serde(default, rename = "box")]
    pub bounds: BoxSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub kinetics: KineticSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifySection {
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub grid: Option<usize>,
    pub skip: Option<u64>,
    pub validation_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub temperature: Option<(f64, f64)>,
    pub time: Option<(f64, f64)>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    pub rel: Option<f64>,
    pub abs: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticSection {
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub k1_ref: Option<f64>,
    pub k2_ref: Option<f64>,
    pub r_gas: Option<f64>,
    pub ca0: Option<f64>,
    pub volume: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}
