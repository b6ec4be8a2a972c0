//! JSON config documents.
//!
//! Every physical quantity is given under a key whose suffix names its unit,
//! e.g. `length_km` or `length_m`. Unknown keys are rejected; an unknown
//! suffix on a known quantity is reported as a unit error.

use serde_json::{json, Map, Value};

use super::{
    CenterConvention, ChannelGrid, FiberSpan, GainMode, ModulationFormat, NumericsPolicy, SystemConfig,
};
use crate::error::ConfigError;
use crate::units::{db_per_km_to_alpha, db_to_linear, dbm_to_w, dispersion_to_beta, DEFAULT_LAMBDA_REF};

type Unit = (&'static str, fn(f64) -> f64);

fn id(x: f64) -> f64 {
    x
}

const LENGTH: &[Unit] = &[("km", id), ("m", |x| x * 1e-3)];
const ALPHA: &[Unit] = &[("db_per_km", db_per_km_to_alpha::<f64>), ("per_km", id)];
const BETA2: &[Unit] = &[("ps2_km", |x| x * 1e-24), ("s2_km", id)];
const BETA3: &[Unit] = &[("ps3_km", |x| x * 1e-36), ("s3_km", id)];
const DISPERSION: &[Unit] = &[("ps_nm_km", id)];
const SLOPE: &[Unit] = &[("ps_nm2_km", id)];
const WAVELENGTH: &[Unit] = &[("nm", |x| x * 1e-9), ("m", id)];
const GAMMA: &[Unit] = &[("per_w_km", id), ("per_w_m", |x| x * 1e3)];
const RAMAN: &[Unit] = &[("per_w_km_thz", |x| x * 1e-12), ("per_w_km_hz", id)];
const RATE: &[Unit] = &[("gbaud", |x| x * 1e9), ("baud", id), ("hz", id)];
const FREQ: &[Unit] = &[("ghz", |x| x * 1e9), ("thz", |x| x * 1e12), ("hz", id)];
const POWER: &[Unit] = &[("dbm", dbm_to_w::<f64>), ("mw", |x| x * 1e-3), ("w", id)];

/// Tracks which keys of one JSON object were consumed.
struct Section<'a> {
    name: String,
    map: &'a Map<String, Value>,
    used: Vec<String>,
    stems: Vec<&'static str>,
}

impl<'a> Section<'a> {
    fn new(name: impl Into<String>, value: &'a Value) -> Result<Self, ConfigError> {
        let name = name.into();
        let map = value.as_object().ok_or_else(|| ConfigError::WrongType {
            section: name.clone(),
            key: name.clone(),
            expected: "an object",
        })?;
        Ok(Self {
            name,
            map,
            used: Vec::new(),
            stems: Vec::new(),
        })
    }

    fn wrong(&self, key: &str, expected: &'static str) -> ConfigError {
        ConfigError::WrongType {
            section: self.name.clone(),
            key: key.to_string(),
            expected,
        }
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError::MissingKey {
            section: self.name.clone(),
            key: key.to_string(),
        }
    }

    fn raw(&mut self, key: &str) -> Option<&'a Value> {
        let v = self.map.get(key)?;
        self.used.push(key.to_string());
        Some(v)
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| self.wrong(key, "a number")),
        }
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|n| Some(n as usize))
                .ok_or_else(|| self.wrong(key, "a non-negative integer")),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<&'a str>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.as_str().map(Some).ok_or_else(|| self.wrong(key, "a string")),
        }
    }

    /// Finds `stem_<unit>` among the keys, converting to canonical units.
    fn quantity(&mut self, stem: &'static str, units: &[Unit]) -> Result<Option<f64>, ConfigError> {
        self.stems.push(stem);
        let mut found: Option<(String, f64)> = None;
        for (suffix, conv) in units {
            let key = format!("{stem}_{suffix}");
            if let Some(v) = self.number(&key)? {
                if let Some((prev, _)) = &found {
                    return Err(ConfigError::Conflict {
                        section: self.name.clone(),
                        detail: format!("`{prev}` and `{key}` give the same quantity"),
                    });
                }
                found = Some((key, conv(v)));
            }
        }
        Ok(found.map(|(_, v)| v))
    }

    fn quantity_array(&mut self, stem: &'static str, units: &[Unit]) -> Result<Option<Vec<f64>>, ConfigError> {
        self.stems.push(stem);
        let mut found: Option<(String, Vec<f64>)> = None;
        for (suffix, conv) in units {
            let key = format!("{stem}_{suffix}");
            if let Some(v) = self.raw(&key) {
                let arr = v.as_array().ok_or_else(|| self.wrong(&key, "an array of numbers"))?;
                let vals = arr
                    .iter()
                    .map(|x| x.as_f64().map(conv))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| self.wrong(&key, "an array of numbers"))?;
                if let Some((prev, _)) = &found {
                    return Err(ConfigError::Conflict {
                        section: self.name.clone(),
                        detail: format!("`{prev}` and `{key}` give the same quantity"),
                    });
                }
                found = Some((key, vals));
            }
        }
        Ok(found.map(|(_, v)| v))
    }

    /// Rejects keys that were never consumed.
    fn finish(&self) -> Result<(), ConfigError> {
        for key in self.map.keys() {
            if self.used.iter().any(|u| u == key) {
                continue;
            }
            // longest matching stem wins so `per_channel_x` is not read as `per_x`
            let stem = self
                .stems
                .iter()
                .filter(|s| key.starts_with(&format!("{s}_")))
                .max_by_key(|s| s.len());
            return Err(match stem {
                Some(stem) => ConfigError::UnknownUnit {
                    section: self.name.clone(),
                    key: key.clone(),
                    suffix: key[stem.len() + 1..].to_string(),
                },
                None => ConfigError::UnknownKey {
                    section: self.name.clone(),
                    key: key.clone(),
                },
            });
        }
        Ok(())
    }
}

/// Parses a JSON config document into a validated [`SystemConfig`].
pub fn parse_config(text: &str) -> Result<SystemConfig<f64>, ConfigError> {
    let root: Value = serde_json::from_str(text)?;
    let mut top = Section::new("document", &root)?;

    let spans_v = top.raw("spans");
    let grid_v = top.raw("grid");
    let modulation_v = top.raw("modulation");
    let numerics_v = top.raw("numerics");
    top.finish()?;
    let spans_v = spans_v.ok_or_else(|| top.missing("spans"))?;
    let grid_v = grid_v.ok_or_else(|| top.missing("grid"))?;

    let spans_arr = spans_v.as_array().ok_or_else(|| ConfigError::WrongType {
        section: "document".into(),
        key: "spans".into(),
        expected: "an array",
    })?;
    let mut spans = Vec::new();
    for (i, v) in spans_arr.iter().enumerate() {
        let (span, count) = parse_span(i, v)?;
        spans.extend(std::iter::repeat(span).take(count));
    }

    let grid = parse_grid(grid_v)?;
    let modulation = match modulation_v {
        Some(v) => parse_modulation(v)?,
        None => ModulationFormat::gaussian(),
    };
    let numerics = match numerics_v {
        Some(v) => parse_numerics(v)?,
        None => NumericsPolicy::default(),
    };
    SystemConfig::new(spans, grid, modulation, numerics)
}

fn parse_span(index: usize, v: &Value) -> Result<(FiberSpan<f64>, usize), ConfigError> {
    let mut s = Section::new(format!("spans[{index}]"), v)?;
    let length = s.quantity("length", LENGTH)?;
    let alpha = s.quantity("alpha", ALPHA)?;
    let gamma = s.quantity("gamma", GAMMA)?;
    let cr = s.quantity("cr", RAMAN)?.unwrap_or(0.0);
    let beta2 = s.quantity("beta2", BETA2)?;
    let beta3 = s.quantity("beta3", BETA3)?;
    let d = s.quantity("d", DISPERSION)?;
    let slope = s.quantity("s", SLOPE)?;
    let lambda = s.quantity("lambda", WAVELENGTH)?;
    let gain_v = s.raw("gain_mode");
    let count = s.count("count")?.unwrap_or(1);
    s.finish()?;
    let length = length.ok_or_else(|| s.missing("length_km"))?;
    let alpha = alpha.ok_or_else(|| s.missing("alpha_db_per_km"))?;
    let gamma = gamma.ok_or_else(|| s.missing("gamma_per_w_km"))?;
    let (beta2, beta3) = match (beta2, d) {
        (Some(b2), None) => {
            if slope.is_some() || lambda.is_some() {
                return Err(ConfigError::Conflict {
                    section: s.name.clone(),
                    detail: "dispersion slope/wavelength given together with beta2".into(),
                });
            }
            (b2, beta3.unwrap_or(0.0))
        }
        (None, Some(d)) => {
            if beta3.is_some() {
                return Err(ConfigError::Conflict {
                    section: s.name.clone(),
                    detail: "beta3 given together with dispersion D".into(),
                });
            }
            dispersion_to_beta(d, slope.unwrap_or(0.0), lambda.unwrap_or(DEFAULT_LAMBDA_REF))
        }
        (Some(_), Some(_)) => {
            return Err(ConfigError::Conflict {
                section: s.name.clone(),
                detail: "give either beta2 or dispersion D, not both".into(),
            })
        }
        (None, None) => return Err(s.missing("beta2_ps2_km")),
    };
    if let Some(l) = lambda {
        if !(l > 0.0) {
            return Err(ConfigError::invariant("span: lambda_ref > 0"));
        }
    }

    let gain_mode = match gain_v {
        None => GainMode::Transparent,
        Some(v) => parse_gain(&s.name, v)?,
    };
    if count == 0 {
        return Err(ConfigError::invariant("span: count >= 1"));
    }

    let span = FiberSpan {
        length,
        alpha,
        beta2,
        beta3,
        gamma,
        cr,
        gain_mode,
    };
    span.validate()?;
    Ok((span, count))
}

fn parse_gain(section: &str, v: &Value) -> Result<GainMode<f64>, ConfigError> {
    if let Some(name) = v.as_str() {
        return match name {
            "transparent" => Ok(GainMode::Transparent),
            other => Err(ConfigError::invariant(format!(
                "{section}: unknown gain_mode `{other}`"
            ))),
        };
    }
    let mut g = Section::new(format!("{section}.gain_mode"), v)?;
    let db = g.number("explicit_db")?;
    let lin = g.number("explicit_linear")?;
    g.finish()?;
    match (db, lin) {
        (Some(db), None) => Ok(GainMode::Explicit(db_to_linear(db))),
        (None, Some(lin)) => Ok(GainMode::Explicit(lin)),
        _ => Err(ConfigError::invariant(format!(
            "{section}: gain_mode needs exactly one of explicit_db, explicit_linear"
        ))),
    }
}

fn parse_grid(v: &Value) -> Result<ChannelGrid<f64>, ConfigError> {
    let mut s = Section::new("grid", v)?;
    let n = s.count("num_channels")?;
    let rate = s.quantity("symbol_rate", RATE)?;
    let spacing = s.quantity("spacing", FREQ)?;
    let power_v = s.raw("power");
    s.finish()?;
    let n = n.ok_or_else(|| s.missing("num_channels"))?;
    let rate = rate.ok_or_else(|| s.missing("symbol_rate_gbaud"))?;
    let spacing = spacing.ok_or_else(|| s.missing("spacing_ghz"))?;
    let power_v = power_v.ok_or_else(|| s.missing("power"))?;

    let mut p = Section::new("grid.power", power_v)?;
    let total = p.quantity("total", POWER)?;
    let per = p.quantity_array("per_channel", POWER)?;
    p.finish()?;
    let powers = match (total, per) {
        (Some(total), None) => vec![total / n as f64; n],
        (None, Some(per)) => {
            if per.len() != n {
                return Err(ConfigError::invariant(format!(
                    "grid: {} per-channel powers for {n} channels",
                    per.len()
                )));
            }
            per
        }
        _ => {
            return Err(ConfigError::Conflict {
                section: "grid.power".into(),
                detail: "give exactly one of total_* or per_channel_*".into(),
            })
        }
    };
    ChannelGrid::new(rate, spacing, powers)
}

fn parse_modulation(v: &Value) -> Result<ModulationFormat<f64>, ConfigError> {
    let mut s = Section::new("modulation", v)?;
    let name = s.string("name")?;
    let phi = s.number("phi")?;
    let psi = s.number("psi")?;
    s.finish()?;
    match (name, phi, psi) {
        (Some(name), None, None) => ModulationFormat::named(name),
        (name, Some(phi), Some(psi)) => ModulationFormat::new(name.unwrap_or("custom"), phi, psi),
        _ => Err(ConfigError::invariant(
            "modulation: give `name`, or both `phi` and `psi`",
        )),
    }
}

fn parse_numerics(v: &Value) -> Result<NumericsPolicy<f64>, ConfigError> {
    let mut s = Section::new("numerics", v)?;
    let mut out = NumericsPolicy::default();
    if let Some(r) = s.quantity("resolution", FREQ)? {
        out.resolution = r;
    }
    if let Some(m) = s.string("mu_method")? {
        out.mu_method = m.parse()?;
    }
    if let Some(dz) = s.quantity("delta_z", LENGTH)? {
        out.delta_z = dz;
    }
    if let Some(w) = s.count("workers")? {
        out.workers = w;
    }
    out.chunk_size = s.count("chunk_size")?;
    if let Some(n) = s.count("samples_per_cycle")? {
        out.samples_per_cycle = n;
    }
    if let Some(c) = s.string("center_convention")? {
        out.center_convention = c.parse::<CenterConvention>()?;
    }
    s.finish()?;
    out.validate()?;
    Ok(out)
}

/// Emits `cfg` with canonical-unit keys; re-parsing yields an identical value.
pub fn to_document(cfg: &SystemConfig<f64>) -> Value {
    let spans: Vec<Value> = cfg
        .spans
        .iter()
        .map(|s| {
            let gain = match s.gain_mode {
                GainMode::Transparent => json!("transparent"),
                GainMode::Explicit(g) => json!({ "explicit_linear": g }),
            };
            json!({
                "length_km": s.length,
                "alpha_per_km": s.alpha,
                "beta2_s2_km": s.beta2,
                "beta3_s3_km": s.beta3,
                "gamma_per_w_km": s.gamma,
                "cr_per_w_km_hz": s.cr,
                "gain_mode": gain,
            })
        })
        .collect();
    let mut numerics = json!({
        "resolution_hz": cfg.numerics.resolution,
        "mu_method": cfg.numerics.mu_method.as_str(),
        "delta_z_km": cfg.numerics.delta_z,
        "workers": cfg.numerics.workers,
        "samples_per_cycle": cfg.numerics.samples_per_cycle,
        "center_convention": cfg.numerics.center_convention.as_str(),
    });
    if let Some(c) = cfg.numerics.chunk_size {
        numerics["chunk_size"] = json!(c);
    }
    json!({
        "spans": spans,
        "grid": {
            "num_channels": cfg.grid.num_channels(),
            "symbol_rate_hz": cfg.grid.symbol_rate(),
            "spacing_hz": cfg.grid.spacing(),
            "power": { "per_channel_w": cfg.grid.powers() },
        },
        "modulation": {
            "name": cfg.modulation.name(),
            "phi": cfg.modulation.phi(),
            "psi": cfg.modulation.psi(),
        },
        "numerics": numerics,
    })
}

pub fn to_json_string(cfg: &SystemConfig<f64>) -> String {
    serde_json::to_string_pretty(&to_document(cfg)).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) const TABLE_I: &str = r#"{
        "spans": [{
            "length_km": 100, "alpha_db_per_km": 0.2, "beta2_ps2_km": -21.68,
            "beta3_ps3_km": 0, "gamma_per_w_km": 1.2, "cr_per_w_km_thz": 1.12
        }],
        "grid": {
            "num_channels": 101, "symbol_rate_gbaud": 10, "spacing_ghz": 10.1,
            "power": { "total_dbm": 19 }
        },
        "modulation": { "name": "PM-QPSK" },
        "numerics": { "resolution_ghz": 1, "mu_method": "segment", "delta_z_km": 1 }
    }"#;

    #[test]
    fn table_one_document() {
        let cfg = parse_config(TABLE_I).unwrap();
        assert!((cfg.spans[0].alpha - 0.04605).abs() < 1e-5);
        assert!((cfg.grid.p_tot() - 0.07943).abs() < 1e-5);
        assert_eq!(cfg.grid.m(), 50);
        assert_relative_eq!(cfg.spans[0].cr, 1.12e-12, max_relative = 1e-15);
        assert_relative_eq!(cfg.grid.b_tot(), 1.01e12, max_relative = 1e-12);
        assert_relative_eq!(cfg.modulation.phi(), -1.0, max_relative = 1e-12);
    }

    #[test]
    fn table_two_document() {
        let doc = r#"{
            "spans": [{ "length_km": 100, "alpha_db_per_km": 0.2, "d_ps_nm_km": 17,
                        "s_ps_nm2_km": 0.067, "gamma_per_w_km": 1.2, "cr_per_w_km_thz": 0.028 }],
            "grid": { "num_channels": 101, "symbol_rate_gbaud": 100, "spacing_ghz": 101,
                      "power": { "total_dbm": 25 } }
        }"#;
        let cfg = parse_config(doc).unwrap();
        assert_relative_eq!(cfg.grid.b_tot(), 10.1e12, max_relative = 1e-12);
        assert!((cfg.grid.p_tot() - 0.3162).abs() < 1e-4);
        let (b2, b3) = dispersion_to_beta(17.0, 0.067, DEFAULT_LAMBDA_REF);
        assert_eq!(cfg.spans[0].beta2, b2);
        assert_eq!(cfg.spans[0].beta3, b3);
    }

    #[test]
    fn single_channel_document() {
        let doc = r#"{
            "spans": [{ "length_km": 80, "alpha_db_per_km": 0.2, "beta2_ps2_km": -21.7,
                        "gamma_per_w_km": 1.3 }],
            "grid": { "num_channels": 1, "symbol_rate_gbaud": 32, "spacing_ghz": 50,
                      "power": { "per_channel_dbm": [0] } }
        }"#;
        let cfg = parse_config(doc).unwrap();
        assert_eq!(cfg.grid.m(), 0);
        assert_relative_eq!(cfg.grid.p_tot(), 0.001, max_relative = 1e-14);
        assert!(cfg.modulation.is_gaussian());
    }

    #[test]
    fn unknown_key_is_named() {
        let doc = TABLE_I.replace("\"gamma_per_w_km\"", "\"gama_per_w_km\"");
        match parse_config(&doc) {
            Err(ConfigError::UnknownKey { key, .. }) => assert_eq!(key, "gama_per_w_km"),
            other => panic!("expected unknown key, got {other:?}"),
        }
    }

    #[test]
    fn unknown_unit_is_named() {
        let doc = TABLE_I.replace("\"length_km\"", "\"length_mi\"");
        match parse_config(&doc) {
            Err(ConfigError::UnknownUnit { key, suffix, .. }) => {
                assert_eq!(key, "length_mi");
                assert_eq!(suffix, "mi");
            }
            other => panic!("expected unknown unit, got {other:?}"),
        }
        let doc = TABLE_I.replace("\"total_dbm\"", "\"total_dbw\"");
        assert!(matches!(parse_config(&doc), Err(ConfigError::UnknownUnit { .. })));
    }

    #[test]
    fn invariant_violations_are_reported() {
        let even = TABLE_I.replace("\"num_channels\": 101", "\"num_channels\": 100");
        assert!(matches!(parse_config(&even), Err(ConfigError::Invariant(_))));
        let overlap = TABLE_I.replace("\"spacing_ghz\": 10.1", "\"spacing_ghz\": 9");
        assert!(matches!(parse_config(&overlap), Err(ConfigError::Invariant(_))));
        let neg = TABLE_I.replace("\"length_km\": 100", "\"length_km\": -1");
        assert!(matches!(parse_config(&neg), Err(ConfigError::Invariant(_))));
        let dz = TABLE_I.replace("\"delta_z_km\": 1", "\"delta_z_km\": 0");
        assert!(matches!(parse_config(&dz), Err(ConfigError::Invariant(_))));
    }

    #[test]
    fn conflicting_dispersion_keys() {
        let doc = TABLE_I.replace("\"beta3_ps3_km\": 0", "\"d_ps_nm_km\": 17");
        assert!(matches!(parse_config(&doc), Err(ConfigError::Conflict { .. })));
    }

    #[test]
    fn span_count_expands() {
        let doc = TABLE_I.replace("\"cr_per_w_km_thz\": 1.12", "\"cr_per_w_km_thz\": 1.12, \"count\": 3");
        assert_eq!(parse_config(&doc).unwrap().spans.len(), 3);
    }

    #[test]
    fn canonical_round_trip() {
        let cfg = parse_config(TABLE_I).unwrap();
        let again = parse_config(&to_json_string(&cfg)).unwrap();
        assert_eq!(cfg, again);
    }
}
