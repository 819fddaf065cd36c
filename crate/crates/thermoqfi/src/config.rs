//! Plain-text construction of laws, temperature models, and channels.
//!
//! Two front ends share the same types: JSON documents (serde) and compact
//! `kind:key=value,...` spec strings for command lines. Tabulated rates load
//! from two-column CSV files (time, rate) with strictly increasing time.

use std::collections::BTreeMap;
use std::path::Path;

use crate::channel::{EnvironmentChannel, RateFunction};
use crate::dephasing::DephasingLaw;
use crate::error::{Error, Result};
use crate::temperature::TemperatureModel;

/// Read a two-column CSV (first column strictly increasing) with an
/// optional header row.
pub fn read_two_column_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(Error::Config(format!(
                "{}: row {} has {} fields, expected 2",
                path.display(),
                i + 1,
                record.len()
            )));
        }
        let a = record[0].parse::<f64>();
        let b = record[1].parse::<f64>();
        match (a, b) {
            (Ok(a), Ok(b)) => rows.push((a, b)),
            _ if i == 0 => continue, // header row
            _ => {
                return Err(Error::Config(format!(
                    "{}: row {} is not numeric",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if rows.len() < 2 {
        return Err(Error::Config(format!("{}: needs at least two data rows", path.display())));
    }
    if rows.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Config(format!(
            "{}: first column must be strictly increasing",
            path.display()
        )));
    }
    Ok(rows)
}

fn split_spec(spec: &str) -> (String, BTreeMap<String, String>) {
    let (head, rest) = match spec.split_once(':') {
        Some((h, r)) => (h, r),
        None => (spec, ""),
    };
    let mut kv = BTreeMap::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        if let Some((k, v)) = part.split_once('=') {
            kv.insert(k.trim().to_string(), v.trim().to_string());
        } else {
            kv.insert(part.trim().to_string(), String::new());
        }
    }
    (head.trim().to_lowercase(), kv)
}

fn need_f64(kv: &BTreeMap<String, String>, key: &str, what: &str) -> Result<f64> {
    kv.get(key)
        .ok_or_else(|| Error::Config(format!("{what}: missing '{key}'")))?
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{what}: '{key}' is not a number")))
}

/// Parse a temperature model spec string:
/// `linear:g=G` | `power:g=G,p=P` | `table:FILE.csv`.
pub fn parse_temperature_model(spec: &str) -> Result<TemperatureModel> {
    let (head, kv) = split_spec(spec);
    match head.as_str() {
        "linear" => TemperatureModel::linear(need_f64(&kv, "g", "linear model")?),
        "power" => TemperatureModel::power(
            need_f64(&kv, "g", "power model")?,
            need_f64(&kv, "p", "power model")?,
        ),
        "table" => {
            let file = spec
                .split_once(':')
                .map(|(_, f)| f.trim())
                .filter(|f| !f.is_empty())
                .ok_or_else(|| Error::Config("table model: missing file path".into()))?;
            TemperatureModel::custom_table(read_two_column_csv(Path::new(file))?)
        }
        other => Err(Error::Config(format!(
            "unknown temperature model '{other}' (expected linear, power, or table)"
        ))),
    }
}

/// Parse a channel spec string: `none` |
/// `dephasing:kappa=K,nu=NP` | `dephasing:rates=FILE` |
/// `damping:eta=E` | `damping:rates=FILE`.
pub fn parse_channel(spec: &str) -> Result<EnvironmentChannel> {
    let (head, kv) = split_spec(spec);
    match head.as_str() {
        "none" => Ok(EnvironmentChannel::None),
        "dephasing" => {
            if let Some(file) = kv.get("rates") {
                let rate = RateFunction::table(read_two_column_csv(Path::new(file))?)?;
                Ok(EnvironmentChannel::ExtraDephasingRate { rate })
            } else {
                EnvironmentChannel::extra_dephasing(
                    need_f64(&kv, "kappa", "dephasing channel")?,
                    need_f64(&kv, "nu", "dephasing channel")?,
                )
            }
        }
        "damping" => {
            let rate = if let Some(file) = kv.get("rates") {
                RateFunction::table(read_two_column_csv(Path::new(file))?)?
            } else {
                RateFunction::constant(need_f64(&kv, "eta", "damping channel")?)
            };
            Ok(EnvironmentChannel::AmplitudeDamping { rate })
        }
        other => Err(Error::Config(format!(
            "unknown channel '{other}' (expected none, dephasing, or damping)"
        ))),
    }
}

/// Build a dephasing law from its parts.
pub fn build_law(nu: f64, model: TemperatureModel, t_cha: Option<f64>) -> Result<DephasingLaw> {
    match t_cha {
        Some(tc) if tc > 0.0 => DephasingLaw::with_onset(nu, model, tc),
        _ => DephasingLaw::new(nu, model),
    }
}

/// Parse a law from a JSON document, e.g.
/// `{"nu": 1.0, "temp_model": {"kind": "linear", "g": 1.0}, "t_cha": null}`.
pub fn law_from_json(doc: &str) -> Result<DephasingLaw> {
    let law: DephasingLaw =
        serde_json::from_str(doc).map_err(|e| Error::Config(format!("law json: {e}")))?;
    if !(law.nu > 0.0) {
        return Err(Error::Config("law json: nu must be positive".into()));
    }
    Ok(law)
}

/// Parse a channel from a JSON document.
pub fn channel_from_json(doc: &str) -> Result<EnvironmentChannel> {
    serde_json::from_str(doc).map_err(|e| Error::Config(format!("channel json: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Write;

    #[test]
    fn spec_strings_round_trip() {
        let m = parse_temperature_model("linear:g=2.5").unwrap();
        assert_relative_eq!(m.alpha(1.0).unwrap(), 2.5);
        let m = parse_temperature_model("power:g=1.5,p=2").unwrap();
        assert_relative_eq!(m.alpha(2.0).unwrap(), 6.0);
        assert!(parse_temperature_model("linear").is_err());
        assert!(parse_temperature_model("mystery:g=1").is_err());

        let ch = parse_channel("none").unwrap();
        assert!(ch.is_none());
        let ch = parse_channel("dephasing:kappa=0.2,nu=2").unwrap();
        assert_relative_eq!(ch.kappa(2.0).unwrap(), 0.8);
        let ch = parse_channel("damping:eta=0.25").unwrap();
        assert_relative_eq!(ch.lambda(2.0).unwrap(), (-1.0f64).exp());
        assert!(parse_channel("dephasing:kappa=0.2").is_err());
    }

    #[test]
    fn csv_rate_tables_load_and_validate() {
        let dir = std::env::temp_dir();
        let path = dir.join("thermoqfi_test_rates.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "t,rate").unwrap();
        for i in 0..300 {
            let t = i as f64 / 299.0;
            writeln!(f, "{t},{}", 0.5 + t).unwrap();
        }
        drop(f);
        let rows = read_two_column_csv(&path).unwrap();
        assert_eq!(rows.len(), 300);
        let ch = parse_channel(&format!("damping:rates={}", path.display())).unwrap();
        assert!(ch.lambda(0.5).unwrap() < 1.0);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn csv_rejects_non_increasing_time() {
        let dir = std::env::temp_dir();
        let path = dir.join("thermoqfi_test_bad.csv");
        std::fs::write(&path, "0.0,1.0\n0.0,2.0\n").unwrap();
        assert!(read_two_column_csv(&path).is_err());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn json_documents_build_laws_and_channels() {
        let law = law_from_json(
            r#"{"nu": 2.0, "temp_model": {"kind": "power", "g": 1.0, "p": 1.5}, "t_cha": 0.04}"#,
        )
        .unwrap();
        assert_relative_eq!(law.gamma(0.02, 1.0).unwrap(), 4e-4, max_relative = 1e-12);
        assert!(law.is_two_phase());

        let ch = channel_from_json(r#"{"kind": "extra_dephasing", "kappa": 0.3, "nu_prime": 2.0}"#)
            .unwrap();
        assert_relative_eq!(ch.kappa(1.0).unwrap(), 0.3);
        let ch = channel_from_json(
            r#"{"kind": "amplitude_damping", "rate": {"form": "constant", "value": 0.1}}"#,
        )
        .unwrap();
        assert_relative_eq!(ch.lambda(1.0).unwrap(), (-0.2f64).exp());
    }
}
