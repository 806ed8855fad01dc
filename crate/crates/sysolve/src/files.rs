//! Model and energy-weight JSON files.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use sysolve_core::{EnergyWeights, NetworkSpec, Rational};

use crate::error::{Error, Result};
use crate::number::parse_rational;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn from_json<'de, T: Deserialize<'de>>(text: &'de str, path: &Path) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        field: e.path().to_string(),
        source: e.into_inner(),
    })?;
    de.end().map_err(|source| Error::Json {
        path: path.to_path_buf(),
        field: ".".into(),
        source,
    })?;
    Ok(value)
}

/// Parses and validates a layer-spec file.
pub fn parse_network(text: &str, path: &Path) -> Result<NetworkSpec> {
    let net: NetworkSpec = from_json(text, path)?;
    net.validate()?;
    Ok(net)
}

pub fn read_network(path: &Path) -> Result<NetworkSpec> {
    parse_network(&read_text(path)?, path)
}

/// Pretty-printed with a trailing newline.
pub fn network_to_json(net: &NetworkSpec) -> String {
    let mut text = serde_json::to_string_pretty(net).expect("network specs always serialize");
    text.push('\n');
    text
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsFile {
    ub: Option<serde_json::Number>,
    inter_pe: Option<serde_json::Number>,
    aa: Option<serde_json::Number>,
    intra_pe: Option<serde_json::Number>,
}

/// Omitted weights keep their default.
pub fn parse_weights(text: &str, path: &Path) -> Result<EnergyWeights> {
    let file: WeightsFile = from_json(text, path)?;
    let defaults = EnergyWeights::default();
    let pick = |v: Option<serde_json::Number>, default: Rational| -> Result<Rational> {
        v.map_or(Ok(default), |n| parse_rational(&n.to_string()))
    };
    Ok(EnergyWeights::new(
        pick(file.ub, defaults.ub)?,
        pick(file.inter_pe, defaults.inter_pe)?,
        pick(file.aa, defaults.aa)?,
        pick(file.intra_pe, defaults.intra_pe)?,
    )?)
}

pub fn read_weights(path: &Path) -> Result<EnergyWeights> {
    parse_weights(&read_text(path)?, path)
}
