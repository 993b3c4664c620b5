//! Scenario files: TOML in, TOML out, with key paths on every error.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use dualbuck::engine::Scenario;

/// Parses a scenario document. Type errors and unknown keys name the
/// offending key path; semantic checks run afterwards.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = toml::Deserializer::parse(text).map_err(|e| anyhow!("{}", e.message()))?;
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow!("{path}: {}", e.inner().message())
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_scenario(&text).with_context(|| format!("in {}", path.display()))
}

pub fn dump_scenario(scenario: &Scenario) -> Result<String> {
    toml::to_string_pretty(scenario).context("serialising scenario")
}

#[cfg(test)]
mod tests {
    use super::*;
    use dualbuck::control::Case;

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(parse_scenario("").unwrap(), Scenario::default());
    }

    #[test]
    fn dump_round_trips() {
        for case in [Case::NoHess, Case::BatteryOnly, Case::FullHess] {
            let s = Scenario::for_case(case);
            assert_eq!(parse_scenario(&dump_scenario(&s).unwrap()).unwrap(), s);
        }
    }

    #[test]
    fn wrong_type_names_the_key() {
        let err = parse_scenario("[hess]\nv_dc_ref_volts = \"fast\"\n").unwrap_err();
        assert!(format!("{err:#}").contains("hess.v_dc_ref_volts"), "{err:#}");
    }

    #[test]
    fn unknown_key_names_the_section() {
        let err = parse_scenario("[hess]\nv_dc = \"fast\"\n").unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("hess") && msg.contains("v_dc"), "{msg}");
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let err = parse_scenario("[scenario]\nduration_seconds = -1.0\n").unwrap_err();
        assert!(format!("{err:#}").contains("scenario.duration_seconds"));
    }
}
