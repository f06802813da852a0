//! Persistence checks on the shipped data files: canonical saves reload to
//! the same profile and re-save byte for byte, scenario paths resolve
//! relative to the scenario file, and broken inputs report every problem in
//! one pass rather than stopping at the first.

use std::fs;
use std::path::PathBuf;

use lifeindex::{load_profile, load_scenario, save_profile, ProfileError};

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn shipped_profiles_roundtrip_exactly() {
    for name in ["sweden.toml", "united-states.toml", "china.toml"] {
        let original = load_profile(data_path(name)).unwrap();
        let dir = tempfile::tempdir().unwrap();

        let first = dir.path().join(name);
        save_profile(&original, &first).unwrap();
        let reloaded = load_profile(&first).unwrap();
        assert_eq!(original, reloaded, "{name} changed across a save/load cycle");

        // A second save of the reloaded profile must reproduce the bytes,
        // otherwise saves would churn version control diffs forever.
        let second = dir.path().join("again.toml");
        save_profile(&reloaded, &second).unwrap();
        assert_eq!(
            fs::read(&first).unwrap(),
            fs::read(&second).unwrap(),
            "{name} canonical form is unstable"
        );
    }
}

#[test]
fn scenario_profile_path_resolves_relative_to_the_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let profiles = dir.path().join("profiles");
    let scenarios = dir.path().join("scenarios");
    fs::create_dir_all(&profiles).unwrap();
    fs::create_dir_all(&scenarios).unwrap();

    fs::copy(data_path("sweden.toml"), profiles.join("sweden.toml")).unwrap();
    let text = fs::read_to_string(data_path("sweden-2012.toml"))
        .unwrap()
        .replace("profile = \"sweden.toml\"", "profile = \"../profiles/sweden.toml\"");
    let scenario_path = scenarios.join("eval.toml");
    fs::write(&scenario_path, &text).unwrap();

    // The reference is resolved against the scenario's directory, not the
    // process working directory.
    let scenario = load_scenario(&scenario_path).unwrap();
    assert_eq!(scenario.profile.name, "Sweden");
    assert_eq!(scenario.year, 2012);

    fs::remove_file(profiles.join("sweden.toml")).unwrap();
    let err = load_scenario(&scenario_path).unwrap_err();
    assert!(matches!(err, ProfileError::MissingProfile { .. }), "got {err:?}");
}

#[test]
fn a_broken_profile_reports_every_violation_at_once() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    let text = fs::read_to_string(data_path("sweden.toml"))
        .unwrap()
        .replace("currency = \"USD\"", "currency = \"EUR\"")
        .replace("per_capita_gdp = 52000.0", "per_capita_gdp = -1.0")
        .replace("rural_beds = 2.4", "rural_beds = -2.4");
    fs::write(&path, text).unwrap();

    let err = load_profile(&path).unwrap_err();
    let ProfileError::Validation { violations, .. } = err else {
        panic!("expected a validation error, got {err:?}");
    };
    let fields: Vec<&str> = violations.iter().map(|v| v.field.as_str()).collect();
    assert!(fields.contains(&"units.currency"), "got {fields:?}");
    assert!(fields.contains(&"country.per_capita_gdp"), "got {fields:?}");
    assert!(fields.contains(&"resources.beds_split.rural_beds"), "got {fields:?}");
}

#[test]
fn unknown_keys_are_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("extra.toml");
    let text = format!("{}\nmystery_knob = 1\n", fs::read_to_string(data_path("sweden.toml")).unwrap());
    fs::write(&path, text).unwrap();

    let err = load_profile(&path).unwrap_err();
    assert!(matches!(err, ProfileError::Parse { .. }), "got {err:?}");
}

#[test]
fn a_scenario_year_outside_the_series_is_a_violation() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(data_path("sweden.toml"), dir.path().join("sweden.toml")).unwrap();
    let text = fs::read_to_string(data_path("sweden-2012.toml"))
        .unwrap()
        .replace("year = 2012", "year = 2050");
    let path = dir.path().join("eval.toml");
    fs::write(&path, text).unwrap();

    let err = load_scenario(&path).unwrap_err();
    let ProfileError::Validation { violations, .. } = err else {
        panic!("expected a validation error, got {err:?}");
    };
    assert!(
        violations.iter().any(|v| v.field == "year" && v.message.contains("2050")),
        "got {violations:?}"
    );
}
