use spraylab::cli::config::*;
use spraylab::jets::SampleBox;

const KLEIN: &str = r#"
scenario = "verify-family"
dimension = 2
seed = 7

[coefficients]
c_matrix = [1.0, 0.0, 0.0, 1.0]
c_vector = [0.0, 0.0]
c_scalar = 1.0
"#;

#[test]
fn parses_minimal_config_with_defaults() {
    let c = ScenarioConfig::from_toml(KLEIN).unwrap();
    assert_eq!(c.scenario, Scenario::VerifyFamily);
    assert_eq!(c.num_samples, 100);
    assert_eq!(c.tolerances, Tolerances::default());
    assert_eq!(c.sample_box().unwrap(), SampleBox::cube(2, 0.5));
}

#[test]
fn empty_box_is_rejected() {
    let text = format!("{KLEIN}\n[sample_box]\nx_intervals = [[0.0, 0.0], [-1.0, 1.0]]\n");
    assert!(matches!(
        ScenarioConfig::from_toml(&text),
        Err(ConfigError::Invalid(_))
    ));
}

#[test]
fn unknown_keys_and_bad_sections() {
    assert!(matches!(
        ScenarioConfig::from_toml(&format!("{KLEIN}\nbogus = 1\n")),
        Err(ConfigError::Parse(_))
    ));
    let no_coeffs = "scenario = \"verify-family\"\ndimension = 2\n";
    assert!(ScenarioConfig::from_toml(no_coeffs).is_err());
    let spray = "scenario = \"holonomy\"\ndimension = 3\n[spray]\nkind = \"example1\"\n";
    assert!(ScenarioConfig::from_toml(spray).is_err());
}

#[test]
fn tagged_spray_section() {
    let text = "scenario = \"check-spray\"\ndimension = 2\n[spray]\nkind = \"constant-one-form\"\nb = [1.0, 1.0]\n";
    let c = ScenarioConfig::from_toml(text).unwrap();
    assert_eq!(
        c.spray,
        Some(SprayConfig::ConstantOneForm { b: vec![1.0, 1.0] })
    );
}
