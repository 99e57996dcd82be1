use std::path::Path;

use vecgrav::config::parse_config;

#[test]
fn shipped_configs_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("conf") {
            continue;
        }
        let cfg = parse_config(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let again = parse_config(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn empty_config_is_the_default() {
    let cfg = parse_config("# nothing\n").unwrap();
    assert_eq!(cfg, vecgrav::config::RunConfig::default());
}
