//! Scenario files bundled with the crate.

use crate::classifier::ScenarioConfig;
use crate::Result;

/// `(name, JSON text)` of every built-in scenario.
pub const BUILTIN: &[(&str, &str)] = &[
    ("lorenz_stable", include_str!("../scenarios/lorenz_stable.json")),
    ("lorenz_other_sep", include_str!("../scenarios/lorenz_other_sep.json")),
    ("lorenz_chaotic", include_str!("../scenarios/lorenz_chaotic.json")),
    ("smib_stable", include_str!("../scenarios/smib_stable.json")),
    ("smib_other_sep", include_str!("../scenarios/smib_other_sep.json")),
    ("smib_div", include_str!("../scenarios/smib_div.json")),
    ("wscc_fault", include_str!("../scenarios/wscc_fault.json")),
];

/// Looks up a built-in scenario; a trailing `.json` is ignored.
pub fn builtin(name: &str) -> Option<Result<ScenarioConfig>> {
    let key = name.strip_suffix(".json").unwrap_or(name);
    BUILTIN
        .iter()
        .find(|(n, _)| *n == key)
        .map(|(_, text)| ScenarioConfig::from_json(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_parses_and_is_named_after_its_file() {
        for (name, _) in BUILTIN {
            let cfg = builtin(name).unwrap().unwrap();
            assert_eq!(cfg.name, *name);
        }
        assert!(builtin("smib_div.json").is_some());
        assert!(builtin("nope").is_none());
    }
}
