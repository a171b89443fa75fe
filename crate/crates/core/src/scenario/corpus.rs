//! Scenario files shipped with the crate.

const CORPUS: [(&str, &str); 8] = [
    ("fig7_taildrop", include_str!("../../scenarios/fig7_taildrop.scn")),
    ("fig8_gsp_basic", include_str!("../../scenarios/fig8_gsp_basic.scn")),
    ("fig9_gsp_adaptive", include_str!("../../scenarios/fig9_gsp_adaptive.scn")),
    ("fig10_sweep", include_str!("../../scenarios/fig10_sweep.scn")),
    ("fig11_cdf", include_str!("../../scenarios/fig11_cdf.scn")),
    ("fig12_rtt", include_str!("../../scenarios/fig12_rtt.scn")),
    ("fig13_capacity", include_str!("../../scenarios/fig13_capacity.scn")),
    ("fig14_udp", include_str!("../../scenarios/fig14_udp.scn")),
];

/// Text of a bundled scenario.
pub fn builtin(name: &str) -> Option<&'static str> {
    CORPUS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    CORPUS.iter().map(|(n, _)| *n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn every_bundled_scenario_parses() {
        for name in builtin_names() {
            let cfg = parse_scenario(builtin(name).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.name, name);
            assert_eq!(parse_scenario(&cfg.emit()).unwrap(), cfg);
        }
    }
}
