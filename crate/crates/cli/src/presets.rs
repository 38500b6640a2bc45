//! Configurations shipped with the binary, addressable by name.

/// `(name, config text)` pairs.
pub const PRESETS: &[(&str, &str)] = &[
    ("linear_e1", include_str!("../presets/linear_e1.cfg")),
    ("linear_e1_doubleloop", include_str!("../presets/linear_e1_doubleloop.cfg")),
    ("linear_e1_doubleclip", include_str!("../presets/linear_e1_doubleclip.cfg")),
    ("linear_e1_mgda", include_str!("../presets/linear_e1_mgda.cfg")),
    ("linear_e1_modo", include_str!("../presets/linear_e1_modo.cfg")),
    ("wine_e2", include_str!("../presets/wine_e2.cfg")),
    ("wine_e2_doubleloop", include_str!("../presets/wine_e2_doubleloop.cfg")),
    ("wine_e2_doubleclip", include_str!("../presets/wine_e2_doubleclip.cfg")),
    ("wine_e2_mgda", include_str!("../presets/wine_e2_mgda.cfg")),
    ("wine_e2_modo", include_str!("../presets/wine_e2_modo.cfg")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, SolverSpec};

    #[test]
    fn every_preset_parses() {
        for (name, text) in PRESETS {
            let cfg = parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(!cfg.runs.is_empty(), "{name}");
        }
    }

    #[test]
    fn linear_double_loop_preset_values() {
        let cfg = parse_config(preset("linear_e1_doubleloop").unwrap()).unwrap();
        let run = &cfg.runs[0];
        assert_eq!(run.seeds, vec![0, 1, 2, 3, 4]);
        let SolverSpec::DoubleLoop(c) = &run.solver else {
            panic!("{:?}", run.solver)
        };
        assert_eq!(
            (c.inner_iterations, c.gamma, c.alpha, c.beta, c.rho, c.batch_size, c.iterations),
            (20, 5e-3, 5e-5, 5e-5, 1e-5, 256, 600)
        );
    }

    #[test]
    fn combined_presets_hold_four_runs() {
        for name in ["linear_e1", "wine_e2"] {
            let cfg = parse_config(preset(name).unwrap()).unwrap();
            let solvers: Vec<_> = cfg.runs.iter().map(|r| r.solver.name()).collect();
            assert_eq!(solvers, ["double_loop", "double_clip", "mgda", "modo"]);
        }
    }
}
