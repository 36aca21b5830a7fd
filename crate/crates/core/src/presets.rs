//! Built-in equations.

use crate::determine::EvolutionPde;
use crate::error::{Error, Result};

pub const PRESETS: [(&str, &str); 3] = [
    ("viscoelastic-tube", "u_t + a*u*u_x + b*u_x3 + c*u_x4 + d*u_x5 = e*u_x2"),
    ("burgers", "u_t + u*u_x - u_x2"),
    ("kdv", "u_t + a*u*u_x + b*u_x3"),
];

pub fn source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            Error::Invalid(format!("unknown preset `{name}` (known: {})", names.join(", ")))
        })
}

pub fn preset(name: &str) -> Result<EvolutionPde> {
    EvolutionPde::parse(source(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for (name, _) in PRESETS {
            preset(name).unwrap();
        }
        assert_eq!(preset("viscoelastic-tube").unwrap().order, 5);
        assert_eq!(preset("burgers").unwrap().params.len(), 0);
        assert!(preset("heat").is_err());
    }
}
