//! `key=value` configuration files.
//!
//! Keys are long flag names without the leading dashes; `_` and `-` are
//! interchangeable. Blank lines and lines starting with `#` are skipped.

use std::path::Path;
use std::str::FromStr;

use crate::args::{Format, Options};
use crate::CliError;

pub fn apply_file(options: &mut Options, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    apply_str(options, &text)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config: invalid value {value:?} for {key}")))
}

pub fn apply_str(options: &mut Options, text: &str) -> Result<(), CliError> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let o = &mut *options;
        match key.as_str() {
            "kappa" => o.kappa = Some(parse(&key, value)?),
            "qubits" => o.qubits = Some(parse(&key, value)?),
            "steps" => o.steps = Some(parse(&key, value)?),
            "grid" => o.grid = Some(value.to_string()),
            "mode" => o.mode = Some(value.to_string()),
            "backend" => o.backend = Some(value.to_string()),
            "seed" => o.seed = Some(parse(&key, value)?),
            "out" => o.out = Some(value.into()),
            "format" => {
                o.format = Some(match value {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(CliError::Usage(format!("config: unknown format {value:?}"))),
                })
            }
            "theta" => o.theta = Some(parse(&key, value)?),
            "phi" => o.phi = Some(parse(&key, value)?),
            "n-max" => o.n_max = Some(parse(&key, value)?),
            "average-window" => o.average_window = Some(value.to_string()),
            "qubit-list" => o.qubit_list = Some(value.to_string()),
            "window" => o.window = Some(value.to_string()),
            "trajectories" => o.trajectories = Some(parse(&key, value)?),
            "cloud-steps" => o.cloud_steps = Some(parse(&key, value)?),
            "t1" => o.t1 = Some(parse(&key, value)?),
            "tphi" => o.tphi = Some(parse(&key, value)?),
            "rotation-ns" => o.rotation_ns = Some(parse(&key, value)?),
            "interaction-ns" => o.interaction_ns = Some(parse(&key, value)?),
            "shots" => o.shots = Some(parse(&key, value)?),
            "config" => return Err(CliError::Usage("config files cannot include other config files".into())),
            _ => return Err(CliError::Usage(format!("config line {}: unknown key {key:?}", lineno + 1))),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_comments() {
        let mut o = Options {
            kappa: Some(0.5),
            steps: Some(3),
            ..Options::default()
        };
        apply_str(&mut o, "# comment\nkappa = 2.5\n\nqubit_list=4,6\nformat=json\n").unwrap();
        assert_eq!(o.kappa, Some(2.5));
        assert_eq!(o.steps, Some(3));
        assert_eq!(o.qubit_list.as_deref(), Some("4,6"));
        assert_eq!(o.format, Some(Format::Json));
    }

    #[test]
    fn rejects_bad_lines() {
        let mut o = Options::default();
        assert!(apply_str(&mut o, "kappa").is_err());
        assert!(apply_str(&mut o, "colour=blue").is_err());
        assert!(apply_str(&mut o, "qubits=three").is_err());
    }
}
