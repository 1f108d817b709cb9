//! Flag tables, the config-file format and flag > file > default layering.

use std::collections::BTreeMap;
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::{Arg, ArgMatches, Command};

use crate::CliError;

/// One configurable key: a `--name` flag and a `name = value` config line.
pub struct Key {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(name: &'static str, default: Option<&'static str>, help: &'static str) -> Key {
    Key { name, default, help }
}

pub const SWEEP: &[Key] = &[
    key("setting", Some("asym"), "Channel geometry: asym (mode 1 kept) or sym (both modes sent)"),
    key("mode", Some("ensemble"), "Averaging: ensemble (averaged state) or measured (averaged E_LN)"),
    key("metric", Some("both"), "Reported columns: eln, rate or both"),
    key("states", Some("tmsv,pss_b,pss_s,pas_b,pas_s,prs_b,prs_s"), "Comma-separated states; noon_N selects a NOON state"),
    key("squeezing-db", Some("3"), "Source TMSV squeezing in dB"),
    key("t", Some("rate"), "Beam-splitter transmissivity: rate, eln (maximize the initial value) or a number"),
    key("calibrate-eln", None, "Re-tune every state's squeezing to this initial E_LN (ebits)"),
    key("calibration-t", Some("0.9"), "Transmissivity of calibrated photon-operation states"),
    key("chi", None, "Excess noise on both modes"),
    key("chi1", None, "Excess noise on mode 1 (default 0 asym, 0.02 sym)"),
    key("chi2", None, "Excess noise on mode 2 (default 0.02)"),
    key("losses", Some("5:30:6"), "Mean-loss grid in dB: min:max:count or a comma list"),
    key("cutoff", None, "Photon-number cutoff F_max (default 10 up to 3.5 dB, 50 above)"),
    key("epsilon", Some("0.001"), "Largest tolerated trace deficit"),
    key("n-max", Some("80"), "Fock cutoff of the initial states"),
    key("quadrature-order", None, "Quadrature nodes per channel (default: convergence-checked)"),
    key("spot-ratio", Some("1.1"), "Beam-spot to aperture ratio W/beta"),
];

pub const OPTIMIZE_T: &[Key] = &[
    key("family", None, "Photon-operation family (pss_b, pss_s, pas_b, pas_s, prs_b, prs_s)"),
    key("squeezing-db", Some("3"), "Source TMSV squeezing in dB"),
    key("objective", Some("rate"), "eln (initial E_LN) or rate (P_c E_LN)"),
    key("loss-db", None, "Optimize the rate after a fading channel of this mean loss"),
    key("setting", Some("asym"), "Channel geometry for --loss-db"),
    key("mode", Some("ensemble"), "Averaging for --loss-db"),
    key("chi", None, "Excess noise on both modes"),
    key("chi1", None, "Excess noise on mode 1"),
    key("chi2", None, "Excess noise on mode 2"),
    key("t-min", Some("0.5"), "Lower end of the transmissivity grid"),
    key("t-step", Some("0.01"), "Coarse grid step"),
    key("t-fine", Some("0.001"), "Refinement step"),
    key("n-max", Some("80"), "Fock cutoff of the initial state"),
];

pub const THRESHOLD: &[Key] = &[
    key("family", None, "Non-Gaussian family compared with the source TMSV"),
    key("squeezing-db", Some("3"), "Source TMSV squeezing in dB"),
    key("loss-db", Some("10"), "Mean fading loss in dB"),
    key("chi", Some("0"), "Excess noise on the transmitted mode"),
    key("t", Some("rate"), "Transmissivity: rate, eln or a number"),
    key("cutoff", None, "Photon-number cutoff F_max"),
    key("n-max", Some("80"), "Fock cutoff of the initial states"),
    key("spot-ratio", Some("1.1"), "Beam-spot to aperture ratio W/beta"),
];

pub const COMPARE_BELL: &[Key] = &[
    key("squeezing-db", Some("3.5"), "Comma-separated TMSV squeezing values in dB"),
    key("losses", Some("5:30:6"), "Mean-loss grid in dB"),
    key("chi", Some("0.02"), "Excess noise on both TMSV modes"),
    key("spot-ratio", Some("1.1"), "Beam-spot to aperture ratio W/beta"),
];

pub const CHANNEL_INFO: &[Key] = &[
    key("target-loss-db", None, "Solve the beam-wander deviation for this mean loss"),
    key("sigma-b", None, "Beam-wander deviation in units of the aperture radius"),
    key("spot-ratio", Some("1.1"), "Beam-spot to aperture ratio W/beta"),
];

/// Keys of a subcommand, `None` for commands without a config table.
pub fn keys_of(subcommand: &str) -> Option<&'static [Key]> {
    match subcommand {
        "sweep" => Some(SWEEP),
        "optimize-t" => Some(OPTIMIZE_T),
        "threshold" => Some(THRESHOLD),
        "compare-bell" => Some(COMPARE_BELL),
        "channel-info" => Some(CHANNEL_INFO),
        _ => None,
    }
}

fn keyed(name: &'static str, about: &'static str, keys: &[Key]) -> Command {
    let mut cmd = Command::new(name).about(about);
    for k in keys {
        let mut help = k.help.to_string();
        if let Some(d) = k.default {
            help.push_str(&format!(" [default: {d}]"));
        }
        cmd = cmd.arg(Arg::new(k.name).long(k.name).value_name("VALUE").help(help));
    }
    cmd.arg(out_arg())
}

fn out_arg() -> Arg {
    Arg::new("out").short('o').long("out").value_name("STEM").help("Write <STEM>.csv or <STEM>.json plus <STEM>.manifest.json")
}

pub fn command() -> Command {
    Command::new("fockfade")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Entanglement of Gaussian and non-Gaussian states over fading loss channels")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("Flat key = value file; flags override it, it overrides defaults"),
        )
        .subcommand(keyed("sweep", "Entanglement and rate versus mean fading loss", SWEEP).mut_arg("out", |a| a.required(true)))
        .subcommand(keyed("optimize-t", "Grid search of the beam-splitter transmissivity", OPTIMIZE_T))
        .subcommand(keyed("threshold", "Transmittance threshold at which stored non-Gaussian states match the TMSV rate", THRESHOLD))
        .subcommand(keyed("compare-bell", "TMSV entanglement rate relative to single-photon Bell pairs", COMPARE_BELL))
        .subcommand(keyed("channel-info", "Fading-channel parameters for a mean loss or beam-wander deviation", CHANNEL_INFO))
        .subcommand(
            Command::new("rerun")
                .about("Re-run the command recorded in a manifest")
                .arg(Arg::new("manifest").required(true).value_name("MANIFEST").help("A <stem>.manifest.json file"))
                .arg(out_arg()),
        )
}

/// Where a resolved value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    File,
    Default,
}

impl Source {
    pub fn label(self) -> &'static str {
        match self {
            Source::Flag => "flag",
            Source::File => "file",
            Source::Default => "default",
        }
    }
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let k = k.trim().to_string();
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key '{k}'", i + 1)));
        }
    }
    Ok(out)
}

/// The fully layered configuration of one subcommand, in table order.
#[derive(Debug, Clone)]
pub struct Resolved {
    entries: Vec<(&'static str, Option<String>, Source)>,
}

impl Resolved {
    pub fn layer(keys: &'static [Key], flags: &BTreeMap<String, String>, file: &BTreeMap<String, String>) -> Result<Self, CliError> {
        if let Some(bad) = file.keys().find(|k| !keys.iter().any(|key| key.name == k.as_str())) {
            let known: Vec<_> = keys.iter().map(|k| k.name).collect();
            return Err(CliError::Usage(format!("unknown config key '{bad}' (expected one of {})", known.join(", "))));
        }
        let entries = keys
            .iter()
            .map(|k| {
                if let Some(v) = flags.get(k.name) {
                    (k.name, Some(v.clone()), Source::Flag)
                } else if let Some(v) = file.get(k.name) {
                    (k.name, Some(v.clone()), Source::File)
                } else {
                    (k.name, k.default.map(String::from), Source::Default)
                }
            })
            .collect();
        Ok(Self { entries })
    }

    /// Rebuilds a configuration recorded in a manifest, keeping each value and its source.
    pub fn restore(
        keys: &'static [Key],
        values: &serde_json::Map<String, serde_json::Value>,
        sources: &serde_json::Map<String, serde_json::Value>,
    ) -> Result<Self, CliError> {
        if let Some(bad) = values.keys().find(|k| !keys.iter().any(|key| key.name == k.as_str())) {
            return Err(CliError::Usage(format!("manifest has unknown config key '{bad}'")));
        }
        let entries = keys
            .iter()
            .map(|k| {
                let value = values.get(k.name).and_then(|v| v.as_str()).map(String::from);
                let source = match sources.get(k.name).and_then(|s| s.as_str()) {
                    Some("flag") => Source::Flag,
                    Some("file") => Source::File,
                    _ => Source::Default,
                };
                (k.name, value, source)
            })
            .collect();
        Ok(Self { entries })
    }

    /// Flags given on the command line for the keys of a subcommand.
    pub fn flags_of(m: &ArgMatches, keys: &[Key]) -> BTreeMap<String, String> {
        keys.iter()
            .filter(|k| m.value_source(k.name) == Some(ValueSource::CommandLine))
            .filter_map(|k| m.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone())))
            .collect()
    }

    pub fn raw(&self, name: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.0 == name).and_then(|e| e.1.as_deref())
    }

    pub fn get<T: FromStr>(&self, name: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(name)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Usage(format!("invalid value '{v}' for {name}: {e}"))))
            .transpose()
    }

    pub fn require<T: FromStr>(&self, name: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(name)?.ok_or_else(|| CliError::Usage(format!("--{name} is required")))
    }

    pub fn values(&self) -> serde_json::Map<String, serde_json::Value> {
        self.entries
            .iter()
            .map(|(k, v, _)| (k.to_string(), v.clone().map_or(serde_json::Value::Null, serde_json::Value::String)))
            .collect()
    }

    pub fn sources(&self) -> serde_json::Map<String, serde_json::Value> {
        self.entries
            .iter()
            .filter(|e| e.1.is_some())
            .map(|(k, _, s)| (k.to_string(), s.label().into()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let m = parse_config("# comment\n\nsetting = sym\n chi=0.4 \n").unwrap();
        assert_eq!(m["setting"], "sym");
        assert_eq!(m["chi"], "0.4");
        assert!(parse_config("setting sym").is_err());
        assert!(parse_config("a = 1\na = 2").is_err());
    }

    #[test]
    fn precedence() {
        let flags = BTreeMap::from([("chi".to_string(), "0.1".to_string())]);
        let file = BTreeMap::from([("chi".to_string(), "0.4".to_string()), ("setting".to_string(), "sym".to_string())]);
        let r = Resolved::layer(SWEEP, &flags, &file).unwrap();
        assert_eq!(r.raw("chi"), Some("0.1"));
        assert_eq!(r.raw("setting"), Some("sym"));
        assert_eq!(r.raw("mode"), Some("ensemble"));
        assert_eq!(r.raw("cutoff"), None);
        let s = r.sources();
        assert_eq!(s["chi"], "flag");
        assert_eq!(s["setting"], "file");
        assert_eq!(s["mode"], "default");
        assert!(!s.contains_key("cutoff"));
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let file = BTreeMap::from([("colour".to_string(), "red".to_string())]);
        assert!(matches!(Resolved::layer(SWEEP, &BTreeMap::new(), &file), Err(CliError::Usage(_))));
    }

    #[test]
    fn command_tree_is_consistent() {
        command().debug_assert();
    }
}
