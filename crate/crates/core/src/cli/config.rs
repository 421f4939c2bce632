use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgAction, CommandFactory};
use serde_json::Value;

use super::{Cli, CliError, Command, EmsCmd, EngineCmd, RegsCmd, EXIT_DATA};

/// Settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GlobalConfig {
    pub verbosity: u8,
    pub seed: u64,
    pub regs: Option<PathBuf>,
    pub calibration: Option<PathBuf>,
    pub log: Option<PathBuf>,
}

impl GlobalConfig {
    pub fn from_cli(cli: &Cli) -> Self {
        let mut g = GlobalConfig {
            verbosity: cli.verbose,
            seed: cli.seed,
            ..Default::default()
        };
        match &cli.command {
            Command::Regs(RegsCmd::Check(a)) => g.regs = Some(a.file.clone()),
            Command::Ems(EmsCmd::Tension(a)) => g.calibration = a.cal.clone(),
            Command::Engine(EngineCmd::Run(a)) => {
                g.regs = Some(a.regs.clone());
                g.log = Some(a.log.clone());
            }
            _ => {}
        }
        g
    }
}

/// Value of `--config` if present on the command line.
pub(crate) fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

fn has_flag(args: &[OsString], long: &str) -> bool {
    let eq = format!("--{long}=");
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == format!("--{long}") || s.starts_with(&eq)
    })
}

fn scalar(v: &Value, key: &str) -> Result<String, CliError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(if *b { "on" } else { "off" }.into()),
        other => Err(CliError::new(EXIT_DATA, format!("config key {key:?}: unsupported value {other}"))),
    }
}

/// Returns `args` with flags appended for every config key that the
/// selected subcommand accepts and the command line does not already set.
///
/// Top-level keys name long flags (`-` or `_` separated). A key naming a
/// subcommand holds an object of keys for that subcommand, so one file can
/// configure several commands.
pub fn apply_config(args: &[OsString], path: &Path) -> Result<Vec<OsString>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::from_io(path, e))?;
    let root: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::new(EXIT_DATA, format!("{}: {e}", path.display())))?;
    let Value::Object(root) = root else {
        return Err(CliError::new(EXIT_DATA, format!("{}: expected a JSON object", path.display())));
    };

    let mut cmd = Cli::command();
    cmd.build();
    let mut chain = vec![cmd.clone()];
    let mut cur = cmd;
    for a in args.iter().skip(1) {
        let s = a.to_string_lossy();
        if let Some(sub) = cur.find_subcommand(s.as_ref()).cloned() {
            chain.push(sub.clone());
            cur = sub;
        }
    }
    let leaf = chain.last().expect("chain starts at the root").clone();

    // Flat keys at the root, then any nested sections along the chain.
    let mut keys: Vec<(String, Value)> = Vec::new();
    let mut scope = &root;
    let mut level = 0;
    loop {
        for (k, v) in scope {
            let is_section = chain
                .get(level)
                .is_some_and(|c| c.get_subcommands().any(|s| s.get_name() == k));
            if !is_section && k != "config" {
                keys.push((k.clone(), v.clone()));
            }
        }
        level += 1;
        let Some(next) = chain.get(level) else { break };
        match scope.get(next.get_name()) {
            Some(Value::Object(o)) => scope = o,
            _ => break,
        }
    }

    let mut out = args.to_vec();
    for (key, value) in keys {
        let long = key.replace('_', "-");
        let Some(arg) = leaf.get_arguments().find(|a| a.get_long() == Some(long.as_str())) else {
            return Err(CliError::new(
                EXIT_DATA,
                format!("config key {key:?} is not a flag of `{}`", leaf.get_name()),
            ));
        };
        if has_flag(args, &long) || (long == "verbose" && args.iter().any(|a| a.to_string_lossy().starts_with("-v"))) {
            continue;
        }
        match arg.get_action() {
            ArgAction::Count => {
                let n = value
                    .as_u64()
                    .ok_or_else(|| CliError::new(EXIT_DATA, format!("config key {key:?}: expected a count")))?;
                out.extend((0..n).map(|_| OsString::from(format!("--{long}"))));
            }
            ArgAction::SetTrue => {
                if value.as_bool() == Some(true) {
                    out.push(format!("--{long}").into());
                }
            }
            _ => {
                let values = match &value {
                    Value::Array(items) => items.iter().map(|v| scalar(v, &key)).collect::<Result<Vec<_>, _>>()?,
                    v => vec![scalar(v, &key)?],
                };
                for v in values {
                    out.push(format!("--{long}").into());
                    out.push(v.into());
                }
            }
        }
    }
    Ok(out)
}
