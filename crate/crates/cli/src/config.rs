//! Plain-text `key = value` configuration files.
//!
//! Keys are long flag names (`samples = 1000000`, `rule = borda`); the
//! optional `command` key names the subcommand. Values from the file are
//! spliced in front of the command-line flags, so flags given explicitly win.

use std::fs;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Default, PartialEq, Eq)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub entries: Vec<(String, String)>,
}

pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
    let mut cfg = ConfigFile::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", n + 1)))?;
        let key = key.trim().trim_start_matches('-').replace('_', "-");
        let value = value.trim().trim_matches('"').to_string();
        if key == "command" {
            cfg.command = Some(value);
        } else {
            cfg.entries.push((key, value));
        }
    }
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

const SUBCOMMANDS: [&str; 7] = ["check", "witness", "estimate", "emit-system", "compare", "finite", "tables"];

/// Removes `--config <path>` from `args` and merges the file's settings.
pub fn apply(mut args: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--config" {
            if i + 1 >= args.len() {
                return Err(CliError::Usage("--config needs a file".into()));
            }
            path = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = args[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let cfg = load(Path::new(&path))?;
    let position = args.iter().position(|a| SUBCOMMANDS.contains(&a.as_str()));
    let insert_at = match (position, &cfg.command) {
        (Some(p), _) => p + 1,
        (None, Some(cmd)) => {
            let at = args.len().min(1);
            args.insert(at, cmd.clone());
            at + 1
        }
        (None, None) => return Err(CliError::Usage("no subcommand given on the command line or in the config".into())),
    };
    let mut spliced = Vec::new();
    for (key, value) in cfg.entries {
        match value.as_str() {
            "true" => spliced.push(format!("--{key}")),
            "false" => {}
            _ => {
                spliced.push(format!("--{key}"));
                spliced.push(value);
            }
        }
    }
    args.splice(insert_at..insert_at, spliced);
    Ok(args)
}
