//! `--config` files and `--kgrid` syntax.

use std::ffi::OsString;
use std::path::PathBuf;

use crate::error::{KvarError, Result};

/// Parses a flat `key = value` file into `--key=value` arguments.
///
/// Blank lines and `#` comments are skipped; underscores in keys become
/// dashes. `true` turns a key into a bare switch and `false` drops it.
pub fn parse_config(text: &str) -> Result<Vec<OsString>> {
    let mut args = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            KvarError::param("config", format!("line {}: expected `key = value`, got {raw:?}", lineno + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() || key.starts_with('-') || key == "config" {
            return Err(KvarError::param("config", format!("line {}: invalid key {key:?}", lineno + 1)));
        }
        match value {
            "true" => args.push(format!("--{key}").into()),
            "false" => {}
            _ => args.push(format!("--{key}={value}").into()),
        }
    }
    Ok(args)
}

/// Removes `--config FILE` from `argv` and splices the file's arguments in
/// right after the subcommand names. Keys also given on the command line are
/// taken from the command line.
pub fn expand(argv: &[OsString]) -> Result<Vec<OsString>> {
    let mut path: Option<PathBuf> = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            let value = it
                .next()
                .ok_or_else(|| KvarError::param("config", "expects a file path"))?;
            path = Some(value.into());
        } else if let Some(v) = s.strip_prefix("--config=") {
            path = Some(v.into());
        } else {
            rest.push(arg.clone());
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| KvarError::io(&path, e))?;
    let given: Vec<String> = rest.iter().filter_map(|a| flag_name(&a.to_string_lossy())).collect();
    let injected: Vec<OsString> = parse_config(&text)?
        .into_iter()
        .filter(|a| flag_name(&a.to_string_lossy()).is_none_or(|k| !given.contains(&k)))
        .collect();
    let at = 1 + rest
        .iter()
        .skip(1)
        .take_while(|a| !a.to_string_lossy().starts_with('-'))
        .count();
    rest.splice(at..at, injected);
    Ok(rest)
}

fn flag_name(arg: &str) -> Option<String> {
    let body = arg.strip_prefix("--")?;
    Some(body.split('=').next().unwrap_or(body).to_string())
}

/// Parses a `k` grid: `a:b:xF` (geometric, factor `F ≥ 2`), `a:b:+s`
/// (arithmetic), `a:b` (step 1) or an explicit ascending list `a,b,c`.
pub fn parse_kgrid(s: &str) -> std::result::Result<Vec<usize>, String> {
    let num = |t: &str| -> std::result::Result<usize, String> {
        t.trim().parse::<usize>().map_err(|_| format!("{t:?} is not a positive integer"))
    };
    let grid: Vec<usize> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() > 3 {
            return Err(format!("{s:?}: expected a:b:xF or a:b:+s"));
        }
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        if a == 0 || b < a {
            return Err(format!("{s:?}: need 1 <= a <= b"));
        }
        let step = parts.get(2).map(|p| p.trim()).unwrap_or("+1");
        if let Some(f) = step.strip_prefix('x') {
            let f = num(f)?;
            if f < 2 {
                return Err(format!("{s:?}: geometric factor must be at least 2"));
            }
            std::iter::successors(Some(a), |&k| k.checked_mul(f))
                .take_while(|&k| k <= b)
                .collect()
        } else if let Some(d) = step.strip_prefix('+') {
            let d = num(d)?;
            if d == 0 {
                return Err(format!("{s:?}: step must be at least 1"));
            }
            (a..=b).step_by(d).collect()
        } else {
            return Err(format!("{s:?}: step must look like x2 or +4"));
        }
    } else {
        s.split(',').map(num).collect::<std::result::Result<_, _>>()?
    };
    if grid.is_empty() || grid[0] == 0 {
        return Err(format!("{s:?}: grid values must be at least 1"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("{s:?}: grid must be strictly ascending"));
    }
    Ok(grid)
}
