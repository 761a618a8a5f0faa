use opspec::io::ExperimentConfig;
use opspec::{Error, Result};
use toml::{Table, Value};

/// Parse the right-hand side of `key=value` as a TOML value, falling back
/// to a bare string.
fn parse_value(raw: &str) -> Value {
    let raw = raw.trim();
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.into())),
        Err(_) => Value::String(raw.into()),
    }
}

fn set_path(root: &mut Table, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed override key `{key}`")));
    }
    let (last, path) = parts.split_last().expect("non-empty");
    let mut node = root;
    for p in path {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{p}` is not a table")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// Apply `key.path=value` overrides and revalidate.
pub fn apply(cfg: &ExperimentConfig, sets: &[String]) -> Result<ExperimentConfig> {
    let mut root: Table = cfg
        .to_toml()?
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    for s in sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{s}` is not KEY=VALUE")))?;
        set_path(&mut root, k, parse_value(v))?;
    }
    let text = toml::to_string(&root).map_err(|e| Error::Config(e.to_string()))?;
    ExperimentConfig::from_toml_str(&text)
}
