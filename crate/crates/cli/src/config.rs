use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use idid_core::domain::{build_domain, DomainConfig, DomainModel};

/// Merges defaults, then the config file, then the flags given on the
/// command line. Flags that were not given serialize to nothing.
pub fn resolve<F: Serialize, R: DeserializeOwned + Serialize + Default>(
    flags: &F,
    config: Option<&Path>,
) -> Result<R> {
    let mut merged = match serde_json::to_value(R::default())? {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: Value = serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let Value::Object(file) = file else {
            return Err(config_error(format!("{} is not a JSON object", path.display())));
        };
        merged.extend(file);
    }
    if let Value::Object(given) = serde_json::to_value(flags)? {
        merged.extend(given.into_iter().filter(|(_, v)| !v.is_null()));
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| config_error(e.to_string()))
}

pub fn config_error(msg: String) -> anyhow::Error {
    idid_core::Error::Config(msg).into()
}

/// A canonical domain name, or a path to a domain configuration file.
pub fn load_domain(domain_arg: &str) -> Result<Arc<DomainModel>> {
    let domain = if domain_arg.ends_with(".json") {
        let text = std::fs::read_to_string(domain_arg).with_context(|| format!("reading {domain_arg}"))?;
        let cfg: DomainConfig =
            serde_json::from_str(&text).map_err(|e| idid_core::Error::InvalidParams(format!("{domain_arg}: {e}")))?;
        cfg.build()?
    } else {
        build_domain(domain_arg, None)?
    };
    Ok(Arc::new(domain))
}

/// Horizon and prior resolution used when none is given: the one-shot
/// grid is a single step with one prior belief.
pub fn domain_defaults(domain_arg: &str) -> (usize, usize) {
    if domain_arg == "grid1shot" || domain_arg == "one_shot_grid" {
        (1, 0)
    } else {
        (3, 4)
    }
}

pub fn out_dir(path: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(path.to_path_buf())
}
