pub mod compare;
pub mod extract;
pub mod simulate;
pub mod synth_pool;

use std::path::{Path, PathBuf};

use crate::errors::{CliError, CliResult};
use convmix_core::timeline::Annotation;

/// Expands RTTM inputs: files are taken as-is, directories contribute their
/// `*.rttm` files in sorted order.
pub fn collect_rttm_paths(inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().map(|e| e == "rttm").unwrap_or(false))
                .collect();
            found.sort();
            paths.extend(found);
        } else if input.exists() {
            paths.push(input.clone());
        } else {
            return Err(CliError::Data(format!("no such file: {}", input.display())));
        }
    }
    if paths.is_empty() {
        return Err(CliError::Data("no RTTM files found".to_string()));
    }
    Ok(paths)
}

pub fn load_annotations(paths: &[PathBuf]) -> CliResult<Vec<Annotation>> {
    let mut annotations = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let mut parsed = convmix_core::parse_rttm(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        annotations.append(&mut parsed);
    }
    if annotations.is_empty() {
        return Err(CliError::Data("no annotations".to_string()));
    }
    Ok(annotations)
}

pub fn ensure_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}
