#![allow(dead_code)]

use std::path::{Path, PathBuf};

use sore::config::PipelineConfig;
use sore::pipeline::{Pipeline, RunSummary};

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn mini_config(output_dir: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::load(&data_dir().join("mini/mini.conf")).expect("mini config");
    c.output_dir = output_dir.to_path_buf();
    c
}

pub fn run_mini(output_dir: &Path) -> (Pipeline, RunSummary) {
    let p = Pipeline::new(mini_config(output_dir));
    let s = p.run().expect("mini-corpus run");
    (p, s)
}

/// Compares `actual` with the golden file, or rewrites the golden file
/// when `SORE_BLESS` is set.
pub fn check_golden(golden: &Path, actual: &str) -> Result<(), String> {
    if std::env::var_os("SORE_BLESS").is_some() {
        if let Some(dir) = golden.parent() {
            std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        }
        std::fs::write(golden, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(golden).map_err(|e| format!("{}: {e}", golden.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!(
            "{} differs:\n--- expected\n{expected}\n--- actual\n{actual}",
            golden.display()
        ))
    }
}
