//! Materialize a config's synthetic dataset as one LIBSVM file per worker
//! shard, plus a provenance note. Re-parsing the files reproduces the shard
//! samples exactly.

use crate::config::{DataSpec, ExperimentConfig};
use crate::runner::{load_dataset, RunError};
use chb_core::data::write_libsvm;
use std::fs;
use std::path::PathBuf;

pub fn generate(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, RunError> {
    if matches!(cfg.data, DataSpec::Libsvm(_)) {
        return Err(RunError::Config(
            "gen-data materializes synthetic datasets; this config already reads a file".into(),
        ));
    }
    let fed = load_dataset(cfg)?;
    fs::create_dir_all(&cfg.out)
        .map_err(|e| RunError::Data(format!("{}: {e}", cfg.out.display())))?;
    let mut paths = Vec::new();
    for (w, shard) in fed.shards.iter().enumerate() {
        let path = cfg.out.join(format!("shard_{w:03}.libsvm"));
        let file = fs::File::create(&path)
            .map_err(|e| RunError::Data(format!("{}: {e}", path.display())))?;
        write_libsvm(shard, std::io::BufWriter::new(file))
            .map_err(|e| RunError::Data(format!("{}: {e}", path.display())))?;
        paths.push(path);
    }
    let note = cfg.out.join("dataset.txt");
    fs::write(&note, format!("{}\n", fed.provenance.describe()))
        .map_err(|e| RunError::Data(format!("{}: {e}", note.display())))?;
    paths.push(note);
    Ok(paths)
}
