pub mod analysis;
pub mod bins;
pub mod data;
pub mod grid;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use tarsim::Corpus;

use crate::error::{Classify, CliResult};

/// Loads a JSONL corpus (by `.jsonl` extension) or a corpus cache.
pub fn load_corpus(path: &Path) -> CliResult<Corpus> {
    let ctx = || format!("loading corpus {}", path.display());
    if path.extension().is_some_and(|e| e == "jsonl") {
        tarsim::corpus::ingest_jsonl(path).data_ctx(ctx())
    } else {
        Corpus::load_cache(path).data_ctx(ctx())
    }
}

/// Opens `path` for writing, or stdout when absent.
pub fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).data_ctx(format!("creating {}", dir.display()))?;
            }
            let f = File::create(p).data_ctx(format!("creating {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}
