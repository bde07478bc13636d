use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use super::{
    load_table, save_table, sieve, ArithError, ArithFn, ArithSource, SegmentedSieve, SieveTable,
};

const CACHE_EXT: &str = "crsieve";

/// Default size above which [`TableStore::source`] streams instead of
/// materialising a flat table (2^26 entries, 512 MiB).
pub const DEFAULT_STREAM_ABOVE: u64 = 1 << 26;

/// Shared, lazily built sieve tables with an optional on-disk cache.
///
/// A request for `(func, n)` is served by any table of `func` already held
/// that covers `n`; otherwise the cache directory is searched for the
/// smallest file covering `n`, and only then a new table is sieved (and
/// written back when a cache directory is set).
#[derive(Debug)]
pub struct TableStore {
    cache_dir: Option<PathBuf>,
    stream_above: u64,
    tables: Mutex<HashMap<ArithFn, Arc<SieveTable>>>,
}

impl Default for TableStore {
    fn default() -> Self {
        Self::new()
    }
}

impl TableStore {
    pub fn new() -> Self {
        Self {
            cache_dir: None,
            stream_above: DEFAULT_STREAM_ABOVE,
            tables: Mutex::default(),
        }
    }

    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn stream_above(mut self, n: u64) -> Self {
        self.stream_above = n;
        self
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        self.cache_dir.as_deref()
    }

    pub fn cache_path(dir: &Path, func: ArithFn, n_max: u64) -> PathBuf {
        dir.join(format!("{}-{}.{}", func.name(), n_max, CACHE_EXT))
    }

    /// A flat table of `func` covering at least `1..=n`.
    pub fn table(&self, func: ArithFn, n: u64) -> Result<Arc<SieveTable>, ArithError> {
        let mut tables = self.tables.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = tables.get(&func) {
            if t.n_max() >= n {
                return Ok(Arc::clone(t));
            }
        }
        let table = match self.find_cached(func, n)? {
            Some(t) => t,
            None => {
                let t = sieve(func, n)?;
                if let Some(dir) = &self.cache_dir {
                    fs::create_dir_all(dir)?;
                    let path = Self::cache_path(dir, func, n);
                    save_table(&t, BufWriter::new(File::create(path)?))?;
                }
                t
            }
        };
        let table = Arc::new(table);
        tables.insert(func, Arc::clone(&table));
        Ok(table)
    }

    /// Values of `func` on `1..=n`, either a flat table or a stream.
    pub fn source(&self, func: ArithFn, n: u64) -> Result<Arc<dyn ArithSource>, ArithError> {
        if n > self.stream_above {
            let held = self
                .tables
                .lock()
                .unwrap_or_else(|e| e.into_inner())
                .get(&func)
                .cloned();
            if let Some(t) = held.filter(|t| t.n_max() >= n) {
                return Ok(t);
            }
            if let Some(t) = self.find_cached(func, n)? {
                return Ok(Arc::new(t));
            }
            return Ok(Arc::new(SegmentedSieve::new(func, n)?));
        }
        Ok(self.table(func, n)?)
    }

    fn find_cached(&self, func: ArithFn, n: u64) -> Result<Option<SieveTable>, ArithError> {
        let Some(dir) = &self.cache_dir else {
            return Ok(None);
        };
        let entries = match fs::read_dir(dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let prefix = format!("{}-", func.name());
        let best = entries
            .filter_map(Result::ok)
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                let size = name
                    .strip_prefix(&prefix)?
                    .strip_suffix(&format!(".{CACHE_EXT}"))?;
                let size: u64 = size.parse().ok()?;
                (size >= n).then_some((size, e.path()))
            })
            .min();
        match best {
            Some((_, path)) => {
                let table = load_table(BufReader::new(File::open(&path)?))?;
                if table.func() != func {
                    return Err(ArithError::WrongFunction {
                        expected: func,
                        found: table.func(),
                    });
                }
                Ok(Some(table))
            }
            None => Ok(None),
        }
    }
}
