//! On-disk cache of trace tables as JSON, keyed by the computation parameters.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cmnum::PrecisionContext;
use crate::error::{Error, Result};
use crate::series::parse_rational;
use crate::traces::{trace_table, Provenance, TraceEntry, TraceTable};

/// Version tag and evaluation policy baked into every cache key.
const KEY_PREFIX: &str = "modtrace-trace-v1";
const POLICY: &str = "fricke-orbit-point";

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CacheKey {
    pub level: u32,
    pub m: u32,
    pub d_max: i64,
    pub bits: u32,
    pub guard_bits: u32,
}

impl CacheKey {
    pub fn new(level: u32, m: u32, d_max: i64, ctx: &PrecisionContext) -> Self {
        CacheKey {
            level,
            m,
            d_max,
            bits: ctx.bits,
            guard_bits: ctx.guard_bits,
        }
    }

    pub fn digest(&self) -> String {
        let text = format!(
            "{KEY_PREFIX}|{}|{}|{}|{}|{}|{POLICY}",
            self.level, self.m, self.d_max, self.bits, self.guard_bits
        );
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn file_name(&self) -> String {
        format!("trace-N{}-m{}-d{}-{}.json", self.level, self.m, self.d_max, &self.digest()[..16])
    }
}

#[derive(Serialize, Deserialize)]
struct StoredEntry {
    d: i64,
    unstarred: String,
    starred: String,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct StoredTable {
    key: CacheKey,
    digest: String,
    entries: Vec<StoredEntry>,
}

impl StoredTable {
    fn from_table(key: &CacheKey, table: &TraceTable) -> Self {
        StoredTable {
            key: key.clone(),
            digest: key.digest(),
            entries: table
                .entries
                .iter()
                .map(|(&d, e)| StoredEntry {
                    d,
                    unstarred: e.unstarred.to_string(),
                    starred: e.starred.to_string(),
                    provenance: e.provenance,
                })
                .collect(),
        }
    }

    fn into_table(self) -> Result<TraceTable> {
        let mut entries = BTreeMap::new();
        for e in self.entries {
            let parse = |s: &str| -> Result<BigRational> { parse_rational(s) };
            entries.insert(
                e.d,
                TraceEntry {
                    unstarred: parse(&e.unstarred)?,
                    starred: parse(&e.starred)?,
                    provenance: e.provenance,
                },
            );
        }
        Ok(TraceTable {
            level: self.key.level,
            m: self.key.m,
            d_max: self.key.d_max,
            entries,
        })
    }
}

#[derive(Clone, Debug)]
pub struct TraceCache {
    dir: PathBuf,
}

impl TraceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TraceCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    /// The stored table, or `None` if absent. A file whose recorded key does
    /// not match is treated as absent.
    pub fn load(&self, key: &CacheKey) -> Result<Option<TraceTable>> {
        let path = self.path(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let stored: StoredTable = serde_json::from_str(&text)?;
        if &stored.key != key || stored.digest != key.digest() {
            return Ok(None);
        }
        stored.into_table().map(Some)
    }

    /// Writes through a temporary file and a rename so readers never see a partial table.
    pub fn store(&self, key: &CacheKey, table: &TraceTable) -> Result<PathBuf> {
        if table.level != key.level || table.m != key.m || table.d_max != key.d_max {
            return Err(Error::InvalidArgument("trace table does not match cache key".into()));
        }
        fs::create_dir_all(&self.dir)?;
        let path = self.path(key);
        let tmp = path.with_extension(format!("json.tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_string_pretty(&StoredTable::from_table(key, table))?)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Cached table if present, otherwise computed and stored. The flag reports a hit.
    pub fn get_or_compute(
        &self,
        level: u32,
        m: u32,
        d_max: i64,
        ctx: &PrecisionContext,
    ) -> Result<(TraceTable, bool)> {
        let key = CacheKey::new(level, m, d_max, ctx);
        if let Some(t) = self.load(&key)? {
            return Ok((t, true));
        }
        let table = trace_table(level, m, d_max, ctx)?;
        self.store(&key, &table)?;
        Ok((table, false))
    }
}
