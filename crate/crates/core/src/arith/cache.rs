//! Shared factorization cache.
//!
//! On disk the cache is plain text, one entry per line, ascending in N:
//!
//! ```text
//! N p1 e1 p2 e2 ...
//! ```
//!
//! Every line is re-validated on load (primes, ordering, product). Lines that
//! fail are rejected with a warning and listed in the [`LoadReport`].

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use super::factor::{factor, Factorer, Factorization};
use crate::error::{Error, Result};

/// Environment variable naming the cache file when no flag is given.
pub const CACHE_ENV_VAR: &str = "SINGER_FACTOR_CACHE";

#[derive(Debug, Default)]
pub struct FactorCache {
    entries: RwLock<BTreeMap<u128, Factorization>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub accepted: usize,
    pub rejected: Vec<(usize, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheStats {
    pub entries: usize,
    pub hits: u64,
    pub misses: u64,
}

impl FactorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            entries: self.len(),
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
        }
    }

    pub fn get(&self, n: u128) -> Option<Factorization> {
        self.entries.read().expect("cache lock poisoned").get(&n).cloned()
    }

    /// Inserts unless an entry already exists; returns the stored factorization.
    pub fn insert(&self, f: Factorization) -> Factorization {
        let mut map = self.entries.write().expect("cache lock poisoned");
        map.entry(f.value()).or_insert(f).clone()
    }

    pub fn parse_line(line: &str) -> Result<Factorization> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            return Err(Error::Cache("empty line".into()));
        }
        let n: u128 = fields[0]
            .parse()
            .map_err(|_| Error::Cache(format!("bad value field {:?}", fields[0])))?;
        if fields.len().is_multiple_of(2) {
            return Err(Error::Cache("odd number of prime/exponent fields".into()));
        }
        let mut parts = Vec::with_capacity(fields.len() / 2);
        let mut last = 0u128;
        for pair in fields[1..].chunks(2) {
            let p: u128 = pair[0].parse().map_err(|_| Error::Cache(format!("bad prime {:?}", pair[0])))?;
            let e: u32 = pair[1].parse().map_err(|_| Error::Cache(format!("bad exponent {:?}", pair[1])))?;
            if p <= last {
                return Err(Error::Cache("primes not strictly ascending".into()));
            }
            last = p;
            parts.push((p, e));
        }
        Factorization::from_parts(n, parts).map_err(|e| Error::Cache(e.to_string()))
    }

    pub fn format_line(f: &Factorization) -> String {
        let mut s = f.value().to_string();
        for &(p, e) in f.factors() {
            s.push_str(&format!(" {p} {e}"));
        }
        s
    }

    /// Loads a cache file. A missing file yields an empty cache.
    pub fn load(path: &Path) -> Result<(Self, LoadReport)> {
        let cache = FactorCache::new();
        let mut report = LoadReport::default();
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((cache, report)),
            Err(e) => return Err(Error::Cache(format!("{}: {e}", path.display()))),
        };
        let mut previous: Option<u128> = None;
        {
            let mut map = cache.entries.write().expect("cache lock poisoned");
            for (idx, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let line_no = idx + 1;
                match Self::parse_line(line) {
                    Ok(f) if previous.is_some_and(|p| f.value() <= p) => {
                        let msg = format!("value {} not ascending", f.value());
                        log::warn!("factor cache {}:{line_no}: rejected, {msg}", path.display());
                        report.rejected.push((line_no, msg));
                    }
                    Ok(f) => {
                        previous = Some(f.value());
                        map.insert(f.value(), f);
                        report.accepted += 1;
                    }
                    Err(e) => {
                        log::warn!("factor cache {}:{line_no}: rejected, {e}", path.display());
                        report.rejected.push((line_no, e.to_string()));
                    }
                }
            }
        }
        Ok((cache, report))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let map = self.entries.read().expect("cache lock poisoned");
        let io_err = |e: std::io::Error| Error::Cache(format!("{}: {e}", path.display()));
        let file = fs::File::create(path).map_err(io_err)?;
        let mut w = BufWriter::new(file);
        for f in map.values() {
            writeln!(w, "{}", Self::format_line(f)).map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }
}

impl Factorer for FactorCache {
    fn factor(&self, n: u128) -> Result<Factorization> {
        if let Some(f) = self.get(n) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(f);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let f = factor(n)?;
        Ok(self.insert(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format_round_trip() {
        let f = factor(720).unwrap();
        let line = FactorCache::format_line(&f);
        assert_eq!(line, "720 2 4 3 2 5 1");
        assert_eq!(FactorCache::parse_line(&line).unwrap(), f);
        assert_eq!(FactorCache::format_line(&Factorization::one()), "1");
    }

    #[test]
    fn corrupt_lines_rejected() {
        for bad in ["12 2 2 3", "12 4 1 3 1", "12 3 1 2 2", "13 2 2 3 1", "x 2 1", "15 3 1 5 0"] {
            assert!(FactorCache::parse_line(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn load_save_and_stats() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.txt");
        fs::write(&path, "6 2 1 3 1\n8 2 3\n7 7 1\n10 2 1 3 1\n12 2 2 3 1\n").unwrap();
        let (cache, report) = FactorCache::load(&path).unwrap();
        assert_eq!(report.accepted, 3);
        assert_eq!(report.rejected.iter().map(|r| r.0).collect::<Vec<_>>(), vec![3, 4]);
        assert_eq!(cache.factor(8).unwrap().factors(), &[(2, 3)]);
        assert_eq!(cache.factor(9).unwrap().factors(), &[(3, 2)]);
        let stats = cache.stats();
        assert_eq!((stats.entries, stats.hits, stats.misses), (4, 1, 1));
        cache.save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "6 2 1 3 1\n8 2 3\n9 3 2\n12 2 2 3 1\n");
        let (missing, r) = FactorCache::load(&dir.path().join("absent")).unwrap();
        assert!(missing.is_empty() && r.accepted == 0);
    }
}
