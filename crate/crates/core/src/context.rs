//! Execution context shared by every operation above `arith`: the
//! factorization source, the worker pool, and the configurable caps.

use std::sync::Arc;

use crate::arith::{self, Factorer, FactorCache, Factorization};
use crate::error::{Error, Result};

/// Size caps and defaults. All of them are configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Limits {
    /// Largest table any sieve may allocate.
    pub sieve_cap: u64,
    /// Largest field the oracles will construct.
    pub field_cap: u128,
    /// Largest |GL_n(q)| the matrix oracle will enumerate.
    pub group_cap: u128,
    /// Largest number of monic polynomials the polynomial oracle will enumerate.
    pub poly_cap: u128,
    /// Largest M accepted by the direct series summation.
    pub direct_cap: u64,
    /// Terms accumulated exactly before ensemble sums switch to floating point.
    pub exact_terms: usize,
    /// Prime bound used for the Euler product attached to ensemble reports.
    pub prime_bound: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            sieve_cap: arith::DEFAULT_SIEVE_CAP,
            field_cap: 512,
            group_cap: 2_000_000,
            poly_cap: 1_000_000,
            direct_cap: 1_000_000,
            exact_terms: 10_000,
            prime_bound: 1_000_000,
        }
    }
}

pub struct Context {
    cache: Option<Arc<FactorCache>>,
    workers: usize,
    pool: rayon::ThreadPool,
    pub limits: Limits,
}

impl std::fmt::Debug for Context {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Context")
            .field("cache", &self.cache.as_ref().map(|c| c.len()))
            .field("workers", &self.workers)
            .field("limits", &self.limits)
            .finish()
    }
}

impl Default for Context {
    fn default() -> Self {
        Context::new(1).expect("single-thread pool")
    }
}

impl Context {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
        Ok(Context { cache: None, workers, pool, limits: Limits::default() })
    }

    pub fn with_cache(mut self, cache: Arc<FactorCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn cache(&self) -> Option<&Arc<FactorCache>> {
        self.cache.as_ref()
    }

    /// Runs `f` inside this context's worker pool.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    pub fn factorer(&self) -> &dyn Factorer {
        match &self.cache {
            Some(c) => c.as_ref(),
            None => &arith::Direct,
        }
    }

    pub fn factor(&self, n: u128) -> Result<Factorization> {
        self.factorer().factor(n)
    }

    pub fn factor_qn_minus_1(&self, q: u128, n: u32) -> Result<Factorization> {
        arith::factor_qn_minus_1_with(self.factorer(), q, n)
    }
}
