//! The acceptance suite: eleven criteria with their thresholds pinned here.
//! Shared by the `acceptance` test target and the `accept` CLI command.

use std::sync::Arc;
use std::time::Instant;

use crate::arith::{
    enumerate_prime_powers, gcd, mult_order, pow_mod, primes_up_to, rho, sieve_multiplicative, FactorCache,
    PrimePower,
};
use crate::constants::{euler_product_pn, series_p_direct, series_p_grouped};
use crate::context::Context;
use crate::distribution::{kolmogorov_distance, write_ladder_csv, Ecdf, LadderLine};
use crate::ensembles::{members, write_json_lines, AverageReport, Ensemble};
use crate::error::Result;
use crate::singer::oracle::{oracle_count_max_order_elements, oracle_count_primitive_polys, specs_within};
use crate::singer::{primitive_poly_count, singer_count, GroupSpec};

pub const GROUP_CAP: u128 = 2_000_000;
pub const FIELD_CAP: u128 = 512;
pub const REQUIRED_GROUPS: [(u32, u128); 7] = [(2, 2), (2, 3), (2, 4), (2, 5), (2, 7), (3, 2), (3, 3)];
pub const POLY_MAX_RANK: u32 = 4;
pub const POLY_MAX_Q: u128 = 9;
pub const POLY_CAP: u128 = 1_000_000;
pub const RHO_MAX_M: u128 = 2000;
pub const RHO_MAX_N: u128 = 12;
pub const RHO_PRIME_BOUND: u64 = 10_000;
pub const RHO_PRIME_MAX_N: u128 = 24;
pub const ORDER_BASES: [u128; 4] = [2, 3, 5, 7];
pub const ORDER_MAX_M: u128 = 5000;
pub const TOTIENT_IDENTITY_MAX: u64 = 10_000;
pub const GCD_IDENTITY_MAX: u64 = 500;
pub const PRODUCT_T: u64 = 100_000;
pub const PRODUCT_MAX_N: u32 = 8;
pub const PRODUCT_REFERENCE_T: u64 = 1_000_000;
pub const SERIES_K: (u32, u32) = (20, 40);
pub const SERIES_DIRECT_M: u64 = 100_000;
pub const PRIME_POWER_CASES: [(u32, f64); 3] = [(1, 1e6), (2, 1e5), (3, 1e5)];
pub const PRIME_POWER_TOLERANCE: f64 = 0.01;
pub const EXTENSION_X: f64 = 60.0;
pub const RANK_X: f64 = 64.0;
pub const CROSS_TOLERANCES: (f64, f64, f64) = (0.1, 0.25, 0.3);
pub const STABILITY_PRIME_POWERS: (f64, f64, f64) = (5e5, 1e6, 0.02);
pub const STABILITY_RANKS: (f64, f64, f64) = (32.0, 64.0, 0.25);
/// Criteria whose pinned threshold is known to be missed at the pinned x.
pub const DOCUMENTED_MISSES: [u8; 1] = [10];
pub const DETERMINISM_WORKERS: [usize; 2] = [1, 4];

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    /// Failed only on a threshold recorded as a known miss; every other sub-check passed.
    pub documented_miss: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2}: {} ({:.1}s) {}{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.detail,
            if self.documented_miss { " [documented miss]" } else { "" }
        )
    }
}

pub const TITLES: [&str; 11] = [
    "Singer counts equal matrix enumeration",
    "primitive polynomial counts equal enumeration",
    "rho_n formula equals residue counting",
    "multiplicative order equals naive iteration",
    "totient and gcd identities",
    "certified Euler product",
    "certified order-grouped series",
    "prime-power average near the Euler product",
    "extension and rank averages near P(2,1)",
    "ECDF stability and axioms",
    "determinism across worker counts",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Pass,
    Fail,
    /// Only the pinned stability threshold failed.
    PinnedMiss,
}

impl Verdict {
    fn of(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Runs the selected criteria (all when `only` is empty) on a pool of `workers`.
pub fn run(workers: usize, cache: Option<Arc<FactorCache>>, only: &[u8]) -> Result<Vec<CriterionResult>> {
    let mut ctx = Context::new(workers)?;
    if let Some(c) = cache.clone() {
        ctx = ctx.with_cache(c);
    }
    let mut out = Vec::new();
    for id in 1..=11u8 {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let verdict: Result<(Verdict, String)> = match id {
            1 => singer_oracles(&ctx).map(|(ok, d)| (Verdict::of(ok), d)),
            2 => polynomial_oracles(&ctx).map(|(ok, d)| (Verdict::of(ok), d)),
            3 => rho_brute_force().map(|(ok, d)| (Verdict::of(ok), d)),
            4 => orders_naive().map(|(ok, d)| (Verdict::of(ok), d)),
            5 => identities().map(|(ok, d)| (Verdict::of(ok), d)),
            6 => certified_product(&ctx).map(|(ok, d)| (Verdict::of(ok), d)),
            7 => certified_series(&ctx).map(|(ok, d)| (Verdict::of(ok), d)),
            8 => prime_power_average(&ctx).map(|(ok, d, _)| (Verdict::of(ok), d)),
            9 => cross_consistency(&ctx).map(|(ok, d, _)| (Verdict::of(ok), d)),
            10 => stability(&ctx).map(|(ok, d, _)| (ok, d)),
            _ => determinism(cache.clone()).map(|(ok, d)| (Verdict::of(ok), d)),
        };
        let (verdict, detail) = verdict.unwrap_or_else(|e| (Verdict::of(false), format!("error: {e}")));
        let result = CriterionResult {
            id,
            title: TITLES[id as usize - 1],
            passed: verdict == Verdict::Pass,
            documented_miss: verdict == Verdict::PinnedMiss && DOCUMENTED_MISSES.contains(&id),
            detail,
            seconds: start.elapsed().as_secs_f64(),
        };
        log::info!("{}", result.line());
        out.push(result);
    }
    Ok(out)
}

fn oracle_ctx(ctx: &Context) -> Result<Context> {
    let mut limits = ctx.limits.clone();
    limits.group_cap = GROUP_CAP;
    limits.field_cap = FIELD_CAP;
    limits.poly_cap = POLY_CAP;
    let mut c = Context::new(ctx.workers())?.with_limits(limits);
    if let Some(cache) = ctx.cache() {
        c = c.with_cache(cache.clone());
    }
    Ok(c)
}

fn singer_oracles(ctx: &Context) -> Result<(bool, String)> {
    let ctx = oracle_ctx(ctx)?;
    let specs = specs_within(GROUP_CAP, FIELD_CAP);
    let mut mismatches = Vec::new();
    for spec in &specs {
        let formula = singer_count(&ctx, spec)?;
        let oracle = oracle_count_max_order_elements(&ctx, spec)?;
        if formula != oracle {
            mismatches.push(format!("{spec}: {formula} vs {oracle}"));
        }
    }
    let covered = REQUIRED_GROUPS.iter().all(|&(n, q)| specs.iter().any(|s| s.n() == n && s.q().q() == q));
    Ok((
        mismatches.is_empty() && covered,
        format!("{} groups, required set covered: {covered}, mismatches: {mismatches:?}", specs.len()),
    ))
}

fn polynomial_oracles(ctx: &Context) -> Result<(bool, String)> {
    let ctx = oracle_ctx(ctx)?;
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for q in enumerate_prime_powers(POLY_MAX_Q as f64)?.entries() {
        for n in 1..=POLY_MAX_RANK {
            if q.q().pow(n) > POLY_CAP {
                continue;
            }
            let spec = GroupSpec::new(n, *q)?;
            let formula = primitive_poly_count(&ctx, &spec)?;
            let oracle = oracle_count_primitive_polys(&ctx, &spec)?;
            checked += 1;
            if formula != oracle {
                mismatches.push(format!("{spec}: {formula} vs {oracle}"));
            }
        }
    }
    Ok((mismatches.is_empty(), format!("{checked} (n, q) pairs, mismatches: {mismatches:?}")))
}

fn rho_brute_force() -> Result<(bool, String)> {
    let mut bad = Vec::new();
    for m in 1..=RHO_MAX_M {
        let mut counts = [0u128; RHO_MAX_N as usize + 1];
        for a in 0..m {
            for n in 1..=RHO_MAX_N {
                if pow_mod(a, n, m) == 1 % m {
                    counts[n as usize] += 1;
                }
            }
        }
        for n in 1..=RHO_MAX_N {
            if rho(n, m)? != counts[n as usize] {
                bad.push((n, m));
            }
        }
    }
    let primes = primes_up_to(RHO_PRIME_BOUND);
    let mut bad_primes = Vec::new();
    for &p in &primes {
        for n in 1..=RHO_PRIME_MAX_N {
            if rho(n, p as u128)? != gcd(p as u128 - 1, n) {
                bad_primes.push((n, p));
            }
        }
    }
    Ok((
        bad.is_empty() && bad_primes.is_empty(),
        format!(
            "m <= {RHO_MAX_M}, n <= {RHO_MAX_N}: {} mismatches; {} primes, n <= {RHO_PRIME_MAX_N}: {} mismatches",
            bad.len(),
            primes.len(),
            bad_primes.len()
        ),
    ))
}

fn orders_naive() -> Result<(bool, String)> {
    let mut checked = 0;
    let mut bad = Vec::new();
    for &p in &ORDER_BASES {
        for m in 1..=ORDER_MAX_M {
            if gcd(p, m) != 1 {
                continue;
            }
            let mut x = p % m;
            let mut k = 1u128;
            while x != 1 % m {
                x = x * p % m;
                k += 1;
            }
            checked += 1;
            if mult_order(p, m)? != k {
                bad.push((p, m));
            }
        }
    }
    Ok((bad.is_empty(), format!("{checked} pairs, mismatches: {bad:?}")))
}

fn identities() -> Result<(bool, String)> {
    let t = sieve_multiplicative(TOTIENT_IDENTITY_MAX)?;
    // φ(k)/k = Σ_{m|k} μ(m)/m, multiplied through by k
    let mut totient_bad = 0;
    for k in 1..=TOTIENT_IDENTITY_MAX as usize {
        let mut s: i64 = 0;
        let mut m = 1;
        while m * m <= k {
            if k % m == 0 {
                s += t.mu(m) as i64 * (k / m) as i64;
                let other = k / m;
                if other != m {
                    s += t.mu(other) as i64 * m as i64;
                }
            }
            m += 1;
        }
        if s != t.phi(k) as i64 {
            totient_bad += 1;
        }
    }
    let mut gcd_bad = 0;
    let g = GCD_IDENTITY_MAX as usize;
    for a in 1..=g {
        for b in 1..=g {
            let s: u64 = (1..=a.min(b)).filter(|d| a % d == 0 && b % d == 0).map(|d| t.phi(d) as u64).sum();
            if s as u128 != gcd(a as u128, b as u128) {
                gcd_bad += 1;
            }
        }
    }
    Ok((
        totient_bad == 0 && gcd_bad == 0,
        format!("totient identity k <= {TOTIENT_IDENTITY_MAX}: {totient_bad} failures; gcd identity a, b <= {GCD_IDENTITY_MAX}: {gcd_bad} failures"),
    ))
}

/// Truncated product by plain trial-division primes and a log-sum.
fn reference_product(n: u32, bound: u64) -> f64 {
    let mut log_sum = 0.0f64;
    for m in 2..=bound {
        let is_prime = m == 2 || (m % 2 == 1 && (3..).step_by(2).take_while(|d| d * d <= m).all(|d| m % d != 0));
        if is_prime {
            let g = gcd(m as u128 - 1, n as u128) as f64;
            log_sum += (-(g / (m as f64 * (m - 1) as f64))).ln_1p();
        }
    }
    log_sum.exp() / n as f64
}

fn certified_product(ctx: &Context) -> Result<(bool, String)> {
    let mut ok = true;
    let mut worst: Vec<String> = Vec::new();
    for n in 1..=PRODUCT_MAX_N {
        let a = euler_product_pn(ctx, n, PRODUCT_T)?;
        let b = euler_product_pn(ctx, n, 2 * PRODUCT_T)?;
        if !a.intersects(&b) {
            ok = false;
            worst.push(format!("n={n} disjoint"));
        }
    }
    let v = euler_product_pn(ctx, 1, PRODUCT_REFERENCE_T)?;
    let reference = reference_product(1, PRODUCT_REFERENCE_T);
    let gap = (v.estimate - reference).abs();
    ok &= gap <= v.error_bound;
    Ok((
        ok,
        format!(
            "n <= {PRODUCT_MAX_N} intervals at T = {PRODUCT_T}, {} intersect {:?}; p_1 at T = {PRODUCT_REFERENCE_T}: {} ± {:e}, reference {reference}, gap {gap:e}",
            2 * PRODUCT_T,
            worst,
            v.estimate,
            v.error_bound
        ),
    ))
}

fn certified_series(ctx: &Context) -> Result<(bool, String)> {
    let a = series_p_grouped(ctx, 2, 1, SERIES_K.0)?.certified;
    let b = series_p_grouped(ctx, 2, 1, SERIES_K.1)?.certified;
    let direct = series_p_direct(ctx, 2, 1, SERIES_DIRECT_M)?;
    let ok = a.intersects(&b) && b.contains(direct);
    Ok((
        ok,
        format!(
            "K={}: {} ± {:.4}; K={}: {} ± {:.4}; direct M={SERIES_DIRECT_M}: {direct}{}",
            SERIES_K.0,
            a.estimate,
            a.error_bound,
            SERIES_K.1,
            b.estimate,
            b.error_bound,
            if b.contains_zero() { " (interval contains 0)" } else { "" }
        ),
    ))
}

fn report_bytes(reports: &[AverageReport]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_json_lines(&mut buf, reports)?;
    Ok(buf)
}

fn prime_power_average(ctx: &Context) -> Result<(bool, String, Vec<u8>)> {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut reports = Vec::new();
    for &(n, x) in &PRIME_POWER_CASES {
        let mut c = Context::new(ctx.workers())?;
        c.limits = ctx.limits.clone();
        c.limits.prime_bound = PRODUCT_REFERENCE_T;
        if let Some(cache) = ctx.cache() {
            c = c.with_cache(cache.clone());
        }
        let r = crate::ensembles::average_over_prime_powers(&c, n, x)?;
        ok &= r.discrepancy < PRIME_POWER_TOLERANCE;
        parts.push(format!("n={n} x={x}: mean {:.6} vs {:.6} (|diff| {:.2e})", r.empirical_mean, r.theoretical.estimate, r.discrepancy));
        reports.push(r);
    }
    Ok((ok, parts.join("; "), report_bytes(&reports)?))
}

fn cross_consistency(ctx: &Context) -> Result<(bool, String, Vec<u8>)> {
    let a = crate::ensembles::average_over_extensions(ctx, 2, 1, EXTENSION_X)?;
    let b = crate::ensembles::average_over_ranks(ctx, 2, RANK_X)?;
    let s = series_p_grouped(ctx, 2, 1, SERIES_K.1)?.certified.estimate;
    let (ta, tb, tab) = CROSS_TOLERANCES;
    let da = (a.empirical_mean - s).abs();
    let db = (b.empirical_mean - s).abs();
    let dab = (a.empirical_mean - b.empirical_mean).abs();
    let ok = da < ta && db < tb && dab < tab;
    Ok((
        ok,
        format!(
            "A = {:.6}, B = {:.6}, P(2,1) ~ {s:.6}: |A-P| = {da:.4} (threshold {ta}), |B-P| = {db:.4} (threshold {tb}), |A-B| = {dab:.4} (threshold {tab})",
            a.empirical_mean, b.empirical_mean
        ),
        report_bytes(&[a, b])?,
    ))
}

fn stability(ctx: &Context) -> Result<(Verdict, String, Vec<u8>)> {
    let mut ok = true;
    let mut pinned_ok = true;
    let mut parts = Vec::new();
    let mut lines = Vec::new();
    let pp = Ensemble::prime_powers(1)?;
    let rk = Ensemble::Ranks { q: PrimePower::from_q(2)? };
    for (i, (ensemble, (x1, x2, tol))) in [(pp, STABILITY_PRIME_POWERS), (rk, STABILITY_RANKS)].into_iter().enumerate() {
        let m = members(ctx, ensemble, x2)?;
        let e1 = Ecdf::from_members(&m, x1)?;
        let e2 = Ecdf::from_members(&m, x2)?;
        for e in [&e1, &e2] {
            if let Err(why) = e.check_axioms() {
                ok = false;
                parts.push(format!("axioms fail at x = {}: {why}", e.meta.x));
            }
        }
        let d = kolmogorov_distance(&e1, &e2)?;
        if i == 0 {
            pinned_ok &= d.value < tol;
        } else {
            ok &= d.value < tol;
        }
        parts.push(format!("{} {}: D({x1}, {x2}) = {:.5} (threshold {tol})", ensemble.mode(), ensemble.params(), d.value));
        lines.push(LadderLine {
            mode: ensemble.mode(),
            params: ensemble.params().to_string(),
            x1,
            x2,
            kolmogorov_distance: d.value,
        });
    }
    let mut buf = Vec::new();
    write_ladder_csv(&mut buf, &lines)?;
    let verdict = match (ok, pinned_ok) {
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::PinnedMiss,
        _ => Verdict::Fail,
    };
    Ok((verdict, parts.join("; "), buf))
}

fn determinism(cache: Option<Arc<FactorCache>>) -> Result<(bool, String)> {
    let mut outputs: Vec<Vec<u8>> = Vec::new();
    for workers in DETERMINISM_WORKERS {
        let mut ctx = Context::new(workers)?;
        if let Some(c) = cache.clone() {
            ctx = ctx.with_cache(c);
        }
        let mut bytes = prime_power_average(&ctx)?.2;
        bytes.extend(cross_consistency(&ctx)?.2);
        bytes.extend(stability(&ctx)?.2);
        outputs.push(bytes);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    Ok((
        same,
        format!("criteria 8-10 output, {} bytes, identical for workers {:?}: {same}", outputs[0].len(), DETERMINISM_WORKERS),
    ))
}
