//! Exact integer arithmetic: sieves, primality, factorization, orders and ρ_n.

pub mod cache;
pub mod factor;
pub mod modular;
pub mod order;
pub mod prime;
pub mod sieve;

pub use cache::{CacheStats, FactorCache, LoadReport, CACHE_ENV_VAR};
pub use factor::{
    cyclotomic_values, factor, factor_qn_minus_1, factor_qn_minus_1_with, qn_minus_1, Direct, Factorer,
    Factorization,
};
pub use modular::{gcd, pow_mod};
pub use order::{carmichael_lambda, euler_phi, mult_order, mult_order_factored, rho, rho_factored};
pub use prime::is_prime;
pub use sieve::{
    enumerate_prime_powers, enumerate_prime_powers_capped, primes_up_to, sieve_multiplicative,
    sieve_multiplicative_capped, MultiplicativeTables, PrimePower, PrimePowerEnumeration, SmallestFactorTable,
    DEFAULT_SIEVE_CAP,
};
