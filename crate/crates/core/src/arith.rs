//! Exact multivariate number theory: divisor structure of lattice vectors,
//! the Möbius function, divisor-power sums, and canonical hyperplane indices.
//!
//! Divisibility convention: for `m, n ∈ ℤᵈ \ {0}` and a positive integer `l`,
//! we say `l | m` and `n | m` when `m = l·n`. The integer divisors of `m` are
//! exactly the divisors of `gcd(m)`, the gcd of the components of `m`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer frequency vector in `ℤᵈ`. Most operations require a member of
/// `ℤᵈ \ {0}` and return `InvalidInput` on the zero vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(Vec<i64>);

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticeVector(coords)
    }

    /// A vector required to lie in `ℤᵈ \ {0}`.
    pub fn nonzero(coords: Vec<i64>) -> Result<Self> {
        let v = LatticeVector(coords);
        if v.is_zero() {
            return Err(Error::invalid("frequency vector must be nonzero"));
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm_inf(&self) -> i64 {
        self.0.iter().map(|&c| c.abs()).max().unwrap_or(0)
    }

    /// Inner product with a real point.
    pub fn dot(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(self.0.len(), x.len());
        self.0.iter().zip(x).map(|(&c, &xi)| c as f64 * xi).sum()
    }

    pub fn scale(&self, l: i64) -> Self {
        LatticeVector(self.0.iter().map(|&c| c * l).collect())
    }

    pub fn neg(&self) -> Self {
        LatticeVector(self.0.iter().map(|&c| -c).collect())
    }

    /// Componentwise exact division by a positive integer, when possible.
    pub fn divide_exact(&self, l: i64) -> Option<Self> {
        debug_assert!(l > 0);
        if self.0.iter().all(|&c| c % l == 0) {
            Some(LatticeVector(self.0.iter().map(|&c| c / l).collect()))
        } else {
            None
        }
    }

    /// gcd of the absolute values of the components (0 for the zero vector).
    pub fn gcd(&self) -> u64 {
        self.0.iter().fold(0u64, |g, &c| gcd(g, c.unsigned_abs()))
    }

    /// True when the first nonvanishing coordinate is positive (member of `ℤᵈ₊`).
    pub fn is_sign_normalized(&self) -> bool {
        match self.0.iter().find(|&&c| c != 0) {
            Some(&c) => c > 0,
            None => false,
        }
    }

    /// Representative of `{v, -v}` in `ℤᵈ₊`, plus whether a flip occurred.
    pub fn sign_normalized(&self) -> (Self, bool) {
        if self.is_sign_normalized() || self.is_zero() {
            (self.clone(), false)
        } else {
            (self.neg(), true)
        }
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Canonical index `(p, q) ∈ ℋ_d` of a rational hyperplane
/// `H_{p,q} = {x : p = q·x}`: `q` sign-normalized and `gcd(p, q) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HyperplaneIndex {
    p: i64,
    q: LatticeVector,
}

impl HyperplaneIndex {
    pub fn new(p: i64, q: LatticeVector) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::invalid("hyperplane normal must be nonzero"));
        }
        if !q.is_sign_normalized() {
            return Err(Error::invalid("hyperplane normal must lie in Z^d_+"));
        }
        if gcd(p.unsigned_abs(), q.gcd()) != 1 {
            return Err(Error::invalid("hyperplane index (p, q) must be coprime"));
        }
        Ok(HyperplaneIndex { p, q })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> &LatticeVector {
        &self.q
    }

    /// Signed distance numerator `q·x − p`; the Euclidean distance from `x`
    /// to the hyperplane is `|q·x − p| / |q|`.
    pub fn offset(&self, x: &[f64]) -> f64 {
        self.q.dot(x) - self.p as f64
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.offset(x).abs() / self.q.norm()
    }
}

impl fmt::Display for HyperplaneIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H({},{})", self.p, self.q)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// gcd of the components of `m ∈ ℤᵈ \ {0}`.
pub fn gcd_vec(m: &LatticeVector) -> Result<u64> {
    if m.is_zero() {
        return Err(Error::invalid("gcd_vec of the zero vector"));
    }
    Ok(m.gcd())
}

/// True iff the components of `n` are coprime.
pub fn is_irreducible(n: &LatticeVector) -> Result<bool> {
    Ok(gcd_vec(n)? == 1)
}

// Smallest-prime-factor sieve, built once on first use and then shared
// read-only. Values above the bound fall back to trial factorization.
pub const DEFAULT_SIEVE_BOUND: usize = 10_000_000;

struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    fn build(bound: usize) -> Self {
        let mut spf = vec![0u32; bound + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=bound {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            for &p in &primes {
                let ip = i * p as usize;
                if p > spf[i] || ip > bound {
                    break;
                }
                spf[ip] = p;
            }
        }
        SpfSieve { spf }
    }
}

static SIEVE: OnceLock<SpfSieve> = OnceLock::new();

fn sieve() -> &'static SpfSieve {
    SIEVE.get_or_init(|| SpfSieve::build(DEFAULT_SIEVE_BOUND))
}

/// Prime factorization `n = Π pᵢ^eᵢ` with the primes in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    if n <= DEFAULT_SIEVE_BOUND as u64 {
        let spf = &sieve().spf;
        while n > 1 {
            let p = spf[n as usize] as u64;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        return out;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Möbius function: 0 on non-square-free integers, else `(−1)^k` with `k`
/// the number of prime divisors.
pub fn mobius(n: u64) -> Result<i8> {
    if n == 0 {
        return Err(Error::invalid("mobius(0) is undefined"));
    }
    Ok(mobius_unchecked(n))
}

pub(crate) fn mobius_unchecked(n: u64) -> i8 {
    debug_assert!(n >= 1);
    if n == 1 {
        return 1;
    }
    let mut mu = 1i8;
    for (_, e) in factorize(n) {
        if e > 1 {
            return 0;
        }
        mu = -mu;
    }
    mu
}

/// Sorted list of positive divisors of `n ≥ 1`.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let prev = out.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            out.extend(prev.iter().map(|&d| d * pk));
        }
    }
    out.sort_unstable();
    out
}

/// `Σ_{l|n} μ(l)`, which is 1 iff `n = 1` and 0 otherwise.
pub fn mobius_sum_check(n: u64) -> i64 {
    assert!(n >= 1, "mobius_sum_check requires n >= 1");
    divisors(n)
        .into_iter()
        .map(|l| mobius_unchecked(l) as i64)
        .sum()
}

/// Number of decompositions `m = l·n` with `l ∈ ℕ`, `n ∈ ℤᵈ \ {0}`;
/// equals `τ(gcd(m))`.
pub fn tau_multi(m: &LatticeVector) -> Result<u64> {
    let g = gcd_vec(m)?;
    Ok(divisors(g).len() as u64)
}

/// Which divisor family `sigma_power` sums over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaVariant {
    /// `σ_z(m) = Σ_{n|m} |n|^z` over vector divisors, Euclidean norm.
    Vector,
    /// `σ̃_z(m) = Σ_{l|m} l^z` over positive integer divisors.
    Integer,
}

/// Divisor-power sums of a lattice vector.
///
/// The vector variant enumerates the divisor pairs directly: every vector
/// divisor of `m` is `m/l` for an integer divisor `l` of `gcd(m)`, so
/// `σ_z(m) = Σ_{l|gcd(m)} (|m|/l)^z`.
pub fn sigma_power(m: &LatticeVector, z: f64, variant: SigmaVariant) -> Result<f64> {
    let g = gcd_vec(m)?;
    let ds = divisors(g);
    match variant {
        SigmaVariant::Vector => {
            let norm = m.norm();
            Ok(ds.iter().map(|&l| (norm / l as f64).powf(z)).sum())
        }
        SigmaVariant::Integer => Ok(sigma_int(&ds, z)),
    }
}

/// One-dimensional `σ_z(g) = Σ_{l|g} l^z` for a positive integer `g`.
pub fn sigma_power_int(g: u64, z: f64) -> f64 {
    sigma_int(&divisors(g), z)
}

fn sigma_int(ds: &[u64], z: f64) -> f64 {
    // Exact integer accumulation for integer z >= 0 while it fits in u128.
    if z >= 0.0 && z <= 40.0 && z.fract() == 0.0 {
        let zi = z as u32;
        let mut acc: u128 = 0;
        let mut ok = true;
        for &l in ds {
            match (l as u128).checked_pow(zi).and_then(|t| acc.checked_add(t)) {
                Some(v) => acc = v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return acc as f64;
        }
    }
    ds.iter().map(|&l| (l as f64).powf(z)).sum()
}

/// Canonical representative `(p, q) ∈ ℋ_d` of the hyperplane `{x : k = n·x}`:
/// sign-normalize `n` (negating `k` accordingly), then divide out
/// `gcd(k, components of n)`. `gcd(0, g) = g`, so `k = 0` yields `p = 0` with
/// `q` the normalized direction.
pub fn canonical_hyperplane(k: i64, n: &LatticeVector) -> Result<HyperplaneIndex> {
    if n.is_zero() {
        return Err(Error::invalid("hyperplane normal must be nonzero"));
    }
    let (q, flipped) = n.sign_normalized();
    let p = if flipped { -k } else { k };
    let g = gcd(p.unsigned_abs(), q.gcd());
    debug_assert!(g >= 1);
    let gi = g as i64;
    HyperplaneIndex::new(p / gi, q.divide_exact(gi).expect("gcd divides components"))
}
