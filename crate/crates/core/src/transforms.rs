//! The coefficient calculus: jump operator `J` (`A_q = 2Σ_{l≥1} a_{lq}`),
//! maximal operator `M` (`ā_q = sup_l |a_{lq}|`), the Möbius inverse of `J`,
//! subsampling along a ray, and Davenport↔Fourier coefficient conversion.
//!
//! All operators here are truncated: results are [`LatticeMap`]s carrying the
//! truncation radius and an explicit tail bound. Entries whose magnitude does
//! not exceed their own truncation-error bound are kept but flagged
//! *uncertain-zero*; downstream consumers (θₐ, Hölder bounds) skip them
//! rather than trusting a sign that the truncation cannot resolve.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{self, LatticeVector};
use crate::coeffs::{CoefficientFamily, RegularityProfile, SupportView};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapEntry {
    pub value: f64,
    /// `|value|` does not exceed the truncation error of this entry.
    pub uncertain: bool,
}

/// A finitely-truncated odd or even map `q ↦ value` over `ℤᵈ \ {0}`: the
/// shared carrier for jump sizes `A_q`, maximal values `ā_q`, and Fourier
/// coefficients `c_m`. One representative per ± pair is stored, on the
/// `ℤᵈ₊` side; the mirror value follows from the parity.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeMap {
    d: usize,
    parity: Parity,
    entries: BTreeMap<LatticeVector, MapEntry>,
    truncation_radius: f64,
    tail_bound: f64,
}

impl LatticeMap {
    pub fn new(d: usize, parity: Parity, truncation_radius: f64, tail_bound: f64) -> Self {
        LatticeMap {
            d,
            parity,
            entries: BTreeMap::new(),
            truncation_radius,
            tail_bound,
        }
    }

    pub fn from_entries(
        d: usize,
        parity: Parity,
        truncation_radius: f64,
        tail_bound: f64,
        entries: impl IntoIterator<Item = (LatticeVector, f64)>,
    ) -> Result<Self> {
        let mut map = LatticeMap::new(d, parity, truncation_radius, tail_bound);
        for (q, v) in entries {
            map.insert(q, v, false)?;
        }
        Ok(map)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, q: LatticeVector, value: f64, uncertain: bool) -> Result<()> {
        if q.is_zero() || q.dim() != self.d {
            return Err(Error::invalid("map key must be a nonzero d-vector"));
        }
        if q.norm() > self.truncation_radius {
            return Err(Error::invalid(format!(
                "map key {q} lies outside the truncation radius {}",
                self.truncation_radius
            )));
        }
        let (rep, flipped) = q.sign_normalized();
        let v = match self.parity {
            Parity::Odd if flipped => -value,
            _ => value,
        };
        self.entries.insert(rep, MapEntry { value: v, uncertain });
        Ok(())
    }

    /// Stored value at `q` (0 when absent), extended by parity.
    pub fn value_at(&self, q: &LatticeVector) -> f64 {
        self.entry_at(q).map_or(0.0, |e| e.value)
    }

    pub fn entry_at(&self, q: &LatticeVector) -> Option<MapEntry> {
        let (rep, flipped) = q.sign_normalized();
        self.entries.get(&rep).map(|e| {
            let value = match self.parity {
                Parity::Odd if flipped => -e.value,
                _ => e.value,
            };
            MapEntry {
                value,
                uncertain: e.uncertain,
            }
        })
    }

    /// Stored representatives in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&LatticeVector, &MapEntry)> {
        self.entries.iter()
    }

    /// Representatives whose value is nonzero and certain (above the
    /// truncation-error flag).
    pub fn certain_support(&self) -> impl Iterator<Item = (&LatticeVector, f64)> {
        self.entries
            .iter()
            .filter(|(_, e)| !e.uncertain && e.value != 0.0)
            .map(|(q, e)| (q, e.value))
    }

    fn require_parity(&self, parity: Parity, what: &str) -> Result<()> {
        if self.parity != parity {
            return Err(Error::invalid(format!(
                "{what} requires a map of {parity:?} parity"
            )));
        }
        Ok(())
    }
}

// Wire form: {"d":1,"parity":"odd","R":64.0,"tail":1e-9,
//             "entries":[[[1],1.5],[[2],0.5]],"uncertain":[[2]]}
#[derive(Serialize, Deserialize)]
struct MapRepr {
    d: usize,
    parity: Parity,
    #[serde(rename = "R")]
    r: f64,
    tail: f64,
    entries: Vec<(Vec<i64>, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    uncertain: Vec<Vec<i64>>,
}

impl Serialize for LatticeMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = MapRepr {
            d: self.d,
            parity: self.parity,
            r: self.truncation_radius,
            tail: self.tail_bound,
            entries: self
                .entries
                .iter()
                .map(|(q, e)| (q.coords().to_vec(), e.value))
                .collect(),
            uncertain: self
                .entries
                .iter()
                .filter(|(_, e)| e.uncertain)
                .map(|(q, _)| q.coords().to_vec())
                .collect(),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeMap {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = MapRepr::deserialize(de)?;
        let mut map = LatticeMap::new(repr.d, repr.parity, repr.r, repr.tail);
        for (coords, v) in repr.entries {
            map.insert(LatticeVector::new(coords), v, false)
                .map_err(D::Error::custom)?;
        }
        for coords in repr.uncertain {
            let (rep, _) = LatticeVector::new(coords).sign_normalized();
            if let Some(e) = map.entries.get_mut(&rep) {
                e.uncertain = true;
            }
        }
        Ok(map)
    }
}

/// For sparse kinds, accumulating `(Σ_l a_{lq}, sup_l |a_{lq}|)` over the
/// support beats scanning `l = 1..l_max` per ray.
fn support_driven_rays(
    a: &CoefficientFamily,
    q_radius: f64,
    l_max: u64,
) -> Result<BTreeMap<LatticeVector, (f64, f64)>> {
    debug_assert!(!a.is_dense_scalar());
    let reach = q_radius * l_max as f64;
    let mut acc: BTreeMap<LatticeVector, (f64, f64)> = BTreeMap::new();
    if let SupportView::Points(pts) = a.support_view(reach)? {
        for (n, v) in &pts {
            let g = n.gcd();
            for l in arith::divisors(g) {
                if l > l_max {
                    continue;
                }
                let q = n.divide_exact(l as i64).expect("divisor of gcd");
                if q.norm() < q_radius {
                    let e = acc.entry(q).or_insert((0.0, 0.0));
                    e.0 += v;
                    e.1 = e.1.max(v.abs());
                }
            }
        }
    }
    Ok(acc)
}

/// Jump operator `J`: odd map of truncated jump sizes
/// `A_q = 2 Σ_{l=1..l_max} a_{l·q}` for `|q| < q_radius`, with per-entry
/// uncertainty flags and the worst-case tail bound.
pub fn jump_operator(a: &CoefficientFamily, q_radius: f64, l_max: u64) -> Result<LatticeMap> {
    build_ray_map(a, q_radius, l_max, RayOp::Jump)
}

/// Maximal operator `M`: even map `ā_q = sup_{1≤l≤l_max} |a_{l·q}|`.
pub fn maximal_operator(a: &CoefficientFamily, q_radius: f64, l_max: u64) -> Result<LatticeMap> {
    build_ray_map(a, q_radius, l_max, RayOp::Maximal)
}

#[derive(Clone, Copy, PartialEq)]
enum RayOp {
    Jump,
    Maximal,
}

fn build_ray_map(
    a: &CoefficientFamily,
    q_radius: f64,
    l_max: u64,
    op: RayOp,
) -> Result<LatticeMap> {
    if !(q_radius > 0.0) || l_max < 1 {
        return Err(Error::invalid("jump operator needs q_radius > 0 and l_max >= 1"));
    }
    let parity = match op {
        RayOp::Jump => Parity::Odd,
        RayOp::Maximal => Parity::Even,
    };
    let mut map = LatticeMap::new(a.dim(), parity, q_radius, 0.0);
    let mut worst_tail = 0.0f64;

    let mut push = |map: &mut LatticeMap, q: LatticeVector, sum: f64, sup: f64| -> Result<()> {
        let (value, tail) = match op {
            RayOp::Jump => (2.0 * sum, 2.0 * a.ray_tail_l1(&q, l_max + 1)),
            RayOp::Maximal => (sup, a.sup_tail(l_max as f64 * q.norm())),
        };
        worst_tail = worst_tail.max(tail);
        let uncertain = value.abs() <= tail && tail > 0.0;
        map.insert(q, value, uncertain)
    };

    if a.is_dense_scalar() {
        let mut q = 1u64;
        while (q as f64) < q_radius {
            let mut sum = 0.0;
            let mut sup: f64 = 0.0;
            // descending order: accumulate the small terms first
            for l in (1..=l_max).rev() {
                let v = a.scalar_value(l * q);
                sum += v;
                sup = sup.max(v.abs());
            }
            push(&mut map, LatticeVector::new(vec![q as i64]), sum, sup)?;
            q += 1;
        }
    } else {
        for (q, (sum, sup)) in support_driven_rays(a, q_radius, l_max)? {
            push(&mut map, q, sum, sup)?;
        }
    }
    map.tail_bound = worst_tail;
    Ok(map)
}

/// Möbius inverse of the jump operator:
/// `J⁻¹(A)ₙ = ½ Σ_{l=1..l_max} μ(l) A_{l·n}`, with entries outside the map
/// treated as 0. Exact when `A` has finite support inside its truncation.
pub fn invert_jump(map: &LatticeMap, n: &LatticeVector, l_max: u64) -> Result<f64> {
    map.require_parity(Parity::Odd, "invert_jump")?;
    if n.is_zero() {
        return Err(Error::invalid("invert_jump index must be nonzero"));
    }
    let norm = n.norm();
    let l_stop = ((map.truncation_radius / norm).floor() as u64).min(l_max);
    let mut sum = 0.0;
    for l in 1..=l_stop {
        let mu = arith::mobius(l)? as f64;
        if mu == 0.0 {
            continue;
        }
        sum += mu * map.value_at(&n.scale(l as i64));
    }
    Ok(0.5 * sum)
}

/// Subsampling with step `m ∈ ℐᵈ₊`: the sequence `(a_{l·m})_{1≤l≤l_max}`.
pub fn subsample(a: &CoefficientFamily, m: &LatticeVector, l_max: u64) -> Result<Vec<f64>> {
    if m.is_zero() || m.dim() != a.dim() {
        return Err(Error::invalid("subsampling step must be a nonzero d-vector"));
    }
    if !m.is_sign_normalized() {
        return Err(Error::invalid("subsampling step must lie in Z^d_+"));
    }
    if !arith::is_irreducible(m)? {
        return Err(Error::invalid("subsampling step must be irreducible"));
    }
    (1..=l_max)
        .map(|l| a.value_at(&m.scale(l as i64)))
        .collect()
}

/// Fourier coefficient of the series:
/// `c_m = −(1/2π) Σ_{(l,n): ln=m, l∈ℤ*} aₙ/l`. The `(−l, −n)` partner of each
/// positive-`l` pair contributes identically by oddness, so the sum runs over
/// positive divisors with a factor 2 folded in:
/// `c_m = −(1/π) Σ_{l | gcd(m), l ≤ trunc} a_{m/l} / l`.
pub fn davenport_to_fourier(a: &CoefficientFamily, m: &LatticeVector, trunc: u64) -> Result<f64> {
    if m.is_zero() || m.dim() != a.dim() {
        return Err(Error::invalid("fourier index must be a nonzero d-vector"));
    }
    let g = arith::gcd_vec(m)?;
    let mut sum = 0.0;
    for l in arith::divisors(g) {
        if l > trunc {
            continue;
        }
        let n = m.divide_exact(l as i64).expect("divisor of gcd");
        sum += a.value_at(&n)? / l as f64;
    }
    Ok(-sum / std::f64::consts::PI)
}

/// Odd map of Fourier coefficients `c_m` for `|m| < m_radius`.
pub fn fourier_map(a: &CoefficientFamily, m_radius: f64, trunc: u64) -> Result<LatticeMap> {
    let mut map = LatticeMap::new(a.dim(), Parity::Odd, m_radius, 0.0);
    if a.dim() == 1 {
        let mut m = 1i64;
        while (m as f64) < m_radius {
            let mv = LatticeVector::new(vec![m]);
            let c = davenport_to_fourier(a, &mv, trunc)?;
            map.insert(mv, c, false)?;
            m += 1;
        }
        return Ok(map);
    }
    // d >= 2: c_m can be nonzero only when some divisor of m carries a
    // Davenport coefficient, so the Fourier support is the set of positive
    // multiples of support points.
    let mut seen = std::collections::BTreeSet::new();
    if let SupportView::Points(pts) = a.support_view(m_radius)? {
        for (n, _) in &pts {
            let mut l = 1i64;
            loop {
                let m = n.scale(l);
                if m.norm() >= m_radius {
                    break;
                }
                seen.insert(m);
                l += 1;
            }
        }
    }
    for m in seen {
        let c = davenport_to_fourier(a, &m, trunc)?;
        map.insert(m, c, false)?;
    }
    Ok(map)
}

/// Recover a Davenport coefficient from Fourier coefficients:
/// `aₙ = −π Σ_{m|n} (m/n) μ(n/m) c_m`, where `m/n` is the scalar `1/l` for
/// `n = l·m`. Finite exact sum over stored entries.
pub fn fourier_to_davenport(c: &LatticeMap, n: &LatticeVector, l_max: u64) -> Result<f64> {
    c.require_parity(Parity::Odd, "fourier_to_davenport")?;
    if n.is_zero() {
        return Err(Error::invalid("coefficient index must be nonzero"));
    }
    let g = arith::gcd_vec(n)?;
    let mut sum = 0.0;
    for l in arith::divisors(g) {
        if l > l_max {
            continue;
        }
        let mu = arith::mobius(l)? as f64;
        if mu == 0.0 {
            continue;
        }
        let m = n.divide_exact(l as i64).expect("divisor of gcd");
        sum += mu / l as f64 * c.value_at(&m);
    }
    Ok(-std::f64::consts::PI * sum)
}

/// θₐ estimate: sup over certain entries of `M(a)` in the shell of
/// `log|A_q| / log ā_q`, the cancellation diagnostic. Values ≥ 1 in either
/// coordinate make the log-ratio meaningless and are skipped, as are rays
/// whose `A_q` is uncertain-zero at this truncation. An exactly-zero certain
/// `A_q` over a nonzero `ā_q` is a cancellation witness (infinite ratio).
#[derive(Clone, Debug, Serialize)]
pub struct ThetaEstimate {
    /// `None` when no usable ray fell inside the shell.
    pub value: Option<f64>,
    pub jump_canceling: bool,
    pub shell: (f64, f64),
    /// Per-ray ratio table `(q, log|A_q|/log ā_q)`.
    pub table: Vec<(LatticeVector, f64)>,
}

pub fn theta_a_estimate(
    a: &CoefficientFamily,
    q_radius: f64,
    l_max: u64,
    shell: Option<(f64, f64)>,
) -> Result<ThetaEstimate> {
    let jumps = jump_operator(a, q_radius, l_max)?;
    let maximal = maximal_operator(a, q_radius, l_max)?;
    theta_from_maps(&jumps, &maximal, shell.unwrap_or((q_radius.sqrt(), q_radius)))
}

pub fn theta_from_maps(
    jumps: &LatticeMap,
    maximal: &LatticeMap,
    shell: (f64, f64),
) -> Result<ThetaEstimate> {
    jumps.require_parity(Parity::Odd, "theta_a_estimate")?;
    maximal.require_parity(Parity::Even, "theta_a_estimate")?;
    let (lo, hi) = shell;
    let mut table = Vec::new();
    let mut best: Option<f64> = None;
    for (q, abar) in maximal.certain_support() {
        let norm = q.norm();
        if norm < lo || norm >= hi {
            continue;
        }
        let abar = abar.abs();
        if abar >= 1.0 {
            continue;
        }
        let Some(jump) = jumps.entry_at(q) else {
            continue;
        };
        if jump.uncertain {
            continue;
        }
        let ratio = if jump.value == 0.0 {
            f64::INFINITY
        } else if jump.value.abs() >= 1.0 {
            continue;
        } else {
            jump.value.abs().ln() / abar.ln()
        };
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
        table.push((q.clone(), ratio));
    }
    Ok(ThetaEstimate {
        value: best,
        jump_canceling: best.map_or(false, |v| v > 1.0),
        shell,
        table,
    })
}

/// Scalar regularity descriptors of a family at truncation `r`, combining
/// the decay exponent, sparsity trend and cancellation diagnostic.
pub fn regularity_profile(
    a: &CoefficientFamily,
    r: f64,
    q_radius: f64,
    l_max: u64,
) -> Result<RegularityProfile> {
    let gamma = a.gamma_a_estimate(r.sqrt().max(2.0).min(r / 2.0), r)?;
    let sparsity = a.sparsity_exponent(r)?;
    let trend = a.sparsity_trend(r, 5)?;
    let theta = theta_a_estimate(a, q_radius, l_max, None)?;
    Ok(RegularityProfile {
        gamma_a: if gamma.value.is_finite() {
            Some(gamma.value)
        } else {
            None
        },
        theta_a: theta.value.filter(|v| v.is_finite()),
        sparsity_exponent: sparsity.value,
        sparse: trend.sparse,
        slow_decay: gamma.value < 0.05,
        jump_canceling: theta.jump_canceling,
        truncation_radius: r,
    })
}
