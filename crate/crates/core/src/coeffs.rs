//! Coefficient families: the odd sequence `a = (aₙ)` generating a Davenport
//! series, together with support enumeration, decay norms and the scalar
//! regularity descriptors (γₐ, sparsity exponent, slow decay).
//!
//! Values are stored for the `ℤᵈ₊`-side representatives and extended by
//! oddness, `a₋ₙ = −aₙ`. One-dimensional families from the classical setting
//! (coefficients `bₙ` on ℕ) are mapped to the odd convention as
//! `aₙ = ½·sign(n)·b_{|n|}`, so that `Σ_{n∈ℤ*} aₙ{n·x} = Σ_{n≥1} bₙ{nx}`
//! and the jump sums `A_q = 2Σ_l a_{lq}` reproduce the one-dimensional ones.

use serde::{Deserialize, Serialize};

use crate::arith::LatticeVector;
use crate::error::{Error, Result};

/// Support enumerations refuse to materialize more than this many elements.
pub const DEFAULT_SUPPORT_CAP: usize = 10_000_000;

const LN_2: f64 = std::f64::consts::LN_2;

/// Riemann zeta for real s > 1, by Euler–Maclaurin. Absolute error far below
/// 1e-12 for s bounded away from 1.
pub(crate) fn zeta(s: f64) -> f64 {
    debug_assert!(s > 1.0);
    let n = 10_000u64;
    let nf = n as f64;
    let mut sum = 0.0;
    for k in 1..=n {
        sum += (k as f64).powf(-s);
    }
    sum += nf.powf(1.0 - s) / (s - 1.0);
    sum -= nf.powf(-s) / 2.0;
    sum += s * nf.powf(-s - 1.0) / 12.0;
    sum -= s * (s + 1.0) * (s + 2.0) * nf.powf(-s - 3.0) / 720.0;
    sum
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Largest integer `n` with `n ≤ x`, clamped to 0.
fn last_int_leq(x: f64) -> u64 {
    if x < 1.0 {
        0
    } else {
        x.floor() as u64
    }
}

/// Largest integer `n` with `n < x`, clamped to 0.
fn last_int_lt(x: f64) -> u64 {
    if x <= 1.0 {
        return 0;
    }
    let f = x.floor();
    if f == x {
        (f as u64) - 1
    } else {
        f as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
enum FamilyKind {
    /// Explicit sign-normalized support points with their values.
    Finite(Vec<(LatticeVector, f64)>),
    /// `bₙ = n^{−β}`, d = 1.
    Hecke { beta: f64 },
    /// `b_{lᵏ} = k^{−α}` for k ≥ 1, zero elsewhere, d = 1.
    LAdic { l: u64, alpha: f64 },
    /// Support `baseᵏ·direction` for k ≥ 0, value `½|n|^{−γ}`.
    PowerLacunary {
        base: u64,
        direction: LatticeVector,
        gamma: f64,
    },
    /// `b₁ = 1 − ζ(β)`, `bₙ = n^{−β}` for n ≥ 2, d = 1. Continuous at 0.
    FBeta { beta: f64, zeta_beta: f64 },
}

/// An odd coefficient sequence over `ℤᵈ \ {0}`, given by a closed-form family
/// or a finite support list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub struct CoefficientFamily {
    d: usize,
    kind: FamilyKind,
}

/// Enumerated support inside a ball, in a shape evaluation loops can consume
/// without allocating a vector per frequency.
pub enum SupportView {
    /// d = 1 with every integer `1..=n_max` in the support (Hecke-type);
    /// values come from [`CoefficientFamily::scalar_value`].
    DenseScalar { n_max: u64 },
    /// Explicit positive representatives with their values.
    Points(Vec<(LatticeVector, f64)>),
}

impl CoefficientFamily {
    pub fn finite(d: usize, entries: Vec<(LatticeVector, f64)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        let mut normalized: Vec<(LatticeVector, f64)> = Vec::with_capacity(entries.len());
        for (n, v) in entries {
            if n.dim() != d {
                return Err(Error::invalid(format!(
                    "entry {n} has dimension {} but family has d = {d}",
                    n.dim()
                )));
            }
            if n.is_zero() {
                return Err(Error::invalid("finite-support frequency must be nonzero"));
            }
            if v == 0.0 {
                continue;
            }
            let (rep, flipped) = n.sign_normalized();
            normalized.push((rep, if flipped { -v } else { v }));
        }
        normalized.sort_by(|a, b| a.0.cmp(&b.0));
        for w in normalized.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::invalid(format!(
                    "duplicate finite-support frequency {}",
                    w[0].0
                )));
            }
        }
        Ok(CoefficientFamily {
            d,
            kind: FamilyKind::Finite(normalized),
        })
    }

    /// The zero family (empty support).
    pub fn zero(d: usize) -> Self {
        CoefficientFamily {
            d,
            kind: FamilyKind::Finite(Vec::new()),
        }
    }

    pub fn hecke(beta: f64) -> Result<Self> {
        if !(beta > 1.0) {
            return Err(Error::invalid(
                "hecke family requires beta > 1 for an l^1 coefficient sequence",
            ));
        }
        Ok(CoefficientFamily {
            d: 1,
            kind: FamilyKind::Hecke { beta },
        })
    }

    pub fn l_adic(l: u64, alpha: f64) -> Result<Self> {
        if !is_prime(l) {
            return Err(Error::invalid("l_adic base l must be prime"));
        }
        if !(alpha > 1.0) {
            return Err(Error::invalid("l_adic requires alpha > 1"));
        }
        Ok(CoefficientFamily {
            d: 1,
            kind: FamilyKind::LAdic { l, alpha },
        })
    }

    pub fn power_lacunary(d: usize, base: u64, direction: LatticeVector, gamma: f64) -> Result<Self> {
        if base < 2 {
            return Err(Error::invalid("power_lacunary base must be >= 2"));
        }
        if !(gamma > 0.0) {
            return Err(Error::invalid("power_lacunary requires gamma > 0"));
        }
        if direction.dim() != d || direction.is_zero() {
            return Err(Error::invalid("power_lacunary direction must be a nonzero d-vector"));
        }
        let (dir, _) = direction.sign_normalized();
        Ok(CoefficientFamily {
            d,
            kind: FamilyKind::PowerLacunary {
                base,
                direction: dir,
                gamma,
            },
        })
    }

    pub fn f_beta(beta: f64) -> Result<Self> {
        if !(beta > 1.5) {
            return Err(Error::invalid("f_beta requires beta > 3/2"));
        }
        Ok(CoefficientFamily {
            d: 1,
            kind: FamilyKind::FBeta {
                beta,
                zeta_beta: zeta(beta),
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_zero_family(&self) -> bool {
        matches!(&self.kind, FamilyKind::Finite(e) if e.is_empty())
    }

    /// True for 1-D kinds whose support is all of ℕ (Hecke-type); their
    /// support must be scanned, not materialized.
    pub fn is_dense_scalar(&self) -> bool {
        matches!(&self.kind, FamilyKind::Hecke { .. } | FamilyKind::FBeta { .. })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::invalid(format!("family config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("family serialization cannot fail")
    }

    /// Coefficient `aₙ`, respecting oddness.
    pub fn value_at(&self, n: &LatticeVector) -> Result<f64> {
        if n.is_zero() {
            return Err(Error::invalid("coefficient index must be nonzero"));
        }
        if n.dim() != self.d {
            return Err(Error::invalid(format!(
                "index {n} has dimension {}, family has d = {}",
                n.dim(),
                self.d
            )));
        }
        let (rep, flipped) = n.sign_normalized();
        let v = self.rep_value(&rep);
        Ok(if flipped { -v } else { v })
    }

    /// Value at the positive representative `rep ∈ ℤᵈ₊`.
    fn rep_value(&self, rep: &LatticeVector) -> f64 {
        match &self.kind {
            FamilyKind::Finite(entries) => entries
                .binary_search_by(|e| e.0.cmp(rep))
                .map(|i| entries[i].1)
                .unwrap_or(0.0),
            FamilyKind::Hecke { .. } | FamilyKind::LAdic { .. } | FamilyKind::FBeta { .. } => {
                let n = rep.coords()[0];
                debug_assert!(n > 0);
                self.scalar_value(n as u64)
            }
            FamilyKind::PowerLacunary {
                base,
                direction,
                gamma,
            } => {
                match lacunary_level(rep, *base, direction) {
                    Some(_) => 0.5 * rep.norm().powf(-gamma),
                    None => 0.0,
                }
            }
        }
    }

    /// Stored value `aₙ = ½ b_n` for a positive scalar index of a 1-D family.
    pub fn scalar_value(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        match &self.kind {
            FamilyKind::Hecke { beta } => 0.5 * (n as f64).powf(-beta),
            FamilyKind::FBeta { beta, zeta_beta } => {
                if n == 1 {
                    0.5 * (1.0 - zeta_beta)
                } else {
                    0.5 * (n as f64).powf(-beta)
                }
            }
            FamilyKind::LAdic { l, alpha } => match exact_log(n, *l) {
                Some(k) if k >= 1 => 0.5 * (k as f64).powf(-alpha),
                _ => 0.0,
            },
            FamilyKind::Finite(_) | FamilyKind::PowerLacunary { .. } => self
                .rep_value(&LatticeVector::new(vec![n as i64])),
        }
    }

    /// Positive representatives of the support with `|n| ≤ r`, as a view
    /// suitable for summation loops. Enforces the enumeration cap.
    pub fn support_view(&self, r: f64) -> Result<SupportView> {
        match &self.kind {
            FamilyKind::Hecke { .. } | FamilyKind::FBeta { .. } => {
                let n_max = last_int_leq(r);
                if n_max as usize > DEFAULT_SUPPORT_CAP {
                    return Err(Error::resource(format!(
                        "support enumeration of {n_max} elements exceeds cap {DEFAULT_SUPPORT_CAP}"
                    )));
                }
                Ok(SupportView::DenseScalar { n_max })
            }
            FamilyKind::Finite(entries) => Ok(SupportView::Points(
                entries
                    .iter()
                    .filter(|(n, _)| n.norm() <= r)
                    .cloned()
                    .collect(),
            )),
            FamilyKind::LAdic { l, alpha } => {
                let mut pts = Vec::new();
                let mut n: u64 = *l;
                let mut k = 1u32;
                while (n as f64) <= r {
                    pts.push((
                        LatticeVector::new(vec![n as i64]),
                        0.5 * (k as f64).powf(-alpha),
                    ));
                    match n.checked_mul(*l) {
                        Some(next) => n = next,
                        None => break,
                    }
                    k += 1;
                }
                Ok(SupportView::Points(pts))
            }
            FamilyKind::PowerLacunary {
                base,
                direction,
                gamma,
            } => {
                let mut pts = Vec::new();
                let mut scale: u64 = 1;
                loop {
                    let n = direction.scale(scale as i64);
                    let norm = n.norm();
                    if norm > r {
                        break;
                    }
                    pts.push((n, 0.5 * norm.powf(-gamma)));
                    match scale.checked_mul(*base) {
                        Some(next) => scale = next,
                        None => break,
                    }
                }
                Ok(SupportView::Points(pts))
            }
        }
    }

    /// All support representatives with `|n| < r` (one per ± pair, mirror
    /// implied), sorted by (norm, coordinates).
    pub fn support_in_ball(&self, r: f64) -> Result<Vec<LatticeVector>> {
        if !(r > 0.0) {
            return Err(Error::invalid("ball radius must be positive"));
        }
        let mut out: Vec<LatticeVector> = match self.support_view(r)? {
            SupportView::DenseScalar { n_max } => (1..=n_max.min(last_int_lt(r)))
                .map(|n| LatticeVector::new(vec![n as i64]))
                .collect(),
            SupportView::Points(pts) => pts
                .into_iter()
                .filter(|(n, _)| n.norm() < r)
                .map(|(n, _)| n)
                .collect(),
        };
        out.sort_by(|a, b| {
            a.norm()
                .partial_cmp(&b.norm())
                .unwrap()
                .then_with(|| a.cmp(b))
        });
        Ok(out)
    }

    /// Number of support points with `|n| < r`, counting both signs.
    /// Closed-form per family; no enumeration.
    pub fn support_count(&self, r: f64) -> f64 {
        let pos = match &self.kind {
            FamilyKind::Finite(entries) => entries.iter().filter(|(n, _)| n.norm() < r).count() as f64,
            FamilyKind::Hecke { .. } | FamilyKind::FBeta { .. } => last_int_lt(r) as f64,
            FamilyKind::LAdic { l, .. } => {
                let mut count = 0.0;
                let mut n = *l as f64;
                while n < r {
                    count += 1.0;
                    n *= *l as f64;
                }
                count
            }
            FamilyKind::PowerLacunary {
                base, direction, ..
            } => {
                let mut count = 0.0;
                let mut norm = direction.norm();
                while norm < r {
                    count += 1.0;
                    norm *= *base as f64;
                }
                count
            }
        };
        2.0 * pos
    }

    /// `sup_{n ∈ supp(a), |n| < r} |n|^γ |aₙ|` — the truncated 𝓕^γ norm.
    pub fn f_gamma_norm(&self, gamma: f64, r: f64) -> f64 {
        match &self.kind {
            FamilyKind::Finite(entries) => entries
                .iter()
                .filter(|(n, _)| n.norm() < r)
                .map(|(n, v)| n.norm().powf(gamma) * v.abs())
                .fold(0.0, f64::max),
            FamilyKind::Hecke { beta } => {
                let n_max = last_int_lt(r);
                if n_max == 0 {
                    0.0
                } else if gamma >= *beta {
                    0.5 * (n_max as f64).powf(gamma - beta)
                } else {
                    0.5
                }
            }
            FamilyKind::FBeta { beta, zeta_beta } => {
                let n_max = last_int_lt(r);
                if n_max == 0 {
                    return 0.0;
                }
                let at_one = 0.5 * (1.0 - zeta_beta).abs();
                if n_max == 1 {
                    return at_one;
                }
                let tail_sup = if gamma >= *beta {
                    0.5 * (n_max as f64).powf(gamma - beta)
                } else {
                    0.5 * 2f64.powf(gamma - beta)
                };
                at_one.max(tail_sup)
            }
            FamilyKind::LAdic { l, alpha } => {
                let mut sup: f64 = 0.0;
                let mut n = *l as f64;
                let mut k = 1u32;
                while n < r {
                    sup = sup.max(n.powf(gamma) * 0.5 * (k as f64).powf(-alpha));
                    n *= *l as f64;
                    k += 1;
                }
                sup
            }
            FamilyKind::PowerLacunary {
                base,
                direction,
                gamma: g,
            } => {
                let mut sup: f64 = 0.0;
                let mut norm = direction.norm();
                while norm < r {
                    sup = sup.max(norm.powf(gamma) * 0.5 * norm.powf(-g));
                    norm *= *base as f64;
                }
                sup
            }
        }
    }

    /// Shell infimum of `(−log|aₙ|)/log|n|` over support `r0 ≤ |n| < r`,
    /// `|n| > 1`; `None` when the shell holds no support.
    fn gamma_ratio_inf(&self, r0: f64, r: f64) -> Option<f64> {
        let ratio = |norm: f64, v: f64| -> f64 { -(v.abs().ln()) / norm.ln() };
        match &self.kind {
            FamilyKind::Finite(entries) => entries
                .iter()
                .filter(|(n, _)| {
                    let nn = n.norm();
                    nn >= r0 && nn < r && nn > 1.0
                })
                .map(|(n, v)| ratio(n.norm(), *v))
                .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x)))),
            FamilyKind::Hecke { beta } => {
                // (β ln n + ln 2)/ln n is decreasing in n: the infimum sits at
                // the largest index of the shell.
                let n_max = last_int_lt(r);
                let n_min = (r0.ceil() as u64).max(2);
                if n_max < n_min {
                    return None;
                }
                Some(beta + LN_2 / (n_max as f64).ln())
            }
            FamilyKind::FBeta { beta, .. } => {
                let n_max = last_int_lt(r);
                let n_min = (r0.ceil() as u64).max(2);
                if n_max < n_min {
                    return None;
                }
                Some(beta + LN_2 / (n_max as f64).ln())
            }
            FamilyKind::LAdic { l, alpha } => {
                let mut best: Option<f64> = None;
                let mut n = *l as f64;
                let mut k = 1u32;
                while n < r {
                    if n >= r0 && n > 1.0 {
                        let x = ratio(n, 0.5 * (k as f64).powf(-alpha));
                        best = Some(best.map_or(x, |b: f64| b.min(x)));
                    }
                    n *= *l as f64;
                    k += 1;
                }
                best
            }
            FamilyKind::PowerLacunary {
                base,
                direction,
                gamma,
            } => {
                let mut best: Option<f64> = None;
                let mut norm = direction.norm();
                while norm < r {
                    if norm >= r0 && norm > 1.0 {
                        let x = ratio(norm, 0.5 * norm.powf(-gamma));
                        best = Some(best.map_or(x, |b: f64| b.min(x)));
                    }
                    norm *= *base as f64;
                }
                best
            }
        }
    }

    /// Truncated decay exponent: infimum of `(−log|aₙ|)/log|n|` over the
    /// support shell `r0 ≤ |n| < r`, with a running-infimum trace at dyadic
    /// checkpoints so callers can inspect the liminf trend.
    pub fn gamma_a_estimate(&self, r0: f64, r: f64) -> Result<GammaEstimate> {
        if !(r0 >= 1.0 && r0 < r) {
            return Err(Error::invalid("gamma_a_estimate requires 1 <= R0 < R"));
        }
        let mut trace = Vec::new();
        let mut checkpoint = r0 * 2.0;
        while checkpoint < r {
            if let Some(v) = self.gamma_ratio_inf(r0, checkpoint) {
                trace.push((checkpoint, v));
            }
            checkpoint *= 2.0;
        }
        let inf = self.gamma_ratio_inf(r0, r);
        if let Some(v) = inf {
            trace.push((r, v));
        }
        Ok(GammaEstimate {
            value: inf.unwrap_or(f64::INFINITY),
            empty: inf.is_none(),
            r0,
            r,
            trace,
        })
    }

    /// `log #(supp a ∩ B(0,R)) / log R`, counting ± pairs.
    pub fn sparsity_exponent(&self, r: f64) -> Result<SparsityEstimate> {
        if !(r >= 2.0) {
            return Err(Error::invalid("sparsity_exponent requires R >= 2"));
        }
        let count = self.support_count(r);
        if count == 0.0 {
            return Ok(SparsityEstimate {
                value: 0.0,
                count: 0.0,
                empty: true,
                r,
            });
        }
        Ok(SparsityEstimate {
            value: count.ln() / r.ln(),
            count,
            empty: false,
            r,
        })
    }

    /// Sparsity exponents at `levels` dyadic scales ending at `R`, plus the
    /// pragmatic verdict: the family is reported sparse when the exponent
    /// decays along the scales (or is already negligible).
    pub fn sparsity_trend(&self, r: f64, levels: usize) -> Result<SparsityTrend> {
        if levels < 2 {
            return Err(Error::invalid("sparsity trend needs at least 2 scales"));
        }
        let mut points = Vec::with_capacity(levels);
        for j in (0..levels).rev() {
            let rj = r / (1u64 << j) as f64;
            if rj >= 2.0 {
                let est = self.sparsity_exponent(rj)?;
                points.push((rj, est.value));
            }
        }
        if points.is_empty() {
            return Err(Error::invalid("sparsity trend: all scales below R = 2"));
        }
        let first = points.first().unwrap().1;
        let last = points.last().unwrap().1;
        let sparse = last < 0.1 || (last < first - 0.01 && last < 0.6);
        Ok(SparsityTrend { points, sparse })
    }

    /// Slow-decay probe on a candidate set `Q`: infimum of
    /// `(−log|a_q|)/log|q|` over `q ∈ Q` in the outer shell `√R ≤ |q| ≤ R`.
    /// `slow` is `None` (indeterminate) when the shell holds no support.
    pub fn slow_decay_test(&self, q_set: &[LatticeVector], r: f64, eps: f64) -> Result<SlowDecayResult> {
        if !(r >= 2.0) {
            return Err(Error::invalid("slow_decay_test requires R >= 2"));
        }
        let lo = r.sqrt();
        let mut best: Option<(f64, LatticeVector)> = None;
        for q in q_set {
            let norm = q.norm();
            if norm < lo || norm > r || norm <= 1.0 {
                continue;
            }
            let v = self.value_at(q)?.abs();
            if v == 0.0 {
                continue;
            }
            let ratio = -(v.ln()) / norm.ln();
            if best.as_ref().map_or(true, |(b, _)| ratio < *b) {
                best = Some((ratio, q.clone()));
            }
        }
        Ok(match best {
            Some((ratio, witness)) => SlowDecayResult {
                slow: Some(ratio < eps),
                ratio: Some(ratio),
                witness: Some(witness),
                threshold: eps,
            },
            None => SlowDecayResult {
                slow: None,
                ratio: None,
                witness: None,
                threshold: eps,
            },
        })
    }

    // Tail envelopes. All are honest upper bounds derived from the closed
    // forms of each kind; `Finite` tails are exact.

    /// Bound on `Σ_{l ≥ from_l} |a_{l·q}|` along the ray of `q`.
    pub fn ray_tail_l1(&self, q: &LatticeVector, from_l: u64) -> f64 {
        debug_assert!(from_l >= 1);
        let qn = q.norm();
        match &self.kind {
            FamilyKind::Finite(entries) => {
                let (rep, _) = q.sign_normalized();
                entries
                    .iter()
                    .filter_map(|(n, v)| multiple_of(n, &rep).map(|l| (l, v)))
                    .filter(|(l, _)| *l >= from_l)
                    .fold(0.0, |acc, (_, v)| acc + v.abs())
            }
            FamilyKind::Hecke { beta } => 0.5 * qn.powf(-beta) * power_sum_tail(from_l, *beta),
            FamilyKind::FBeta { beta, zeta_beta } => {
                let mut t = 0.5 * qn.powf(-beta) * power_sum_tail(from_l, *beta);
                if from_l == 1 && qn == 1.0 {
                    // replace the n = 1 envelope term by |b₁| = |1 − ζ(β)|
                    t += 0.5 * ((1.0 - zeta_beta).abs() - 1.0);
                    t = t.max(0.0);
                }
                t
            }
            FamilyKind::LAdic { l, alpha } => {
                // Nonzero terms sit at l^k ≥ from_l·|q|; Σ_{k≥k0} ½ k^{-α}.
                let bound = from_l as f64 * qn;
                let k0 = smallest_power_at_least(*l, bound).max(1);
                0.5 * power_sum_tail(k0, *alpha)
            }
            FamilyKind::PowerLacunary {
                base,
                direction,
                gamma,
            } => {
                // Support norms ≥ from_l·|q| form a geometric sequence with
                // ratio base^γ.
                let d0 = direction.norm();
                let first = (from_l as f64 * qn).max(d0);
                let ratio = (*base as f64).powf(-gamma);
                0.5 * first.powf(-gamma) / (1.0 - ratio)
            }
        }
    }

    /// Bound on `Σ_{|n| > r} |aₙ|` over positive representatives; this also
    /// bounds `|f(x) − f^N(x)|` for `N = r` since `|{·}| ≤ ½`.
    pub fn l1_tail(&self, r: f64) -> f64 {
        match &self.kind {
            FamilyKind::Finite(entries) => entries
                .iter()
                .filter(|(n, _)| n.norm() > r)
                .fold(0.0, |acc, (_, v)| acc + v.abs()),
            FamilyKind::Hecke { beta } | FamilyKind::FBeta { beta, .. } => {
                // b₁ never sits in a tail with r ≥ 1.
                let from = last_int_leq(r).max(1) + 1;
                0.5 * power_sum_tail(from, *beta)
            }
            FamilyKind::LAdic { l, alpha } => {
                let k0 = smallest_power_at_least(*l, r.max(1.0) + 1.0).max(1);
                0.5 * power_sum_tail(k0, *alpha)
            }
            FamilyKind::PowerLacunary {
                base,
                direction,
                gamma,
            } => {
                let d0 = direction.norm();
                let mut first = d0;
                while first <= r {
                    first *= *base as f64;
                }
                let ratio = (*base as f64).powf(-gamma);
                0.5 * first.powf(-gamma) / (1.0 - ratio)
            }
        }
    }

    /// Bound on `sup_{|n| > r} |aₙ|`.
    pub fn sup_tail(&self, r: f64) -> f64 {
        match &self.kind {
            FamilyKind::Finite(entries) => entries
                .iter()
                .filter(|(n, _)| n.norm() > r)
                .map(|(_, v)| v.abs())
                .fold(0.0, f64::max),
            FamilyKind::Hecke { beta } | FamilyKind::FBeta { beta, .. } => {
                let from = last_int_leq(r).max(1) + 1;
                0.5 * (from as f64).powf(-beta)
            }
            FamilyKind::LAdic { l, alpha } => {
                let k0 = smallest_power_at_least(*l, r.max(1.0) + 1.0).max(1);
                0.5 * (k0 as f64).powf(-alpha)
            }
            FamilyKind::PowerLacunary { base, direction, gamma } => {
                let d0 = direction.norm();
                let mut first = d0;
                while first <= r {
                    first *= *base as f64;
                }
                0.5 * first.powf(-gamma)
            }
        }
    }

    /// Largest support norm for finite families, `None` for infinite support.
    pub fn max_support_norm(&self) -> Option<f64> {
        match &self.kind {
            FamilyKind::Finite(entries) => entries
                .iter()
                .map(|(n, _)| n.norm())
                .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x)))),
            _ => None,
        }
    }

    /// FNV-1a hash of the canonical JSON config, for provenance stamps.
    pub fn config_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.to_json().as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

/// `Σ_{l ≥ from} l^{−β}` upper bound via first term + integral remainder.
fn power_sum_tail(from: u64, beta: f64) -> f64 {
    debug_assert!(beta > 1.0 && from >= 1);
    let f = from as f64;
    f.powf(-beta) + f.powf(1.0 - beta) / (beta - 1.0)
}

/// Smallest `k ≥ 0` with `l^k ≥ bound`, as the exponent.
fn smallest_power_at_least(l: u64, bound: f64) -> u64 {
    let mut k = 0u64;
    let mut v = 1.0f64;
    while v < bound {
        v *= l as f64;
        k += 1;
        if k > 4096 {
            break;
        }
    }
    k
}

/// If `n = l·rep` for a positive integer `l`, return `l`.
fn multiple_of(n: &LatticeVector, rep: &LatticeVector) -> Option<u64> {
    let (i, &c) = rep.coords().iter().enumerate().find(|(_, &c)| c != 0)?;
    let nc = n.coords()[i];
    if nc % c != 0 {
        return None;
    }
    let l = nc / c;
    if l <= 0 {
        return None;
    }
    if n == &rep.scale(l) {
        Some(l as u64)
    } else {
        None
    }
}

/// If `rep = baseᵏ·direction`, return `k`.
fn lacunary_level(rep: &LatticeVector, base: u64, direction: &LatticeVector) -> Option<u32> {
    let l = multiple_of(rep, direction)?;
    exact_log(l, base)
}

/// `k` such that `n = base^k`, if any.
fn exact_log(mut n: u64, base: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut k = 0u32;
    while n % base == 0 {
        n /= base;
        k += 1;
    }
    if n == 1 {
        Some(k)
    } else {
        None
    }
}

/// Truncated decay-exponent estimate with its shell and dyadic trace.
#[derive(Clone, Debug, Serialize)]
pub struct GammaEstimate {
    /// Shell infimum; `+∞` when the shell holds no support.
    pub value: f64,
    pub empty: bool,
    pub r0: f64,
    pub r: f64,
    /// Running infimum at dyadic checkpoints `(R_j, inf over [R0, R_j))`.
    pub trace: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SparsityEstimate {
    pub value: f64,
    pub count: f64,
    pub empty: bool,
    pub r: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SparsityTrend {
    pub points: Vec<(f64, f64)>,
    pub sparse: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlowDecayResult {
    /// `None` when the probed shell holds no support (indeterminate).
    pub slow: Option<bool>,
    pub ratio: Option<f64>,
    pub witness: Option<LatticeVector>,
    pub threshold: f64,
}

/// Per-family scalar regularity descriptors at a fixed truncation.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityProfile {
    /// Truncated γₐ; `None` encodes +∞ (e.g. finite support exhausted).
    pub gamma_a: Option<f64>,
    /// Truncated θₐ; `None` when the shell was empty.
    pub theta_a: Option<f64>,
    pub sparsity_exponent: f64,
    pub sparse: bool,
    pub slow_decay: bool,
    pub jump_canceling: bool,
    pub truncation_radius: f64,
}

// JSON wire form:
//   {"d":1,"kind":"hecke","beta":2.0}
//   {"d":2,"kind":"power_lacunary","base":2,"direction":[1,0],"gamma":0.5}
//   {"d":2,"kind":"finite","entries":[[[1,2],0.5]]}
#[derive(Serialize, Deserialize)]
struct FamilyRepr {
    d: usize,
    #[serde(flatten)]
    kind: KindRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum KindRepr {
    Finite { entries: Vec<(Vec<i64>, f64)> },
    Hecke { beta: f64 },
    LAdic { l: u64, alpha: f64 },
    PowerLacunary { base: u64, direction: Vec<i64>, gamma: f64 },
    FBeta { beta: f64 },
}

impl TryFrom<FamilyRepr> for CoefficientFamily {
    type Error = Error;

    fn try_from(r: FamilyRepr) -> Result<Self> {
        match r.kind {
            KindRepr::Finite { entries } => CoefficientFamily::finite(
                r.d,
                entries
                    .into_iter()
                    .map(|(c, v)| (LatticeVector::new(c), v))
                    .collect(),
            ),
            KindRepr::Hecke { beta } => {
                require_1d(r.d, "hecke")?;
                CoefficientFamily::hecke(beta)
            }
            KindRepr::LAdic { l, alpha } => {
                require_1d(r.d, "l_adic")?;
                CoefficientFamily::l_adic(l, alpha)
            }
            KindRepr::PowerLacunary { base, direction, gamma } => {
                CoefficientFamily::power_lacunary(r.d, base, LatticeVector::new(direction), gamma)
            }
            KindRepr::FBeta { beta } => {
                require_1d(r.d, "f_beta")?;
                CoefficientFamily::f_beta(beta)
            }
        }
    }
}

fn require_1d(d: usize, kind: &str) -> Result<()> {
    if d != 1 {
        return Err(Error::invalid(format!("{kind} family requires d = 1")));
    }
    Ok(())
}

impl From<CoefficientFamily> for FamilyRepr {
    fn from(f: CoefficientFamily) -> Self {
        let d = f.d;
        let kind = match f.kind {
            FamilyKind::Finite(entries) => KindRepr::Finite {
                entries: entries
                    .into_iter()
                    .map(|(n, v)| (n.coords().to_vec(), v))
                    .collect(),
            },
            FamilyKind::Hecke { beta } => KindRepr::Hecke { beta },
            FamilyKind::LAdic { l, alpha } => KindRepr::LAdic { l, alpha },
            FamilyKind::PowerLacunary { base, direction, gamma } => KindRepr::PowerLacunary {
                base,
                direction: direction.coords().to_vec(),
                gamma,
            },
            FamilyKind::FBeta { beta, .. } => KindRepr::FBeta { beta },
        };
        FamilyRepr { d, kind }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(coords: &[i64]) -> LatticeVector {
        LatticeVector::new(coords.to_vec())
    }

    fn lacunary2d() -> CoefficientFamily {
        CoefficientFamily::power_lacunary(2, 2, v(&[1, 0]), 0.5).unwrap()
    }

    #[test]
    fn value_at_examples() {
        let h = CoefficientFamily::hecke(2.0).unwrap();
        assert!((h.value_at(&v(&[3])).unwrap() - 1.0 / 18.0).abs() < 1e-15);

        let f = CoefficientFamily::finite(2, vec![(v(&[1, 2]), 0.5)]).unwrap();
        assert_eq!(f.value_at(&v(&[-1, -2])).unwrap(), -0.5);

        let p = lacunary2d();
        assert!((p.value_at(&v(&[4, 0])).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(p.value_at(&v(&[3, 0])).unwrap(), 0.0);
    }

    #[test]
    fn support_in_ball_examples() {
        let h = CoefficientFamily::hecke(2.0).unwrap();
        let s = h.support_in_ball(3.5).unwrap();
        assert_eq!(s, vec![v(&[1]), v(&[2]), v(&[3])]);

        let p = lacunary2d();
        let s = p.support_in_ball(10.0).unwrap();
        assert_eq!(s, vec![v(&[1, 0]), v(&[2, 0]), v(&[4, 0]), v(&[8, 0])]);

        let f = CoefficientFamily::finite(2, vec![(v(&[1, 2]), 0.5)]).unwrap();
        assert!(f.support_in_ball(1.0).unwrap().is_empty());
    }

    #[test]
    fn support_in_ball_monotone() {
        let p = lacunary2d();
        let s1 = p.support_in_ball(5.0).unwrap();
        let s2 = p.support_in_ball(50.0).unwrap();
        for n in &s1 {
            assert!(s2.contains(n));
        }
    }

    #[test]
    fn f_gamma_norm_examples() {
        let h = CoefficientFamily::hecke(2.0).unwrap();
        assert!((h.f_gamma_norm(2.0, 100.0) - 0.5).abs() < 1e-15);

        let z = CoefficientFamily::zero(2);
        assert_eq!(z.f_gamma_norm(1.0, 10.0), 0.0);

        let p = lacunary2d();
        assert!((p.f_gamma_norm(0.5, 1000.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gamma_a_estimate_closed_forms() {
        // Hecke: the shell infimum equals β + ln2/ln(n_max); it approaches β
        // with error < 3/ln R.
        let h = CoefficientFamily::hecke(2.0).unwrap();
        for r in [1e2, 1e3, 1e4, 1e5] {
            let est = h.gamma_a_estimate(10.0, r).unwrap();
            let expect = 2.0 + LN_2 / ((last_int_lt(r)) as f64).ln();
            assert!((est.value - expect).abs() < 1e-12);
            assert!((est.value - 2.0).abs() < 3.0 / r.ln(), "R = {r}");
        }

        let p = lacunary2d();
        let est = p.gamma_a_estimate(4.0, (1u64 << 20) as f64).unwrap();
        let expect = 0.5 + LN_2 / ((1u64 << 19) as f64).ln();
        assert!((est.value - expect).abs() < 1e-12);
        assert!((est.value - 0.5).abs() < 0.06);

        // Trace is nonincreasing for these monotone families.
        for w in est.trace.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }

        let f = CoefficientFamily::finite(1, vec![(v(&[3]), 0.25)]).unwrap();
        let est = f.gamma_a_estimate(4.0, 100.0).unwrap();
        assert!(est.empty);
        assert!(est.value.is_infinite());
    }

    #[test]
    fn sparsity_examples() {
        let p = lacunary2d();
        let r = (1u64 << 20) as f64;
        let est = p.sparsity_exponent(r).unwrap();
        // 20 powers of two below 2^20, counted with both signs.
        assert!((est.value - (40f64).ln() / r.ln()).abs() < 1e-12);
        assert!((est.value - 0.27).abs() < 0.02);
        let trend = p.sparsity_trend(r, 5).unwrap();
        assert!(trend.sparse);

        let h = CoefficientFamily::hecke(2.0).unwrap();
        let est = h.sparsity_exponent(1e3).unwrap();
        assert!((est.value - 1.0).abs() < 0.15);
        assert!(!h.sparsity_trend(1e3, 5).unwrap().sparse);

        let f = CoefficientFamily::finite(
            1,
            vec![(v(&[1]), 0.1), (v(&[2]), 0.1), (v(&[5]), 0.1), (v(&[9]), 0.1)],
        )
        .unwrap();
        let est = f.sparsity_exponent(1e6).unwrap();
        assert!((est.value - (8f64).ln() / (1e6f64).ln()).abs() < 1e-12);
        assert!(est.value < 0.16);
        assert!(f.sparsity_trend(1e6, 5).unwrap().sparse);
    }

    #[test]
    fn sparsity_union_stability() {
        // #(Q1 ∪ Q2 ∩ B) ≤ #Q1 + #Q2 gives the finite-union bound
        // exp(union) ≤ max(exp1, exp2) + log2/logR.
        let p1 = CoefficientFamily::power_lacunary(2, 2, v(&[1, 0]), 0.5).unwrap();
        let p2 = CoefficientFamily::power_lacunary(2, 3, v(&[0, 1]), 0.7).unwrap();
        let r = (1u64 << 16) as f64;
        let c1 = p1.support_count(r);
        let c2 = p2.support_count(r);
        let e1 = p1.sparsity_exponent(r).unwrap().value;
        let e2 = p2.sparsity_exponent(r).unwrap().value;
        let union_exp = (c1 + c2).ln() / r.ln();
        assert!(union_exp <= e1.max(e2) + LN_2 / r.ln() + 1e-12);
    }

    #[test]
    fn slow_decay_examples() {
        // aₙ = ½(1+ln n)^{-2} on powers of two: the decay ratio
        // 2·ln(1+ln n)/ln n tends to 0 but is ~0.34 at R = 2^30; the test
        // asserts the computed value and the downward trend across R.
        let pts: Vec<(LatticeVector, f64)> = (1..=40u32)
            .map(|k| {
                let n = 2f64.powi(k as i32);
                (v(&[(1u64 << k) as i64]), 0.5 * (1.0 + n.ln()).powi(-2))
            })
            .collect();
        let fam = CoefficientFamily::finite(1, pts.clone()).unwrap();
        let q_set: Vec<LatticeVector> = pts.iter().map(|(n, _)| n.clone()).collect();

        let r30 = fam.slow_decay_test(&q_set, (1u64 << 30) as f64, 0.4).unwrap();
        assert_eq!(r30.slow, Some(true));
        assert!(r30.witness.is_some());
        let r20 = fam.slow_decay_test(&q_set, (1u64 << 20) as f64, 0.4).unwrap();
        assert!(r30.ratio.unwrap() < r20.ratio.unwrap());

        // Hecke has γₐ = β: never slow.
        let h = CoefficientFamily::hecke(2.0).unwrap();
        let q_set: Vec<LatticeVector> = (1..=1024i64).map(|n| v(&[n])).collect();
        let res = h.slow_decay_test(&q_set, 1024.0 * 1024.0, 0.05).unwrap();
        assert_eq!(res.slow, Some(false));
        assert!(res.ratio.unwrap() > 1.9);

        let z = CoefficientFamily::zero(1);
        let res = z.slow_decay_test(&q_set, 1e6, 0.05).unwrap();
        assert_eq!(res.slow, None);
    }

    #[test]
    fn json_round_trip() {
        let cases = [
            r#"{"d":2,"kind":"power_lacunary","base":2,"direction":[1,0],"gamma":0.5}"#,
            r#"{"d":1,"kind":"hecke","beta":2.0}"#,
            r#"{"d":2,"kind":"finite","entries":[[[1,2],0.5]]}"#,
            r#"{"d":1,"kind":"l_adic","l":2,"alpha":2.0}"#,
            r#"{"d":1,"kind":"f_beta","beta":1.7}"#,
        ];
        for s in cases {
            let f = CoefficientFamily::from_json(s).unwrap();
            let back = CoefficientFamily::from_json(&f.to_json()).unwrap();
            assert_eq!(f, back);
        }
        assert!(CoefficientFamily::from_json(r#"{"d":1,"kind":"hecke","beta":0.9}"#).is_err());
        assert!(CoefficientFamily::from_json(r#"{"d":2,"kind":"hecke","beta":2.0}"#).is_err());
    }

    #[test]
    fn tail_envelopes_dominate_partial_tails() {
        let h = CoefficientFamily::hecke(2.0).unwrap();
        // Direct sum of the next 10^5 terms must sit below the bound.
        for r in [10.0, 100.0, 1000.0] {
            let bound = h.l1_tail(r);
            let direct: f64 = ((r as u64 + 1)..(r as u64 + 100_000))
                .map(|n| 0.5 * (n as f64).powi(-2))
                .sum();
            assert!(direct < bound, "r = {r}: {direct} !< {bound}");
        }
        let p = lacunary2d();
        let bound = p.ray_tail_l1(&v(&[1, 0]), 5);
        let direct: f64 = (0..40u32)
            .map(|k| 1u64 << k)
            .filter(|&s| s >= 5)
            .map(|s| 0.5 * ((s as f64)).powf(-0.5))
            .sum();
        assert!(direct <= bound + 1e-15);
    }

    #[test]
    fn zeta_values() {
        assert!((zeta(2.0) - std::f64::consts::PI * std::f64::consts::PI / 6.0).abs() < 1e-12);
        assert!((zeta(4.0) - 1.0823232337111382).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn oddness(c0 in -60i64..60, c1 in -60i64..60, pick in 0usize..4) {
            prop_assume!(c0 != 0 || c1 != 0);
            let fam = match pick {
                0 => lacunary2d(),
                1 => CoefficientFamily::finite(2, vec![(v(&[1, 2]), 0.5), (v(&[3, -1]), -0.25)]).unwrap(),
                2 => CoefficientFamily::power_lacunary(2, 3, v(&[0, 1]), 1.0).unwrap(),
                _ => CoefficientFamily::finite(2, vec![(v(&[2, 0]), 1.5)]).unwrap(),
            };
            let n = v(&[c0, c1]);
            let plus = fam.value_at(&n).unwrap();
            let minus = fam.value_at(&n.neg()).unwrap();
            prop_assert_eq!(plus, -minus);
        }

        #[test]
        fn oddness_1d(n in 1i64..5000, pick in 0usize..3) {
            let fam = match pick {
                0 => CoefficientFamily::hecke(2.0).unwrap(),
                1 => CoefficientFamily::l_adic(2, 2.0).unwrap(),
                _ => CoefficientFamily::f_beta(1.7).unwrap(),
            };
            let nv = v(&[n]);
            prop_assert_eq!(fam.value_at(&nv).unwrap(), -fam.value_at(&nv.neg()).unwrap());
        }
    }
}
