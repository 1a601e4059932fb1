//! Diophantine distances to rational hyperplanes, discontinuity-set queries,
//! and pointwise Hölder exponents: the closed-formula path (valid for sparse,
//! non-jump-canceling families), the jump-based upper bound, and an
//! independent empirical oracle from sampled oscillations.
//!
//! No finite computation certifies a liminf; every exponent here is a shell
//! infimum over `R₀ ≤ |n| < R` and is reported together with its shell.

use serde::{Serialize, Serializer};

use crate::arith::{self, HyperplaneIndex, LatticeVector};
use crate::coeffs::{CoefficientFamily, SupportView};
use crate::error::{Error, Result};
use crate::eval::{self, OscillationOptions};
use crate::transforms::{self, LatticeMap};

/// Distances below this (measured on `|q·x₀ − p|`, before dividing by `|q|`)
/// are treated as exact zeros: the point lies on the hyperplane.
pub const HYPERPLANE_TOL: f64 = 1e-12;

/// `δₙ(x₀) = dist(n·x₀, ℤ) / |n|`: distance from `x₀` to the nearest
/// hyperplane with normal `n`, over all integer offsets.
pub fn delta_n(x0: &[f64], n: &LatticeVector) -> Result<f64> {
    if n.is_zero() {
        return Err(Error::invalid("delta_n needs a nonzero frequency"));
    }
    if n.dim() != x0.len() {
        return Err(Error::invalid("delta_n dimension mismatch"));
    }
    let y = n.dot(x0);
    Ok((y - y.round()).abs() / n.norm())
}

/// Nearest integer to `y` coprime with `g`, with the distance numerator.
/// The window doubles until the found candidate provably beats everything
/// outside; termination is guaranteed because ±1 are always coprime.
fn nearest_coprime(y: f64, g: u64, k0: i64) -> (f64, i64) {
    let center = y.round() as i64;
    if g == 1 {
        return ((y - center as f64).abs(), center);
    }
    let mut window = k0.max(1);
    loop {
        let mut best: Option<(f64, i64)> = None;
        for p in (center - window)..=(center + window) {
            if arith::gcd(p.unsigned_abs(), g) != 1 {
                continue;
            }
            let d = (y - p as f64).abs();
            match best {
                Some((bd, bp)) if bd < d || (bd == d && bp <= p) => {}
                _ => best = Some((d, p)),
            }
        }
        if let Some((d, p)) = best {
            // Anything outside the window is at distance > window - 1/2.
            if d <= window as f64 - 0.5 {
                return (d, p);
            }
        }
        window *= 2;
    }
}

/// `δ^𝒫_q(x₀) = (1/|q|)·inf_{p coprime to q} |q·x₀ − p|`: distance to the
/// nearest hyperplane of the canonical family of `q`. `k0` seeds the search
/// window for `p`.
pub fn delta_p_q(x0: &[f64], q: &LatticeVector, k0: i64) -> Result<f64> {
    Ok(delta_p_q_witness(x0, q, k0)?.0 / q.norm())
}

/// Same as [`delta_p_q`] but before the `1/|q|` normalization, with the
/// witnessing offset `p`.
pub fn delta_p_q_witness(x0: &[f64], q: &LatticeVector, k0: i64) -> Result<(f64, i64)> {
    if q.is_zero() {
        return Err(Error::invalid("delta_p_q needs a nonzero normal"));
    }
    if q.dim() != x0.len() {
        return Err(Error::invalid("delta_p_q dimension mismatch"));
    }
    let g = arith::gcd_vec(q)?;
    Ok(nearest_coprime(q.dot(x0), g, k0))
}

/// One known-discontinuity hit: the canonical hyperplane, its distance from
/// the query point, and the jump magnitude carried by its normal.
#[derive(Clone, Debug, Serialize)]
pub struct DiscontinuityHit {
    pub hyperplane: HyperplaneIndex,
    pub distance: f64,
    pub jump_magnitude: f64,
}

/// All hyperplanes `H_{p,q}` with `q` in the certain support of the
/// truncated jump map, within `radius` of `x₀`, sorted by distance. An empty
/// list means no *known* discontinuity at this truncation.
pub fn discontinuity_query(
    jumps: &LatticeMap,
    x0: &[f64],
    radius: f64,
) -> Result<Vec<DiscontinuityHit>> {
    let mut hits = Vec::new();
    for (q, a_q) in jumps.certain_support() {
        let (num, p) = delta_p_q_witness(x0, q, 2)?;
        let distance = num / q.norm();
        if distance <= radius {
            hits.push(DiscontinuityHit {
                hyperplane: HyperplaneIndex::new(p, q.clone())?,
                distance,
                jump_magnitude: a_q.abs(),
            });
        }
    }
    hits.sort_by(|a, b| {
        a.distance
            .partial_cmp(&b.distance)
            .unwrap()
            .then_with(|| a.hyperplane.q().cmp(b.hyperplane.q()))
    });
    Ok(hits)
}

/// Jump-based upper bound for the Hölder exponent at `x₀`: shell infimum of
/// `log|A_q| / log δ^𝒫_q(x₀)` over certain entries of the truncated jump
/// map. Returns 0 outright when `x₀` sits on a carried hyperplane, and +∞
/// when the shell holds no usable entry (the convention for exhausted finite
/// support).
pub fn holder_upper_bound(jumps: &LatticeMap, x0: &[f64], r0: f64, r: f64) -> Result<f64> {
    let mut inf = f64::INFINITY;
    for (q, a_q) in jumps.certain_support() {
        let norm = q.norm();
        if norm < r0 || norm >= r {
            continue;
        }
        let (num, _) = delta_p_q_witness(x0, q, 2)?;
        if num <= HYPERPLANE_TOL {
            return Ok(0.0);
        }
        let delta = num / norm;
        if delta >= 1.0 {
            // log δ ≥ 0 carries no upper-bound information.
            continue;
        }
        let ratio = (a_q.abs().ln() / delta.ln()).max(0.0);
        inf = inf.min(ratio);
    }
    Ok(inf)
}

/// Raw formula-side shell infimum of `log|aₙ| / log δₙ(x₀)` over the support
/// of the family, plus a flag marking that `x₀` lies (within tolerance) on a
/// hyperplane normal to a support point.
pub fn formula_shell_infimum(
    a: &CoefficientFamily,
    x0: &[f64],
    r0: f64,
    r: f64,
) -> Result<(f64, bool)> {
    let mut inf = f64::INFINITY;
    let mut on_support_hyperplane = false;
    let mut consider = |norm: f64, value: f64, y: f64| {
        if value == 0.0 {
            return;
        }
        let num = (y - y.round()).abs();
        if num <= HYPERPLANE_TOL {
            on_support_hyperplane = true;
            inf = 0.0;
            return;
        }
        let delta = num / norm;
        if delta >= 1.0 {
            return;
        }
        let ratio = (value.abs().ln() / delta.ln()).max(0.0);
        if ratio < inf {
            inf = ratio;
        }
    };
    match a.support_view(r)? {
        SupportView::DenseScalar { n_max } => {
            let from = (r0.ceil() as u64).max(1);
            let x = x0[0];
            for n in from..n_max.saturating_add(1) {
                let nf = n as f64;
                if nf >= r {
                    break;
                }
                consider(nf, a.scalar_value(n), nf * x);
            }
        }
        SupportView::Points(pts) => {
            for (n, v) in &pts {
                let norm = n.norm();
                if norm < r0 || norm >= r {
                    continue;
                }
                consider(norm, *v, n.dot(x0));
            }
        }
    }
    Ok((inf, on_support_hyperplane))
}

/// How much of an [`ExponentEstimate`] is actually claimed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentValidity {
    /// Sparse and not jump-canceling at this truncation: the formula value
    /// is the exponent estimate.
    Formula,
    /// Preconditions failed; only the jump-based upper bound is claimed.
    UpperBoundOnly,
}

fn ser_ext_real<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// Pointwise exponent estimate at one probe point. Infinite values (empty
/// shells over finite support) serialize as the string `"inf"`.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentEstimate {
    pub point: Vec<f64>,
    /// Formula-side estimate, capped by the truncated γₐ; equals 0 on a
    /// known discontinuity.
    #[serde(serialize_with = "ser_ext_real")]
    pub formula_value: f64,
    /// Uncapped formula-side shell infimum, for diagnostics.
    #[serde(serialize_with = "ser_ext_real")]
    pub formula_raw: f64,
    /// Jump-based bound from the truncated `A` map on its own shell.
    #[serde(serialize_with = "ser_ext_real")]
    pub upper_bound_value: f64,
    pub empirical_value: Option<f64>,
    #[serde(serialize_with = "ser_ext_real")]
    pub gamma_cap: f64,
    pub shells_used: (f64, f64),
    pub upper_bound_shell: (f64, f64),
    pub on_discontinuity: Option<HyperplaneIndex>,
    /// `x₀` sits on a hyperplane normal to a support point, but not on a
    /// known discontinuity: the formula leaves the exponent undetermined
    /// there.
    pub on_maximal_hyperplane: bool,
    pub validity: ExponentValidity,
    pub notes: Vec<String>,
    pub family_hash: String,
}

/// Knobs for [`holder_exponent`]. The jump map is built on its own (smaller)
/// shell: for dense scalar families the `A_q` scan costs `O(R·l_max)`.
#[derive(Clone, Debug)]
pub struct HolderOptions {
    pub ub_r0: f64,
    pub ub_r: f64,
    pub l_max: u64,
    /// Dyadic radii for the empirical oracle.
    pub scales: Vec<f64>,
    pub detrend: Detrend,
    pub osc: OscillationOptions,
}

impl Default for HolderOptions {
    fn default() -> Self {
        HolderOptions {
            ub_r0: 32.0,
            ub_r: 4096.0,
            l_max: 2000,
            scales: (3..=10).map(|j| 2f64.powi(-j)).collect(),
            detrend: Detrend::None,
            osc: OscillationOptions::default(),
        }
    }
}

/// Pointwise Hölder exponent at `x₀` from the closed formulas, with the
/// jump-based upper bound and (optionally) the empirical oracle.
///
/// The formula path is claimed only when the family passes the sparsity
/// trend test and is not asymptotically jump canceling; otherwise the
/// estimate degrades to upper-bound-only with an explicit validity flag.
pub fn holder_exponent(
    a: &CoefficientFamily,
    x0: &[f64],
    r0: f64,
    r: f64,
    with_empirical: bool,
    opts: &HolderOptions,
) -> Result<ExponentEstimate> {
    if x0.len() != a.dim() {
        return Err(Error::invalid("exponent point dimension mismatch"));
    }
    if !(r0 >= 1.0 && r0 < r) {
        return Err(Error::invalid("holder_exponent requires 1 <= R0 < R"));
    }
    let mut notes = Vec::new();

    let jumps = transforms::jump_operator(a, opts.ub_r, opts.l_max)?;
    let maximal = transforms::maximal_operator(a, opts.ub_r, opts.l_max)?;
    let theta = transforms::theta_from_maps(&jumps, &maximal, (opts.ub_r.sqrt(), opts.ub_r))?;
    let trend = a.sparsity_trend(r, 5)?;
    let formula_claimed = trend.sparse && !theta.jump_canceling;
    if !trend.sparse {
        notes.push("support fails the sparsity trend test".into());
    }
    if theta.jump_canceling {
        notes.push("family is asymptotically jump canceling at this truncation".into());
    }

    let on_disc = discontinuity_query(&jumps, x0, 0.0)?
        .into_iter()
        .find(|h| h.distance <= HYPERPLANE_TOL);

    let gamma = a.gamma_a_estimate(r0, r)?;
    let (formula_raw, on_max_hyp) = formula_shell_infimum(a, x0, r0, r)?;
    let upper_bound_value = holder_upper_bound(&jumps, x0, opts.ub_r0, opts.ub_r)?;

    let formula_value = if on_disc.is_some() {
        0.0
    } else {
        formula_raw.min(gamma.value)
    };
    if on_max_hyp && on_disc.is_none() {
        notes.push(
            "x0 lies on a support hyperplane without a certain jump: exponent undetermined by the formula"
                .into(),
        );
    }
    if formula_value > upper_bound_value + 1e-9 {
        notes.push(
            "formula shell-inf exceeds the jump-based bound at this truncation (shells differ)"
                .into(),
        );
    }

    let empirical = if with_empirical {
        let fit = empirical_exponent(a, x0, &opts.scales, opts.detrend, &opts.osc)?;
        if fit.flagged {
            notes.push("empirical oracle flagged low-confidence scales".into());
        }
        Some(fit.slope)
    } else {
        None
    };

    Ok(ExponentEstimate {
        point: x0.to_vec(),
        formula_value,
        formula_raw,
        upper_bound_value,
        empirical_value: empirical,
        gamma_cap: gamma.value,
        shells_used: (r0, r),
        upper_bound_shell: (opts.ub_r0, opts.ub_r),
        on_discontinuity: on_disc.map(|h| h.hyperplane),
        on_maximal_hyperplane: on_max_hyp,
        validity: if formula_claimed {
            ExponentValidity::Formula
        } else {
            ExponentValidity::UpperBoundOnly
        },
        notes,
        family_hash: format!("{:016x}", a.config_hash()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Detrend {
    None,
    /// Subtract the least-squares affine map fitted on the largest ball;
    /// needed when the expected exponent exceeds 1 (the polynomial part of
    /// the local expansion is linear there).
    Linear,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleDiagnostic {
    pub radius: f64,
    pub osc: f64,
    pub n_used: f64,
    pub tail: f64,
    pub low_confidence: bool,
}

/// Least-squares exponent from sampled oscillations across dyadic scales.
#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalExponent {
    pub slope: f64,
    pub intercept: f64,
    /// RMS deviation of `log osc` from the fitted line.
    pub residual: f64,
    pub detrend: Detrend,
    pub flagged: bool,
    pub per_scale: Vec<ScaleDiagnostic>,
}

/// Independent exponent oracle: slope of `log osc(B(x₀,r))` against `log r`
/// over the given scales, optionally after removing the best affine map
/// fitted over the largest ball.
pub fn empirical_exponent(
    a: &CoefficientFamily,
    x0: &[f64],
    scales: &[f64],
    detrend: Detrend,
    osc_opts: &OscillationOptions,
) -> Result<EmpiricalExponent> {
    if scales.len() < 5 || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid(
            "empirical exponent needs at least 5 decreasing dyadic scales",
        ));
    }
    // With detrending, the affine map is fitted over the largest ball (its
    // own N schedule targets the residual), then held fixed on all smaller
    // balls.
    let affine: Option<Vec<f64>> = match detrend {
        Detrend::None => None,
        Detrend::Linear => {
            let largest =
                eval::osc_at_radius(a, x0, scales[0], osc_opts, eval::OscTarget::DetrendSelf)?;
            Some(largest.affine.expect("DetrendSelf reports its fit"))
        }
    };

    let mut diags = Vec::with_capacity(scales.len());
    let mut oscs = Vec::with_capacity(scales.len());
    for &r in scales {
        let target = match &affine {
            None => eval::OscTarget::Raw,
            Some(c) => eval::OscTarget::DetrendFixed(c),
        };
        let ro = eval::osc_at_radius(a, x0, r, osc_opts, target)?;
        oscs.push(ro.osc);
        diags.push(ScaleDiagnostic {
            radius: r,
            osc: ro.osc,
            n_used: ro.n_used,
            tail: ro.tail,
            low_confidence: ro.low_confidence,
        });
    }
    // Monotone fold, as in `oscillation`.
    for i in (0..oscs.len().saturating_sub(1)).rev() {
        if oscs[i] < oscs[i + 1] {
            oscs[i] = oscs[i + 1];
        }
        diags[i].osc = oscs[i];
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (d, &o) in diags.iter().zip(&oscs) {
        if o > 0.0 {
            xs.push(d.radius.ln());
            ys.push(o.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::numeric("too few usable scales for a slope fit"));
    }
    let (slope, intercept, residual) = least_squares_fit(&xs, &ys);
    let flagged = diags.iter().any(|d| d.low_confidence) || xs.len() < scales.len();
    Ok(EmpiricalExponent {
        slope,
        intercept,
        residual,
        detrend,
        flagged,
        per_scale: diags,
    })
}

pub(crate) fn least_squares_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum::<f64>()
        / n;
    (slope, intercept, mse.sqrt())
}

/// Least-squares affine fit `v ≈ c0 + Σ c_k (x_k − x0_k)` by the normal
/// equations; `d ≤ 3` keeps the system tiny.
pub(crate) fn fit_affine_samples(
    x0: &[f64],
    positions: &[Vec<f64>],
    values: &[f64],
) -> Result<Vec<f64>> {
    let d = x0.len();
    let m = d + 1;
    let mut ata = vec![vec![0.0; m]; m];
    let mut atb = vec![0.0; m];
    for (p, &v) in positions.iter().zip(values) {
        let mut row = Vec::with_capacity(m);
        row.push(1.0);
        for k in 0..d {
            row.push(p[k] - x0[k]);
        }
        for i in 0..m {
            for j in 0..m {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * v;
        }
    }
    solve_dense(&mut ata, &mut atb)?;
    Ok(atb)
}

fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<()> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() < 1e-14 {
            return Err(Error::numeric("degenerate affine fit"));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        for k in (col + 1)..n {
            b[col] -= a[col][k] * b[k];
        }
        b[col] /= a[col][col];
    }
    Ok(())
}

/// κ estimate: shell supremum over `q ∈ Q` of
/// `log(inf_{p ∈ 𝒫(q)} |q·x₀ − p|) / log|q|`.
#[derive(Clone, Debug, Serialize)]
pub struct KappaEstimate {
    /// `None` when the shell held no candidate (indeterminate).
    pub value: Option<f64>,
    /// Some candidate sat on a hyperplane (log of zero distance); the sup
    /// is reported over the remaining candidates.
    pub zero_distance: Option<LatticeVector>,
    pub witness: Option<LatticeVector>,
    pub shell: (f64, f64),
}

pub fn kappa_estimate(
    x0: &[f64],
    q_set: &[LatticeVector],
    r0: f64,
    r: f64,
) -> Result<KappaEstimate> {
    let mut best: Option<(f64, LatticeVector)> = None;
    let mut zero_distance = None;
    for q in q_set {
        let norm = q.norm();
        if norm < r0 || norm >= r || norm <= 1.0 {
            continue;
        }
        let (num, _) = delta_p_q_witness(x0, q, 2)?;
        if num <= HYPERPLANE_TOL {
            zero_distance = Some(q.clone());
            continue;
        }
        let ratio = num.ln() / norm.ln();
        if best.as_ref().map_or(true, |(b, _)| ratio > *b) {
            best = Some((ratio, q.clone()));
        }
    }
    Ok(KappaEstimate {
        value: best.as_ref().map(|(v, _)| *v),
        zero_distance,
        witness: best.map(|(_, q)| q),
        shell: (r0, r),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularSetReport {
    pub regular: bool,
    /// The candidate set was exhausted below the shell: vacuously regular.
    pub vacuous: bool,
    pub margin: f64,
    pub worst: Option<(Vec<f64>, f64)>,
}

/// Sample-based regularity check of a frequency set: κ(x₀, Q) < 1 − margin
/// at every sample point.
pub fn is_regular_set(
    q_set: &[LatticeVector],
    sample_points: &[Vec<f64>],
    r0: f64,
    r: f64,
    margin: f64,
) -> Result<RegularSetReport> {
    let mut worst: Option<(Vec<f64>, f64)> = None;
    let mut any = false;
    for x0 in sample_points {
        let est = kappa_estimate(x0, q_set, r0, r)?;
        if let Some(v) = est.value {
            any = true;
            if worst.as_ref().map_or(true, |(_, w)| v > *w) {
                worst = Some((x0.clone(), v));
            }
        }
    }
    if !any {
        return Ok(RegularSetReport {
            regular: true,
            vacuous: true,
            margin,
            worst: None,
        });
    }
    let worst_v = worst.as_ref().map(|(_, v)| *v).unwrap();
    Ok(RegularSetReport {
        regular: worst_v < 1.0 - margin,
        vacuous: false,
        margin,
        worst,
    })
}
