//! Pointwise and grid evaluation of partial sums `f^N`, oscillations over
//! shrinking balls, and jump-magnitude estimation.
//!
//! Ball sampling uses a fixed-seed Kronecker (low-discrepancy) sequence, so
//! every estimate here is deterministic and reproducible. Sampled suprema are
//! lower bounds of the true oscillation by construction; reports expose that
//! one-sidedness instead of correcting for it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientFamily, SupportView};
use crate::error::{Error, Result};

/// Centered sawtooth `{t} = t − ⌊t⌋ − ½` off integers, 0 on integers.
/// Integer detection is an exact comparison: arguments are `n·x` with
/// integer `n`, so the zero case fires only when the dot product is exactly
/// representable on the hyperplane.
pub fn sawtooth(t: f64) -> f64 {
    if t == t.round() {
        0.0
    } else {
        t - t.floor() - 0.5
    }
}

/// Rectangular evaluation grid: half-open boxes `[origin, origin + extent)`
/// with `resolution` nodes per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec<f64>,
    pub extent: Vec<f64>,
    pub resolution: Vec<usize>,
}

/// Grids refuse to enumerate more than this many nodes.
pub const DEFAULT_GRID_CAP: usize = 100_000_000;

impl GridSpec {
    pub fn new(origin: Vec<f64>, extent: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        let g = GridSpec {
            origin,
            extent,
            resolution,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.origin.len();
        if d == 0 || self.extent.len() != d || self.resolution.len() != d {
            return Err(Error::invalid("grid axes must agree in dimension"));
        }
        if self.resolution.iter().any(|&c| c < 2) {
            return Err(Error::invalid("grid needs at least 2 nodes per axis"));
        }
        if self.extent.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::invalid("grid extent must be positive"));
        }
        let cells: usize = self
            .resolution
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .ok_or_else(|| Error::resource("grid cell count overflows"))?;
        if cells > DEFAULT_GRID_CAP {
            return Err(Error::resource(format!(
                "grid of {cells} cells exceeds cap {DEFAULT_GRID_CAP}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn total_nodes(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn step(&self, axis: usize) -> f64 {
        self.extent[axis] / self.resolution[axis] as f64
    }

    /// Node coordinates for a flat index; the last axis varies fastest.
    pub fn node(&self, mut index: usize) -> Vec<f64> {
        let d = self.dim();
        let mut idx = vec![0usize; d];
        for axis in (0..d).rev() {
            idx[axis] = index % self.resolution[axis];
            index /= self.resolution[axis];
        }
        (0..d)
            .map(|axis| self.origin[axis] + idx[axis] as f64 * self.step(axis))
            .collect()
    }
}

/// A truncated evaluation `f^N(x)` together with the worst-case truncation
/// error `|f(x) − f^N(x)|`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PartialSum {
    pub value: f64,
    pub tail_bound: f64,
}

/// `f^N(x) = Σ_{|n| ≤ N} aₙ{n·x}`, folded over ± pairs
/// (`aₙ{n·x} + a₋ₙ{−n·x} = 2aₙ{n·x}`).
pub fn partial_sum(a: &CoefficientFamily, n_trunc: f64, x: &[f64]) -> Result<PartialSum> {
    if x.len() != a.dim() {
        return Err(Error::invalid("evaluation point dimension mismatch"));
    }
    let value = match a.support_view(n_trunc)? {
        SupportView::DenseScalar { n_max } => {
            let x0 = x[0];
            let mut acc = 0.0;
            for n in 1..=n_max {
                acc += a.scalar_value(n) * sawtooth(n as f64 * x0);
            }
            acc
        }
        SupportView::Points(pts) => pts
            .iter()
            .map(|(n, v)| v * sawtooth(n.dot(x)))
            .sum(),
    };
    Ok(PartialSum {
        value: 2.0 * value,
        tail_bound: a.l1_tail(n_trunc),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GridEval {
    pub grid: GridSpec,
    pub n_trunc: f64,
    /// Node values in flat node order (last axis fastest).
    pub values: Vec<f64>,
    /// Truncation error bound shared by every node.
    pub tail_bound: f64,
}

/// `f^N` on every grid node. Same per-node contract as [`partial_sum`];
/// nodes are independent and evaluated in parallel, output order is the
/// deterministic flat node order.
pub fn grid_eval(a: &CoefficientFamily, n_trunc: f64, grid: &GridSpec) -> Result<GridEval> {
    grid.validate()?;
    if grid.dim() != a.dim() {
        return Err(Error::invalid("grid dimension does not match the family"));
    }
    // Materialize the support once; per-node work is then a plain fold.
    enum Basis {
        Dense(Vec<f64>),
        Points(Vec<(Vec<i64>, f64)>),
    }
    let basis = match a.support_view(n_trunc)? {
        SupportView::DenseScalar { n_max } => {
            let coeffs: Vec<f64> = (1..=n_max).map(|n| a.scalar_value(n)).collect();
            Basis::Dense(coeffs)
        }
        SupportView::Points(pts) => Basis::Points(
            pts.into_iter()
                .map(|(n, v)| (n.coords().to_vec(), v))
                .collect(),
        ),
    };
    let values: Vec<f64> = (0..grid.total_nodes())
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let acc = match &basis {
                Basis::Dense(coeffs) => {
                    let x0 = x[0];
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, &c)| c * sawtooth((k + 1) as f64 * x0))
                        .sum::<f64>()
                }
                Basis::Points(pts) => pts
                    .iter()
                    .map(|(n, v)| {
                        let dot: f64 = n.iter().zip(&x).map(|(&c, &xi)| c as f64 * xi).sum();
                        v * sawtooth(dot)
                    })
                    .sum::<f64>(),
            };
            2.0 * acc
        })
        .collect();
    Ok(GridEval {
        grid: grid.clone(),
        n_trunc,
        values,
        tail_bound: a.l1_tail(n_trunc),
    })
}

/// Deterministic low-discrepancy samples of the closed ball `B(center, r)`:
/// a Kronecker sequence on the bounding box, filtered to the ball.
pub fn ball_samples(center: &[f64], r: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    const ALPHA_PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    let d = center.len();
    let alphas: Vec<f64> = (0..d).map(|k| ALPHA_PRIMES[k % 8].sqrt().fract()).collect();
    let offset = seed.wrapping_mul(977) as f64;
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        i += 1;
        let y: Vec<f64> = (0..d)
            .map(|k| {
                let u = ((i as f64 + offset) * alphas[k]).fract();
                center[k] + (2.0 * u - 1.0) * r
            })
            .collect();
        let dist2: f64 = y
            .iter()
            .zip(center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if dist2 <= r * r {
            out.push(y);
        }
    }
    out
}

/// Truncation schedule for oscillation estimates: geometric in `N` from
/// `n_start`, capped at `n_cap`, refined until the truncation error is
/// below `tol_frac` of the running oscillation estimate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OscillationOptions {
    pub n_start: f64,
    pub n_cap: f64,
    pub tol_frac: f64,
    pub samples_per_ball: usize,
    pub seed: u64,
}

impl Default for OscillationOptions {
    fn default() -> Self {
        OscillationOptions {
            n_start: 1024.0,
            n_cap: (1u64 << 24) as f64,
            tol_frac: 0.01,
            samples_per_ball: 128,
            seed: 0,
        }
    }
}

/// What the `N` schedule must resolve at a given ball.
pub(crate) enum OscTarget<'a> {
    /// The raw oscillation of `f^N`.
    Raw,
    /// The oscillation after removing an affine map fitted on these samples;
    /// the fitted coefficients are reported back.
    DetrendSelf,
    /// The oscillation after removing a fixed affine map
    /// `c[0] + Σ c[k](x_k − x0_k)`.
    DetrendFixed(&'a [f64]),
}

/// Sampled oscillation of `f^N` over one ball, after the `N` schedule.
pub(crate) struct RadiusOsc {
    pub n_used: f64,
    pub tail: f64,
    /// Oscillation of the scheduled target (raw or detrended).
    pub osc: f64,
    pub low_confidence: bool,
    /// Affine coefficients fitted by `DetrendSelf`.
    pub affine: Option<Vec<f64>>,
}

fn affine_residual_osc(x0: &[f64], positions: &[Vec<f64>], values: &[f64], c: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (p, v) in positions.iter().zip(values) {
        let trend: f64 = c[0]
            + c[1..]
                .iter()
                .zip(p.iter().zip(x0))
                .map(|(ck, (pk, xk))| ck * (pk - xk))
                .sum::<f64>();
        let res = v - trend;
        lo = lo.min(res);
        hi = hi.max(res);
    }
    hi - lo
}

pub(crate) fn osc_at_radius(
    a: &CoefficientFamily,
    x0: &[f64],
    r: f64,
    opts: &OscillationOptions,
    target: OscTarget<'_>,
) -> Result<RadiusOsc> {
    let positions = ball_samples(x0, r, opts.samples_per_ball, opts.seed);
    let mut n = opts.n_start;
    loop {
        let mut values = Vec::with_capacity(positions.len());
        let mut tail = 0.0;
        for p in &positions {
            let ps = partial_sum(a, n, p)?;
            tail = ps.tail_bound;
            values.push(ps.value);
        }
        let (osc, affine) = match &target {
            OscTarget::Raw => {
                let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (hi - lo, None)
            }
            OscTarget::DetrendSelf => {
                let c = crate::regularity::fit_affine_samples(x0, &positions, &values)?;
                let osc = affine_residual_osc(x0, &positions, &values, &c);
                (osc, Some(c))
            }
            OscTarget::DetrendFixed(c) => {
                (affine_residual_osc(x0, &positions, &values, c), None)
            }
        };
        // Detrended values inherit the truncation error twice over (once
        // directly, once through the fitted trend), hence the extra factor.
        let noise = match &target {
            OscTarget::Raw => 2.0 * tail,
            _ => 4.0 * tail,
        };
        let converged = noise <= opts.tol_frac * osc || tail == 0.0;
        let done = converged || n >= opts.n_cap || a.support_view(n * 2.0).is_err();
        if done {
            return Ok(RadiusOsc {
                n_used: n,
                tail,
                osc,
                low_confidence: !converged,
                affine,
            });
        }
        n *= 2.0;
    }
}

/// Oscillation of the series over shrinking balls around `x0`.
#[derive(Clone, Debug, Serialize)]
pub struct OscillationReport {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    /// Sampled `sup − inf` of `f^N` per radius; nested sampling keeps the
    /// sequence monotone nonincreasing as the radius shrinks.
    pub osc_values: Vec<f64>,
    pub partial_sum_n: Vec<f64>,
    pub tail_bounds: Vec<f64>,
    pub low_confidence: Vec<bool>,
}

pub fn oscillation(
    a: &CoefficientFamily,
    x0: &[f64],
    radii: &[f64],
    opts: &OscillationOptions,
) -> Result<OscillationReport> {
    if x0.len() != a.dim() {
        return Err(Error::invalid("oscillation center dimension mismatch"));
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|&r| r <= 0.0)
    {
        return Err(Error::invalid("radii must be positive and strictly decreasing"));
    }
    if opts.samples_per_ball < 64 {
        return Err(Error::invalid("oscillation needs at least 64 samples per ball"));
    }
    let mut osc_values = Vec::with_capacity(radii.len());
    let mut partial_sum_n = Vec::with_capacity(radii.len());
    let mut tail_bounds = Vec::with_capacity(radii.len());
    let mut low_confidence = Vec::with_capacity(radii.len());
    for &r in radii {
        let ro = osc_at_radius(a, x0, r, opts, OscTarget::Raw)?;
        osc_values.push(ro.osc);
        partial_sum_n.push(ro.n_used);
        tail_bounds.push(ro.tail);
        low_confidence.push(ro.low_confidence);
    }
    // Samples of a smaller ball are valid samples of every larger ball, so
    // folding them in enforces monotonicity without biasing the estimate.
    for i in (0..osc_values.len().saturating_sub(1)).rev() {
        if osc_values[i] < osc_values[i + 1] {
            osc_values[i] = osc_values[i + 1];
        }
    }
    Ok(OscillationReport {
        center: x0.to_vec(),
        radii: radii.to_vec(),
        osc_values,
        partial_sum_n,
        tail_bounds,
        low_confidence,
    })
}

/// Extrapolated jump magnitude at `x0`: the oscillation at the smallest
/// radius, with the preceding radius as a trend diagnostic. On a single
/// discontinuity hyperplane this converges to the jump size `|A_q|`.
#[derive(Clone, Debug, Serialize)]
pub struct JumpMagnitudeEstimate {
    pub value: f64,
    /// Difference between the last two oscillation values; near zero when
    /// the limit has stabilized.
    pub trend: f64,
    pub report: OscillationReport,
}

pub fn jump_magnitude_estimate(
    a: &CoefficientFamily,
    x0: &[f64],
    radii: &[f64],
    opts: &OscillationOptions,
) -> Result<JumpMagnitudeEstimate> {
    let report = oscillation(a, x0, radii, opts)?;
    let value = *report.osc_values.last().unwrap();
    let trend = if report.osc_values.len() >= 2 {
        report.osc_values[report.osc_values.len() - 2] - value
    } else {
        0.0
    };
    Ok(JumpMagnitudeEstimate {
        value,
        trend,
        report,
    })
}
