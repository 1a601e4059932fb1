//! Multifractal spectrum: the closed-form affine prediction
//! `d_f(h) = d − 1 + h/γₐ` on `[0, γₐ]` for sparse non-canceling families,
//! and a coarse-grained empirical estimator that bins per-node exponents and
//! box-counts each bin over dyadic scales.
//!
//! Box-counting over finitely many scales stands in for Hausdorff dimension;
//! the gap is acknowledged in every report rather than hidden, and the
//! declared tolerance for such estimates is ±0.4.

use rayon::prelude::*;
use serde::Serialize;

use crate::coeffs::{CoefficientFamily, RegularityProfile};
use crate::error::{Error, Result};
use crate::eval::{GridSpec, OscillationOptions};
use crate::regularity::{self, Detrend};
use crate::transforms;

/// The affine spectrum prediction for a family with decay exponent
/// `γₐ ∈ (0, ∞)` in dimension `d`: support `[0, γₐ]`, value
/// `d − 1 + h/γₐ`, packing dimension `d` on every singularity set.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectrumPrediction {
    pub gamma_a: f64,
    pub d: usize,
    pub packing_dim_singularity: usize,
}

impl SpectrumPrediction {
    pub fn new(gamma_a: f64, d: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::invalid("spectrum prediction needs d >= 1"));
        }
        if !(gamma_a > 0.0 && gamma_a.is_finite()) {
            return Err(Error::invalid(
                "spectrum prediction needs gamma_a in (0, inf); slow-decay and infinite-gamma regimes are handled by dedicated markers",
            ));
        }
        Ok(SpectrumPrediction {
            gamma_a,
            d,
            packing_dim_singularity: d,
        })
    }

    /// `d − 1 + h/γₐ` for `h ∈ [0, γₐ]`; `None` marks the empty iso-Hölder
    /// set beyond `γₐ`. At `h = 0` the value `d − 1` is also a lower bound
    /// for the dimension of the discontinuity set itself.
    pub fn value(&self, h: f64) -> Option<f64> {
        if !(0.0..=self.gamma_a).contains(&h) {
            return None;
        }
        Some(self.d as f64 - 1.0 + h / self.gamma_a)
    }

    pub fn support(&self) -> (f64, f64) {
        (0.0, self.gamma_a)
    }
}

/// Closed-form spectrum value, or `None` beyond the support.
pub fn theoretical_spectrum(gamma_a: f64, d: usize, h: f64) -> Result<Option<f64>> {
    Ok(SpectrumPrediction::new(gamma_a, d)?.value(h))
}

/// Degenerate regimes the affine prediction does not model.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum SpectrumRegime {
    Standard(SpectrumPrediction),
    /// γₐ = 0: the exponent vanishes everywhere.
    SlowDecayZeroExponent,
    /// γₐ = +∞ (e.g. finite support): outside the modeled scope.
    InfiniteGamma,
}

pub fn regime_for(profile: &RegularityProfile, d: usize) -> Result<SpectrumRegime> {
    Ok(match profile.gamma_a {
        None => SpectrumRegime::InfiniteGamma,
        Some(g) if profile.slow_decay || g <= 0.0 => SpectrumRegime::SlowDecayZeroExponent,
        Some(g) => SpectrumRegime::Standard(SpectrumPrediction::new(g, d)?),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentMethod {
    /// Formula shell infimum (fast; valid for sparse non-canceling families).
    Formula,
    /// Oscillation slope per node (slow; method-independent cross-check).
    Oscillation,
}

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    /// Bin width; `None` uses 0.1·γₐ.
    pub h_bin_width: Option<f64>,
    /// Boxes per axis for the box-count fit; `None` derives ≥ 3 dyadic
    /// scales from the grid resolution.
    pub box_scales: Option<Vec<usize>>,
    pub method: ExponentMethod,
    /// Shell for the per-node formula exponent.
    pub r0: f64,
    pub r: f64,
    /// Truncated jump map controls (hyperplane assignment).
    pub ub_r: f64,
    pub l_max: u64,
    /// Nodes within this distance of a known discontinuity hyperplane are
    /// assigned h = 0 before binning.
    pub disc_tol: f64,
    /// Scales for the oscillation method.
    pub osc_scales: Vec<f64>,
    pub osc: OscillationOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            h_bin_width: None,
            box_scales: None,
            method: ExponentMethod::Formula,
            r0: 2.0,
            r: (1u64 << 20) as f64,
            ub_r: 4096.0,
            l_max: 2000,
            disc_tol: 1e-6,
            osc_scales: (4..=9).map(|j| 2f64.powi(-j)).collect(),
            osc: OscillationOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumBin {
    pub h_center: f64,
    pub count: usize,
    /// Box-count dimension fit; `None` for empty bins.
    pub dimension: Option<f64>,
    /// `(boxes per axis, nonempty boxes)` per scale.
    pub box_counts: Vec<(usize, usize)>,
}

/// Histogram of per-node exponents with coarse box-count dimensions.
#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalSpectrum {
    pub grid: GridSpec,
    pub method: ExponentMethod,
    pub shell: (f64, f64),
    pub h_bin_width: f64,
    pub gamma_estimate: f64,
    pub bins: Vec<SpectrumBin>,
    /// Nodes whose exponent is +∞ at this truncation (zero families).
    pub infinite_count: usize,
    pub box_scales: Vec<usize>,
    /// Least-squares slope of dimension against h over populated bins, for
    /// comparison with the predicted `1/γₐ`.
    pub fitted_slope: Option<f64>,
}

/// Per-node exponents on a grid, binned by h with a box-count dimension per
/// bin. The estimator records everything needed to rerun it.
pub fn empirical_spectrum(
    a: &CoefficientFamily,
    region: &GridSpec,
    opts: &SpectrumOptions,
) -> Result<EmpiricalSpectrum> {
    region.validate()?;
    if region.dim() != a.dim() {
        return Err(Error::invalid("spectrum region dimension mismatch"));
    }
    let gamma = a.gamma_a_estimate(opts.r0, opts.r)?.value;
    let width = opts
        .h_bin_width
        .unwrap_or(if gamma.is_finite() { 0.1 * gamma } else { 0.1 });
    if !(width > 0.0) {
        return Err(Error::invalid("h bin width must be positive"));
    }

    let jumps = transforms::jump_operator(a, opts.ub_r, opts.l_max)?;

    let nodes = region.total_nodes();
    let exponents: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let x = region.node(i);
            // Deterministic h = 0 on known discontinuities.
            for (q, _) in jumps.certain_support() {
                let (num, _) = regularity::delta_p_q_witness(&x, q, 2)?;
                if num / q.norm() <= opts.disc_tol {
                    return Ok(0.0);
                }
            }
            match opts.method {
                ExponentMethod::Formula => {
                    let (raw, _) = regularity::formula_shell_infimum(a, &x, opts.r0, opts.r)?;
                    Ok(raw.min(gamma))
                }
                ExponentMethod::Oscillation => {
                    let fit = regularity::empirical_exponent(
                        a,
                        &x,
                        &opts.osc_scales,
                        Detrend::None,
                        &opts.osc,
                    )?;
                    Ok(fit.slope.max(0.0))
                }
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let box_scales = match &opts.box_scales {
        Some(s) => s.clone(),
        None => {
            let min_res = *region.resolution.iter().min().unwrap();
            let mut s = Vec::new();
            let mut b = (min_res / 16).max(2);
            while b <= min_res / 2 && s.len() < 4 {
                s.push(b);
                b *= 2;
            }
            if s.len() < 3 {
                return Err(Error::invalid(
                    "grid resolution too small for 3 dyadic box scales",
                ));
            }
            s
        }
    };

    let n_bins = if gamma.is_finite() {
        ((gamma / width).ceil() as usize + 2).max(1)
    } else {
        1
    };
    let mut bin_nodes: Vec<Vec<usize>> = vec![Vec::new(); n_bins];
    let mut infinite_count = 0usize;
    for (i, &h) in exponents.iter().enumerate() {
        if !h.is_finite() {
            infinite_count += 1;
            continue;
        }
        let b = ((h / width).floor() as usize).min(n_bins - 1);
        bin_nodes[b].push(i);
    }

    let bins: Vec<SpectrumBin> = bin_nodes
        .iter()
        .enumerate()
        .map(|(b, nodes_in_bin)| {
            let h_center = (b as f64 + 0.5) * width;
            if nodes_in_bin.is_empty() {
                return SpectrumBin {
                    h_center,
                    count: 0,
                    dimension: None,
                    box_counts: Vec::new(),
                };
            }
            let mut box_counts = Vec::with_capacity(box_scales.len());
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &bpa in &box_scales {
                let count = count_boxes(region, nodes_in_bin, bpa);
                box_counts.push((bpa, count));
                xs.push((bpa as f64).ln());
                ys.push((count as f64).ln());
            }
            let (slope, _, _) = regularity::least_squares_fit(&xs, &ys);
            SpectrumBin {
                h_center,
                count: nodes_in_bin.len(),
                dimension: Some(slope.clamp(0.0, region.dim() as f64 + 0.1)),
                box_counts,
            }
        })
        .collect();

    // Slope of dimension vs h over populated bins inside the support.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for bin in &bins {
        if let Some(dim) = bin.dimension {
            if gamma.is_finite() && bin.h_center <= gamma + width {
                xs.push(bin.h_center);
                ys.push(dim);
            }
        }
    }
    let fitted_slope = if xs.len() >= 2 {
        Some(regularity::least_squares_fit(&xs, &ys).0)
    } else {
        None
    };

    Ok(EmpiricalSpectrum {
        grid: region.clone(),
        method: opts.method,
        shell: (opts.r0, opts.r),
        h_bin_width: width,
        gamma_estimate: gamma,
        bins,
        infinite_count,
        box_scales,
        fitted_slope,
    })
}

/// Number of `bpa^d` grid-aligned boxes containing at least one marked node.
fn count_boxes(region: &GridSpec, node_ids: &[usize], bpa: usize) -> usize {
    let d = region.dim();
    let mut seen = std::collections::HashSet::with_capacity(node_ids.len());
    for &flat in node_ids {
        let mut index = flat;
        let mut key = 0usize;
        for axis in (0..d).rev() {
            let i = index % region.resolution[axis];
            index /= region.resolution[axis];
            let b = i * bpa / region.resolution[axis];
            key = key * bpa + b;
        }
        seen.insert(key);
    }
    seen.len()
}

#[derive(Clone, Debug, Serialize)]
pub struct HomogeneityReport {
    pub h: f64,
    /// Bin dimension (at the bin containing `h`) per region.
    pub per_region: Vec<Option<f64>>,
    pub per_region_count: Vec<usize>,
    /// Max pairwise dimension spread over regions where the bin is
    /// populated; `None` when fewer than two regions have data.
    pub spread: Option<f64>,
}

/// Compare the empirical bin dimension at exponent `h` across disjoint
/// regions. Homogeneous families should show a small spread.
pub fn homogeneity_report(
    a: &CoefficientFamily,
    regions: &[GridSpec],
    h: f64,
    opts: &SpectrumOptions,
) -> Result<HomogeneityReport> {
    if regions.len() < 2 {
        return Err(Error::invalid("homogeneity report needs at least 2 regions"));
    }
    let mut per_region = Vec::with_capacity(regions.len());
    let mut per_region_count = Vec::with_capacity(regions.len());
    for region in regions {
        let spec = empirical_spectrum(a, region, opts)?;
        let bin = spec
            .bins
            .iter()
            .find(|b| (b.h_center - h).abs() <= spec.h_bin_width / 2.0 + 1e-12);
        per_region.push(bin.and_then(|b| b.dimension));
        per_region_count.push(bin.map_or(0, |b| b.count));
    }
    let dims: Vec<f64> = per_region.iter().flatten().copied().collect();
    let spread = if dims.len() >= 2 {
        let max = dims.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = dims.iter().cloned().fold(f64::INFINITY, f64::min);
        Some(max - min)
    } else {
        None
    };
    Ok(HomogeneityReport {
        h,
        per_region,
        per_region_count,
        spread,
    })
}
