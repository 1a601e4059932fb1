//! Independent numerical oracles for the test suites: a standalone ζ
//! evaluation, piecewise Gauss–Legendre quadrature of `∫ f^N sin(2π m·x)`
//! against which the divisor-sum Fourier formula is checked, and dyadic
//! distance diagnostics for probe points.
//!
//! Nothing here is part of the library API; the `testkit` feature exists for
//! the workspace's own test targets.

use crate::coeffs::{CoefficientFamily, SupportView};
use crate::eval;

/// ζ(s) for s > 1 by partial sum plus integral remainder with the first
/// Euler–Maclaurin corrections; absolute error well below 1e-12.
pub fn zeta_em(s: f64) -> f64 {
    let n = 50_000u64;
    let nf = n as f64;
    let mut sum = 0.0;
    for k in 1..=n {
        sum += (k as f64).powf(-s);
    }
    sum + nf.powf(1.0 - s) / (s - 1.0) - nf.powf(-s) / 2.0 + s * nf.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * nf.powf(-s - 3.0) / 720.0
}

// 16-point Gauss-Legendre rule on [-1, 1] (positive abscissas; mirror for
// the negative half).
const GL16_X: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_W: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

fn gl16<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..8 {
        acc += GL16_W[i] * (f(mid + half * GL16_X[i]) + f(mid - half * GL16_X[i]));
    }
    acc * half
}

/// Integrate a piecewise-smooth function over [0, 1) given interior
/// breakpoints, splitting each piece so the oscillation scale `freq` is
/// resolved.
fn integrate_piecewise<F: FnMut(f64) -> f64>(breaks: &[f64], freq: f64, mut f: F) -> f64 {
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > 0.0 && x < 1.0)
        .collect();
    pts.push(0.0);
    pts.push(1.0);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let chunks = (((b - a) * freq.max(1.0) * 4.0).ceil() as usize).max(1);
        let step = (b - a) / chunks as f64;
        for c in 0..chunks {
            let lo = a + c as f64 * step;
            total += gl16(lo, lo + step, &mut f);
        }
    }
    total
}

/// Truncated support of a 1-D family as scalar pairs `(n, aₙ)`, positive
/// representatives only.
fn support_1d(a: &CoefficientFamily, n_trunc: f64) -> Vec<(i64, f64)> {
    match a.support_view(n_trunc).expect("support within caps") {
        SupportView::DenseScalar { n_max } => (1..=n_max)
            .map(|n| (n as i64, a.scalar_value(n)))
            .filter(|&(_, v)| v != 0.0)
            .collect(),
        SupportView::Points(pts) => pts
            .into_iter()
            .map(|(n, v)| (n.coords()[0], v))
            .collect(),
    }
}

/// Quadrature oracle, d = 1: `∫₀¹ f^N(x) sin(2πmx) dx` with subdivision at
/// every jump `k/n` of the partial sum.
pub fn fourier_integral_1d(a: &CoefficientFamily, n_trunc: f64, m: i64) -> f64 {
    assert_eq!(a.dim(), 1);
    let support = support_1d(a, n_trunc);
    let mut breaks = Vec::new();
    for &(n, _) in &support {
        let n = n.unsigned_abs();
        for k in 0..n {
            breaks.push(k as f64 / n as f64);
        }
    }
    let two_pi_m = 2.0 * std::f64::consts::PI * m as f64;
    integrate_piecewise(&breaks, m.unsigned_abs() as f64, |x| {
        let fx: f64 = support
            .iter()
            .map(|&(n, v)| 2.0 * v * eval::sawtooth(n as f64 * x))
            .sum();
        fx * (two_pi_m * x).sin()
    })
}

/// Quadrature oracle, d = 2: `∫_{[0,1)²} f^N(x) sin(2π m·x) dx`.
///
/// The outer integrand `x₂ ↦ ∫ f^N(x₁,x₂) sin(...) dx₁` is smooth except at
/// jumps from frequencies with `n₁ = 0` (each inner sawtooth integrates over
/// a full period, so sliding breakpoints contribute no outer kinks).
pub fn fourier_integral_2d(a: &CoefficientFamily, n_trunc: f64, m: &[i64; 2]) -> f64 {
    assert_eq!(a.dim(), 2);
    let support: Vec<(i64, i64, f64)> = match a.support_view(n_trunc).expect("support within caps")
    {
        SupportView::Points(pts) => pts
            .into_iter()
            .map(|(n, v)| (n.coords()[0], n.coords()[1], v))
            .collect(),
        SupportView::DenseScalar { .. } => unreachable!("no dense 2-D families"),
    };
    let mut outer_breaks = Vec::new();
    for &(n1, n2, _) in &support {
        if n1 == 0 && n2 != 0 {
            let n = n2.unsigned_abs();
            for k in 0..n {
                outer_breaks.push(k as f64 / n as f64);
            }
        }
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    integrate_piecewise(&outer_breaks, (m[1].unsigned_abs() as f64).max(8.0), |x2| {
        // Inner 1-D integral at fixed x2, with breakpoints where any
        // n1 x1 + n2 x2 crosses an integer.
        let mut inner_breaks = Vec::new();
        for &(n1, n2, _) in &support {
            if n1 != 0 {
                let t = n2 as f64 * x2;
                let lo = (t + n1.min(0) as f64).floor() as i64 - 1;
                let hi = (t + n1.max(0) as f64).ceil() as i64 + 1;
                for k in lo..=hi {
                    let x1 = (k as f64 - t) / n1 as f64;
                    if (0.0..1.0).contains(&x1) {
                        inner_breaks.push(x1);
                    }
                }
            }
        }
        integrate_piecewise(&inner_breaks, m[0].unsigned_abs() as f64, |x1| {
            let fx: f64 = support
                .iter()
                .map(|&(n1, n2, v)| {
                    2.0 * v * eval::sawtooth(n1 as f64 * x1 + n2 as f64 * x2)
                })
                .sum();
            fx * (two_pi * (m[0] as f64 * x1 + m[1] as f64 * x2)).sin()
        })
    })
}

/// Extra binary depth of `2^j t` beyond level `j`:
/// `−log₂ dist(2^j t, ℤ) − j ... = −log₂(dist) − 0`, reported as the number
/// of bits by which the distance falls short of the generic `~1/2` scale.
/// Small values across a shell mean `t` is dyadically well-behaved there.
pub fn dyadic_deficit_bits(t: f64, j: i32) -> f64 {
    let y = 2f64.powi(j) * t;
    let dist = (y - y.round()).abs();
    -dist.log2()
}
