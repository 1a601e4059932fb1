//! Subcommand implementations: each loads the scenario, runs the library,
//! and writes deterministic CSV/JSON artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use serde_json::json;

use davenport_core::arith::LatticeVector;
use davenport_core::coeffs::CoefficientFamily;
use davenport_core::eval::{self, GridSpec, OscillationOptions};
use davenport_core::regularity::{self, Detrend, HolderOptions};
use davenport_core::sobolev;
use davenport_core::spectrum::{self, ExponentMethod, SpectrumOptions, SpectrumPrediction};
use davenport_core::transforms;

use crate::config::ScenarioConfig;
use crate::Overrides;

pub struct Scenario {
    pub config: ScenarioConfig,
    pub family: CoefficientFamily,
    pub out_dir: PathBuf,
    pub seed: u64,
}

pub fn load_scenario(path: &str, overrides: &Overrides) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {path}"))?;
    let config: ScenarioConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing config {path}"))?;
    let family: CoefficientFamily = serde_json::from_value(config.family.clone())
        .map_err(|e| anyhow!(davenport_core::Error::invalid(format!("family config: {e}"))))?;
    let out_dir = PathBuf::from(overrides.out.clone().unwrap_or_else(|| config.out_dir.clone()));
    let seed = overrides.seed.unwrap_or(config.seed);
    Ok(Scenario {
        config,
        family,
        out_dir,
        seed,
    })
}

fn ensure_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output dir {}", dir.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // canonicalize -0.0
        "0".to_string()
    } else if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

// ---------------------------------------------------------------- eval

pub fn cmd_eval(sc: &Scenario, overrides: &Overrides) -> Result<()> {
    let cfg = sc
        .config
        .eval
        .clone()
        .ok_or_else(|| anyhow!(davenport_core::Error::invalid("config has no `eval` section")))?;
    let mut grid = cfg.grid.clone();
    if let Some(res) = overrides.grid {
        grid.resolution = vec![res; grid.resolution.len()];
    }
    let n_trunc = overrides.n.unwrap_or(cfg.n_trunc);
    let result = eval::grid_eval(&sc.family, n_trunc, &grid)?;

    ensure_out(&sc.out_dir)?;
    let d = grid.dim();
    let mut csv = String::new();
    for k in 0..d {
        let _ = write!(csv, "x{},", k + 1);
    }
    csv.push_str("value,tail_bound\n");
    for (i, v) in result.values.iter().enumerate() {
        let x = grid.node(i);
        for xk in &x {
            let _ = write!(csv, "{},", fmt_f64(*xk));
        }
        let _ = writeln!(csv, "{},{}", fmt_f64(*v), fmt_f64(result.tail_bound));
    }
    fs::write(sc.out_dir.join("grid.csv"), csv)?;

    // Odd-periodic symmetry check when the grid is the unit torus: the
    // mirror of node i is node (R - i) mod R on each axis.
    let symmetric_grid = (0..d).all(|k| grid.origin[k] == 0.0 && grid.extent[k] == 1.0);
    let symmetry_residual = symmetric_grid.then(|| {
        let mut worst = 0.0f64;
        for (i, v) in result.values.iter().enumerate() {
            let mut rest = i;
            let mut mirror = 0usize;
            // decode indices (last axis fastest), mirror each
            let mut idx = vec![0usize; d];
            for axis in (0..d).rev() {
                idx[axis] = rest % grid.resolution[axis];
                rest /= grid.resolution[axis];
            }
            for axis in 0..d {
                let r = grid.resolution[axis];
                let m = (r - idx[axis]) % r;
                mirror = mirror * r + m;
            }
            worst = worst.max((v + result.values[mirror]).abs());
        }
        worst
    });

    write_json(
        &sc.out_dir.join("grid.meta.json"),
        &json!({
            "family": sc.config.family,
            "family_hash": format!("{:016x}", sc.family.config_hash()),
            "grid": grid,
            "n_trunc": n_trunc,
            "tail_bound": result.tail_bound,
            "seed": sc.seed,
            "rows": result.values.len(),
            "symmetry_residual": symmetry_residual,
        }),
    )?;
    println!("eval: wrote {} rows", result.values.len());
    Ok(())
}

// ---------------------------------------------------------------- jumps

pub fn cmd_jumps(sc: &Scenario, overrides: &Overrides) -> Result<()> {
    let cfg = sc
        .config
        .jumps
        .clone()
        .ok_or_else(|| anyhow!(davenport_core::Error::invalid("config has no `jumps` section")))?;
    let q_radius = overrides.r.unwrap_or(cfg.q_radius);
    let jumps = transforms::jump_operator(&sc.family, q_radius, cfg.l_max)?;
    let maximal = transforms::maximal_operator(&sc.family, q_radius, cfg.l_max)?;
    let theta = transforms::theta_from_maps(
        &jumps,
        &maximal,
        cfg.theta_shell.unwrap_or((q_radius.sqrt(), q_radius)),
    )?;

    ensure_out(&sc.out_dir)?;
    let d = sc.family.dim();
    let mut csv = String::new();
    for k in 0..d {
        let _ = write!(csv, "q{},", k + 1);
    }
    csv.push_str("A_q,abar_q,A_uncertain\n");
    for (q, abar) in maximal.iter() {
        let jump = jumps.entry_at(q);
        let (a_q, uncertain) = jump.map_or((0.0, false), |e| (e.value, e.uncertain));
        for c in q.coords() {
            let _ = write!(csv, "{c},");
        }
        let _ = writeln!(
            csv,
            "{},{},{}",
            fmt_f64(a_q),
            fmt_f64(abar.value),
            uncertain
        );
    }
    fs::write(sc.out_dir.join("jumps.csv"), csv)?;
    write_json(&sc.out_dir.join("theta.json"), &theta)?;

    // Inversion residual over the support inside the truncation.
    let mut residual = 0.0f64;
    let mut checked = 0usize;
    for n in sc.family.support_in_ball(q_radius.min(64.0))? {
        let back = transforms::invert_jump(&jumps, &n, cfg.l_max)?;
        let orig = sc.family.value_at(&n)?;
        residual = residual.max((back - orig).abs());
        checked += 1;
    }
    write_json(
        &sc.out_dir.join("roundtrip.json"),
        &json!({
            "max_residual": residual,
            "checked": checked,
            "q_radius": q_radius,
            "l_max": cfg.l_max,
            "tail_bound": jumps.tail_bound(),
            "jump_canceling": theta.jump_canceling,
        }),
    )?;
    println!(
        "jumps: {} rays, theta = {:?}, roundtrip residual {residual:.3e} over {checked} coefficients",
        maximal.len(),
        theta.value
    );
    Ok(())
}

// ---------------------------------------------------------------- exponent

pub fn cmd_exponent(sc: &Scenario, overrides: &Overrides) -> Result<()> {
    let cfg = sc.config.exponent.clone().ok_or_else(|| {
        anyhow!(davenport_core::Error::invalid("config has no `exponent` section"))
    })?;
    let r = overrides.r.unwrap_or(cfg.r);
    let opts = HolderOptions {
        ub_r0: cfg.ub_r0,
        ub_r: cfg.ub_r,
        l_max: cfg.l_max,
        scales: cfg
            .scales
            .clone()
            .unwrap_or_else(|| (3..=10).map(|j| 2f64.powi(-j)).collect()),
        detrend: if cfg.detrend_linear {
            Detrend::Linear
        } else {
            Detrend::None
        },
        osc: OscillationOptions {
            seed: sc.seed,
            ..OscillationOptions::default()
        },
    };
    let mut estimates = Vec::new();
    for point in &cfg.points {
        estimates.push(regularity::holder_exponent(
            &sc.family,
            point,
            cfg.r0,
            r,
            cfg.with_empirical,
            &opts,
        )?);
    }
    ensure_out(&sc.out_dir)?;
    write_json(&sc.out_dir.join("exponents.json"), &estimates)?;
    println!("exponent: {} estimates written", estimates.len());
    Ok(())
}

// ---------------------------------------------------------------- spectrum

pub fn cmd_spectrum(sc: &Scenario, overrides: &Overrides) -> Result<()> {
    let cfg = sc.config.spectrum.clone().ok_or_else(|| {
        anyhow!(davenport_core::Error::invalid("config has no `spectrum` section"))
    })?;
    let mut grid = cfg.grid.clone();
    if let Some(res) = overrides.grid {
        grid.resolution = vec![res; grid.resolution.len()];
    }
    let method = match cfg.method.as_deref() {
        None | Some("formula") => ExponentMethod::Formula,
        Some("oscillation") => ExponentMethod::Oscillation,
        Some(other) => {
            return Err(anyhow!(davenport_core::Error::invalid(format!(
                "unknown spectrum method {other:?}"
            ))))
        }
    };
    let opts = SpectrumOptions {
        h_bin_width: cfg.h_bin_width,
        box_scales: cfg.box_scales.clone(),
        method,
        r0: cfg.r0,
        r: overrides.r.unwrap_or(cfg.r),
        ub_r: cfg.ub_r,
        l_max: cfg.l_max,
        osc: OscillationOptions {
            seed: sc.seed,
            ..OscillationOptions::default()
        },
        ..SpectrumOptions::default()
    };
    let spec = spectrum::empirical_spectrum(&sc.family, &grid, &opts)?;
    let prediction = if spec.gamma_estimate.is_finite() && spec.gamma_estimate > 0.0 {
        Some(SpectrumPrediction::new(spec.gamma_estimate, grid.dim())?)
    } else {
        None
    };

    ensure_out(&sc.out_dir)?;
    let mut csv = String::from("h_bin_center,dimension,count,predicted");
    for b in &spec.box_scales {
        let _ = write!(csv, ",boxes_{b}");
    }
    csv.push('\n');
    for bin in &spec.bins {
        let dim = bin.dimension.map_or(String::new(), fmt_f64);
        let pred = prediction
            .and_then(|p| p.value(bin.h_center))
            .map_or(String::new(), fmt_f64);
        let _ = write!(
            csv,
            "{},{},{},{}",
            fmt_f64(bin.h_center),
            dim,
            bin.count,
            pred
        );
        for &b in &spec.box_scales {
            let count = bin
                .box_counts
                .iter()
                .find(|(scale, _)| *scale == b)
                .map_or(String::new(), |(_, c)| c.to_string());
            let _ = write!(csv, ",{count}");
        }
        csv.push('\n');
    }
    fs::write(sc.out_dir.join("spectrum.csv"), csv)?;
    write_json(
        &sc.out_dir.join("spectrum.meta.json"),
        &json!({
            "family": sc.config.family,
            "family_hash": format!("{:016x}", sc.family.config_hash()),
            "seed": sc.seed,
            "spectrum": spec,
        }),
    )?;
    println!(
        "spectrum: gamma = {:.4}, slope = {:?}, {} bins",
        spec.gamma_estimate,
        spec.fitted_slope,
        spec.bins.len()
    );
    Ok(())
}

// ---------------------------------------------------------------- sobolev

pub fn cmd_sobolev(sc: &Scenario, _overrides: &Overrides) -> Result<()> {
    let cfg = sc.config.sobolev.clone().ok_or_else(|| {
        anyhow!(davenport_core::Error::invalid("config has no `sobolev` section"))
    })?;
    let label = sobolev::classify_sobolev(cfg.gamma, cfg.d)?;
    let mut report = json!({
        "gamma": cfg.gamma,
        "d": cfg.d,
        "space": label.to_string(),
        "label": label,
    });
    if let Some(nc) = &cfg.norm {
        let map = transforms::fourier_map(&sc.family, nc.m_radius, nc.trunc)?;
        let norm = sobolev::sobolev_norm_estimate(&map, nc.s, nc.delta, nc.m_radius)?;
        let probe = sobolev::sobolev_divergence_probe(&map, nc.s, nc.delta)?;
        report["norm_estimate"] = json!({
            "s": nc.s, "delta": nc.delta, "m_radius": nc.m_radius,
            "value_squared": norm,
            "divergence_probe": probe,
        });
    }
    if let Some(m_cap) = cfg.bound_check_m_cap {
        let check = sobolev::fourier_bound_check(&sc.family, cfg.gamma, m_cap)?;
        report["bound_check"] = serde_json::to_value(&check)?;
    }
    ensure_out(&sc.out_dir)?;
    write_json(&sc.out_dir.join("sobolev.json"), &report)?;
    println!("{label}");
    Ok(())
}

// ---------------------------------------------------------------- selftest

/// Deterministic battery over the built-in families; artifacts land in the
/// output directory (default `out/`) and are byte-stable for a fixed seed.
pub fn cmd_selftest(overrides: &Overrides) -> Result<()> {
    let out = PathBuf::from(overrides.out.clone().unwrap_or_else(|| "out".to_string()));
    let seed = overrides.seed.unwrap_or(0);
    ensure_out(&out)?;

    // 1. grid evaluation of a finite family
    let fam = CoefficientFamily::finite(
        1,
        vec![
            (LatticeVector::new(vec![1]), 0.5),
            (LatticeVector::new(vec![3]), -0.25),
        ],
    )?;
    let sc = Scenario {
        config: ScenarioFixture::eval_fixture(&fam, seed)?,
        family: fam.clone(),
        out_dir: out.clone(),
        seed,
    };
    cmd_eval(&sc, &Overrides { out: None, seed: None, r: None, n: None, grid: None })?;
    println!("selftest eval: ok");

    // 2. jumps + theta + roundtrip
    let sc = Scenario {
        config: ScenarioFixture::jumps_fixture(&fam, seed)?,
        family: fam.clone(),
        out_dir: out.clone(),
        seed,
    };
    cmd_jumps(&sc, &Overrides { out: None, seed: None, r: None, n: None, grid: None })?;
    println!("selftest jumps: ok");

    // 3. exponents of the lacunary family at two probe points
    let lac = CoefficientFamily::power_lacunary(2, 2, LatticeVector::new(vec![1, 0]), 0.5)?;
    let sc = Scenario {
        config: ScenarioFixture::exponent_fixture(&lac, seed)?,
        family: lac.clone(),
        out_dir: out.clone(),
        seed,
    };
    cmd_exponent(&sc, &Overrides { out: None, seed: None, r: None, n: None, grid: None })?;
    println!("selftest exponent: ok");

    // 4. small spectrum
    let sc = Scenario {
        config: ScenarioFixture::spectrum_fixture(&lac, seed)?,
        family: lac.clone(),
        out_dir: out.clone(),
        seed,
    };
    cmd_spectrum(&sc, &Overrides { out: None, seed: None, r: None, n: None, grid: None })?;
    println!("selftest spectrum: ok");

    // 5. sobolev classification + norm of the sawtooth map
    let saw = CoefficientFamily::finite(2, vec![(LatticeVector::new(vec![1, 0]), 0.5)])?;
    let sc = Scenario {
        config: ScenarioFixture::sobolev_fixture(&saw, seed)?,
        family: saw,
        out_dir: out.clone(),
        seed,
    };
    cmd_sobolev(&sc, &Overrides { out: None, seed: None, r: None, n: None, grid: None })?;
    println!("selftest sobolev: ok");

    println!("selftest: all artifacts written to {}", out.display());
    Ok(())
}

/// Builders for the fixed selftest scenarios.
struct ScenarioFixture;

impl ScenarioFixture {
    fn base(fam: &CoefficientFamily, seed: u64) -> Result<ScenarioConfig> {
        Ok(ScenarioConfig {
            family: serde_json::from_str(&fam.to_json())?,
            seed,
            out_dir: "out".into(),
            eval: None,
            jumps: None,
            exponent: None,
            spectrum: None,
            sobolev: None,
        })
    }

    fn eval_fixture(fam: &CoefficientFamily, seed: u64) -> Result<ScenarioConfig> {
        let mut c = Self::base(fam, seed)?;
        c.eval = Some(crate::config::EvalConfig {
            n_trunc: 16.0,
            grid: GridSpec::new(vec![0.0], vec![1.0], vec![64])?,
        });
        Ok(c)
    }

    fn jumps_fixture(fam: &CoefficientFamily, seed: u64) -> Result<ScenarioConfig> {
        let mut c = Self::base(fam, seed)?;
        c.jumps = Some(crate::config::JumpsConfig {
            q_radius: 8.0,
            l_max: 16,
            theta_shell: Some((1.0, 8.0)),
        });
        Ok(c)
    }

    fn exponent_fixture(fam: &CoefficientFamily, seed: u64) -> Result<ScenarioConfig> {
        let mut c = Self::base(fam, seed)?;
        c.exponent = Some(crate::config::ExponentConfig {
            points: vec![
                vec![26f64.sqrt().fract(), 0.3],
                vec![41f64.sqrt().fract(), 0.35],
            ],
            r0: 1024.0,
            r: (1u64 << 20) as f64,
            with_empirical: false,
            ub_r0: 2.0,
            ub_r: 4096.0,
            l_max: 64,
            scales: None,
            detrend_linear: false,
        });
        Ok(c)
    }

    fn spectrum_fixture(fam: &CoefficientFamily, seed: u64) -> Result<ScenarioConfig> {
        let mut c = Self::base(fam, seed)?;
        c.spectrum = Some(crate::config::SpectrumConfig {
            grid: GridSpec::new(
                vec![(2f64.sqrt() - 1.0) / 2048.0, (3f64.sqrt() - 1.0) / 2048.0],
                vec![1.0, 1.0],
                vec![32, 32],
            )?,
            r0: 2.0,
            r: (1u64 << 16) as f64,
            ub_r: 4096.0,
            l_max: 64,
            h_bin_width: None,
            box_scales: Some(vec![2, 4, 8]),
            method: None,
        });
        Ok(c)
    }

    fn sobolev_fixture(fam: &CoefficientFamily, seed: u64) -> Result<ScenarioConfig> {
        let mut c = Self::base(fam, seed)?;
        c.sobolev = Some(crate::config::SobolevConfig {
            gamma: 0.5,
            d: 2,
            norm: Some(crate::config::NormConfig {
                s: 0.0,
                delta: 0.0,
                m_radius: 128.0,
                trunc: 128,
            }),
            bound_check_m_cap: Some(24.0),
        });
        Ok(c)
    }
}
