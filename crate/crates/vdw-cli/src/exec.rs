//! Sweep execution, CSV/sidecar emission and comparison reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;

use vdw_core::oracle::{
    self, oracle_identical, oracle_w_a_sudden, oracle_w_b_sudden, oracle_w_pulse, time_average,
    IdenticalShift, OracleError,
};
use vdw_core::potentials;
use vdw_core::{Atom, AtomPair, PulseParams, RegimeWarning, Separation, ThreeLevelConfig};

use crate::config::{Resolved, SweepAxis};

/// Process exit codes of the run/compare commands.
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(message: String) -> Failure {
        Failure {
            code: EXIT_CONFIG,
            message,
        }
    }
    fn convergence(message: String) -> Failure {
        Failure {
            code: EXIT_CONVERGENCE,
            message,
        }
    }
}

#[derive(Debug, Clone)]
struct OracleDiag {
    eta_final: f64,
    refine_steps: u32,
    imag_residual: f64,
}

#[derive(Debug, Clone)]
struct Point {
    value: f64,
    warns: Vec<String>,
    diag: Option<OracleDiag>,
}

fn is_oracle(quantity: &str) -> bool {
    quantity.starts_with("oracle_")
}

/// Inputs for one sweep point after applying the axis value.
struct PointInputs {
    pair: Option<AtomPair>,
    three_level: Option<ThreeLevelConfig>,
    pulse: Option<PulseParams>,
    time: Option<f64>,
}

fn apply_axis(resolved: &Resolved, value_natural: f64) -> Result<PointInputs> {
    let mut pair = resolved.pair;
    let mut three_level = resolved.three_level;
    let mut pulse = resolved.pulse;
    let mut time = resolved.time;
    match resolved.axis {
        SweepAxis::Separation => {
            if let Some(p) = pair {
                let unit = p.separation().unit();
                let sep = Separation::new([
                    unit[0] * value_natural,
                    unit[1] * value_natural,
                    unit[2] * value_natural,
                ])
                .map_err(|e| anyhow!("sweep R = {value_natural}: {e}"))?;
                pair = Some(p.with_separation(sep));
            }
            if let Some(c) = three_level {
                let unit = c.separation().unit();
                let sep = Separation::new([
                    unit[0] * value_natural,
                    unit[1] * value_natural,
                    unit[2] * value_natural,
                ])
                .map_err(|e| anyhow!("sweep R = {value_natural}: {e}"))?;
                three_level = Some(
                    ThreeLevelConfig::new(
                        c.omega_minus(),
                        c.omega_0(),
                        c.omega_plus(),
                        c.mu_minus(),
                        c.mu_plus(),
                        sep,
                    )
                    .map_err(|e| anyhow!("sweep R = {value_natural}: {e}"))?,
                );
            }
        }
        SweepAxis::Time => time = Some(value_natural),
        SweepAxis::Rabi => {
            pulse = Some(
                PulseParams::new(value_natural)
                    .map_err(|e| anyhow!("sweep omega = {value_natural}: {e}"))?,
            );
        }
    }
    Ok(PointInputs {
        pair,
        three_level,
        pulse,
        time,
    })
}

fn need_pair(inputs: &PointInputs, quantity: &str) -> Result<AtomPair> {
    inputs
        .pair
        .ok_or_else(|| anyhow!("quantity {quantity} needs a `pair` block"))
}

fn need_three_level(inputs: &PointInputs, quantity: &str) -> Result<ThreeLevelConfig> {
    inputs
        .three_level
        .ok_or_else(|| anyhow!("quantity {quantity} needs a `three_level` block"))
}

fn need_pulse(inputs: &PointInputs, quantity: &str) -> Result<PulseParams> {
    inputs
        .pulse
        .ok_or_else(|| anyhow!("quantity {quantity} needs a `pulse` block or an omega sweep"))
}

fn need_time(inputs: &PointInputs, quantity: &str) -> Result<f64> {
    inputs
        .time
        .ok_or_else(|| anyhow!("quantity {quantity} needs a `time` field or a t sweep"))
}

fn warn_codes(warns: Vec<RegimeWarning>) -> Vec<String> {
    warns.into_iter().map(|w| w.code().to_string()).collect()
}

/// Time-average of a dynamical closed form over six beat periods from the
/// configured start time.
fn averaged_farfield(
    pair: &AtomPair,
    t0: f64,
    f: impl Fn(&AtomPair, f64) -> Result<f64, potentials::PotentialError>,
) -> Result<f64> {
    let period = 2.0 * std::f64::consts::PI / pair.detuning().abs();
    let periods = 6.0;
    let n = 64 * 6;
    let samples: Result<Vec<(f64, f64)>, potentials::PotentialError> = (0..=n)
        .map(|i| {
            let t = t0 + periods * period * i as f64 / n as f64;
            f(pair, t).map(|v| (t, v))
        })
        .collect();
    let samples = samples.map_err(|e| anyhow!("time average: {e}"))?;
    time_average(&samples, period, periods * period).map_err(|e| anyhow!("time average: {e}"))
}

fn evaluate_point(resolved: &Resolved, quantity: &str, raw: f64) -> Result<Point, Failure> {
    let natural = resolved.natural_sweep_value(raw);
    let inputs = apply_axis(resolved, natural).map_err(|e| Failure::config(e.to_string()))?;
    let spec = &resolved.quadrature;
    let fail_cfg =
        |e: anyhow::Error| Failure::config(format!("at {} = {raw}: {e}", resolved.sweep_name()));

    let mut warns = Vec::new();
    let mut diag = None;
    let value = (|| -> Result<f64> {
        Ok(match quantity {
            "w_a_farfield" | "w_b_farfield" | "w_a_farfield_tavg" | "w_b_farfield_tavg" => {
                let pair = need_pair(&inputs, quantity)?;
                let t = need_time(&inputs, quantity)?;
                warns.extend(warn_codes(pair.regime_warnings()));
                warns.extend(warn_codes(pair.far_field_warnings()));
                match quantity {
                    "w_a_farfield" => potentials::w_a_farfield(&pair, t)?,
                    "w_b_farfield" => potentials::w_b_farfield(&pair, t)?,
                    "w_a_farfield_tavg" => averaged_farfield(&pair, t, potentials::w_a_farfield)?,
                    _ => averaged_farfield(&pair, t, potentials::w_b_farfield)?,
                }
            }
            "w_a_qs" => {
                let pair = need_pair(&inputs, quantity)?;
                warns.extend(warn_codes(pair.regime_warnings()));
                potentials::w_a_quasistationary(&pair)
            }
            "w_b_qs" => {
                let pair = need_pair(&inputs, quantity)?;
                warns.extend(warn_codes(pair.regime_warnings()));
                potentials::w_b_quasistationary(&pair)
            }
            "w_a_pulse" | "w_b_pulse" | "w_a_pulse_resonant" => {
                let pair = need_pair(&inputs, quantity)?;
                let pulse = need_pulse(&inputs, quantity)?;
                let t = need_time(&inputs, quantity)?;
                warns.extend(warn_codes(pair.regime_warnings()));
                warns.extend(warn_codes(pulse.regime_warnings(&pair)));
                match quantity {
                    "w_a_pulse" => potentials::w_a_pulse(&pair, &pulse, t)?,
                    "w_b_pulse" => potentials::w_b_pulse(&pair, &pulse, t)?,
                    _ => potentials::w_a_pulse_resonant(&pair, &pulse, t)?,
                }
            }
            "e0" => {
                let cfg = need_three_level(&inputs, quantity)?;
                warns.extend(warn_codes(cfg.regime_warnings()));
                potentials::shift_identical_e0(&cfg)
            }
            "eprime" => {
                let cfg = need_three_level(&inputs, quantity)?;
                warns.extend(warn_codes(cfg.regime_warnings()));
                potentials::shift_identical_eprime(&cfg)
            }
            "force" => {
                let pair = need_pair(&inputs, quantity)?;
                let block = resolved
                    .config
                    .force
                    .as_ref()
                    .ok_or_else(|| anyhow!("quantity force needs a `force` block"))?;
                let atom = match block.atom.as_str() {
                    "A" | "a" => Atom::A,
                    "B" | "b" => Atom::B,
                    other => bail!("force.atom must be A or B (got {other:?})"),
                };
                warns.extend(warn_codes(pair.regime_warnings()));
                let step = block.step * resolved.units.length;
                let f = force_evaluator(&block.evaluator, &inputs)?;
                let force = potentials::vdw_force(atom, &pair, f, step)?;
                // radial component (along R̂)
                let unit = pair.separation().unit();
                force[0] * unit[0] + force[1] * unit[1] + force[2] * unit[2]
            }
            "oracle_w_b_sudden" | "oracle_w_a_sudden" => {
                let pair = need_pair(&inputs, quantity)?;
                let t = need_time(&inputs, quantity)?;
                warns.extend(warn_codes(pair.regime_warnings()));
                warns.extend(warn_codes(oracle::sudden_regime_warnings(&pair, t)));
                let out = if quantity == "oracle_w_b_sudden" {
                    oracle_w_b_sudden(&pair, t, spec)
                } else {
                    oracle_w_a_sudden(&pair, t, spec)
                }?;
                diag = Some(OracleDiag {
                    eta_final: out.report.eta_final,
                    refine_steps: out.report.refine_steps,
                    imag_residual: out.report.imag_residual,
                });
                out.value
            }
            "oracle_w_pulse_a" | "oracle_w_pulse_b" => {
                let pair = need_pair(&inputs, quantity)?;
                let pulse = need_pulse(&inputs, quantity)?;
                let t = need_time(&inputs, quantity)?;
                warns.extend(warn_codes(pair.regime_warnings()));
                warns.extend(warn_codes(pulse.regime_warnings(&pair)));
                let which = if quantity.ends_with('a') {
                    Atom::A
                } else {
                    Atom::B
                };
                let out = oracle_w_pulse(&pair, &pulse, t, which, spec)?;
                diag = Some(OracleDiag {
                    eta_final: out.report.eta_final,
                    refine_steps: out.report.refine_steps,
                    imag_residual: out.report.imag_residual,
                });
                out.value
            }
            "oracle_e0" | "oracle_eprime" => {
                let cfg = need_three_level(&inputs, quantity)?;
                warns.extend(warn_codes(cfg.regime_warnings()));
                let which = if quantity == "oracle_e0" {
                    IdenticalShift::E0
                } else {
                    IdenticalShift::EPrime
                };
                let out = oracle_identical(&cfg, which, spec)?;
                diag = Some(OracleDiag {
                    eta_final: out.report.eta_final,
                    refine_steps: out.report.refine_steps,
                    imag_residual: out.report.imag_residual,
                });
                out.value
            }
            other => bail!("unknown quantity {other:?}"),
        })
    })()
    .map_err(|e| match e.downcast_ref::<OracleError>() {
        Some(OracleError::NonConvergence { .. }) | Some(OracleError::ImaginaryResidual { .. }) => {
            Failure::convergence(format!("at {} = {raw}: {e}", resolved.sweep_name()))
        }
        _ => fail_cfg(e),
    })?;

    Ok(Point { value, warns, diag })
}

type Evaluator = Box<dyn Fn(&AtomPair) -> Result<f64, potentials::PotentialError>>;

fn force_evaluator(name: &str, inputs: &PointInputs) -> Result<Evaluator> {
    let time = inputs.time;
    let pulse = inputs.pulse;
    Ok(match name {
        "w_a_qs" => Box::new(|p| Ok(potentials::w_a_quasistationary(p))),
        "w_b_qs" => Box::new(|p| Ok(potentials::w_b_quasistationary(p))),
        "w_a_farfield" => {
            let t = time.ok_or_else(|| anyhow!("force over w_a_farfield needs `time`"))?;
            Box::new(move |p| potentials::w_a_farfield(p, t))
        }
        "w_b_farfield" => {
            let t = time.ok_or_else(|| anyhow!("force over w_b_farfield needs `time`"))?;
            Box::new(move |p| potentials::w_b_farfield(p, t))
        }
        "w_a_pulse" => {
            let t = time.ok_or_else(|| anyhow!("force over w_a_pulse needs `time`"))?;
            let pl = pulse.ok_or_else(|| anyhow!("force over w_a_pulse needs `pulse`"))?;
            Box::new(move |p| potentials::w_a_pulse(p, &pl, t))
        }
        "w_b_pulse" => {
            let t = time.ok_or_else(|| anyhow!("force over w_b_pulse needs `time`"))?;
            let pl = pulse.ok_or_else(|| anyhow!("force over w_b_pulse needs `pulse`"))?;
            Box::new(move |p| potentials::w_b_pulse(p, &pl, t))
        }
        other => bail!("force.evaluator {other:?} not recognized"),
    })
}

fn evaluate_grid(
    resolved: &Resolved,
    quantity: &str,
    threads: usize,
) -> Result<Vec<Point>, Failure> {
    if threads <= 1 {
        resolved
            .grid
            .iter()
            .map(|&raw| evaluate_point(resolved, quantity, raw))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
        pool.install(|| {
            resolved
                .grid
                .par_iter()
                .map(|&raw| evaluate_point(resolved, quantity, raw))
                .collect()
        })
    }
}

fn format_f64(v: f64) -> String {
    // shortest round-trip representation: deterministic and bit-exact on parse
    format!("{v}")
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn write_sidecar(resolved: &Resolved, out: &Path) -> Result<(), Failure> {
    #[derive(serde::Serialize)]
    struct Sidecar<'a> {
        version: &'static str,
        config: &'a crate::config::RunConfig,
        sweep_grid: &'a [f64],
    }
    let sidecar = Sidecar {
        version: env!("CARGO_PKG_VERSION"),
        config: &resolved.config,
        sweep_grid: &resolved.grid,
    };
    let text = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Failure::config(format!("sidecar: {e}")))?;
    std::fs::write(sidecar_path(out), text + "\n")
        .map_err(|e| Failure::config(format!("writing sidecar: {e}")))?;
    Ok(())
}

pub fn run(resolved: &Resolved, out: &Path, threads: usize) -> Result<(), Failure> {
    let quantity = resolved.config.quantity.clone();
    let points = evaluate_grid(resolved, &quantity, threads)?;
    let oracle_cols = is_oracle(&quantity);
    let energy_out = resolved.units.energy_out;

    let mut csv = String::new();
    csv.push_str("sweep_name,sweep_value,quantity,value,warn_flags");
    if oracle_cols {
        csv.push_str(",eta_final,refine_steps,imag_residual");
    }
    csv.push('\n');
    for (raw, point) in resolved.grid.iter().zip(&points) {
        let flags = point.warns.join(";");
        if !flags.is_empty() {
            eprintln!("warning at {} = {raw}: {flags}", resolved.sweep_name());
        }
        let _ = write!(
            csv,
            "{},{},{},{},{}",
            resolved.sweep_name(),
            format_f64(*raw),
            quantity,
            format_f64(point.value * energy_out),
            flags
        );
        if oracle_cols {
            let d = point.diag.clone().unwrap_or(OracleDiag {
                eta_final: 0.0,
                refine_steps: 0,
                imag_residual: 0.0,
            });
            let _ = write!(
                csv,
                ",{},{},{}",
                format_f64(d.eta_final / resolved.units.frequency),
                d.refine_steps,
                format_f64(d.imag_residual)
            );
        }
        csv.push('\n');
    }
    std::fs::write(out, csv).map_err(|e| Failure::config(format!("writing {out:?}: {e}")))?;
    write_sidecar(resolved, out)?;
    println!(
        "wrote {} rows of {} to {}",
        points.len(),
        quantity,
        out.display()
    );
    Ok(())
}

pub struct CompareSummary {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub max_rel: f64,
    pub mean_rel: f64,
    pub passed: bool,
}

pub fn compare(
    resolved: &Resolved,
    out: &Path,
    threads: usize,
    tolerance: f64,
) -> Result<CompareSummary, Failure> {
    let qa = resolved.config.quantity.clone();
    let qb = resolved
        .config
        .compare_with
        .clone()
        .ok_or_else(|| Failure::config("compare mode needs `compare_with`".into()))?;
    let a = evaluate_grid(resolved, &qa, threads)?;
    let b = evaluate_grid(resolved, &qb, threads)?;
    let energy_out = resolved.units.energy_out;

    let mut csv = String::new();
    csv.push_str("sweep_name,sweep_value,quantity_a,value_a,quantity_b,value_b,abs_dev,rel_dev\n");
    let mut max_abs = 0.0_f64;
    let mut sum_abs = 0.0_f64;
    let mut max_rel = 0.0_f64;
    let mut sum_rel = 0.0_f64;
    for ((raw, pa), pb) in resolved.grid.iter().zip(&a).zip(&b) {
        let va = pa.value * energy_out;
        let vb = pb.value * energy_out;
        let abs = (va - vb).abs();
        let scale = va.abs().max(vb.abs());
        let rel = if abs == 0.0 { 0.0 } else { abs / scale };
        max_abs = max_abs.max(abs);
        sum_abs += abs;
        max_rel = max_rel.max(rel);
        sum_rel += rel;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            resolved.sweep_name(),
            format_f64(*raw),
            qa,
            format_f64(va),
            qb,
            format_f64(vb),
            format_f64(abs),
            format_f64(rel)
        );
    }
    std::fs::write(out, csv).map_err(|e| Failure::config(format!("writing {out:?}: {e}")))?;
    write_sidecar(resolved, out)?;

    let n = resolved.grid.len() as f64;
    let summary = CompareSummary {
        max_abs,
        mean_abs: sum_abs / n,
        max_rel,
        mean_rel: sum_rel / n,
        passed: max_rel <= tolerance,
    };
    println!(
        "compare {qa} vs {qb}: max_abs {:.3e}, mean_abs {:.3e}, max_rel {:.3e}, mean_rel {:.3e} -> {}",
        summary.max_abs,
        summary.mean_abs,
        summary.max_rel,
        summary.mean_rel,
        if summary.passed {
            "PASS"
        } else {
            "FAIL (tolerance exceeded)"
        }
    );
    Ok(summary)
}
