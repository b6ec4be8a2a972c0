//! Scaled experiment harness: the 11-channel desk system, per-channel error
//! between kernels, and Δz / span-count sweeps.

use std::time::Instant;

use crate::config::{ChannelGrid, FiberSpan, GainMode, ModulationFormat, NumericsPolicy, SystemConfig};
use crate::engine::{NliEngine, NliReport};
use crate::error::EngineError;
use crate::fwm::MuMethod;
use crate::units::{db_per_km_to_alpha, dbm_to_w, dispersion_to_beta, DEFAULT_LAMBDA_REF};

pub const DESK_CHANNELS: usize = 11;
pub const TABLE_I_CHANNELS: usize = 101;
pub const DESK_SYMBOL_RATE_HZ: f64 = 10e9;
pub const DESK_SPACING_HZ: f64 = 10.1e9;
pub const DESK_SPAN_KM: f64 = 100.0;
/// Raman slopes of the two ISRS regimes, 1/(W km THz).
pub const CR_STRONG: f64 = 1.12;
pub const CR_WEAK: f64 = 0.28;

/// Parameters of a desk-scale system.
#[derive(Debug, Clone, PartialEq)]
pub struct DeskSpec {
    pub channels: usize,
    /// 1/(W km THz)
    pub cr_per_thz: f64,
    pub spans: usize,
    pub method: MuMethod,
    pub modulation: String,
    /// Hz
    pub resolution: f64,
    /// km
    pub delta_z: f64,
}

impl Default for DeskSpec {
    fn default() -> Self {
        Self {
            channels: DESK_CHANNELS,
            cr_per_thz: CR_STRONG,
            spans: 1,
            method: MuMethod::Segment,
            modulation: "pm-qpsk".into(),
            resolution: 1e9,
            delta_z: 1.0,
        }
    }
}

/// Total launch power that keeps the Table I product `P_tot * B_tot`, and
/// hence the ISRS tilt, when the grid is cut to `channels` channels.
pub fn desk_total_power_dbm(channels: usize) -> f64 {
    19.0 + 10.0 * (TABLE_I_CHANNELS as f64 / channels as f64).log10()
}

/// Table I fiber span (beta3 = 0).
pub fn table_i_span(cr_per_thz: f64) -> FiberSpan<f64> {
    let (beta2, _) = dispersion_to_beta(17.0, 0.0, DEFAULT_LAMBDA_REF);
    FiberSpan {
        length: DESK_SPAN_KM,
        alpha: db_per_km_to_alpha(0.2),
        beta2,
        beta3: 0.0,
        gamma: 1.2,
        cr: cr_per_thz * 1e-12,
        gain_mode: GainMode::Transparent,
    }
}

pub fn desk_config(spec: &DeskSpec) -> Result<SystemConfig<f64>, EngineError> {
    let grid = ChannelGrid::uniform(
        spec.channels,
        DESK_SYMBOL_RATE_HZ,
        DESK_SPACING_HZ,
        dbm_to_w(desk_total_power_dbm(spec.channels)),
    )?;
    let numerics = NumericsPolicy {
        resolution: spec.resolution,
        mu_method: spec.method,
        delta_z: spec.delta_z,
        ..NumericsPolicy::default()
    };
    Ok(SystemConfig::new(
        vec![table_i_span(spec.cr_per_thz); spec.spans.max(1)],
        grid,
        ModulationFormat::named(&spec.modulation)?,
        numerics,
    )?)
}

/// Reports of every channel plus the total wall time.
#[derive(Debug, Clone)]
pub struct TimedRun {
    pub reports: Vec<NliReport<f64>>,
    pub wall_time_s: f64,
}

pub fn run_all(config: &SystemConfig<f64>) -> Result<TimedRun, EngineError> {
    let start = Instant::now();
    let engine = NliEngine::new(config.clone())?;
    let reports = engine.evaluate_all()?;
    Ok(TimedRun {
        reports,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Per-channel `eta_db(test) - eta_db(reference)`.
pub fn errors_db(test: &[NliReport<f64>], reference: &[NliReport<f64>]) -> Vec<f64> {
    assert_eq!(test.len(), reference.len(), "report lists differ in length");
    test.iter()
        .zip(reference)
        .map(|(t, r)| {
            assert_eq!(t.coi, r.coi, "report lists are not aligned");
            t.eta_db - r.eta_db
        })
        .collect()
}

/// Mean absolute value.
pub fn mae(errors: &[f64]) -> f64 {
    if errors.is_empty() {
        return 0.0;
    }
    errors.iter().map(|e| e.abs()).sum::<f64>() / errors.len() as f64
}

/// One channel of a kernel comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub coi: i32,
    pub delta_z_km: f64,
    pub spans: usize,
    pub err_db: f64,
    pub time_a_s: f64,
    pub time_b_s: f64,
}

/// MAE of one (Δz, spans) cell of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareSummary {
    pub delta_z_km: f64,
    pub spans: usize,
    pub mae_db: f64,
    pub time_a_s: f64,
    pub time_b_s: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    pub summary: Vec<CompareSummary>,
}

/// Compares `method_a` against the reference `method_b` for every Δz and
/// span count (the first span repeated; an empty list keeps `base` as is).
/// The Δz value is applied to both methods; the reference is evaluated once
/// per span count when it does not depend on Δz.
pub fn compare(
    base: &SystemConfig<f64>,
    method_a: MuMethod,
    method_b: MuMethod,
    delta_zs: &[f64],
    span_counts: &[usize],
) -> Result<Comparison, EngineError> {
    let systems: Vec<SystemConfig<f64>> = if span_counts.is_empty() {
        vec![base.clone()]
    } else {
        span_counts.iter().map(|&n| base.with_span_count(n)).collect()
    };
    let mut out = Comparison::default();
    for cfg in systems {
        let spans = cfg.spans.len();
        let mut reference: Option<TimedRun> = None;
        for &dz in delta_zs {
            let mut a_cfg = cfg.with_method(method_a);
            a_cfg.numerics.delta_z = dz;
            let a = run_all(&a_cfg)?;
            let b = if method_a == method_b {
                a.clone()
            } else if method_b == MuMethod::Segment || reference.is_none() {
                let mut b_cfg = cfg.with_method(method_b);
                if method_b == MuMethod::Segment {
                    b_cfg.numerics.delta_z = dz;
                }
                let run = run_all(&b_cfg)?;
                if method_b != MuMethod::Segment {
                    reference = Some(run.clone());
                }
                run
            } else {
                reference.clone().expect("reference computed")
            };
            let errs = errors_db(&a.reports, &b.reports);
            for ((ra, rb), err) in a.reports.iter().zip(&b.reports).zip(&errs) {
                out.rows.push(CompareRow {
                    coi: ra.coi,
                    delta_z_km: dz,
                    spans,
                    err_db: *err,
                    time_a_s: ra.wall_time_s,
                    time_b_s: rb.wall_time_s,
                });
            }
            out.summary.push(CompareSummary {
                delta_z_km: dz,
                spans,
                mae_db: mae(&errs),
                time_a_s: a.wall_time_s,
                time_b_s: b.wall_time_s,
            });
        }
    }
    Ok(out)
}
