use serde::{Deserialize, Serialize};

use super::horofunction::check_schedule;
use super::{last_third, Thresholds};
use crate::error::{Error, Result};
use crate::metric::{GeodesicPath, MetricEngine, PathKind};

/// Comparison of two rays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayPairReport {
    pub schedule: Vec<f64>,
    /// `k(g(t), s(t))` along the schedule.
    pub gaps: Vec<f64>,
    /// Largest entry of `gaps`; only an estimate of the sup when `unbounded`.
    pub sup_gap: f64,
    /// The running sup was still growing over the last third.
    pub unbounded: bool,
    pub best_shift: Option<f64>,
    /// Parameters `t` of the shifted tail.
    pub tail_schedule: Vec<f64>,
    /// `k(g(t), s(t + T))` for the best shift `T`.
    pub shifted_tail: Vec<f64>,
    pub asymptotic: bool,
    pub strongly_asymptotic: Option<bool>,
    pub thresholds: Thresholds,
}

fn check_rays(gamma: &GeodesicPath, sigma: &GeodesicPath) -> Result<()> {
    if gamma.kind != PathKind::Ray || sigma.kind != PathKind::Ray {
        return Err(Error::Precondition("asymptoticity tests need rays".into()));
    }
    Ok(())
}

/// Sup of `k(g(t), s(t))` over the schedule. The pair is asymptotic when
/// the running sup grows by at most the threshold over the last third.
pub fn asymptoticity_test(
    engine: &MetricEngine,
    gamma: &GeodesicPath,
    sigma: &GeodesicPath,
    schedule: &[f64],
    thresholds: &Thresholds,
) -> Result<RayPairReport> {
    check_rays(gamma, sigma)?;
    check_schedule(
        schedule,
        gamma.parameter_length().min(sigma.parameter_length()),
    )?;
    let gaps = schedule
        .iter()
        .map(|&t| engine.distance(gamma.point_at(t), sigma.point_at(t)))
        .collect::<Result<Vec<_>>>()?;
    let mut running = Vec::with_capacity(gaps.len());
    let mut sup = f64::NEG_INFINITY;
    for &g in &gaps {
        sup = sup.max(g);
        running.push(sup);
    }
    let start = last_third(gaps.len()).saturating_sub(1);
    let growth = running[running.len() - 1] - running[start];
    let asymptotic = growth <= thresholds.asymptotic_increase;
    Ok(RayPairReport {
        schedule: schedule.to_vec(),
        gaps,
        sup_gap: sup,
        unbounded: !asymptotic,
        best_shift: None,
        tail_schedule: Vec::new(),
        shifted_tail: Vec::new(),
        asymptotic,
        strongly_asymptotic: None,
        thresholds: *thresholds,
    })
}

/// Shifts `-1, -0.95, ..., 1`.
pub fn default_shift_grid() -> Vec<f64> {
    (-20..=20).map(|k| 0.05 * k as f64).collect()
}

/// Schedule points where both `g(t)` and `s(t + T)` are defined.
fn tail_points(
    schedule: &[f64],
    gamma: &GeodesicPath,
    sigma: &GeodesicPath,
    shift: f64,
) -> Vec<f64> {
    let (lg, ls) = (gamma.parameter_length(), sigma.parameter_length());
    schedule
        .iter()
        .copied()
        .filter(|&t| t <= lg && t + shift >= 0.0 && t + shift <= ls)
        .collect()
}

fn tail_value(
    engine: &MetricEngine,
    gamma: &GeodesicPath,
    sigma: &GeodesicPath,
    t: f64,
    shift: f64,
) -> Result<f64> {
    engine.distance(gamma.point_at(t), sigma.point_at(t + shift))
}

/// Asymptoticity test plus shifted tails `k(g(t), s(t + T))`.
///
/// The shift minimising the final tail value is found on `shift_grid` and
/// then polished by golden-section search between the neighbouring grid
/// points. The pair is strongly asymptotic when that final value is within
/// the threshold and the tail does not increase over its last third beyond
/// the monotonicity slack.
pub fn strong_asymptoticity_test(
    engine: &MetricEngine,
    gamma: &GeodesicPath,
    sigma: &GeodesicPath,
    schedule: &[f64],
    shift_grid: &[f64],
    thresholds: &Thresholds,
) -> Result<RayPairReport> {
    let mut report = asymptoticity_test(engine, gamma, sigma, schedule, thresholds)?;
    if shift_grid.is_empty() || shift_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "shift grid must be non-empty and increasing".into(),
        ));
    }
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, &shift) in shift_grid.iter().enumerate() {
        let Some(&t) = tail_points(schedule, gamma, sigma, shift).last() else {
            continue;
        };
        let v = tail_value(engine, gamma, sigma, t, shift)?;
        if best.is_none_or(|(_, _, b)| v < b) {
            best = Some((i, t, v));
        }
    }
    let Some((i, t_final, value)) = best else {
        return Err(Error::Precondition(
            "no shift leaves a common parameter range".into(),
        ));
    };
    let mut shift = shift_grid[i];
    let lo = if i > 0 { shift_grid[i - 1] } else { shift };
    let hi = if i + 1 < shift_grid.len() {
        shift_grid[i + 1]
    } else {
        shift
    };
    // Stay where the final tail point is the same schedule point.
    let admissible = |s: f64| tail_points(schedule, gamma, sigma, s).last() == Some(&t_final);
    if hi > lo {
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        let eval = |s: f64| -> Result<f64> {
            if admissible(s) {
                tail_value(engine, gamma, sigma, t_final, s)
            } else {
                Ok(f64::INFINITY)
            }
        };
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (eval(c)?, eval(d)?);
        for _ in 0..30 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = eval(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = eval(d)?;
            }
        }
        let (s, v) = if fc < fd { (c, fc) } else { (d, fd) };
        if v < value {
            shift = s;
        }
    }
    let tail_schedule = tail_points(schedule, gamma, sigma, shift);
    let shifted_tail = tail_schedule
        .iter()
        .map(|&t| tail_value(engine, gamma, sigma, t, shift))
        .collect::<Result<Vec<_>>>()?;
    let start = last_third(shifted_tail.len()).saturating_sub(1);
    let settled = shifted_tail[start..]
        .windows(2)
        .all(|w| w[1] <= w[0] + thresholds.monotone_slack);
    let final_value = *shifted_tail.last().unwrap();
    let strong = final_value <= thresholds.strong_tail && settled;
    report.best_shift = Some(shift);
    report.tail_schedule = tail_schedule;
    report.shifted_tail = shifted_tail;
    report.strongly_asymptotic = Some(strong);
    // A strongly asymptotic pair is asymptotic.
    if strong {
        report.asymptotic = true;
        report.unbounded = false;
    }
    Ok(report)
}
