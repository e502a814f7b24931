//! Monitors that check inequalities and asymptotic laws along a trajectory.
//!
//! Every monitor is a pure function of the trajectory. A report carries a
//! signed margin per snapshot (negative means violated) and passes when the
//! worst margin is at least `−tolerance`. Asymptotic monitors report
//! [`MonitorStatus::Inconclusive`] when the run stopped too early or the law
//! is outside the hypotheses under which the limit holds.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::DiagnosticsError;
use crate::flow::{Snapshot, StopReason, Trajectory};
use crate::spectral::Spectral;
use crate::speed_law::SpeedLaw;

/// Asymptotic monitors need the run to reach this fraction of the initial area.
pub const ASYMPTOTIC_AREA_FRACTION: f64 = 0.01;
/// Tolerance on the limits `r_in/r_out → 1`, `k_min/k_max → 1`, `k·r_in → 1`, `ρ → 1`.
pub const LIMIT_TOLERANCE: f64 = 0.05;
/// Snapshot spacing, as a fraction of the time left to blow-up, below which
/// central differences of `L` and `A` are trusted to 1%.
pub const RESOLVED_FRACTION: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonitorStatus {
    Pass,
    Fail,
    Inconclusive,
}

impl std::fmt::Display for MonitorStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MonitorStatus::Pass => "pass",
            MonitorStatus::Fail => "FAIL",
            MonitorStatus::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Signed margins of the judged snapshots, which are always the last
    /// `margins.len()` entries of `times`.
    pub margins: Vec<f64>,
    pub worst_margin: f64,
    pub first_violation: Option<f64>,
    pub tolerance: f64,
    pub status: MonitorStatus,
    pub note: Option<String>,
    pub details: BTreeMap<String, f64>,
}

impl MonitorReport {
    fn from_margins(name: &str, times: Vec<f64>, values: Vec<f64>, margins: Vec<f64>, tolerance: f64) -> Self {
        let worst_margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        let worst_margin = if worst_margin.is_finite() { worst_margin } else { 0.0 };
        let judged = &times[times.len() - margins.len()..];
        let first_violation = judged.iter().zip(&margins).find(|(_, &m)| !(m >= -tolerance)).map(|(&t, _)| t);
        let status = if first_violation.is_none() { MonitorStatus::Pass } else { MonitorStatus::Fail };
        Self {
            name: name.to_string(),
            times,
            values,
            margins,
            worst_margin,
            first_violation,
            tolerance,
            status,
            note: None,
            details: BTreeMap::new(),
        }
    }

    fn inconclusive(mut self, note: impl Into<String>) -> Self {
        self.status = MonitorStatus::Inconclusive;
        self.note = Some(note.into());
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == MonitorStatus::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == MonitorStatus::Fail
    }
}

fn times(traj: &Trajectory) -> Vec<f64> {
    traj.snapshots.iter().map(Snapshot::t).collect()
}

fn require(traj: &Trajectory, monitor: &'static str, needed: usize) -> Result<(), DiagnosticsError> {
    let got = traj.snapshots.len();
    if got < needed {
        return Err(DiagnosticsError::InsufficientData { monitor, needed, got });
    }
    Ok(())
}

/// Why an asymptotic conclusion cannot be drawn from this trajectory, if so.
fn asymptotic_gap(traj: &Trajectory) -> Option<String> {
    if traj.out_of_hypothesis {
        return Some(format!("law {} is outside the hypotheses; limit not asserted", traj.law));
    }
    match traj.final_area_fraction() {
        Some(f) if f <= ASYMPTOTIC_AREA_FRACTION => None,
        Some(f) => Some(format!("run stopped at A/A0 = {f:.3e}, above {ASYMPTOTIC_AREA_FRACTION}")),
        None => Some("empty trajectory".into()),
    }
}

/// `L²/A` is non-increasing between consecutive snapshots, with relative
/// slack `1e-8`.
pub fn monitor_iso_ratio(traj: &Trajectory) -> Result<MonitorReport, DiagnosticsError> {
    require(traj, "iso_ratio", 2)?;
    let values: Vec<f64> = traj.summaries().map(|s| s.iso_ratio).collect();
    let margins = values.windows(2).map(|w| (w[0] - w[1]) / w[0]).collect();
    let last = values[values.len() - 1];
    Ok(MonitorReport::from_margins("iso_ratio", times(traj), values, margins, 1e-8)
        .detail("final_over_4pi_minus_1", last / (4.0 * PI) - 1.0))
}

/// `L²/A − 4π ≥ π²(r_out − r_in)²/A`; margin is the gap relative to `L²/A`.
pub fn monitor_bonnesen(traj: &Trajectory) -> Result<MonitorReport, DiagnosticsError> {
    require(traj, "bonnesen", 1)?;
    let values: Vec<f64> = traj.summaries().map(|s| s.bonnesen_gap).collect();
    let margins = traj.summaries().map(|s| s.bonnesen_gap / s.iso_ratio).collect();
    Ok(MonitorReport::from_margins("bonnesen", times(traj), values, margins, 1e-8))
}

/// `F = 1 − (πL/A)/∮k dθ ≥ 0` at every snapshot, and `F < 1e-2` once the
/// run has reached `A = 1e-3·A₀` within the hypotheses.
pub fn monitor_gage(traj: &Trajectory) -> Result<MonitorReport, DiagnosticsError> {
    require(traj, "gage", 1)?;
    let values: Vec<f64> = traj.summaries().map(|s| s.gage_deficit).collect();
    let mut margins = values.clone();
    let last = values[values.len() - 1];
    let reached = traj.stop_reason == StopReason::AreaFloor
        && traj.final_area_fraction().is_some_and(|f| f <= 1e-3 * (1.0 + 1e-6))
        && !traj.out_of_hypothesis;
    if reached {
        let m = margins.len() - 1;
        margins[m] = margins[m].min(1e-2 - last);
    }
    let report = MonitorReport::from_margins("gage", times(traj), values, margins, 1e-8).detail("final_deficit", last);
    Ok(if reached { report.with_note("final deficit checked against 1e-2") } else { report })
}

/// `max_θ |∂Φ/∂θ|² ≤ max{2·max_{s≤t,θ} Φ², max_θ(|∂Φ/∂θ|² + 2Φ²)|_{t=0}}`,
/// with the running maximum taken over the recorded snapshots.
pub fn monitor_gradient_estimate(traj: &Trajectory, law: &SpeedLaw) -> Result<MonitorReport, DiagnosticsError> {
    require(traj, "gradient_estimate", 1)?;
    let per_snapshot: Vec<(f64, f64, f64)> = traj
        .snapshots
        .par_iter()
        .map(|snap| {
            let k = snap.curvature.values();
            let spec = Spectral::for_grid(snap.curvature.grid());
            let phi: Vec<f64> = k.iter().map(|&x| law.phi_unchecked(x)).collect();
            let dphi = spec.first_derivative(&phi);
            let grad = dphi.iter().map(|d| d * d).fold(0.0, f64::max);
            let phi2 = phi.iter().map(|p| p * p).fold(0.0, f64::max);
            let initial = dphi.iter().zip(&phi).map(|(d, p)| d * d + 2.0 * p * p).fold(0.0, f64::max);
            (grad, phi2, initial)
        })
        .collect();
    let c0 = per_snapshot[0].2;
    let mut running = 0.0_f64;
    let mut values = Vec::with_capacity(per_snapshot.len());
    let mut margins = Vec::with_capacity(per_snapshot.len());
    for &(grad, phi2, _) in &per_snapshot {
        running = running.max(phi2);
        let bound = (2.0 * running).max(c0);
        values.push(grad);
        margins.push((bound - grad) / bound);
    }
    Ok(MonitorReport::from_margins("gradient_estimate", times(traj), values, margins, 1e-8))
}

/// `r_in/r_out → 1` and `k_min/k_max → 1`; values are the smaller of the two
/// ratios, judged at the final snapshot against `1 − 0.05`.
pub fn monitor_ratio_asymptotics(traj: &Trajectory) -> Result<MonitorReport, DiagnosticsError> {
    require(traj, "ratio_asymptotics", 1)?;
    let values: Vec<f64> = traj.summaries().map(|s| (s.r_in / s.r_out).min(s.k_min / s.k_max)).collect();
    let last = traj.last().expect("nonempty").summary.clone();
    let margins = vec![values[values.len() - 1] - (1.0 - LIMIT_TOLERANCE)];
    let report = MonitorReport::from_margins("ratio_asymptotics", times(traj), values, margins, 0.0)
        .detail("final_r_in_over_r_out", last.r_in / last.r_out)
        .detail("final_k_min_over_k_max", last.k_min / last.k_max);
    Ok(match asymptotic_gap(traj) {
        Some(why) => report.inconclusive(why),
        None => report,
    })
}

/// `k(θ,t)·r_in(t) → 1` uniformly in θ, judged at the final snapshot.
pub fn monitor_inradius_curvature(traj: &Trajectory) -> Result<MonitorReport, DiagnosticsError> {
    require(traj, "inradius_curvature", 1)?;
    let values: Vec<f64> = traj
        .summaries()
        .map(|s| (s.k_max * s.r_in - 1.0).abs().max((s.k_min * s.r_in - 1.0).abs()))
        .collect();
    let margins = vec![LIMIT_TOLERANCE - values[values.len() - 1]];
    let report = MonitorReport::from_margins("inradius_curvature", times(traj), values, margins, 0.0);
    Ok(match asymptotic_gap(traj) {
        Some(why) => report.inconclusive(why),
        None => report,
    })
}

/// `ρ(θ,t) = ∫_{k(θ,t)}^∞ dx/(G(x)x³) / (ω̂ − t) → 1` uniformly, using the
/// midpoint of the blow-up bracket; the spread obtained at the bracket
/// endpoints is reported alongside.
pub fn monitor_blowup_integral(traj: &Trajectory, law: &SpeedLaw) -> Result<MonitorReport, DiagnosticsError> {
    require(traj, "blowup_integral", 1)?;
    let omega = traj.omega.as_ref().ok_or(DiagnosticsError::MissingBlowUp("blowup_integral"))?;
    let tails: Vec<Vec<f64>> = traj
        .snapshots
        .par_iter()
        .map(|snap| {
            snap.curvature
                .values()
                .iter()
                .map(|&k| law.tail_integral(k).map(|r| r.value))
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let deviation = |tail: &[f64], t: f64, w: f64| -> (f64, f64, f64) {
        let rho: Vec<f64> = tail.iter().map(|i| i / (w - t)).collect();
        let lo = rho.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        ((lo - 1.0).abs().max((hi - 1.0).abs()), lo, hi)
    };
    let ts = times(traj);
    let values: Vec<f64> = tails.iter().zip(&ts).map(|(tail, &t)| deviation(tail, t, omega.omega_mid).0).collect();
    let last = values.len() - 1;
    let t_last = ts[last];
    let margins = vec![LIMIT_TOLERANCE - values[last]];
    let (_, rho_min, rho_max) = deviation(&tails[last], t_last, omega.omega_mid);
    let relative_width = omega.width() / (omega.omega_mid - t_last);
    let mut report = MonitorReport::from_margins("blowup_integral", ts, values, margins, 0.0)
        .detail("final_rho_min", rho_min)
        .detail("final_rho_max", rho_max)
        .detail("bracket_relative_width", relative_width);
    if omega.omega_lo > t_last {
        report = report.detail("final_deviation_at_omega_lo", deviation(&tails[last], t_last, omega.omega_lo).0);
    }
    report = report.detail("final_deviation_at_omega_hi", deviation(&tails[last], t_last, omega.omega_hi).0);
    Ok(if !(relative_width <= 0.1) {
        report.inconclusive(format!("blow-up bracket width is {relative_width:.3e} of omega - t"))
    } else if let Some(why) = asymptotic_gap(traj) {
        report.inconclusive(why)
    } else {
        report
    })
}

/// Central differences of `L` and `A` along the snapshots against
/// `dL/dt = −∮Φ dθ` and `dA/dt = −∮G dθ`. Only interior snapshots whose
/// neighbours lie within `0.15·∫_{k_max}^∞ dx/(Gx³)` are judged; the
/// relative mismatch must stay within 1%.
pub fn monitor_evolution_identities(traj: &Trajectory, law: &SpeedLaw) -> Result<MonitorReport, DiagnosticsError> {
    require(traj, "evolution_identities", 3)?;
    let s: Vec<_> = traj.summaries().collect();
    let mut ts = Vec::new();
    let mut values = Vec::new();
    let mut worst_l = 0.0_f64;
    let mut worst_a = 0.0_f64;
    for i in 1..s.len() - 1 {
        let (h1, h2) = (s[i].t - s[i - 1].t, s[i + 1].t - s[i].t);
        let horizon = law.tail_integral(s[i].k_max)?.value;
        if !(h1.max(h2) <= RESOLVED_FRACTION * horizon) {
            continue;
        }
        let d = |f: &dyn Fn(usize) -> f64| {
            -h2 / (h1 * (h1 + h2)) * f(i - 1) + (h2 - h1) / (h1 * h2) * f(i) + h1 / (h2 * (h1 + h2)) * f(i + 1)
        };
        let dl = d(&|j| s[j].length);
        let da = d(&|j| s[j].area);
        let snap = &traj.snapshots[i];
        let grid = snap.curvature.grid();
        let k = snap.curvature.values();
        let phi: Vec<f64> = k.iter().map(|&x| law.phi_unchecked(x)).collect();
        let g: Vec<f64> = k.iter().map(|&x| law.g(x)).collect();
        let (exact_l, exact_a) = (-grid.integrate(&phi), -grid.integrate(&g));
        let (rel_l, rel_a) = ((dl - exact_l).abs() / exact_l.abs(), (da - exact_a).abs() / exact_a.abs());
        worst_l = worst_l.max(rel_l);
        worst_a = worst_a.max(rel_a);
        ts.push(s[i].t);
        values.push(rel_l.max(rel_a));
    }
    let margins = values.iter().map(|v| 0.01 - v).collect();
    let judged = ts.len();
    let report = MonitorReport::from_margins("evolution_identities", ts, values, margins, 0.0)
        .detail("worst_dl_dt_mismatch", worst_l)
        .detail("worst_da_dt_mismatch", worst_a)
        .detail("judged_snapshots", judged as f64);
    Ok(if judged == 0 { report.inconclusive("no resolved interior snapshots") } else { report })
}

/// `k_min` is non-decreasing, with relative slack `1e-9`.
pub fn monitor_k_min(traj: &Trajectory) -> Result<MonitorReport, DiagnosticsError> {
    require(traj, "k_min_monotone", 2)?;
    let values: Vec<f64> = traj.summaries().map(|s| s.k_min).collect();
    let margins = values.windows(2).map(|w| (w[1] - w[0]) / w[0]).collect();
    Ok(MonitorReport::from_margins("k_min_monotone", times(traj), values, margins, 1e-9))
}

/// Closure residual stays below `1e-6·L`.
pub fn monitor_closure(traj: &Trajectory) -> Result<MonitorReport, DiagnosticsError> {
    require(traj, "closure", 1)?;
    let values: Vec<f64> = traj.summaries().map(|s| s.closure_residual / s.length).collect();
    let margins = values.iter().map(|v| crate::geometry::CLOSURE_TOLERANCE - v).collect();
    Ok(MonitorReport::from_margins("closure", times(traj), values, margins, 0.0))
}

/// `L(∮k dθ − πL/A)` tends to zero along a subsequence: the minimum over the
/// last third of the snapshots must not exceed the minimum over the first
/// third.
pub fn monitor_deficit_trend(traj: &Trajectory) -> Result<MonitorReport, DiagnosticsError> {
    require(traj, "deficit_trend", 3)?;
    let values: Vec<f64> = traj.summaries().map(|s| s.length * (s.total_curvature - PI * s.length / s.area)).collect();
    let third = values.len() / 3;
    let early = values[..third.max(1)].iter().cloned().fold(f64::INFINITY, f64::min);
    let late = values[values.len() - third.max(1)..].iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = traj.summaries().map(|s| s.length * s.total_curvature).fold(0.0, f64::max);
    let margins = vec![(early - late) / scale];
    let report = MonitorReport::from_margins("deficit_trend", times(traj), values, margins, 1e-10)
        .detail("early_min", early)
        .detail("late_min", late);
    Ok(if traj.out_of_hypothesis {
        report.inconclusive(format!("law {} is outside the hypotheses; limit not asserted", traj.law))
    } else {
        report
    })
}

/// Curvature-form and support-form solutions agree to `1e-5` in sup norm
/// while `A ≥ 0.01·A₀`. `None` when the trajectory evolved a single form.
pub fn monitor_cross_formulation(traj: &Trajectory) -> Option<MonitorReport> {
    let (ts, values): (Vec<f64>, Vec<f64>) = traj
        .snapshots
        .iter()
        .filter(|s| s.summary.area >= ASYMPTOTIC_AREA_FRACTION * traj.initial_area)
        .filter_map(|s| s.scheme_gap.map(|g| (s.t(), g)))
        .unzip();
    if ts.is_empty() {
        return None;
    }
    let margins = values.iter().map(|g| 1e-5 - g).collect();
    Some(MonitorReport::from_margins("cross_formulation", ts, values, margins, 0.0))
}

fn or_inconclusive(name: &str, result: Result<MonitorReport, DiagnosticsError>) -> MonitorReport {
    result.unwrap_or_else(|e| {
        MonitorReport::from_margins(name, Vec::new(), Vec::new(), Vec::new(), 0.0).inconclusive(e.to_string())
    })
}

/// Evaluates every monitor concurrently. Monitors that cannot run on this
/// trajectory (too few snapshots, no blow-up estimate) come back
/// inconclusive with the reason in the note.
pub fn run_all(traj: &Trajectory, law: &SpeedLaw) -> Vec<MonitorReport> {
    type Monitor<'a> = (&'static str, Box<dyn Fn() -> Result<MonitorReport, DiagnosticsError> + Send + Sync + 'a>);
    let monitors: Vec<Monitor> = vec![
        ("iso_ratio", Box::new(|| monitor_iso_ratio(traj))),
        ("bonnesen", Box::new(|| monitor_bonnesen(traj))),
        ("gage", Box::new(|| monitor_gage(traj))),
        ("gradient_estimate", Box::new(|| monitor_gradient_estimate(traj, law))),
        ("ratio_asymptotics", Box::new(|| monitor_ratio_asymptotics(traj))),
        ("inradius_curvature", Box::new(|| monitor_inradius_curvature(traj))),
        ("blowup_integral", Box::new(|| monitor_blowup_integral(traj, law))),
        ("evolution_identities", Box::new(|| monitor_evolution_identities(traj, law))),
        ("k_min_monotone", Box::new(|| monitor_k_min(traj))),
        ("closure", Box::new(|| monitor_closure(traj))),
        ("deficit_trend", Box::new(|| monitor_deficit_trend(traj))),
    ];
    let mut reports: Vec<MonitorReport> = monitors.par_iter().map(|(name, f)| or_inconclusive(name, f())).collect();
    reports.extend(monitor_cross_formulation(traj));
    reports
}

pub fn any_failed(reports: &[MonitorReport]) -> bool {
    reports.iter().any(MonitorReport::failed)
}

/// Aligned plain-text table: monitor, status, worst margin, tolerance,
/// first violation time.
pub fn format_table(reports: &[MonitorReport]) -> String {
    let header = ["monitor", "status", "worst margin", "tolerance", "violation at"];
    let rows: Vec<[String; 5]> = reports
        .iter()
        .map(|r| {
            [
                r.name.clone(),
                r.status.to_string(),
                format!("{:.3e}", r.worst_margin),
                format!("{:.1e}", r.tolerance),
                r.first_violation.map_or_else(|| "-".to_string(), |t| format!("{t:.6e}")),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: [&str; 5]| {
        let _ = writeln!(
            out,
            "{:<w0$}  {:<w1$}  {:>w2$}  {:>w3$}  {:>w4$}",
            cells[0],
            cells[1],
            cells[2],
            cells[3],
            cells[4],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2],
            w3 = widths[3],
            w4 = widths[4]
        );
    };
    line(header);
    for row in &rows {
        line([&row[0], &row[1], &row[2], &row[3], &row[4]]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{circle_trajectory, CircleSolution};
    use crate::spectral::AngleGrid;

    fn circle(p: f64) -> Trajectory {
        let sol = CircleSolution::new(1.0, p).unwrap();
        circle_trajectory(&sol, AngleGrid::new(64).unwrap(), 0.95, 1e-3).unwrap()
    }

    #[test]
    fn exact_circle_passes_every_monitor() {
        for &p in &[1.0, 2.0, 3.0] {
            let traj = circle(p);
            let law = SpeedLaw::power(p).unwrap();
            let reports = run_all(&traj, &law);
            assert_eq!(reports.len(), 11);
            for r in &reports {
                assert_eq!(r.status, MonitorStatus::Pass, "p={p} {r:?}");
                assert!(r.worst_margin >= -1e-10, "p={p} {}: {}", r.name, r.worst_margin);
            }
        }
    }

    #[test]
    fn circle_equality_cases() {
        let traj = circle(1.0);
        let law = SpeedLaw::power(1.0).unwrap();
        let iso = monitor_iso_ratio(&traj).unwrap();
        assert!(iso.values.iter().all(|q| (q - 4.0 * PI).abs() < 1e-10));
        assert!(monitor_bonnesen(&traj).unwrap().values.iter().all(|g| g.abs() < 1e-10));
        assert!(monitor_gage(&traj).unwrap().values.iter().all(|f| f.abs() < 1e-10));
        assert!(monitor_gradient_estimate(&traj, &law).unwrap().values.iter().all(|g| *g < 1e-20));
        let rho = monitor_blowup_integral(&traj, &law).unwrap();
        assert!(rho.values.iter().all(|d| *d < 1e-10), "{:?}", rho.values);
        let ratios = monitor_ratio_asymptotics(&traj).unwrap();
        assert!(ratios.values.iter().all(|r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn circle_evolution_identities() {
        let traj = circle(1.0);
        let law = SpeedLaw::power(1.0).unwrap();
        let rep = monitor_evolution_identities(&traj, &law).unwrap();
        assert!(rep.passed());
        // A is linear in t for p = 1, so the central difference is exact
        assert!(rep.details["worst_da_dt_mismatch"] < 1e-8);
    }

    #[test]
    fn affine_circle_is_inconclusive_for_limits() {
        let traj = circle(1.0 / 3.0);
        let law = SpeedLaw::power(1.0 / 3.0).unwrap();
        assert_eq!(monitor_ratio_asymptotics(&traj).unwrap().status, MonitorStatus::Inconclusive);
        assert_eq!(monitor_blowup_integral(&traj, &law).unwrap().status, MonitorStatus::Inconclusive);
        assert!(monitor_iso_ratio(&traj).unwrap().passed());
    }

    #[test]
    fn insufficient_data() {
        let mut traj = circle(1.0);
        traj.snapshots.truncate(1);
        assert!(matches!(
            monitor_iso_ratio(&traj),
            Err(DiagnosticsError::InsufficientData { needed: 2, got: 1, .. })
        ));
        let law = SpeedLaw::power(1.0).unwrap();
        assert!(matches!(
            monitor_evolution_identities(&traj, &law),
            Err(DiagnosticsError::InsufficientData { needed: 3, .. })
        ));
        let reports = run_all(&traj, &law);
        let iso = reports.iter().find(|r| r.name == "iso_ratio").unwrap();
        assert_eq!(iso.status, MonitorStatus::Inconclusive);
    }

    #[test]
    fn violation_is_reported_not_raised() {
        let mut traj = circle(1.0);
        // pretend the ratio jumped up at the third snapshot
        traj.snapshots[2].summary.iso_ratio *= 1.001;
        let rep = monitor_iso_ratio(&traj).unwrap();
        assert!(rep.failed());
        assert_eq!(rep.first_violation, Some(traj.snapshots[2].t()));
        assert!(rep.worst_margin < -rep.tolerance);
    }

    #[test]
    fn early_stop_is_inconclusive() {
        let sol = CircleSolution::new(1.0, 1.0).unwrap();
        let traj = circle_trajectory(&sol, AngleGrid::new(64).unwrap(), 0.9, 0.5).unwrap();
        assert_eq!(monitor_ratio_asymptotics(&traj).unwrap().status, MonitorStatus::Inconclusive);
        assert_eq!(monitor_inradius_curvature(&traj).unwrap().status, MonitorStatus::Inconclusive);
    }

    #[test]
    fn monitors_are_deterministic() {
        let traj = circle(2.0);
        let law = SpeedLaw::power(2.0).unwrap();
        assert_eq!(run_all(&traj, &law), run_all(&traj, &law));
    }

    #[test]
    fn table_is_aligned() {
        let traj = circle(1.0);
        let law = SpeedLaw::power(1.0).unwrap();
        let table = format_table(&run_all(&traj, &law));
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 12);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()));
        assert!(lines[0].starts_with("monitor"));
    }
}
