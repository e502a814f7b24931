//! Time integration of the flow in curvature form
//! `∂k/∂t = k²(∂²Φ/∂θ² + Φ)` and support form `∂h/∂t = −Φ(1/(h″ + h))`,
//! with `Φ(k) = G(k)k`.
//!
//! Both forms use classical RK4 with a CFL-limited step and run until the
//! enclosed area drops below a floor; the blow-up time is then bracketed
//! from the tail integral of `1/(G(x)x³)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, GeometryError};
use crate::geometry::{self, CurvatureProfile, GeometrySummary, SupportProfile};
use crate::spectral::{fd4, AngleGrid, DiffScheme, Spectral};
use crate::speed_law::{HypothesisReport, SpeedLaw};

/// Probe count used when a run validates its speed law.
pub const HYPOTHESIS_PROBES: usize = 256;

/// Which representation is evolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowScheme {
    #[default]
    Curvature,
    Support,
    Both,
}

impl std::str::FromStr for FlowScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "curvature" => Ok(FlowScheme::Curvature),
            "support" => Ok(FlowScheme::Support),
            "both" => Ok(FlowScheme::Both),
            other => Err(format!("unknown scheme '{other}' (curvature|support|both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    AreaFloor,
    CurvatureCap,
    StepLimit,
    ConvexityLoss,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::AreaFloor => "area-floor",
            StopReason::CurvatureCap => "curvature-cap",
            StopReason::StepLimit => "step-limit",
            StopReason::ConvexityLoss => "convexity-loss",
        })
    }
}

/// When to record a snapshot (the initial and final states are always kept).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnapshotCadence {
    EverySteps(u64),
    /// Whenever the area has dropped by this factor since the last snapshot.
    AreaRatio(f64),
}

impl Default for SnapshotCadence {
    fn default() -> Self {
        SnapshotCadence::AreaRatio(0.95)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    Curvature(CurvatureProfile),
    Support(SupportProfile),
}

impl InitialProfile {
    pub fn grid(&self) -> AngleGrid {
        match self {
            InitialProfile::Curvature(kp) => kp.grid(),
            InitialProfile::Support(sp) => sp.grid(),
        }
    }

    /// Both representations of the initial curve.
    pub fn both(&self) -> Result<(CurvatureProfile, SupportProfile), GeometryError> {
        match self {
            InitialProfile::Curvature(kp) => Ok((kp.clone(), geometry::support_from_curvature(kp)?)),
            InitialProfile::Support(sp) => Ok((geometry::k_from_support(sp)?, sp.clone())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub law: SpeedLaw,
    pub initial: InitialProfile,
    pub scheme: FlowScheme,
    pub diff: DiffScheme,
    pub c_cfl: f64,
    /// Stop once `A ≤ area_floor · A(0)`.
    pub area_floor: f64,
    /// Stop once `k_max ≥ k_cap`; defaults to `1e6 · k_max(0)`.
    pub k_cap: Option<f64>,
    pub max_steps: u64,
    pub cadence: SnapshotCadence,
    /// Two-thirds-rule filter on the `∂²Φ/∂θ²` term.
    pub dealias: bool,
    /// Refuse to run when the law fails the hypothesis probes.
    pub require_hypotheses: bool,
}

impl FlowConfig {
    pub fn new(law: SpeedLaw, initial: InitialProfile) -> Self {
        Self {
            law,
            initial,
            scheme: FlowScheme::Curvature,
            diff: DiffScheme::Fourier,
            c_cfl: 0.8,
            area_floor: 1e-3,
            k_cap: None,
            max_steps: 100_000_000,
            cadence: SnapshotCadence::default(),
            dealias: false,
            require_hypotheses: true,
        }
    }

    fn validate(&self, k_max0: f64) -> Result<f64, FlowError> {
        if !(self.c_cfl > 0.0 && self.c_cfl <= 1.0) {
            return Err(FlowError::Config(format!("c_cfl must lie in (0, 1], got {}", self.c_cfl)));
        }
        if !(self.area_floor > 0.0 && self.area_floor < 1.0) {
            return Err(FlowError::Config(format!("area floor must lie in (0, 1), got {}", self.area_floor)));
        }
        match self.cadence {
            SnapshotCadence::EverySteps(0) => {
                return Err(FlowError::Config("snapshot cadence must be at least one step".into()))
            }
            SnapshotCadence::AreaRatio(r) if !(r > 0.0 && r < 1.0) => {
                return Err(FlowError::Config(format!("area-ratio cadence must lie in (0, 1), got {r}")))
            }
            _ => {}
        }
        let k_cap = self.k_cap.unwrap_or(1e6 * k_max0);
        if !(k_cap > k_max0) {
            return Err(FlowError::Config(format!("k_cap {k_cap} must exceed k_max(0) = {k_max0}")));
        }
        Ok(k_cap)
    }
}

/// Bracket `[omega_lo, omega_hi]` on the blow-up time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowUpEstimate {
    pub t_last: f64,
    pub omega_lo: f64,
    pub omega_mid: f64,
    pub omega_hi: f64,
    pub method: String,
    /// Whether `k_max` had grown tenfold, the regime where the bracket is tight.
    pub asymptotic: bool,
}

impl BlowUpEstimate {
    pub fn width(&self) -> f64 {
        self.omega_hi - self.omega_lo
    }

    pub fn contains(&self, omega: f64) -> bool {
        self.omega_lo <= omega && omega <= self.omega_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// `Σ dt·(dt·λ)⁴` with `λ = G(k_max)k_max²`, a bound on the RK4 drift of
    /// the blow-up time estimate.
    pub truncation_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub curvature: CurvatureProfile,
    pub support: SupportProfile,
    pub summary: GeometrySummary,
    /// `sup |k_curvature − k_support|` when both forms are evolved.
    pub scheme_gap: Option<f64>,
}

impl Snapshot {
    pub fn t(&self) -> f64 {
        self.summary.t
    }

    pub fn new(step: u64, curvature: CurvatureProfile, support: SupportProfile, gap: Option<f64>) -> Result<Self, GeometryError> {
        let summary = geometry::summarize(&curvature, &support)?;
        Ok(Self { step, curvature, support, summary, scheme_gap: gap })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub law: String,
    pub scheme: FlowScheme,
    pub diff: DiffScheme,
    pub n: usize,
    pub initial_area: f64,
    pub snapshots: Vec<Snapshot>,
    pub stop_reason: StopReason,
    pub omega: Option<BlowUpEstimate>,
    pub steps: StepStats,
    pub hypotheses: Option<HypothesisReport>,
    /// The law failed at least one hypothesis probe; roundness conclusions do
    /// not apply.
    pub out_of_hypothesis: bool,
}

impl Trajectory {
    pub fn summaries(&self) -> impl Iterator<Item = &GeometrySummary> {
        self.snapshots.iter().map(|s| &s.summary)
    }

    pub fn first(&self) -> Option<&Snapshot> {
        self.snapshots.first()
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    /// Area of the final snapshot relative to the initial area.
    pub fn final_area_fraction(&self) -> Option<f64> {
        self.last().map(|s| s.summary.area / self.initial_area)
    }
}

/// The evolving state of either formulation.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowState {
    Curvature(CurvatureProfile),
    Support(SupportProfile),
}

impl FlowState {
    pub fn t(&self) -> f64 {
        match self {
            FlowState::Curvature(kp) => kp.t(),
            FlowState::Support(sp) => sp.t(),
        }
    }
}

/// Right-hand sides and RK4 steps for one law on one grid.
#[derive(Debug, Clone)]
pub struct Integrator {
    law: SpeedLaw,
    grid: AngleGrid,
    spectral: Arc<Spectral>,
    diff: DiffScheme,
    dealias: bool,
}

impl Integrator {
    pub fn new(law: SpeedLaw, grid: AngleGrid, diff: DiffScheme, dealias: bool) -> Self {
        Self { law, grid, spectral: Spectral::for_grid(grid), diff, dealias }
    }

    pub fn law(&self) -> &SpeedLaw {
        &self.law
    }

    pub fn grid(&self) -> AngleGrid {
        self.grid
    }

    /// `f″ + f` with the configured operator.
    fn second_plus_identity(&self, f: &[f64]) -> Vec<f64> {
        match self.diff {
            DiffScheme::Fourier => self.spectral.second_derivative_plus_identity(f, self.dealias),
            DiffScheme::CentralFd4 => {
                let mut d2 = fd4::second_derivative(f, self.grid.spacing());
                for (d, v) in d2.iter_mut().zip(f) {
                    *d += v;
                }
                d2
            }
        }
    }

    /// `k²(Φ″ + Φ)` nodewise.
    pub fn rhs_curvature(&self, k: &[f64]) -> Result<Vec<f64>, FlowError> {
        let mut phi = Vec::with_capacity(k.len());
        for &kj in k {
            let v = self.law.phi_unchecked(kj);
            if !v.is_finite() {
                return Err(crate::error::LawError::Evaluation { x: kj }.into());
            }
            phi.push(v);
        }
        let mut w = self.second_plus_identity(&phi);
        for (w, &kj) in w.iter_mut().zip(k) {
            *w *= kj * kj;
        }
        Ok(w)
    }

    /// `−Φ(1/(h″ + h))` nodewise; fails at the first node with `h″ + h ≤ 0`.
    pub fn rhs_support(&self, h: &[f64]) -> Result<Vec<f64>, FlowError> {
        let w = self.second_plus_identity(h);
        let mut out = Vec::with_capacity(w.len());
        for (index, &value) in w.iter().enumerate() {
            if !(value > 0.0) {
                return Err(GeometryError::ConvexityLoss { index, value }.into());
            }
            let v = self.law.phi_unchecked(1.0 / value);
            if !v.is_finite() {
                return Err(crate::error::LawError::Evaluation { x: 1.0 / value }.into());
            }
            out.push(-v);
        }
        Ok(out)
    }

    /// Curvature `1/(h″ + h)` for a support state.
    pub fn curvature_of_support(&self, h: &[f64]) -> Result<Vec<f64>, FlowError> {
        let w = self.second_plus_identity(h);
        let mut k = Vec::with_capacity(w.len());
        for (index, &value) in w.iter().enumerate() {
            if !(value > 0.0) {
                return Err(GeometryError::ConvexityLoss { index, value }.into());
            }
            k.push(1.0 / value);
        }
        Ok(k)
    }

    fn rk4<F, A>(&self, y: &[f64], dt: f64, rhs: F, admissible: A) -> Result<Vec<f64>, FlowError>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, FlowError>,
        A: Fn(&[f64]) -> Result<(), FlowError>,
    {
        let reject = |e: FlowError| FlowError::StepRejected(e.to_string());
        let axpy = |a: f64, x: &[f64]| -> Vec<f64> { y.iter().zip(x).map(|(y, x)| y + a * x).collect() };

        let k1 = rhs(y).map_err(reject)?;
        let y2 = axpy(0.5 * dt, &k1);
        admissible(&y2).map_err(reject)?;
        let k2 = rhs(&y2).map_err(reject)?;
        let y3 = axpy(0.5 * dt, &k2);
        admissible(&y3).map_err(reject)?;
        let k3 = rhs(&y3).map_err(reject)?;
        let y4 = axpy(dt, &k3);
        admissible(&y4).map_err(reject)?;
        let k4 = rhs(&y4).map_err(reject)?;
        let next: Vec<f64> = (0..y.len())
            .map(|j| y[j] + dt / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]))
            .collect();
        admissible(&next).map_err(reject)?;
        Ok(next)
    }

    /// One RK4 step of the curvature form. Rejected when any stage leaves
    /// the positive cone.
    pub fn step_curvature(&self, k: &[f64], dt: f64) -> Result<Vec<f64>, FlowError> {
        self.rk4(k, dt, |k| self.rhs_curvature(k), |k| {
            match k.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
                Some(index) => Err(GeometryError::NonPositiveCurvature { index, value: k[index] }.into()),
                None => Ok(()),
            }
        })
    }

    /// One RK4 step of the support form. Rejected when any stage loses
    /// `h″ + h > 0`.
    pub fn step_support(&self, h: &[f64], dt: f64) -> Result<Vec<f64>, FlowError> {
        self.rk4(h, dt, |h| self.rhs_support(h), |h| self.curvature_of_support(h).map(|_| ()))
    }

    /// `dt = c_cfl·Δθ²/(2·max_j k_j²Φ′(k_j)·d_scheme)` where
    /// `d_scheme = Δθ²ρ/4` and `ρ` is the spectral radius of the discrete
    /// second derivative, so that `dt·max(k²Φ′)·ρ = 2·c_cfl`, inside the RK4
    /// stability interval on the negative real axis.
    pub fn stable_dt(&self, k: &[f64], c_cfl: f64) -> Result<f64, FlowError> {
        let mut d_max = 0.0_f64;
        for &kj in k {
            let d = self.law.diffusivity(kj);
            if !d.is_finite() {
                return Err(crate::error::LawError::Evaluation { x: kj }.into());
            }
            d_max = d_max.max(d);
        }
        if !(d_max > 0.0) {
            return Err(FlowError::Config("diffusion coefficient k²Φ'(k) vanishes".into()));
        }
        let dtheta2 = self.grid.spacing().powi(2);
        let d_scheme = dtheta2 * self.diff.second_derivative_radius(self.grid) / 4.0;
        Ok(c_cfl * dtheta2 / (2.0 * d_max * d_scheme))
    }
}

pub fn rhs_curvature(kp: &CurvatureProfile, law: &SpeedLaw) -> Result<Vec<f64>, FlowError> {
    Integrator::new(law.clone(), kp.grid(), DiffScheme::Fourier, false).rhs_curvature(kp.values())
}

pub fn rhs_support(sp: &SupportProfile, law: &SpeedLaw) -> Result<Vec<f64>, FlowError> {
    Integrator::new(law.clone(), sp.grid(), DiffScheme::Fourier, false).rhs_support(sp.values())
}

pub fn stable_dt(kp: &CurvatureProfile, law: &SpeedLaw, c_cfl: f64) -> Result<f64, FlowError> {
    Integrator::new(law.clone(), kp.grid(), DiffScheme::Fourier, false).stable_dt(kp.values(), c_cfl)
}

/// One RK4 step with Fourier differentiation. A rejected step leaves the
/// input untouched and returns [`FlowError::StepRejected`].
pub fn step(state: &FlowState, law: &SpeedLaw, dt: f64) -> Result<FlowState, FlowError> {
    match state {
        FlowState::Curvature(kp) => {
            let it = Integrator::new(law.clone(), kp.grid(), DiffScheme::Fourier, false);
            let k = it.step_curvature(kp.values(), dt)?;
            Ok(FlowState::Curvature(CurvatureProfile::new(kp.grid(), k, kp.t() + dt)?))
        }
        FlowState::Support(sp) => {
            let it = Integrator::new(law.clone(), sp.grid(), DiffScheme::Fourier, false);
            let h = it.step_support(sp.values(), dt)?;
            Ok(FlowState::Support(SupportProfile::new(sp.grid(), h, sp.t() + dt)?))
        }
    }
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Live state of a run in whichever forms are evolved.
struct RunState {
    k: Option<Vec<f64>>,
    h: Option<Vec<f64>>,
}

impl RunState {
    /// The curvature used for step control and stop checks.
    fn curvature(&self, it: &Integrator) -> Result<Vec<f64>, FlowError> {
        match (&self.k, &self.h) {
            (Some(k), _) => Ok(k.clone()),
            (None, Some(h)) => it.curvature_of_support(h),
            (None, None) => unreachable!("run state holds at least one form"),
        }
    }

    fn area(&self, it: &Integrator, spectral: &Spectral) -> Result<f64, FlowError> {
        match (&self.k, &self.h) {
            (Some(k), _) => Ok(geometry::area_from_curvature_values(spectral, k)),
            (None, Some(h)) => {
                let sp = SupportProfile::new(it.grid(), h.clone(), 0.0)?;
                Ok(geometry::area_from_support(&sp))
            }
            (None, None) => unreachable!("run state holds at least one form"),
        }
    }

    fn snapshot(&self, it: &Integrator, step: u64, t: f64) -> Result<Snapshot, FlowError> {
        let grid = it.grid();
        let (kp, sp, gap) = match (&self.k, &self.h) {
            (Some(k), None) => {
                let kp = CurvatureProfile::new(grid, k.clone(), t)?;
                // closure drift is reported by the summary, not refused here
                let sp = geometry::support_from_curvature_projected(&kp);
                (kp, sp, None)
            }
            (None, Some(h)) => {
                let sp = SupportProfile::new(grid, h.clone(), t)?;
                let kp = CurvatureProfile::new(grid, it.curvature_of_support(h)?, t)?;
                (kp, sp, None)
            }
            (Some(k), Some(h)) => {
                let kp = CurvatureProfile::new(grid, k.clone(), t)?;
                let sp = SupportProfile::new(grid, h.clone(), t)?;
                let ks = it.curvature_of_support(h)?;
                let gap = k.iter().zip(&ks).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                (kp, sp, Some(gap))
            }
            (None, None) => unreachable!("run state holds at least one form"),
        };
        Ok(Snapshot::new(step, kp, sp, gap)?)
    }
}

/// Integrates the configured flow until a stop criterion fires.
///
/// Invalid configuration and hypothesis violations (when required) are
/// errors; loss of convexity during the run is recorded as the stop reason.
pub fn run(config: &FlowConfig) -> Result<Trajectory, FlowError> {
    let grid = config.initial.grid();
    let (k0, h0) = config.initial.both()?;
    let k_max0 = k0.k_max();
    let k_min0 = k0.k_min();
    let k_cap = config.validate(k_max0)?;

    let law = &config.law;
    let hypotheses = law.check_hypotheses(0.5 * k_min0, k_cap, HYPOTHESIS_PROBES)?;
    let out_of_hypothesis = !hypotheses.all_ok();
    if out_of_hypothesis && config.require_hypotheses {
        return Err(FlowError::Hypotheses { lo: hypotheses.x_lo, hi: hypotheses.x_hi });
    }

    let it = Integrator::new(law.clone(), grid, config.diff, config.dealias);
    let spectral = Spectral::for_grid(grid);
    let mut state = RunState {
        k: matches!(config.scheme, FlowScheme::Curvature | FlowScheme::Both).then(|| k0.values().to_vec()),
        h: matches!(config.scheme, FlowScheme::Support | FlowScheme::Both).then(|| h0.values().to_vec()),
    };

    // ω ≤ ∫_{k_min(0)}^∞ dx/(G x³) sets the time scale for the minimum step
    let t_scale = law.tail_integral(k_min0)?.value;
    let dt_floor = 1e-14 * t_scale;

    let first = state.snapshot(&it, 0, 0.0)?;
    let initial_area = first.summary.area;
    let mut snapshots = vec![first];
    let mut stats = StepStats { dt_min: f64::INFINITY, ..StepStats::default() };
    let mut t = 0.0_f64;
    let mut shrink = 1.0_f64;
    let mut area_at_snapshot = initial_area;

    let stop_reason = loop {
        let k_now = state.curvature(&it)?;
        let k_top = max_of(&k_now);
        let rate = law.g(k_top) * k_top * k_top;
        let mut dt = it.stable_dt(&k_now, config.c_cfl)?;
        if let (Some(_), Some(h)) = (&state.k, &state.h) {
            dt = dt.min(it.stable_dt(&it.curvature_of_support(h)?, config.c_cfl)?);
        }
        let dt = dt * shrink;

        let attempt = (|| -> Result<RunState, FlowError> {
            Ok(RunState {
                k: state.k.as_deref().map(|k| it.step_curvature(k, dt)).transpose()?,
                h: state.h.as_deref().map(|h| it.step_support(h, dt)).transpose()?,
            })
        })();
        let next = match attempt {
            Ok(next) => next,
            Err(_) => {
                stats.rejected += 1;
                shrink *= 0.5;
                if dt * 0.5 < dt_floor {
                    break StopReason::ConvexityLoss;
                }
                continue;
            }
        };
        state = next;
        t += dt;
        shrink = (shrink * 2.0).min(1.0);
        stats.accepted += 1;
        stats.dt_min = stats.dt_min.min(dt);
        stats.dt_max = stats.dt_max.max(dt);
        stats.truncation_bound += dt * (dt * rate).powi(4);

        let area = state.area(&it, &spectral)?;
        let k_max = max_of(&state.curvature(&it)?);
        let stop = if area <= config.area_floor * initial_area {
            Some(StopReason::AreaFloor)
        } else if k_max >= k_cap {
            Some(StopReason::CurvatureCap)
        } else if stats.accepted >= config.max_steps {
            Some(StopReason::StepLimit)
        } else {
            None
        };

        let due = match config.cadence {
            SnapshotCadence::EverySteps(m) => stats.accepted.is_multiple_of(m),
            SnapshotCadence::AreaRatio(r) => area <= r * area_at_snapshot,
        };
        if due || stop.is_some() {
            match state.snapshot(&it, stats.accepted, t) {
                Ok(snap) => {
                    area_at_snapshot = snap.summary.area;
                    snapshots.push(snap);
                }
                Err(_) => break StopReason::ConvexityLoss,
            }
        }
        if let Some(reason) = stop {
            break reason;
        }
    };

    if stats.accepted == 0 {
        stats.dt_min = 0.0;
    }
    let mut traj = Trajectory {
        law: law.label().to_string(),
        scheme: config.scheme,
        diff: config.diff,
        n: grid.len(),
        initial_area,
        snapshots,
        stop_reason,
        omega: None,
        steps: stats,
        hypotheses: Some(hypotheses),
        out_of_hypothesis,
    };
    traj.omega = estimate_blowup(&traj, law).ok();
    Ok(traj)
}

/// Brackets the blow-up time from the last snapshot:
/// `ω ≥ t + ∫_{k_max}^∞ dx/(Gx³)` and `ω ≤ t + ∫_{k_min}^∞ dx/(Gx³)`.
///
/// Both ends are widened by the rounding bound of the accumulated time
/// (`steps · ε · t`), the RK4 truncation bound and the quadrature
/// uncertainty.
pub fn estimate_blowup(traj: &Trajectory, law: &SpeedLaw) -> Result<BlowUpEstimate, FlowError> {
    let first = traj.first().ok_or(FlowError::EmptyTrajectory)?;
    let last = traj.last().ok_or(FlowError::EmptyTrajectory)?;
    let s = &last.summary;
    let lower = law.tail_integral(s.k_max)?;
    let upper = law.tail_integral(s.k_min)?;
    let pad = traj.steps.accepted as f64 * f64::EPSILON * s.t + traj.steps.truncation_bound;
    let omega_lo = s.t + lower.value - lower.uncertainty - pad;
    let omega_hi = s.t + upper.value + upper.uncertainty + pad;
    Ok(BlowUpEstimate {
        t_last: s.t,
        omega_lo,
        omega_mid: 0.5 * (omega_lo + omega_hi),
        omega_hi,
        method: if lower.closed_form { "tail-integral:closed-form" } else { "tail-integral:quadrature" }.into(),
        asymptotic: s.k_max >= 10.0 * first.summary.k_max,
    })
}

#[derive(Debug, Clone)]
pub struct ContainmentConfig {
    pub diff: DiffScheme,
    pub c_cfl: f64,
    /// Either curve reaching this fraction of its initial area ends the run.
    pub area_floor: f64,
    pub max_steps: u64,
    pub cadence: SnapshotCadence,
}

impl Default for ContainmentConfig {
    fn default() -> Self {
        Self {
            diff: DiffScheme::Fourier,
            c_cfl: 0.8,
            area_floor: 1e-3,
            max_steps: 100_000_000,
            cadence: SnapshotCadence::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainmentSample {
    pub t: f64,
    /// `min_θ (h_outer − h_inner)`.
    pub min_gap: f64,
    pub contained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub samples: Vec<ContainmentSample>,
    /// `1e-8 · L_outer(0)`.
    pub tolerance: f64,
    pub stop_reason: StopReason,
    /// True when the inner curve triggered the stop.
    pub inner_stopped_first: bool,
}

impl ContainmentReport {
    pub fn holds(&self) -> bool {
        self.samples.iter().all(|s| s.contained)
    }
}

/// Co-evolves two support profiles with a common time step and tracks
/// `min_θ (h_outer − h_inner)`. Requires `h_outer ≥ h_inner` pointwise at
/// `t = 0` in the shared origin.
pub fn containment_run(
    outer: &SupportProfile,
    inner: &SupportProfile,
    law: &SpeedLaw,
    config: &ContainmentConfig,
) -> Result<ContainmentReport, FlowError> {
    let grid = outer.grid();
    if inner.grid() != grid {
        return Err(FlowError::Config("outer and inner profiles use different grids".into()));
    }
    if !(config.c_cfl > 0.0 && config.c_cfl <= 1.0) || !(config.area_floor > 0.0 && config.area_floor < 1.0) {
        return Err(FlowError::Config("invalid c_cfl or area floor".into()));
    }
    let k_outer = geometry::k_from_support(outer)?;
    let tolerance = 1e-8 * geometry::length_of(&k_outer);
    let gap_of = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
    let gap0 = gap_of(outer.values(), inner.values());
    if gap0 < -tolerance {
        return Err(FlowError::Config(format!(
            "outer support function is below the inner one by {} at t = 0",
            -gap0
        )));
    }

    let it = Integrator::new(law.clone(), grid, config.diff, false);
    let area = |h: &[f64]| -> Result<f64, FlowError> {
        Ok(geometry::area_from_support(&SupportProfile::new(grid, h.to_vec(), 0.0)?))
    };
    let mut ho = outer.values().to_vec();
    let mut hi = inner.values().to_vec();
    let (a_out0, a_in0) = (area(&ho)?, area(&hi)?);
    let t_scale = law.tail_integral(geometry::k_from_support(inner)?.k_min())?.value;

    let mut samples = vec![ContainmentSample { t: 0.0, min_gap: gap0, contained: gap0 >= -tolerance }];
    let mut t = 0.0;
    let mut steps = 0u64;
    let mut shrink = 1.0;
    let mut area_at_sample = a_in0;
    let mut inner_first = false;

    let stop_reason = loop {
        let dt = shrink
            * it.stable_dt(&it.curvature_of_support(&ho)?, config.c_cfl)?
                .min(it.stable_dt(&it.curvature_of_support(&hi)?, config.c_cfl)?);
        let next = it.step_support(&ho, dt).and_then(|o| Ok((o, it.step_support(&hi, dt)?)));
        let (o, i) = match next {
            Ok(pair) => pair,
            Err(_) => {
                shrink *= 0.5;
                if dt * 0.5 < 1e-14 * t_scale {
                    break StopReason::ConvexityLoss;
                }
                continue;
            }
        };
        ho = o;
        hi = i;
        t += dt;
        steps += 1;
        shrink = (shrink * 2.0f64).min(1.0);

        let (a_out, a_in) = (area(&ho)?, area(&hi)?);
        let stop = if a_in <= config.area_floor * a_in0 {
            inner_first = true;
            Some(StopReason::AreaFloor)
        } else if a_out <= config.area_floor * a_out0 {
            Some(StopReason::AreaFloor)
        } else if steps >= config.max_steps {
            Some(StopReason::StepLimit)
        } else {
            None
        };
        let due = match config.cadence {
            SnapshotCadence::EverySteps(m) => steps.is_multiple_of(m.max(1)),
            SnapshotCadence::AreaRatio(r) => a_in <= r * area_at_sample,
        };
        if due || stop.is_some() {
            let g = gap_of(&ho, &hi);
            samples.push(ContainmentSample { t, min_gap: g, contained: g >= -tolerance });
            area_at_sample = a_in;
        }
        if let Some(reason) = stop {
            break reason;
        }
    };

    Ok(ContainmentReport { samples, tolerance, stop_reason, inner_stopped_first: inner_first })
}
