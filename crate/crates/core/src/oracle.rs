//! Exact and brute-force reference solutions.
//!
//! Nothing here shares code paths with [`crate::geometry`]'s measures: the
//! polygon routines work on raw vertex lists with elementary formulas.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::OracleError;
use crate::flow::{BlowUpEstimate, FlowScheme, Snapshot, StepStats, StopReason, Trajectory};
use crate::geometry::{CurvatureProfile, SupportProfile};
use crate::spectral::{AngleGrid, DiffScheme};

/// Shrinking circle under `v = k^p`: `R(t)^(p+1) = R₀^(p+1) − (p+1)t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleSolution {
    pub r0: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleState {
    pub radius: f64,
    pub k: f64,
    pub length: f64,
    pub area: f64,
}

impl CircleSolution {
    pub fn new(r0: f64, p: f64) -> Result<Self, OracleError> {
        if !(r0 > 0.0) || !(p > 0.0) {
            return Err(OracleError::Invalid(format!("need r0 > 0 and p > 0, got r0={r0}, p={p}")));
        }
        Ok(Self { r0, p })
    }

    /// Blow-up time `R₀^(p+1)/(p+1)`.
    pub fn omega(&self) -> f64 {
        self.r0.powf(self.p + 1.0) / (self.p + 1.0)
    }

    pub fn radius(&self, t: f64) -> Result<f64, OracleError> {
        let omega = self.omega();
        if !(t < omega) || t < 0.0 {
            return Err(OracleError::PastBlowUp { t, omega });
        }
        let q = self.p + 1.0;
        Ok((q * (omega - t)).powf(1.0 / q))
    }

    pub fn state(&self, t: f64) -> Result<CircleState, OracleError> {
        let radius = self.radius(t)?;
        Ok(CircleState {
            radius,
            k: 1.0 / radius,
            length: 2.0 * PI * radius,
            area: PI * radius * radius,
        })
    }

    /// Time at which the enclosed area equals `fraction·πR₀²`.
    pub fn time_at_area_fraction(&self, fraction: f64) -> f64 {
        let r = self.r0 * fraction.sqrt();
        (self.r0.powf(self.p + 1.0) - r.powf(self.p + 1.0)) / (self.p + 1.0)
    }
}

pub fn circle_state(sol: &CircleSolution, t: f64) -> Result<CircleState, OracleError> {
    sol.state(t)
}

/// Curvature of the ellipse with semi-axes `a ≥ b` as a function of the
/// tangent angle: `k(θ) = (a² cos²θ + b² sin²θ)^(3/2) / (a²b²)`, which is
/// `1/(h″ + h)` for the support function below.
///
/// `ab/(a² sin²t + b² cos²t)^(3/2)` is the same curvature in the parametric
/// angle `t` of `(a cos t, b sin t)`; it agrees with this one only at the axes.
pub fn ellipse_profile(a: f64, b: f64, grid: AngleGrid) -> Result<CurvatureProfile, OracleError> {
    check_axes(a, b)?;
    Ok(CurvatureProfile::from_fn(grid, 0.0, |t| {
        let (s, c) = t.sin_cos();
        (a * a * c * c + b * b * s * s).powf(1.5) / (a * a * b * b)
    })?)
}

/// Support function of the same ellipse centred at the origin:
/// `h(θ) = √(a² cos²θ + b² sin²θ)`.
pub fn ellipse_support(a: f64, b: f64, grid: AngleGrid) -> Result<SupportProfile, OracleError> {
    check_axes(a, b)?;
    Ok(SupportProfile::from_fn(grid, 0.0, |t| {
        let (s, c) = t.sin_cos();
        (a * a * c * c + b * b * s * s).sqrt()
    })?)
}

/// The analytic circle trajectory sampled where the area has dropped by
/// `ratio` since the previous sample, ending at `floor·A₀`. Every profile is
/// constant and the blow-up bracket is the exact `ω`.
pub fn circle_trajectory(sol: &CircleSolution, grid: AngleGrid, ratio: f64, floor: f64) -> Result<Trajectory, OracleError> {
    if !(ratio > 0.0 && ratio < 1.0) || !(floor > 0.0 && floor < 1.0) {
        return Err(OracleError::Invalid(format!("need ratio and floor in (0, 1), got {ratio}, {floor}")));
    }
    let mut fractions = vec![1.0];
    while fractions[fractions.len() - 1] * ratio > floor {
        fractions.push(fractions[fractions.len() - 1] * ratio);
    }
    fractions.push(floor);
    let mut snapshots = Vec::with_capacity(fractions.len());
    for (i, &f) in fractions.iter().enumerate() {
        let t = if i == 0 { 0.0 } else { sol.time_at_area_fraction(f) };
        let st = sol.state(t)?;
        let kp = CurvatureProfile::constant(grid, st.k, t)?;
        let sp = SupportProfile::new(grid, vec![st.radius; grid.len()], t)?;
        snapshots.push(Snapshot::new(i as u64, kp, sp, None)?);
    }
    let omega = sol.omega();
    Ok(Trajectory {
        law: format!("power:{}", sol.p),
        scheme: FlowScheme::Curvature,
        diff: DiffScheme::Fourier,
        n: grid.len(),
        initial_area: PI * sol.r0 * sol.r0,
        stop_reason: StopReason::AreaFloor,
        omega: Some(BlowUpEstimate {
            t_last: snapshots[snapshots.len() - 1].t(),
            omega_lo: omega,
            omega_mid: omega,
            omega_hi: omega,
            method: "exact".into(),
            asymptotic: true,
        }),
        snapshots,
        steps: StepStats::default(),
        hypotheses: None,
        out_of_hypothesis: sol.p < 1.0,
    })
}

/// Smooth strictly convex body with support function
/// `h(θ) = 1 + Σ_m (a_m cos mθ + b_m sin mθ)`, modes `2..=max_mode`.
///
/// Coefficients are drawn so that `Σ (m² − 1)·√(a_m² + b_m²) = budget < 1`,
/// which keeps `h″ + h ≥ 1 − budget > 0` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomConvexBody {
    pub modes: Vec<(u32, f64, f64)>,
}

impl RandomConvexBody {
    pub fn sample(seed: u64, max_mode: u32, budget: f64) -> Result<Self, OracleError> {
        if max_mode < 2 || !(budget > 0.0 && budget < 1.0) {
            return Err(OracleError::Invalid(format!("need max_mode >= 2 and budget in (0, 1), got {max_mode}, {budget}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<(u32, f64, f64)> = (2..=max_mode)
            .map(|m| {
                let decay = 1.0 / (m * m) as f64;
                (m, decay * rng.random_range(-1.0..1.0), decay * rng.random_range(-1.0..1.0))
            })
            .collect();
        let used: f64 = raw.iter().map(|&(m, a, b)| ((m * m - 1) as f64) * a.hypot(b)).sum();
        let scale = budget / used;
        Ok(Self { modes: raw.into_iter().map(|(m, a, b)| (m, a * scale, b * scale)).collect() })
    }

    pub fn support(&self, theta: f64) -> f64 {
        1.0 + self.modes.iter().map(|&(m, a, b)| {
            let (s, c) = (m as f64 * theta).sin_cos();
            a * c + b * s
        }).sum::<f64>()
    }

    fn support_derivative(&self, theta: f64) -> f64 {
        self.modes.iter().map(|&(m, a, b)| {
            let (s, c) = (m as f64 * theta).sin_cos();
            m as f64 * (b * c - a * s)
        }).sum()
    }

    /// `1/(h″ + h)`.
    pub fn curvature(&self, theta: f64) -> f64 {
        let w = 1.0 + self.modes.iter().map(|&(m, a, b)| {
            let (s, c) = (m as f64 * theta).sin_cos();
            (1.0 - (m * m) as f64) * (a * c + b * s)
        }).sum::<f64>();
        1.0 / w
    }

    /// Boundary point `h·n + h′·τ` with outward normal `(sin θ, −cos θ)`.
    pub fn point(&self, theta: f64) -> [f64; 2] {
        let (h, dh) = (self.support(theta), self.support_derivative(theta));
        let (s, c) = theta.sin_cos();
        [h * s + dh * c, -h * c + dh * s]
    }

    pub fn support_profile(&self, grid: AngleGrid) -> Result<SupportProfile, OracleError> {
        Ok(SupportProfile::from_fn(grid, 0.0, |t| self.support(t))?)
    }

    /// Boundary points at `vertices` equally spaced tangent angles.
    pub fn polygon(&self, vertices: usize) -> Vec<[f64; 2]> {
        (0..vertices).map(|j| self.point(2.0 * PI * j as f64 / vertices as f64)).collect()
    }
}

fn check_axes(a: f64, b: f64) -> Result<(), OracleError> {
    if !(b > 0.0) || !(a >= b) || !a.is_finite() {
        return Err(OracleError::Invalid(format!("need a >= b > 0, got a={a}, b={b}")));
    }
    Ok(())
}

/// Measures of a dense convex polygon computed by brute force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolygonMeasures {
    pub length: f64,
    pub area: f64,
    pub r_in: f64,
    pub r_out: f64,
    /// Hausdorff distance to the unit disk centred at the polygon's Steiner point.
    pub hausdorff_to_unit_disk: f64,
}

pub const MIN_POLYGON_VERTICES: usize = 64;
pub const MAX_POLYGON_VERTICES: usize = 8192;

/// Perimeter, shoelace area, radii by dense centre-grid search, and the
/// Hausdorff distance to the unit disk by dense two-sided point distances.
pub fn polygon_brute_force(points: &[[f64; 2]]) -> Result<PolygonMeasures, OracleError> {
    let n = points.len();
    if !(MIN_POLYGON_VERTICES..=MAX_POLYGON_VERTICES).contains(&n) {
        return Err(OracleError::Invalid(format!(
            "polygon needs {MIN_POLYGON_VERTICES}..={MAX_POLYGON_VERTICES} vertices, got {n}"
        )));
    }
    let mut v = points.to_vec();
    if shoelace(&v) < 0.0 {
        v.reverse();
    }
    for i in 0..n {
        let a = v[(i + n - 1) % n];
        let b = v[i];
        let c = v[(i + 1) % n];
        if cross(sub(b, a), sub(c, b)) <= 0.0 {
            return Err(OracleError::NonConvex(i));
        }
    }

    let length: f64 = (0..n).map(|i| dist(v[i], v[(i + 1) % n])).sum();
    let area = shoelace(&v);

    let (lo, hi) = bounding_box(&v);
    let start = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let half = (hi[0] - lo[0]).max(hi[1] - lo[1]);

    let r_out = -zoom_search(start, half, |c| -v.iter().map(|&p| dist(p, c)).fold(0.0, f64::max));
    let r_in = zoom_search(start, half, |c| {
        if inside(&v, c) {
            v.iter().map(|&p| dist(p, c)).fold(f64::INFINITY, f64::min)
        } else {
            f64::NEG_INFINITY
        }
    });

    let s = polygon_steiner_point(&v);
    let outward = v.iter().map(|&p| (dist(p, s) - 1.0).max(0.0)).fold(0.0, f64::max);
    let samples = MAX_POLYGON_VERTICES;
    let inward = (0..samples)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / samples as f64;
            let y = [s[0] + a.cos(), s[1] + a.sin()];
            if inside(&v, y) {
                0.0
            } else {
                (0..n).map(|j| segment_distance(y, v[j], v[(j + 1) % n])).fold(f64::INFINITY, f64::min)
            }
        })
        .fold(0.0, f64::max);

    Ok(PolygonMeasures { length, area, r_in, r_out, hausdorff_to_unit_disk: outward.max(inward) })
}

/// Steiner point of a convex polygon: vertices weighted by exterior angle / 2π.
pub fn polygon_steiner_point(v: &[[f64; 2]]) -> [f64; 2] {
    let n = v.len();
    let mut s = [0.0, 0.0];
    for i in 0..n {
        let e0 = sub(v[i], v[(i + n - 1) % n]);
        let e1 = sub(v[(i + 1) % n], v[i]);
        let turn = cross(e0, e1).atan2(e0[0] * e1[0] + e0[1] * e1[1]);
        s[0] += v[i][0] * turn;
        s[1] += v[i][1] * turn;
    }
    [s[0] / (2.0 * PI), s[1] / (2.0 * PI)]
}

/// Repeated 21×21 grid refinement of a maximization over centres.
fn zoom_search(mut center: [f64; 2], mut half: f64, f: impl Fn([f64; 2]) -> f64) -> f64 {
    const SIDE: i32 = 10;
    let floor = half * 1e-11;
    let mut best = f(center);
    while half > floor {
        let cell = half / SIDE as f64;
        let mut next = center;
        for i in -SIDE..=SIDE {
            for j in -SIDE..=SIDE {
                let c = [center[0] + i as f64 * cell, center[1] + j as f64 * cell];
                let val = f(c);
                if val > best {
                    best = val;
                    next = c;
                }
            }
        }
        center = next;
        half = 2.0 * cell;
    }
    best
}

fn shoelace(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| cross(v[i], v[(i + 1) % n])).sum::<f64>()
}

fn bounding_box(v: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    v.iter().fold(
        ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
        |(lo, hi), p| ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])]),
    )
}

/// Point-in-convex-polygon for a counterclockwise vertex list.
fn inside(v: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = v.len();
    (0..n).all(|i| cross(sub(v[(i + 1) % n], v[i]), sub(p, v[i])) >= 0.0)
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

#[inline]
fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
