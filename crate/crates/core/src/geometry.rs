//! Curvature, support-function, and point representations of a strictly convex
//! closed curve, and the scalar observables computed from them.
//!
//! Conventions: `θ` is the tangent angle, the tangent is `(cos θ, sin θ)`, the
//! curve is traversed counterclockwise, and the outward normal is
//! `n(θ) = (sin θ, −cos θ)`. The support function is `h(θ) = ⟨γ(θ), n(θ)⟩`
//! and satisfies `h″ + h = 1/k`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::spectral::{self, AngleGrid, DiffScheme, Spectral};

/// `support_from_curvature` refuses profiles whose closure residual exceeds
/// this fraction of the length.
pub const CLOSURE_TOLERANCE: f64 = 1e-6;

/// Profiles with `k_max/k_min` above this are treated as numerically non-convex.
pub const MAX_CURVATURE_RATIO: f64 = 1e8;

/// Oversampling used by the sup-norm based measures (radii, Hausdorff).
const SUP_OVERSAMPLE: usize = 4;

fn check_len(grid: AngleGrid, got: usize) -> Result<(), GeometryError> {
    if grid.len() != got {
        return Err(GeometryError::LengthMismatch { expected: grid.len(), got });
    }
    Ok(())
}

/// Curvature `k(θ_j)` at time `t`; strictly positive at every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    grid: AngleGrid,
    k: Vec<f64>,
    t: f64,
}

impl CurvatureProfile {
    pub fn new(grid: AngleGrid, k: Vec<f64>, t: f64) -> Result<Self, GeometryError> {
        check_len(grid, k.len())?;
        for (index, &value) in k.iter().enumerate() {
            if !value.is_finite() {
                return Err(GeometryError::NonFinite { index });
            }
            if value <= 0.0 {
                return Err(GeometryError::NonPositiveCurvature { index, value });
            }
        }
        Ok(Self { grid, k, t })
    }

    pub fn from_fn(grid: AngleGrid, t: f64, f: impl Fn(f64) -> f64) -> Result<Self, GeometryError> {
        Self::new(grid, grid.thetas().map(f).collect(), t)
    }

    pub fn constant(grid: AngleGrid, k: f64, t: f64) -> Result<Self, GeometryError> {
        Self::new(grid, vec![k; grid.len()], t)
    }

    pub fn grid(&self) -> AngleGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.k
    }

    pub fn into_values(self) -> Vec<f64> {
        self.k
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn k_min(&self) -> f64 {
        self.k.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn k_max(&self) -> f64 {
        self.k.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Support function `h(θ_j)` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportProfile {
    grid: AngleGrid,
    h: Vec<f64>,
    t: f64,
}

impl SupportProfile {
    /// Checks length and finiteness only; convexity is checked by the
    /// operations that need `h″ + h > 0`.
    pub fn new(grid: AngleGrid, h: Vec<f64>, t: f64) -> Result<Self, GeometryError> {
        check_len(grid, h.len())?;
        if let Some(index) = h.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite { index });
        }
        Ok(Self { grid, h, t })
    }

    pub fn from_fn(grid: AngleGrid, t: f64, f: impl Fn(f64) -> f64) -> Result<Self, GeometryError> {
        Self::new(grid, grid.thetas().map(f).collect(), t)
    }

    pub fn grid(&self) -> AngleGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn into_values(self) -> Vec<f64> {
        self.h
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// The same body translated by `c`: `h(θ) + c·n(θ)`.
    pub fn translated(&self, c: [f64; 2]) -> Self {
        let h = self
            .h
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let n = self.grid.normal(j);
                v + c[0] * n[0] + c[1] * n[1]
            })
            .collect();
        Self { grid: self.grid, h, t: self.t }
    }
}

/// Sampled boundary points `γ(θ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCurve {
    grid: AngleGrid,
    points: Vec<[f64; 2]>,
}

impl PlaneCurve {
    pub fn new(grid: AngleGrid, points: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        check_len(grid, points.len())?;
        Ok(Self { grid, points })
    }

    pub fn grid(&self) -> AngleGrid {
        self.grid
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }
}

/// Integrates `(cos θ/k, sin θ/k)` from `θ = 0`; the first point is the origin.
pub fn reconstruct(kp: &CurvatureProfile) -> PlaneCurve {
    let grid = kp.grid;
    let spec = Spectral::for_grid(grid);
    let (cx, cy): (Vec<f64>, Vec<f64>) = grid
        .thetas()
        .zip(&kp.k)
        .map(|(t, &k)| (t.cos() / k, t.sin() / k))
        .unzip();
    let x = spec.antiderivative(&cx);
    let y = spec.antiderivative(&cy);
    PlaneCurve { grid, points: x.into_iter().zip(y).map(|(x, y)| [x, y]).collect() }
}

/// `(∮ cos θ/k dθ, ∮ sin θ/k dθ)`; both vanish for a closed curve.
pub fn closure_residual(kp: &CurvatureProfile) -> (f64, f64) {
    let grid = kp.grid;
    let (cx, cy): (Vec<f64>, Vec<f64>) = grid
        .thetas()
        .zip(&kp.k)
        .map(|(t, &k)| (t.cos() / k, t.sin() / k))
        .unzip();
    (grid.integrate(&cx), grid.integrate(&cy))
}

/// `L = ∮ dθ/k`.
pub fn length_of(kp: &CurvatureProfile) -> f64 {
    let inv: Vec<f64> = kp.k.iter().map(|k| 1.0 / k).collect();
    kp.grid.integrate(&inv)
}

/// `∮ k dθ = ∮ k² ds`.
pub fn total_curvature(kp: &CurvatureProfile) -> f64 {
    kp.grid.integrate(&kp.k)
}

/// Enclosed area `½∮(x y′ − y x′) dθ` with spectral derivatives of the points.
pub fn area_of(curve: &PlaneCurve) -> f64 {
    let spec = Spectral::for_grid(curve.grid);
    let (x, y): (Vec<f64>, Vec<f64>) = curve.points.iter().map(|p| (p[0], p[1])).unzip();
    let dx = spec.first_derivative(&x);
    let dy = spec.first_derivative(&y);
    let integrand: Vec<f64> = (0..x.len()).map(|j| x[j] * dy[j] - y[j] * dx[j]).collect();
    0.5 * curve.grid.integrate(&integrand)
}

/// `A = ½∮ h(h″ + h) dθ`.
pub fn area_from_support(sp: &SupportProfile) -> f64 {
    let spec = Spectral::for_grid(sp.grid);
    let w = spec.second_derivative_plus_identity(&sp.h, false);
    let integrand: Vec<f64> = sp.h.iter().zip(&w).map(|(h, w)| h * w).collect();
    0.5 * sp.grid.integrate(&integrand)
}

/// Area straight from curvature samples: with `f = 1/k`,
/// `A = π Σ_{m ≠ ±1} |f̂_m|²/(1 − m²)` (discrete Parseval on `½∮ h/k dθ`).
pub fn area_from_curvature_values(spec: &Spectral, k: &[f64]) -> f64 {
    let f: Vec<f64> = k.iter().map(|k| 1.0 / k).collect();
    let coeffs = spec.coefficients(&f);
    let terms: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .filter_map(|(j, c)| {
            let m = spec.wavenumber(j);
            (m.abs() != 1).then(|| c.norm_sqr() / (1 - m * m) as f64)
        })
        .collect();
    PI * spectral::pairwise_sum(&terms)
}

/// Inverts `h″ + h = 1/k` with the first harmonics set to zero, which places
/// the Steiner point at the origin.
pub fn support_from_curvature(kp: &CurvatureProfile) -> Result<SupportProfile, GeometryError> {
    let (rx, ry) = closure_residual(kp);
    let length = length_of(kp);
    let residual = rx.abs() + ry.abs();
    if residual > CLOSURE_TOLERANCE * length {
        return Err(GeometryError::NotClosed { residual, length });
    }
    Ok(support_from_curvature_projected(kp))
}

/// Same inversion without the closure check. The first harmonics of `1/k`
/// are dropped, so any closure drift is silently projected away; meant for
/// evolved profiles whose residual is tracked separately.
pub fn support_from_curvature_projected(kp: &CurvatureProfile) -> SupportProfile {
    let f: Vec<f64> = kp.k.iter().map(|k| 1.0 / k).collect();
    let (h, _) = Spectral::for_grid(kp.grid).solve_second_plus_identity(&f);
    SupportProfile { grid: kp.grid, h, t: kp.t }
}

pub fn k_from_support(sp: &SupportProfile) -> Result<CurvatureProfile, GeometryError> {
    k_from_support_with(sp, DiffScheme::Fourier)
}

/// `k = 1/(h″ + h)` with the chosen grid operator.
pub fn k_from_support_with(
    sp: &SupportProfile,
    scheme: DiffScheme,
) -> Result<CurvatureProfile, GeometryError> {
    let w = radius_of_curvature(sp, scheme);
    let mut k = Vec::with_capacity(w.len());
    for (index, &value) in w.iter().enumerate() {
        if !(value > 0.0) {
            return Err(GeometryError::ConvexityLoss { index, value });
        }
        k.push(1.0 / value);
    }
    Ok(CurvatureProfile { grid: sp.grid, k, t: sp.t })
}

/// `h″ + h` on the grid.
pub fn radius_of_curvature(sp: &SupportProfile, scheme: DiffScheme) -> Vec<f64> {
    match scheme {
        DiffScheme::Fourier => Spectral::for_grid(sp.grid).second_derivative_plus_identity(&sp.h, false),
        DiffScheme::CentralFd4 => {
            let mut d2 = spectral::fd4::second_derivative(&sp.h, sp.grid.spacing());
            for (d, h) in d2.iter_mut().zip(&sp.h) {
                *d += h;
            }
            d2
        }
    }
}

/// Boundary points `γ = h n + h′ τ` from the support function.
pub fn support_to_curve(sp: &SupportProfile) -> PlaneCurve {
    let dh = Spectral::for_grid(sp.grid).first_derivative(&sp.h);
    let points = (0..sp.h.len())
        .map(|j| {
            let (s, c) = sp.grid.theta(j).sin_cos();
            [sp.h[j] * s + dh[j] * c, -sp.h[j] * c + dh[j] * s]
        })
        .collect();
    PlaneCurve { grid: sp.grid, points }
}

/// Steiner point `(1/π)∮ h n dθ`.
pub fn steiner_point(sp: &SupportProfile) -> [f64; 2] {
    let (a, b): (Vec<f64>, Vec<f64>) = (0..sp.h.len())
        .map(|j| {
            let n = sp.grid.normal(j);
            (sp.h[j] * n[0], sp.h[j] * n[1])
        })
        .unzip();
    [sp.grid.integrate(&a) / PI, sp.grid.integrate(&b) / PI]
}

fn reject_degenerate(sp: &SupportProfile) -> Result<(), GeometryError> {
    let w = radius_of_curvature(sp, DiffScheme::Fourier);
    if let Some((index, &value)) = w.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(GeometryError::ConvexityLoss { index, value });
    }
    let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ratio = hi / lo;
    if ratio > MAX_CURVATURE_RATIO {
        return Err(GeometryError::Degenerate { ratio });
    }
    Ok(())
}

/// Support values on the oversampled grid, with the matching normals.
struct FineSupport {
    h: Vec<f64>,
    nx: Vec<f64>,
    ny: Vec<f64>,
}

impl FineSupport {
    fn new(sp: &SupportProfile, shift: [f64; 2]) -> Self {
        let centered = sp.translated([-shift[0], -shift[1]]);
        let h = Spectral::for_grid(sp.grid).upsample(&centered.h, SUP_OVERSAMPLE);
        let n = h.len();
        let (nx, ny) = (0..n)
            .map(|j| {
                let (s, c) = (2.0 * PI * j as f64 / n as f64).sin_cos();
                (s, -c)
            })
            .unzip();
        Self { h, nx, ny }
    }

    /// `min_θ (h − c·n)` and `max_θ (h − c·n)`.
    fn extrema(&self, c: [f64; 2]) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..self.h.len() {
            let v = self.h[j] - c[0] * self.nx[j] - c[1] * self.ny[j];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Shrinking 9×9 grid search for the maximum of `f` around `start`. The box
/// only shrinks when the best point is interior to it.
fn grid_search(start: [f64; 2], mut half_width: f64, tol: f64, f: impl Fn([f64; 2]) -> f64) -> ([f64; 2], f64) {
    const SIDE: i32 = 4;
    let mut center = start;
    let mut best = f(center);
    for _ in 0..400 {
        if half_width <= tol {
            break;
        }
        let step = half_width / SIDE as f64;
        let mut arg = (0, 0);
        let mut val = best;
        for i in -SIDE..=SIDE {
            for j in -SIDE..=SIDE {
                if i == 0 && j == 0 {
                    continue;
                }
                let c = [center[0] + i as f64 * step, center[1] + j as f64 * step];
                let v = f(c);
                if v > val {
                    val = v;
                    arg = (i, j);
                }
            }
        }
        if arg != (0, 0) {
            center = [center[0] + arg.0 as f64 * step, center[1] + arg.1 as f64 * step];
            best = val;
        }
        if arg.0.abs() < SIDE && arg.1.abs() < SIDE {
            half_width *= 0.5;
        }
    }
    (center, best)
}

/// Inradius and circumradius: `r_in = max_c min_θ (h − c·n)`,
/// `r_out = min_c max_θ (h − c·n)`.
pub fn radii(sp: &SupportProfile) -> Result<(f64, f64), GeometryError> {
    reject_degenerate(sp)?;
    let s = steiner_point(sp);
    let fine = FineSupport::new(sp, s);
    let scale = fine.h.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-13 * scale;
    let (_, r_in) = grid_search([0.0, 0.0], scale, tol, |c| fine.extrema(c).0);
    let (_, neg_out) = grid_search([0.0, 0.0], scale, tol, |c| -fine.extrema(c).1);
    Ok((r_in, -neg_out))
}

/// Sup-norm distance between the Steiner-centred support function and the
/// unit disk's (`h ≡ 1`), i.e. the Hausdorff distance of the bodies.
pub fn hausdorff_to_unit_disk(sp: &SupportProfile) -> Result<f64, GeometryError> {
    reject_degenerate(sp)?;
    let fine = FineSupport::new(sp, steiner_point(sp));
    Ok(fine.h.iter().fold(0.0_f64, |m, h| m.max((h - 1.0).abs())))
}

/// Rescales by `√(π/A)` so the enclosed area becomes `π`.
pub fn normalize(sp: &SupportProfile, area: f64) -> Result<SupportProfile, GeometryError> {
    if !(area > 0.0) || !area.is_finite() {
        return Err(GeometryError::Invalid(format!("area must be positive, got {area}")));
    }
    let scale = (PI / area).sqrt();
    Ok(SupportProfile { grid: sp.grid, h: sp.h.iter().map(|h| h * scale).collect(), t: sp.t })
}

/// Scalar observables of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub t: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "A")]
    pub area: f64,
    pub iso_ratio: f64,
    pub r_in: f64,
    pub r_out: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub bonnesen_gap: f64,
    pub gage_deficit: f64,
    /// Hausdorff distance of the area-normalized curve to the unit disk.
    pub hausdorff: f64,
    /// Euclidean norm of the closure residual vector.
    pub closure_residual: f64,
    /// `∮ k dθ`.
    pub total_curvature: f64,
}

/// Builds the summary from matching curvature and support representations.
pub fn summarize(kp: &CurvatureProfile, sp: &SupportProfile) -> Result<GeometrySummary, GeometryError> {
    let length = length_of(kp);
    let area = area_from_support(sp);
    if !(area > 0.0) {
        return Err(GeometryError::Invalid(format!("non-positive area {area}")));
    }
    let (r_in, r_out) = radii(sp)?;
    let (cx, cy) = closure_residual(kp);
    let iso_ratio = length * length / area;
    let total = total_curvature(kp);
    let spread = r_out - r_in;
    Ok(GeometrySummary {
        t: kp.t,
        length,
        area,
        iso_ratio,
        r_in,
        r_out,
        k_min: kp.k_min(),
        k_max: kp.k_max(),
        bonnesen_gap: iso_ratio - 4.0 * PI - PI * PI * spread * spread / area,
        gage_deficit: 1.0 - (PI * length / area) / total,
        hausdorff: hausdorff_to_unit_disk(&normalize(sp, area)?)?,
        closure_residual: cx.hypot(cy),
        total_curvature: total,
    })
}

pub fn summarize_curvature(kp: &CurvatureProfile) -> Result<GeometrySummary, GeometryError> {
    summarize(kp, &support_from_curvature(kp)?)
}

pub fn summarize_support(sp: &SupportProfile) -> Result<GeometrySummary, GeometryError> {
    summarize(&k_from_support(sp)?, sp)
}
