//! Uniform periodic angle grid and the differentiation operators that act on it.
//!
//! Every profile in this crate is a 2π-periodic function sampled at
//! `θ_j = 2πj/n`. Derivatives default to Fourier collocation; a fourth-order
//! central-difference stencil is kept for robustness experiments.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Smallest grid the integrator accepts.
pub const MIN_GRID: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngleGrid {
    n: usize,
}

impl AngleGrid {
    pub fn new(n: usize) -> Result<Self, GeometryError> {
        if n < MIN_GRID || !n.is_power_of_two() {
            return Err(GeometryError::GridSize(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    #[inline]
    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    pub fn thetas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.theta(j))
    }

    /// Trapezoid rule for ∮ f dθ; spectrally accurate for smooth periodic f.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n);
        pairwise_sum(f) * self.spacing()
    }

    /// Outward unit normal `(sin θ, −cos θ)` at node `j` for the tangent-angle
    /// parametrization (tangent `(cos θ, sin θ)`, counterclockwise traversal).
    #[inline]
    pub fn normal(&self, j: usize) -> [f64; 2] {
        let (s, c) = self.theta(j).sin_cos();
        [s, -c]
    }
}

/// Spatial discretization of θ-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffScheme {
    #[default]
    Fourier,
    CentralFd4,
}

impl DiffScheme {
    /// Spectral radius of the discrete second-derivative operator on `grid`.
    pub fn second_derivative_radius(self, grid: AngleGrid) -> f64 {
        match self {
            DiffScheme::Fourier => {
                let half = (grid.len() / 2) as f64;
                half * half
            }
            DiffScheme::CentralFd4 => 16.0 / (3.0 * grid.spacing().powi(2)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DiffScheme::Fourier => "fourier",
            DiffScheme::CentralFd4 => "central-fd4",
        }
    }
}

impl std::str::FromStr for DiffScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fourier" => Ok(DiffScheme::Fourier),
            "central-fd4" | "fd4" => Ok(DiffScheme::CentralFd4),
            other => Err(format!("unknown differentiation scheme '{other}'")),
        }
    }
}

/// Pairwise summation. Sums of identical values over a power-of-two length are
/// exact, which keeps constant profiles exactly constant under differentiation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        len => {
            let (a, b) = xs.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Cached forward/inverse FFT plans for one grid size.
pub struct Spectral {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

fn plan_cache() -> &'static Mutex<HashMap<usize, Arc<Spectral>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Spectral>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Spectral {
    /// Shared plans for length `n`; built once per process.
    pub fn for_len(n: usize) -> Arc<Spectral> {
        let mut cache = plan_cache().lock().unwrap_or_else(|e| e.into_inner());
        cache
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Spectral {
                    n,
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                })
            })
            .clone()
    }

    pub fn for_grid(grid: AngleGrid) -> Arc<Spectral> {
        Self::for_len(grid.len())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Signed wavenumber of FFT bin `j`. The Nyquist bin reports `n/2`.
    #[inline]
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Normalized coefficients `f̂_m = (1/n) Σ f_j e^{−imθ_j}`.
    pub fn coefficients(&self, f: &[f64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.n, "profile length does not match grid");
        let scale = 1.0 / self.n as f64;
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x * scale, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse of [`Spectral::coefficients`], keeping the real part.
    pub fn synthesize(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut coeffs);
        coeffs.into_iter().map(|c| c.re).collect()
    }

    /// Applies the Fourier multiplier `symbol(m)` to the zero-mean part of `f`
    /// and returns `(mean, result)`. The mean is removed first so that a
    /// constant input yields an exactly-zero transform.
    fn apply_zero_mean<S>(&self, f: &[f64], symbol: S) -> (f64, Vec<f64>)
    where
        S: Fn(i64) -> Complex64,
    {
        let mean = pairwise_sum(f) / self.n as f64;
        let centered: Vec<f64> = f.iter().map(|&x| x - mean).collect();
        let mut coeffs = self.coefficients(&centered);
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c *= symbol(self.wavenumber(j));
        }
        (mean, self.synthesize(coeffs))
    }

    pub fn first_derivative(&self, f: &[f64]) -> Vec<f64> {
        let nyquist = (self.n / 2) as i64;
        self.apply_zero_mean(f, |m| {
            if m == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, m as f64)
            }
        })
        .1
    }

    pub fn second_derivative(&self, f: &[f64]) -> Vec<f64> {
        self.apply_zero_mean(f, |m| Complex64::new(-(m * m) as f64, 0.0)).1
    }

    /// `f″ + f` with an optional two-thirds-rule filter on the derivative term.
    pub fn second_derivative_plus_identity(&self, f: &[f64], dealias: bool) -> Vec<f64> {
        let cutoff = (self.n / 3) as i64;
        let (_, mut d2) = self.apply_zero_mean(f, |m| {
            if dealias && m.abs() > cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(-(m * m) as f64, 0.0)
            }
        });
        for (d, &x) in d2.iter_mut().zip(f) {
            *d += x;
        }
        d2
    }

    /// Cumulative integral `∫_0^θ_j f dθ`, exact for trigonometric polynomials
    /// below Nyquist. A nonzero mean contributes the linear term `f̂_0 θ`.
    pub fn antiderivative(&self, f: &[f64]) -> Vec<f64> {
        let nyquist = (self.n / 2) as i64;
        let (mean, mut periodic) = self.apply_zero_mean(f, |m| {
            if m == 0 || m == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / m as f64)
            }
        });
        let offset = periodic[0];
        let dtheta = 2.0 * PI / self.n as f64;
        for (j, v) in periodic.iter_mut().enumerate() {
            *v += mean * dtheta * j as f64 - offset;
        }
        periodic
    }

    /// Solves `u″ + u = f` on the periodic grid with the `m = ±1` kernel modes
    /// set to zero. Returns the solution and the magnitude of the discarded
    /// first harmonic of `f`, `(|f̂_1| + |f̂_{−1}|)`.
    pub fn solve_second_plus_identity(&self, f: &[f64]) -> (Vec<f64>, f64) {
        let mut coeffs = self.coefficients(f);
        let mut dropped = 0.0;
        for (j, c) in coeffs.iter_mut().enumerate() {
            let m = self.wavenumber(j);
            if m.abs() == 1 {
                dropped += c.norm();
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c /= (1 - m * m) as f64;
            }
        }
        (self.synthesize(coeffs), dropped)
    }

    /// Band-limited interpolation onto a grid `factor` times finer.
    pub fn upsample(&self, f: &[f64], factor: usize) -> Vec<f64> {
        if factor <= 1 {
            return f.to_vec();
        }
        let fine_n = self.n * factor;
        let coeffs = self.coefficients(f);
        let mut fine = vec![Complex64::new(0.0, 0.0); fine_n];
        let half = self.n / 2;
        for (j, &c) in coeffs.iter().enumerate() {
            let m = self.wavenumber(j);
            if j == half {
                // split the Nyquist coefficient symmetrically
                fine[half] += c * 0.5;
                fine[fine_n - half] += c * 0.5;
            } else if m >= 0 {
                fine[m as usize] = c;
            } else {
                fine[(fine_n as i64 + m) as usize] = c;
            }
        }
        Spectral::for_len(fine_n).synthesize(fine)
    }
}

/// Fourth-order central differences on the periodic grid.
pub mod fd4 {
    pub fn first_derivative(f: &[f64], dtheta: f64) -> Vec<f64> {
        let n = f.len();
        let at = |j: isize| f[j.rem_euclid(n as isize) as usize];
        (0..n as isize)
            .map(|j| (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * dtheta))
            .collect()
    }

    pub fn second_derivative(f: &[f64], dtheta: f64) -> Vec<f64> {
        let n = f.len();
        let at = |j: isize| f[j.rem_euclid(n as isize) as usize];
        let scale = 12.0 * dtheta * dtheta;
        (0..n as isize)
            .map(|j| {
                (-at(j - 2) + 16.0 * at(j - 1) - 30.0 * at(j) + 16.0 * at(j + 1) - at(j + 2))
                    / scale
            })
            .collect()
    }
}

/// Scheme-dispatching derivative helpers.
pub fn first_derivative(grid: AngleGrid, scheme: DiffScheme, f: &[f64]) -> Vec<f64> {
    match scheme {
        DiffScheme::Fourier => Spectral::for_grid(grid).first_derivative(f),
        DiffScheme::CentralFd4 => fd4::first_derivative(f, grid.spacing()),
    }
}

pub fn second_derivative(grid: AngleGrid, scheme: DiffScheme, f: &[f64]) -> Vec<f64> {
    match scheme {
        DiffScheme::Fourier => Spectral::for_grid(grid).second_derivative(f),
        DiffScheme::CentralFd4 => fd4::second_derivative(f, grid.spacing()),
    }
}
