//! Normal speed laws `v = G(k)k` and numeric checks of the structural
//! hypotheses the blow-up asymptotics rely on.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::LawError;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative slack on `(G(x)x²)″ ≥ 0`, scaled by `max |G(x)x²|` over the probes.
pub const CONVEXITY_TOLERANCE: f64 = 1e-10;

/// Cutoff multiple used when the tail integral has no closed form.
const TAIL_CUTOFF_FACTOR: f64 = 1e8;

/// The speed factor `G` together with its first two derivatives.
///
/// Immutable after construction and cheap to clone; evaluators are shared.
#[derive(Clone)]
pub struct SpeedLaw {
    label: String,
    exponent: Option<f64>,
    g: ScalarFn,
    dg: ScalarFn,
    ddg: ScalarFn,
    tail: Option<ScalarFn>,
}

impl fmt::Debug for SpeedLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpeedLaw")
            .field("label", &self.label)
            .field("exponent", &self.exponent)
            .field("closed_form_tail", &self.tail.is_some())
            .finish()
    }
}

/// `∫_k^∞ dx / (G(x)x³)` with an absolute uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailIntegral {
    pub value: f64,
    pub uncertainty: f64,
    pub closed_form: bool,
}

impl SpeedLaw {
    /// `G(x) = x^(p−1)`, i.e. `v = k^p`.
    pub fn power(p: f64) -> Result<Self, LawError> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(LawError::NonPositiveExponent(p));
        }
        Ok(Self {
            label: format!("power:{p}"),
            exponent: Some(p),
            g: power_fn(p - 1.0),
            dg: Arc::new(move |x: f64| {
                if p == 1.0 {
                    0.0
                } else {
                    (p - 1.0) * x.powf(p - 2.0)
                }
            }),
            ddg: Arc::new(move |x: f64| {
                if p == 1.0 || p == 2.0 {
                    0.0
                } else {
                    (p - 1.0) * (p - 2.0) * x.powf(p - 3.0)
                }
            }),
            tail: Some(Arc::new(move |k: f64| k.powf(-(p + 1.0)) / (p + 1.0))),
        })
    }

    /// A user-supplied law. No closed-form tail integral; quadrature is used.
    pub fn custom<G, DG, DDG>(label: impl Into<String>, g: G, dg: DG, ddg: DDG) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        DG: Fn(f64) -> f64 + Send + Sync + 'static,
        DDG: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            exponent: None,
            g: Arc::new(g),
            dg: Arc::new(dg),
            ddg: Arc::new(ddg),
            tail: None,
        }
    }

    /// Attach a closed form for `∫_k^∞ dx/(G(x)x³)`.
    pub fn with_tail_integral<F>(mut self, tail: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.tail = Some(Arc::new(tail));
        self
    }

    /// Parses a built-in law name. Only `power:<p>` is recognized; `p` may be a
    /// decimal or a fraction such as `1/3`.
    pub fn parse(name: &str) -> Result<Self, LawError> {
        let unknown = || LawError::UnknownLaw(name.to_string());
        let rest = name.trim().strip_prefix("power:").ok_or_else(unknown)?;
        let p = parse_ratio(rest).ok_or_else(unknown)?;
        Self::power(p)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Exponent `p` for power laws.
    pub fn exponent(&self) -> Option<f64> {
        self.exponent
    }

    #[inline]
    pub fn g(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    #[inline]
    pub fn g_prime(&self, x: f64) -> f64 {
        (self.dg)(x)
    }

    #[inline]
    pub fn g_double_prime(&self, x: f64) -> f64 {
        (self.ddg)(x)
    }

    /// `Φ(k) = G(k)k` without argument checks.
    #[inline]
    pub fn phi_unchecked(&self, k: f64) -> f64 {
        (self.g)(k) * k
    }

    /// `k²Φ′(k)`: the diffusion coefficient of the curvature equation.
    #[inline]
    pub fn diffusivity(&self, k: f64) -> f64 {
        k * k * ((self.dg)(k) * k + (self.g)(k))
    }

    pub fn phi(&self, k: f64) -> Result<f64, LawError> {
        checked(k, |k| self.g(k) * k)
    }

    pub fn phi_prime(&self, k: f64) -> Result<f64, LawError> {
        checked(k, |k| self.g_prime(k) * k + self.g(k))
    }

    pub fn phi_double_prime(&self, k: f64) -> Result<f64, LawError> {
        checked(k, |k| self.g_double_prime(k) * k + 2.0 * self.g_prime(k))
    }

    pub fn has_closed_form_tail(&self) -> bool {
        self.tail.is_some()
    }

    /// `∫_k^∞ dx/(G(x)x³)`. Without a closed form the integral is taken by
    /// double-exponential quadrature in `s = ln(x/k)` up to `X = 1e8·k`; the
    /// remainder is bounded by `1/(2G(X)X²)` because `G` is non-decreasing.
    pub fn tail_integral(&self, k: f64) -> Result<TailIntegral, LawError> {
        if !(k > 0.0) {
            return Err(LawError::NonPositiveCurvature(k));
        }
        if let Some(tail) = &self.tail {
            let value = tail(k);
            if !value.is_finite() {
                return Err(LawError::Evaluation { x: k });
            }
            return Ok(TailIntegral {
                value,
                uncertainty: value.abs() * 4.0 * f64::EPSILON,
                closed_form: true,
            });
        }
        let cutoff = k * TAIL_CUTOFF_FACTOR;
        let upper = cutoff.ln() - k.ln();
        let integrand = |s: f64| {
            let x = k * s.exp();
            (-2.0 * s).exp() / (k * k * self.g(x))
        };
        let out = quadrature::integrate(integrand, 0.0, upper, 1e-14 / (k * k * self.g(k)));
        if !out.integral.is_finite() || !out.error_estimate.is_finite() {
            return Err(LawError::Quadrature { k });
        }
        let remainder = 1.0 / (2.0 * self.g(cutoff) * cutoff * cutoff);
        if !remainder.is_finite() {
            return Err(LawError::Evaluation { x: cutoff });
        }
        Ok(TailIntegral {
            value: out.integral + 0.5 * remainder,
            uncertainty: out.error_estimate + 0.5 * remainder,
            closed_form: false,
        })
    }

    /// Samples `n_probes` log-spaced abscissae in `[x_lo, x_hi]` and checks
    /// positivity/monotonicity of `G`, convexity of `G(x)x²`, and the growth
    /// bound `G′(x)x ≤ C₀G(x)` on the upper half of the range.
    pub fn check_hypotheses(
        &self,
        x_lo: f64,
        x_hi: f64,
        n_probes: usize,
    ) -> Result<HypothesisReport, LawError> {
        if !(x_lo > 0.0) || !(x_hi > x_lo) || !x_hi.is_finite() || n_probes < 16 {
            return Err(LawError::ProbeRange { lo: x_lo, hi: x_hi, probes: n_probes });
        }
        let ratio = x_hi / x_lo;
        let xs: Vec<f64> = (0..n_probes)
            .map(|i| x_lo * ratio.powf(i as f64 / (n_probes - 1) as f64))
            .collect();

        struct Probe {
            x: f64,
            g: f64,
            dg: f64,
            gx2: f64,
            gx2_dd: f64,
        }
        let mut probes = Vec::with_capacity(n_probes);
        for &x in &xs {
            let g = self.g(x);
            let dg = self.g_prime(x);
            let ddg = self.g_double_prime(x);
            if !g.is_finite() || !dg.is_finite() || !ddg.is_finite() {
                return Err(LawError::Evaluation { x });
            }
            // (G x²)″ = Φ″x + 2Φ′ with Φ = Gx
            let phi_p = dg * x + g;
            let phi_pp = ddg * x + 2.0 * dg;
            probes.push(Probe { x, g, dg, gx2: g * x * x, gx2_dd: phi_pp * x + 2.0 * phi_p });
        }

        let mut worst = 0.0_f64;
        let mut witness: Option<f64> = None;
        let mut record = |mag: f64, x: f64| {
            if mag > worst {
                worst = mag;
                witness = Some(x);
            }
        };

        let mut h1_ok = true;
        for p in &probes {
            if p.g <= 0.0 {
                h1_ok = false;
                record(-p.g + f64::MIN_POSITIVE, p.x);
            }
            if p.dg < 0.0 {
                h1_ok = false;
                record(-p.dg, p.x);
            }
        }

        let scale = probes.iter().map(|p| p.gx2.abs()).fold(0.0, f64::max);
        let tol = CONVEXITY_TOLERANCE * scale;
        let mut convex_ok = true;
        for p in &probes {
            if p.gx2_dd < -tol {
                convex_ok = false;
                record(-p.gx2_dd / scale.max(f64::MIN_POSITIVE), p.x);
            }
        }

        // growth ratio G′x/G on the upper half of the probe range
        let upper = &probes[n_probes / 2..];
        let growth: Vec<f64> = upper.iter().map(|p| p.dg * p.x / p.g).collect();
        let c0 = growth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let quarter = growth.len() / 2;
        let low_max = growth[..quarter].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let high_max = growth[quarter..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // a ratio still climbing across the top of the range has no finite C₀
        let unbounded = !c0.is_finite() || (high_max > 0.0 && high_max > 1.5 * low_max.max(0.0) + 1e-12);
        let growth_ok = !unbounded;
        if unbounded {
            let top = upper.last().map(|p| p.x).unwrap_or(x_hi);
            record(if c0.is_finite() { high_max - low_max.max(0.0) } else { f64::MAX }, top);
        }

        Ok(HypothesisReport {
            law: self.label.clone(),
            h1_ok,
            h2_convexity_ok: convex_ok,
            h2_growth_ok: growth_ok,
            witness_c0: if growth_ok { Some(c0.max(0.0)) } else { None },
            x_lo,
            x_hi,
            n_probes,
            worst_violation: worst,
            witness_abscissa: witness,
        })
    }
}

/// `x^e`, avoiding `powf` for the small integer exponents used most often.
fn power_fn(e: f64) -> ScalarFn {
    if e == 0.0 {
        Arc::new(|_| 1.0)
    } else if e == 1.0 {
        Arc::new(|x| x)
    } else if e == 2.0 {
        Arc::new(|x| x * x)
    } else {
        Arc::new(move |x: f64| x.powf(e))
    }
}

fn checked(k: f64, f: impl Fn(f64) -> f64) -> Result<f64, LawError> {
    if !(k > 0.0) {
        return Err(LawError::NonPositiveCurvature(k));
    }
    let v = f(k);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(LawError::Evaluation { x: k })
    }
}

fn parse_ratio(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().ok()?;
            let den: f64 = den.trim().parse().ok()?;
            num / den
        }
        None => s.parse().ok()?,
    };
    v.is_finite().then_some(v)
}

/// Outcome of [`SpeedLaw::check_hypotheses`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub law: String,
    pub h1_ok: bool,
    pub h2_convexity_ok: bool,
    pub h2_growth_ok: bool,
    /// Minimal growth constant over the upper half of the probes (clamped at 0).
    pub witness_c0: Option<f64>,
    pub x_lo: f64,
    pub x_hi: f64,
    pub n_probes: usize,
    pub worst_violation: f64,
    pub witness_abscissa: Option<f64>,
}

impl HypothesisReport {
    pub fn all_ok(&self) -> bool {
        self.h1_ok && self.h2_convexity_ok && self.h2_growth_ok
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |ok: bool| if ok { "ok" } else { "FAIL" };
        writeln!(f, "law              {}", self.law)?;
        writeln!(f, "probe range      [{:e}, {:e}] ({} probes)", self.x_lo, self.x_hi, self.n_probes)?;
        writeln!(f, "H1 G>0, G'>=0    {}", flag(self.h1_ok))?;
        writeln!(f, "H2 (Gx^2)''>=0   {}", flag(self.h2_convexity_ok))?;
        writeln!(f, "H2 G'x<=C0 G     {}", flag(self.h2_growth_ok))?;
        match self.witness_c0 {
            Some(c0) => writeln!(f, "C0               {c0}")?,
            None => writeln!(f, "C0               none")?,
        }
        match self.witness_abscissa {
            Some(x) => write!(f, "worst violation  {:e} at x = {x:e}", self.worst_violation),
            None => write!(f, "worst violation  0"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_law_values() {
        assert_eq!(SpeedLaw::power(1.0).unwrap().g(5.0), 1.0);
        assert_relative_eq!(SpeedLaw::power(1.0 / 3.0).unwrap().g(8.0), 0.25, max_relative = 1e-15);
        let tail = SpeedLaw::power(2.0).unwrap().tail_integral(1.0).unwrap();
        assert_relative_eq!(tail.value, 1.0 / 3.0, max_relative = 1e-15);
        assert!(SpeedLaw::power(0.0).is_err());
        assert!(SpeedLaw::power(-1.0).is_err());
    }

    #[test]
    fn phi_and_derivatives() {
        let p1 = SpeedLaw::power(1.0).unwrap();
        assert_eq!((p1.phi(2.0).unwrap(), p1.phi_prime(2.0).unwrap(), p1.phi_double_prime(2.0).unwrap()), (2.0, 1.0, 0.0));
        let p3 = SpeedLaw::power(3.0).unwrap();
        assert_relative_eq!(p3.phi(2.0).unwrap(), 8.0, max_relative = 1e-14);
        assert_relative_eq!(p3.phi_prime(2.0).unwrap(), 12.0, max_relative = 1e-14);
        assert_relative_eq!(p3.phi_double_prime(2.0).unwrap(), 12.0, max_relative = 1e-14);
        assert!(p1.phi(0.0).is_err());
        assert!(p1.phi(-1.0).is_err());
    }

    #[test]
    fn non_finite_evaluation_is_an_error() {
        let law = SpeedLaw::custom("blowup", |x| 1.0 / (x - 1.0).abs().min(0.0), |_| 0.0, |_| 0.0);
        assert_eq!(law.phi(2.0), Err(LawError::Evaluation { x: 2.0 }));
    }

    #[test]
    fn parse_names() {
        assert_eq!(SpeedLaw::parse("power:2").unwrap().exponent(), Some(2.0));
        assert_relative_eq!(SpeedLaw::parse("power:1/3").unwrap().exponent().unwrap(), 1.0 / 3.0);
        assert!(SpeedLaw::parse("power:").is_err());
        assert!(SpeedLaw::parse("power:-1").is_err());
        assert!(SpeedLaw::parse("exp:1").is_err());
        assert!(SpeedLaw::parse("power:1/0").is_err());
    }

    #[test]
    fn hypotheses_for_power_laws() {
        let r1 = SpeedLaw::power(1.0).unwrap().check_hypotheses(0.1, 100.0, 64).unwrap();
        assert!(r1.all_ok());
        assert_eq!(r1.witness_c0, Some(0.0));
        let r3 = SpeedLaw::power(3.0).unwrap().check_hypotheses(0.1, 100.0, 64).unwrap();
        assert!(r3.all_ok());
        assert_relative_eq!(r3.witness_c0.unwrap(), 2.0, max_relative = 1e-12);
        let half = SpeedLaw::power(0.5).unwrap().check_hypotheses(0.1, 100.0, 64).unwrap();
        assert!(!half.h1_ok);
        assert!(half.worst_violation > 0.0 && half.witness_abscissa.is_some());
    }

    #[test]
    fn decreasing_speed_fails_h1() {
        let law = SpeedLaw::custom("exp(-x)", |x| (-x).exp(), |x| -(-x).exp(), |x| (-x).exp());
        let r = law.check_hypotheses(1.0, 10.0, 32).unwrap();
        assert!(!r.h1_ok);
        assert!(r.worst_violation > 0.0);
        assert!(r.witness_abscissa.is_some());
    }

    #[test]
    fn unbounded_growth_ratio_fails_h2() {
        let law = SpeedLaw::custom("exp(x)", f64::exp, f64::exp, f64::exp);
        let r = law.check_hypotheses(1.0, 10.0, 32).unwrap();
        assert!(r.h1_ok && r.h2_convexity_ok);
        assert!(!r.h2_growth_ok);
        assert!(r.witness_c0.is_none());
    }

    #[test]
    fn probe_errors() {
        let law = SpeedLaw::power(1.0).unwrap();
        assert!(law.check_hypotheses(1.0, 1.0, 32).is_err());
        assert!(law.check_hypotheses(1.0, 2.0, 8).is_err());
        let nan = SpeedLaw::custom("nan", |x| if x > 5.0 { f64::NAN } else { 1.0 }, |_| 0.0, |_| 0.0);
        assert!(matches!(nan.check_hypotheses(1.0, 10.0, 32), Err(LawError::Evaluation { x }) if x > 5.0));
    }

    #[test]
    fn quadrature_tail_for_custom_law() {
        // G(x) = 1 + x has ∫_k^∞ dx/((1+x)x³) = 1/(2k²) − 1/k + ln(1 + 1/k)
        let law = SpeedLaw::custom("1+x", |x| 1.0 + x, |_| 1.0, |_| 0.0);
        for &k in &[0.5, 1.0, 4.0] {
            let t = law.tail_integral(k).unwrap();
            let exact = 1.0 / (2.0 * k * k) - 1.0 / k + (1.0 / k).ln_1p();
            assert_relative_eq!(t.value, exact, max_relative = 1e-9);
            assert!(t.uncertainty < 1e-9 * exact);
        }
    }
}
