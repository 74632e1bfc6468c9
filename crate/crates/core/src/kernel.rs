//! Relaxation kernels for the memory term and the convex gauges that shape
//! the decay envelopes.
//!
//! A [`Kernel`] caches its total mass `g0 = ∫₀^∞ g`, the resolvent weight
//! `g1 = ∫₀^∞ (1 − e^{−s}) g`, and the smallest `d0` with `g′ ≥ −d0·g`.
//! [`ConvexGauge`] carries the functions `G₀`, `G₁` and `G₁⁻¹` that turn the
//! kernel classification into an explicit energy envelope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Relative tolerance used for every kernel quadrature.
pub const QUAD_TOL: f64 = 1e-10;

/// Improper integrals are truncated where `g` falls below this fraction of `g(0)`.
const TRUNCATION_RATIO: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelFamily {
    /// `g(s) = a·e^{−d1·s}`
    Exponential { amplitude: f64, rate: f64 },
    /// `g(s) = q0·(1 + s)^{−q}` with `q > 1`
    Polynomial { amplitude: f64, exponent: f64 },
    /// Piecewise-linear table of `g` and `g′`, zero past the last node.
    Tabulated {
        s: Vec<f64>,
        g: Vec<f64>,
        dg: Vec<f64>,
    },
    /// No memory at all.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    g0: f64,
    g1: f64,
    d0: f64,
    g_at_zero: f64,
}

impl Kernel {
    /// Builds a kernel and caches its integrals.
    pub fn new(family: KernelFamily) -> Result<Kernel> {
        match &family {
            KernelFamily::Exponential { amplitude, rate } => {
                if !(*amplitude > 0.0 && amplitude.is_finite()) {
                    return Err(Error::InvalidKernel(format!(
                        "exponential amplitude must be positive, got {amplitude}"
                    )));
                }
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(Error::InvalidKernel(format!(
                        "exponential rate must be positive, got {rate}"
                    )));
                }
            }
            KernelFamily::Polynomial { amplitude, exponent } => {
                if !(*amplitude > 0.0 && amplitude.is_finite()) {
                    return Err(Error::InvalidKernel(format!(
                        "polynomial amplitude must be positive, got {amplitude}"
                    )));
                }
                if !(*exponent > 1.0 && exponent.is_finite()) {
                    return Err(Error::InvalidKernel(format!(
                        "polynomial exponent must exceed 1 for a finite total mass, got {exponent}"
                    )));
                }
            }
            KernelFamily::Tabulated { s, g, dg } => validate_table(s, g, dg)?,
            KernelFamily::Zero => {}
        }
        let mut kernel = Kernel {
            family,
            g0: 0.0,
            g1: 0.0,
            d0: 0.0,
            g_at_zero: 0.0,
        };
        kernel.g_at_zero = kernel.value(0.0);
        kernel.g0 = kernel.closed_form_mass().unwrap_or_else(|| kernel.tail(0.0));
        kernel.g1 = kernel.resolvent_weight(1.0);
        kernel.d0 = kernel.smallest_d0();
        Ok(kernel)
    }

    pub fn exponential(amplitude: f64, rate: f64) -> Result<Kernel> {
        Kernel::new(KernelFamily::Exponential { amplitude, rate })
    }

    pub fn polynomial(amplitude: f64, exponent: f64) -> Result<Kernel> {
        Kernel::new(KernelFamily::Polynomial { amplitude, exponent })
    }

    /// A tabulated kernel. The derivative table is mandatory: the hypothesis
    /// checks are statements about the sign and size of `g′`.
    pub fn tabulated(s: Vec<f64>, g: Vec<f64>, dg: Vec<f64>) -> Result<Kernel> {
        Kernel::new(KernelFamily::Tabulated { s, g, dg })
    }

    pub fn zero() -> Kernel {
        Kernel::new(KernelFamily::Zero).expect("zero kernel is always valid")
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.family, KernelFamily::Zero)
    }

    /// `∫₀^∞ g(s) ds`
    pub fn g0(&self) -> f64 {
        self.g0
    }

    /// `∫₀^∞ (1 − e^{−s}) g(s) ds`
    pub fn g1(&self) -> f64 {
        self.g1
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn g_at_zero(&self) -> f64 {
        self.g_at_zero
    }

    /// Short identifier stored in checkpoints.
    pub fn id(&self) -> String {
        match &self.family {
            KernelFamily::Exponential { amplitude, rate } => {
                format!("exponential({amplitude},{rate})")
            }
            KernelFamily::Polynomial { amplitude, exponent } => {
                format!("polynomial({amplitude},{exponent})")
            }
            KernelFamily::Tabulated { s, .. } => format!("tabulated({} nodes)", s.len()),
            KernelFamily::Zero => "zero".to_string(),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match &self.family {
            KernelFamily::Exponential { amplitude, rate } => amplitude * (-rate * s).exp(),
            KernelFamily::Polynomial { amplitude, exponent } => {
                amplitude * (1.0 + s).powf(-exponent)
            }
            KernelFamily::Tabulated { s: nodes, g, .. } => interpolate(nodes, g, s),
            KernelFamily::Zero => 0.0,
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match &self.family {
            KernelFamily::Exponential { amplitude, rate } => {
                -rate * amplitude * (-rate * s).exp()
            }
            KernelFamily::Polynomial { amplitude, exponent } => {
                -exponent * amplitude * (1.0 + s).powf(-exponent - 1.0)
            }
            KernelFamily::Tabulated { s: nodes, dg, .. } => interpolate(nodes, dg, s),
            KernelFamily::Zero => 0.0,
        }
    }

    /// `∫_s^∞ g(τ) dτ`, in closed form where the family has one.
    pub fn tail(&self, s: f64) -> f64 {
        match &self.family {
            KernelFamily::Exponential { amplitude, rate } => amplitude / rate * (-rate * s).exp(),
            KernelFamily::Polynomial { amplitude, exponent } => {
                amplitude / (exponent - 1.0) * (1.0 + s).powf(1.0 - exponent)
            }
            KernelFamily::Tabulated { s: nodes, g, .. } => {
                let mut total = 0.0;
                for i in 0..nodes.len().saturating_sub(1) {
                    let (a, b) = (nodes[i], nodes[i + 1]);
                    if b <= s {
                        continue;
                    }
                    let lo = a.max(s);
                    let glo = interpolate(nodes, g, lo);
                    total += 0.5 * (b - lo) * (glo + g[i + 1]);
                }
                total
            }
            KernelFamily::Zero => 0.0,
        }
    }

    /// Effective memory coefficient of the shifted resolvent,
    /// `∫₀^∞ (1 − e^{−λs}) g(s) ds`. Equals [`Kernel::g1`] at `λ = 1`.
    pub fn resolvent_weight(&self, lambda: f64) -> f64 {
        match &self.family {
            KernelFamily::Exponential { amplitude, rate } => {
                amplitude / rate - amplitude / (rate + lambda)
            }
            KernelFamily::Zero => 0.0,
            _ => {
                let decayed = self.truncated_integral(|s| (-lambda * s).exp() * self.value(s));
                self.g0 - decayed
            }
        }
    }

    /// Total mass computed by adaptive quadrature up to the truncation point,
    /// plus the analytic tail for the closed families. Used to audit the
    /// cached closed form.
    pub fn mass_by_quadrature(&self) -> f64 {
        match &self.family {
            KernelFamily::Tabulated { .. } | KernelFamily::Zero => self.tail(0.0),
            _ => {
                let upper = self.truncation_point();
                quadrature::integrate_decades(|s| self.value(s), upper, QUAD_TOL) + self.tail(upper)
            }
        }
    }

    /// First `s` where `g(s) < 1e−14·g(0)` (closed families), or the end of the table.
    pub fn truncation_point(&self) -> f64 {
        match &self.family {
            KernelFamily::Exponential { rate, .. } => -TRUNCATION_RATIO.ln() / rate,
            KernelFamily::Polynomial { exponent, .. } => {
                TRUNCATION_RATIO.powf(-1.0 / exponent) - 1.0
            }
            KernelFamily::Tabulated { s, .. } => *s.last().unwrap_or(&0.0),
            KernelFamily::Zero => 0.0,
        }
    }

    /// Smallest `S` with `∫_S^∞ g ≤ rel·g0`.
    pub fn tail_cutoff(&self, rel: f64) -> f64 {
        match &self.family {
            KernelFamily::Exponential { rate, .. } => -rel.ln() / rate,
            KernelFamily::Polynomial { exponent, .. } => rel.powf(-1.0 / (exponent - 1.0)) - 1.0,
            KernelFamily::Tabulated { s, .. } => {
                let target = rel * self.g0;
                let last = *s.last().unwrap_or(&0.0);
                let (mut lo, mut hi) = (0.0, last);
                if self.tail(0.0) <= target {
                    return 0.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.tail(mid) <= target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
            KernelFamily::Zero => 0.0,
        }
    }

    /// Integral of `f` over `[0, ∞)` truncated at the kernel's truncation point.
    fn truncated_integral<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        match &self.family {
            KernelFamily::Tabulated { s, .. } => {
                let vals: Vec<f64> = s.iter().map(|&x| f(x)).collect();
                quadrature::trapezoid(s, &vals)
            }
            KernelFamily::Zero => 0.0,
            _ => quadrature::integrate_decades(f, self.truncation_point(), QUAD_TOL),
        }
    }

    fn closed_form_mass(&self) -> Option<f64> {
        match &self.family {
            KernelFamily::Exponential { amplitude, rate } => Some(amplitude / rate),
            KernelFamily::Polynomial { amplitude, exponent } => Some(amplitude / (exponent - 1.0)),
            KernelFamily::Zero => Some(0.0),
            KernelFamily::Tabulated { .. } => None,
        }
    }

    fn smallest_d0(&self) -> f64 {
        match &self.family {
            KernelFamily::Exponential { rate, .. } => *rate,
            // −g′/g = q/(1 + s) is largest at s = 0.
            KernelFamily::Polynomial { exponent, .. } => *exponent,
            KernelFamily::Tabulated { g, dg, .. } => g
                .iter()
                .zip(dg)
                .map(|(&gi, &dgi)| {
                    if gi > 0.0 {
                        (-dgi / gi).max(0.0)
                    } else if dgi < 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max),
            KernelFamily::Zero => 0.0,
        }
    }

    /// Checks the well-posedness hypothesis on the kernel: `g0 < γ` and a
    /// finite `d0` with `g′ ≥ −d0·g`.
    pub fn check_g1(&self, gamma: f64) -> G1Report {
        let margin = gamma - self.g0;
        G1Report {
            pass: margin > 0.0 && self.d0.is_finite(),
            g0: self.g0,
            d0: self.d0,
            margin,
        }
    }

    /// Default gauge exponent for a polynomial kernel, strictly inside the
    /// admissible range `r > (q + 1)/(q − 1)`.
    pub fn default_gauge(&self) -> ConvexGauge {
        match &self.family {
            KernelFamily::Polynomial { exponent: q, .. } => {
                ConvexGauge::Power((q + 1.0) / (q - 1.0) + 1.0)
            }
            KernelFamily::Tabulated { .. } => match self.check_g2() {
                Ok(report) => report.gauge,
                Err(_) => ConvexGauge::Linear,
            },
            _ => ConvexGauge::Linear,
        }
    }

    /// Classifies the kernel for the stability theorem with the default gauge.
    pub fn check_g2(&self) -> Result<G2Report> {
        self.check_g2_with(None)
    }

    /// Classifies the kernel; `r` overrides the power-gauge exponent.
    pub fn check_g2_with(&self, r: Option<f64>) -> Result<G2Report> {
        if self.g_at_zero <= 0.0 {
            return Err(Error::InvalidKernel(
                "stability classification requires g(0) > 0".into(),
            ));
        }
        match &self.family {
            KernelFamily::Exponential { rate, .. } => Ok(G2Report {
                mode: G2Mode::Exponential { d1: *rate },
                gauge: ConvexGauge::Linear,
                integral: None,
                sup: None,
            }),
            KernelFamily::Polynomial { exponent: q, .. } => {
                let threshold = (q + 1.0) / (q - 1.0);
                let r = r.unwrap_or(threshold + 1.0);
                if r <= threshold {
                    return Err(Error::InvalidKernel(format!(
                        "gauge exponent r = {r} must exceed (q+1)/(q-1) = {threshold}"
                    )));
                }
                let gauge = ConvexGauge::Power(r);
                let ratio = |s: f64| self.value(s) / gauge.inverse(-self.derivative(s));
                let upper = self.truncation_point();
                // The ratio decays like (1+s)^{−p}; the tail beyond `upper` is analytic.
                let p = q - (q + 1.0) / r;
                let tail = ratio(upper) * (1.0 + upper) / (p - 1.0);
                let integral = quadrature::integrate_decades(ratio, upper, QUAD_TOL) + tail;
                let sup = log_grid(upper, 400).into_iter().map(ratio).fold(0.0, f64::max);
                Ok(G2Report {
                    mode: G2Mode::General { r },
                    gauge,
                    integral: Some(integral),
                    sup: Some(sup),
                })
            }
            KernelFamily::Tabulated { s, g, dg } => {
                let d1 = g
                    .iter()
                    .zip(dg)
                    .filter(|(gi, _)| **gi > 0.0)
                    .map(|(gi, dgi)| -dgi / gi)
                    .fold(f64::INFINITY, f64::min);
                if d1 > 0.0 && d1.is_finite() {
                    return Ok(G2Report {
                        mode: G2Mode::Exponential { d1 },
                        gauge: ConvexGauge::Linear,
                        integral: None,
                        sup: None,
                    });
                }
                let r = r.unwrap_or(2.0);
                let gauge = ConvexGauge::Power(r);
                let ratios: Vec<f64> = g
                    .iter()
                    .zip(dg)
                    .map(|(&gi, &dgi)| {
                        if gi == 0.0 {
                            0.0
                        } else {
                            gi / gauge.inverse(-dgi)
                        }
                    })
                    .collect();
                Ok(G2Report {
                    mode: G2Mode::General { r },
                    gauge,
                    integral: Some(quadrature::trapezoid(s, &ratios)),
                    sup: Some(ratios.iter().cloned().fold(0.0, f64::max)),
                })
            }
            KernelFamily::Zero => unreachable!("g(0) > 0 checked above"),
        }
    }
}

fn validate_table(s: &[f64], g: &[f64], dg: &[f64]) -> Result<()> {
    if s.len() < 2 {
        return Err(Error::InvalidKernel("table needs at least two nodes".into()));
    }
    if g.len() != s.len() || dg.len() != s.len() {
        return Err(Error::InvalidKernel(
            "table columns s, g, g' must have equal length; g' cannot be derived from g".into(),
        ));
    }
    if s[0] != 0.0 {
        return Err(Error::InvalidKernel("table must start at s = 0".into()));
    }
    if s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidKernel("table nodes must be strictly increasing".into()));
    }
    if g.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidKernel("kernel values must be nonnegative".into()));
    }
    if g.windows(2).any(|w| w[1] > w[0]) || dg.iter().any(|&v| v > 0.0) {
        return Err(Error::InvalidKernel("kernel must be nonincreasing".into()));
    }
    Ok(())
}

fn interpolate(nodes: &[f64], values: &[f64], s: f64) -> f64 {
    let last = nodes.len() - 1;
    if s > nodes[last] {
        return 0.0;
    }
    if s <= nodes[0] {
        return values[0];
    }
    let i = nodes.partition_point(|&x| x <= s).min(last) - 1;
    let t = (s - nodes[i]) / (nodes[i + 1] - nodes[i]);
    values[i] + t * (values[i + 1] - values[i])
}

/// `0` followed by `count` log-spaced points from `1e−6` to `upper`.
pub fn log_grid(upper: f64, count: usize) -> Vec<f64> {
    let lo = 1e-6f64.ln();
    let hi = upper.max(1e-5).ln();
    std::iter::once(0.0)
        .chain((0..count).map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G1Report {
    pub pass: bool,
    pub g0: f64,
    pub d0: f64,
    /// `γ − g0`
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum G2Mode {
    /// `g′ ≤ −d1·g`: exponential decay of the energy.
    Exponential { d1: f64 },
    /// Finite `∫ g/G⁻¹(−g′)` and `sup g/G⁻¹(−g′)` for the power gauge `s^r`.
    General { r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G2Report {
    pub mode: G2Mode,
    pub gauge: ConvexGauge,
    pub integral: Option<f64>,
    pub sup: Option<f64>,
}

impl G2Report {
    pub fn finite(&self) -> bool {
        self.integral.map_or(true, f64::is_finite) && self.sup.map_or(true, f64::is_finite)
    }
}

/// Convex gauge of the decay theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConvexGauge {
    /// `G₀(s) = s`, giving exponential envelopes.
    Linear,
    /// `G(s) = s^r` with `r > 1`, so `G₀(s) = s·G′(s) = r·s^r`.
    Power(f64),
}

impl ConvexGauge {
    /// `G(s)`; for the linear gauge this is the identity.
    pub fn value(&self, s: f64) -> f64 {
        match self {
            ConvexGauge::Linear => s,
            ConvexGauge::Power(r) => s.powf(*r),
        }
    }

    /// `G⁻¹(y)`
    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            ConvexGauge::Linear => y,
            ConvexGauge::Power(r) => y.powf(1.0 / r),
        }
    }

    pub fn g0(&self, s: f64) -> f64 {
        match self {
            ConvexGauge::Linear => s,
            ConvexGauge::Power(r) => r * s.powf(*r),
        }
    }

    /// `G₀(s)/s`, extended by continuity at `s = 0`.
    pub fn g0_ratio(&self, s: f64) -> f64 {
        match self {
            ConvexGauge::Linear => 1.0,
            ConvexGauge::Power(r) => {
                if s <= 0.0 {
                    0.0
                } else {
                    r * s.powf(r - 1.0)
                }
            }
        }
    }

    /// `G₁(s) = ∫_s^1 dτ/G₀(τ)`
    pub fn g1(&self, s: f64) -> f64 {
        match self {
            ConvexGauge::Linear => -s.ln(),
            ConvexGauge::Power(r) => (s.powf(1.0 - r) - 1.0) / (r * (r - 1.0)),
        }
    }

    /// `G₁⁻¹(y)` for `y ≥ 0`.
    pub fn g1_inv(&self, y: f64) -> f64 {
        match self {
            ConvexGauge::Linear => (-y).exp(),
            ConvexGauge::Power(r) => (1.0 + r * (r - 1.0) * y).powf(-1.0 / (r - 1.0)),
        }
    }
}

/// Energy envelope `c2·G₁⁻¹(c1·t)`.
pub fn decay_envelope(gauge: ConvexGauge, c1: f64, c2: f64, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidInput(format!("envelope time must be nonnegative, got {t}")));
    }
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::InvalidInput("envelope constants must be positive".into()));
    }
    Ok(c2 * gauge.g1_inv(c1 * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_closed_forms() {
        let k = Kernel::exponential(0.5, 2.0).unwrap();
        assert_relative_eq!(k.value(1.0), 0.5 * (-2.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(k.value(1.0), 0.067668, epsilon = 1e-6);
        assert_relative_eq!(k.g0(), 0.25, max_relative = 1e-15);
        assert_relative_eq!(k.g1(), 1.0 / 12.0, max_relative = 1e-14);
        assert_eq!(k.d0(), 2.0);
    }

    #[test]
    fn polynomial_mass() {
        let k = Kernel::polynomial(1.0, 2.0).unwrap();
        assert_relative_eq!(k.g0(), 1.0, max_relative = 1e-15);
        assert_eq!(k.d0(), 2.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Kernel::polynomial(1.0, 1.0).is_err());
        assert!(Kernel::polynomial(1.0, 0.5).is_err());
        assert!(Kernel::exponential(-0.5, 2.0).is_err());
        assert!(Kernel::polynomial(-1.0, 2.0).is_err());
        // Missing derivative column.
        assert!(Kernel::tabulated(vec![0.0, 1.0], vec![1.0, 0.5], vec![-1.0]).is_err());
        assert!(Kernel::tabulated(vec![0.0, 1.0], vec![0.5, 1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn g1_checks() {
        let k = Kernel::exponential(0.5, 2.0).unwrap();
        let r = k.check_g1(1.0);
        assert!(r.pass);
        assert_relative_eq!(r.margin, 0.75);
        assert_eq!(r.d0, 2.0);
        assert!(!k.check_g1(0.2).pass);
        // Strict inequality: g0 = γ fails.
        assert!(!Kernel::polynomial(1.0, 2.0).unwrap().check_g1(1.0).pass);
    }

    #[test]
    fn g2_classification() {
        let k = Kernel::exponential(0.5, 2.0).unwrap();
        let r = k.check_g2().unwrap();
        assert_eq!(r.mode, G2Mode::Exponential { d1: 2.0 });
        assert_eq!(r.gauge, ConvexGauge::Linear);

        let p = Kernel::polynomial(1.0, 2.0).unwrap();
        assert_eq!(p.default_gauge(), ConvexGauge::Power(4.0));
        assert!(p.check_g2_with(Some(3.0)).is_err());
        assert!(p.check_g2_with(Some(3.5)).is_ok());
        assert!(Kernel::zero().check_g2().is_err());
    }

    #[test]
    fn g2_polynomial_finiteness_matches_closed_form() {
        // For q0 = 1, q = 2, r = 4 the ratio g/G⁻¹(−g′) is 2^{−1/4}(1+s)^{−5/4}:
        // sup 2^{−1/4} at s = 0 and integral 4·2^{−1/4}.
        let p = Kernel::polynomial(1.0, 2.0).unwrap();
        let r = p.check_g2_with(Some(4.0)).unwrap();
        let c = 2f64.powf(-0.25);
        assert!(r.finite());
        assert_relative_eq!(r.sup.unwrap(), c, max_relative = 1e-12);
        assert_relative_eq!(r.integral.unwrap(), 4.0 * c, max_relative = 1e-7);
    }

    #[test]
    fn envelopes() {
        let lin = ConvexGauge::Linear;
        assert_relative_eq!(decay_envelope(lin, 0.3, 5.0, 0.0).unwrap(), 5.0);
        assert_relative_eq!(
            decay_envelope(lin, 0.3, 5.0, 10.0).unwrap(),
            0.24894,
            epsilon = 1e-5
        );
        let pow = ConvexGauge::Power(4.0);
        assert_relative_eq!(
            decay_envelope(pow, 1.0, 1.0, 1.0).unwrap(),
            13f64.powf(-1.0 / 3.0),
            max_relative = 1e-14
        );
        assert_relative_eq!(decay_envelope(pow, 1.0, 1.0, 1.0).unwrap(), 0.42529, epsilon = 1e-5);
        assert!(decay_envelope(lin, 0.3, 5.0, -1.0).is_err());
    }

    #[test]
    fn resolvent_weight_closed_form() {
        let k = Kernel::exponential(0.5, 2.0).unwrap();
        assert_relative_eq!(k.resolvent_weight(1.0), 1.0 / 12.0, max_relative = 1e-14);
        // Polynomial family goes through quadrature; compare with brute force.
        let p = Kernel::polynomial(0.5, 2.0).unwrap();
        let brute = crate::quadrature::integrate_decades(
            |s| (1.0 - (-3.0 * s).exp()) * p.value(s),
            1e7,
            1e-12,
        ) + p.tail(1e7);
        assert_relative_eq!(p.resolvent_weight(3.0), brute, max_relative = 1e-8);
    }

    #[test]
    fn tabulated_kernel() {
        let s: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let g: Vec<f64> = s.iter().map(|x| 0.5 * (-2.0 * x).exp()).collect();
        let dg: Vec<f64> = g.iter().map(|v| -2.0 * v).collect();
        let k = Kernel::tabulated(s, g, dg).unwrap();
        assert_relative_eq!(k.g0(), 0.25, max_relative = 1e-3);
        assert_relative_eq!(k.d0(), 2.0, max_relative = 1e-12);
        match k.check_g2().unwrap().mode {
            G2Mode::Exponential { d1 } => assert_relative_eq!(d1, 2.0, max_relative = 1e-12),
            other => panic!("unexpected mode {other:?}"),
        }
        assert_eq!(k.value(20.0), 0.0);
    }
}
