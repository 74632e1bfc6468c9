use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel;

/// Constitutive, thermal and damping coefficients. Density, inertia,
/// heat capacity and reference temperature are normalized to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moduli {
    pub mu: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub d: f64,
    pub k: f64,
    pub b: f64,
    pub alpha0: f64,
    pub xi: f64,
    pub xi0: f64,
}

impl Default for Moduli {
    fn default() -> Self {
        Moduli {
            mu: 1.0,
            kappa: 0.5,
            lambda: 1.0,
            gamma: 1.0,
            alpha: 0.5,
            beta: 0.25,
            d: 2.0,
            k: 1.0,
            b: 0.5,
            alpha0: 1.0,
            xi: 1.0,
            xi0: 1.0,
        }
    }
}

impl Moduli {
    /// Checks every admissibility condition, including `g0 < γ` for the kernel.
    pub fn validate(&self, kernel: &Kernel) -> Result<()> {
        let m = self;
        let checks: [(bool, &str); 11] = [
            (3.0 * m.lambda + 2.0 * m.mu + m.kappa > 0.0, "constitutive condition 3λ + 2μ + κ > 0"),
            (2.0 * m.mu + m.kappa > 0.0, "constitutive condition 2μ + κ > 0"),
            (m.kappa > 0.0, "constitutive condition κ > 0"),
            (3.0 * m.alpha + m.beta + m.gamma > 0.0, "constitutive condition 3α + β + γ > 0"),
            (m.gamma + m.beta > 0.0, "constitutive condition γ + β > 0"),
            (m.gamma - m.beta > 0.0, "constitutive condition γ − β > 0"),
            (m.d > 0.0, "constitutive condition d > 0"),
            (m.k > 0.0, "constitutive condition k > 0"),
            (m.alpha0 > 0.0, "thermal relaxation α0 > 0"),
            (m.alpha0 * m.d - 1.0 > 0.0, "thermal condition α0·d − 1 > 0"),
            (m.xi >= 0.0 && m.xi0 >= 0.0, "damping coefficients ξ, ξ0 ≥ 0"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(Error::Validation(format!("{what} violated")));
            }
        }
        if [m.mu, m.kappa, m.lambda, m.gamma, m.alpha, m.beta, m.d, m.k, m.b, m.alpha0, m.xi, m.xi0]
            .iter()
            .any(|v| !v.is_finite())
        {
            return Err(Error::Validation("moduli must be finite".into()));
        }
        if !(kernel.g0() < m.gamma) {
            return Err(Error::Validation(format!(
                "memory condition g0 < γ violated (g0 = {}, γ = {})",
                kernel.g0(),
                m.gamma
            )));
        }
        Ok(())
    }

    /// `β0 = γ − g0`
    pub fn beta0(&self, kernel: &Kernel) -> f64 {
        self.gamma - kernel.g0()
    }

    /// Coefficient of `‖Θ‖²` in the thermal dissipation, `α0·d − 1`.
    pub fn thermal_margin(&self) -> f64 {
        self.alpha0 * self.d - 1.0
    }

    /// Coefficient of the `u` gradient energy on which the equivalence
    /// constant rests: the smaller of the two Lamé-type blocks, with negative
    /// divergence moduli absorbed using `‖div w‖² ≤ ‖∇w‖²`.
    pub fn coercivity(&self, kernel: &Kernel) -> f64 {
        let elastic = self.mu + (self.lambda + self.mu + self.kappa).min(0.0);
        let micro = self.beta0(kernel) + (self.alpha + self.beta).min(0.0);
        elastic.min(micro)
    }
}
