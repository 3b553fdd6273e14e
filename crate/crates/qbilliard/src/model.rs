//! Wave-packet parameterizations and the derived kernel quantities
//! (b', c', A, ξ), plus the normalization convention e^{Re c} = √(2a/π).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun;

/// Momentum-space Gaussian a_k = e^{-a k² + b·k + c}.
///
/// `a` is the width (units of length²), `b` the drift 2-vector, `c` a complex
/// log-normalization. Natural units m = ħ = 1 throughout.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub a: f64,
    pub b: [f64; 2],
    pub c: Complex64,
}

impl GaussianPacket {
    pub fn new(a: f64, b: [f64; 2], c: Complex64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidInput(format!(
                "packet width a must be positive and finite, got {a}"
            )));
        }
        if !b.iter().all(|v| v.is_finite()) || !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::InvalidInput("packet fields must be finite".into()));
        }
        Ok(Self { a, b, c })
    }

    /// Isotropic packet (b = 0) with real log-normalization.
    pub fn isotropic(a: f64, c: f64) -> Result<Self> {
        Self::new(a, [0.0, 0.0], Complex64::new(c, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.a, self.b, self.c).map(|_| ())
    }

    pub fn is_normalized(&self) -> bool {
        (self.c.re.exp() - (2.0 * self.a / std::f64::consts::PI).sqrt()).abs() < 1e-12
    }
}

/// Sets Re c so that e^{Re c} = √(2a/π); Im c and b are untouched.
pub fn normalize(packet: &GaussianPacket) -> GaussianPacket {
    let re = 0.5 * (2.0 * packet.a / std::f64::consts::PI).ln();
    GaussianPacket {
        c: Complex64::new(re, packet.c.im),
        ..*packet
    }
}

/// Post-traversal state c_p = f(p) e^{-α p²}, f(p) = Σ b_{2n} p^{2n}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatteredState {
    /// Gaussian width α, Re α > 0.
    pub alpha: Complex64,
    /// Even Taylor coefficients b_0, b_2, ..., b_{2N}.
    pub coeffs: Vec<Complex64>,
}

impl ScatteredState {
    pub fn new(alpha: Complex64, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(alpha.re > 0.0) {
            return Err(Error::InvalidInput(format!(
                "scattered width must have positive real part, got {alpha}"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidInput(
                "scattered state needs at least one Taylor coefficient".into(),
            ));
        }
        Ok(Self { alpha, coeffs })
    }

    /// Truncation order N such that coeffs = b_0 .. b_{2N}.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialVariant {
    Coulomb,
    Yukawa,
}

/// Interaction parameters: coupling α', regulator ε, and the potential
/// variant. The Yukawa screening mass m enters via k'² → k'² + m².
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelParams {
    pub coupling: f64,
    pub epsilon: f64,
    pub variant: PotentialVariant,
    #[serde(default)]
    pub yukawa_mass: f64,
}

impl KernelParams {
    pub fn coulomb(coupling: f64, epsilon: f64) -> Result<Self> {
        let p = Self {
            coupling,
            epsilon,
            variant: PotentialVariant::Coulomb,
            yukawa_mass: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn yukawa(coupling: f64, epsilon: f64, mass: f64) -> Result<Self> {
        let p = Self {
            coupling,
            epsilon,
            variant: PotentialVariant::Yukawa,
            yukawa_mass: mass,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.variant == PotentialVariant::Yukawa && !(self.yukawa_mass > 0.0) {
            return Err(Error::InvalidInput(format!(
                "yukawa variant requires yukawa_mass > 0, got {}",
                self.yukawa_mass
            )));
        }
        if !self.coupling.is_finite() {
            return Err(Error::InvalidInput("coupling must be finite".into()));
        }
        Ok(())
    }

    /// Effective momentum: k' for Coulomb, √(k'² + m²) for Yukawa.
    pub fn effective_momentum(&self, k_prime: f64) -> f64 {
        match self.variant {
            PotentialVariant::Coulomb => k_prime,
            PotentialVariant::Yukawa => (k_prime * k_prime + self.yukawa_mass * self.yukawa_mass).sqrt(),
        }
    }
}

/// b' = ‖b - 2a(p - q)‖.
pub fn b_prime(packet: &GaussianPacket, p: [f64; 2], q: [f64; 2]) -> f64 {
    let dx = packet.b[0] - 2.0 * packet.a * (p[0] - q[0]);
    let dy = packet.b[1] - 2.0 * packet.a * (p[1] - q[1]);
    dx.hypot(dy)
}

/// c' = c - a(p+q)² - b·(p+q).
pub fn c_prime(packet: &GaussianPacket, p: [f64; 2], q: [f64; 2]) -> Complex64 {
    let sx = p[0] + q[0];
    let sy = p[1] + q[1];
    packet.c - packet.a * (sx * sx + sy * sy) - (packet.b[0] * sx + packet.b[1] * sy)
}

/// A = 2^{3/4} √a k' (Coulomb) or 2^{3/4} √a √(k'² + m²) (Yukawa).
pub fn big_a(packet: &GaussianPacket, k_prime: f64, params: &KernelParams) -> f64 {
    2.0f64.powf(0.75) * packet.a.sqrt() * params.effective_momentum(k_prime)
}

/// ξ = 2i α' π³ B(ε, 1-ε) e^c.
pub fn xi(packet: &GaussianPacket, params: &KernelParams) -> Result<Complex64> {
    let b = specfun::beta(params.epsilon, 1.0 - params.epsilon)?;
    let pi3 = std::f64::consts::PI.powi(3);
    Ok(Complex64::new(0.0, 2.0 * params.coupling * pi3 * b) * packet.c.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normalize_half_pi_width() {
        let p = GaussianPacket::new(
            std::f64::consts::FRAC_PI_2,
            [0.0, 0.0],
            Complex64::new(3.3, -0.2),
        )
        .unwrap();
        let n = normalize(&p);
        assert_relative_eq!(n.c.re, 0.0, epsilon = 1e-14);
        assert_relative_eq!(n.c.im, -0.2);
        assert!(n.is_normalized());
    }

    #[test]
    fn normalize_width_two() {
        let p = GaussianPacket::isotropic(2.0, 0.0).unwrap();
        let n = normalize(&p);
        assert_relative_eq!(n.c.re, 0.5 * (4.0 / std::f64::consts::PI).ln(), epsilon = 1e-12);
        assert_relative_eq!(n.c.re, 0.12078, epsilon = 1e-4);
    }

    #[test]
    fn normalize_is_idempotent() {
        let p = GaussianPacket::new(0.7, [0.3, -1.0], Complex64::new(5.0, 1.0)).unwrap();
        let n1 = normalize(&p);
        let n2 = normalize(&n1);
        assert_eq!(n1.c, n2.c);
    }

    #[test]
    fn b_prime_examples() {
        let zero_b = GaussianPacket::isotropic(1.0, 0.0).unwrap();
        assert_eq!(b_prime(&zero_b, [0.4, 0.1], [0.4, 0.1]), 0.0);

        let p = GaussianPacket::new(1.0, [1.0, 0.0], Complex64::new(0.0, 0.0)).unwrap();
        assert_relative_eq!(b_prime(&p, [1.0, 0.0], [0.0, 0.0]), 1.0);

        let half = GaussianPacket::isotropic(0.5, 0.0).unwrap();
        assert_relative_eq!(b_prime(&half, [3.0, 4.0], [0.0, 0.0]), 5.0);
    }

    #[test]
    fn b_prime_symmetric_iff_drift_free() {
        let zero_b = GaussianPacket::isotropic(0.8, 0.0).unwrap();
        let (p, q) = ([0.3, -0.2], [0.9, 0.5]);
        assert_eq!(b_prime(&zero_b, p, q), b_prime(&zero_b, q, p));

        let with_b = GaussianPacket::new(0.8, [1.0, 0.5], Complex64::new(0.0, 0.0)).unwrap();
        assert!((b_prime(&with_b, p, q) - b_prime(&with_b, q, p)).abs() > 1e-6);
    }

    #[test]
    fn c_prime_examples() {
        let p = GaussianPacket::new(1.0, [0.0, 0.0], Complex64::new(0.7, 0.1)).unwrap();
        let v = c_prime(&p, [0.5, -0.3], [-0.5, 0.3]);
        assert_relative_eq!(v.re, 0.7);
        assert_relative_eq!(v.im, 0.1);

        let p2 = GaussianPacket::isotropic(1.0, 0.0).unwrap();
        assert_relative_eq!(c_prime(&p2, [1.0, 0.0], [0.0, 1.0]).re, -2.0);

        let p3 = GaussianPacket::new(1e-300, [1.0, 0.0], Complex64::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(c_prime(&p3, [1.0, 0.0], [1.0, 0.0]).re, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn c_prime_depends_only_on_sum() {
        let packet = GaussianPacket::new(1.3, [0.2, -0.4], Complex64::new(0.1, 0.9)).unwrap();
        let c1 = c_prime(&packet, [0.7, 0.1], [0.3, 0.5]);
        let c2 = c_prime(&packet, [1.0, 0.6], [0.0, 0.0]);
        assert_relative_eq!(c1.re, c2.re, epsilon = 1e-13);
        assert_relative_eq!(c1.im, c2.im, epsilon = 1e-13);
    }

    #[test]
    fn big_a_examples() {
        let packet = GaussianPacket::isotropic(1.0, 0.0).unwrap();
        let coulomb = KernelParams::coulomb(1.0, 0.1).unwrap();
        assert_eq!(big_a(&packet, 0.0, &coulomb), 0.0);
        assert_relative_eq!(big_a(&packet, 1.0, &coulomb), 2.0f64.powf(0.75), epsilon = 1e-14);

        let yukawa = KernelParams::yukawa(1.0, 0.1, 1.0).unwrap();
        assert_relative_eq!(big_a(&packet, 0.0, &yukawa), 2.0f64.powf(0.75), epsilon = 1e-14);
    }

    #[test]
    fn xi_examples() {
        let packet = GaussianPacket::isotropic(1.0, 0.0).unwrap();
        let off = KernelParams::coulomb(0.0, 0.5).unwrap();
        assert_eq!(xi(&packet, &off).unwrap().norm(), 0.0);

        let on = KernelParams::coulomb(1.0, 0.5).unwrap();
        let v = xi(&packet, &on).unwrap();
        assert_relative_eq!(v.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(v.im, 2.0 * std::f64::consts::PI.powi(4), max_relative = 1e-12);

        let doubled = KernelParams::coulomb(2.0, 0.5).unwrap();
        assert_relative_eq!(
            xi(&packet, &doubled).unwrap().norm(),
            2.0 * v.norm(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn xi_diverges_like_reflection_identity() {
        let packet = GaussianPacket::isotropic(1.0, 0.0).unwrap();
        for &eps in &[1e-2, 1e-3] {
            let params = KernelParams::coulomb(1.0, eps).unwrap();
            let v = xi(&packet, &params).unwrap().norm();
            let expected = 2.0 * std::f64::consts::PI.powi(3)
                * (std::f64::consts::PI / (std::f64::consts::PI * eps).sin());
            assert!(((v - expected) / expected).abs() < 1e-8, "eps = {eps}");
        }
    }

    #[test]
    fn params_validation() {
        assert!(KernelParams::coulomb(1.0, 0.0).is_err());
        assert!(KernelParams::coulomb(1.0, 1.0).is_err());
        assert!(KernelParams::yukawa(1.0, 0.1, 0.0).is_err());
        assert!(KernelParams::yukawa(1.0, 0.1, 2.0).is_ok());
    }

    #[test]
    fn scattered_state_validation() {
        assert!(ScatteredState::new(Complex64::new(1.0, 0.3), vec![Complex64::new(1.0, 0.0)]).is_ok());
        assert!(ScatteredState::new(Complex64::new(-0.2, 0.0), vec![Complex64::new(1.0, 0.0)]).is_err());
        assert!(ScatteredState::new(Complex64::new(1.0, 0.0), vec![]).is_err());
    }
}
