//! Nonlinearity laws `f(rho)` for the Schrodinger and hydrodynamic solvers,
//! and capillarity laws `kappa(rho)` for the Korteweg systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// Shape of the nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    /// `f(r) = r`
    Cubic,
    /// `f(r) = r - 1` (unit background)
    GrossPitaevskii,
    /// `f(r) = r^sigma`, integer `sigma >= 1`
    Power(u32),
}

/// Nonlinearity `f(rho)` together with its antiderivative and the associated
/// pressure. The optional strength factor multiplies `f` (and hence `F` and
/// `P`) linearly; it is 1 for the standard laws and is used by harnesses that
/// run rescaled normalizations of the same equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlinearityLaw<T: Real> {
    kind: LawKind,
    strength: T,
}

impl<T: Real> NonlinearityLaw<T> {
    pub fn cubic() -> Self {
        Self { kind: LawKind::Cubic, strength: T::one() }
    }

    pub fn gross_pitaevskii() -> Self {
        Self { kind: LawKind::GrossPitaevskii, strength: T::one() }
    }

    pub fn power(sigma: u32) -> Result<Self> {
        if sigma == 0 {
            return Err(Error::InvalidArgument("power law needs sigma >= 1".into()));
        }
        Ok(Self { kind: LawKind::Power(sigma), strength: T::one() })
    }

    /// Same law with `f` multiplied by `c`.
    pub fn with_strength(self, c: T) -> Self {
        Self { strength: c, ..self }
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            LawKind::Cubic => "cubic",
            LawKind::GrossPitaevskii => "gross_pitaevskii",
            LawKind::Power(_) => "power",
        }
    }

    /// `f(rho)`.
    pub fn f(&self, rho: T) -> T {
        let base = match self.kind {
            LawKind::Cubic => rho,
            LawKind::GrossPitaevskii => rho - T::one(),
            LawKind::Power(s) => rho.powi(s as i32),
        };
        self.strength * base
    }

    /// `f'(rho)`.
    pub fn f_prime(&self, rho: T) -> T {
        let base = match self.kind {
            LawKind::Cubic | LawKind::GrossPitaevskii => T::one(),
            LawKind::Power(s) => T::of(s as f64) * rho.powi(s as i32 - 1),
        };
        self.strength * base
    }

    /// Antiderivative `F` of `f` with `F(0) = 0`.
    pub fn antiderivative(&self, rho: T) -> T {
        let base = match self.kind {
            LawKind::Cubic => rho * rho / T::of(2.0),
            LawKind::GrossPitaevskii => rho * rho / T::of(2.0) - rho,
            LawKind::Power(s) => rho.powi(s as i32 + 1) / T::of(s as f64 + 1.0),
        };
        self.strength * base
    }

    /// Pressure `P(rho) = rho f(rho) - F(rho)`.
    pub fn pressure(&self, rho: T) -> T {
        rho * self.f(rho) - self.antiderivative(rho)
    }

    /// Density of the spatially constant far-field state the law is centered
    /// on: the zero of `f` (0 for cubic and power, 1 for Gross-Pitaevskii).
    pub fn background(&self) -> T {
        match self.kind {
            LawKind::Cubic | LawKind::Power(_) => T::zero(),
            LawKind::GrossPitaevskii => T::one(),
        }
    }

    /// `F(rho) - F(background)`: the potential-energy density measured
    /// against the far-field state, integrable on the torus for localized
    /// deviations. Decays quadratically in `rho - background` because `f`
    /// vanishes at the background.
    pub fn energy_density(&self, rho: T) -> T {
        self.antiderivative(rho) - self.antiderivative(self.background())
    }

    /// `P(rho) - P(background)`: pressure measured against the far-field
    /// state, used in the virial-type flux integrands.
    pub fn pressure_centered(&self, rho: T) -> T {
        self.pressure(rho) - self.pressure(self.background())
    }

    /// Upper bound for `f'` on `[0, rho_max]`, used in CFL estimates.
    pub fn f_prime_max(&self, rho_max: T) -> T {
        match self.kind {
            LawKind::Cubic | LawKind::GrossPitaevskii => self.strength.abs(),
            LawKind::Power(_) => self.f_prime(rho_max).abs(),
        }
    }
}

/// Capillarity coefficient `kappa(rho)` for the Korteweg system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CapillarityLaw<T: Real> {
    /// `kappa(rho) = kappa0`
    Constant { kappa: T },
    /// `kappa(rho) = eps^2 / (4 rho)`, the quantum-hydrodynamic choice
    QhdScaled { eps: T },
}

impl<T: Real> CapillarityLaw<T> {
    pub fn constant(kappa: T) -> Result<Self> {
        if !(kappa > T::zero()) {
            return Err(Error::InvalidArgument("capillarity must be positive".into()));
        }
        Ok(Self::Constant { kappa })
    }

    pub fn qhd_scaled(eps: T) -> Result<Self> {
        if !(eps > T::zero()) {
            return Err(Error::InvalidArgument("eps must be positive".into()));
        }
        Ok(Self::QhdScaled { eps })
    }

    /// `kappa(rho)`.
    pub fn kappa(&self, rho: T) -> T {
        match *self {
            Self::Constant { kappa } => kappa,
            Self::QhdScaled { eps } => eps * eps / (T::of(4.0) * rho),
        }
    }

    /// `a(rho) = sqrt(rho kappa(rho))`, the dispersive flux coefficient.
    pub fn a(&self, rho: T) -> T {
        match *self {
            Self::Constant { kappa } => (kappa * rho).sqrt(),
            Self::QhdScaled { eps } => eps / T::of(2.0),
        }
    }

    /// `sqrt(kappa(rho) / rho)`, the coefficient relating `w` to `grad rho`.
    pub fn w_coefficient(&self, rho: T) -> T {
        match *self {
            Self::Constant { kappa } => (kappa / rho).sqrt(),
            Self::QhdScaled { eps } => eps / (T::of(2.0) * rho),
        }
    }

    /// `d/drho (rho kappa(rho))`; zero exactly for the QHD choice.
    pub fn rho_kappa_prime(&self, _rho: T) -> T {
        match *self {
            Self::Constant { kappa } => kappa,
            Self::QhdScaled { .. } => T::zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_pressure_is_half_rho_squared() {
        let law = NonlinearityLaw::<f64>::cubic();
        for rho in [0.0, 0.3, 1.0, 2.5] {
            assert!((law.pressure(rho) - rho * rho / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gross_pitaevskii_antiderivative() {
        let law = NonlinearityLaw::<f64>::gross_pitaevskii();
        for rho in [0.0, 0.4, 1.0, 1.7] {
            assert!((law.antiderivative(rho) - (rho * rho / 2.0 - rho)).abs() < 1e-15);
        }
        // pressure coincides with the cubic one
        assert!((law.pressure(1.3) - 1.3_f64.powi(2) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn power_one_equals_cubic() {
        let p = NonlinearityLaw::<f64>::power(1).unwrap();
        let c = NonlinearityLaw::<f64>::cubic();
        for rho in [0.2, 0.9, 3.1] {
            assert_eq!(p.f(rho), c.f(rho));
            assert_eq!(p.antiderivative(rho), c.antiderivative(rho));
        }
    }

    #[test]
    fn pressure_identity_for_power_laws() {
        for sigma in 1..5 {
            let law = NonlinearityLaw::<f64>::power(sigma).unwrap();
            for rho in [0.1, 0.8, 2.0] {
                let lhs = law.pressure(rho);
                let rhs = rho * law.f(rho) - law.antiderivative(rho);
                assert!((lhs - rhs).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn antiderivative_matches_f_by_quadrature() {
        // midpoint-rule integral of f as an independent check of F
        let law = NonlinearityLaw::<f64>::power(3).unwrap();
        let rho = 1.7;
        let n = 20_000;
        let h = rho / n as f64;
        let quad: f64 = (0..n).map(|i| law.f((i as f64 + 0.5) * h) * h).sum();
        assert!((quad - law.antiderivative(rho)).abs() < 1e-8);
    }

    #[test]
    fn centered_energy_vanishes_quadratically_at_background() {
        let law = NonlinearityLaw::<f64>::gross_pitaevskii();
        assert_eq!(law.background(), 1.0);
        for d in [1e-3, 1e-4, 1e-5] {
            let e = law.energy_density(1.0 + d);
            assert!((e - d * d / 2.0).abs() < d * d * 1e-6);
        }
    }

    #[test]
    fn strength_scales_linearly() {
        let law = NonlinearityLaw::<f64>::gross_pitaevskii().with_strength(2.0);
        assert_eq!(law.f(1.5), 2.0 * 0.5);
        assert_eq!(law.antiderivative(2.0), 2.0 * (2.0 - 2.0));
        assert_eq!(law.f_prime(0.7), 2.0);
    }

    #[test]
    fn rejects_zero_sigma() {
        assert!(NonlinearityLaw::<f64>::power(0).is_err());
    }

    #[test]
    fn qhd_capillarity_matches_constant_a() {
        let eps = 0.5;
        let law = CapillarityLaw::<f64>::qhd_scaled(eps).unwrap();
        for rho in [0.3, 1.0, 2.2] {
            assert!((law.kappa(rho) - eps * eps / (4.0 * rho)).abs() < 1e-15);
            assert_eq!(law.a(rho), eps / 2.0);
            assert_eq!(law.rho_kappa_prime(rho), 0.0);
            // sqrt(kappa/rho) against the closed form, up to rounding
            let wc = (law.kappa(rho) / rho).sqrt();
            assert!((law.w_coefficient(rho) - wc).abs() < 1e-15 * wc.max(1.0));
        }
    }

    #[test]
    fn constant_capillarity() {
        let law = CapillarityLaw::<f64>::constant(0.01).unwrap();
        assert_eq!(law.kappa(5.0), 0.01);
        assert!((law.a(4.0) - 0.2).abs() < 1e-15);
        assert_eq!(law.rho_kappa_prime(2.0), 0.01);
        assert!(CapillarityLaw::<f64>::constant(0.0).is_err());
    }
}
