//! Transforms between the wave function and hydrodynamic descriptions.
//!
//! For `psi = sqrt(rho) exp(i phi / eps)` the hydrodynamic fields are the
//! density `rho = |psi|^2` and the velocity `v = eps Im(conj(psi) grad psi) / rho`.
//! The extended formulations append an imaginary velocity component built
//! from the density gradient: `w = -(eps/2) grad rho / rho` for quantum
//! hydrodynamics, `w = -sqrt(kappa(rho)/rho) grad rho` for a general
//! capillarity. Both require the density to stay away from zero.
//!
//! The weak (vacuum-tolerant) variables follow the polar factorization: with
//! `phi_p = psi / |psi|` off vacuum (and zero on it), the fields
//! `grad sqrt(rho) = Re(conj(phi_p) grad psi)` and `lambda = Im(conj(phi_p) grad psi)`
//! stay square-integrable through vacuum, and the current is
//! `J = sqrt(rho) lambda`. These use the unscaled normalization (`eps = 1`).

use crate::error::{Error, Result};
use crate::field::{ComplexField, ComplexVectorField, RealField, VectorField};
use crate::hydro::ExtendedState;
use crate::law::CapillarityLaw;
use crate::{Cplx, Real};

/// Default relative density threshold below which a point counts as vacuum.
pub fn default_vacuum_threshold<T: Real>() -> T {
    T::of(1e-8)
}

/// Suggested absolute density floor for the extended formulations:
/// `1e-4` times the mean initial density.
pub fn default_density_floor<T: Real>(rho: &RealField<T>) -> T {
    let mean = rho.integrate() / rho.grid().length().powi(rho.grid().dim() as i32);
    T::of(1e-4) * mean
}

/// Density, velocity, and the vacuum mask extracted from a wave function.
#[derive(Clone, Debug)]
pub struct HydroFields<T: Real> {
    pub rho: RealField<T>,
    /// Velocity field; zero on vacuum points.
    pub v: VectorField<T>,
    /// True where the density falls below the vacuum threshold.
    pub vacuum: Vec<bool>,
}

/// Extracts `(rho, v)` from a wave function with the default vacuum
/// threshold.
pub fn to_hydro<T: Real>(psi: &ComplexField<T>, eps: T) -> HydroFields<T> {
    to_hydro_with(psi, eps, default_vacuum_threshold())
}

/// Extracts `(rho, v)` from a wave function. The velocity
/// `eps Im(conj(psi) grad psi) / rho` is set to zero where
/// `rho < rel_threshold * max(rho)`.
pub fn to_hydro_with<T: Real>(psi: &ComplexField<T>, eps: T, rel_threshold: T) -> HydroFields<T> {
    let grid = psi.grid().clone();
    let rho = psi.modulus_squared();
    let cutoff = rel_threshold * rho.max();
    let vacuum: Vec<bool> = rho.values().iter().map(|&r| r < cutoff).collect();

    let grad = psi.gradient();
    let components = grad
        .components
        .iter()
        .map(|gc| {
            let vals: Vec<T> = psi
                .values()
                .iter()
                .zip(gc.values())
                .zip(rho.values())
                .zip(&vacuum)
                .map(|(((&p, &gp), &r), &vac)| {
                    if vac {
                        T::zero()
                    } else {
                        eps * (p.conj() * gp).im / r
                    }
                })
                .collect();
            RealField::new(grid.clone(), vals)
        })
        .collect();

    HydroFields { rho, v: VectorField { components }, vacuum }
}

/// Builds the wave function `sqrt(rho) exp(i phi / eps)` from density and
/// phase.
pub fn from_hydro<T: Real>(rho: &RealField<T>, phi: &RealField<T>, eps: T) -> Result<ComplexField<T>> {
    if !rho.grid().compatible(phi.grid()) {
        return Err(Error::GridMismatch { expected: rho.grid().len(), got: phi.grid().len() });
    }
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if rho.min() < T::zero() {
        return Err(Error::InvalidArgument("density must be nonnegative".into()));
    }
    let values = rho
        .values()
        .iter()
        .zip(phi.values())
        .map(|(&r, &p)| {
            let amp = r.sqrt();
            let arg = p / eps;
            Cplx::new(amp * arg.cos(), amp * arg.sin())
        })
        .collect();
    Ok(ComplexField::new(rho.grid().clone(), values))
}

fn check_floor<T: Real>(rho: &RealField<T>, floor: T) -> Result<()> {
    let min = rho.min();
    if min < floor {
        return Err(Error::VacuumFloor {
            t: 0.0,
            min_density: min.to_f64().unwrap_or(f64::NAN),
            floor: floor.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Builds the extended quantum-hydrodynamic state `z = v + i w` with
/// `w = -(eps/2) grad rho / rho`. Errors if the density dips below
/// `density_floor`.
pub fn extended_vars_qhd<T: Real>(
    rho: &RealField<T>,
    v: &VectorField<T>,
    eps: T,
    density_floor: T,
) -> Result<ExtendedState<T>> {
    check_floor(rho, density_floor)?;
    let grid = rho.grid().clone();
    let grad = rho.gradient();
    let half_eps = eps / T::of(2.0);
    let components = v
        .components
        .iter()
        .zip(&grad.components)
        .map(|(vc, gc)| {
            let vals: Vec<Cplx<T>> = vc
                .values()
                .iter()
                .zip(gc.values())
                .zip(rho.values())
                .map(|((&vv, &gv), &r)| Cplx::new(vv, -half_eps * gv / r))
                .collect();
            ComplexField::new(grid.clone(), vals)
        })
        .collect();
    Ok(ExtendedState::new(rho.clone(), ComplexVectorField { components }, T::zero()))
}

/// Builds the extended Korteweg state `z = v + i w` with
/// `w = -sqrt(kappa(rho)/rho) grad rho`. With `kappa = eps^2/(4 rho)` this
/// coincides with [`extended_vars_qhd`].
pub fn extended_vars_korteweg<T: Real>(
    rho: &RealField<T>,
    v: &VectorField<T>,
    kappa: &CapillarityLaw<T>,
    density_floor: T,
) -> Result<ExtendedState<T>> {
    check_floor(rho, density_floor)?;
    let grid = rho.grid().clone();
    let grad = rho.gradient();
    let components = v
        .components
        .iter()
        .zip(&grad.components)
        .map(|(vc, gc)| {
            let vals: Vec<Cplx<T>> = vc
                .values()
                .iter()
                .zip(gc.values())
                .zip(rho.values())
                .map(|((&vv, &gv), &r)| Cplx::new(vv, -kappa.w_coefficient(r) * gv))
                .collect();
            ComplexField::new(grid.clone(), vals)
        })
        .collect();
    Ok(ExtendedState::new(rho.clone(), ComplexVectorField { components }, T::zero()))
}

/// Vacuum-tolerant fields from the polar factorization of a wave function.
#[derive(Clone, Debug)]
pub struct WeakVars<T: Real> {
    pub rho: RealField<T>,
    /// `grad sqrt(rho) = Re(conj(phi_p) grad psi)`.
    pub grad_sqrt_rho: VectorField<T>,
    /// `lambda = Im(conj(phi_p) grad psi)`; the current is `sqrt(rho) lambda`.
    pub lambda: VectorField<T>,
    /// Current `J = sqrt(rho) lambda`.
    pub current: VectorField<T>,
    /// True where the polar factor was zeroed out.
    pub vacuum: Vec<bool>,
}

/// Polar-factorization fields with the default vacuum threshold.
pub fn weak_vars<T: Real>(psi: &ComplexField<T>) -> WeakVars<T> {
    weak_vars_with(psi, default_vacuum_threshold())
}

/// Polar-factorization fields; the polar factor `psi/|psi|` is replaced by
/// zero where `|psi|^2 < rel_threshold * max |psi|^2`.
pub fn weak_vars_with<T: Real>(psi: &ComplexField<T>, rel_threshold: T) -> WeakVars<T> {
    let grid = psi.grid().clone();
    let rho = psi.modulus_squared();
    let cutoff = rel_threshold * rho.max();
    let vacuum: Vec<bool> = rho.values().iter().map(|&r| r < cutoff).collect();

    // polar factor, zero on vacuum
    let polar: Vec<Cplx<T>> = psi
        .values()
        .iter()
        .zip(rho.values())
        .zip(&vacuum)
        .map(|((&p, &r), &vac)| {
            if vac {
                Cplx::new(T::zero(), T::zero())
            } else {
                p.unscale(r.sqrt())
            }
        })
        .collect();

    let grad = psi.gradient();
    let d = grid.dim();
    let mut gsr = Vec::with_capacity(d);
    let mut lam = Vec::with_capacity(d);
    let mut cur = Vec::with_capacity(d);
    for gc in grad.components.iter() {
        let mut gv = Vec::with_capacity(grid.len());
        let mut lv = Vec::with_capacity(grid.len());
        let mut jv = Vec::with_capacity(grid.len());
        for ((&ph, &gp), &r) in polar.iter().zip(gc.values()).zip(rho.values()) {
            let prod = ph.conj() * gp;
            gv.push(prod.re);
            lv.push(prod.im);
            jv.push(r.sqrt() * prod.im);
        }
        gsr.push(RealField::new(grid.clone(), gv));
        lam.push(RealField::new(grid.clone(), lv));
        cur.push(RealField::new(grid.clone(), jv));
    }

    WeakVars {
        rho,
        grad_sqrt_rho: VectorField { components: gsr },
        lambda: VectorField { components: lam },
        current: VectorField { components: cur },
        vacuum,
    }
}

/// Fraction of grid points where `|psi|^2 < rel_threshold * max |psi|^2`.
pub fn vacuum_fraction<T: Real>(psi: &ComplexField<T>, rel_threshold: T) -> T {
    let rho = psi.modulus_squared();
    let cutoff = rel_threshold * rho.max();
    let count = rho.values().iter().filter(|&&r| r < cutoff).count();
    T::of(count as f64) / T::of(rho.len() as f64)
}
