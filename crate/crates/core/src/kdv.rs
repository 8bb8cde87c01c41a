//! Third-order dispersive long-wave solver on a periodic frame.
//!
//! Two mirror-image branches are integrated with an integrating-factor
//! Runge-Kutta scheme: the third derivative is advanced exactly in Fourier
//! space and only the quadratic flux is stepped explicitly, so the scheme has
//! no stiffness from the linear dispersion.
//!
//! `Left`:  `d_tau u + d^3 u + u du = 0`
//! `Right`: `d_tau u - d^3 u - u du = 0`
//!
//! The branches are related by spatial reflection: if `u(x, tau)` solves the
//! left equation then `u(-x, tau)` solves the right one.

use crate::error::{Error, Result};
use crate::field::RealField;
use crate::grid::SpectralGrid;
use crate::schrodinger::step_count;
use crate::{Cplx, Real};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Left,
    Right,
}

impl Branch {
    /// Sign of `i k^3` in the spectral linear propagator.
    fn sign<T: Real>(self) -> T {
        match self {
            Branch::Left => T::one(),
            Branch::Right => -T::one(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KdvState<T: Real> {
    pub u: RealField<T>,
    pub tau: T,
}

/// Quadratic flux in spectral space: `-sign * (i k / 2) (u^2)^`, dealiased.
fn nonlinear_hat<T: Real>(grid: &SpectralGrid<T>, spec: &[Cplx<T>], sign: T) -> Vec<Cplx<T>> {
    let mut phys = spec.to_vec();
    grid.fft_inverse(&mut phys);
    for v in phys.iter_mut() {
        let u = v.re;
        *v = Cplx::new(u * u, T::zero());
    }
    grid.fft_forward(&mut phys);
    grid.mul_ik_axis(&mut phys, 0);
    let half = T::of(0.5);
    for v in phys.iter_mut() {
        *v = v.scale(-sign * half);
    }
    grid.apply_dealias(&mut phys);
    phys
}

fn propagator_tables<T: Real>(grid: &SpectralGrid<T>, dtau: T, sign: T) -> (Vec<Cplx<T>>, Vec<Cplx<T>>) {
    let make = |scale: T| -> Vec<Cplx<T>> {
        (0..grid.len())
            .map(|i| {
                let k = grid.mode(i)[0];
                let phase = sign * k * k * k * scale;
                Cplx::new(phase.cos(), phase.sin())
            })
            .collect()
    };
    (make(dtau / T::of(2.0)), make(dtau))
}

fn axpy<T: Real>(a: &[Cplx<T>], s: T, b: &[Cplx<T>]) -> Vec<Cplx<T>> {
    a.iter().zip(b).map(|(&x, &y)| x + y.scale(s)).collect()
}

fn mul_table<T: Real>(a: &[Cplx<T>], table: &[Cplx<T>]) -> Vec<Cplx<T>> {
    a.iter().zip(table).map(|(&x, &t)| x * t).collect()
}

/// One integrating-factor Runge-Kutta step of size `dtau`.
fn step<T: Real>(
    grid: &SpectralGrid<T>,
    spec: &mut Vec<Cplx<T>>,
    dtau: T,
    sign: T,
    e_half: &[Cplx<T>],
    e_full: &[Cplx<T>],
) {
    let half_dt = dtau / T::of(2.0);
    let ka = nonlinear_hat(grid, spec, sign);
    let arg_b = mul_table(&axpy(spec, half_dt, &ka), e_half);
    let kb = nonlinear_hat(grid, &arg_b, sign);
    let arg_c = axpy(&mul_table(spec, e_half), half_dt, &kb);
    let kc = nonlinear_hat(grid, &arg_c, sign);
    let arg_d = axpy(&mul_table(spec, e_full), dtau, &mul_table(&kc, e_half));
    let kd = nonlinear_hat(grid, &arg_d, sign);

    let mut next = mul_table(spec, e_full);
    let sixth = dtau / T::of(6.0);
    let ka_full = mul_table(&ka, e_full);
    let kbc_half = mul_table(&axpy(&kb, T::one(), &kc), e_half);
    for i in 0..next.len() {
        next[i] = next[i] + (ka_full[i] + kbc_half[i].scale(T::of(2.0)) + kd[i]).scale(sixth);
    }
    *spec = next;
}

/// Integrates the chosen branch to `tau_end` with step `dtau`, storing a
/// snapshot every `snapshot_every` steps (0 keeps only the endpoints). The
/// input must live on a one-dimensional grid and `dtau` must divide
/// `tau_end`.
pub fn kdv_evolve<T: Real>(
    u0: &RealField<T>,
    tau_end: T,
    dtau: T,
    branch: Branch,
    snapshot_every: usize,
) -> Result<Vec<KdvState<T>>> {
    let grid = u0.grid().clone();
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("long-wave solver is one-dimensional".into()));
    }
    let steps = step_count(tau_end, dtau)?;
    let sign = branch.sign::<T>();
    let (e_half, e_full) = propagator_tables(&grid, dtau, sign);

    let mut spec = u0.to_complex().spectral();
    let mut out = vec![KdvState { u: u0.clone(), tau: T::zero() }];
    for n in 1..=steps {
        step(&grid, &mut spec, dtau, sign, &e_half, &e_full);
        let tau = dtau * T::of(n as f64);
        let store = n == steps || (snapshot_every > 0 && n % snapshot_every == 0);
        if store {
            let mut phys = spec.clone();
            grid.fft_inverse(&mut phys);
            let u = RealField::new(grid.clone(), phys.iter().map(|v| v.re).collect());
            if !u.values().iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite { t: tau.to_f64().unwrap_or(f64::NAN) });
            }
            out.push(KdvState { u, tau });
        }
    }
    Ok(out)
}

/// Solitary wave `3 c sech^2(sqrt(c) (x - x0) / 2)` of the left branch,
/// traveling with speed `c`.
pub fn soliton_profile<T: Real>(
    grid: std::sync::Arc<SpectralGrid<T>>,
    speed: T,
    x0: T,
) -> RealField<T> {
    RealField::from_fn(grid, move |p| {
        let arg = speed.sqrt() * (p[0] - x0) / T::of(2.0);
        let sech = T::one() / arg.cosh();
        T::of(3.0) * speed * sech * sech
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn grid(n: usize, l: f64) -> Arc<SpectralGrid<f64>> {
        SpectralGrid::new(1, n, l).unwrap()
    }

    #[test]
    fn soliton_travels_without_changing_shape() {
        let g = grid(512, 80.0);
        let u0 = soliton_profile(g.clone(), 1.0, 0.0);
        let states = kdv_evolve(&u0, 1.0, 1e-3, Branch::Left, 0).unwrap();
        let exact = soliton_profile(g, 1.0, 1.0);
        let err = states.last().unwrap().u.sup_distance(&exact);
        assert!(err < 1e-6, "shape error {err:e}");
    }

    #[test]
    fn mean_is_exactly_conserved_and_l2_to_rounding() {
        let g = grid(256, 60.0);
        let u0 = RealField::from_fn(g, |p| {
            let s = 1.0 / (0.7 * p[0] / 2.0).cosh();
            2.1 * s * s + 0.3 * (2.0 * std::f64::consts::PI * p[0] / 60.0).cos()
        });
        let m0 = u0.integrate();
        let l0 = u0.norm_l2();
        let states = kdv_evolve(&u0, 2.0, 2e-3, Branch::Left, 0).unwrap();
        let uf = &states.last().unwrap().u;
        // the zero mode is untouched by both the propagator and the flux
        assert!((uf.integrate() - m0).abs() < 1e-12 * m0.abs().max(1.0));
        assert!((uf.norm_l2() - l0).abs() / l0 < 1e-8);
    }

    #[test]
    fn branches_are_related_by_reflection() {
        let g = grid(256, 60.0);
        let u0 = soliton_profile(g.clone(), 0.8, 5.0);
        let mirrored = RealField::from_fn(g.clone(), |p| {
            let arg = 0.8f64.sqrt() * (-p[0] - 5.0) / 2.0;
            let s = 1.0 / arg.cosh();
            2.4 * s * s
        });
        let left = kdv_evolve(&u0, 0.5, 1e-3, Branch::Left, 0).unwrap();
        let right = kdv_evolve(&mirrored, 0.5, 1e-3, Branch::Right, 0).unwrap();
        let l = &left.last().unwrap().u;
        let r = &right.last().unwrap().u;
        // compare r(x) with l(-x) on the symmetric grid
        let n = g.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            let j = (n - i) % n;
            worst = worst.max((r.values()[i] - l.values()[j]).abs());
        }
        assert!(worst < 1e-9, "reflection mismatch {worst:e}");
    }

    #[test]
    fn step_size_convergence_is_at_least_second_order() {
        let g = grid(256, 60.0);
        let u0 = RealField::from_fn(g, |p| {
            let s = 1.0 / (p[0] / 2.0).cosh();
            3.0 * s * s
        });
        let reference = kdv_evolve(&u0, 0.25, 6.25e-4, Branch::Left, 0).unwrap();
        let coarse = kdv_evolve(&u0, 0.25, 5e-3, Branch::Left, 0).unwrap();
        let fine = kdv_evolve(&u0, 0.25, 2.5e-3, Branch::Left, 0).unwrap();
        let uref = &reference.last().unwrap().u;
        let e1 = coarse.last().unwrap().u.l2_distance(uref);
        let e2 = fine.last().unwrap().u.l2_distance(uref);
        let order = (e1 / e2).log2();
        assert!(order >= 2.0, "measured order {order:.2} (e1 {e1:e}, e2 {e2:e})");
    }

    #[test]
    fn rejects_two_dimensional_input_and_bad_steps() {
        let g2 = SpectralGrid::<f64>::new(2, 16, 10.0).unwrap();
        let u2 = RealField::zeros(g2);
        assert!(kdv_evolve(&u2, 1.0, 1e-3, Branch::Left, 0).is_err());

        let g = grid(64, 10.0);
        let u = RealField::zeros(g);
        assert!(kdv_evolve(&u, 1.0, 3e-3, Branch::Left, 0).is_err());
    }
}
