//! Split-step pseudo-spectral solver for the semiclassical nonlinear
//! Schrodinger equation
//!
//! ```text
//! i eps d_t psi + (eps^2 / 2) lap psi = f(|psi|^2) psi
//! ```
//!
//! One Strang step is a half phase rotation by the nonlinearity, the exact
//! free flow in Fourier space, and a second half rotation. Both substeps are
//! isometries, so the discrete mass is conserved to rounding.

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::law::NonlinearityLaw;
use crate::{Cplx, Real};

/// Wave-function state at one instant.
#[derive(Clone, Debug)]
pub struct WaveState<T: Real> {
    pub psi: ComplexField<T>,
    pub t: T,
    pub eps: T,
}

impl<T: Real> WaveState<T> {
    pub fn new(psi: ComplexField<T>, t: T, eps: T) -> Result<Self> {
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(Error::InvalidArgument("eps must be positive and finite".into()));
        }
        if !psi.is_finite() {
            return Err(Error::NonFinite { t: t.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self { psi, t, eps })
    }
}

/// Stored snapshots of an evolution.
#[derive(Clone, Debug)]
pub struct WaveTrajectory<T: Real> {
    pub eps: T,
    pub times: Vec<T>,
    pub snapshots: Vec<ComplexField<T>>,
}

impl<T: Real> WaveTrajectory<T> {
    pub fn last(&self) -> &ComplexField<T> {
        self.snapshots.last().expect("trajectory holds at least the initial state")
    }
}

fn half_nonlinear_phase<T: Real>(psi: &mut ComplexField<T>, dt: T, eps: T, law: &NonlinearityLaw<T>) {
    let c = dt / (T::of(2.0) * eps);
    for v in psi.values_mut() {
        let phase = -c * law.f(v.norm_sqr());
        *v = *v * Cplx::new(phase.cos(), phase.sin());
    }
}

/// Phase factors of the exact free flow over `dt`,
/// `exp(-i eps dt |k|^2 / 2)` per mode.
fn linear_phase_table<T: Real>(grid: &crate::grid::SpectralGrid<T>, dt: T, eps: T) -> Vec<Cplx<T>> {
    (0..grid.len())
        .map(|idx| {
            let k = grid.mode(idx);
            let phase = -eps * dt * (k[0] * k[0] + k[1] * k[1]) / T::of(2.0);
            Cplx::new(phase.cos(), phase.sin())
        })
        .collect()
}

fn apply_linear<T: Real>(psi: &mut ComplexField<T>, table: &[Cplx<T>]) {
    let grid = psi.grid().clone();
    let spec = psi.values_mut();
    grid.fft_forward(spec);
    for (v, ph) in spec.iter_mut().zip(table) {
        *v = *v * *ph;
    }
    grid.fft_inverse(spec);
}

/// Advances the state by one Strang splitting step of size `dt`.
pub fn step_strang<T: Real>(state: &mut WaveState<T>, dt: T, law: &NonlinearityLaw<T>) -> Result<()> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    let table = linear_phase_table(state.psi.grid(), dt, state.eps);
    step_with_table(state, dt, law, &table)
}

fn step_with_table<T: Real>(
    state: &mut WaveState<T>,
    dt: T,
    law: &NonlinearityLaw<T>,
    table: &[Cplx<T>],
) -> Result<()> {
    half_nonlinear_phase(&mut state.psi, dt, state.eps, law);
    apply_linear(&mut state.psi, table);
    half_nonlinear_phase(&mut state.psi, dt, state.eps, law);
    state.t = state.t + dt;
    if !state.psi.is_finite() {
        return Err(Error::NonFinite { t: state.t.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(())
}

/// Evolution controls: how often snapshots are stored and observers run,
/// both in units of steps.
pub struct EvolveOptions<'a, T: Real> {
    /// Steps between stored snapshots; 0 stores only initial and final states.
    pub snapshot_every: usize,
    /// Steps between observer calls; 0 disables intermediate calls.
    pub observe_every: usize,
    pub observer: Option<&'a mut dyn FnMut(&WaveState<T>)>,
}

impl<T: Real> Default for EvolveOptions<'_, T> {
    fn default() -> Self {
        Self { snapshot_every: 0, observe_every: 0, observer: None }
    }
}

/// Number of steps covering `[0, t_end]` with step `dt`; errors unless `dt`
/// divides `t_end` to within a relative slack of 1e-9.
pub fn step_count<T: Real>(t_end: T, dt: T) -> Result<usize> {
    if !(t_end > T::zero()) || !(dt > T::zero()) {
        return Err(Error::InvalidArgument("t_end and dt must be positive".into()));
    }
    let ratio = (t_end / dt).to_f64().unwrap();
    let steps = ratio.round();
    if steps < 1.0 || ((ratio - steps).abs() > 1e-9 * steps) {
        return Err(Error::InvalidArgument(format!(
            "dt must divide the final time (t_end/dt = {ratio})"
        )));
    }
    Ok(steps as usize)
}

/// Runs the splitting scheme from `state` to `t0 + t_end` and collects
/// snapshots. The observer (if any) is called at the initial state, on the
/// configured cadence, and at the final state.
pub fn evolve<T: Real>(
    mut state: WaveState<T>,
    t_end: T,
    dt: T,
    law: &NonlinearityLaw<T>,
    mut opts: EvolveOptions<'_, T>,
) -> Result<WaveTrajectory<T>> {
    let steps = step_count(t_end, dt)?;
    let table = linear_phase_table(state.psi.grid(), dt, state.eps);

    let mut times = vec![state.t];
    let mut snapshots = vec![state.psi.clone()];
    if let Some(obs) = opts.observer.as_deref_mut() {
        obs(&state);
    }

    for step in 1..=steps {
        step_with_table(&mut state, dt, law, &table)?;
        let last = step == steps;
        if last || (opts.snapshot_every > 0 && step % opts.snapshot_every == 0) {
            times.push(state.t);
            snapshots.push(state.psi.clone());
        }
        if let Some(obs) = opts.observer.as_deref_mut() {
            if last || (opts.observe_every > 0 && step % opts.observe_every == 0) {
                obs(&state);
            }
        }
    }

    Ok(WaveTrajectory { eps: state.eps, times, snapshots })
}

/// L2 norm of the implicit-midpoint residual between two consecutive
/// states: `i eps (psi1 - psi0)/dt + (eps^2/2) lap psi_h - f(|psi_h|^2) psi_h`
/// with `psi_h = (psi0 + psi1)/2`. For a solution pair this is `O(dt^2)`.
pub fn pde_residual<T: Real>(a: &WaveState<T>, b: &WaveState<T>, law: &NonlinearityLaw<T>) -> Result<T> {
    let dt = b.t - a.t;
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument("states must be time ordered".into()));
    }
    let eps = a.eps;
    let half = T::of(0.5);
    let mid = a.psi.zip_with(&b.psi, |x, y| (x + y).scale(half));
    let lap = mid.laplacian();
    let mut sum = T::zero();
    let i_eps_over_dt = Cplx::new(T::zero(), eps / dt);
    let e2h = eps * eps * half;
    for ((&pa, &pb), (&pm, &pl)) in a
        .psi
        .values()
        .iter()
        .zip(b.psi.values())
        .zip(mid.values().iter().zip(lap.values()))
    {
        let r = i_eps_over_dt * (pb - pa) + pl.scale(e2h) - pm.scale(law.f(pm.norm_sqr()));
        sum = sum + r.norm_sqr();
    }
    Ok((sum * a.psi.grid().cell_volume()).sqrt())
}
