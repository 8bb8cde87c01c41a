//! Weak-form verification of the quantum hydrodynamic laws at unit scaled
//! Planck constant.
//!
//! A wave trajectory is audited directly in the hydrodynamic variables
//! obtained from the polar factorization (`madelung::weak_vars`), which stay
//! meaningful across vacuum points where the velocity field does not. Each
//! law is paired with a family of smooth space-time test functions that
//! vanish at the temporal endpoints; on an exact solution every pairing
//! integrates to zero, so the measured residual isolates the solver and
//! quadrature error.
//!
//! Conventions: the trajectory must be produced with `eps = 1`, matching the
//! scaling in which the dispersive stress carries the bare factor 1/4.

use crate::error::{Error, Result};
use crate::field::{ComplexField, RealField, VectorField};
use crate::grid::SpectralGrid;
use crate::law::{LawKind, NonlinearityLaw};
use crate::madelung::{weak_vars, WeakVars};
use crate::schrodinger::WaveTrajectory;
use crate::Real;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

/// Smooth temporal bump supported on `[t0, t1]`: `exp(-1/(1-s^2))` in the
/// affine window coordinate `s in (-1, 1)`, identically zero outside. All
/// derivatives vanish at the endpoints.
#[derive(Debug, Clone)]
pub struct TimeBump<T> {
    t0: T,
    t1: T,
}

impl<T: Real> TimeBump<T> {
    pub fn new(t0: T, t1: T) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::InvalidArgument("time window must have positive length".into()));
        }
        Ok(Self { t0, t1 })
    }

    fn s(&self, t: T) -> T {
        T::of(2.0) * (t - self.t0) / (self.t1 - self.t0) - T::one()
    }

    pub fn value(&self, t: T) -> T {
        let s = self.s(t);
        if s <= -T::one() || s >= T::one() {
            T::zero()
        } else {
            (-T::one() / (T::one() - s * s)).exp()
        }
    }

    pub fn derivative(&self, t: T) -> T {
        let s = self.s(t);
        if s <= -T::one() || s >= T::one() {
            T::zero()
        } else {
            let g = T::one() - s * s;
            let ds_dt = T::of(2.0) / (self.t1 - self.t0);
            (-T::one() / g).exp() * (-T::of(2.0) * s / (g * g)) * ds_dt
        }
    }
}

/// Band-limited spatial test factor with analytically evaluated derivatives,
/// so the audit does not reuse the spectral machinery under test.
pub struct SpaceBump<T: Real> {
    pub field: RealField<T>,
    pub grad: VectorField<T>,
    pub grad_lap: VectorField<T>,
}

impl<T: Real> SpaceBump<T> {
    /// Builds the factor from explicit cosine modes `(mx, my, amp, phase)`.
    pub fn from_modes(grid: Arc<SpectralGrid<T>>, modes: &[(i32, i32, T, T)]) -> Self {
        let k0 = T::of(2.0) * T::PI() / grid.length();
        let eval = |p: [T; 2], which: usize, axis: usize| -> T {
            let mut v = T::zero();
            for &(mx, my, a, ph) in modes {
                let kx = k0 * T::of(mx as f64);
                let ky = k0 * T::of(my as f64);
                let arg = kx * p[0] + ky * p[1] + ph;
                let kaxis = if axis == 0 { kx } else { ky };
                let k2 = kx * kx + ky * ky;
                v = v + match which {
                    0 => a * arg.cos(),
                    1 => -a * kaxis * arg.sin(),
                    _ => a * k2 * kaxis * arg.sin(),
                };
            }
            v
        };
        let field = RealField::from_fn(grid.clone(), |p| eval(p, 0, 0));
        let dim = grid.dim();
        let mut grad = VectorField::zeros(grid.clone());
        let mut grad_lap = VectorField::zeros(grid.clone());
        for axis in 0..dim {
            grad.components[axis] = RealField::from_fn(grid.clone(), |p| eval(p, 1, axis));
            grad_lap.components[axis] = RealField::from_fn(grid.clone(), |p| eval(p, 2, axis));
        }
        Self { field, grad, grad_lap }
    }
}

/// A randomized family of separable space-time test functions
/// `chi(t, x) = S(t) X(x)`: `n_space` band-limited spatial factors crossed
/// with three staggered temporal bumps covering `[0, t_end]`.
pub struct TestFunctionSet<T: Real> {
    pub space: Vec<SpaceBump<T>>,
    pub windows: Vec<TimeBump<T>>,
}

impl<T: Real> TestFunctionSet<T> {
    pub fn generate(grid: Arc<SpectralGrid<T>>, t_end: T, n_space: usize, seed: u64) -> Result<Self> {
        if !(t_end > T::zero()) {
            return Err(Error::InvalidArgument("t_end must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mode_dist = Uniform::new_inclusive(-3i32, 3);
        let amp_dist = Uniform::new(0.5, 1.0);
        let phase_dist = Uniform::new(0.0, std::f64::consts::TAU);

        let mut space = Vec::with_capacity(n_space);
        for _ in 0..n_space {
            let mut modes = Vec::with_capacity(3);
            let mut total = 0.0f64;
            while modes.len() < 3 {
                let mx = mode_dist.sample(&mut rng);
                let my = if grid.dim() == 2 { mode_dist.sample(&mut rng) } else { 0 };
                if mx == 0 && my == 0 {
                    continue;
                }
                let a = amp_dist.sample(&mut rng);
                total += a;
                modes.push((mx, my, a, phase_dist.sample(&mut rng)));
            }
            // normalize to sup norm about one
            let modes: Vec<(i32, i32, T, T)> = modes
                .into_iter()
                .map(|(mx, my, a, ph)| (mx, my, T::of(a / total), T::of(ph)))
                .collect();
            space.push(SpaceBump::from_modes(grid.clone(), &modes));
        }

        let windows = vec![
            TimeBump::new(T::zero(), T::of(0.6) * t_end)?,
            TimeBump::new(T::of(0.2) * t_end, T::of(0.8) * t_end)?,
            TimeBump::new(T::of(0.4) * t_end, t_end)?,
        ];
        Ok(Self { space, windows })
    }
}

/// Composite Simpson rule on a uniform grid; requires an even number of
/// intervals (odd sample count).
pub fn simpson<T: Real>(values: &[T], dt: T) -> Result<T> {
    let n = values.len();
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "Simpson rule needs an odd sample count of at least 3, got {n}"
        )));
    }
    let mut acc = values[0] + values[n - 1];
    for (i, &v) in values.iter().enumerate().take(n - 1).skip(1) {
        let w = if i % 2 == 1 { T::of(4.0) } else { T::of(2.0) };
        acc = acc + w * v;
    }
    Ok(acc * dt / T::of(3.0))
}

fn uniform_spacing<T: Real>(times: &[T]) -> Result<T> {
    if times.len() < 3 {
        return Err(Error::InvalidArgument("need at least three snapshots".into()));
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > T::of(1e-6) * dt.abs() {
            return Err(Error::InvalidArgument("snapshot times must be uniformly spaced".into()));
        }
    }
    Ok(dt)
}

/// Worst signed pairing (`residual`) together with the magnitude of the
/// integrand it cancelled from (`scale`), for tolerance calibration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeakResidual<T> {
    pub residual: T,
    pub scale: T,
}

fn integrate_field<T: Real>(weights: &RealField<T>, f: &RealField<T>) -> T {
    let s: T = weights.values().iter().zip(f.values()).map(|(&a, &b)| a * b).sum();
    s * weights.grid().cell_volume()
}

fn max_pairing<T: Real>(
    times: &[T],
    windows: &[TimeBump<T>],
    // per snapshot: (factor paired with S', factor paired with S)
    pairings: &[(T, T)],
) -> Result<WeakResidual<T>> {
    let dt = uniform_spacing(times)?;
    let mut worst = T::zero();
    let mut scale = T::zero();
    for win in windows {
        let samples: Vec<T> = times
            .iter()
            .zip(pairings)
            .map(|(&t, &(a, b))| win.derivative(t) * a + win.value(t) * b)
            .collect();
        let r = simpson(&samples, dt)?.abs();
        worst = worst.max(r);
        scale = scale.max(samples.iter().fold(T::zero(), |m, v| m.max(v.abs())));
    }
    Ok(WeakResidual { residual: worst, scale })
}

/// Mass-law residual: the worst over the test family of
/// `| integral ( rho dS/dt X + S J . grad X ) dx dt |`.
pub fn weak_residual_continuity<T: Real>(
    traj: &WaveTrajectory<T>,
    tests: &TestFunctionSet<T>,
) -> Result<WeakResidual<T>> {
    let vars: Vec<WeakVars<T>> = traj.snapshots.iter().map(weak_vars).collect();
    let mut worst = WeakResidual { residual: T::zero(), scale: T::zero() };
    for bump in &tests.space {
        let pairings: Vec<(T, T)> = vars
            .iter()
            .map(|w| {
                let a = integrate_field(&w.rho, &bump.field);
                let mut b = T::zero();
                for axis in 0..w.current.components.len() {
                    b = b + integrate_field(&w.current.components[axis], &bump.grad.components[axis]);
                }
                (a, b)
            })
            .collect();
        let r = max_pairing(&traj.times, &tests.windows, &pairings)?;
        worst.residual = worst.residual.max(r.residual);
        worst.scale = worst.scale.max(r.scale);
    }
    Ok(worst)
}

/// Momentum-law residual: the worst over the test family and coordinate
/// axes of the pairing
/// `| integral ( J_j dS/dt X
///             + S [ (lambda_j lambda_k + d_j sqrt(rho) d_k sqrt(rho)) d_k X
///                 + P(rho) d_j X
///                 - (1/4) rho d_j (Laplace X) ] ) dx dt |`,
/// the fully integrated-by-parts form of the momentum balance with the
/// dispersive stress split into its second-order and square-gradient parts.
///
/// The quadratic stress is evaluated as `Re(d_j conj(psi') d_k psi')` with
/// `psi'` the gradient, which equals the polar-variable sum off vacuum and
/// extends it smoothly across nodal points, so the pointwise quadrature does
/// not inherit holes from the vacuum mask.
pub fn weak_residual_momentum<T: Real>(
    traj: &WaveTrajectory<T>,
    tests: &TestFunctionSet<T>,
    law: &NonlinearityLaw<T>,
) -> Result<WeakResidual<T>> {
    let quarter = T::of(0.25);
    struct Snapshot<T: Real> {
        rho: RealField<T>,
        pressure: RealField<T>,
        current: VectorField<T>,
        grad: crate::field::ComplexVectorField<T>,
    }
    let vars: Vec<Snapshot<T>> = traj
        .snapshots
        .iter()
        .map(|psi| {
            let rho = psi.modulus_squared();
            let pressure = rho.map(|r| law.pressure_centered(r));
            let grad = psi.gradient();
            let dim = psi.grid().dim();
            let mut current = VectorField::zeros(psi.grid().clone());
            for axis in 0..dim {
                let vals: Vec<T> = psi
                    .values()
                    .iter()
                    .zip(grad.components[axis].values())
                    .map(|(&p, &g)| p.re * g.im - p.im * g.re)
                    .collect();
                current.components[axis] = RealField::new(psi.grid().clone(), vals);
            }
            Snapshot { rho, pressure, current, grad }
        })
        .collect();

    let dim = traj.snapshots[0].grid().dim();
    let mut worst = WeakResidual { residual: T::zero(), scale: T::zero() };
    for bump in &tests.space {
        for j in 0..dim {
            let pairings: Vec<(T, T)> = vars
                .iter()
                .map(|snap| {
                    let a = integrate_field(&snap.current.components[j], &bump.field);
                    let mut b = T::zero();
                    for k in 0..dim {
                        b = b + integrate_stress(
                            &snap.grad.components[j],
                            &snap.grad.components[k],
                            &bump.grad.components[k],
                        );
                    }
                    b = b + integrate_field(&snap.pressure, &bump.grad.components[j]);
                    b = b - quarter * integrate_field(&snap.rho, &bump.grad_lap.components[j]);
                    (a, b)
                })
                .collect();
            let r = max_pairing(&traj.times, &tests.windows, &pairings)?;
            worst.residual = worst.residual.max(r.residual);
            worst.scale = worst.scale.max(r.scale);
        }
    }
    Ok(worst)
}

/// `integral Re(conj(a) b) w dx` for complex gradient components.
fn integrate_stress<T: Real>(a: &ComplexField<T>, b: &ComplexField<T>, w: &RealField<T>) -> T {
    let s: T = a
        .values()
        .iter()
        .zip(b.values())
        .zip(w.values())
        .map(|((&x, &y), &z)| (x.re * y.re + x.im * y.im) * z)
        .sum();
    s * w.grid().cell_volume()
}

/// Calibration constant for the residual tolerance, fixed once against the
/// commissioning runs in this module's tests (worst observed ratio of
/// residual to `scale * (dt_obs^2 + dt^2)` was below 3; the factor leaves
/// headroom without masking order-one failures such as a sign error, which
/// changes the residual by several orders of magnitude).
pub const RESIDUAL_CALIBRATION: f64 = 20.0;

/// Calibrated residual tolerance for a trajectory sampled with solver step
/// `dt` and observation spacing `dt_obs`: trapezoid-level time-quadrature
/// bound plus the second-order solver error, scaled by the observed pairing
/// magnitude.
pub fn calibrated_tolerance<T: Real>(scale: T, dt: T, dt_obs: T) -> T {
    T::of(RESIDUAL_CALIBRATION) * scale.max(T::one()) * (dt_obs * dt_obs + dt * dt)
}

/// 2D rotational compatibility of the current: off vacuum the antisymmetric
/// derivative of `J` is slaved to the amplitude gradient,
/// `d_1 J^2 - d_2 J^1 = 2 (lambda^2 d_1 sqrt(rho) - lambda^1 d_2 sqrt(rho))`.
/// Returns the worst pointwise mismatch off the vacuum set. The left side
/// uses spectral derivatives of the (smooth, bilinear) current; the right
/// side uses the algebraic polar-factorization fields.
pub fn curl_constraint_residual<T: Real>(psi: &ComplexField<T>) -> Result<T> {
    if psi.grid().dim() != 2 {
        return Err(Error::InvalidArgument("curl constraint is two-dimensional".into()));
    }
    let w = weak_vars(psi);
    let g1 = w.current.components[0].gradient();
    let g2 = w.current.components[1].gradient();
    let mut worst = T::zero();
    for i in 0..psi.len() {
        if w.vacuum[i] {
            continue;
        }
        let lhs = g2.components[0].values()[i] - g1.components[1].values()[i];
        let rhs = T::of(2.0)
            * (w.lambda.components[1].values()[i] * w.grad_sqrt_rho.components[0].values()[i]
                - w.lambda.components[0].values()[i] * w.grad_sqrt_rho.components[1].values()[i]);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Pointwise gradient-splitting identity
/// `|grad psi|^2 = |grad sqrt(rho)|^2 + |lambda|^2` off vacuum; returns the
/// worst off-vacuum mismatch (pure rounding for any field).
pub fn mod_identity_residual<T: Real>(psi: &ComplexField<T>) -> T {
    let w = weak_vars(psi);
    let grad = psi.gradient();
    let dim = psi.grid().dim();
    let mut worst = T::zero();
    for i in 0..psi.len() {
        if w.vacuum[i] {
            continue;
        }
        let mut full = T::zero();
        let mut split = T::zero();
        for axis in 0..dim {
            full = full + grad.components[axis].values()[i].norm_sqr();
            split = split
                + w.grad_sqrt_rho.components[axis].values()[i].sq()
                + w.lambda.components[axis].values()[i].sq();
        }
        worst = worst.max((full - split).abs());
    }
    worst
}

/// Energy functional in the polar variables:
/// `integral ( |lambda|^2 / 2 + |grad sqrt(rho)|^2 / 2 + F(rho) )`
/// with the antiderivative centered on the background.
pub fn weak_energy<T: Real>(psi: &ComplexField<T>, law: &NonlinearityLaw<T>) -> T {
    let w = weak_vars(psi);
    let dim = psi.grid().dim();
    let half = T::of(0.5);
    let mut total = T::zero();
    for i in 0..psi.len() {
        let mut kin = T::zero();
        for axis in 0..dim {
            kin = kin
                + w.grad_sqrt_rho.components[axis].values()[i].sq()
                + w.lambda.components[axis].values()[i].sq();
        }
        total = total + half * kin + law.energy_density(w.rho.values()[i]);
    }
    total * psi.grid().cell_volume()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyEqualityReport<T> {
    /// Relative drift of the polar-variable energy along the trajectory.
    pub drift: T,
    /// Worst gap between the polar-variable energy and the wave-function
    /// energy at unit scaled Planck constant; zero off vacuum up to rounding.
    pub max_gap: T,
}

/// Checks conservation of the polar-variable energy and its agreement with
/// the wave-function energy `integral ( |grad psi|^2 / 2 + F(rho) )`.
pub fn energy_equality_check<T: Real>(
    traj: &WaveTrajectory<T>,
    law: &NonlinearityLaw<T>,
) -> EnergyEqualityReport<T> {
    let half = T::of(0.5);
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut max_gap = T::zero();
    for psi in &traj.snapshots {
        let e = weak_energy(psi, law);
        lo = lo.min(e);
        hi = hi.max(e);

        let grad = psi.gradient();
        let rho = psi.modulus_squared();
        let dim = psi.grid().dim();
        let mut wave = T::zero();
        for i in 0..psi.len() {
            let mut kin = T::zero();
            for axis in 0..dim {
                kin = kin + grad.components[axis].values()[i].norm_sqr();
            }
            wave = wave + half * kin + law.energy_density(rho.values()[i]);
        }
        wave = wave * psi.grid().cell_volume();
        max_gap = max_gap.max((e - wave).abs());
    }
    let scale = hi.abs().max(lo.abs()).max(T::of(1e-30));
    EnergyEqualityReport { drift: (hi - lo) / scale, max_gap }
}

/// Admissibility gate for pure-power laws: the weak formulation needs the
/// potential energy controlled by the square-gradient norm, which restricts
/// the exponent to `sigma * dim <= 2`.
pub fn sigma_admissible(sigma: u32, dim: usize) -> bool {
    (sigma as usize) * dim <= 2
}

/// Rejects laws outside the weak-formulation admissibility range.
pub fn check_law_admissible<T: Real>(law: &NonlinearityLaw<T>, dim: usize) -> Result<()> {
    if let LawKind::Power(sigma) = law.kind() {
        if !sigma_admissible(sigma, dim) {
            return Err(Error::InvalidArgument(format!(
                "power-law exponent {sigma} is outside the weak-formulation range in dimension {dim} (need sigma * dim <= 2)"
            )));
        }
    }
    Ok(())
}

/// One verified law in a machine-readable audit report.
#[derive(Debug, Clone, Serialize)]
pub struct WeakLawReport<T> {
    pub law: String,
    pub residual: T,
    pub tolerance: T,
    pub pass: bool,
}

impl<T: Real> WeakLawReport<T> {
    pub fn new(law: &str, residual: T, tolerance: T) -> Self {
        Self { law: law.into(), residual, tolerance, pass: residual < tolerance }
    }
}
