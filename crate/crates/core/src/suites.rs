//! Named verification suites with quantitative pass thresholds. Each suite
//! runs a fixed desk-scale configuration, measures drifts, residuals, or
//! convergence orders, and reports every check with its measured value, so
//! the same code backs both the integration gate and the command-line
//! `verify` subcommand.

use crate::asymptotics::{
    amplitude_isolation_ratio, dispersion_scaled, dispersion_unit, euler_limit_errors,
    euler_limit_fit, transonic_errors, transonic_order_fit, wave_approx_cells, wave_approx_fit,
};
use crate::conserved::{
    check_flux_laws, diagnostics_korteweg, diagnostics_wave, identity_residuals,
    DiagnosticsRecord,
};
use crate::data;
use crate::error::{Error, Result};
use crate::field::{ComplexField, RealField, VectorField};
use crate::fit::fit_order;
use crate::grid::SpectralGrid;
use crate::hydro::{
    euler_cfl_dt, euler_evolve, extended_evolve, BreakdownCause, BreakdownThresholds,
    ExtendedFlow, HydroEvolveOptions, SymmetricEulerState,
};
use crate::kdv::{kdv_evolve, soliton_profile, Branch};
use crate::law::{CapillarityLaw, NonlinearityLaw};
use crate::madelung::{self, default_density_floor, from_hydro, to_hydro};
use crate::schrodinger::{evolve, EvolveOptions, WaveState};
use crate::weakqhd::{
    calibrated_tolerance, curl_constraint_residual, energy_equality_check, mod_identity_residual,
    weak_residual_continuity, weak_residual_momentum, TestFunctionSet,
};
use crate::Cplx;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// One named measurement with its verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of a whole suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self { suite: suite.into(), passed: true, checks: Vec::new() }
    }

    fn record(&mut self, name: &str, passed: bool, detail: String) {
        self.passed &= passed;
        self.checks.push(CheckResult { name: name.into(), passed, detail });
    }

    fn below(&mut self, name: &str, value: f64, bound: f64) {
        self.record(name, value < bound, format!("{value:.3e} (require < {bound:.3e})"));
    }

    fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        self.record(name, value >= bound, format!("{value:.3} (require >= {bound})"));
    }

    fn within(&mut self, name: &str, value: f64, lo: f64, hi: f64) {
        self.record(name, value >= lo && value <= hi, format!("{value:.3} (require {lo}..{hi})"));
    }
}

pub const SUITE_NAMES: &[&str] = &[
    "conservation",
    "identities",
    "korteweg",
    "dispersion",
    "euler_limit",
    "wave_approx",
    "kdv",
    "weakqhd",
];

/// Runs a suite by name.
pub fn run_suite(name: &str) -> Result<SuiteReport> {
    match name {
        "conservation" => conservation_suite(),
        "identities" => identities_suite(),
        "korteweg" => korteweg_suite(),
        "dispersion" => dispersion_suite(),
        "euler_limit" => euler_limit_suite(),
        "wave_approx" => wave_approx_suite(),
        "kdv" => kdv_suite(),
        "weakqhd" => weakqhd_suite(),
        other => Err(Error::InvalidArgument(format!(
            "unknown suite '{other}'; available: {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

/// Evolves a wave state and collects diagnostics every `observe_every`
/// steps (plus the initial and final states).
fn wave_diagnostics_run(
    psi0: &ComplexField<f64>,
    eps: f64,
    law: &NonlinearityLaw<f64>,
    t_end: f64,
    dt: f64,
    observe_every: usize,
) -> Result<Vec<DiagnosticsRecord<f64>>> {
    let mut records = Vec::new();
    {
        let mut observer =
            |s: &WaveState<f64>| records.push(diagnostics_wave(&s.psi, s.t, s.eps, law));
        evolve(
            WaveState::new(psi0.clone(), 0.0, eps)?,
            t_end,
            dt,
            law,
            EvolveOptions { snapshot_every: 0, observe_every, observer: Some(&mut observer) },
        )?;
    }
    Ok(records)
}

/// Localized planar packet with a transverse carrier: offset along the
/// first axis, phase velocity along the second, so the angular momentum is
/// genuinely nonzero.
fn planar_packet(grid: Arc<SpectralGrid<f64>>) -> ComplexField<f64> {
    let ky = 2.0 * PI / grid.length() * 2.0;
    ComplexField::from_fn(grid, move |p| {
        let dx = p[0] - 1.5;
        let amp = 0.8 * (-(dx * dx + p[1] * p[1]) / 2.25).exp();
        Cplx::new(amp * (ky * p[1]).cos(), amp * (ky * p[1]).sin())
    })
}

/// Constants of motion on a localized cubic run: mass, energy (with its
/// step-halving ratio), momentum, boosted moment, angular momentum in the
/// plane, and the pseudo-conformal identity at every record.
pub fn conservation_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("conservation");
    let law = NonlinearityLaw::cubic();
    let eps = 0.5;

    let grid = SpectralGrid::<f64>::new(1, 512, 30.0)?;
    let psi0 = data::gaussian_packet(grid, 0.8, 1.5, 0.0, 2);
    let base = wave_diagnostics_run(&psi0, eps, &law, 1.0, 1e-3, 10)?;
    let flux = check_flux_laws(&base)?;
    rep.below("mass_drift", flux.mass_drift, 1e-10);
    rep.below("energy_drift", flux.energy_drift, 1e-6);
    let halved = check_flux_laws(&wave_diagnostics_run(&psi0, eps, &law, 1.0, 5e-4, 20)?)?;
    rep.within(
        "energy_drift_step_halving_ratio",
        flux.energy_drift / halved.energy_drift.max(1e-300),
        3.0,
        5.5,
    );
    rep.below("momentum_drift", flux.momentum_drift, 1e-8);
    rep.below("boosted_moment_drift", flux.galilean_drift, 1e-8);
    let (z_res, u_res) = identity_residuals(&base);
    rep.below("conformal_identity", z_res, 1e-10);
    rep.below("boosted_moment_identity", u_res, 1e-8);

    let g2 = SpectralGrid::<f64>::new(2, 128, 20.0)?;
    let rec2 = wave_diagnostics_run(&planar_packet(g2), eps, &law, 0.5, 1e-3, 10)?;
    let flux2 = check_flux_laws(&rec2)?;
    rep.below("angular_momentum_drift_2d", flux2.angular_drift, 1e-8);
    Ok(rep)
}

/// Flux-law residual convergence in the observation spacing, conservation
/// of the pseudo-conformal quantity in the critical planar case, and the
/// wave-versus-extended-hydrodynamics equivalence with its refinement
/// order.
pub fn identities_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("identities");
    let law = NonlinearityLaw::cubic();
    let eps = 0.5;

    let grid = SpectralGrid::<f64>::new(1, 512, 30.0)?;
    let psi0 = data::gaussian_packet(grid.clone(), 0.8, 1.5, 0.0, 2);
    let fine = wave_diagnostics_run(&psi0, eps, &law, 1.0, 1e-3, 5)?;
    let coarse: Vec<DiagnosticsRecord<f64>> = fine.iter().step_by(2).cloned().collect();
    let rf = check_flux_laws(&fine)?;
    let rc = check_flux_laws(&coarse)?;
    // the first moment is exactly linear in time for the splitting, so its
    // flux residual sits at rounding level at every spacing rather than on
    // an order-2 curve; assert smallness instead of a vacuous order
    rep.below(
        "center_flux_residual",
        rf.center_residual.max(rc.center_residual),
        1e-9,
    );
    rep.within(
        "inertia_flux_order",
        (rc.inertia_residual / rf.inertia_residual).log2(),
        1.7,
        2.3,
    );
    rep.within(
        "virial_flux_order",
        (rc.virial_residual / rf.virial_residual).log2(),
        1.7,
        2.3,
    );
    rep.within(
        "conformal_flux_order",
        (rc.conformal_residual / rf.conformal_residual).log2(),
        1.7,
        2.3,
    );

    // planar cubic case: the virial source vanishes identically and the
    // pseudo-conformal quantity is itself conserved
    let g2 = SpectralGrid::<f64>::new(2, 128, 20.0)?;
    let rec2 = wave_diagnostics_run(&planar_packet(g2), eps, &law, 0.5, 1e-3, 10)?;
    let z0 = rec2[0].conformal;
    let z_scale = rec2
        .iter()
        .fold(0.0f64, |m, r| m.max(r.conformal.abs()))
        .max(rec2[0].energy.abs())
        .max(1e-30);
    let z_drift = rec2.iter().fold(0.0f64, |m, r| m.max((r.conformal - z0).abs())) / z_scale;
    rep.below("conformal_drift_2d", z_drift, 1e-6);

    // same potential data through the wave solver plus polar factorization
    // and through the extended dispersive solver
    let rho0 = data::gaussian_density(grid.clone(), 1.0, 0.3, 2.0, 0.0);
    let kx = 2.0 * PI / grid.length();
    let phi0 = RealField::from_fn(grid.clone(), move |p| 0.3 / kx * (kx * p[0]).sin());
    let mut v0 = VectorField::zeros(grid.clone());
    v0.components[0] = RealField::from_fn(grid.clone(), move |p| 0.3 * (kx * p[0]).cos());
    let floor = default_density_floor(&rho0);
    let gap = |dt: f64| -> Result<f64> {
        let traj = evolve(
            WaveState::new(from_hydro(&rho0, &phi0, eps)?, 0.0, eps)?,
            0.25,
            dt,
            &law,
            EvolveOptions::default(),
        )?;
        let wave = to_hydro(traj.last(), eps);
        let state0 = madelung::extended_vars_qhd(&rho0, &v0, eps, floor)?;
        let snaps = extended_evolve(state0, 0.25, dt, &law, &ExtendedFlow::Qhd { eps }, floor, 0)?;
        let hydro = snaps.last().expect("final state");
        let hv = hydro.velocity();
        Ok(wave.rho.l2_distance(&hydro.rho) + wave.v.components[0].l2_distance(&hv.components[0]))
    };
    let gap_coarse = gap(2.5e-4)?;
    let gap_fine = gap(1.25e-4)?;
    rep.below("formulation_gap", gap_coarse, 1e-5);
    rep.at_least(
        "formulation_gap_order",
        (gap_coarse / gap_fine.max(1e-300)).log2(),
        1.9,
    );
    Ok(rep)
}

/// Capillary energy conservation at constant capillarity, order-2
/// convergence of the virial flux law with its capillarity source, and the
/// coincidence of the scaled-capillarity flow with the dispersive
/// formulation.
pub fn korteweg_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("korteweg");
    let g = SpectralGrid::<f64>::new(1, 256, 20.0)?;
    // The moment functionals in the virial law are not periodic, so the
    // deviation from the far-field state must decay inside the box: a
    // unit-background law with a localized bump and a windowed velocity.
    let law = NonlinearityLaw::gross_pitaevskii();
    let kappa = CapillarityLaw::constant(0.01)?;
    let rho0 = data::gaussian_density(g.clone(), 1.0, 0.3, 2.0, 0.0);
    let mut v0 = VectorField::zeros(g.clone());
    v0.components[0] = RealField::from_fn(g.clone(), |p| 0.1 * (-(p[0] / 2.5).powi(2)).exp());
    let floor = default_density_floor(&rho0);

    let state0 = madelung::extended_vars_korteweg(&rho0, &v0, &kappa, floor)?;
    let snaps = extended_evolve(
        state0,
        0.5,
        1e-3,
        &law,
        &ExtendedFlow::Korteweg { kappa },
        floor,
        5,
    )?;
    let records: Vec<DiagnosticsRecord<f64>> = snaps
        .iter()
        .map(|s| diagnostics_korteweg(&s.rho, &s.velocity(), s.t, &kappa, &law))
        .collect();
    let rf = check_flux_laws(&records)?;
    rep.below("capillary_energy_drift", rf.energy_drift, 1e-6);

    let thinned: Vec<DiagnosticsRecord<f64>> = records.iter().step_by(2).cloned().collect();
    let rc = check_flux_laws(&thinned)?;
    rep.within(
        "virial_flux_order",
        (rc.virial_residual / rf.virial_residual).log2(),
        1.7,
        2.3,
    );

    // kappa(rho) matched to the dispersive closure: the two steppers solve
    // the same equations and must agree to quadrature accuracy
    let eps = 0.5;
    let scaled = CapillarityLaw::qhd_scaled(eps)?;
    let s0 = madelung::extended_vars_qhd(&rho0, &v0, eps, floor)?;
    let dt = 2.5e-5;
    let horizon = 0.05;
    let a = extended_evolve(s0.clone(), horizon, dt, &law, &ExtendedFlow::Qhd { eps }, floor, 0)?;
    let b = extended_evolve(
        s0,
        horizon,
        dt,
        &law,
        &ExtendedFlow::Korteweg { kappa: scaled },
        floor,
        0,
    )?;
    let fa = a.last().expect("final state");
    let fb = b.last().expect("final state");
    let gap = fa.rho.l2_distance(&fb.rho) + fa.z.components[0].l2_distance(&fb.z.components[0]);
    rep.below("scaled_capillarity_matches_dispersive", gap, 1e-8);
    Ok(rep)
}

/// Mode frequencies of the scaled dispersive system against
/// `omega = |k| sqrt(1 + eps^2 |k|^2 / 4)`, and the small-wavenumber phase
/// speed of the unit-background equation against `sqrt(2)`.
pub fn dispersion_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("dispersion");
    for &eps in &[0.5, 1.0, 2.0] {
        let samples = dispersion_scaled(eps, &[1, 2, 4], 64, 2.0 * PI)?;
        let worst = samples.iter().map(|s| s.rel_error()).fold(0.0f64, f64::max);
        rep.below(&format!("scaled_relation_eps_{eps}"), worst, 1e-3);
    }
    let long = dispersion_unit(&[1], 256, 40.0 * PI)?;
    let speed = long[0].measured / long[0].k;
    rep.below(
        "unit_small_k_phase_speed_gap",
        (speed - 2.0f64.sqrt()).abs(),
        1e-2,
    );
    Ok(rep)
}

/// Convergence of the wave solver to the non-dispersive fluid as the
/// dispersion parameter vanishes, and finite-time gradient blowup with
/// zero-speed support propagation for compactly supported fluid data.
pub fn euler_limit_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("euler_limit");
    let law = NonlinearityLaw::cubic();

    let g = SpectralGrid::<f64>::new(1, 512, 30.0)?;
    let rho0 = data::gaussian_density(g, 1.0, 0.2, 1.0, 0.0);
    let points = euler_limit_errors(&rho0, &law, &[0.2, 0.1, 0.05, 0.025], 0.5)?;
    let fit = euler_limit_fit(&points)?;
    rep.at_least("limit_order", fit.slope, 1.0);
    let xs: Vec<f64> = points.iter().map(|p| p.eps).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.density_error).collect();
    rep.at_least("density_limit_order", fit_order(&xs, &ys)?.slope, 1.7);

    // compactly supported hump over vacuum: characteristics have zero speed
    // at the support boundary, so the deviation cannot spread, while the
    // interior steepens to a gradient catastrophe
    let gb = SpectralGrid::<f64>::new(1, 2048, 30.0)?;
    let radius = 4.0;
    let rho_c = data::compact_bump(gb.clone(), 0.0, 1.0, radius);
    let state0 = SymmetricEulerState::from_density(&rho_c, VectorField::zeros(gb.clone()), 0.0)?;
    let dt0 = 0.4 * euler_cfl_dt(&state0, &law);
    let horizon = 20.0;
    let per = (horizon / dt0).ceil() as usize;
    let dt = horizon / per as f64;
    let opts = HydroEvolveOptions {
        snapshot_every: (0.05 / dt).ceil() as usize,
        // trigger while the steepening front is still spectrally resolved,
        // so the mass outside the initial support stays at the tail level
        thresholds: Some(BreakdownThresholds { max_gradient: 4.0, min_density: -1.0 }),
    };
    let (snaps, report) = euler_evolve(state0, horizon, dt, &law, &opts)?;
    let report = report.expect("monitoring was requested");
    let triggered =
        report.triggered && matches!(report.cause, Some(BreakdownCause::GradientBlowup));
    rep.record(
        "gradient_blowup_triggered",
        triggered,
        format!(
            "triggered {} at t = {:.4}, peak gradient {:.3}",
            report.triggered,
            report.t.unwrap_or(f64::NAN),
            report.peak_gradient
        ),
    );

    let mut leak = 0.0f64;
    for s in &snaps {
        let rho = s.density();
        let mut outside = 0.0;
        for (i, &r) in rho.values().iter().enumerate() {
            if gb.point(i)[0].abs() > radius {
                outside += r.abs();
            }
        }
        leak = leak.max(outside * gb.cell_volume());
    }
    rep.below("support_mass_leakage", leak, 1e-8);
    Ok(rep)
}

/// Two-term error model of the dispersive flow against the acoustic
/// propagator over a grid of observation times, amplitudes, and dispersion
/// parameters, plus the quadratic-term isolation ratio.
pub fn wave_approx_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("wave_approx");
    let g = SpectralGrid::<f64>::new(1, 256, 20.0)?;
    let kx = 2.0 * PI / 20.0;
    let b = RealField::from_fn(g.clone(), move |p| {
        (kx * p[0]).cos() + 0.6 * (2.0 * kx * p[0]).sin()
    });
    let v = VectorField::zeros(g);
    let law = NonlinearityLaw::gross_pitaevskii();
    let cells = wave_approx_cells(&b, &v, &law, 1.0, 4, &[0.1, 0.025], &[0.5, 0.25], 2.5e-3)?;
    rep.at_least("cell_count", cells.len() as f64, 12.0);
    let fit = wave_approx_fit(&cells)?;
    rep.at_least("two_term_fit_r_squared", fit.r_squared, 0.9);
    let ratio = amplitude_isolation_ratio(&b, &v, &law, 1.0, 0.1, 0.5, 2.5e-3)?;
    rep.at_least("amplitude_isolation_ratio", ratio, 10.0);
    Ok(rep)
}

/// Soliton-shape validation of the third-order comparator and the measured
/// convergence order of the long-wave rescaling toward it.
pub fn kdv_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("kdv");

    let g = SpectralGrid::<f64>::new(1, 512, 80.0)?;
    let u0 = soliton_profile(g.clone(), 1.0, 0.0);
    let states = kdv_evolve(&u0, 1.0, 1e-3, Branch::Left, 0)?;
    let exact = soliton_profile(g, 1.0, 1.0);
    rep.below(
        "soliton_shape_error",
        states.last().expect("final state").u.sup_distance(&exact),
        1e-6,
    );

    let slow = SpectralGrid::<f64>::new(1, 2048, 40.0)?;
    let n0 = RealField::from_fn(slow, |p| {
        let s = 1.0 / (p[0] / 2.0).cosh();
        3.0 * s * s * (p[0] / 4.0).tanh()
    });
    let mut points = Vec::new();
    for &eps in &[0.3, 0.2, 0.15, 0.1] {
        let p = transonic_errors(&n0, eps, &[0.5], 2e-3, 1e-3)?;
        points.push(p[0]);
    }
    let fit = transonic_order_fit(&points)?;
    let detail = points
        .iter()
        .map(|p| format!("eps {}: {:.3e}", p.eps, p.total()))
        .collect::<Vec<_>>()
        .join(", ");
    rep.record(
        "transonic_order",
        fit.slope >= 1.7 && fit.slope <= 2.3,
        format!("slope {:.3} (require 1.7..2.3); {detail}", fit.slope),
    );
    Ok(rep)
}

/// Weak-form residuals on a smooth one-dimensional run and a
/// vortex-carrying planar run at the same resolution, the pointwise
/// modulus identity, and kink-pair stationarity.
pub fn weakqhd_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("weakqhd");
    let dt = 2.5e-3;
    let observe = 5usize;
    let dt_obs = dt * observe as f64;
    let t_end = 0.5;

    let g1 = SpectralGrid::<f64>::new(1, 128, 20.0)?;
    let law1 = NonlinearityLaw::cubic();
    let kx = 2.0 * PI / 20.0;
    let rho0 = RealField::from_fn(g1.clone(), move |p| 1.0 + 0.3 * (kx * p[0]).cos());
    let phi0 = RealField::from_fn(g1.clone(), move |p| 0.1 * (2.0 * kx * p[0]).sin());
    let traj1 = evolve(
        WaveState::new(from_hydro(&rho0, &phi0, 1.0)?, 0.0, 1.0)?,
        t_end,
        dt,
        &law1,
        EvolveOptions { snapshot_every: observe, ..Default::default() },
    )?;
    let tests1 = TestFunctionSet::generate(g1, t_end, 6, 11)?;
    let cont1 = weak_residual_continuity(&traj1, &tests1)?;
    rep.below(
        "continuity_residual_1d",
        cont1.residual,
        calibrated_tolerance(cont1.scale, dt, dt_obs),
    );
    let mom1 = weak_residual_momentum(&traj1, &tests1, &law1)?;
    rep.below(
        "momentum_residual_1d",
        mom1.residual,
        calibrated_tolerance(mom1.scale, dt, dt_obs),
    );
    let en1 = energy_equality_check(&traj1, &law1);
    rep.below("energy_equality_1d", en1.drift, calibrated_tolerance(1.0, dt, dt_obs));
    let mod1 = traj1
        .snapshots
        .iter()
        .map(mod_identity_residual)
        .fold(0.0f64, f64::max);
    rep.below("modulus_identity_1d", mod1, 1e-10);

    let g2 = SpectralGrid::<f64>::new(2, 128, 20.0)?;
    let law2 = NonlinearityLaw::gross_pitaevskii();
    let traj2 = evolve(
        WaveState::new(data::vortex_lattice(g2.clone()), 0.0, 1.0)?,
        t_end,
        dt,
        &law2,
        EvolveOptions { snapshot_every: observe, ..Default::default() },
    )?;
    let tests2 = TestFunctionSet::generate(g2, t_end, 6, 12)?;
    let cont2 = weak_residual_continuity(&traj2, &tests2)?;
    rep.below(
        "continuity_residual_2d",
        cont2.residual,
        calibrated_tolerance(cont2.scale, dt, dt_obs),
    );
    let mom2 = weak_residual_momentum(&traj2, &tests2, &law2)?;
    rep.below(
        "momentum_residual_2d",
        mom2.residual,
        calibrated_tolerance(mom2.scale, dt, dt_obs),
    );
    let mut curl2 = 0.0f64;
    for psi in &traj2.snapshots {
        curl2 = curl2.max(curl_constraint_residual(psi)?);
    }
    rep.below("curl_constraint_2d", curl2, calibrated_tolerance(1.0, dt, dt_obs));
    let en2 = energy_equality_check(&traj2, &law2);
    rep.below("energy_equality_2d", en2.drift, calibrated_tolerance(1.0, dt, dt_obs));
    let mod2 = traj2
        .snapshots
        .iter()
        .map(mod_identity_residual)
        .fold(0.0f64, f64::max);
    rep.below("modulus_identity_2d", mod2, 1e-10);

    let gk = SpectralGrid::<f64>::new(1, 256, 40.0)?;
    let dark = data::dark_pair(gk);
    let trajk = evolve(
        WaveState::new(dark.clone(), 0.0, 1.0)?,
        1.0,
        2.5e-4,
        &law2,
        EvolveOptions::default(),
    )?;
    rep.below("kink_pair_stationarity", trajk.last().sup_distance(&dark), 1e-6);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        let err = run_suite("nonsense").unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn suite_names_dispatch() {
        // every advertised name resolves; run the cheapest one end to end
        assert!(SUITE_NAMES.contains(&"conservation"));
        let rep = run_suite("dispersion").unwrap();
        assert_eq!(rep.suite, "dispersion");
        assert!(!rep.checks.is_empty());
        assert!(rep.passed, "checks: {:?}", rep.checks);
    }

    #[test]
    fn report_serializes_to_json() {
        let mut rep = SuiteReport::new("demo");
        rep.below("small", 1e-9, 1e-6);
        rep.at_least("big", 3.0, 2.0);
        let text = serde_json::to_string(&rep).unwrap();
        assert!(text.contains("\"suite\":\"demo\""));
        assert!(text.contains("\"passed\":true"));
    }
}
