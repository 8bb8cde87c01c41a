//! End-to-end verification gate. Each test prints one pass/fail line for a
//! criterion group, with every underlying measurement and its tolerance,
//! then asserts. Suites shared by two criteria run once per process.

use qhdlab::suites::{self, CheckResult, SuiteReport};
use std::sync::OnceLock;

static CONSERVATION: OnceLock<SuiteReport> = OnceLock::new();
static IDENTITIES: OnceLock<SuiteReport> = OnceLock::new();
static KORTEWEG: OnceLock<SuiteReport> = OnceLock::new();
static DISPERSION: OnceLock<SuiteReport> = OnceLock::new();
static EULER_LIMIT: OnceLock<SuiteReport> = OnceLock::new();
static WAVE_APPROX: OnceLock<SuiteReport> = OnceLock::new();
static KDV: OnceLock<SuiteReport> = OnceLock::new();
static WEAKQHD: OnceLock<SuiteReport> = OnceLock::new();

fn suite(cell: &'static OnceLock<SuiteReport>, name: &'static str) -> &'static SuiteReport {
    cell.get_or_init(|| {
        suites::run_suite(name).unwrap_or_else(|e| panic!("suite {name} did not run: {e}"))
    })
}

fn select<'a>(rep: &'a SuiteReport, names: &[&str]) -> Vec<&'a CheckResult> {
    names
        .iter()
        .map(|n| {
            rep.checks
                .iter()
                .find(|c| c.name == *n)
                .unwrap_or_else(|| panic!("suite {} has no check named {n}", rep.suite))
        })
        .collect()
}

fn gate(label: &str, selected: &[&CheckResult]) {
    let passed = selected.iter().all(|c| c.passed);
    println!("[{}] {label}", if passed { "PASS" } else { "FAIL" });
    for c in selected {
        println!(
            "    {:<6} {}: {}",
            if c.passed { "ok" } else { "FAILED" },
            c.name,
            c.detail
        );
    }
    assert!(passed, "{label}: a measurement above is out of tolerance");
}

fn gate_all(label: &str, rep: &SuiteReport) {
    let selected: Vec<&CheckResult> = rep.checks.iter().collect();
    gate(label, &selected);
}

#[test]
fn conservation_of_motion_constants() {
    gate_all(
        "conservation: mass, energy (with step-halving ratio), momentum, boosted moment, \
         planar angular momentum, and the pseudo-conformal identity",
        suite(&CONSERVATION, "conservation"),
    );
}

#[test]
fn flux_law_residual_orders() {
    let rep = suite(&IDENTITIES, "identities");
    gate(
        "flux laws: second-order residual convergence in observation spacing and \
         planar pseudo-conformal conservation",
        &select(
            rep,
            &[
                "center_flux_residual",
                "inertia_flux_order",
                "virial_flux_order",
                "conformal_flux_order",
                "conformal_drift_2d",
            ],
        ),
    );
}

#[test]
fn capillary_fluid_laws() {
    gate_all(
        "capillary fluid: energy conservation, virial flux order, and the scaled-capillarity \
         match with the dispersive flow",
        suite(&KORTEWEG, "korteweg"),
    );
}

#[test]
fn cross_formulation_equivalence() {
    let rep = suite(&IDENTITIES, "identities");
    gate(
        "cross-formulation: wave solver with polar factorization versus the extended \
         dispersive solver, with refinement order",
        &select(rep, &["formulation_gap", "formulation_gap_order"]),
    );
}

#[test]
fn dispersion_relations() {
    gate_all(
        "dispersion: scaled mode frequencies and the unit-background small-wavenumber \
         phase speed",
        suite(&DISPERSION, "dispersion"),
    );
}

#[test]
fn vanishing_dispersion_limit() {
    let rep = suite(&EULER_LIMIT, "euler_limit");
    gate(
        "vanishing dispersion: fitted convergence orders of the wave solver toward the \
         non-dispersive fluid",
        &select(rep, &["limit_order", "density_limit_order"]),
    );
}

#[test]
fn acoustic_error_model() {
    gate_all(
        "acoustic approximation: two-term error model fit and quadratic-term isolation",
        suite(&WAVE_APPROX, "wave_approx"),
    );
}

#[test]
fn long_wave_integrable_limit() {
    gate_all(
        "long-wave limit: soliton comparator validation and second-order convergence of \
         the rescaled frames",
        suite(&KDV, "kdv"),
    );
}

#[test]
fn weak_form_residuals() {
    gate_all(
        "weak formulation: continuity, momentum, curl, and energy residuals on smooth and \
         vortex-carrying runs, the modulus identity, and kink-pair stationarity",
        suite(&WEAKQHD, "weakqhd"),
    );
}

#[test]
fn finite_time_breakdown() {
    let rep = suite(&EULER_LIMIT, "euler_limit");
    gate(
        "breakdown: gradient blowup in finite time with zero-speed support propagation",
        &select(rep, &["gradient_blowup_triggered", "support_mass_leakage"]),
    );
}
