//! Initial-data families used by experiments and verification suites.
//!
//! Everything here is exactly periodic on the torus or decays to the
//! background fast enough that the periodization error sits at rounding
//! level for the default domain sizes.

use crate::field::{ComplexField, RealField};
use crate::grid::SpectralGrid;
use crate::{Cplx, Real};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// `bg + amp * exp(-|x - center|^2 / width^2)`.
pub fn gaussian_density<T: Real>(
    grid: Arc<SpectralGrid<T>>,
    background: T,
    amplitude: T,
    width: T,
    center: T,
) -> RealField<T> {
    RealField::from_fn(grid, move |p| {
        let dx = p[0] - center;
        let dy = p[1];
        background + amplitude * (-(dx * dx + dy * dy) / (width * width)).exp()
    })
}

/// Localized wave packet `amp * exp(-(x-center)^2/width^2) * exp(i k_m x)`
/// with the carrier on the grid's wavenumber lattice.
pub fn gaussian_packet<T: Real>(
    grid: Arc<SpectralGrid<T>>,
    amplitude: T,
    width: T,
    center: T,
    mode: i32,
) -> ComplexField<T> {
    let k = T::of(2.0) * T::PI() / grid.length() * T::of(mode as f64);
    ComplexField::from_fn(grid, move |p| {
        let dx = p[0] - center;
        let dy = p[1];
        let amp = amplitude * (-(dx * dx + dy * dy) / (width * width)).exp();
        let phase = k * p[0];
        Cplx::new(amp * phase.cos(), amp * phase.sin())
    })
}

/// Mirrored pair of dark-soliton kinks,
/// `tanh(x + L/4) * tanh(x - L/4)`, which is stationary for the
/// unit-background law up to an O(exp(-L/2)) periodization residual.
pub fn dark_pair<T: Real>(grid: Arc<SpectralGrid<T>>) -> ComplexField<T> {
    let quarter = grid.length() / T::of(4.0);
    ComplexField::from_fn(grid, move |p| {
        Cplx::new((p[0] + quarter).tanh() * (p[0] - quarter).tanh(), T::zero())
    })
}

/// 2D unit-background field with four alternating-charge vortices,
/// `cos(2 pi x / L) + i cos(2 pi y / L)`. Exactly periodic; a single vortex
/// cannot be periodized since the total winding on the torus must vanish.
pub fn vortex_lattice<T: Real>(grid: Arc<SpectralGrid<T>>) -> ComplexField<T> {
    let k = T::of(2.0) * T::PI() / grid.length();
    ComplexField::from_fn(grid, move |p| Cplx::new((k * p[0]).cos(), (k * p[1]).cos()))
}

/// Smooth compactly supported bump:
/// `bg + amp * e * exp(-1/(1 - (r/radius)^2))` for `r < radius`, `bg`
/// outside. Infinitely differentiable with support exactly the closed ball.
pub fn compact_bump<T: Real>(
    grid: Arc<SpectralGrid<T>>,
    background: T,
    amplitude: T,
    radius: T,
) -> RealField<T> {
    RealField::from_fn(grid, move |p| {
        let r2 = (p[0] * p[0] + p[1] * p[1]) / (radius * radius);
        if r2 < T::one() {
            background + amplitude * T::of(1.0f64.exp()) * (-T::one() / (T::one() - r2)).exp()
        } else {
            background
        }
    })
}

/// `bg + amp * sin(k_m x)`.
pub fn sine_density<T: Real>(
    grid: Arc<SpectralGrid<T>>,
    background: T,
    amplitude: T,
    mode: i32,
) -> RealField<T> {
    let k = T::of(2.0) * T::PI() / grid.length() * T::of(mode as f64);
    RealField::from_fn(grid, move |p| background + amplitude * (k * p[0]).sin())
}

/// Solitary-wave profile `3 c sech^2(sqrt(c) x / 2)` of the
/// `d_tau u + d^3 u + u du = 0` equation.
pub fn kdv_soliton<T: Real>(grid: Arc<SpectralGrid<T>>, speed: T) -> RealField<T> {
    RealField::from_fn(grid, move |p| {
        let arg = speed.sqrt() * p[0] / T::of(2.0);
        let sech = T::one() / arg.cosh();
        T::of(3.0) * speed * sech * sech
    })
}

/// Deterministic band-limited real field: a seeded sum of `n_modes` cosine
/// modes with wavenumbers up to `max_mode`, normalized to sup norm about
/// `amplitude`.
pub fn random_band<T: Real>(
    grid: Arc<SpectralGrid<T>>,
    background: T,
    amplitude: T,
    max_mode: i32,
    seed: u64,
) -> RealField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mode_dist = Uniform::new_inclusive(1, max_mode.max(1));
    let sign_dist = Uniform::new_inclusive(0, 1);
    let phase_dist = Uniform::new(0.0, std::f64::consts::TAU);
    let amp_dist = Uniform::new(0.5, 1.0);

    let n_modes = 4;
    let mut modes = Vec::with_capacity(n_modes);
    let mut total = 0.0;
    for _ in 0..n_modes {
        let mx = mode_dist.sample(&mut rng);
        let my = if grid.dim() == 2 {
            let m = mode_dist.sample(&mut rng);
            if sign_dist.sample(&mut rng) == 0 {
                -m
            } else {
                m
            }
        } else {
            0
        };
        let a = amp_dist.sample(&mut rng);
        total += a;
        modes.push((mx, my, a, phase_dist.sample(&mut rng)));
    }
    let k0 = T::of(2.0) * T::PI() / grid.length();
    let norm = amplitude / T::of(total);
    RealField::from_fn(grid, move |p| {
        let mut v = background;
        for &(mx, my, a, ph) in &modes {
            let arg = k0 * (T::of(mx as f64) * p[0] + T::of(my as f64) * p[1]) + T::of(ph);
            v = v + norm * T::of(a) * arg.cos();
        }
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize, l: f64) -> Arc<SpectralGrid<f64>> {
        SpectralGrid::<f64>::new(1, n, l).unwrap()
    }

    #[test]
    fn compact_bump_is_exactly_supported() {
        let g = grid1(256, 30.0);
        let f = compact_bump(g.clone(), 1.0, 0.5, 5.0);
        for i in 0..g.len() {
            let x = g.coord(i);
            if x.abs() >= 5.0 {
                assert_eq!(f.values()[i], 1.0, "x = {x}");
            }
        }
        // peak value at the center
        let max = f.max();
        assert!((max - 1.5).abs() < 1e-12);
    }

    #[test]
    fn gaussian_packet_mass_and_carrier() {
        let g = grid1(256, 30.0);
        let psi = gaussian_packet(g, 1.0, 1.0, 0.0, 3);
        let rho = psi.modulus_squared();
        // carrier does not affect the density
        let expect = (std::f64::consts::PI / 2.0).sqrt();
        assert!((rho.integrate() - expect).abs() < 1e-12);
    }

    #[test]
    fn vortex_lattice_has_four_zeros() {
        let g = SpectralGrid::<f64>::new(2, 64, 10.0).unwrap();
        let psi = vortex_lattice(g);
        let rho = psi.modulus_squared();
        let n_low = rho.values().iter().filter(|&&r| r < 1e-3).count();
        assert!(n_low >= 4, "found {n_low} near-zero points");
        // unit background in the corners of each cell
        assert!((rho.max() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kdv_soliton_peak_is_three_c() {
        let g = grid1(512, 40.0);
        let u = kdv_soliton(g, 1.3);
        assert!((u.max() - 3.9).abs() < 1e-6);
    }

    #[test]
    fn random_band_is_deterministic_in_the_seed() {
        let g = grid1(128, 20.0);
        let a = random_band(g.clone(), 1.0, 0.1, 4, 42);
        let b = random_band(g.clone(), 1.0, 0.1, 4, 42);
        let c = random_band(g, 1.0, 0.1, 4, 43);
        assert_eq!(a.values(), b.values());
        assert!(a.sup_distance(&c) > 1e-6);
    }
}
