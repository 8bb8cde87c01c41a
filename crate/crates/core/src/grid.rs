//! Periodic Fourier collocation grids in one and two dimensions.
//!
//! A grid owns the FFT plans, the per-axis wavenumber table and the 2/3-rule
//! dealiasing mask. All spatial operators elsewhere in the crate (gradients,
//! Laplacians, integrating factors, spectral shifts) go through the raw slice
//! helpers defined here.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::{Cplx, Real};

/// Square periodic collocation grid with `n` points per axis on
/// `[-length/2, length/2)^dim`.
pub struct SpectralGrid<T: Real> {
    dim: usize,
    n: usize,
    length: T,
    coords: Vec<T>,
    wavenumbers: Vec<T>,
    keep: Vec<bool>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for SpectralGrid<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl<T: Real> SpectralGrid<T> {
    /// Builds a grid. `n` must be a power of two (at least 8) and the domain
    /// period `length` must be positive.
    pub fn new(dim: usize, n: usize, length: T) -> Result<Arc<Self>> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidGrid("domain length must be positive and finite".into()));
        }

        let dx = length / T::of(n as f64);
        let two_pi_over_l = T::of(2.0) * T::PI() / length;
        let half = (n / 2) as isize;
        let mut coords = Vec::with_capacity(n);
        let mut wavenumbers = Vec::with_capacity(n);
        let mut keep = Vec::with_capacity(n);
        for i in 0..n {
            coords.push(T::of(i as f64) * dx - length / T::of(2.0));
            let m = if (i as isize) < half { i as isize } else { i as isize - n as isize };
            wavenumbers.push(T::of(m as f64) * two_pi_over_l);
            keep.push(3 * m.unsigned_abs() <= n);
        }

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);

        Ok(Arc::new(Self { dim, n, length, coords, wavenumbers, keep, fwd, inv }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Domain period per axis.
    pub fn length(&self) -> T {
        self.length
    }

    /// Grid spacing per axis.
    pub fn dx(&self) -> T {
        self.length / T::of(self.n as f64)
    }

    /// Total number of collocation points.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one grid cell, `dx^dim`.
    pub fn cell_volume(&self) -> T {
        let mut v = T::one();
        for _ in 0..self.dim {
            v = v * self.dx();
        }
        v
    }

    /// Centered coordinate of index `i` along one axis, in `[-L/2, L/2)`.
    pub fn coord(&self, i: usize) -> T {
        self.coords[i]
    }

    /// Per-axis wavenumber table in FFT layout,
    /// `k_m = 2 pi m / L` with `m = 0, 1, ..., n/2-1, -n/2, ..., -1`.
    pub fn wavenumbers(&self) -> &[T] {
        &self.wavenumbers
    }

    /// Splits a flat index into per-axis indices (the second entry is zero in 1D).
    #[inline]
    pub fn axis_indices(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    /// Coordinates of the collocation point with flat index `idx`.
    /// In 1D the second component is zero.
    #[inline]
    pub fn point(&self, idx: usize) -> [T; 2] {
        let ij = self.axis_indices(idx);
        if self.dim == 1 {
            [self.coords[ij[0]], T::zero()]
        } else {
            [self.coords[ij[0]], self.coords[ij[1]]]
        }
    }

    /// Wavenumber vector of the mode with flat index `idx`.
    #[inline]
    pub fn mode(&self, idx: usize) -> [T; 2] {
        let ij = self.axis_indices(idx);
        if self.dim == 1 {
            [self.wavenumbers[ij[0]], T::zero()]
        } else {
            [self.wavenumbers[ij[0]], self.wavenumbers[ij[1]]]
        }
    }

    /// Checks that `other` describes the same discretization.
    pub fn compatible(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.length == other.length
    }

    fn fft_all_axes(&self, data: &mut [Cplx<T>], plan: &dyn Fft<T>) {
        assert_eq!(data.len(), self.len(), "buffer length does not match grid");
        let n = self.n;
        let mut scratch = vec![Cplx::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
        match self.dim {
            1 => plan.process_with_scratch(data, &mut scratch),
            2 => {
                for row in data.chunks_exact_mut(n) {
                    plan.process_with_scratch(row, &mut scratch);
                }
                transpose_square(data, n);
                for row in data.chunks_exact_mut(n) {
                    plan.process_with_scratch(row, &mut scratch);
                }
                transpose_square(data, n);
            }
            _ => unreachable!(),
        }
    }

    /// In-place forward FFT over every axis (unnormalized).
    pub fn fft_forward(&self, data: &mut [Cplx<T>]) {
        self.fft_all_axes(data, self.fwd.as_ref());
    }

    /// In-place inverse FFT over every axis, normalized so that
    /// `fft_inverse(fft_forward(f)) == f`.
    pub fn fft_inverse(&self, data: &mut [Cplx<T>]) {
        self.fft_all_axes(data, self.inv.as_ref());
        let scale = T::one() / T::of(self.len() as f64);
        for v in data.iter_mut() {
            *v = v.scale(scale);
        }
    }

    /// Multiplies spectral data by `i k_axis` (differentiation along an axis).
    pub fn mul_ik_axis(&self, spec: &mut [Cplx<T>], axis: usize) {
        assert!(axis < self.dim);
        for (idx, v) in spec.iter_mut().enumerate() {
            let k = self.mode(idx)[axis];
            *v = Cplx::new(-v.im * k, v.re * k);
        }
    }

    /// Multiplies spectral data by `-|k|^2` (Laplacian).
    pub fn mul_minus_ksq(&self, spec: &mut [Cplx<T>]) {
        for (idx, v) in spec.iter_mut().enumerate() {
            let k = self.mode(idx);
            let k2 = k[0] * k[0] + k[1] * k[1];
            *v = v.scale(-k2);
        }
    }

    /// True if the mode at flat index `idx` survives the 2/3-rule mask.
    #[inline]
    pub fn mode_kept(&self, idx: usize) -> bool {
        let ij = self.axis_indices(idx);
        if self.dim == 1 {
            self.keep[ij[0]]
        } else {
            self.keep[ij[0]] && self.keep[ij[1]]
        }
    }

    /// Applies the 2/3-rule mask in place: modes with `3 |m| > n` along any
    /// axis are zeroed.
    pub fn apply_dealias(&self, spec: &mut [Cplx<T>]) {
        for (idx, v) in spec.iter_mut().enumerate() {
            if !self.mode_kept(idx) {
                *v = Cplx::new(T::zero(), T::zero());
            }
        }
    }

    /// Applies an arbitrary per-mode map; `f` receives the wavenumber vector.
    pub fn map_modes(&self, spec: &mut [Cplx<T>], mut f: impl FnMut([T; 2], &mut Cplx<T>)) {
        for (idx, v) in spec.iter_mut().enumerate() {
            f(self.mode(idx), v);
        }
    }
}

/// In-place transpose of a square row-major matrix stored in a flat slice.
fn transpose_square<T: Copy>(data: &mut [T], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_table_small_grid() {
        let g = SpectralGrid::<f64>::new(1, 8, 2.0 * std::f64::consts::PI).unwrap();
        let expect = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (k, e) in g.wavenumbers().iter().zip(expect) {
            assert!((k - e).abs() < 1e-15, "k = {k}, expected {e}");
        }
    }

    #[test]
    fn wavenumbers_scale_with_period() {
        let g = SpectralGrid::<f64>::new(1, 8, std::f64::consts::PI).unwrap();
        assert!((g.wavenumbers()[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_tables_match_one_dimensional() {
        let g1 = SpectralGrid::<f64>::new(1, 8, 2.0 * std::f64::consts::PI).unwrap();
        let g2 = SpectralGrid::<f64>::new(2, 8, 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(g1.wavenumbers(), g2.wavenumbers());
        assert_eq!(g2.len(), 64);
        let k = g2.mode(3 * 8 + 5);
        assert!((k[0] - 3.0).abs() < 1e-15);
        assert!((k[1] + 3.0).abs() < 1e-15);
    }

    #[test]
    fn mode_set_closed_under_negation_except_nyquist() {
        let g = SpectralGrid::<f64>::new(1, 32, 1.0).unwrap();
        let ks = g.wavenumbers();
        for &k in ks {
            let has_neg = ks.iter().any(|&q| (q + k).abs() < 1e-12);
            let nyquist = (k - ks[16]).abs() < 1e-12;
            assert!(has_neg || nyquist, "mode {k} lacks a negative partner");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SpectralGrid::<f64>::new(3, 8, 1.0).is_err());
        assert!(SpectralGrid::<f64>::new(1, 12, 1.0).is_err());
        assert!(SpectralGrid::<f64>::new(1, 4, 1.0).is_err());
        assert!(SpectralGrid::<f64>::new(1, 8, -1.0).is_err());
        assert!(SpectralGrid::<f64>::new(1, 8, 0.0).is_err());
    }

    #[test]
    fn coords_are_centered() {
        let g = SpectralGrid::<f64>::new(1, 8, 8.0).unwrap();
        assert!((g.coord(0) + 4.0).abs() < 1e-15);
        assert!((g.coord(4) - 0.0).abs() < 1e-15);
        assert!((g.coord(7) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn roundtrip_is_identity() {
        let g = SpectralGrid::<f64>::new(1, 64, 5.0).unwrap();
        let mut data: Vec<Cplx<f64>> = (0..64)
            .map(|i| {
                let x = g.coord(i);
                Cplx::new((1.3 * x).sin() + 0.2, (0.7 * x).cos())
            })
            .collect();
        let orig = data.clone();
        g.fft_forward(&mut data);
        g.fft_inverse(&mut data);
        let err: f64 = data
            .iter()
            .zip(&orig)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "roundtrip error {err:.3e}");
    }

    #[test]
    fn roundtrip_two_dimensional() {
        let g = SpectralGrid::<f64>::new(2, 16, 3.0).unwrap();
        let mut data: Vec<Cplx<f64>> = (0..g.len())
            .map(|idx| {
                let p = g.point(idx);
                Cplx::new((2.0 * p[0] + p[1]).sin(), (p[0] - p[1]).cos())
            })
            .collect();
        let orig = data.clone();
        g.fft_forward(&mut data);
        g.fft_inverse(&mut data);
        let err: f64 = data
            .iter()
            .zip(&orig)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn parseval_holds() {
        let g = SpectralGrid::<f64>::new(1, 128, 2.0 * std::f64::consts::PI).unwrap();
        let data: Vec<Cplx<f64>> = (0..128)
            .map(|i| {
                let x = g.coord(i);
                Cplx::new((3.0 * x).cos() * (-x * x / 4.0).exp(), (x).sin())
            })
            .collect();
        let phys: f64 = data.iter().map(|v| v.norm_sqr()).sum();
        let mut spec = data;
        g.fft_forward(&mut spec);
        let spectral: f64 = spec.iter().map(|v| v.norm_sqr()).sum::<f64>() / 128.0;
        assert!((phys - spectral).abs() / phys < 1e-12);
    }

    #[test]
    fn derivative_exact_on_single_mode() {
        let n = 16;
        let l = 2.0 * std::f64::consts::PI;
        let g = SpectralGrid::<f64>::new(1, n, l).unwrap();
        // f = e^{i 3 x}, f' = 3 i e^{i 3 x}
        let mut data: Vec<Cplx<f64>> = (0..n)
            .map(|i| Cplx::new(0.0, 3.0 * g.coord(i)).exp())
            .collect();
        let expect: Vec<Cplx<f64>> = data.iter().map(|v| v * Cplx::new(0.0, 3.0)).collect();
        g.fft_forward(&mut data);
        g.mul_ik_axis(&mut data, 0);
        g.fft_inverse(&mut data);
        for (a, b) in data.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn laplacian_exact_on_single_mode_2d() {
        let n = 16;
        let l = 2.0 * std::f64::consts::PI;
        let g = SpectralGrid::<f64>::new(2, n, l).unwrap();
        // f = e^{i(2x - 5y)}, lap f = -29 f
        let mut data: Vec<Cplx<f64>> = (0..g.len())
            .map(|idx| {
                let p = g.point(idx);
                Cplx::new(0.0, 2.0 * p[0] - 5.0 * p[1]).exp()
            })
            .collect();
        let expect: Vec<Cplx<f64>> = data.iter().map(|v| v.scale(-29.0)).collect();
        g.fft_forward(&mut data);
        g.mul_minus_ksq(&mut data);
        g.fft_inverse(&mut data);
        for (a, b) in data.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn dealias_zeroes_top_third() {
        let n = 16;
        let l = 2.0 * std::f64::consts::PI;
        let g = SpectralGrid::<f64>::new(1, n, l).unwrap();
        // e^{i 7 x} is above the cutoff, e^{i x} is below.
        let mut hi: Vec<Cplx<f64>> = (0..n).map(|i| Cplx::new(0.0, 7.0 * g.coord(i)).exp()).collect();
        g.fft_forward(&mut hi);
        g.apply_dealias(&mut hi);
        g.fft_inverse(&mut hi);
        assert!(hi.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-13);

        let mut lo: Vec<Cplx<f64>> = (0..n).map(|i| Cplx::new(0.0, g.coord(i)).exp()).collect();
        let keep = lo.clone();
        g.fft_forward(&mut lo);
        g.apply_dealias(&mut lo);
        g.fft_inverse(&mut lo);
        for (a, b) in lo.iter().zip(&keep) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn dealias_idempotent() {
        let g = SpectralGrid::<f64>::new(1, 32, 1.0).unwrap();
        let mut spec: Vec<Cplx<f64>> = (0..32).map(|i| Cplx::new(i as f64, -(i as f64))).collect();
        g.apply_dealias(&mut spec);
        let once = spec.clone();
        g.apply_dealias(&mut spec);
        assert_eq!(once, spec);
    }

    #[test]
    fn works_in_single_precision() {
        let g = SpectralGrid::<f32>::new(1, 32, 2.0 * std::f32::consts::PI).unwrap();
        let mut data: Vec<Cplx<f32>> = (0..32)
            .map(|i| Cplx::new((2.0 * g.coord(i)).sin(), 0.0))
            .collect();
        let orig = data.clone();
        g.fft_forward(&mut data);
        g.fft_inverse(&mut data);
        let err: f32 = data.iter().zip(&orig).map(|(a, b)| (a - b).norm()).fold(0.0, f32::max);
        assert!(err < 1e-5);
    }
}
