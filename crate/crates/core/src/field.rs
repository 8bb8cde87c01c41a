//! Scalar and vector fields sampled on a [`SpectralGrid`], with the spectral
//! calculus (gradients, Laplacians, translations) and the quadrature-weighted
//! norms used throughout the crate.

use std::sync::Arc;

use crate::grid::SpectralGrid;
use crate::{Cplx, Real};

/// Complex scalar field on a grid.
#[derive(Clone, Debug)]
pub struct ComplexField<T: Real> {
    grid: Arc<SpectralGrid<T>>,
    values: Vec<Cplx<T>>,
}

/// Real scalar field on a grid.
#[derive(Clone, Debug)]
pub struct RealField<T: Real> {
    grid: Arc<SpectralGrid<T>>,
    values: Vec<T>,
}

/// Real vector field with one component per grid axis.
#[derive(Clone, Debug)]
pub struct VectorField<T: Real> {
    pub components: Vec<RealField<T>>,
}

/// Complex vector field with one component per grid axis.
#[derive(Clone, Debug)]
pub struct ComplexVectorField<T: Real> {
    pub components: Vec<ComplexField<T>>,
}

impl<T: Real> ComplexField<T> {
    pub fn new(grid: Arc<SpectralGrid<T>>, values: Vec<Cplx<T>>) -> Self {
        assert_eq!(values.len(), grid.len(), "value buffer does not match grid");
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<SpectralGrid<T>>) -> Self {
        let n = grid.len();
        Self::new(grid, vec![Cplx::new(T::zero(), T::zero()); n])
    }

    pub fn constant(grid: Arc<SpectralGrid<T>>, c: Cplx<T>) -> Self {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    /// Samples `f` at every collocation point.
    pub fn from_fn(grid: Arc<SpectralGrid<T>>, mut f: impl FnMut([T; 2]) -> Cplx<T>) -> Self {
        let values = (0..grid.len()).map(|idx| f(grid.point(idx))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<SpectralGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[Cplx<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Cplx<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Cplx<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise map into a new field.
    pub fn map(&self, f: impl Fn(Cplx<T>) -> Cplx<T>) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Cplx<T>, Cplx<T>) -> Cplx<T>) -> Self {
        assert!(self.grid.compatible(&other.grid));
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `|psi|^2` as a real field.
    pub fn modulus_squared(&self) -> RealField<T> {
        RealField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    pub fn re(&self) -> RealField<T> {
        RealField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.re).collect(),
        }
    }

    pub fn im(&self) -> RealField<T> {
        RealField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.im).collect(),
        }
    }

    /// Forward FFT of the samples.
    pub fn spectral(&self) -> Vec<Cplx<T>> {
        let mut spec = self.values.clone();
        self.grid.fft_forward(&mut spec);
        spec
    }

    /// Builds a field from spectral coefficients.
    pub fn from_spectral(grid: Arc<SpectralGrid<T>>, mut spec: Vec<Cplx<T>>) -> Self {
        grid.fft_inverse(&mut spec);
        Self::new(grid, spec)
    }

    /// Spectral gradient; one complex component per axis.
    pub fn gradient(&self) -> ComplexVectorField<T> {
        let spec = self.spectral();
        let components = (0..self.grid.dim())
            .map(|axis| {
                let mut d = spec.clone();
                self.grid.mul_ik_axis(&mut d, axis);
                self.grid.fft_inverse(&mut d);
                Self::new(self.grid.clone(), d)
            })
            .collect();
        ComplexVectorField { components }
    }

    /// Spectral Laplacian.
    pub fn laplacian(&self) -> Self {
        let mut spec = self.spectral();
        self.grid.mul_minus_ksq(&mut spec);
        self.grid.fft_inverse(&mut spec);
        Self::new(self.grid.clone(), spec)
    }

    /// Removes the top third of the spectrum (2/3 rule) in place.
    pub fn dealias(&mut self) {
        let mut spec = std::mem::take(&mut self.values);
        self.grid.fft_forward(&mut spec);
        self.grid.apply_dealias(&mut spec);
        self.grid.fft_inverse(&mut spec);
        self.values = spec;
    }

    /// Translated field `x -> f(x + shift)` via exact trigonometric
    /// interpolation.
    pub fn translate(&self, shift: [T; 2]) -> Self {
        let mut spec = self.spectral();
        self.grid.map_modes(&mut spec, |k, v| {
            let phase = k[0] * shift[0] + k[1] * shift[1];
            *v = *v * Cplx::new(phase.cos(), phase.sin());
        });
        self.grid.fft_inverse(&mut spec);
        Self::new(self.grid.clone(), spec)
    }

    /// Quadrature-weighted L2 norm.
    pub fn norm_l2(&self) -> T {
        let s: T = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn norm_sup(&self) -> T {
        self.values.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }

    pub fn l2_distance(&self, other: &Self) -> T {
        assert!(self.grid.compatible(&other.grid));
        let s: T = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        assert!(self.grid.compatible(&other.grid));
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// L2 inner product `integral of conj(self) * other`.
    pub fn inner(&self, other: &Self) -> Cplx<T> {
        assert!(self.grid.compatible(&other.grid));
        let s = self
            .values
            .iter()
            .zip(&other.values)
            .fold(Cplx::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b);
        s.scale(self.grid.cell_volume())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl<T: Real> RealField<T> {
    pub fn new(grid: Arc<SpectralGrid<T>>, values: Vec<T>) -> Self {
        assert_eq!(values.len(), grid.len(), "value buffer does not match grid");
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<SpectralGrid<T>>) -> Self {
        let n = grid.len();
        Self::new(grid, vec![T::zero(); n])
    }

    pub fn constant(grid: Arc<SpectralGrid<T>>, c: T) -> Self {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    pub fn from_fn(grid: Arc<SpectralGrid<T>>, mut f: impl FnMut([T; 2]) -> T) -> Self {
        let values = (0..grid.len()).map(|idx| f(grid.point(idx))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<SpectralGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert!(self.grid.compatible(&other.grid));
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn to_complex(&self) -> ComplexField<T> {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| Cplx::new(v, T::zero())).collect(),
        }
    }

    /// Spectral gradient. The imaginary residue of the transform is dropped;
    /// it sits at rounding level for real input.
    pub fn gradient(&self) -> VectorField<T> {
        let cgrad = self.to_complex().gradient();
        VectorField {
            components: cgrad.components.iter().map(|c| c.re()).collect(),
        }
    }

    pub fn laplacian(&self) -> Self {
        self.to_complex().laplacian().re()
    }

    /// Zero-mean spectral antiderivative along `axis`: divides each nonzero
    /// mode by `i k` and drops the zero mode, so the result `F` satisfies
    /// `dF/dx = f - mean(f)` and `integral F = 0`.
    pub fn antiderivative(&self, axis: usize) -> Self {
        let c = self.to_complex();
        let mut spec = c.spectral();
        self.grid.map_modes(&mut spec, |k, v| {
            if k[axis].abs() > T::epsilon() {
                *v = Cplx::new(v.im / k[axis], -v.re / k[axis]);
            } else {
                *v = Cplx::new(T::zero(), T::zero());
            }
        });
        ComplexField::from_spectral(self.grid.clone(), spec).re()
    }

    pub fn dealias(&mut self) {
        let mut c = self.to_complex();
        c.dealias();
        self.values = c.re().values;
    }

    pub fn translate(&self, shift: [T; 2]) -> Self {
        self.to_complex().translate(shift).re()
    }

    /// `integral f dx` by the trapezoid rule (exact rectangle rule on a
    /// periodic grid).
    pub fn integrate(&self) -> T {
        let s: T = self.values.iter().copied().sum();
        s * self.grid.cell_volume()
    }

    pub fn norm_l2(&self) -> T {
        let s: T = self.values.iter().map(|&v| v * v).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn norm_sup(&self) -> T {
        self.values.iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }

    pub fn l2_distance(&self, other: &Self) -> T {
        assert!(self.grid.compatible(&other.grid));
        let s: T = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).sq())
            .sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        assert!(self.grid.compatible(&other.grid));
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: Arc<SpectralGrid<T>>) -> Self {
        let components = (0..grid.dim()).map(|_| RealField::zeros(grid.clone())).collect();
        Self { components }
    }

    pub fn from_fns(grid: Arc<SpectralGrid<T>>, fs: &[&dyn Fn([T; 2]) -> T]) -> Self {
        assert_eq!(fs.len(), grid.dim());
        Self {
            components: fs.iter().map(|f| RealField::from_fn(grid.clone(), f)).collect(),
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid<T>> {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// `div v` computed spectrally.
    pub fn divergence(&self) -> RealField<T> {
        let grid = self.grid().clone();
        let mut acc = vec![Cplx::new(T::zero(), T::zero()); grid.len()];
        for (axis, comp) in self.components.iter().enumerate() {
            let mut spec = comp.to_complex().spectral();
            grid.mul_ik_axis(&mut spec, axis);
            for (a, s) in acc.iter_mut().zip(&spec) {
                *a = *a + *s;
            }
        }
        grid.fft_inverse(&mut acc);
        RealField::new(grid, acc.into_iter().map(|v| v.re).collect())
    }

    /// Pointwise Euclidean magnitude squared.
    pub fn magnitude_squared(&self) -> RealField<T> {
        let grid = self.grid().clone();
        let mut values = vec![T::zero(); grid.len()];
        for comp in &self.components {
            for (s, &v) in values.iter_mut().zip(comp.values()) {
                *s = *s + v * v;
            }
        }
        RealField::new(grid, values)
    }

    pub fn norm_sup(&self) -> T {
        self.magnitude_squared().max().sqrt()
    }

    pub fn l2_distance(&self, other: &Self) -> T {
        assert_eq!(self.dim(), other.dim());
        let mut s = T::zero();
        for (a, b) in self.components.iter().zip(&other.components) {
            s = s + a.l2_distance(b).sq();
        }
        s.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(RealField::is_finite)
    }
}

impl<T: Real> ComplexVectorField<T> {
    pub fn zeros(grid: Arc<SpectralGrid<T>>) -> Self {
        let components = (0..grid.dim()).map(|_| ComplexField::zeros(grid.clone())).collect();
        Self { components }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid<T>> {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn re(&self) -> VectorField<T> {
        VectorField {
            components: self.components.iter().map(ComplexField::re).collect(),
        }
    }

    pub fn im(&self) -> VectorField<T> {
        VectorField {
            components: self.components.iter().map(ComplexField::im).collect(),
        }
    }

    /// `div z` computed spectrally (complex).
    pub fn divergence(&self) -> ComplexField<T> {
        let grid = self.grid().clone();
        let mut acc = vec![Cplx::new(T::zero(), T::zero()); grid.len()];
        for (axis, comp) in self.components.iter().enumerate() {
            let mut spec = comp.spectral();
            grid.mul_ik_axis(&mut spec, axis);
            for (a, s) in acc.iter_mut().zip(&spec) {
                *a = *a + *s;
            }
        }
        grid.fft_inverse(&mut acc);
        ComplexField::new(grid, acc)
    }

    pub fn l2_distance(&self, other: &Self) -> T {
        assert_eq!(self.dim(), other.dim());
        let mut s = T::zero();
        for (a, b) in self.components.iter().zip(&other.components) {
            s = s + a.l2_distance(b).sq();
        }
        s.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ComplexField::is_finite)
    }
}

/// Largest `max_axis |x_axis|` over points where `|f|` exceeds
/// `rel_threshold * sup|f|`; `None` when the field is identically zero.
/// Used to monitor that localized deviations stay inside the fundamental
/// domain before trusting moment-weighted functionals.
pub fn support_extent<T: Real>(f: &RealField<T>, rel_threshold: T) -> Option<T> {
    let sup = f.norm_sup();
    if sup == T::zero() {
        return None;
    }
    let cut = rel_threshold * sup;
    let grid = f.grid();
    let mut extent = T::zero();
    for (idx, &v) in f.values().iter().enumerate() {
        if v.abs() > cut {
            let p = grid.point(idx);
            let r = p[0].abs().max(p[1].abs());
            extent = extent.max(r);
        }
    }
    Some(extent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1(n: usize, l: f64) -> Arc<SpectralGrid<f64>> {
        SpectralGrid::new(1, n, l).unwrap()
    }

    #[test]
    fn l2_norm_of_unit_field() {
        let g = grid1(64, 2.0 * PI);
        let f = ComplexField::constant(g, Cplx::new(1.0, 0.0));
        assert!((f.norm_l2() - (2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn antiderivative_inverts_gradient_up_to_the_mean() {
        let g = grid1(128, 20.0);
        let k = 2.0 * PI / 20.0 * 3.0;
        let f = RealField::from_fn(g.clone(), |p| (k * p[0]).cos() + 0.7);
        let prim = f.antiderivative(0);
        // d(prim)/dx recovers f minus its mean
        let back = prim.gradient();
        let expect = RealField::from_fn(g, |p| (k * p[0]).cos());
        assert!(back.components[0].sup_distance(&expect) < 1e-12);
        assert!(prim.integrate().abs() < 1e-12);
    }

    #[test]
    fn gaussian_mass_matches_analytic_value() {
        // integral of exp(-2 x^2) over the line is sqrt(pi/2); the domain
        // truncation at |x| = 20 is far below the tolerance.
        let g = grid1(512, 40.0);
        let psi = ComplexField::from_fn(g, |p| Cplx::new((-p[0] * p[0]).exp(), 0.0));
        let mass = psi.modulus_squared().integrate();
        assert!((mass - (PI / 2.0).sqrt()).abs() < 1e-12, "mass = {mass:.15}");
    }

    #[test]
    fn real_gradient_matches_analytic_derivative() {
        let g = grid1(256, 2.0 * PI);
        let f = RealField::from_fn(g, |p| (3.0 * p[0]).sin());
        let grad = f.gradient();
        let expect = RealField::from_fn(f.grid().clone(), |p| 3.0 * (3.0 * p[0]).cos());
        assert!(grad.components[0].sup_distance(&expect) < 1e-11);
    }

    #[test]
    fn real_gradient_imaginary_residue_is_rounding_level() {
        let g = grid1(256, 10.0);
        let f = RealField::from_fn(g, |p| (-p[0] * p[0]).exp() * (2.0 * p[0]).cos());
        let cgrad = f.to_complex().gradient();
        let residue = cgrad.components[0].im().norm_sup();
        let scale = cgrad.components[0].re().norm_sup();
        assert!(residue < 1e-12 * scale.max(1.0), "residue {residue:.3e}");
    }

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let g = SpectralGrid::<f64>::new(2, 32, 2.0 * PI).unwrap();
        let f = RealField::from_fn(g, |p| (p[0]).sin() * (2.0 * p[1]).cos());
        let lhs = f.gradient().divergence();
        let rhs = f.laplacian();
        assert!(lhs.sup_distance(&rhs) < 1e-11);
    }

    #[test]
    fn translate_shifts_samples_exactly() {
        let n = 64;
        let g = grid1(n, 2.0 * PI);
        let f = ComplexField::from_fn(g.clone(), |p| Cplx::new((2.0 * p[0]).sin(), (p[0]).cos()));
        // shift by an integer number of cells: exact sample permutation
        let s = 5.0 * g.dx();
        let shifted = f.translate([s, 0.0]);
        for i in 0..n {
            let j = (i + 5) % n;
            assert!((shifted.values()[i] - f.values()[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn translate_band_limited_off_grid() {
        let g = grid1(64, 2.0 * PI);
        let f = ComplexField::from_fn(g, |p| Cplx::new((3.0 * p[0]).cos(), 0.0));
        let s = 0.123456;
        let shifted = f.translate([s, 0.0]);
        let expect = ComplexField::from_fn(shifted.grid().clone(), |p| {
            Cplx::new((3.0 * (p[0] + s)).cos(), 0.0)
        });
        assert!(shifted.sup_distance(&expect) < 1e-12);
    }

    #[test]
    fn support_extent_of_centered_bump() {
        let g = grid1(256, 40.0);
        let f = RealField::from_fn(g, |p| if p[0].abs() < 3.0 { 1.0 } else { 0.0 });
        let ext = support_extent(&f, 1e-8).unwrap();
        assert!(ext < 3.0 + 0.2, "extent {ext}");
        assert!(ext > 2.8);
    }

    #[test]
    fn inner_product_conjugate_linear() {
        let g = grid1(64, 2.0 * PI);
        let a = ComplexField::from_fn(g.clone(), |p| Cplx::new(p[0].sin(), p[0].cos()));
        let b = ComplexField::from_fn(g, |p| Cplx::new((2.0 * p[0]).cos(), 0.3));
        let ab = a.inner(&b);
        let ba = b.inner(&a);
        assert!((ab - ba.conj()).norm() < 1e-12);
    }
}
