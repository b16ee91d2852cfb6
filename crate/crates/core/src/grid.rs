//! Truncated radial grid on `[0, R]` with cell-centred nodes.
//!
//! Node `i` (zero based) sits at `r_i = (i + ½)h`, `h = R/M`, in the middle
//! of the cell `[ih, (i+1)h]`. Integrals use the exact moments of the radial
//! measure over each cell and the Laplacian is written in flux form, so
//! `⟨−Δu, u⟩` equals the discrete kinetic energy exactly.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::{MAX_DIM, MIN_DIM};
use crate::tridiag::Tridiag;

/// Minimum number of cells.
pub const MIN_NODES: usize = 16;

/// Surface area `ω_{N−1} = 2π^{N/2}/Γ(N/2)` of the unit sphere in `ℝ^N`.
pub fn unit_sphere_area(dim: u32) -> f64 {
    // S(N) = 2π S(N−2)/(N−2), S(1) = 2, S(2) = 2π
    let mut s = if dim.is_multiple_of(2) { 2.0 * PI } else { 2.0 };
    let mut n = if dim.is_multiple_of(2) { 2 } else { 1 };
    while n < dim {
        s *= 2.0 * PI / n as f64;
        n += 2;
    }
    s
}

#[derive(Clone)]
pub struct RadialGrid {
    dim: u32,
    radius: f64,
    spacing: f64,
    sphere: f64,
    nodes: Vec<f64>,
    /// Face areas at `r = jh`, `j = 0..=M`.
    faces: Vec<f64>,
    /// Cell volumes, i.e. weights for `a = 0`.
    volumes: Vec<f64>,
    lap: Tridiag<f64>,
}

impl fmt::Debug for RadialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialGrid")
            .field("dim", &self.dim)
            .field("radius", &self.radius)
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.nodes.len() == other.nodes.len()
            && self.radius.to_bits() == other.radius.to_bits()
    }
}

/// Builds a shared grid; see [`RadialGrid::new`].
pub fn make_grid(dim: u32, radius: f64, nodes: usize) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(dim, radius, nodes).map(Arc::new)
}

impl RadialGrid {
    pub fn new(dim: u32, radius: f64, m: usize) -> Result<Self> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(Error::ParameterDomain(format!("grid dimension {dim} outside 2..=12")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::ParameterDomain(format!("grid radius {radius} must be positive")));
        }
        if m < MIN_NODES {
            return Err(Error::ParameterDomain(format!("grid needs at least {MIN_NODES} nodes, got {m}")));
        }
        let h = radius / m as f64;
        let sphere = unit_sphere_area(dim);
        let nodes: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * h).collect();
        let faces: Vec<f64> = (0..=m).map(|j| sphere * (j as f64 * h).powi(dim as i32 - 1)).collect();
        let volumes = cell_moments(dim, h, m, sphere, 0.0);

        let mut lower = alloc::vec![0.0; m];
        let mut diag = alloc::vec![0.0; m];
        let mut upper = alloc::vec![0.0; m];
        for i in 0..m {
            let inner = faces[i] / h;
            let outer = if i + 1 < m { faces[i + 1] / h } else { faces[m] / (0.5 * h) };
            diag[i] = -(inner + outer) / volumes[i];
            if i > 0 {
                lower[i] = inner / volumes[i];
            }
            if i + 1 < m {
                upper[i] = outer / volumes[i];
            }
        }

        Ok(RadialGrid { dim, radius, spacing: h, sphere, nodes, faces, volumes, lap: Tridiag { lower, diag, upper } })
    }

    /// Same node count on `[0, R/factor]`.
    ///
    /// A field `u` on `self` and the field with the same samples on the
    /// scaled grid represent `u` and `u(factor·x)`; quadrature and the
    /// Laplacian transform exactly.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::ParameterDomain(format!("scale factor {factor} must be positive")));
        }
        RadialGrid::new(self.dim, self.radius / factor, self.len())
    }

    #[inline]
    pub fn dim(&self) -> u32 {
        self.dim
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn sphere_area(&self) -> f64 {
        self.sphere
    }

    /// Cell volumes `ω_{N−1}∫_cell r^{N−1} dr`.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// Weights `ω_{N−1}∫_cell r^{N−1+a} dr`; nonnegative for `a ≥ 0`.
    pub fn weights(&self, a: f64) -> Vec<f64> {
        if a == 0.0 {
            return self.volumes.clone();
        }
        cell_moments(self.dim, self.spacing, self.len(), self.sphere, a)
    }

    /// Cell averages of `r^a`, i.e. `weights(a)/weights(0)`.
    pub fn cell_power(&self, a: f64) -> Vec<f64> {
        self.weights(a).iter().zip(&self.volumes).map(|(wa, w)| wa / w).collect()
    }

    pub(crate) fn laplacian_matrix(&self) -> &Tridiag<f64> {
        &self.lap
    }

    /// `ω_{N−1}∫₀^R g(r) r^{N−1+a} dr`.
    pub fn integrate_weighted(&self, g: &[f64], a: f64) -> Result<f64> {
        if g.len() != self.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if !(a >= 0.0) {
            return Err(Error::ParameterDomain(format!("weight shift a = {a} must be >= 0")));
        }
        if a == 0.0 {
            return Ok(dot(g, &self.volumes));
        }
        Ok(dot(g, &self.weights(a)))
    }

    /// Discrete radial Laplacian with `u'(0) = 0` and `u(R) = 0`.
    pub fn laplacian<T>(&self, u: &[T]) -> Vec<T>
    where
        T: Copy + core::ops::Mul<f64, Output = T> + core::ops::Add<Output = T>,
    {
        let m = self.len();
        let lap = &self.lap;
        (0..m)
            .map(|i| {
                let mut y = u[i] * lap.diag[i];
                if i > 0 {
                    y = y + u[i - 1] * lap.lower[i];
                }
                if i + 1 < m {
                    y = y + u[i + 1] * lap.upper[i];
                }
                y
            })
            .collect()
    }

    /// Discrete `‖∇u‖²`, equal to `⟨−Δu, u⟩` in the grid inner product.
    pub fn kinetic(&self, u: &[Complex64]) -> f64 {
        let m = self.len();
        let h = self.spacing;
        let mut k = 0.0;
        for i in 0..m - 1 {
            k += self.faces[i + 1] * (u[i + 1] - u[i]).norm_sqr();
        }
        k / h + self.faces[m] * u[m - 1].norm_sqr() / (0.5 * h)
    }

    /// `∫∇u·conj(∇v) + u·conj(v)`.
    pub fn h1_inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let m = self.len();
        let h = self.spacing;
        let mut grad = Complex64::new(0.0, 0.0);
        for i in 0..m - 1 {
            grad += (u[i + 1] - u[i]) * (v[i + 1] - v[i]).conj() * self.faces[i + 1];
        }
        grad = grad / h + u[m - 1] * v[m - 1].conj() * (self.faces[m] / (0.5 * h));
        grad + self.l2_inner(u, v)
    }

    /// `∫u·conj(v)`.
    pub fn l2_inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        u.iter().zip(v).zip(&self.volumes).fold(Complex64::new(0.0, 0.0), |acc, ((a, b), w)| acc + a * b.conj() * *w)
    }
}

fn cell_moments(dim: u32, h: f64, m: usize, sphere: f64, a: f64) -> Vec<f64> {
    let e = dim as f64 + a;
    (0..m)
        .map(|i| {
            let hi = (i + 1) as f64 * h;
            let top = hi.powf(e);
            if i == 0 {
                return sphere * top / e;
            }
            // r₊^e − r₋^e without cancellation
            let frac = -(e * (-1.0 / (i + 1) as f64).ln_1p()).exp_m1();
            sphere * top * frac / e
        })
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Complex samples of a radial function on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(RadialField { grid, values })
    }

    /// Skips the finiteness check; used for blow-up states.
    pub fn new_unchecked(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len(), "sample count does not match grid");
        RadialField { grid, values }
    }

    pub fn from_real(grid: Arc<RadialGrid>, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let m = grid.len();
        RadialField { grid, values: alloc::vec![Complex64::new(0.0, 0.0); m] }
    }

    #[inline]
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn abs_sq(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `|u|` at the outermost node.
    pub fn boundary_value(&self) -> f64 {
        self.values.last().map_or(0.0, |v| v.norm())
    }

    /// Whether `|u(R)| ≤ 10⁻⁸·max|u|`.
    pub fn decays_at_boundary(&self) -> bool {
        self.boundary_value() <= 1e-8 * self.max_abs()
    }

    pub fn same_grid(&self, other: &RadialField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scale(&self, alpha: Complex64) -> RadialField {
        self.map(|v| v * alpha)
    }

    pub fn scale_real(&self, alpha: f64) -> RadialField {
        self.map(|v| v * alpha)
    }

    pub fn conj(&self) -> RadialField {
        self.map(|v| v.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> RadialField {
        RadialField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `self + alpha·other`.
    pub fn axpy(&self, alpha: Complex64, other: &RadialField) -> Result<RadialField> {
        self.same_grid(other)?;
        Ok(RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + alpha * b).collect(),
        })
    }

    pub fn sub(&self, other: &RadialField) -> Result<RadialField> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn add(&self, other: &RadialField) -> Result<RadialField> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn mass(&self) -> f64 {
        dot(&self.abs_sq(), self.grid.volumes())
    }

    pub fn kinetic(&self) -> f64 {
        self.grid.kinetic(&self.values)
    }

    /// `∫|x|^a |u|^q dx`.
    pub fn power_integral(&self, q: f64, a: f64) -> f64 {
        let w = self.grid.weights(a);
        self.values.iter().zip(&w).map(|(v, w)| w * v.norm().powf(q)).sum()
    }

    pub fn laplacian(&self) -> RadialField {
        RadialField { grid: self.grid.clone(), values: self.grid.laplacian(&self.values) }
    }

    pub fn h1_inner(&self, other: &RadialField) -> Result<Complex64> {
        self.same_grid(other)?;
        Ok(self.grid.h1_inner(&self.values, &other.values))
    }

    pub fn l2_inner(&self, other: &RadialField) -> Result<Complex64> {
        self.same_grid(other)?;
        Ok(self.grid.l2_inner(&self.values, &other.values))
    }

    pub fn h1_norm(&self) -> f64 {
        (self.kinetic() + self.mass()).sqrt()
    }

    pub fn sup_distance(&self, other: &RadialField) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// `x ↦ amplitude·u(mu·x)` on the grid of radius `R/mu`, with the samples
    /// carried over unchanged up to the amplitude.
    pub fn dilate(&self, mu: f64, amplitude: f64) -> Result<RadialField> {
        let grid = Arc::new(self.grid.scaled(mu)?);
        Ok(RadialField { grid, values: self.values.iter().map(|v| v * amplitude).collect() })
    }

    /// Evaluates `amplitude·u(scale·r)` at the nodes of `target` by cubic
    /// interpolation, with the field extended evenly across `r = 0` and
    /// oddly across `r = R`; points beyond the extension are zero.
    pub fn resample(&self, target: Arc<RadialGrid>, scale: f64, amplitude: f64) -> Result<RadialField> {
        if target.dim() != self.grid.dim() {
            return Err(Error::GridMismatch);
        }
        let values = target.nodes().iter().map(|&r| self.interpolate(scale * r) * amplitude).collect();
        RadialField::new(target, values)
    }

    /// Cubic interpolation at radius `r ≥ 0`.
    pub fn interpolate(&self, r: f64) -> Complex64 {
        let m = self.len() as isize;
        let h = self.grid.spacing();
        let zero = Complex64::new(0.0, 0.0);
        if r >= self.grid.radius() + 2.0 * h {
            return zero;
        }
        let t = r / h - 0.5;
        let j0 = t.floor() as isize;
        let s = t - j0 as f64;
        let sample = |k: isize| -> Complex64 {
            if k < 0 {
                self.values[(-1 - k) as usize]
            } else if k < m {
                self.values[k as usize]
            } else if k < 2 * m {
                -self.values[(2 * m - 1 - k) as usize]
            } else {
                zero
            }
        };
        // Lagrange weights on nodes −1, 0, 1, 2 relative to j0
        let l0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let l1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let l2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let l3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        sample(j0 - 1) * l0 + sample(j0) * l1 + sample(j0 + 1) * l2 + sample(j0 + 2) * l3
    }
}
