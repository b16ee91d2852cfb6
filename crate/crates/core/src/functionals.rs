//! Mass, energy, action, Nehari and virial functionals.
//!
//! With `K = ‖∇u‖²`, `M = ‖u‖²` and `Pot = ∫|x|^b|u|^{p+1}`:
//!
//! ```text
//! E   = K/2 − Pot/(p+1)
//! S_ω = E + ω M/2
//! I_ω = K + ω M − Pot
//! P   = K − B/(p+1)·Pot,   B = (N(p−1) − 2b)/2
//! ```

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{dot, RadialField, RadialGrid};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FunctionalReport {
    pub mass: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub energy: f64,
    pub action: f64,
    pub nehari: f64,
    pub virial: f64,
    /// `∫|x|²|u|²` over the truncated ball.
    pub variance: f64,
    /// `|u|` at the outermost node.
    pub boundary_value: f64,
    /// False when `|u(R)| > 10⁻⁸·max|u|`.
    pub variance_reliable: bool,
}

/// Functional evaluation with the weights for one grid cached.
#[derive(Debug, Clone)]
pub struct Evaluator {
    grid: Arc<RadialGrid>,
    params: ModelParams,
    omega: f64,
    weight_b: Vec<f64>,
    weight_2: Vec<f64>,
}

impl Evaluator {
    /// Requires valid parameters; `ω` defaults to zero when absent, which
    /// leaves every functional but `S_ω` and `I_ω` meaningful.
    pub fn new(grid: Arc<RadialGrid>, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        if grid.dim() != params.dim {
            return Err(Error::ParameterDomain(alloc::format!(
                "grid dimension {} does not match N = {}",
                grid.dim(),
                params.dim
            )));
        }
        Ok(Evaluator {
            weight_b: grid.weights(params.b()),
            weight_2: grid.weights(2.0),
            omega: params.omega.unwrap_or(0.0),
            params: *params,
            grid,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    fn check(&self, u: &RadialField) -> Result<()> {
        if **u.grid() != *self.grid {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = u.values().iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(())
    }

    pub fn mass(&self, u: &[Complex64]) -> f64 {
        u.iter().zip(self.grid.volumes()).map(|(v, w)| w * v.norm_sqr()).sum()
    }

    pub fn kinetic(&self, u: &[Complex64]) -> f64 {
        self.grid.kinetic(u)
    }

    pub fn potential(&self, u: &[Complex64]) -> f64 {
        let half = (self.params.p() + 1.0) / 2.0;
        u.iter().zip(&self.weight_b).map(|(v, w)| w * v.norm_sqr().powf(half)).sum()
    }

    pub fn variance(&self, u: &[Complex64]) -> f64 {
        u.iter().zip(&self.weight_2).map(|(v, w)| w * v.norm_sqr()).sum()
    }

    pub fn energy(&self, u: &[Complex64]) -> f64 {
        0.5 * self.kinetic(u) - self.potential(u) / (self.params.p() + 1.0)
    }

    pub fn report(&self, u: &RadialField) -> Result<FunctionalReport> {
        self.check(u)?;
        let v = u.values();
        let p = self.params.p();
        let mass = self.mass(v);
        let kinetic = self.kinetic(v);
        let potential = self.potential(v);
        let energy = 0.5 * kinetic - potential / (p + 1.0);
        let action = energy + 0.5 * self.omega * mass;
        Ok(FunctionalReport {
            mass,
            kinetic,
            potential,
            energy,
            action,
            nehari: kinetic + self.omega * mass - potential,
            virial: kinetic - self.params.virial_exponent() / (p + 1.0) * potential,
            variance: self.variance(v),
            boundary_value: u.boundary_value(),
            variance_reliable: u.decays_at_boundary(),
        })
    }

    /// Real part of `E'(u)` as an L² gradient: `−Δu − ρ|u|^{p−1}u`, with
    /// `ρ` the cell average of `r^b`.
    pub(crate) fn energy_gradient(&self, u: &[Complex64]) -> Vec<Complex64> {
        let lap = self.grid.laplacian(u);
        let pm1 = (self.params.p() - 1.0) / 2.0;
        lap.iter()
            .zip(u)
            .zip(self.weight_b.iter().zip(self.grid.volumes()))
            .map(|((l, v), (wb, w))| -l - v * (wb / w * v.norm_sqr().powf(pm1)))
            .collect()
    }
}

/// Evaluates all functionals of `u` under `params`.
pub fn report(u: &RadialField, params: &ModelParams) -> Result<FunctionalReport> {
    params.omega()?;
    Evaluator::new(u.grid().clone(), params)?.report(u)
}

/// `K_{a,c}(u) = ½(2a+Nc)‖u‖² + ½(2a+(N−2)c)‖∇u‖² − (a + c(b+N)/(1+p))·Pot`.
pub fn kac_functional(u: &RadialField, params: &ModelParams, a: f64, c: f64) -> Result<f64> {
    let ev = Evaluator::new(u.grid().clone(), params)?;
    ev.check(u)?;
    let v = u.values();
    let (n, b, p) = (params.n(), params.b(), params.p());
    Ok(0.5 * (2.0 * a + n * c) * ev.mass(v) + 0.5 * (2.0 * a + (n - 2.0) * c) * ev.kinetic(v)
        - (a + c * (b + n) / (1.0 + p)) * ev.potential(v))
}

/// `Pot / (‖∇u‖^{B}·‖u‖^{β})` with `B = (N(p−1)−2b)/2` and
/// `β = (4+2b−(N−2)(p−1))/2`.
pub fn gn_ratio(u: &RadialField, params: &ModelParams) -> Result<f64> {
    let ev = Evaluator::new(u.grid().clone(), params)?;
    ev.check(u)?;
    let v = u.values();
    let (mass, kinetic) = (ev.mass(v), ev.kinetic(v));
    if mass == 0.0 || kinetic == 0.0 {
        return Err(Error::ZeroField);
    }
    let (gb, lb) = gn_exponents(params);
    Ok(ev.potential(v) / (kinetic.powf(gb / 2.0) * mass.powf(lb / 2.0)))
}

/// Exponents of `‖∇u‖` and `‖u‖` in the Gagliardo–Nirenberg inequality.
pub fn gn_exponents(params: &ModelParams) -> (f64, f64) {
    let (n, b, p) = (params.n(), params.b(), params.p());
    ((n * (p - 1.0) - 2.0 * b) / 2.0, (4.0 + 2.0 * b - (n - 2.0) * (p - 1.0)) / 2.0)
}

/// `inf_θ ‖u − e^{iθ}φ‖_{H¹}` together with the optimal phase
/// `θ* = arg⟨u, φ⟩_{H¹}`.
pub fn phase_optimized_h1_distance_with_phase(u: &RadialField, phi: &RadialField) -> Result<(f64, f64)> {
    let z = u.h1_inner(phi)?;
    let theta = if z == Complex64::new(0.0, 0.0) { 0.0 } else { z.arg() };
    let rotated = phi.scale(Complex64::from_polar(1.0, theta));
    let diff = u.sub(&rotated)?;
    Ok((diff.h1_norm(), theta))
}

/// `inf_θ ‖u − e^{iθ}φ‖_{H¹}`.
pub fn phase_optimized_h1_distance(u: &RadialField, phi: &RadialField) -> Result<f64> {
    phase_optimized_h1_distance_with_phase(u, phi).map(|(d, _)| d)
}

/// `Re⟨u, v⟩` in the grid inner product.
pub(crate) fn real_inner(grid: &RadialGrid, u: &[Complex64], v: &[Complex64]) -> f64 {
    let prod: Vec<f64> = u.iter().zip(v).map(|(a, b)| (a * b.conj()).re).collect();
    dot(&prod, grid.volumes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn fixture() -> (RadialField, ModelParams) {
        let g = make_grid(3, 12.0, 4096).unwrap();
        let u = RadialField::from_real_fn(g, |r| (-r * r / 2.0).exp()).unwrap();
        (u, ModelParams::new(3, 1.0, 3.0).with_omega(1.0))
    }

    // Closed forms for u = e^{−r²/2} in ℝ³ with b = 1, p = 3.
    const MASS: f64 = 5.568_327_996_831_708; // π^{3/2}
    const KINETIC: f64 = 8.352_491_995_247_562; // (3/2)π^{3/2}
    const POTENTIAL: f64 = core::f64::consts::FRAC_PI_2;

    #[test]
    fn gaussian_fixture() {
        let (u, params) = fixture();
        let r = report(&u, &params).unwrap();
        assert!(rel(r.mass, MASS) < 1e-5);
        assert!(rel(r.kinetic, KINETIC) < 1e-5);
        assert!(rel(r.potential, POTENTIAL) < 1e-5);
        assert!(rel(r.energy, 3.783_547_0) < 1e-5);
        assert!(rel(r.action, 6.567_711_0) < 1e-5);
        assert!(rel(r.nehari, 12.350_023_7) < 1e-5);
        assert!(rel(r.virial, 7.567_093_8) < 1e-5);
        // ∫r²e^{−r²} over ℝ³ = (3/2)π^{3/2}
        assert!(rel(r.variance, 1.5 * PI.powf(1.5)) < 1e-5);
        assert!(r.variance_reliable);
    }

    #[test]
    fn report_invariants_exact() {
        let (u, params) = fixture();
        let r = report(&u, &params).unwrap();
        let p = 3.0;
        assert!(rel(r.action, r.energy + 0.5 * r.mass) < 1e-12);
        assert!(rel(r.nehari, 2.0 * r.action - (p - 1.0) / (p + 1.0) * r.potential) < 1e-12);
        assert!(rel(r.virial, r.kinetic - 2.0 / (p + 1.0) * r.potential) < 1e-12);
    }

    #[test]
    fn zero_field_report() {
        let (u, params) = fixture();
        let r = report(&RadialField::zeros(u.grid().clone()), &params).unwrap();
        assert_eq!([r.mass, r.kinetic, r.potential, r.energy, r.action, r.nehari, r.virial, r.variance], [0.0; 8]);
    }

    #[test]
    fn report_requires_omega() {
        let (u, params) = fixture();
        assert!(report(&u, &params.without_omega()).is_err());
    }

    #[test]
    fn kac_examples() {
        let (u, params) = fixture();
        let k = kac_functional(&u, &params, 1.0, -2.0 / 3.0).unwrap();
        assert!(rel(k, 5.044_729_2) < 1e-5);
        let virial = report(&u, &params).unwrap().virial;
        assert!(rel(k, 2.0 / 3.0 * virial) < 1e-12);
        assert_eq!(kac_functional(&u, &params, 0.0, 0.0).unwrap(), 0.0);
        let z = RadialField::zeros(u.grid().clone());
        assert_eq!(kac_functional(&z, &params, 0.7, 1.3).unwrap(), 0.0);
    }

    #[test]
    fn gn_fixture() {
        let (u, params) = fixture();
        let expected = POTENTIAL / (KINETIC * MASS);
        assert!(rel(gn_ratio(&u, &params).unwrap(), expected) < 1e-5);
        assert!((expected - 0.033_774).abs() < 1e-6);
        assert_eq!(gn_ratio(&RadialField::zeros(u.grid().clone()), &params), Err(Error::ZeroField));
    }

    #[test]
    fn gn_dilation_invariant() {
        let (u, params) = fixture();
        let mu = 1.3;
        let v = u.dilate(mu, mu.powf(1.5)).unwrap();
        let a = gn_ratio(&u, &params).unwrap();
        let b = gn_ratio(&v, &params).unwrap();
        assert!(rel(a, b) < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let (u, _) = fixture();
        let rotated = u.scale(Complex64::from_polar(1.0, PI / 3.0));
        assert!(phase_optimized_h1_distance(&rotated, &u).unwrap() < 1e-12 * u.h1_norm());
        let doubled = u.scale_real(2.0);
        assert!(rel(phase_optimized_h1_distance(&doubled, &u).unwrap(), u.h1_norm()) < 1e-14);
        let other = RadialField::zeros(make_grid(3, 12.0, 100).unwrap());
        assert_eq!(phase_optimized_h1_distance(&other, &u), Err(Error::GridMismatch));
    }

    fn smooth(c: &[(f64, f64)]) -> RadialField {
        let g = make_grid(3, 10.0, 512).unwrap();
        RadialField::from_fn(g, |r| {
            let mut v = Complex64::new(0.0, 0.0);
            for (k, &(a, b)) in c.iter().enumerate() {
                v += Complex64::new(a, b) * ((k as f64 + 0.5) * PI * r / 10.0).cos();
            }
            v * (-r * r / 4.0).exp()
        })
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn gauge_invariance(
            c in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
            theta in 0.0f64..6.3,
            p in 2.1f64..4.5,
        ) {
            let u = smooth(&c);
            let params = ModelParams::new(3, 1.0, p).with_omega(1.3);
            let a = report(&u, &params).unwrap();
            let b = report(&u.scale(Complex64::from_polar(1.0, theta)), &params).unwrap();
            for (x, y) in [
                (a.mass, b.mass), (a.kinetic, b.kinetic), (a.potential, b.potential),
                (a.energy, b.energy), (a.action, b.action), (a.nehari, b.nehari),
                (a.virial, b.virial), (a.variance, b.variance),
            ] {
                prop_assert!((x - y).abs() <= 1e-14 * x.abs().max(y.abs()).max(1e-300) * 10.0);
            }
        }

        #[test]
        fn action_decomposition(
            c in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
            omega in 0.1f64..5.0,
        ) {
            let u = smooth(&c);
            let r = report(&u, &ModelParams::new(3, 1.0, 2.5).with_omega(omega)).unwrap();
            prop_assert!((r.action - r.energy - 0.5 * omega * r.mass).abs() <= 1e-12 * r.action.abs().max(1.0));
        }

        #[test]
        fn gn_amplitude_invariant(
            c in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
            alpha in 0.01f64..100.0,
        ) {
            let u = smooth(&c);
            prop_assume!(u.mass() > 1e-6);
            let params = ModelParams::new(3, 1.0, 2.5);
            let a = gn_ratio(&u, &params).unwrap();
            let b = gn_ratio(&u.scale_real(alpha), &params).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn distance_gauge_invariant(
            c in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
            d in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
            alpha in 0.0f64..6.3,
        ) {
            let u = smooth(&c);
            let phi = smooth(&d);
            let a = phase_optimized_h1_distance(&u, &phi).unwrap();
            let b = phase_optimized_h1_distance(&u.scale(Complex64::from_polar(1.0, alpha)), &phi).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() <= 1e-10 * (u.h1_norm() + phi.h1_norm()));
        }
    }
}
