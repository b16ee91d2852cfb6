//! Dilation families around the ground state and the stability experiment.

use alloc::sync::Arc;

#[allow(unused_imports)]
use num_traits::Float;

use super::{Propagator, StepConfig, Trajectory};
use crate::error::{Error, Result};
use crate::functionals::{phase_optimized_h1_distance, Evaluator};
use crate::grid::{RadialField, RadialGrid};
use crate::groundstate::{GroundState, RESOLUTION_LIMIT};
use crate::model::{classify_regime, Regime};
use crate::perturbation::{smooth_radial, DEFAULT_MODES};

/// `φ^λ(x) = e^{Nλ/2} Q(e^λ x)`, carried exactly onto the grid of radius
/// `R e^{−λ}` with the same node count.
pub fn instability_family(q: &GroundState, lambda: f64) -> Result<RadialField> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Ok(q.profile.clone());
    }
    q.profile.dilate(lambda.exp(), (q.params.n() * lambda / 2.0).exp())
}

/// [`instability_family`] interpolated onto `target`.
pub fn instability_family_on(q: &GroundState, lambda: f64, target: Arc<RadialGrid>) -> Result<RadialField> {
    check_lambda(lambda)?;
    let mu = lambda.exp();
    let scaled_spacing = mu * target.spacing();
    if scaled_spacing > RESOLUTION_LIMIT {
        return Err(Error::UnderResolved { scaled_spacing, limit: RESOLUTION_LIMIT });
    }
    q.profile.resample(target, mu, (q.params.n() * lambda / 2.0).exp())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() {
        return Err(Error::ParameterDomain(alloc::format!("lambda = {lambda} must be finite")));
    }
    Ok(())
}

/// `∂_λ S_ω(φ^λ) = e^{2λ}(1 − e^{λ(Np − (N+4+2b))/2})‖∇Q‖²`, which uses
/// `P(Q) = 0`.
pub fn action_lambda_derivative(q: &GroundState, lambda: f64) -> f64 {
    let (n, b, p) = (q.params.n(), q.params.b(), q.params.p());
    (2.0 * lambda).exp() * (1.0 - (lambda * (n * p - (n + 4.0 + 2.0 * b)) / 2.0).exp()) * q.functionals.kinetic
}

/// `φ_n(x) = λ^{1+N/2} Q(λx)` at `p = p_c` with its measured functionals
/// and the scaling predictions.
#[derive(Debug, Clone)]
pub struct MassCriticalFamily {
    pub lambda: f64,
    /// Exact dilation, on the grid of radius `R/λ`.
    pub field: RadialField,
    pub mass_ratio: f64,
    pub kinetic_ratio: f64,
    pub potential_ratio: f64,
    /// `λ²`.
    pub expected_mass_ratio: f64,
    /// `λ⁴`.
    pub expected_kinetic_ratio: f64,
    /// `λ^{(N+2)(p+1)/2 − b − N}`.
    pub expected_potential_ratio: f64,
    /// `E(φ_n)` by quadrature.
    pub energy: f64,
    /// `½λ⁴‖∇Q‖² − λ^{(N+2)(p+1)/2−b−N}·Pot(Q)/(p+1)`.
    pub energy_scaled: f64,
    /// `(λ⁴/(p+1))(1 − λ^{(4+2b)/N})·Pot(Q)`.
    pub energy_closed: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

impl MassCriticalFamily {
    /// Relative errors of the mass, kinetic and potential ratios and of the
    /// scaled energy.
    pub fn ratio_errors(&self) -> [f64; 4] {
        [
            rel(self.mass_ratio, self.expected_mass_ratio),
            rel(self.kinetic_ratio, self.expected_kinetic_ratio),
            rel(self.potential_ratio, self.expected_potential_ratio),
            rel(self.energy, self.energy_scaled),
        ]
    }

    pub fn closed_form_error(&self) -> f64 {
        rel(self.energy, self.energy_closed)
    }
}

pub fn mass_critical_family(q: &GroundState, lambda_n: f64) -> Result<MassCriticalFamily> {
    let params = q.params;
    if !params.is_mass_critical() {
        return Err(Error::Regime(alloc::format!("p = {} is not the mass-critical exponent", params.p())));
    }
    if !(lambda_n >= 1.0 && lambda_n.is_finite()) {
        return Err(Error::ParameterDomain(alloc::format!("lambda_n = {lambda_n} must be >= 1")));
    }
    let (n, b, p) = (params.n(), params.b(), params.p());
    let field = q.profile.dilate(lambda_n, lambda_n.powf(1.0 + n / 2.0))?;
    let ev = Evaluator::new(field.grid().clone(), &params)?;
    let v = field.values();
    let base = &q.functionals;
    let gamma = (n + 2.0) * (p + 1.0) / 2.0 - b - n;
    let l4 = lambda_n.powi(4);
    Ok(MassCriticalFamily {
        lambda: lambda_n,
        mass_ratio: ev.mass(v) / base.mass,
        kinetic_ratio: ev.kinetic(v) / base.kinetic,
        potential_ratio: ev.potential(v) / base.potential,
        expected_mass_ratio: lambda_n * lambda_n,
        expected_kinetic_ratio: l4,
        expected_potential_ratio: lambda_n.powf(gamma),
        energy: ev.energy(v),
        energy_scaled: 0.5 * l4 * base.kinetic - lambda_n.powf(gamma) * base.potential / (p + 1.0),
        energy_closed: l4 / (p + 1.0) * (1.0 - lambda_n.powf((4.0 + 2.0 * b) / n)) * base.potential,
        field,
    })
}

#[derive(Debug, Clone)]
pub struct StabilityOutcome {
    pub max_distance: f64,
    /// `‖u₀ − Q‖_{H¹}` up to phase.
    pub initial_distance: f64,
    pub trajectory: Trajectory,
}

/// [`stability_experiment_with`] with samples every 0.05 and the default
/// step configuration.
pub fn stability_experiment(q: &GroundState, epsilon: f64, t_final: f64, seed: u64) -> Result<StabilityOutcome> {
    stability_experiment_with(q, epsilon, t_final, seed, 0.05, StepConfig::default())
}

/// Evolves `Q + ε·w` with `w` the unit-H¹ perturbation for `seed` and
/// tracks the phase-optimized H¹ distance to `Q`.
pub fn stability_experiment_with(
    q: &GroundState,
    epsilon: f64,
    t_final: f64,
    seed: u64,
    sample_dt: f64,
    config: StepConfig,
) -> Result<StabilityOutcome> {
    if classify_regime(&q.params) != Regime::MassSubcritical {
        return Err(Error::Regime("the stability experiment needs the mass-subcritical regime".into()));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::ParameterDomain(alloc::format!("epsilon = {epsilon} must be >= 0")));
    }
    let w = smooth_radial(q.grid().clone(), seed, DEFAULT_MODES)?;
    let u0 = q.profile.axpy(epsilon.into(), &w)?;
    let initial_distance = phase_optimized_h1_distance(&u0, &q.profile)?;
    let prop = Propagator::new(q.grid().clone(), &q.params, config)?;
    let trajectory = prop.evolve(u0, t_final, sample_dt, Some(&q.profile))?;
    let max_distance = trajectory.max_distance().unwrap_or(0.0);
    Ok(StabilityOutcome { max_distance, initial_distance, trajectory })
}
