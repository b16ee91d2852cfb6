//! Radial time evolution of `i∂_t u + Δu = −|x|^b|u|^{p−1}u`.
//!
//! Steps are Crank–Nicolson with an energy-conserving nonlinearity (see
//! [`scheme`]), so the discrete mass and energy are invariants of the
//! scheme up to the fixed-point tolerance. The step size adapts: it is
//! halved when the fixed-point iteration stalls or the energy jumps, and
//! doubled after a run of calm steps. Blow-up is declared when the kinetic
//! energy has grown by [`BLOWUP_GROWTH`] and the step has been halved
//! [`BLOWUP_HALVINGS`] times.

mod families;
mod scheme;

use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::functionals::{phase_optimized_h1_distance, Evaluator};
use crate::grid::{make_grid, RadialField, RadialGrid};
use crate::model::ModelParams;

pub use families::{
    action_lambda_derivative, instability_family, instability_family_on, mass_critical_family, stability_experiment,
    stability_experiment_with, MassCriticalFamily, StabilityOutcome,
};
use scheme::Scheme;

pub const DT_MIN: f64 = 1e-12;
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX: usize = 50;
/// Largest accepted per-step change of the energy, relative to `K/2 + Pot/(p+1)`.
pub const ENERGY_JUMP_TOL: f64 = 1e-8;
pub const CALM_STEPS: usize = 100;
pub const BLOWUP_GROWTH: f64 = 1e3;
pub const BLOWUP_HALVINGS: usize = 20;
pub const DEFAULT_DYNAMICS_NODES: usize = 4096;

/// `R = max(16, 12/√ω)` with [`DEFAULT_DYNAMICS_NODES`] cells.
pub fn default_dynamics_grid(dim: u32, omega: f64) -> Result<Arc<RadialGrid>> {
    if !(omega > 0.0) {
        return Err(Error::Nonexistence { omega });
    }
    make_grid(dim, (12.0 / omega.sqrt()).max(16.0), DEFAULT_DYNAMICS_NODES)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepConfig {
    pub dt_initial: f64,
    pub dt_max: f64,
    /// When false the step never grows; it is still halved on failure.
    pub adaptive: bool,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig { dt_initial: 5e-3, dt_max: 2e-2, adaptive: true }
    }
}

impl StepConfig {
    pub fn fixed(dt: f64) -> Self {
        StepConfig { dt_initial: dt, dt_max: dt, adaptive: false }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt_initial >= DT_MIN
            && self.dt_initial.is_finite()
            && self.dt_max >= self.dt_initial
            && self.dt_max.is_finite())
        {
            return Err(Error::ParameterDomain(alloc::format!(
                "step sizes need {DT_MIN:e} <= dt_initial <= dt_max, got {} and {}",
                self.dt_initial,
                self.dt_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Status {
    Running,
    Finished,
    BlowupDetected,
    StepCollapse,
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub field: RadialField,
    pub t: f64,
    pub dt: f64,
    pub mass0: f64,
    pub energy0: f64,
    /// `‖∇u₀‖²`, the reference for the blow-up detector.
    pub kinetic0: f64,
    pub status: Status,
    pub steps: usize,
    /// Cumulative number of step halvings.
    pub halvings: usize,
    calm: usize,
}

impl EvolutionState {
    pub fn mass_drift(&self) -> f64 {
        (self.field.mass() - self.mass0).abs() / self.mass0.max(f64::MIN_POSITIVE)
    }
}

/// Monitors at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub virial: f64,
    pub variance: f64,
    /// `‖∇u‖`.
    pub grad_norm: f64,
    /// Phase-optimized H¹ distance to the reference profile, if any.
    pub distance: Option<f64>,
    pub variance_reliable: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub sample_dt: f64,
    pub status: Status,
    /// Last time reached before the detector fired.
    pub blowup_time: Option<f64>,
    pub final_state: EvolutionState,
}

impl Trajectory {
    pub fn max_distance(&self) -> Option<f64> {
        self.samples.iter().filter_map(|s| s.distance).reduce(f64::max)
    }

    /// Largest relative mass and energy deviation from the initial sample.
    pub fn drift(&self) -> (f64, f64) {
        let first = &self.samples[0];
        let (m0, e0) = (first.mass, first.energy);
        self.samples.iter().fold((0.0, 0.0), |(dm, de), s| {
            (
                f64::max(dm, (s.mass - m0).abs() / m0.abs().max(f64::MIN_POSITIVE)),
                f64::max(de, (s.energy - e0).abs() / e0.abs().max(1.0)),
            )
        })
    }
}

/// Time stepper for one grid and parameter set.
#[derive(Debug, Clone)]
pub struct Propagator {
    ev: Evaluator,
    scheme: Scheme,
    config: StepConfig,
}

impl Propagator {
    pub fn new(grid: Arc<RadialGrid>, params: &ModelParams, config: StepConfig) -> Result<Self> {
        params.require_admissible()?;
        config.validate()?;
        let ev = Evaluator::new(grid.clone(), params)?;
        Ok(Propagator { scheme: Scheme::new(grid, params.b(), params.p()), ev, config })
    }

    pub fn config(&self) -> &StepConfig {
        &self.config
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.ev
    }

    pub fn initial_state(&self, u0: RadialField) -> Result<EvolutionState> {
        if **u0.grid() != **self.ev.grid() {
            return Err(Error::GridMismatch);
        }
        if !u0.is_finite() {
            return Err(Error::NonFinite(u0.values().iter().position(|v| !v.is_finite()).unwrap_or(0)));
        }
        let v = u0.values();
        Ok(EvolutionState {
            mass0: self.ev.mass(v),
            energy0: self.ev.energy(v),
            kinetic0: self.ev.kinetic(v),
            t: 0.0,
            dt: self.config.dt_initial,
            status: Status::Running,
            steps: 0,
            halvings: 0,
            calm: 0,
            field: u0,
        })
    }

    /// One accepted step of size at most `state.dt` (retrying with smaller
    /// steps as needed). Does nothing unless the state is running.
    pub fn step(&self, mut state: EvolutionState) -> EvolutionState {
        self.advance(&mut state, f64::INFINITY);
        state
    }

    fn blown_up(&self, state: &EvolutionState) -> bool {
        state.halvings >= BLOWUP_HALVINGS && self.ev.kinetic(state.field.values()) >= BLOWUP_GROWTH * state.kinetic0
    }

    fn energy_scale(&self, u: &[num_complex::Complex64]) -> f64 {
        0.5 * self.ev.kinetic(u) + self.ev.potential(u) / (self.ev.params().p() + 1.0)
    }

    /// Advances by one step without passing `limit`.
    fn advance(&self, state: &mut EvolutionState, limit: f64) {
        if state.status != Status::Running {
            return;
        }
        loop {
            let remaining = limit - state.t;
            let clipped = remaining <= state.dt;
            let dt = if clipped { remaining } else { state.dt };
            let u = state.field.values();
            let accepted = self.scheme.attempt(u, dt, FIXED_POINT_TOL, FIXED_POINT_MAX).filter(|(v, _)| {
                let jump = (self.ev.energy(v) - self.ev.energy(u)).abs();
                jump <= ENERGY_JUMP_TOL * self.energy_scale(u)
            });
            match accepted {
                Some((v, _)) => {
                    state.field = RadialField::new_unchecked(state.field.grid().clone(), v);
                    state.t = if clipped { limit } else { state.t + dt };
                    state.steps += 1;
                    state.calm += 1;
                    if self.config.adaptive && state.calm >= CALM_STEPS {
                        state.dt = (2.0 * state.dt).min(self.config.dt_max);
                        state.calm = 0;
                    }
                    if self.blown_up(state) {
                        state.status = Status::BlowupDetected;
                    }
                    return;
                }
                None => {
                    state.dt = 0.5 * dt.min(state.dt);
                    state.halvings += 1;
                    state.calm = 0;
                    if self.blown_up(state) {
                        state.status = Status::BlowupDetected;
                        return;
                    }
                    if state.dt < DT_MIN {
                        state.status = Status::StepCollapse;
                        return;
                    }
                }
            }
        }
    }

    fn sample(&self, state: &EvolutionState, reference: Option<&RadialField>) -> Result<Sample> {
        let r = self.ev.report(&state.field)?;
        let distance = match reference {
            Some(q) => Some(phase_optimized_h1_distance(&state.field, q)?),
            None => None,
        };
        Ok(Sample {
            t: state.t,
            mass: r.mass,
            energy: r.energy,
            kinetic: r.kinetic,
            potential: r.potential,
            virial: r.virial,
            variance: r.variance,
            grad_norm: r.kinetic.sqrt(),
            distance,
            variance_reliable: r.variance_reliable,
        })
    }

    /// Evolves `u0` to `t_final`, recording monitors every `sample_dt` and
    /// once more at the stopping time if it falls between samples.
    pub fn evolve(
        &self,
        u0: RadialField,
        t_final: f64,
        sample_dt: f64,
        reference: Option<&RadialField>,
    ) -> Result<Trajectory> {
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::ParameterDomain(alloc::format!("final time {t_final} must be >= 0")));
        }
        if !(sample_dt > 0.0 && sample_dt.is_finite()) {
            return Err(Error::ParameterDomain(alloc::format!("sample interval {sample_dt} must be > 0")));
        }
        if let Some(q) = reference {
            u0.same_grid(q)?;
        }
        let mut state = self.initial_state(u0)?;
        let mut samples = alloc::vec![self.sample(&state, reference)?];
        let count = (t_final / sample_dt - 1e-9).ceil().max(0.0) as usize;
        for k in 1..=count {
            let target = (k as f64 * sample_dt).min(t_final);
            while state.status == Status::Running && state.t < target {
                self.advance(&mut state, target);
            }
            if state.status != Status::Running {
                if state.t > samples.last().map_or(0.0, |s| s.t) && state.field.is_finite() {
                    samples.push(self.sample(&state, reference)?);
                }
                break;
            }
            samples.push(self.sample(&state, reference)?);
        }
        if state.status == Status::Running {
            state.status = Status::Finished;
        }
        let blowup_time = (state.status == Status::BlowupDetected).then_some(state.t);
        Ok(Trajectory { samples, sample_dt, status: state.status, blowup_time, final_state: state })
    }
}

/// [`Propagator::evolve`] with the default step configuration on the grid
/// of `u0`.
pub fn evolve(u0: RadialField, params: &ModelParams, t_final: f64, sample_dt: f64) -> Result<Trajectory> {
    Propagator::new(u0.grid().clone(), params, StepConfig::default())?.evolve(u0, t_final, sample_dt, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WellTag {
    KPlus,
    KMinus,
    AboveThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Classification {
    pub tag: WellTag,
    pub s_value: f64,
    pub p_value: f64,
    pub d_value: f64,
}

impl Classification {
    pub fn from_values(s_value: f64, p_value: f64, d_value: f64) -> Self {
        let tag = if !(s_value < d_value) {
            WellTag::AboveThreshold
        } else if p_value >= 0.0 {
            WellTag::KPlus
        } else {
            WellTag::KMinus
        };
        Classification { tag, s_value, p_value, d_value }
    }
}

/// Places `u0` relative to the potential well of depth `d_value`.
pub fn classify_initial_data(u0: &RadialField, params: &ModelParams, d_value: f64) -> Result<Classification> {
    params.omega()?;
    let r = Evaluator::new(u0.grid().clone(), params)?.report(u0)?;
    Ok(Classification::from_values(r.action, r.virial, d_value))
}

/// `(t, V'', 8P)` at the interior samples of the uniformly spaced prefix of
/// the trajectory, with `V''` by second central differences.
pub fn virial_second_differences(traj: &Trajectory) -> Result<Vec<(f64, f64, f64)>> {
    let dt = traj.sample_dt;
    let uniform: Vec<&Sample> = traj
        .samples
        .iter()
        .enumerate()
        .take_while(|(k, s)| (s.t - *k as f64 * dt).abs() <= 1e-9 * s.t.max(1.0))
        .map(|(_, s)| s)
        .collect();
    if uniform.len() < 5 {
        return Err(Error::ParameterDomain(alloc::format!(
            "virial check needs at least 5 uniform samples, got {}",
            uniform.len()
        )));
    }
    if uniform.iter().any(|s| !s.variance_reliable) {
        return Err(Error::VarianceUnreliable);
    }
    Ok(uniform
        .windows(3)
        .map(|w| {
            let v2 = (w[2].variance - 2.0 * w[1].variance + w[0].variance) / (dt * dt);
            (w[1].t, v2, 8.0 * w[1].virial)
        })
        .collect())
}

/// `max |V'' − 8P| / max(|8P|, ε)` over interior samples, with
/// `ε = 8·10⁻³·‖∇u‖²` so that near-stationary states are measured against
/// the kinetic scale.
pub fn virial_consistency(traj: &Trajectory) -> Result<f64> {
    let diffs = virial_second_differences(traj)?;
    let kinetic: Vec<f64> = traj.samples.iter().skip(1).map(|s| s.kinetic).collect();
    Ok(diffs
        .iter()
        .zip(kinetic)
        .map(|(&(_, v2, eight_p), k)| (v2 - eight_p).abs() / eight_p.abs().max(8e-3 * k))
        .fold(0.0, f64::max))
}
