//! Positive radial ground state `Q_ω` of `−ΔQ + ωQ = |x|^b Q^p`.
//!
//! The profile comes from shooting on `Q(0)`; the shooting trajectory is
//! then used as the starting point of a Newton solve of the discrete
//! equation on the grid, so that the discrete Nehari identity holds to
//! round-off and the Pohozaev identities close at `O(h²)`.

mod shooting;

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::functionals::{Evaluator, FunctionalReport};
use crate::grid::{make_grid, RadialField, RadialGrid};
use crate::model::ModelParams;
use crate::tridiag::Tridiag;

/// Default node count for profile grids.
pub const DEFAULT_PROFILE_NODES: usize = 32768;
/// Relative residual accepted for a ground state.
pub const RESIDUAL_TOL: f64 = 1e-5;
/// Largest accepted `√ω·h` (or `e^λ·h`) for a compressed profile.
pub const RESOLUTION_LIMIT: f64 = 0.1;

const NEWTON_MAX: usize = 50;

/// Residuals of the four Pohozaev-type identities, each normalized by the
/// largest term entering it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PohozaevResiduals {
    /// `(2/N − 1)K = ωM − 2(N+b)/(N(p+1))·Pot`.
    pub dilation: f64,
    /// `K + ωM = Pot`.
    pub nehari: f64,
    /// `K = (N(p−1) − 2b)/(2(p+1))·Pot`.
    pub virial: f64,
    /// `(N + 2 + 2b − (N−2)p)K = ω(N(p−1) − 2b)M`.
    pub mass_kinetic: f64,
}

impl PohozaevResiduals {
    pub fn as_array(&self) -> [f64; 4] {
        [self.dilation, self.nehari, self.virial, self.mass_kinetic]
    }

    pub fn max(&self) -> f64 {
        self.as_array().iter().fold(0.0, |m, &v| m.max(v))
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub params: ModelParams,
    pub omega: f64,
    /// Real and positive samples.
    pub profile: RadialField,
    /// Sup over `r ≤ R/2` of `min(1, √ω r)·|−ΔQ + ωQ − ρQ^p|`, divided by
    /// `ω·max Q`.
    pub residual: f64,
    pub pohozaev: PohozaevResiduals,
    /// `S_ω(Q)`.
    pub action_value: f64,
    /// Shooting value `Q(0)`.
    pub center_value: f64,
    pub functionals: FunctionalReport,
}

impl GroundState {
    /// Attaches diagnostics to a profile; `params.omega` must be set.
    pub fn from_profile(profile: RadialField, params: &ModelParams, center_value: f64) -> Result<Self> {
        let radius = profile.grid().radius();
        Self::with_support(profile, params, center_value, radius)
    }

    /// As [`GroundState::from_profile`] for a profile whose data only extend
    /// to `support ≤ R`; the residual is taken over `r ≤ support/2`.
    fn with_support(profile: RadialField, params: &ModelParams, center_value: f64, support: f64) -> Result<Self> {
        let omega = params.omega()?;
        let ev = Evaluator::new(profile.grid().clone(), params)?;
        let functionals = ev.report(&profile)?;
        let residual = relative_residual(&ev, &profile, 0.5 * support.min(profile.grid().radius()));
        Ok(GroundState {
            params: *params,
            omega,
            pohozaev: pohozaev_from_report(&functionals, params, omega),
            action_value: functionals.action,
            residual,
            center_value,
            functionals,
            profile,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.profile.grid()
    }

    pub fn mass(&self) -> f64 {
        self.functionals.mass
    }

    /// Whether all samples are positive and the profile rises to a single
    /// maximum and then decreases strictly.
    pub fn is_unimodal(&self) -> bool {
        let v = self.profile.values();
        if v.iter().any(|z| !(z.re > 0.0) || z.im != 0.0) {
            return false;
        }
        let peak = (0..v.len()).fold(0, |k, i| if v[i].re > v[k].re { i } else { k });
        v[..=peak].windows(2).all(|w| w[0].re <= w[1].re) && v[peak..].windows(2).all(|w| w[1].re < w[0].re)
    }

    /// Residual and Pohozaev checks against [`RESIDUAL_TOL`] and `10⁻⁶`.
    pub fn passes_thresholds(&self) -> bool {
        self.residual <= RESIDUAL_TOL && self.pohozaev.max() <= 1e-6
    }
}

/// `R = max(12, 10/√ω)` with [`DEFAULT_PROFILE_NODES`] cells.
pub fn default_profile_grid(dim: u32, omega: f64) -> Result<Arc<RadialGrid>> {
    if !(omega > 0.0) {
        return Err(Error::Nonexistence { omega });
    }
    make_grid(dim, (10.0 / omega.sqrt()).max(12.0), DEFAULT_PROFILE_NODES)
}

/// Ground state on `grid` by shooting followed by a discrete Newton polish.
pub fn solve_profile_shooting(params: &ModelParams, grid: Arc<RadialGrid>) -> Result<GroundState> {
    params.require_admissible()?;
    let omega = params.omega()?;
    if !(omega > 0.0) {
        return Err(Error::Nonexistence { omega });
    }
    if grid.dim() != params.dim {
        return Err(Error::GridMismatch);
    }
    let ode = shooting::Ode { dim: params.n(), b: params.b(), p: params.p(), omega };
    let r_max = grid.radius().max(50.0 / omega.sqrt());
    let layout = shooting::Layout::new(grid.spacing(), grid.len(), r_max);
    let bracket = shooting::bisect(&ode, &layout)?;
    let guess = shooting::profile_from_bracket(&ode, &layout, grid.nodes(), &bracket);
    let ev = Evaluator::new(grid.clone(), params)?;
    let polished = newton_polish(&ev, omega, guess)?;
    let profile = RadialField::from_real(grid, &polished)?;
    let gs = GroundState::from_profile(profile, params, bracket.mid())?;
    if !(gs.residual <= RESIDUAL_TOL) {
        return Err(Error::Convergence(format!("ground-state residual {:e} above {RESIDUAL_TOL:e}", gs.residual)));
    }
    if !gs.is_unimodal() {
        return Err(Error::Convergence("profile is not positive and unimodal".into()));
    }
    Ok(gs)
}

/// Carries a converged profile onto another grid of the same dimension by
/// interpolation followed by the discrete Newton solve.
pub fn refine_profile(q: &GroundState, grid: Arc<RadialGrid>) -> Result<GroundState> {
    if grid.dim() != q.params.dim {
        return Err(Error::GridMismatch);
    }
    let guess = q.profile.resample(grid.clone(), 1.0, 1.0)?.re();
    let ev = Evaluator::new(grid.clone(), &q.params)?;
    let polished = newton_polish(&ev, q.omega, guess)?;
    let profile = RadialField::from_real(grid, &polished)?;
    let gs = GroundState::from_profile(profile, &q.params, q.center_value)?;
    if !(gs.residual <= RESIDUAL_TOL) || !gs.is_unimodal() {
        return Err(Error::Convergence(format!("refined profile residual {:e}", gs.residual)));
    }
    Ok(gs)
}

/// Newton iteration on `−Lu + ωu − ρu^p = 0`, stopped at round-off
/// stagnation.
fn newton_polish(ev: &Evaluator, omega: f64, mut u: Vec<f64>) -> Result<Vec<f64>> {
    let grid = ev.grid();
    let p = ev.params().p();
    let rho = grid.cell_power(ev.params().b());
    let lap = grid.laplacian_matrix();
    let m = u.len();
    let mut scratch = Vec::new();
    let mut last = f64::INFINITY;
    for _ in 0..NEWTON_MAX {
        let lu = grid.laplacian(&u);
        let mut f: Vec<f64> =
            (0..m).map(|i| -lu[i] + omega * u[i] - rho[i] * u[i].abs().powf(p - 1.0) * u[i]).collect();
        let jac = Tridiag {
            lower: lap.lower.iter().map(|v| -v).collect(),
            upper: lap.upper.iter().map(|v| -v).collect(),
            diag: (0..m).map(|i| -lap.diag[i] + omega - p * rho[i] * u[i].abs().powf(p - 1.0)).collect(),
        };
        jac.solve_into(&mut f, &mut scratch);
        let step = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let scale = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !step.is_finite() {
            return Err(Error::Convergence("Newton step is not finite".into()));
        }
        for (ui, di) in u.iter_mut().zip(&f) {
            *ui -= di;
        }
        if step <= 1e-14 * scale || (step >= 0.5 * last && step <= 1e-10 * scale) {
            return Ok(u);
        }
        last = step;
    }
    let scale = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if last <= 1e-8 * scale {
        Ok(u)
    } else {
        Err(Error::Convergence(format!("Newton polish stalled at step {last:e}")))
    }
}

fn relative_residual(ev: &Evaluator, profile: &RadialField, half: f64) -> f64 {
    equation_residual(ev.grid(), ev.params(), ev.omega(), profile.values(), half)
}

/// `sup_{r ≤ half} min(1, √ω r)·|−Δu + ωu − ρ|u|^{p−1}u| / (ω·max|u|)`.
pub(crate) fn equation_residual(
    grid: &RadialGrid,
    params: &ModelParams,
    omega: f64,
    u: &[Complex64],
    half: f64,
) -> f64 {
    let p = params.p();
    let lu = grid.laplacian(u);
    let rho = grid.cell_power(params.b());
    let root = omega.abs().sqrt();
    let mut sup = 0.0f64;
    let mut peak = 0.0f64;
    for (i, &r) in grid.nodes().iter().enumerate() {
        peak = peak.max(u[i].norm());
        if r > half {
            continue;
        }
        let res: Complex64 = -lu[i] + u[i] * omega - u[i] * (rho[i] * u[i].norm().powf(p - 1.0));
        sup = sup.max((root * r).min(1.0) * res.norm());
    }
    sup / (omega.abs() * peak).max(1e-300)
}

fn pohozaev_from_report(f: &FunctionalReport, params: &ModelParams, omega: f64) -> PohozaevResiduals {
    let (n, b, p) = (params.n(), params.b(), params.p());
    let (k, m, pot) = (f.kinetic, f.mass, f.potential);
    let norm = |terms: &[f64]| {
        let total: f64 = terms.iter().sum();
        let big = terms.iter().fold(1e-30f64, |a, t| a.max(t.abs()));
        total.abs() / big
    };
    PohozaevResiduals {
        dilation: norm(&[(2.0 / n - 1.0) * k, -omega * m, 2.0 * (n + b) / (n * (p + 1.0)) * pot]),
        nehari: norm(&[k, omega * m, -pot]),
        virial: norm(&[k, -(n * (p - 1.0) - 2.0 * b) / (2.0 * (p + 1.0)) * pot]),
        mass_kinetic: norm(&[(n + 2.0 + 2.0 * b - (n - 2.0) * p) * k, -omega * (n * (p - 1.0) - 2.0 * b) * m]),
    }
}

/// The four Pohozaev residuals of `q`.
pub fn pohozaev_residuals(q: &GroundState) -> PohozaevResiduals {
    q.pohozaev
}

/// Pohozaev residuals of an arbitrary field under `params` (ω required).
pub fn pohozaev_residuals_of(u: &RadialField, params: &ModelParams) -> Result<PohozaevResiduals> {
    let omega = params.omega()?;
    let f = Evaluator::new(u.grid().clone(), params)?.report(u)?;
    Ok(pohozaev_from_report(&f, params, omega))
}

fn check_base(q1: &GroundState) -> Result<()> {
    if (q1.omega - 1.0).abs() > 1e-12 {
        return Err(Error::ParameterDomain(format!("rescaling expects a profile at omega = 1, got {}", q1.omega)));
    }
    Ok(())
}

/// `Q_ω(x) = ω^{(2+b)/(2(p−1))} Q₁(√ω x)`, carried exactly onto the grid
/// of radius `R/√ω` with the same node count.
pub fn rescale_omega(q1: &GroundState, omega: f64) -> Result<GroundState> {
    check_base(q1)?;
    if !(omega > 0.0) {
        return Err(Error::Nonexistence { omega });
    }
    let params = q1.params.with_omega(omega);
    let alpha = (2.0 + params.b()) / (2.0 * (params.p() - 1.0));
    let profile = q1.profile.dilate(omega.sqrt(), omega.powf(alpha))?;
    GroundState::from_profile(profile, &params, q1.center_value * omega.powf(alpha))
}

/// [`rescale_omega`] interpolated onto `target`.
pub fn rescale_omega_onto(q1: &GroundState, omega: f64, target: Arc<RadialGrid>) -> Result<GroundState> {
    check_base(q1)?;
    if !(omega > 0.0) {
        return Err(Error::Nonexistence { omega });
    }
    let scaled_spacing = omega.sqrt() * target.spacing();
    if scaled_spacing > RESOLUTION_LIMIT {
        return Err(Error::UnderResolved { scaled_spacing, limit: RESOLUTION_LIMIT });
    }
    let params = q1.params.with_omega(omega);
    let alpha = (2.0 + params.b()) / (2.0 * (params.p() - 1.0));
    let amp = omega.powf(alpha);
    let support = q1.grid().radius() / omega.sqrt();
    let profile = q1.profile.resample(target, omega.sqrt(), amp)?;
    GroundState::with_support(profile, &params, q1.center_value * amp, support)
}

/// `λ = ((‖∇φ‖² + ω‖φ‖²)/∫|x|^b|φ|^{p+1})^{1/(p−1)}` and `λφ`, which lies
/// on the Nehari manifold.
pub fn nehari_project(phi: &RadialField, params: &ModelParams) -> Result<(f64, RadialField)> {
    let omega = params.omega()?;
    let ev = Evaluator::new(phi.grid().clone(), params)?;
    let v = phi.values();
    let (k, m) = (ev.kinetic(v), ev.mass(v));
    if k == 0.0 && m == 0.0 {
        return Err(Error::ZeroField);
    }
    let pot = ev.potential(v);
    if !(pot > f64::MIN_POSITIVE * (k + m)) {
        return Err(Error::Degenerate("potential energy is numerically zero".into()));
    }
    let top = k + omega * m;
    if !(top > 0.0) {
        return Err(Error::Degenerate("K + ωM is not positive".into()));
    }
    let lambda = (top / pot).powf(1.0 / (params.p() - 1.0));
    Ok((lambda, phi.scale_real(lambda)))
}

/// `σ = (2+b)(p+1)/(2(p−1)) − (b+N)/2`.
pub fn action_exponent(params: &ModelParams) -> f64 {
    let (n, b, p) = (params.n(), params.b(), params.p());
    (2.0 + b) * (p + 1.0) / (2.0 * (p - 1.0)) - (b + n) / 2.0
}

/// `d(ω)` as the action of the rescaled profile and by the closed form
/// `((p−1)/(2(p+1)))·ω^σ·∫|x|^b Q₁^{p+1}`.
pub fn action_level_d(params: &ModelParams, q1: &GroundState) -> Result<(f64, f64)> {
    let omega = params.omega()?;
    if !(omega > 0.0) {
        return Err(Error::Nonexistence { omega });
    }
    let q = rescale_omega(q1, omega)?;
    let p = params.p();
    let closed = (p - 1.0) / (2.0 * (p + 1.0)) * omega.powf(action_exponent(params)) * q1.functionals.potential;
    Ok((q.action_value, closed))
}
