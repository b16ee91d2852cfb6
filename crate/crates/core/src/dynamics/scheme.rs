//! Crank–Nicolson step
//!
//! ```text
//! i(u⁺ − u)/dt + L(u⁺ + u)/2 = −ρ·N̄(u, u⁺)
//! N̄ = [(G(|u⁺|²) − G(|u|²))/(|u⁺|² − |u|²)]·(u⁺ + u)/2,   G(s) = s^q/q,  q = (p+1)/2
//! ```
//!
//! which conserves the discrete mass and energy exactly. At `p = 3` the
//! bracket is `(|u⁺|² + |u|²)/2`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::grid::RadialGrid;
use crate::tridiag::Tridiag;

/// `(G(a) − G(b))/(a − b)`, continuous across `a = b`.
pub(crate) fn secant_coefficient(a: f64, b: f64, q: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi <= 0.0 {
        return 0.0;
    }
    let lead = hi.powf(q - 1.0);
    if lo <= 0.0 {
        return lead / q;
    }
    let x = (lo - hi) / hi;
    if x == 0.0 {
        return lead;
    }
    lead * (q * x.ln_1p()).exp_m1() / (q * x)
}

#[derive(Debug, Clone)]
pub(crate) struct Scheme {
    grid: Arc<RadialGrid>,
    rho: Vec<f64>,
    q: f64,
}

impl Scheme {
    pub fn new(grid: Arc<RadialGrid>, b: f64, p: f64) -> Self {
        Scheme { rho: grid.cell_power(b), q: (p + 1.0) / 2.0, grid }
    }

    /// Fixed-point solve for `u⁺`; `None` when it fails to reach
    /// `tol·max|u|` within `max_iter` sweeps.
    pub fn attempt(&self, u: &[Complex64], dt: f64, tol: f64, max_iter: usize) -> Option<(Vec<Complex64>, usize)> {
        let lap = self.grid.laplacian_matrix();
        let half = Complex64::new(0.0, 0.5 * dt);
        let one = Complex64::new(1.0, 0.0);
        let a = Tridiag {
            lower: lap.lower.iter().map(|&l| -half * l).collect(),
            diag: lap.diag.iter().map(|&d| one - half * d).collect(),
            upper: lap.upper.iter().map(|&l| -half * l).collect(),
        }
        .factor();
        let lu = self.grid.laplacian(u);
        let base: Vec<Complex64> = u.iter().zip(&lu).map(|(v, l)| v + half * l).collect();
        let abs_u: Vec<f64> = u.iter().map(|v| v.norm_sqr()).collect();
        let scale = u.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if scale == 0.0 {
            return Some((u.to_vec(), 0));
        }
        let idt = Complex64::new(0.0, dt);
        let mut next = u.to_vec();
        let mut rhs = Vec::with_capacity(u.len());
        for it in 1..=max_iter {
            rhs.clear();
            for i in 0..u.len() {
                let c = secant_coefficient(next[i].norm_sqr(), abs_u[i], self.q);
                rhs.push(base[i] + idt * (self.rho[i] * c * 0.5) * (next[i] + u[i]));
            }
            a.solve_in_place(&mut rhs);
            let mut change = 0.0f64;
            for (x, y) in rhs.iter().zip(&next) {
                change = change.max((x - y).norm());
            }
            if !change.is_finite() {
                return None;
            }
            core::mem::swap(&mut next, &mut rhs);
            if change <= tol * scale {
                return Some((next, it));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cubic_case_is_arithmetic_mean() {
        let c = secant_coefficient(2.0, 5.0, 2.0);
        assert!((c - 3.5).abs() < 1e-15);
    }

    #[test]
    fn diagonal_limit_is_derivative() {
        let q = 1.75;
        assert!((secant_coefficient(4.0, 4.0, q) - 4f64.powf(q - 1.0)).abs() < 1e-15);
        assert!((secant_coefficient(0.0, 4.0, q) - 4f64.powf(q) / q / 4.0).abs() < 1e-14);
        assert_eq!(secant_coefficient(0.0, 0.0, q), 0.0);
    }

    proptest! {
        #[test]
        fn secant_matches_direct_quotient(a in 0.01f64..10.0, b in 0.01f64..10.0, q in 1.05f64..4.0) {
            prop_assume!((a - b).abs() > 1e-3);
            let direct = (a.powf(q) - b.powf(q)) / (q * (a - b));
            let c = secant_coefficient(a, b, q);
            prop_assert!((c - direct).abs() <= 1e-11 * direct.abs());
            prop_assert_eq!(c, secant_coefficient(b, a, q));
        }
    }
}
