//! Thomas algorithm for tridiagonal systems.

use alloc::vec::Vec;
use num_traits::Num;

/// Tridiagonal matrix stored by bands; `lower[0]` and `upper[n-1]` are unused.
#[derive(Debug, Clone)]
pub(crate) struct Tridiag<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Num + Copy> Tridiag<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    /// Solves `A x = rhs` in place, using `scratch` for the modified upper band.
    ///
    /// No pivoting; the systems assembled in this crate are diagonally
    /// dominant or symmetric positive definite.
    pub fn solve_into(&self, rhs: &mut [T], scratch: &mut Vec<T>) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        scratch.clear();
        scratch.resize(n, T::zero());
        if n == 0 {
            return;
        }
        let mut beta = self.diag[0];
        scratch[0] = self.upper[0] / beta;
        rhs[0] = rhs[0] / beta;
        for i in 1..n {
            beta = self.diag[i] - self.lower[i] * scratch[i - 1];
            if i + 1 < n {
                scratch[i] = self.upper[i] / beta;
            }
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] = rhs[i] - scratch[i] * next;
        }
    }

    /// LU factors for repeated solves with the same matrix.
    pub fn factor(&self) -> Factored<T> {
        let n = self.len();
        let mut inv_beta = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        let mut prev = T::zero();
        for i in 0..n {
            let beta = if i == 0 { self.diag[0] } else { self.diag[i] - self.lower[i] * prev };
            let ib = T::one() / beta;
            prev = if i + 1 < n { self.upper[i] * ib } else { T::zero() };
            inv_beta.push(ib);
            upper.push(prev);
        }
        Factored { lower: self.lower.clone(), inv_beta, upper }
    }

    #[cfg(test)]
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut x = rhs.to_vec();
        let mut scratch = Vec::new();
        self.solve_into(&mut x, &mut scratch);
        x
    }

    /// `A x`.
    #[cfg(test)]
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y = y + self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    y = y + self.upper[i] * x[i + 1];
                }
                y
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Factored<T> {
    lower: Vec<T>,
    inv_beta: Vec<T>,
    /// Modified upper band.
    upper: Vec<T>,
}

impl<T: Num + Copy> Factored<T> {
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let n = self.inv_beta.len();
        debug_assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        rhs[0] = rhs[0] * self.inv_beta[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_beta[i];
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] = rhs[i] - self.upper[i] * next;
        }
    }
}
