//! Symmetric tridiagonal matrices and their `LDLᵀ` factorization.

use crate::scalar::Scalar;

/// Tridiagonal matrix stored by its three diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    /// Entries `(i+1, i)`.
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    /// Entries `(i, i+1)`.
    pub upper: Vec<T>,
}

impl<T: Scalar> Tridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![T::zero(); n.saturating_sub(1)],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Adds `value` at `(i, j)`; `|i - j| <= 1` is required.
    pub fn add(&mut self, i: usize, j: usize, value: T) {
        match (i, j) {
            _ if i == j => self.diag[i] = self.diag[i] + value,
            _ if i == j + 1 => self.lower[j] = self.lower[j] + value,
            _ if j == i + 1 => self.upper[i] = self.upper[i] + value,
            _ => panic!("entry ({i}, {j}) outside the tridiagonal band"),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            self.diag[i]
        } else if i == j + 1 {
            self.lower[j]
        } else if j == i + 1 {
            self.upper[i]
        } else {
            T::zero()
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc = acc + self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc = acc + self.upper[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> T {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| (l - u).abs())
            .fold(T::zero(), T::max)
    }

    /// Returns `A + shift * diag(d)`.
    pub fn shifted(&self, shift: T, d: &[T]) -> Self {
        let mut out = self.clone();
        for (a, &m) in out.diag.iter_mut().zip(d) {
            *a = *a + shift * m;
        }
        out
    }

    /// `LDLᵀ` factorization of the symmetric part (the lower diagonal is
    /// used). Returns `None` unless every pivot is positive.
    pub fn ldlt(&self) -> Option<Ldlt<T>> {
        let n = self.dim();
        let mut d = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n.saturating_sub(1));
        let mut prev = self.diag[0];
        if !(prev > T::zero()) || !prev.is_finite() {
            return None;
        }
        d.push(prev);
        for i in 1..n {
            let li = self.lower[i - 1] / prev;
            let di = self.diag[i] - li * self.lower[i - 1];
            if !(di > T::zero()) || !di.is_finite() {
                return None;
            }
            l.push(li);
            d.push(di);
            prev = di;
        }
        Some(Ldlt { l, d })
    }
}

/// Factorization `A = L D Lᵀ` with unit lower bidiagonal `L`.
#[derive(Debug, Clone)]
pub struct Ldlt<T> {
    l: Vec<T>,
    d: Vec<T>,
}

impl<T: Scalar> Ldlt<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 1..n {
            x[i] = x[i] - self.l[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] = x[i] / self.d[i];
        }
        for i in (0..n - 1).rev() {
            x[i] = x[i] - self.l[i] * x[i + 1];
        }
        x
    }
}
