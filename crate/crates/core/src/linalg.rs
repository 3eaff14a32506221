//! Small dense square matrices with partial-pivot LU, over `f64` and
//! `Complex64`.

use num_complex::{Complex64, ComplexFloat};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("matrix is numerically singular")]
pub struct SingularMatrix;

/// Square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

pub trait Scalar: ComplexFloat<Real = f64> + Copy + Default {
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![T::default(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::from_real(1.0);
        }
        m
    }

    pub fn from_vec(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data has wrong length");
        Matrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(v).fold(T::default(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn matmul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * rhs.get(k, j);
                }
            }
        }
        out
    }

    /// `max_i Σ_j |a_ij|`.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .map(|v| v.modulus())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Result<Lu<T>, SingularMatrix> {
        Lu::new(self.clone())
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, SingularMatrix> {
        Ok(self.lu()?.solve(b))
    }

    pub fn inverse(&self) -> Result<Matrix<T>, SingularMatrix> {
        let lu = self.lu()?;
        let n = self.n;
        let mut inv = Self::zeros(n);
        let mut e = vec![T::default(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = T::default());
            e[j] = T::from_real(1.0);
            let col = lu.solve(&e);
            for i in 0..n {
                inv.data[i * n + j] = col[i];
            }
        }
        Ok(inv)
    }
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    rcond_estimate: f64,
}

impl<T: Scalar> Lu<T> {
    fn new(mut a: Matrix<T>) -> Result<Self, SingularMatrix> {
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().map(|v| v.modulus()).fold(0.0, f64::max);
        if n > 0 && (scale == 0.0 || !scale.is_finite()) {
            return Err(SingularMatrix);
        }
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0_f64;
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, a.get(i, k).modulus()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= scale * 1e-15 || !pmax.is_finite() {
                return Err(SingularMatrix);
            }
            min_pivot = min_pivot.min(pmax);
            max_pivot = max_pivot.max(pmax);
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a.get(k, k);
            for i in k + 1..n {
                let f = a.get(i, k) / pivot;
                a.set(i, k, f);
                if f.modulus() != 0.0 {
                    for j in k + 1..n {
                        let v = a.get(i, j) - f * a.get(k, j);
                        a.set(i, j, v);
                    }
                }
            }
        }
        let rcond_estimate = if n == 0 { 1.0 } else { min_pivot / max_pivot };
        Ok(Lu {
            lu: a,
            perm,
            rcond_estimate,
        })
    }

    /// Ratio of smallest to largest pivot magnitude; a cheap conditioning hint.
    pub fn pivot_ratio(&self) -> f64 {
        self.rcond_estimate
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu.get(i, j) * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu.get(i, j) * x[j];
            }
            x[i] = s / self.lu.get(i, i);
        }
        x
    }
}
