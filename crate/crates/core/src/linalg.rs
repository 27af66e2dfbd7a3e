//! Small dense complex matrices (dimension at most 16) and a Hermitian
//! eigensolver.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

pub const MAX_DIM: usize = 16;

pub const fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMat {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMat {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let dim = rows.len();
        if dim > MAX_DIM {
            return Err(Error::DimensionOverflow(dim));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, vals: &[f64]) -> Self {
        assert_eq!(vals.len(), dim * dim);
        Self {
            dim,
            data: vals.iter().map(|&v| c(v, 0.0)).collect(),
        }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// `|v><w|`
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        assert_eq!(v.len(), w.len());
        Self::from_fn(v.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut s = c(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                s += self[(i, k)] * other[(k, i)];
            }
        }
        s
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `U self U^dagger`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.try_mul(self)
            .and_then(|m| m.try_mul(&u.adjoint()))
            .expect("conjugation with matching dimensions")
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(M + M^dagger) / 2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let n = self.dim * other.dim;
        if n > MAX_DIM {
            return Err(Error::DimensionOverflow(n));
        }
        let m = other.dim;
        Ok(Self::from_fn(n, |i, j| self[(i / m, j / m)] * other[(i % m, j % m)]))
    }

    /// Reorders tensor factors of a multi-qubit operator. Output factor `k`
    /// is input factor `perm[k]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        let nq = perm.len();
        if 1usize << nq != self.dim {
            return Err(Error::DimensionMismatch {
                expected: 1 << nq,
                found: self.dim,
            });
        }
        let mut seen = [false; 8];
        for &p in perm {
            if p >= nq || seen[p] {
                return Err(Error::BadSubsystems);
            }
            seen[p] = true;
        }
        let map = |idx: usize| -> usize {
            // bit for factor k sits at position nq-1-k
            let mut out = 0;
            for (k, &p) in perm.iter().enumerate() {
                let bit = (idx >> (nq - 1 - k)) & 1;
                out |= bit << (nq - 1 - p);
            }
            out
        };
        Ok(Self::from_fn(self.dim, |i, j| self[(map(i), map(j))]))
    }

    /// Partial trace keeping the subsystems listed in `keep` (in increasing
    /// order) of a system with local dimensions `dims`.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != self.dim || dims.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: self.dim,
            });
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::BadSubsystems);
        }
        let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
        let kd: usize = keep.iter().map(|&k| dims[k]).product();
        let td: usize = traced.iter().map(|&k| dims[k]).product();
        // compose a full index from kept and traced multi-indices
        let compose = |kidx: usize, tidx: usize| -> usize {
            let mut digits = [0usize; 8];
            let mut r = kidx;
            for &k in keep.iter().rev() {
                digits[k] = r % dims[k];
                r /= dims[k];
            }
            let mut r = tidx;
            for &k in traced.iter().rev() {
                digits[k] = r % dims[k];
                r /= dims[k];
            }
            dims.iter().enumerate().fold(0, |acc, (k, &d)| acc * d + digits[k])
        };
        let mut out = Self::zeros(kd);
        for i in 0..kd {
            for j in 0..kd {
                let mut s = c(0.0, 0.0);
                for t in 0..td {
                    s += self[(compose(i, t), compose(j, t))];
                }
                out[(i, j)] = s;
            }
        }
        Ok(out)
    }

    /// Row-major vectorisation.
    pub fn vec(&self) -> &[C64] {
        &self.data
    }
}

impl Index<(usize, usize)> for ComplexMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMat {
    type Output = ComplexMat;
    fn add(self, rhs: &ComplexMat) -> ComplexMat {
        assert_eq!(self.dim, rhs.dim);
        ComplexMat {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMat {
    type Output = ComplexMat;
    fn sub(self, rhs: &ComplexMat) -> ComplexMat {
        assert_eq!(self.dim, rhs.dim);
        ComplexMat {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMat {
    type Output = ComplexMat;
    fn mul(self, rhs: &ComplexMat) -> ComplexMat {
        self.try_mul(rhs).expect("matrix product dimension mismatch")
    }
}

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the eigenvector for `values[k]`.
    pub vectors: Vec<Vec<C64>>,
}

/// Cyclic complex Jacobi diagonalisation of a Hermitian matrix.
pub fn eigh(m: &ComplexMat) -> Result<Eigen> {
    let n = m.dim();
    let scale = m.frobenius_norm();
    let herr = m.hermiticity_error();
    if herr > 1e-9 * scale.max(1.0) {
        return Err(Error::NotHermitian(herr));
    }
    let mut a = m.hermitian_part();
    let mut v = ComplexMat::identity(n);
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let tol = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let mut converged = false;
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= tol * 1e-3 {
                    continue;
                }
                let phase = apq / r; // e^{i phi}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * Float::atan2(2.0 * r, app - aqq);
                let (s, co) = (theta.sin(), theta.cos());
                // J = [[c, -s], [conj(phase) s, conj(phase) c]] on (p, q)
                let jpp = c(co, 0.0);
                let jpq = c(-s, 0.0);
                let jqp = phase.conj() * s;
                let jqq = phase.conj() * co;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = c(0.0, 0.0);
                a[(q, p)] = c(0.0, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    Ok(Eigen {
        values: order.iter().map(|&i| a[(i, i)].re).collect(),
        vectors: order.iter().map(|&i| (0..n).map(|k| v[(k, i)]).collect()).collect(),
    })
}

pub fn eigvalsh(m: &ComplexMat) -> Result<Vec<f64>> {
    eigh(m).map(|e| e.values)
}

pub fn min_eigenvalue(m: &ComplexMat) -> Result<f64> {
    eigvalsh(m).map(|v| v.first().copied().unwrap_or(0.0))
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting. `a` is
/// row-major `n x n`.
pub fn solve(a: &[C64], b: &[C64]) -> Result<Vec<C64>> {
    let n = b.len();
    if a.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: a.len(),
        });
    }
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].norm().total_cmp(&m[j * n + col].norm()))
            .unwrap_or(col);
        if m[piv * n + col].norm() < 1e-12 * scale {
            return Err(Error::Singular);
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        let d = m[col * n + col];
        for r in (col + 1)..n {
            let f = m[r * n + col] / d;
            if f.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let t = m[col * n + k];
                m[r * n + k] -= f * t;
            }
            let t = x[col];
            x[r] -= f * t;
        }
    }
    for r in (0..n).rev() {
        let mut s = x[r];
        for k in (r + 1)..n {
            s -= m[r * n + k] * x[k];
        }
        x[r] = s / m[r * n + r];
    }
    Ok(x)
}

/// Inverse of a square matrix; fails when singular.
pub fn inverse(m: &ComplexMat) -> Result<ComplexMat> {
    let n = m.dim();
    let mut out = ComplexMat::zeros(n);
    for col in 0..n {
        let mut e = vec![c(0.0, 0.0); n];
        e[col] = c(1.0, 0.0);
        let x = solve(m.as_slice(), &e)?;
        for (r, v) in x.into_iter().enumerate() {
            out[(r, col)] = v;
        }
    }
    Ok(out)
}
