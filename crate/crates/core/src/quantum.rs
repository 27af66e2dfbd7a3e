//! Qubit states, observables and entropic quantities.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{check_range, Error, Result};
use crate::linalg::{c, eigh, eigvalsh, ComplexMat, C64};

/// A dichotomic measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// 0 for `+1`, 1 for `-1`.
    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Key-bit value: `+1 -> 0`, `-1 -> 1`.
    pub fn bit(self) -> u8 {
        self.index() as u8
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

pub fn pauli(axis: Axis) -> ComplexMat {
    let z0 = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let rows: [[C64; 2]; 2] = match axis {
        Axis::X => [[z0, one], [one, z0]],
        Axis::Y => [[z0, c(0.0, -1.0)], [c(0.0, 1.0), z0]],
        Axis::Z => [[one, z0], [z0, -one]],
    };
    ComplexMat::from_rows(&[&rows[0], &rows[1]]).expect("2x2")
}

/// Single-qubit unitary `diag(1, e^{i pi/4})` mapping Alice's frame onto
/// Bob's measurement frame.
pub fn bob_rotation() -> ComplexMat {
    let mut u = ComplexMat::identity(2);
    u[(1, 1)] = C64::from_polar(1.0, FRAC_PI_4);
    u
}

/// A dichotomic observable: Hermitian, squares to the identity, traceless.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable(ComplexMat);

impl Observable {
    pub fn new(m: ComplexMat) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim(),
            });
        }
        let herr = m.hermiticity_error();
        if herr > 1e-12 {
            return Err(Error::NotHermitian(herr));
        }
        let sq = &m * &m;
        let dev = sq.max_abs_diff(&ComplexMat::identity(2));
        if dev > 1e-10 || m.trace().norm() > 1e-10 {
            return Err(Error::OutOfRange {
                name: "observable spectrum deviation",
                value: dev.max(m.trace().norm()),
                range: "eigenvalues {+1, -1}",
            });
        }
        Ok(Self(m))
    }

    pub fn pauli(axis: Axis) -> Self {
        Self(pauli(axis))
    }

    /// Real combination `a X + b Y + d Z` of unit length.
    pub fn bloch(n: [f64; 3]) -> Result<Self> {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange {
                name: "bloch vector length",
                value: norm,
                range: "1",
            });
        }
        let m = Axis::ALL
            .iter()
            .zip(n)
            .fold(ComplexMat::zeros(2), |acc, (&a, w)| &acc + &pauli(a).scale_re(w));
        Ok(Self(m))
    }

    /// `U O U^dagger` for `U = diag(1, e^{i pi/4})`.
    pub fn rotated(&self) -> Self {
        Self(self.0.conjugate_by(&bob_rotation()))
    }

    pub fn matrix(&self) -> &ComplexMat {
        &self.0
    }

    /// Projector onto the eigenspace with eigenvalue `s`.
    pub fn projector(&self, s: Sign) -> ComplexMat {
        (&ComplexMat::identity(2) + &self.0.scale_re(s.value())).scale_re(0.5)
    }

    /// The eigenstate with eigenvalue `s`.
    pub fn eigenstate(&self, s: Sign) -> DensityOp {
        DensityOp(self.projector(s))
    }

    /// A unit eigenvector with eigenvalue `s`.
    pub fn eigenvector(&self, s: Sign) -> Vec<C64> {
        let e = eigh(&self.0).expect("2x2 Hermitian");
        // ascending: index 0 is -1
        match s {
            Sign::Plus => e.vectors[1].clone(),
            Sign::Minus => e.vectors[0].clone(),
        }
    }

    pub fn expectation(&self, rho: &ComplexMat) -> f64 {
        self.0.trace_product(rho).re
    }
}

/// Bob's observables `U sigma_j U^dagger`.
pub fn rotated_paulis() -> [Observable; 3] {
    Axis::ALL.map(|a| Observable::pauli(a).rotated())
}

/// Closed form of [`rotated_paulis`]: `(X+Y)/sqrt2`, `(Y-X)/sqrt2`, `Z`.
pub fn rotated_paulis_closed_form() -> [Observable; 3] {
    let s = FRAC_1_SQRT_2;
    [
        Observable::bloch([s, s, 0.0]).expect("unit"),
        Observable::bloch([-s, s, 0.0]).expect("unit"),
        Observable::pauli(Axis::Z),
    ]
}

/// A validated density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOp(ComplexMat);

impl DensityOp {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const PSD_TOL: f64 = 1e-10;

    pub fn new(m: ComplexMat) -> Result<Self> {
        let herr = m.hermiticity_error();
        if herr > Self::HERMITIAN_TOL {
            return Err(Error::NotHermitian(herr));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        let min = eigvalsh(&m)?.first().copied().unwrap_or(0.0);
        if min < -Self::PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self(m))
    }

    /// Hermitises and normalises `m` first; still rejects negative spectra.
    pub fn from_approx(m: &ComplexMat) -> Result<Self> {
        let h = m.hermitian_part();
        let tr = h.trace().re;
        if tr.abs() < 1e-300 {
            return Err(Error::BadTrace(tr));
        }
        Self::new(h.scale_re(1.0 / tr))
    }

    pub fn from_ket(v: &[C64]) -> Result<Self> {
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-300 {
            return Err(Error::BadTrace(0.0));
        }
        let u: Vec<C64> = v.iter().map(|z| z / n).collect();
        Ok(Self(ComplexMat::projector(&u)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMat::identity(dim).scale_re(1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &ComplexMat {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMat {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.0).expect("density operators are Hermitian")
    }

    /// Unit ket of a pure state.
    pub fn pure_ket(&self) -> Result<Vec<C64>> {
        let p = self.purity();
        if (p - 1.0).abs() > 1e-10 {
            return Err(Error::NotPure(p));
        }
        let e = eigh(&self.0)?;
        Ok(e.vectors.last().cloned().unwrap_or_default())
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.0.tensor(&other.0).map(Self)
    }

    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        self.0.partial_trace(dims, keep).map(Self)
    }

    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        check_range("mixing weight", w, 0.0, 1.0, "[0, 1]")?;
        Ok(Self(&self.0.scale_re(1.0 - w) + &other.0.scale_re(w)))
    }
}

/// Shannon entropy in bits of a probability vector; zeros contribute zero.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// Von Neumann entropy in bits. Eigenvalues in `[-1e-10, 0)` count as zero.
pub fn von_neumann_entropy(rho: &DensityOp) -> f64 {
    let ev: Vec<f64> = rho.eigenvalues().into_iter().map(|x| x.max(0.0)).collect();
    shannon_entropy(&ev)
}

/// `h(x) = -x log2 x - (1-x) log2 (1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_range("binary entropy argument", x, 0.0, 1.0, "[0, 1]")?;
    Ok(h2(x))
}

/// Binary entropy with the argument clamped to `[0, 1]`.
pub(crate) fn h2(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    shannon_entropy(&[x, 1.0 - x])
}

/// `0.5 * || a - b ||_1`
pub fn trace_distance(a: &ComplexMat, b: &ComplexMat) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let d = a - b;
    Ok(0.5 * eigvalsh(&d)?.iter().map(|x| x.abs()).sum::<f64>())
}

/// Uhlmann-free fidelity for a pure reference: `<psi| rho |psi>`.
pub fn overlap_with_ket(rho: &ComplexMat, psi: &[C64]) -> f64 {
    let v = rho.apply(psi);
    psi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<C64>().re
}

/// `|Phi+> = (|00> + |11>)/sqrt2`
pub fn phi_plus() -> Vec<C64> {
    let s = FRAC_1_SQRT_2;
    alloc::vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]
}

pub fn ket0() -> Vec<C64> {
    alloc::vec![c(1.0, 0.0), c(0.0, 0.0)]
}

pub fn ket1() -> Vec<C64> {
    alloc::vec![c(0.0, 0.0), c(1.0, 0.0)]
}

pub fn kron_ket(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Numerical cross-check of `U sigma U^dagger` against the closed form.
pub fn rotation_residual() -> f64 {
    rotated_paulis()
        .iter()
        .zip(rotated_paulis_closed_form().iter())
        .map(|(a, b)| a.matrix().max_abs_diff(b.matrix()))
        .fold(0.0, Float::max)
}
