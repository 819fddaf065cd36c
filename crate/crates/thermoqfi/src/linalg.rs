//! Small dense complex matrices and a cyclic Jacobi eigensolver for
//! Hermitian matrices.
//!
//! Probe states live in dimension 2^n with n at most 8, so everything here
//! is plain dense storage with no blocking. Qubit indexing is little-endian:
//! qubit `k` owns bit `k` of a basis index.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = Complex64::new(0.0, 0.0);
pub const ONE: C64 = Complex64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CMatrix { nrows, ncols, data: vec![ZERO; nrows * ncols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, ONE);
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend_from_slice(r);
        }
        CMatrix { nrows, ncols, data }
    }

    /// |u⟩⟨v| outer product.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        let mut m = CMatrix::zeros(u.len(), v.len());
        for i in 0..u.len() {
            for j in 0..v.len() {
                m.set(i, j, u[i] * v[j].conj());
            }
        }
        m
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.ncols, rhs.nrows, "matmul shape");
        let mut out = CMatrix::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.ncols {
                    let v = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.ncols, v.len(), "matvec shape");
        let mut out = vec![ZERO; self.nrows];
        for i in 0..self.nrows {
            let mut acc = ZERO;
            for j in 0..self.ncols {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        CMatrix { nrows: self.nrows, ncols: self.ncols, data }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        CMatrix { nrows: self.nrows, ncols: self.ncols, data }
    }

    pub fn scale(&self, f: C64) -> CMatrix {
        let data = self.data.iter().map(|a| a * f).collect();
        CMatrix { nrows: self.nrows, ncols: self.ncols, data }
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest |A[i][j] - conj(A[j][i])| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Kronecker product with `rhs` as the low-order factor.
    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.nrows * rhs.nrows, self.ncols * rhs.ncols);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..rhs.nrows {
                    for l in 0..rhs.ncols {
                        out.set(i * rhs.nrows + k, j * rhs.ncols + l, a * rhs.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Partial trace of a (2^m)x(2^m) operator, keeping the qubits listed in
    /// `keep` (little-endian bit positions, order preserved in the output).
    pub fn partial_trace_keep(&self, total_qubits: usize, keep: &[usize]) -> CMatrix {
        let dim = 1usize << total_qubits;
        assert_eq!(self.nrows, dim);
        assert_eq!(self.ncols, dim);
        let traced: Vec<usize> = (0..total_qubits).filter(|q| !keep.contains(q)).collect();
        let kd = 1usize << keep.len();
        let td = 1usize << traced.len();
        let scatter = |bits: usize, positions: &[usize]| -> usize {
            positions
                .iter()
                .enumerate()
                .fold(0usize, |acc, (b, &pos)| acc | (((bits >> b) & 1) << pos))
        };
        let mut out = CMatrix::zeros(kd, kd);
        for ik in 0..kd {
            let ik_full = scatter(ik, keep);
            for jk in 0..kd {
                let jk_full = scatter(jk, keep);
                let mut acc = ZERO;
                for t in 0..td {
                    let t_full = scatter(t, &traced);
                    acc += self.get(ik_full | t_full, jk_full | t_full);
                }
                out.set(ik, jk, acc);
            }
        }
        out
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// Returns `(eigenvalues, V)` with `A V = V diag(eigenvalues)`; columns of
    /// `V` are orthonormal eigenvectors. Eigenvalues are unsorted.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, CMatrix)> {
        let n = self.nrows;
        if n != self.ncols {
            return Err(Error::DimensionMismatch { expected: n, got: self.ncols });
        }
        let defect = self.hermiticity_defect();
        let scale = self.max_abs_entry().max(1e-300);
        if defect > 1e-10 * scale.max(1.0) {
            return Err(Error::Domain(format!(
                "hermitian_eigen: matrix is not Hermitian (defect {defect:.3e})"
            )));
        }

        let mut a = self.clone();
        // Symmetrize away representation noise.
        for i in 0..n {
            let d = a.get(i, i);
            a.set(i, i, C64::new(d.re, 0.0));
            for j in (i + 1)..n {
                let avg = 0.5 * (a.get(i, j) + a.get(j, i).conj());
                a.set(i, j, avg);
                a.set(j, i, avg.conj());
            }
        }
        let mut v = CMatrix::identity(n);
        let norm = a.frobenius_norm().max(1e-300);
        let tol = 1e-15 * norm;

        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a.get(i, j).norm_sqr();
                }
            }
            if (2.0 * off).sqrt() <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let b = a.get(p, q);
                    let babs = b.norm();
                    if babs <= 1e-300 {
                        continue;
                    }
                    let phase = b / babs;
                    let app = a.get(p, p).re;
                    let aqq = a.get(q, q).re;
                    let tau = (app - aqq) / (2.0 * babs);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    // Column rotation A <- A J, J = [[c, -s e^{i b}], [s e^{-i b}, c]]
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp + s * phase.conj() * akq);
                        a.set(k, q, -s * phase * akp + c * akq);
                    }
                    // Row rotation A <- J^H A
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk + s * phase * aqk);
                        a.set(q, k, -s * phase.conj() * apk + c * aqk);
                    }
                    // Accumulate eigenvectors V <- V J
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp + s * phase.conj() * vkq);
                        v.set(k, q, -s * phase * vkp + c * vkq);
                    }
                    a.set(p, q, ZERO);
                    a.set(q, p, ZERO);
                }
            }
        }

        let eigs = (0..n).map(|i| a.get(i, i).re).collect();
        Ok((eigs, v))
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.nrows).map(|i| self.get(i, j)).collect()
    }
}

/// ⟨u|v⟩, conjugate-linear in the first argument.
pub fn vdot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// u + f·v
pub fn vaxpy(u: &[C64], f: C64, v: &[C64]) -> Vec<C64> {
    u.iter().zip(v).map(|(a, b)| a + f * b).collect()
}

/// Apply a 2x2 single-qubit operator to `qubit` of a state vector.
pub fn apply_single_qubit(state: &mut [C64], qubit: usize, op: &[[C64; 2]; 2]) {
    let dim = state.len();
    let bit = 1usize << qubit;
    for idx in 0..dim {
        if idx & bit != 0 {
            continue;
        }
        let i0 = idx;
        let i1 = idx | bit;
        let a = state[i0];
        let b = state[i1];
        state[i0] = op[0][0] * a + op[0][1] * b;
        state[i1] = op[1][0] * a + op[1][1] * b;
    }
}

/// Five-point central finite difference of a vector-valued function.
pub fn fd5_vector(f: impl Fn(f64) -> Vec<C64>, x: f64, h: f64) -> Vec<C64> {
    let fm2 = f(x - 2.0 * h);
    let fm1 = f(x - h);
    let fp1 = f(x + h);
    let fp2 = f(x + 2.0 * h);
    (0..fm2.len())
        .map(|i| (fm2[i] - 8.0 * fm1[i] + 8.0 * fp1[i] - fp2[i]) / (12.0 * h))
        .collect()
}

/// Five-point central finite difference of a matrix-valued function.
pub fn fd5_matrix(f: impl Fn(f64) -> CMatrix, x: f64, h: f64) -> CMatrix {
    let fm2 = f(x - 2.0 * h);
    let fm1 = f(x - h);
    let fp1 = f(x + h);
    let fp2 = f(x + 2.0 * h);
    fm2.sub(&fm1.scale(C64::new(8.0, 0.0)))
        .add(&fp1.scale(C64::new(8.0, 0.0)))
        .sub(&fp2)
        .scale(C64::new(1.0 / (12.0 * h), 0.0))
}
