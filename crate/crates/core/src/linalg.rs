//! Dense linear algebra for the small matrices that appear in reservoir
//! training: Tikhonov-regularised least squares and eigenvalue moduli of
//! general (non-symmetric) real matrices.
//!
//! Everything here works on matrices of at most a few dozen rows and columns
//! (the state matrix has many rows but only `N + 1` columns), so the kernels
//! are plain loops over row-major storage.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::contract(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::contract(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = rhs.row(k);
                for (o, b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `out = self * x`. Panics on length mismatch; used on hot paths only
    /// after shapes have been validated.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, x);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

// Serialised as an array of rows.
impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `(SᵀS + λI) W = SᵀY` for the readout weights `W`.
///
/// The normal matrix is factorised by Cholesky. With `lambda > 0` it is
/// positive definite and the factorisation only fails on non-finite input;
/// with `lambda == 0` a pivot that is tiny relative to the largest diagonal
/// entry is reported as [`Error::SolveFailure`] instead of returning noise.
pub fn ridge_solve(states: &Matrix, targets: &Matrix, lambda: f64) -> Result<Matrix> {
    if states.rows() == 0 || states.cols() == 0 {
        return Err(Error::contract("state matrix is empty"));
    }
    if targets.rows() != states.rows() {
        return Err(Error::contract(format!(
            "state matrix has {} rows but targets have {}",
            states.rows(),
            targets.rows()
        )));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::contract(format!("lambda must be >= 0, got {lambda}")));
    }

    let n = states.cols();
    let q = targets.cols();
    let mut gram = Matrix::zeros(n, n);
    let mut rhs = Matrix::zeros(n, q);
    for k in 0..states.rows() {
        let s = states.row(k);
        let y = targets.row(k);
        for i in 0..n {
            let si = s[i];
            let g = gram.row_mut(i);
            for j in i..n {
                g[j] += si * s[j];
            }
            for (r, yj) in rhs.row_mut(i).iter_mut().zip(y) {
                *r += si * yj;
            }
        }
    }
    for i in 0..n {
        gram[(i, i)] += lambda;
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }

    let chol = cholesky(&gram, lambda == 0.0)?;
    Ok(cholesky_solve(&chol, &rhs))
}

/// Lower-triangular Cholesky factor of a symmetric matrix.
fn cholesky(a: &Matrix, strict: bool) -> Result<Matrix> {
    let n = a.rows();
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)].abs()));
    let floor = if strict {
        max_diag * n as f64 * f64::EPSILON * 16.0
    } else {
        0.0
    };
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) || !d.is_finite() {
            return Err(Error::SolveFailure { index: j, pivot: d });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &Matrix, b: &Matrix) -> Matrix {
    let n = l.rows();
    let mut x = b.clone();
    for c in 0..b.cols() {
        // forward: L z = b
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        // backward: Lᵀ x = z
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}

/// Subdiagonal entries below this fraction of their neighbouring diagonal
/// magnitudes are treated as zero.
const QR_TOLERANCE: f64 = 1e-12;
/// Total QR sweeps allowed per matrix row.
const QR_SWEEPS_PER_ROW: usize = 100;

/// Moduli of all eigenvalues of a square real matrix, in no particular order.
pub fn eigen_magnitudes(a: &Matrix) -> Result<Vec<f64>> {
    Ok(eigenvalues(a)?
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .collect())
}

/// Maximum eigenvalue modulus. Exactly zero for the zero matrix.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(eigen_magnitudes(a)?.into_iter().fold(0.0, f64::max))
}

/// Eigenvalues `(re, im)` of a general real matrix.
///
/// Balances, reduces to upper Hessenberg form with Householder reflections
/// and then runs Francis double-shift QR, deflating 1x1 and 2x2 blocks off
/// the bottom. Complex eigenvalues come out as conjugate pairs.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<(f64, f64)>> {
    if !a.is_square() {
        return Err(Error::contract(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::contract("matrix has non-finite entries"));
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hessenberg_qr(&mut h)
}

/// Parlett-Reinsch balancing by powers of two (exact in floating point).
fn balance(a: &mut Matrix) {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let ginv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= ginv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form (similarity transform).
fn hessenberg(h: &mut Matrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        h[(m, m - 1)] = scale * g;
        for i in m + 1..=high {
            h[(i, m - 1)] = 0.0;
        }
    }
}

#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
fn hessenberg_qr(a: &mut Matrix) -> Result<Vec<(f64, f64)>> {
    let n = a.rows();
    let mut eig = vec![(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let max_sweeps = QR_SWEEPS_PER_ROW * n;
    let mut sweeps = 0usize;

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }

    // `nn` is one past the active block's last row; `t` accumulates
    // exceptional shifts.
    let mut nn = n;
    let mut t = 0.0;
    while nn > 0 {
        let mut its = 0usize;
        loop {
            let last = nn - 1;
            // Look for a negligible subdiagonal element.
            let mut l = last;
            while l > 0 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                let sub = a[(l, l - 1)].abs();
                if sub <= QR_TOLERANCE * s || sub + s == s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }

            let mut x = a[(last, last)];
            if l == last {
                eig[last] = (x + t, 0.0);
                nn -= 1;
                break;
            }
            let mut y = a[(last - 1, last - 1)];
            let mut w = a[(last, last - 1)] * a[(last - 1, last)];
            if l + 1 == last {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    let lo = if z != 0.0 { x - w / z } else { x + z };
                    eig[last - 1] = (x + z, 0.0);
                    eig[last] = (lo, 0.0);
                } else {
                    eig[last - 1] = (x + p, z);
                    eig[last] = (x + p, -z);
                }
                nn -= 2;
                break;
            }

            if sweeps >= max_sweeps {
                return Err(Error::EigenNoConvergence { sweeps });
            }
            if its > 0 && its % 10 == 0 {
                // Exceptional shift to break cycles (e.g. permutation matrices).
                t += x;
                for i in 0..=last {
                    a[(i, i)] -= x;
                }
                let s = a[(last, last - 1)].abs() + a[(last - 1, last - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            sweeps += 1;

            // Find two consecutive small subdiagonal elements.
            let mut m = last - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=last {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..=last and columns m..=last.
            let mut k = m;
            while k < last {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k + 1 != last { a[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=last {
                        let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                        if k + 1 != last {
                            pp += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= pp * z;
                        }
                        a[(k + 1, j)] -= pp * y;
                        a[(k, j)] -= pp * x;
                    }
                    let imax = last.min(k + 3);
                    for i in l..=imax {
                        let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                        if k + 1 != last {
                            pp += z * a[(i, k + 2)];
                            a[(i, k + 2)] -= pp * r;
                        }
                        a[(i, k + 1)] -= pp * q;
                        a[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(eig)
}
