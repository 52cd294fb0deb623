//! Dense complex matrices and the few factorizations the crate needs:
//! Householder QR, a cyclic Jacobi Hermitian eigensolver, and a
//! Householder-tridiagonal + implicit QL Hermitian eigensolver for the
//! larger matrices in the Brownian-motion simulation.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from separate real and imaginary row lists.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let rows = re.len();
        if im.len() != rows {
            return Err(Error::Shape("re and im have different row counts".into()));
        }
        let cols = re.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * cols);
        for (r, i) in re.iter().zip(im) {
            if r.len() != cols || i.len() != cols {
                return Err(Error::Shape("ragged rows".into()));
            }
            data.extend(r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn re_parts(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.re).collect())
            .collect()
    }

    pub fn im_parts(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.im).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Matrix product. The inner loop runs on split real/imaginary rows so
    /// that it vectorizes.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut b_re = vec![0.0; k * m];
        let mut b_im = vec![0.0; k * m];
        for (idx, z) in other.data.iter().enumerate() {
            b_re[idx] = z.re;
            b_im[idx] = z.im;
        }
        let mut out = Self::zeros(n, m);
        let mut c_re = vec![0.0; m];
        let mut c_im = vec![0.0; m];
        for i in 0..n {
            c_re.iter_mut().for_each(|x| *x = 0.0);
            c_im.iter_mut().for_each(|x| *x = 0.0);
            for (p, a) in self.row(i).iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let (ar, ai) = (a.re, a.im);
                let br = &b_re[p * m..(p + 1) * m];
                let bi = &b_im[p * m..(p + 1) * m];
                for j in 0..m {
                    c_re[j] += ar * br[j] - ai * bi[j];
                    c_im[j] += ar * bi[j] + ai * br[j];
                }
            }
            for (j, z) in out.row_mut(i).iter_mut().enumerate() {
                *z = C64::new(c_re[j], c_im[j]);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// tr = Tr / dimension.
    pub fn normalized_trace(&self) -> C64 {
        self.trace() / self.rows as f64
    }

    /// Tr(self · other) without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = ZERO;
        for i in 0..self.rows {
            let row = self.row(i);
            for (p, a) in row.iter().enumerate() {
                acc += a * other.data[p * other.cols + i];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ‖U†U − I‖_max.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    /// Block (bi, bj) (0-based) of size rows/nb × cols/nb.
    pub fn block(&self, nb: usize, bi: usize, bj: usize) -> Self {
        let br = self.rows / nb;
        let bc = self.cols / nb;
        Self::from_fn(br, bc, |i, j| self[(bi * br + i, bj * bc + j)])
    }

    pub fn set_block(&mut self, bi: usize, bj: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(bi * block.rows + i, bj * block.cols + j)] = block[(i, j)];
            }
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// ⟨a, b⟩ = Σ conj(a_i) b_i.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn phase(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        ONE
    } else {
        z / r
    }
}

/// Householder QR of a square matrix: returns (Q, R) with A = QR.
pub fn qr(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    assert!(a.is_square(), "qr expects a square matrix");
    let n = a.rows();
    let mut r = a.clone();
    let mut vs: Vec<Vec<C64>> = Vec::with_capacity(n);
    for k in 0..n {
        let norm: f64 = (k..n).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            vs.push(Vec::new());
            continue;
        }
        let alpha = -phase(r[(k, k)]) * norm;
        let mut v: Vec<C64> = (k..n).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            vs.push(Vec::new());
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vn);
        // R ← (I − 2vv†) R on rows k.., columns k..
        for j in k..n {
            let mut s = ZERO;
            for (t, vt) in v.iter().enumerate() {
                s += vt.conj() * r[(k + t, j)];
            }
            s *= 2.0;
            for (t, vt) in v.iter().enumerate() {
                r[(k + t, j)] -= vt * s;
            }
        }
        for i in k + 1..n {
            r[(i, k)] = ZERO;
        }
        vs.push(v);
    }
    let mut q = ComplexMatrix::identity(n);
    for k in (0..n).rev() {
        let v = &vs[k];
        if v.is_empty() {
            continue;
        }
        for j in k..n {
            let mut s = ZERO;
            for (t, vt) in v.iter().enumerate() {
                s += vt.conj() * q[(k + t, j)];
            }
            s *= 2.0;
            for (t, vt) in v.iter().enumerate() {
                q[(k + t, j)] -= vt * s;
            }
        }
    }
    (q, r)
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// unitary whose columns are the matching eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    /// V f(Λ) V†.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut scaled = v.clone();
        for i in 0..n {
            for (j, z) in scaled.row_mut(i).iter_mut().enumerate() {
                *z *= fv[j];
            }
        }
        scaled.matmul(&v.adjoint())
    }
}

fn sort_eigh(values: Vec<f64>, vectors: ComplexMatrix) -> Eigh {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_vals = order.iter().map(|&k| values[k]).collect();
    let sorted_vecs = ComplexMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    Eigh {
        values: sorted_vals,
        vectors: sorted_vecs,
    }
}

/// Cyclic Jacobi. Accurate and simple; used for the small Gram and moment
/// matrices and as a cross-check for [`eigh`].
pub fn eigh_jacobi(a: &ComplexMatrix) -> Result<Eigh> {
    if !a.is_square() {
        return Err(Error::Shape("eigh on a non-square matrix".into()));
    }
    let n = a.rows();
    let mut m = a.clone();
    // symmetrize so tiny asymmetries do not stall the sweep
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let total: f64 = m.as_slice().iter().map(|z| z.norm_sqr()).sum();
    let eps = f64::EPSILON;
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off <= eps * eps * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let w = apq / g;
                let tau = (m[(q, q)].re - m[(p, p)].re) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sw = w * s;
                let swc = sw.conj();
                // columns: A ← A J
                for i in 0..n {
                    let aip = m[(i, p)];
                    let aiq = m[(i, q)];
                    m[(i, p)] = aip * c - aiq * swc;
                    m[(i, q)] = aip * sw + aiq * c;
                }
                // rows: A ← J† A
                for j in 0..n {
                    let apj = m[(p, j)];
                    let aqj = m[(q, j)];
                    m[(p, j)] = apj * c - aqj * sw;
                    m[(q, j)] = apj * swc + aqj * c;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * swc;
                    v[(i, q)] = vip * sw + viq * c;
                }
            }
        }
    }
    let values = (0..n).map(|i| m[(i, i)].re).collect();
    Ok(sort_eigh(values, v))
}

/// Hermitian eigensolver via Householder tridiagonalization and implicit QL.
/// O(n³) with a small constant; used where Jacobi is too slow.
pub fn eigh(a: &ComplexMatrix) -> Result<Eigh> {
    if !a.is_square() {
        return Err(Error::Shape("eigh on a non-square matrix".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Eigh {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let mut m = a.clone();
    let mut reflectors: Vec<(usize, Vec<C64>)> = Vec::new();
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| m[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = -phase(m[(k + 1, k)]) * norm;
        let mut v: Vec<C64> = (k + 1..n).map(|i| m[(i, k)]).collect();
        v[0] -= alpha;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vn);
        let off = k + 1;
        let len = n - off;
        // p = A v on the trailing block
        for (i, pi) in p[..len].iter_mut().enumerate() {
            let row = &m.row(off + i)[off..];
            *pi = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let kk: C64 = inner(&v, &p[..len]);
        // w = 2p − 2(v†p) v ; A ← A − v w† − w v†
        let w: Vec<C64> = (0..len).map(|i| 2.0 * (p[i] - kk * v[i])).collect();
        for i in 0..len {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut m.row_mut(off + i)[off..];
            for j in 0..len {
                row[j] -= vi * w[j].conj() + wi * v[j].conj();
            }
        }
        m[(off, k)] = alpha;
        m[(k, off)] = alpha.conj();
        for i in off + 1..n {
            m[(i, k)] = ZERO;
            m[(k, i)] = ZERO;
        }
        reflectors.push((off, v));
    }
    let mut d: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut ph = vec![ONE; n];
    for k in 0..n - 1 {
        let sub = m[(k + 1, k)];
        e[k] = sub.norm();
        ph[k + 1] = ph[k] * phase(sub);
    }
    // zt holds eigenvectors of the real tridiagonal matrix as rows
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, &mut zt, n)?;
    // V = Q · D · Z, built column block by column block.
    let mut vecs = ComplexMatrix::from_fn(n, n, |i, j| ph[i] * zt[j * n + i]);
    for (off, v) in reflectors.iter().rev() {
        let off = *off;
        let mut s = vec![ZERO; n];
        for (t, vt) in v.iter().enumerate() {
            let vc = vt.conj();
            let row = vecs.row(off + t);
            for j in 0..n {
                s[j] += vc * row[j];
            }
        }
        for (t, vt) in v.iter().enumerate() {
            let vt2 = 2.0 * vt;
            let row = vecs.row_mut(off + t);
            for j in 0..n {
                row[j] -= vt2 * s[j];
            }
        }
    }
    Ok(sort_eigh(d, vecs))
}

/// Implicit QL on a real symmetric tridiagonal matrix (diagonal `d`,
/// subdiagonal `e[i]` between i and i+1). Eigenvectors accumulate in the rows
/// of `zt`.
fn tql2(d: &mut [f64], e: &mut [f64], zt: &mut [f64], n: usize) -> Result<()> {
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 200 {
                    return Err(Error::Invalid("tridiagonal QL did not converge".into()));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = zt.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for k in 0..n {
                        let hk = zi1[k];
                        zi1[k] = s * zi[k] + c * hk;
                        zi[k] = c * zi[k] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let a = random_matrix(n, seed);
        a.add(&a.adjoint())
    }

    fn reconstruct(e: &Eigh) -> ComplexMatrix {
        e.apply_fn(|l| C64::new(l, 0.0))
    }

    #[test]
    fn qr_reconstructs_and_q_is_unitary() {
        for n in [1, 2, 5, 17] {
            let a = random_matrix(n, n as u64);
            let (q, r) = qr(&a);
            assert!(q.unitarity_deviation() < 1e-13);
            assert!(q.matmul(&r).max_abs_diff(&a) < 1e-13);
            for i in 0..n {
                for j in 0..i {
                    assert_eq!(r[(i, j)], ZERO);
                }
            }
        }
    }

    #[test]
    fn jacobi_and_ql_agree() {
        for n in [1, 2, 3, 8, 31] {
            let h = random_hermitian(n, 100 + n as u64);
            let ej = eigh_jacobi(&h).unwrap();
            let eq = eigh(&h).unwrap();
            for (a, b) in ej.values.iter().zip(&eq.values) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
            assert!(reconstruct(&ej).max_abs_diff(&h) < 1e-12);
            assert!(reconstruct(&eq).max_abs_diff(&h) < 1e-12);
            assert!(eq.vectors.unitarity_deviation() < 1e-12);
            assert!(ej.vectors.unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn eigh_handles_degenerate_and_diagonal_input() {
        let d = ComplexMatrix::diagonal(&[C64::new(2.0, 0.0), C64::new(-1.0, 0.0), ONE]);
        let e = eigh(&d).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0, 2.0]);
        let id = ComplexMatrix::identity(6);
        let e = eigh(&id).unwrap();
        assert!(e.values.iter().all(|&l| (l - 1.0).abs() < 1e-15));
        let e = eigh_jacobi(&id).unwrap();
        assert!(e.values.iter().all(|&l| (l - 1.0).abs() < 1e-15));
    }

    #[test]
    fn exponential_of_hermitian_is_unitary() {
        let h = random_hermitian(40, 7);
        let u = eigh(&h).unwrap().apply_fn(|l| (I * l).exp());
        assert!(u.unitarity_deviation() < 1e-12);
    }

    #[test]
    fn trace_of_product_matches_matmul() {
        let a = random_matrix(9, 1);
        let b = random_matrix(9, 2);
        let t1 = a.trace_of_product(&b);
        let t2 = a.matmul(&b).trace();
        assert!((t1 - t2).norm() < 1e-13);
    }

    #[test]
    fn kron_and_blocks() {
        let a = random_matrix(2, 3);
        let b = random_matrix(3, 4);
        let k = a.kron(&b);
        let blk = k.block(2, 1, 0);
        assert!(blk.max_abs_diff(&b.scale(a[(1, 0)])) < 1e-15);
    }
}
