//! Small dense complex linear algebra: 2×2 closed forms, Jacobi eigenvalues
//! for small Hermitian matrices, and Gram-based rank decisions.
//!
//! Everything here works on matrices of dimension at most a few dozen, so the
//! cyclic Jacobi sweep is both simple and accurate. 2×2 spectra always go
//! through the trace/determinant closed form, never an iterative solver.

use crate::scalar::{r, Real};
use num_complex::Complex;

pub type C<T> = Complex<T>;

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(r(re), r(im))
}

#[inline]
pub fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

/// A 2×2 complex matrix in row-major order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T: Real> {
    pub e: [[C<T>; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn new(e: [[C<T>; 2]; 2]) -> Self {
        Mat2 { e }
    }

    pub fn from_rows(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> Self {
        Mat2 { e: [[a, b], [c, d]] }
    }

    pub fn zero() -> Self {
        Mat2 { e: [[czero(), czero()], [czero(), czero()]] }
    }

    pub fn identity() -> Self {
        Mat2 { e: [[cone(), czero()], [czero(), cone()]] }
    }

    /// Real diagonal matrix diag(a, d).
    pub fn diag(a: T, d: T) -> Self {
        Mat2 {
            e: [
                [Complex::new(a, T::zero()), czero()],
                [czero(), Complex::new(d, T::zero())],
            ],
        }
    }

    pub fn trace(&self) -> C<T> {
        self.e[0][0] + self.e[1][1]
    }

    pub fn det(&self) -> C<T> {
        self.e[0][0] * self.e[1][1] - self.e[0][1] * self.e[1][0]
    }

    pub fn adjoint(&self) -> Self {
        Mat2 {
            e: [
                [self.e[0][0].conj(), self.e[1][0].conj()],
                [self.e[0][1].conj(), self.e[1][1].conj()],
            ],
        }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        let mut out = *self;
        for row in out.e.iter_mut() {
            for x in row.iter_mut() {
                *x = *x * s;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.e[i][j] = out.e[i][j] + other.e[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.e[i][j] = out.e[i][j] - other.e[i][j];
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out.e[i][j] = out.e[i][j] + self.e[i][k] * other.e[k][j];
                }
            }
        }
        out
    }

    pub fn apply(&self, v: [C<T>; 2]) -> [C<T>; 2] {
        [
            self.e[0][0] * v[0] + self.e[0][1] * v[1],
            self.e[1][0] * v[0] + self.e[1][1] * v[1],
        ]
    }

    /// Maximal elementwise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> T {
        let adj = self.adjoint();
        let mut worst = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.e[i][j] - adj.e[i][j]).norm());
            }
        }
        worst
    }

    /// Maximal elementwise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> T {
        let p = self.adjoint().mul(self);
        let mut worst = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { cone() } else { czero() };
                worst = worst.max((p.e[i][j] - target).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm_sq(&self) -> T {
        let mut acc = T::zero();
        for row in &self.e {
            for x in row {
                acc += x.norm_sqr();
            }
        }
        acc
    }

    /// Eigenvalues of a Hermitian matrix, (min, max), by the closed form
    /// `(a+d)/2 ∓ sqrt(((a-d)/2)² + |b|²)`.
    pub fn hermitian_eigenvalues(&self) -> (T, T) {
        let a = self.e[0][0].re;
        let d = self.e[1][1].re;
        let half = r::<T>(0.5);
        let mean = (a + d) * half;
        let delta = (a - d) * half;
        let radius = (delta * delta + self.e[0][1].norm_sqr()).sqrt();
        (mean - radius, mean + radius)
    }

    /// Normalized eigenvector of a Hermitian matrix for eigenvalue `lambda`.
    ///
    /// Ties (near-degenerate spectrum) resolve to the basis vector with the
    /// smaller index.
    pub fn hermitian_eigenvector(&self, lambda: T) -> [C<T>; 2] {
        let a = self.e[0][0];
        let b = self.e[0][1];
        let d = self.e[1][1];
        // (a - λ)x + b y = 0 and c x + (d - λ)y = 0; pick the better row.
        let v1 = [b, Complex::new(lambda, T::zero()) - a];
        let v2 = [Complex::new(lambda, T::zero()) - d, b.conj()];
        let n1 = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
        let n2 = (v2[0].norm_sqr() + v2[1].norm_sqr()).sqrt();
        let tiny = r::<T>(1e-14) * (T::one() + self.frobenius_norm_sq().sqrt());
        if n1.max(n2) < tiny {
            return [cone(), czero()];
        }
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        [v[0] / n, v[1] / n]
    }

    /// `exp(s·H)` for a Hermitian `H` and real `s`, by the spectral closed
    /// form `e^{s m} (cosh(s ρ) I + sinh(s ρ)/ρ · (H − m I))`.
    pub fn hermitian_exp(&self, s: T) -> Self {
        let half = r::<T>(0.5);
        let mean = (self.e[0][0].re + self.e[1][1].re) * half;
        let delta = (self.e[0][0].re - self.e[1][1].re) * half;
        let radius = (delta * delta + self.e[0][1].norm_sqr()).sqrt();
        let shifted = self.sub(&Mat2::diag(mean, mean));
        let sr = s * radius;
        let (cosh, sinh_over_r) = if radius < r(1e-30) {
            (T::one(), s)
        } else {
            (sr.cosh(), sr.sinh() / radius)
        };
        let amp = (s * mean).exp();
        let mut out = Mat2::diag(cosh, cosh).add(&shifted.scale(Complex::new(sinh_over_r, T::zero())));
        out = out.scale(Complex::new(amp, T::zero()));
        out
    }

    /// Singular values (min, max) via the eigenvalues of `A†A`.
    pub fn singular_values(&self) -> (T, T) {
        let g = self.adjoint().mul(self);
        let (lo, hi) = g.hermitian_eigenvalues();
        (lo.max(T::zero()).sqrt(), hi.max(T::zero()).sqrt())
    }

    /// 2-norm condition number; infinite when singular.
    pub fn condition_number(&self) -> T {
        let (lo, hi) = self.singular_values();
        if lo == T::zero() {
            T::infinity()
        } else {
            hi / lo
        }
    }

    /// Hermitian PSD square root, `sqrt(H) = (H + sqrt(det) I) / sqrt(tr + 2 sqrt(det))`.
    pub fn psd_sqrt(&self) -> Self {
        let det = self.det().re.max(T::zero());
        let tr = self.trace().re;
        let s = det.sqrt();
        let denom = (tr + r::<T>(2.0) * s).max(T::zero()).sqrt();
        if denom < r(1e-300) {
            return Mat2::zero();
        }
        self.add(&Mat2::diag(s, s)).scale(Complex::new(T::one() / denom, T::zero()))
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == T::zero() {
            return None;
        }
        let inv = cone::<T>() / det;
        Some(Mat2::from_rows(
            self.e[1][1] * inv,
            -self.e[0][1] * inv,
            -self.e[1][0] * inv,
            self.e[0][0] * inv,
        ))
    }

    /// The unitary `U` maximizing `Re tr(U M)` for `M = self`, i.e. the
    /// adjoint of the polar factor of `M`. Rank-deficient `M` is completed
    /// along the missing direction.
    pub fn maximizing_unitary(&self) -> Self {
        let m = *self;
        let mmh = m.mul(&m.adjoint());
        let (lo, hi) = mmh.hermitian_eigenvalues();
        let tiny = r::<T>(1e-12) * (T::one() + hi);
        if lo > tiny {
            let root = mmh.psd_sqrt();
            if let Some(inv) = root.inverse() {
                return m.adjoint().mul(&inv);
            }
        }
        // Degenerate: regularize toward a unitary completion.
        let eps = r::<T>(1e-12) * (T::one() + m.frobenius_norm_sq().sqrt());
        let reg = m.add(&Mat2::diag(eps, eps));
        let mmh = reg.mul(&reg.adjoint());
        let root = mmh.psd_sqrt();
        match root.inverse() {
            Some(inv) => reg.adjoint().mul(&inv),
            None => Mat2::identity(),
        }
    }
}

/// Kronecker product of two 2×2 matrices as a 4×4 row-major matrix.
pub fn kron2<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Vec<Vec<C<T>>> {
    let mut out = vec![vec![czero(); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a.e[i][j] * b.e[k][l];
                }
            }
        }
    }
    out
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi sweeps, ascending.
pub fn symmetric_eigenvalues<T: Real>(mut a: Vec<Vec<T>>) -> Vec<T> {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    let eps = r::<T>(1e-30);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        let scale: T = (0..n).map(|i| a[i][i] * a[i][i]).sum::<T>() + off;
        if off <= eps * (T::one() + scale) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (r::<T>(2.0) * apq);
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let cth = T::one() / (t * t + T::one()).sqrt();
                let sth = t * cth;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = cth * akp - sth * akq;
                    a[k][q] = sth * akp + cth * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = cth * apk - sth * aqk;
                    a[q][k] = sth * apk + cth * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<T> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// Uses the real embedding `[[X, -Y], [Y, X]]` of `H = X + iY`, whose
/// spectrum is that of `H` with every eigenvalue doubled.
pub fn hermitian_eigenvalues<T: Real>(h: &[Vec<C<T>>]) -> Vec<T> {
    let n = h.len();
    let mut emb = vec![vec![T::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            emb[i][j] = h[i][j].re;
            emb[i][n + j] = -h[i][j].im;
            emb[n + i][j] = h[i][j].im;
            emb[n + i][n + j] = h[i][j].re;
        }
    }
    let doubled = symmetric_eigenvalues(emb);
    doubled.into_iter().step_by(2).collect()
}

/// Complex inner product `⟨a|b⟩ = Σ conj(a_k) b_k`.
pub fn inner<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(czero(), |acc, (x, y)| acc + x.conj() * *y)
}

pub fn norm<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
}

pub fn normalize<T: Real>(v: &mut [C<T>]) {
    let n = norm(v);
    if n > T::zero() {
        let inv = T::one() / n;
        for x in v.iter_mut() {
            *x = x.scale(inv);
        }
    }
}

/// Singular values of the matrix whose rows are `vectors`, descending,
/// obtained from the Hermitian Gram matrix.
pub fn singular_values_complex<T: Real>(vectors: &[Vec<C<T>>]) -> Vec<T> {
    let k = vectors.len();
    if k == 0 {
        return Vec::new();
    }
    let mut gram = vec![vec![czero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = inner(&vectors[i], &vectors[j]);
        }
    }
    let mut svals: Vec<T> = hermitian_eigenvalues(&gram)
        .into_iter()
        .map(|l| l.max(T::zero()).sqrt())
        .collect();
    svals.sort_by(|x, y| y.partial_cmp(x).unwrap());
    svals
}

/// Singular values over ℝ: each complex vector is read as a real vector of
/// doubled length, so the Gram matrix is the real part of the complex one.
pub fn singular_values_real<T: Real>(vectors: &[Vec<C<T>>]) -> Vec<T> {
    let k = vectors.len();
    if k == 0 {
        return Vec::new();
    }
    let mut gram = vec![vec![T::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = inner(&vectors[i], &vectors[j]).re;
        }
    }
    let mut svals: Vec<T> = symmetric_eigenvalues(gram)
        .into_iter()
        .map(|l| l.max(T::zero()).sqrt())
        .collect();
    svals.sort_by(|x, y| y.partial_cmp(x).unwrap());
    svals
}

/// Rank decision from a descending singular-value list: values above
/// `tol × σ_max` count.
pub fn rank_from_singular_values<T: Real>(svals: &[T], tol: T) -> usize {
    let max = svals.first().copied().unwrap_or(T::zero());
    if max <= T::zero() {
        return 0;
    }
    svals.iter().filter(|&&s| s > tol * max).count()
}
