//! Symmetric tridiagonal pencils (A, B): the one discretization engine shared
//! by the eigensolver and both gradient flows.
//!
//! B is symmetric positive definite, so the LDL^T inertia of A - mu B counts
//! pencil eigenvalues below mu (congruence preserves inertia). Eigenvalues
//! come from bisection on that count inside a Gershgorin bracket, vectors
//! from shifted inverse iteration with a pivoting tridiagonal LU, and the
//! semi-implicit flows reuse an LDL^T factorization of B + dt A.

use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Symmetric tridiagonal matrix; off.len() == diag.len() - 1.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "band lengths inconsistent");
        SymTridiag { diag, off }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn identity(n: usize) -> Self {
        SymTridiag { diag: vec![1.0; n], off: vec![0.0; n - 1] }
    }

    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for i in 0..n {
            out[i] = self.diag[i] * w[i];
        }
        for i in 0..n - 1 {
            out[i] += self.off[i] * w[i + 1];
            out[i + 1] += self.off[i] * w[i];
        }
        out
    }

    pub fn apply_complex(&self, w: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        let mut out = vec![Complex64::ZERO; n];
        for i in 0..n {
            out[i] = self.diag[i] * w[i];
        }
        for i in 0..n - 1 {
            out[i] += self.off[i] * w[i + 1];
            out[i + 1] += self.off[i] * w[i];
        }
        out
    }

    /// u^T M v.
    pub fn quad(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            s += self.diag[i] * u[i] * v[i];
        }
        for i in 0..n - 1 {
            s += self.off[i] * (u[i] * v[i + 1] + u[i + 1] * v[i]);
        }
        s
    }

    /// conj(u)^T M u; real because M is real symmetric.
    pub fn quad_hermitian(&self, u: &[Complex64]) -> f64 {
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            s += self.diag[i] * u[i].norm_sqr();
        }
        for i in 0..n - 1 {
            s += 2.0 * self.off[i] * (u[i].conj() * u[i + 1]).re;
        }
        s
    }

    /// Interval certain to contain every eigenvalue (union of Gershgorin discs).
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut rad = 0.0;
            if i > 0 {
                rad += self.off[i - 1].abs();
            }
            if i < n - 1 {
                rad += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - rad);
            hi = hi.max(self.diag[i] + rad);
        }
        (lo, hi)
    }
}

/// Generalized eigenproblem A w = lambda B w with B positive definite.
#[derive(Debug, Clone)]
pub struct Pencil {
    pub a: SymTridiag,
    pub b: SymTridiag,
}

impl Pencil {
    pub fn new(a: SymTridiag, b: SymTridiag) -> Self {
        assert_eq!(a.n(), b.n(), "pencil dimensions inconsistent");
        Pencil { a, b }
    }

    /// Ordinary symmetric problem (B = I).
    pub fn standard(a: SymTridiag) -> Self {
        let n = a.n();
        Pencil { a, b: SymTridiag::identity(n) }
    }

    /// Number of pencil eigenvalues strictly below mu: negative pivots of
    /// the LDL^T sweep of A - mu B (Sturm count).
    pub fn count_below(&self, mu: f64) -> usize {
        let n = self.a.n();
        let mut cnt = 0;
        let mut piv = self.a.diag[0] - mu * self.b.diag[0];
        if piv < 0.0 {
            cnt += 1;
        }
        for i in 1..n {
            if piv == 0.0 {
                piv = 1e-300;
            }
            let e = self.a.off[i - 1] - mu * self.b.off[i - 1];
            piv = self.a.diag[i] - mu * self.b.diag[i] - e * e / piv;
            if piv < 0.0 {
                cnt += 1;
            }
        }
        cnt
    }

    /// Bracket containing all pencil eigenvalues, from Gershgorin bounds of
    /// A and B (the B bounds are positive since B is positive definite).
    fn bracket(&self) -> (f64, f64) {
        let (alo, ahi) = self.a.gershgorin();
        let (blo, bhi) = self.b.gershgorin();
        let blo = blo.max(1e-12);
        let lo = if alo < 0.0 { alo / blo } else { alo / bhi };
        let hi = if ahi > 0.0 { ahi / blo } else { ahi / bhi };
        (lo - 1.0, hi + 1.0)
    }

    /// k-th (0-based, ascending) eigenvalue by bisection.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        let n = self.a.n();
        if k >= n {
            return Err(Error::invalid(format!("eigenvalue index {k} out of range for size {n}")));
        }
        let (mut lo, mut hi) = self.bracket();
        for _ in 0..240 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * mid.abs().max(1.0) {
                return Ok(0.5 * (lo + hi));
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Eigenvector for an eigenvalue estimate: shifted inverse iteration,
    /// B-orthogonalized against `deflate` each sweep, Euclidean-normalized.
    pub fn eigenvector(&self, lam: f64, deflate: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.a.n();
        let shift = lam * (1.0 + 1e-12) + 1e-12;
        let dd: Vec<f64> =
            (0..n).map(|i| self.a.diag[i] - shift * self.b.diag[i]).collect();
        let ee: Vec<f64> =
            (0..n - 1).map(|i| self.a.off[i] - shift * self.b.off[i]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0x00c0_ffee);
        let mut w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        for _ in 0..4 {
            let mut rhs = self.b.apply(&w);
            let mut dl = ee.clone();
            let mut d = dd.clone();
            let mut du = ee.clone();
            solve_tridiag(&mut dl, &mut d, &mut du, &mut rhs)?;
            w = rhs;
            for v in deflate {
                let c = self.b.quad(&w, v) / self.b.quad(v, v);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
            let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(nrm > 0.0) {
                return Err(Error::NonConvergence { what: "inverse iteration", iterations: 4 });
            }
            for wi in w.iter_mut() {
                *wi /= nrm;
            }
        }
        Ok(w)
    }

    /// Rayleigh quotient w^T A w / w^T B w.
    pub fn rayleigh(&self, w: &[f64]) -> f64 {
        self.a.quad(w, w) / self.b.quad(w, w)
    }
}

/// Solves a general tridiagonal system in place by LU with partial pivoting.
/// dl/d/du are destroyed; the solution replaces b. Second-superdiagonal
/// fill-in from row swaps is stashed in dl.
pub fn solve_tridiag(
    dl: &mut [f64],
    d: &mut [f64],
    du: &mut [f64],
    b: &mut [f64],
) -> Result<()> {
    let n = d.len();
    debug_assert!(dl.len() == n - 1 && du.len() == n - 1 && b.len() == n);
    for i in 0..n - 1 {
        if dl[i] == 0.0 {
            if d[i] == 0.0 {
                return Err(Error::invalid("singular tridiagonal system"));
            }
        } else if d[i].abs() >= dl[i].abs() {
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = 0.0;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            let du2 = if i + 1 < n - 1 {
                let t = du[i + 1];
                du[i + 1] = -f * t;
                t
            } else {
                0.0
            };
            dl[i] = du2;
            du[i] = tmp;
            let t = b[i];
            b[i] = b[i + 1];
            b[i + 1] = t - f * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        return Err(Error::invalid("singular tridiagonal system"));
    }
    b[n - 1] /= d[n - 1];
    if n >= 2 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
    }
    Ok(())
}

/// LDL^T factorization of a symmetric positive definite tridiagonal matrix;
/// used by the semi-implicit flows to solve (B + dt A) x = rhs repeatedly.
#[derive(Debug, Clone)]
pub struct SpdTridiagFactor {
    l: Vec<f64>,
    d: Vec<f64>,
}

impl SpdTridiagFactor {
    pub fn new(m: &SymTridiag) -> Result<Self> {
        let n = m.n();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n - 1];
        d[0] = m.diag[0];
        if !(d[0] > 0.0) {
            return Err(Error::invalid("matrix not positive definite"));
        }
        for i in 0..n - 1 {
            l[i] = m.off[i] / d[i];
            d[i + 1] = m.diag[i + 1] - l[i] * m.off[i];
            if !(d[i + 1] > 0.0) {
                return Err(Error::invalid("matrix not positive definite"));
            }
        }
        Ok(SpdTridiagFactor { l, d })
    }

    pub fn solve_into(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 1..n {
            b[i] -= self.l[i - 1] * b[i - 1];
        }
        for i in 0..n {
            b[i] /= self.d[i];
        }
        for i in (0..n - 1).rev() {
            b[i] -= self.l[i] * b[i + 1];
        }
    }

    pub fn solve_complex_into(&self, b: &mut [Complex64]) {
        let n = self.d.len();
        for i in 1..n {
            let t = self.l[i - 1] * b[i - 1];
            b[i] -= t;
        }
        for i in 0..n {
            b[i] /= self.d[i];
        }
        for i in (0..n - 1).rev() {
            let t = self.l[i] * b[i + 1];
            b[i] -= t;
        }
    }
}
