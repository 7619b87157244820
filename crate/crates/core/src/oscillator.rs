//! Hermite-basis machinery for the semiclassical expansion around the bottom
//! of each mode well.
//!
//! Rescaling by x = (r - R_n)/h_n turns the radial mode operator into a
//! perturbed harmonic oscillator -d^2/dx^2 + x^2 + O(h_n). Each expansion
//! order solves (-d^2/dx^2 + x^2 - 1) u = rhs with a prescribed <xi_1, u>,
//! where the right-hand side is built from xi_1 by multiplications by x,
//! differentiation, and (in the nonlinear case) a cubic term. All three are
//! ladder or quadrature operations on coefficients in the oscillator
//! eigenbasis, and the shifted operator is diagonal there, so the hierarchy
//! is solved exactly in a truncated basis; nothing in this module touches a
//! radial grid.
//!
//! Outputs per mode: the first-order polynomial P_n, the second-order
//! expansion Q_n xi_1 with its compatibility constant K'_n (the O(1)
//! correction to the harmonic eigenvalue prediction), and the nonlinear
//! counterparts tau_n, J'_n entering the energy prediction at coupling G.

use crate::linear1d::{harmonic_lambda1, potential_derivative, ModeProblem};
use crate::pencil::{Pencil, SymTridiag};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Number of retained basis degrees (coefficients j = 0..J_MAX). Right-hand
/// sides here are Gaussians times low-degree polynomials, whose coefficients
/// decay geometrically; the tail check guards adequacy.
pub const DEFAULT_J_MAX: usize = 40;

/// Nodes used for every projection quadrature (exact through degree 159).
pub const QUADRATURE_NODES: usize = 80;

const SOLVABILITY_TOL: f64 = 1e-8;
const TAIL_TOL: f64 = 1e-10;

/// A function written as sum_j c_j psi_j in the orthonormal eigenfunctions
/// psi_j of -d^2/dx^2 + x^2 (eigenvalue 2j+1, psi_0 the unit Gaussian).
/// Coefficients beyond the truncation degree are dropped by every operation;
/// `tail_fraction` measures whether that loss matters.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion {
    coefficients: Vec<f64>,
}

impl HermiteExpansion {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::invalid("expansion needs at least one coefficient"));
        }
        Ok(HermiteExpansion { coefficients })
    }

    pub fn zeros(degrees: usize) -> Self {
        HermiteExpansion { coefficients: vec![0.0; degrees.max(1)] }
    }

    /// The single basis function psi_j, truncated at `degrees` coefficients.
    pub fn basis(j: usize, degrees: usize) -> Result<Self> {
        if j >= degrees {
            return Err(Error::invalid(format!("degree {j} outside truncation {degrees}")));
        }
        let mut c = vec![0.0; degrees];
        c[j] = 1.0;
        Ok(HermiteExpansion { coefficients: c })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// c_j, with zero beyond the truncation.
    pub fn coefficient(&self, j: usize) -> f64 {
        self.coefficients.get(j).copied().unwrap_or(0.0)
    }

    pub fn degrees(&self) -> usize {
        self.coefficients.len()
    }

    /// L^2(R) inner product; the basis is orthonormal.
    pub fn inner(&self, other: &Self) -> f64 {
        self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Fraction of the squared norm carried by the last four coefficients;
    /// values above ~1e-10 mean the truncation is eating the function.
    pub fn tail_fraction(&self) -> f64 {
        let total: f64 = self.coefficients.iter().map(|c| c * c).sum();
        if total == 0.0 {
            return 0.0;
        }
        let k = self.coefficients.len().saturating_sub(4);
        let tail: f64 = self.coefficients[k..].iter().map(|c| c * c).sum();
        tail / total
    }

    pub fn scale(&self, a: f64) -> Self {
        HermiteExpansion { coefficients: self.coefficients.iter().map(|c| a * c).collect() }
    }

    /// self + a * other, at the longer of the two truncations.
    pub fn add_scaled(&self, a: f64, other: &Self) -> Self {
        let n = self.degrees().max(other.degrees());
        let c = (0..n).map(|j| self.coefficient(j) + a * other.coefficient(j)).collect();
        HermiteExpansion { coefficients: c }
    }

    /// Coefficients of x * f: the ladder x psi_j = sqrt((j+1)/2) psi_{j+1}
    /// + sqrt(j/2) psi_{j-1}.
    pub fn multiply_by_x(&self) -> Self {
        let n = self.degrees();
        let mut out = vec![0.0; n];
        for (j, &cj) in self.coefficients.iter().enumerate() {
            if cj == 0.0 {
                continue;
            }
            if j + 1 < n {
                out[j + 1] += ((j as f64 + 1.0) / 2.0).sqrt() * cj;
            }
            if j >= 1 {
                out[j - 1] += (j as f64 / 2.0).sqrt() * cj;
            }
        }
        HermiteExpansion { coefficients: out }
    }

    /// Coefficients of f': psi_j' = sqrt(j/2) psi_{j-1} - sqrt((j+1)/2) psi_{j+1}.
    pub fn differentiate(&self) -> Self {
        let n = self.degrees();
        let mut out = vec![0.0; n];
        for (j, &cj) in self.coefficients.iter().enumerate() {
            if cj == 0.0 {
                continue;
            }
            if j >= 1 {
                out[j - 1] += (j as f64 / 2.0).sqrt() * cj;
            }
            if j + 1 < n {
                out[j + 1] -= ((j as f64 + 1.0) / 2.0).sqrt() * cj;
            }
        }
        HermiteExpansion { coefficients: out }
    }

    /// Coefficients of (-d^2/dx^2 + x^2 - 1) f: diagonal, entry j scaled by 2j.
    pub fn apply_shifted(&self) -> Self {
        let c = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(j, &cj)| 2.0 * j as f64 * cj)
            .collect();
        HermiteExpansion { coefficients: c }
    }

    /// Evaluate at the given points by the stable three-term recurrence
    /// psi_{k+1} = sqrt(2/(k+1)) x psi_k - sqrt(k/(k+1)) psi_{k-1}.
    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let n = self.degrees();
        x.iter()
            .map(|&xi| {
                let mut prev = 0.0;
                let mut cur = PI.powf(-0.25) * (-xi * xi / 2.0).exp();
                let mut acc = self.coefficients[0] * cur;
                for k in 0..n - 1 {
                    let next = (2.0 / (k as f64 + 1.0)).sqrt() * xi * cur
                        - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
                    prev = cur;
                    cur = next;
                    acc += self.coefficients[k + 1] * cur;
                }
                acc
            })
            .collect()
    }
}

/// Samples of the j-th oscillator eigenfunction (j >= 1, eigenvalue 2j-1);
/// xi_1 is the unit Gaussian pi^{-1/4} e^{-x^2/2}.
pub fn oscillator_eigenfunction(j: usize, x: &[f64]) -> Result<Vec<f64>> {
    if j < 1 {
        return Err(Error::invalid("eigenfunction index starts at 1"));
    }
    Ok(HermiteExpansion::basis(j - 1, j)?.evaluate(x))
}

/// The closed-form xi_1 moments used throughout the asymptotic formulas.
/// Tests verify them against Gauss-Hermite quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTable {
    /// int xi_1^4 dx = 1/sqrt(2 pi).
    pub xi1_pow4: f64,
    /// int x^2 xi_1^2 dx = 1/2.
    pub x2_xi1_sq: f64,
    /// int x^4 xi_1^2 dx = 3/4.
    pub x4_xi1_sq: f64,
}

pub fn moment_integrals() -> MomentTable {
    MomentTable {
        xi1_pow4: 1.0 / (2.0 * PI).sqrt(),
        x2_xi1_sq: 0.5,
        x4_xi1_sq: 0.75,
    }
}

/// Gauss-Hermite nodes and weights for int f(t) e^{-t^2} dt, by the
/// eigendecomposition of the Jacobi matrix (off-diagonal sqrt(k/2); node =
/// eigenvalue, weight = sqrt(pi) times the squared first component of the
/// normalized eigenvector).
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::invalid("quadrature needs at least one node"));
    }
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let p = Pencil::standard(SymTridiag::new(vec![0.0; n], off));
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 0..n {
        let t = p.eigenvalue(k)?;
        let v = p.eigenvector(t, &[])?;
        nodes.push(t);
        weights.push(PI.sqrt() * v[0] * v[0]);
    }
    Ok((nodes, weights))
}

/// Projection of xi_1^3 onto the basis: d_j = int xi_1^3 psi_j dx. Writing
/// psi_j = htilde_j(x) e^{-x^2/2} with htilde_j the orthonormal Hermite
/// polynomial, the integrand is pi^{-3/4} htilde_j(x) e^{-2x^2}, handled
/// exactly by Gauss-Hermite after x = t/sqrt(2).
pub fn xi1_cubed_coefficients(degrees: usize) -> Result<HermiteExpansion> {
    let (t, w) = gauss_hermite(QUADRATURE_NODES)?;
    let mut d = vec![0.0; degrees];
    for (&ti, &wi) in t.iter().zip(&w) {
        let x = ti / 2f64.sqrt();
        let mut prev = 0.0;
        let mut cur = PI.powf(-0.25);
        d[0] += wi * cur;
        for k in 0..degrees - 1 {
            let next = (2.0 / (k as f64 + 1.0)).sqrt() * x * cur
                - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
            d[k + 1] += wi * cur;
        }
    }
    let scale = PI.powf(-0.75) / 2f64.sqrt();
    let out = HermiteExpansion::new(d.iter().map(|v| scale * v).collect())?;
    if out.tail_fraction() > TAIL_TOL {
        return Err(Error::invalid(format!(
            "cubic projection tail {:.3e} exceeds {TAIL_TOL:.1e}; raise the truncation",
            out.tail_fraction()
        )));
    }
    Ok(out)
}

/// Solves (-d^2/dx^2 + x^2 - 1) u = rhs with <xi_1, u> = constraint_value.
/// The operator is diagonal (entry 2j) and annihilates xi_1, so the system is
/// solvable only when rhs has no xi_1 component; a violation means an
/// upstream formula error, not a numerical failure.
pub fn solve_shifted_oscillator(
    rhs: &HermiteExpansion,
    constraint_value: f64,
) -> Result<HermiteExpansion> {
    let r0 = rhs.coefficient(0);
    if r0.abs() > SOLVABILITY_TOL {
        return Err(Error::SolvabilityViolation { inner: r0, tol: SOLVABILITY_TOL });
    }
    let mut u = vec![0.0; rhs.degrees()];
    u[0] = constraint_value;
    for (j, uj) in u.iter_mut().enumerate().skip(1) {
        *uj = rhs.coefficient(j) / (2.0 * j as f64);
    }
    HermiteExpansion::new(u)
}

/// Correction problems of a mode, solved in the Hermite basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionResult {
    /// Ascending coefficients of the odd cubic P_n (entries 0 and 2 are zero).
    pub p_coeffs: [f64; 4],
    /// Expansion of Q_n xi_1, the second-order shape correction.
    pub q_expansion: HermiteExpansion,
    /// Compatibility constant of the Q_n problem: the O(1) term of the
    /// linear eigenvalue beyond the harmonic prediction.
    pub k_prime: f64,
    /// Expansion of tau_n, the first-order shape correction at coupling G.
    pub tau_expansion: HermiteExpansion,
    /// Compatibility constant of the second nonlinear order: the O(1) term
    /// of the mode energy beyond harmonic + leading interaction.
    pub j_prime: f64,
}

/// Well geometry reduced to the expansion coefficients that enter every
/// right-hand side.
struct WellBasis {
    r: f64,
    /// V_n'''(R_n) h_n^4 / 6: the cubic Taylor weight after rescaling.
    beta: f64,
    /// V_n''''(R_n) h_n^4 / 24: the quartic Taylor weight.
    g4: f64,
    xi1: HermiteExpansion,
}

fn well_basis(m: &ModeProblem, degrees: usize) -> Result<WellBasis> {
    let h4 = m.h_n.powi(4);
    let beta = potential_derivative(m, 3, m.r_n)? * h4 / 6.0;
    let g4 = potential_derivative(m, 4, m.r_n)? * h4 / 24.0;
    Ok(WellBasis { r: m.r_n, beta, g4, xi1: HermiteExpansion::basis(0, degrees)? })
}

fn cube_x(u: &HermiteExpansion) -> HermiteExpansion {
    u.multiply_by_x().multiply_by_x().multiply_by_x()
}

/// RHS of the first-order problem: xi_1'/R_n - beta x^3 xi_1 (odd, so
/// orthogonal to xi_1 exactly).
fn first_order_rhs(wb: &WellBasis) -> HermiteExpansion {
    wb.xi1.differentiate().scale(1.0 / wb.r).add_scaled(-wb.beta, &cube_x(&wb.xi1))
}

fn first_order_solution(wb: &WellBasis) -> Result<HermiteExpansion> {
    solve_shifted_oscillator(&first_order_rhs(wb), 0.0)
}

/// <xi_1, x xi_1'>/R^2 + g4 <xi_1, x^4 xi_1> - <xi_1, u'>/R + beta <xi_1, x^3 u>:
/// the shared four-term compatibility integral, with u the previous-order
/// shape (P_n xi_1 linearly, tau_n at coupling G).
fn compatibility_base(wb: &WellBasis, u: &HermiteExpansion) -> f64 {
    let x_xi1p = wb.xi1.differentiate().multiply_by_x();
    let x4_xi = cube_x(&wb.xi1).multiply_by_x();
    x_xi1p.coefficient(0) / (wb.r * wb.r) + wb.g4 * x4_xi.coefficient(0)
        - u.differentiate().coefficient(0) / wb.r
        + wb.beta * cube_x(u).coefficient(0)
}

/// The full second-order right-hand side as an expansion (its xi_1 component
/// is minus the compatibility constant).
fn second_order_rhs(wb: &WellBasis, u: &HermiteExpansion) -> HermiteExpansion {
    let x_xi1p = wb.xi1.differentiate().multiply_by_x();
    let x4_xi = cube_x(&wb.xi1).multiply_by_x();
    x_xi1p
        .scale(-1.0 / (wb.r * wb.r))
        .add_scaled(-wb.g4, &x4_xi)
        .add_scaled(1.0 / wb.r, &u.differentiate())
        .add_scaled(-wb.beta, &cube_x(u))
}

fn extract_odd_cubic(u: &HermiteExpansion, xi1: &HermiteExpansion) -> Result<[f64; 4]> {
    let x_xi = xi1.multiply_by_x();
    let x3_xi = cube_x(xi1);
    let c3 = u.coefficient(3) / x3_xi.coefficient(3);
    let c1 = (u.coefficient(1) - c3 * x3_xi.coefficient(1)) / x_xi.coefficient(1);
    let residual = u.add_scaled(-c1, &x_xi).add_scaled(-c3, &x3_xi).norm();
    let tol = 1e-10 * u.norm().max(1.0);
    if residual > tol {
        return Err(Error::NonPolynomial { residual, tol });
    }
    Ok([0.0, c1, 0.0, c3])
}

/// The odd cubic P_n with P_n xi_1 the first-order shape correction,
/// as ascending polynomial coefficients.
pub fn correction_p(m: &ModeProblem) -> Result<[f64; 4]> {
    let wb = well_basis(m, DEFAULT_J_MAX)?;
    extract_odd_cubic(&first_order_solution(&wb)?, &wb.xi1)
}

/// Compatibility constant K'_n of the second-order problem: the computable
/// O(1) correction in lambda_1n ~ V_n(R_n) + sqrt(V_n''/2) + K'_n.
pub fn compute_k_prime(m: &ModeProblem) -> Result<f64> {
    let wb = well_basis(m, DEFAULT_J_MAX)?;
    Ok(compatibility_base(&wb, &first_order_solution(&wb)?))
}

/// Second-order shape correction Q_n xi_1. Solvability of the full RHS holds
/// exactly when `k_prime` is the constant from `compute_k_prime`; anything
/// else trips the solvability check.
pub fn correction_q(m: &ModeProblem, k_prime: f64) -> Result<HermiteExpansion> {
    let wb = well_basis(m, DEFAULT_J_MAX)?;
    let u = first_order_solution(&wb)?;
    let rhs = second_order_rhs(&wb, &u).add_scaled(k_prime, &wb.xi1);
    // Constraint <xi_1, Q xi_1> = -(1/2) int P^2 xi_1^2 keeps the expansion
    // normalized through second order.
    solve_shifted_oscillator(&rhs, -0.5 * u.inner(&u))
}

/// First-order nonlinear shape tau_n and the energy compatibility constant
/// J'_n at coupling G >= 0 (G = 0 reduces both to P_n xi_1 and K'_n).
pub fn correction_tau(m: &ModeProblem, g: f64) -> Result<(HermiteExpansion, f64)> {
    if !(g >= 0.0) {
        return Err(Error::invalid(format!("coupling must be nonnegative, got {g}")));
    }
    let wb = well_basis(m, DEFAULT_J_MAX)?;
    correction_tau_in(&wb, g)
}

fn correction_tau_in(wb: &WellBasis, g: f64) -> Result<(HermiteExpansion, f64)> {
    let d3 = xi1_cubed_coefficients(wb.xi1.degrees())?;
    // Taking int xi_1^4 = d3_0 from the same quadrature makes the two G-terms
    // of the RHS cancel against xi_1 exactly.
    let i4 = d3.coefficient(0);
    let g_over = g / (PI * wb.r);
    let rhs = first_order_rhs(wb).add_scaled(g_over, &wb.xi1.scale(i4).add_scaled(-1.0, &d3));
    let tau = solve_shifted_oscillator(&rhs, 0.0)?;
    // Energy constant: the multiplier expansion carries 3G/(pi R) <xi_1^3, tau>,
    // and subtracting G times the quartic's own first-order term removes
    // 2G/(pi R) of it.
    let j_prime = compatibility_base(wb, &tau) + g_over * d3.inner(&tau);
    Ok((tau, j_prime))
}

/// Everything the asymptotic formulas need for one mode at coupling G.
pub fn compute_corrections(m: &ModeProblem, g: f64) -> Result<CorrectionResult> {
    if !(g >= 0.0) {
        return Err(Error::invalid(format!("coupling must be nonnegative, got {g}")));
    }
    let wb = well_basis(m, DEFAULT_J_MAX)?;
    let u = first_order_solution(&wb)?;
    let p_coeffs = extract_odd_cubic(&u, &wb.xi1)?;
    let k_prime = compatibility_base(&wb, &u);
    let rhs_q = second_order_rhs(&wb, &u).add_scaled(k_prime, &wb.xi1);
    let q_expansion = solve_shifted_oscillator(&rhs_q, -0.5 * u.inner(&u))?;
    let (tau_expansion, j_prime) = correction_tau_in(&wb, g)?;
    Ok(CorrectionResult { p_coeffs, q_expansion, k_prime, tau_expansion, j_prime })
}

/// Predicted ground eigenvalue V_n(R_n) + sqrt(V_n''(R_n)/2) + K'_n.
pub fn asymptotic_lambda1(m: &ModeProblem) -> f64 {
    let k_prime = compute_k_prime(m)
        .expect("linear correction problems are solvable by parity construction");
    harmonic_lambda1(m) + k_prime
}

/// Predicted nonlinear ground energy: the harmonic terms plus the leading
/// interaction G/(2 pi h_n R_n) int xi_1^4 plus J'_n.
pub fn asymptotic_gamma(m: &ModeProblem, g: f64) -> f64 {
    let (_, j_prime) =
        correction_tau(m, g).expect("nonlinear correction problems are solvable by construction");
    harmonic_lambda1(m) + g / (2.0 * PI * m.h_n * m.r_n) * moment_integrals().xi1_pow4 + j_prime
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear1d::solve_linear_modes;
    use crate::params::ScaledParams;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn mode(n: i64, omega: f64, d: f64) -> ModeProblem {
        ModeProblem::new(n, &ScaledParams::new(omega, d, 1.0).unwrap()).unwrap()
    }

    fn xgrid(lo: f64, hi: f64, n: usize) -> (Vec<f64>, f64) {
        let dx = (hi - lo) / (n as f64 - 1.0);
        ((0..n).map(|i| lo + i as f64 * dx).collect(), dx)
    }

    fn trapz(y: &[f64], dx: f64) -> f64 {
        let inner: f64 = y[1..y.len() - 1].iter().sum();
        dx * (inner + 0.5 * (y[0] + y[y.len() - 1]))
    }

    #[test]
    fn eigenfunction_examples() {
        let (x, dx) = xgrid(-8.0, 8.0, 16001);
        let xi1 = oscillator_eigenfunction(1, &x).unwrap();
        let xi2 = oscillator_eigenfunction(2, &x).unwrap();

        let sq: Vec<f64> = xi1.iter().map(|v| v * v).collect();
        assert_abs_diff_eq!(trapz(&sq, dx), 1.0, epsilon = 1e-9);

        let cross: Vec<f64> = xi1.iter().zip(&xi2).map(|(a, b)| a * b).collect();
        assert_abs_diff_eq!(trapz(&cross, dx), 0.0, epsilon = 1e-12);

        // Odd symmetry of xi_2, exact under the evaluation recurrence.
        let neg: Vec<f64> = x.iter().map(|&v| -v).collect();
        let xi2_neg = oscillator_eigenfunction(2, &neg).unwrap();
        for (a, b) in xi2.iter().zip(&xi2_neg) {
            assert_abs_diff_eq!(*a, -*b, epsilon = 1e-14);
        }

        // (-d^2/dx^2 + x^2) xi_j = (2j - 1) xi_j, finite-difference check.
        for (u, ev) in [(&xi1, 1.0), (&xi2, 3.0)] {
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 1..x.len() - 1 {
                let upp = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / (dx * dx);
                let r = -upp + x[i] * x[i] * u[i] - ev * u[i];
                num += r * r;
                den += u[i] * u[i];
            }
            assert!((num / den).sqrt() < 1e-6, "eigen-residual {:.2e}", (num / den).sqrt());
        }

        assert!(oscillator_eigenfunction(0, &x).is_err());
    }

    #[test]
    fn moments_match_quadrature_oracles() {
        let (t, w) = gauss_hermite(QUADRATURE_NODES).unwrap();
        let tab = moment_integrals();

        // int xi_1^4 = pi^{-1} int e^{-2x^2} dx, substituted to the e^{-t^2} weight.
        let quad_i4: f64 = w.iter().sum::<f64>() / (PI * 2f64.sqrt());
        assert_abs_diff_eq!(tab.xi1_pow4, quad_i4, epsilon = 1e-13);
        assert_relative_eq!(tab.xi1_pow4, 0.3989422804014327, epsilon = 1e-15);

        let quad_x2: f64 =
            t.iter().zip(&w).map(|(&ti, &wi)| wi * ti * ti).sum::<f64>() / PI.sqrt();
        assert_abs_diff_eq!(tab.x2_xi1_sq, quad_x2, epsilon = 1e-13);

        let quad_x4: f64 =
            t.iter().zip(&w).map(|(&ti, &wi)| wi * ti.powi(4)).sum::<f64>() / PI.sqrt();
        assert_abs_diff_eq!(tab.x4_xi1_sq, quad_x4, epsilon = 1e-12);

        // Odd moment vanishes by node symmetry.
        let quad_x1: f64 = t.iter().zip(&w).map(|(&ti, &wi)| wi * ti).sum::<f64>() / PI.sqrt();
        assert_abs_diff_eq!(quad_x1, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn quadrature_exact_through_degree_159() {
        // int t^{2m} e^{-t^2} dt = (2m-1)!! sqrt(pi) / 2^m, exact for 80 nodes
        // up to m = 79 (degree 158; odd degrees vanish by symmetry).
        let (t, w) = gauss_hermite(QUADRATURE_NODES).unwrap();
        for m in [0usize, 5, 40, 79] {
            let mut exact = PI.sqrt();
            for k in 1..=m {
                exact *= (2.0 * k as f64 - 1.0) / 2.0;
            }
            let quad: f64 = t.iter().zip(&w).map(|(&ti, &wi)| wi * ti.powi(2 * m as i32)).sum();
            assert_relative_eq!(quad, exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn shifted_solver_examples() {
        let zero = HermiteExpansion::zeros(DEFAULT_J_MAX);
        let u = solve_shifted_oscillator(&zero, 0.0).unwrap();
        assert_eq!(u.norm(), 0.0);

        // rhs = psi_1 (eigenvalue 3 of the unshifted operator): u = psi_1 / 2.
        let psi1 = HermiteExpansion::basis(1, DEFAULT_J_MAX).unwrap();
        let u = solve_shifted_oscillator(&psi1, 0.0).unwrap();
        assert_eq!(u.coefficient(1), 0.5);
        assert_eq!(u.add_scaled(-0.5, &psi1).norm(), 0.0);

        // rhs with an xi_1 component is rejected.
        let xi1 = HermiteExpansion::basis(0, DEFAULT_J_MAX).unwrap();
        match solve_shifted_oscillator(&xi1, 0.0) {
            Err(Error::SolvabilityViolation { inner, .. }) => assert_eq!(inner, 1.0),
            other => panic!("expected solvability violation, got {other:?}"),
        }

        // Round trip: apply the shifted operator, solve, recover coefficients.
        let mut c = vec![0.0; DEFAULT_J_MAX];
        c[0] = 0.7;
        for (j, cj) in c.iter_mut().enumerate().skip(1) {
            *cj = 1.0 / (1.0 + (j * j) as f64);
        }
        let u0 = HermiteExpansion::new(c).unwrap();
        let back = solve_shifted_oscillator(&u0.apply_shifted(), 0.7).unwrap();
        assert!(back.add_scaled(-1.0, &u0).norm() < 1e-12);
    }

    #[test]
    fn shifted_solver_matches_pointwise_ode() {
        // rhs = xi_1' expanded in the basis; verify the solution satisfies
        // -u'' + x^2 u - u = rhs on a grid, independent of the ladder algebra.
        let xi1 = HermiteExpansion::basis(0, DEFAULT_J_MAX).unwrap();
        let rhs = xi1.differentiate();
        let u = solve_shifted_oscillator(&rhs, 0.0).unwrap();
        let (x, dx) = xgrid(-10.0, 10.0, 8001);
        let uv = u.evaluate(&x);
        let rv = rhs.evaluate(&x);
        let mut resid2 = 0.0;
        for i in 2..x.len() - 2 {
            let upp = (-uv[i - 2] + 16.0 * uv[i - 1] - 30.0 * uv[i] + 16.0 * uv[i + 1]
                - uv[i + 2])
                / (12.0 * dx * dx);
            let r = -upp + (x[i] * x[i] - 1.0) * uv[i] - rv[i];
            resid2 += r * r * dx;
        }
        assert!(resid2.sqrt() < 1e-6, "ODE residual {:.2e}", resid2.sqrt());
    }

    #[test]
    fn first_order_polynomial_closed_form() {
        // At n = omega, R = 1: beta = (12 D - 24) / (12 (2 + D)) and the odd
        // cubic is -(1/(2R) + beta/2) x - (beta/6) x^3. D = 1/2 gives
        // beta = -0.6, P(x) = -0.2 x + 0.1 x^3.
        let m = mode(100, 100.0, 0.5);
        let p = correction_p(&m).unwrap();
        assert_abs_diff_eq!(p[1], -0.2, epsilon = 1e-13);
        assert_abs_diff_eq!(p[3], 0.1, epsilon = 1e-13);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[2], 0.0);

        // Off-center mode: compare against the closed form at generic R.
        let m = mode(110, 100.0, 0.5);
        let beta =
            potential_derivative(&m, 3, m.r_n).unwrap() * m.h_n.powi(4) / 6.0;
        let p = correction_p(&m).unwrap();
        assert_relative_eq!(p[1], -(0.5 / m.r_n + 0.5 * beta), epsilon = 1e-12);
        assert_relative_eq!(p[3], -beta / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn first_order_ode_residual_small() {
        // Substitute P xi_1 back into the ODE on a grid (fourth-order stencil
        // so the check is limited by the algebra, not the oracle).
        let m = mode(100, 100.0, 0.5);
        let wb = well_basis(&m, DEFAULT_J_MAX).unwrap();
        let u = first_order_solution(&wb).unwrap();
        let rhs = first_order_rhs(&wb);
        let (x, dx) = xgrid(-10.0, 10.0, 4001);
        let uv = u.evaluate(&x);
        let rv = rhs.evaluate(&x);
        let mut resid2 = 0.0;
        for i in 2..x.len() - 2 {
            let upp = (-uv[i - 2] + 16.0 * uv[i - 1] - 30.0 * uv[i] + 16.0 * uv[i + 1]
                - uv[i + 2])
                / (12.0 * dx * dx);
            let r = -upp + (x[i] * x[i] - 1.0) * uv[i] - rv[i];
            resid2 += r * r * dx;
        }
        assert!(resid2.sqrt() < 1e-8, "ODE residual {:.2e}", resid2.sqrt());
    }

    #[test]
    fn first_order_continuity_in_mode_index() {
        // Coefficients vary by O(|p - q| / omega) across the window.
        let omega = 200.0;
        let base = correction_p(&mode(200, omega, 0.5)).unwrap();
        for n in [186i64, 193, 207, 214] {
            let p = correction_p(&mode(n, omega, 0.5)).unwrap();
            let dist = (n - 200).abs() as f64;
            for k in [1usize, 3] {
                assert!(
                    (p[k] - base[k]).abs() <= 50.0 * dist / omega,
                    "coefficient {k} jumped {:.3e} over distance {dist}",
                    (p[k] - base[k]).abs()
                );
            }
        }
    }

    #[test]
    fn first_order_limit_without_cubic_term() {
        // With the V''' term removed the solution is -(1/(2R)) x xi_1.
        let m = mode(100, 100.0, 0.5);
        let wb = well_basis(&m, DEFAULT_J_MAX).unwrap();
        let rhs = wb.xi1.differentiate().scale(1.0 / wb.r);
        let u = solve_shifted_oscillator(&rhs, 0.0).unwrap();
        let p = extract_odd_cubic(&u, &wb.xi1).unwrap();
        assert_relative_eq!(p[1], -0.5 / wb.r, epsilon = 1e-13);
        assert_abs_diff_eq!(p[3], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn k_prime_examples() {
        // Closed form via the moment table: with c1, c3 the P coefficients,
        // K' = -1/(2R^2) + (3/4) g4 - (c1/2 + (3/4) c3)/R
        //      + beta ((3/4) c1 + (15/8) c3).
        for (n, omega) in [(100i64, 100.0), (110, 100.0), (230, 200.0)] {
            let m = mode(n, omega, 0.5);
            let wb = well_basis(&m, DEFAULT_J_MAX).unwrap();
            let p = correction_p(&m).unwrap();
            let closed = -0.5 / (wb.r * wb.r) + 0.75 * wb.g4
                - (0.5 * p[1] + 0.75 * p[3]) / wb.r
                + wb.beta * (0.75 * p[1] + 1.875 * p[3]);
            assert_relative_eq!(compute_k_prime(&m).unwrap(), closed, epsilon = 1e-12);
        }

        // n = omega, D = 1/2: the closed form collapses to exactly 0.29.
        let m = mode(100, 100.0, 0.5);
        assert_abs_diff_eq!(compute_k_prime(&m).unwrap(), 0.29, epsilon = 1e-13);

        // Bounded across the window at omega = 200.
        for n in 172..=228 {
            let k = compute_k_prime(&mode(n, 200.0, 0.5)).unwrap();
            assert!(k.abs() < 2.0, "K'({n}) = {k}");
        }
    }

    #[test]
    fn second_order_constraint_and_parity() {
        let m = mode(100, 100.0, 0.5);
        let wb = well_basis(&m, DEFAULT_J_MAX).unwrap();
        let u = first_order_solution(&wb).unwrap();
        let k_prime = compute_k_prime(&m).unwrap();
        let q = correction_q(&m, k_prime).unwrap();

        // Constraint restated: <xi_1, Q xi_1> = -(1/2) int (P xi_1)^2.
        assert_relative_eq!(q.coefficient(0), -0.5 * u.inner(&u), epsilon = 1e-14);

        // P xi_1 is supported on odd degrees {1, 3}; Q xi_1 is even.
        for j in 0..u.degrees() {
            if j != 1 && j != 3 {
                assert_eq!(u.coefficient(j), 0.0, "P xi_1 leaked into degree {j}");
            }
            if j % 2 == 1 {
                assert!(q.coefficient(j).abs() < 1e-10, "Q parity broken at degree {j}");
            }
        }

        // A wrong compatibility constant breaks solvability.
        assert!(matches!(
            correction_q(&m, k_prime + 0.1),
            Err(Error::SolvabilityViolation { .. })
        ));
    }

    #[test]
    fn tau_reduces_to_linear_case_at_zero_coupling() {
        let m = mode(100, 100.0, 0.5);
        let wb = well_basis(&m, DEFAULT_J_MAX).unwrap();
        let u = first_order_solution(&wb).unwrap();
        let (tau, j_prime) = correction_tau(&m, 0.0).unwrap();
        assert_eq!(tau.add_scaled(-1.0, &u).norm(), 0.0);
        assert_eq!(j_prime, compute_k_prime(&m).unwrap());
        assert!(correction_tau(&m, -1.0).is_err());
    }

    #[test]
    fn tau_constraint_and_tail_at_unit_coupling() {
        let m = mode(100, 100.0, 0.5);
        let (tau, j_prime) = correction_tau(&m, 1.0).unwrap();
        assert_eq!(tau.coefficient(0), 0.0);
        assert!(tau.tail_fraction() < 1e-10);
        assert!(j_prime.is_finite());

        let d3 = xi1_cubed_coefficients(DEFAULT_J_MAX).unwrap();
        assert!(d3.tail_fraction() < 1e-10);
        assert_relative_eq!(d3.coefficient(0), moment_integrals().xi1_pow4, epsilon = 1e-13);
    }

    #[test]
    fn doubling_truncation_changes_nothing() {
        let m = mode(100, 100.0, 0.5);
        let wb40 = well_basis(&m, DEFAULT_J_MAX).unwrap();
        let wb80 = well_basis(&m, 2 * DEFAULT_J_MAX).unwrap();

        let k40 = compatibility_base(&wb40, &first_order_solution(&wb40).unwrap());
        let k80 = compatibility_base(&wb80, &first_order_solution(&wb80).unwrap());
        assert_abs_diff_eq!(k40, k80, epsilon = 1e-10);

        let (_, j40) = correction_tau_in(&wb40, 1.0).unwrap();
        let (_, j80) = correction_tau_in(&wb80, 1.0).unwrap();
        assert_abs_diff_eq!(j40, j80, epsilon = 1e-10);
    }

    #[test]
    fn corrections_bundle_is_consistent() {
        let m = mode(99, 100.0, 0.5);
        let c = compute_corrections(&m, 1.0).unwrap();
        assert_eq!(c.p_coeffs, correction_p(&m).unwrap());
        assert_eq!(c.k_prime, compute_k_prime(&m).unwrap());
        let (tau, j_prime) = correction_tau(&m, 1.0).unwrap();
        assert_eq!(c.j_prime, j_prime);
        assert_eq!(c.tau_expansion.add_scaled(-1.0, &tau).norm(), 0.0);
        assert!(compute_corrections(&m, -0.5).is_err());
    }

    #[test]
    fn asymptotic_lambda1_examples() {
        // n = omega: V_n(R_n) = 0, so the prediction is sqrt(2D+4) omega + K'.
        let m = mode(200, 200.0, 0.5);
        let expect = 5f64.sqrt() * 200.0 + compute_k_prime(&m).unwrap();
        assert_relative_eq!(asymptotic_lambda1(&m), expect, epsilon = 1e-12);

        // Against the eigensolver at omega = 200.
        let e = solve_linear_modes(&m, &m.default_grid().unwrap()).unwrap();
        assert!(
            (e.lambda1 - asymptotic_lambda1(&m)).abs() <= 1.0,
            "prediction off by {:.3e}",
            (e.lambda1 - asymptotic_lambda1(&m)).abs()
        );

        // Convex in n about the optimum.
        let l = |n: i64| asymptotic_lambda1(&mode(n, 200.0, 0.5));
        assert!(l(195) + l(205) - 2.0 * l(200) > 0.0);
    }

    #[test]
    fn asymptotic_gamma_examples() {
        let m = mode(100, 100.0, 0.5);
        assert_eq!(asymptotic_gamma(&m, 0.0), asymptotic_lambda1(&m));

        // Interaction term at n = omega, closed form:
        // G (2D+4)^{1/4} sqrt(omega) / (2 pi sqrt(2 pi)).
        for g in [0.5, 1.0, 2.0] {
            let (_, j_prime) = correction_tau(&m, g).unwrap();
            let interaction = asymptotic_gamma(&m, g) - harmonic_lambda1(&m) - j_prime;
            let closed = g * 5f64.powf(0.25) * 100f64.sqrt() / (2.0 * PI * (2.0 * PI).sqrt());
            assert_relative_eq!(interaction, closed, epsilon = 1e-12);
        }
    }
}
