//! Per-mode linear problems: the effective radial potential V_n, its well
//! location R_n and oscillator width h_n, the two lowest eigenpairs, the mode
//! window, and selection of the optimal winding number.
//!
//! The radial operator -f'' - f'/r + V_n f on L^2(r dr) is symmetrized by
//! w = sqrt(r) f into -w'' + (V_n - 1/(4r^2)) w on L^2(dr) with Dirichlet
//! ends, then discretized by the fourth-order two-matrix scheme of `pencil`.

use crate::fit::{fit_parabola, golden_min};
use crate::grid::{build_grid, RadialField, RadialGrid, DEFAULT_PPW, DEFAULT_WIDTH, R_MIN_CLAMP};
use crate::params::ScaledParams;
use crate::pencil::{Pencil, SpdTridiagFactor, SymTridiag};
use crate::{Error, Result};
use num_complex::Complex64;

/// One angular mode n with its derived well location and width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeProblem {
    pub n: i64,
    pub omega: f64,
    pub d_omega: f64,
    /// Minimum of V_n: the positive root of R^6 + ((1-D)/D) R^4 = n^2/(D w^2).
    pub r_n: f64,
    /// Oscillator width (2 / V_n''(R_n))^(1/4).
    pub h_n: f64,
}

impl ModeProblem {
    pub fn new(n: i64, p: &ScaledParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid(
                "mode 0 has its well at r = 0 and no oscillator width; not representable",
            ));
        }
        let r_n = solve_rn(n, p.omega, p.d_omega)?;
        let vpp = second_derivative_at(n, p.omega, p.d_omega, r_n);
        if !(vpp > 0.0) {
            return Err(Error::invalid("potential curvature not positive at the well"));
        }
        let h_n = (2.0 / vpp).powf(0.25);
        Ok(ModeProblem { n, omega: p.omega, d_omega: p.d_omega, r_n, h_n })
    }

    /// Grid covering [R_n - width h_n, R_n + width h_n] (left end clamped).
    pub fn grid(&self, width: f64, points_per_width: usize) -> Result<RadialGrid> {
        build_grid(self.r_n, self.h_n, width, points_per_width)
    }

    pub fn default_grid(&self) -> Result<RadialGrid> {
        self.grid(DEFAULT_WIDTH, DEFAULT_PPW)
    }
}

/// Positive root of R^6 + ((1-D)/D) R^4 = n^2 / (D omega^2), by Newton.
/// Depends on n only through n^2; n = 0 gives the degenerate root 0.
pub fn solve_rn(n: i64, omega: f64, d_omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !(d_omega > 0.0 && d_omega <= 1.0) {
        return Err(Error::invalid("need omega > 0 and D in (0, 1]"));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let a = (1.0 - d_omega) / d_omega;
    let b = (n as f64) * (n as f64) / (d_omega * omega * omega);
    let mut r = b.powf(1.0 / 6.0).max(1e-3);
    for _ in 0..200 {
        let f = r.powi(6) + a * r.powi(4) - b;
        let fp = 6.0 * r.powi(5) + 4.0 * a * r.powi(3);
        let step = f / fp;
        r -= step;
        if step.abs() < 1e-15 * r {
            break;
        }
    }
    let resid = (r.powi(6) + a * r.powi(4) - b).abs();
    if resid > 1e-12 * b {
        return Err(Error::NonConvergence { what: "well location", iterations: 200 });
    }
    Ok(r)
}

/// V_n(r) = n^2/r^2 - 2 n w + (1-D) w^2 r^2 + D w^2 / 2 + (D/2) w^2 r^4.
pub fn potential(m: &ModeProblem, r: f64) -> f64 {
    assert!(r > 0.0, "potential evaluated at r <= 0");
    let (n, w, d) = (m.n as f64, m.omega, m.d_omega);
    n * n / (r * r) - 2.0 * n * w + (1.0 - d) * w * w * r * r
        + d * w * w / 2.0
        + 0.5 * d * w * w * r.powi(4)
}

/// Same potential written as trap-well plus rotation term:
/// (D/2) w^2 (r^2-1)^2 + (n/r - w r)^2.
pub fn potential_well_form(m: &ModeProblem, r: f64) -> f64 {
    assert!(r > 0.0, "potential evaluated at r <= 0");
    let (n, w, d) = (m.n as f64, m.omega, m.d_omega);
    let rot = n / r - w * r;
    0.5 * d * w * w * (r * r - 1.0) * (r * r - 1.0) + rot * rot
}

fn second_derivative_at(n: i64, omega: f64, d_omega: f64, r: f64) -> f64 {
    let nn = (n as f64) * (n as f64);
    6.0 * nn / r.powi(4) + 2.0 * (1.0 - d_omega) * omega * omega
        + 6.0 * d_omega * omega * omega * r * r
}

/// Analytic derivative of V_n of order 2, 3, or 4 at a point.
pub fn potential_derivative(m: &ModeProblem, order: u8, at: f64) -> Result<f64> {
    if !(at > 0.0) {
        return Err(Error::invalid("derivative evaluated at r <= 0"));
    }
    let (w, d) = (m.omega, m.d_omega);
    let nn = (m.n as f64) * (m.n as f64);
    match order {
        2 => Ok(second_derivative_at(m.n, w, d, at)),
        3 => Ok(-24.0 * nn / at.powi(5) + 12.0 * d * w * w * at),
        4 => Ok(120.0 * nn / at.powi(6) + 12.0 * d * w * w),
        _ => Err(Error::invalid(format!("unsupported derivative order {order}"))),
    }
}

/// Harmonic two-term prediction V_n(R_n) + sqrt(V_n''(R_n)/2) for the ground
/// eigenvalue; the asymptotic formulas add their O(1) constants to this.
pub fn harmonic_lambda1(m: &ModeProblem) -> f64 {
    let vpp = second_derivative_at(m.n, m.omega, m.d_omega, m.r_n);
    potential(m, m.r_n) + (vpp / 2.0).sqrt()
}

/// The two lowest eigenpairs of the radial mode operator.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Ground state: real, unit mass, nonnegative.
    pub g1: RadialField,
    /// First excited state: real, unit mass, orthogonal to g1.
    pub g2: RadialField,
    /// Operator residuals of the two pairs in L^2(r dr).
    pub residual_norms: [f64; 2],
}

/// Builds the two-matrix discretization of the symmetrized mode operator on
/// the interior nodes of g (Dirichlet at both ends).
pub(crate) fn mode_pencil(m: &ModeProblem, g: &RadialGrid) -> Pencil {
    mode_pencil_parts(m, g).0
}

pub(crate) fn mode_pencil_parts(m: &ModeProblem, g: &RadialGrid) -> (Pencil, Vec<f64>) {
    let ri: Vec<f64> = (1..g.n_points - 1).map(|i| g.node(i)).collect();
    let q: Vec<f64> = ri.iter().map(|&r| potential(m, r) - 1.0 / (4.0 * r * r)).collect();
    (numerov_pencil(&q, g.spacing()), ri)
}

/// Fourth-order pencil A w = lambda B w for -w'' + q w with Dirichlet ends.
pub(crate) fn numerov_pencil(q: &[f64], dr: f64) -> Pencil {
    let nint = q.len();
    let a_diag: Vec<f64> = q.iter().map(|&qi| 2.0 / (dr * dr) + 10.0 / 12.0 * qi).collect();
    let a_off: Vec<f64> =
        (0..nint - 1).map(|i| -1.0 / (dr * dr) + (q[i] + q[i + 1]) / 24.0).collect();
    let b = SymTridiag::new(vec![10.0 / 12.0; nint], vec![1.0 / 12.0; nint - 1]);
    Pencil::new(SymTridiag::new(a_diag, a_off), b)
}

pub(crate) fn check_grid_covers(m: &ModeProblem, g: &RadialGrid) -> Result<()> {
    let left_needed = (m.r_n - 8.0 * m.h_n).max(R_MIN_CLAMP);
    if g.r_min > left_needed + 1e-9 || g.r_max < m.r_n + 8.0 * m.h_n - 1e-9 {
        return Err(Error::invalid(format!(
            "grid [{}, {}] does not cover the mode well [{left_needed}, {}]",
            g.r_min,
            g.r_max,
            m.r_n + 8.0 * m.h_n
        )));
    }
    Ok(())
}

/// Embeds an interior pencil vector w back to a full-grid field f = w/sqrt(r),
/// normalized to unit mass, with the dominant-component sign made positive.
pub(crate) fn embed_pencil_vector(g: &RadialGrid, w: &[f64]) -> Result<RadialField> {
    let mut vals = vec![0.0; g.n_points];
    let mut imax = 0usize;
    let mut vmax = 0.0f64;
    for (i, &wi) in w.iter().enumerate() {
        if wi.abs() > vmax {
            vmax = wi.abs();
            imax = i;
        }
        vals[i + 1] = wi / g.node(i + 1).sqrt();
    }
    let sign = if w[imax] < 0.0 { -1.0 } else { 1.0 };
    for v in vals.iter_mut() {
        *v *= sign;
    }
    RadialField::from_real(*g, vals)?.normalize()
}

pub(crate) fn boundary_mass(f: &RadialField) -> f64 {
    let g = f.grid;
    let d = g.spacing();
    let mut s = 0.0;
    for i in (0..3).chain(g.n_points - 3..g.n_points) {
        let w = if i == 0 || i == g.n_points - 1 { 0.5 } else { 1.0 };
        s += w * f.values[i].norm_sqr() * g.node(i);
    }
    2.0 * std::f64::consts::PI * s * d
}

/// Lowest eigenvalue only (no eigenvector); for window sweeps.
pub fn lowest_eigenvalue(m: &ModeProblem, g: &RadialGrid) -> Result<f64> {
    check_grid_covers(m, g)?;
    mode_pencil(m, g).eigenvalue(0)
}

/// The two lowest eigenpairs of the mode problem on the given grid.
pub fn solve_linear_modes(m: &ModeProblem, g: &RadialGrid) -> Result<EigenResult> {
    check_grid_covers(m, g)?;
    let p = mode_pencil(m, g);
    let s = 2.0 * std::f64::consts::PI * g.spacing();

    let mut lam1 = p.eigenvalue(0)?;
    let w1 = p.eigenvector(lam1, &[])?;
    lam1 = p.rayleigh(&w1);
    let mut lam2 = p.eigenvalue(1)?;
    let w2 = p.eigenvector(lam2, &[w1.clone()])?;
    lam2 = p.rayleigh(&w2);
    if !(lam1 < lam2) {
        return Err(Error::NonConvergence { what: "eigenvalue ordering", iterations: 0 });
    }

    let bfac = SpdTridiagFactor::new(&p.b)?;
    let resid = |w: &[f64], lam: f64| -> f64 {
        let bn = p.b.quad(w, w);
        let mut rho = p.a.apply(w);
        bfac.solve_into(&mut rho);
        let ss: f64 = rho.iter().zip(w).map(|(h, wi)| (h - lam * wi) * (h - lam * wi)).sum();
        (s * ss).sqrt() / (s * bn).sqrt()
    };
    let residual_norms = [resid(&w1, lam1), resid(&w2, lam2)];

    let g1 = embed_pencil_vector(g, &w1)?;
    let g2 = embed_pencil_vector(g, &w2)?;
    let edge = boundary_mass(&g1);
    if edge > 1e-8 {
        return Err(Error::GridTooSmall { mass: edge });
    }
    Ok(EigenResult { lambda1: lam1, lambda2: lam2, g1, g2, residual_norms })
}

/// Inner product 2 pi Int f conj(g) r dr in the fourth-order quadrature
/// induced by the eigensolver mass matrix (Dirichlet convention: end nodes
/// carry no weight). Distinct eigenpairs from solve_linear_modes are
/// orthogonal in this product to machine precision; the trapezoidal
/// RadialField::inner agrees with it only to O(spacing^2).
pub fn mass_matrix_inner(f: &RadialField, g: &RadialField) -> Result<Complex64> {
    if f.grid != g.grid {
        return Err(Error::invalid("inner product requires a shared grid"));
    }
    let gr = f.grid;
    let n = gr.n_points;
    let wf: Vec<Complex64> =
        (1..n - 1).map(|i| f.values[i] * gr.node(i).sqrt()).collect();
    let wg: Vec<Complex64> =
        (1..n - 1).map(|i| g.values[i] * gr.node(i).sqrt()).collect();
    let m = wf.len();
    let mut acc = Complex64::ZERO;
    for i in 0..m {
        acc += 10.0 / 12.0 * wf[i] * wg[i].conj();
    }
    for i in 0..m - 1 {
        acc += 1.0 / 12.0 * (wf[i] * wg[i + 1].conj() + wf[i + 1] * wg[i].conj());
    }
    Ok(2.0 * std::f64::consts::PI * gr.spacing() * acc)
}

/// Ground state rescaled to well coordinates x = (r - R_n)/h_n and
/// normalized in L^2(dx): g1(R_n + h_n x) = c * xi(x).
#[derive(Debug, Clone)]
pub struct BlowUpProfile {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    /// The matching constant; c^2 * 2 pi h_n R_n tends to 1.
    pub c: f64,
}

pub fn blow_up_profile(e: &EigenResult, m: &ModeProblem) -> BlowUpProfile {
    let g = e.g1.grid;
    let x: Vec<f64> = (0..g.n_points).map(|i| (g.node(i) - m.r_n) / m.h_n).collect();
    let raw = e.g1.real_part();
    let dx = g.spacing() / m.h_n;
    let mut nrm2 = 0.0;
    for (i, &v) in raw.iter().enumerate() {
        let w = if i == 0 || i == g.n_points - 1 { 0.5 } else { 1.0 };
        nrm2 += w * v * v * dx;
    }
    let c = nrm2.sqrt();
    let xi = raw.iter().map(|&v| v / c).collect();
    BlowUpProfile { x, xi, c }
}

/// The window of competitive winding numbers {n : |n - omega| <= a sqrt(omega)}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeWindow {
    pub a_constant: f64,
    pub n_lo: i64,
    pub n_hi: i64,
    /// Every mode outside the window has ground energy above this floor.
    pub complement_floor: f64,
}

impl ModeWindow {
    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.n_lo..=self.n_hi
    }

    /// Number of modes in the window (construction rejects empty windows).
    pub fn len(&self) -> usize {
        (self.n_hi - self.n_lo + 1) as usize
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.n_lo..=self.n_hi).contains(&n)
    }
}

pub fn mode_window(omega: f64, a_constant: f64) -> Result<ModeWindow> {
    if !(omega > 0.0 && a_constant > 0.0) {
        return Err(Error::invalid("need omega > 0 and a > 0"));
    }
    let half = a_constant * omega.sqrt();
    let n_lo = (omega - half).ceil() as i64;
    let n_hi = (omega + half).floor() as i64;
    if n_lo > n_hi {
        return Err(Error::invalid(format!(
            "window |n - {omega}| <= {half} contains no integer"
        )));
    }
    Ok(ModeWindow { a_constant, n_lo, n_hi, complement_floor: 6.0_f64.sqrt() * omega })
}

/// Continuum cost whose minimum over R reproduces the best mode energy:
/// with N(R) = w R^2 sqrt(D R^2 + 1 - D) the index whose well sits at R,
/// C(R) = V_{N(R)}(R) + sqrt(V_{N(R)}''(R)/2), expanded in closed form.
pub fn cost_function(r: f64, omega: f64, d_omega: f64) -> f64 {
    assert!(r > 0.0, "cost evaluated at R <= 0");
    let (w, d) = (omega, d_omega);
    let r2 = r * r;
    let pot = w * w
        * (1.5 * d * r2 * r2 + 2.0 * (1.0 - d) * r2 + 0.5 * d
            - 2.0 * r2 * (d * r2 + 1.0 - d).sqrt());
    pot + w * (6.0 * d * r2 + 4.0 * (1.0 - d)).sqrt()
}

/// Real-valued mode index whose well sits at R.
pub fn index_of_well(r: f64, omega: f64, d_omega: f64) -> f64 {
    omega * r * r * (d_omega * r * r + 1.0 - d_omega).sqrt()
}

/// Optimal mode choice from a table of ground eigenvalues over the window.
#[derive(Debug, Clone, Copy)]
pub struct ModeSelection {
    pub n_star: i64,
    /// Minimizer of the continuum cost.
    pub r_min: f64,
    /// Real-valued optimal index N(R_min); n_star tracks its rounding.
    pub n_real: f64,
    /// Fitted coefficient of (n - n_star)^2 in lambda_1,n.
    pub quadratic_coeff: f64,
    pub fit_r2: f64,
    /// Two modes tie for the minimum within 1e-6 omega; n_star is the smaller.
    pub degenerate: bool,
}

pub fn select_nstar(
    omega: f64,
    d_omega: f64,
    window: &ModeWindow,
    eigen_table: &[(i64, f64)],
) -> Result<ModeSelection> {
    if eigen_table.is_empty() {
        return Err(Error::invalid("empty eigenvalue table"));
    }
    for n in window.indices() {
        if !eigen_table.iter().any(|&(k, _)| k == n) {
            return Err(Error::invalid(format!("eigenvalue table misses window mode {n}")));
        }
    }
    let mut sorted: Vec<(i64, f64)> = eigen_table.to_vec();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let degenerate = sorted.len() >= 2 && sorted[1].1 - sorted[0].1 < 1e-6 * omega;
    let n_star = if degenerate {
        sorted[0].0.min(sorted[1].0)
    } else {
        sorted[0].0
    };
    let (r_min, _) = golden_min(|r| cost_function(r, omega, d_omega), 0.3, 3.0, 1e-12);
    let n_real = index_of_well(r_min, omega, d_omega);
    let xs: Vec<f64> = eigen_table.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = eigen_table.iter().map(|&(_, l)| l).collect();
    let fit = fit_parabola(&xs, &ys);
    Ok(ModeSelection {
        n_star,
        r_min,
        n_real,
        quadratic_coeff: fit.a2,
        fit_r2: fit.r2,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(omega: f64, d: f64) -> ScaledParams {
        ScaledParams::new(omega, d, 1.0).unwrap()
    }

    fn mode(n: i64, omega: f64, d: f64) -> ModeProblem {
        ModeProblem::new(n, &params(omega, d)).unwrap()
    }

    #[test]
    fn well_location_examples() {
        // n = omega puts the well exactly at r = 1, for any D.
        for d in [0.3, 0.5, 0.9] {
            let r = solve_rn(100, 100.0, d).unwrap();
            assert_relative_eq!(r, 1.0, epsilon = 1e-13);
        }
        // D = 1 closed form (n/omega)^(1/3) ... for R^6 = n^2/omega^2.
        let r = solve_rn(27, 100.0, 1.0).unwrap();
        assert_relative_eq!(r, (27.0f64 / 100.0).powf(1.0 / 3.0), epsilon = 1e-13);
        // n = 0 degenerates to the origin.
        assert_eq!(solve_rn(0, 100.0, 0.5).unwrap(), 0.0);
        assert!(ModeProblem::new(0, &params(100.0, 0.5)).is_err());
        // Defining equation satisfied to 1e-12 relative.
        let m = mode(93, 100.0, 0.5);
        let lhs = m.r_n.powi(6) + ((1.0 - 0.5) / 0.5) * m.r_n.powi(4);
        let rhs = 93.0f64 * 93.0 / (0.5 * 100.0 * 100.0);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn potential_examples() {
        let m = mode(100, 100.0, 0.5);
        // Both summands of the well form vanish at r = 1 when n = omega.
        assert!(potential(&m, 1.0).abs() <= 1e-10 * m.omega * m.omega);
        // Hand arithmetic at n = 0 is blocked by ModeProblem; emulate with n in
        // the formula directly: V_0(1) for D = 1/2, omega = 10 is 100.
        let m0 = ModeProblem { n: 0, omega: 10.0, d_omega: 0.5, r_n: 0.0, h_n: 0.0 };
        assert_relative_eq!(potential(&m0, 1.0), 100.0, epsilon = 1e-12);
        // The two algebraic forms agree.
        for i in 0..100 {
            let r = 0.3 + 0.02 * i as f64;
            let a = potential(&m, r);
            let b = potential_well_form(&m, r);
            assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-8);
        }
    }

    #[test]
    fn oscillator_width_examples() {
        // n = omega: h = (2D+4)^(-1/4) omega^(-1/2).
        let m = mode(100, 100.0, 0.5);
        assert_relative_eq!(m.h_n, 5.0f64.powf(-0.25) / 10.0, epsilon = 1e-14);
        assert_relative_eq!(m.h_n, 0.066874, epsilon = 1e-6);
        // V''(1) = 4 omega^2 (2 + D) there.
        let vpp = potential_derivative(&m, 2, m.r_n).unwrap();
        assert_relative_eq!(vpp, 4.0 * 1e4 * 2.5, epsilon = 1e-6);
        // h scales like omega^(-1/2) at fixed n/omega.
        let m4 = mode(400, 400.0, 0.5);
        assert_relative_eq!(m4.h_n / m.h_n, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = mode(93, 100.0, 0.5);
        let stencil = |f: &dyn Fn(f64) -> f64, r: f64, k: u8, h: f64| -> f64 {
            match k {
                2 => (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h),
                3 => (f(r + 2.0 * h) - 2.0 * f(r + h) + 2.0 * f(r - h) - f(r - 2.0 * h))
                    / (2.0 * h * h * h),
                4 => (f(r + 2.0 * h) - 4.0 * f(r + h) + 6.0 * f(r) - 4.0 * f(r - h)
                    + f(r - 2.0 * h))
                    / (h * h * h * h),
                _ => unreachable!(),
            }
        };
        // One Richardson step removes the h^2 truncation term, which is not
        // small against 1e-5 near the centrifugal wall; the step stays coarse
        // because the fourth-difference quotient amplifies roundoff by h^-4.
        let fd = |f: &dyn Fn(f64) -> f64, r: f64, k: u8| -> f64 {
            let h = 1e-2;
            (4.0 * stencil(f, r, k, h) - stencil(f, r, k, 2.0 * h)) / 3.0
        };
        let v = |r: f64| potential(&m, r);
        for order in [2u8, 3, 4] {
            for r in [0.8, 1.0, 1.2] {
                let exact = potential_derivative(&m, order, r).unwrap();
                assert_relative_eq!(exact, fd(&v, r, order), max_relative = 1e-5);
            }
        }
        assert!(potential_derivative(&m, 5, 1.0).is_err());
    }

    #[test]
    fn eigenpairs_at_moderate_omega() {
        let m = mode(50, 50.0, 0.5);
        let g = m.default_grid().unwrap();
        let e = solve_linear_modes(&m, &g).unwrap();
        // Leading law with O(1) remainder.
        assert!((e.lambda1 - 5.0f64.sqrt() * 50.0).abs() < 10.0);
        assert!(e.lambda1 < e.lambda2);
        // Gap approaches 2 sqrt(V''/2).
        let gap = (e.lambda2 - e.lambda1) / (potential_derivative(&m, 2, m.r_n).unwrap() / 2.0).sqrt();
        assert!((gap - 2.0).abs() < 0.2, "gap ratio {gap}");
        // Ground state sign and masses.
        assert!(e.g1.values.iter().all(|v| v.re >= -1e-10));
        assert_relative_eq!(e.g1.mass(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(e.g2.mass(), 1.0, epsilon = 1e-10);
        // Orthogonality in the discretization's own inner product.
        let ip = mass_matrix_inner(&e.g1, &e.g2).unwrap();
        assert!(ip.norm() < 1e-8, "inner product {ip}");
        // Operator residuals.
        assert!(e.residual_norms[0] < 1e-6 * e.lambda1.abs());
        assert!(e.residual_norms[1] < 1e-6 * e.lambda2.abs());
        // lambda1 above the potential floor.
        assert!(e.lambda1 >= potential(&m, m.r_n));
        // g2 changes sign exactly once away from the underflow tails.
        let vals = e.g2.real_part();
        let vmax = vals.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
        let big: Vec<f64> = vals.iter().cloned().filter(|v| v.abs() > 1e-10 * vmax).collect();
        let flips = big.windows(2).filter(|p| p[0] * p[1] < 0.0).count();
        assert_eq!(flips, 1);
    }

    #[test]
    fn grid_refinement_agreement() {
        let m = mode(50, 50.0, 0.5);
        let a = lowest_eigenvalue(&m, &m.grid(15.0, 40).unwrap()).unwrap();
        let b = lowest_eigenvalue(&m, &m.grid(20.0, 80).unwrap()).unwrap();
        assert!((a - b).abs() <= 1e-7 * b.abs(), "lam1 {a} vs {b}");
    }

    #[test]
    fn undersized_grid_is_rejected() {
        let m = mode(50, 50.0, 0.5);
        let tight = RadialGrid::new(m.r_n - 5.0 * m.h_n, m.r_n + 5.0 * m.h_n, 300).unwrap();
        assert!(solve_linear_modes(&m, &tight).is_err());
    }

    #[test]
    fn blow_up_profile_matches_gaussian() {
        let m = mode(50, 50.0, 0.5);
        let e = solve_linear_modes(&m, &m.default_grid().unwrap()).unwrap();
        let b = blow_up_profile(&e, &m);
        // Unit L^2(dx) mass by construction.
        let dx = b.x[1] - b.x[0];
        let mass: f64 = b
            .xi
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let w = if i == 0 || i == b.xi.len() - 1 { 0.5 } else { 1.0 };
                w * v * v * dx
            })
            .sum();
        assert_relative_eq!(mass, 1.0, epsilon = 1e-8);
        // Matching constant c^2 2 pi h R -> 1.
        let c2 = b.c * b.c * 2.0 * std::f64::consts::PI * m.h_n * m.r_n;
        assert!((c2 - 1.0).abs() < 0.05, "c^2 2 pi h R = {c2}");
        // Close to the Gaussian ground profile.
        let dist2: f64 = b
            .x
            .iter()
            .zip(&b.xi)
            .map(|(&x, &v)| {
                let gauss = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
                (v - gauss) * (v - gauss) * dx
            })
            .sum();
        assert!(dist2.sqrt() < 0.2, "distance {}", dist2.sqrt());
    }

    #[test]
    fn window_examples() {
        let w = mode_window(100.0, 2.0).unwrap();
        assert_eq!((w.n_lo, w.n_hi), (80, 120));
        assert_eq!(w.len(), 41);
        // Small a keeps only the immediate neighbors of n = omega.
        let w = mode_window(100.0, 0.1).unwrap();
        assert_eq!((w.n_lo, w.n_hi), (99, 101));
        assert_relative_eq!(w.complement_floor, 6.0f64.sqrt() * 100.0);
        assert!(w.contains(100) && !w.contains(98));
        assert!(mode_window(0.05, 0.1).is_err());
    }

    #[test]
    fn cost_function_identities() {
        let (omega, d) = (100.0, 0.5);
        // C at R_n reproduces the harmonic two-term level of mode n.
        for n in [90i64, 100, 111] {
            let m = mode(n, omega, d);
            assert_relative_eq!(
                cost_function(m.r_n, omega, d),
                harmonic_lambda1(&m),
                max_relative = 1e-12
            );
        }
        // C(1) = sqrt(2D+4) omega; the omega^2 bracket cancels exactly in
        // real arithmetic, leaving an O(eps omega^2) floating-point residue.
        for d in [0.3, 0.5, 0.9] {
            assert_abs_diff_eq!(
                cost_function(1.0, omega, d),
                (2.0 * d + 4.0).sqrt() * omega,
                epsilon = 64.0 * f64::EPSILON * omega * omega
            );
        }
        // Minimizer close to 1, value close to C(1).
        for omega in [50.0, 100.0, 400.0] {
            let (r_min, c_min) = golden_min(|r| cost_function(r, omega, 0.5), 0.3, 3.0, 1e-12);
            assert!((r_min - 1.0).abs() <= 5.0 / omega, "R_min {r_min} at omega {omega}");
            assert!((c_min / (5.0f64.sqrt() * omega) - 1.0).abs() < 10.0 / omega);
        }
    }

    #[test]
    fn selection_from_harmonic_table() {
        let (omega, d) = (100.0, 0.5);
        let w = mode_window(omega, 2.0).unwrap();
        let table: Vec<(i64, f64)> =
            w.indices().map(|n| (n, harmonic_lambda1(&mode(n, omega, d)))).collect();
        let sel = select_nstar(omega, d, &w, &table).unwrap();
        assert_eq!(sel.n_star, sel.n_real.round() as i64);
        assert!((sel.n_star - 100).abs() <= 2);
        assert!(sel.quadratic_coeff > 0.0);
        assert!(sel.fit_r2 > 0.999);
        assert!((sel.n_star as f64 - sel.n_real).abs() <= 1.0);
        assert!(select_nstar(omega, d, &w, &[]).is_err());
    }
}
