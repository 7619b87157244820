//! Per-mode nonlinear ground states.
//!
//! For a winding number n the reduced energy of a radial profile f is
//!
//! ```text
//! E_n(f) = 2 pi Int_0^inf ( |f'|^2 + V_n |f|^2 + G |f|^4 ) r dr,
//! ```
//!
//! minimized at unit mass. The minimizer Psi_n (real, nonnegative) and its
//! energy gamma_n = E_n(Psi_n) are produced by a normalized gradient flow in
//! the shared pencil discretization; the linear part of each step is implicit,
//! so the stiff centrifugal wall near r = 0 does not constrain the time step.
//!
//! All solver-side quantities (energy, multiplier, residual) live in the
//! pencil's own geometry: w = sqrt(r) f on interior nodes, mass 2 pi dr w'Bw.
//! The returned field is trapezoid-normalized like every other `RadialField`.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::grid::{RadialField, RadialGrid};
use crate::linear1d::{
    boundary_mass, check_grid_covers, embed_pencil_vector, mode_pencil_parts, select_nstar,
    ModeProblem, ModeSelection, ModeWindow,
};
use crate::params::ScaledParams;
use crate::pencil::{Pencil, SpdTridiagFactor, SymTridiag};
use crate::{Error, Result};

/// Gradient-flow controls, shared by the single-mode and coupled solvers.
///
/// The actual time step is `dt_factor * h^2` with h the oscillator width of
/// the (central) mode; an absolute step would not survive a change of omega.
#[derive(Debug, Clone, Copy)]
pub struct FlowParams {
    pub dt_factor: f64,
    pub max_iter: usize,
    /// Relative energy decrease below which the flow counts as stalled.
    pub tol_energy: f64,
    /// Euler-Lagrange residual bound, relative to the converged energy scale.
    pub tol_residual: f64,
    /// Seed for the randomized initial phases of the coupled flow; the
    /// single-mode flow is deterministic and ignores it.
    pub seed: u64,
}

impl FlowParams {
    /// Defaults for the single-mode flow (stall over 10 steps at 1e-13).
    pub fn mode_defaults() -> Self {
        FlowParams { dt_factor: 0.4, max_iter: 200_000, tol_energy: 1e-13, tol_residual: 1e-6, seed: 1 }
    }

    /// Defaults for the coupled multi-mode flow (looser: the joint problem
    /// is stiffer and the acceptance checks ask for 1e-5 residuals).
    pub fn coupled_defaults() -> Self {
        FlowParams { dt_factor: 0.4, max_iter: 200_000, tol_energy: 1e-12, tol_residual: 1e-5, seed: 1 }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.dt_factor > 0.0 && self.tol_energy > 0.0 && self.tol_residual > 0.0) {
            return Err(Error::invalid("flow tolerances and dt factor must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        Ok(())
    }
}

impl Default for FlowParams {
    fn default() -> Self {
        Self::mode_defaults()
    }
}

/// Accepted steps the energy must stay flat for before convergence is tested.
const STALL_WINDOW: usize = 10;
/// Relative energy increase treated as a genuine ascent (dt too large).
/// The floor sits above the roundoff of the energy quadratic form, whose
/// terms are O(1/spacing^2) and cancel down to the eigenvalue scale; at a
/// minimum the step noise would otherwise masquerade as ascent.
pub(crate) const ASCENT_TOL: f64 = 1e-11;
pub(crate) const MAX_HALVINGS: usize = 20;

/// Converged nonlinear ground state of one mode.
#[derive(Debug, Clone)]
pub struct NonlinearResult {
    /// gamma_n = E_n(Psi_n).
    pub gamma_n: f64,
    /// Minimizer: real, nonnegative, unit mass.
    pub psi_n: RadialField,
    /// Lagrange multiplier gamma_n + 2 pi G Int Psi^4 r dr (exact identity
    /// in the solver quadrature, not a separately fitted quantity).
    pub multiplier: f64,
    /// L^2(r dr) residual of -Psi'' - Psi'/r + V_n Psi + 2 G Psi^3 = mu Psi.
    pub el_residual: f64,
    pub iterations: usize,
}

/// E_n(f) in the solver quadrature. Accepts complex fields (the coupled
/// energy evaluates its quadratic part mode by mode through this); G couples
/// to |f|^4. No normalization is applied: E_n(c f) = c^2 quad + c^4 quart.
pub fn energy_en(f: &RadialField, m: &ModeProblem, g_coupling: f64) -> Result<f64> {
    check_grid_covers(m, &f.grid)?;
    let (p, ri) = mode_pencil_parts(m, &f.grid);
    let s = 2.0 * PI * f.grid.spacing();
    let w: Vec<num_complex::Complex64> =
        (1..f.grid.n_points - 1).map(|i| f.values[i] * f.grid.node(i).sqrt()).collect();
    let quad = p.a.quad_hermitian(&w);
    let quart: f64 = w.iter().zip(&ri).map(|(wi, &r)| wi.norm_sqr() * wi.norm_sqr() / r).sum();
    Ok(s * (quad + g_coupling * quart))
}

/// Factorization of B + dt A (SPD whenever the mode operator is positive,
/// which V_n > 0 guarantees).
pub(crate) fn step_factor(p: &Pencil, dt: f64) -> Result<SpdTridiagFactor> {
    let n = p.a.n();
    let diag: Vec<f64> = (0..n).map(|i| p.b.diag[i] + dt * p.a.diag[i]).collect();
    let off: Vec<f64> = (0..n - 1).map(|i| p.b.off[i] + dt * p.a.off[i]).collect();
    SpdTridiagFactor::new(&SymTridiag::new(diag, off))
}

/// Shared solver state in pencil coordinates.
struct ModeFlow<'a> {
    p: &'a Pencil,
    bfac: SpdTridiagFactor,
    ri: &'a [f64],
    s: f64,
    g: f64,
}

impl ModeFlow<'_> {
    fn bnormalize(&self, w: &mut [f64]) {
        let c = 1.0 / (self.s * self.p.b.quad(w, w)).sqrt();
        for x in w.iter_mut() {
            *x *= c;
        }
    }

    fn energy(&self, w: &[f64]) -> f64 {
        let quart: f64 = w.iter().zip(self.ri).map(|(&wi, &r)| wi * wi * wi * wi / r).sum();
        self.s * (self.p.a.quad(w, w) + self.g * quart)
    }

    fn quartic(&self, w: &[f64]) -> f64 {
        self.s * w.iter().zip(self.ri).map(|(&wi, &r)| wi * wi * wi * wi / r).sum::<f64>()
    }

    /// || B^{-1}(A w + 2 G w^3/r) - mu w ||_{L^2} / ||w||_B in the grid's
    /// L^2(r dr) scaling; the same shape as the linear eigenpair residual.
    fn el_residual(&self, w: &[f64], mu: f64) -> f64 {
        let mut v = self.p.a.apply(w);
        for ((vi, &wi), &r) in v.iter_mut().zip(w).zip(self.ri) {
            *vi += 2.0 * self.g * wi * wi * wi / r;
        }
        self.bfac.solve_into(&mut v);
        let ss: f64 = v.iter().zip(w).map(|(&vi, &wi)| (vi - mu * wi) * (vi - mu * wi)).sum();
        (self.s * ss).sqrt() / (self.s * self.p.b.quad(w, w)).sqrt()
    }
}

/// Minimize E_n at unit mass by semi-implicit normalized gradient flow,
/// started from the linear ground state. Converges when the relative energy
/// decrease stays below `tol_energy` across [`STALL_WINDOW`] accepted steps
/// *and* the Euler-Lagrange residual is below `tol_residual * |gamma|`.
pub fn solve_ground_state(
    m: &ModeProblem,
    g_coupling: f64,
    g: &RadialGrid,
    flow: &FlowParams,
) -> Result<NonlinearResult> {
    if g_coupling < 0.0 {
        return Err(Error::invalid("attractive coupling (G < 0) is out of scope"));
    }
    flow.validate()?;
    check_grid_covers(m, g)?;
    let (p, ri) = mode_pencil_parts(m, g);
    let s = 2.0 * PI * g.spacing();
    let fl = ModeFlow { p: &p, bfac: SpdTridiagFactor::new(&p.b)?, ri: &ri, s, g: g_coupling };

    let lam1 = p.eigenvalue(0)?;
    let mut w = p.eigenvector(lam1, &[])?;
    let imax = (0..w.len()).max_by(|&i, &j| w[i].abs().total_cmp(&w[j].abs())).unwrap();
    if w[imax] < 0.0 {
        for x in w.iter_mut() {
            *x = -*x;
        }
    }
    fl.bnormalize(&mut w);

    let mut dt = flow.dt_factor * m.h_n * m.h_n;
    let mut fac = step_factor(&p, dt)?;
    let mut e = fl.energy(&w);
    let mut history: VecDeque<f64> = VecDeque::with_capacity(STALL_WINDOW + 1);
    history.push_back(e);
    let mut halvings = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;
    let mut el_res = f64::INFINITY;
    let mut mu = 0.0;

    while iterations < flow.max_iter {
        iterations += 1;
        // Multiplier-shifted step: without the (1 + dt mu) factor the
        // renormalization rescales the linear part against the cubic term
        // and the fixed point solves the wrong-coupling equation (off by
        // 1 + dt mu); with it, stationary states are exact fixed points and
        // the shift keeps the B-norm constant to O(dt^2).
        let mu_now = e + g_coupling * fl.quartic(&w);
        let mut w2 = p.b.apply(&w);
        for ((xi, &wi), &r) in w2.iter_mut().zip(&w).zip(&ri) {
            *xi = (1.0 + dt * mu_now) * *xi
                - dt * 2.0 * g_coupling * wi * wi * wi / r;
        }
        fac.solve_into(&mut w2);
        fl.bnormalize(&mut w2);
        let e2 = fl.energy(&w2);
        if e2 > e + ASCENT_TOL * e.abs() {
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::EnergyIncrease { halvings });
            }
            dt *= 0.5;
            fac = step_factor(&p, dt)?;
            continue;
        }
        w = w2;
        e = e2;
        history.push_back(e);
        if history.len() > STALL_WINDOW + 1 {
            history.pop_front();
        }
        if history.len() == STALL_WINDOW + 1
            && history.front().unwrap() - e <= flow.tol_energy * e.abs()
        {
            mu = e + g_coupling * fl.quartic(&w);
            el_res = fl.el_residual(&w, mu);
            if el_res <= flow.tol_residual * e.abs() {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence { what: "nonlinear mode flow", iterations });
    }

    let psi_n = embed_pencil_vector(g, &w)?;
    let edge = boundary_mass(&psi_n);
    if edge > 1e-8 {
        return Err(Error::GridTooSmall { mass: edge });
    }
    let min = psi_n.real_part().into_iter().fold(f64::INFINITY, f64::min);
    if min < -1e-10 {
        // The flow preserves positivity empirically; fail loudly if not.
        return Err(Error::NegativeDensity { min });
    }
    Ok(NonlinearResult { gamma_n: e, psi_n, multiplier: mu, el_residual: el_res, iterations })
}

/// Euler-Lagrange residual of a stored result, recomputed from its public
/// fields (the profile is lifted back to pencil coordinates and the stored
/// multiplier is used). Matches the value cached by the solve.
pub fn el_residual(res: &NonlinearResult, m: &ModeProblem, g_coupling: f64) -> f64 {
    let grid = res.psi_n.grid;
    let (p, ri) = mode_pencil_parts(m, &grid);
    let s = 2.0 * PI * grid.spacing();
    let bfac = SpdTridiagFactor::new(&p.b).expect("mass matrix is SPD by construction");
    let fl = ModeFlow { p: &p, bfac, ri: &ri, s, g: g_coupling };
    let mut w: Vec<f64> =
        (1..grid.n_points - 1).map(|i| res.psi_n.values[i].re * grid.node(i).sqrt()).collect();
    fl.bnormalize(&mut w);
    fl.el_residual(&w, res.multiplier)
}

/// gamma_n over a mode window, with the same argmin/parabola selection that
/// the linear table uses.
#[derive(Debug, Clone)]
pub struct GammaProfile {
    /// (n, gamma_n), ascending in n.
    pub entries: Vec<(i64, f64)>,
    pub selection: ModeSelection,
}

/// Solve every mode in the window (parallel over n, each on its own default
/// grid) and select the optimal index. Any per-mode failure aborts the whole
/// sweep, naming the failing mode.
pub fn gamma_profile(
    params: &ScaledParams,
    window: &ModeWindow,
    flow: &FlowParams,
) -> Result<GammaProfile> {
    let entries: Vec<(i64, f64)> = window
        .indices()
        .collect::<Vec<i64>>()
        .into_par_iter()
        .map(|n| {
            let m = ModeProblem::new(n, params)?;
            let g = m.default_grid()?;
            let res = solve_ground_state(&m, params.g_coupling, &g, flow)
                .map_err(|e| Error::invalid(format!("mode {n}: {e}")))?;
            Ok((n, res.gamma_n))
        })
        .collect::<Result<Vec<_>>>()?;
    let selection = select_nstar(params.omega, params.d_omega, window, &entries)?;
    Ok(GammaProfile { entries, selection })
}
