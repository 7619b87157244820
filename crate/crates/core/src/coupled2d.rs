//! The full rotating problem on a truncated mode window.
//!
//! A state is u(r, theta) = sum_n f_n(r) e^{i n theta} with n running over a
//! contiguous window [n_lo, n_hi]. Its energy splits exactly into per-mode
//! quadratic pieces plus one interaction term,
//!
//! ```text
//! F(u)      = sum_n 2 pi Int (|f_n'|^2 + V_n |f_n|^2) r dr  +  G Int |u|^4,
//! Int |u|^4 = 2 pi sum_k Int |sigma_k|^2 r dr,   sigma_k = sum_p f_p conj(f_{p-k}),
//! ```
//!
//! so nothing here is two-dimensional: the interaction is a mode convolution,
//! never a polar quadrature. Minimization runs the same multiplier-shifted
//! semi-implicit flow as the single-mode solver, on all modes jointly under
//! one global mass constraint.
//!
//! Conventions match the rest of the crate: public states carry
//! trapezoid-normalized fields with total mass 1, while the flow and the
//! reported energy/multiplier/residual live in the pencil geometry on
//! w_n = sqrt(r) f_n. The two differ by the usual O(spacing^2) quadrature gap.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::grid::{integrate_rdr, RadialField, RadialGrid};
use crate::linear1d::{mode_pencil_parts, ModeProblem};
use crate::nonlinear1d::{step_factor, FlowParams, ASCENT_TOL, MAX_HALVINGS};
use crate::params::ScaledParams;
use crate::pencil::{Pencil, SpdTridiagFactor};
use crate::{Error, Result};

/// Accepted steps the energy must stay flat for before convergence is tested.
/// Wider than the single-mode window: mass trades between modes on a slower
/// clock than shape relaxes within one mode.
const STALL_WINDOW: usize = 20;
/// Accepted steps between Euler-Lagrange residual evaluations once the
/// energy has stalled. Evaluation-noise in the energy (tens of ulp per step)
/// can trip the stall test well before the slow modes have drained, so the
/// residual is the arbiter; rechecking it every step would double the cost
/// of the tail of the flow.
const RES_CHECK_INTERVAL: usize = 200;

/// Energy of a state, split the way the functional itself splits.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyBreakdown {
    /// (n, quadratic part of mode n). The interaction enters once, through
    /// `quartic`, never per mode.
    pub per_mode: Vec<(i64, f64)>,
    /// Int |u|^4 over the plane (without the G factor).
    pub quartic: f64,
    /// sum per_mode + G * quartic.
    pub total: f64,
}

/// A truncated-mode condensate. Fields are public data; the invariants
/// (shared grid, contiguous window, n_lo >= 1) are established at
/// construction and preserved by everything in this module.
#[derive(Debug, Clone)]
pub struct CondensateState {
    pub params: ScaledParams,
    pub n_lo: i64,
    pub n_hi: i64,
    /// Mode profiles, index j holding n = n_lo + j, all on one grid.
    pub modes: Vec<RadialField>,
    /// 2 pi sum_n Int |f_n|^2 r dr (trapezoid), cached at construction.
    pub total_mass: f64,
    /// Filled by the minimizer; `energy_f_omega` computes it fresh.
    pub energy_cache: Option<EnergyBreakdown>,
}

impl CondensateState {
    pub fn new(params: ScaledParams, n_lo: i64, modes: Vec<RadialField>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::invalid("a state needs at least one mode"));
        }
        if n_lo < 1 {
            return Err(Error::invalid(format!(
                "mode window must stay at n >= 1 (got n_lo = {n_lo}); the well of mode 0 \
                 degenerates to r = 0"
            )));
        }
        let g0 = modes[0].grid;
        if modes.iter().any(|f| f.grid != g0) {
            return Err(Error::invalid("all modes must share one grid"));
        }
        let n_hi = n_lo + modes.len() as i64 - 1;
        let total_mass = modes.iter().map(|f| f.mass()).sum();
        Ok(CondensateState { params, n_lo, n_hi, modes, total_mass, energy_cache: None })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.modes[0].grid
    }

    pub fn mode_numbers(&self) -> impl Iterator<Item = i64> {
        self.n_lo..=self.n_hi
    }

    pub fn mode(&self, n: i64) -> Option<&RadialField> {
        if n < self.n_lo || n > self.n_hi {
            return None;
        }
        Some(&self.modes[(n - self.n_lo) as usize])
    }

    /// Normalized means total mass 1 within 1e-9.
    pub fn is_normalized(&self) -> bool {
        (self.total_mass - 1.0).abs() <= 1e-9
    }
}

/// Default truncation: round(omega) +/- ceil(2 sqrt(omega)). The boundary
/// modes of a converged minimizer carry < 1e-8 mass there, which is the
/// adequacy check `mode_mass_spectrum` exposes.
pub fn default_mode_range(omega: f64) -> (i64, i64) {
    let nc = omega.round() as i64;
    let hw = (2.0 * omega.sqrt()).ceil() as i64;
    (nc - hw, nc + hw)
}

/// Shared grid for a coupled run: the default grid of the central mode. It
/// covers every well in the default window with room to spare.
pub fn default_shared_grid(params: &ScaledParams) -> Result<RadialGrid> {
    ModeProblem::new(params.omega.round() as i64, params)?.default_grid()
}

/// Per-mode operators on the shared grid.
pub(crate) struct CoupledOps {
    pub(crate) ns: Vec<i64>,
    pub(crate) pencils: Vec<Pencil>,
    pub(crate) ri: Vec<f64>,
    /// 2 pi dr.
    pub(crate) s: f64,
    pub(crate) g: f64,
}

pub(crate) fn coupled_ops(params: &ScaledParams, n_lo: i64, n_hi: i64, grid: &RadialGrid) -> Result<CoupledOps> {
    if n_hi < n_lo {
        return Err(Error::invalid("empty mode range"));
    }
    let ns: Vec<i64> = (n_lo..=n_hi).collect();
    let pencils = ns
        .par_iter()
        .map(|&n| Ok(mode_pencil_parts(&ModeProblem::new(n, params)?, grid).0))
        .collect::<Result<Vec<_>>>()?;
    let ri: Vec<f64> = (1..grid.n_points - 1).map(|i| grid.node(i)).collect();
    Ok(CoupledOps { ns, pencils, ri, s: 2.0 * PI * grid.spacing(), g: params.g_coupling })
}

pub(crate) fn interior_w(f: &RadialField) -> Vec<Complex64> {
    (1..f.grid.n_points - 1).map(|i| f.values[i] * f.grid.node(i).sqrt()).collect()
}

/// sigma_k = sum_{p >= k} v_p conj(v_{p-k}) for k = 0..M-1 (sigma_{-k} is the
/// conjugate and is never stored). Works on any shared-length mode family,
/// pencil or full-grid.
fn sigmas(vs: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let m = vs.len();
    (0..m)
        .into_par_iter()
        .map(|k| {
            let mut acc = vec![Complex64::ZERO; vs[0].len()];
            for p in k..m {
                for ((a, &x), &y) in acc.iter_mut().zip(&vs[p]).zip(&vs[p - k]) {
                    *a += x * y.conj();
                }
            }
            acc
        })
        .collect()
}

/// sum_i (|sigma_0|^2 + 2 sum_{k>=1} |sigma_k|^2)(i) * weight_i.
fn sigma_square_sum(sig: &[Vec<Complex64>], weights: &[f64]) -> f64 {
    let mut acc = vec![0.0; weights.len()];
    for (k, sk) in sig.iter().enumerate() {
        let wgt = if k == 0 { 1.0 } else { 2.0 };
        for (a, v) in acc.iter_mut().zip(sk) {
            *a += wgt * v.norm_sqr();
        }
    }
    acc.iter().zip(weights).map(|(&a, &w)| a * w).sum()
}

/// Cubic terms 2 G (|u|^2 u)_n in pencil coordinates:
/// nl_n(i) = (2 G / r_i) sum_k sigma_k(i) w_{n-k}(i), conjugating for k < 0.
pub(crate) fn cubic_terms(ops: &CoupledOps, ws: &[Vec<Complex64>], sig: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let m = ws.len();
    let nint = ops.ri.len();
    (0..m)
        .into_par_iter()
        .map(|jn| {
            let mut acc = vec![Complex64::ZERO; nint];
            if ops.g != 0.0 {
                for (jp, wp) in ws.iter().enumerate() {
                    let k = jn as i64 - jp as i64;
                    if k >= 0 {
                        let sk = &sig[k as usize];
                        for ((a, &sv), &wv) in acc.iter_mut().zip(sk).zip(wp) {
                            *a += sv * wv;
                        }
                    } else {
                        let sk = &sig[(-k) as usize];
                        for ((a, &sv), &wv) in acc.iter_mut().zip(sk).zip(wp) {
                            *a += sv.conj() * wv;
                        }
                    }
                }
                for (a, &r) in acc.iter_mut().zip(&ops.ri) {
                    *a *= 2.0 * ops.g / r;
                }
            }
            acc
        })
        .collect()
}

/// One evaluated flow iterate. `sig` stays empty at G = 0 (never needed).
pub(crate) struct Iterate {
    pub(crate) ws: Vec<Vec<Complex64>>,
    pub(crate) sig: Vec<Vec<Complex64>>,
    pub(crate) energy: f64,
    /// Int |u|^4 in the pencil quadrature.
    pub(crate) quartic: f64,
}

pub(crate) fn evaluate(ops: &CoupledOps, ws: Vec<Vec<Complex64>>) -> Iterate {
    let quad: f64 = ws.iter().zip(&ops.pencils).map(|(w, p)| p.a.quad_hermitian(w)).sum();
    let (sig, quartic) = if ops.g == 0.0 {
        (Vec::new(), 0.0)
    } else {
        let sig = sigmas(&ws);
        let inv_r: Vec<f64> = ops.ri.iter().map(|&r| 1.0 / r).collect();
        let q = ops.s * sigma_square_sum(&sig, &inv_r);
        (sig, q)
    };
    Iterate { ws, sig, energy: ops.s * quad + ops.g * quartic, quartic }
}

fn total_bmass(ops: &CoupledOps, ws: &[Vec<Complex64>]) -> f64 {
    ops.s * ws.iter().zip(&ops.pencils).map(|(w, p)| p.b.quad_hermitian(w)).sum::<f64>()
}

pub(crate) fn bnormalize_all(ops: &CoupledOps, ws: &mut [Vec<Complex64>]) {
    let c = 1.0 / total_bmass(ops, ws).sqrt();
    for w in ws.iter_mut() {
        for x in w.iter_mut() {
            *x *= c;
        }
    }
}

/// || B^{-1}(A_n w_n + nl_n) - mu w_n ||_{L^2} over all modes, relative to
/// the joint B-norm; the coupled shape of the single-mode residual.
fn el_residual_w(
    ops: &CoupledOps,
    bfac: &SpdTridiagFactor,
    ws: &[Vec<Complex64>],
    nl: &[Vec<Complex64>],
    mu: f64,
) -> f64 {
    let ss: f64 = ws
        .par_iter()
        .zip(&ops.pencils)
        .zip(nl)
        .map(|((w, p), nl_n)| {
            let mut v = p.a.apply_complex(w);
            for (vi, &ni) in v.iter_mut().zip(nl_n) {
                *vi += ni;
            }
            bfac.solve_complex_into(&mut v);
            v.iter().zip(w).map(|(&vi, &wi)| (vi - mu * wi).norm_sqr()).sum::<f64>()
        })
        .sum();
    (ops.s * ss).sqrt() / total_bmass(ops, ws).sqrt()
}

/// Lift pencil vectors back to a public state: endpoints zero, divide by
/// sqrt(r), renormalize the whole family to total trapezoid mass 1. Phases
/// are preserved (no per-mode sign fixing).
fn embed_state(
    params: ScaledParams,
    n_lo: i64,
    grid: &RadialGrid,
    ws: &[Vec<Complex64>],
) -> Result<CondensateState> {
    let fields: Vec<RadialField> = ws
        .iter()
        .map(|w| {
            let mut vals = vec![Complex64::ZERO; grid.n_points];
            for (i, &wi) in w.iter().enumerate() {
                vals[i + 1] = wi / grid.node(i + 1).sqrt();
            }
            RadialField::new(*grid, vals)
        })
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = fields.iter().map(|f| f.mass()).sum();
    if !(total > 0.0) {
        return Err(Error::invalid("cannot normalize a zero state"));
    }
    let c = 1.0 / total.sqrt();
    let scaled = fields
        .into_iter()
        .map(|f| RadialField::new(*grid, f.values.into_iter().map(|v| c * v).collect()))
        .collect::<Result<Vec<_>>>()?;
    CondensateState::new(params, n_lo, scaled)
}

/// Starting guess for the coupled flow: each mode gets its linear ground
/// shape on the shared grid, mass spread over the window as a Gaussian of
/// width sqrt(omega)/4 about the central mode, and a seeded random phase.
/// Deliberately multi-mode, so concentration is found, not assumed.
pub fn initial_state(
    params: &ScaledParams,
    n_lo: i64,
    n_hi: i64,
    grid: &RadialGrid,
    seed: u64,
) -> Result<CondensateState> {
    if n_lo < 1 {
        return Err(Error::invalid(format!("mode window must stay at n >= 1, got n_lo = {n_lo}")));
    }
    let ops = coupled_ops(params, n_lo, n_hi, grid)?;
    let shapes: Vec<Vec<f64>> = ops
        .pencils
        .par_iter()
        .map(|p| -> Result<Vec<f64>> {
            let lam = p.eigenvalue(0)?;
            let mut w = p.eigenvector(lam, &[])?;
            let imax =
                (0..w.len()).max_by(|&i, &j| w[i].abs().total_cmp(&w[j].abs())).unwrap();
            if w[imax] < 0.0 {
                for x in w.iter_mut() {
                    *x = -*x;
                }
            }
            let c = 1.0 / (ops.s * p.b.quad(&w, &w)).sqrt();
            Ok(w.into_iter().map(|x| c * x).collect())
        })
        .collect::<Result<Vec<_>>>()?;

    let nc = params.omega.round().clamp(n_lo as f64, n_hi as f64);
    let sigma_n = params.omega.sqrt() / 4.0;
    let raw: Vec<f64> = ops
        .ns
        .iter()
        .map(|&n| (-((n as f64 - nc) * (n as f64 - nc)) / (2.0 * sigma_n * sigma_n)).exp())
        .collect();
    let msum: f64 = raw.iter().sum();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ws: Vec<Vec<Complex64>> = shapes
        .iter()
        .zip(&raw)
        .map(|(shape, &mass)| {
            let amp = (mass / msum).sqrt();
            let phase = Complex64::from_polar(amp, 2.0 * PI * rng.random::<f64>());
            shape.iter().map(|&x| phase * x).collect()
        })
        .collect();
    embed_state(*params, n_lo, grid, &ws)
}

/// Exact Int_{R^2} |u|^4 through the mode convolution (trapezoid in r).
pub fn quartic_integral(s: &CondensateState) -> Result<f64> {
    let vals: Vec<Vec<Complex64>> = s.modes.iter().map(|f| f.values.clone()).collect();
    let sig = sigmas(&vals);
    let mut integrand = vec![0.0; s.grid().n_points];
    for (k, sk) in sig.iter().enumerate() {
        let wgt = if k == 0 { 1.0 } else { 2.0 };
        for (a, v) in integrand.iter_mut().zip(sk) {
            *a += wgt * v.norm_sqr();
        }
    }
    Ok(2.0 * PI * integrate_rdr(&integrand, s.grid())?)
}

/// The diagonal part 2 pi sum_{p,q} Int |f_p|^2 |f_q|^2 r dr, which never
/// exceeds the full quartic integral: the difference is the sum of the
/// off-diagonal convolution channels, each a square.
pub fn quartic_lower_bound(s: &CondensateState) -> Result<f64> {
    let mut sigma0 = vec![0.0; s.grid().n_points];
    for f in &s.modes {
        for (a, v) in sigma0.iter_mut().zip(&f.values) {
            *a += v.norm_sqr();
        }
    }
    let sq: Vec<f64> = sigma0.iter().map(|&x| x * x).collect();
    Ok(2.0 * PI * integrate_rdr(&sq, s.grid())?)
}

/// Full energy with its exact decomposition: per-mode quadratic pieces in the
/// pencil form plus G times the convolution quartic.
pub fn energy_f_omega(s: &CondensateState) -> Result<EnergyBreakdown> {
    let ops = coupled_ops(&s.params, s.n_lo, s.n_hi, s.grid())?;
    let per_mode: Vec<(i64, f64)> = s
        .modes
        .par_iter()
        .zip(&ops.pencils)
        .zip(&ops.ns)
        .map(|((f, p), &n)| (n, ops.s * p.a.quad_hermitian(&interior_w(f))))
        .collect();
    let quartic = quartic_integral(s)?;
    let total = per_mode.iter().map(|&(_, e)| e).sum::<f64>() + s.params.g_coupling * quartic;
    Ok(EnergyBreakdown { per_mode, quartic, total })
}

/// mu = F(u) + G Int |u|^4, the multiplier of the mass constraint.
pub fn chemical_potential(s: &CondensateState) -> Result<f64> {
    let br = energy_f_omega(s)?;
    Ok(br.total + s.params.g_coupling * br.quartic)
}

/// Per-mode masses and their second moment about a reference index.
#[derive(Debug, Clone, Serialize)]
pub struct ModeMassSpectrum {
    pub n_star: i64,
    /// (n, 2 pi Int |f_n|^2 r dr), ascending in n.
    pub masses: Vec<(i64, f64)>,
    /// sum_n mass_n (n - n_star)^2.
    pub moment: f64,
}

pub fn mode_mass_spectrum(s: &CondensateState, n_star: i64) -> ModeMassSpectrum {
    let masses: Vec<(i64, f64)> =
        s.mode_numbers().zip(&s.modes).map(|(n, f)| (n, f.mass())).collect();
    let moment = masses
        .iter()
        .map(|&(n, m)| {
            let d = (n - n_star) as f64;
            m * d * d
        })
        .sum();
    ModeMassSpectrum { n_star, masses, moment }
}

/// L^2(R^2) distance between |u|^2 and a radial reference density ref^2,
/// computed in the mode representation: the m = 0 angular coefficient of
/// |u|^2 is sigma_0 and carries the comparison, the m != 0 coefficients add
/// in quadrature.
pub fn density_deviation(s: &CondensateState, reference: &RadialField) -> Result<f64> {
    if reference.grid != *s.grid() {
        return Err(Error::invalid("reference profile must live on the state's grid"));
    }
    let vals: Vec<Vec<Complex64>> = s.modes.iter().map(|f| f.values.clone()).collect();
    let sig = sigmas(&vals);
    let diff0: Vec<f64> = sig[0]
        .iter()
        .zip(&reference.values)
        .map(|(sv, rv)| {
            let d = sv.re - rv.norm_sqr();
            d * d
        })
        .collect();
    let mut dev2 = integrate_rdr(&diff0, s.grid())?;
    for sk in sig.iter().skip(1) {
        let sq: Vec<f64> = sk.iter().map(|v| v.norm_sqr()).collect();
        dev2 += 2.0 * integrate_rdr(&sq, s.grid())?;
    }
    Ok((2.0 * PI * dev2).sqrt())
}

/// A converged coupled minimizer. `energy`, `multiplier` and `el_residual`
/// are pencil-geometry values of the B-normalized final iterate, directly
/// comparable with the single-mode `gamma_n`; `state.energy_cache` holds the
/// public-convention breakdown of the returned (trapezoid-normalized) state.
#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub state: CondensateState,
    /// F(u) at the minimizer (the discrete minimum energy).
    pub energy: f64,
    /// mu = F(u) + G Int |u|^4.
    pub multiplier: f64,
    pub el_residual: f64,
    pub iterations: usize,
}

/// Minimize F over the mode window of `init` at unit total mass.
///
/// Projected semi-implicit flow, all modes jointly: per mode
/// (B + dt A_n) w' = (1 + dt mu) B w_n - dt 2G (|u|^2 u)_n, then one global
/// renormalization. The multiplier shift makes stationary states exact fixed
/// points of the normalized map; without it the fixed point solves the
/// wrong-coupling equation (off by 1 + dt mu) and the flow stalls short of
/// the residual gate. Energy is monotone across accepted steps (dt halves on
/// increase); convergence requires the stall condition plus an
/// Euler-Lagrange residual below tol_residual * |mu|.
pub fn minimize_full(init: &CondensateState, flow: &FlowParams) -> Result<MinimizeOutcome> {
    flow.validate()?;
    if !init.is_normalized() {
        return Err(Error::invalid(format!(
            "initial state must have unit mass, got {}",
            init.total_mass
        )));
    }
    let p = init.params;
    let wlo = (p.omega - 2.0 * p.omega.sqrt()).ceil() as i64;
    let whi = (p.omega + 2.0 * p.omega.sqrt()).floor() as i64;
    if init.n_lo > wlo || init.n_hi < whi {
        return Err(Error::invalid(format!(
            "mode range [{}, {}] must cover the concentration window [{wlo}, {whi}]",
            init.n_lo, init.n_hi
        )));
    }
    let ops = coupled_ops(&p, init.n_lo, init.n_hi, init.grid())?;
    let bfac = SpdTridiagFactor::new(&ops.pencils[0].b)?;

    let nc = (p.omega.round() as i64).clamp(init.n_lo, init.n_hi);
    let h0 = ModeProblem::new(nc, &p)?.h_n;
    let mut dt = flow.dt_factor * h0 * h0;
    let mut facs: Vec<SpdTridiagFactor> =
        ops.pencils.par_iter().map(|pc| step_factor(pc, dt)).collect::<Result<Vec<_>>>()?;

    let mut ws: Vec<Vec<Complex64>> = init.modes.iter().map(interior_w).collect();
    bnormalize_all(&ops, &mut ws);
    let mut cur = evaluate(&ops, ws);

    let mut history: VecDeque<f64> = VecDeque::with_capacity(STALL_WINDOW + 1);
    history.push_back(cur.energy);
    let mut halvings = 0usize;
    let mut iterations = 0usize;
    let mut next_res_check = 0usize;

    while iterations < flow.max_iter {
        iterations += 1;
        let mu_now = cur.energy + ops.g * cur.quartic;
        let nl = cubic_terms(&ops, &cur.ws, &cur.sig);
        let mut ws2: Vec<Vec<Complex64>> = cur
            .ws
            .par_iter()
            .zip(&ops.pencils)
            .zip(&nl)
            .zip(&facs)
            .map(|(((w, pc), nl_n), fac)| {
                let mut rhs = pc.b.apply_complex(w);
                for (ri, &ni) in rhs.iter_mut().zip(nl_n) {
                    *ri = (1.0 + dt * mu_now) * *ri - dt * ni;
                }
                fac.solve_complex_into(&mut rhs);
                rhs
            })
            .collect();
        bnormalize_all(&ops, &mut ws2);
        let next = evaluate(&ops, ws2);
        if next.energy > cur.energy + ASCENT_TOL * cur.energy.abs() {
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::EnergyIncrease { halvings });
            }
            dt *= 0.5;
            facs = ops.pencils.par_iter().map(|pc| step_factor(pc, dt)).collect::<Result<Vec<_>>>()?;
            continue;
        }
        cur = next;
        history.push_back(cur.energy);
        if history.len() > STALL_WINDOW + 1 {
            history.pop_front();
        }
        if history.len() == STALL_WINDOW + 1
            && history.front().unwrap() - cur.energy <= flow.tol_energy * cur.energy.abs()
            && iterations >= next_res_check
        {
            let mu = cur.energy + ops.g * cur.quartic;
            let nl_now = cubic_terms(&ops, &cur.ws, &cur.sig);
            let res = el_residual_w(&ops, &bfac, &cur.ws, &nl_now, mu);
            next_res_check = iterations + RES_CHECK_INTERVAL;
            if res <= flow.tol_residual * mu.abs() {
                let mut state = embed_state(p, init.n_lo, init.grid(), &cur.ws)?;
                state.energy_cache = Some(energy_f_omega(&state)?);
                return Ok(MinimizeOutcome {
                    state,
                    energy: cur.energy,
                    multiplier: mu,
                    el_residual: res,
                    iterations,
                });
            }
        }
    }
    Err(Error::NonConvergence { what: "coupled mode flow", iterations })
}

/// Run the projected flow for an exact budget of accepted steps and return
/// wherever it got to, converged or not. Step halvings on energy increase
/// stay active but do not consume budget. Comparing concentration across
/// omega needs states after equal imaginary time, not after convergence,
/// which different omega reach at different times.
pub fn relax_steps(
    init: &CondensateState,
    flow: &FlowParams,
    steps: usize,
) -> Result<MinimizeOutcome> {
    flow.validate()?;
    if !init.is_normalized() {
        return Err(Error::invalid(format!(
            "initial state must have unit mass, got {}",
            init.total_mass
        )));
    }
    let p = init.params;
    let ops = coupled_ops(&p, init.n_lo, init.n_hi, init.grid())?;
    let bfac = SpdTridiagFactor::new(&ops.pencils[0].b)?;

    let nc = (p.omega.round() as i64).clamp(init.n_lo, init.n_hi);
    let h0 = ModeProblem::new(nc, &p)?.h_n;
    let mut dt = flow.dt_factor * h0 * h0;
    let mut facs: Vec<SpdTridiagFactor> =
        ops.pencils.par_iter().map(|pc| step_factor(pc, dt)).collect::<Result<Vec<_>>>()?;

    let mut ws: Vec<Vec<Complex64>> = init.modes.iter().map(interior_w).collect();
    bnormalize_all(&ops, &mut ws);
    let mut cur = evaluate(&ops, ws);

    let mut halvings = 0usize;
    let mut accepted = 0usize;
    while accepted < steps {
        let mu_now = cur.energy + ops.g * cur.quartic;
        let nl = cubic_terms(&ops, &cur.ws, &cur.sig);
        let mut ws2: Vec<Vec<Complex64>> = cur
            .ws
            .par_iter()
            .zip(&ops.pencils)
            .zip(&nl)
            .zip(&facs)
            .map(|(((w, pc), nl_n), fac)| {
                let mut rhs = pc.b.apply_complex(w);
                for (ri, &ni) in rhs.iter_mut().zip(nl_n) {
                    *ri = (1.0 + dt * mu_now) * *ri - dt * ni;
                }
                fac.solve_complex_into(&mut rhs);
                rhs
            })
            .collect();
        bnormalize_all(&ops, &mut ws2);
        let next = evaluate(&ops, ws2);
        if next.energy > cur.energy + ASCENT_TOL * cur.energy.abs() {
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::EnergyIncrease { halvings });
            }
            dt *= 0.5;
            facs = ops.pencils.par_iter().map(|pc| step_factor(pc, dt)).collect::<Result<Vec<_>>>()?;
            continue;
        }
        cur = next;
        accepted += 1;
    }

    let mu = cur.energy + ops.g * cur.quartic;
    let nl_now = cubic_terms(&ops, &cur.ws, &cur.sig);
    let res = el_residual_w(&ops, &bfac, &cur.ws, &nl_now, mu);
    let mut state = embed_state(p, init.n_lo, init.grid(), &cur.ws)?;
    state.energy_cache = Some(energy_f_omega(&state)?);
    Ok(MinimizeOutcome {
        state,
        energy: cur.energy,
        multiplier: mu,
        el_residual: res,
        iterations: accepted,
    })
}
