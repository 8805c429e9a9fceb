//! A-posteriori error bounds for pH-preserving reduced models.
//!
//! With `A = (J - D) H` the error `e = x - V x_r` solves `e' = A e + r`,
//! `e(t0) = 0`. The logarithmic norm of `A` in the energy norm equals
//! `lambda_max(-L^T D L) <= 0`, so `||exp(A s)||_H <= 1` and
//!
//! * standard:      `||e(t)||_H <= int_0^t ||r||_H`
//! * ALP:           `||e(t)||_H <= ||V_A e_r(t)||_H + int_0^t ||r_A||_H`
//! * hierarchical:  `||e(t)||_H <= ||V_H x_H(t) - V x_r(t)||_H + int_0^t ||r_H||_H`
//!
//! All reduced systems of one evaluation share a [`Scheme`] and the grid.
//!
//! [`Scheme::Midpoint`] integrates with the implicit midpoint rule and the
//! cumulative trapezoid rule. The reduced error system is forced by the
//! primal residual at step midpoints, which is the defect the discrete
//! primal scheme actually leaves, so the ALP and hierarchical bounds
//! coincide to rounding under the matching initial condition. The bounds
//! hold up to the time discretization error of the midpoint rule and the
//! trapezoid rule; near `t0` the bound is tight and that error is visible
//! at `O(dt)` relative size.
//!
//! [`Scheme::Oracle`] solves every reduced system with the exponential
//! oracle, samples states at Gauss-Legendre nodes inside each step and
//! integrates the residual norms with the same rule. The computed bounds
//! then equal the continuous bounds up to quadrature error of high order.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::basisgen::Basis;
use crate::error::{shape_err, Error, Result};
use crate::integrators::{
    solve_expm_dense, solve_full, solve_implicit_midpoint_with, trapezoid_cumulative, OracleOptions, SolverKind,
    TimeGrid, Trajectory,
};
use crate::phcore::{InputSignal, PhSystem};
use crate::projection::{reduce, reduced_error_system, Projector, ReducedInput, ReducedPhSystem};

/// What a [`BoundSeries`] holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesKind {
    Standard,
    Alp,
    Hierarchical,
    TrueError,
    Effectivity,
    Component(String),
}

impl SeriesKind {
    pub fn name(&self) -> &str {
        match self {
            Self::Standard => "standard",
            Self::Alp => "alp",
            Self::Hierarchical => "hier",
            Self::TrueError => "true_error",
            Self::Effectivity => "effectivity",
            Self::Component(name) => name,
        }
    }
}

/// Basis sizes and constants attached to a series.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SeriesMeta {
    pub n: Option<usize>,
    pub n_a: Option<usize>,
    pub n_h: Option<usize>,
    pub exp_constant: Option<f64>,
}

/// Values of a bound (or error, or component) on the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSeries {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub kind: SeriesKind,
    pub meta: SeriesMeta,
}

impl BoundSeries {
    fn new(grid: &TimeGrid, values: Vec<f64>, kind: SeriesKind, meta: SeriesMeta) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(shape_err("series length", grid.len(), values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("bound series"));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            kind,
            meta,
        })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Which residual a [`ResidualSeries`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    Primal,
    Alp,
    Hierarchical,
}

/// Gauss-Legendre rule on `[0, 1]` used inside every step.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussNodes {
    pub fractions: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussNodes {
    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    fn times(&self, grid: &TimeGrid) -> Vec<f64> {
        let dt = grid.dt();
        let mut out = Vec::with_capacity(grid.n_steps() * self.len());
        for &tk in &grid.times()[..grid.n_steps()] {
            out.extend(self.fractions.iter().map(|tau| tk + tau * dt));
        }
        out
    }
}

/// `||r(t_k)||_H` on the grid, plus the norms at interior Gauss nodes when
/// the trajectory came from the oracle scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub grid: TimeGrid,
    pub norms: Vec<f64>,
    pub which: ResidualKind,
    /// Rule and norms at `t_k + tau_i dt`, index `k * q + i`.
    pub interior: Option<(GaussNodes, Vec<f64>)>,
}

/// How reduced trajectories are computed and residual norms integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Implicit midpoint for every reduced solve and the trapezoid rule for
    /// the integrals. The reduced error system is forced at step midpoints.
    #[default]
    Midpoint,
    /// Exponential oracle for every reduced solve, with states at
    /// Gauss-Legendre nodes inside each step and the same rule for the
    /// integrals.
    Oracle,
}

/// Reduced trajectory; in the oracle scheme also the states at the
/// interior Gauss nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSolution {
    pub traj: Trajectory,
    pub interior: Option<(GaussNodes, DMatrix<f64>)>,
}

impl ReducedSolution {
    pub fn scheme(&self) -> Scheme {
        if self.interior.is_some() {
            Scheme::Oracle
        } else {
            Scheme::Midpoint
        }
    }
}

fn dense_lti(
    a: &DMatrix<f64>,
    g: &DMatrix<f64>,
    z0: &DVector<f64>,
    u: &InputSignal,
    grid: &TimeGrid,
) -> Result<ReducedSolution> {
    let dense = solve_expm_dense(a, g, z0, u, grid, OracleOptions::default())?;
    Ok(ReducedSolution {
        traj: dense.traj,
        interior: Some((
            GaussNodes {
                fractions: dense.fractions,
                weights: dense.weights,
            },
            dense.interior,
        )),
    })
}

/// Solves a port-driven reduced system with the given scheme.
pub fn solve_reduced(
    rom: &ReducedPhSystem,
    u: &InputSignal,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<ReducedSolution> {
    if rom.input() != ReducedInput::Port {
        return Err(Error::InvalidArgument(
            "only port-driven reduced systems can be solved from an input".into(),
        ));
    }
    match scheme {
        Scheme::Midpoint => Ok(ReducedSolution {
            traj: rom.solve(u, grid, SolverKind::Midpoint)?,
            interior: None,
        }),
        Scheme::Oracle => {
            let (a, g) = rom.as_lti().standard_form();
            dense_lti(&a, &g, rom.xr0(), u, grid)
        }
    }
}

fn check_grid_match(a: &TimeGrid, b: &TimeGrid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!(
            "[{}, {}] / {} steps vs [{}, {}] / {} steps",
            a.t0(),
            a.t_end(),
            a.n_steps(),
            b.t0(),
            b.t_end(),
            b.n_steps()
        )));
    }
    Ok(())
}

fn check_port_rom(sys: &PhSystem, rom: &ReducedPhSystem, what: &'static str) -> Result<()> {
    if rom.basis().dim() != sys.dim() {
        return Err(shape_err(what, sys.dim(), rom.basis().dim()));
    }
    if rom.input() != ReducedInput::Port {
        return Err(Error::InvalidArgument(format!(
            "{what} must be driven by the system input"
        )));
    }
    Ok(())
}

fn check_solution(rom: &ReducedPhSystem, sol: &ReducedSolution) -> Result<()> {
    if sol.traj.dim() != rom.size() {
        return Err(shape_err("ROM trajectory dimension", rom.size(), sol.traj.dim()));
    }
    Ok(())
}

fn sample_inputs(u: &InputSignal, times: &[f64], n_inputs: usize) -> Result<DMatrix<f64>> {
    if u.dim() != n_inputs {
        return Err(shape_err("input dimension", n_inputs, u.dim()));
    }
    let mut out = DMatrix::zeros(n_inputs, times.len());
    for (k, &t) in times.iter().enumerate() {
        out.set_column(k, &u.evaluate(t));
    }
    Ok(out)
}

fn input_samples(u: &InputSignal, grid: &TimeGrid, n_inputs: usize) -> Result<DMatrix<f64>> {
    u.check_covers(grid.t0(), grid.t_end())?;
    sample_inputs(u, grid.times(), n_inputs)
}

fn midpoint_input_samples(u: &InputSignal, grid: &TimeGrid, n_inputs: usize) -> Result<DMatrix<f64>> {
    let times: Vec<f64> = (0..grid.n_steps()).map(|k| grid.midpoint(k)).collect();
    sample_inputs(u, &times, n_inputs)
}

fn energy_norms(sys: &PhSystem, x: &DMatrix<f64>) -> Vec<f64> {
    let w = sys.h_factor().tr_mul(x);
    w.column_iter().map(|c| c.norm()).collect()
}

/// `P [(J - D) H V x_r + B u]` for every column of `xr` / `u`.
fn projected_residuals(sys: &PhSystem, rom: &ReducedPhSystem, xr: &DMatrix<f64>, u: &DMatrix<f64>) -> DMatrix<f64> {
    let av = sys.system_matrix() * rom.basis().matrix();
    let mut w = &av * xr;
    w.gemm(1.0, sys.b(), u, 1.0);
    rom.projector().apply_columns(&w)
}

/// Primal residual vectors `r(t_k)` at the grid points.
pub fn primal_residuals(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    rom_traj: &Trajectory,
    u: &InputSignal,
) -> Result<DMatrix<f64>> {
    check_port_rom(sys, rom, "primal ROM")?;
    if rom_traj.dim() != rom.size() {
        return Err(shape_err("ROM trajectory dimension", rom.size(), rom_traj.dim()));
    }
    let us = input_samples(u, rom_traj.grid(), sys.n_inputs())?;
    Ok(projected_residuals(sys, rom, rom_traj.states(), &us))
}

/// Primal residual at the step midpoints, evaluated with the averaged
/// reduced state and the input at the midpoint. This is exactly the defect
/// of the lifted midpoint iterates.
pub fn primal_midpoint_residuals(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    rom_traj: &Trajectory,
    u: &InputSignal,
) -> Result<DMatrix<f64>> {
    check_port_rom(sys, rom, "primal ROM")?;
    if rom_traj.dim() != rom.size() {
        return Err(shape_err("ROM trajectory dimension", rom.size(), rom_traj.dim()));
    }
    let grid = rom_traj.grid();
    u.check_covers(grid.t0(), grid.t_end())?;
    let k = grid.n_steps();
    let states = rom_traj.states();
    let avg = (states.columns(0, k) + states.columns(1, k)) * 0.5;
    let um = midpoint_input_samples(u, grid, sys.n_inputs())?;
    Ok(projected_residuals(sys, rom, &avg, &um))
}

/// `||r(t_k)||_H` from the projected residual form, so no time derivative
/// of the reduced trajectory is needed.
pub fn primal_residual_norms(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    rom_traj: &Trajectory,
    u: &InputSignal,
) -> Result<ResidualSeries> {
    let r = primal_residuals(sys, rom, rom_traj, u)?;
    Ok(ResidualSeries {
        grid: rom_traj.grid().clone(),
        norms: energy_norms(sys, &r),
        which: ResidualKind::Primal,
        interior: None,
    })
}

/// [`primal_residual_norms`] for a solution of either scheme, including the
/// interior norms of the oracle scheme.
pub fn primal_residual_series(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    sol: &ReducedSolution,
    u: &InputSignal,
) -> Result<ResidualSeries> {
    check_solution(rom, sol)?;
    let mut res = primal_residual_norms(sys, rom, &sol.traj, u)?;
    if let Some((nodes, states)) = &sol.interior {
        let us = sample_inputs(u, &nodes.times(sol.traj.grid()), sys.n_inputs())?;
        let r = projected_residuals(sys, rom, states, &us);
        res.interior = Some((nodes.clone(), energy_norms(sys, &r)));
    }
    Ok(res)
}

/// Bound on `||exp((J - D) H s)||_H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogNormMode {
    /// Constant 1 from the nonpositive logarithmic norm.
    UnitBound,
    /// Also computes the decay rate `mu = lambda_min(L^T D L)`.
    SharpEig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormConstant {
    /// Constant in front of the residual integral; always 1.
    pub c_exp: f64,
    /// `mu >= 0` with `||exp(A s)||_H <= exp(-mu s)`; 0 in `UnitBound` mode.
    pub decay_rate: f64,
}

/// Logarithmic-norm constant of `(J - D) H` in the energy norm.
pub fn log_norm_constant(sys: &PhSystem, mode: LogNormMode) -> LogNormConstant {
    match mode {
        LogNormMode::UnitBound => LogNormConstant {
            c_exp: 1.0,
            decay_rate: 0.0,
        },
        LogNormMode::SharpEig => {
            let l = sys.h_factor();
            let m = l.tr_mul(&(sys.d() * l));
            let m = (&m + m.transpose()) * 0.5;
            let lmin = SymmetricEigen::new(m)
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            // lambda_max(-L^T D L) = -lambda_min(L^T D L) <= 0 up to rounding
            LogNormConstant {
                c_exp: 1.0,
                decay_rate: lmin.max(0.0),
            }
        }
    }
}

/// Kernel applied to the residual inside the time integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Unit,
    /// `exp(-mu (t - s))`.
    Decay(f64),
}

fn kernel_integral(dt: f64, values: &[f64], kernel: Kernel) -> Vec<f64> {
    match kernel {
        Kernel::Unit => trapezoid_cumulative(dt, values),
        Kernel::Decay(mu) => {
            let q = (-mu * dt).exp();
            let mut out = Vec::with_capacity(values.len());
            let mut acc = 0.0;
            out.push(0.0);
            for w in values.windows(2) {
                acc = q * acc + 0.5 * dt * (q * w[0] + w[1]);
                out.push(acc);
            }
            out
        }
    }
}

fn gauss_kernel_integral(dt: f64, nodes: &GaussNodes, values: &[f64], kernel: Kernel) -> Vec<f64> {
    let q = nodes.len();
    let n_steps = values.len() / q;
    let mu = match kernel {
        Kernel::Unit => 0.0,
        Kernel::Decay(mu) => mu,
    };
    let step_decay = (-mu * dt).exp();
    let node_weights: Vec<f64> = nodes
        .fractions
        .iter()
        .zip(&nodes.weights)
        .map(|(tau, w)| dt * w * (-mu * dt * (1.0 - tau)).exp())
        .collect();
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for chunk in values.chunks(q) {
        let step: f64 = chunk.iter().zip(&node_weights).map(|(v, w)| v * w).sum();
        acc = if mu == 0.0 { acc + step } else { step_decay * acc + step };
        out.push(acc);
    }
    out
}

fn running_integral(res: &ResidualSeries, kernel: Kernel) -> Vec<f64> {
    match &res.interior {
        Some((nodes, values)) => gauss_kernel_integral(res.grid.dt(), nodes, values, kernel),
        None => kernel_integral(res.grid.dt(), &res.norms, kernel),
    }
}

/// Standard bound: running integral of the residual norm. Uses the interior
/// Gauss nodes when present and the trapezoid rule otherwise.
pub fn standard_bound(res: &ResidualSeries, kernel: Kernel) -> Result<BoundSeries> {
    if res.norms.len() != res.grid.len() {
        return Err(shape_err("residual series length", res.grid.len(), res.norms.len()));
    }
    let bad = |v: &f64| !v.is_finite() || *v < 0.0;
    if res.norms.iter().any(bad) || res.interior.as_ref().is_some_and(|(_, v)| v.iter().any(bad)) {
        return Err(Error::InvalidArgument(
            "residual norms must be finite and nonnegative".into(),
        ));
    }
    if let Some((nodes, values)) = &res.interior {
        if nodes.is_empty() || values.len() != nodes.len() * res.grid.n_steps() {
            return Err(shape_err(
                "interior residual samples",
                nodes.len() * res.grid.n_steps(),
                values.len(),
            ));
        }
    }
    if let Kernel::Decay(mu) = kernel {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "decay rate {mu} must be finite and >= 0"
            )));
        }
    }
    let values = running_integral(res, kernel);
    BoundSeries::new(
        &res.grid,
        values,
        SeriesKind::Standard,
        SeriesMeta {
            exp_constant: Some(1.0),
            ..Default::default()
        },
    )
}

/// ALP bound and its two components.
#[derive(Debug, Clone)]
pub struct AlpBound {
    pub bound: BoundSeries,
    /// `||V_A e_r(t)||_H`.
    pub approx_error_norm: BoundSeries,
    /// `int_0^t ||r_A||_H`.
    pub residual_integral: BoundSeries,
    pub residual: ResidualSeries,
    /// Lifted error approximation `V_A e_r(t_k)`, one column per grid point.
    pub approx_error: DMatrix<f64>,
    pub reduced_error: Trajectory,
}

/// ALP bound from a primal ROM and a reduced error system, midpoint scheme.
pub fn alp_bound(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    alp_rom: &ReducedPhSystem,
    u: &InputSignal,
    grid: &TimeGrid,
) -> Result<AlpBound> {
    alp_bound_with(sys, rom, alp_rom, u, grid, Scheme::Midpoint)
}

pub fn alp_bound_with(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    alp_rom: &ReducedPhSystem,
    u: &InputSignal,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<AlpBound> {
    check_port_rom(sys, rom, "primal ROM")?;
    let sol = solve_reduced(rom, u, grid, scheme)?;
    alp_bound_from(sys, rom, &sol, alp_rom, u)
}

/// `e_r(t0) = V_A^T H e(t0)`; zero whenever `x0` lies in `span(V)`.
fn alp_initial_state(sys: &PhSystem, rom: &ReducedPhSystem, alp_rom: &ReducedPhSystem) -> DVector<f64> {
    let e0 = sys.x0() - rom.basis().matrix() * rom.xr0();
    (sys.h() * alp_rom.basis().matrix()).tr_mul(&e0)
}

/// [`alp_bound`] with a precomputed primal solution; the scheme follows
/// the solution.
pub fn alp_bound_from(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    sol: &ReducedSolution,
    alp_rom: &ReducedPhSystem,
    u: &InputSignal,
) -> Result<AlpBound> {
    check_port_rom(sys, rom, "primal ROM")?;
    check_solution(rom, sol)?;
    if alp_rom.input() != ReducedInput::Residual {
        return Err(Error::InvalidArgument(
            "ALP system must come from reduced_error_system".into(),
        ));
    }
    if alp_rom.basis().dim() != sys.dim() {
        return Err(shape_err("ALP basis rows", sys.dim(), alp_rom.basis().dim()));
    }
    let grid = sol.traj.grid();
    let er0 = alp_initial_state(sys, rom, alp_rom);

    // primal residuals, lifted error approximation and reduced error states
    // at the grid points, plus the interior samples of the oracle scheme
    let (r, approx_error, reduced_error, interior) = match sol.scheme() {
        Scheme::Midpoint => {
            let r = primal_residuals(sys, rom, &sol.traj, u)?;
            let r_mid = primal_midpoint_residuals(sys, rom, &sol.traj, u)?;
            let lti = alp_rom.as_lti().with_initial_state(er0)?;
            let reduced_error = solve_implicit_midpoint_with(&lti, grid, |k, _| Ok(r_mid.column(k).into_owned()))?;
            let approx_error = alp_rom.basis().matrix() * reduced_error.states();
            (r, approx_error, reduced_error, None)
        }
        Scheme::Oracle => {
            // (x_r, e_r) is LTI in u:  e_r' = A_A e_r + G_A P (A V x_r + B u)
            let n = rom.size();
            let n_a = alp_rom.size();
            let (a_r, g_r) = rom.as_lti().standard_form();
            let (a_a, g_a) = alp_rom.as_lti().standard_form();
            let m_x = rom
                .projector()
                .apply_columns(&(sys.system_matrix() * rom.basis().matrix()));
            let m_u = rom.projector().apply_columns(sys.b());
            let mut a = DMatrix::zeros(n + n_a, n + n_a);
            a.view_mut((0, 0), (n, n)).copy_from(&a_r);
            a.view_mut((n, 0), (n_a, n)).copy_from(&(&g_a * &m_x));
            a.view_mut((n, n), (n_a, n_a)).copy_from(&a_a);
            let mut g = DMatrix::zeros(n + n_a, sys.n_inputs());
            g.view_mut((0, 0), (n, sys.n_inputs())).copy_from(&g_r);
            g.view_mut((n, 0), (n_a, sys.n_inputs())).copy_from(&(&g_a * &m_u));
            let mut z0 = DVector::zeros(n + n_a);
            z0.rows_mut(0, n).copy_from(rom.xr0());
            z0.rows_mut(n, n_a).copy_from(&er0);
            let aug = dense_lti(&a, &g, &z0, u, grid)?;

            let residual_at = |z: &DMatrix<f64>, us: &DMatrix<f64>| {
                let mut r = &m_x * z.rows(0, n);
                r.gemm(1.0, &m_u, us, 1.0);
                r
            };
            let us = input_samples(u, grid, sys.n_inputs())?;
            let r = residual_at(aug.traj.states(), &us);
            let er = aug.traj.states().rows(n, n_a).into_owned();
            let approx_error = alp_rom.basis().matrix() * &er;
            let (nodes, zi) = aug.interior.expect("dense solve has interior states");
            let ui = sample_inputs(u, &nodes.times(grid), sys.n_inputs())?;
            let ri = residual_at(&zi, &ui);
            let ei = alp_rom.basis().matrix() * zi.rows(n, n_a);
            (
                r,
                approx_error,
                Trajectory::new(grid.clone(), er)?,
                Some((nodes, ei, ri)),
            )
        }
    };

    let alp_residual = |e: &DMatrix<f64>, r: &DMatrix<f64>| {
        let mut w = sys.system_matrix() * e;
        w += r;
        alp_rom.projector().apply_columns(&w)
    };
    let r_a = alp_residual(&approx_error, &r);
    let residual = ResidualSeries {
        grid: grid.clone(),
        norms: energy_norms(sys, &r_a),
        which: ResidualKind::Alp,
        interior: interior.map(|(nodes, ei, ri)| (nodes, energy_norms(sys, &alp_residual(&ei, &ri)))),
    };
    let approx_norms = energy_norms(sys, &approx_error);
    let integral = running_integral(&residual, Kernel::Unit);
    let total: Vec<f64> = approx_norms.iter().zip(&integral).map(|(a, b)| a + b).collect();

    let meta = SeriesMeta {
        n: Some(rom.size()),
        n_a: Some(alp_rom.size()),
        n_h: None,
        exp_constant: Some(1.0),
    };
    Ok(AlpBound {
        bound: BoundSeries::new(grid, total, SeriesKind::Alp, meta)?,
        approx_error_norm: BoundSeries::new(
            grid,
            approx_norms,
            SeriesKind::Component("alp_approx_error".into()),
            meta,
        )?,
        residual_integral: BoundSeries::new(
            grid,
            integral,
            SeriesKind::Component("alp_residual_integral".into()),
            meta,
        )?,
        residual,
        approx_error,
        reduced_error,
    })
}

/// Hierarchical bound and its two components.
#[derive(Debug, Clone)]
pub struct HierBound {
    pub bound: BoundSeries,
    /// `||V_H x_H(t) - V x_r(t)||_H`.
    pub state_difference_norm: BoundSeries,
    /// `int_0^t ||r_H||_H`.
    pub residual_integral: BoundSeries,
    pub residual: ResidualSeries,
    /// `V_H x_H(t_k) - V x_r(t_k)`.
    pub state_difference: DMatrix<f64>,
    pub hier_traj: Trajectory,
}

/// Hierarchical bound from a primal ROM and a finer ROM whose basis extends
/// the primal basis, midpoint scheme.
pub fn hierarchical_bound(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    hier_rom: &ReducedPhSystem,
    u: &InputSignal,
    grid: &TimeGrid,
) -> Result<HierBound> {
    hierarchical_bound_with(sys, rom, hier_rom, u, grid, Scheme::Midpoint)
}

pub fn hierarchical_bound_with(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    hier_rom: &ReducedPhSystem,
    u: &InputSignal,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<HierBound> {
    check_port_rom(sys, rom, "primal ROM")?;
    let sol = solve_reduced(rom, u, grid, scheme)?;
    hierarchical_bound_from(sys, rom, &sol, hier_rom, u)
}

/// [`hierarchical_bound`] with a precomputed primal solution; the scheme
/// follows the solution.
pub fn hierarchical_bound_from(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    sol: &ReducedSolution,
    hier_rom: &ReducedPhSystem,
    u: &InputSignal,
) -> Result<HierBound> {
    check_port_rom(sys, rom, "primal ROM")?;
    check_port_rom(sys, hier_rom, "hierarchical ROM")?;
    check_solution(rom, sol)?;
    let n = rom.size();
    if hier_rom.size() <= n || hier_rom.basis().matrix().columns(0, n) != rom.basis().matrix().columns(0, n) {
        return Err(Error::NotPrefix);
    }
    let grid = sol.traj.grid();
    let hier = solve_reduced(hier_rom, u, grid, sol.scheme())?;

    let fine = hier_rom.basis().matrix() * hier.traj.states();
    let coarse = rom.basis().matrix() * sol.traj.states();
    let state_difference = &fine - coarse;

    let residual = primal_residual_series(sys, hier_rom, &hier, u)?;
    let residual = ResidualSeries {
        which: ResidualKind::Hierarchical,
        ..residual
    };
    let diff_norms = energy_norms(sys, &state_difference);
    let integral = running_integral(&residual, Kernel::Unit);
    let total: Vec<f64> = diff_norms.iter().zip(&integral).map(|(a, b)| a + b).collect();

    let meta = SeriesMeta {
        n: Some(n),
        n_a: None,
        n_h: Some(hier_rom.size()),
        exp_constant: Some(1.0),
    };
    Ok(HierBound {
        bound: BoundSeries::new(grid, total, SeriesKind::Hierarchical, meta)?,
        state_difference_norm: BoundSeries::new(
            grid,
            diff_norms,
            SeriesKind::Component("hier_state_difference".into()),
            meta,
        )?,
        residual_integral: BoundSeries::new(
            grid,
            integral,
            SeriesKind::Component("hier_residual_integral".into()),
            meta,
        )?,
        residual,
        state_difference,
        hier_traj: hier.traj,
    })
}

/// `||x(t_k) - V x_r(t_k)||_H` for given full and reduced trajectories.
pub fn true_error_from(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    fom: &Trajectory,
    rom_traj: &Trajectory,
) -> Result<BoundSeries> {
    check_grid_match(fom.grid(), rom_traj.grid())?;
    if fom.dim() != sys.dim() {
        return Err(shape_err("FOM trajectory dimension", sys.dim(), fom.dim()));
    }
    if rom_traj.dim() != rom.size() {
        return Err(shape_err("ROM trajectory dimension", rom.size(), rom_traj.dim()));
    }
    let e = fom.states() - rom.basis().matrix() * rom_traj.states();
    BoundSeries::new(
        fom.grid(),
        energy_norms(sys, &e),
        SeriesKind::TrueError,
        SeriesMeta {
            n: Some(rom.size()),
            ..Default::default()
        },
    )
}

/// True error of the midpoint ROM against a full-order solve.
pub fn true_error_series(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    u: &InputSignal,
    grid: &TimeGrid,
    fom_solver: SolverKind,
) -> Result<BoundSeries> {
    true_error_series_with(sys, rom, u, grid, fom_solver, SolverKind::Midpoint)
}

pub fn true_error_series_with(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    u: &InputSignal,
    grid: &TimeGrid,
    fom_solver: SolverKind,
    rom_solver: SolverKind,
) -> Result<BoundSeries> {
    check_port_rom(sys, rom, "primal ROM")?;
    let fom = solve_full(sys, u, grid, fom_solver)?;
    let rom_traj = rom.solve(u, grid, rom_solver)?;
    true_error_from(sys, rom, &fom, &rom_traj)
}

/// Pointwise effectivity `bound / true error`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectivityReport {
    pub kind: SeriesKind,
    /// Grid indices whose true error is at least the floor.
    pub retained: Vec<usize>,
    /// Effectivity at each retained index.
    pub values: Vec<f64>,
    /// Grid indices dropped because the true error is below the floor.
    pub skipped: Vec<usize>,
    pub max: f64,
    pub min: f64,
    pub floor: f64,
}

impl EffectivityReport {
    /// Effectivity series on the full grid, with skipped points set to NaN.
    pub fn dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![f64::NAN; len];
        for (&k, &v) in self.retained.iter().zip(&self.values) {
            out[k] = v;
        }
        out
    }
}

/// Effectivity of `bound` against `true_err`, skipping points with
/// `||e(t_k)||_H < floor`.
pub fn effectivity(bound: &BoundSeries, true_err: &BoundSeries, floor: f64) -> Result<EffectivityReport> {
    check_grid_match(&bound.grid, &true_err.grid)?;
    if floor.is_nan() || floor <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "effectivity floor {floor} must be positive"
        )));
    }
    let mut retained = Vec::new();
    let mut values = Vec::new();
    let mut skipped = Vec::new();
    for (k, (&b, &e)) in bound.values.iter().zip(&true_err.values).enumerate() {
        if e < floor {
            skipped.push(k);
        } else {
            retained.push(k);
            values.push(b / e);
        }
    }
    if values.is_empty() {
        return Err(Error::AllPointsSkipped { floor });
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EffectivityReport {
        kind: bound.kind.clone(),
        retained,
        values,
        skipped,
        max,
        min,
        floor,
    })
}

/// Which of the sufficient initial-value properties hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prop1Properties {
    /// `V_A^T H V_A = I`.
    pub secondary_h_orthonormal: bool,
    /// `x0` in `span(V)`.
    pub x0_in_primal_span: bool,
    /// `x0 = 0`.
    pub x0_zero: bool,
}

impl Prop1Properties {
    pub fn any(&self) -> bool {
        self.secondary_h_orthonormal || self.x0_in_primal_span || self.x0_zero
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prop1Status {
    /// A sufficient property holds and the bounds agree within tolerance.
    Certified,
    /// A sufficient property holds but the bounds disagree.
    Violated,
    /// No sufficient property holds; the deviation is informational.
    PreconditionUnmet,
}

/// Numerical check that the ALP and hierarchical bounds coincide for
/// `V_A = V_H = [V, V_+]`.
#[derive(Debug, Clone)]
pub struct Prop1Report {
    pub properties: Prop1Properties,
    /// `||e_r(t0) - (x_H(t0) - [x_r(t0); 0])||_2`.
    pub initial_condition_defect: f64,
    /// `|Delta_A(t_k) - Delta_H(t_k)|`.
    pub deviations: Vec<f64>,
    pub max_abs_deviation: f64,
    pub max_alp_bound: f64,
    /// `max_abs_deviation / max_alp_bound`.
    pub relative_deviation: f64,
    /// `max_k ||V_A e_r(t_k) - (V_H x_H(t_k) - V x_r(t_k))||_H`.
    pub max_approximation_gap: f64,
    pub tol: f64,
    pub status: Prop1Status,
    pub alp: AlpBound,
    pub hier: HierBound,
}

/// Runs both bounds with `V_A = V_H = [V, V_+]` on a shared grid and
/// midpoint integrator and reports their deviation.
pub fn certify_prop1(
    sys: &PhSystem,
    v: &Basis,
    v_plus: &DMatrix<f64>,
    u: &InputSignal,
    grid: &TimeGrid,
    tol: f64,
) -> Result<Prop1Report> {
    certify_prop1_with(sys, v, v_plus, u, grid, tol, Scheme::Midpoint)
}

pub fn certify_prop1_with(
    sys: &PhSystem,
    v: &Basis,
    v_plus: &DMatrix<f64>,
    u: &InputSignal,
    grid: &TimeGrid,
    tol: f64,
    scheme: Scheme,
) -> Result<Prop1Report> {
    if v_plus.ncols() == 0 {
        return Err(Error::InvalidArgument("V_+ must have at least one column".into()));
    }
    let secondary = v.extend_with(sys, v_plus)?;
    let rom = reduce(sys, v)?;
    let hier_rom = reduce(sys, &secondary)?;
    let alp_rom = reduced_error_system(sys, &secondary)?;

    let sol = solve_reduced(&rom, u, grid, scheme)?;
    let alp = alp_bound_from(sys, &rom, &sol, &alp_rom, u)?;
    let hier = hierarchical_bound_from(sys, &rom, &sol, &hier_rom, u)?;

    let x0 = sys.x0();
    let x0_norm = sys.energy_norm(x0)?;
    let primal_proj = Projector::new(sys, v)?;
    let in_span = sys.energy_norm(&primal_proj.apply(x0))? <= 1e-10 * x0_norm;
    let properties = Prop1Properties {
        secondary_h_orthonormal: secondary.is_h_orthonormal(),
        x0_in_primal_span: in_span,
        x0_zero: x0.iter().all(|&c| c == 0.0),
    };

    let mut padded = DVector::zeros(secondary.size());
    padded.rows_mut(0, rom.size()).copy_from(rom.xr0());
    let initial_condition_defect = (alp.reduced_error.state(0) - (hier.hier_traj.state(0) - padded)).norm();

    let deviations: Vec<f64> = alp
        .bound
        .values
        .iter()
        .zip(&hier.bound.values)
        .map(|(a, h)| (a - h).abs())
        .collect();
    let max_abs_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let max_alp_bound = alp.bound.max();
    let relative_deviation = if max_alp_bound > 0.0 {
        max_abs_deviation / max_alp_bound
    } else {
        max_abs_deviation
    };
    let gap = &alp.approx_error - &hier.state_difference;
    let max_approximation_gap = energy_norms(sys, &gap).into_iter().fold(0.0, f64::max);

    let status = if !properties.any() {
        Prop1Status::PreconditionUnmet
    } else if relative_deviation <= tol {
        Prop1Status::Certified
    } else {
        Prop1Status::Violated
    };
    Ok(Prop1Report {
        properties,
        initial_condition_defect,
        deviations,
        max_abs_deviation,
        max_alp_bound,
        relative_deviation,
        max_approximation_gap,
        tol,
        status,
        alp,
        hier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn grid() -> TimeGrid {
        TimeGrid::new(0.0, 2.0, 20).unwrap()
    }

    fn residuals(values: Vec<f64>) -> ResidualSeries {
        ResidualSeries {
            grid: grid(),
            norms: values,
            which: ResidualKind::Primal,
            interior: None,
        }
    }

    #[test]
    fn standard_bound_zero_residual() {
        let b = standard_bound(&residuals(vec![0.0; 21]), Kernel::Unit).unwrap();
        assert!(b.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standard_bound_constant_residual() {
        let b = standard_bound(&residuals(vec![0.5; 21]), Kernel::Unit).unwrap();
        assert!((b.values[20] - 1.0).abs() < 1e-14);
        assert!(b.is_nondecreasing());
    }

    #[test]
    fn decay_kernel_closed_form() {
        let mu = 1.5;
        let c = 0.5;
        let b = standard_bound(&residuals(vec![c; 21]), Kernel::Decay(mu)).unwrap();
        let exact = c * (1.0 - (-mu * 2.0_f64).exp()) / mu;
        // trapezoid error for exp(-mu s) on dt = 0.1
        assert!((b.values[20] - exact).abs() < 2e-3 * exact);
        let unit = standard_bound(&residuals(vec![c; 21]), Kernel::Unit).unwrap();
        assert!(b.values.iter().zip(&unit.values).all(|(d, u)| d <= u));
    }

    #[test]
    fn standard_bound_rejects_negative_norms() {
        let mut v = vec![0.0; 21];
        v[4] = -1.0;
        assert!(standard_bound(&residuals(v), Kernel::Unit).is_err());
    }

    #[test]
    fn log_norm_examples() {
        let n = 2;
        let conservative = PhSystem::new(
            dmatrix![0.0, 1.0; -1.0, 0.0],
            DMatrix::zeros(n, n),
            DMatrix::identity(n, n),
            DMatrix::zeros(n, 1),
            DVector::zeros(n),
        )
        .unwrap();
        let c = log_norm_constant(&conservative, LogNormMode::SharpEig);
        assert_eq!(c.c_exp, 1.0);
        assert_eq!(c.decay_rate, 0.0);

        let damped = PhSystem::new(
            DMatrix::zeros(n, n),
            DMatrix::identity(n, n),
            DMatrix::identity(n, n),
            DMatrix::zeros(n, 1),
            DVector::zeros(n),
        )
        .unwrap();
        let c = log_norm_constant(&damped, LogNormMode::SharpEig);
        assert!((c.decay_rate - 1.0).abs() < 1e-14);
        assert_eq!(log_norm_constant(&damped, LogNormMode::UnitBound).decay_rate, 0.0);
    }

    fn bound_series(values: Vec<f64>, kind: SeriesKind) -> BoundSeries {
        BoundSeries::new(
            &TimeGrid::new(0.0, 1.0, 3).unwrap(),
            values,
            kind,
            SeriesMeta::default(),
        )
        .unwrap()
    }

    #[test]
    fn effectivity_examples() {
        let e = bound_series(vec![0.0, 1.0, 2.0, 0.5], SeriesKind::TrueError);
        let same = bound_series(e.values.clone(), SeriesKind::Standard);
        let r = effectivity(&same, &e, 1e-14).unwrap();
        assert_eq!(r.skipped, vec![0]);
        assert!(r.values.iter().all(|&v| v == 1.0));
        assert_eq!(r.max, 1.0);

        let twice = bound_series(e.values.iter().map(|v| 2.0 * v).collect(), SeriesKind::Standard);
        let r = effectivity(&twice, &e, 1e-14).unwrap();
        assert!(r.values.iter().all(|&v| v == 2.0));
        let dense = r.dense(4);
        assert!(dense[0].is_nan());
        assert_eq!(dense[1], 2.0);
    }

    #[test]
    fn effectivity_all_skipped() {
        let e = bound_series(vec![0.0; 4], SeriesKind::TrueError);
        let b = bound_series(vec![1.0; 4], SeriesKind::Standard);
        assert!(matches!(effectivity(&b, &e, 1e-3), Err(Error::AllPointsSkipped { .. })));
    }

    #[test]
    fn effectivity_grid_mismatch() {
        let e = bound_series(vec![1.0; 4], SeriesKind::TrueError);
        let b = BoundSeries::new(
            &TimeGrid::new(0.0, 2.0, 3).unwrap(),
            vec![1.0; 4],
            SeriesKind::Standard,
            SeriesMeta::default(),
        )
        .unwrap();
        assert!(matches!(effectivity(&b, &e, 1e-3), Err(Error::GridMismatch(_))));
    }

    fn small_system() -> PhSystem {
        let j = dmatrix![0.0, 1.0, 0.0, 0.0; -1.0, 0.0, 1.0, 0.0; 0.0, -1.0, 0.0, 1.0; 0.0, 0.0, -1.0, 0.0];
        let d = DMatrix::from_diagonal(&dvector![0.0, 0.1, 0.0, 0.2]);
        let h = DMatrix::from_diagonal(&dvector![1.0, 2.0, 1.5, 1.0]);
        PhSystem::new(j, d, h, dmatrix![1.0; 0.0; 0.0; 0.0], DVector::zeros(4)).unwrap()
    }

    #[test]
    fn exact_rom_has_zero_bounds() {
        // u = 0 and x0 = 0: every residual vanishes
        let sys = small_system();
        let basis = Basis::from_columns(&sys, DMatrix::identity(4, 1)).unwrap();
        let rom = reduce(&sys, &basis).unwrap();
        let alp_basis = Basis::from_columns(&sys, DMatrix::identity(4, 2)).unwrap();
        let alp_rom = reduced_error_system(&sys, &alp_basis).unwrap();
        let u = InputSignal::zero(1);
        let grid = grid();
        let traj = rom.solve(&u, &grid, SolverKind::Midpoint).unwrap();
        let res = primal_residual_norms(&sys, &rom, &traj, &u).unwrap();
        assert!(res.interior.is_none());
        assert!(res.norms.iter().all(|&v| v == 0.0));
        let alp = alp_bound(&sys, &rom, &alp_rom, &u, &grid).unwrap();
        assert!(alp.bound.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hierarchical_requires_prefix() {
        let sys = small_system();
        let v = Basis::from_columns(&sys, DMatrix::identity(4, 1)).unwrap();
        let rom = reduce(&sys, &v).unwrap();
        let other = Basis::from_columns(&sys, DMatrix::identity(4, 3).columns(1, 2).into_owned()).unwrap();
        let hier = reduce(&sys, &other).unwrap();
        let u = InputSignal::sinusoid(1.0, 0.5, 0.0, 1).unwrap();
        assert!(matches!(
            hierarchical_bound(&sys, &rom, &hier, &u, &grid()),
            Err(Error::NotPrefix)
        ));
    }

    #[test]
    fn alp_requires_error_system() {
        let sys = small_system();
        let v = Basis::from_columns(&sys, DMatrix::identity(4, 1)).unwrap();
        let rom = reduce(&sys, &v).unwrap();
        let u = InputSignal::sinusoid(1.0, 0.5, 0.0, 1).unwrap();
        assert!(alp_bound(&sys, &rom, &rom, &u, &grid()).is_err());
    }

    #[test]
    fn prop1_on_small_system() {
        let sys = small_system();
        let v = Basis::from_columns(
            &sys,
            DMatrix::from_diagonal(&dvector![1.0, 0.5_f64.sqrt(), 1.0, 1.0])
                .columns(0, 2)
                .into_owned(),
        )
        .unwrap();
        assert!(v.is_h_orthonormal());
        let h_diag = [1.0_f64, 2.0, 1.5, 1.0];
        let v_plus = DMatrix::from_fn(4, 1, |i, _| if i == 2 { 1.0 / h_diag[2].sqrt() } else { 0.0 });
        let u = InputSignal::sinusoid(1.0, 0.3, 0.0, 1).unwrap();
        let report = certify_prop1(&sys, &v, &v_plus, &u, &grid(), 1e-8).unwrap();
        assert!(report.properties.x0_zero);
        assert_eq!(report.status, Prop1Status::Certified, "{}", report.relative_deviation);
        assert!(report.initial_condition_defect == 0.0);
    }
}
