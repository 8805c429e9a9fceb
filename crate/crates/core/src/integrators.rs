//! Time integration of full and reduced linear systems.
//!
//! [`solve_implicit_midpoint`] is the production integrator. It factors the
//! step matrix once and samples the input at interval midpoints.
//! [`solve_expm_oracle`] propagates the closed-form solution with dense
//! matrix exponentials and Gauss-Legendre quadrature of the input
//! convolution; it exists to produce reference trajectories.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use crate::error::{shape_err, Error, Result};
use crate::phcore::{InputSignal, PhSystem};

/// Largest state dimension accepted by the dense exponential oracle.
pub const DEFAULT_ORACLE_LIMIT: usize = 512;

/// Uniform time grid on `[t0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    n_steps: usize,
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite()) {
            return Err(Error::InvalidGrid("non-finite end points".into()));
        }
        if t_end <= t0 {
            return Err(Error::InvalidGrid(format!("T = {t_end} must exceed t0 = {t0}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be positive".into()));
        }
        let dt = (t_end - t0) / n_steps as f64;
        let mut times: Vec<f64> = (0..=n_steps).map(|k| t0 + k as f64 * dt).collect();
        times[n_steps] = t_end;
        Ok(Self {
            t0,
            t_end,
            n_steps,
            times,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t0) / self.n_steps as f64
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Midpoint of step `k`, i.e. of `[t_k, t_{k+1}]`.
    pub fn midpoint(&self, k: usize) -> f64 {
        0.5 * (self.times[k] + self.times[k + 1])
    }
}

/// State samples on a time grid; column `k` holds the state at `t_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    states: DMatrix<f64>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, states: DMatrix<f64>) -> Result<Self> {
        if states.ncols() != grid.len() {
            return Err(shape_err("trajectory samples", grid.len(), states.ncols()));
        }
        if states.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trajectory"));
        }
        Ok(Self { grid, states })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// `d x (n_steps + 1)` sample matrix.
    pub fn states(&self) -> &DMatrix<f64> {
        &self.states
    }

    pub fn into_states(self) -> DMatrix<f64> {
        self.states
    }

    pub fn dim(&self) -> usize {
        self.states.nrows()
    }

    pub fn state(&self, k: usize) -> DVector<f64> {
        self.states.column(k).into_owned()
    }
}

/// `M z' = A z + G w(t)`, `z(t0) = z0`, with `M` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct GeneralizedLti {
    m: DMatrix<f64>,
    a: DMatrix<f64>,
    g: DMatrix<f64>,
    z0: DVector<f64>,
    m_chol: Cholesky<f64, Dyn>,
}

impl GeneralizedLti {
    pub fn new(m: DMatrix<f64>, a: DMatrix<f64>, g: DMatrix<f64>, z0: DVector<f64>) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d {
            return Err(shape_err(
                "mass matrix",
                format!("{d}x{d}"),
                format!("{}x{}", d, m.ncols()),
            ));
        }
        if a.nrows() != d || a.ncols() != d {
            return Err(shape_err(
                "A",
                format!("{d}x{d}"),
                format!("{}x{}", a.nrows(), a.ncols()),
            ));
        }
        if g.nrows() != d {
            return Err(shape_err("G rows", d, g.nrows()));
        }
        if z0.len() != d {
            return Err(shape_err("z0 length", d, z0.len()));
        }
        let m_chol = Cholesky::new((&m + m.transpose()) * 0.5).ok_or_else(|| Error::NotSpd("mass matrix".into()))?;
        Ok(Self { m, a, g, z0, m_chol })
    }

    /// Standard form of a full-order pH system: `M = I`, `A = (J - D) H`, `G = B`.
    pub fn from_ph(sys: &PhSystem) -> Self {
        let n = sys.dim();
        Self::new(
            DMatrix::identity(n, n),
            sys.system_matrix().clone(),
            sys.b().clone(),
            sys.x0().clone(),
        )
        .expect("validated pH system has consistent shapes")
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.g.ncols()
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn z0(&self) -> &DVector<f64> {
        &self.z0
    }

    pub fn with_initial_state(&self, z0: DVector<f64>) -> Result<Self> {
        Self::new(self.m.clone(), self.a.clone(), self.g.clone(), z0)
    }

    /// Standard-form pair `(M^{-1} A, M^{-1} G)`.
    pub fn standard_form(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (self.m_chol.solve(&self.a), self.m_chol.solve(&self.g))
    }
}

fn lu_is_singular(lu: &LU<f64, Dyn, Dyn>) -> bool {
    let u = lu.u();
    let n = u.nrows();
    if n == 0 {
        return false;
    }
    let diag = u.diagonal();
    let max = diag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    max.is_nan() || max <= 0.0 || min <= n as f64 * f64::EPSILON * max
}

/// Implicit midpoint integration with an input signal sampled at the step
/// midpoints.
pub fn solve_implicit_midpoint(sys: &GeneralizedLti, w: &InputSignal, grid: &TimeGrid) -> Result<Trajectory> {
    if w.dim() != sys.n_inputs() {
        return Err(shape_err("input dimension", sys.n_inputs(), w.dim()));
    }
    w.check_covers(grid.t0(), grid.t_end())?;
    solve_implicit_midpoint_with(sys, grid, |k, _| Ok(w.evaluate(grid.midpoint(k))))
}

/// Implicit midpoint integration with an arbitrary forcing. `forcing(k, t)`
/// returns the input `w` on step `k`, with `t` the step midpoint.
///
/// Each step solves
/// `(M - dt/2 A) z_{k+1} = (M + dt/2 A) z_k + dt G w_{k+1/2}`
/// with a single LU factorization shared by all steps.
pub fn solve_implicit_midpoint_with<F>(sys: &GeneralizedLti, grid: &TimeGrid, mut forcing: F) -> Result<Trajectory>
where
    F: FnMut(usize, f64) -> Result<DVector<f64>>,
{
    let dt = grid.dt();
    let half = 0.5 * dt;
    let lhs = &sys.m - &sys.a * half;
    let rhs = &sys.m + &sys.a * half;
    let lu = lhs.lu();
    if lu_is_singular(&lu) {
        return Err(Error::SingularStep);
    }

    let d = sys.dim();
    let mut states = DMatrix::zeros(d, grid.len());
    states.set_column(0, &sys.z0);
    let mut z = sys.z0.clone();
    for k in 0..grid.n_steps() {
        let w = forcing(k, grid.midpoint(k))?;
        if w.len() != sys.n_inputs() {
            return Err(shape_err("forcing dimension", sys.n_inputs(), w.len()));
        }
        let mut b = &rhs * &z;
        b.gemv(dt, &sys.g, &w, 1.0);
        z = lu.solve(&b).ok_or(Error::SingularStep)?;
        states.set_column(k + 1, &z);
    }
    Trajectory::new(grid.clone(), states)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let table: (&[f64], &[f64]) = match n {
        1 => (&[0.0], &[2.0]),
        2 => (&[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8], &[1.0, 1.0]),
        3 => (
            &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
            &[
                0.555_555_555_555_555_6,
                0.888_888_888_888_888_8,
                0.555_555_555_555_555_6,
            ],
        ),
        4 => (
            &[
                -0.861_136_311_594_052_6,
                -0.339_981_043_584_856_3,
                0.339_981_043_584_856_3,
                0.861_136_311_594_052_6,
            ],
            &[
                0.347_854_845_137_453_9,
                0.652_145_154_862_546_1,
                0.652_145_154_862_546_1,
                0.347_854_845_137_453_9,
            ],
        ),
        5 => (
            &[
                -0.906_179_845_938_664,
                -0.538_469_310_105_683_1,
                0.0,
                0.538_469_310_105_683_1,
                0.906_179_845_938_664,
            ],
            &[
                0.236_926_885_056_189_1,
                0.478_628_670_499_366_5,
                0.568_888_888_888_888_9,
                0.478_628_670_499_366_5,
                0.236_926_885_056_189_1,
            ],
        ),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "Gauss-Legendre rule with {n} nodes is not tabulated (1..=5)"
            )))
        }
    };
    Ok((table.0.to_vec(), table.1.to_vec()))
}

/// Settings of the exponential oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    pub limit: usize,
    pub gauss_nodes: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            limit: DEFAULT_ORACLE_LIMIT,
            gauss_nodes: 5,
        }
    }
}

/// Exact propagation of `z' = A z + G u(t)` on a uniform grid:
///
/// `z_{k+1} = exp(A dt) z_k + int_0^dt exp(A (dt - s)) G u(t_k + s) ds`
///
/// with the per-step convolution evaluated by Gauss-Legendre quadrature
/// against exponentials precomputed at the nodes.
pub fn solve_expm_lti(
    a: &DMatrix<f64>,
    g: &DMatrix<f64>,
    z0: &DVector<f64>,
    u: &InputSignal,
    grid: &TimeGrid,
    opts: OracleOptions,
) -> Result<Trajectory> {
    let d = a.nrows();
    if d > opts.limit {
        return Err(Error::OracleTooLarge {
            n: d,
            limit: opts.limit,
        });
    }
    if a.ncols() != d || g.nrows() != d || z0.len() != d {
        return Err(shape_err(
            "oracle system",
            d,
            format!("A {}x{}, G rows {}, z0 {}", a.nrows(), a.ncols(), g.nrows(), z0.len()),
        ));
    }
    if u.dim() != g.ncols() {
        return Err(shape_err("input dimension", g.ncols(), u.dim()));
    }
    u.check_covers(grid.t0(), grid.t_end())?;

    let dt = grid.dt();
    let (nodes, weights) = gauss_legendre(opts.gauss_nodes)?;
    let step = (a * dt).exp();
    // offsets s_i in [0, dt] and the matching kernels exp(A (dt - s_i)) G
    let offsets: Vec<f64> = nodes.iter().map(|x| 0.5 * dt * (x + 1.0)).collect();
    let kernels: Vec<DMatrix<f64>> = offsets
        .iter()
        .zip(&weights)
        .map(|(&s, &w)| (a * (dt - s)).exp() * g * (0.5 * dt * w))
        .collect();
    let forced = !matches!(u, InputSignal::Zero { .. });

    let mut states = DMatrix::zeros(d, grid.len());
    states.set_column(0, z0);
    let mut z = z0.clone();
    for k in 0..grid.n_steps() {
        let tk = grid.times()[k];
        let mut next = &step * &z;
        if forced {
            for (kernel, &s) in kernels.iter().zip(&offsets) {
                next.gemv(1.0, kernel, &u.evaluate(tk + s), 1.0);
            }
        }
        z = next;
        states.set_column(k + 1, &z);
    }
    Trajectory::new(grid.clone(), states)
}

/// Gauss-Legendre rule mapped to `[0, 1]`: fractions and weights summing
/// to one.
pub fn unit_gauss_rule(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (nodes, weights) = gauss_legendre(n)?;
    Ok((
        nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights.iter().map(|w| 0.5 * w).collect(),
    ))
}

/// Oracle solution with additional states at the Gauss-Legendre nodes
/// `t_k + tau_i dt` of every step.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTrajectory {
    pub traj: Trajectory,
    /// `tau_i` in `(0, 1)`.
    pub fractions: Vec<f64>,
    /// Quadrature weights on `[0, 1]`.
    pub weights: Vec<f64>,
    /// Column `k * q + i` holds the state at `t_k + tau_i dt`.
    pub interior: DMatrix<f64>,
}

impl DenseTrajectory {
    pub fn n_nodes(&self) -> usize {
        self.fractions.len()
    }

    /// Times of the interior columns.
    pub fn interior_times(&self) -> Vec<f64> {
        let grid = self.traj.grid();
        let dt = grid.dt();
        let mut out = Vec::with_capacity(self.interior.ncols());
        for &tk in &grid.times()[..grid.n_steps()] {
            out.extend(self.fractions.iter().map(|tau| tk + tau * dt));
        }
        out
    }
}

/// [`solve_expm_lti`] plus states at the Gauss-Legendre nodes inside each
/// step. The partial convolutions `int_0^{tau dt}` use the same rule scaled
/// to the shorter interval.
pub fn solve_expm_dense(
    a: &DMatrix<f64>,
    g: &DMatrix<f64>,
    z0: &DVector<f64>,
    u: &InputSignal,
    grid: &TimeGrid,
    opts: OracleOptions,
) -> Result<DenseTrajectory> {
    let traj = solve_expm_lti(a, g, z0, u, grid, opts)?;
    let d = a.nrows();
    let dt = grid.dt();
    let (fractions, weights) = unit_gauss_rule(opts.gauss_nodes)?;
    let q = fractions.len();
    let forced = !matches!(u, InputSignal::Zero { .. });

    // partial[i] = exp(A tau_i dt); kernels[i][j] = exp(A tau_i dt (1 - tau_j)) G tau_i dt w_j
    let partial: Vec<DMatrix<f64>> = fractions.iter().map(|tau| (a * (tau * dt)).exp()).collect();
    let kernels: Vec<Vec<DMatrix<f64>>> = fractions
        .iter()
        .map(|tau| {
            let h = tau * dt;
            fractions
                .iter()
                .zip(&weights)
                .map(|(sigma, w)| (a * (h * (1.0 - sigma))).exp() * g * (h * w))
                .collect()
        })
        .collect();

    let mut interior = DMatrix::zeros(d, grid.n_steps() * q);
    for k in 0..grid.n_steps() {
        let tk = grid.times()[k];
        let zk = traj.states().column(k);
        for i in 0..q {
            let mut z = &partial[i] * zk;
            if forced {
                let h = fractions[i] * dt;
                for (kernel, sigma) in kernels[i].iter().zip(&fractions) {
                    z.gemv(1.0, kernel, &u.evaluate(tk + h * sigma), 1.0);
                }
            }
            interior.set_column(k * q + i, &z);
        }
    }
    Ok(DenseTrajectory {
        traj,
        fractions,
        weights,
        interior,
    })
}

/// Reference solution of a full-order pH system by the exponential oracle.
pub fn solve_expm_oracle(sys: &PhSystem, u: &InputSignal, grid: &TimeGrid) -> Result<Trajectory> {
    solve_expm_oracle_with(sys, u, grid, OracleOptions::default())
}

pub fn solve_expm_oracle_with(
    sys: &PhSystem,
    u: &InputSignal,
    grid: &TimeGrid,
    opts: OracleOptions,
) -> Result<Trajectory> {
    solve_expm_lti(sys.system_matrix(), sys.b(), sys.x0(), u, grid, opts)
}

/// Exponential oracle for a system with a mass matrix.
pub fn solve_expm_generalized(
    sys: &GeneralizedLti,
    u: &InputSignal,
    grid: &TimeGrid,
    opts: OracleOptions,
) -> Result<Trajectory> {
    let (a, g) = sys.standard_form();
    solve_expm_lti(&a, &g, sys.z0(), u, grid, opts)
}

/// Which integrator to use for a full or reduced solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Dense exponential oracle.
    Oracle,
    /// Implicit midpoint.
    #[default]
    Midpoint,
}

/// Solves the full-order system with the chosen integrator.
pub fn solve_full(sys: &PhSystem, u: &InputSignal, grid: &TimeGrid, solver: SolverKind) -> Result<Trajectory> {
    match solver {
        SolverKind::Oracle => solve_expm_oracle(sys, u, grid),
        SolverKind::Midpoint => solve_implicit_midpoint(&GeneralizedLti::from_ph(sys), u, grid),
    }
}

/// Cumulative composite trapezoid rule, `out[0] = 0`.
pub(crate) fn trapezoid_cumulative(dt: f64, values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Running integral of a nonnegative series on the grid by the cumulative
/// trapezoid rule. Negative samples are allowed but logged.
pub fn integrate_series(grid: &TimeGrid, values: &[f64]) -> Result<Vec<f64>> {
    if values.len() != grid.len() {
        return Err(shape_err("series length", grid.len(), values.len()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("integrand"));
    }
    let negative = values.iter().filter(|&&v| v < 0.0).count();
    if negative > 0 {
        log::warn!("integrate_series: {negative} negative samples in a series expected to hold norms");
    }
    Ok(trapezoid_cumulative(grid.dt(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn grid_basics() {
        let g = TimeGrid::new(0.0, 1.0, 10).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.times()[0], 0.0);
        assert_eq!(g.times()[10], 1.0);
        assert!((g.dt() - 0.1).abs() < 1e-16);
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        assert!(TimeGrid::new(0.0, f64::NAN, 3).is_err());
    }

    #[test]
    fn no_dynamics_gives_constant_trajectory() {
        let sys = GeneralizedLti::new(
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 1),
            dvector![1.0, -2.0],
        )
        .unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 7).unwrap();
        let traj = solve_implicit_midpoint(&sys, &InputSignal::zero(1), &grid).unwrap();
        for k in 0..grid.len() {
            assert_eq!(traj.state(k), dvector![1.0, -2.0]);
        }
    }

    #[test]
    fn scalar_decay_single_step() {
        let sys = GeneralizedLti::new(dmatrix![1.0], dmatrix![-1.0], dmatrix![0.0], dvector![1.0]).unwrap();
        let grid = TimeGrid::new(0.0, 0.1, 1).unwrap();
        let traj = solve_implicit_midpoint(&sys, &InputSignal::zero(1), &grid).unwrap();
        assert!((traj.state(1)[0] - 0.95 / 1.05).abs() < 1e-15);
    }

    #[test]
    fn singular_step_matrix() {
        // M - dt/2 A = 1 - 0.5 * 2 = 0
        let sys = GeneralizedLti::new(dmatrix![1.0], dmatrix![2.0], dmatrix![0.0], dvector![1.0]).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 1).unwrap();
        assert!(matches!(
            solve_implicit_midpoint(&sys, &InputSignal::zero(1), &grid),
            Err(Error::SingularStep)
        ));
    }

    #[test]
    fn non_spd_mass_rejected() {
        assert!(GeneralizedLti::new(dmatrix![-1.0], dmatrix![0.0], dmatrix![0.0], dvector![0.0]).is_err());
    }

    #[test]
    fn oracle_scalar_decay() {
        let n = 3;
        let sys = PhSystem::new(
            DMatrix::zeros(n, n),
            DMatrix::identity(n, n),
            DMatrix::identity(n, n),
            DMatrix::zeros(n, 1),
            dvector![1.0, -2.0, 0.5],
        )
        .unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 20).unwrap();
        let traj = solve_expm_oracle(&sys, &InputSignal::zero(1), &grid).unwrap();
        for (k, &t) in grid.times().iter().enumerate() {
            let expected = sys.x0() * (-t).exp();
            assert!((traj.state(k) - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn oracle_constant_forcing_matches_closed_form() {
        // x' = -x + 1, x(0) = 0  =>  x(t) = 1 - e^{-t}
        let sys = PhSystem::new(
            dmatrix![0.0],
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![1.0],
            dvector![0.0],
        )
        .unwrap();
        let grid = TimeGrid::new(0.0, 3.0, 30).unwrap();
        let u = InputSignal::tabulated(vec![0.0, 3.0], vec![dvector![1.0], dvector![1.0]]).unwrap();
        let traj = solve_expm_oracle(&sys, &u, &grid).unwrap();
        for (k, &t) in grid.times().iter().enumerate() {
            assert!((traj.state(k)[0] - (1.0 - (-t).exp())).abs() < 1e-14);
        }
    }

    #[test]
    fn oracle_rejects_large_systems() {
        let sys = PhSystem::new(
            DMatrix::zeros(3, 3),
            DMatrix::zeros(3, 3),
            DMatrix::identity(3, 3),
            DMatrix::zeros(3, 1),
            DVector::zeros(3),
        )
        .unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let opts = OracleOptions {
            limit: 2,
            gauss_nodes: 5,
        };
        assert!(matches!(
            solve_expm_oracle_with(&sys, &InputSignal::zero(1), &grid, opts),
            Err(Error::OracleTooLarge { n: 3, limit: 2 })
        ));
    }

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for n in 1..=5 {
            let (x, w) = gauss_legendre(n).unwrap();
            for p in 0..(2 * n) {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-14, "n={n} p={p}");
            }
        }
        assert!(gauss_legendre(6).is_err());
    }

    #[test]
    fn integrate_series_examples() {
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let zeros = integrate_series(&grid, &[0.0; 11]).unwrap();
        assert!(zeros.iter().all(|&v| v == 0.0));

        let ones = integrate_series(&grid, &[1.0; 11]).unwrap();
        for (k, v) in ones.iter().enumerate() {
            assert!((v - k as f64 / 10.0).abs() < 1e-15);
        }

        let linear = integrate_series(&grid, grid.times()).unwrap();
        assert!((linear[10] - 0.5).abs() < 1e-15);

        assert!(integrate_series(&grid, &[1.0; 3]).is_err());
        let mut bad = [0.0; 11];
        bad[3] = f64::NAN;
        assert!(integrate_series(&grid, &bad).is_err());
    }
}
