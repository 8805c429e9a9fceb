//! Port-Hamiltonian system types, structural validation and the energy
//! inner product.
//!
//! A standard linear pH system reads
//!
//! ```text
//! x'(t) = (J - D) H x(t) + B u(t),   x(t0) = x0
//! y(t)  = B^T H x(t)
//! ```
//!
//! with `J` skew, `D` symmetric positive semidefinite and `H` symmetric
//! positive definite. Every energy quantity is evaluated through the cached
//! Cholesky factor `H = L L^T`: `||x||_H = ||L^T x||_2` and the induced
//! operator norm is the spectral norm of `L^T A L^{-T}`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{shape_err, Error, Result};
use crate::integrators::{trapezoid_cumulative, Trajectory};

/// Tolerances used by structural validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance on symmetry / skew-symmetry residuals.
    pub structural: f64,
    /// Absolute tolerance on the smallest eigenvalue of `D`.
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-10,
            psd: 1e-10,
        }
    }
}

/// One named structural check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Measured residual (norm or eigenvalue, depending on the check).
    pub residual: f64,
    /// Threshold the residual was compared against.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.checks {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            write!(
                f,
                "{} {} (residual {:e}, threshold {:e})",
                c.name,
                if c.passed { "ok" } else { "FAILED" },
                c.residual,
                c.threshold
            )?;
        }
        Ok(())
    }
}

/// Raw, unvalidated standard-form matrices as they come out of a file or a
/// generator.
#[derive(Debug, Clone, PartialEq)]
pub struct PhMatrices {
    pub j: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub x0: DVector<f64>,
}

fn check_square(what: &'static str, m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(shape_err(
            what,
            format!("{n}x{n}"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(())
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).norm()
}

fn skew_defect(m: &DMatrix<f64>) -> f64 {
    (m + m.transpose()).norm()
}

fn sym_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn skew_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m - m.transpose()) * 0.5
}

pub(crate) fn min_eigenvalue(sym: &DMatrix<f64>) -> f64 {
    if sym.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(sym.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn skew_check(name: &'static str, j: &DMatrix<f64>, tol: f64) -> Check {
    let residual = skew_defect(j);
    let threshold = tol * j.norm().max(1.0);
    Check {
        name,
        passed: residual <= threshold,
        residual,
        threshold,
    }
}

pub(crate) fn sym_check(name: &'static str, d: &DMatrix<f64>, tol: f64) -> Check {
    let residual = asymmetry(d);
    let threshold = tol * d.norm().max(1.0);
    Check {
        name,
        passed: residual <= threshold,
        residual,
        threshold,
    }
}

pub(crate) fn psd_check(name: &'static str, d: &DMatrix<f64>, tol_psd: f64) -> Check {
    let lmin = min_eigenvalue(&sym_part(d));
    Check {
        name,
        passed: lmin >= -tol_psd,
        residual: lmin,
        threshold: -tol_psd,
    }
}

/// SPD check: symmetric to relative tolerance and the Cholesky factor of the
/// symmetric part reproduces the matrix.
fn spd_check(h: &DMatrix<f64>, tol: f64) -> (Check, Option<Cholesky<f64, Dyn>>) {
    let hnorm = h.norm();
    let asym = asymmetry(h);
    let threshold = tol * hnorm;
    let chol = Cholesky::new(sym_part(h));
    let passed = asym <= threshold
        && match &chol {
            Some(c) => {
                let l = c.l();
                (&l * l.transpose() - h).norm() <= tol * hnorm
            }
            None => false,
        };
    (
        Check {
            name: "H_spd",
            passed,
            residual: asym,
            threshold,
        },
        chol,
    )
}

impl PhMatrices {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    fn check_shapes(&self) -> Result<()> {
        let n = self.h.nrows();
        check_square("H", &self.h, n)?;
        check_square("J", &self.j, n)?;
        check_square("D", &self.d, n)?;
        if self.b.nrows() != n {
            return Err(shape_err("B rows", n, self.b.nrows()));
        }
        if self.x0.len() != n {
            return Err(shape_err("x0 length", n, self.x0.len()));
        }
        Ok(())
    }

    /// Runs the structural checks `shape_consistency`, `J_skew`, `D_sym`,
    /// `D_psd` and `H_spd`.
    pub fn validate(&self, tol: &Tolerances) -> Result<ValidationReport> {
        self.check_shapes()?;
        let shape = Check {
            name: "shape_consistency",
            passed: true,
            residual: 0.0,
            threshold: 0.0,
        };
        let (h_spd, _) = spd_check(&self.h, tol.structural);
        Ok(ValidationReport {
            checks: vec![
                shape,
                skew_check("J_skew", &self.j, tol.structural),
                sym_check("D_sym", &self.d, tol.structural),
                psd_check("D_psd", &self.d, tol.psd),
                h_spd,
            ],
        })
    }
}

/// Free-function form of [`PhMatrices::validate`].
pub fn validate_ph_structure(m: &PhMatrices, tol: &Tolerances) -> Result<ValidationReport> {
    m.validate(tol)
}

/// A validated standard-form port-Hamiltonian system.
///
/// Immutable after construction. The Cholesky factor of `H` and the system
/// matrix `(J - D) H` are computed once in the constructor.
#[derive(Debug, Clone)]
pub struct PhSystem {
    j: DMatrix<f64>,
    d: DMatrix<f64>,
    h: DMatrix<f64>,
    b: DMatrix<f64>,
    x0: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    l: DMatrix<f64>,
    a: DMatrix<f64>,
    tol: Tolerances,
}

impl PhSystem {
    pub fn new(j: DMatrix<f64>, d: DMatrix<f64>, h: DMatrix<f64>, b: DMatrix<f64>, x0: DVector<f64>) -> Result<Self> {
        Self::from_matrices(PhMatrices { j, d, h, b, x0 }, Tolerances::default())
    }

    /// Validates and symmetrizes the matrices. `J`, `D` and `H` whose
    /// (skew-)asymmetry is within tolerance are replaced by their exact
    /// (skew-)symmetric parts; larger defects fail validation.
    pub fn from_matrices(m: PhMatrices, tol: Tolerances) -> Result<Self> {
        let report = m.validate(&tol)?;
        if !report.passed() {
            return Err(Error::Validation(report));
        }
        let PhMatrices { j, d, h, b, x0 } = m;
        let j = skew_part(&j);
        let d = sym_part(&d);
        let h = sym_part(&h);
        let chol = Cholesky::new(h.clone()).ok_or_else(|| Error::NotSpd("Cholesky failed".into()))?;
        let l = chol.l();
        let a = (&j - &d) * &h;
        Ok(Self {
            j,
            d,
            h,
            b,
            x0,
            chol,
            l,
            a,
            tol,
        })
    }

    /// Same system with a different initial state.
    pub fn with_initial_state(&self, x0: DVector<f64>) -> Result<Self> {
        if x0.len() != self.dim() {
            return Err(shape_err("x0 length", self.dim(), x0.len()));
        }
        let mut out = self.clone();
        out.x0 = x0;
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// Lower-triangular Cholesky factor `L` with `H = L L^T`.
    pub fn h_factor(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn h_cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.chol
    }

    /// System matrix `(J - D) H`.
    pub fn system_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn to_matrices(&self) -> PhMatrices {
        PhMatrices {
            j: self.j.clone(),
            d: self.d.clone(),
            h: self.h.clone(),
            b: self.b.clone(),
            x0: self.x0.clone(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        // shapes were checked at construction
        self.to_matrices()
            .validate(&self.tol)
            .expect("shapes validated at construction")
    }

    fn check_vec(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(shape_err("state length", self.dim(), x.len()));
        }
        Ok(())
    }

    /// `||x||_H = ||L^T x||_2`.
    pub fn energy_norm(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_vec(x)?;
        Ok(self.energy_norm_unchecked(x))
    }

    pub(crate) fn energy_norm_unchecked(&self, x: &DVector<f64>) -> f64 {
        self.l.tr_mul(x).norm()
    }

    /// `<x, z>_H = x^T H z`.
    pub fn energy_inner(&self, x: &DVector<f64>, z: &DVector<f64>) -> Result<f64> {
        self.check_vec(x)?;
        self.check_vec(z)?;
        Ok(x.dot(&(&self.h * z)))
    }

    /// Spectral norm of `L^T A L^{-T}`, which equals the energy operator norm
    /// `||H^{1/2} A H^{-1/2}||_2`.
    pub fn energy_operator_norm(&self, a: &DMatrix<f64>) -> Result<f64> {
        let n = self.dim();
        check_square("operator", a, n)?;
        if n == 0 {
            return Ok(0.0);
        }
        // X = L^T A L^{-T}  <=>  X^T = L^{-1} (L^T A)^T
        let lta = self.l.tr_mul(a);
        let xt = self
            .l
            .solve_lower_triangular(&lta.transpose())
            .ok_or_else(|| Error::NotSpd("singular Cholesky factor".into()))?;
        let sv = xt.singular_values();
        Ok(sv.iter().copied().fold(0.0, f64::max))
    }

    /// Energy `(1/2) x^T H x`, evaluated as `(1/2) ||L^T x||^2`.
    pub fn hamiltonian(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_vec(x)?;
        let n = self.energy_norm_unchecked(x);
        Ok(0.5 * n * n)
    }

    /// Port output `y = B^T H x`.
    pub fn output(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_vec(x)?;
        Ok(self.b.tr_mul(&(&self.h * x)))
    }
}

/// Descriptor-form pH system `E x~' = (J - D) Q x~ + B u`.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorPhSystem {
    pub e: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub x0_tilde: DVector<f64>,
}

/// How the descriptor initial state is mapped to the standard state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialStateConvention {
    /// `x0 = E x~0`, consistent with the coordinate change `x = E x~`.
    #[default]
    Transformed,
    /// `x0 = E^{-1} x~0`.
    Literal,
}

impl DescriptorPhSystem {
    pub fn dim(&self) -> usize {
        self.e.nrows()
    }

    /// Embeds a standard system as `E = I`, `Q = H`.
    pub fn from_standard(sys: &PhSystem) -> Self {
        Self {
            e: DMatrix::identity(sys.dim(), sys.dim()),
            q: sys.h().clone(),
            j: sys.j().clone(),
            d: sys.d().clone(),
            b: sys.b().clone(),
            x0_tilde: sys.x0().clone(),
        }
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<ValidationReport> {
        let n = self.dim();
        check_square("E", &self.e, n)?;
        check_square("Q", &self.q, n)?;
        check_square("J", &self.j, n)?;
        check_square("D", &self.d, n)?;
        if self.b.nrows() != n {
            return Err(shape_err("B rows", n, self.b.nrows()));
        }
        if self.x0_tilde.len() != n {
            return Err(shape_err("x0 length", n, self.x0_tilde.len()));
        }
        let etq = self.e.tr_mul(&self.q);
        let residual = (&etq - etq.transpose()).norm();
        let threshold = tol.structural * etq.norm();
        Ok(ValidationReport {
            checks: vec![
                Check {
                    name: "shape_consistency",
                    passed: true,
                    residual: 0.0,
                    threshold: 0.0,
                },
                Check {
                    name: "EtQ_sym",
                    passed: residual <= threshold,
                    residual,
                    threshold,
                },
                skew_check("J_skew", &self.j, tol.structural),
                sym_check("D_sym", &self.d, tol.structural),
                psd_check("D_psd", &self.d, tol.psd),
            ],
        })
    }
}

/// Converts a descriptor system with nonsingular `E` to standard form with
/// `H = Q E^{-1}`.
pub fn descriptor_to_standard(
    dsys: &DescriptorPhSystem,
    convention: InitialStateConvention,
    tol: Tolerances,
) -> Result<PhSystem> {
    let report = dsys.validate(&tol)?;
    if !report.passed() {
        return Err(Error::Validation(report));
    }
    let n = dsys.dim();
    let lu = dsys.e.clone().lu();
    let u = lu.u();
    let diag = u.diagonal();
    let umax = diag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let umin = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if n > 0 && (umax == 0.0 || umin <= (n as f64) * f64::EPSILON * umax) {
        return Err(Error::SingularE);
    }

    // H = Q E^{-1}  <=>  E^T H^T = Q^T
    let ht = dsys
        .e
        .transpose()
        .lu()
        .solve(&dsys.q.transpose())
        .ok_or(Error::SingularE)?;
    let h = ht.transpose();
    let asym = asymmetry(&h);
    if asym > tol.structural * h.norm() {
        return Err(Error::NotSpd(format!(
            "Q E^-1 is not symmetric (asymmetry {asym:e}); E and Q must commute"
        )));
    }
    let h = sym_part(&h);

    let x0 = match convention {
        InitialStateConvention::Transformed => &dsys.e * &dsys.x0_tilde,
        InitialStateConvention::Literal => lu.solve(&dsys.x0_tilde).ok_or(Error::SingularE)?,
    };

    PhSystem::from_matrices(
        PhMatrices {
            j: dsys.j.clone(),
            d: dsys.d.clone(),
            h,
            b: dsys.b.clone(),
            x0,
        },
        tol,
    )
    .map_err(|e| match e {
        Error::Validation(r) if r.check("H_spd").is_some_and(|c| !c.passed) => Error::NotSpd(r.to_string()),
        other => other,
    })
}

/// Time-dependent input `u(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSignal {
    Zero {
        dim: usize,
    },
    /// `amplitude * sin(2 pi frequency t + phase)` on every channel.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        dim: usize,
    },
    /// Piecewise-linear interpolation of samples.
    Tabulated {
        times: Vec<f64>,
        values: Vec<DVector<f64>>,
    },
}

impl InputSignal {
    pub fn zero(dim: usize) -> Self {
        Self::Zero { dim }
    }

    pub fn sinusoid(amplitude: f64, frequency: f64, phase: f64, dim: usize) -> Result<Self> {
        if !(amplitude.is_finite() && frequency.is_finite() && phase.is_finite()) {
            return Err(Error::InvalidInput("non-finite sinusoid parameter".into()));
        }
        Ok(Self::Sinusoid {
            amplitude,
            frequency,
            phase,
            dim,
        })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<DVector<f64>>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidInput("empty table".into()));
        }
        if times.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample time".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("sample times must be strictly increasing".into()));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidInput("inconsistent sample dimensions".into()));
        }
        if values.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput("non-finite sample value".into()));
        }
        Ok(Self::Tabulated { times, values })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Zero { dim } | Self::Sinusoid { dim, .. } => *dim,
            Self::Tabulated { values, .. } => values[0].len(),
        }
    }

    /// Errors with `GridMismatch` if a table does not cover `[t0, t_end]`.
    pub fn check_covers(&self, t0: f64, t_end: f64) -> Result<()> {
        if let Self::Tabulated { times, .. } = self {
            let (first, last) = (times[0], times[times.len() - 1]);
            let slack = 1e-12 * (t_end - t0).abs().max(1.0);
            if first > t0 + slack || last < t_end - slack {
                return Err(Error::GridMismatch(format!(
                    "table spans [{first}, {last}] but the grid spans [{t0}, {t_end}]"
                )));
            }
        }
        Ok(())
    }

    /// Evaluates `u(t)`. Tables are clamped outside their range; call
    /// [`check_covers`](Self::check_covers) first.
    pub fn evaluate(&self, t: f64) -> DVector<f64> {
        match self {
            Self::Zero { dim } => DVector::zeros(*dim),
            Self::Sinusoid {
                amplitude,
                frequency,
                phase,
                dim,
            } => DVector::from_element(*dim, amplitude * (2.0 * PI * frequency * t + phase).sin()),
            Self::Tabulated { times, values } => {
                let last = times.len() - 1;
                if t <= times[0] {
                    return values[0].clone();
                }
                if t >= times[last] {
                    return values[last].clone();
                }
                let k = times.partition_point(|&s| s <= t) - 1;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                &values[k] * (1.0 - w) + &values[k + 1] * w
            }
        }
    }
}

/// Result of [`check_dissipation_inequality`].
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationReport {
    pub passed: bool,
    /// `max_k [H(x_k) - H(x_0) - int_0^{t_k} y^T u]`; negative when the
    /// inequality holds with margin.
    pub worst_violation: f64,
    pub worst_index: usize,
    pub slack_tol: f64,
}

/// Checks `H(x(t_k)) - H(x(t_0)) <= int y^T u dt + slack_tol` at every grid
/// point, with the supply rate integrated by the cumulative trapezoid rule.
pub fn check_dissipation_inequality(
    sys: &PhSystem,
    traj: &Trajectory,
    u: &InputSignal,
    slack_tol: f64,
) -> Result<DissipationReport> {
    if traj.dim() != sys.dim() {
        return Err(shape_err("trajectory dimension", sys.dim(), traj.dim()));
    }
    if u.dim() != sys.n_inputs() {
        return Err(shape_err("input dimension", sys.n_inputs(), u.dim()));
    }
    let grid = traj.grid();
    u.check_covers(grid.t0(), grid.t_end())?;

    let mut energy = Vec::with_capacity(grid.len());
    let mut supply = Vec::with_capacity(grid.len());
    for (k, &t) in grid.times().iter().enumerate() {
        let x = traj.state(k);
        energy.push(sys.hamiltonian(&x)?);
        supply.push(sys.output(&x)?.dot(&u.evaluate(t)));
    }
    let supplied = trapezoid_cumulative(grid.dt(), &supply);

    let mut worst = f64::NEG_INFINITY;
    let mut worst_index = 0;
    for k in 0..grid.len() {
        let v = energy[k] - energy[0] - supplied[k];
        if v > worst {
            worst = v;
            worst_index = k;
        }
    }
    Ok(DissipationReport {
        passed: worst <= slack_tol,
        worst_violation: worst,
        worst_index,
        slack_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn oscillator() -> PhMatrices {
        PhMatrices {
            j: dmatrix![0.0, 1.0; -1.0, 0.0],
            d: DMatrix::from_diagonal(&dvector![0.0, 0.1]),
            h: DMatrix::identity(2, 2),
            b: dmatrix![0.0; 1.0],
            x0: dvector![1.0, 0.0],
        }
    }

    fn diag_system(h: DVector<f64>) -> PhSystem {
        let n = h.len();
        PhSystem::new(
            DMatrix::zeros(n, n),
            DMatrix::zeros(n, n),
            DMatrix::from_diagonal(&h),
            DMatrix::zeros(n, 1),
            DVector::zeros(n),
        )
        .unwrap()
    }

    #[test]
    fn damped_oscillator_passes_every_check() {
        let report = oscillator().validate(&Tolerances::default()).unwrap();
        assert!(report.passed(), "{report}");
        let names: Vec<_> = report.checks.iter().map(|c| c.name).collect();
        assert_eq!(names, ["shape_consistency", "J_skew", "D_sym", "D_psd", "H_spd"]);
    }

    #[test]
    fn non_skew_j_is_reported() {
        let mut m = oscillator();
        m.j = dmatrix![0.0, 1.0; -0.9, 0.0];
        let report = m.validate(&Tolerances::default()).unwrap();
        let c = report.check("J_skew").unwrap();
        assert!(!c.passed);
        // J + J^T = [[0, 0.1], [0.1, 0]]
        assert!((c.residual - 0.02_f64.sqrt()).abs() < 1e-15);
        assert!(!report.passed());
        assert!(matches!(
            PhSystem::from_matrices(m, Tolerances::default()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn indefinite_d_is_reported() {
        let mut m = oscillator();
        m.d = DMatrix::from_diagonal(&dvector![-1e-3, 1.0]);
        let report = m.validate(&Tolerances::default()).unwrap();
        let c = report.check("D_psd").unwrap();
        assert!(!c.passed);
        assert!((c.residual + 1e-3).abs() < 1e-15);
    }

    #[test]
    fn indefinite_h_is_reported() {
        let mut m = oscillator();
        m.h = DMatrix::from_diagonal(&dvector![1.0, -1.0]);
        let report = m.validate(&Tolerances::default()).unwrap();
        assert!(!report.check("H_spd").unwrap().passed);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut m = oscillator();
        m.b = DMatrix::zeros(3, 1);
        assert!(matches!(
            m.validate(&Tolerances::default()),
            Err(Error::ShapeMismatch { .. })
        ));
        let mut m = oscillator();
        m.x0 = dvector![1.0];
        assert!(matches!(
            m.validate(&Tolerances::default()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let mut m = oscillator();
        m.h[(0, 1)] = 1e-14;
        let sys = PhSystem::from_matrices(m, Tolerances::default()).unwrap();
        assert_eq!(sys.h()[(0, 1)], sys.h()[(1, 0)]);
    }

    #[test]
    fn energy_norm_examples() {
        let sys = diag_system(dvector![1.0, 1.0]);
        assert_eq!(sys.energy_norm(&dvector![3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(sys.energy_norm(&dvector![0.0, 0.0]).unwrap(), 0.0);
        let sys = diag_system(dvector![4.0, 9.0]);
        let v = sys.energy_norm(&dvector![1.0, 1.0]).unwrap();
        assert!((v - 13.0_f64.sqrt()).abs() < 1e-15);
        assert!(sys.energy_norm(&dvector![1.0]).is_err());
    }

    #[test]
    fn energy_operator_norm_examples() {
        let sys = diag_system(dvector![4.0, 1.0]);
        let id = DMatrix::identity(2, 2);
        assert!((sys.energy_operator_norm(&id).unwrap() - 1.0).abs() < 1e-14);

        let sys_i = diag_system(dvector![1.0, 1.0]);
        let a = DMatrix::from_diagonal(&dvector![2.0, -3.0]);
        assert!((sys_i.energy_operator_norm(&a).unwrap() - 3.0).abs() < 1e-14);

        // L^T A L^{-T} = [[0, 2], [0, 0]] for H = diag(4, 1)
        let a = dmatrix![0.0, 1.0; 0.0, 0.0];
        assert!((sys.energy_operator_norm(&a).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_examples() {
        let sys = diag_system(dvector![1.0, 1.0]);
        assert_eq!(sys.hamiltonian(&dvector![0.0, 0.0]).unwrap(), 0.0);
        assert!((sys.hamiltonian(&dvector![1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        let sys = diag_system(dvector![2.0, 8.0]);
        assert!((sys.hamiltonian(&dvector![1.0, 0.5]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn descriptor_identity_e() {
        let h0 = dmatrix![2.0, 0.5; 0.5, 1.0];
        let dsys = DescriptorPhSystem {
            e: DMatrix::identity(2, 2),
            q: h0.clone(),
            j: dmatrix![0.0, 1.0; -1.0, 0.0],
            d: DMatrix::zeros(2, 2),
            b: dmatrix![1.0; 0.0],
            x0_tilde: dvector![0.3, -0.7],
        };
        let sys = descriptor_to_standard(&dsys, InitialStateConvention::default(), Tolerances::default()).unwrap();
        assert!((sys.h() - h0).norm() < 1e-15);
        assert_eq!(sys.x0(), &dvector![0.3, -0.7]);
    }

    #[test]
    fn descriptor_scalar_e() {
        let dsys = DescriptorPhSystem {
            e: DMatrix::identity(2, 2) * 2.0,
            q: DMatrix::identity(2, 2),
            j: DMatrix::zeros(2, 2),
            d: DMatrix::zeros(2, 2),
            b: DMatrix::zeros(2, 1),
            x0_tilde: dvector![1.0, 2.0],
        };
        let sys = descriptor_to_standard(&dsys, InitialStateConvention::Transformed, Tolerances::default()).unwrap();
        assert!((sys.h() - DMatrix::identity(2, 2) * 0.5).norm() < 1e-15);
        assert_eq!(sys.x0(), &dvector![2.0, 4.0]);

        let literal = descriptor_to_standard(&dsys, InitialStateConvention::Literal, Tolerances::default()).unwrap();
        assert!((literal.x0() - dvector![0.5, 1.0]).norm() < 1e-15);
    }

    #[test]
    fn descriptor_singular_e() {
        let dsys = DescriptorPhSystem {
            e: DMatrix::from_diagonal(&dvector![1.0, 0.0]),
            q: DMatrix::identity(2, 2),
            j: DMatrix::zeros(2, 2),
            d: DMatrix::zeros(2, 2),
            b: DMatrix::zeros(2, 1),
            x0_tilde: dvector![1.0, 2.0],
        };
        assert!(matches!(
            descriptor_to_standard(&dsys, InitialStateConvention::default(), Tolerances::default()),
            Err(Error::SingularE)
        ));
    }

    #[test]
    fn descriptor_non_commuting_is_not_spd() {
        let dsys = DescriptorPhSystem {
            e: dmatrix![1.0, 0.0; 0.0, 2.0],
            q: dmatrix![2.0, 1.0; 1.0, 2.0],
            j: DMatrix::zeros(2, 2),
            d: DMatrix::zeros(2, 2),
            b: DMatrix::zeros(2, 1),
            x0_tilde: dvector![1.0, 2.0],
        };
        // E^T Q is not symmetric here, so the descriptor check catches it
        assert!(descriptor_to_standard(&dsys, InitialStateConvention::default(), Tolerances::default()).is_err());
    }

    #[test]
    fn tabulated_input_interpolates() {
        let u = InputSignal::tabulated(vec![0.0, 1.0, 3.0], vec![dvector![0.0], dvector![2.0], dvector![0.0]]).unwrap();
        assert_eq!(u.evaluate(0.5)[0], 1.0);
        assert_eq!(u.evaluate(2.0)[0], 1.0);
        assert!(u.check_covers(0.0, 3.0).is_ok());
        assert!(matches!(u.check_covers(0.0, 4.0), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn tabulated_input_rejects_bad_tables() {
        assert!(InputSignal::tabulated(vec![0.0, 0.0], vec![dvector![0.0], dvector![1.0]]).is_err());
        assert!(InputSignal::tabulated(vec![0.0, 1.0], vec![dvector![0.0]]).is_err());
        assert!(InputSignal::tabulated(vec![], vec![]).is_err());
    }

    #[test]
    fn sinusoid_input() {
        let u = InputSignal::sinusoid(2.0, 0.25, 0.0, 1).unwrap();
        assert!((u.evaluate(1.0)[0] - 2.0).abs() < 1e-15);
    }
}
