//! pH-preserving Petrov-Galerkin reduction with test space `H V`.
//!
//! For a basis `V` the reduced system is
//!
//! ```text
//! V^T H V x_r' = V^T H J H V x_r - V^T H D H V x_r + V^T H B u,   x_r(t0) = V^T H x0
//! ```
//!
//! which keeps `J_r` skew, `D_r` positive semidefinite and `E_r = V^T H V`
//! positive definite. Projectors `I - V (V^T H V)^{-1} V^T H` are applied
//! matrix-free.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::basisgen::Basis;
use crate::error::{shape_err, Error, Result};
use crate::integrators::{
    solve_expm_generalized, solve_implicit_midpoint, GeneralizedLti, OracleOptions, SolverKind, TimeGrid, Trajectory,
};
use crate::phcore::{min_eigenvalue, InputSignal, PhSystem};

/// H-orthogonal projector onto the complement of `span(V)`.
#[derive(Debug, Clone)]
pub struct Projector {
    v: DMatrix<f64>,
    hv: DMatrix<f64>,
    /// `None` on the H-orthonormal fast path.
    gram: Option<Cholesky<f64, Dyn>>,
}

impl Projector {
    pub fn new(sys: &PhSystem, basis: &Basis) -> Result<Self> {
        if basis.dim() != sys.dim() {
            return Err(shape_err("basis rows", sys.dim(), basis.dim()));
        }
        let v = basis.matrix().clone();
        let hv = sys.h() * &v;
        let gram = if basis.is_h_orthonormal() {
            None
        } else {
            let g = v.tr_mul(&hv);
            Some(Cholesky::new((&g + g.transpose()) * 0.5).ok_or(Error::SingularGram)?)
        };
        Ok(Self { v, hv, gram })
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    /// `(V^T H V)^{-1} V^T H x`: coordinates of the H-orthogonal projection.
    pub fn coordinates(&self, x: &DVector<f64>) -> DVector<f64> {
        let c = self.hv.tr_mul(x);
        match &self.gram {
            Some(g) => g.solve(&c),
            None => c,
        }
    }

    /// `x - V (V^T H V)^{-1} V^T H x`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let c = self.coordinates(x);
        let mut out = x.clone();
        out.gemv(-1.0, &self.v, &c, 1.0);
        out
    }

    /// Column-wise application.
    pub fn apply_columns(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let c = self.hv.tr_mul(x);
        let c = match &self.gram {
            Some(g) => g.solve(&c),
            None => c,
        };
        let mut out = x.clone();
        out.gemm(-1.0, &self.v, &c, 1.0);
        out
    }
}

/// Applies `P = I - V (V^T H V)^{-1} V^T H` without forming it.
pub fn apply_projector(p: &Projector, sys: &PhSystem, x: &DVector<f64>) -> Result<DVector<f64>> {
    if p.dim() != sys.dim() {
        return Err(shape_err("projector dimension", sys.dim(), p.dim()));
    }
    if x.len() != sys.dim() {
        return Err(shape_err("state length", sys.dim(), x.len()));
    }
    Ok(p.apply(x))
}

/// What drives the reduced input port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedInput {
    /// `V^T H B u(t)`.
    Port,
    /// `V^T H r(t)` for an N-dimensional residual `r`.
    Residual,
}

/// Reduced port-Hamiltonian system together with its basis.
#[derive(Debug, Clone)]
pub struct ReducedPhSystem {
    e_r: DMatrix<f64>,
    j_r: DMatrix<f64>,
    d_r: DMatrix<f64>,
    b_r: DMatrix<f64>,
    xr0: DVector<f64>,
    basis: Basis,
    projector: Projector,
    input: ReducedInput,
}

struct Assembled {
    e_r: DMatrix<f64>,
    j_r: DMatrix<f64>,
    d_r: DMatrix<f64>,
    hv: DMatrix<f64>,
}

fn assemble(sys: &PhSystem, basis: &Basis) -> Result<Assembled> {
    if basis.dim() != sys.dim() {
        return Err(shape_err("basis rows", sys.dim(), basis.dim()));
    }
    if basis.size() > sys.dim() {
        return Err(Error::RankDeficientBasis(format!(
            "{} columns in dimension {}",
            basis.size(),
            sys.dim()
        )));
    }
    let v = basis.matrix();
    let hv = sys.h() * v;
    let e_r = v.tr_mul(&hv);
    let j_r = hv.tr_mul(&(sys.j() * &hv));
    let d_r = hv.tr_mul(&(sys.d() * &hv));

    let tol = sys.tolerances();
    let skew = (&j_r + j_r.transpose()).norm();
    if skew > tol.structural * j_r.norm().max(1.0) {
        return Err(Error::StructureLost(format!("J_r skew defect {skew:e}")));
    }
    let asym = (&d_r - d_r.transpose()).norm();
    if asym > tol.structural * d_r.norm().max(1.0) {
        return Err(Error::StructureLost(format!("D_r asymmetry {asym:e}")));
    }
    let j_r = (&j_r - j_r.transpose()) * 0.5;
    let d_r = (&d_r + d_r.transpose()) * 0.5;
    let e_r = (&e_r + e_r.transpose()) * 0.5;
    let lmin = min_eigenvalue(&d_r);
    if lmin < -tol.psd {
        return Err(Error::StructureLost(format!("D_r smallest eigenvalue {lmin:e}")));
    }
    if Cholesky::new(e_r.clone()).is_none() {
        return Err(Error::RankDeficientBasis("V^T H V is not positive definite".into()));
    }
    Ok(Assembled { e_r, j_r, d_r, hv })
}

/// pH-preserving reduction of `sys` onto `span(basis)`.
pub fn reduce(sys: &PhSystem, basis: &Basis) -> Result<ReducedPhSystem> {
    let Assembled { e_r, j_r, d_r, hv } = assemble(sys, basis)?;
    let b_r = hv.tr_mul(sys.b());
    let xr0 = hv.tr_mul(sys.x0());
    Ok(ReducedPhSystem {
        e_r,
        j_r,
        d_r,
        b_r,
        xr0,
        projector: Projector::new(sys, basis)?,
        basis: basis.clone(),
        input: ReducedInput::Port,
    })
}

/// Reduction of the error system `e' = (J - D) H e + r(t)`, `e(t0) = 0`:
/// same matrices as [`reduce`], input map `V_A^T H` acting on the residual,
/// zero initial state.
pub fn reduced_error_system(sys: &PhSystem, alp_basis: &Basis) -> Result<ReducedPhSystem> {
    let Assembled { e_r, j_r, d_r, hv } = assemble(sys, alp_basis)?;
    let b_r = hv.transpose();
    let xr0 = DVector::zeros(alp_basis.size());
    Ok(ReducedPhSystem {
        e_r,
        j_r,
        d_r,
        b_r,
        xr0,
        projector: Projector::new(sys, alp_basis)?,
        basis: alp_basis.clone(),
        input: ReducedInput::Residual,
    })
}

impl ReducedPhSystem {
    pub fn e_r(&self) -> &DMatrix<f64> {
        &self.e_r
    }

    pub fn j_r(&self) -> &DMatrix<f64> {
        &self.j_r
    }

    pub fn d_r(&self) -> &DMatrix<f64> {
        &self.d_r
    }

    pub fn b_r(&self) -> &DMatrix<f64> {
        &self.b_r
    }

    pub fn xr0(&self) -> &DVector<f64> {
        &self.xr0
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn input(&self) -> ReducedInput {
        self.input
    }

    pub fn size(&self) -> usize {
        self.e_r.nrows()
    }

    /// `E_r z' = (J_r - D_r) z + B_r w`.
    pub fn as_lti(&self) -> GeneralizedLti {
        GeneralizedLti::new(
            self.e_r.clone(),
            &self.j_r - &self.d_r,
            self.b_r.clone(),
            self.xr0.clone(),
        )
        .expect("assembled reduced system is consistent")
    }

    /// Integrates the reduced system driven by `u`.
    pub fn solve(&self, u: &InputSignal, grid: &TimeGrid, solver: SolverKind) -> Result<Trajectory> {
        let lti = self.as_lti();
        match solver {
            SolverKind::Midpoint => solve_implicit_midpoint(&lti, u, grid),
            SolverKind::Oracle => solve_expm_generalized(&lti, u, grid, OracleOptions::default()),
        }
    }

    /// `V x_r`.
    pub fn lift(&self, xr: &DVector<f64>) -> Result<DVector<f64>> {
        if xr.len() != self.size() {
            return Err(shape_err("reduced state length", self.size(), xr.len()));
        }
        Ok(self.basis.matrix() * xr)
    }

    /// Lifts every sample of a reduced trajectory.
    pub fn lift_trajectory(&self, traj: &Trajectory) -> Result<Trajectory> {
        if traj.dim() != self.size() {
            return Err(shape_err("reduced trajectory dimension", self.size(), traj.dim()));
        }
        Trajectory::new(traj.grid().clone(), self.basis.matrix() * traj.states())
    }

    /// Reduced coordinates of the H-orthogonal projection of `x` onto `span(V)`.
    pub fn reduce_coordinates(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.basis.dim() {
            return Err(shape_err("state length", self.basis.dim(), x.len()));
        }
        Ok(self.projector.coordinates(x))
    }
}

/// Energy-norm distance of `x0` to `span(V)`.
pub fn initial_state_defect(sys: &PhSystem, basis: &Basis) -> Result<f64> {
    let p = Projector::new(sys, basis)?;
    sys.energy_norm(&p.apply(sys.x0()))
}

/// Requires `x0` in `span(V)`, which makes the initial error vanish.
pub fn require_initial_state_in_span(sys: &PhSystem, basis: &Basis) -> Result<()> {
    let defect = initial_state_defect(sys, basis)?;
    let scale = sys.energy_norm(sys.x0())?;
    if defect > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!(
            "x0 is not contained in span(V): distance {defect:e} (||x0||_H = {scale:e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn system() -> PhSystem {
        let j = dmatrix![0.0, 1.0, 0.0; -1.0, 0.0, 2.0; 0.0, -2.0, 0.0];
        let d = DMatrix::from_diagonal(&dvector![0.0, 0.2, 0.1]);
        let h = dmatrix![2.0, 0.1, 0.0; 0.1, 1.0, 0.2; 0.0, 0.2, 3.0];
        PhSystem::new(j, d, h, dmatrix![0.0; 1.0; 0.5], dvector![0.3, 0.0, -0.1]).unwrap()
    }

    #[test]
    fn coordinate_selection_gives_principal_submatrices() {
        let n = 4;
        let j = DMatrix::from_fn(n, n, |i, k| (i as f64) - (k as f64));
        let d = DMatrix::from_fn(n, n, |i, k| if i == k { 1.0 + i as f64 } else { 0.1 });
        let b = DMatrix::from_fn(n, 2, |i, k| (i + k) as f64);
        let sys = PhSystem::new(
            j.clone(),
            d.clone(),
            DMatrix::identity(n, n),
            b.clone(),
            DVector::zeros(n),
        )
        .unwrap();
        let basis = Basis::from_columns(&sys, DMatrix::identity(n, 2)).unwrap();
        let rom = reduce(&sys, &basis).unwrap();
        assert_eq!(rom.j_r(), &j.view((0, 0), (2, 2)).into_owned());
        assert_eq!(rom.d_r(), &d.view((0, 0), (2, 2)).into_owned());
        assert_eq!(rom.b_r(), &b.rows(0, 2).into_owned());
        assert_eq!(rom.e_r(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn lift_examples() {
        let sys = system();
        let v = dmatrix![1.0, 0.0; 0.5, 1.0; 0.0, 2.0];
        let basis = Basis::from_columns(&sys, v.clone()).unwrap();
        let rom = reduce(&sys, &basis).unwrap();
        assert_eq!(rom.lift(&dvector![0.0, 0.0]).unwrap(), dvector![0.0, 0.0, 0.0]);
        assert_eq!(rom.lift(&dvector![1.0, 0.0]).unwrap(), v.column(0).into_owned());
        let x = &v * dvector![0.7, -1.3];
        let back = rom.lift(&rom.reduce_coordinates(&x).unwrap()).unwrap();
        assert!((back - &x).norm() <= 1e-12 * x.norm());
        assert!(rom.lift(&dvector![1.0]).is_err());
    }

    #[test]
    fn projector_examples() {
        let sys = system();
        let v = dmatrix![1.0; 0.5; 0.0];
        let basis = Basis::from_columns(&sys, v.clone()).unwrap();
        assert!(!basis.is_h_orthonormal());
        let p = Projector::new(&sys, &basis).unwrap();

        let x: DVector<f64> = v.column(0) * 2.5;
        let px = apply_projector(&p, &sys, &x).unwrap();
        assert!(sys.energy_norm(&px).unwrap() <= 1e-12 * sys.energy_norm(&x).unwrap());

        let y = dvector![0.4, -1.0, 0.7];
        let py = p.apply(&y);
        // (P y)^T H V = 0
        assert!((py.transpose() * sys.h() * &v).norm() < 1e-12);
        // idempotent
        assert!((p.apply(&py) - &py).norm() < 1e-12);
        // H-orthogonal input is unchanged
        assert!((p.apply(&py) - &py).norm() < 1e-12);
    }

    #[test]
    fn error_system_has_residual_port() {
        let sys = system();
        let basis = Basis::from_columns(&sys, dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0]).unwrap();
        let alp = reduced_error_system(&sys, &basis).unwrap();
        assert_eq!(alp.input(), ReducedInput::Residual);
        assert_eq!(alp.b_r().ncols(), 3);
        assert_eq!(alp.xr0(), &DVector::zeros(2));
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let traj = alp.solve(&InputSignal::zero(3), &grid, SolverKind::Midpoint).unwrap();
        assert!(traj.states().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn x0_span_policy() {
        let sys = system();
        let basis = Basis::from_columns(&sys, dmatrix![1.0; 0.0; 0.0]).unwrap();
        assert!(require_initial_state_in_span(&sys, &basis).is_err());
        let sys2 = sys.with_initial_state(dvector![2.0, 0.0, 0.0]).unwrap();
        assert!(require_initial_state_in_span(&sys2, &basis).is_ok());
        let sys0 = sys.with_initial_state(DVector::zeros(3)).unwrap();
        assert!(require_initial_state_in_span(&sys0, &basis).is_ok());
    }
}
