//! Reduced-basis construction by energy-weighted POD.
//!
//! The weighted POD is computed as the thin SVD of `L^T X` (with `H = L L^T`)
//! and the modes are mapped back as `V = L^{-T} U`, so every basis produced
//! here is H-orthonormal. Column signs are fixed by making the
//! largest-magnitude entry of each `L^T V` column positive.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};

use crate::error::{shape_err, Error, Result};
use crate::integrators::{SolverKind, TimeGrid};
use crate::phcore::{InputSignal, PhSystem};
use crate::projection::ReducedPhSystem;

/// Relative singular value cutoff below which modes count as absent.
pub const POD_RANK_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SnapshotKind {
    State,
    Error,
}

/// Snapshot matrix, one snapshot per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    data: DMatrix<f64>,
    kind: SnapshotKind,
    grid: Option<TimeGrid>,
}

impl SnapshotSet {
    pub fn new(data: DMatrix<f64>, kind: SnapshotKind, grid: Option<TimeGrid>) -> Result<Self> {
        if data.ncols() == 0 || data.nrows() == 0 {
            return Err(Error::InvalidArgument("snapshot set must be non-empty".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("snapshots"));
        }
        Ok(Self { data, kind, grid })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn kind(&self) -> SnapshotKind {
        self.kind
    }

    pub fn grid(&self) -> Option<&TimeGrid> {
        self.grid.as_ref()
    }

    pub fn n_snapshots(&self) -> usize {
        self.data.ncols()
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Concatenates the columns of two snapshot sets of the same kind.
    pub fn concat(&self, other: &SnapshotSet) -> Result<SnapshotSet> {
        if self.dim() != other.dim() {
            return Err(shape_err("snapshot dimension", self.dim(), other.dim()));
        }
        let mut data = DMatrix::zeros(self.dim(), self.n_snapshots() + other.n_snapshots());
        data.columns_mut(0, self.n_snapshots()).copy_from(&self.data);
        data.columns_mut(self.n_snapshots(), other.n_snapshots())
            .copy_from(&other.data);
        SnapshotSet::new(data, self.kind, None)
    }
}

fn hash_matrix<H: Hasher>(m: &DMatrix<f64>, state: &mut H) {
    m.nrows().hash(state);
    m.ncols().hash(state);
    for v in m.iter() {
        v.to_bits().hash(state);
    }
}

/// Identifies the (snapshots, energy matrix) pair a POD basis came from.
fn pod_source(snaps: &SnapshotSet, sys: &PhSystem) -> u64 {
    let mut h = DefaultHasher::new();
    snaps.kind.hash(&mut h);
    hash_matrix(&snaps.data, &mut h);
    hash_matrix(sys.h(), &mut h);
    h.finish()
}

/// Reduced basis `V` (`N x n`).
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    v: DMatrix<f64>,
    h_orthonormal: bool,
    singular_values: Vec<f64>,
    source: Option<u64>,
}

fn orthonormality_defect(sys: &PhSystem, v: &DMatrix<f64>) -> f64 {
    let n = v.ncols();
    let hv = sys.h() * v;
    (v.tr_mul(&hv) - DMatrix::identity(n, n)).norm()
}

impl Basis {
    /// Wraps arbitrary columns after checking their rank in the energy
    /// inner product.
    pub fn from_columns(sys: &PhSystem, v: DMatrix<f64>) -> Result<Self> {
        if v.nrows() != sys.dim() {
            return Err(shape_err("basis rows", sys.dim(), v.nrows()));
        }
        if v.ncols() == 0 {
            return Err(Error::RankDeficientBasis("basis has no columns".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("basis"));
        }
        let sv = sys.h_factor().tr_mul(&v).singular_values();
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if smax.is_nan() || smax <= 0.0 || smin <= 1e-12 * smax {
            return Err(Error::RankDeficientBasis(format!(
                "smallest singular value {smin:e} vs largest {smax:e}"
            )));
        }
        let n = v.ncols();
        let h_orthonormal = orthonormality_defect(sys, &v) <= 1e-10 * (n as f64).sqrt();
        Ok(Self {
            v,
            h_orthonormal,
            singular_values: Vec::new(),
            source: None,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    /// Number of basis vectors.
    pub fn size(&self) -> usize {
        self.v.ncols()
    }

    pub fn is_h_orthonormal(&self) -> bool {
        self.h_orthonormal
    }

    /// Singular values of the retained POD modes (empty for bases not built
    /// by POD).
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn is_pod(&self) -> bool {
        self.source.is_some()
    }

    /// First `n` columns; POD provenance is kept.
    pub fn prefix(&self, n: usize) -> Result<Basis> {
        if n == 0 || n > self.size() {
            return Err(Error::InvalidArgument(format!(
                "prefix of size {n} from a basis of size {}",
                self.size()
            )));
        }
        Ok(Basis {
            v: self.v.columns(0, n).into_owned(),
            h_orthonormal: self.h_orthonormal,
            singular_values: self.singular_values.iter().take(n).copied().collect(),
            source: self.source,
        })
    }

    /// `[self, extra]`, rank-checked.
    pub fn extend_with(&self, sys: &PhSystem, extra: &DMatrix<f64>) -> Result<Basis> {
        if extra.nrows() != self.dim() {
            return Err(shape_err("extension rows", self.dim(), extra.nrows()));
        }
        let mut v = DMatrix::zeros(self.dim(), self.size() + extra.ncols());
        v.columns_mut(0, self.size()).copy_from(&self.v);
        v.columns_mut(self.size(), extra.ncols()).copy_from(extra);
        Basis::from_columns(sys, v)
    }

    /// Same basis with coordinates scaled column-wise. Used to build
    /// non-orthonormal variants of a basis.
    pub fn scaled(&self, sys: &PhSystem, scales: &[f64]) -> Result<Basis> {
        if scales.len() != self.size() {
            return Err(shape_err("scale count", self.size(), scales.len()));
        }
        let mut v = self.v.clone();
        for (j, s) in scales.iter().enumerate() {
            v.column_mut(j).scale_mut(*s);
        }
        Basis::from_columns(sys, v)
    }
}

/// Full energy-weighted POD of a snapshot set, sorted by decreasing
/// singular value.
#[derive(Debug, Clone)]
pub struct PodModes {
    /// `L^{-T} U`, all modes.
    modes: DMatrix<f64>,
    singular_values: Vec<f64>,
    source: u64,
}

impl PodModes {
    pub fn compute(snaps: &SnapshotSet, sys: &PhSystem) -> Result<Self> {
        if snaps.dim() != sys.dim() {
            return Err(shape_err("snapshot dimension", sys.dim(), snaps.dim()));
        }
        let weighted = sys.h_factor().tr_mul(snaps.data());
        let svd = weighted.svd(true, false);
        let u = svd
            .u
            .ok_or_else(|| Error::InvalidArgument("SVD did not return U".into()))?;
        let sigma = svd.singular_values;

        let mut order: Vec<usize> = (0..sigma.len()).collect();
        order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));

        let n_modes = order.len();
        let mut u_sorted = DMatrix::zeros(u.nrows(), n_modes);
        let mut singular_values = Vec::with_capacity(n_modes);
        for (j, &i) in order.iter().enumerate() {
            let mut col = u.column(i).into_owned();
            fix_sign(&mut col);
            u_sorted.set_column(j, &col);
            singular_values.push(sigma[i]);
        }
        let modes = sys
            .h_factor()
            .tr_solve_lower_triangular(&u_sorted)
            .ok_or_else(|| Error::NotSpd("singular Cholesky factor".into()))?;
        Ok(Self {
            modes,
            singular_values,
            source: pod_source(snaps, sys),
        })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Number of singular values above `cutoff * sigma_max`.
    pub fn rank_at(&self, cutoff: f64) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        if smax.is_nan() || smax <= 0.0 {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s > cutoff * smax).count()
    }

    /// Fraction of snapshot energy captured by the leading `n` modes.
    pub fn energy_fraction(&self, n: usize) -> f64 {
        let total: f64 = self.singular_values.iter().map(|s| s * s).sum();
        if total == 0.0 {
            return 0.0;
        }
        self.singular_values.iter().take(n).map(|s| s * s).sum::<f64>() / total
    }

    /// Leading `n` modes as a basis.
    pub fn basis(&self, n: usize) -> Result<Basis> {
        if n == 0 {
            return Err(Error::InvalidArgument("basis size must be positive".into()));
        }
        let available = self.rank_at(POD_RANK_CUTOFF);
        if n > available {
            return Err(Error::RankDeficient {
                requested: n,
                available,
            });
        }
        Ok(Basis {
            v: self.modes.columns(0, n).into_owned(),
            h_orthonormal: true,
            singular_values: self.singular_values[..n].to_vec(),
            source: Some(self.source),
        })
    }
}

fn fix_sign(col: &mut DVector<f64>) {
    let mut best = 0;
    for (i, v) in col.iter().enumerate() {
        if v.abs() > col[best].abs() {
            best = i;
        }
    }
    if col[best] < 0.0 {
        col.neg_mut();
    }
}

/// Energy-weighted POD basis with `n` modes.
pub fn pod_state(snaps: &SnapshotSet, sys: &PhSystem, n: usize) -> Result<Basis> {
    let max = snaps.dim().min(snaps.n_snapshots());
    if n == 0 {
        return Err(Error::InvalidArgument("basis size must be at least 1".into()));
    }
    if n > max {
        return Err(Error::RankDeficient {
            requested: n,
            available: max,
        });
    }
    PodModes::compute(snaps, sys)?.basis(n)
}

/// Extends a POD basis by further modes of the same snapshot set, giving
/// `V_H = [V, V_+]` whose first columns are bitwise those of `base`.
pub fn extend_hierarchical(base: &Basis, snaps: &SnapshotSet, sys: &PhSystem, n_h: usize) -> Result<Basis> {
    if n_h <= base.size() {
        return Err(Error::InvalidArgument(format!(
            "hierarchical size {n_h} must exceed the primal size {}",
            base.size()
        )));
    }
    if base.source != Some(pod_source(snaps, sys)) {
        return Err(Error::NotNested);
    }
    let extended = pod_state(snaps, sys, n_h)?;
    if extended.v.columns(0, base.size()) != base.v.columns(0, base.size()) {
        return Err(Error::NotNested);
    }
    Ok(extended)
}

/// POD basis of error snapshots for the auxiliary linear problem.
pub fn alp_basis_from_errors(err_snaps: &SnapshotSet, sys: &PhSystem, n_a: usize) -> Result<Basis> {
    if err_snaps.kind() != SnapshotKind::Error {
        return Err(Error::InvalidArgument("ALP basis requires error snapshots".into()));
    }
    pod_state(err_snaps, sys, n_a)
}

/// State snapshots from a full-order trajectory.
pub fn collect_state_snapshots(
    sys: &PhSystem,
    u: &InputSignal,
    grid: &TimeGrid,
    solver: SolverKind,
) -> Result<SnapshotSet> {
    let traj = crate::integrators::solve_full(sys, u, grid, solver)?;
    SnapshotSet::new(traj.into_states(), SnapshotKind::State, Some(grid.clone()))
}

/// Error snapshots `e_i = x(t_i) - V x_r(t_i)` of a ROM against its FOM.
pub fn collect_error_snapshots(
    sys: &PhSystem,
    rom: &ReducedPhSystem,
    u: &InputSignal,
    grid: &TimeGrid,
    fom_solver: SolverKind,
    rom_solver: SolverKind,
) -> Result<SnapshotSet> {
    if rom.basis().dim() != sys.dim() {
        return Err(shape_err("ROM basis rows", sys.dim(), rom.basis().dim()));
    }
    let fom = crate::integrators::solve_full(sys, u, grid, fom_solver)?;
    let red = rom.solve(u, grid, rom_solver)?;
    let lifted = rom.basis().matrix() * red.states();
    let errors = fom.states() - lifted;
    SnapshotSet::new(errors, SnapshotKind::Error, Some(grid.clone()))
}
