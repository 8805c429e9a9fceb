use nalgebra::{DMatrix, DVector};
use phmor::basisgen::{collect_state_snapshots, pod_state};
use phmor::bounds::{effectivity, standard_bound, BoundSeries, Kernel, ResidualKind, ResidualSeries, SeriesKind};
use phmor::integrators::{solve_full, solve_implicit_midpoint, GeneralizedLti};
use phmor::phcore::{descriptor_to_standard, DescriptorPhSystem};
use phmor::projection::{reduce, Projector};
use phmor::{Basis, InitialStateConvention, InputSignal, PhSystem, SolverKind, TimeGrid, Tolerances};
use proptest::prelude::*;

fn matrix(n: usize, m: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, n * m).prop_map(move |v| DMatrix::from_vec(n, m, v))
}

/// Random pH system of order `n` with one input.
fn ph_system(n: usize) -> impl Strategy<Value = PhSystem> {
    (matrix(n, n), matrix(n, n), matrix(n, n), matrix(n, 1), matrix(n, 1)).prop_map(move |(j, d, h, b, x0)| {
        let j = &j - j.transpose();
        let d = &d * d.transpose() * 0.1;
        let h = &h * h.transpose() + DMatrix::identity(n, n);
        PhSystem::new(j, d, h, b, x0.column(0).into_owned()).unwrap()
    })
}

fn system_and_basis() -> impl Strategy<Value = (PhSystem, DMatrix<f64>)> {
    (2usize..8)
        .prop_flat_map(|n| (ph_system(n), 1..=n))
        .prop_flat_map(|(sys, k)| {
            let n = sys.dim();
            (Just(sys), matrix(n, k))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_preserves_structure((sys, v) in system_and_basis()) {
        let Ok(basis) = Basis::from_columns(&sys, v) else { return Ok(()) };
        let rom = reduce(&sys, &basis).unwrap();
        let j = rom.j_r();
        prop_assert!((j + j.transpose()).norm() <= 1e-12 * j.norm().max(1.0));
        prop_assert!(rom.d_r().clone().symmetric_eigenvalues().min() >= -1e-12);
        prop_assert!(rom.e_r().clone().cholesky().is_some());
    }

    #[test]
    fn projector_is_h_orthogonal((sys, v) in system_and_basis(), x in matrix(8, 1)) {
        let Ok(basis) = Basis::from_columns(&sys, v) else { return Ok(()) };
        let x = x.rows(0, sys.dim()).column(0).into_owned();
        let p = Projector::new(&sys, &basis).unwrap();
        let px = p.apply(&x);
        let scale = sys.energy_norm(&x).unwrap().max(1.0);
        prop_assert!((p.apply(&px) - &px).norm() <= 1e-9 * scale);
        let vthp = (sys.h() * basis.matrix()).tr_mul(&px);
        prop_assert!(vthp.amax() <= 1e-9 * scale);
    }

    #[test]
    fn midpoint_conserves_energy(n in 2usize..8, seed in matrix(8, 8), x0 in matrix(8, 1)) {
        let j = seed.view((0, 0), (n, n)).into_owned();
        let j = &j - j.transpose();
        let h = seed.view((0, 0), (n, n)).tr_mul(&seed.view((0, 0), (n, n))) + DMatrix::identity(n, n);
        let x0 = x0.rows(0, n).column(0).into_owned();
        let sys = PhSystem::new(j, DMatrix::zeros(n, n), h, DMatrix::zeros(n, 1), x0).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 50).unwrap();
        let traj = solve_full(&sys, &InputSignal::zero(1), &grid, SolverKind::Midpoint).unwrap();
        let e0 = sys.hamiltonian(sys.x0()).unwrap();
        for k in 0..grid.len() {
            let e = sys.hamiltonian(&traj.state(k)).unwrap();
            prop_assert!((e - e0).abs() <= 1e-10 * e0.max(1e-300));
        }
    }

    #[test]
    fn standard_bound_is_nondecreasing(norms in prop::collection::vec(0.0..10.0f64, 21), mu in 0.0..2.0f64) {
        let res = ResidualSeries {
            grid: TimeGrid::new(0.0, 1.0, 20).unwrap(),
            norms,
            which: ResidualKind::Primal,
            interior: None,
        };
        let b = standard_bound(&res, Kernel::Unit).unwrap();
        prop_assert!(b.is_nondecreasing());
        prop_assert_eq!(b.values[0], 0.0);
        // the decay kernel never exceeds the unit kernel
        let d = standard_bound(&res, Kernel::Decay(mu)).unwrap();
        for (x, y) in d.values.iter().zip(&b.values) {
            prop_assert!(*x <= *y + 1e-12);
        }
    }

    #[test]
    fn effectivity_skips_small_errors(errs in prop::collection::vec(0.0..1.0f64, 11), floor in 0.01..0.5f64) {
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let bound = BoundSeries { grid: grid.clone(), values: vec![2.0; 11], kind: SeriesKind::Standard, meta: Default::default() };
        let truth = BoundSeries { grid, values: errs.clone(), kind: SeriesKind::TrueError, meta: Default::default() };
        match effectivity(&bound, &truth, floor) {
            Ok(rep) => {
                prop_assert_eq!(rep.retained.len() + rep.skipped.len(), 11);
                for &k in &rep.skipped {
                    prop_assert!(errs[k] < floor);
                }
                prop_assert!(rep.min >= 2.0);
            }
            Err(_) => prop_assert!(errs.iter().all(|&e| e < floor)),
        }
    }
}

#[test]
fn descriptor_and_standard_forms_agree() {
    let e = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 4.0]));
    let q = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 8.0]));
    let j = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 2.0, 0.0, -2.0, 0.0]);
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 0.3, 0.1]));
    let b = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
    let x0_tilde = DVector::from_vec(vec![0.5, -1.0, 0.25]);
    let dsys = DescriptorPhSystem {
        e: e.clone(),
        q: q.clone(),
        j: j.clone(),
        d: d.clone(),
        b: b.clone(),
        x0_tilde: x0_tilde.clone(),
    };
    let sys = descriptor_to_standard(&dsys, InitialStateConvention::Transformed, Tolerances::default()).unwrap();
    let u = InputSignal::sinusoid(1.0, 0.5, 0.0, 1).unwrap();
    let grid = TimeGrid::new(0.0, 2.0, 200).unwrap();

    // E x~' = (J - D) Q x~ + B u, x = E x~
    let lti = GeneralizedLti::new(e.clone(), (&j - &d) * &q, b, x0_tilde).unwrap();
    let tilde = solve_implicit_midpoint(&lti, &u, &grid).unwrap();
    let std = solve_full(&sys, &u, &grid, SolverKind::Midpoint).unwrap();
    let diff = (&e * tilde.states() - std.states()).amax();
    assert!(diff < 1e-10, "{diff}");
}

#[test]
fn pod_basis_reproduces_its_snapshots() {
    let n = 6;
    let j = DMatrix::from_fn(n, n, |i, k| {
        if i + 1 == k {
            1.0
        } else if k + 1 == i {
            -1.0
        } else {
            0.0
        }
    });
    let sys = PhSystem::new(
        j,
        DMatrix::from_diagonal(&DVector::from_element(n, 0.05)),
        DMatrix::identity(n, n) * 2.0,
        DMatrix::from_fn(n, 1, |i, _| if i == 0 { 1.0 } else { 0.0 }),
        DVector::zeros(n),
    )
    .unwrap();
    let grid = TimeGrid::new(0.0, 3.0, 60).unwrap();
    let u = InputSignal::sinusoid(1.0, 0.3, 0.0, 1).unwrap();
    let snaps = collect_state_snapshots(&sys, &u, &grid, SolverKind::Oracle).unwrap();
    let basis = pod_state(&snaps, &sys, n).unwrap();
    assert!(basis.is_h_orthonormal());
    let p = Projector::new(&sys, &basis).unwrap();
    let rest = p.apply_columns(snaps.data());
    assert!(rest.amax() < 1e-10);
}
