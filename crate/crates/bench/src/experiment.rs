//! The benchmark pipeline: train, reduce, bound, compare, emit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use nalgebra::{DMatrix, DVector};
use phmor::basisgen::{
    alp_basis_from_errors, collect_error_snapshots, collect_state_snapshots, extend_hierarchical, pod_state, PodModes,
    POD_RANK_CUTOFF,
};
use phmor::bounds::{
    alp_bound_from, certify_prop1_with, effectivity, hierarchical_bound_from, log_norm_constant,
    primal_residual_series, solve_reduced, standard_bound, true_error_from, Kernel, LogNormMode,
};
use phmor::integrators::solve_full;
use phmor::projection::{reduce, reduced_error_system, require_initial_state_in_span, Projector};
use phmor::{Basis, BoundSeries, EffectivityReport, PhSystem, Prop1Report, Prop1Status, SnapshotSet, TimeGrid};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{BoundKind, ExperimentConfig, ModelSpec, Prop1InitialState, SecondarySource};
use crate::error::{BenchError, StageExt};
use crate::manifest::load_matrices;
use crate::models::generate_msd_chain;
use crate::mtx::dense_limit_from_env;

/// Wall time of each pipeline stage, in seconds.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimes(pub Vec<(&'static str, f64)>);

impl StageTimes {
    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T, BenchError>) -> Result<T, BenchError> {
        let start = Instant::now();
        let out = f().stage(stage);
        self.0.push((stage, start.elapsed().as_secs_f64()));
        out
    }
}

/// Result of the rigor re-check for one bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigorCheck {
    pub bound: String,
    pub min_effectivity: f64,
    /// Time of the smallest effectivity.
    pub time: f64,
    pub passed: bool,
}

/// One bound together with its components and effectivity.
#[derive(Debug, Clone)]
pub struct BoundResult {
    pub kind: BoundKind,
    pub series: BoundSeries,
    pub components: Vec<(String, Vec<f64>)>,
    pub effectivity: EffectivityReport,
}

#[derive(Debug, Clone)]
pub struct RunResults {
    pub config: ExperimentConfig,
    pub dim: usize,
    pub n_inputs: usize,
    pub grid: TimeGrid,
    pub true_error: BoundSeries,
    pub bounds: Vec<BoundResult>,
    /// Largest `||x(t_k)||_H` of the test trajectory.
    pub max_state_norm: f64,
    /// Absolute effectivity floor.
    pub floor: f64,
    /// Decay rate used by the standard bound (0 for the unit kernel).
    pub decay_rate: f64,
    pub dense_limit: usize,
    pub rigor: Vec<RigorCheck>,
    pub times: StageTimes,
}

impl RunResults {
    pub fn bound(&self, kind: BoundKind) -> Option<&BoundResult> {
        self.bounds.iter().find(|b| b.kind == kind)
    }

    pub fn rigor_passed(&self) -> bool {
        self.rigor.iter().all(|r| r.passed)
    }
}

/// Builds the full-order model named by the configuration.
pub fn build_model(cfg: &ExperimentConfig, dense_limit: usize) -> Result<PhSystem, BenchError> {
    match &cfg.model {
        ModelSpec::MsdChain(chain) => {
            let n = 2 * chain.n_masses;
            if n > dense_limit {
                return Err(BenchError::DenseLimitExceeded { n, limit: dense_limit });
            }
            let sys = generate_msd_chain(chain)?;
            Ok(PhSystem::from_matrices(sys.to_matrices(), cfg.tolerances.core())?)
        }
        ModelSpec::File { manifest } => Ok(load_matrices(manifest, dense_limit, cfg.tolerances.core())?.system),
    }
}

fn energy_norm_max(sys: &PhSystem, states: &DMatrix<f64>) -> f64 {
    let lt = sys.h_factor().tr_mul(states);
    lt.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn rigor_check(kind: BoundKind, rep: &EffectivityReport, grid: &TimeGrid, slack: f64) -> RigorCheck {
    let (i, &min) = rep
        .values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("effectivity reports are non-empty");
    RigorCheck {
        bound: kind.name().to_string(),
        min_effectivity: min,
        time: grid.times()[rep.retained[i]],
        passed: min >= 1.0 - slack,
    }
}

/// Runs the benchmark described by `cfg` without writing anything.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResults, BenchError> {
    let mut times = StageTimes::default();
    let dense_limit = dense_limit_from_env();
    let grid = times.time("config", || {
        cfg.validate()?;
        cfg.grid.to_grid()
    })?;
    let sys = times.time("model", || {
        let sys = build_model(cfg, dense_limit)?;
        cfg.validate_sizes(sys.dim(), false)?;
        Ok(sys)
    })?;
    let fom_solver = cfg.fom_solver.solver();
    let scheme = cfg.scheme.scheme();
    let (u_train, u_test) = times.time("config", || {
        Ok((
            cfg.train_input.to_signal(sys.n_inputs())?,
            cfg.test_input.to_signal(sys.n_inputs())?,
        ))
    })?;

    let snaps = times.time("train", || {
        Ok(collect_state_snapshots(&sys, &u_train, &grid, fom_solver)?)
    })?;
    let basis = cfg.basis;
    let (rom, alp_rom, hier_rom) = times.time("basisgen", || {
        let v = pod_state(&snaps, &sys, basis.n)?;
        require_initial_state_in_span(&sys, &v)?;
        let rom = reduce(&sys, &v)?;
        let alp_rom = match cfg.wants(BoundKind::Alp) {
            true => {
                let errs = collect_error_snapshots(&sys, &rom, &u_train, &grid, fom_solver, cfg.scheme.solver())?;
                Some(reduced_error_system(
                    &sys,
                    &alp_basis_from_errors(&errs, &sys, basis.n_a)?,
                )?)
            }
            false => None,
        };
        let hier_rom = match cfg.wants(BoundKind::Hier) {
            true => Some(reduce(&sys, &extend_hierarchical(&v, &snaps, &sys, basis.n_h)?)?),
            false => None,
        };
        Ok((rom, alp_rom, hier_rom))
    })?;

    let (fom, sol, true_error) = times.time("test", || {
        let fom = solve_full(&sys, &u_test, &grid, fom_solver)?;
        let sol = solve_reduced(&rom, &u_test, &grid, scheme)?;
        let te = true_error_from(&sys, &rom, &fom, &sol.traj)?;
        Ok((fom, sol, te))
    })?;

    let decay_rate = match cfg.tolerances.decay_kernel {
        true => log_norm_constant(&sys, LogNormMode::SharpEig).decay_rate,
        false => 0.0,
    };
    let mut series = times.time("bounds", || {
        let mut out = Vec::new();
        for &kind in &cfg.bounds {
            match kind {
                BoundKind::Standard => {
                    let res = primal_residual_series(&sys, &rom, &sol, &u_test)?;
                    let kernel = match decay_rate > 0.0 {
                        true => Kernel::Decay(decay_rate),
                        false => Kernel::Unit,
                    };
                    let b = standard_bound(&res, kernel)?;
                    out.push((kind, b, vec![("standard_residual_norm".to_string(), res.norms)]));
                }
                BoundKind::Alp => {
                    let alp_rom = alp_rom.as_ref().expect("built when requested");
                    let a = alp_bound_from(&sys, &rom, &sol, alp_rom, &u_test)?;
                    let comps = vec![
                        ("alp_approx_error".to_string(), a.approx_error_norm.values),
                        ("alp_residual_integral".to_string(), a.residual_integral.values),
                        ("alp_residual_norm".to_string(), a.residual.norms),
                    ];
                    out.push((kind, a.bound, comps));
                }
                BoundKind::Hier => {
                    let hier_rom = hier_rom.as_ref().expect("built when requested");
                    let h = hierarchical_bound_from(&sys, &rom, &sol, hier_rom, &u_test)?;
                    let comps = vec![
                        ("hier_state_difference".to_string(), h.state_difference_norm.values),
                        ("hier_residual_integral".to_string(), h.residual_integral.values),
                        ("hier_residual_norm".to_string(), h.residual.norms),
                    ];
                    out.push((kind, h.bound, comps));
                }
            }
        }
        Ok(out)
    })?;

    let max_state_norm = energy_norm_max(&sys, fom.states());
    let floor = cfg.tolerances.effectivity_floor * max_state_norm;
    let bounds = times.time("effectivity", || {
        let mut out = Vec::new();
        for (kind, series, components) in series.drain(..) {
            let effectivity = effectivity(&series, &true_error, floor)?;
            info!(
                "{}: max effectivity {:.4} min {:.6}",
                kind.name(),
                effectivity.max,
                effectivity.min
            );
            out.push(BoundResult {
                kind,
                series,
                components,
                effectivity,
            });
        }
        Ok(out)
    })?;
    let rigor = bounds
        .iter()
        .map(|b| rigor_check(b.kind, &b.effectivity, &grid, cfg.tolerances.rigor_slack))
        .collect();

    Ok(RunResults {
        config: cfg.clone(),
        dim: sys.dim(),
        n_inputs: sys.n_inputs(),
        grid,
        true_error,
        bounds,
        max_state_norm,
        floor,
        decay_rate,
        dense_limit,
        rigor,
        times,
    })
}

/// Column documentation of every emitted file.
fn column_docs() -> Value {
    json!({
        "bounds.csv": {
            "time": "grid time t_k",
            "series": "true_error = ||x(t_k) - V x_r(t_k)||_H; standard, alp, hier = error bounds",
            "value": "series value in the energy norm",
        },
        "effectivity.csv": {
            "time": "grid time t_k; points with true error below the floor are omitted",
            "series": "bound name",
            "value": "bound / true error",
        },
        "components.csv": {
            "time": "grid time t_k",
            "series": "standard_residual_norm, alp_approx_error = ||V_A e_r||_H, alp_residual_integral, alp_residual_norm, hier_state_difference = ||V_H x_H - V x_r||_H, hier_residual_integral, hier_residual_norm",
            "value": "component value in the energy norm",
        },
        "summary.csv": {
            "n": "primal basis size",
            "n_a": "ALP basis size (empty if not run)",
            "n_h": "hierarchical basis size (empty if not run)",
            "max_true_error": "largest true error",
            "max_eff_<bound>": "largest effectivity of <bound>",
            "min_eff_<bound>": "smallest effectivity of <bound>",
            "max_<bound>": "largest value of <bound>",
            "skipped": "number of grid points below the effectivity floor",
        },
    })
}

fn long_csv<'a>(
    times: &[f64],
    series: impl IntoIterator<Item = (&'a str, Vec<Option<f64>>)>,
) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time", "series", "value"])?;
    for (name, values) in series {
        for (t, v) in times.iter().zip(values) {
            if let Some(v) = v {
                w.serialize((t, name, v))?;
            }
        }
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

fn summary_csv(res: &RunResults) -> Result<Vec<u8>, csv::Error> {
    let mut header = vec!["n".to_string(), "n_a".into(), "n_h".into(), "max_true_error".into()];
    let basis = res.config.basis;
    let opt = |on: bool, v: usize| if on { v.to_string() } else { String::new() };
    let mut row = vec![
        basis.n.to_string(),
        opt(res.bound(BoundKind::Alp).is_some(), basis.n_a),
        opt(res.bound(BoundKind::Hier).is_some(), basis.n_h),
        res.true_error.max().to_string(),
    ];
    for b in &res.bounds {
        let name = b.kind.name();
        header.extend([
            format!("max_eff_{name}"),
            format!("min_eff_{name}"),
            format!("max_{name}"),
        ]);
        row.extend([
            b.effectivity.max.to_string(),
            b.effectivity.min.to_string(),
            b.series.max().to_string(),
        ]);
    }
    header.push("skipped".into());
    row.push(
        res.bounds
            .first()
            .map_or(0, |b| b.effectivity.skipped.len())
            .to_string(),
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    w.write_record(&row)?;
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

/// Hash of a git blob object holding `data`, using SHA-256.
pub fn blob_hash(data: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", data.len()).as_bytes());
    h.update(data);
    hex::encode(h.finalize())
}

fn tree_hash(files: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    for (name, hash) in files {
        h.update(format!("{hash} {name}\n").as_bytes());
    }
    hex::encode(h.finalize())
}

fn csv_err(path: &Path, e: csv::Error) -> BenchError {
    BenchError::io(path, std::io::Error::other(e))
}

/// Paths written by [`write_artifacts`].
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Writes the CSV files and `manifest.json` into `out`. With strict rigor
/// a failed re-check is reported after everything is written.
pub fn write_artifacts(res: &RunResults, out: &Path) -> Result<Artifacts, BenchError> {
    let start = Instant::now();
    fs::create_dir_all(out)
        .map_err(|e| BenchError::io(out, e))
        .stage("emit")?;
    let times = res.grid.times();
    let some = |v: &[f64]| v.iter().map(|&x| Some(x)).collect::<Vec<_>>();

    let mut bounds_series = vec![("true_error", some(&res.true_error.values))];
    let mut eff_series = Vec::new();
    let mut comp_series = Vec::new();
    for b in &res.bounds {
        bounds_series.push((b.kind.name(), some(&b.series.values)));
        let dense = b.effectivity.dense(times.len());
        eff_series.push((
            b.kind.name(),
            dense.iter().map(|v| (!v.is_nan()).then_some(*v)).collect(),
        ));
        for (name, values) in &b.components {
            comp_series.push((name.as_str(), some(values)));
        }
    }

    let mut contents: Vec<(&str, Vec<u8>)> = Vec::new();
    let mut push = |name: &'static str, data: Result<Vec<u8>, csv::Error>| -> Result<(), BenchError> {
        contents.push((name, data.map_err(|e| csv_err(&out.join(name), e))?));
        Ok(())
    };
    push("bounds.csv", long_csv(times, bounds_series)).stage("emit")?;
    push("effectivity.csv", long_csv(times, eff_series)).stage("emit")?;
    push("components.csv", long_csv(times, comp_series)).stage("emit")?;
    push("summary.csv", summary_csv(res)).stage("emit")?;

    let mut hashes = BTreeMap::new();
    let mut files = Vec::new();
    for (name, data) in &contents {
        let path = out.join(name);
        fs::write(&path, data)
            .map_err(|e| BenchError::io(&path, e))
            .stage("emit")?;
        hashes.insert(name.to_string(), blob_hash(data));
        files.push(path);
    }

    let cfg = &res.config;
    let mut stage_times: Vec<(&str, f64)> = res.times.0.clone();
    stage_times.push(("emit", start.elapsed().as_secs_f64()));
    let manifest = json!({
        "config": cfg,
        "resolved": {
            "dim": res.dim,
            "n_inputs": res.n_inputs,
            "n_steps": res.grid.n_steps(),
            "dt": res.grid.dt(),
            "fom_solver": cfg.fom_solver,
            "scheme": cfg.scheme,
            "dense_limit": res.dense_limit,
            "pod_rank_cutoff": POD_RANK_CUTOFF,
            "max_state_norm": res.max_state_norm,
            "effectivity_floor_abs": res.floor,
            "decay_rate": res.decay_rate,
            "log_norm_constant": 1.0,
        },
        "tolerances": cfg.tolerances,
        "content_hash": tree_hash(&hashes),
        "files": hashes,
        "columns": column_docs(),
        "rigor": res.rigor,
        "wall_time_s": stage_times.iter().map(|(s, t)| (s.to_string(), json!(t))).collect::<serde_json::Map<_, _>>(),
    });
    let manifest_path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("JSON values serialize");
    fs::write(&manifest_path, text + "\n")
        .map_err(|e| BenchError::io(&manifest_path, e))
        .stage("emit")?;

    for r in res.rigor.iter().filter(|r| !r.passed) {
        if cfg.tolerances.strict_rigor {
            return Err(BenchError::RigorViolated {
                series: r.bound.clone(),
                value: r.min_effectivity,
                time: r.time,
            })
            .stage("emit");
        }
        warn!(
            "{} bound effectivity {} at t = {} is below 1",
            r.bound, r.min_effectivity, r.time
        );
    }
    Ok(Artifacts {
        dir: out.to_path_buf(),
        files,
        manifest: manifest_path,
    })
}

/// One equivalence run.
#[derive(Debug, Clone)]
pub struct Prop1Case {
    pub source: SecondarySource,
    pub x0: Prop1InitialState,
    /// `V_+` multiplied by the configured scale.
    pub scaled: bool,
    /// Run outside the hypotheses on purpose.
    pub negative_control: bool,
    pub report: Prop1Report,
}

impl Prop1Case {
    pub fn label(&self) -> String {
        let x0 = match self.x0 {
            Prop1InitialState::Zero => "x0_zero",
            Prop1InitialState::InSpan => "x0_in_span",
            Prop1InitialState::Random => "x0_random",
        };
        let v = if self.scaled { "scaled" } else { "orthonormal" };
        format!("{}/{x0}/{v}", self.source.name())
    }
}

#[derive(Debug, Clone)]
pub struct Prop1Outcome {
    pub grid: TimeGrid,
    pub cases: Vec<Prop1Case>,
}

impl Prop1Outcome {
    /// First violated case that was expected to certify.
    pub fn violation(&self) -> Option<&Prop1Case> {
        self.cases
            .iter()
            .find(|c| !c.negative_control && c.report.status != Prop1Status::Certified)
    }
}

/// H-orthonormalizes the columns of `w` against `basis` and each other.
fn h_complement(sys: &PhSystem, basis: &Basis, w: &DMatrix<f64>) -> Result<DMatrix<f64>, BenchError> {
    let p = Projector::new(sys, basis)?;
    let mut w = p.apply_columns(w);
    // second pass against V for stability
    w = p.apply_columns(&w);
    let h = sys.h();
    for j in 0..w.ncols() {
        for i in 0..j {
            let wi = w.column(i).into_owned();
            let c = (h * &wi).dot(&w.column(j));
            w.column_mut(j).axpy(-c, &wi, 1.0);
        }
        let col = w.column(j).into_owned();
        let norm = (h * &col).dot(&col).sqrt();
        if norm.is_nan() || norm <= 1e-12 {
            return Err(phmor::Error::RankDeficientBasis(format!("complement column {j} vanished")).into());
        }
        w.column_mut(j).scale_mut(1.0 / norm);
    }
    Ok(w)
}

fn secondary(
    cfg: &ExperimentConfig,
    source: SecondarySource,
    sys: &PhSystem,
    v: &Basis,
    snaps: &SnapshotSet,
    errors: &SnapshotSet,
    rng: &mut StdRng,
) -> Result<DMatrix<f64>, BenchError> {
    let n = v.size();
    let extra = cfg.basis.n_h - n;
    Ok(match source {
        SecondarySource::PodPrefix => {
            let vh = extend_hierarchical(v, snaps, sys, cfg.basis.n_h)?;
            vh.matrix().columns(n, extra).into_owned()
        }
        SecondarySource::ErrorAugmented => {
            let modes = PodModes::compute(errors, sys)?.basis(extra)?;
            h_complement(sys, v, modes.matrix())?
        }
        SecondarySource::RandomComplement => {
            let w = DMatrix::from_fn(sys.dim(), extra, |_, _| rng.random::<f64>() - 0.5);
            h_complement(sys, v, &w)?
        }
    })
}

fn initial_state(kind: Prop1InitialState, sys: &PhSystem, v: &Basis, rng: &mut StdRng) -> DVector<f64> {
    match kind {
        Prop1InitialState::Zero => DVector::zeros(sys.dim()),
        Prop1InitialState::InSpan => {
            let c = DVector::from_fn(v.size(), |_, _| rng.random::<f64>() - 0.5);
            v.matrix() * c
        }
        Prop1InitialState::Random => DVector::from_fn(sys.dim(), |_, _| rng.random::<f64>() - 0.5),
    }
}

/// Checks that the ALP and hierarchical bounds coincide when
/// `V_A = V_H = [V, V_+]`, for every configured source of `V_+`.
///
/// Per source the cases are: the configured `x0` with orthonormal `V_+`,
/// `x0` in `span(V)` with orthonormal and with scaled `V_+`, `x0 = 0` with
/// scaled `V_+`, and optionally a random `x0` with scaled `V_+` as a
/// negative control.
pub fn run_prop1(cfg: &ExperimentConfig) -> Result<Prop1Outcome, BenchError> {
    let mut times = StageTimes::default();
    let grid = times.time("config", || {
        cfg.validate()?;
        cfg.grid.to_grid()
    })?;
    let sys = times.time("model", || {
        let sys = build_model(cfg, dense_limit_from_env())?;
        cfg.validate_sizes(sys.dim(), true)?;
        Ok(sys)
    })?;
    let fom_solver = cfg.fom_solver.solver();
    let scheme = cfg.scheme.scheme();
    let (u_train, u_test) = times.time("config", || {
        Ok((
            cfg.train_input.to_signal(sys.n_inputs())?,
            cfg.test_input.to_signal(sys.n_inputs())?,
        ))
    })?;
    let snaps = times.time("train", || {
        Ok(collect_state_snapshots(&sys, &u_train, &grid, fom_solver)?)
    })?;
    let v = times.time("basisgen", || Ok(pod_state(&snaps, &sys, cfg.basis.n)?))?;
    let errors = times.time("basisgen", || {
        let rom = reduce(&sys, &v)?;
        Ok(collect_error_snapshots(
            &sys,
            &rom,
            &u_train,
            &grid,
            fom_solver,
            cfg.scheme.solver(),
        )?)
    })?;

    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut plan = vec![(cfg.prop1.x0, false, false)];
    for case in [
        (Prop1InitialState::InSpan, false, false),
        (Prop1InitialState::Zero, true, false),
        (Prop1InitialState::InSpan, true, false),
    ] {
        if !plan.contains(&case) {
            plan.push(case);
        }
    }
    if cfg.prop1.negative_control {
        plan.push((Prop1InitialState::Random, true, true));
    }

    let mut cases = Vec::new();
    for &source in &cfg.prop1.sources {
        let v_plus = times.time("basisgen", || {
            secondary(cfg, source, &sys, &v, &snaps, &errors, &mut rng)
        })?;
        for &(x0, scaled, negative_control) in &plan {
            let report = times.time("bounds", || {
                let case_sys = sys.with_initial_state(initial_state(x0, &sys, &v, &mut rng))?;
                let vp = if scaled {
                    &v_plus * cfg.prop1.scale
                } else {
                    v_plus.clone()
                };
                Ok(certify_prop1_with(
                    &case_sys,
                    &v,
                    &vp,
                    &u_test,
                    &grid,
                    cfg.tolerances.prop1,
                    scheme,
                )?)
            })?;
            cases.push(Prop1Case {
                source,
                x0,
                scaled,
                negative_control,
                report,
            });
        }
    }
    Ok(Prop1Outcome { grid, cases })
}

/// Per-time deviation table for one case, at most `rows` lines.
pub fn deviation_table(case: &Prop1Case, grid: &TimeGrid, rows: usize) -> String {
    let r = &case.report;
    let stride = grid.len().div_ceil(rows.max(2) - 1).max(1);
    let mut out = format!(
        "{}  status {:?}  rel. deviation {:.3e}\n{:>10} {:>14} {:>14} {:>12}\n",
        case.label(),
        r.status,
        r.relative_deviation,
        "t",
        "Delta_A",
        "Delta_H",
        "|diff|"
    );
    let last = grid.len() - 1;
    for k in (0..grid.len()).filter(|k| k % stride == 0 || *k == last) {
        out.push_str(&format!(
            "{:>10.4} {:>14.6e} {:>14.6e} {:>12.3e}\n",
            grid.times()[k],
            r.alp.bound.values[k],
            r.hier.bound.values[k],
            r.deviations[k]
        ));
    }
    out
}

/// Writes `prop1.csv` (long format) and `prop1_summary.csv`.
pub fn write_prop1(outcome: &Prop1Outcome, out: &Path) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(out).map_err(|e| BenchError::io(out, e))?;
    let labels: Vec<String> = outcome.cases.iter().map(|c| c.label()).collect();
    let names: Vec<[String; 3]> = labels
        .iter()
        .map(|l| [format!("{l}/alp"), format!("{l}/hier"), format!("{l}/deviation")])
        .collect();
    let mut series = Vec::new();
    for (c, n) in outcome.cases.iter().zip(&names) {
        let r = &c.report;
        for (name, values) in n.iter().zip([&r.alp.bound.values, &r.hier.bound.values, &r.deviations]) {
            series.push((name.as_str(), values.iter().map(|&v| Some(v)).collect()));
        }
    }
    let long_path = out.join("prop1.csv");
    let long = long_csv(outcome.grid.times(), series).map_err(|e| csv_err(&long_path, e))?;

    let summary_path = out.join("prop1_summary.csv");
    let summary = (|| {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "case",
            "status",
            "relative_deviation",
            "max_abs_deviation",
            "max_alp_bound",
            "initial_condition_defect",
            "max_approximation_gap",
            "negative_control",
        ])?;
        for (c, label) in outcome.cases.iter().zip(&labels) {
            let r = &c.report;
            w.write_record([
                label.clone(),
                format!("{:?}", r.status),
                r.relative_deviation.to_string(),
                r.max_abs_deviation.to_string(),
                r.max_alp_bound.to_string(),
                r.initial_condition_defect.to_string(),
                r.max_approximation_gap.to_string(),
                c.negative_control.to_string(),
            ])?;
        }
        w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
    })()
    .map_err(|e| csv_err(&summary_path, e))?;

    for (path, data) in [(&long_path, &long), (&summary_path, &summary)] {
        fs::write(path, data).map_err(|e| BenchError::io(path, e))?;
    }
    Ok(vec![long_path, summary_path])
}
