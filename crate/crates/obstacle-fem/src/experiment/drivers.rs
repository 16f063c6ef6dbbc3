//! The three study drivers: penalty halving, mesh Cauchy, force sweep.
//!
//! All drivers share one solve path per problem kind and report errors on
//! two channels. Configuration and setup problems (bad sections, missing
//! files, infeasible constraints) abort with an [`ExperimentError`];
//! per-point solver failures (Newton budget, linear solve breakdown) are
//! recorded in [`ConvergenceReport::failures`] so a partial table still
//! comes back, as the sweep semantics require.
//!
//! Error columns compare successive solutions in three norms built from
//! per-component `H^1` norms on the shared mesh: `error_h1` covers the
//! primal fields (the deflection `u`, or the displacement triple `zeta`),
//! `error_h1_semi` is its seminorm variant, and `error_full` covers the
//! whole stacked state including the dual fields.
//!
//! Force sweeps may solve their points concurrently: the environment
//! variable `OBSTACLE_FEM_THREADS` caps the worker count (default 1).
//! Every solve is internally deterministic and rows are assembled in
//! sweep order afterwards, so the thread count never changes the report.

use std::path::Path;
use std::time::Instant;

use crate::biharmonic::{BiharmonicProblem, BiharmonicState, RadialForcing};
use crate::experiment::config::{ConfigError, ExperimentConfig, ProblemKind};
use crate::experiment::export::{export_vtk, VtkField};
use crate::experiment::report::{ConvergenceReport, MeshStats};
use crate::fem;
use crate::mesh::{build_disk_mesh, Mesh, MeshError};
use crate::shell::{ShellLoads, ShellProblem, ShellState};

/// Environment variable capping force-sweep parallelism.
pub const THREADS_ENV_VAR: &str = "OBSTACLE_FEM_THREADS";

/// Default contact threshold, absolute in surface units. A penalized
/// solve always penetrates a little wherever it touches (the violation
/// scales with `kappa` times the reaction density), so counting the
/// vertices at or below the obstacle needs no penalty-dependent slack;
/// the tiny allowance only absorbs rounding at grazing contact.
pub const DEFAULT_CONTACT_TOL: f64 = 1e-8;

/// Setup failures that abort a driver (solver failures do not; they are
/// recorded in the report instead).
#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    /// Configuration loading or validation failed.
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Mesh construction or point location failed.
    #[error("mesh error: {0}")]
    Mesh(#[from] MeshError),
    /// Biharmonic problem setup failed.
    #[error("problem setup error: {0}")]
    Biharmonic(#[from] crate::biharmonic::BiharmonicError),
    /// Shell problem setup failed.
    #[error("problem setup error: {0}")]
    Shell(#[from] crate::shell::ShellError),
    /// Artifact output failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// The process environment is unusable (bad thread cap).
    #[error("environment error: {0}")]
    Environment(String),
}

/// Everything a driver keeps from one solve.
struct SolveRecord {
    /// Converged stacked state.
    x: Vec<f64>,
    /// Newton iterations taken.
    iterations: usize,
    /// `L^2` constraint violation.
    violation: f64,
    /// `L^2` gap between the dual field and the primal gradient.
    mixed_gap: f64,
    /// Area of the triangles whose vertices all touch the constraint.
    contact_area: f64,
    /// Smallest vertex constraint margin.
    min_margin: f64,
}

/// Multiplies a forcing profile's amplitude, keeping its support.
fn scale_profile(profile: RadialForcing, scale: f64) -> RadialForcing {
    RadialForcing::new(profile.a * scale, profile.c * scale, profile.s)
}

/// Fields per vertex: (primal count, total count).
fn field_counts(problem: ProblemKind) -> (usize, usize) {
    match problem {
        ProblemKind::Biharmonic => (1, 3),
        ProblemKind::Shell => (3, 5),
    }
}

/// `H^1` norms of the difference of two stacked states on one mesh:
/// `[primal full norm, primal seminorm, full-state norm]`, each combining
/// components as the square root of the sum of squares.
fn difference_norms(problem: ProblemKind, mesh: &Mesh, a: &[f64], b: &[f64]) -> [f64; 3] {
    let (primal, total) = field_counts(problem);
    let nv = mesh.vertex_count();
    assert!(a.len() == total * nv && b.len() == total * nv, "state lengths");
    let mut primal_sq = 0.0;
    let mut semi_sq = 0.0;
    let mut full_sq = 0.0;
    for c in 0..total {
        let diff: Vec<f64> = a[c * nv..(c + 1) * nv]
            .iter()
            .zip(&b[c * nv..(c + 1) * nv])
            .map(|(x, y)| x - y)
            .collect();
        let h1 = fem::h1_norm(mesh, &diff);
        full_sq += h1 * h1;
        if c < primal {
            primal_sq += h1 * h1;
            let semi = fem::h1_seminorm(mesh, &diff);
            semi_sq += semi * semi;
        }
    }
    [primal_sq.sqrt(), semi_sq.sqrt(), full_sq.sqrt()]
}

/// Interpolates every component of a stacked state from a coarse mesh
/// onto a finer one.
fn interpolate_stacked(
    problem: ProblemKind,
    coarse: &Mesh,
    x: &[f64],
    fine: &Mesh,
) -> Result<Vec<f64>, ExperimentError> {
    let (_, total) = field_counts(problem);
    let nvc = coarse.vertex_count();
    assert!(x.len() == total * nvc, "state length");
    let mut out = Vec::with_capacity(total * fine.vertex_count());
    for c in 0..total {
        out.extend(fem::interpolate(coarse, &x[c * nvc..(c + 1) * nvc], fine)?);
    }
    Ok(out)
}

/// Builds and solves one problem instance. The outer error channel is
/// for setup failures; the inner one carries a solver-failure message.
fn solve_point(
    config: &ExperimentConfig,
    mesh: &Mesh,
    kappa: f64,
    profile: RadialForcing,
    start: Option<&[f64]>,
    contact_tol: f64,
) -> Result<Result<SolveRecord, String>, ExperimentError> {
    let newton = config.newton.newton_config();
    match config.problem {
        ProblemKind::Biharmonic => {
            let obstacle = config
                .obstacle
                .as_ref()
                .expect("validated biharmonic config has an obstacle")
                .build();
            let problem = BiharmonicProblem::new(mesh, kappa, obstacle, profile)?;
            let solved = match start {
                Some(x0) => problem.solve_from(x0, &newton),
                None => problem.solve(&newton),
            };
            Ok(match solved {
                Ok((state, report)) => {
                    let min_margin = mesh
                        .vertices()
                        .iter()
                        .enumerate()
                        .map(|(v, &p)| state.u[v] - problem.obstacle().eval(p))
                        .fold(f64::INFINITY, f64::min);
                    Ok(SolveRecord {
                        iterations: report.iterations,
                        violation: problem.constraint_violation(&state),
                        mixed_gap: problem.mixed_gap(&state),
                        contact_area: problem.contact_area(&state, contact_tol),
                        min_margin,
                        x: state.stacked(),
                    })
                }
                Err(e) => Err(e.to_string()),
            })
        }
        ProblemKind::Shell => {
            let section = config
                .shell
                .as_ref()
                .expect("validated shell config has a shell section");
            let constraints = section.constraints()?;
            let loads = ShellLoads {
                transverse: profile,
                transverse_scale: section.load_scale(),
                in_plane: section.in_plane,
                moments: section.moments,
            };
            let problem = ShellProblem::new(mesh, section.params(), kappa, constraints, loads)?;
            let solved = match start {
                Some(x0) => problem.solve_from(x0, &newton),
                None => problem.solve(&newton),
            };
            Ok(match solved {
                Ok((state, report)) => Ok(SolveRecord {
                    iterations: report.iterations,
                    violation: problem.constraint_violation(&state),
                    mixed_gap: problem.mixed_gap(&state),
                    contact_area: problem.contact_area(&state, contact_tol),
                    min_margin: problem.min_constraint_margin(&state),
                    x: state.stacked(),
                }),
                Err(e) => Err(e.to_string()),
            })
        }
    }
}

/// Constructs the problem once with zero forcing and discards it, so
/// setup mistakes (infeasible constraints, bad parameters) surface as a
/// single abort instead of one failure per sweep point.
fn check_setup(
    config: &ExperimentConfig,
    mesh: &Mesh,
    kappa: f64,
) -> Result<(), ExperimentError> {
    match config.problem {
        ProblemKind::Biharmonic => {
            let obstacle = config
                .obstacle
                .as_ref()
                .expect("validated biharmonic config has an obstacle")
                .build();
            BiharmonicProblem::new(mesh, kappa, obstacle, RadialForcing::zero())?;
        }
        ProblemKind::Shell => {
            let section = config
                .shell
                .as_ref()
                .expect("validated shell config has a shell section");
            ShellProblem::new(
                mesh,
                section.params(),
                kappa,
                section.constraints()?,
                ShellLoads::zero(),
            )?;
        }
    }
    Ok(())
}

/// Runs a penalty-halving table: solves at `kappa_j = kappa0 / 2^j` for
/// `j = 0..=halvings` and tabulates the distance between consecutive
/// solutions. Row `j` is labeled `kappa_j` and carries the error
/// `|x(kappa_{j+1}) - x(kappa_j)|` along with the diagnostics of the
/// solve at `kappa_j`.
///
/// # Errors
/// Setup failures abort; a solver failure stops the sweep and returns
/// the partial table with the failure recorded and `terminated` unset.
pub fn run_kappa_sweep(config: &ExperimentConfig) -> Result<ConvergenceReport, ExperimentError> {
    config.validate()?;
    let sweep = config
        .kappa_sweep
        .clone()
        .ok_or(ConfigError::MissingSection("kappa_sweep"))?;
    let profile = config.forcing.fixed()?;
    let start_time = Instant::now();
    let mesh = build_disk_mesh(config.mesh.n, config.mesh.radius)?;
    let mut report = ConvergenceReport::new(
        config,
        MeshStats::of(&mesh),
        vec![
            "kappa",
            "error_h1",
            "error_h1_semi",
            "error_full",
            "iterations",
            "violation",
            "mixed_gap",
        ],
    );
    let mut records: Vec<SolveRecord> = Vec::new();
    for j in 0..=sweep.halvings {
        let kappa = sweep.kappa0 * 0.5f64.powi(j as i32);
        let start = if sweep.warm_start {
            records.last().map(|r| r.x.as_slice())
        } else {
            None
        };
        match solve_point(config, &mesh, kappa, profile, start, DEFAULT_CONTACT_TOL)? {
            Ok(record) => records.push(record),
            Err(msg) => {
                report.failures.push(format!("kappa={kappa:.8e}: {msg}"));
                report.terminated = false;
                break;
            }
        }
    }
    for j in 0..records.len().saturating_sub(1) {
        let kappa = sweep.kappa0 * 0.5f64.powi(j as i32);
        let norms = difference_norms(config.problem, &mesh, &records[j].x, &records[j + 1].x);
        report.push_row(vec![
            kappa,
            norms[0],
            norms[1],
            norms[2],
            records[j].iterations as f64,
            records[j].violation,
            records[j].mixed_gap,
        ]);
    }
    report.wall_seconds = start_time.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs a mesh Cauchy study: solves on nested meshes `n, 2n, 4n, ...`
/// with `kappa = h^q`, lifts each coarse solution onto the next mesh by
/// nodal interpolation, and stops once the successive `H^1` error of the
/// primal fields drops below the Cauchy tolerance. Exhausting the mesh
/// budget first is not an error: the report comes back with `terminated`
/// unset and a note.
///
/// # Errors
/// Setup failures abort; a solver failure stops the study and returns
/// the partial table with the failure recorded.
pub fn run_h_cauchy(config: &ExperimentConfig) -> Result<ConvergenceReport, ExperimentError> {
    config.validate()?;
    let section = config
        .cauchy
        .clone()
        .ok_or(ConfigError::MissingSection("cauchy"))?;
    let tol = config.cauchy_tol();
    let profile = config.forcing.fixed()?;
    let start_time = Instant::now();
    let mut current = build_disk_mesh(config.mesh.n, config.mesh.radius)?;
    let mut report = ConvergenceReport::new(
        config,
        MeshStats::of(&current),
        vec![
            "n",
            "h",
            "kappa",
            "error_h1",
            "error_h1_semi",
            "error_full",
            "iterations",
            "violation",
            "mixed_gap",
        ],
    );
    report.notes.push(format!("cauchy-tol: {tol:.8e}"));
    let mut previous: Option<(Mesh, Vec<f64>)> = None;
    loop {
        let n = MeshStats::of(&current).n;
        let kappa = current.h().powf(section.q);
        let record = match solve_point(config, &current, kappa, profile, None, DEFAULT_CONTACT_TOL)?
        {
            Ok(record) => record,
            Err(msg) => {
                report.failures.push(format!("n={n}: {msg}"));
                report.terminated = false;
                break;
            }
        };
        let mut reached_tol = false;
        if let Some((coarse_mesh, coarse_x)) = &previous {
            let lifted = interpolate_stacked(config.problem, coarse_mesh, coarse_x, &current)?;
            let norms = difference_norms(config.problem, &current, &lifted, &record.x);
            report.push_row(vec![
                n as f64,
                current.h(),
                kappa,
                norms[0],
                norms[1],
                norms[2],
                record.iterations as f64,
                record.violation,
                record.mixed_gap,
            ]);
            reached_tol = norms[0] < tol;
        }
        if reached_tol {
            report.terminated = true;
            break;
        }
        if 2 * n > section.n_max {
            report.notes.push(format!(
                "mesh budget n_max={} exhausted before the Cauchy tolerance",
                section.n_max
            ));
            report.terminated = false;
            break;
        }
        let finer = current.refine();
        previous = Some((current, record.x));
        current = finer;
    }
    report.mesh = MeshStats::of(&current);
    report.wall_seconds = start_time.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs a force sweep: one solve per load index `ell` at a fixed mesh
/// and penalty, tabulating contact area and constraint margins. When the
/// config names an output directory, a VTK file of the deformed
/// configuration is written per solved point. Points may run on up to
/// `OBSTACLE_FEM_THREADS` workers; results are identical either way.
///
/// # Errors
/// Setup failures abort; per-point solver failures are recorded and the
/// sweep continues.
pub fn run_force_sweep(config: &ExperimentConfig) -> Result<ConvergenceReport, ExperimentError> {
    config.validate()?;
    let section = config
        .force_sweep
        .clone()
        .ok_or(ConfigError::MissingSection("force_sweep"))?;
    let start_time = Instant::now();
    let mesh = build_disk_mesh(config.mesh.n, config.mesh.radius)?;
    let kappa = match (section.kappa, section.q) {
        (Some(kappa), _) => kappa,
        (None, Some(q)) => mesh.h().powf(q),
        (None, None) => unreachable!("validation requires kappa or q"),
    };
    let contact_tol = section.contact_tol.unwrap_or(DEFAULT_CONTACT_TOL);
    check_setup(config, &mesh, kappa)?;
    let threads = thread_budget()?;

    let mut report = ConvergenceReport::new(
        config,
        MeshStats::of(&mesh),
        vec![
            "ell",
            "contact_area",
            "min_margin",
            "violation",
            "mixed_gap",
            "iterations",
        ],
    );
    report.notes.push(format!("kappa: {kappa:.8e}"));
    report.notes.push(format!("contact-tol: {contact_tol:.8e}"));

    let outcomes = parallel_map_ordered(&section.ell, threads, |&ell| {
        let profile = match config.forcing.at_ell(ell) {
            Ok(profile) => scale_profile(profile, section.force_scale),
            Err(e) => return Err(e.to_string()),
        };
        match solve_point(config, &mesh, kappa, profile, None, contact_tol) {
            Ok(outcome) => outcome,
            Err(e) => Err(e.to_string()),
        }
    });
    for (&ell, outcome) in section.ell.iter().zip(&outcomes) {
        match outcome {
            Ok(record) => {
                report.push_row(vec![
                    ell as f64,
                    record.contact_area,
                    record.min_margin,
                    record.violation,
                    record.mixed_gap,
                    record.iterations as f64,
                ]);
                if let Some(dir) = &config.output_dir {
                    write_force_vtk(config, &mesh, ell, record, Path::new(dir))?;
                }
            }
            Err(msg) => report.failures.push(format!("ell={ell}: {msg}")),
        }
    }
    report.wall_seconds = start_time.elapsed().as_secs_f64();
    Ok(report)
}

/// Writes the deformed configuration of one force-sweep point.
fn write_force_vtk(
    config: &ExperimentConfig,
    mesh: &Mesh,
    ell: u64,
    record: &SolveRecord,
    dir: &Path,
) -> Result<(), ExperimentError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}-l{}.vtk", config.label, ell));
    let title = format!("{} ell={}", config.label, ell);
    let nv = mesh.vertex_count();
    match config.problem {
        ProblemKind::Biharmonic => {
            let state = BiharmonicState::from_stacked(mesh, &record.x);
            let obstacle = config
                .obstacle
                .as_ref()
                .expect("validated biharmonic config has an obstacle")
                .build();
            let points: Vec<[f64; 3]> = mesh
                .vertices()
                .iter()
                .enumerate()
                .map(|(v, p)| [p[0], p[1], state.u[v]])
                .collect();
            let theta: Vec<f64> = mesh.vertices().iter().map(|&p| obstacle.eval(p)).collect();
            let margin: Vec<f64> = (0..nv).map(|v| state.u[v] - theta[v]).collect();
            let dual: Vec<[f64; 3]> = (0..nv)
                .map(|v| [state.xi[0][v], state.xi[1][v], 0.0])
                .collect();
            export_vtk(
                mesh,
                Some(&points),
                &[
                    VtkField::Scalars {
                        name: "deflection",
                        values: &state.u,
                    },
                    VtkField::Scalars {
                        name: "obstacle",
                        values: &theta,
                    },
                    VtkField::Scalars {
                        name: "margin",
                        values: &margin,
                    },
                    VtkField::Vectors {
                        name: "dual",
                        values: &dual,
                    },
                ],
                &title,
                &path,
            )?;
        }
        ProblemKind::Shell => {
            let section = config
                .shell
                .as_ref()
                .expect("validated shell config has a shell section");
            let state = ShellState::from_stacked(mesh, &record.x);
            let constraints = section.constraints()?;
            let points: Vec<[f64; 3]> = (0..nv)
                .map(|v| state.deformed_point(mesh, section.z0, v))
                .collect();
            let margin: Vec<f64> = points
                .iter()
                .map(|&p| {
                    constraints
                        .iter()
                        .map(|c| c.margin(p))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            let in_plane: Vec<[f64; 3]> = (0..nv)
                .map(|v| [state.zeta[0][v], state.zeta[1][v], 0.0])
                .collect();
            let rotation: Vec<[f64; 3]> = (0..nv)
                .map(|v| [state.xi[0][v], state.xi[1][v], 0.0])
                .collect();
            export_vtk(
                mesh,
                Some(&points),
                &[
                    VtkField::Scalars {
                        name: "transverse",
                        values: &state.zeta[2],
                    },
                    VtkField::Scalars {
                        name: "margin",
                        values: &margin,
                    },
                    VtkField::Vectors {
                        name: "in_plane",
                        values: &in_plane,
                    },
                    VtkField::Vectors {
                        name: "rotation",
                        values: &rotation,
                    },
                ],
                &title,
                &path,
            )?;
        }
    }
    Ok(())
}

/// Parses a thread cap; `None` (unset variable) means 1.
fn parse_thread_budget(raw: Option<&str>) -> Result<usize, String> {
    let Some(raw) = raw else { return Ok(1) };
    match raw.trim().parse::<usize>() {
        Ok(t) if t >= 1 => Ok(t),
        _ => Err(format!(
            "{THREADS_ENV_VAR} must be a positive integer (got {raw:?})"
        )),
    }
}

/// Reads the thread cap from the environment.
fn thread_budget() -> Result<usize, ExperimentError> {
    match std::env::var(THREADS_ENV_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(e) => Err(ExperimentError::Environment(format!(
            "{THREADS_ENV_VAR}: {e}"
        ))),
        Ok(raw) => parse_thread_budget(Some(&raw)).map_err(ExperimentError::Environment),
    }
}

/// Applies `f` to every item, preserving input order in the results.
/// With more than one worker, items are pulled from a shared counter by
/// scoped threads; `f` must be deterministic for the output to be
/// independent of the schedule, which all drivers guarantee.
fn parallel_map_ordered<T, U, F>(items: &[T], threads: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let workers = threads.min(items.len());
    if workers <= 1 {
        return items.iter().map(&f).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<U>>> =
        items.iter().map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let value = f(&items[i]);
                *slots[i].lock().expect("result slot") = Some(value);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("result slot")
                .expect("every slot is filled")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::{
        CauchySection, ForceSweepSection, ForcingSpec, KappaSweepSection, MeshSection,
        NewtonSection, ObstacleSpec, ShellSection, StoppingSpec,
    };

    /// Biharmonic table config over the constant obstacle at -1.
    fn biharmonic_config(n: usize, forcing: ForcingSpec) -> ExperimentConfig {
        ExperimentConfig {
            label: "driver-test".to_string(),
            problem: ProblemKind::Biharmonic,
            mesh: MeshSection { n, radius: 0.5 },
            forcing,
            obstacle: Some(ObstacleSpec::Constant { value: -1.0 }),
            shell: None,
            kappa_sweep: None,
            cauchy: None,
            force_sweep: None,
            newton: NewtonSection::default(),
            output_dir: None,
        }
    }

    fn table_forcing() -> ForcingSpec {
        ForcingSpec::Fixed {
            a: 7.5,
            c: -0.295,
            s: 0.060,
        }
    }

    #[test]
    fn kappa_sweep_zero_forcing_gives_zero_rows() {
        let mut config = biharmonic_config(
            2,
            ForcingSpec::Fixed {
                a: 0.0,
                c: 0.0,
                s: 0.0,
            },
        );
        config.kappa_sweep = Some(KappaSweepSection {
            kappa0: 1e-3,
            halvings: 2,
            warm_start: false,
        });
        let report = run_kappa_sweep(&config).unwrap();
        assert!(report.succeeded() && report.terminated);
        assert!(report.rows.len() == 2, "halvings rows");
        for row in &report.rows {
            // kappa, then errors, iterations, violation, gap: all zero
            // except the kappa label itself.
            assert!(row[1..].iter().all(|&v| v == 0.0), "zero solutions: {row:?}");
        }
        assert!(report.rows[0][0] == 1e-3 && report.rows[1][0] == 0.5e-3);
    }

    #[test]
    fn kappa_sweep_errors_halve_with_kappa() {
        let mut config = biharmonic_config(4, table_forcing());
        config.kappa_sweep = Some(KappaSweepSection {
            kappa0: 1e-6,
            halvings: 3,
            warm_start: false,
        });
        let report = run_kappa_sweep(&config).unwrap();
        assert!(report.succeeded() && report.terminated);
        assert!(report.rows.len() == 3);
        for row in &report.rows {
            let (err, semi, full) = (row[1], row[2], row[3]);
            assert!(err > 0.0, "nontrivial error");
            assert!(semi <= err && err <= full, "norm ordering: {row:?}");
        }
        for pair in report.rows.windows(2) {
            let ratio = pair[0][1] / pair[1][1];
            assert!(
                (1.7..=2.3).contains(&ratio),
                "successive errors halve, ratio {ratio}"
            );
        }
    }

    #[test]
    fn kappa_sweep_warm_start_matches_cold() {
        let mut config = biharmonic_config(4, table_forcing());
        config.kappa_sweep = Some(KappaSweepSection {
            kappa0: 1e-4,
            halvings: 2,
            warm_start: false,
        });
        let cold = run_kappa_sweep(&config).unwrap();
        config.kappa_sweep.as_mut().unwrap().warm_start = true;
        let warm = run_kappa_sweep(&config).unwrap();
        assert!(cold.rows.len() == warm.rows.len());
        for (a, b) in cold.rows.iter().zip(&warm.rows) {
            // Iteration counts (column 4) may legitimately differ; the
            // solutions and therefore all other columns must agree.
            for k in [0usize, 1, 2, 3, 5, 6] {
                assert!(
                    (a[k] - b[k]).abs() <= 1e-9,
                    "column {k}: cold {} vs warm {}",
                    a[k],
                    b[k]
                );
            }
        }
    }

    #[test]
    fn cauchy_zero_forcing_terminates_immediately() {
        let mut config = biharmonic_config(
            2,
            ForcingSpec::Fixed {
                a: 0.0,
                c: 0.0,
                s: 0.0,
            },
        );
        config.cauchy = Some(CauchySection {
            q: 0.3,
            n_max: 8,
            tol: None,
        });
        let report = run_h_cauchy(&config).unwrap();
        assert!(report.succeeded() && report.terminated);
        assert!(report.rows.len() == 1, "stops at the first comparison");
        assert!(report.rows[0][0] == 4.0, "first comparison is on n=4");
        assert!(report.rows[0][3] == 0.0, "zero error between zero solutions");
        assert!(report.mesh.n == 4, "finest mesh reached");
    }

    #[test]
    fn cauchy_budget_exhaustion_is_flagged_not_failed() {
        let mut config = biharmonic_config(2, table_forcing());
        config.cauchy = Some(CauchySection {
            q: 0.3,
            n_max: 8,
            tol: Some(1e-300),
        });
        let report = run_h_cauchy(&config).unwrap();
        assert!(report.succeeded(), "no solver failures");
        assert!(!report.terminated, "tolerance was never reached");
        assert!(report.rows.len() == 2, "comparisons at n=4 and n=8");
        assert!(report.rows[0][0] == 4.0 && report.rows[1][0] == 8.0);
        assert!(
            report.rows[1][3] < report.rows[0][3],
            "successive error decreases: {} then {}",
            report.rows[0][3],
            report.rows[1][3]
        );
        assert!(
            report.notes.iter().any(|n| n.contains("budget")),
            "budget note recorded"
        );
    }

    #[test]
    fn force_sweep_engages_contact_monotonically() {
        let mut config = biharmonic_config(
            4,
            ForcingSpec::EllFamily {
                a: 0.25,
                coeff: 0.0059,
            },
        );
        let out_dir = std::env::temp_dir().join(format!(
            "obstacle-fem-force-sweep-{}",
            std::process::id()
        ));
        config.output_dir = Some(out_dir.to_string_lossy().into_owned());
        config.force_sweep = Some(ForceSweepSection {
            ell: vec![0, 80, 199],
            kappa: None,
            q: Some(0.3),
            force_scale: 2000.0,
            contact_tol: None,
        });
        config.newton.stopping = StoppingSpec::Increment;
        let report = run_force_sweep(&config).unwrap();
        assert!(report.succeeded() && report.terminated);
        assert!(report.rows.len() == 3);

        let rest = &report.rows[0];
        assert!(rest[0] == 0.0 && rest[1] == 0.0, "zero load, zero contact");
        assert!((rest[2] - 1.0).abs() < 1e-12, "rest margin is the gap to -1");
        assert!(rest[3] == 0.0, "no violation at rest");

        let areas: Vec<f64> = report.rows.iter().map(|r| r[1]).collect();
        assert!(
            areas.windows(2).all(|w| w[0] <= w[1]),
            "contact area nondecreasing: {areas:?}"
        );
        assert!(
            *areas.last().unwrap() > 0.0,
            "strongest load engages contact: {areas:?}"
        );
        let deepest = &report.rows[2];
        assert!(deepest[2] < 0.0, "contact presses into the obstacle");
        assert!(deepest[3] > 0.0, "violation is nonzero under contact");

        for ell in [0u64, 80, 199] {
            let path = out_dir.join(format!("driver-test-l{ell}.vtk"));
            let text = std::fs::read_to_string(&path).unwrap();
            assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
            assert!(text.contains("SCALARS deflection double 1"));
        }
        std::fs::remove_dir_all(&out_dir).unwrap();
    }

    #[test]
    fn force_sweep_records_failures_and_continues() {
        let mut config = biharmonic_config(
            4,
            ForcingSpec::EllFamily {
                a: 0.25,
                coeff: 0.0059,
            },
        );
        config.force_sweep = Some(ForceSweepSection {
            ell: vec![0, 199],
            kappa: None,
            q: Some(0.3),
            force_scale: 2000.0,
            contact_tol: None,
        });
        // One Newton iteration cannot resolve the active set under the
        // strongest load, while the zero load converges immediately.
        config.newton.stopping = StoppingSpec::Increment;
        config.newton.max_iter = 1;
        let report = run_force_sweep(&config).unwrap();
        assert!(!report.succeeded(), "the deep-contact point fails");
        assert!(report.failures.len() == 1 && report.failures[0].starts_with("ell=199:"));
        assert!(report.rows.len() == 1, "the zero-load row survives");
        assert!(report.rows[0][0] == 0.0);
    }

    #[test]
    fn missing_sections_are_config_errors() {
        let config = biharmonic_config(2, table_forcing());
        assert!(matches!(
            run_kappa_sweep(&config),
            Err(ExperimentError::Config(ConfigError::MissingSection("kappa_sweep")))
        ));
        assert!(matches!(
            run_h_cauchy(&config),
            Err(ExperimentError::Config(ConfigError::MissingSection("cauchy")))
        ));
        assert!(matches!(
            run_force_sweep(&config),
            Err(ExperimentError::Config(ConfigError::MissingSection("force_sweep")))
        ));
    }

    #[test]
    fn parallel_map_preserves_order_and_values() {
        let items: Vec<usize> = (0..23).collect();
        let serial = parallel_map_ordered(&items, 1, |&i| i * i + 1);
        let parallel = parallel_map_ordered(&items, 4, |&i| i * i + 1);
        assert!(serial == parallel, "schedule independence");
        assert!(serial == (0..23).map(|i| i * i + 1).collect::<Vec<_>>());
    }

    #[test]
    fn thread_budget_parsing() {
        assert!(parse_thread_budget(None).unwrap() == 1, "default is serial");
        assert!(parse_thread_budget(Some("4")).unwrap() == 4);
        assert!(parse_thread_budget(Some(" 2 ")).unwrap() == 2, "whitespace tolerated");
        assert!(parse_thread_budget(Some("0")).is_err(), "zero workers rejected");
        assert!(parse_thread_budget(Some("many")).is_err(), "junk rejected");
    }

    /// Manual probe for choosing preset force scales: prints contact
    /// area, margin, and iteration count over a scale ladder for each
    /// shipped sweep family. Run with `--ignored --nocapture` when
    /// recalibrating.
    #[test]
    #[ignore]
    fn force_scale_calibration_probe() {
        let ladder = |config: &mut ExperimentConfig, scales: &[f64]| {
            config.newton.stopping = StoppingSpec::Increment;
            for &scale in scales {
                config.force_sweep.as_mut().unwrap().force_scale = scale;
                let report = run_force_sweep(config).unwrap();
                println!("  scale {scale:>8.0}:");
                for row in &report.rows {
                    println!(
                        "    ell {:>4}: contact {:.4} margin {:+.4} iters {}",
                        row[0], row[1], row[2], row[5]
                    );
                }
                for failure in &report.failures {
                    println!("    FAILED {failure}");
                }
            }
        };

        let mut flat = biharmonic_config(
            16,
            ForcingSpec::EllFamily {
                a: 0.25,
                coeff: 0.0059,
            },
        );
        flat.force_sweep = Some(ForceSweepSection {
            ell: vec![0, 40, 80, 120, 160, 199],
            kappa: Some(1e-6),
            q: None,
            force_scale: 1.0,
            contact_tol: None,
        });
        println!("biharmonic flat obstacle:");
        ladder(&mut flat, &[1000.0, 2000.0, 4000.0, 8000.0]);

        let mut two_plane = flat.clone();
        two_plane.obstacle = Some(ObstacleSpec::Planes {
            planes: vec![
                crate::experiment::config::PlaneSpec {
                    grad: [0.5, 0.0],
                    offset: -0.5,
                },
                crate::experiment::config::PlaneSpec {
                    grad: [-0.5, 0.0],
                    offset: -0.5,
                },
            ],
        });
        two_plane.force_sweep.as_mut().unwrap().ell = vec![0, 150, 300, 450, 600, 750];
        println!("biharmonic two-plane obstacle:");
        ladder(&mut two_plane, &[200.0, 400.0, 800.0, 1600.0]);

        let shell_section = |z0: f64, normals: Vec<[f64; 3]>| ShellSection {
            epsilon: 1e-3,
            lambda: 0.4,
            mu: 0.012,
            z0,
            normals,
            transverse_scale: None,
            in_plane: [0.0, 0.0],
            moments: [0.0, 0.0],
        };
        let mut shell_flat = ExperimentConfig {
            label: "probe-shell".to_string(),
            problem: ProblemKind::Shell,
            mesh: MeshSection { n: 16, radius: 1.0 },
            forcing: ForcingSpec::EllFamily {
                a: 0.5,
                coeff: 0.0059,
            },
            obstacle: None,
            shell: Some(shell_section(0.15, vec![[0.0, 0.0, 1.0]])),
            kappa_sweep: None,
            cauchy: None,
            force_sweep: Some(ForceSweepSection {
                ell: vec![0, 2, 5, 10, 20, 39],
                kappa: Some(1e-6),
                q: None,
                force_scale: 1.0,
                contact_tol: None,
            }),
            newton: NewtonSection::default(),
            output_dir: None,
        };
        println!("shell flat obstacle:");
        ladder(&mut shell_flat, &[25.0, 50.0, 100.0, 200.0, 400.0]);

        let mut shell_wedge = shell_flat.clone();
        shell_wedge.shell = Some(shell_section(
            0.6,
            vec![[-1.0, 0.0, 2.0], [1.0, 0.0, 2.0]],
        ));
        println!("shell wedge:");
        ladder(&mut shell_wedge, &[100.0, 300.0, 600.0, 1200.0, 2400.0]);
    }
}
