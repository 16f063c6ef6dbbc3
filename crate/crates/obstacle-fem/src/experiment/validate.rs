//! Self-contained correctness checks runnable from the CLI.
//!
//! Each check builds small problem instances, measures a property the
//! implementation is supposed to have, and reports pass or fail with the
//! measured numbers. The properties are chosen so that each one would
//! catch a different class of defect:
//!
//! - exact Jacobian symmetry (assembly ordering and grouping),
//! - finite-difference consistency of residual and Jacobian (signs and
//!   factors in the energy gradient),
//! - Newton iteration counts on the canonical study configurations
//!   (globalization and conditioning),
//! - independence of the converged state from the starting point
//!   (convexity of the discrete energy and solver reproducibility),
//! - exact zero rest state under zero load (load assembly),
//! - the compression modulus routed through an independently computed
//!   divergence integral (material parameter wiring),
//! - rotational equivariance of solutions to rotationally symmetric
//!   data (isotropy of the discretization on the symmetric mesh),
//! - stability of scaled shell solutions across thickness (the
//!   thickness-normalized load convention).
//!
//! The suite uses fixed seeds throughout and is deterministic.

use crate::biharmonic::{BiharmonicProblem, RadialForcing, ScalarObstacle};
use crate::experiment::config::{ExperimentConfig, ProblemKind};
use crate::experiment::presets;
use crate::fem::element_geometry;
use crate::mesh::{build_disk_mesh, Mesh};
use crate::nonlinear::NewtonConfig;
use crate::shell::{HalfSpaceConstraint, ShellLoads, ShellParams, ShellProblem};
use crate::sparse::norm2;
use crate::{fem, sparse};

/// Relative tolerance for residual-versus-energy and Jacobian-versus-
/// residual finite-difference comparisons.
pub const FD_REL_TOL: f64 = 1e-5;
/// Iteration budget the canonical configurations must fit in.
pub const NEWTON_ITERATION_BUDGET: usize = 30;
/// Agreement required between converged states from independent starts.
pub const RESTART_TOL: f64 = 1e-10;
/// Relative tolerance of the dual-route compression-modulus identity.
pub const MODULUS_ROUTE_REL_TOL: f64 = 1e-12;
/// Relative tolerance for rotational equivariance of solved fields.
pub const ROTATION_REL_TOL: f64 = 1e-8;
/// Position matching tolerance when building the rotation permutation.
pub const ROTATION_MATCH_TOL: f64 = 1e-9;
/// Allowed relative spread between scaled shell solutions at different
/// thicknesses (the fields are nearly identical; the bound only has to
/// rule out a broken load scaling, which is off by powers of 1000).
pub const THICKNESS_SPREAD_TOL: f64 = 0.5;

/// Outcome of one validation check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    /// Stable identifier, usable in scripts.
    pub name: &'static str,
    /// Whether the property held.
    pub passed: bool,
    /// Measured quantities, or the failure description.
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckResult { name, passed, detail }
    }
}

/// Runs every check and returns their results in a fixed order. The
/// suite never panics on a failed property; it reports it.
pub fn run_validation_suite() -> Vec<CheckResult> {
    vec![
        check_jacobian_symmetry(),
        check_residual_matches_energy_gradient(),
        check_jacobian_matches_residual_derivative(),
        check_newton_iterations_within_budget(),
        check_solution_independent_of_start(),
        check_zero_load_rest_state(),
        check_lambda_controls_compression_stiffness(),
        check_rotational_symmetry(),
        check_thickness_scaling_stability(),
    ]
}

/// SplitMix64: small deterministic generator for reproducible states.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 * 2.0 - 1.0
    }
}

/// True at dofs fixed by the boundary condition: every field component
/// vanishes on the boundary ring.
fn constrained_mask(mesh: &Mesh, components: usize) -> Vec<bool> {
    let nv = mesh.vertex_count();
    let mut mask = vec![false; components * nv];
    for c in 0..components {
        for v in 0..nv {
            mask[c * nv + v] = mesh.is_boundary(v);
        }
    }
    mask
}

/// Random stacked state, zero at constrained dofs.
fn random_state(mesh: &Mesh, components: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mask = constrained_mask(mesh, components);
    let mut rng = SplitMix64(seed);
    mask.iter()
        .map(|&fixed| if fixed { 0.0 } else { scale * rng.next_f64() })
        .collect()
}

/// The two straddling fixtures shared by the symmetry and
/// finite-difference checks: a biharmonic instance and a two-plane
/// shell instance, each with a random state that crosses its
/// constraint somewhere but not everywhere.
fn biharmonic_fixture() -> (Mesh, f64, ScalarObstacle, RadialForcing) {
    let mesh = build_disk_mesh(2, 0.5).expect("valid mesh");
    (mesh, 0.5, ScalarObstacle::constant(-0.2), RadialForcing::new(7.5, -0.295, 0.060))
}

/// Random draw scale for the shell fixture states: large enough that
/// the draws can cross the constraint planes at `z0 = 0.30`.
const SHELL_FIXTURE_DRAW: f64 = 1.5;
/// Draw seed for the shell fixture states: chosen so the draw crosses
/// both planes at several quadrature points while every margin stays
/// orders of magnitude further from zero than the finite-difference
/// steps, keeping the difference quotients away from the kink.
const SHELL_FIXTURE_SEED: u64 = 17;

fn shell_fixture() -> (Mesh, ShellParams, f64, Vec<HalfSpaceConstraint>, ShellLoads) {
    let mesh = build_disk_mesh(2, 0.5).expect("valid mesh");
    let params = ShellParams { epsilon: 0.1, lambda: 0.4, mu: 0.012, z0: 0.30 };
    let planes = vec![
        HalfSpaceConstraint::new([0.0, 0.0, 1.0]).expect("unit normal"),
        HalfSpaceConstraint::new([1.0, 0.0, 2.0]).expect("valid normal"),
    ];
    let loads = ShellLoads::transverse(RadialForcing::new(5.0, -0.295, 0.060), 1.0);
    (mesh, params, 0.5, planes, loads)
}

fn check_jacobian_symmetry() -> CheckResult {
    let name = "jacobian-exact-symmetry";

    let (mesh, kappa, obstacle, forcing) = biharmonic_fixture();
    let problem = BiharmonicProblem::new(&mesh, kappa, obstacle, forcing).expect("valid problem");
    let x = random_state(&mesh, 3, 3, 0.5);
    let state = crate::biharmonic::BiharmonicState::from_stacked(&mesh, &x);
    let bi_active = problem.constraint_violation(&state) > 0.0;
    let bi_asym = problem.jacobian(&x).max_asymmetry();

    let (mesh, params, kappa, planes, loads) = shell_fixture();
    let problem = ShellProblem::new(&mesh, params, kappa, planes, loads).expect("valid problem");
    let y = random_state(&mesh, 5, SHELL_FIXTURE_SEED, SHELL_FIXTURE_DRAW);
    let shell_state = crate::shell::ShellState::from_stacked(&mesh, &y);
    let sh_active = problem.constraint_violation(&shell_state) > 0.0;
    let sh_asym = problem.jacobian(&y).max_asymmetry();

    CheckResult::new(
        name,
        bi_asym == 0.0 && sh_asym == 0.0 && bi_active && sh_active,
        format!(
            "max asymmetry {bi_asym:.1e} (plate, penalty active: {bi_active}), \
             {sh_asym:.1e} (shell, penalty active: {sh_active}); required exactly 0"
        ),
    )
}

/// Central finite difference of `energy` against `residual` over the
/// free dofs; returns the relative Euclidean error.
fn fd_gradient_error(
    energy: &dyn Fn(&[f64]) -> f64,
    residual: &[f64],
    x: &[f64],
    mask: &[bool],
) -> f64 {
    let step = 1e-6 * norm2(x);
    let mut xp = x.to_vec();
    let mut diff_sq = 0.0;
    let mut norm_sq = 0.0;
    for i in 0..x.len() {
        if mask[i] {
            continue;
        }
        xp[i] = x[i] + step;
        let ep = energy(&xp);
        xp[i] = x[i] - step;
        let em = energy(&xp);
        xp[i] = x[i];
        let fd = (ep - em) / (2.0 * step);
        diff_sq += (residual[i] - fd) * (residual[i] - fd);
        norm_sq += residual[i] * residual[i];
    }
    (diff_sq / norm_sq).sqrt()
}

fn check_residual_matches_energy_gradient() -> CheckResult {
    let name = "residual-matches-energy-gradient";

    let (mesh, kappa, obstacle, forcing) = biharmonic_fixture();
    let problem = BiharmonicProblem::new(&mesh, kappa, obstacle, forcing).expect("valid problem");
    let x = random_state(&mesh, 3, 3, 0.5);
    let mask = constrained_mask(&mesh, 3);
    let bi_rel = fd_gradient_error(&|z| problem.energy(z), &problem.residual(&x), &x, &mask);

    let (mesh, params, kappa, planes, loads) = shell_fixture();
    let problem = ShellProblem::new(&mesh, params, kappa, planes, loads).expect("valid problem");
    let y = random_state(&mesh, 5, SHELL_FIXTURE_SEED, SHELL_FIXTURE_DRAW);
    let mask = constrained_mask(&mesh, 5);
    let sh_rel = fd_gradient_error(&|z| problem.energy(z), &problem.residual(&y), &y, &mask);

    CheckResult::new(
        name,
        bi_rel <= FD_REL_TOL && sh_rel <= FD_REL_TOL,
        format!(
            "relative FD error {bi_rel:.2e} (plate), {sh_rel:.2e} (shell); \
             allowed {FD_REL_TOL:.0e}"
        ),
    )
}

/// Worst absolute difference between sampled Jacobian columns and
/// central finite differences of the residual, scaled by the largest
/// Jacobian entry.
fn fd_jacobian_error(
    residual: &dyn Fn(&[f64]) -> Vec<f64>,
    jacobian: &sparse::CsrMatrix,
    x: &[f64],
    mask: &[bool],
) -> f64 {
    let free: Vec<usize> = (0..x.len()).filter(|&i| !mask[i]).collect();
    let stride = (free.len() / 20).max(1);
    let step = 1e-7;
    let mut xp = x.to_vec();
    let mut unit = vec![0.0; x.len()];
    let mut worst = 0.0f64;
    for &j in free.iter().step_by(stride) {
        unit[j] = 1.0;
        let column = jacobian.spmv(&unit).expect("dimensions match");
        unit[j] = 0.0;
        xp[j] = x[j] + step;
        let rp = residual(&xp);
        xp[j] = x[j] - step;
        let rm = residual(&xp);
        xp[j] = x[j];
        for &i in &free {
            let fd = (rp[i] - rm[i]) / (2.0 * step);
            worst = worst.max((column[i] - fd).abs());
        }
    }
    worst / jacobian.max_abs_value()
}

fn check_jacobian_matches_residual_derivative() -> CheckResult {
    let name = "jacobian-matches-residual-derivative";

    let (mesh, kappa, obstacle, forcing) = biharmonic_fixture();
    let problem = BiharmonicProblem::new(&mesh, kappa, obstacle, forcing).expect("valid problem");
    let x = random_state(&mesh, 3, 3, 0.5);
    let mask = constrained_mask(&mesh, 3);
    let bi_rel =
        fd_jacobian_error(&|z| problem.residual(z), &problem.jacobian(&x), &x, &mask);

    let (mesh, params, kappa, planes, loads) = shell_fixture();
    let problem = ShellProblem::new(&mesh, params, kappa, planes, loads).expect("valid problem");
    let y = random_state(&mesh, 5, SHELL_FIXTURE_SEED, SHELL_FIXTURE_DRAW);
    let mask = constrained_mask(&mesh, 5);
    let sh_rel =
        fd_jacobian_error(&|z| problem.residual(z), &problem.jacobian(&y), &y, &mask);

    CheckResult::new(
        name,
        bi_rel <= FD_REL_TOL && sh_rel <= FD_REL_TOL,
        format!(
            "relative FD error {bi_rel:.2e} (plate), {sh_rel:.2e} (shell); \
             allowed {FD_REL_TOL:.0e}"
        ),
    )
}

/// Iterations taken by one solve of a canonical configuration, at an
/// explicit penalty and forcing profile.
fn config_iterations(
    config: &ExperimentConfig,
    mesh: &Mesh,
    kappa: f64,
    profile: RadialForcing,
) -> Result<usize, String> {
    let newton = config.newton.newton_config();
    match config.problem {
        ProblemKind::Biharmonic => {
            let obstacle = config.obstacle.as_ref().expect("biharmonic preset").build();
            let problem = BiharmonicProblem::new(mesh, kappa, obstacle, profile)
                .map_err(|e| e.to_string())?;
            problem
                .solve(&newton)
                .map(|(_, report)| report.iterations)
                .map_err(|e| e.to_string())
        }
        ProblemKind::Shell => {
            let section = config.shell.as_ref().expect("shell preset");
            let constraints = section.constraints().map_err(|e| e.to_string())?;
            let loads = ShellLoads {
                transverse: profile,
                transverse_scale: section.load_scale(),
                in_plane: section.in_plane,
                moments: section.moments,
            };
            let problem = ShellProblem::new(mesh, section.params(), kappa, constraints, loads)
                .map_err(|e| e.to_string())?;
            problem
                .solve(&newton)
                .map(|(_, report)| report.iterations)
                .map_err(|e| e.to_string())
        }
    }
}

fn check_newton_iterations_within_budget() -> CheckResult {
    let name = "newton-iterations-within-budget";
    let mut passed = true;
    let mut parts: Vec<String> = Vec::new();

    // Penalty tables, refined to n = 16 and solved at both ends of the
    // penalty ladder.
    for preset in [presets::biharmonic_kappa_table(), presets::shell_kappa_table()] {
        let mut config = preset;
        config.mesh.n = 16;
        let mesh = match build_disk_mesh(config.mesh.n, config.mesh.radius) {
            Ok(m) => m,
            Err(e) => return CheckResult::new(name, false, e.to_string()),
        };
        let sweep = config.kappa_sweep.clone().expect("table preset");
        let profile = config.forcing.fixed().expect("fixed forcing");
        for kappa in [
            sweep.kappa0,
            sweep.kappa0 * 0.5f64.powi(sweep.halvings as i32),
        ] {
            match config_iterations(&config, &mesh, kappa, profile) {
                Ok(iters) => {
                    passed = passed && iters <= NEWTON_ITERATION_BUDGET;
                    parts.push(format!("{} kappa={kappa:.1e}: {iters}", config.label));
                }
                Err(e) => {
                    passed = false;
                    parts.push(format!("{} kappa={kappa:.1e}: {e}", config.label));
                }
            }
        }
    }

    // Force sweeps at their strongest load.
    for config in [
        presets::biharmonic_flat_force(),
        presets::biharmonic_two_plane_force(),
        presets::shell_flat_force(),
        presets::shell_wedge_force(),
    ] {
        let mesh = match build_disk_mesh(config.mesh.n, config.mesh.radius) {
            Ok(m) => m,
            Err(e) => return CheckResult::new(name, false, e.to_string()),
        };
        let sweep = config.force_sweep.clone().expect("force preset");
        let ell = *sweep.ell.last().expect("nonempty ladder");
        let profile = match config.forcing.at_ell(ell) {
            Ok(p) => RadialForcing::new(
                p.a * sweep.force_scale,
                p.c * sweep.force_scale,
                p.s,
            ),
            Err(e) => return CheckResult::new(name, false, e.to_string()),
        };
        let kappa = match (sweep.kappa, sweep.q) {
            (Some(kappa), _) => kappa,
            (None, Some(q)) => mesh.h().powf(q),
            (None, None) => unreachable!("validated sweeps carry a penalty"),
        };
        match config_iterations(&config, &mesh, kappa, profile) {
            Ok(iters) => {
                passed = passed && iters <= NEWTON_ITERATION_BUDGET;
                parts.push(format!("{} ell={ell}: {iters}", config.label));
            }
            Err(e) => {
                passed = false;
                parts.push(format!("{} ell={ell}: {e}", config.label));
            }
        }
    }

    CheckResult::new(
        name,
        passed,
        format!(
            "iterations (budget {NEWTON_ITERATION_BUDGET}): {}",
            parts.join(", ")
        ),
    )
}

fn check_solution_independent_of_start() -> CheckResult {
    let name = "solution-independent-of-start";
    // Solve well past the restart tolerance so the converged states are
    // limited by the solver, not by the stopping rule.
    let newton = NewtonConfig { tol: 1e-12, ..NewtonConfig::default() };

    // Plate pressed into the flat obstacle: the strongest rung of the
    // force-sweep ladder at its mesh-coupled penalty.
    let mesh = build_disk_mesh(8, 0.5).expect("valid mesh");
    let kappa = mesh.h().powf(0.3);
    let problem = BiharmonicProblem::new(
        &mesh,
        kappa,
        ScalarObstacle::constant(-1.0),
        RadialForcing::new(500.0, -2348.2, 1.1741),
    )
    .expect("valid problem");
    let (cold, _) = match problem.solve(&newton) {
        Ok(s) => s,
        Err(e) => return CheckResult::new(name, false, format!("plate solve: {e}")),
    };
    let engaged = cold.u.iter().fold(f64::INFINITY, |m, &u| m.min(u)) < -1.0;
    let mut bi_worst = 0.0f64;
    for seed in [11, 12] {
        let start = random_state(&mesh, 3, seed, 0.5);
        let (restart, _) = match problem.solve_from(&start, &newton) {
            Ok(s) => s,
            Err(e) => return CheckResult::new(name, false, format!("plate restart: {e}")),
        };
        let diff: Vec<f64> = cold
            .stacked()
            .iter()
            .zip(&restart.stacked())
            .map(|(a, b)| a - b)
            .collect();
        bi_worst = bi_worst.max(norm2(&diff));
    }

    // Shell pressed into the flat half-space.
    let mesh = build_disk_mesh(8, 0.5).expect("valid mesh");
    let kappa = mesh.h().powf(0.3);
    let params = ShellParams { epsilon: 1e-3, lambda: 0.4, mu: 0.012, z0: 0.15 };
    let problem = ShellProblem::new(
        &mesh,
        params,
        kappa,
        vec![HalfSpaceConstraint::new([0.0, 0.0, 1.0]).expect("unit normal")],
        ShellLoads::transverse(
            RadialForcing::new(30.0, -13.806, 0.2301),
            params.epsilon.powi(3),
        ),
    )
    .expect("valid problem");
    let (cold_shell, _) = match problem.solve(&newton) {
        Ok(s) => s,
        Err(e) => return CheckResult::new(name, false, format!("shell solve: {e}")),
    };
    let shell_engaged = problem.min_constraint_margin(&cold_shell) < 0.0;
    let mut sh_worst = 0.0f64;
    for seed in [21, 22] {
        let start = random_state(&mesh, 5, seed, 0.1);
        let (restart, _) = match problem.solve_from(&start, &newton) {
            Ok(s) => s,
            Err(e) => return CheckResult::new(name, false, format!("shell restart: {e}")),
        };
        let diff: Vec<f64> = cold_shell
            .stacked()
            .iter()
            .zip(&restart.stacked())
            .map(|(a, b)| a - b)
            .collect();
        sh_worst = sh_worst.max(norm2(&diff));
    }

    CheckResult::new(
        name,
        engaged && shell_engaged && bi_worst <= RESTART_TOL && sh_worst <= RESTART_TOL,
        format!(
            "restart spread {bi_worst:.2e} (plate, contact: {engaged}), \
             {sh_worst:.2e} (shell, contact: {shell_engaged}); allowed {RESTART_TOL:.0e}"
        ),
    )
}

fn check_zero_load_rest_state() -> CheckResult {
    let name = "zero-load-rest-state";
    let newton = NewtonConfig::default();

    let mesh = build_disk_mesh(4, 0.5).expect("valid mesh");
    let problem = BiharmonicProblem::new(
        &mesh,
        1e-3,
        ScalarObstacle::constant(-1.0),
        RadialForcing::zero(),
    )
    .expect("valid problem");
    let (bi_norm, bi_iters) = match problem.solve(&newton) {
        Ok((state, report)) => (norm2(&state.stacked()), report.iterations),
        Err(e) => return CheckResult::new(name, false, format!("plate solve: {e}")),
    };

    let params = ShellParams { epsilon: 1e-3, lambda: 0.4, mu: 0.012, z0: 0.15 };
    let problem = ShellProblem::new(
        &mesh,
        params,
        1e-3,
        vec![HalfSpaceConstraint::new([0.0, 0.0, 1.0]).expect("unit normal")],
        ShellLoads::zero(),
    )
    .expect("valid problem");
    let (sh_norm, sh_iters) = match problem.solve(&newton) {
        Ok((state, report)) => (norm2(&state.stacked()), report.iterations),
        Err(e) => return CheckResult::new(name, false, format!("shell solve: {e}")),
    };

    CheckResult::new(
        name,
        bi_norm == 0.0 && sh_norm == 0.0 && bi_iters == 0 && sh_iters == 0,
        format!(
            "state norm {bi_norm:.1e} in {bi_iters} iterations (plate), \
             {sh_norm:.1e} in {sh_iters} iterations (shell); required exact zeros"
        ),
    )
}

fn check_lambda_controls_compression_stiffness() -> CheckResult {
    let name = "lambda-controls-compression-stiffness";
    let mesh = build_disk_mesh(2, 0.5).expect("valid mesh");
    let kappa = 0.5;
    let with_lambda = ShellParams { epsilon: 0.1, lambda: 0.4, mu: 0.012, z0: 0.15 };
    let without = ShellParams { lambda: 0.0, ..with_lambda };
    let planes = || vec![HalfSpaceConstraint::new([0.0, 0.0, 1.0]).expect("unit normal")];
    let full = ShellProblem::new(&mesh, with_lambda, kappa, planes(), ShellLoads::zero())
        .expect("valid problem");
    let dropped = ShellProblem::new(&mesh, without, kappa, planes(), ShellLoads::zero())
        .expect("valid problem");

    let x = random_state(&mesh, 5, 5, 0.3);
    let energy_gap = full.energy(&x) - dropped.energy(&x);

    // Independent route: integrate the squared divergences of the
    // in-plane and surrogate-gradient fields triangle by triangle.
    let nv = mesh.vertex_count();
    let mut div_zeta_sq = 0.0;
    let mut div_xi_sq = 0.0;
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let geom = element_geometry(&mesh, t);
        let mut div_zeta = 0.0;
        let mut div_xi = 0.0;
        for i in 0..3 {
            div_zeta += x[tri[i]] * geom.grads[i][0] + x[nv + tri[i]] * geom.grads[i][1];
            div_xi += x[3 * nv + tri[i]] * geom.grads[i][0] + x[4 * nv + tri[i]] * geom.grads[i][1];
        }
        div_zeta_sq += geom.area * div_zeta * div_zeta;
        div_xi_sq += geom.area * div_xi * div_xi;
    }
    // The energies are normalized by eps^3, so the membrane divergence
    // carries 1/eps^2 and the surrogate divergence 1/3.
    let eps = with_lambda.epsilon;
    let want = 0.5 * with_lambda.membrane_modulus() * (div_zeta_sq / (eps * eps) + div_xi_sq / 3.0);
    let rel = (energy_gap - want).abs() / want.abs();

    let zero_modulus = without.membrane_modulus();
    CheckResult::new(
        name,
        rel <= MODULUS_ROUTE_REL_TOL && zero_modulus == 0.0,
        format!(
            "energy gap {energy_gap:.6e} vs divergence route {want:.6e}, \
             relative error {rel:.2e} (allowed {MODULUS_ROUTE_REL_TOL:.0e}); \
             modulus at lambda=0: {zero_modulus:.1e}"
        ),
    )
}

/// Permutation mapping each vertex to the vertex at its position rotated
/// by 60 degrees, or an error message when the mesh is not closed under
/// the rotation at [`ROTATION_MATCH_TOL`].
fn rotation_permutation(mesh: &Mesh) -> Result<Vec<usize>, String> {
    let (sin, cos) = (std::f64::consts::FRAC_PI_3).sin_cos();
    let vertices = mesh.vertices();
    let mut sigma = Vec::with_capacity(vertices.len());
    for (v, p) in vertices.iter().enumerate() {
        let target = [cos * p[0] - sin * p[1], sin * p[0] + cos * p[1]];
        let image = vertices.iter().position(|q| {
            (q[0] - target[0]).abs() <= ROTATION_MATCH_TOL
                && (q[1] - target[1]).abs() <= ROTATION_MATCH_TOL
        });
        match image {
            Some(w) => sigma.push(w),
            None => return Err(format!("vertex {v} has no rotated partner")),
        }
    }
    Ok(sigma)
}

/// Worst equivariance defect of scalar fields (`u(sigma v) = u(v)`) and
/// vector pairs (`xi(sigma v) = R xi(v)`), relative to the field scale.
fn equivariance_error(
    sigma: &[usize],
    scalars: &[&[f64]],
    vectors: &[(&[f64], &[f64])],
) -> f64 {
    let (sin, cos) = (std::f64::consts::FRAC_PI_3).sin_cos();
    let mut worst = 0.0f64;
    for field in scalars {
        let scale = field.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);
        for (v, &w) in sigma.iter().enumerate() {
            worst = worst.max((field[w] - field[v]).abs() / scale);
        }
    }
    for (f1, f2) in vectors {
        let scale = f1
            .iter()
            .chain(f2.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
            .max(1e-300);
        for (v, &w) in sigma.iter().enumerate() {
            let rx = cos * f1[v] - sin * f2[v];
            let ry = sin * f1[v] + cos * f2[v];
            worst = worst.max((f1[w] - rx).abs().max((f2[w] - ry).abs()) / scale);
        }
    }
    worst
}

fn check_rotational_symmetry() -> CheckResult {
    let name = "rotational-symmetry";
    let newton = NewtonConfig::default();
    let mesh = build_disk_mesh(8, 0.5).expect("valid mesh");
    let kappa = mesh.h().powf(0.3);
    let sigma = match rotation_permutation(&mesh) {
        Ok(s) => s,
        Err(e) => return CheckResult::new(name, false, e),
    };

    let problem = BiharmonicProblem::new(
        &mesh,
        kappa,
        ScalarObstacle::constant(-1.0),
        RadialForcing::new(500.0, -2348.2, 1.1741),
    )
    .expect("valid problem");
    let (plate, _) = match problem.solve(&newton) {
        Ok(s) => s,
        Err(e) => return CheckResult::new(name, false, format!("plate solve: {e}")),
    };
    let plate_engaged = plate.u.iter().fold(f64::INFINITY, |m, &u| m.min(u)) < -1.0;
    let bi_err = equivariance_error(
        &sigma,
        &[&plate.u],
        &[(&plate.xi[0], &plate.xi[1])],
    );

    let params = ShellParams { epsilon: 1e-3, lambda: 0.4, mu: 0.012, z0: 0.15 };
    let problem = ShellProblem::new(
        &mesh,
        params,
        kappa,
        vec![HalfSpaceConstraint::new([0.0, 0.0, 1.0]).expect("unit normal")],
        ShellLoads::transverse(
            RadialForcing::new(30.0, -13.806, 0.2301),
            params.epsilon.powi(3),
        ),
    )
    .expect("valid problem");
    let (shell, _) = match problem.solve(&newton) {
        Ok(s) => s,
        Err(e) => return CheckResult::new(name, false, format!("shell solve: {e}")),
    };
    let shell_engaged = problem.min_constraint_margin(&shell) < 0.0;
    let sh_err = equivariance_error(
        &sigma,
        &[&shell.zeta[2]],
        &[(&shell.xi[0], &shell.xi[1])],
    );

    CheckResult::new(
        name,
        plate_engaged
            && shell_engaged
            && bi_err <= ROTATION_REL_TOL
            && sh_err <= ROTATION_REL_TOL,
        format!(
            "equivariance defect {bi_err:.2e} (plate, contact: {plate_engaged}), \
             {sh_err:.2e} (shell, contact: {shell_engaged}); allowed {ROTATION_REL_TOL:.0e}"
        ),
    )
}

fn check_thickness_scaling_stability() -> CheckResult {
    let name = "thickness-scaling-stability";
    let newton = NewtonConfig::default();
    let mesh = build_disk_mesh(4, 0.5).expect("valid mesh");
    let kappa = mesh.h().powf(0.3);
    let planes = || {
        vec![
            HalfSpaceConstraint::new([-1.0, 0.0, 2.0]).expect("valid normal"),
            HalfSpaceConstraint::new([1.0, 0.0, 2.0]).expect("valid normal"),
        ]
    };

    let mut solutions = Vec::new();
    let mut engaged = true;
    for epsilon in [1e-2, 5e-3] {
        let params = ShellParams { epsilon, lambda: 0.4, mu: 0.012, z0: 0.30 };
        let problem = ShellProblem::new(
            &mesh,
            params,
            kappa,
            planes(),
            ShellLoads::transverse(
                RadialForcing::new(90.0, -41.418, 0.2301),
                epsilon * epsilon * epsilon,
            ),
        )
        .expect("valid problem");
        match problem.solve(&newton) {
            Ok((state, _)) => {
                engaged = engaged && problem.min_constraint_margin(&state) < 0.0;
                solutions.push(state);
            }
            Err(e) => {
                return CheckResult::new(
                    name,
                    false,
                    format!("solve at thickness {epsilon}: {e}"),
                )
            }
        }
    }

    // Compare the displacement triples in H^1; under the thickness-
    // normalized load convention these barely move with eps.
    let mut diff_sq = 0.0;
    let mut norm_sq = 0.0;
    for c in 0..3 {
        let diff: Vec<f64> = solutions[0].zeta[c]
            .iter()
            .zip(&solutions[1].zeta[c])
            .map(|(a, b)| a - b)
            .collect();
        let d = fem::h1_norm(&mesh, &diff);
        let n = fem::h1_norm(&mesh, &solutions[0].zeta[c]);
        diff_sq += d * d;
        norm_sq += n * n;
    }
    let rel = (diff_sq / norm_sq).sqrt();

    CheckResult::new(
        name,
        engaged && rel <= THICKNESS_SPREAD_TOL,
        format!(
            "relative displacement spread {rel:.2e} across thicknesses \
             (contact: {engaged}); allowed {THICKNESS_SPREAD_TOL:.0e}"
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_reports_every_check() {
        let results = run_validation_suite();
        assert!(results.len() == 9, "expected the full check list");
        let mut names: Vec<&str> = results.iter().map(|r| r.name).collect();
        names.sort_unstable();
        let mut unique = names.clone();
        unique.dedup();
        assert!(names == unique, "duplicate check names");
        for result in &results {
            assert!(result.passed, "{}: {}", result.name, result.detail);
        }
    }

    #[test]
    fn rotation_permutation_is_a_bijection_fixing_the_center() {
        let mesh = build_disk_mesh(4, 1.0).unwrap();
        let sigma = rotation_permutation(&mesh).unwrap();
        let mut seen = vec![false; sigma.len()];
        for &w in &sigma {
            assert!(!seen[w], "two vertices map to {w}");
            seen[w] = true;
        }
        assert!(sigma[0] == 0, "the center is a fixed point");
        // The rotation preserves the boundary ring.
        for (v, &w) in sigma.iter().enumerate() {
            assert!(mesh.is_boundary(v) == mesh.is_boundary(w));
        }
    }
}
