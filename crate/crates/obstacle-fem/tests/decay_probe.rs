//! Scratch probe: violation decay under an engaged obstacle. DELETE.

use obstacle_fem::biharmonic::{BiharmonicProblem, RadialForcing, ScalarObstacle};
use obstacle_fem::mesh::build_disk_mesh;
use obstacle_fem::nonlinear::NewtonConfig;

#[test]
fn probe() {
    let mesh = build_disk_mesh(8, 0.5).unwrap();
    let forcing = RadialForcing::new(500.0, -2348.2, 1.1741);
    let newton = NewtonConfig::default();
    let kappa0 = mesh.h().powf(0.1);
    println!("h^2 = {:.4e}", mesh.h() * mesh.h());
    for j in 0..=6 {
        let kappa = kappa0 * 0.5f64.powi(j);
        let problem =
            BiharmonicProblem::new(&mesh, kappa, ScalarObstacle::constant(-1.0), forcing).unwrap();
        let (state, report) = problem.solve(&newton).unwrap();
        let viol = problem.constraint_violation(&state);
        let min_u = state.u.iter().cloned().fold(f64::INFINITY, f64::min);
        println!(
            "kappa {kappa:.4e} viol {viol:.6e} min_u {min_u:+.4} iters {} contact {:.4}",
            report.iterations,
            problem.contact_area(&state, 1e-8)
        );
    }
}
