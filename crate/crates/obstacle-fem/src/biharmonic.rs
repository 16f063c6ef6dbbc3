//! Penalized mixed formulation of the biharmonic obstacle problem.
//!
//! The fourth-order obstacle problem (a clamped Kirchhoff plate pressed
//! against an obstacle) is replaced by a first-order system in the stacked
//! P1 unknowns `x = [u, xi_1, xi_2]`, where `xi` plays the role of the
//! gradient of `u`. Both the constraint `u >= theta` and the coupling
//! `xi = grad u` are enforced by quadratic penalties with the same small
//! parameter `kappa`:
//!
//! ```text
//! E(u, xi) = kappa/2 |u|_1^2  + 1/2 sum_b |xi_b|_1^2
//!          + 1/(2 kappa) || {u - theta}^- ||^2
//!          + 1/(2 kappa) || grad u - xi ||^2
//!          + integral of F . xi
//! ```
//!
//! with homogeneous Dirichlet conditions on every component. The load
//! enters through a vector potential `F` with `div F = f`, integrated by
//! parts onto `xi`; for the radial forcings used here `F` has a closed
//! form, see [`RadialForcing::potential`].
//!
//! The energy is convex; its gradient (the residual) is smooth except for
//! the negative-part kink, and the generalized Jacobian replaces the kink
//! derivative by an active-set indicator. Semismooth Newton from the zero
//! state then converges in a handful of steps.

use crate::fem::{
    self, element_geometry, negative_part, negative_part_active, quadrature, ScalarField,
};
use crate::mesh::Mesh;
use crate::nonlinear::{newton, NewtonConfig, NewtonError, NewtonReport};
use crate::sparse::{csr_from_triplets, dot, CsrMatrix};
use thiserror::Error;

/// Parameter failures when setting up a problem.
#[derive(Debug, Error)]
pub enum BiharmonicError {
    /// The penalty parameter must be strictly positive.
    #[error("penalty parameter kappa must be positive, got {0}")]
    NonpositiveKappa(f64),
}

/// Obstacle given as the maximum of finitely many affine functions
/// `a . y + b`. Constant obstacles are the single-entry case with `a = 0`.
#[derive(Debug, Clone)]
pub struct ScalarObstacle {
    planes: Vec<([f64; 2], f64)>,
}

impl ScalarObstacle {
    /// Constant obstacle at height `c`.
    pub fn constant(c: f64) -> ScalarObstacle {
        ScalarObstacle {
            planes: vec![([0.0, 0.0], c)],
        }
    }

    /// Obstacle `max_j (a_j . y + b_j)` over the given affine pieces.
    pub fn from_planes(planes: Vec<([f64; 2], f64)>) -> ScalarObstacle {
        assert!(!planes.is_empty(), "obstacle needs at least one affine piece");
        ScalarObstacle { planes }
    }

    /// The obstacle height at `y`.
    pub fn eval(&self, y: [f64; 2]) -> f64 {
        self.planes
            .iter()
            .map(|&(a, b)| a[0] * y[0] + a[1] * y[1] + b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Radially symmetric forcing `f(y) = a |y|^2 + c` for `|y|^2 < s`, zero
/// outside. All forcings in the reproduced experiments have this shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialForcing {
    /// Coefficient of `|y|^2`.
    pub a: f64,
    /// Constant term inside the support.
    pub c: f64,
    /// Squared support radius; `s = 0` means zero forcing.
    pub s: f64,
}

impl RadialForcing {
    /// Creates the forcing, rejecting a negative support.
    pub fn new(a: f64, c: f64, s: f64) -> RadialForcing {
        assert!(s >= 0.0, "support radius squared must be nonnegative, got {s}");
        RadialForcing { a, c, s }
    }

    /// Zero forcing.
    pub fn zero() -> RadialForcing {
        RadialForcing { a: 0.0, c: 0.0, s: 0.0 }
    }

    /// Pointwise value `f(y)`.
    pub fn eval(&self, y: [f64; 2]) -> f64 {
        let r2 = y[0] * y[0] + y[1] * y[1];
        if r2 < self.s {
            self.a * r2 + self.c
        } else {
            0.0
        }
    }

    /// Radial profile `g(r)` of the divergence potential: the vector field
    /// `F(y) = g(r) y / r` satisfies `div F = f` since
    /// `div F = (1/r) d(r g)/dr` and `g(r) = (1/r) integral_0^r s f(s) ds`.
    ///
    /// Closed form: `g = a r^3/4 + c r/2` inside the support and
    /// `g = (a s^2/4 + c s/2) / r` beyond it.
    pub fn potential_profile(&self, r: f64) -> f64 {
        assert!(r >= 0.0, "radius must be nonnegative, got {r}");
        let root = self.s.sqrt();
        if r <= root {
            self.a * r * r * r / 4.0 + self.c * r / 2.0
        } else {
            (self.a * self.s * self.s / 4.0 + self.c * self.s / 2.0) / r
        }
    }

    /// The divergence potential `F(y) = g(|y|) y / |y|`, with `F(0) = 0`.
    pub fn potential(&self, y: [f64; 2]) -> [f64; 2] {
        let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let g = self.potential_profile(r);
        [g * y[0] / r, g * y[1] / r]
    }
}

/// Solution fields of the penalized mixed problem.
#[derive(Debug, Clone)]
pub struct BiharmonicState {
    /// Primal deflection.
    pub u: Vec<f64>,
    /// Gradient surrogate, one field per direction.
    pub xi: [Vec<f64>; 2],
}

impl BiharmonicState {
    /// Splits a stacked vector `[u, xi_1, xi_2]`.
    pub fn from_stacked(mesh: &Mesh, x: &[f64]) -> BiharmonicState {
        let nv = mesh.vertex_count();
        assert!(x.len() == 3 * nv, "stacked state length {} vs 3 * {nv}", x.len());
        BiharmonicState {
            u: x[0..nv].to_vec(),
            xi: [x[nv..2 * nv].to_vec(), x[2 * nv..3 * nv].to_vec()],
        }
    }

    /// Stacks the fields back into one vector.
    pub fn stacked(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(3 * self.u.len());
        x.extend_from_slice(&self.u);
        x.extend_from_slice(&self.xi[0]);
        x.extend_from_slice(&self.xi[1]);
        x
    }

    /// The u-component as a checked field.
    pub fn u_field(&self, mesh: &Mesh) -> ScalarField {
        ScalarField::from_values(mesh, self.u.clone()).expect("state length matches mesh")
    }
}

/// One quadrature point of the penalty integral: owning triangle vertices,
/// barycentric position, combined weight `area * w_q`, physical location,
/// and the obstacle height there.
#[derive(Debug, Clone, Copy)]
struct PenaltyPoint {
    tri: [usize; 3],
    lambda: [f64; 3],
    weight: f64,
    theta: f64,
}

/// Linear blocks of the stacked system, without boundary elimination:
///
/// ```text
/// [ (kappa + 1/kappa) L   -(1/kappa) G_1^T    -(1/kappa) G_2^T  ]
/// [ -(1/kappa) G_1         L + (1/kappa) M     0                ]
/// [ -(1/kappa) G_2         0                   L + (1/kappa) M  ]
/// ```
///
/// where `(G_b)_{ij} = integral of phi_i d_b phi_j`. Exactly symmetric by
/// construction; positive definite once Dirichlet rows are eliminated.
pub fn assemble_linear_blocks(mesh: &Mesh, kappa: f64) -> Result<CsrMatrix, BiharmonicError> {
    let triplets = linear_block_triplets(mesh, kappa)?;
    let n = 3 * mesh.vertex_count();
    Ok(csr_from_triplets(n, n, &triplets).expect("assembly triplets are finite and in range"))
}

fn linear_block_triplets(
    mesh: &Mesh,
    kappa: f64,
) -> Result<Vec<(usize, usize, f64)>, BiharmonicError> {
    if kappa <= 0.0 {
        return Err(BiharmonicError::NonpositiveKappa(kappa));
    }
    let nv = mesh.vertex_count();
    let inv = 1.0 / kappa;
    let mut t = Vec::with_capacity(9 * mesh.triangle_count() * 11);
    fem::append_laplacian(mesh, 0, 0, kappa + inv, &mut t);
    for beta in 0..2 {
        let off = (1 + beta) * nv;
        fem::append_laplacian(mesh, off, off, 1.0, &mut t);
        fem::append_mass(mesh, off, off, inv, &mut t);
        // Coupling -(1/kappa) integral of xi_b d_b u: G_b in the (xi_b, u)
        // block and its transpose in the (u, xi_b) block.
        fem::append_gradient_coupling(mesh, beta, off, 0, -inv, &mut t);
        let before = t.len();
        fem::append_gradient_coupling(mesh, beta, off, 0, -inv, &mut t);
        // Mirror the freshly appended block across the diagonal so both
        // halves come from the identical element values.
        for k in before..t.len() {
            let (r, c, v) = t[k];
            t[k] = (c, r, v);
        }
    }
    Ok(t)
}

/// Assembled penalized mixed biharmonic problem on one mesh at one `kappa`.
///
/// Construction precomputes the linear blocks, the load vector, and the
/// penalty quadrature; `energy`, `residual`, and `jacobian` then evaluate
/// the nonlinear system at arbitrary stacked states, and [`solve`] runs
/// semismooth Newton from the zero state.
///
/// [`solve`]: BiharmonicProblem::solve
pub struct BiharmonicProblem<'a> {
    mesh: &'a Mesh,
    kappa: f64,
    obstacle: ScalarObstacle,
    /// Unconstrained linear blocks, reused by `residual`.
    linear: CsrMatrix,
    /// Cached triplets of `linear`, reused by `jacobian`.
    linear_triplets: Vec<(usize, usize, f64)>,
    /// Load `integral of F . eta` against each xi basis function, stacked
    /// as `[0, load_1, load_2]` (no load on the u equations).
    load: Vec<f64>,
    /// Stacked Dirichlet flags (same boundary pattern for each component).
    constrained: Vec<bool>,
    penalty_points: Vec<PenaltyPoint>,
}

impl<'a> BiharmonicProblem<'a> {
    /// Sets up the problem. Fails for nonpositive `kappa`.
    pub fn new(
        mesh: &'a Mesh,
        kappa: f64,
        obstacle: ScalarObstacle,
        forcing: RadialForcing,
    ) -> Result<BiharmonicProblem<'a>, BiharmonicError> {
        let linear_triplets = linear_block_triplets(mesh, kappa)?;
        let nv = mesh.vertex_count();
        let n = 3 * nv;
        let linear =
            csr_from_triplets(n, n, &linear_triplets).expect("assembly triplets are valid");

        let rule = quadrature(2).expect("degree-2 rule is built in");
        let mut load = vec![0.0; n];
        let mut penalty_points = Vec::with_capacity(3 * mesh.triangle_count());
        for t in 0..mesh.triangle_count() {
            let tri = mesh.triangles()[t];
            let area = element_geometry(mesh, t).area;
            for (lambda, w) in rule.points.iter().zip(&rule.weights) {
                let point = fem::barycentric_to_xy(mesh, t, *lambda);
                let weight = area * w;
                let f_pot = forcing.potential(point);
                for loc in 0..3 {
                    let phi = lambda[loc];
                    load[nv + tri[loc]] += weight * f_pot[0] * phi;
                    load[2 * nv + tri[loc]] += weight * f_pot[1] * phi;
                }
                penalty_points.push(PenaltyPoint {
                    tri,
                    lambda: *lambda,
                    weight,
                    theta: obstacle.eval(point),
                });
            }
        }

        let mut constrained = vec![false; n];
        for v in 0..nv {
            if mesh.is_boundary(v) {
                constrained[v] = true;
                constrained[nv + v] = true;
                constrained[2 * nv + v] = true;
            }
        }

        Ok(BiharmonicProblem {
            mesh,
            kappa,
            obstacle,
            linear,
            linear_triplets,
            load,
            constrained,
            penalty_points,
        })
    }

    /// The mesh this problem is assembled on.
    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    /// The penalty parameter.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// The obstacle.
    pub fn obstacle(&self) -> &ScalarObstacle {
        &self.obstacle
    }

    /// Number of stacked dofs (three fields).
    pub fn dof_count(&self) -> usize {
        3 * self.mesh.vertex_count()
    }

    /// Deflection `u` interpolated at one penalty quadrature point.
    fn u_at(&self, p: &PenaltyPoint, u: &[f64]) -> f64 {
        p.lambda[0] * u[p.tri[0]] + p.lambda[1] * u[p.tri[1]] + p.lambda[2] * u[p.tri[2]]
    }

    /// Total energy at a stacked state.
    pub fn energy(&self, x: &[f64]) -> f64 {
        assert!(x.len() == self.dof_count(), "state length");
        let ax = self.linear.spmv(x).expect("dimensions match");
        let quadratic = 0.5 * dot(x, &ax);
        let mut penalty = 0.0;
        let u = &x[0..self.mesh.vertex_count()];
        for p in &self.penalty_points {
            let v = negative_part(self.u_at(p, u) - p.theta);
            penalty += p.weight * v * v;
        }
        quadratic + penalty / (2.0 * self.kappa) + dot(&self.load, x)
    }

    /// Gradient of the energy with no boundary handling, defined at any
    /// stacked vector. Basis for both the public residual and the
    /// finite-difference oracles.
    fn residual_raw(&self, x: &[f64]) -> Vec<f64> {
        assert!(x.len() == self.dof_count(), "state length");
        let mut r = self.linear.spmv(x).expect("dimensions match");
        for (ri, li) in r.iter_mut().zip(&self.load) {
            *ri += li;
        }
        let u = &x[0..self.mesh.vertex_count()];
        let inv = 1.0 / self.kappa;
        for p in &self.penalty_points {
            let t = self.u_at(p, u) - p.theta;
            if negative_part_active(t) {
                // d/du of 1/(2 kappa) {t}^-(x_q)^2 is (1/kappa) t phi_i.
                let scale = inv * p.weight * t;
                for loc in 0..3 {
                    r[p.tri[loc]] += scale * p.lambda[loc];
                }
            }
        }
        r
    }

    /// Residual with Dirichlet rows zeroed: the vector Newton drives to 0.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.residual_raw(x);
        for (ri, &fixed) in r.iter_mut().zip(&self.constrained) {
            if fixed {
                *ri = 0.0;
            }
        }
        r
    }

    /// Generalized Jacobian without boundary elimination.
    fn jacobian_raw_triplets(&self, x: &[f64]) -> Vec<(usize, usize, f64)> {
        let mut t = self.linear_triplets.clone();
        let u = &x[0..self.mesh.vertex_count()];
        let inv = 1.0 / self.kappa;
        for p in &self.penalty_points {
            if negative_part_active(self.u_at(p, u) - p.theta) {
                let scale = inv * p.weight;
                for i in 0..3 {
                    for j in 0..3 {
                        // Grouped product keeps exact symmetry.
                        t.push((p.tri[i], p.tri[j], scale * (p.lambda[i] * p.lambda[j])));
                    }
                }
            }
        }
        t
    }

    /// Semismooth Jacobian with Dirichlet elimination; symmetric positive
    /// definite.
    pub fn jacobian(&self, x: &[f64]) -> CsrMatrix {
        let mut t = self.jacobian_raw_triplets(x);
        fem::dirichlet_filter_triplets(&mut t, &self.constrained);
        let n = self.dof_count();
        csr_from_triplets(n, n, &t).expect("jacobian triplets are valid")
    }

    /// Runs semismooth Newton from the zero state.
    ///
    /// # Errors
    /// Propagates Newton failures (iteration budget, linear solve) with the
    /// partial report attached.
    pub fn solve(
        &self,
        config: &NewtonConfig,
    ) -> Result<(BiharmonicState, NewtonReport), NewtonError> {
        self.solve_from(&vec![0.0; self.dof_count()], config)
    }

    /// Runs semismooth Newton from a caller-provided stacked start (used by
    /// warm starts and the reproducibility checks). The start's Dirichlet
    /// entries are forced to zero before iterating.
    pub fn solve_from(
        &self,
        x0: &[f64],
        config: &NewtonConfig,
    ) -> Result<(BiharmonicState, NewtonReport), NewtonError> {
        assert!(x0.len() == self.dof_count(), "start length");
        let mut start = x0.to_vec();
        for (xi, &fixed) in start.iter_mut().zip(&self.constrained) {
            if fixed {
                *xi = 0.0;
            }
        }
        let residual = |x: &[f64]| self.residual(x);
        let jacobian = |x: &[f64]| self.jacobian(x);
        let energy = |x: &[f64]| self.energy(x);
        let (x, report) = newton(&residual, &jacobian, &energy, &start, config)?;
        Ok((BiharmonicState::from_stacked(self.mesh, &x), report))
    }

    /// `L^2` norm of the constraint violation `{u - theta}^-`, by the same
    /// quadrature as the penalty term.
    pub fn constraint_violation(&self, state: &BiharmonicState) -> f64 {
        let mut total = 0.0;
        for p in &self.penalty_points {
            let v = negative_part(self.u_at(p, &state.u) - p.theta);
            total += p.weight * v * v;
        }
        total.sqrt()
    }

    /// `L^2` distance between `grad u` and the surrogate `xi` (exact
    /// elementwise integration).
    pub fn mixed_gap(&self, state: &BiharmonicState) -> f64 {
        fem::gradient_gap_squared(self.mesh, &state.u, &state.xi[0], &state.xi[1]).sqrt()
    }

    /// Total area of triangles whose three vertices all touch the obstacle
    /// within `tol` (nodal contact criterion).
    pub fn contact_area(&self, state: &BiharmonicState, tol: f64) -> f64 {
        let mut area = 0.0;
        for t in 0..self.mesh.triangle_count() {
            let tri = self.mesh.triangles()[t];
            let touching = tri.iter().all(|&v| {
                let y = self.mesh.vertices()[v];
                state.u[v] - self.obstacle.eval(y) <= tol
            });
            if touching {
                area += self.mesh.triangle_area(t);
            }
        }
        area
    }
}
