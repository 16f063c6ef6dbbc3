//! Penalized mixed formulation of the flat shallow-shell obstacle problem.
//!
//! The shell's middle surface is the flat graph `theta(y) = (y1, y2, z0)`
//! over the disk, displaced by five P1 fields stacked as
//! `x = [zeta_1, zeta_2, zeta_3, xi_1, xi_2]`: the in-plane and transverse
//! displacement components plus a gradient surrogate `xi` for `grad zeta_3`.
//! The deformed surface must stay inside an intersection of half-spaces
//! `{p : p . q_j >= 0}` with unit normals `q_j`, enforced by penalties.
//!
//! With `c_m = 4 lambda mu / (lambda + 2 mu)` the scaled energy reads
//!
//! ```text
//! E = eps/2      integral( c_m (div zeta_H)^2 + 4 mu |e(zeta_H)|^2 )    membrane
//!   + eps^3/6    integral( c_m (div xi)^2 + 4 mu |grad xi|^2 )          bending
//!   + eps^3 kappa/2 |zeta_3|_1^2                                        harmonic corrector
//!   + eps^3/(2 kappa) ( || xi - grad zeta_3 ||^2                        mixed gap
//!                     + sum_j || {(theta + zeta) . q_j}^- ||^2 )        confinement
//!   - integral( p_H . zeta_H ) + integral( (P + s) . xi )               loads
//! ```
//!
//! where `e(zeta_H)` is the symmetric in-plane strain and `P` is a vector
//! potential of the transverse load resultant.
//!
//! Every term carries a factor `eps^3` or stronger, so the literal residual
//! is numerically tiny (the experiments use `eps = 1e-3`) and a fixed 1e-8
//! Newton tolerance would be meaningless. Internally the problem therefore
//! works with the energy divided by `eps^3`, which leaves the minimizer
//! unchanged; [`assemble_shell_linear_blocks`] still exposes the literal
//! blocks, and a test pins `literal = eps^3 * normalized` exactly.

use crate::fem::{
    self, element_geometry, negative_part, negative_part_active, quadrature,
};
use crate::mesh::Mesh;
use crate::nonlinear::{newton, NewtonConfig, NewtonError, NewtonReport};
use crate::sparse::{csr_from_triplets, dot, CsrMatrix};
use thiserror::Error;

/// Setup failures for the shell problem.
#[derive(Debug, Error)]
pub enum ShellError {
    #[error("half-thickness epsilon must be positive, got {0}")]
    NonpositiveEpsilon(f64),
    #[error("shear modulus mu must be positive, got {0}")]
    NonpositiveMu(f64),
    #[error("first Lame parameter lambda must be nonnegative, got {0}")]
    NegativeLambda(f64),
    #[error("penalty parameter kappa must be positive, got {0}")]
    NonpositiveKappa(f64),
    #[error("constraint normal must be a nonzero vector, got {0:?}")]
    ZeroNormal([f64; 3]),
    #[error(
        "reference surface is infeasible: plane {plane} gives theta . q = {value:.6e} <= 0 at vertex {vertex}"
    )]
    InfeasibleReference {
        plane: usize,
        vertex: usize,
        value: f64,
    },
    #[error("problem needs at least one confinement plane")]
    NoConstraints,
}

/// Physical parameters of the scaled shell.
#[derive(Debug, Clone, Copy)]
pub struct ShellParams {
    /// Half-thickness of the original shell (scaling parameter).
    pub epsilon: f64,
    /// First Lame constant, nonnegative.
    pub lambda: f64,
    /// Shear modulus, positive.
    pub mu: f64,
    /// Constant third component of the flat middle surface
    /// `theta(y) = (y1, y2, z0)`.
    pub z0: f64,
}

impl ShellParams {
    /// Validates the parameter ranges.
    pub fn validate(&self) -> Result<(), ShellError> {
        if self.epsilon <= 0.0 {
            return Err(ShellError::NonpositiveEpsilon(self.epsilon));
        }
        if self.mu <= 0.0 {
            return Err(ShellError::NonpositiveMu(self.mu));
        }
        if self.lambda < 0.0 {
            return Err(ShellError::NegativeLambda(self.lambda));
        }
        Ok(())
    }

    /// Membrane modulus `4 lambda mu / (lambda + 2 mu)` multiplying the
    /// divergence-divergence forms.
    pub fn membrane_modulus(&self) -> f64 {
        4.0 * self.lambda * self.mu / (self.lambda + 2.0 * self.mu)
    }
}

/// One admissible half-space `{p in R^3 : p . q >= 0}`.
#[derive(Debug, Clone, Copy)]
pub struct HalfSpaceConstraint {
    q: [f64; 3],
}

impl HalfSpaceConstraint {
    /// Builds the constraint, normalizing `q` to unit length.
    pub fn new(q: [f64; 3]) -> Result<HalfSpaceConstraint, ShellError> {
        let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        if !(norm > 1e-14) {
            return Err(ShellError::ZeroNormal(q));
        }
        Ok(HalfSpaceConstraint {
            q: [q[0] / norm, q[1] / norm, q[2] / norm],
        })
    }

    /// The unit inward normal.
    pub fn normal(&self) -> [f64; 3] {
        self.q
    }

    /// Signed margin of a deformed surface point `p`; negative means the
    /// point has left the admissible half-space.
    pub fn margin(&self, p: [f64; 3]) -> f64 {
        p[0] * self.q[0] + p[1] * self.q[1] + p[2] * self.q[2]
    }
}

/// Load data. The reproduced experiments use purely transverse loads
/// (`in_plane = moments = 0`), entering through the vector potential
/// `P(y) = transverse_scale * F(y)` of the radial profile, with
/// `div P = transverse_scale * f`.
#[derive(Debug, Clone, Copy)]
pub struct ShellLoads {
    /// Radial profile of the transverse resultant (before scaling).
    pub transverse: crate::biharmonic::RadialForcing,
    /// Multiplier on the transverse potential; the canonical studies use
    /// `eps^3` here (resultant `p3 = eps^3 g`), which keeps the normalized
    /// transverse equations independent of the thickness.
    pub transverse_scale: f64,
    /// Constant in-plane resultants `p_alpha` (zero in the experiments).
    pub in_plane: [f64; 2],
    /// Constant first moments `s_alpha` (zero in the experiments).
    pub moments: [f64; 2],
}

impl ShellLoads {
    /// No load at all.
    pub fn zero() -> ShellLoads {
        ShellLoads {
            transverse: crate::biharmonic::RadialForcing::zero(),
            transverse_scale: 0.0,
            in_plane: [0.0, 0.0],
            moments: [0.0, 0.0],
        }
    }

    /// Purely transverse load `scale * f` with the given radial profile.
    pub fn transverse(profile: crate::biharmonic::RadialForcing, scale: f64) -> ShellLoads {
        ShellLoads {
            transverse: profile,
            transverse_scale: scale,
            in_plane: [0.0, 0.0],
            moments: [0.0, 0.0],
        }
    }
}

/// Solution fields of the shell problem.
#[derive(Debug, Clone)]
pub struct ShellState {
    /// Displacement components (in-plane pair, then transverse).
    pub zeta: [Vec<f64>; 3],
    /// Gradient surrogate for `grad zeta_3`.
    pub xi: [Vec<f64>; 2],
}

impl ShellState {
    /// Splits a stacked vector `[zeta_1, zeta_2, zeta_3, xi_1, xi_2]`.
    pub fn from_stacked(mesh: &Mesh, x: &[f64]) -> ShellState {
        let nv = mesh.vertex_count();
        assert!(x.len() == 5 * nv, "stacked state length {} vs 5 * {nv}", x.len());
        ShellState {
            zeta: [
                x[0..nv].to_vec(),
                x[nv..2 * nv].to_vec(),
                x[2 * nv..3 * nv].to_vec(),
            ],
            xi: [x[3 * nv..4 * nv].to_vec(), x[4 * nv..5 * nv].to_vec()],
        }
    }

    /// Stacks the fields back into one vector.
    pub fn stacked(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(5 * self.zeta[0].len());
        for z in &self.zeta {
            x.extend_from_slice(z);
        }
        for xi in &self.xi {
            x.extend_from_slice(xi);
        }
        x
    }

    /// Position of the deformed middle surface above vertex `v`.
    pub fn deformed_point(&self, mesh: &Mesh, z0: f64, v: usize) -> [f64; 3] {
        let p = mesh.vertices()[v];
        [
            p[0] + self.zeta[0][v],
            p[1] + self.zeta[1][v],
            z0 + self.zeta[2][v],
        ]
    }
}

/// Constant membrane strain `e_ab = (d_a zeta_b + d_b zeta_a) / 2` of the
/// in-plane P1 pair on triangle `t`.
pub fn membrane_strain(
    mesh: &Mesh,
    t: usize,
    zeta1: &[f64],
    zeta2: &[f64],
) -> [[f64; 2]; 2] {
    let tri = mesh.triangles()[t];
    let geom = element_geometry(mesh, t);
    let mut grad = [[0.0f64; 2]; 2];
    for i in 0..3 {
        for d in 0..2 {
            grad[0][d] += zeta1[tri[i]] * geom.grads[i][d];
            grad[1][d] += zeta2[tri[i]] * geom.grads[i][d];
        }
    }
    // grad[b][a] is d_a zeta_b.
    [
        [grad[0][0], 0.5 * (grad[1][0] + grad[0][1])],
        [0.5 * (grad[0][1] + grad[1][0]), grad[1][1]],
    ]
}

/// Appends `scale * integral( div u . div v )` over a pair of vector
/// components whose dof blocks start at `offsets` (one offset per
/// component, shared by rows and columns).
fn append_divdiv(mesh: &Mesh, offsets: [usize; 2], scale: f64, out: &mut Vec<(usize, usize, f64)>) {
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let geom = element_geometry(mesh, t);
        for a in 0..2 {
            for b in 0..2 {
                for i in 0..3 {
                    for j in 0..3 {
                        // The gradient product is grouped so the (i, a) and
                        // (j, b) roles commute exactly in floating point,
                        // keeping the assembled matrix symmetric to the bit.
                        let val = scale * geom.area * (geom.grads[i][a] * geom.grads[j][b]);
                        out.push((offsets[a] + tri[i], offsets[b] + tri[j], val));
                    }
                }
            }
        }
    }
}

/// Appends `scale * integral( e(u) : e(v) )` (symmetric-gradient form) over
/// a vector pair with dof blocks at `offsets`.
fn append_symgrad(mesh: &Mesh, offsets: [usize; 2], scale: f64, out: &mut Vec<(usize, usize, f64)>) {
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let geom = element_geometry(mesh, t);
        for a in 0..2 {
            for b in 0..2 {
                for i in 0..3 {
                    for j in 0..3 {
                        let gi = geom.grads[i];
                        let gj = geom.grads[j];
                        let same = if a == b { gi[0] * gj[0] + gi[1] * gj[1] } else { 0.0 };
                        let val = 0.5 * scale * geom.area * (same + gi[b] * gj[a]);
                        out.push((offsets[a] + tri[i], offsets[b] + tri[j], val));
                    }
                }
            }
        }
    }
}

/// Linear blocks of the stacked shell system with their literal scaling
/// factors (see the module docs), without boundary elimination:
/// membrane `eps [ c_m divdiv + 4 mu symgrad ]` on the in-plane pair,
/// bending `eps^3/3 [ c_m divdiv + 4 mu fullgrad ] + (eps^3/kappa) M` on
/// `xi`, `eps^3 (kappa + 1/kappa) L` on `zeta_3`, and `-(eps^3/kappa) G_b`
/// coupling `zeta_3` to `xi_b`. Exactly symmetric.
pub fn assemble_shell_linear_blocks(
    mesh: &Mesh,
    params: &ShellParams,
    kappa: f64,
) -> Result<CsrMatrix, ShellError> {
    let triplets = linear_block_triplets(mesh, params, kappa, 1.0)?;
    let n = 5 * mesh.vertex_count();
    Ok(csr_from_triplets(n, n, &triplets).expect("assembly triplets are finite and in range"))
}

/// Shared triplet builder; `normalization` multiplies every block (1 for
/// the literal system, `1/eps^3` for the internally solved one).
fn linear_block_triplets(
    mesh: &Mesh,
    params: &ShellParams,
    kappa: f64,
    normalization: f64,
) -> Result<Vec<(usize, usize, f64)>, ShellError> {
    params.validate()?;
    if kappa <= 0.0 {
        return Err(ShellError::NonpositiveKappa(kappa));
    }
    let nv = mesh.vertex_count();
    let eps = params.epsilon;
    let eps3 = eps * eps * eps;
    let c_m = params.membrane_modulus();
    let inv = 1.0 / kappa;
    let mut t = Vec::with_capacity(9 * mesh.triangle_count() * 30);

    // Membrane block on (zeta_1, zeta_2).
    append_divdiv(mesh, [0, nv], normalization * eps * c_m, &mut t);
    append_symgrad(mesh, [0, nv], normalization * eps * 4.0 * params.mu, &mut t);

    // Transverse block: harmonic corrector plus the gap's zeta_3 part.
    fem::append_laplacian(mesh, 2 * nv, 2 * nv, normalization * eps3 * (kappa + inv), &mut t);

    // Bending block on xi: divdiv + full gradient, plus the gap mass.
    append_divdiv(mesh, [3 * nv, 4 * nv], normalization * eps3 / 3.0 * c_m, &mut t);
    for beta in 0..2 {
        let off = (3 + beta) * nv;
        fem::append_laplacian(mesh, off, off, normalization * eps3 / 3.0 * 4.0 * params.mu, &mut t);
        fem::append_mass(mesh, off, off, normalization * eps3 * inv, &mut t);
        // Gap coupling -(eps^3/kappa) integral( xi_b d_b zeta_3 ).
        let scale = -normalization * eps3 * inv;
        fem::append_gradient_coupling(mesh, beta, off, 2 * nv, scale, &mut t);
        let before = t.len();
        fem::append_gradient_coupling(mesh, beta, off, 2 * nv, scale, &mut t);
        for k in before..t.len() {
            let (r, c, v) = t[k];
            t[k] = (c, r, v);
        }
    }
    Ok(t)
}

/// One penalty quadrature point: owning vertices, barycentric position,
/// weight `area * w_q`, and the reference surface offsets
/// `theta(x_q) . q_j` for every plane.
#[derive(Debug, Clone)]
struct PenaltyPoint {
    tri: [usize; 3],
    lambda: [f64; 3],
    weight: f64,
    /// `theta(x_q) . q_j` per plane.
    reference: Vec<f64>,
}

/// Assembled shell obstacle problem on one mesh at one `kappa`.
///
/// All of `energy`, `residual`, and `jacobian` evaluate the system divided
/// by `eps^3` (see the module docs); minimizers and contact sets are
/// unaffected, and the literal energy is `eps^3 * energy`.
pub struct ShellProblem<'a> {
    mesh: &'a Mesh,
    params: ShellParams,
    kappa: f64,
    constraints: Vec<HalfSpaceConstraint>,
    linear: CsrMatrix,
    linear_triplets: Vec<(usize, usize, f64)>,
    /// Normalized load vector, entering the energy as `dot(load, x)`.
    load: Vec<f64>,
    constrained: Vec<bool>,
    penalty_points: Vec<PenaltyPoint>,
}

impl<'a> ShellProblem<'a> {
    /// Sets up the problem, validating parameters and the reference
    /// feasibility `theta(y) . q_j > 0` at every mesh vertex.
    pub fn new(
        mesh: &'a Mesh,
        params: ShellParams,
        kappa: f64,
        constraints: Vec<HalfSpaceConstraint>,
        loads: ShellLoads,
    ) -> Result<ShellProblem<'a>, ShellError> {
        if constraints.is_empty() {
            return Err(ShellError::NoConstraints);
        }
        for (j, c) in constraints.iter().enumerate() {
            for (v, &p) in mesh.vertices().iter().enumerate() {
                let value = c.margin([p[0], p[1], params.z0]);
                if value <= 0.0 {
                    return Err(ShellError::InfeasibleReference { plane: j, vertex: v, value });
                }
            }
        }
        let eps3 = params.epsilon * params.epsilon * params.epsilon;
        let normalization = 1.0 / eps3;
        let linear_triplets = linear_block_triplets(mesh, &params, kappa, normalization)?;
        let nv = mesh.vertex_count();
        let n = 5 * nv;
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
                let pot = loads.transverse.potential(point);
                for loc in 0..3 {
                    let phi = lambda[loc];
                    // In-plane resultants enter with a minus sign, the
                    // transverse potential and moments with a plus sign.
                    load[tri[loc]] -= normalization * weight * loads.in_plane[0] * phi;
                    load[nv + tri[loc]] -= normalization * weight * loads.in_plane[1] * phi;
                    for beta in 0..2 {
                        let val = loads.transverse_scale * pot[beta] + loads.moments[beta];
                        load[(3 + beta) * nv + tri[loc]] += normalization * weight * val * phi;
                    }
                }
                let reference = constraints
                    .iter()
                    .map(|c| c.margin([point[0], point[1], params.z0]))
                    .collect();
                penalty_points.push(PenaltyPoint {
                    tri,
                    lambda: *lambda,
                    weight,
                    reference,
                });
            }
        }

        let mut constrained = vec![false; n];
        for v in 0..nv {
            if mesh.is_boundary(v) {
                for c in 0..5 {
                    constrained[c * nv + v] = true;
                }
            }
        }

        Ok(ShellProblem {
            mesh,
            params,
            kappa,
            constraints,
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

    /// The physical parameters.
    pub fn params(&self) -> &ShellParams {
        &self.params
    }

    /// The confinement planes.
    pub fn constraints(&self) -> &[HalfSpaceConstraint] {
        &self.constraints
    }

    /// Number of stacked dofs (five fields).
    pub fn dof_count(&self) -> usize {
        5 * self.mesh.vertex_count()
    }

    /// Margin `(theta + zeta) . q_j` at one penalty point, given the
    /// reference offset already stored for that plane.
    fn margin_at(&self, p: &PenaltyPoint, x: &[f64], plane: usize) -> f64 {
        let nv = self.mesh.vertex_count();
        let q = self.constraints[plane].q;
        let mut w = p.reference[plane];
        for loc in 0..3 {
            let v = p.tri[loc];
            let phi = p.lambda[loc];
            w += phi * (q[0] * x[v] + q[1] * x[nv + v] + q[2] * x[2 * nv + v]);
        }
        w
    }

    /// Normalized energy (`literal / eps^3`) at a stacked state.
    pub fn energy(&self, x: &[f64]) -> f64 {
        assert!(x.len() == self.dof_count(), "state length");
        let ax = self.linear.spmv(x).expect("dimensions match");
        let quadratic = 0.5 * dot(x, &ax);
        let mut penalty = 0.0;
        for p in &self.penalty_points {
            for j in 0..self.constraints.len() {
                let v = negative_part(self.margin_at(p, x, j));
                penalty += p.weight * v * v;
            }
        }
        quadratic + penalty / (2.0 * self.kappa) + dot(&self.load, x)
    }

    /// Gradient of the normalized energy with no boundary handling.
    fn residual_raw(&self, x: &[f64]) -> Vec<f64> {
        assert!(x.len() == self.dof_count(), "state length");
        let mut r = self.linear.spmv(x).expect("dimensions match");
        for (ri, li) in r.iter_mut().zip(&self.load) {
            *ri += li;
        }
        let nv = self.mesh.vertex_count();
        let inv = 1.0 / self.kappa;
        for p in &self.penalty_points {
            for (j, c) in self.constraints.iter().enumerate() {
                let w = self.margin_at(p, x, j);
                if negative_part_active(w) {
                    let scale = inv * p.weight * w;
                    for loc in 0..3 {
                        let phi = p.lambda[loc];
                        for comp in 0..3 {
                            r[comp * nv + p.tri[loc]] += scale * phi * c.q[comp];
                        }
                    }
                }
            }
        }
        r
    }

    /// Residual with Dirichlet rows zeroed.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.residual_raw(x);
        for (ri, &fixed) in r.iter_mut().zip(&self.constrained) {
            if fixed {
                *ri = 0.0;
            }
        }
        r
    }

    /// Generalized Jacobian triplets without boundary elimination.
    fn jacobian_raw_triplets(&self, x: &[f64]) -> Vec<(usize, usize, f64)> {
        let mut t = self.linear_triplets.clone();
        let nv = self.mesh.vertex_count();
        let inv = 1.0 / self.kappa;
        for p in &self.penalty_points {
            for (j, c) in self.constraints.iter().enumerate() {
                if negative_part_active(self.margin_at(p, x, j)) {
                    let scale = inv * p.weight;
                    for i in 0..3 {
                        for jj in 0..3 {
                            let shape = p.lambda[i] * p.lambda[jj];
                            for a in 0..3 {
                                for b in 0..3 {
                                    // Grouped product keeps exact symmetry.
                                    t.push((
                                        a * nv + p.tri[i],
                                        b * nv + p.tri[jj],
                                        scale * shape * (c.q[a] * c.q[b]),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        t
    }

    /// Semismooth Jacobian with Dirichlet elimination.
    pub fn jacobian(&self, x: &[f64]) -> CsrMatrix {
        let mut t = self.jacobian_raw_triplets(x);
        fem::dirichlet_filter_triplets(&mut t, &self.constrained);
        let n = self.dof_count();
        csr_from_triplets(n, n, &t).expect("jacobian triplets are valid")
    }

    /// Runs semismooth Newton from the zero state.
    pub fn solve(
        &self,
        config: &NewtonConfig,
    ) -> Result<(ShellState, NewtonReport), NewtonError> {
        self.solve_from(&vec![0.0; self.dof_count()], config)
    }

    /// Runs semismooth Newton from a caller-provided stacked start.
    pub fn solve_from(
        &self,
        x0: &[f64],
        config: &NewtonConfig,
    ) -> Result<(ShellState, NewtonReport), NewtonError> {
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
        Ok((ShellState::from_stacked(self.mesh, &x), report))
    }

    /// `sqrt( sum_j || {(theta + zeta) . q_j}^- ||^2 )`: the L2 size of the
    /// confinement violation over all planes (no `eps` or `kappa` factors).
    pub fn constraint_violation(&self, state: &ShellState) -> f64 {
        let x = state.stacked();
        let mut total = 0.0;
        for p in &self.penalty_points {
            for j in 0..self.constraints.len() {
                let v = negative_part(self.margin_at(p, &x, j));
                total += p.weight * v * v;
            }
        }
        total.sqrt()
    }

    /// Smallest vertex margin `min_j min_v (theta + zeta)(v) . q_j`;
    /// negative values measure how far the deformed surface has crossed a
    /// confinement plane.
    pub fn min_constraint_margin(&self, state: &ShellState) -> f64 {
        let mut min = f64::INFINITY;
        for v in 0..self.mesh.vertex_count() {
            let p = state.deformed_point(self.mesh, self.params.z0, v);
            for c in &self.constraints {
                min = min.min(c.margin(p));
            }
        }
        min
    }

    /// `L^2` distance between `grad zeta_3` and the surrogate `xi`.
    pub fn mixed_gap(&self, state: &ShellState) -> f64 {
        fem::gradient_gap_squared(self.mesh, &state.zeta[2], &state.xi[0], &state.xi[1]).sqrt()
    }

    /// Total area of triangles whose three vertices are all within `tol`
    /// of the same confinement plane.
    pub fn contact_area(&self, state: &ShellState, tol: f64) -> f64 {
        assert!(tol > 0.0, "contact tolerance must be positive, got {tol}");
        let mut area = 0.0;
        for t in 0..self.mesh.triangle_count() {
            let tri = self.mesh.triangles()[t];
            let touching = self.constraints.iter().any(|c| {
                tri.iter().all(|&v| {
                    c.margin(state.deformed_point(self.mesh, self.params.z0, v)) <= tol
                })
            });
            if touching {
                area += self.mesh.triangle_area(t);
            }
        }
        area
    }
}
