//! P1 (Courant) triangle element kernels shared by both obstacle problems.
//!
//! Everything here operates on piecewise-linear scalar fields over a [`Mesh`]:
//! one value per vertex, linear on each triangle. The module provides
//!
//! - per-element geometry (area and the three constant hat-function gradients),
//! - the analytic element stiffness and mass kernels and their global
//!   assembly into [`CsrMatrix`] form,
//! - the first-order coupling matrices `(G_b)_{ij} = integral of phi_i *
//!   d_b phi_j` used by the mixed formulations,
//! - a degree-2 edge-midpoint quadrature rule for the pointwise nonlinear
//!   (penalty) terms,
//! - homogeneous Dirichlet elimination that preserves symmetry,
//! - element-loop H1 seminorm / L2 norm evaluation, and
//! - interpolation of a field from a coarse mesh onto a nested finer mesh.
//!
//! Element kernels on a triangle with area `A` and hat gradients `g_i`:
//!
//! ```text
//! stiffness_ij = A * (g_i . g_j)
//! mass_ij      = A/12 * (1 + delta_ij)
//! coupling_ij  = A/3 * g_j[b]            (independent of i)
//! ```
//!
//! On the reference triangle (0,0),(1,0),(0,1) these reduce to the classical
//! matrices `1/2 * [[2,-1,-1],[-1,1,0],[-1,0,1]]` and
//! `1/24 * [[2,1,1],[1,2,1],[1,1,2]]`, which the unit tests pin to 1e-14.

use crate::mesh::{Mesh, MeshError};
use crate::sparse::{csr_from_triplets, CsrMatrix};
use thiserror::Error;

/// Interpolation accepts fine vertices that fall outside the coarse polygon
/// by at most this fraction of the coarse mesh's maximum edge length. Nested
/// refinement projects boundary midpoints outward onto the circle by at most
/// `r * (1 - cos(pi / (6 n)))`, which is well below half an edge length for
/// every resolution, so this collar covers exactly the projection gap.
pub const INTERPOLATE_COLLAR_FACTOR: f64 = 0.5;

/// Errors from element-level operations.
#[derive(Debug, Error)]
pub enum FemError {
    /// Only the degree-2 rule is implemented.
    #[error("unsupported quadrature degree {0}, only degree 2 is available")]
    UnsupportedQuadratureDegree(usize),
    /// A nodal field's length does not match the mesh vertex count.
    #[error("field has {got} values but the mesh has {expected} vertices")]
    FieldLength { expected: usize, got: usize },
}

/// Area and constant P1 basis gradients of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    /// Triangle area, strictly positive.
    pub area: f64,
    /// Gradient of the hat function of each local vertex; the three
    /// gradients sum to the zero vector.
    pub grads: [[f64; 2]; 3],
}

/// Geometry of the triangle with vertices `a`, `b`, `c` (counterclockwise).
///
/// The hat function of vertex `a` is the barycentric coordinate `lambda_a`,
/// whose gradient is the inward normal of the opposite edge `bc` scaled by
/// 1/(2 area).
pub fn triangle_geometry(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> ElementGeometry {
    let two_area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    assert!(
        two_area > 0.0,
        "triangle must be counterclockwise with positive area, got signed doubled area {two_area}"
    );
    let grads = [
        [(b[1] - c[1]) / two_area, (c[0] - b[0]) / two_area],
        [(c[1] - a[1]) / two_area, (a[0] - c[0]) / two_area],
        [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area],
    ];
    ElementGeometry {
        area: 0.5 * two_area,
        grads,
    }
}

/// Geometry of triangle `t` of the mesh.
pub fn element_geometry(mesh: &Mesh, t: usize) -> ElementGeometry {
    let tri = mesh.triangles()[t];
    let v = mesh.vertices();
    triangle_geometry(v[tri[0]], v[tri[1]], v[tri[2]])
}

/// Element stiffness kernel `A * (g_i . g_j)` for one triangle.
pub fn element_stiffness(geom: &ElementGeometry) -> [[f64; 3]; 3] {
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let dot = geom.grads[i][0] * geom.grads[j][0] + geom.grads[i][1] * geom.grads[j][1];
            k[i][j] = geom.area * dot;
        }
    }
    k
}

/// Element mass kernel `A/12 * (1 + delta_ij)` for one triangle.
pub fn element_mass(geom: &ElementGeometry) -> [[f64; 3]; 3] {
    let off = geom.area / 12.0;
    let diag = geom.area / 6.0;
    [
        [diag, off, off],
        [off, diag, off],
        [off, off, diag],
    ]
}

/// Quadrature rule in barycentric coordinates on the reference triangle.
///
/// Weights sum to 1; integrals over a physical triangle are
/// `area * sum_q w_q f(x_q)`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// Barycentric coordinates of each quadrature point.
    pub points: Vec<[f64; 3]>,
    /// Weight of each point; the weights sum to 1.
    pub weights: Vec<f64>,
}

/// The 3-point edge-midpoint rule, exact for polynomials of total degree 2.
///
/// Any other degree is an error: the penalty terms only ever need degree 2,
/// and silently falling back to a different rule would change every
/// penalized residual.
pub fn quadrature(degree: usize) -> Result<QuadratureRule, FemError> {
    if degree != 2 {
        return Err(FemError::UnsupportedQuadratureDegree(degree));
    }
    Ok(QuadratureRule {
        points: vec![
            [0.5, 0.5, 0.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
        ],
        weights: vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    })
}

/// Nodal values of a P1 field, one per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    /// The zero field on `mesh`.
    pub fn zeros(mesh: &Mesh) -> ScalarField {
        ScalarField {
            values: vec![0.0; mesh.vertex_count()],
        }
    }

    /// Wraps nodal values, checking the length against the mesh.
    pub fn from_values(mesh: &Mesh, values: Vec<f64>) -> Result<ScalarField, FemError> {
        if values.len() != mesh.vertex_count() {
            return Err(FemError::FieldLength {
                expected: mesh.vertex_count(),
                got: values.len(),
            });
        }
        Ok(ScalarField { values })
    }

    /// Samples `f` at every vertex.
    pub fn from_fn(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> ScalarField {
        ScalarField {
            values: mesh.vertices().iter().map(|&p| f(p)).collect(),
        }
    }

    /// The nodal values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable nodal values.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Consumes the field, returning its values.
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Appends `scale` times the stiffness matrix, with indices shifted by
/// `(row_offset, col_offset)`, onto `out`. Triplet order is deterministic
/// (element by element, row-major within the 3x3 kernel).
pub fn append_laplacian(
    mesh: &Mesh,
    row_offset: usize,
    col_offset: usize,
    scale: f64,
    out: &mut Vec<(usize, usize, f64)>,
) {
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let k = element_stiffness(&element_geometry(mesh, t));
        for i in 0..3 {
            for j in 0..3 {
                out.push((row_offset + tri[i], col_offset + tri[j], scale * k[i][j]));
            }
        }
    }
}

/// Appends `scale` times the mass matrix, shifted by `(row_offset,
/// col_offset)`, onto `out`.
pub fn append_mass(
    mesh: &Mesh,
    row_offset: usize,
    col_offset: usize,
    scale: f64,
    out: &mut Vec<(usize, usize, f64)>,
) {
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let m = element_mass(&element_geometry(mesh, t));
        for i in 0..3 {
            for j in 0..3 {
                out.push((row_offset + tri[i], col_offset + tri[j], scale * m[i][j]));
            }
        }
    }
}

/// Appends `scale` times the first-order coupling matrix
/// `(G_b)_{ij} = integral of phi_i * d_b phi_j`, shifted by `(row_offset,
/// col_offset)`, onto `out`. `beta` selects the derivative direction (0 or 1).
pub fn append_gradient_coupling(
    mesh: &Mesh,
    beta: usize,
    row_offset: usize,
    col_offset: usize,
    scale: f64,
    out: &mut Vec<(usize, usize, f64)>,
) {
    assert!(beta < 2, "derivative direction must be 0 or 1, got {beta}");
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let geom = element_geometry(mesh, t);
        for j in 0..3 {
            // integral of phi_i over the triangle is A/3 for each i, and
            // d_b phi_j is the constant geom.grads[j][beta].
            let val = scale * geom.area / 3.0 * geom.grads[j][beta];
            for i in 0..3 {
                out.push((row_offset + tri[i], col_offset + tri[j], val));
            }
        }
    }
}

/// Global P1 stiffness matrix (homogeneous Neumann; apply Dirichlet
/// elimination separately). Symmetric positive semidefinite with the
/// constants in its kernel.
pub fn assemble_laplacian(mesh: &Mesh) -> CsrMatrix {
    let nv = mesh.vertex_count();
    let mut triplets = Vec::with_capacity(9 * mesh.triangle_count());
    append_laplacian(mesh, 0, 0, 1.0, &mut triplets);
    csr_from_triplets(nv, nv, &triplets).expect("stiffness triplets are finite and in range")
}

/// Global P1 mass matrix. Symmetric positive definite.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    let nv = mesh.vertex_count();
    let mut triplets = Vec::with_capacity(9 * mesh.triangle_count());
    append_mass(mesh, 0, 0, 1.0, &mut triplets);
    csr_from_triplets(nv, nv, &triplets).expect("mass triplets are finite and in range")
}

/// Global coupling matrix `(G_beta)_{ij} = integral of phi_i * d_beta phi_j`.
pub fn assemble_gradient_coupling(mesh: &Mesh, beta: usize) -> CsrMatrix {
    let nv = mesh.vertex_count();
    let mut triplets = Vec::with_capacity(9 * mesh.triangle_count());
    append_gradient_coupling(mesh, beta, 0, 0, 1.0, &mut triplets);
    csr_from_triplets(nv, nv, &triplets).expect("coupling triplets are finite and in range")
}

/// Negative part `{v}^- = -min(v, 0)`: nonnegative, 1-Lipschitz, zero for
/// nonnegative arguments.
pub fn negative_part(v: f64) -> f64 {
    if v < 0.0 {
        -v
    } else {
        0.0
    }
}

/// Active-set indicator used for the semismooth derivative of the penalty:
/// the kink at exactly zero counts as inactive.
pub fn negative_part_active(v: f64) -> bool {
    v < 0.0
}

/// Removes triplets in constrained rows or columns and appends a unit
/// diagonal for each constrained dof. Used while assembling Jacobians so the
/// eliminated system is built directly. `constrained` has one flag per dof
/// of the (square) system the triplets describe.
pub fn dirichlet_filter_triplets(triplets: &mut Vec<(usize, usize, f64)>, constrained: &[bool]) {
    triplets.retain(|&(r, c, _)| !constrained[r] && !constrained[c]);
    for (dof, &fixed) in constrained.iter().enumerate() {
        if fixed {
            triplets.push((dof, dof, 1.0));
        }
    }
}

/// Symmetric elimination of homogeneous Dirichlet dofs: constrained rows and
/// columns are zeroed, the diagonal entry is set to 1, and the
/// corresponding rhs entries are zeroed. Unconstrained equations are
/// untouched, so solving the reduced system reproduces the constrained
/// solve exactly.
pub fn apply_dirichlet(a: &CsrMatrix, b: &[f64], dofs: &[usize]) -> (CsrMatrix, Vec<f64>) {
    assert!(
        a.nrows() == a.ncols(),
        "Dirichlet elimination needs a square matrix, got {}x{}",
        a.nrows(),
        a.ncols()
    );
    assert!(
        b.len() == a.nrows(),
        "rhs length {} does not match matrix size {}",
        b.len(),
        a.nrows()
    );
    let mut constrained = vec![false; a.nrows()];
    for &dof in dofs {
        assert!(dof < a.nrows(), "dof {dof} out of range for {} rows", a.nrows());
        constrained[dof] = true;
    }
    let mut triplets = a.to_triplets();
    dirichlet_filter_triplets(&mut triplets, &constrained);
    let reduced = csr_from_triplets(a.nrows(), a.ncols(), &triplets)
        .expect("filtered triplets stay finite and in range");
    let rhs = b
        .iter()
        .enumerate()
        .map(|(i, &v)| if constrained[i] { 0.0 } else { v })
        .collect();
    (reduced, rhs)
}

/// H1 seminorm `sqrt(integral of |grad u|^2)` via a direct element loop
/// (no assembled matrix), exact for P1 fields.
pub fn h1_seminorm(mesh: &Mesh, u: &[f64]) -> f64 {
    assert!(
        u.len() == mesh.vertex_count(),
        "field has {} values but the mesh has {} vertices",
        u.len(),
        mesh.vertex_count()
    );
    let mut total = 0.0;
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let geom = element_geometry(mesh, t);
        let mut gx = 0.0;
        let mut gy = 0.0;
        for i in 0..3 {
            gx += u[tri[i]] * geom.grads[i][0];
            gy += u[tri[i]] * geom.grads[i][1];
        }
        total += geom.area * (gx * gx + gy * gy);
    }
    total.sqrt()
}

/// L2 norm via the exact elementwise mass quadratic form
/// `A/6 * (sum u_i^2 + sum_{i<j} u_i u_j)`.
pub fn l2_norm(mesh: &Mesh, u: &[f64]) -> f64 {
    assert!(
        u.len() == mesh.vertex_count(),
        "field has {} values but the mesh has {} vertices",
        u.len(),
        mesh.vertex_count()
    );
    let mut total = 0.0;
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let area = mesh.triangle_area(t);
        let (a, b, c) = (u[tri[0]], u[tri[1]], u[tri[2]]);
        total += area / 6.0 * (a * a + b * b + c * c + a * b + a * c + b * c);
    }
    total.sqrt()
}

/// Full H1 norm `sqrt(l2^2 + seminorm^2)`.
pub fn h1_norm(mesh: &Mesh, u: &[f64]) -> f64 {
    let l2 = l2_norm(mesh, u);
    let semi = h1_seminorm(mesh, u);
    (l2 * l2 + semi * semi).sqrt()
}

/// Evaluates a coarse P1 field at every vertex of a finer mesh.
///
/// Fine vertices that fall slightly outside the coarse polygon (the nested
/// refinements project boundary midpoints outward onto the circle) are
/// evaluated by affine extension of the nearest coarse triangle, accepted up
/// to [`INTERPOLATE_COLLAR_FACTOR`] times the coarse maximum edge length.
/// Points farther out than that propagate the location failure.
pub fn interpolate(coarse: &Mesh, u: &[f64], fine: &Mesh) -> Result<Vec<f64>, MeshError> {
    assert!(
        u.len() == coarse.vertex_count(),
        "field has {} values but the coarse mesh has {} vertices",
        u.len(),
        coarse.vertex_count()
    );
    let collar = INTERPOLATE_COLLAR_FACTOR * coarse.max_edge_length();
    let mut values = Vec::with_capacity(fine.vertex_count());
    for &p in fine.vertices() {
        let (t, lambda) = match coarse.locate_point(p) {
            Ok(hit) => hit,
            Err(_) => coarse.locate_point_extended(p, collar)?,
        };
        let tri = coarse.triangles()[t];
        values.push(lambda[0] * u[tri[0]] + lambda[1] * u[tri[1]] + lambda[2] * u[tri[2]]);
    }
    Ok(values)
}

/// Physical coordinates of a barycentric point of triangle `t`.
pub fn barycentric_to_xy(mesh: &Mesh, t: usize, lambda: [f64; 3]) -> [f64; 2] {
    let tri = mesh.triangles()[t];
    let v = mesh.vertices();
    [
        lambda[0] * v[tri[0]][0] + lambda[1] * v[tri[1]][0] + lambda[2] * v[tri[2]][0],
        lambda[0] * v[tri[0]][1] + lambda[1] * v[tri[1]][1] + lambda[2] * v[tri[2]][1],
    ]
}

/// Exact squared L2 distance between the P1 gradient of `u` and the P1
/// vector field `(xi1, xi2)`: `integral of |grad u - xi|^2`. The integrand
/// is quadratic, so the elementwise closed form is exact.
pub fn gradient_gap_squared(mesh: &Mesh, u: &[f64], xi1: &[f64], xi2: &[f64]) -> f64 {
    let nv = mesh.vertex_count();
    assert!(
        u.len() == nv && xi1.len() == nv && xi2.len() == nv,
        "gap fields must all have {nv} values, got {}, {}, {}",
        u.len(),
        xi1.len(),
        xi2.len()
    );
    let mut total = 0.0;
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let geom = element_geometry(mesh, t);
        let area = geom.area;
        let mut grad = [0.0, 0.0];
        for i in 0..3 {
            grad[0] += u[tri[i]] * geom.grads[i][0];
            grad[1] += u[tri[i]] * geom.grads[i][1];
        }
        for (beta, xi) in [xi1, xi2].iter().enumerate() {
            let (a, b, c) = (xi[tri[0]], xi[tri[1]], xi[tri[2]]);
            // integral of xi_beta over t and of xi_beta^2 over t.
            let lin = area / 3.0 * (a + b + c);
            let quad = area / 6.0 * (a * a + b * b + c * c + a * b + a * c + b * c);
            total += area * grad[beta] * grad[beta] - 2.0 * grad[beta] * lin + quad;
        }
    }
    // Roundoff can push a tiny exact-zero gap negative.
    total.max(0.0)
}
