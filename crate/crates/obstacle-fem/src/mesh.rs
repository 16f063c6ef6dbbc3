//! Conforming triangulations of the disk with nested uniform refinement.
//!
//! The only domain in play is the open disk of radius `r_A` centered at the
//! origin. Meshes are built from a fan of 6 equilateral triangles spanning
//! the regular hexagon inscribed in the circle, then refined uniformly:
//! every triangle splits into 4 via edge midpoints, and midpoints of
//! boundary edges are projected radially onto the circle. Two consequences
//! matter downstream:
//!
//! * successive resolutions are nested up to the boundary collar, and every
//!   parent vertex keeps its index, so fields transfer across resolutions
//!   without searching for parents;
//! * construction is fully deterministic (new vertices are ordered by their
//!   parent edge `(min index, max index)`), so repeated runs produce
//!   byte-identical meshes.
//!
//! The nominal mesh size is `h = r_A / n` for resolution `n`, matching the
//! convention used when coupling the penalty parameter to the mesh
//! (κ = h^q). The true maximum edge length is larger by a constant factor
//! (converging to about 1.45, from the radial projection stretching edges
//! next to the boundary; see [`Mesh::max_edge_length`]) and is exposed
//! separately for shape-quality checks.

use std::collections::BTreeMap;

/// Relative tolerance (times `r_A`) within which an outside point is still
/// snapped onto the nearest triangle by [`Mesh::locate_point`].
pub const LOCATE_SNAP_REL: f64 = 1e-10;

/// Errors from mesh construction and point location.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    /// Resolution must be a power of two so refinement levels line up.
    #[error("mesh resolution must be a power of two >= 1, got {0}")]
    InvalidResolution(usize),
    /// The disk radius must be a positive finite number.
    #[error("mesh radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    /// The queried point is farther outside every triangle than the
    /// location tolerance allows.
    #[error("point ({0}, {1}) lies outside the mesh beyond the location tolerance")]
    PointNotFound(f64, f64),
}

/// A conforming triangulation of the disk of radius `r_A`.
///
/// Triangles are counterclockwise vertex-index triples. Boundary vertices
/// (flagged in `boundary_vertex`) lie on the circle `|y| = r_A` to within
/// `1e-12 * r_A` by construction.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_vertex: Vec<bool>,
    radius: f64,
    /// Nominal mesh size `r_A / n`; halves exactly on refinement.
    h: f64,
    /// True maximum edge length, for shape-quality diagnostics.
    max_edge: f64,
    locator: Grid,
}

/// Uniform bin grid over the bounding square, for point location.
///
/// Each triangle is registered in every cell its (slightly inflated)
/// bounding box overlaps, so any point within the snap tolerance of a
/// triangle finds it among the candidates of the point's own cell.
#[derive(Debug, Clone)]
struct Grid {
    cells_per_side: usize,
    cell_size: f64,
    origin: f64,
    bins: Vec<Vec<u32>>,
}

impl Grid {
    fn build(vertices: &[[f64; 2]], triangles: &[[usize; 3]], radius: f64, h: f64) -> Self {
        let origin = -radius;
        let cells_per_side = ((2.0 * radius / h).ceil() as usize).max(1);
        let cell_size = 2.0 * radius / cells_per_side as f64;
        let mut bins = vec![Vec::new(); cells_per_side * cells_per_side];
        let pad = 1e-9 * radius;
        let clamp = |i: isize| -> usize { i.clamp(0, cells_per_side as isize - 1) as usize };
        for (t, tri) in triangles.iter().enumerate() {
            let xs = tri.map(|v| vertices[v][0]);
            let ys = tri.map(|v| vertices[v][1]);
            let (x0, x1) = (xs.iter().fold(f64::MAX, |a, &b| a.min(b)) - pad, xs.iter().fold(f64::MIN, |a, &b| a.max(b)) + pad);
            let (y0, y1) = (ys.iter().fold(f64::MAX, |a, &b| a.min(b)) - pad, ys.iter().fold(f64::MIN, |a, &b| a.max(b)) + pad);
            let ix0 = clamp(((x0 - origin) / cell_size).floor() as isize);
            let ix1 = clamp(((x1 - origin) / cell_size).floor() as isize);
            let iy0 = clamp(((y0 - origin) / cell_size).floor() as isize);
            let iy1 = clamp(((y1 - origin) / cell_size).floor() as isize);
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    bins[iy * cells_per_side + ix].push(t as u32);
                }
            }
        }
        Grid { cells_per_side, cell_size, origin, bins }
    }

    fn candidates(&self, p: [f64; 2]) -> &[u32] {
        let clamp = |i: isize| -> usize { i.clamp(0, self.cells_per_side as isize - 1) as usize };
        let ix = clamp(((p[0] - self.origin) / self.cell_size).floor() as isize);
        let iy = clamp(((p[1] - self.origin) / self.cell_size).floor() as isize);
        &self.bins[iy * self.cells_per_side + ix]
    }
}

/// Builds the disk mesh at resolution `n` (a power of two).
///
/// The mesh is the 6-triangle hexagon fan refined `log2(n)` times, with
/// every new boundary midpoint projected radially onto the circle. The
/// nominal mesh size is `h = radius / n`.
///
/// # Errors
/// [`MeshError::InvalidResolution`] if `n` is zero or not a power of two;
/// [`MeshError::InvalidRadius`] if `radius` is not positive and finite.
pub fn build_disk_mesh(n: usize, radius: f64) -> Result<Mesh, MeshError> {
    if n == 0 || !n.is_power_of_two() {
        return Err(MeshError::InvalidResolution(n));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(MeshError::InvalidRadius(radius));
    }
    let mut vertices = vec![[0.0, 0.0]];
    for k in 0..6 {
        let angle = std::f64::consts::FRAC_PI_3 * k as f64;
        vertices.push([radius * angle.cos(), radius * angle.sin()]);
    }
    let triangles = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
    let mut mesh = Mesh::from_parts(vertices, triangles, radius, radius);
    for _ in 0..n.trailing_zeros() {
        mesh = mesh.refine();
    }
    Ok(mesh)
}

impl Mesh {
    /// Assembles a mesh from raw parts, deriving boundary flags from edge
    /// incidence and validating orientation and conformity.
    ///
    /// # Panics
    /// If any triangle has nonpositive signed area, an edge is shared by
    /// more than two triangles, or a boundary vertex is off the circle by
    /// more than `1e-12 * radius`. These indicate construction bugs, not
    /// user errors, hence panics rather than `Result`.
    fn from_parts(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, radius: f64, h: f64) -> Mesh {
        let mut edge_count: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        let mut max_edge = 0.0f64;
        for (t, tri) in triangles.iter().enumerate() {
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            assert!(area > 0.0, "triangle {t} has nonpositive signed area {area}");
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                let d = [vertices[a][0] - vertices[b][0], vertices[a][1] - vertices[b][1]];
                max_edge = max_edge.max(d[0].hypot(d[1]));
            }
        }
        let mut boundary_vertex = vec![false; vertices.len()];
        for (&(a, b), &count) in &edge_count {
            assert!(count <= 2, "edge ({a}, {b}) is shared by {count} > 2 triangles");
            if count == 1 {
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
        }
        for (v, &flag) in boundary_vertex.iter().enumerate() {
            if flag {
                let r = vertices[v][0].hypot(vertices[v][1]);
                assert!(
                    (r - radius).abs() <= 1e-12 * radius,
                    "boundary vertex {v} lies at radius {r}, expected {radius}"
                );
            }
        }
        let locator = Grid::build(&vertices, &triangles, radius, h);
        Mesh { vertices, triangles, boundary_vertex, radius, h, max_edge, locator }
    }

    /// Vertex coordinates, one `[x, y]` pair per vertex.
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Counterclockwise vertex-index triples.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of triangles.
    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Whether vertex `v` lies on the outer boundary.
    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    /// Boundary flags for all vertices, aligned with [`Mesh::vertices`].
    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary_vertex
    }

    /// Disk radius `r_A`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Nominal mesh size `r_A / n`; the penalty coupling κ = h^q uses this.
    ///
    /// The true maximum edge exceeds the nominal size by a constant factor
    /// (about 1.45) because radial projection stretches edges next to the
    /// boundary; see [`Mesh::max_edge_length`].
    pub fn h(&self) -> f64 {
        self.h
    }

    /// True maximum edge length over all triangles.
    pub fn max_edge_length(&self) -> f64 {
        self.max_edge
    }

    /// Signed area of triangle `t` (positive by the orientation invariant).
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// Sum of all triangle areas (the inscribed-polygon area of the disk).
    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Uniform refinement: each triangle splits into 4 via edge midpoints.
    ///
    /// Parent vertices keep their indices; new midpoints follow, ordered by
    /// their parent edge `(min index, max index)`, so the output is
    /// deterministic. Midpoints of boundary edges are projected radially
    /// onto the circle. The nominal mesh size halves exactly.
    pub fn refine(&self) -> Mesh {
        let mut edge_count: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut vertices = self.vertices.clone();
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (&(a, b), &count) in &edge_count {
            let pa = self.vertices[a];
            let pb = self.vertices[b];
            let mut m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            if count == 1 {
                let r = m[0].hypot(m[1]);
                let scale = self.radius / r;
                m = [m[0] * scale, m[1] * scale];
            }
            midpoint.insert((a, b), vertices.len());
            vertices.push(m);
        }
        let mid = |a: usize, b: usize| midpoint[&(a.min(b), a.max(b))];
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let (mab, mbc, mca) = (mid(a, b), mid(b, c), mid(c, a));
            triangles.push([a, mab, mca]);
            triangles.push([b, mbc, mab]);
            triangles.push([c, mca, mbc]);
            triangles.push([mab, mbc, mca]);
        }
        Mesh::from_parts(vertices, triangles, self.radius, 0.5 * self.h)
    }

    /// Finds the triangle containing `point` and its barycentric
    /// coordinates there.
    ///
    /// Points up to `1e-10 * r_A` outside a triangle are snapped onto the
    /// nearest point of the nearest triangle; the returned coordinates are
    /// then clamped to `[0, 1]` and renormalized, so they always lie in
    /// `[-1e-12, 1 + 1e-12]` and sum to 1.
    ///
    /// # Errors
    /// [`MeshError::PointNotFound`] if the point is farther than the snap
    /// tolerance from every triangle. Note the polygonal mesh is a strict
    /// subset of the disk: near-boundary points inside the circle but
    /// outside the polygon (a collar of width about `h²/(8 r_A)`) are
    /// rejected here; [`crate::fem::interpolate`] handles that collar by
    /// affine extension instead.
    pub fn locate_point(&self, point: [f64; 2]) -> Result<(usize, [f64; 3]), MeshError> {
        let snap = LOCATE_SNAP_REL * self.radius;
        let candidates = self.locator.candidates(point);
        for &t in candidates {
            let lambda = self.barycentric(t as usize, point);
            if lambda.iter().all(|&l| l >= 0.0) {
                return Ok((t as usize, lambda));
            }
        }
        let mut best: Option<(usize, f64, [f64; 2])> = None;
        for &t in candidates {
            let [a, b, c] = self.triangles[t as usize];
            let proj = closest_point_on_triangle(point, self.vertices[a], self.vertices[b], self.vertices[c]);
            let d = (point[0] - proj[0]).hypot(point[1] - proj[1]);
            if best.map_or(true, |(_, bd, _)| d < bd) {
                best = Some((t as usize, d, proj));
            }
        }
        match best {
            Some((t, d, proj)) if d <= snap => {
                let lambda = self.barycentric(t, proj);
                let clamped = lambda.map(|l| l.clamp(0.0, 1.0));
                let sum: f64 = clamped.iter().sum();
                Ok((t, clamped.map(|l| l / sum)))
            }
            _ => Err(MeshError::PointNotFound(point[0], point[1])),
        }
    }

    /// Barycentric coordinates of `point` with respect to triangle `t`
    /// (unclamped; negative entries mean the point is outside).
    pub fn barycentric(&self, t: usize, point: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let area = signed_area(pa, pb, pc);
        let la = signed_area(point, pb, pc) / area;
        let lb = signed_area(pa, point, pc) / area;
        [la, lb, 1.0 - la - lb]
    }

    /// Like [`Mesh::locate_point`] but, for points the snap tolerance
    /// rejects, falls back to the affine extension of the nearest triangle
    /// as long as the point is within `max_dist` of it.
    ///
    /// This serves nested-mesh interpolation: radially projected fine
    /// boundary vertices sit slightly outside the coarse polygon, and the
    /// affine extension still reproduces globally linear fields exactly.
    ///
    /// # Errors
    /// [`MeshError::PointNotFound`] if the point is farther than `max_dist`
    /// from every triangle.
    pub fn locate_point_extended(
        &self,
        point: [f64; 2],
        max_dist: f64,
    ) -> Result<(usize, [f64; 3]), MeshError> {
        match self.locate_point(point) {
            Ok(hit) => Ok(hit),
            Err(_) => {
                let mut best: Option<(usize, f64)> = None;
                for t in 0..self.triangles.len() {
                    let [a, b, c] = self.triangles[t];
                    let proj =
                        closest_point_on_triangle(point, self.vertices[a], self.vertices[b], self.vertices[c]);
                    let d = (point[0] - proj[0]).hypot(point[1] - proj[1]);
                    if best.map_or(true, |(_, bd)| d < bd) {
                        best = Some((t, d));
                    }
                }
                match best {
                    Some((t, d)) if d <= max_dist => Ok((t, self.barycentric(t, point))),
                    _ => Err(MeshError::PointNotFound(point[0], point[1])),
                }
            }
        }
    }
}

/// Signed area of the triangle `(a, b, c)`; positive when counterclockwise.
pub fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Closest point to `p` on the closed triangle `(a, b, c)`.
fn closest_point_on_triangle(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let area = signed_area(a, b, c);
    let la = signed_area(p, b, c) / area;
    let lb = signed_area(a, p, c) / area;
    let lc = 1.0 - la - lb;
    if la >= 0.0 && lb >= 0.0 && lc >= 0.0 {
        return p;
    }
    let mut best = a;
    let mut best_d = f64::MAX;
    for (u, v) in [(a, b), (b, c), (c, a)] {
        let q = closest_point_on_segment(p, u, v);
        let d = (p[0] - q[0]).hypot(p[1] - q[1]);
        if d < best_d {
            best_d = d;
            best = q;
        }
    }
    best
}

/// Closest point to `p` on the segment `[u, v]`.
fn closest_point_on_segment(p: [f64; 2], u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
    let d = [v[0] - u[0], v[1] - u[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - u[0]) * d[0] + (p[1] - u[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    [u[0] + t * d[0], u[1] + t * d[1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hexagon_fan_counts_and_flags() {
        let mesh = build_disk_mesh(1, 0.5).unwrap();
        assert_eq!(mesh.vertex_count(), 7);
        assert_eq!(mesh.triangle_count(), 6);
        assert!(!mesh.is_boundary(0));
        for v in 1..7 {
            assert!(mesh.is_boundary(v));
        }
        assert_eq!(mesh.h(), 0.5);
    }

    #[test]
    fn refinement_counts_follow_the_lattice_formulas() {
        // V = 3n^2 + 3n + 1 and T = 6n^2 for the refined hexagon fan.
        let mut mesh = build_disk_mesh(1, 0.5).unwrap();
        for k in 1..=3u32 {
            mesh = mesh.refine();
            let n = 1usize << k;
            assert_eq!(mesh.vertex_count(), 3 * n * n + 3 * n + 1);
            assert_eq!(mesh.triangle_count(), 6 * n * n);
        }
    }

    #[test]
    fn build_rejects_bad_arguments() {
        assert_eq!(build_disk_mesh(0, 0.5).unwrap_err(), MeshError::InvalidResolution(0));
        assert_eq!(build_disk_mesh(3, 0.5).unwrap_err(), MeshError::InvalidResolution(3));
        assert_eq!(build_disk_mesh(4, 0.0).unwrap_err(), MeshError::InvalidRadius(0.0));
        assert!(build_disk_mesh(4, f64::NAN).is_err());
    }

    #[test]
    fn boundary_vertices_sit_on_the_circle() {
        let mesh = build_disk_mesh(8, 0.5).unwrap();
        for (v, p) in mesh.vertices().iter().enumerate() {
            if mesh.is_boundary(v) {
                assert!((p[0].hypot(p[1]) - 0.5).abs() <= 1e-13);
            }
        }
        // 6n boundary vertices at resolution n.
        let count = mesh.boundary_flags().iter().filter(|&&b| b).count();
        assert_eq!(count, 48);
    }

    #[test]
    fn locate_vertex_and_centroid() {
        let mesh = build_disk_mesh(4, 0.5).unwrap();
        let [a, b, c] = mesh.triangles()[0];
        let (pa, pb, pc) = (mesh.vertices()[a], mesh.vertices()[b], mesh.vertices()[c]);
        let centroid = [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0];
        let (_, lambda) = mesh.locate_point(centroid).unwrap();
        for l in lambda {
            assert!((l - 1.0 / 3.0).abs() <= 1e-12);
        }
        let (t, lambda) = mesh.locate_point(pa).unwrap();
        let tri = mesh.triangles()[t];
        let rebuilt = [
            lambda[0] * mesh.vertices()[tri[0]][0] + lambda[1] * mesh.vertices()[tri[1]][0] + lambda[2] * mesh.vertices()[tri[2]][0],
            lambda[0] * mesh.vertices()[tri[0]][1] + lambda[1] * mesh.vertices()[tri[1]][1] + lambda[2] * mesh.vertices()[tri[2]][1],
        ];
        assert!((rebuilt[0] - pa[0]).abs() <= 1e-12 && (rebuilt[1] - pa[1]).abs() <= 1e-12);
    }

    #[test]
    fn locate_rejects_far_outside_points() {
        let mesh = build_disk_mesh(2, 0.5).unwrap();
        assert!(matches!(mesh.locate_point([0.6, 0.0]), Err(MeshError::PointNotFound(_, _))));
        // Inside the circle but outside the polygon beyond the snap
        // tolerance: boundary chords at n = 2 subtend 30 degrees, so the
        // polygon edge at the chord-middle direction (15 degrees) sits at
        // radius 0.5 cos(15 deg) = 0.483. A point at radius 0.49 in that
        // direction is inside the circle yet 7e-3 outside the polygon.
        let dir = (15f64).to_radians();
        let p = [0.49 * dir.cos(), 0.49 * dir.sin()];
        assert!(matches!(mesh.locate_point(p), Err(MeshError::PointNotFound(_, _))));
        // The extended locator accepts it (affine extension for the
        // boundary collar) but still rejects far-away points.
        assert!(mesh.locate_point_extended(p, 0.05 * 0.5).is_ok());
        assert!(mesh.locate_point_extended([0.7, 0.0], 0.05 * 0.5).is_err());
    }

    #[test]
    fn refine_keeps_parent_vertices_and_orientation() {
        let coarse = build_disk_mesh(2, 0.5).unwrap();
        let fine = coarse.refine();
        for (v, p) in coarse.vertices().iter().enumerate() {
            assert_eq!(fine.vertices()[v], *p);
        }
        for t in 0..fine.triangle_count() {
            assert!(fine.triangle_area(t) > 0.0);
        }
        assert_eq!(fine.triangle_count(), 4 * coarse.triangle_count());
        assert_eq!(fine.h(), 0.5 * coarse.h());
    }

    #[test]
    fn area_deficit_shrinks_toward_the_disk() {
        let exact = std::f64::consts::PI * 0.25;
        let a8 = build_disk_mesh(8, 0.5).unwrap().total_area();
        let a16 = build_disk_mesh(16, 0.5).unwrap().total_area();
        assert!(a8 < exact && a16 < exact);
        assert!(exact - a16 < exact - a8);
        // Inscribed-polygon deficit at n = 64 is below 0.2%.
        let a64 = build_disk_mesh(64, 0.5).unwrap().total_area();
        assert!((exact - a64) / exact < 0.002);
    }

    #[test]
    fn max_edge_tracks_the_nominal_size() {
        // Radial projection stretches boundary-adjacent edges; the ratio of
        // the true maximum edge to the nominal h = r_A/n grows with each
        // refinement and converges to about 1.448 (measured: 1.239 at n=2,
        // 1.348 at n=4, 1.399 at n=8, 1.442 at n=64).
        let mut previous = 1.0;
        for n in [2usize, 4, 8, 16] {
            let mesh = build_disk_mesh(n, 0.5).unwrap();
            let ratio = mesh.max_edge_length() / mesh.h();
            assert!(ratio >= previous && ratio < 1.46, "n={n}: ratio {ratio}");
            previous = ratio;
        }
    }
}
