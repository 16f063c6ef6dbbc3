//! Report type shared by all experiment drivers.
//!
//! A [`ConvergenceReport`] is a small self-describing table: named
//! columns, rows of `f64` ordered by the sweep parameter, and enough
//! metadata (label, canonical config plus hash, mesh statistics, notes)
//! to reproduce the run. The CSV exporter serializes it verbatim, so
//! everything that should be byte-stable across reruns lives here and
//! only the wall-clock time is treated as volatile.

use crate::experiment::config::{ExperimentConfig, ProblemKind};
use crate::mesh::Mesh;

/// Size statistics of the (finest) mesh a study ran on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    /// Resolution (subdivisions per radius).
    pub n: usize,
    /// Vertex count.
    pub vertices: usize,
    /// Triangle count.
    pub triangles: usize,
    /// Nominal mesh size `radius / n`.
    pub h: f64,
    /// Longest edge actually present in the mesh.
    pub max_edge: f64,
}

impl MeshStats {
    /// Reads the statistics off a mesh. The resolution is recovered from
    /// the nominal mesh size, which the builder keeps exact.
    pub fn of(mesh: &Mesh) -> MeshStats {
        let n = (mesh.radius() / mesh.h()).round() as usize;
        MeshStats {
            n,
            vertices: mesh.vertex_count(),
            triangles: mesh.triangle_count(),
            h: mesh.h(),
            max_edge: mesh.max_edge_length(),
        }
    }
}

/// One study's tabulated results plus provenance metadata.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Config label, reused as the output file stem.
    pub label: String,
    /// Which problem module produced the data.
    pub problem: ProblemKind,
    /// Canonical JSON of the config that ran.
    pub config_json: String,
    /// SHA-256 of `config_json`.
    pub config_hash: String,
    /// Statistics of the finest mesh involved.
    pub mesh: MeshStats,
    /// Column names, fixed per driver.
    pub columns: Vec<&'static str>,
    /// Data rows, ordered by the sweep parameter; one value per column.
    pub rows: Vec<Vec<f64>>,
    /// Deterministic remarks (resolved parameters, budget exhaustion).
    pub notes: Vec<String>,
    /// Per-point solver failures; empty means every solve converged.
    pub failures: Vec<String>,
    /// Whether the study ran to its natural end (Cauchy tolerance
    /// reached, all sweep points solved).
    pub terminated: bool,
    /// Wall-clock duration of the study; volatile, excluded from the
    /// CSV byte-stability contract.
    pub wall_seconds: f64,
}

impl ConvergenceReport {
    /// Creates an empty report for a config and mesh.
    pub fn new(
        config: &ExperimentConfig,
        mesh: MeshStats,
        columns: Vec<&'static str>,
    ) -> ConvergenceReport {
        assert!(!columns.is_empty(), "a report needs at least one column");
        ConvergenceReport {
            label: config.label.clone(),
            problem: config.problem,
            config_json: config.canonical_json(),
            config_hash: config.config_hash(),
            mesh,
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
            failures: Vec::new(),
            terminated: true,
            wall_seconds: 0.0,
        }
    }

    /// Appends a row; its width must match the column list.
    pub fn push_row(&mut self, row: Vec<f64>) {
        assert!(
            row.len() == self.columns.len(),
            "row width {} does not match {} columns",
            row.len(),
            self.columns.len()
        );
        self.rows.push(row);
    }

    /// True when no sweep point failed to solve.
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::ExperimentConfig;
    use crate::mesh::build_disk_mesh;

    fn demo_config() -> ExperimentConfig {
        ExperimentConfig::from_json_str(
            r#"{
                "label": "demo",
                "problem": "biharmonic",
                "mesh": { "n": 4 },
                "forcing": { "type": "fixed", "a": 0.0, "c": 1.0, "s": 1.0 },
                "obstacle": { "type": "constant", "value": -1.0 }
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn mesh_stats_recover_resolution() {
        let mesh = build_disk_mesh(4, 2.0).unwrap();
        let stats = MeshStats::of(&mesh);
        assert!(stats.n == 4, "n recovered from nominal h");
        assert!(stats.vertices == 3 * 16 + 3 * 4 + 1, "vertex count formula");
        assert!(stats.triangles == 6 * 16, "triangle count formula");
        assert!(stats.h == 0.5, "nominal h is radius / n");
        assert!(stats.max_edge > stats.h, "longest edge exceeds nominal h");
    }

    #[test]
    fn report_tracks_rows_and_success() {
        let config = demo_config();
        let mesh = build_disk_mesh(4, 1.0).unwrap();
        let mut report =
            ConvergenceReport::new(&config, MeshStats::of(&mesh), vec!["kappa", "error"]);
        assert!(report.succeeded() && report.terminated);
        assert!(report.config_hash == config.config_hash());
        report.push_row(vec![1.0, 0.5]);
        report.push_row(vec![0.5, 0.25]);
        assert!(report.rows.len() == 2);
        report.failures.push("kappa=0.25: diverged".to_string());
        assert!(!report.succeeded());
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn row_width_is_enforced() {
        let config = demo_config();
        let mesh = build_disk_mesh(4, 1.0).unwrap();
        let mut report =
            ConvergenceReport::new(&config, MeshStats::of(&mesh), vec!["kappa", "error"]);
        report.push_row(vec![1.0]);
    }
}
