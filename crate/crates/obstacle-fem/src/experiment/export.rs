//! CSV and VTK artifact writers.
//!
//! CSV layout: `#`-prefixed comment lines carrying the report metadata
//! (label, problem, canonical config and its SHA-256, mesh statistics,
//! termination flag, notes, failures, wall time), then a header row of
//! column names, then one line per data row with every value printed as
//! `{:.8e}` (scientific, 9 significant digits, `.` decimal). Re-running
//! the same config reproduces the file byte-for-byte except for the
//! `# wall-seconds:` line, which is volatile by nature;
//! [`stable_csv_bytes`] strips exactly that line for hashing and
//! comparison.
//!
//! VTK layout: legacy ASCII version 3.0, `DATASET UNSTRUCTURED_GRID`
//! with triangle cells (cell type 5) and `POINT_DATA` scalars/vectors,
//! all values `double`. Points default to the flat mesh at `z = 0`; a
//! caller may supply deformed coordinates to export warped
//! configurations.

use std::io::Write;
use std::path::Path;

use crate::experiment::report::ConvergenceReport;
use crate::mesh::Mesh;

/// Prefix of the one volatile CSV line.
const WALL_LINE_PREFIX: &str = "# wall-seconds:";

/// Renders a report as CSV text.
pub fn csv_string(report: &ConvergenceReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("# label: {}\n", report.label));
    out.push_str(&format!("# problem: {}\n", report.problem));
    out.push_str(&format!("# config-sha256: {}\n", report.config_hash));
    out.push_str(&format!("# config: {}\n", report.config_json));
    out.push_str(&format!(
        "# mesh: n={} vertices={} triangles={} h={:.8e} max-edge={:.8e}\n",
        report.mesh.n, report.mesh.vertices, report.mesh.triangles, report.mesh.h,
        report.mesh.max_edge
    ));
    out.push_str(&format!("# terminated: {}\n", report.terminated));
    for note in &report.notes {
        out.push_str(&format!("# note: {note}\n"));
    }
    for failure in &report.failures {
        out.push_str(&format!("# failure: {failure}\n"));
    }
    out.push_str(&format!(
        "{WALL_LINE_PREFIX} {:.3}\n",
        report.wall_seconds
    ));
    out.push_str(&report.columns.join(","));
    out.push('\n');
    for row in &report.rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// The byte-stable region of a CSV: everything except the wall-time
/// line. Two runs of the same config agree on these bytes exactly.
pub fn stable_csv_bytes(csv: &str) -> Vec<u8> {
    let mut out = String::new();
    for line in csv.lines() {
        if line.starts_with(WALL_LINE_PREFIX) {
            continue;
        }
        out.push_str(line);
        out.push('\n');
    }
    out.into_bytes()
}

/// Writes a report to a CSV file.
pub fn export_csv(report: &ConvergenceReport, path: &Path) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(csv_string(report).as_bytes())
}

/// One named vertex field for VTK export.
#[derive(Debug, Clone, Copy)]
pub enum VtkField<'a> {
    /// One value per vertex.
    Scalars {
        /// Field name (no whitespace).
        name: &'a str,
        /// Vertex values.
        values: &'a [f64],
    },
    /// One 3-vector per vertex.
    Vectors {
        /// Field name (no whitespace).
        name: &'a str,
        /// Vertex vectors.
        values: &'a [[f64; 3]],
    },
}

impl VtkField<'_> {
    fn name(&self) -> &str {
        match self {
            VtkField::Scalars { name, .. } | VtkField::Vectors { name, .. } => name,
        }
    }

    fn len(&self) -> usize {
        match self {
            VtkField::Scalars { values, .. } => values.len(),
            VtkField::Vectors { values, .. } => values.len(),
        }
    }
}

/// Renders a mesh and vertex fields as a legacy ASCII VTK dataset.
///
/// `points` overrides the vertex coordinates (deformed configurations);
/// when `None` the flat mesh is written at `z = 0`.
///
/// # Panics
/// If a field length does not match the vertex count, a field name is
/// empty or contains whitespace, or the title is empty, multi-line, or
/// longer than the format's 255-byte line limit.
pub fn vtk_string(
    mesh: &Mesh,
    points: Option<&[[f64; 3]]>,
    fields: &[VtkField<'_>],
    title: &str,
) -> String {
    let nv = mesh.vertex_count();
    let nt = mesh.triangle_count();
    assert!(
        !title.is_empty() && !title.contains('\n') && title.len() <= 255,
        "vtk title must be one line of at most 255 bytes"
    );
    if let Some(p) = points {
        assert!(p.len() == nv, "points length {} != {} vertices", p.len(), nv);
    }
    for field in fields {
        assert!(
            !field.name().is_empty() && !field.name().contains(char::is_whitespace),
            "vtk field name {:?} must be nonempty without whitespace",
            field.name()
        );
        assert!(
            field.len() == nv,
            "field {:?} length {} != {} vertices",
            field.name(),
            field.len(),
            nv
        );
    }

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(title);
    out.push('\n');
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    out.push_str(&format!("POINTS {nv} double\n"));
    match points {
        Some(p) => {
            for q in p {
                out.push_str(&format!("{:.8e} {:.8e} {:.8e}\n", q[0], q[1], q[2]));
            }
        }
        None => {
            for v in mesh.vertices() {
                out.push_str(&format!("{:.8e} {:.8e} {:.8e}\n", v[0], v[1], 0.0));
            }
        }
    }
    out.push_str(&format!("CELLS {nt} {}\n", 4 * nt));
    for tri in mesh.triangles() {
        out.push_str(&format!("3 {} {} {}\n", tri[0], tri[1], tri[2]));
    }
    out.push_str(&format!("CELL_TYPES {nt}\n"));
    for _ in 0..nt {
        out.push_str("5\n");
    }
    if !fields.is_empty() {
        out.push_str(&format!("POINT_DATA {nv}\n"));
        for field in fields {
            match field {
                VtkField::Scalars { name, values } => {
                    out.push_str(&format!("SCALARS {name} double 1\n"));
                    out.push_str("LOOKUP_TABLE default\n");
                    for v in *values {
                        out.push_str(&format!("{v:.8e}\n"));
                    }
                }
                VtkField::Vectors { name, values } => {
                    out.push_str(&format!("VECTORS {name} double\n"));
                    for v in *values {
                        out.push_str(&format!("{:.8e} {:.8e} {:.8e}\n", v[0], v[1], v[2]));
                    }
                }
            }
        }
    }
    out
}

/// Writes a mesh and vertex fields to a legacy ASCII VTK file.
pub fn export_vtk(
    mesh: &Mesh,
    points: Option<&[[f64; 3]]>,
    fields: &[VtkField<'_>],
    title: &str,
    path: &Path,
) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(vtk_string(mesh, points, fields, title).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::ExperimentConfig;
    use crate::experiment::report::{ConvergenceReport, MeshStats};
    use crate::mesh::build_disk_mesh;

    fn demo_report(wall: f64) -> ConvergenceReport {
        let config = ExperimentConfig::from_json_str(
            r#"{
                "label": "export-demo",
                "problem": "biharmonic",
                "mesh": { "n": 4 },
                "forcing": { "type": "fixed", "a": 0.0, "c": 1.0, "s": 1.0 },
                "obstacle": { "type": "constant", "value": -1.0 }
            }"#,
        )
        .unwrap();
        let mesh = build_disk_mesh(4, 1.0).unwrap();
        let mut report =
            ConvergenceReport::new(&config, MeshStats::of(&mesh), vec!["kappa", "error"]);
        report.push_row(vec![1.5e-9, 4.0e-7]);
        report.push_row(vec![7.5e-10, 2.0e-7]);
        report.notes.push("demo note".to_string());
        report.wall_seconds = wall;
        report
    }

    #[test]
    fn csv_layout_and_formatting() {
        let csv = csv_string(&demo_report(1.25));
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0] == "# label: export-demo");
        assert!(lines[1] == "# problem: biharmonic");
        assert!(lines[2].starts_with("# config-sha256: ") && lines[2].len() == 17 + 64);
        assert!(lines[3].starts_with("# config: {"));
        assert!(lines[4].starts_with("# mesh: n=4 vertices=61 triangles=96 h="));
        assert!(lines[5] == "# terminated: true");
        assert!(lines[6] == "# note: demo note");
        assert!(lines[7] == "# wall-seconds: 1.250");
        assert!(lines[8] == "kappa,error");
        assert!(lines[9] == "1.50000000e-9,4.00000000e-7");
        assert!(lines[10] == "7.50000000e-10,2.00000000e-7");
        assert!(lines.len() == 11);
    }

    #[test]
    fn stable_bytes_ignore_wall_time_only() {
        let fast = csv_string(&demo_report(0.010));
        let slow = csv_string(&demo_report(9.999));
        assert!(fast != slow, "wall time differs in the raw bytes");
        assert!(
            stable_csv_bytes(&fast) == stable_csv_bytes(&slow),
            "stable region is identical"
        );
        let raw_lines = fast.lines().count();
        let stable_lines = String::from_utf8(stable_csv_bytes(&fast))
            .unwrap()
            .lines()
            .count();
        assert!(raw_lines - stable_lines == 1, "exactly one volatile line");
    }

    #[test]
    fn vtk_structure_is_consistent() {
        let mesh = build_disk_mesh(1, 1.0).unwrap();
        let nv = mesh.vertex_count();
        let nt = mesh.triangle_count();
        let zeros = vec![0.0; nv];
        let arrows = vec![[0.5, -1.0, 0.25]; nv];
        let text = vtk_string(
            &mesh,
            None,
            &[
                VtkField::Scalars {
                    name: "deflection",
                    values: &zeros,
                },
                VtkField::Vectors {
                    name: "dual",
                    values: &arrows,
                },
            ],
            "unit test",
        );
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0] == "# vtk DataFile Version 3.0");
        assert!(lines[1] == "unit test");
        assert!(lines[2] == "ASCII");
        assert!(lines[3] == "DATASET UNSTRUCTURED_GRID");
        assert!(lines[4] == format!("POINTS {nv} double"));

        let cells_at = 5 + nv;
        assert!(lines[cells_at] == format!("CELLS {nt} {}", 4 * nt));
        for k in 0..nt {
            let parts: Vec<&str> = lines[cells_at + 1 + k].split(' ').collect();
            assert!(parts.len() == 4 && parts[0] == "3", "triangle connectivity");
            for p in &parts[1..] {
                let idx: usize = p.parse().unwrap();
                assert!(idx < nv, "vertex index in range");
            }
        }
        let types_at = cells_at + 1 + nt;
        assert!(lines[types_at] == format!("CELL_TYPES {nt}"));
        assert!(lines[types_at + 1..types_at + 1 + nt]
            .iter()
            .all(|&l| l == "5"));

        let data_at = types_at + 1 + nt;
        assert!(lines[data_at] == format!("POINT_DATA {nv}"));
        assert!(lines[data_at + 1] == "SCALARS deflection double 1");
        assert!(lines[data_at + 2] == "LOOKUP_TABLE default");
        // The zero field reimports exactly: every scalar line parses back
        // to 0.0 bit for bit.
        for k in 0..nv {
            let v: f64 = lines[data_at + 3 + k].parse().unwrap();
            assert!(v == 0.0, "zero field round-trips exactly");
        }
        let vec_at = data_at + 3 + nv;
        assert!(lines[vec_at] == "VECTORS dual double");
        let first: Vec<f64> = lines[vec_at + 1]
            .split(' ')
            .map(|p| p.parse().unwrap())
            .collect();
        assert!(first == vec![0.5, -1.0, 0.25], "vector components round-trip");
        assert!(lines.len() == vec_at + 1 + nv, "no trailing sections");
    }

    #[test]
    fn vtk_accepts_deformed_points() {
        let mesh = build_disk_mesh(1, 1.0).unwrap();
        let warped: Vec<[f64; 3]> = mesh
            .vertices()
            .iter()
            .map(|v| [v[0], v[1], 0.15 - v[0] * v[0]])
            .collect();
        let text = vtk_string(&mesh, Some(&warped), &[], "warp");
        let lines: Vec<&str> = text.lines().collect();
        let first: Vec<f64> = lines[5].split(' ').map(|p| p.parse().unwrap()).collect();
        assert!(first[2] == 0.15, "center vertex carries its warped height");
        assert!(!text.contains("POINT_DATA"), "no data section without fields");
    }

    #[test]
    #[should_panic(expected = "length")]
    fn vtk_rejects_mismatched_fields() {
        let mesh = build_disk_mesh(1, 1.0).unwrap();
        let short = vec![0.0; mesh.vertex_count() - 1];
        vtk_string(
            &mesh,
            None,
            &[VtkField::Scalars {
                name: "broken",
                values: &short,
            }],
            "bad",
        );
    }
}
