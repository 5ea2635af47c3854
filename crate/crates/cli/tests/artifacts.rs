//! Artifact-level checks: byte determinism, report round-trip consistency
//! and re-reading the exported files.

use jamstress_cli::config::{build_problem, RunConfig};
use jamstress_cli::pipeline::{run_pipeline, EXIT_MECHANISM, EXIT_OK};
use jamstress_cli::presets::preset_toml;
use jamstress_core::forces::{check_cell_balance, extract_forces, InterfaceForces};
use jamstress_core::lp::solve_lp;
use jamstress_core::primal::assemble_lp;
use std::path::Path;

fn run_preset(name: &str, dir: &Path) -> jamstress_cli::RunReport {
    let config = RunConfig::from_toml(preset_toml(name).unwrap()).unwrap();
    run_pipeline(&config, dir).unwrap()
}

#[test]
fn all_jammed_presets_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["twocell", "verif1", "verif2", "shear-brick", "compress60"] {
        let report = run_preset(name, &tmp.path().join(name));
        assert_eq!(report.exit_code, EXIT_OK, "{name}: {:?}", report.warnings);
        assert_eq!(report.stability, "jammed", "{name}");
        assert!(report.audits.as_ref().unwrap().pass, "{name}");
        assert!(report.reconstruction.as_ref().unwrap().pass, "{name}");
    }
}

#[test]
fn identical_runs_produce_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let ra = run_preset("compress60", &a);
    let rb = run_preset("compress60", &b);
    assert_eq!(ra.exit_code, EXIT_OK);
    assert_eq!(rb.exit_code, EXIT_OK);
    for file in ["forces.csv", "stress.vtk"] {
        let fa = std::fs::read(a.join(file)).unwrap();
        let fb = std::fs::read(b.join(file)).unwrap();
        assert_eq!(fa, fb, "{file} differs between identical runs");
    }
}

#[test]
fn report_numbers_match_recomputation() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run_preset("verif2", tmp.path());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap())
            .unwrap();

    // Recompute the audit values through the library on the same problem.
    let config = RunConfig::from_toml(preset_toml("verif2").unwrap()).unwrap();
    let problem = build_problem(&config).unwrap();
    let lp = assemble_lp(&problem).unwrap();
    let sol = solve_lp(&lp, 1e-8).unwrap();
    let forces = extract_forces(&sol, &lp, problem.mesh()).unwrap();
    let balance = check_cell_balance(&forces, &problem);

    let audits = parsed["audits"].as_object().unwrap();
    assert_eq!(audits["cell_balance"].as_f64().unwrap(), balance.max);
    assert_eq!(parsed["solver"]["primal_objective"].as_f64().unwrap(), sol.primal_objective);
    assert_eq!(parsed["solver"]["iterations"].as_u64().unwrap() as usize, sol.iterations);
    assert_eq!(
        report.audits.as_ref().unwrap().cell_balance,
        balance.max,
        "in-memory report equals recomputation"
    );
}

#[test]
fn forces_csv_roundtrip_reproduces_balance() {
    let tmp = tempfile::tempdir().unwrap();
    run_preset("verif1", tmp.path());
    let text = std::fs::read_to_string(tmp.path().join("forces.csv")).unwrap();

    let config = RunConfig::from_toml(preset_toml("verif1").unwrap()).unwrap();
    let problem = build_problem(&config).unwrap();
    let lp = assemble_lp(&problem).unwrap();
    let sol = solve_lp(&lp, 1e-8).unwrap();
    let original = extract_forces(&sol, &lp, problem.mesh()).unwrap();

    let mut pairs = Vec::new();
    let mut edge_ids = Vec::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        edge_ids.push(cols[0].parse::<usize>().unwrap());
        pairs.push((cols[6].parse::<f64>().unwrap(), cols[7].parse::<f64>().unwrap()));
    }
    assert_eq!(edge_ids, problem.mesh().internal_edges());
    let reparsed = InterfaceForces::new(problem.mesh(), pairs, original.body_force);

    let before = check_cell_balance(&original, &problem);
    let after = check_cell_balance(&reparsed, &problem);
    assert_eq!(before.max, after.max, "17-digit round trip is exact");
    for (a, b) in before.residuals.iter().zip(&after.residuals) {
        assert_eq!(a, b);
    }
}

#[test]
fn vtk_file_reparses_with_consistent_counts() {
    let tmp = tempfile::tempdir().unwrap();
    run_preset("verif1", tmp.path());
    let text = std::fs::read_to_string(tmp.path().join("stress.vtk")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# vtk DataFile Version 3.0");
    lines.next(); // title
    assert_eq!(lines.next().unwrap(), "ASCII");
    assert_eq!(lines.next().unwrap(), "DATASET UNSTRUCTURED_GRID");

    let points_header = lines.next().unwrap();
    let np: usize = points_header.split_whitespace().nth(1).unwrap().parse().unwrap();
    let points: Vec<Vec<f64>> = (0..np)
        .map(|_| {
            lines
                .next()
                .unwrap()
                .split_whitespace()
                .map(|t| t.parse().unwrap())
                .collect()
        })
        .collect();
    assert!(points.iter().all(|p| p.len() == 3 && p[2] == 0.0));

    let cells_header = lines.next().unwrap();
    let nt: usize = cells_header.split_whitespace().nth(1).unwrap().parse().unwrap();
    let ints: usize = cells_header.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert_eq!(ints, 4 * nt);
    for _ in 0..nt {
        let row: Vec<usize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(row[0], 3);
        assert!(row[1..].iter().all(|&v| v < np));
    }
    let types_header = lines.next().unwrap();
    assert!(types_header.starts_with("CELL_TYPES"));
    for _ in 0..nt {
        assert_eq!(lines.next().unwrap(), "5");
    }

    // Triangle count equals the total ring-vertex count of the mesh.
    let config = RunConfig::from_toml(preset_toml("verif1").unwrap()).unwrap();
    let problem = build_problem(&config).unwrap();
    let expected: usize =
        problem.mesh().cells().iter().map(|c| c.vertices.len()).sum();
    assert_eq!(nt, expected);

    assert_eq!(lines.next().unwrap(), format!("CELL_DATA {nt}"));
    for name in ["sigma_11", "sigma_12", "sigma_21", "sigma_22"] {
        assert_eq!(lines.next().unwrap(), format!("SCALARS {name} double 1"));
        assert_eq!(lines.next().unwrap(), "LOOKUP_TABLE default");
        for _ in 0..nt {
            let v: f64 = lines.next().unwrap().parse().unwrap();
            // Verification test 1: every component equals -1.
            assert!((v + 1.0).abs() <= 1e-6, "sigma value {v}");
        }
    }
    assert_eq!(lines.next().unwrap(), "SCALARS cell_id int 1");
}

#[test]
fn mechanism_run_writes_collapse_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run_preset("twocell-tension", tmp.path());
    assert_eq!(report.exit_code, EXIT_MECHANISM);
    assert_eq!(report.stability, "mechanism");
    let text = std::fs::read_to_string(tmp.path().join("mechanism.csv")).unwrap();
    let rows: Vec<Vec<&str>> =
        text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    let u0x: f64 = rows[0][1].parse().unwrap();
    let u1x: f64 = rows[1][1].parse().unwrap();
    assert!((u0x + 1.0).abs() <= 1e-6);
    assert!((u1x - 1.0).abs() <= 1e-6);
    assert!(!tmp.path().join("forces.csv").exists());
}

#[test]
fn file_mesh_source_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let mesh = jamstress_core::geometry::generate_grid(
        2,
        2,
        jamstress_core::geometry::Rect::unit(),
    )
    .unwrap();
    let mesh_path = tmp.path().join("mesh.jmsh");
    std::fs::write(&mesh_path, jamstress_core::geometry::write_mesh(&mesh)).unwrap();
    let config_text = format!(
        r#"
[mesh]
source = "file"
path = "{}"

[friction]
s_t = 10.0

[traction]
mode = "matrix"
s = [[-1.0, 0.0], [0.0, -1.0]]
"#,
        mesh_path.display()
    );
    let config = RunConfig::from_toml(&config_text).unwrap();
    let report = run_pipeline(&config, &tmp.path().join("out")).unwrap();
    assert_eq!(report.exit_code, EXIT_OK);
    assert_eq!(report.mesh.cells, 4);
}

#[test]
fn per_edge_traction_mode_runs() {
    let mesh =
        jamstress_core::geometry::generate_grid(1, 1, jamstress_core::geometry::Rect::unit())
            .unwrap();
    let entries: Vec<String> = mesh
        .boundary_edges()
        .iter()
        .map(|&e| {
            let n = mesh.edge(e).normal;
            format!("{{ edge = {e}, g = [{}, {}] }}", -n.x, -n.y)
        })
        .collect();
    let tmp = tempfile::tempdir().unwrap();
    let mesh_path = tmp.path().join("one.jmsh");
    std::fs::write(&mesh_path, jamstress_core::geometry::write_mesh(&mesh)).unwrap();
    let config_text = format!(
        r#"
[mesh]
source = "file"
path = "{}"

[friction]
s_t = 10.0

[traction]
mode = "per-edge"
edges = [{}]
"#,
        mesh_path.display(),
        entries.join(", ")
    );
    let config = RunConfig::from_toml(&config_text).unwrap();
    let report = run_pipeline(&config, &tmp.path().join("out")).unwrap();
    assert_eq!(report.exit_code, EXIT_OK);
    // Single cell: the uniform compression reconstructs sigma = -I.
    let vtk = std::fs::read_to_string(tmp.path().join("out/stress.vtk")).unwrap();
    assert!(vtk.contains("SCALARS sigma_11 double 1"));
}

#[test]
fn threads_env_override_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    std::env::set_var("JAMSTRESS_THREADS", "2");
    run_preset("verif2", &a);
    std::env::set_var("JAMSTRESS_THREADS", "1");
    run_preset("verif2", &b);
    std::env::remove_var("JAMSTRESS_THREADS");
    let fa = std::fs::read(a.join("stress.vtk")).unwrap();
    let fb = std::fs::read(b.join("stress.vtk")).unwrap();
    assert_eq!(fa, fb, "worker count must not change the artifact bytes");
}
