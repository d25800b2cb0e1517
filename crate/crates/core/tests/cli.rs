use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn fecc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fecc"))
        .args(args)
        .output()
        .expect("fecc binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn summary(text: &str) -> BTreeMap<String, String> {
    text.split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn condensed_solve_on_generated_mesh_file() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.txt");
    let o = fecc(&["mesh-gen", "--generator", "quads", "--nx", "4", "--out", path_str(&mesh)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let o = fecc(&[
        "solve", "--mesh", path_str(&mesh), "--E", "1", "--nu", "0.4999", "--form", "grad", "--condensed",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = summary(&stdout(&o));
    assert_eq!(s["cells"], "16");
    assert_eq!(s["n_u"], "32");
    assert_eq!(s["condensed"], "true");
    let residual: f64 = s["residual"].parse().unwrap();
    assert!(residual <= 1e-12, "residual {residual}");
}

#[test]
fn incompressible_poisson_ratio_is_a_usage_error() {
    let o = fecc(&["solve", "--nx", "2", "--nu", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("fecc-error kind=invalid-argument exit=2"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn condensed_eps_form_is_refused() {
    let o = fecc(&["solve", "--nx", "2", "--nu", "0.3", "--condensed"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = fecc(&["solve", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fecc-error kind=usage"));
}

#[test]
fn malformed_mesh_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("bad.txt");
    std::fs::write(&mesh, "FECCMESH 1\nVERTICES 3\n0 0\n1 0\n0 x\nCELLS 1\n3 0 1 2\n").unwrap();
    let o = fecc(&["solve", "--mesh", path_str(&mesh), "--nu", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));
}

#[test]
fn missing_mesh_file_is_an_io_failure() {
    let o = fecc(&["solve", "--mesh", "/nonexistent/fecc/mesh.txt", "--nu", "0.3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn convergence_csv_rows_and_footer() {
    let o = fecc(&["convergence", "--levels", "4,8,16", "--nu", "0.3,0.4999"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# fecc-convergence v1");
    let header = lines[1];
    assert_eq!(
        header,
        "family,form,condensed,kappa,nu,lambda,mu,n,h,n_u,n_p,l2_u,h1_u,l2_p,residual"
    );
    let rows: Vec<&str> = lines[2..].iter().copied().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        assert_eq!(row.split(',').count(), 15, "{row}");
    }
    assert!(lines.iter().any(|l| l.starts_with("# rates")));
    assert!(lines.iter().any(|l| l.starts_with("# constants")));

    let again = fecc(&["convergence", "--levels", "4,8,16", "--nu", "0.3,0.4999"]);
    assert_eq!(again.stdout, o.stdout, "reruns must be byte-identical");
}

#[test]
fn convergence_rejects_non_doubling_levels() {
    let o = fecc(&["convergence", "--levels", "4,6", "--nu", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn infsup_and_locking_tables() {
    let o = fecc(&["infsup", "--levels", "2,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# fecc-infsup v1\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("triangles,")).count(), 2);

    let o = fecc(&["infsup", "--levels", "32"]);
    assert_eq!(o.status.code(), Some(2));

    let o = fecc(&["locking", "--n", "4", "--nu", "0.3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("# fecc-locking v1\n"));
}

/// Minimal legacy-VTK reader: point count, cell connectivity, and scalar/vector blocks.
struct Vtk {
    points: Vec<[f64; 3]>,
    cells: Vec<Vec<usize>>,
    cell_types: Vec<u32>,
    pressure: Vec<f64>,
    displacement: Vec<[f64; 3]>,
}

fn read_vtk(text: &str) -> Vtk {
    let mut tokens = text.split_whitespace().peekable();
    let mut vtk = Vtk { points: vec![], cells: vec![], cell_types: vec![], pressure: vec![], displacement: vec![] };
    let next_f = |t: &mut std::iter::Peekable<std::str::SplitWhitespace>| -> f64 { t.next().unwrap().parse().unwrap() };
    while let Some(tok) = tokens.next() {
        match tok {
            "POINTS" => {
                let n: usize = tokens.next().unwrap().parse().unwrap();
                tokens.next();
                for _ in 0..n {
                    vtk.points.push([next_f(&mut tokens), next_f(&mut tokens), next_f(&mut tokens)]);
                }
            }
            "CELLS" => {
                let n: usize = tokens.next().unwrap().parse().unwrap();
                tokens.next();
                for _ in 0..n {
                    let k: usize = tokens.next().unwrap().parse().unwrap();
                    vtk.cells.push((0..k).map(|_| tokens.next().unwrap().parse().unwrap()).collect());
                }
            }
            "CELL_TYPES" => {
                let n: usize = tokens.next().unwrap().parse().unwrap();
                vtk.cell_types = (0..n).map(|_| tokens.next().unwrap().parse().unwrap()).collect();
            }
            "VECTORS" => {
                tokens.next();
                tokens.next();
                let n = vtk.points.len();
                for _ in 0..n {
                    vtk.displacement.push([next_f(&mut tokens), next_f(&mut tokens), next_f(&mut tokens)]);
                }
            }
            "SCALARS" => {
                tokens.next();
                tokens.next();
                tokens.next();
                if tokens.peek() == Some(&"LOOKUP_TABLE") {
                    tokens.next();
                    tokens.next();
                }
                let n = vtk.cells.len();
                vtk.pressure = (0..n).map(|_| next_f(&mut tokens)).collect();
            }
            _ => {}
        }
    }
    vtk
}

#[test]
fn vtk_export_of_two_by_two_quads() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.vtk");
    let o = fecc(&["solve", "--generator", "quads", "--nx", "2", "--nu", "0.3", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# vtk DataFile Version"));
    let vtk = read_vtk(&text);
    assert_eq!(vtk.points.len(), 21);
    assert_eq!(vtk.cells.len(), 24);
    assert!(vtk.cell_types.iter().all(|&t| t == 5));
    assert!(vtk.cells.iter().all(|c| c.len() == 3 && c.iter().all(|&i| i < 21)));
    assert_eq!(vtk.pressure.len(), 24);
    assert_eq!(vtk.displacement.len(), 21);

    // Triangles tile the unit square.
    let area: f64 = vtk
        .cells
        .iter()
        .map(|c| {
            let [a, b, d] = [vtk.points[c[0]], vtk.points[c[1]], vtk.points[c[2]]];
            0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]))
        })
        .sum();
    assert!((area - 1.0).abs() < 1e-14);

    // Boundary points carry zero displacement.
    for (p, u) in vtk.points.iter().zip(&vtk.displacement) {
        let on_boundary = [p[0], p[1]].iter().any(|&c| c == 0.0 || c == 1.0);
        if on_boundary {
            assert_eq!(u[0], 0.0);
            assert_eq!(u[1], 0.0);
        }
    }
}

#[test]
fn mesh_gen_round_trips_through_solve() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let o = fecc(&[
        "mesh-gen", "--generator", "perturbed-quads", "--perturb", "0.2", "--seed", "3", "--nx", "3", "--out",
        path_str(&a),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let from_file = fecc(&["solve", "--mesh", path_str(&a), "--nu", "0.3"]);
    let generated = fecc(&[
        "solve", "--generator", "perturbed-quads", "--perturb", "0.2", "--seed", "3", "--nx", "3", "--nu", "0.3",
    ]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, generated.stdout);
}

#[test]
fn perturbation_bound_is_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let o = fecc(&["mesh-gen", "--generator", "perturbed-quads", "--perturb", "0.3", "--out", path_str(&a)]);
    assert_eq!(o.status.code(), Some(2));
}
