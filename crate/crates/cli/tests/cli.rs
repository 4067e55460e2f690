use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;
use varboot::io;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Runs in-process, returning (status, stdout, stderr).
fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("varboot").chain(args.iter().copied());
    let code = varboot_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn value(stdout: &str, key: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{stdout}"))
        .parse()
        .unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

#[test]
fn reparam_one_is_the_identity() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "map.csv");
    let (code, stdout, _) = run(&["reparam", "--density", "one", "--grid", "64", "--out", &out]);
    assert_eq!(code, 0);
    assert_eq!(value(&stdout, "j_star"), 1.0);
    let map = io::read_map(std::fs::File::open(&out).unwrap()).unwrap();
    assert!(map.max_deviation_from_identity() < 1e-12);
}

#[test]
fn frame_on_helix_fixture() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "frames.csv");
    let helix = fixture("helix.csv");
    let (code, _, err) = run(&["frame", "--in", helix.to_str().unwrap(), "--out", &out]);
    assert_eq!(code, 0, "{err}");
    let t = io::read_frames(std::fs::File::open(&out).unwrap()).unwrap();
    let (kappa, tau) = (t.column("kappa").unwrap(), t.column("tau").unwrap());
    let n = kappa.len();
    // Torsion needs a third derivative, whose stencil is one-sided for the
    // first and last few rows.
    for i in 5..n - 5 {
        assert!((kappa[i] - 0.5).abs() < 1e-5 && (tau[i] - 0.5).abs() < 1e-5, "row {i}: {} {}", kappa[i], tau[i]);
    }
    assert!(kappa.iter().chain(&tau).all(|v| (v - 0.5).abs() < 2e-2));
    let theta = t.column("theta").unwrap();
    // Free minimal twist on a helix: theta = -tau s.
    let s = t.column("s").unwrap();
    for i in 2..n - 2 {
        assert!((theta[i] + 0.5 * s[i]).abs() < 1e-3, "row {i}");
    }
}

#[test]
fn verify_accepts_geodesic_h2_output() {
    let dir = TempDir::new().unwrap();
    let path = p(&dir, "geo.csv");
    let (code, stdout, _) = run(&["geodesic-h2", "--q0=-1,0.5", "--q1", "2,1.5", "--out", &path]);
    assert_eq!(code, 0);
    assert!((value(&stdout, "k0") + 1.0).abs() < 1e-5);
    let (code, report, _) = run(&["verify", "--in", &path, "--trials", "200", "--seed", "4"]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(value(&report, "violations"), 0.0);
    assert_eq!(value(&report, "seed"), 4.0);
}

#[test]
fn verify_flags_a_non_optimal_path() {
    let dir = TempDir::new().unwrap();
    let path = p(&dir, "bump.csv");
    let rows: Vec<Vec<f64>> = (0..=100)
        .map(|i| {
            let t = i as f64 / 100.0;
            vec![t, t, 0.3 * (std::f64::consts::PI * t).sin()]
        })
        .collect();
    io::write_table(std::fs::File::create(&path).unwrap(), &["t", "x0", "x1"], &rows).unwrap();
    let (code, report, _) = run(&["verify", "--in", &path, "--trials", "50", "--scale", "0.01"]);
    assert_eq!(code, 3, "{report}");
    assert!(report.contains("status=fail"));
}

#[test]
fn verify_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let path = p(&dir, "r.csv");
    assert_eq!(run(&["interp-so3", "--q0", "0.1,0.2,0.3", "--q1=-0.8,0.4,1.1", "--out", &path]).0, 0);
    let a = run(&["verify", "--in", &path, "--trials", "40", "--seed", "11"]);
    let b = run(&["verify", "--in", &path, "--trials", "40", "--seed", "11"]);
    assert_eq!(a.0, 0, "{}", a.1);
    assert_eq!(a.1, b.1);
}

#[test]
fn round_trips_through_consumers() {
    let dir = TempDir::new().unwrap();
    // frame output is itself re-read; reparam output feeds verify; warp output
    // feeds warp again; euler-top output feeds verify.
    let map = p(&dir, "map.csv");
    assert_eq!(run(&["reparam", "--density", "quadratic", "--out", &map]).0, 0);
    let (code, report, _) = run(&["verify", "--in", &map, "--density", "quadratic", "--trials", "50"]);
    assert_eq!(code, 0, "{report}");

    let path = p(&dir, "path.csv");
    let rows: Vec<Vec<f64>> = (0..=200)
        .map(|i| {
            let t = i as f64 / 200.0;
            vec![t, t * t, (2.0 * t).sin(), 0.5 * t]
        })
        .collect();
    io::write_table(std::fs::File::create(&path).unwrap(), &["t", "x0", "x1", "x2"], &rows).unwrap();
    let warped = p(&dir, "warped.csv");
    let again = p(&dir, "again.csv");
    let map2 = p(&dir, "map2.csv");
    assert_eq!(run(&["warp", "--in", &path, "--out", &warped, "--map-out", &map2]).0, 0);
    let (code, stdout, _) = run(&["warp", "--in", &warped, "--out", &again]);
    assert_eq!(code, 0);
    assert!(value(&stdout, "max_deviation_from_identity") < 1e-2);
    assert!(io::read_map(std::fs::File::open(&map2).unwrap()).is_ok());

    let top = p(&dir, "top.csv");
    let (code, stdout, _) = run(&["euler-top", "--inertia", "1,2,3", "--omega", "0.3,1,0.2", "--duration", "2", "--out", &top]);
    assert_eq!(code, 0);
    assert!(value(&stdout, "energy_drift") < 1e-8);
    let (code, report, _) = run(&["verify", "--in", &top, "--inertia", "1,2,3", "--trials", "50"]);
    assert_eq!(code, 0, "{report}");
    assert!(io::read_body_velocity(std::fs::File::open(&top).unwrap()).is_ok());
}

#[test]
fn joint_and_interp_and_ansatz_run() {
    let dir = TempDir::new().unwrap();
    let bent = fixture("bent.csv");
    let out = p(&dir, "joint.csv");
    let (code, _, err) = run(&["joint", "--in", bent.to_str().unwrap(), "--r", "0.5", "--out", &out]);
    assert_eq!(code, 0, "{err}");
    let t = io::read_table(std::fs::File::open(&out).unwrap(), io::HeaderSpec::Exact(&["t", "s", "sdot", "theta", "dtheta"])).unwrap();
    assert_eq!(t.rows.len(), 201);
    assert!(t.col(2).iter().all(|v| *v > 0.0));

    let se3 = p(&dir, "se3.csv");
    let (code, stdout, _) = run(&["interp-se3", "--q0", "0,0,0,0,0,0", "--q1", "0,0,1.5,1,0,1", "--out", &se3]);
    assert_eq!(code, 0);
    assert!(value(&stdout, "midpoint_offset_from_chord") > 0.1);
    let direct = p(&dir, "direct.csv");
    let (code, stdout, _) = run(&["interp-pose", "--q0", "0,0,0,0,0,0", "--q1", "0,0,1.5,1,0,1", "--out", &direct]);
    assert_eq!(code, 0);
    assert!(value(&stdout, "midpoint_offset_from_chord") < 1e-12);

    let (code, stdout, _) = run(&["ansatz-h2", "--q0=-1,0.5", "--q1", "2,1.5"]);
    assert_eq!(code, 0);
    assert!(value(&stdout, "excess") > 0.0);
    let (code, _, err) = run(&["ansatz-h2", "--q0", "0,1", "--q1", "2,1"]);
    assert_eq!(code, 2);
    assert!(err.contains("equal height"), "{err}");
}

#[test]
fn validation_errors_exit_2_and_name_the_cell() {
    let dir = TempDir::new().unwrap();
    let bad = p(&dir, "bad.csv");
    std::fs::write(&bad, "s,x,y,z\n0,0,0,0\n1,1,oops,0\n").unwrap();
    let (code, _, err) = run(&["frame", "--in", &bad, "--out", &p(&dir, "f.csv")]);
    assert_eq!(code, 2);
    assert!(err.contains("row 3") && err.contains("column 3"), "{err}");

    let (code, _, _) = run(&["reparam", "--density", "nosuch", "--out", &p(&dir, "m.csv")]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["reparam", "--density", "one", "--grid", "1", "--out", &p(&dir, "m.csv")]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["joint", "--in", &bad, "--r", "0", "--out", &p(&dir, "j.csv")]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["no-such-command"]);
    assert_eq!(code, 2);
}

#[test]
fn binary_reports_exit_status() {
    let dir = TempDir::new().unwrap();
    let map = p(&dir, "map.csv");
    let st = Command::new(env!("CARGO_BIN_EXE_varboot"))
        .args(["reparam", "--density", "one", "--out", &map])
        .output()
        .unwrap();
    assert!(st.status.success());
    assert!(String::from_utf8_lossy(&st.stdout).contains("j_star=1.0000000000000000e0"));
    let st = Command::new(env!("CARGO_BIN_EXE_varboot")).args(["frame", "--in", "missing.csv", "--out", &map]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
}
