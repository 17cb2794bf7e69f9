use fanbeam_tt::fiber::BasisElement;
use fanbeam_tt::forward::{xray, QuadratureSpec};
use fanbeam_tt::{io, phantoms};
use fanbeam_tt::{Basis, ImageGrid, SinoGrid, TensorField, C64};
use std::path::Path;
use std::process::{Command, Output};

fn fbtt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbtt"))
        .args(args)
        .output()
        .expect("run fbtt")
}

fn ok(args: &[&str]) -> Output {
    let out = fbtt(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn relative(report: &[u8]) -> f64 {
    let text = String::from_utf8_lossy(report);
    let line = text.lines().nth(1).expect("report row");
    line.split(',').nth(2).unwrap().parse().unwrap()
}

#[test]
fn pipeline_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.tfld");
    let d = dir.path().join("d.fbsg");
    let g = dir.path().join("g.tfld");
    let dg = dir.path().join("dg.fbsg");
    ok(&[
        "phantom",
        "--preset",
        "1",
        "--out",
        s(&t),
        "--nx",
        "128",
        "--ny",
        "128",
    ]);
    ok(&[
        "forward",
        "--in",
        s(&t),
        "--out",
        s(&d),
        "--nbeta",
        "256",
        "--nalpha",
        "128",
    ]);
    ok(&["reconstruct", "--in", s(&d), "--order", "2", "--out", s(&g)]);
    ok(&[
        "forward",
        "--in",
        s(&g),
        "--out",
        s(&dg),
        "--nbeta",
        "256",
        "--nalpha",
        "128",
    ]);
    let out = ok(&[
        "diff",
        "--a",
        s(&d),
        "--b",
        s(&dg),
        "--norm",
        "l2",
        "--report",
        "-",
    ]);
    let rel = relative(&out.stdout);
    assert!(rel < 0.03, "relative l2 {rel}");
    let tensor = io::read_tensor(&g).unwrap();
    assert_eq!(tensor.order(), 2);
    assert!(tensor.is_real());
}

#[test]
fn odd_reconstruction_writes_potential() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.tfld");
    let pot = dir.path().join("p.dimg");
    let d = dir.path().join("d.fbsg");
    let g = dir.path().join("g.tfld");
    let rp = dir.path().join("rp.dimg");
    ok(&[
        "phantom",
        "--preset",
        "2",
        "--out",
        s(&t),
        "--nx",
        "64",
        "--ny",
        "64",
        "--potential",
        s(&pot),
    ]);
    ok(&[
        "forward",
        "--in",
        s(&t),
        "--out",
        s(&d),
        "--nbeta",
        "128",
        "--nalpha",
        "64",
    ]);
    ok(&[
        "reconstruct",
        "--in",
        s(&d),
        "--order",
        "1",
        "--out",
        s(&g),
        "--potential",
        s(&rp),
    ]);
    let out = ok(&["diff", "--a", s(&pot), "--b", s(&rp), "--report", "-"]);
    assert!(relative(&out.stdout) < 0.1);
    let out = fbtt(&[
        "reconstruct",
        "--in",
        s(&d),
        "--order",
        "2",
        "--out",
        s(&g),
        "--potential",
        s(&rp),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = fbtt(&[
        "phantom",
        "--preset",
        "1",
        "--out",
        s(&t),
        "--potential",
        s(&pot),
        "--nx",
        "8",
        "--ny",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn moments_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.tfld");
    let d = dir.path().join("d.fbsg");
    let bad = dir.path().join("bad.fbsg");
    let report = dir.path().join("r.csv");
    ok(&[
        "phantom",
        "--preset",
        "1",
        "--out",
        s(&t),
        "--nx",
        "128",
        "--ny",
        "128",
    ]);
    ok(&[
        "forward",
        "--in",
        s(&t),
        "--out",
        s(&d),
        "--nbeta",
        "128",
        "--nalpha",
        "64",
    ]);
    let out = fbtt(&[
        "moments",
        "--in",
        s(&d),
        "--nmax",
        "3",
        "--kmax",
        "8",
        "--order",
        "2",
        "--report",
        s(&report),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(&report).unwrap();
    assert!(csv.starts_with("tag,p_or_n,q_or_k,residual\n"));
    let image = ImageGrid::new(96, 96, 1.0).unwrap();
    let f = phantoms::gaussian(image, (0.1, -0.2), 0.15, 1.0).unwrap();
    let quad = QuadratureSpec::new(256.0, image).unwrap();
    let data = xray(
        &TensorField::scalar(f),
        SinoGrid::new(128, 64).unwrap(),
        &quad,
    );
    let clean = dir.path().join("clean.fbsg");
    io::write_sinogram(&data, &clean).unwrap();
    let out = fbtt(&["moments", "--in", s(&clean), "--nmax", "3", "--kmax", "8"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let spike = BasisElement::new(Basis::UPrime, 4, 3)
        .unwrap()
        .hat(data.grid());
    let corrupted = data.axpy(C64::new(0.5 * data.norm(), 0.0), &spike).unwrap();
    io::write_sinogram(&corrupted, &bad).unwrap();
    let out = fbtt(&["moments", "--in", s(&bad), "--nmax", "3", "--kmax", "8"]);
    assert_eq!(out.status.code(), Some(1));
    let out = fbtt(&["moments", "--in", s(&d), "--nmax", "3", "--kmax", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn deterministic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.tfld");
    ok(&[
        "phantom",
        "--preset",
        "3",
        "--out",
        s(&t),
        "--nx",
        "48",
        "--ny",
        "48",
    ]);
    let mut files = Vec::new();
    for (i, threads) in ["1", "2", "1"].iter().enumerate() {
        let d = dir.path().join(format!("d{i}.fbsg"));
        let g = dir.path().join(format!("g{i}.tfld"));
        ok(&[
            "--threads",
            threads,
            "forward",
            "--in",
            s(&t),
            "--out",
            s(&d),
            "--nbeta",
            "64",
            "--nalpha",
            "32",
            "--noise",
            "0.01",
            "--seed",
            "7",
        ]);
        ok(&[
            "--threads",
            threads,
            "reconstruct",
            "--in",
            s(&d),
            "--order",
            "3",
            "--out",
            s(&g),
        ]);
        files.push((std::fs::read(&d).unwrap(), std::fs::read(&g).unwrap()));
    }
    assert!(files.windows(2).all(|w| w[0] == w[1]));
    let d = dir.path().join("other.fbsg");
    ok(&[
        "forward",
        "--in",
        s(&t),
        "--out",
        s(&d),
        "--nbeta",
        "64",
        "--nalpha",
        "32",
        "--noise",
        "0.01",
        "--seed",
        "8",
    ]);
    assert_ne!(std::fs::read(&d).unwrap(), files[0].0);
    let noisy = io::read_sinogram(dir.path().join("d0.fbsg")).unwrap();
    assert!(noisy.values().iter().all(|v| v.im == 0.0));
}

#[test]
fn project_coeffs_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.tfld");
    let d = dir.path().join("d.fbsg");
    let p = dir.path().join("p.fbsg");
    let pgm = dir.path().join("d.pgm");
    ok(&[
        "phantom",
        "--preset",
        "1",
        "--out",
        s(&t),
        "--nx",
        "48",
        "--ny",
        "48",
    ]);
    ok(&[
        "forward",
        "--in",
        s(&t),
        "--out",
        s(&d),
        "--nbeta",
        "64",
        "--nalpha",
        "32",
        "--noise",
        "0.05",
        "--seed",
        "1",
    ]);
    for range in ["i0", "iperp-core", "v+", "v-"] {
        ok(&["project", "--in", s(&d), "--range", range, "--out", s(&p)]);
    }
    ok(&["project", "--in", s(&d), "--range", "v+", "--out", s(&p)]);
    let q = dir.path().join("q.fbsg");
    ok(&["project", "--in", s(&p), "--range", "v+", "--out", s(&q)]);
    let out = ok(&["diff", "--a", s(&p), "--b", s(&q), "--norm", "linf"]);
    assert!(relative(&out.stdout) < 1e-12);
    let out = ok(&["coeffs", "--in", s(&d), "--basis", "u'", "--out", "-"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("family,p,q,re,im\nu',"));
    assert_eq!(
        fbtt(&["coeffs", "--in", s(&d), "--basis", "w", "--out", "-"])
            .status
            .code(),
        Some(2)
    );
    ok(&[
        "render",
        "--in",
        s(&d),
        "--channel",
        "abs",
        "--out",
        s(&pgm),
    ]);
    let bytes = std::fs::read(&pgm).unwrap();
    assert!(bytes.starts_with(b"P5\n32 64\n65535\n"));
    assert_eq!(bytes.len(), b"P5\n32 64\n65535\n".len() + 2 * 64 * 32);
    let side = std::fs::read_to_string(dir.path().join("d.pgm.txt")).unwrap();
    assert!(side.starts_with("channel abs\nmin "));
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.fbsg");
    std::fs::write(&junk, b"FBSG1\n4 2\nshort").unwrap();
    let out = dir.path().join("o.fbsg");
    assert_eq!(
        fbtt(&[
            "project",
            "--in",
            s(&junk),
            "--range",
            "v+",
            "--out",
            s(&out)
        ])
        .status
        .code(),
        Some(3)
    );
    let missing = dir.path().join("missing.fbsg");
    assert_eq!(
        fbtt(&[
            "project",
            "--in",
            s(&missing),
            "--range",
            "v+",
            "--out",
            s(&out)
        ])
        .status
        .code(),
        Some(3)
    );
    assert_eq!(fbtt(&["nonsense"]).status.code(), Some(2));
    assert_eq!(
        fbtt(&["project", "--in", s(&junk), "--range", "w"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fbtt(&["phantom", "--preset", "4", "--out", s(&out)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fbtt(&[
            "--threads",
            "0",
            "phantom",
            "--preset",
            "1",
            "--out",
            s(&out)
        ])
        .status
        .code(),
        Some(2)
    );
}
