use std::path::Path;
use std::process::{Command, Output};

use prodmap::evaluate::geodesic_errors;
use prodmap::maps::PointMap;
use prodmap::mesh::Shape;
use prodmap::synthetic::{curve_pair, sparse_seeds};

fn prodmap(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_prodmap")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "prodmap {args:?} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn assemble_band_refine_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (m, n, gt) = curve_pair(80).unwrap();
    std::fs::write(d.join("m.poly"), m.to_polyline()).unwrap();
    std::fs::write(d.join("n.poly"), n.to_polyline()).unwrap();
    gt.save(d.join("gt.map")).unwrap();
    sparse_seeds(&gt, 8).save(d.join("seeds.map")).unwrap();
    let (mm, mn) = (p(d, "m.poly"), p(d, "n.poly"));

    prodmap(&["assemble", &mm, "--out", &p(d, "m")]);
    prodmap(&["eigs", "--stiffness", &p(d, "m.W.txt"), "--mass", &p(d, "m.S.txt"), "-k", "6", "--out", &p(d, "m.eig")]);
    prodmap(&["band", &mm, &mn, &p(d, "seeds.map"), "--area-fraction", "0.2", "--out", &p(d, "band.patch")]);
    prodmap(&[
        "product-eigs", &mm, &mn, "--scheme", "full", "--patch", &p(d, "band.patch"), "-k", "10", "--out", &p(d, "patch.eig"),
    ]);
    prodmap(&["refine", &mm, &mn, &p(d, "seeds.map"), "--gt", &p(d, "gt.map"), "--out", &p(d, "out.map"), "--trace", &p(d, "trace.csv")]);
    prodmap(&["eval", &p(d, "out.map"), &p(d, "gt.map"), &mn, "--out", &p(d, "curve.csv")]);

    let out = PointMap::load(d.join("out.map"), 80).unwrap();
    let shape_n = Shape::Curve(n);
    assert!(out.is_total());
    let err = geodesic_errors(&out, &gt, &shape_n).unwrap().mean().unwrap();
    assert!(err < 0.01, "mean error {err}");

    let manifest = std::fs::read_to_string(d.join("out.map.manifest")).unwrap();
    assert!(manifest.contains("t_max"), "{manifest}");
    let curve = std::fs::read_to_string(d.join("curve.csv")).unwrap();
    assert!(curve.lines().any(|l| l.starts_with("threshold,fraction")));
    for f in ["m.eig", "patch.eig", "trace.csv", "band.patch"] {
        assert!(d.join(f).exists(), "{f} missing");
    }
}

#[test]
fn map_conversion_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (m, n, gt) = curve_pair(40).unwrap();
    std::fs::write(d.join("m.poly"), m.to_polyline()).unwrap();
    std::fs::write(d.join("n.poly"), n.to_polyline()).unwrap();
    gt.save(d.join("gt.map")).unwrap();
    let (mm, mn) = (p(d, "m.poly"), p(d, "n.poly"));
    let common = ["--mesh-m", mm.as_str(), "--mesh-n", mn.as_str()];

    let mut args = vec!["map-convert", "--from", "pointmap", "--to", "density"];
    let (gtp, dens, back) = (p(d, "gt.map"), p(d, "mu.txt"), p(d, "back.map"));
    args.extend(common);
    args.extend([gtp.as_str(), "--out", dens.as_str()]);
    prodmap(&args);
    let mut args = vec!["map-convert", "--from", "density", "--to", "pointmap"];
    args.extend(common);
    args.extend([dens.as_str(), "--out", back.as_str()]);
    prodmap(&args);
    assert_eq!(PointMap::load(&back, 40).unwrap(), gt);
}

#[test]
fn cached_eigs_reproduce_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (m, _, _) = curve_pair(60).unwrap();
    std::fs::write(d.join("m.poly"), m.to_polyline()).unwrap();
    let (mm, cache) = (p(d, "m.poly"), p(d, "cache"));
    prodmap(&["eigs", "--mesh", &mm, "-k", "5", "--eigs-cache", &cache, "--out", &p(d, "a.eig")]);
    prodmap(&["eigs", "--mesh", &mm, "-k", "5", "--eigs-cache", &cache, "--out", &p(d, "b.eig")]);
    assert_eq!(std::fs::read(d.join("a.eig")).unwrap(), std::fs::read(d.join("b.eig")).unwrap());
    assert_eq!(std::fs::read_dir(d.join("cache")).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "eig")).count(), 1);
}

#[test]
fn bad_input_reports_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.poly"), "0 0\n1 0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_prodmap"))
        .args(["eigs", "--mesh", &p(dir.path(), "bad.poly"), "--out", &p(dir.path(), "x.eig")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}
