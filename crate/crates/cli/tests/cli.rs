use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use selfception::raster::{load_image, save_image};
use selfception::{LabelMap, RgbImage};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_selfception"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn selfception")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_gradient(dir: &Path) -> PathBuf {
    let img = RgbImage::from_fn(64, 48, |x, y| [(x * 4) as u8, (y * 5) as u8, ((x + y) * 2) as u8]).unwrap();
    let path = dir.join("in.png");
    save_image(&img, &path).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["requested_k", "achieved_regions", "mse", "elapsed_ms"]
    );
    r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect()
}

#[test]
fn single_run_writes_output_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_gradient(dir.path());
    let output = dir.path().join("out.png");
    let out = run(&["--input", s(&input), "--output", s(&output), "--k", "20"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 1, "{text}");
    assert!(lines[0].starts_with("regions=") && lines[0].contains(" mse="), "{text}");
    assert_eq!(load_image(&output).unwrap().dimensions(), (64, 48));
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.png");
    let out = run(&["--input", s(&missing), "--output", s(&dir.path().join("o.png")), "--k", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("absent.png"), "{}", stderr(&out));
}

#[test]
fn bad_parameters_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_gradient(dir.path());
    let o = dir.path().join("o.png");
    for extra in [
        &["--k", "0"][..],
        &["--k", "10", "--compactness", "-1"],
        &["--k", "10", "--frames", "f", "--frame-stride", "0"],
        &["--k", "ten"],
        &["--k", "5", "--paper-preset", "chelsea"],
    ] {
        let mut args = vec!["--input", s(&input), "--output", s(&o)];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{extra:?}: {}", stderr(&out));
    }
}

#[test]
fn help_lists_defaults() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for needle in ["--paper-preset", "--compactness", "[default: 10]", "segment-mean"] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn sweep_writes_one_row_per_k() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_gradient(dir.path());
    let output = dir.path().join("out.png");
    let report = dir.path().join("r.csv");
    let out = run(&[
        "--input", s(&input), "--output", s(&output), "--k", "40,10,20", "--report", s(&report),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 3);
    let rows = read_rows(&report);
    let ks: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ks, [10, 20, 40]);
    for r in &rows {
        let mse: f64 = r[2].parse().unwrap();
        assert!(mse.is_finite() && mse >= 0.0);
        assert!(r[1].parse::<usize>().unwrap() >= 1);
    }
    for k in ks {
        assert!(dir.path().join(format!("out_k{k}.png")).exists());
    }
}

#[test]
fn constant_image_reproduces_itself_for_every_k() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.ppm");
    save_image(&RgbImage::filled(40, 30, [90, 10, 220]).unwrap(), &input).unwrap();
    let report = dir.path().join("r.csv");
    let out = run(&[
        "--input", s(&input), "--output", s(&dir.path().join("o.ppm")),
        "--k", "1,8,50", "--report", s(&report), "--no-timings",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    for r in read_rows(&report) {
        assert!(r[2].parse::<f64>().unwrap() <= 1.0, "{r:?}");
        assert_eq!(r[3], "0");
    }
}

#[test]
fn dumps_are_written_and_parse() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_gradient(dir.path());
    let output = dir.path().join("out.png");
    let out = run(&[
        "--input", s(&input), "--output", s(&output), "--k", "15", "--dump-labels", "--dump-ellipses",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let bytes = std::fs::read(dir.path().join("out.labels.bin")).unwrap();
    let map = LabelMap::from_le_bytes(&bytes).unwrap();
    assert_eq!((map.width(), map.height()), (64, 48));
    let regions: usize = stdout(&out)
        .trim()
        .strip_prefix("regions=")
        .and_then(|t| t.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(map.region_count(), regions);
    for name in ["out.segments.png", "out.ellipses.png"] {
        assert_eq!(load_image(dir.path().join(name)).unwrap().dimensions(), (64, 48));
    }
}

#[test]
fn frames_land_in_the_directory() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_gradient(dir.path());
    let frames = dir.path().join("frames");
    let out = run(&[
        "--input", s(&input), "--output", s(&dir.path().join("o.png")), "--k", "30",
        "--frames", s(&frames), "--frame-stride", "5",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(frames.join("frame_000001.png").exists());
}

#[test]
fn rendering_flags_change_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_gradient(dir.path());
    let render = |name: &str, extra: &[&str]| {
        let output = dir.path().join(name);
        let mut args = vec!["--input", s(&input), "--output", s(&output), "--k", "12"];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert!(out.status.success(), "{extra:?}: {}", stderr(&out));
        load_image(&output).unwrap()
    };
    let plain = render("plain.png", &[]);
    assert_ne!(plain, render("rot.png", &["--rotated"]));
    assert_ne!(plain, render("black.png", &["--background", "black"]));
    assert_eq!(render("noclip.png", &["--no-clip"]).dimensions(), (64, 48));
}
