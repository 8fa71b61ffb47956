use std::fs;
use std::path::{Path, PathBuf};

use boxperturb::cli::{read_csv_records, run, EXIT_DATA, EXIT_OK, EXIT_USAGE, PERTURB_HEADER};
use boxperturb::data::{read_f32_grid, read_manifest, write_f32_grid, write_mask_pgm, F32Grid};
use boxperturb::geometry::{BinaryMask, Grid};
use boxperturb::toyseg::ToyModel;

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("boxperturb").chain(args.iter().copied()))
}

fn mask_file(dir: &Path, name: &str, w: usize, h: usize, on: &[(usize, usize)]) -> PathBuf {
    let mut m = BinaryMask::filled(w, h, false).unwrap();
    for &(r, c) in on {
        m.set(r, c, true);
    }
    let p = dir.join(name);
    write_mask_pgm(&p, &m).unwrap();
    p
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn gen_writes_pairs_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for d in [&a, &b] {
        assert_eq!(cli(&["gen", "--suite", "standard", "--n", "10", "--grid", "32", "--seed", "3", "--out-dir", &s(d)]), EXIT_OK);
    }
    let files: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(files.iter().filter(|f| f.ends_with(".f32g")).count(), 10);
    assert_eq!(files.iter().filter(|f| f.ends_with(".pgm")).count(), 10);
    assert_eq!(files.len(), 21);
    let m = read_manifest(&a).unwrap();
    assert_eq!((m.train.len(), m.val.len(), m.test.len()), (8, 1, 1));
    for f in files {
        assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap(), "{f}");
    }
}

#[test]
fn gen_rejects_bad_request_without_leaving_output() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("none");
    assert_ne!(cli(&["gen", "--suite", "tiny", "--n", "3", "--grid", "64", "--out-dir", &s(&d)]), EXIT_OK);
    assert!(!d.exists());
}

#[test]
fn eval_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let gt = mask_file(t, "gt.pgm", 16, 16, &[(4, 4), (4, 5), (5, 4), (5, 5)]);
    let far = mask_file(t, "far.pgm", 16, 16, &[(12, 12)]);
    let out = t.join("e.json");

    assert_eq!(cli(&["eval", "--gt", &s(&gt), "--pred", &s(&gt), "--out", &s(&out)]), EXIT_OK);
    let v = json(&out);
    assert_eq!((v["dsc"].as_f64(), v["nsd"].as_f64()), (Some(1.0), Some(1.0)));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["gt_pixels"], 4);

    assert_eq!(cli(&["eval", "--gt", &s(&gt), "--pred", &s(&far), "--out", &s(&out)]), EXIT_OK);
    assert_eq!(json(&out)["dsc"].as_f64(), Some(0.0));
    assert_eq!(json(&out)["pred_pixels"], 1);

    // Two single pixels two columns apart.
    let p = mask_file(t, "p.pgm", 16, 16, &[(5, 5)]);
    let q = mask_file(t, "q.pgm", 16, 16, &[(5, 7)]);
    for (tau, nsd) in [("2", 1.0), ("1.5", 0.0)] {
        assert_eq!(cli(&["eval", "--gt", &s(&p), "--pred", &s(&q), "--tau", tau, "--out", &s(&out)]), EXIT_OK);
        assert_eq!(json(&out)["nsd"].as_f64(), Some(nsd), "tau {tau}");
    }
}

#[test]
fn eval_dimension_mismatch_is_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let a = mask_file(tmp.path(), "a.pgm", 8, 8, &[(1, 1)]);
    let b = mask_file(tmp.path(), "b.pgm", 9, 8, &[(1, 1)]);
    let out = tmp.path().join("e.json");
    assert_eq!(cli(&["eval", "--gt", &s(&a), "--pred", &s(&b), "--out", &s(&out)]), EXIT_DATA);
    assert!(!out.exists());
}

#[test]
fn perturb_csv_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let on: Vec<_> = (10..20).flat_map(|r| (5..45).map(move |c| (r, c))).collect();
    let mask = mask_file(t, "m.pgm", 64, 64, &on);

    let zero = t.join("zero.ini");
    fs::write(&zero, "eps_shrink = 0\ndelta_expand = 0\n").unwrap();
    let out = t.join("zero.csv");
    assert_eq!(cli(&["perturb", "--mask", &s(&mask), "--config", &s(&zero), "--n", "20", "--seed", "1", "--out", &s(&out)]), EXIT_OK);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# schema_version = 1\n"));
    assert!(text.contains("# eps_shrink = 0\n"));
    let (header, rows) = read_csv_records(&text).unwrap();
    assert_eq!(header, PERTURB_HEADER);
    assert_eq!(rows.len(), 20);
    for r in &rows {
        assert_eq!(&r[1..5], ["5", "10", "45", "20"]);
    }

    let a = t.join("a.csv");
    let b = t.join("b.csv");
    for p in [&a, &b] {
        assert_eq!(cli(&["perturb", "--mask", &s(&mask), "--n", "200", "--seed", "9", "--out", &s(p)]), EXIT_OK);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn perturb_stats_line_tracks_aspect() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let on: Vec<_> = (100..150).flat_map(|r| (100..200).map(move |c| (r, c))).collect();
    let mask = mask_file(t, "m.pgm", 512, 512, &on);
    let out = t.join("s.csv");
    assert_eq!(cli(&["perturb", "--mask", &s(&mask), "--n", "100000", "--seed", "4", "--stats", "--out", &s(&out)]), EXIT_OK);
    let text = fs::read_to_string(&out).unwrap();
    let stats = text.lines().find(|l| l.starts_with("# stats")).unwrap();
    let aspect: f64 = stats.rsplit("aspect=").next().unwrap().parse().unwrap();
    assert!((aspect - 2.0).abs() < 0.02, "{aspect}");
}

#[test]
fn perturb_empty_mask_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let mask = mask_file(tmp.path(), "m.pgm", 8, 8, &[]);
    let out = tmp.path().join("o.csv");
    assert_eq!(cli(&["perturb", "--mask", &s(&mask), "--n", "3", "--out", &s(&out)]), EXIT_DATA);
    assert!(!out.exists());
}

#[test]
fn train_outputs_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let data = t.join("data");
    assert_eq!(cli(&["gen", "--suite", "standard", "--n", "20", "--grid", "48", "--seed", "2", "--out-dir", &s(&data)]), EXIT_OK);

    let one = t.join("one.ini");
    fs::write(&one, "epochs = 1\n").unwrap();
    let (m, h) = (t.join("m.json"), t.join("h.csv"));
    assert_eq!(cli(&["train", "--data-dir", &s(&data), "--config", &s(&one), "--out", &s(&m), "--history", &s(&h)]), EXIT_OK);
    let (header, rows) = read_csv_records(&fs::read_to_string(&h).unwrap()).unwrap();
    assert_eq!(header, ["epoch", "train_loss", "val_loss", "lr"]);
    assert_eq!(rows.len(), 1);

    let none = t.join("none.ini");
    fs::write(&none, "epochs = 5\nperturber = none\nseed = 8\n").unwrap();
    let (m1, m2) = (t.join("m1.json"), t.join("m2.json"));
    for m in [&m1, &m2] {
        assert_eq!(cli(&["train", "--data-dir", &s(&data), "--config", &s(&none), "--out", &s(m), "--history", &s(&h)]), EXIT_OK);
    }
    assert_eq!(fs::read(&m1).unwrap(), fs::read(&m2).unwrap());
    let (model, echo) = ToyModel::load(&m1).unwrap();
    assert!(model.is_finite());
    assert_eq!(echo["perturber"], "none");

    let text = fs::read_to_string(&h).unwrap();
    let initial: f64 = text.lines().find_map(|l| l.strip_prefix("# initial_val_loss = ")).unwrap().parse().unwrap();
    let (_, rows) = read_csv_records(&text).unwrap();
    let last: f64 = rows.last().unwrap()[2].parse().unwrap();
    assert!(last < initial, "{last} >= {initial}");
}

#[test]
fn train_on_missing_data_dir_is_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let m = tmp.path().join("m.json");
    let h = tmp.path().join("h.csv");
    assert_eq!(cli(&["train", "--data-dir", &s(&tmp.path().join("nope")), "--out", &s(&m), "--history", &s(&h)]), EXIT_DATA);
    assert!(!m.exists() && !h.exists());
}

#[test]
fn bad_config_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.ini");
    fs::write(&cfg, "learning_rate = 3\n").unwrap();
    let mask = mask_file(tmp.path(), "m.pgm", 8, 8, &[(2, 2)]);
    let out = tmp.path().join("o.csv");
    assert_eq!(cli(&["perturb", "--mask", &s(&mask), "--config", &s(&cfg), "--n", "3", "--out", &s(&out)]), EXIT_USAGE);
}

#[test]
fn ablate_small_and_missing_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let data = t.join("data");
    let out = t.join("abl.csv");
    assert_eq!(cli(&["gen", "--suite", "standard", "--n", "20", "--grid", "48", "--out-dir", &s(&data.join("standard"))]), EXIT_OK);
    assert_eq!(cli(&["ablate", "--data-dir", &s(&data), "--out", &s(&out)]), EXIT_DATA);
    assert!(!out.exists());

    assert_eq!(cli(&["gen", "--suite", "tiny", "--n", "20", "--grid", "64", "--out-dir", &s(&data.join("tiny"))]), EXIT_OK);
    let cfg = t.join("c.ini");
    fs::write(&cfg, "epochs = 2\n").unwrap();
    assert_eq!(cli(&["ablate", "--data-dir", &s(&data), "--config", &s(&cfg), "--out", &s(&out), "--error-dsc-threshold", "0.6"]), EXIT_OK);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# error_dsc_threshold = 0.6\n"));
    assert!(text.contains("with DSC < 0.6\n"));
    let (header, rows) = read_csv_records(&text).unwrap();
    assert_eq!(header[0], "row");
    let names: Vec<_> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["baseline", "+theta_xi", "+bidirectional", "full"]);
    for r in &rows {
        for v in &r[1..8] {
            let v: f64 = v.parse().unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }
}

#[test]
fn preprocess_window_and_resize() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let raw: F32Grid = Grid::from_vec(3, 2, vec![-360.0, 40.0, 440.0, -1000.0, 400.0, 1200.0]).unwrap();
    let input = t.join("ct.f32g");
    write_f32_grid(&input, &raw).unwrap();

    let out = t.join("w.f32g");
    assert_eq!(cli(&["preprocess", "--in", &s(&input), "--window", "-360", "440", "--out", &s(&out)]), EXIT_OK);
    let w = read_f32_grid(&out).unwrap();
    assert_eq!(w.dims(), (3, 2));
    assert_eq!(&w.as_slice()[..3], [0.0, 0.5, 1.0]);

    assert_eq!(cli(&["preprocess", "--in", &s(&input), "--window", "-1000", "400", "--out", &s(&out)]), EXIT_OK);
    assert_eq!(*read_f32_grid(&out).unwrap().get(1, 0), 0.0);

    assert_eq!(cli(&["preprocess", "--in", &s(&input), "--window", "-360", "440", "--resize", "6", "4", "--out", &s(&out)]), EXIT_OK);
    assert_eq!(read_f32_grid(&out).unwrap().dims(), (6, 4));

    let bad = t.join("bad.f32g");
    fs::write(&bad, b"nope").unwrap();
    let out2 = t.join("o2.f32g");
    assert_eq!(cli(&["preprocess", "--in", &s(&bad), "--window", "0", "1", "--out", &s(&out2)]), EXIT_DATA);
    assert_eq!(cli(&["preprocess", "--in", &s(&input), "--window", "5", "5", "--out", &s(&out2)]), EXIT_DATA);
    assert!(!out2.exists());
}
