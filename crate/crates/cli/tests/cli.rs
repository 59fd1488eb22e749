use std::path::Path;
use std::process::{Command, Output};

fn nrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nrec")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let o = nrec(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_config(dir: &Path, scheme: &str, shapes: &str) -> std::path::PathBuf {
    let path = dir.join(format!("{scheme}.json"));
    let text = format!(
        r#"{{"shapes": {shapes}, "corpus": {{"kind": "synthetic", "rho": 0.9, "sigma": 10.0, "seed": 3}},
            "blocks_per_shape": 300, "step": 16.0, "scheme": "{scheme}", "out_dir": "{}"}}"#,
        dir.join(format!("out_{scheme}")).display()
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn shapes_list_and_dump() {
    let o = ok(&["shapes", "list"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 20);
    assert!(text.starts_with("id,box,width,height,area,r_a,type,occurrences"));
    let dir = tempfile::tempdir().unwrap();
    ok(&["shapes", "dump", "--out", p(dir.path())]);
    let pgm = std::fs::read(dir.path().join("shape03.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
    assert!(pgm.windows(2).any(|w| w == b"\n1"));
}

#[test]
fn dict_build_and_correlation_maps() {
    let o = ok(&["dict", "build", "--shape", "3"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["atom_count"], 128);
    let o = ok(&["dict", "corr", "--shape", "3", "--pos", "3,3", "--out", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 16);
    assert_eq!(text.lines().nth(3).unwrap().split(',').nth(3).unwrap(), "1.000000");
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.pgm");
    ok(&["dict", "corr", "--shape", "3", "--pos", "3,3", "--out", "pgm", "--file", p(&f)]);
    assert!(std::fs::read(&f).unwrap().starts_with(b"P5\n64 128\n255\n"));
    assert_eq!(nrec(&["dict", "corr", "--shape", "3", "--pos", "40,0"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nrec(&["dict", "build", "--shape", "99"]).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"shapes": [1], "unknown": true}"#).unwrap();
    assert_eq!(nrec(&["--config", p(&bad), "eval"]).status.code(), Some(2));
    assert_eq!(nrec(&["eval"]).status.code(), Some(2));
    let junk = dir.path().join("junk.nrtx");
    std::fs::write(&junk, b"NRTX\x08").unwrap();
    let out = dir.path().join("o.nrtx");
    let o = nrec(&["tx", "encode", "--shape", "5", "--in", p(&junk), "--step", "8", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(3));
    let missing = dir.path().join("missing.nrtx");
    let o = nrec(&["tx", "encode", "--shape", "5", "--in", p(&missing), "--step", "8", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn corpus_transform_and_inverse() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("res.nrtx");
    let coef = dir.path().join("coef.nrtx");
    let back = dir.path().join("back.nrtx");
    ok(&["corpus", "gen", "--shape", "5", "--count", "40", "--seed", "4", "--out", p(&res)]);
    ok(&["tx", "encode", "--shape", "5", "--in", p(&res), "--step", "1", "--eps", "1e-6", "--kmax", "64", "--out", p(&coef)]);
    ok(&["tx", "decode", "--shape", "5", "--in", p(&coef), "--step", "1", "--out", p(&back)]);
    let a = std::fs::read(&res).unwrap();
    let b = std::fs::read(&back).unwrap();
    assert_eq!(a.len(), b.len());
    assert_eq!(&a[..8], &b[..8]);
    // step 1 keeps every sample within a few units of the original
    let worst = a[8..]
        .chunks_exact(2)
        .zip(b[8..].chunks_exact(2))
        .map(|(x, y)| (i16::from_le_bytes([x[0], x[1]]) - i16::from_le_bytes([y[0], y[1]])).abs())
        .max()
        .unwrap();
    assert!(worst <= 4, "max sample error {worst}");
    let (tr, te) = (dir.path().join("tr.nrtx"), dir.path().join("te.nrtx"));
    ok(&["corpus", "split", "--in", p(&res), "--train", p(&tr), "--test", p(&te)]);
    assert_eq!(std::fs::read(&tr).unwrap()[6], 32);
    assert_eq!(std::fs::read(&te).unwrap()[6], 8);
}

#[test]
fn train_merge_codec_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ctf", "[5]");
    let out = dir.path().join("models");
    ok(&["--config", p(&cfg), "train", "--out", p(&out)]);
    let ctf = out.join("shape05_ctf_model.json");
    let test = out.join("shape05_test.nrtx");
    let ctm = out.join("merged.json");
    ok(&["merge", "--model", p(&ctf), "--delta", "0.001", "--out", p(&ctm)]);
    assert!(std::fs::read_to_string(&ctm).unwrap().contains("\"ctm\""));
    assert_eq!(nrec(&["merge", "--model", p(&ctm), "--out", p(&ctm)]).status.code(), Some(2));

    for adaptive in [false, true] {
        let stream = dir.path().join("s.nrec");
        let dec = dir.path().join("d.nrtx");
        let flag: &[&str] = if adaptive { &["--adaptive"] } else { &[] };
        let mut enc = vec!["codec", "encode", "--model", p(&ctm), "--in", p(&test), "--out", p(&stream)];
        enc.extend_from_slice(flag);
        ok(&enc);
        assert!(std::fs::read(&stream).unwrap().starts_with(b"NREC\x01\x05"));
        let mut dec_args = vec!["codec", "decode", "--model", p(&ctm), "--in", p(&stream), "--out", p(&dec)];
        dec_args.extend_from_slice(flag);
        ok(&dec_args);
        assert_eq!(std::fs::read(&dec).unwrap(), std::fs::read(&test).unwrap());
    }

    let (ra, rb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    ok(&["eval", "--model", p(&ctf), "--test", p(&test), "--out", p(&ra)]);
    ok(&["eval", "--model", p(&ctm), "--test", p(&test), "--out", p(&rb)]);
    let o = ok(&["compare", p(&ra), p(&rb)]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 65);
    let o = ok(&["compare", p(&ra), p(&ra)]);
    let text = String::from_utf8(o.stdout).unwrap();
    let col = text.lines().next().unwrap().split(',').position(|c| c == "delta_h").unwrap();
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(col).unwrap().parse::<f64>().unwrap() == 0.0));
}

#[test]
fn pipeline_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ctm", "[3, 5]");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["--config", p(&cfg), "eval", "--out", p(&a)]);
    ok(&["--config", p(&cfg), "eval", "--out", p(&b)]);
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 11);
    for n in names {
        assert_eq!(std::fs::read(a.join(&n)).unwrap(), std::fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
    let base = write_config(dir.path(), "baseline", "[3, 5]");
    let c = dir.path().join("c");
    ok(&["--config", p(&base), "eval", "--out", p(&c)]);
    let o = ok(&["compare", p(&c.join("positions_baseline.csv")), p(&a.join("positions_ctm.csv"))]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 1 + 128 + 64);
}

#[test]
fn sweep_writes_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ctm", "[5]");
    let out = dir.path().join("sw");
    let o = ok(&["--config", p(&cfg), "sweep", "--out", p(&out)]);
    let text = std::fs::read_to_string(out.join("sweep_ctm.csv")).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(String::from_utf8(o.stderr).unwrap().contains("winner"));
    let base = write_config(dir.path(), "baseline", "[5]");
    assert_eq!(nrec(&["--config", p(&base), "sweep"]).status.code(), Some(2));
}
