use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use denovo_cli::{cmd_evaluate, parse_annotations, CliError, RunArgs, RunConfig, TSV_HEADER};

fn denovo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_denovo")).args(args).output().expect("run binary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn synth(dir: &Path, peptides: &[&str]) -> (String, String) {
    let ann = dir.join("ann.tsv");
    let mut args = vec!["synth", "--annotations", ann.to_str().unwrap()];
    args.extend_from_slice(peptides);
    let out = denovo(&args);
    assert!(out.status.success());
    let mgf = dir.join("in.mgf");
    fs::write(&mgf, stdout(&out)).unwrap();
    (mgf.to_str().unwrap().to_string(), ann.to_str().unwrap().to_string())
}

#[test]
fn sequence_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let (mgf, ann) = synth(dir.path(), &["PEPTIDEK", "VEALR"]);
    let pred = dir.path().join("pred.tsv");
    let out = denovo(&["sequence", &mgf, "--uniform-score", "--n-out", "3", "--out", pred.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tsv = fs::read_to_string(&pred).unwrap();
    let mut lines = tsv.lines();
    assert_eq!(lines.next(), Some(TSV_HEADER));
    let first: Vec<&str> = lines.next().unwrap().split('\t').collect();
    assert_eq!(first.len(), 6);
    assert_eq!(&first[..2], ["synth_0", "1"]);
    assert!(tsv.lines().filter(|l| l.starts_with("synth_0\t")).count() <= 3);

    let eval = denovo(&["evaluate", pred.to_str().unwrap(), &ann]);
    assert!(eval.status.success());
    let table = stdout(&eval);
    assert!(table.starts_with("spectrum_id\taccuracy@1\trecall@1"));
    let mean: Vec<f64> = table.lines().last().unwrap().split('\t').skip(1).map(|v| v.parse().unwrap()).collect();
    assert_eq!(mean.len(), 8);
    assert!(mean.iter().all(|&v| v == 1.0), "{table}");
}

#[test]
fn top_candidates_for_clean_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let (mgf, _) = synth(dir.path(), &["PEPTLDEK", "VEALR"]);
    let out = stdout(&denovo(&["sequence", &mgf, "--uniform-score", "--n-out", "1"]));
    let tops: Vec<&str> = out.lines().skip(1).map(|l| l.split('\t').nth(2).unwrap()).collect();
    assert_eq!(tops, ["PEPTLDEK", "VEALR"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (mgf, _) = synth(dir.path(), &["VEALR"]);
    // neither a model nor uniform scores
    assert_eq!(denovo(&["sequence", &mgf]).status.code(), Some(4));
    assert_eq!(denovo(&["sequence", "/nonexistent.mgf", "--uniform-score"]).status.code(), Some(2));
    let bad_model = dir.path().join("bad.json");
    fs::write(&bad_model, "{\"version\": 99}").unwrap();
    assert_eq!(denovo(&["sequence", &mgf, "--model", bad_model.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(denovo(&["sequence", &mgf, "--uniform-score", "--edge-tol", "0"]).status.code(), Some(4));
}

#[test]
fn train_then_sequence_with_model() {
    let dir = tempfile::tempdir().unwrap();
    let peptides = ["PEPTIDEK", "SAMPLER", "VEALRK", "GLDSTWKR", "MNQEHLK", "ACDFGHK", "TTVNPRE", "WYQSDAK"];
    let (mgf, ann) = synth(dir.path(), &peptides);
    let model = dir.path().join("model.json");
    let out = denovo(&["train", &mgf, &ann, "--out", model.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("trained on 8 spectra"));
    let seq = denovo(&["sequence", &mgf, "--model", model.to_str().unwrap(), "--n-out", "2"]);
    assert!(seq.status.success());
    let tsv = stdout(&seq);
    let tops: Vec<Vec<&str>> = tsv.lines().skip(1).map(|l| l.split('\t').collect()).filter(|r: &Vec<&str>| r[1] == "1").collect();
    // eight clean spectra make a weak model, so only check the clearest one
    assert!(tops.len() >= 4, "{tsv}");
    assert_eq!(tops[0][..3], ["synth_0", "1", "PEPTLDEK"]);
}

#[test]
fn trace_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (mgf, _) = synth(dir.path(), &["VEALR"]);
    let out = stdout(&denovo(&["trace", &mgf, "--uniform-score"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("spectrum_id,depth,t,z_lambda,z_star,theta,violated"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "synth_0");
    assert_eq!(row.len(), 7);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.toml");
    fs::write(&file, "k = 7\nn_out = 4\nedge_tol = 0.2\nuniform_score = true\n").unwrap();
    let args = RunArgs { config: Some(file.clone()), k: Some(9), ..RunArgs::default() };
    let cfg = args.resolve().unwrap();
    assert_eq!((cfg.k, cfg.n_out, cfg.edge_tol, cfg.uniform_score), (9, 4, 0.2, true));
    assert_eq!(cfg.parent_tol, RunConfig::default().parent_tol);

    fs::write(&file, "kk = 7\n").unwrap();
    assert!(matches!(args.resolve(), Err(CliError::Config(_))));
    let args = RunArgs { threads: Some(0), ..RunArgs::default() };
    assert!(matches!(args.resolve(), Err(CliError::Config(_))));
}

#[test]
fn evaluate_skips_unannotated_ids() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.tsv");
    let ann = dir.path().join("ann.tsv");
    fs::write(&pred, format!("{TSV_HEADER}\na\t1\tVEALR\t1\t1\t0\na\t2\tGG\t1\t1\t0\nb\t1\tAAA\t1\t1\t0\n")).unwrap();
    fs::write(&ann, "spectrum_id\tpeptide\na\tVEALR\n").unwrap();
    let table = cmd_evaluate(&pred, &ann).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("a\t1.0000\t1.0000"));

    fs::write(&ann, "a VEALR\n").unwrap();
    assert!(matches!(parse_annotations(&ann), Err(CliError::Io(_))));
}
