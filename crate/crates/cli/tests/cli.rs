//! End-to-end checks of the `chb` binary: exit codes, file outputs, summary
//! shape, plot determinism, and the inspection reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chb"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chb-cli-{}-{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const SMALL_LINEAR: &str = "\
task = linear
data = synth-controlled
m = 3
d = 10
l_targets = 1,4,9
algorithms = chb,hb
alpha = 1/L
beta = 0.4
eps1 = 0.1/(alpha^2*M^2)
stop = iters:40
seed = 5
out = runout
";

#[test]
fn run_writes_one_csv_per_algorithm() {
    let dir = workdir("run");
    let conf = write_config(&dir, "a.conf", SMALL_LINEAR);
    let out: Output = bin().arg("run").arg(&conf).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("runout/chb.csv").exists());
    assert!(dir.join("runout/hb.csv").exists());
    assert!(!dir.join("runout/gd.csv").exists(), "gd was not requested");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("chb"), "summary lists algorithms: {stdout}");
    assert!(stdout.contains("f_star"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn run_single_algorithm_single_csv() {
    let dir = workdir("single");
    let conf = write_config(&dir, "a.conf", &SMALL_LINEAR.replace("chb,hb", "hb"));
    let out = bin().arg("run").arg(&conf).output().unwrap();
    assert!(out.status.success());
    let entries: Vec<_> = fs::read_dir(dir.join("runout"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(entries, vec!["hb.csv"]);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn summary_totals_match_trace_totals() {
    let dir = workdir("totals");
    let conf = write_config(&dir, "a.conf", SMALL_LINEAR);
    let out = bin().arg("run").arg(&conf).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let trace = chb_core::trace::parse_csv(std::io::BufReader::new(
        fs::File::open(dir.join("runout/chb.csv")).unwrap(),
    ))
    .unwrap();
    let expect = format!(
        "chb    {:>10} {:>8}",
        trace.records.last().unwrap().comms_cumulative,
        trace.records.last().unwrap().k
    );
    assert!(
        stdout.contains(&expect),
        "summary row `{expect}` not found in:\n{stdout}"
    );
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn reference_columns_are_printed_not_asserted() {
    let dir = workdir("refs");
    let conf = write_config(&dir, "a.conf", &format!("{SMALL_LINEAR}ref_hb = 1071/119\n"));
    let out = bin().arg("run").arg(&conf).output().unwrap();
    assert!(out.status.success(), "references never fail a run");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("1071/119"), "reference column shown: {stdout}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn config_error_exits_1() {
    let dir = workdir("bad");
    let conf = write_config(&dir, "a.conf", "task = linear\nnope = 1\n");
    let out = bin().arg("run").arg(&conf).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2"), "line number in: {stderr}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn missing_data_file_exits_nonzero_at_parse() {
    let dir = workdir("nofile");
    let conf = write_config(
        &dir,
        "a.conf",
        &SMALL_LINEAR.replace("data = synth-controlled", "data = libsvm:missing.libsvm"),
    );
    let out = bin().arg("run").arg(&conf).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "file existence is a parse-time check");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn divergent_run_exits_3_and_keeps_partial_trace() {
    let dir = workdir("div");
    let conf = write_config(
        &dir,
        "a.conf",
        &SMALL_LINEAR.replace("alpha = 1/L", "alpha = 1e6").replace("chb,hb", "gd,hb"),
    );
    let out = bin().arg("run").arg(&conf).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.join("runout/gd.csv").exists());
    assert!(dir.join("runout/hb.csv").exists(), "remaining algorithms still run");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("DIVERGED"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn plot_produces_deterministic_svg_with_legend_in_input_order() {
    let dir = workdir("plot");
    let conf = write_config(&dir, "a.conf", SMALL_LINEAR);
    assert!(bin().arg("run").arg(&conf).output().unwrap().status.success());
    let chb = dir.join("runout/chb.csv");
    let hb = dir.join("runout/hb.csv");
    let svg1 = dir.join("one.svg");
    let svg2 = dir.join("two.svg");
    assert!(bin().arg("plot").arg(&hb).arg(&chb).arg("-o").arg(&svg1).output().unwrap().status.success());
    assert!(bin().arg("plot").arg(&hb).arg(&chb).arg("-o").arg(&svg2).output().unwrap().status.success());
    let a = fs::read(&svg1).unwrap();
    let b = fs::read(&svg2).unwrap();
    assert_eq!(a, b, "identical inputs give identical bytes");
    let text = String::from_utf8(a).unwrap();
    let hb_pos = text.find(">hb<").unwrap();
    let chb_pos = text.find(">chb<").unwrap();
    assert!(hb_pos < chb_pos, "legend follows input order");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn plot_rejects_non_trace_file() {
    let dir = workdir("plotbad");
    let bogus = dir.join("bogus.csv");
    fs::write(&bogus, "not,a,trace\n").unwrap();
    let out = bin().arg("plot").arg(&bogus).arg("-o").arg(dir.join("x.svg")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("bogus.csv"), "error names the file: {stderr}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn inspect_recipe_prints_rate() {
    let out = bin()
        .args(["inspect", "--recipe", "L=10", "mu=1", "delta=0.1", "M=9"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("c = 9e-2"), "rate constant printed: {stdout}");
    assert!(stdout.contains("feasible = true"));
}

#[test]
fn inspect_infeasible_params_exit_0() {
    // α = 1/L with β > 0: outside the sufficient conditions, still exit 0.
    let out = bin()
        .args(["inspect", "--params", "alpha=0.25", "beta=0.4", "eps1=0.02", "l=4", "m=9"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("feasible = false"));
    assert!(stdout.contains("simplified condition: false"));
    assert!(stdout.contains("zero slack"));
}

#[test]
fn gen_data_roundtrips_through_libsvm() {
    let dir = workdir("gen");
    let conf = write_config(
        &dir,
        "g.conf",
        "\
task = linear
data = synth-controlled
m = 3
d = 8
l_common = 2
alpha = 1/L
stop = iters:1
seed = 12
out = shards
",
    );
    let out = bin().arg("gen-data").arg(&conf).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for w in 0..3 {
        let p = dir.join(format!("shards/shard_{w:03}.libsvm"));
        assert!(p.exists());
        let (samples, d) = chb_core::data::parse_libsvm(
            std::io::BufReader::new(fs::File::open(&p).unwrap()),
            Some(8),
        )
        .unwrap();
        assert_eq!(d, 8);
        assert_eq!(samples.len(), 8);
    }
    assert!(dir.join("shards/dataset.txt").exists());
    let _ = fs::remove_dir_all(&dir);
}
