mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lattice-ids"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn setup(config: &str) -> tempfile::TempDir {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("run.toml"), config).unwrap();
    tmp
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# lattice-ids "));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn sample_is_reproducible_and_named_by_seed() {
    let tmp = setup("seeds = [3]\nsampler.n_samples = 2\nn_max = 1\ntag = \"t\"\n");
    for out in ["a", "b"] {
        let o = run(tmp.path(), &["sample", "--config", "run.toml", "--out", out]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ["t-3-0.wgf", "t-3-1.wgf"] {
        let a = std::fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(&a[..4], b"WGF1");
        assert_eq!(a, b);
    }
    let other = run(
        tmp.path(),
        &["sample", "--config", "run.toml", "--out", "c", "--seeds", "4"],
    );
    assert!(other.status.success());
    assert!(tmp.path().join("c/t-4-0.wgf").exists());
}

#[test]
fn beta_above_threshold_warns_and_succeeds() {
    let tmp = setup("beta = 0.2\nn_max = 1\nseeds = [1]\n");
    let o = run(tmp.path(), &["sample", "--config", "run.toml", "--out", "s"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stderr(&o).contains("beta above Dobrushin threshold 1/(12·N·(d−1))"),
        "{}",
        stderr(&o)
    );
    let quiet = setup("beta = 0.01\nn_max = 1\nseeds = [1]\n");
    let o = run(quiet.path(), &["sample", "--config", "run.toml", "--out", "s"]);
    assert!(!stderr(&o).contains("Dobrushin"));
}

#[test]
fn corrupt_and_mismatched_inputs_are_rejected() {
    let tmp = setup("seeds = [1]\nn_max = 2\n");
    assert!(run(tmp.path(), &["sample", "--config", "run.toml", "--out", "s"])
        .status
        .success());
    let good = tmp.path().join("s/cfg-1-0.wgf");
    let mut bytes = std::fs::read(&good).unwrap();
    bytes[0] = b'X';
    std::fs::write(tmp.path().join("bad.wgf"), &bytes).unwrap();
    let o = run(tmp.path(), &["ids", "--config", "run.toml", "--out", "i", "bad.wgf"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not a WGF1 file"), "{}", stderr(&o));

    std::fs::write(
        tmp.path().join("su2.toml"),
        "group.family = \"SU\"\ngroup.n = 2\nn_max = 2\n",
    )
    .unwrap();
    let o = run(
        tmp.path(),
        &["ids", "--config", "su2.toml", "--out", "i", "s/cfg-1-0.wgf"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("group"), "{}", stderr(&o));

    let o = run(
        tmp.path(),
        &["ids", "--config", "run.toml", "--out", "i", "s/cfg-1-0.wgf"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn invalid_config_names_the_key() {
    let tmp = setup("kappa = -0.5\n");
    let o = run(tmp.path(), &["verify", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`kappa`"), "{}", stderr(&o));
    let missing = run(tmp.path(), &["verify", "--config", "absent.toml"]);
    assert_eq!(missing.status.code(), Some(2));
    let bad_flag = run(tmp.path(), &["verify", "--bogus"]);
    assert_eq!(bad_flag.status.code(), Some(2));
}

#[test]
fn unwritable_output_directory_is_an_error() {
    let tmp = setup("n_max = 1\nseeds = [1]\n");
    std::fs::write(tmp.path().join("file"), "x").unwrap();
    let o = run(tmp.path(), &["sample", "--config", "run.toml", "--out", "file/sub"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ids_csv_shape_and_monotone_counts() {
    let tmp = setup("seeds = [1, 2]\nn_max = 2\nenergy.min = -2.0\nenergy.max = 2.0\nenergy.points = 21\n");
    let o = run(tmp.path(), &["ids", "--config", "run.toml", "--out", "i"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&tmp.path().join("i/ids.csv"));
    assert_eq!(header.join(","), "seed,beta,group,l0,n,side,volume,bc,E,count,ids");
    assert_eq!(rows.len(), 2 * 2 * 2 * 21);
    let mut groups: BTreeMap<(String, String, String), Vec<usize>> = BTreeMap::new();
    for r in &rows {
        groups
            .entry((r[0].clone(), r[4].clone(), r[7].clone()))
            .or_default()
            .push(r[9].parse().unwrap());
        let volume: f64 = r[6].parse().unwrap();
        let count: f64 = r[9].parse().unwrap();
        assert_eq!(r[10].parse::<f64>().unwrap(), count / volume);
    }
    assert_eq!(groups.len(), 8);
    assert!(groups.values().all(|c| c.windows(2).all(|w| w[0] <= w[1])));
    let svg = std::fs::read_to_string(tmp.path().join("i/ids.svg")).unwrap();
    assert!(svg.contains("dirichlet") && svg.contains("periodic") && svg.contains("stroke-dasharray"));
}

#[test]
fn free_field_ids_matches_momentum_oracle() {
    let tmp = setup("seeds = [1]\nn_max = 2\nkappa = 0.1\nbc = [\"periodic\"]\n");
    let o = run(
        tmp.path(),
        &["ids", "--config", "run.toml", "--out", "f", "--free-field"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, rows) = csv_rows(&tmp.path().join("f/ids.csv"));
    assert_eq!(rows.len(), 2 * 101);
    for r in rows {
        let side: usize = r[5].parse().unwrap();
        let e: f64 = r[8].parse().unwrap();
        let oracle = common::free_spectrum(2, side, 0.1, 1.0, 2, 1);
        assert_eq!(
            r[9].parse::<usize>().unwrap(),
            common::count_below(&oracle, e),
            "side {side} E {e}"
        );
    }
}

#[test]
fn verify_passes_and_self_test_fails() {
    let tmp = setup("verify.rank_pairs = 30\n");
    let o = run(tmp.path(), &["verify", "--config", "run.toml", "--out", "v"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&tmp.path().join("v/verify.csv"));
    assert_eq!(header.join(","), "check,instance,measured,bound,pass");
    assert!(rows.iter().all(|r| r.len() == 5 && r[4] == "true"));
    for check in ["clifford", "hermiticity", "covariance", "rank", "splitting", "bc"] {
        assert!(rows.iter().any(|r| r[0] == check), "{check}");
    }

    let o = run(
        tmp.path(),
        &["verify", "--config", "run.toml", "--out", "w", "--self-test"],
    );
    assert_eq!(o.status.code(), Some(1));
    let (_, rows) = csv_rows(&tmp.path().join("w/verify.csv"));
    assert!(rows.iter().any(|r| r[0] == "hermiticity" && r[4] == "false"));
}

#[test]
fn verify_without_checks_is_an_error() {
    let tmp = setup("verify.checks = []\n");
    let o = run(tmp.path(), &["verify", "--config", "run.toml", "--out", "v"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no checks selected"));
}

#[test]
fn correlations_need_enough_samples() {
    let tmp = setup("sampler.n_samples = 10\n");
    let o = run(tmp.path(), &["correlations", "--config", "run.toml", "--out", "c"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("samples"), "{}", stderr(&o));
}

#[test]
fn correlations_at_zero_beta() {
    let tmp = setup("beta = 0.0\nsampler.n_samples = 60\nsampler.n_skip = 2\nsampler.n_therm = 5\n");
    for out in ["c", "d"] {
        let o = run(tmp.path(), &["correlations", "--config", "run.toml", "--out", out]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (header, rows) = csv_rows(&tmp.path().join("c/corr.csv"));
    assert_eq!(header.join(","), "beta,ell,cov,stderr,cesaro_L,cesaro_value");
    assert_eq!(rows.len(), 5);
    for r in &rows[2..] {
        let (cov, se): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!(cov.abs() <= 3.0 * se, "{r:?}");
    }
    for name in ["corr.csv", "corr.svg"] {
        assert_eq!(
            std::fs::read(tmp.path().join("c").join(name)).unwrap(),
            std::fs::read(tmp.path().join("d").join(name)).unwrap()
        );
    }
}
