use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str], config: &str, out: &Path) -> Output {
    let dir = out.parent().unwrap();
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_sta-workbench"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .env("STA_OUTPUT_DIR", out)
        .output()
        .unwrap()
}

fn read_csv(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    (
        header,
        lines.map(|l| l.split(',').map(str::to_string).collect()).collect(),
    )
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

const SMALL: &str = "operation_times_ns = 25\ngrid_step_tbar = 0.1\n";

#[test]
fn fields_file_matches_the_contract() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["fields", "--plot"], "operation_times_ns = 25, 100\n", &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("fields_T25.csv"));
    assert_eq!(header, "t_ns,b0x,b0y,b0z,bcdx,bcdy,bcdz,bx,by,bz");
    assert_eq!(rows.len(), 51);
    assert!(rows.iter().all(|r| r.len() == 10));
    assert_eq!(num(&rows[0][3]), 10.0);
    assert!(rows[0][4..7].iter().all(|v| num(v) == 0.0));
    let last = rows.last().unwrap();
    assert_eq!(num(&last[0]), 25.0);
    assert!((num(&last[3]) - 10.0).abs() < 1e-7);
    assert!(last[4..7].iter().all(|v| num(v).abs() < 1e-9));
    assert!(out.join("fields_T100.csv").exists());
    assert!(fs::read_to_string(out.join("fields_T25.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn sweeps_are_byte_identical_across_worker_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = "operation_times_ns = 25, 50\ngrid_step_tbar = 0.1\nshot_noise_enabled = true\nshots = 200\nseed = 5\n";
    for cmd in ["moments", "qgt", "populations"] {
        let a = tmp.path().join(format!("{cmd}_a"));
        let b = tmp.path().join(format!("{cmd}_b"));
        assert!(run(&[cmd, "--workers", "1"], cfg, &a).status.success());
        assert!(run(&[cmd, "--workers", "4"], cfg, &b).status.success());
        let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            assert_eq!(
                fs::read(a.join(&name)).unwrap(),
                fs::read(b.join(&name)).unwrap(),
                "{name:?}"
            );
        }
    }
}

#[test]
fn moments_and_populations_have_the_documented_columns() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    assert!(run(&["moments"], SMALL, &out).status.success());
    assert!(run(&["populations"], SMALL, &out).status.success());
    assert!(run(&["qgt"], SMALL, &out).status.success());

    let (h, rows) = read_csv(&out.join("moments_T25_up.csv"));
    assert_eq!(h, "tbar,w1_hmhz,w2_hmhz2,w1_ad,w2_ad,excess2");
    let end = rows.last().unwrap();
    assert!((num(&end[1]) - 5.0).abs() < 1e-6);
    let (_, down) = read_csv(&out.join("moments_T25_down.csv"));
    assert!((num(&down.last().unwrap()[1]) + 5.0).abs() < 1e-6);

    let (h, rows) = read_csv(&out.join("populations_T25_up.csv"));
    assert_eq!(h, "tau_m_ns,p_plus,p_minus,p_plus_exact,p_minus_exact");
    assert_eq!(rows.len(), 26);
    assert_eq!((num(&rows[0][1]), num(&rows[0][2])), (1.0, 0.0));

    let (h, rows) = read_csv(&out.join("qgt_T25.csv"));
    assert_eq!(h, "tbar,T2_excess2,dl_dt_sq_estimator,dl_dt_sq_analytic,theta_q,phi_q");
    for r in &rows[1..rows.len() - 1] {
        assert!((num(&r[1]) - num(&r[3])).abs() <= 1e-4 * num(&r[3]));
    }
}

#[test]
fn eigenenergies_start_at_five_megahertz() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["eigenenergies"], "operation_times_ns = 10\n", &out);
    assert!(o.status.success());
    let (h, rows) = read_csv(&out.join("eigenenergies_T10.csv"));
    assert_eq!(
        h,
        "tau_m_ns,e_plus_mhz,e_minus_mhz,e_plus_exact_mhz,fit_residual,status"
    );
    assert_eq!(rows.len(), 11);
    assert!((num(&rows[0][1]) - 5.0).abs() < 0.05);
    for r in &rows {
        assert_eq!(r[5], "ok");
        assert!((num(&r[1]) - num(&r[3])).abs() < 0.05);
    }
}

#[test]
fn loosened_step_fails_verification() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["verify"], "dt_ns = 0.5\n", &out);
    assert_eq!(o.status.code(), Some(1));
    let (h, rows) = read_csv(&out.join("verify_report.csv"));
    assert_eq!(h, "criterion_id,status,measured,tolerance");
    assert!(rows.iter().any(|r| r[0].starts_with("11") && r[1] != "PASS"));
}

#[test]
fn bad_configuration_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    for cfg in [
        "nonsense\n",
        "dt_ns = -1\n",
        "shot_noise_enabled = true\n",
        "unknown_key = 3\n",
    ] {
        assert_eq!(run(&["fields"], cfg, &out).status.code(), Some(2), "{cfg}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_sta-workbench"))
        .args(["fields", "--config", "/definitely/not/here.cfg"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_three() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sta-workbench"))
        .args(["fields", "--config"])
        .arg(&cfg)
        .env("STA_OUTPUT_DIR", blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("file"));
}
