use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_soc-sta"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(out: &Path, args: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.arg("--out-dir").arg(out).args(args);
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn manifest(dir: &Path, name: &str) -> serde_json::Value {
    let text = fs::read_to_string(dir.join(name)).expect("manifest written");
    serde_json::from_str(&text).expect("valid json")
}

fn csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).expect("csv written");
    let mut lines = text.lines();
    let header = lines.next().expect("header").to_string();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().expect("number")).collect())
        .collect();
    (header, rows)
}

#[test]
fn design_writes_listed_artifacts_and_endpoint_detunings() {
    let dir = scratch("design");
    let o = run(&dir, &["design"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&dir, "design.manifest.json");
    for f in m["artifacts"].as_array().unwrap() {
        assert!(dir.join(f.as_str().unwrap()).is_file(), "{f} missing");
    }
    let (header, rows) = csv(&dir.join("schedule.csv"));
    assert_eq!(header, "t,channel_a,channel_b");
    // E1 - E0 = 3 for depth 8; the invariant terms shift it by 1.5c at the ends.
    let c = 0.1;
    let (first, last) = (&rows[0], rows.last().unwrap());
    assert!((first[2] - (3.0 - 1.5 * c)).abs() < 1e-9);
    assert!((last[2] - (3.0 + 1.5 * c)).abs() < 1e-9);
    assert!(first[1].abs() < 1e-12 && last[1].abs() < 1e-12);
    assert!((last[0] - 10.0).abs() < 1e-12);
}

#[test]
fn two_level_simulation_reaches_target() {
    let dir = scratch("simulate");
    let o = run(&dir, &["simulate", "--engine", "twolevel"]);
    assert_eq!(code(&o), 0);
    let m = manifest(&dir, "simulate.manifest.json");
    assert!(m["scalars"]["final_fidelity"].as_f64().unwrap() > 0.999);
    let (header, _) = csv(&dir.join("trajectory.csv"));
    assert_eq!(
        header,
        "t,re_c1,im_c1,re_c2,im_c2,Px,Py,Pz,x_expect,x_expect_over_lc,fidelity"
    );
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = scratch("errors");
    assert_eq!(code(&run(&dir, &["--set", "transfer.t_f=-1", "design"])), 1);
    assert_eq!(code(&run(&dir, &["--set", "transfer.l=9", "design"])), 1);
    assert_eq!(code(&run(&dir, &["--set", "no.such.key=1", "inspect"])), 1);
    assert_eq!(
        code(&run(&dir, &["scan", "systematic"])),
        1,
        "raman scheme cannot be scanned"
    );
    assert_eq!(
        code(&run(
            &dir,
            &[
                "--set",
                "transfer.scheme=so_direction",
                "--set",
                "noise.lambdas=",
                "scan",
                "systematic"
            ]
        )),
        1
    );
    assert_eq!(code(&run(&dir, &["validate", "--criterion", "11"])), 1);
    assert_eq!(code(&run(&dir, &["reproduce", "--figure", "fig5"])), 1);

    let cfg = dir.join("dup.cfg");
    fs::create_dir_all(&dir).unwrap();
    fs::write(&cfg, "transfer.alpha = 1.2\ntransfer.alpha = 1.6\n").unwrap();
    let o = run(&dir, &["--config", cfg.to_str().unwrap(), "design"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn snapshot_round_trips_through_config_flag() {
    let a = scratch("roundtrip_a");
    let o = run(&a, &["--set", "transfer.alpha=1.2", "--set", "design.c=0.4", "inspect"]);
    assert_eq!(code(&o), 0);
    let b = scratch("roundtrip_b");
    let snap = a.join("config_snapshot.txt");
    let o = run(&b, &["--config", snap.to_str().unwrap(), "inspect"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let strip = |p: &Path| {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("output.dir"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&snap), strip(&b.join("config_snapshot.txt")));
    let ma = manifest(&a, "inspect.manifest.json");
    let mb = manifest(&b, "inspect.manifest.json");
    assert_eq!(ma["scalars"], mb["scalars"]);
}

#[test]
fn noise_scan_is_deterministic_for_a_seed() {
    let args = [
        "--set",
        "transfer.scheme=so_direction",
        "--set",
        "noise.lambda_primes=0.2,0.6",
        "--set",
        "noise.trajectories=16",
        "scan",
        "noise",
    ];
    let read = |dir: &Path| fs::read(dir.join("scan_noise.csv")).unwrap();
    let a = scratch("noise_a");
    let b = scratch("noise_b");
    let c = scratch("noise_c");
    assert_eq!(code(&run(&a, &[&["--seed", "7"], &args[..]].concat())), 0);
    assert_eq!(code(&run(&b, &[&["--seed", "7"], &args[..]].concat())), 0);
    assert_eq!(code(&run(&c, &[&["--seed", "8"], &args[..]].concat())), 0);
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    let (header, rows) = csv(&a.join("scan_noise.csv"));
    assert_eq!(header, "lambda_prime,fidelity,stochastic_fidelity,stderr");
    assert_eq!(rows.len(), 2);
    assert!(rows[0][1] > rows[1][1]);
}

#[test]
fn interacting_scans_write_both_curves() {
    let dir = scratch("scan_interacting");
    let o = run(
        &dir,
        &[
            "--set",
            "transfer.scheme=so_direction_interacting",
            "scan",
            "systematic",
        ],
    );
    assert_eq!(code(&o), 0);
    let (_, plain) = csv(&dir.join("scan_systematic.csv"));
    let (_, inter) = csv(&dir.join("scan_systematic_interacting.csv"));
    assert_eq!(plain.len(), 21);
    assert_eq!(inter.len(), 21);
    let at_zero = |rows: &[Vec<f64>]| rows.iter().find(|r| r[0].abs() < 1e-12).unwrap()[1];
    assert!(at_zero(&plain) > 0.999);
    assert!(at_zero(&inter) > 0.999);
}

#[test]
fn reproduce_fig2_and_fig7_headers() {
    let dir = scratch("reproduce");
    assert_eq!(code(&run(&dir, &["reproduce", "--figure", "fig2"])), 0);
    assert_eq!(code(&run(&dir, &["reproduce", "--figure", "fig7"])), 0);
    let (h2a, rows) = csv(&dir.join("fig2a.csv"));
    assert_eq!(h2a, "t,omega_alpha_0.8,omega_alpha_1.2,omega_alpha_1.6,omega_alpha_2");
    // The drive Omega |G| is independent of alpha.
    let abs_g: Vec<f64> = ["0.8", "1.2", "1.6", "2"]
        .iter()
        .map(|a| {
            let d = scratch(&format!("inspect_alpha_{a}"));
            assert_eq!(code(&run(&d, &["--set", &format!("transfer.alpha={a}"), "inspect"])), 0);
            manifest(&d, "inspect.manifest.json")["scalars"]["abs_g"]
                .as_f64()
                .unwrap()
        })
        .collect();
    for row in rows.iter().step_by(97) {
        let drive = row[1] * abs_g[0];
        for k in 1..4 {
            assert!((row[k + 1] * abs_g[k] - drive).abs() < 1e-9 * (1.0 + drive.abs()));
        }
    }
    assert_eq!(csv(&dir.join("fig2b.csv")).0, "t,delta");
    assert_eq!(csv(&dir.join("fig7a.csv")).0, "t,theta1,theta1_interacting");
    assert_eq!(csv(&dir.join("fig7b.csv")).0, "t,beta,beta_interacting");
    assert!(dir.join("reproduce_fig2.manifest.json").is_file());
    assert!(dir.join("reproduce_fig7.manifest.json").is_file());
}
