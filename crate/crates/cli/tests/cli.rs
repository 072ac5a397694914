use std::collections::HashMap;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lora-maxmin"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

type Table = Vec<HashMap<String, String>>;

fn table(csv_text: &[u8]) -> Table {
    let mut r = csv::Reader::from_reader(csv_text);
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records()
        .map(|rec| {
            header
                .iter()
                .cloned()
                .zip(rec.unwrap().iter().map(String::from))
                .collect()
        })
        .collect()
}

fn num(row: &HashMap<String, String>, col: &str) -> f64 {
    row[col]
        .parse()
        .unwrap_or_else(|_| panic!("{col} = {:?}", row[col]))
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn same_to_6_sig(a: &str, b: &str) -> bool {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x == y || (x - y).abs() <= 5e-7 * x.abs().max(y.abs()),
        _ => a == b,
    }
}

#[test]
fn ranges_reproduce_reference_table() {
    let rows = table(&ok(&["ranges"]).stdout);
    assert_eq!(rows.len(), 6);
    let rates = [5469.0, 3125.0, 1758.0, 977.0, 537.0, 293.0];
    let max = [1053.0, 1283.0, 1563.0, 1904.0, 2244.0, 2645.0];
    let equal = [408.0, 577.0, 707.0, 816.0, 913.0, 1000.0];
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(num(row, "sf"), 7.0 + i as f64);
        assert_eq!(num(row, "bit_rate_bps").round(), rates[i]);
        assert!((num(row, "max_range_m") - max[i]).abs() <= 1.0);
        assert!((num(row, "equal_area_range_m") - equal[i]).abs() <= 1.0);
    }
}

#[test]
fn ranges_scale_with_power_and_cell() {
    let dir = TempDir::new().unwrap();
    let base = table(&ok(&["ranges"]).stdout);
    let cfg = write(
        &dir,
        "c.toml",
        "[network]\nmax_power_dbm = 17.0103\ncell_radius_m = 500\n",
    );
    let alt = table(&ok(&["ranges", "--config", &cfg]).stdout);
    for (a, b) in base.iter().zip(&alt) {
        assert!(num(b, "max_range_m") > num(a, "max_range_m"));
        let half = 0.5 * num(a, "equal_area_range_m");
        assert!((num(b, "equal_area_range_m") - half).abs() < 1e-9);
    }
}

#[test]
fn log_and_linear_configs_give_same_output() {
    let dir = TempDir::new().unwrap();
    let db = write(
        &dir,
        "db.toml",
        "[network]\nmax_power_dbm = 14\nnoise_dbm = -117\nactive_density_per_km2 = 700\n\
         [sf]\nsir_threshold_db = 6\nsnr_threshold_db_sf7 = -6\nsnr_threshold_db_sf8 = -9\n\
         snr_threshold_db_sf9 = -12\nsnr_threshold_db_sf10 = -15\nsnr_threshold_db_sf11 = -17.5\n\
         snr_threshold_db_sf12 = -20\npayload_bytes = 25\n",
    );
    // values rounded to 9 significant figures, as a user would type them
    let lin = write(
        &dir,
        "lin.toml",
        "[network]\nmax_power_w = 0.0251188643\nnoise_w = 1.99526231e-15\n\
         active_density_per_m2 = 7e-4\n\
         [sf]\nsir_threshold = 3.98107171\nsnr_threshold_sf7 = 0.251188643\n\
         snr_threshold_sf8 = 0.125892541\nsnr_threshold_sf9 = 0.0630957344\n\
         snr_threshold_sf10 = 0.0316227766\nsnr_threshold_sf11 = 0.0177827941\n\
         snr_threshold_sf12 = 0.01\npayload_bits = 200\n",
    );
    for cmd in [
        &["ranges"][..],
        &["analyze"],
        &["optimize"],
        &["simulate", "--trials", "2000"],
    ] {
        let a = ok(&[cmd, &["--config", &db]].concat()).stdout;
        let b = ok(&[cmd, &["--config", &lin]].concat()).stdout;
        let (ta, tb) = (table(&a), table(&b));
        assert_eq!(ta.len(), tb.len());
        for (ra, rb) in ta.iter().zip(&tb) {
            for (k, va) in ra {
                assert!(same_to_6_sig(va, &rb[k]), "{cmd:?} {k}: {va} vs {}", rb[k]);
            }
        }
    }
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let args = [
        "simulate",
        "--trials",
        "3000",
        "--seed",
        "11",
        "--duty",
        "fixed:0.004",
    ];
    let a = ok(&args).stdout;
    let b = ok(&args).stdout;
    assert_eq!(a, b);
    let c = ok(&[
        "simulate",
        "--trials",
        "3000",
        "--seed",
        "12",
        "--duty",
        "fixed:0.004",
    ])
    .stdout;
    assert_ne!(a, c);
    for row in table(&a) {
        let mc = num(&row, "success_mc");
        let se = num(&row, "success_mc_stderr");
        assert!((mc - num(&row, "success_analytic")).abs() < 5.0 * se + 0.02);
    }
}

#[test]
fn single_trial_has_bernoulli_stderr() {
    for row in table(&ok(&["simulate", "--trials", "1"]).stdout) {
        let p = num(&row, "success_mc");
        assert!(p == 0.0 || p == 1.0);
        assert_eq!(num(&row, "success_mc_stderr"), 0.0);
    }
}

#[test]
fn zero_duty_gives_zero_throughput() {
    for row in table(&ok(&["analyze", "--duty", "fixed:0"]).stdout) {
        assert_eq!(num(&row, "throughput_bps"), 0.0);
        assert_eq!(num(&row, "spatial_throughput_bps_km2"), 0.0);
    }
}

#[test]
fn duty_sweep_emits_one_experiment_per_point() {
    let rows = table(&ok(&["analyze", "--duty", "sweep:8"]).stdout);
    assert_eq!(rows.len(), 48);
    let ids: std::collections::BTreeSet<_> = rows.iter().map(|r| r["experiment"].clone()).collect();
    assert_eq!(ids.len(), 8);
    assert!(ids.contains("analyze:duty=0.01"));
}

#[test]
fn empty_zone_is_flagged_inactive() {
    let dir = TempDir::new().unwrap();
    let plan = write(
        &dir,
        "p.toml",
        "[partition]\ncell_radius_m = 1000.0\nboundaries_m = [400.0, 600.0, 750.0, 900.0, 1000.0]\n",
    );
    let rows = table(&ok(&["analyze", "--partition", &format!("file:{plan}")]).stdout);
    assert_eq!(rows[5]["active"], "false");
    assert_eq!(num(&rows[5], "throughput_bps"), 0.0);
    assert_eq!(rows[5]["success_analytic"], "");
    assert!(rows[..5].iter().all(|r| r["active"] == "true"));
}

#[test]
fn bad_partition_order_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let plan = write(
        &dir,
        "p.toml",
        "[partition]\ncell_radius_m = 1000.0\nboundaries_m = [400.0, 300.0, 750.0, 900.0, 950.0]\n",
    );
    let out = run(&["analyze", "--partition", &format!("file:{plan}")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn optimize_plan_round_trips_and_is_idempotent() {
    let dir = TempDir::new().unwrap();
    let plan = dir.path().join("plan.toml");
    let plan_s = plan.to_str().unwrap();
    let first = ok(&["optimize", "--plan-out", plan_s]);
    let stderr = String::from_utf8_lossy(&first.stderr);
    assert!(stderr.contains("termination: balanced"), "{stderr}");

    // the emitted plan re-parses to the same operating point
    let again = ok(&[
        "analyze",
        "--partition",
        &format!("file:{plan_s}"),
        "--duty",
        &format!("file:{plan_s}"),
    ]);
    let (a, b) = (table(&first.stdout), table(&again.stdout));
    for (ra, rb) in a.iter().zip(&b) {
        for col in [
            "boundary_m",
            "duty",
            "throughput_bps",
            "spatial_throughput_bps_km2",
        ] {
            assert_eq!(ra[col], rb[col], "{col}");
        }
    }

    let plan2 = dir.path().join("plan2.toml");
    let rerun = ok(&[
        "optimize",
        "--partition",
        &format!("file:{plan_s}"),
        "--plan-out",
        plan2.to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&rerun.stderr).contains("after 0 moves"));
    assert_eq!(
        std::fs::read(&plan).unwrap(),
        std::fs::read(&plan2).unwrap()
    );
}

#[test]
fn optimize_lifts_the_bottleneck() {
    let start = table(&ok(&["analyze"]).stdout);
    let opt = table(&ok(&["optimize"]).stdout);
    let min = |t: &Table| {
        t.iter()
            .filter(|r| r["active"] == "true")
            .map(|r| num(r, "throughput_bps"))
            .fold(f64::INFINITY, f64::min)
    };
    assert!(min(&opt) >= min(&start));
}

#[test]
fn iteration_cap_exits_2_with_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "[run]\nib_max_iterations = 1\n");
    let out_csv = dir.path().join("o.csv");
    let out = run(&[
        "optimize",
        "--config",
        &cfg,
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(table(&std::fs::read(&out_csv).unwrap()).len(), 6);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["analyze", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["benchmark", "--scheme", "3"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "[network]\ngateway_height_m = 25\nnoise_dbm = 40\n",
    );
    assert_eq!(run(&["ranges", "--config", &cfg]).status.code(), Some(3));

    let cfg = write(&dir, "d.toml", "[network]\n\ncell_radius_m = -3\n");
    let out = run(&["ranges", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("d.toml:3:"), "{msg}");

    assert_eq!(
        run(&["ranges", "--config", "/nonexistent.toml"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn run_section_supplies_defaults_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let out_csv = dir.path().join("o.csv");
    let cfg = write(
        &dir,
        "c.toml",
        &format!(
            "[run]\ntrials = 500\nseed = 4\nduty = \"fixed:0.003\"\nout = \"{}\"\n",
            out_csv.display()
        ),
    );
    ok(&["simulate", "--config", &cfg]);
    let from_file = std::fs::read(&out_csv).unwrap();
    let flags = ok(&[
        "simulate",
        "--trials",
        "500",
        "--seed",
        "4",
        "--duty",
        "fixed:0.003",
    ])
    .stdout;
    assert_eq!(from_file, flags);
    let rows = table(&from_file);
    assert_eq!(num(&rows[0], "duty"), 0.003);

    let other = dir.path().join("p.csv");
    ok(&[
        "simulate",
        "--config",
        &cfg,
        "--seed",
        "5",
        "--out",
        other.to_str().unwrap(),
    ]);
    assert_ne!(std::fs::read(&other).unwrap(), from_file);
}

fn spatial_with_stderr(stderr: &[u8]) -> (f64, f64) {
    let text = String::from_utf8_lossy(stderr);
    let line = text
        .lines()
        .find(|l| l.contains("spatial throughput"))
        .expect("summary line");
    let nums: Vec<f64> = line
        .split_whitespace()
        .filter_map(|w| w.parse().ok())
        .collect();
    (nums[nums.len() - 2], nums[nums.len() - 1])
}

#[test]
fn benchmark_total_does_not_depend_on_bin_width() {
    let dir = TempDir::new().unwrap();
    let prof = |w: &str| dir.path().join(format!("prof{w}.csv"));
    let runs: Vec<(f64, f64, usize)> = ["25", "12.5"]
        .iter()
        .map(|w| {
            let p = prof(w);
            let out = ok(&[
                "benchmark",
                "--scheme",
                "1",
                "--trials",
                "400",
                "--seed",
                "3",
                "--bin-width",
                w,
                "--profile-out",
                p.to_str().unwrap(),
            ]);
            let (m, s) = spatial_with_stderr(&out.stderr);
            let rows = table(&out.stdout);
            assert_eq!(rows.len(), 6);
            let csv_theta = num(&rows[0], "spatial_throughput_bps_km2");
            assert!((csv_theta - m).abs() <= 1e-3 * m.abs() + 1e-3);
            (m, s, table(&std::fs::read(&p).unwrap()).len())
        })
        .collect();
    assert_eq!(runs[0].2, 40);
    assert_eq!(runs[1].2, 80);
    let (a, b) = (runs[0], runs[1]);
    assert!((a.0 - b.0).abs() <= 4.0 * (a.1.hypot(b.1)), "{a:?} {b:?}");
}

#[test]
fn benchmark_scheme_2_runs_on_max_range_zones() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "[network]\ncell_radius_m = 2645\n");
    let out = ok(&[
        "benchmark",
        "--config",
        &cfg,
        "--scheme",
        "2",
        "--trials",
        "200",
        "--bin-width",
        "100",
    ]);
    let rows = table(&out.stdout);
    assert!((num(&rows[0], "boundary_m") - 1053.0).abs() < 1.0);
    assert!(rows.iter().all(|r| r["experiment"] == "benchmark-2"));
}
