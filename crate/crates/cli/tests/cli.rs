use std::path::Path;
use std::process::{Command, Output};

use pairchain_cli::table::ResultTable;

fn pairchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairchain")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = pairchain(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    pairchain(args).status.code().unwrap()
}

fn table(path: &Path) -> ResultTable {
    ResultTable::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn column(t: &ResultTable, name: &str) -> Vec<f64> {
    (0..t.rows.len()).map(|r| t.value(r, name).unwrap()).collect()
}

fn preset_json(name: &str) -> serde_json::Value {
    serde_json::from_str(&ok(&["preset", name])).unwrap()
}

fn write_json(dir: &Path, name: &str, v: &serde_json::Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn kv(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in output"))
        .to_owned()
}

#[test]
fn preset_listing_and_predict() {
    let names = ok(&["preset"]);
    for n in ["i", "ii", "iii", "iv", "v", "vi", "awg"] {
        assert!(names.lines().any(|l| l == n));
    }
    let text = ok(&["predict", "--preset", "i"]);
    let mu: f64 = kv(&text, "mu_pair_generated").parse().unwrap();
    assert!((mu / 0.0248923461322535 - 1.0).abs() < 1e-9);
    let car: f64 = kv(&text, "car").parse().unwrap();
    assert!(car > 1.0 && car < 200.0);
}

#[test]
fn predict_writes_csv_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    ok(&["predict", "--preset", "awg", "--out", out.to_str().unwrap()]);
    let t = table(&out);
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.get_meta("command"), Some("predict"));
    assert_eq!(t.get_meta("source"), Some("preset awg"));
    assert_eq!(t.get_meta("config_sha256").unwrap().len(), 64);
}

#[test]
fn config_file_matches_preset() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_json(dir.path(), "i.json", &preset_json("i"));
    let a = ok(&["predict", "--preset", "i"]);
    let b = ok(&["predict", &path]);
    assert_eq!(kv(&a, "car"), kv(&b, "car"));
    assert_eq!(kv(&a, "p_coincidence"), kv(&b, "p_coincidence"));
}

#[test]
fn zero_power_has_undefined_car() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset_json("i");
    cfg["pump"]["peak_power_mw"] = 0.0.into();
    cfg["detectors"]["signal"]["dark_rate_khz"] = 0.0.into();
    cfg["detectors"]["idler"]["dark_rate_khz"] = 0.0.into();
    let path = write_json(dir.path(), "zero.json", &cfg);
    let text = ok(&["predict", &path]);
    assert_eq!(kv(&text, "car"), "undefined");
    assert_eq!(kv(&text, "mu_pair_generated"), "0");
}

#[test]
fn zero_gamma_leaves_noise_singles() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset_json("i");
    cfg["segments"][0]["gamma_per_w_m"] = 0.0.into();
    let path = write_json(dir.path(), "g0.json", &cfg);
    let text = ok(&["predict", &path]);
    assert_eq!(kv(&text, "mu_pair_generated"), "0");
    let ms: f64 = kv(&text, "mu_signal").parse().unwrap();
    assert!(ms > 0.0);
    let car: f64 = kv(&text, "car").parse().unwrap();
    assert!((car - 1.0).abs() < 1e-9);
}

#[test]
fn bad_configs_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset_json("i");
    cfg["pump"]["colour"] = "green".into();
    let unknown = write_json(dir.path(), "unknown.json", &cfg);
    assert_eq!(code(&["predict", &unknown]), 2);

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    assert_eq!(code(&["predict", broken.to_str().unwrap()]), 2);

    let mut cfg = preset_json("i");
    cfg["detectors"]["signal"]["qe"] = 1.5.into();
    let qe = write_json(dir.path(), "qe.json", &cfg);
    assert_eq!(code(&["predict", &qe]), 2);

    assert_eq!(code(&["predict", "/nonexistent/config.json"]), 2);
    assert_eq!(code(&["predict", "--preset", "nope"]), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&["simulate", "--preset", "i", "--pulses", "0"]), 2);
    assert_eq!(code(&["reproduce", "--figure", "9z"]), 2);
    assert_eq!(code(&["sweep", "--preset", "i", "--var", "pp", "--grid", "lin:1:2"]), 2);
    assert_eq!(code(&["sweep", "--preset", "i", "--var", "pp", "--grid", "log:0:10:5"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
}

#[test]
fn simulate_is_reproducible_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str, seed: &str| {
        let out = dir.path().join(name);
        ok(&["simulate", "--preset", "i", "--pulses", "3000000", "--seed", seed, "--threads", threads, "--out", out.to_str().unwrap()]);
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv", "1", "7");
    let b = run("b.csv", "4", "7");
    let c = run("c.csv", "1", "8");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn simulate_agrees_with_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mc.csv");
    ok(&["simulate", "--preset", "i", "--pulses", "20000000", "--no-dead-time", "--out", out.to_str().unwrap()]);
    let t = table(&out);
    assert_eq!(t.get_meta("dead_time"), Some("false"));
    let p = t.value(0, "p_coincidence_mc").unwrap();
    let err = t.value(0, "p_coincidence_mc_err").unwrap();
    let pred = t.value(0, "p_coincidence_predicted").unwrap();
    assert!((p - pred).abs() < 4.0 * err, "{p} vs {pred} +- {err}");
}

#[test]
fn sweep_grid_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = out.to_str().unwrap();
    ok(&["sweep", "--preset", "i", "--var", "l_si", "--grid", "lin:0.5:2.5:5", "--out", o]);
    assert_eq!(column(&table(&out), "l_si_cm"), vec![0.5, 1.0, 1.5, 2.0, 2.5]);
    ok(&["sweep", "--preset", "i", "--var", "pp", "--grid", "log:1:100:3", "--out", o]);
    let pp = column(&table(&out), "pp_mw");
    assert!((pp[1] - 10.0).abs() < 1e-9 && (pp[2] - 100.0).abs() < 1e-9);
    ok(&["sweep", "--preset", "i", "--var", "l_siox", "--grid", "0.5,1,4", "--out", o]);
    let t = table(&out);
    assert_eq!(column(&t, "l_siox_cm"), vec![0.5, 1.0, 4.0]);
    let mu = column(&t, "mu_pair_out");
    assert!(mu[0] > mu[1] && mu[1] > mu[2]);
}

#[test]
fn lower_awg_loss_and_dark_counts_raise_max_car() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = out.to_str().unwrap();
    ok(&["sweep", "--preset", "awg", "--var", "awg_loss", "--grid", "lin:7.7:0:4", "--out", o]);
    let cm = column(&table(&out), "car_max");
    assert!(cm.windows(2).all(|w| w[1] > w[0]), "{cm:?}");
    ok(&["sweep", "--preset", "awg", "--var", "dark", "--grid", "log:2100:20:4", "--out", o]);
    let cm = column(&table(&out), "car_max");
    assert!(cm.windows(2).all(|w| w[1] > w[0]), "{cm:?}");
}

#[test]
fn sweep_with_monte_carlo_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    ok(&["sweep", "--preset", "i", "--var", "pp", "--grid", "20,40", "--mc", "--pulses", "2000000", "--out", out.to_str().unwrap()]);
    let t = table(&out);
    assert_eq!(t.rows.len(), 2);
    assert!(t.column("car_mc").is_some());
    assert_eq!(t.get_meta("pulses"), Some("2000000"));
    assert!(t.value(1, "p_click_signal_mc").unwrap() > t.value(0, "p_click_signal_mc").unwrap());
}

fn write_csv(dir: &Path, name: &str, header: &str, rows: &[(f64, f64)]) -> String {
    let mut s = format!("{header},y\n");
    for (x, y) in rows {
        s += &format!("{x},{y}\n");
    }
    let path = dir.join(name);
    std::fs::write(&path, s).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn fit_decay_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    // both photons cross the section, so the pair rate falls at twice the loss
    let rows: Vec<_> = [0.5, 1.0, 2.0, 3.0, 5.0].iter().map(|&l| (l, 1000.0 * 10f64.powf(-2.0 * 2.4 * l / 10.0))).collect();
    let data = write_csv(dir.path(), "d.csv", "l_siox_cm", &rows);
    let out = dir.path().join("fit.json");
    let text = ok(&["fit", "--data", &data, "--model", "decay", "--out", out.to_str().unwrap()]);
    assert_eq!(kv(&text, "converged"), "true");
    let j: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(j["model"], "decay");
    let a = j["parameters"]["alpha_siox_db_per_cm"]["value"].as_f64().unwrap();
    assert!((a - 2.4).abs() < 1e-6, "{a}");
}

#[test]
fn fit_poly_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<_> = [5.0, 10.0, 20.0, 40.0, 80.0]
        .iter()
        .map(|&p: &f64| {
            let w = p * 1e-3;
            (p, 1e-4 + 0.2 * w + 3.0 * w * w)
        })
        .collect();
    let data = write_csv(dir.path(), "p.csv", "pp_mw", &rows);
    let text = ok(&["fit", "--data", &data, "--model", "poly"]);
    let a2: f64 = kv(&text, "a2_per_w2").split_whitespace().next().unwrap().parse().unwrap();
    assert!((a2 / 3.0 - 1.0).abs() < 1e-6, "{a2}");
}

#[test]
fn fit_gamma_alpha_recovers_preset_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    ok(&["sweep", "--preset", "i", "--var", "l_si", "--grid", "0.5,1,1.5,2.5,4", "--out", out.to_str().unwrap()]);
    let t = table(&out);
    let rows: Vec<_> = column(&t, "l_si_cm").into_iter().zip(column(&t, "mu_pair_out")).collect();
    let data = write_csv(dir.path(), "g.csv", "l_si_cm", &rows);
    let text = ok(&["fit", "--data", &data, "--model", "gamma_alpha"]);
    let gamma: f64 = kv(&text, "gamma_per_w_m").split_whitespace().next().unwrap().parse().unwrap();
    let alpha: f64 = kv(&text, "alpha_si_db_per_cm").split_whitespace().next().unwrap().parse().unwrap();
    assert!((alpha / 2.0 - 1.0).abs() < 1e-3, "{alpha}");
    // detection efficiencies fold into the amplitude, so only the loss is checked exactly
    assert!(gamma > 0.0);
}

#[test]
fn single_length_fit_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_csv(dir.path(), "one.csv", "l_si_cm", &[(1.37, 0.01), (1.37, 0.011), (1.37, 0.0105)]);
    let out = pairchain(&["fit", "--data", &data, "--model", "gamma_alpha"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn reproduce_length_figure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("3b.csv");
    ok(&["reproduce", "--figure", "3b", "--out", out.to_str().unwrap()]);
    let t = table(&out);
    assert_eq!(t.get_meta("figure"), Some("3b"));
    assert_eq!(t.rows.len(), 115);
    let l = t.rows.iter().map(|r| r[0].parse::<f64>().unwrap()).collect::<Vec<_>>();
    assert!((l[0] - 0.3).abs() < 1e-12 && (l[114] - 6.0).abs() < 1e-12);
}

#[test]
fn reproduce_dark_count_figure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("5b.csv");
    ok(&["reproduce", "--figure", "5b", "--out", out.to_str().unwrap()]);
    let t = table(&out);
    let car_cols: Vec<_> = t.columns.iter().filter(|c| c.starts_with("car")).collect();
    assert_eq!(car_cols.len(), 3, "{:?}", t.columns);
    let best = |c: &str| column(&t, c).into_iter().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let maxes: Vec<f64> = car_cols.iter().map(|c| best(c)).collect();
    assert!(maxes[0] < maxes[1] && maxes[1] < maxes[2], "{maxes:?}");
}

#[test]
fn every_figure_reproduces() {
    for f in ["3a", "3c", "3d", "5a"] {
        let text = ok(&["reproduce", "--figure", f]);
        let t = ResultTable::parse(&text).unwrap();
        assert!(t.rows.len() > 10, "{f}");
    }
}
