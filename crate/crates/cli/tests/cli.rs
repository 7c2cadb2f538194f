use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use levsim_core::spectra::{synth_trace, write_csv_trace, ResonanceFit};
use serde_json::Value;

fn levsim(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levsim"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("LEVSIM_THREADS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn levitate_image_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = levsim(dir.path(), &["levitate", "--preset", "N52", "--model", "image"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&dir.path().join("levitate.json"));
    let z = r["results"]["height_m"].as_f64().unwrap();
    assert!((z - 4.1385e-3).abs() < 1e-6, "{z}");
    assert_eq!(r["command"], "levitate");
    assert!(String::from_utf8_lossy(&o.stdout).contains("mm"));
}

#[test]
fn levitate_two_loop_is_stable_and_lower() {
    let dir = tempfile::tempdir().unwrap();
    let o = levsim(dir.path(), &["-q", "levitate", "--preset", "n52", "--temperature", "50mK"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let r = &json(&dir.path().join("levitate.json"))["results"];
    let z = r["height_m"].as_f64().unwrap();
    assert!(r["stable"].as_bool().unwrap());
    assert!(z < r["image_height_m"].as_f64().unwrap());
    let onset = r["onset_temperature_k"].as_f64().unwrap();
    assert!(onset > 0.0 && onset < 1.2);
}

#[test]
fn levitate_near_tc_reports_no_levitation() {
    let dir = tempfile::tempdir().unwrap();
    let o = levsim(dir.path(), &["levitate", "--preset", "N52", "--temperature", "1.19K"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn levitate_custom_magnet_equals_preset() {
    let dir = tempfile::tempdir().unwrap();
    let a = levsim(dir.path(), &["levitate", "--preset", "N35", "--model", "image"]);
    assert_eq!(code(&a), 0);
    let za = json(&dir.path().join("levitate.json"))["results"]["height_m"].as_f64().unwrap();
    let b = levsim(
        dir.path(),
        &[
            "levitate", "--model", "image", "--remanence", "1.22T", "--radius", "0.5mm", "--height", "0.5mm", "--mass",
            "2.75mg",
        ],
    );
    assert_eq!(code(&b), 0, "{}", stderr(&b));
    let zb = json(&dir.path().join("levitate.json"))["results"]["height_m"].as_f64().unwrap();
    assert!((za - zb).abs() < 1e-12 * za);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "seed = 1\nbogus = 2\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(code(&levsim(dir.path(), &["--config", cfg, "levitate", "--preset", "N52"])), 2);
    assert_eq!(code(&levsim(dir.path(), &["levitate", "--preset", "N99"])), 2);
    assert_eq!(code(&levsim(dir.path(), &["levitate", "--preset", "N52", "--temperature", "5 furlongs"])), 2);
    assert_eq!(code(&levsim(dir.path(), &["levitate", "--preset", "N52", "--model", "three-loop"])), 2);
    assert_eq!(code(&levsim(dir.path(), &["invert"])), 2);
    assert_eq!(code(&levsim(dir.path(), &["--help"])), 0);
}

#[test]
fn invalid_thread_count_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_levsim"))
        .arg("--out-dir")
        .arg(dir.path())
        .args(["levitate", "--preset", "N52", "--model", "image"])
        .env("LEVSIM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn preset_file_overrides_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let presets = dir.path().join("presets.toml");
    fs::write(
        &presets,
        "version = 1\n[[magnet]]\nlabel = \"X1\"\nradius = 0.5e-3\nheight = 0.5e-3\nmass = 2.75e-6\nremanence = 1.47\n",
    )
    .unwrap();
    let p = presets.to_str().unwrap();
    let o = levsim(dir.path(), &["--preset-file", p, "levitate", "--preset", "x1", "--model", "image"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let z = json(&dir.path().join("levitate.json"))["results"]["height_m"].as_f64().unwrap();
    assert!((z - 4.1385e-3).abs() < 1e-6);
    assert_eq!(code(&levsim(dir.path(), &["--preset-file", p, "levitate", "--preset", "N52"])), 2);
}

#[test]
fn sweep_single_preset_agrees_with_levitate() {
    let dir = tempfile::tempdir().unwrap();
    let o = levsim(dir.path(), &["levitate", "--preset", "N42", "--temperature", "50mK"]);
    assert_eq!(code(&o), 0);
    let lev = json(&dir.path().join("levitate.json"))["results"].clone();
    let o = levsim(dir.path(), &["sweep", "--presets", "N42"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "label,remanence_t,moment_a_m2,height_image_m,height_two_loop_m,onset_t_k,error"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(lines.next().is_none());
    assert_eq!(row[0], "N42");
    let image: f64 = row[3].parse().unwrap();
    let two_loop: f64 = row[4].parse().unwrap();
    let onset: f64 = row[5].parse().unwrap();
    assert!((image - lev["image_height_m"].as_f64().unwrap()).abs() < 1e-6);
    assert!((two_loop - lev["height_m"].as_f64().unwrap()).abs() < 1e-9);
    assert!((onset - lev["onset_temperature_k"].as_f64().unwrap()).abs() < 1e-9);
    assert!(row[6].is_empty());
}

#[test]
fn sweep_image_column_follows_square_root_law() {
    let dir = tempfile::tempdir().unwrap();
    let o = levsim(dir.path(), &["sweep", "--model", "image"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<Vec<String>> = csv.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        let m: f64 = row[2].parse().unwrap();
        let z: f64 = row[3].parse().unwrap();
        // z = (3 μ0 m² / (32 π M g))^(1/4)
        let closed = (3.0 * 4e-7 * std::f64::consts::PI * m * m / (32.0 * std::f64::consts::PI * 2.75e-6 * 9.81)).powf(0.25);
        assert!((z - closed).abs() < 1e-6, "{} {z} {closed}", row[0]);
    }
}

#[test]
fn freqmap_slope_and_spread() {
    let dir = tempfile::tempdir().unwrap();
    let o = levsim(dir.path(), &["freqmap", "--calibrate"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&dir.path().join("freqmap.json"));
    let rows = r["results"]["rows"].as_array().unwrap();
    let slope = rows[0]["first_radial_slope_hz_per_m"].as_f64().unwrap();
    assert!((slope / 1e9 + 50.0).abs() < 0.5, "{slope}");
    for row in rows {
        let z = row["z_m"].as_f64().unwrap();
        if z >= 0.7e-3 {
            assert!(row["relative_spread"].as_f64().unwrap() < 0.10, "{row}");
        }
    }
    let csv = fs::read_to_string(dir.path().join("freqmap.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);
    assert!(csv.starts_with("r_m,df_hz_z"));
}

#[test]
fn freqmap_round_trips_through_gridded_csv() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.csv");
    let mut text = String::from("r_m,z_m,df_hz\n");
    for r in [0.0, 1.75e-3] {
        for z in [0.0, 1e-3] {
            text.push_str(&format!("{r},{z},{}\n", -1e8 * (1.0 - z / 2e-3) - 1e10 * r));
        }
    }
    fs::write(&map, text).unwrap();
    let m = map.to_str().unwrap();
    let o = levsim(dir.path(), &["invert", "--df", "-75MHz", "--r", "0", "--map", m]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let z = json(&dir.path().join("invert.json"))["results"]["height"].as_f64().unwrap();
    assert!((z - 0.5e-3).abs() < 1e-9, "{z}");
    fs::write(&map, "r_m,z_m,df_hz\n0,0,1\n0,1e-3\n").unwrap();
    assert_eq!(code(&levsim(dir.path(), &["freqmap", "--map", m])), 2);
}

#[test]
fn invert_height_and_out_of_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = levsim(dir.path(), &["invert", "--df", "-30MHz"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = &json(&dir.path().join("invert.json"))["results"];
    let z = r["height"].as_f64().unwrap();
    assert!((z - 0.4159e-3).abs() < 1e-7, "{z}");
    let o = levsim(dir.path(), &["invert", "--df", "-300MHz"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("achievable range"), "{}", stderr(&o));
}

fn analyze(out: &Path, input: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["analyze", "--input", input.to_str().unwrap()];
    args.extend_from_slice(extra);
    levsim(out, &args)
}

#[test]
fn analyze_empty_directory_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty");
    fs::create_dir(&input).unwrap();
    assert_eq!(code(&analyze(dir.path(), &input, &[])), 5);
}

#[test]
fn analyze_synthetic_n52_shift() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("traces");
    let o = analyze(dir.path(), &input, &["--emit-synthetic", "N52", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let seg = json(&dir.path().join("segmentation.json"));
    let shift = seg["rest_to_levitated_shift_hz"].as_f64().unwrap();
    assert!((shift - 100e6).abs() < 1e6, "{shift}");
    assert_eq!(seg["records"], 121);
}

#[test]
fn analyze_n35_boundaries_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("traces");
    let o = analyze(dir.path(), &input, &["--emit-synthetic", "N35", "--seed", "11"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let seg = json(&dir.path().join("segmentation.json"));
    let segs = seg["segments"].as_array().unwrap();
    let starts: Vec<i64> = segs.iter().map(|s| s["start"].as_i64().unwrap()).collect();
    for (got, want) in starts[1..].iter().zip([66, 95, 113]) {
        assert!((got - want).abs() <= 1, "{starts:?}");
    }
    let regions: Vec<&str> = segs.iter().map(|s| s["region"].as_str().unwrap()).collect();
    assert_eq!(regions, ["rest", "fluctuation", "transition", "levitated"]);
    let first = fs::read(dir.path().join("cooldown.csv")).unwrap();
    let o = analyze(dir.path(), &input, &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(first, fs::read(dir.path().join("cooldown.csv")).unwrap());
}

#[test]
fn analyze_manifest_matches_directory_scan() {
    let dir = tempfile::tempdir().unwrap();
    let scan = dir.path().join("scan");
    let o = analyze(dir.path(), &scan, &["--emit-synthetic", "N35", "--seed", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let expected = fs::read_to_string(dir.path().join("cooldown.csv")).unwrap();

    let listed = dir.path().join("listed");
    fs::create_dir(&listed).unwrap();
    let mut manifest = String::from("file,temperature_k\n");
    for (i, entry) in fs::read_dir(&scan).unwrap().enumerate() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap();
        let mk: f64 = name.trim_start_matches("T_").trim_end_matches("mK.s2p").parse().unwrap();
        let target = format!("trace_{i:03}.s2p");
        fs::copy(&path, listed.join(&target)).unwrap();
        manifest.push_str(&format!("{target},{mk}e-3\n"));
    }
    fs::write(listed.join("manifest.csv"), manifest).unwrap();
    let out = dir.path().join("out2");
    let o = analyze(&out, &listed, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(expected, fs::read_to_string(out.join("cooldown.csv")).unwrap());
}

#[test]
fn analyze_csv_traces_and_corrupt_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("csv");
    fs::create_dir(&input).unwrap();
    for (i, mk) in [900, 800, 700].iter().enumerate() {
        let fit = ResonanceFit {
            f0: 10e9 + 1e6 * i as f64,
            q_loaded: 2500.0,
            amplitude: 1e-2,
            baseline: 1e-4,
            rms_residual: 0.0,
        };
        let trace = synth_trace(&fit, f64::INFINITY, 0).unwrap();
        let mut buf = Vec::new();
        write_csv_trace(&trace, &mut buf).unwrap();
        fs::write(input.join(format!("T_{mk}mK.csv")), buf).unwrap();
    }
    fs::write(input.join("T_600mK.csv"), "freq_hz,s21_db,s21_deg\n1,2\n").unwrap();
    let o = analyze(dir.path(), &input, &["--reference", "10GHz"]);
    // Three records are too few to segment, but the cooldown table is still written.
    let csv = fs::read_to_string(dir.path().join("cooldown.csv")).unwrap();
    assert!(stderr(&o).contains("T_600mK.csv"), "{}", stderr(&o));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let df: f64 = rows[2].split(',').nth(3).unwrap().parse().unwrap();
    assert!((df - 2e6).abs() < 1.0, "{df}");
}
