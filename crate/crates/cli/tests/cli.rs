use std::path::{Path, PathBuf};

use tilde_cli::{model_file, run_with};
use tilde_core::expr::parse_model;
use tilde_core::infer::{coefficient_table, fit, predict, Interval};
use tilde_core::table::{Column, DataTable, ReadOptions};

/// Small housing-like table with deterministic pseudo-noise.
fn write_houses(dir: &Path) -> PathBuf {
    let styles = ["1 Story", "2 Story", "Other"];
    let mut text = String::from("SalePrice,SqFt,Style,Fire\n");
    for i in 0..60 {
        let sqft = 800.0 + 37.0 * i as f64 + 150.0 * ((i * 7) % 5) as f64;
        let style = styles[i % 3];
        let fire = if (i * 5) % 7 < 3 { "Yes" } else { "No" };
        let noise = ((i as f64) * 1.7).sin() * 0.08;
        let log_price = 10.9
            + 0.0006 * sqft
            + if style == "2 Story" { 0.05 } else { 0.0 }
            + if fire == "Yes" { 0.07 } else { 0.0 }
            + noise;
        text.push_str(&format!("{:.0},{sqft},{style},{fire}\n", log_price.exp()));
    }
    // one incomplete row
    text.push_str(",1500,1 Story,No\n");
    let path = dir.join("houses.csv");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["tilde"];
    argv.extend_from_slice(args);
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fit_prints_table_and_saves_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_houses(dir.path());
    let model = dir.path().join("simple.json");
    let table = dir.path().join("coef.json");
    let (code, out, err) = run(&[
        "fit", "--data", s(&data), "--formula", "SalePrice ~ 1 + SqFt", "--out", s(&model), "--table-out", s(&table),
    ]);
    assert_eq!(code, 0, "{err}");
    let header = out.lines().nth(2).unwrap();
    for col in ["Coefficients", "SE", "t", "p", "2.5% CI", "97.5% CI"] {
        assert!(header.contains(col), "{header}");
    }
    assert!(out.contains("Intercept") && out.contains("SqFt"));
    assert!(out.contains("1 rows with missing values dropped"));

    // the structured table holds exactly the library's numbers
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    let frame = DataTable::read_delimited(&data, ReadOptions::default()).unwrap();
    let lib = coefficient_table(&fit(&parse_model("SalePrice ~ 1 + SqFt").unwrap(), &frame).unwrap(), 0.05).unwrap();
    for (row, lib_row) in json["rows"].as_array().unwrap().iter().zip(&lib.rows) {
        assert_eq!(row["estimate"].as_f64().unwrap(), lib_row.estimate);
        assert_eq!(row["std_error"].as_f64().unwrap(), lib_row.std_error);
        assert_eq!(row["p"].as_f64().unwrap(), lib_row.p.unwrap());
        assert_eq!(row["ci_upper"].as_f64().unwrap(), lib_row.ci_upper);
    }
    let loaded = model_file::load(&model).unwrap();
    assert_eq!(loaded.n(), 60);
}

#[test]
fn predict_with_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_houses(dir.path());
    let model = dir.path().join("m.json");
    let formula = "Log(SalePrice) ~ SqFt + C(Style) + C(Fire)";
    assert_eq!(run(&["fit", "--data", s(&data), "--formula", formula, "--out", s(&model)]).0, 0);
    let new = dir.path().join("new.csv");
    std::fs::write(&new, "SqFt,Style,Fire\n1500,2 Story,Yes\n2200,Other,No\n").unwrap();
    let csv = dir.path().join("pred.csv");
    let (code, out, err) = run(&[
        "predict", "--model", s(&model), "--data", s(&new), "--prediction-interval", "0.05", "--out", s(&csv),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("Predicted Log(SalePrice)"));
    let rows: Vec<Vec<f64>> = std::fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    let f = model_file::load(&model).unwrap();
    let frame = DataTable::read_delimited(&new, ReadOptions::default()).unwrap();
    let lib = predict(&f, &frame, Interval::Prediction(0.05)).unwrap();
    for (r, l) in rows.iter().zip(&lib.rows) {
        assert_eq!(r[0], l.fit);
        assert!(r[1] < r[0] && r[0] < r[2]);
    }

    // unseen level names the variable and row
    std::fs::write(&new, "SqFt,Style,Fire\n1500,Split,Yes\n").unwrap();
    let (code, _, err) = run(&["predict", "--model", s(&model), "--data", s(&new)]);
    assert_eq!(code, 1);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("Style") && err.contains("row 0"), "{err}");
}

#[test]
fn predict_without_model_is_a_usage_error() {
    let (code, _, err) = run(&["predict", "--data", "x.csv"]);
    assert_eq!(code, 2);
    assert!(err.contains("--model"));
}

#[test]
fn anova_single_and_nested() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_houses(dir.path());
    let full = dir.path().join("full.json");
    let reduced = dir.path().join("reduced.json");
    let f1 = "Log(SalePrice) ~ SqFt * (1 + C(Fire)) + C(Style)";
    let f2 = "Log(SalePrice) ~ SqFt + C(Style)";
    assert_eq!(run(&["fit", "--data", s(&data), "--formula", f1, "--out", s(&full)]).0, 0);
    assert_eq!(run(&["fit", "--data", s(&data), "--formula", f2, "--out", s(&reduced)]).0, 0);

    let (code, out, _) = run(&["anova", s(&full)]);
    assert_eq!(code, 0);
    assert!(out.contains("Global Test") && out.contains("- SqFt") && out.lines().last().unwrap().starts_with("Error"));

    let json = dir.path().join("nested.json");
    let (code, out, _) = run(&["anova", s(&full), s(&reduced), "--out", s(&json)]);
    assert_eq!(code, 0);
    assert!(out.contains("Full Model") && out.contains("- Reduced Model"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["rows"][1]["df"], 1);

    let (code, _, err) = run(&["anova", s(&reduced), s(&full)]);
    assert_eq!(code, 1);
    assert!(err.contains("not nested"), "{err}");
}

#[test]
fn stepwise_writes_trace_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_houses(dir.path());
    let trace = dir.path().join("trace.json");
    let model = dir.path().join("best.json");
    let (code, out, err) = run(&[
        "stepwise", "--data", s(&data), "--formula", "Log(SalePrice) ~ (1 + SqFt) * (1 + C(Fire)) * (1 + C(Style))",
        "--metric", "bic", "--direction", "forward", "--hierarchy", "--trace-out", s(&trace), "--model-out", s(&model),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("BIC | "));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    let steps = v["trace"].as_array().unwrap();
    assert_eq!(steps[0]["step"], 0);
    assert_eq!(steps[0]["action"], "start");
    assert!(model_file::load(&model).unwrap().spec().explanatory().len() >= 1);

    let (code, _, _) = run(&["stepwise", "--data", s(&data), "--formula", "Log(SalePrice) ~ SqFt", "--metric", "cp"]);
    assert_eq!(code, 2);
}

#[test]
fn plot_emits_svg_and_matching_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_houses(dir.path());
    let model = dir.path().join("m.json");
    assert_eq!(
        run(&["fit", "--data", s(&data), "--formula", "Log(SalePrice) ~ SqFt", "--out", s(&model)]).0,
        0
    );
    let svg = dir.path().join("plot.svg");
    let (code, _, err) = run(&[
        "plot", "--model", s(&model), "--prediction-band", "0.05", "--transformed-y-space", "--out", s(&svg),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(svg.with_extension("json")).unwrap()).unwrap();
    assert_eq!(v["kind"], "transformed_pair");
    let panels = v["panels"].as_array().unwrap();
    assert_eq!(panels.len(), 2);
    // the model-space curve equals predict() on the emitted grid
    let line = panels[1]["series"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["kind"] == "line")
        .unwrap();
    let xs: Vec<f64> = line["x"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let ys: Vec<f64> = line["y"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(xs.len(), 100);
    let f = model_file::load(&model).unwrap();
    let grid = DataTable::from_columns([("SqFt", Column::numeric(xs))]).unwrap();
    let p = predict(&f, &grid, Interval::None).unwrap();
    for (a, b) in p.rows.iter().zip(&ys) {
        assert_eq!(a.fit, *b);
    }

    // two quantitative variables without --x-var
    let two = dir.path().join("two.json");
    std::fs::write(dir.path().join("two.csv"), "y,a,b\n1,1,5\n2,2,3\n4,3,4\n3,4,1\n6,5,2\n").unwrap();
    let two_csv = dir.path().join("two.csv");
    assert_eq!(run(&["fit", "--data", s(&two_csv), "--formula", "y ~ a + b", "--out", s(&two)]).0, 0);
    let (code, _, err) = run(&["plot", "--model", s(&two), "--out", s(&svg)]);
    assert_eq!(code, 2);
    assert!(err.contains("--x-var"));
}

#[test]
fn diagnose_writes_panels() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_houses(dir.path());
    let model = dir.path().join("m.json");
    assert_eq!(
        run(&["fit", "--data", s(&data), "--formula", "Log(SalePrice) ~ SqFt + C(Fire)", "--out", s(&model)]).0,
        0
    );
    let out_dir = dir.path().join("diag");
    let (code, out, err) = run(&["diagnose", "--model", s(&model), "--out-dir", s(&out_dir)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 4);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("residuals.json")).unwrap()).unwrap();
    assert_eq!(v["kind"], "residual_panels");
    assert_eq!(v["panels"].as_array().unwrap().len(), 4);
    assert!(out_dir.join("residual_vs_SqFt.svg").exists());
}
