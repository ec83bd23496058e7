mod common;

use common::fixture_path;
use ottrkit_cli::cli::run;

fn ottrkit(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("ottrkit".to_string()).chain(args.iter().map(|a| {
        if a.contains(".stottr") || a.contains(".toml") || a.contains(".csv") {
            fixture_path(a).display().to_string()
        } else {
            a.to_string()
        }
    }));
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn check_reports_clean_and_cyclic_libraries() {
    let (code, out, _) = ottrkit(&["check", "-l", "pizza.stottr"]);
    assert_eq!(code, 0);
    assert_eq!(out, "2 template(s), 0 error(s), 0 warning(s)\n");
    let (code, out, _) = ottrkit(&["check", "-l", "cycle.stottr"]);
    assert_eq!(code, 1);
    assert!(out.contains("E_CYCLE"));
}

#[test]
fn usage_and_io_errors_exit_2() {
    assert_eq!(ottrkit(&["frobnicate"]).0, 2);
    assert_eq!(ottrkit(&["expand", "-l", "pizza.stottr"]).0, 2);
    assert_eq!(ottrkit(&["check", "-l", "/nonexistent/lib.stottr"]).0, 2);
    assert_eq!(ottrkit(&["--help"]).0, 0);
}

#[test]
fn expand_formats_and_output_file() {
    let (code, nt, _) = ottrkit(&["expand", "-l", "pizza.stottr", "-i", "pizza_instances.stottr"]);
    assert_eq!(code, 0);
    assert_eq!(nt.lines().count(), 3);
    let (code, ttl, _) = ottrkit(&["expand", "-l", "pizza.stottr", "-i", "pizza_instances.stottr", "--format", "turtle"]);
    assert_eq!(code, 0);
    assert!(ttl.contains("owl:Class"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.nt");
    let (code, stdout, _) =
        ottrkit(&["expand", "-l", "pizza.stottr", "-i", "pizza_instances.stottr", "-o", out.to_str().unwrap()]);
    assert_eq!((code, stdout.as_str()), (0, ""));
    assert_eq!(std::fs::read_to_string(out).unwrap(), nt);
}

#[test]
fn ill_typed_instances_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.stottr");
    std::fs::write(&bad, "pz:Pizza(<http://ex.org/x>) .\n").unwrap();
    let (code, _, err) = ottrkit(&["expand", "-l", "pizza.stottr", "-i", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("E_ARITY"), "{err}");
}

#[test]
fn published_only_filters_by_status() {
    let dir = tempfile::tempdir().unwrap();
    let insts = dir.path().join("m.stottr");
    std::fs::write(
        &insts,
        "@prefix ex: <http://ex.org/> .\n\
         mat:Material(ex:a, \"A\", \"published\") .\n\
         mat:Material(ex:b, \"B\", \"draft\") .\n\
         mat:Material(ex:c, \"C\", none) .\n",
    )
    .unwrap();
    let path = insts.to_str().unwrap();
    let (_, all, _) = ottrkit(&["expand", "-l", "materials.stottr", "-i", path]);
    let (code, published, _) = ottrkit(&["expand", "-l", "materials.stottr", "-i", path, "--published-only"]);
    assert_eq!(code, 0);
    assert!(all.contains("http://ex.org/b") && all.contains("http://ex.org/c"));
    assert!(published.contains("http://ex.org/a"));
    assert!(!published.contains("http://ex.org/b") && !published.contains("http://ex.org/c"));
}

#[test]
fn lint_exit_codes_follow_severity() {
    let (code, out, _) = ottrkit(&["lint", "-l", "people.stottr", "-i", "people_shared.stottr"]);
    assert_eq!(code, 0, "warnings only");
    assert!(out.contains("R_OUTPUT_REDUNDANCY"));
    let (code, out, _) = ottrkit(&["lint", "-l", "axiom_scatter.stottr", "--json"]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["R_AXIOM_SCATTER"].as_array().unwrap().len(), 1);
    let (code, _, _) = ottrkit(&["lint", "-l", "pizza.stottr", "--config", "lint.toml"]);
    assert_eq!(code, 0);
}

#[test]
fn doc_formats() {
    let (code, md, _) = ottrkit(&["doc", "-l", "pizza.stottr", "--docs", "pizza.docs.toml"]);
    assert_eq!(code, 0);
    assert!(md.starts_with("# Template library"));
    assert!(md.contains("Toppings and bases are not modelled"));
    let (code, dot, _) = ottrkit(&["doc", "-l", "pizza.stottr", "--format", "dot"]);
    assert_eq!(code, 0);
    assert!(dot.starts_with("digraph templates {"));
    let (_, md, _) = ottrkit(&["doc", "-l", "materials.stottr", "-w", "materials.workflow.toml"]);
    assert!(md.contains("material-measurement"));
}

#[test]
fn workflow_validate_flags_disconnection() {
    let (code, out, _) = ottrkit(&["workflow", "validate", "-l", "materials.stottr", "-w", "materials.workflow.toml"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("m: 1 component(s)\np: 1 component(s)\n"));
    let (code, out, _) =
        ottrkit(&["workflow", "validate", "-l", "materials.stottr", "-w", "materials_noref.workflow.toml"]);
    assert_eq!(code, 1);
    assert!(out.contains("p: 2 component(s) DISCONNECTED"));
    let (code, _, _) = ottrkit(&[
        "workflow",
        "validate",
        "-l",
        "materials.stottr",
        "-w",
        "materials.workflow.toml",
        "--inputs",
        "materials.inputs.toml",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn ingest_reports_bad_rows() {
    let (code, out, err) =
        ottrkit(&["ingest", "-l", "materials.stottr", "--mapping", "measurements.mapping.toml", "--data", "measurements.csv"]);
    assert_eq!(code, 1);
    assert_eq!(out.lines().count(), 8);
    assert!(err.contains("row 4") && err.contains("row 6"));
    assert!(err.contains("8 of 10 row(s) ingested"));
    let (code, out, _) = ottrkit(&["ingest", "-l", "pizza.stottr", "--mapping", "pizzas.mapping.toml", "--data", "pizzas.csv", "--triples"]);
    assert_eq!(code, 0);
    assert!(out.lines().all(|l| l.ends_with(" .")));
}

#[test]
fn binary_runs() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_ottrkit"))
        .args(["check", "-l"])
        .arg(fixture_path("cycle.stottr"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
