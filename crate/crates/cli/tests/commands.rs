use std::path::PathBuf;

use recipe_temporal_cli::run;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn rtime(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("rtime").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn check_exit_codes() {
    assert_eq!(rtime(&["check", &fixture("lutheran.rcp")]).0, 0);
    assert_eq!(rtime(&["check", &fixture("chilli.rcp")]).0, 0);
    let (code, out, _) = rtime(&["check", &fixture("cyclic.rcp")]);
    assert_eq!(code, 1);
    assert_eq!(out, "base: inconsistent\n");
}

#[test]
fn parse_errors_exit_two() {
    let dir = std::env::temp_dir().join(format!("rtime-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.rcp");
    std::fs::write(&bad, "recipe \"x\"\nstep a frobnicate\n").unwrap();
    let (code, out, err) = rtime(&["check", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("line 2"), "{err}");

    let (code, _, err) = rtime(&["check", "recipe.txt"]);
    assert_eq!(code, 2);
    assert!(err.contains(".rcp"));
    assert_eq!(rtime(&["check", &fixture("missing.rcp")]).0, 2);
    assert_eq!(rtime(&["frobnicate"]).0, 2);
    assert_eq!(rtime(&["--help"]).0, 0);
}

#[test]
fn query_lutheran() {
    let (code, out, _) = rtime(&["query", &fixture("lutheran.rcp"), "mince_garlic", "prepare_pasta"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("{b}"));
    assert_eq!(lines.next(), Some("prepare_pasta- - mince_garlic+ in (0, inf)"));

    let (code, _, err) = rtime(&["query", &fixture("lutheran.rcp"), "mince_garlic", "nothing"]);
    assert_eq!(code, 2);
    assert!(err.contains("nothing"));
}

#[test]
fn query_labels_scenarios() {
    let (code, out, _) = rtime(&["query", &fixture("chilli.rcp"), "add_chillis", "fry_onions"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("[base]\nabsent: add_chillis\n[hot]\n"), "{out}");
}

#[test]
fn adapt_lentils() {
    let (code, out, _) = rtime(&["adapt", &fixture("lutheran.rcp"), &fixture("lentils.rcp")]);
    assert_eq!(code, 0);
    assert!(out.contains("relaxed 0\n"));
    assert!(out.contains("edits 2\n"));
    assert!(out.contains("insert-after \"Cook the lentils"));
}

#[test]
fn timeml_snippet() {
    let (code, out, _) = rtime(&["timeml", &fixture("snippet.tml")]);
    assert_eq!(code, 0);
    assert!(out.contains("e1 e2 {di}\n"));
    assert!(out.ends_with("consistent\n"));
}

#[test]
fn workflow_matches_golden() {
    let (code, out, _) = rtime(&["workflow", &fixture("lutheran.rcp")]);
    assert_eq!(code, 0);
    let golden = std::fs::read_to_string(fixture("lutheran.dot")).unwrap();
    assert_eq!(out, golden);
}

#[test]
fn outputs_are_byte_stable() {
    let cases: Vec<Vec<String>> = vec![
        vec!["close".into(), fixture("lutheran.rcp")],
        vec!["close".into(), fixture("chilli.rcp")],
        vec!["workflow".into(), fixture("simmer.rcp")],
        vec!["workflow".into(), fixture("chilli.rcp")],
        vec!["adapt".into(), fixture("lutheran.rcp"), fixture("lentils.rcp")],
        vec!["timeml".into(), fixture("snippet.tml")],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = rtime(&args);
        for _ in 0..3 {
            assert_eq!(rtime(&args), first, "{args:?}");
        }
    }
}
