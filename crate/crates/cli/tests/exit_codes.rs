use fracwalk_cli::run;

fn exec(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("fracwalk").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn success_and_header() {
    let (code, out, _) = exec(&["generate", "--p", "5..7"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# fracwalk "));
    assert!(lines[1].starts_with("# config: {"));
    assert_eq!(lines[2], "# seed: 0");
    assert!(out.contains("5,0,1,120,120,true"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["mix", "--p", "4"][..],
        &["mix", "--p", "3"],
        &["hyperbola", "--p", "101", "--m", "51"],
        &["spectrum", "--p", "x"],
        &["frobnicate"],
        &["mix"],
    ] {
        let (code, _, err) = exec(args);
        assert_eq!(code, 1, "{args:?}");
        assert!(!err.is_empty());
    }
    let (_, _, err) = exec(&["mix", "--p", "4"]);
    assert!(err.contains("not prime"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(exec(&["--version"]).0, 0);
    assert_eq!(exec(&["--help"]).0, 0);
}

#[test]
fn json_output_parses() {
    let (code, out, _) = exec(&["compare", "--p", "11", "--trials", "10", "--format", "json"]);
    assert_eq!(code, 0);
    assert!(out.trim_start().starts_with('{'));
    assert!(out.contains("\"gap_transfer_ok\": true"));
}

#[test]
fn threads_do_not_change_output() {
    let a = exec(&["hyperbola", "--p", "101", "--m", "20..24", "--threads", "1"]).1;
    let b = exec(&["hyperbola", "--p", "101", "--m", "20..24", "--threads", "3"]).1;
    assert_eq!(a, b);
}
