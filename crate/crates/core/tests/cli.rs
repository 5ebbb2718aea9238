use qteich::cli::run;

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn qteich(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["qteich".to_string()];
    argv.extend(args.iter().map(|a| a.to_string()));
    run(&argv)
}

#[test]
fn header_records_seed_and_moduli() {
    let (code, out) = qteich(&["--seed", "42", "--moduli", "7,13", "sigma", &data("torus1.tri")]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("# qteich sigma seed=42 moduli=7,13"));
    let (_, out) = qteich(&["sigma", &data("torus1.tri")]);
    assert_eq!(out.lines().next(), Some("# qteich sigma seed=1 moduli=5,7,11"));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(qteich(&["sigma", &data("torus1.tri"), "--frobnicate"]).0, 2);
    assert_eq!(qteich(&["sigma", &data("missing.tri")]).0, 2);
    assert_eq!(qteich(&["verify", "pentagon", "--case", "7"]).0, 2);
    assert_eq!(qteich(&["change", &data("torus1.tri"), "--moves", "D4"]).0, 2);
    assert_eq!(qteich(&["change", &data("torus1.tri"), "--moves", "D1,Q"]).0, 2);
    assert_eq!(qteich(&["classical", &data("torus1.tri"), "--coords", "1,2"]).0, 2);
    assert_eq!(qteich(&["classical", &data("torus1.tri"), "--coords", "1,-2,1"]).0, 2);
    let (code, out) = qteich(&["validate", &data("broken.tri")]);
    assert_eq!(code, 2);
    assert!(out.contains("puncture count"), "{out}");
    assert!(out.contains("euler characteristic"), "{out}");
}

#[test]
fn failed_checks_exit_one() {
    let (code, out) = qteich(&["verify", "paths", &data("sphere5.tri"), "--path1", "D6,D7", "--path2", ""]);
    assert_eq!(code, 1);
    assert!(out.contains("endpoints differ"));
}

#[test]
fn every_pentagon_case_passes() {
    for case in 1..=6 {
        let (code, out) = qteich(&["verify", "pentagon", "--case", &case.to_string()]);
        assert_eq!(code, 0, "{out}");
        assert!(out.trim_end().ends_with(&format!("case {case} PASS")));
    }
}

#[test]
fn help_is_not_an_error() {
    let (code, out) = qteich(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("flipgraph"));
}

#[test]
fn classical_reports_cusped_torus() {
    let (code, out) = qteich(&["classical", &data("torus1.tri"), "--coords", "2,1,0.5"]);
    assert_eq!(code, 0);
    assert!(out.contains("p1 = 1.000000000000e0"), "{out}");
}
