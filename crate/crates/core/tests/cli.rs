use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn ainfty(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ainfty"))
        .args(args)
        .env_remove("AINFTY_MAX_ARITY")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, text: &str) -> String {
    let p = std::env::temp_dir().join(format!("ainfty-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn check_s1_is_clean() {
    let o = ainfty(&["check", &fixture("s1.ainf")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "SUMMARY doc=s1 kind=algebra max_arity=4 findings=0\n");
}

#[test]
fn solve_bc_on_s1() {
    let o = ainfty(&[
        "solve-bc",
        &fixture("s1.ainf"),
        "--module",
        &fixture("s1-mod.ainf"),
        "--cyclic",
        "u",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "b = 1*x\n");
}

#[test]
fn solve_bc_rejects_a_non_cyclic_element() {
    let o = ainfty(&[
        "solve-bc",
        &fixture("s1.ainf"),
        "--module",
        &fixture("s1-mod.ainf"),
        "--cyclic",
        "2*u",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("REJECTED "));
}

#[test]
fn pentagon_has_five_facets() {
    let o = ainfty(&[
        "trees",
        "--moduli",
        "M",
        "--leaves",
        "4",
        "--codim",
        "1",
        "--count-only",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "5\n");
}

#[test]
fn cohomology_lines() {
    let o = ainfty(&["cohomology", &fixture("trunc3.ainf")]);
    assert_eq!(stdout(&o), "0 b=1 tors=[]\n1 b=0 tors=[]\n2 b=0 tors=[2]\n");
}

#[test]
fn broken_algebra_is_a_finding() {
    let text = "algebra bad kmax=1\ngen x deg=0 filt=0/1\ngen y deg=1 filt=0/1\ngen z deg=2 filt=0/1\nop m1: x -> 1*y\nop m1: y -> 1*z\n";
    let o = ainfty(&["check", &scratch("bad.ainf", text)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("RESIDUAL arity=1 inputs=x value=1*z"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn semantic_errors_exit_two() {
    let text = "algebra a kmax=2\ngen x deg=1 filt=0/1\nop m2: x x -> 1*x\n";
    let o = ainfty(&["check", &scratch("deg.ainf", text)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("m2: x x"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ainfty(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        ainfty(&["trees", "--moduli", "Q", "--leaves", "3"]).status.code(),
        Some(2)
    );
}

#[test]
fn max_arity_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_ainfty"))
        .args(["check", &fixture("s1.ainf")])
        .env("AINFTY_MAX_ARITY", "6")
        .output()
        .unwrap();
    assert_eq!(stdout(&o), "SUMMARY doc=s1 kind=algebra max_arity=6 findings=0\n");
    let o = ainfty(&["check", &fixture("s1.ainf"), "--max-arity", "3"]);
    assert_eq!(stdout(&o), "SUMMARY doc=s1 kind=algebra max_arity=3 findings=0\n");
}

#[test]
fn deform_writes_a_flat_algebra() {
    let out = std::env::temp_dir().join(format!("ainfty-cli-{}-deformed.ainf", std::process::id()));
    let o = ainfty(&[
        "deform",
        &fixture("s1.ainf"),
        "--element",
        "1*x",
        "--output",
        &out.display().to_string(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("CURVATURE value=0\n"));
    let o = ainfty(&["check", &out.display().to_string()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn representable_yoneda() {
    let o = ainfty(&[
        "representable",
        &fixture("trunc.ainf"),
        "--module",
        &fixture("trunc-yoneda.ainf"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("REPRESENTABLE value=true"));
}

#[test]
fn limit_of_truncations() {
    let o = ainfty(&["limit", &fixture("trunc3.ainf")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("RESTRICTION defects=0"));
}

#[test]
fn yoneda_output_parses_back() {
    let o = ainfty(&["yoneda", &fixture("trunc.ainf")]);
    let text = stdout(&o);
    assert_eq!(text, std::fs::read_to_string(fixture("trunc-yoneda.ainf")).unwrap());
}

#[test]
fn reports_are_deterministic() {
    let runs: Vec<&[&str]> = vec![
        &["trees", "--moduli", "N", "--leaves", "4"],
        &["check", "--algebra", "FIX:trunc.ainf", "FIX:trunc-yoneda.ainf"],
        &["tensor", "FIX:trunc.ainf", "FIX:ext2.ainf"],
    ];
    for args in runs {
        let args: Vec<String> = args
            .iter()
            .map(|a| a.strip_prefix("FIX:").map(fixture).unwrap_or_else(|| a.to_string()))
            .collect();
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = ainfty(&refs);
        let b = ainfty(&refs);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout);
    }
}
