use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn levp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levp"))
        .args(args)
        .output()
        .expect("spawn levp")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generated_matrix_solves_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("a.txt");
    let out = levp(&["gen", "--synthetic", "n=40,l1=108,seed=3", "--out", path_arg(&matrix)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let traces = dir.path().join("traces");
    let out = levp(&[
        "solve",
        "--matrix",
        path_arg(&matrix),
        "--method",
        "SCD-Grad-LS(1)",
        "--seeds",
        "3",
        "--out",
        path_arg(&traces),
    ]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("reference lambda1 108.0000000000"), "{text}");
    assert_eq!(text.matches("  converged  ").count(), 3, "{text}");
    for seed in 0..3 {
        let trace = fs::read_to_string(traces.join(format!("SCD-Grad-LS_1__k1_seed{seed}.csv"))).unwrap();
        assert!(trace.starts_with("iteration,col_access,f,eps_obj,eps_energy,eps_tan"));
        assert!(trace.lines().count() > 2);
    }
}

#[test]
fn bench_writes_summary_for_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bench.json");
    let out_dir = dir.path().join("out");
    fs::write(
        &config,
        format!(
            r#"{{"matrix": {{"synthetic": "n=60,l1=108,seed=1"}}, "seeds": 2, "out": {:?},
                "methods": [{{"method": "GCD-LS-LS"}}, {{"method": "PM"}}, {{"method": "SCD-Grad-LS", "t": 2, "k": 4, "averaged": true}}]}}"#,
            out_dir
        ),
    )
    .unwrap();
    let out = levp(&["bench", "--config", path_arg(&config)]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "Method,k,MinIter,MedIter,MaxIter,TotalColAccess");
    assert_eq!(rows.len(), 4, "{summary}");
    assert!(rows[1].starts_with("GCD-LS-LS,1,"));
    assert!(rows[2].starts_with("PM,60,"));
    assert!(rows[3].starts_with("SCD-Grad-LS(2)") && rows[3].contains(",4,"));
}

#[test]
fn hubbard_info_reports_sector_structure() {
    let out = levp(&["hubbard", "info", "--l", "4", "4", "--nup", "3", "--ndown", "3"]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("Dim 19600"), "{text}");
    assert!(text.contains("nnz per col min 100 med 102 max 112"), "{text}");
    assert!(text.contains("sector momentum (2, 2)"), "{text}");
}

#[test]
fn exhausted_budget_exits_with_one() {
    let out = levp(&[
        "solve",
        "--synthetic",
        "n=50,l1=108,seed=0",
        "--method",
        "CD-Cyc-LS",
        "--max-col-access",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).contains("do not converge"));
}

#[test]
fn usage_errors_exit_with_two() {
    let out = levp(&["solve", "--synthetic", "n=50,l1=108,seed=0", "--method", "GCD-Foo-LS"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = levp(&["solve", "--method", "PM"]);
    assert_eq!(out.status.code(), Some(2));
}
