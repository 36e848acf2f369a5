//! Golden cases shared by the golden and acceptance suites.

use std::path::{Path, PathBuf};
use std::process::Command;

pub const CASES: &[(&str, &[&str], &str, i32)] = &[
    ("ex1_budget", &["budget"], "ex1", 0),
    ("ex1_rank", &["rank"], "ex1", 0),
    ("ex1_graph", &["rank", "--graph"], "ex1", 0),
    ("ex1_weak_graph", &["rank", "--graph", "--weak"], "ex1", 0),
    ("ex1_verify", &["verify"], "ex1", 0),
    ("ex2_budget", &["budget"], "ex2", 0),
    ("ex2_verify", &["verify"], "ex2", 0),
    ("ex2_prev_budget", &["budget"], "ex2_prev", 0),
    ("ex2_index_budget", &["budget", "--tiebreak", "index"], "ex2", 0),
    ("submarines_budget", &["budget"], "submarines", 0),
    ("submarines_verify", &["verify"], "submarines", 0),
    ("sections_hierarchy", &["hierarchy"], "sections", 0),
    ("sections_whatif", &["whatif", "--limits", "A=2,B=0"], "sections", 0),
    ("sections_whatif_unknown", &["whatif", "--limits", "C=1"], "sections", 1),
    ("malformed_budget", &["budget"], "malformed", 1),
    ("oversized_verify", &["verify"], "oversized", 2),
    ("random_verify", &["verify", "--random", "200", "--seed", "7"], "ex1", 0),
];

pub fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Returns stdout on success and stderr otherwise, plus the exit code.
pub fn invoke(args: &[&str], input: &str) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_dembudget"))
        .args(args)
        .arg("--input")
        .arg(dir().join(format!("{input}.json")))
        .current_dir(dir())
        .output()
        .unwrap();
    let code = out.status.code().unwrap();
    let bytes = if code == 0 { out.stdout } else { out.stderr };
    let text = String::from_utf8(bytes).unwrap();
    // Paths in error messages depend on the checkout location.
    (text.replace(&dir().display().to_string(), "<golden>"), code)
}
