//! Compiles and runs a C program against the generated header and the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "marcin_lab.h"

int main(void) {
    double re[4] = {1.0, 1.0, 1.0, -1.0};
    MlMatrix *m = NULL;
    if (ml_matrix_new(2, 2, re, NULL, &m) != ML_STATUS_OK) return 1;
    MlEstimate *e = NULL;
    if (ml_estimate_h(m, ML_MODE_STRONG, 2.0, 0.0, 7, 0, &e) != ML_STATUS_OK) return 2;
    double lower = ml_estimate_lower_bound(e), upper = 0.0;
    if (ml_estimate_upper_bound(e, &upper) != ML_STATUS_OK || upper < lower) return 3;
    if (ml_matrix_new(1, 1, NULL, NULL, &m) != ML_STATUS_NULL_POINTER) return 4;
    if (ml_last_error()[0] == '\0') return 5;
    printf("%.17g\n", lower);
    ml_estimate_free(e);
    ml_matrix_free(m);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test> -> target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libmarcin_lab_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(root.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let lower: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(lower > 0.0);
}
