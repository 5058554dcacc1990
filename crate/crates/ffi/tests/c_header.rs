use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "phasecore.h"

int main(void) {
    PcEnsemble *e = NULL;
    PcEstimate *est = NULL;
    PcCertificate cert;
    PcBoundParams p = {0.1, 0.5, 0.5, 1.0, 0.1, 1.0, 0, 0, 0};
    PcBoundResult r;
    if (pc_ensemble_new_random(1, 0, 16, 512, &e) != PC_STATUS_OK) return 1;
    if (pc_estimate_null(e, 64, &est) != PC_STATUS_OK) return 2;
    if (pc_certify(e, est, &cert) != PC_STATUS_OK || !cert.holds) return 3;
    if (pc_bound_evaluate(&p, &r) != PC_STATUS_OK) return 4;
    if (fabs(r.err_rhs - 41.541935586636709) > 1e-9) return 5;
    if (pc_estimate_null(e, 4, NULL) != PC_STATUS_NULL_POINTER) return 6;
    if (pc_last_error_message() == NULL) return 7;
    pc_estimate_free(est);
    pc_ensemble_free(e);
    printf("ok %s\n", pc_version());
    return 0;
}
"#;

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn compiler() -> Option<&'static str> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(header_dir().join("phasecore.h")).unwrap();
    for sym in [
        "PcStatus",
        "PcEnsemble",
        "PcEstimate",
        "pc_ensemble_new_random",
        "pc_ensemble_from_parts",
        "pc_estimate_null",
        "pc_estimate_spectral",
        "pc_certify",
        "pc_bound_evaluate",
        "pc_tau_star",
        "pc_chi2_cdf",
        "pc_last_error_message",
        "pc_version",
    ] {
        assert!(h.contains(sym), "{sym} missing from header");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let profile_dir = tmp.parent().unwrap().join(if cfg!(debug_assertions) {
        "debug"
    } else {
        "release"
    });
    let lib = profile_dir.join("libphasecore_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let src = tmp.join("pc_smoke.c");
    let exe = tmp.join("pc_smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
