use std::path::{Path, PathBuf};
use std::process::Command;

fn header_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/divfx.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header_path()).unwrap();
    for sym in [
        "divfx_beta(",
        "divfx_solution_new(",
        "divfx_solution_free(",
        "divfx_solution_barrier(",
        "divfx_solution_eval(",
        "divfx_simulate_value(",
        "divfx_sim_config_default(",
        "divfx_status_message(",
        "divfx_last_error(",
        "typedef struct DivfxSolution DivfxSolution;",
        "DIVFX_STATUS_ILL_POSED = 3",
        "DIVFX_MODE_UNRESTRICTED",
        "#ifndef DIVFX_H",
    ] {
        assert!(h.contains(sym), "missing `{sym}`");
    }
}

fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let deps = exe.parent()?;
    [
        deps.parent()?.join("libdivfx_ffi.a"),
        deps.join("libdivfx_ffi.a"),
    ]
    .into_iter()
    .find(|p| p.exists())
}

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "divfx.h"

int main(void) {
    DivfxAtom atoms[2] = {{log(5.0), 1.0}, {-log(1.25), 1.0}};
    DivfxTriplet fx = {0.5, atoms, 2, NULL, 0.0, 1};
    double beta = 0.0;
    int32_t integrable = 0;
    if (divfx_beta(&fx, -0.25, &beta, &integrable) != DIVFX_STATUS_OK) return 1;

    DivfxSolution *sol = NULL;
    if (divfx_solution_new(1.0, 1.0, 0.5, 1.0, DIVFX_MODE_RESTRICTED, &sol) != DIVFX_STATUS_OK) return 2;
    double barrier = 0.0, value = 0.0;
    divfx_solution_barrier(sol, &barrier);
    divfx_solution_eval(sol, 1.0, &value, NULL);
    DivfxStatus bad = divfx_solution_eval(sol, -1.0, &value, NULL);
    divfx_solution_free(sol);

    printf("%.12f %d %.6f %d %s\n", beta, integrable, barrier, (int)bad, divfx_last_error());
    return 0;
}
"#;

#[test]
fn c_program_links_against_static_library() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not found next to the test binary; skipping link test");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let compiled = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header_path().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .output();
    let compiled = match compiled {
        Ok(o) => o,
        Err(e) => {
            eprintln!("no C compiler ({cc}: {e}); skipping link test");
            return;
        }
    };
    assert!(
        compiled.status.success(),
        "{}",
        String::from_utf8_lossy(&compiled.stderr)
    );
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success());
    let out = String::from_utf8(run.stdout).unwrap();
    let fields: Vec<&str> = out.split_whitespace().collect();
    assert!(
        (fields[0].parse::<f64>().unwrap() - 0.05).abs() < 1e-12,
        "{out}"
    );
    assert_eq!(fields[1], "1");
    assert_eq!(fields[2], "0.623225");
    assert_eq!(fields[3], "4");
    assert!(out.contains("surplus must be nonnegative"));
}
