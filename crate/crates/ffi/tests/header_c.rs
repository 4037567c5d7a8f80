use std::path::Path;
use std::process::Command;

// Compiles a small C client against the header; skipped when no C compiler is found.
#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("client.c");
    std::fs::write(
        &src,
        r#"
#include "coded_aperture.h"
int run(void) {
    CaPrior *p = NULL;
    CaDesign *d = NULL;
    CaConfig c = { 64, 1000.0, 1e-3, 1e-3 };
    double beta = 0.0;
    if (ca_beta(64, &beta) != CA_STATUS_OK) return 1;
    if (ca_prior_iid(1.0, &p) != CA_STATUS_OK) return 2;
    CaStatus s = ca_design_nazarov(c, p, 1, &d);
    ca_design_free(d);
    ca_prior_free(p);
    return s == CA_STATUS_OK ? 0 : 3;
}
"#,
    )
    .unwrap();
    let Ok(out) = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
