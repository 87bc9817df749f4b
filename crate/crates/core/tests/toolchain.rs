mod common;

use common::emit::{corpus_units, which};
use graphdsl::codegen::BackendKind;

#[test]
fn emitted_units_agree_with_the_interpreter() {
    let msg = common::criteria::toolchain_agreement(20).unwrap();
    println!("{msg}");
}

#[test]
fn opencl_kernels_pass_clang_syntax_check() {
    if !which("clang") {
        println!("skipped: clang not found");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    for c in corpus_units().iter().filter(|c| c.unit.backend == BackendKind::OpenCl) {
        let (name, text) = &c.unit.files[1];
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let out = std::process::Command::new("clang")
            .args(["-x", "cl", "-cl-std=CL1.2", "-fsyntax-only"])
            .arg(&path)
            .output()
            .unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
