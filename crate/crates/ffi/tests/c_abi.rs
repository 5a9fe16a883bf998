use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use aimg_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(aimg_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn group_genus_and_commutator() {
    unsafe {
        let mut g = ptr::null_mut();
        let json = c(r#"{"level": 2, "gens": [[1,1,0,1]]}"#);
        assert_eq!(aimg_group_from_json(json.as_ptr(), &mut g), AimgStatus::Ok);
        let mut out = 99u64;
        assert_eq!(aimg_group_genus(g, &mut out), AimgStatus::Ok);
        assert_eq!(out, 0);
        assert_eq!(aimg_group_commutator_index(g, &mut out), AimgStatus::Ok);
        assert_eq!(out, 4);
        aimg_group_free(g);

        let full = c(r#"{"level": 1, "gens": []}"#);
        assert_eq!(aimg_group_from_json(full.as_ptr(), &mut g), AimgStatus::Ok);
        assert_eq!(aimg_group_commutator_index(g, &mut out), AimgStatus::Ok);
        assert_eq!(out, 2);
        aimg_group_free(g);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut g = ptr::null_mut();
        let bad = c("{\"level\": 4, \"gens\": [[2,0,0,2]]}");
        assert_eq!(aimg_group_from_json(bad.as_ptr(), &mut g), AimgStatus::Group);
        assert!(last_error().contains("invertible"));
        assert_eq!(aimg_group_from_json(ptr::null(), &mut g), AimgStatus::NullPointer);
        let junk = c("{level");
        assert_eq!(aimg_group_from_json(junk.as_ptr(), &mut g), AimgStatus::Parse);
        let mut out = 0u64;
        assert_eq!(aimg_group_genus(ptr::null(), &mut out), AimgStatus::NullPointer);
        aimg_group_free(ptr::null_mut());
        aimg_string_free(ptr::null_mut());
    }
}

#[test]
fn left_factor_round_trip() {
    unsafe {
        let (mut pi, mut u, mut j) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(aimg_map_parse(c("t^2+1728").as_ptr(), &mut pi), AimgStatus::Ok);
        assert_eq!(aimg_map_parse(c("t^2").as_ptr(), &mut u), AimgStatus::Ok);
        assert_eq!(aimg_solve_left_factor(pi, u, &mut j), AimgStatus::Ok);
        let s = aimg_map_to_string(j);
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), "t + 1728");
        aimg_string_free(s);
        aimg_map_free(j);

        let mut w = ptr::null_mut();
        assert_eq!(aimg_map_parse(c("t^3").as_ptr(), &mut w), AimgStatus::Ok);
        assert_eq!(aimg_solve_left_factor(pi, w, &mut j), AimgStatus::NoDecomposition);
        for m in [pi, u, w] {
            aimg_map_free(m);
        }
    }
}

#[test]
fn curve_check_on_sample_catalog() {
    unsafe {
        let mut cat = ptr::null_mut();
        assert_eq!(aimg_catalog_sample(&mut cat), AimgStatus::Ok);
        let mut v = AimgCurveVerdict::NotMember;
        let mut w = ptr::null_mut();
        let label = c("2A-2A");
        assert_eq!(aimg_check_curve(cat, label.as_ptr(), c("1732").as_ptr(), &mut v, &mut w), AimgStatus::Ok);
        assert_eq!(v, AimgCurveVerdict::Member);
        assert_eq!(CStr::from_ptr(w).to_str().unwrap(), "2");
        aimg_string_free(w);
        assert_eq!(aimg_check_curve(cat, label.as_ptr(), c("1728").as_ptr(), &mut v, ptr::null_mut()), AimgStatus::Ok);
        assert_eq!(v, AimgCurveVerdict::ExcludedJ);
        assert_eq!(aimg_check_curve(cat, label.as_ptr(), c("1727").as_ptr(), &mut v, &mut w), AimgStatus::Ok);
        assert_eq!(v, AimgCurveVerdict::NotMember);
        assert!(w.is_null());
        let nope = c("9Z-9Z");
        assert_eq!(aimg_check_curve(cat, nope.as_ptr(), c("5").as_ptr(), &mut v, &mut w), AimgStatus::UnknownLabel);
        aimg_catalog_free(cat);

        let genus3 = c(r#"{"entries":[{"label":"7X","group":{"level":7,"gens":[[1,0,0,1]]},"pi":"t","u":"t"}]}"#);
        assert_eq!(aimg_catalog_from_json(genus3.as_ptr(), &mut cat), AimgStatus::InvariantViolation);
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "aimg.h"

int main(void) {
    AimgGroup *g = NULL;
    uint64_t idx = 0, gen = 9;
    if (aimg_group_from_json("{\"level\": 1, \"gens\": []}", &g) != AIMG_STATUS_OK) return 1;
    if (aimg_group_commutator_index(g, &idx) != AIMG_STATUS_OK || idx != 2) return 2;
    if (aimg_group_genus(g, &gen) != AIMG_STATUS_OK || gen != 0) return 3;
    aimg_group_free(g);
    AimgMap *pi = NULL, *u = NULL, *j = NULL;
    aimg_map_parse("t^2+1728", &pi);
    aimg_map_parse("t^2", &u);
    if (aimg_solve_left_factor(pi, u, &j) != AIMG_STATUS_OK) return 4;
    char *s = aimg_map_to_string(j);
    int bad = strcmp(s, "t + 1728") != 0;
    aimg_string_free(s);
    aimg_map_free(pi); aimg_map_free(u); aimg_map_free(j);
    if (bad) return 5;
    if (aimg_group_from_json("nope", &g) != AIMG_STATUS_PARSE || strlen(aimg_last_error()) == 0) return 6;
    printf("ok\n");
    return 0;
}
"#;

#[test]
fn header_compiles_and_links_from_c() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include/aimg.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build.rs");
    for f in ["aimg_group_commutator_index", "aimg_solve_left_factor", "aimg_check_curve", "AIMG_STATUS_OK"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libaimg_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
