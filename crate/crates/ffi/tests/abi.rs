use std::ffi::{CStr, CString};
use std::ptr;

use caidgeo_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(caidgeo_last_error()) }.to_string_lossy().into_owned()
}

fn options(stage: CaidgeoStage, theorem: u8) -> CaidgeoOptions {
    CaidgeoOptions {
        stage,
        theorem,
        samples: 500,
        seed: 7,
        tol: 0.0,
    }
}

#[test]
fn identity_matrix_capacity() {
    let rows = [1.0, 0.0, 0.0, 1.0];
    let mut ch = ptr::null_mut();
    unsafe {
        assert_eq!(caidgeo_channel_from_matrix(rows.as_ptr(), 2, 2, &mut ch), CaidgeoStatus::Ok);
        assert_eq!(caidgeo_channel_inputs(ch), 2);
        let mut rep = ptr::null_mut();
        assert_eq!(caidgeo_run(ch, &options(CaidgeoStage::Capacity, 1), &mut rep), CaidgeoStatus::Ok);
        assert!((caidgeo_report_capacity(rep) - 2f64.ln()).abs() < 1e-12);
        let mut p = [0.0; 2];
        assert_eq!(caidgeo_report_maximizer(rep, p.as_mut_ptr(), 2), 2);
        assert!((p[0] - 0.5).abs() < 1e-9);
        let json = CStr::from_ptr(caidgeo_report_json(rep)).to_str().unwrap();
        assert!(caidgeo::report::Report::from_json(json).is_ok());
        caidgeo_report_free(rep);
        caidgeo_channel_free(ch);
    }
}

#[test]
fn corpus_certification_and_partial() {
    unsafe {
        let mut ch = ptr::null_mut();
        let name = CString::new("appendix-b").unwrap();
        assert_eq!(caidgeo_channel_from_corpus(name.as_ptr(), &mut ch), CaidgeoStatus::Ok);
        let mut rep = ptr::null_mut();
        assert_eq!(caidgeo_run(ch, &options(CaidgeoStage::Certify, 1), &mut rep), CaidgeoStatus::Ok);
        caidgeo_report_free(rep);
        caidgeo_channel_free(ch);

        let json = CString::new(r#"{"version": 1, "corpus": "zeta", "params": {"n": 20, "truncation": 100}}"#).unwrap();
        assert_eq!(caidgeo_channel_from_json(json.as_ptr(), &mut ch), CaidgeoStatus::Ok);
        let mut rep = ptr::null_mut();
        assert_eq!(caidgeo_run(ch, &options(CaidgeoStage::Constants, 2), &mut rep), CaidgeoStatus::Partial);
        assert!(!rep.is_null());
        caidgeo_report_free(rep);
        caidgeo_channel_free(ch);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut ch = ptr::null_mut();
        let bad = CString::new("{\"version\": 1,\n\"kind\": }").unwrap();
        assert_eq!(caidgeo_channel_from_json(bad.as_ptr(), &mut ch), CaidgeoStatus::InvalidInput);
        assert!(last_error().starts_with("line 2"), "{}", last_error());
        assert!(ch.is_null());

        assert_eq!(caidgeo_channel_from_json(ptr::null(), &mut ch), CaidgeoStatus::NullPointer);
        let rows = [0.5, 0.4];
        assert_eq!(caidgeo_channel_from_matrix(rows.as_ptr(), 1, 2, &mut ch), CaidgeoStatus::InvalidInput);
        let name = CString::new("nope").unwrap();
        assert_eq!(caidgeo_channel_from_corpus(name.as_ptr(), &mut ch), CaidgeoStatus::InvalidInput);
        assert!(last_error().contains("available"));

        let name = CString::new("cq-pure-pair").unwrap();
        assert_eq!(caidgeo_channel_from_corpus(name.as_ptr(), &mut ch), CaidgeoStatus::Ok);
        let mut rep = ptr::null_mut();
        assert_eq!(caidgeo_run(ch, &options(CaidgeoStage::Constants, 9), &mut rep), CaidgeoStatus::InvalidInput);
        assert_eq!(caidgeo_run(ch, ptr::null(), &mut rep), CaidgeoStatus::NullPointer);
        assert!(rep.is_null());
        caidgeo_channel_free(ch);
        caidgeo_channel_free(ptr::null_mut());
        caidgeo_report_free(ptr::null_mut());
        assert!(caidgeo_report_capacity(ptr::null()).is_nan());
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(caidgeo_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// The generated header compiles as C when a compiler is available.
#[test]
fn header_is_valid_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = format!("{dir}/include/caidgeo.h");
    assert!(std::path::Path::new(&header).exists());
    let src = std::env::temp_dir().join("caidgeo_header_check.c");
    std::fs::write(
        &src,
        "#include \"caidgeo.h\"\nint main(void) { CaidgeoOptions o = {CAIDGEO_STAGE_CAPACITY, 1, 0, 0, 0.0}; (void)o; return caidgeo_version() == 0; }\n",
    )
    .unwrap();
    let Ok(out) = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
