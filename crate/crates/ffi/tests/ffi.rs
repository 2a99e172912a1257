use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use riskdomain::bundle::{load_bundle, save_bundle};
use riskdomain::classification::{fit_pipeline, ModelKind, PipelineParams};
use riskdomain::corpus::synth::{generate_synthetic_corpus, SynthConfig};
use riskdomain_ffi::*;

const TEXT: &str = "Patient reports cocaine and marijuana use, smoked daily; alcohol addiction noted.";

fn make_bundle(dir: &Path, kind: ModelKind) -> PathBuf {
    let corpus = generate_synthetic_corpus(&SynthConfig::standard().with_counts(30), 3).unwrap();
    let params = PipelineParams {
        svd_k: 30,
        clamp_prototypes: true,
        ..PipelineParams::for_kind(kind)
    };
    let (pipeline, report) = fit_pipeline(&corpus.paragraphs, &corpus.lexicon, &params).unwrap();
    let out = dir.join(kind.name());
    save_bundle(&out, &pipeline, &params, Some(&report)).unwrap();
    out
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(rd_last_error_message()) }
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn classify_matches_the_library() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in [ModelKind::Cosine, ModelKind::Mlp, ModelKind::Rbf] {
        let dir = make_bundle(tmp.path(), kind);
        let (pipeline, _) = load_bundle(&dir).unwrap();
        let expected = pipeline.classify(TEXT).unwrap();

        let mut handle = ptr::null_mut();
        let path = cstr(dir.to_str().unwrap());
        assert_eq!(unsafe { rd_pipeline_load(path.as_ptr(), &mut handle) }, RdStatus::Ok);
        assert!(!handle.is_null());
        let mut scores = [0.0; RD_NUM_DOMAINS];
        let mut labels = [u32::MAX; RD_MAX_LABELS];
        let mut n = 0usize;
        let text = cstr(TEXT);
        let status =
            unsafe { rd_pipeline_classify(handle, text.as_ptr(), scores.as_mut_ptr(), labels.as_mut_ptr(), &mut n) };
        assert_eq!(status, RdStatus::Ok, "{}", last_error());
        assert_eq!(last_error(), "");
        assert_eq!(scores, expected.scores.0);
        let got: Vec<u32> = labels[..n].to_vec();
        let want: Vec<u32> = expected.labels.iter().map(|d| d.index() as u32).collect();
        assert_eq!(got, want, "{kind:?}");

        // Labels can be skipped while still reporting their count.
        let mut count = 0usize;
        let status =
            unsafe { rd_pipeline_classify(handle, text.as_ptr(), ptr::null_mut(), ptr::null_mut(), &mut count) };
        assert_eq!(status, RdStatus::Ok);
        assert_eq!(count, n);
        unsafe { rd_pipeline_free(handle) };
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut handle = ptr::null_mut();
    let missing = cstr("/definitely/not/a/bundle");
    assert_eq!(
        unsafe { rd_pipeline_load(missing.as_ptr(), &mut handle) },
        RdStatus::Data
    );
    assert!(handle.is_null());
    assert!(last_error().contains("/definitely/not/a/bundle"), "{}", last_error());

    assert_eq!(
        unsafe { rd_pipeline_load(ptr::null(), &mut handle) },
        RdStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { rd_pipeline_load(missing.as_ptr(), ptr::null_mut()) },
        RdStatus::InvalidArgument
    );

    let text = cstr("x");
    let status = unsafe {
        rd_pipeline_classify(
            ptr::null(),
            text.as_ptr(),
            ptr::null_mut(),
            ptr::null_mut(),
            ptr::null_mut(),
        )
    };
    assert_eq!(status, RdStatus::InvalidArgument);

    let bad = [0xffu8, 0xfe, 0];
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { rd_porter_stem(bad.as_ptr().cast(), &mut out) },
        RdStatus::InvalidArgument
    );
    assert!(last_error().contains("UTF-8"));
    unsafe { rd_pipeline_free(ptr::null_mut()) };
    unsafe { rd_string_free(ptr::null_mut()) };
}

#[test]
fn kappa_and_stemming() {
    let table = [0i32, 0, 1, 1, 1, 1, 0, 1, 0];
    let mut k = f64::NAN;
    assert_eq!(unsafe { rd_fleiss_kappa(table.as_ptr(), 3, 3, &mut k) }, RdStatus::Ok);
    let items: Vec<Vec<i32>> = table.chunks(3).map(<[i32]>::to_vec).collect();
    assert_eq!(k, riskdomain::evaluation::fleiss_kappa(&items).unwrap());
    assert_eq!(unsafe { rd_multi_kappa(table.as_ptr(), 3, 3, &mut k) }, RdStatus::Ok);
    assert_eq!(k, riskdomain::evaluation::multi_kappa(&items).unwrap());

    let same = [2i32; 6];
    assert_eq!(
        unsafe { rd_fleiss_kappa(same.as_ptr(), 3, 2, &mut k) },
        RdStatus::Numerical
    );
    assert!(last_error().contains("undefined"));
    assert_eq!(unsafe { rd_multi_kappa(same.as_ptr(), 6, 1, &mut k) }, RdStatus::Data);

    let word = cstr("hopefulness");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { rd_porter_stem(word.as_ptr(), &mut out) }, RdStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(out) }.to_str().unwrap(), "hope");
    unsafe { rd_string_free(out) };
}

/// Directory of this test executable; cargo places the static library built
/// for the same test run beside it.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(crate_dir.join("include/riskdomain.h")).unwrap();
    for f in [
        "rd_pipeline_load",
        "rd_pipeline_classify",
        "rd_pipeline_free",
        "rd_last_error_message",
        "rd_domain_name",
        "rd_fleiss_kappa",
        "rd_multi_kappa",
        "rd_porter_stem",
        "rd_string_free",
        "rd_version",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }

    let lib = artifact_dir().join("libriskdomain_ffi.a");
    assert!(lib.is_file(), "static library not found at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap_or_else(|e| panic!("running {cc}: {e}"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let bundle = make_bundle(tmp.path(), ModelKind::Mlp);
    let run = Command::new(&exe).arg(&bundle).arg(TEXT).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();

    let (pipeline, _) = load_bundle(&bundle).unwrap();
    let c = pipeline.classify(TEXT).unwrap();
    let names: Vec<&str> = c.labels.iter().map(|d| d.display_name()).collect();
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), format!("labels {}", names.join(" ")).trim_end());
    let scores: Vec<f64> = lines.next().unwrap()["scores ".len()..]
        .split(' ')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(scores, c.scores.0);
    assert!(stdout.contains("stem hope\n"));
    assert!(stdout.contains("missing 2 null\n"));
    assert!(stdout.contains(&format!("version {}\n", env!("CARGO_PKG_VERSION"))));
}
