use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ecomplex_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 512];
    unsafe { ecx_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

fn matrix(n_c: usize, n_p: usize, edges: &[(usize, usize)]) -> *mut EcxMatrix {
    let cs: Vec<usize> = edges.iter().map(|e| e.0).collect();
    let ps: Vec<usize> = edges.iter().map(|e| e.1).collect();
    let mut m = ptr::null_mut();
    let s =
        unsafe { ecx_matrix_from_edges(n_c, n_p, cs.as_ptr(), ps.as_ptr(), edges.len(), &mut m) };
    assert_eq!(s, EcxStatus::Ok, "{}", last_error());
    m
}

const NESTED: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)];

#[test]
fn degrees_and_reflections() {
    let m = matrix(3, 3, &NESTED);
    let (mut nc, mut np, mut ne) = (0, 0, 0);
    assert_eq!(
        unsafe { ecx_matrix_dims(m, &mut nc, &mut np, &mut ne) },
        EcxStatus::Ok
    );
    assert_eq!((nc, np, ne), (3, 3, 6));

    let mut div = [0usize; 3];
    let mut ubi = [0usize; 3];
    unsafe {
        assert_eq!(
            ecx_matrix_diversification(m, div.as_mut_ptr(), 3),
            EcxStatus::Ok
        );
        assert_eq!(ecx_matrix_ubiquity(m, ubi.as_mut_ptr(), 3), EcxStatus::Ok);
    }
    assert_eq!(div, [3, 2, 1]);
    assert_eq!(ubi, [3, 2, 1]);

    let mut t = ptr::null_mut();
    assert_eq!(unsafe { ecx_reflect(m, 3, &mut t) }, EcxStatus::Ok);
    let (mut depth, mut tc, mut tp) = (0, 0, 0);
    assert_eq!(
        unsafe { ecx_trajectory_dims(t, &mut depth, &mut tc, &mut tp) },
        EcxStatus::Ok
    );
    assert_eq!((depth, tc, tp), (3, 3, 3));

    // k_c1 = mean ubiquity of each country's products
    let mut k1 = [0.0; 3];
    assert_eq!(
        unsafe { ecx_trajectory_country_level(t, 1, k1.as_mut_ptr(), 3) },
        EcxStatus::Ok
    );
    assert_eq!(k1, [2.0, 2.5, 3.0]);
    let mut kp1 = [0.0; 3];
    assert_eq!(
        unsafe { ecx_trajectory_product_level(t, 1, kp1.as_mut_ptr(), 3) },
        EcxStatus::Ok
    );
    assert_eq!(kp1, [2.0, 2.5, 3.0]);

    let mut z = [0.0; 3];
    assert_eq!(
        unsafe { ecx_normalize(t, 0, z.as_mut_ptr(), 3) },
        EcxStatus::Ok
    );
    let sd = (2.0f64 / 3.0).sqrt();
    for (got, want) in z.iter().zip([1.0 / sd, 0.0, -1.0 / sd]) {
        assert!((got - want).abs() < 1e-12);
    }

    let mut rw = f64::NAN;
    assert_eq!(
        unsafe { ecx_random_walk_check(m, t, 3, &mut rw) },
        EcxStatus::Ok
    );
    assert!(rw < 1e-12);

    let mut buf = [0 as c_char; 8];
    assert_eq!(
        unsafe { ecx_trajectory_country_id(t, 2, buf.as_mut_ptr(), buf.len()) },
        EcxStatus::Ok
    );
    assert_eq!(
        unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(),
        "c2"
    );

    unsafe {
        ecx_trajectory_free(t);
        ecx_matrix_free(m);
    }
}

#[test]
fn error_codes() {
    let m = matrix(3, 3, &NESTED);
    let mut t = ptr::null_mut();
    assert_eq!(
        unsafe { ecx_reflect(m, -1, &mut t) },
        EcxStatus::InvalidArgument
    );
    assert!(t.is_null());
    assert!(last_error().contains("depth"));

    let mut short = [0usize; 2];
    assert_eq!(
        unsafe { ecx_matrix_diversification(m, short.as_mut_ptr(), 2) },
        EcxStatus::BufferSize
    );
    assert_eq!(
        unsafe {
            ecx_matrix_dims(
                ptr::null(),
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut(),
            )
        },
        EcxStatus::NullPointer
    );

    let empty = matrix(2, 2, &[]);
    assert_eq!(
        unsafe { ecx_reflect(empty, 2, &mut t) },
        EcxStatus::Computation
    );

    let dup = [0usize, 0];
    let mut bad = ptr::null_mut();
    let s = unsafe { ecx_matrix_from_edges(2, 2, dup.as_ptr(), dup.as_ptr(), 2, &mut bad) };
    assert_eq!(s, EcxStatus::Input);
    assert!(last_error().contains("duplicate"));

    let mut r = std::mem::MaybeUninit::<EcxNullResult>::uninit();
    assert_eq!(
        unsafe { ecx_null_comparison(m, 9, 10, 1, 10, r.as_mut_ptr()) },
        EcxStatus::InvalidArgument
    );

    let missing = CString::new("/nonexistent/matrix.json").unwrap();
    assert_eq!(
        unsafe { ecx_matrix_load(missing.as_ptr(), &mut bad) },
        EcxStatus::Input
    );

    // success clears the message
    let mut nc = 0;
    assert_eq!(
        unsafe { ecx_matrix_dims(m, &mut nc, &mut nc, &mut nc) },
        EcxStatus::Ok
    );
    assert_eq!(last_error(), "");

    // truncation still reports the full length
    unsafe { ecx_reflect(m, -7, &mut t) };
    let full = last_error();
    let mut tiny = [0 as c_char; 4];
    let n = unsafe { ecx_last_error_message(tiny.as_mut_ptr(), tiny.len()) };
    assert_eq!(n, full.len());
    assert_eq!(
        unsafe { CStr::from_ptr(tiny.as_ptr()) }.to_str().unwrap(),
        &full[..3]
    );

    unsafe {
        ecx_matrix_free(m);
        ecx_matrix_free(empty);
        ecx_matrix_free(ptr::null_mut());
    }
}

#[test]
fn exports_threshold() {
    // 2x2 exports; RCA of (c0,p0) = (3/4)/(4/6) = 1.125
    let values = [3.0, 1.0, 1.0, 1.0];
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { ecx_matrix_from_exports(values.as_ptr(), 2, 2, 1.0, &mut m) },
        EcxStatus::Ok
    );
    let mut div = [0usize; 2];
    assert_eq!(
        unsafe { ecx_matrix_diversification(m, div.as_mut_ptr(), 2) },
        EcxStatus::Ok
    );
    assert_eq!(div, [1, 1]);
    unsafe { ecx_matrix_free(m) };

    let neg = [1.0, -1.0, 1.0, 1.0];
    assert_eq!(
        unsafe { ecx_matrix_from_exports(neg.as_ptr(), 2, 2, 1.0, &mut m) },
        EcxStatus::Input
    );
    let zero = [0.0; 4];
    assert_eq!(
        unsafe { ecx_matrix_from_exports(zero.as_ptr(), 2, 2, 1.0, &mut m) },
        EcxStatus::NoData
    );
}

#[test]
fn ids_sort_in_index_order() {
    // 12 countries: ids must be zero padded so c10 sorts after c09
    let values: Vec<f64> = (0..12 * 2)
        .map(|i| if i % 2 == 0 { 1.0 + i as f64 } else { 1.0 })
        .collect();
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { ecx_matrix_from_exports(values.as_ptr(), 12, 2, 1.0, &mut m) },
        EcxStatus::Ok
    );
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { ecx_reflect(m, 0, &mut t) }, EcxStatus::Ok);
    let mut buf = [0 as c_char; 8];
    assert_eq!(
        unsafe { ecx_trajectory_country_id(t, 10, buf.as_mut_ptr(), 8) },
        EcxStatus::Ok
    );
    assert_eq!(
        unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(),
        "c10"
    );
    unsafe {
        ecx_trajectory_free(t);
        ecx_matrix_free(m);
    }
}

#[test]
fn capability_and_null() {
    let params = EcxModelParams {
        n_countries: 30,
        n_products: 80,
        n_capabilities: 12,
        r: 0.7,
        q: 0.1,
    };
    let sample = |seed| {
        let mut m = ptr::null_mut();
        assert_eq!(
            unsafe { ecx_capability_sample_matrix(&params, seed, &mut m) },
            EcxStatus::Ok
        );
        let mut div = vec![0usize; 30];
        unsafe {
            ecx_matrix_diversification(m, div.as_mut_ptr(), 30);
        }
        (m, div)
    };
    let (m, a) = sample(4);
    let (m2, b) = sample(4);
    assert_eq!(a, b);

    let mut r = std::mem::MaybeUninit::<EcxNullResult>::uninit();
    let s = unsafe { ecx_null_comparison(m, ECX_NULL_DENSITY_ONLY, 30, 2, 10, r.as_mut_ptr()) };
    assert_eq!(s, EcxStatus::Ok, "{}", last_error());
    let r = unsafe { r.assume_init() };
    assert!(r.observed < 0.0);
    assert!((0.0..=1.0).contains(&r.p_value));
    assert!(!r.no_rewiring_possible);

    let bad = EcxModelParams { r: 1.5, ..params };
    let mut m3 = ptr::null_mut();
    assert_eq!(
        unsafe { ecx_capability_sample_matrix(&bad, 1, &mut m3) },
        EcxStatus::Input
    );
    unsafe {
        ecx_matrix_free(m);
        ecx_matrix_free(m2);
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ecomplex.h"))
            .unwrap();
    for name in [
        "ecx_last_error_message",
        "ecx_version",
        "ecx_matrix_from_edges",
        "ecx_matrix_from_exports",
        "ecx_matrix_load",
        "ecx_matrix_free",
        "ecx_matrix_dims",
        "ecx_matrix_diversification",
        "ecx_matrix_ubiquity",
        "ecx_reflect",
        "ecx_trajectory_free",
        "ecx_trajectory_dims",
        "ecx_trajectory_country_id",
        "ecx_trajectory_country_level",
        "ecx_trajectory_product_level",
        "ecx_normalize",
        "ecx_random_walk_check",
        "ecx_capability_sample_matrix",
        "ecx_null_comparison",
    ] {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    assert!(header.contains("typedef struct EcxMatrix EcxMatrix;"));
    assert!(header.contains("typedef struct EcxTrajectory EcxTrajectory;"));
    assert!(header.contains("ECX_STATUS_INVALID_ARGUMENT = 2"));
    assert!(header.contains("ecx_reflect(const struct EcxMatrix *m, int32_t depth"));
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let lib = target_dir().join("libecomplex_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!(
            "skipping: no C compiler or static library at {}",
            lib.display()
        );
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let status = Command::new("cc")
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let line = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        line.trim(),
        format!(
            "{} 3 2 1 2.000000 2.500000 3.000000 1",
            env!("CARGO_PKG_VERSION")
        )
    );
}
