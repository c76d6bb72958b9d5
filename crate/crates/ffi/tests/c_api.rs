use std::path::Path;
use std::process::Command;
use std::ptr;

use teichlab_ffi::*;

fn ok(code: i32) {
    if code != TL_OK {
        let mut buf = vec![0 as std::ffi::c_char; 512];
        unsafe { tl_last_error_message(buf.as_mut_ptr(), buf.len()) };
        let msg = unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) };
        panic!("status {code}: {}", msg.to_string_lossy());
    }
}

#[test]
fn bers_of_constant_through_handles() {
    unsafe {
        let mut grid = ptr::null_mut();
        ok(tl_grid_new(14, 128, &mut grid));
        let mut n = 0usize;
        ok(tl_grid_len(grid, &mut n));
        assert!(n > 0);

        let mut mu = ptr::null_mut();
        ok(tl_beltrami_constant(grid, 0.2, 0.0, &mut mu));
        let mut sup = 0.0;
        ok(tl_beltrami_sup(mu, &mut sup));
        assert!((sup - 0.2).abs() < 1e-15);

        let mut phi = ptr::null_mut();
        ok(tl_bers_projection(mu, &mut phi));
        let mut norm = 0.0;
        ok(tl_holomorphic_sup_norm(phi, &mut norm));
        assert!(norm > 0.0 && norm <= 1.5 * 0.2 * 1.05);

        let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
        ok(tl_holomorphic_values(
            phi,
            re.as_mut_ptr(),
            im.as_mut_ptr(),
            n,
        ));
        let (mut zr, mut zi) = (vec![0.0; n], vec![0.0; n]);
        ok(tl_grid_nodes(grid, zr.as_mut_ptr(), zi.as_mut_ptr(), n));
        // values sit at the reflected nodes 1/z̄
        let i = n - 1;
        let z = num_complex::Complex64::new(zr[i], zi[i]).conj().inv();
        let d = z * z - 0.2;
        let exact = -6.0 * 0.2 / (d * d);
        assert!(
            (num_complex::Complex64::new(re[i], im[i]) - exact).norm()
                < 1e-6 * exact.norm().max(1.0)
        );

        assert_eq!(
            tl_holomorphic_values(phi, re.as_mut_ptr(), im.as_mut_ptr(), n - 1),
            TL_INVALID_ARGUMENT
        );

        tl_holomorphic_free(phi);
        tl_beltrami_free(mu);
        tl_grid_free(grid);
    }
}

#[test]
fn aw_section_and_distance() {
    unsafe {
        let mut grid = ptr::null_mut();
        ok(tl_grid_new(14, 64, &mut grid));
        let mut phi = ptr::null_mut();
        ok(tl_holomorphic_monomial(grid, 0.4, 0.0, 4, &mut phi));
        let mut mu = ptr::null_mut();
        ok(tl_aw_section(phi, &mut mu));
        let mut zero = ptr::null_mut();
        ok(tl_beltrami_constant(grid, 0.0, 0.0, &mut zero));
        let (mut d, mut sup) = (0.0, 0.0);
        ok(tl_teich_distance(mu, zero, &mut d));
        ok(tl_beltrami_sup(mu, &mut sup));
        assert!((d - ((1.0 + sup) / (1.0 - sup)).ln()).abs() < 1e-12);

        let mut big = ptr::null_mut();
        ok(tl_holomorphic_monomial(grid, 3.0, 0.0, 4, &mut big));
        let mut out = ptr::null_mut();
        assert_eq!(tl_aw_section(big, &mut out), 13);
        assert!(out.is_null());
        let mut low = ptr::null_mut();
        assert_eq!(
            tl_holomorphic_monomial(grid, 1.0, 0.0, 2, &mut low),
            TL_INVALID_ARGUMENT
        );

        for h in [phi, big] {
            tl_holomorphic_free(h);
        }
        tl_beltrami_free(mu);
        tl_beltrami_free(zero);
        tl_grid_free(grid);
    }
}

#[test]
fn principal_solution_of_constant() {
    unsafe {
        let mut grid = ptr::null_mut();
        ok(tl_grid_new(14, 64, &mut grid));
        let mut n = 0usize;
        ok(tl_grid_len(grid, &mut n));
        let (mut zr, mut zi) = (vec![0.0; n], vec![0.0; n]);
        ok(tl_grid_nodes(grid, zr.as_mut_ptr(), zi.as_mut_ptr(), n));
        let re: Vec<f64> = vec![0.3; n];
        let im = vec![0.0; n];
        let mut mu = ptr::null_mut();
        ok(tl_beltrami_from_samples(
            grid,
            re.as_ptr(),
            im.as_ptr(),
            n,
            &mut mu,
        ));
        let (mut fr, mut fi) = (vec![0.0; n], vec![0.0; n]);
        ok(tl_solve_principal(mu, fr.as_mut_ptr(), fi.as_mut_ptr(), n));
        for i in (0..n).step_by(37) {
            // z + 0.3 z̄
            assert!((fr[i] - 1.3 * zr[i]).abs() < 1e-10);
            assert!((fi[i] - 0.7 * zi[i]).abs() < 1e-10);
        }
        tl_beltrami_free(mu);
        tl_grid_free(grid);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/teichlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "tl_grid_new",
        "tl_bers_projection",
        "tl_last_error_message",
        "TL_PANIC",
        "typedef struct TlGrid TlGrid",
    ] {
        assert!(text.contains(name), "{name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ TlGrid *g = 0; int s = tl_grid_new(14, 64, &g); tl_grid_free(g); return s == TL_OK ? 0 : 1; }}\n",
            header.display()
        ),
    )
    .unwrap();
    match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .status()
    {
        Ok(s) => assert!(s.success(), "header does not compile"),
        Err(_) => eprintln!("no C compiler found; syntax check skipped"),
    }
}
