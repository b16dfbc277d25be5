//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test -p ncschur-cli --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;

use ncschur::displacement::{
    displacement_residual_with_dim, factor_solution, generator_from_kernel, generator_from_schur, interior_mismatch,
    solve_displacement,
};
use ncschur::linalg;
use ncschur::realization::{realization_series, realize_from_rows, transfer_coefficients, verify_coisometry};
use ncschur::scattering::{construct_interpolant, degree_for_tail, max_point_norm, pick_instance};
use ncschur::schur::{schur_analyze, schur_synthesize, synthesize_rows};
use ncschur::series::{creation_matrix, fock_dim, NcSeries};
use ncschur::toeplitz::{build_kn, kernel_to_schur, schur_to_kernel};
use ncschur::word::words_of_length;
use ncschur::{Error, Matrix, Series, Word, C};
use ncschur_cli::random::{self, Stream};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// `A - Σ_k C_k A C_k*` with explicit creation matrices.
fn dense_residual(a: &Matrix, letters: usize, levels: usize, dim: usize) -> Matrix {
    let mut out = a.clone();
    for k in 1..=letters {
        let c = creation_matrix::<f64>(letters, k, levels, dim).unwrap().into_matrix();
        out -= &c * a * c.adjoint();
    }
    out
}

fn letters_and_degree(rng: &mut Stream, max_degree: usize) -> (usize, usize) {
    let n = rng.random_range(1..=3);
    let cap = if n == 3 { max_degree.min(3) } else { max_degree };
    (n, rng.random_range(1..=cap))
}

fn displacement_identity() -> Verdict {
    let mut rng = random::stream(101);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (n, d) = letters_and_degree(&mut rng, 4);
        let t = random::schur_instance(&mut rng, n, d, d);
        let phi = t.phi_embed(d).into_matrix();
        let a = linalg::identity::<f64>(phi.ncols()) - phi.adjoint() * &phi;
        let gen = generator_from_schur(&t, d);
        let r = dense_residual(&a, n, d, 1);
        worst = worst.max(interior_mismatch(&r, &gen.gjg(), n, d, 1));
    }
    let mut worst_kernel = 0.0f64;
    for _ in 0..50 {
        let (n, d) = letters_and_degree(&mut rng, 4);
        let s = random::psd_symbol(&mut rng, n, d, 0.95);
        let k = build_kn(&s, d);
        let gen = generator_from_kernel(&s, d);
        let r = dense_residual(&k, n, d, 1);
        worst_kernel = worst_kernel.max(interior_mismatch(&r, &gen.gjg(), n, d, 1));
    }
    verdict(
        worst < 1e-10 && worst_kernel < 1e-10,
        format!("schur mismatch {worst:.2e}, kernel mismatch {worst_kernel:.2e} (tol 1e-10)"),
    )
}

fn reconstruction() -> Verdict {
    let mut rng = random::stream(202);
    let mut worst = 0.0f64;
    let (mut psd, mut contractive) = (0, 0);
    for i in 0..50 {
        let (n, levels) = letters_and_degree(&mut rng, 3);
        let rows = fock_dim(n, levels, 1);
        let mut gen = random::generator(&mut rng, rows);
        if i % 2 == 1 {
            // damp the negative column so that positive solutions occur
            let s = rng.random_range(0.05..0.6);
            for r in 0..rows {
                gen.g[(r, 1)] *= C::new(s, 0.0);
            }
        }
        let a = solve_displacement(&gen, n, levels).unwrap();
        let r = displacement_residual_with_dim(&a, n, levels, 1).unwrap();
        worst = worst.max(linalg::max_abs(&(r - gen.gjg())));
        if linalg::min_eigenvalue(&a) >= -1e-12 * linalg::max_abs(&a) {
            psd += 1;
            let f = factor_solution(&gen, n, levels, None).unwrap();
            if f.z.as_ref().is_some_and(|z| z.is_contraction(levels, 1e-8)) {
                contractive += 1;
            }
        }
    }
    verdict(
        worst < 1e-13 && psd > 0 && psd == contractive,
        format!("max entry error {worst:.2e} (tol 1e-13); {contractive}/{psd} positive solutions give contractions"),
    )
}

/// `(F - 1)(F + 1)^{-1}` with `F = 1 + 2 Σ_k s_k z^k`, by power series
/// division.
fn classical_schur_from_toeplitz(s: &[C<f64>]) -> Vec<C<f64>> {
    let len = s.len();
    let mut num = vec![C::new(0.0, 0.0); len];
    let mut den = vec![C::new(0.0, 0.0); len];
    den[0] = C::new(2.0, 0.0);
    for k in 1..len {
        num[k] = s[k] * 2.0;
        den[k] = s[k] * 2.0;
    }
    let mut q = vec![C::new(0.0, 0.0); len];
    for k in 0..len {
        let mut acc = num[k];
        for j in 0..k {
            acc -= q[j] * den[k - j];
        }
        q[k] = acc / den[0];
    }
    q
}

fn word_of(letter: usize, len: usize) -> Word {
    Word::from_letters(&vec![letter; len])
}

fn kernel_bijection() -> Verdict {
    let mut rng = random::stream(303);
    let mut round_trip = 0.0f64;
    let mut oracle = 0.0f64;
    for _ in 0..50 {
        let (n, d) = letters_and_degree(&mut rng, 4);
        let s = random::psd_symbol(&mut rng, n, d, 0.95);
        let z = kernel_to_schur(&s, d, None).unwrap();
        let back = schur_to_kernel(&z.z, d).unwrap();
        round_trip = round_trip.max(s.max_diff(&back, d));
        if n == 1 {
            let coeffs: Vec<C<f64>> = (0..=d).map(|k| s.value(&word_of(1, k))[(0, 0)]).collect();
            let expected = classical_schur_from_toeplitz(&coeffs);
            for (k, e) in expected.iter().enumerate() {
                oracle = oracle.max((z.z.coeff(&word_of(1, k))[(0, 0)] - e).norm());
            }
        }
    }
    let (mut psd_found, mut psd_ok) = (0, 0);
    let mut draws = 0;
    while psd_found < 100 && draws < 10_000 {
        draws += 1;
        let (n, d) = letters_and_degree(&mut rng, 3);
        let scale = rng.random_range(0.05..0.6);
        let s = random::symbol(&mut rng, n, d, scale);
        if linalg::min_eigenvalue(&build_kn(&s, d)) < 1e-3 {
            continue;
        }
        psd_found += 1;
        let z = kernel_to_schur(&s, d, None).unwrap();
        if z.positive && z.z.is_contraction(d, 1e-8) {
            psd_ok += 1;
        }
    }
    let mut non_psd_ok = 0;
    for _ in 0..100 {
        let (n, d) = letters_and_degree(&mut rng, 3);
        let target = 1.0 + rng.random_range(1e-6..1.0);
        let z = random::vanishing_contraction(&mut rng, n, d, target);
        let s = schur_to_kernel(&z, d).unwrap();
        if linalg::min_eigenvalue(&build_kn(&s, d)) < 0.0 {
            non_psd_ok += 1;
        }
    }
    verdict(
        round_trip < 1e-10 && oracle < 1e-10 && psd_found == 100 && psd_ok == 100 && non_psd_ok == 100,
        format!(
            "round trip {round_trip:.2e}, classical oracle {oracle:.2e} (tol 1e-10); \
             psd => contraction {psd_ok}/{psd_found}; expansive => not psd {non_psd_ok}/100"
        ),
    )
}

/// Classical Schur recursion on a truncated scalar power series.
fn classical_schur_parameters(mut f: Vec<C<f64>>) -> Vec<C<f64>> {
    let mut out = Vec::new();
    while !f.is_empty() {
        let g = f[0];
        out.push(g);
        let len = f.len();
        let mut num = f.clone();
        num[0] -= g;
        let den: Vec<C<f64>> = (0..len)
            .map(|i| if i == 0 { C::new(1.0, 0.0) - g.conj() * f[0] } else { -g.conj() * f[i] })
            .collect();
        let mut q = vec![C::new(0.0, 0.0); len];
        for k in 0..len {
            let mut acc = num[k];
            for j in 0..k {
                acc -= q[j] * den[k - j];
            }
            q[k] = acc / den[0];
        }
        f = q[1..].to_vec();
    }
    out
}

fn schur_algorithm() -> Verdict {
    let mut rng = random::stream(404);
    let mut round_trip = 0.0f64;
    for _ in 0..100 {
        let (n, d) = letters_and_degree(&mut rng, 4);
        let t = random::schur_instance(&mut rng, n, d, d);
        let data = schur_analyze(&t, d).unwrap();
        let back = schur_synthesize(&data, d).unwrap();
        round_trip = round_trip.max(back.max_coeff_diff(&t, d));
    }
    let mut oracle = 0.0f64;
    for _ in 0..20 {
        let t = random::schur_instance(&mut rng, 1, 5, 5);
        let coeffs: Vec<C<f64>> = (0..=5).map(|k| t.coeff(&word_of(1, k))[(0, 0)]).collect();
        let expected = classical_schur_parameters(coeffs);
        let data = schur_analyze(&t, 5).unwrap();
        for (row, e) in data.rows.iter().zip(&expected) {
            oracle = oracle.max((row[(0, 0)] - e).norm());
        }
    }
    let mut example = Series::zero(1, 1, 1, 1);
    example.set(Word::empty(), linalg::scalar(C::new(0.5, 0.0))).unwrap();
    example.set(word_of(1, 1), linalg::scalar(C::new(0.25, 0.0))).unwrap();
    let rows = schur_analyze(&example, 1).unwrap().rows;
    let ex = (rows[0][(0, 0)] - 0.5).norm().max((rows[1][(0, 0)] - 1.0 / 3.0).norm());
    verdict(
        round_trip < 1e-9 && oracle < 1e-9 && ex < 1e-12,
        format!("round trip {round_trip:.2e}, classical oracle {oracle:.2e} (tol 1e-9); worked example {ex:.2e} (tol 1e-12)"),
    )
}

fn realization() -> Verdict {
    let mut rng = random::stream(505);
    let (mut transfer, mut coisometry, mut resolvent) = (0.0f64, 0.0f64, 0.0f64);
    let mut natural = 0;
    for i in 0..50 {
        let (n, d) = letters_and_degree(&mut rng, 3);
        let (e1, e2) = if i % 5 == 4 { (2, 1) } else { (1, 1) };
        let rows = random::contractive_rows(&mut rng, n, e1, e2, d, 0.95);
        let sys = realize_from_rows(n, &rows).unwrap();
        let t = transfer_coefficients(&sys, d).unwrap();
        transfer = transfer.max(t.max_coeff_diff(&synthesize_rows(n, &rows, d).unwrap(), d));
        coisometry = coisometry.max(verify_coisometry(&sys));
        let a_norm = linalg::operator_norm(&sys.a0);
        // the formula needs ‖A0‖ ≤ 0.99; rescale the state map when it does not hold
        let sys = if a_norm <= 0.99 {
            natural += 1;
            sys
        } else {
            sys.with_scaled_state(0.9 / a_norm)
        };
        let direct = realization_series(&sys, d).unwrap();
        resolvent = resolvent.max(direct.max_coeff_diff(&transfer_coefficients(&sys, d).unwrap(), d));
    }
    verdict(
        transfer < 1e-9 && coisometry < 1e-10 && resolvent < 1e-9,
        format!(
            "transfer vs synthesis {transfer:.2e} (tol 1e-9), coisometry {coisometry:.2e} (tol 1e-10), \
             resolvent vs transfer {resolvent:.2e} (tol 1e-9, {natural}/50 with natural |A0| <= 0.99)"
        ),
    )
}

fn scattering() -> Verdict {
    let mut rng = random::stream(606);
    let mut identity = 0.0f64;
    let (mut feasible, mut interpolated, mut contractive) = (0, 0, 0);
    let (mut infeasible, mut certified) = (0, 0);
    let mut worst_residual = 0.0f64;
    for i in 0..50 {
        let n = rng.random_range(1..=3);
        let count = rng.random_range(1..=4);
        let value_norm = if i % 2 == 0 { 0.5 } else { 1.6 };
        let (points, values) = random::pick_data(&mut rng, n, count, 0.6, value_norm);
        let p = pick_instance(&points, &values).unwrap();
        identity = identity.max(linalg::max_abs(&p.data.residual(&p.r)));
        let min_eig = linalg::min_eigenvalue(&p.r);
        if min_eig >= 0.05 {
            feasible += 1;
            let it = construct_interpolant(&p.data, None, 3, None).unwrap();
            let degree = degree_for_tail(max_point_norm(&points), 1e-7);
            let mut worst = 0.0f64;
            for (pt, b) in points.iter().zip(&values) {
                worst = worst.max((it.evaluate_pick(pt, degree).unwrap()[(0, 0)] - b).norm());
            }
            worst_residual = worst_residual.max(worst);
            if worst < 1e-6 {
                interpolated += 1;
            }
            if it.pick_series().is_contraction(3, 1e-8) {
                contractive += 1;
            }
        } else if min_eig < -1e-8 {
            infeasible += 1;
            if matches!(
                construct_interpolant(&p.data, None, 3, None),
                Err(Error::NotPositive { min_eigenvalue }) if min_eigenvalue < 0.0
            ) {
                certified += 1;
            }
        }
    }
    verdict(
        identity < 1e-12
            && feasible > 0
            && infeasible > 0
            && interpolated == feasible
            && contractive == feasible
            && certified == infeasible,
        format!(
            "identity {identity:.2e} (tol 1e-12); interpolation {interpolated}/{feasible} (worst {worst_residual:.2e}, tol 1e-6); \
             contraction {contractive}/{feasible}; certificates {certified}/{infeasible}"
        ),
    )
}

fn random_series(rng: &mut Stream, n: usize, rows: usize, cols: usize, d: usize) -> Series {
    let mut s = NcSeries::zero(n, rows, cols, d);
    for len in 0..=d {
        for w in words_of_length(n, len) {
            s.set(w, random::matrix(rng, rows, cols)).unwrap();
        }
    }
    s
}

fn algebra_morphism() -> Verdict {
    let mut rng = random::stream(707);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (n, d) = letters_and_degree(&mut rng, 4);
        let (p, q, r) = (rng.random_range(1..=2), rng.random_range(1..=2), rng.random_range(1..=2));
        let x = random_series(&mut rng, n, p, q, d);
        let y = random_series(&mut rng, n, q, r, d);
        let xy = x.multiply(&y, Some(d)).unwrap();
        let lhs = xy.phi_embed(d).into_matrix();
        let rhs = x.phi_embed(d).into_matrix() * y.phi_embed(d).into_matrix();
        worst = worst.max(linalg::max_abs(&(lhs - rhs)));
    }
    let mut iso = 0.0f64;
    for (n, levels) in [(1, 4), (2, 3), (3, 2)] {
        let size = fock_dim(n, levels, 1);
        let inner = fock_dim(n, levels - 1, 1);
        let cs: Vec<Matrix> = (1..=n)
            .map(|k| creation_matrix::<f64>(n, k, levels, 1).unwrap().into_matrix())
            .collect();
        for (i, ci) in cs.iter().enumerate() {
            for (j, cj) in cs.iter().enumerate() {
                let prod = ci.adjoint() * cj;
                let expected = if i == j { linalg::identity::<f64>(inner) } else { Matrix::zeros(inner, inner) };
                iso = iso.max(linalg::max_abs(&(prod.view((0, 0), (inner, inner)) - expected)));
            }
        }
        let mut range = cs.iter().fold(Matrix::zeros(size, size), |acc, c| acc + c * c.adjoint());
        range[(0, 0)] += C::new(1.0, 0.0);
        iso = iso.max(linalg::max_abs(&(range - linalg::identity::<f64>(size))));
    }
    verdict(
        worst < 1e-13 && iso < 1e-14,
        format!("product mismatch {worst:.2e} (tol 1e-13), creation identities {iso:.2e} (tol 1e-14)"),
    )
}

fn run_twice(dir: &Path, args: &[&str], output: Option<&str>) -> bool {
    let once = |tag: &str| {
        let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let out_path = output.map(|o| dir.join(format!("{tag}-{o}")));
        if let Some(p) = &out_path {
            full.push("--output".into());
            full.push(p.to_str().unwrap().into());
        }
        let o = Command::new(env!("CARGO_BIN_EXE_ncschur")).args(&full).output().unwrap();
        let file = out_path.map(|p| std::fs::read(p).unwrap_or_default());
        (o.status.code(), o.stdout, file)
    };
    once("a") == once("b")
}

fn cli_determinism() -> Verdict {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-cli");
    std::fs::create_dir_all(&dir).unwrap();
    let path = |f: &str| dir.join(f).to_str().unwrap().to_string();
    let write = |f: &str, text: &str| std::fs::write(dir.join(f), text).unwrap();
    let prepare = |args: &[&str]| {
        let o = Command::new(env!("CARGO_BIN_EXE_ncschur")).args(args).output().unwrap();
        assert!(o.status.success(), "{args:?}");
    };
    prepare(&["random-schur", "--letters", "2", "--degree", "3", "--seed", "9", "--output", &path("t.json")]);
    prepare(&["schur-analyze", "--input", &path("t.json"), "--output", &path("p.json")]);
    prepare(&["realize", "--input", &path("p.json"), "--output", &path("s.json")]);
    write("sym.json", r#"{"N":2,"e_dim":1,"entries":[{"word":[1],"value":[[[0.3,0]]]},{"word":[2,1],"value":[[[0,0.2]]]}]}"#);
    prepare(&["kernel-to-schur", "--input", &path("sym.json"), "--degree", "3", "--output", &path("z.json")]);
    write("pick.json", r#"{"points":[[[0.3,0.1],[-0.2,0]],[[0.1,0],[0,0.35]]],"values":[[0.1,0.2],[-0.25,0]]}"#);
    write("pts.json", r#"[[[0.3,0.1],[-0.2,0]],[[0.1,0],[0,0.35]]]"#);
    write("vals.json", r#"[[0.1,0.2],[-0.25,0]]"#);

    let (t, p, s, sym, z, pick, pts, vals) = (
        path("t.json"),
        path("p.json"),
        path("s.json"),
        path("sym.json"),
        path("z.json"),
        path("pick.json"),
        path("pts.json"),
        path("vals.json"),
    );
    let cases: Vec<(Vec<&str>, Option<&str>)> = vec![
        (vec!["schur-analyze", "--input", &t, "--depth", "3"], Some("params.json")),
        (vec!["schur-synthesize", "--input", &p, "--degree", "3"], Some("series.json")),
        (vec!["kernel-to-schur", "--input", &sym, "--degree", "3"], Some("z.json")),
        (vec!["schur-to-kernel", "--input", &z, "--degree", "3"], Some("sym.json")),
        (vec!["kernel-check", "--input", &sym, "--degree", "3"], None),
        (vec!["verify-displacement", "--input", &t, "--levels", "3"], None),
        (vec!["pick-check", "--points", &pts, "--values", &vals], None),
        (vec!["scatter-solve", "--input", &pick, "--degree", "3"], Some("interp.json")),
        (vec!["realize", "--input", &p], Some("sys.json")),
        (vec!["transfer", "--input", &s, "--degree", "3"], Some("transfer.json")),
        (vec!["roundtrip-selftest", "--letters", "3", "--degree", "3", "--seed", "7"], Some("rt.json")),
        (vec!["random-schur", "--letters", "2", "--degree", "4", "--seed", "13"], Some("rand.json")),
    ];
    let mut failed = vec![];
    for (args, out) in &cases {
        if !run_twice(&dir, args, *out) {
            failed.push(args[0]);
        }
    }
    verdict(
        failed.is_empty(),
        format!("{}/{} subcommands byte-identical across runs {failed:?}", cases.len() - failed.len(), cases.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("displacement identity", displacement_identity),
        ("reconstruction from generators", reconstruction),
        ("kernel bijection", kernel_bijection),
        ("schur algorithm", schur_algorithm),
        ("realization", realization),
        ("scattering and pick interpolation", scattering),
        ("algebra morphism", algebra_morphism),
        ("cli determinism", cli_determinism),
    ];
    let mut all = true;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        all &= v.pass;
        println!("criterion {} {}: {} ({})", i + 1, name, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
