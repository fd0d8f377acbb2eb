//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Uniform};

use quadsym::canonical::{propagate_lambda1, rotation_ct, squeeze_ct, PropagationOptions};
use quadsym::hamiltonian::{target_oscillator, HamiltonianSpec, Preset};
use quadsym::io::parse_csv;
use quadsym::matcore::{characteristic_coefficients, max_abs, symplectic_form};
use quadsym::states::{coherent_state, validate_state, GaussianState};
use quadsym::uncertainty::{
    block_conditions, characteristic_margins, heisenberg_lambda_form, robertson_margin,
    symplectic_sigma_test, variance_product_residual, williamson,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------- oracles ----------

/// Random symplectic matrix `exp(J K)` built with nalgebra's own exponential.
fn planted_symplectic(modes: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let dim = 2 * modes;
    let u = Uniform::new_inclusive(-0.5, 0.5).unwrap();
    let mut k = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x = u.sample(rng);
            k[(i, j)] = x;
            k[(j, i)] = x;
        }
    }
    (symplectic_form(modes) * k).exp()
}

fn exp1(rng: &mut ChaCha8Rng) -> f64 {
    Exp1.sample(rng)
}

fn diag_pairs(nu: &[f64]) -> DMatrix<f64> {
    let v: Vec<f64> = nu.iter().chain(nu.iter()).copied().collect();
    DMatrix::from_diagonal(&DVector::from_vec(v))
}

fn congruence(s: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let m = s * d * s.transpose();
    (&m + m.transpose()) * 0.5
}

fn state(cov: DMatrix<f64>) -> GaussianState {
    let n = cov.nrows();
    validate_state(DVector::zeros(n), cov).expect("planted state must be valid")
}

/// `C_r` from the Faddeev–LeVerrier recursion.
fn faddeev_leverrier(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + DMatrix::identity(n, n) * coeffs[n - k + 1];
        coeffs[n - k] = -(a * &m).trace() / k as f64;
    }
    (1..=n).map(|r| if r % 2 == 0 { coeffs[n - r] } else { -coeffs[n - r] }).collect()
}

/// `exp(t M)` for a traceless real 2x2 `M` with `det M > 0`.
fn rotation_closed_form(m: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let w = m.determinant().sqrt();
    DMatrix::identity(2, 2) * (w * t).cos() + m * ((w * t).sin() / w)
}

/// Truncated Fock space: annihilation operator as a real matrix.
fn annihilation(dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

/// `exp(G) v` by repeated short Taylor series.
fn expm_apply(g: &DMatrix<f64>, v: &DVector<f64>, pieces: usize) -> DVector<f64> {
    let g = g / pieces as f64;
    let mut out = v.clone();
    for _ in 0..pieces {
        let mut term = out.clone();
        let mut acc = out.clone();
        for k in 1..40 {
            term = &g * term / k as f64;
            acc += &term;
        }
        out = acc;
    }
    out
}

/// `(⟨p²⟩, ⟨q²⟩)` of `exp[r(a†² - a²)/2]|0⟩` in a `dim`-level truncation.
fn fock_squeezed_variances(r: f64, dim: usize) -> (f64, f64) {
    let a = annihilation(dim);
    let ad = a.transpose();
    let g = (&ad * &ad - &a * &a) * (r / 2.0);
    let mut vac = DVector::zeros(dim);
    vac[0] = 1.0;
    let psi = expm_apply(&g, &vac, 64);
    let q = (&a + &ad) / 2f64.sqrt();
    // p = i(a† - a)/√2, so p² = -(a† - a)²/2
    let diff = &ad - &a;
    let p2 = -(&diff * &diff) / 2.0;
    let norm = psi.dot(&psi);
    (psi.dot(&(p2 * &psi)) / norm, psi.dot(&(&q * &q * &psi)) / norm)
}

fn audit_states() -> Vec<(GaussianState, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    (0..1000)
        .map(|i| {
            let modes = 1 + i % 3;
            let pure = i % 2 == 0;
            let nu: Vec<f64> = (0..modes)
                .map(|_| if pure { 0.5 } else { 0.5 + exp1(&mut rng) })
                .collect();
            let s = planted_symplectic(modes, &mut rng);
            (state(congruence(&s, &diag_pairs(&nu))), pure)
        })
        .collect()
}

// ---------- criteria ----------

fn c1_omega_reduction() -> Outcome {
    let start = Instant::now();
    let (m, omega) = (1.3, 0.8);
    let stationary = Preset::Stationary { m, omega }.build().map_err(|e| e.to_string())?;
    let mut worst_rel = 0.0f64;
    for k in 0..=100 {
        let t = 0.05 * k as f64;
        let w2 = stationary.omega_squared(t).map_err(|e| e.to_string())?;
        worst_rel = worst_rel.max((w2 - omega * omega).abs() / (omega * omega));
    }
    ensure(worst_rel < 1e-12, || format!("stationary relative error {worst_rel:e}"))?;

    // a = e^{2bt}/2m0, c = m0 ω0² e^{-2bt}/2: ȧ/a = 2b, ä/a = 4b², 4ac = ω0²
    let (m0, b, w0) = (1.0, 0.1, 1.0);
    let oracle = w0 * w0 + 0.5 * 4.0 * b * b - 0.75 * 4.0 * b * b;
    let vm = Preset::VaryingMass { m0, b, omega0: w0 }.build().map_err(|e| e.to_string())?;
    let values: Vec<f64> = (0..=500)
        .map(|k| vm.omega_squared(0.01 * k as f64))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ensure(hi - lo < 1e-10, || format!("varying-mass spread {:e}", hi - lo))?;
    let off = (values[0] - oracle).abs();
    ensure(off < 1e-12, || format!("varying-mass value {} vs {oracle}", values[0]))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("stationary rel err {worst_rel:.1e}, varying-mass spread {:.1e}, value {:.12} ({elapsed:.0?})", hi - lo, values[0]))
}

fn c2_propagator_vs_closed_form() -> Outcome {
    let start = Instant::now();
    // stiff enough that the h = 1e-3 error sits well above roundoff
    let (a, b, c) = (1.0, 0.5, 9.0);
    let spec = HamiltonianSpec::constant(
        DMatrix::from_element(1, 1, a),
        DMatrix::from_element(1, 1, b),
        DMatrix::from_element(1, 1, c),
    )
    .map_err(|e| e.to_string())?;
    let grand = DMatrix::from_row_slice(2, 2, &[a, b, b, c]);
    let generator = -symplectic_form(1) * &grand * 2.0;
    let exact = rotation_closed_form(&generator, 1.0);
    let nalgebra_exact = generator.exp();
    ensure(max_abs(&(&exact - &nalgebra_exact)) < 1e-12, || "closed form disagrees with exp".into())?;

    let run = |h: f64| -> Result<(f64, f64), String> {
        let r = propagate_lambda1(&spec, 0.0, 1.0, &PropagationOptions::with_step(h)).map_err(|e| e.to_string())?;
        Ok((max_abs(&(r.last().matrix() - &exact)), r.last().defect()))
    };
    let (err, defect) = run(1e-3)?;
    let (err_half, _) = run(5e-4)?;
    let ratio = err / err_half;
    let elapsed = start.elapsed();
    ensure(err < 1e-8, || format!("error {err:e}"))?;
    ensure(defect < 1e-10, || format!("defect {defect:e}"))?;
    ensure((12.0..=20.0).contains(&ratio), || format!("halving ratio {ratio} (errors {err:e}, {err_half:e})"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("error {err:.2e}, defect {defect:.1e}, halving ratio {ratio:.2} ({elapsed:.0?})"))
}

fn c3_rotation_ct() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let m = rng.random_range(0.2..5.0);
        let w = rng.random_range(0.1..5.0);
        let t = rng.random_range(-10.0..10.0);
        let l = rotation_ct(&[m], &[w], t).map_err(|e| e.to_string())?;
        let h = target_oscillator(&[m], &[w]).unwrap().assemble(0.0).unwrap();
        let oracle = (symplectic_form(1) * h.matrix() * (-2.0 * t)).exp();
        worst = worst.max(max_abs(&(l.matrix() - oracle)));
    }
    ensure(worst < 1e-10, || format!("max error {worst:e}"))?;
    Ok(format!("20 triples, max error {worst:.1e}"))
}

fn c4_williamson_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut nu_err, mut diag_err) = (0.0f64, 0.0f64);
    for i in 0..200 {
        let modes = 1 + i % 3;
        let mut nu: Vec<f64> = (0..modes).map(|_| 0.5 + exp1(&mut rng)).collect();
        if i % 10 == 0 {
            nu = vec![nu[0]; modes];
        }
        let sigma = congruence(&planted_symplectic(modes, &mut rng), &diag_pairs(&nu));
        let w = williamson(&sigma).map_err(|e| format!("sample {i}: {e}"))?;
        nu.sort_by(f64::total_cmp);
        for (a, b) in w.nu.iter().zip(&nu) {
            nu_err = nu_err.max((a - b).abs());
        }
        diag_err = diag_err.max(w.residual(&sigma));
    }
    let elapsed = start.elapsed();
    ensure(nu_err < 1e-8, || format!("ν error {nu_err:e}"))?;
    ensure(diag_err < 1e-8, || format!("S σ Sᵀ residual {diag_err:e}"))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("200 states, ν error {nu_err:.1e}, diagonalization residual {diag_err:.1e} ({elapsed:.0?})"))
}

fn c5_robertson(states: &[(GaussianState, bool)]) -> Outcome {
    let mut min_margin = f64::INFINITY;
    for (i, (s, pure)) in states.iter().enumerate() {
        let m = robertson_margin(s);
        min_margin = min_margin.min(m);
        ensure(m >= -1e-9, || format!("state {i}: margin {m:e}"))?;
        let equal = m.abs() < 1e-8;
        ensure(equal == *pure, || format!("state {i}: pure = {pure} but |margin| = {:e}", m.abs()))?;
    }
    Ok(format!("1000 states, min margin {min_margin:.1e}, equality exactly on the pure half"))
}

fn c6_characteristic(states: &[(GaussianState, bool)]) -> Outcome {
    let (mut min_margin, mut top_gap, mut fl_gap) = (f64::INFINITY, 0.0f64, 0.0f64);
    for (i, (s, _)) in states.iter().enumerate() {
        let margins = characteristic_margins(s).map_err(|e| e.to_string())?;
        for (r, m) in margins.iter().enumerate() {
            min_margin = min_margin.min(*m);
            ensure(*m >= -1e-9, || format!("state {i}, order {}: {m:e}", r + 1))?;
        }
        top_gap = top_gap.max((margins[margins.len() - 1] - robertson_margin(s)).abs());
        let ours = characteristic_coefficients(s.cov()).unwrap();
        for (x, y) in ours.iter().zip(faddeev_leverrier(s.cov())) {
            fl_gap = fl_gap.max((x - y).abs() / y.abs().max(1.0));
        }
    }
    ensure(top_gap < 1e-10, || format!("top-order margin differs from Robertson by {top_gap:e}"))?;
    ensure(fl_gap < 1e-8, || format!("coefficients disagree with Faddeev-LeVerrier by {fl_gap:e}"))?;
    Ok(format!("min margin {min_margin:.1e}, top order vs Robertson {top_gap:.1e}, vs Faddeev-LeVerrier {fl_gap:.1e}"))
}

fn squeezed_classes(seed: u64) -> (Vec<GaussianState>, Vec<(GaussianState, f64)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coherent = Vec::new();
    let mut fock = Vec::new();
    for i in 0..100 {
        let modes = 1 + i % 3;
        let s = planted_symplectic(modes, &mut rng);
        let mean: Vec<f64> = (0..2 * modes).map(|_| rng.random_range(-2.0..2.0)).collect();
        let vac = coherent_state(modes, &mean).unwrap();
        coherent.push(state(congruence(&s, vac.cov())));
        let n = rng.random_range(0..6) as f64;
        let s = planted_symplectic(modes, &mut rng);
        fock.push((state(congruence(&s, &diag_pairs(&vec![0.5 + n; modes]))), n));
    }
    (coherent, fock)
}

fn c7_symplectic_sigma() -> Outcome {
    let (coherent, fock) = squeezed_classes(7);
    let mut worst = 0.0f64;
    for s in coherent.iter().chain(fock.iter().map(|(s, _)| s)) {
        worst = worst.max(symplectic_sigma_test(s).map_err(|e| e.to_string())?.defect);
    }
    ensure(worst < 1e-8, || format!("squeezed defect {worst:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let base = diag_pairs(&[0.5, 1.5]);
    let mut least = symplectic_sigma_test(&state(base.clone())).unwrap().defect;
    for _ in 0..100 {
        let s = planted_symplectic(2, &mut rng);
        least = least.min(symplectic_sigma_test(&state(congruence(&s, &base))).unwrap().defect);
    }
    ensure(least > 0.05, || format!("counterexample defect only {least:e}"))?;
    Ok(format!("200 squeezed states, worst defect {worst:.1e}; fock(0,1) class, least defect {least:.3}"))
}

fn c8_block_conditions() -> Outcome {
    let (coherent, fock) = squeezed_classes(8);
    let (mut a_err, mut b_err) = (0.0f64, 0.0f64);
    for s in &coherent {
        a_err = a_err.max(variance_product_residual(s, 0.25));
        b_err = b_err.max(block_conditions(s).commutation);
    }
    for (s, n) in &fock {
        a_err = a_err.max(variance_product_residual(s, (0.5 + n).powi(2)) / (0.5 + n).powi(2));
        b_err = b_err.max(block_conditions(s).commutation / (0.5 + n).powi(2));
    }
    ensure(a_err < 1e-8, || format!("variance-product residual {a_err:e}"))?;
    ensure(b_err < 1e-8, || format!("commutation residual {b_err:e}"))?;
    Ok(format!("variance-product residual {a_err:.1e}, commutation residual {b_err:.1e}"))
}

fn c9_heisenberg(states: &[(GaussianState, bool)]) -> Outcome {
    let mut max_disc = f64::NEG_INFINITY;
    for (s, _) in states {
        for k in 0..s.modes() {
            max_disc = max_disc.max(heisenberg_lambda_form(s, k).unwrap().discriminant);
        }
    }
    ensure(max_disc <= 1e-9, || format!("discriminant {max_disc:e}"))?;

    // product states whose per-mode minimality is known by construction
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    for _ in 0..200 {
        let modes = rng.random_range(1..=3);
        let mut cov = DMatrix::zeros(2 * modes, 2 * modes);
        let mut minimal = Vec::new();
        for k in 0..modes {
            let kind = rng.random_range(0..3);
            let mut r: f64 = rng.random_range(-1.5..1.5);
            if kind == 1 {
                // rotating a barely squeezed vacuum would leave it minimal
                r = r.signum() * (0.2 + r.abs());
            }
            let (mut pp, mut qq, mut pq) = ((-2.0 * r).exp() / 2.0, (2.0 * r).exp() / 2.0, 0.0);
            if kind == 1 {
                // rotated squeezed vacuum: pure but correlated
                let th: f64 = rng.random_range(0.3..1.2);
                let (c, s) = (th.cos(), th.sin());
                let (p0, q0) = (pp, qq);
                pp = c * c * p0 + s * s * q0;
                qq = s * s * p0 + c * c * q0;
                pq = c * s * (q0 - p0);
            } else if kind == 2 {
                let n = rng.random_range(1..4) as f64;
                pp *= 1.0 + 2.0 * n;
                qq *= 1.0 + 2.0 * n;
            }
            minimal.push(kind == 0);
            cov[(k, k)] = pp;
            cov[(modes + k, modes + k)] = qq;
            cov[(k, modes + k)] = pq;
            cov[(modes + k, k)] = pq;
        }
        let s = state(cov);
        for (k, is_min) in minimal.iter().enumerate() {
            let form = heisenberg_lambda_form(&s, k).unwrap();
            let zero = form.discriminant.abs() < 1e-8;
            ensure(zero == *is_min, || format!("mode {k}: minimal {is_min}, discriminant {:e}", form.discriminant))?;
            ensure(zero == form.minimizer.is_some(), || "minimizer reported off the minimal set".into())?;
            checked += 1;
        }
    }

    let r = 0.5;
    let (p2, q2) = fock_squeezed_variances(r, 60);
    let oracle = 1.0 / (2.0 * q2);
    let squeezed = coherent_state(1, &[0.0, 0.0]).unwrap().apply_ct(&squeeze_ct(&[r]).unwrap()).unwrap();
    let form = heisenberg_lambda_form(&squeezed, 0).unwrap();
    let lambda = form.minimizer.ok_or("squeezed vacuum not flagged minimal")?;
    ensure((lambda - oracle).abs() < 1e-6, || format!("λ* = {lambda} vs Fock oracle {oracle}"))?;
    ensure((squeezed.var_p(0) - p2).abs() < 1e-6 && (squeezed.var_q(0) - q2).abs() < 1e-6, || {
        format!("variances ({}, {}) vs Fock oracle ({p2}, {q2})", squeezed.var_p(0), squeezed.var_q(0))
    })?;
    Ok(format!("max discriminant {max_disc:.1e}, {checked} modes classified, λ* = {lambda:.10} (oracle {oracle:.10})"))
}

fn c10_conservation() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let schedules = [
        ("varying_mass", r#"{"preset":"varying_mass","m0":1.0,"b":0.1,"omega0":1.0}"#, 1, 5.0),
        ("varying_frequency", r#"{"preset":"varying_frequency","m":1.0,"alpha":2.0,"beta":1.5,"gamma":3.0,"phi":0.4}"#, 1, 5.0),
        ("cosine_mass", r#"{"preset":"cosine_mass","m0":1.0,"b":0.5,"omega0":1.0}"#, 1, 2.0),
        (
            "coupled_harmonic",
            r#"{"modes":2,"A":{"kind":"harmonic","alpha":[[1.0,0.1],[0.1,0.7]],"beta":[[0.3,0.0],[0.0,0.2]],"gamma":2.0,"phi":0.0},
                "B":{"kind":"exponential","alpha":[[0.2,0.1],[-0.1,0.0]],"beta":-0.3},
                "C":{"kind":"constant","value":[[1.0,0.3],[0.3,2.0]]}}"#,
            2,
            4.0,
        ),
        (
            "table",
            r#"{"modes":2,"A":{"kind":"table","times":[0,1,2,3,4],"interp":"cubic",
                   "values":[[[1,0],[0,1]],[[1.2,0.1],[0.1,0.9]],[[0.8,0.2],[0.2,1.1]],[[1,0],[0,1.3]],[[1.1,0.1],[0.1,1]]]},
                "C":{"kind":"constant","value":[[2.0,0.5],[0.5,1.0]]}}"#,
            2,
            4.0,
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_det = 0.0f64;
    let mut worst_nu = 0.0f64;
    for (name, config, modes, t1) in schedules {
        let cfg = write(&format!("{name}.json"), config);
        let mixed: Vec<f64> = (0..modes).map(|_| 0.5 + exp1(&mut rng)).collect();
        let random = congruence(&planted_symplectic(modes, &mut rng), &diag_pairs(&mixed));
        for (label, cov) in [("fock1", diag_pairs(&vec![1.5; modes])), ("mixed", random)] {
            let st = write(
                &format!("{name}_{label}_state.json"),
                &quadsym::io::to_json_string(&quadsym::io::state_json(&state(cov))).unwrap(),
            );
            let out = dir.path().join(format!("{name}_{label}.csv"));
            let code = quadsym::cli::run([
                "quadsym".as_ref(),
                "evolve-state".as_ref(),
                "--config".as_ref(),
                cfg.as_os_str(),
                "--state".as_ref(),
                st.as_os_str(),
                "--t1".as_ref(),
                t1.to_string().as_ref(),
                "--samples".as_ref(),
                "41".as_ref(),
                "--out".as_ref(),
                out.as_os_str(),
            ] as [&std::ffi::OsStr; 12]);
            ensure(code == 0, || format!("{name}/{label}: exit code {code}"))?;
            let (header, rows) = parse_csv(&std::fs::read_to_string(&out).unwrap()).map_err(|e| e.to_string())?;
            let col = |h: &str| header.iter().position(|x| x == h).unwrap();
            let det0 = rows[0][col("det_sigma")];
            for row in &rows {
                worst_det = worst_det.max((row[col("det_sigma")] / det0 - 1.0).abs());
                for k in 1..=modes {
                    let c = col(&format!("nu_{k}"));
                    worst_nu = worst_nu.max((row[c] / rows[0][c] - 1.0).abs());
                }
            }
            if label == "fock1" {
                for row in &rows {
                    for k in 1..=modes {
                        let nu = row[col(&format!("nu_{k}"))];
                        ensure((nu - 1.5).abs() < 1e-8, || format!("{name}: fock(1) ν = {nu}"))?;
                    }
                }
            }
        }
    }
    ensure(worst_det < 1e-8, || format!("det σ drift {worst_det:e}"))?;
    ensure(worst_nu < 1e-8, || format!("ν drift {worst_nu:e}"))?;
    Ok(format!("5 schedules x 2 states, det drift {worst_det:.1e}, ν drift {worst_nu:.1e}"))
}

fn main() {
    let states = audit_states();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 effective frequency reduction", Box::new(c1_omega_reduction)),
        ("2 propagator vs closed form", Box::new(c2_propagator_vs_closed_form)),
        ("3 rotation transformation", Box::new(c3_rotation_ct)),
        ("4 Williamson round trip", Box::new(c4_williamson_round_trip)),
        ("5 Robertson inequality", Box::new(|| c5_robertson(&states))),
        ("6 characteristic relations", Box::new(|| c6_characteristic(&states))),
        ("7 symplectic normalized covariance", Box::new(c7_symplectic_sigma)),
        ("8 block conditions", Box::new(c8_block_conditions)),
        ("9 Heisenberg quadratic", Box::new(|| c9_heisenberg(&states))),
        ("10 conservation under evolution", Box::new(c10_conservation)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
