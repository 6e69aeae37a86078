//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured deviation against its pinned tolerance.
//!
//! Run with `cargo test -p mintwist-cli --test acceptance -- --nocapture`.

use mintwist::action::{
    eigenspinor, fermionic_closed_form_pair, fermionic_form, fourier_spectral_action,
    heat_coefficients, lorentz_suite, signature_classify, FermionicConfig, Signature,
};
use mintwist::clifford::{absorb_gamma, GammaRep, LorentzGammaRep, RealStructure};
use mintwist::geometry::{DifferentialForm, ScalarField, SpinorField, TorusGrid, Vielbein};
use mintwist::torsion::{classify_contorsion, ConnectionField, Contorsion};
use mintwist::twist::{
    build_r, dirac_free, dirac_with_torsion, gauge_transform, generate_torsion,
    hodge_identity_check, twisted_one_form, TwistedElement,
};
use mintwist::verify::{run_verify, RunConfig};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn smooth_real(grid: &TorusGrid, amp: f64, rng: &mut ChaCha8Rng) -> ScalarField {
    let n = grid.axes();
    let coefs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.random_range(-amp..amp),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let offset = rng.random_range(-amp..amp);
    ScalarField::from_fn(grid, |x| {
        let mut v = offset;
        for (mu, &(cm, ph)) in coefs.iter().enumerate() {
            v += cm * (x[mu] + ph).sin();
        }
        c64(v, 0.0)
    })
}

fn report(criterion: &str, dev: f64, tol: f64) {
    assert!(
        dev.is_finite() && dev <= tol,
        "ACCEPTANCE {criterion}: FAIL (max deviation {dev:.3e} > tolerance {tol:.1e})"
    );
    println!("ACCEPTANCE {criterion}: PASS (max deviation {dev:.3e} <= {tol:.1e})");
}

/// Criterion 1: gamma-algebra suite for m = 1, 2, 3 within 1e-12, under 5 s.
#[test]
fn criterion_1_gamma_algebra_suite() {
    let start = Instant::now();
    let mut dev: f64 = 0.0;
    for m in [1usize, 2, 3] {
        let rep = GammaRep::euclidean(m).unwrap();
        dev = dev.max(rep.invariant_dev());
        for a in 0..rep.n() {
            let (_, _, r) = absorb_gamma(&rep, a).unwrap();
            dev = dev.max(r.max_dev);
        }
    }
    // trace identities at m = 2
    let rep = GammaRep::euclidean(2).unwrap();
    let g = rep.grading();
    for a in 0..4 {
        dev = dev.max((g * rep.gamma(a)).trace().norm());
        for b in 0..4 {
            dev = dev.max((g * rep.gamma(a) * rep.gamma(b)).trace().norm());
            for r in 0..4 {
                dev = dev.max((g * rep.gamma(a) * rep.gamma(b) * rep.gamma(r)).trace().norm());
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "gamma suite took {elapsed:?}");
    report("1 gamma algebra (m = 1, 2, 3)", dev, 1e-12);
}

/// Criterion 2: Hodge identification with pinned kappa at 1e-10, m = 1, 2.
#[test]
fn criterion_2_hodge_identification() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut dev: f64 = 0.0;
    for m in [1usize, 2] {
        let grid = TorusGrid::standard(2 * m, 8).unwrap();
        let frame = Vielbein::flat(&grid);
        let rep = GammaRep::euclidean(m).unwrap();
        let comps: Vec<ScalarField> = (0..2 * m)
            .map(|_| smooth_real(&grid, 0.8, &mut rng))
            .collect();
        let f = DifferentialForm::one_form(&grid, &comps).unwrap();
        let rpt = hodge_identity_check(&f, &rep, &frame).unwrap();
        assert!(
            rpt.matches_pinned_form,
            "kappa {} for m = {m} is not -(-i)^(m+1)",
            rpt.kappa
        );
        println!(
            "  pinned kappa_{m} = {}; ratio to printed prefactor = {:.1}",
            rpt.kappa, rpt.ratio_to_printed.re
        );
        dev = dev.max(rpt.max_dev);
    }
    report("2 Hodge identification of the twisted term", dev, 1e-10);
}

/// Criterion 3: torsion generation on a 16^4 grid, assembly versus closed
/// form on 20 random spinor fields within 1e-10, under 60 s.
#[test]
fn criterion_3_torsion_generation() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = TorusGrid::standard(4, 16).unwrap();
    let rep = GammaRep::euclidean(2).unwrap();
    let j = RealStructure::dim4(&rep).unwrap();
    // nowhere-vanishing h with band-limited log-modulus and phase
    let log_mod = smooth_real(&grid, 0.25, &mut rng);
    let phase = smooth_real(&grid, 0.25, &mut rng);
    let h = ScalarField::new(
        grid.clone(),
        log_mod
            .data()
            .iter()
            .zip(phase.data().iter())
            .map(|(l, p)| c64(l.re / 2.0, p.re).exp())
            .collect(),
    );
    let gen = generate_torsion(&h, &rep, &j).unwrap();
    let closed = dirac_with_torsion(&gen.oneform, &rep, &grid).unwrap();
    let mut dev: f64 = 0.0;
    for _ in 0..20 {
        let psi = SpinorField::random_band_limited(&grid, 4, 1, &mut rng);
        let scale = psi.max_abs().max(1.0);
        dev = dev.max(gen.operator.apply(&psi).max_abs_diff(&closed.apply(&psi)) / scale);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "torsion generation took {elapsed:?}");
    println!("  16^4 grid, 20 spinor fields, {elapsed:?}");
    report("3 torsion generated by twisted unitaries", dev, 1e-10);
}

/// Criterion 4: classification equivalence on 100 random contorsion fields
/// with zero disagreements at 1e-12.
#[test]
fn criterion_4_contorsion_classification() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = TorusGrid::standard(4, 4).unwrap();
    let frame = Vielbein::flat(&grid);
    let mut disagreements = 0usize;
    for trial in 0..100 {
        let mut lower = match trial % 3 {
            0 => {
                // totally antisymmetric
                let mut lower = ConnectionField::zeros(&grid);
                for p in 0..grid.num_points() {
                    for t in mintwist::geometry::sorted_tuples(4, 3) {
                        let v = rng.random_range(-1.0..1.0);
                        for (perm, sign) in [
                            ([0usize, 1, 2], 1.0),
                            ([1, 2, 0], 1.0),
                            ([2, 0, 1], 1.0),
                            ([1, 0, 2], -1.0),
                            ([0, 2, 1], -1.0),
                            ([2, 1, 0], -1.0),
                        ] {
                            lower.set(p, t[perm[0]], t[perm[1]], t[perm[2]], sign * v);
                        }
                    }
                }
                lower
            }
            1 => ConnectionField::from_fn(&grid, |_, _, _, _| rng.random_range(-1.0..1.0)),
            _ => {
                let mut lower = ConnectionField::zeros(&grid);
                for p in 0..grid.num_points() {
                    let v = rng.random_range(-1.0..1.0);
                    lower.set(p, 0, 1, 2, v);
                    lower.set(p, 2, 1, 0, -v);
                }
                lower
            }
        };
        if trial % 4 == 0 {
            // near-degenerate noise well below the tolerance
            let noise = ConnectionField::from_fn(&grid, |_, _, _, _| {
                rng.random_range(-1e-14..1e-14)
            });
            for p in 0..grid.num_points() {
                for l in 0..4 {
                    for mu in 0..4 {
                        for nu in 0..4 {
                            lower.set(
                                p,
                                l,
                                mu,
                                nu,
                                lower.get(p, l, mu, nu) + noise.get(p, l, mu, nu),
                            );
                        }
                    }
                }
            }
        }
        let k = Contorsion::from_lower(lower, &frame);
        let class = classify_contorsion(&k, 1e-12);
        if (class.orthogonal && class.geodesic_preserving) != class.totally_antisymmetric {
            disagreements += 1;
        }
    }
    report(
        "4 contorsion classification equivalence (100 fields)",
        disagreements as f64,
        0.0,
    );
}

/// Criterion 5: gauge invariance of the twisted-covariant operator under
/// 20 random unitaries, application residual within 1e-12.
#[test]
fn criterion_5_gauge_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid = TorusGrid::standard(4, 16).unwrap();
    let rep = GammaRep::euclidean(2).unwrap();
    let j = RealStructure::dim4(&rep).unwrap();
    let d = dirac_free(&grid, &rep);
    let log_mod = smooth_real(&grid, 0.2, &mut rng);
    let h = log_mod.map(|z| (z / 2.0).exp());
    let u_h = TwistedElement::twisted_unitary(&h).unwrap();
    let a_form = twisted_one_form(&[(u_h.clone(), u_h.star())], &d, &rep).unwrap();
    let psi = SpinorField::random_band_limited(&grid, 4, 1, &mut rng);
    let mut dev: f64 = 0.0;
    for _ in 0..20 {
        let t1 = smooth_real(&grid, 0.05, &mut rng);
        let t2 = smooth_real(&grid, 0.05, &mut rng);
        let u = TwistedElement::new(
            t1.map(|z| c64(0.0, z.re).exp()),
            t2.map(|z| c64(0.0, z.re).exp()),
        );
        let gt = gauge_transform(&a_form, &u, &d, &j, &rep).unwrap();
        dev = dev.max(gt.invariance_dev);
        // operator-application residual on a fixed random spinor
        let before_op = &gt.fluctuated;
        dev = dev.max(
            before_op.apply(&psi).max_abs_diff(
                &dirac_with_torsion(&{
                    let mut omega = DifferentialForm::zero(&grid, 1).unwrap();
                    omega = omega.add(&gen_oneform(&h)).unwrap();
                    omega
                }, &rep, &grid)
                .unwrap()
                .apply(&psi),
            ) / psi.max_abs().max(1.0),
        );
    }
    report("5 gauge invariance of the twisted operator", dev, 1e-12);
}

fn gen_oneform(h: &ScalarField) -> DifferentialForm {
    mintwist::geometry::gradient(&h.ln_abs_squared(1e-8).unwrap()).unwrap()
}

/// Criterion 6: Lorentz suite; rho-unitarity of S over 50 draws at 1e-12,
/// the a = 0 truth table, and a non-Lorentz rho-unitary witness.
#[test]
fn criterion_6_lorentz_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let lrep = LorentzGammaRep::new().unwrap();
    let rpt = lorentz_suite(&lrep, 50, &mut rng);
    assert!(rpt.truth_table_holds, "euclidean/lorentzian truth table failed");
    assert!(
        rpt.antidiagonal_rho_dev <= 1e-12 && rpt.antidiagonal_mismatch_dev > 0.1,
        "anti-diagonal rho-unitary witness failed"
    );
    println!(
        "  rotations unitary (dev {:.1e}); boosts selfadjoint (dev {:.1e}), non-unitary ({:.2})",
        rpt.rotation_unitarity_dev, rpt.boost_selfadjoint_dev, rpt.boost_nonunitarity
    );
    report(
        "6 Lorentz group inside the rho-unitaries (50 draws)",
        rpt.spin_rho_unitarity_dev,
        1e-12,
    );
}

/// Criterion 7: fermionic closed form against the general bilinear within
/// 1e-8 relative for every R = gamma^a, with the signature classification.
#[test]
fn criterion_7_fermionic_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = TorusGrid::standard(4, 8).unwrap();
    let rep = GammaRep::euclidean(2).unwrap();
    let j = RealStructure::dim4(&rep).unwrap();
    let mut dev: f64 = 0.0;
    for a in 0..4usize {
        let comps: Vec<ScalarField> = (0..4).map(|_| smooth_real(&grid, 0.5, &mut rng)).collect();
        let f = DifferentialForm::one_form(&grid, &comps).unwrap();
        let cfg = FermionicConfig {
            r: build_r(&rep, &[a]).unwrap(),
            d: dirac_with_torsion(&f, &rep, &grid).unwrap(),
            j: j.clone(),
        };
        for _ in 0..3 {
            let phi_w = SpinorField::random_band_limited(&grid, 2, 1, &mut rng);
            let zeta = SpinorField::random_band_limited(&grid, 2, 1, &mut rng);
            let phi = eigenspinor(&rep, a, 1.0, &phi_w).unwrap();
            let psi = eigenspinor(&rep, a, 1.0, &zeta).unwrap();
            let general = fermionic_form(&phi, &psi, &cfg);
            let closed = fermionic_closed_form_pair(a, &f, &phi_w, &zeta).unwrap();
            assert!(general.norm() > 1e-3, "degenerate draw");
            dev = dev.max((general - closed).norm() / general.norm());
        }
        let sig = signature_classify(a, if a == 0 { 2.0 } else { 0.8 }, &grid, &mut rng).unwrap();
        assert_eq!(
            sig.signature == Signature::Lorentzian,
            a == 0,
            "signature classification wrong for a = {a}"
        );
    }
    println!("  lorentzian exactly for R = gamma^0, euclidean otherwise");
    report("7 fermionic closed forms and signature", dev, 1e-8);
}

/// Criterion 8: spectral-action cross-check on the flat 4-torus with
/// constant f: fitted a0 within 2 percent, a2 within 5 percent of the
/// heat-kernel assembly, Lambda in [4, 8], cutoff 24, under 120 s; the
/// flat a4 assembly is internally consistent between its two forms.
#[test]
fn criterion_8_spectral_cross_check() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let grid = TorusGrid::standard(4, 4).unwrap();
    let frame = Vielbein::flat(&grid);
    let rep = GammaRep::euclidean(2).unwrap();
    let f = [1.0, 0.0, 0.0, 0.0];
    let lambdas = [4.0, 4.8, 5.6, 6.4, 7.2, 8.0];
    let sw = heat_coefficients(
        &DifferentialForm::constant_one_form(&grid, &f).unwrap(),
        &rep,
        &frame,
    )
    .unwrap();
    let fit = fourier_spectral_action(&f, &lambdas, 24.0, &rep, 2.0 * PI, &mut rng).unwrap();
    let a0_dev = (fit.a0_fit - sw.a0).abs() / sw.a0;
    let a2_dev = (fit.a2_fit - sw.a2.re).abs() / sw.a2.re.abs();
    println!(
        "  a0: fit {:.4} vs assembled {:.4} ({:.3}%); a2: fit {:.4} vs assembled {:.4} ({:.3}%)",
        fit.a0_fit,
        sw.a0,
        100.0 * a0_dev,
        fit.a2_fit,
        sw.a2.re,
        100.0 * a2_dev
    );
    assert!(a0_dev <= 0.02, "a0 off by {:.3}%", 100.0 * a0_dev);
    assert!(a2_dev <= 0.05, "a2 off by {:.3}%", 100.0 * a2_dev);
    assert!(
        sw.a4_expansion_consistency <= 1e-10,
        "a4 internal consistency {:.3e}",
        sw.a4_expansion_consistency
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "spectral check took {elapsed:?}");
    println!("  elapsed {elapsed:?}");
    report(
        "8 spectral action two-method cross-check",
        a0_dev.max(a2_dev) / 0.05,
        1.0,
    );
}

/// Criterion 9: `verify` end to end; exit 0, at least 40 named checks
/// each carrying an anchor, byte-identical reports under a fixed seed.
#[test]
fn criterion_9_verify_end_to_end() {
    let cfg = RunConfig::default();
    let report_a = run_verify(&cfg).unwrap();
    assert!(report_a.passed(), "default verify run failed");
    assert!(
        report_a.checks.len() >= 40,
        "only {} checks",
        report_a.checks.len()
    );
    assert!(report_a.checks.iter().all(|c| !c.anchor.is_empty()));
    let json_a = serde_json::to_string_pretty(&report_a).unwrap();
    let report_b = run_verify(&cfg).unwrap();
    let json_b = serde_json::to_string_pretty(&report_b).unwrap();
    assert_eq!(json_a, json_b, "report is not deterministic under a fixed seed");

    // end to end through the binary, exercising the exit code contract
    let dir = std::env::temp_dir().join("mintwist-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let report_path = dir.join("verify.json");
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_mintwist"))
        .args([
            "verify",
            "--points",
            "8",
            "--suites",
            "clifford,geometry",
            "--report",
        ])
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "binary verify failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bytes_a = std::fs::read(&report_path).unwrap();
    let out2 = std::process::Command::new(env!("CARGO_BIN_EXE_mintwist"))
        .args([
            "verify",
            "--points",
            "8",
            "--suites",
            "clifford,geometry",
            "--report",
        ])
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(out2.status.success());
    let bytes_b = std::fs::read(&report_path).unwrap();
    assert_eq!(bytes_a, bytes_b, "binary report bytes differ between runs");

    // impossible tolerance: floating-point residuals fail, exit code 1.
    // (The clifford suite alone is exact in floating point, so the
    // geometry suite provides the genuine roundoff residuals.)
    let out3 = std::process::Command::new(env!("CARGO_BIN_EXE_mintwist"))
        .args([
            "verify",
            "--points",
            "8",
            "--suites",
            "geometry",
            "--tol-alg",
            "0",
            "--tol-deriv",
            "0",
            "--report",
        ])
        .arg(dir.join("fail.json"))
        .output()
        .unwrap();
    assert_eq!(out3.status.code(), Some(1), "tolerance 0 must exit 1");

    // config error: exit code 2
    let out4 = std::process::Command::new(env!("CARGO_BIN_EXE_mintwist"))
        .args(["verify", "--deriv", "bogus"])
        .output()
        .unwrap();
    assert_eq!(out4.status.code(), Some(2), "bad config must exit 2");

    println!(
        "ACCEPTANCE 9 verify end-to-end: PASS ({} checks, deterministic, exit codes 0/1/2)",
        report_a.checks.len()
    );
}
