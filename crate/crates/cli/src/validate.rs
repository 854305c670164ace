//! Consistency checks behind the `validate` subcommand.

use std::f64::consts::PI;

use anyhow::Result;
use clap::ValueEnum;
use gaspipe_core::meromorphic::{self, ExpansionTerm, Family};
use gaspipe_core::spectral::{self, GainMode, SPECTRUM_TOLERANCE};
use gaspipe_core::transferfn::{self, Channel, ResolventEvaluator};
use gaspipe_core::{
    build_state_space, build_transformed_realization, derive_constants, eig, Complex64, DerivedConstants,
    DiscretizationGrid, PipeParameters,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Spectrum,
    Gain,
    Identity,
    Expansion,
    All,
}

struct Report {
    total: usize,
    failed: usize,
}

impl Report {
    fn check(&mut self, suite: &str, pass: bool, what: String) {
        self.total += 1;
        if !pass {
            self.failed += 1;
        }
        println!("[{}] {suite}: {what}", if pass { "PASS" } else { "FAIL" });
    }
}

fn spectrum(k: &DerivedConstants, n: usize, r: &mut Report) -> Result<()> {
    let grid = DiscretizationGrid::for_pipe(k, n)?;
    let model = build_state_space(k, &grid)?;
    let closed = spectral::eigenvalues_closed_form(k, n)?;
    let m = spectral::validate_spectrum(&model, &closed)?;
    r.check(
        "spectrum",
        m.passed(),
        format!("N={n} closed-form eigenvalues vs eigensolver: {:.3e} <= {:.3e}", m.max_mismatch, m.tolerance),
    );

    let v0 = spectral::null_eigenvector(n);
    let av0 = model
        .a
        .row_iter()
        .map(|row| row.iter().zip(&v0).map(|(a, v)| a * v).sum::<f64>().abs())
        .fold(0.0, f64::max);
    r.check("spectrum", av0 <= 1e-12 * model.a.amax(), format!("|A v0|_inf = {av0:.3e}"));

    let transformed = build_transformed_realization(k, &grid)?;
    let t = spectral::match_values(
        &eig::eigenvalues(&model.a)?,
        eig::eigenvalues(&transformed.a)?,
        SPECTRUM_TOLERANCE,
    )?;
    r.check(
        "spectrum",
        t.passed(),
        format!("transformed realization spectrum gap {:.3e}", t.max_mismatch),
    );

    let z = spectral::validate_zeros(&model, &spectral::zeros_closed_form(k, n, Channel::G11)?)?;
    r.check(
        "spectrum",
        z.passed(),
        format!("closed-form zeros vs reduced eigenproblem: {:.3e}", z.max_mismatch),
    );

    let orth = spectral::null_vector_orthogonality(&model)?;
    r.check(
        "spectrum",
        orth <= 1e-8,
        format!("eigenvectors of nonzero eigenvalues orthogonal to v0: {orth:.3e}"),
    );

    let mut lossless = *k;
    lossless.alpha = 0.0;
    let lm = build_state_space(&lossless, &grid)?;
    let lr = spectral::validate_spectrum(&lm, &spectral::eigenvalues_closed_form(&lossless, n)?)?;
    r.check(
        "spectrum",
        lr.passed() && lr.max_relative_real_part() <= 1e-10,
        format!("lossless spectrum on the imaginary axis: max |Re|/|lambda| {:.3e}", lr.max_relative_real_part()),
    );
    Ok(())
}

fn gain(k: &DerivedConstants, n: usize, r: &mut Report) -> Result<()> {
    let model = build_state_space(k, &DiscretizationGrid::for_pipe(k, n)?)?;
    let proj = spectral::projected_gain(&model);
    let formula = spectral::gain(k, GainMode::Finite(n));
    r.check(
        "gain",
        (proj - formula).abs() <= 1e-12 * formula,
        format!("projected gain {proj:.12} vs c^2 N / (A (N+1) L) {formula:.12}"),
    );

    let m = 10_000;
    let g = transferfn::gain_constants(k, m);
    let x = k.alpha * k.t_d;
    // the log of each product has tail below x^2 / (pi^2 (m - 1))
    let tail = (x * x / (PI * PI * (m - 1) as f64)).exp_m1();
    let d11 = (g.k_bar_11 - g.k_bar_11_limit).abs();
    let d12 = (g.k_bar_12 - g.k_bar_12_limit).abs();
    r.check(
        "gain",
        d11 <= tail * g.k_bar_11_limit,
        format!("Kbar11 product (m={m}) gap {d11:.3e} within tail bound {:.3e}", tail * g.k_bar_11_limit),
    );
    r.check(
        "gain",
        d12 <= tail * g.k_bar_12_limit,
        format!("Kbar12 product (m={m}) gap {d12:.3e} within tail bound {:.3e}", tail * g.k_bar_12_limit),
    );

    let s = Complex64::new(1e-10, 0.0);
    let c = transferfn::compact_response(k, s)?;
    let dc = ((s * c.g11).re - k.k_g).abs() / k.k_g;
    r.check("gain", dc <= 1e-6, format!("compact s G11(s) -> K_G at s = 1e-10: relative gap {dc:.3e}"));
    let s = Complex64::new(1e-9, 0.0);
    let t = transferfn::truncated_response(k, 200, s)?;
    let dt = ((s * t.g11).re - k.k_g).abs() / k.k_g;
    r.check("gain", dt <= 1e-4, format!("truncated s G11(s) -> K_G at s = 1e-9: relative gap {dt:.3e}"));
    Ok(())
}

fn identity(k: &DerivedConstants, n: usize, r: &mut Report) -> Result<()> {
    let model = build_state_space(k, &DiscretizationGrid::for_pipe(k, n)?)?;
    let ev = ResolventEvaluator::new(&model);
    let mut worst_sign = 0.0f64;
    let mut worst_conj = 0.0f64;
    for w in [1e-4, 1e-3, 7e-3, 0.02, 0.1] {
        let s = Complex64::new(0.0, w);
        let a = ev.response(s)?;
        let b = ev.response(s.conj())?;
        worst_sign = worst_sign
            .max((a.g22 + a.g11).norm() / a.g11.norm())
            .max((a.g12 + a.g21).norm() / a.g21.norm());
        for ch in Channel::ALL {
            worst_conj = worst_conj.max((a.get(ch).conj() - b.get(ch)).norm() / a.get(ch).norm());
        }
    }
    r.check(
        "identity",
        worst_sign <= 1e-10,
        format!("resolvent G22 = -G11 and G12 = -G21: max relative gap {worst_sign:.3e}"),
    );
    r.check(
        "identity",
        worst_conj <= 1e-10,
        format!("resolvent conjugate symmetry: max relative gap {worst_conj:.3e}"),
    );
    Ok(())
}

fn expansion(k: &DerivedConstants, r: &mut Report) -> Result<()> {
    let t = k.t_d;
    let points = meromorphic::strip_samples(t, 20, 10.0, 6);
    let rep = meromorphic::verify_identities(t, &points, 100_000)?;
    r.check(
        "expansion",
        rep.passed(1e-3),
        format!(
            "pole expansions at 20 points (M=1e5): even {:.3e}, odd {:.3e}",
            rep.max_even_deviation, rep.max_odd_deviation
        ),
    );
    for fam in [Family::Even, Family::Odd] {
        let mut worst = 0.0f64;
        for kk in -10..=10 {
            let term = ExpansionTerm::new(fam, t, kk);
            let num = meromorphic::numeric_residue(fam, t, term.pole, 1e-3 / t, 16)?;
            worst = worst.max((num - term.residue).norm());
        }
        r.check(
            "expansion",
            worst <= 1e-6,
            format!("{fam:?} residues vs numeric ring averages: {worst:.3e}"),
        );
    }
    Ok(())
}

/// Runs the selected suites; returns whether every check passed.
pub fn run(params: &PipeParameters, n: usize, suite: Suite) -> Result<bool> {
    let k = derive_constants(params)?;
    let mut r = Report { total: 0, failed: 0 };
    let all = suite == Suite::All;
    if all || suite == Suite::Spectrum {
        spectrum(&k, n, &mut r)?;
    }
    if all || suite == Suite::Gain {
        gain(&k, n, &mut r)?;
    }
    if all || suite == Suite::Identity {
        identity(&k, n, &mut r)?;
    }
    if all || suite == Suite::Expansion {
        expansion(&k, &mut r)?;
    }
    println!("validate: {} checks, {} failed", r.total, r.failed);
    Ok(r.failed == 0)
}
