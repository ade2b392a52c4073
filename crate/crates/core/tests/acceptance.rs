//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::collections::BTreeMap;
use std::time::Instant;

use kahan_core::casebook::{
    additive_pencil, beam_fixed_point_analysis, beam_lagrangian, beam_measure_check,
    beam_symmetric, expected_f2, expected_f4, lotka_volterra, quartic_hamiltonian,
    quartic_oscillator, reduced_qrt_pencil, symplecticity_check, BeamCoefficients, BeamMapKind,
    BeamParams, QuarticParams,
};
use kahan_core::darboux::{continuum_limit_check, find_darboux, in_span, pencil_compare, PencilComparison};
use kahan_core::dynamics::{convergence_order, NumericMap, OrbitStatus};
use kahan_core::poly::{q, qi, Polynomial, RationalFunction, Var};
use kahan_core::scheme::discretize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn fparams(pairs: &[(&str, f64)]) -> BTreeMap<Var, f64> {
    pairs.iter().map(|(k, v)| (Var::param(k), *v)).collect()
}

fn quartic_params() -> QuarticParams {
    QuarticParams::new(qi(1), qi(2), qi(3), qi(5), q(1, 10))
}

fn c1() -> Outcome {
    let lv = lotka_volterra(None).map_err(|e| e.to_string())?;
    let scheme = discretize(&lv.system).map_err(|e| e.to_string())?;
    Ok((scheme.equations() == &lv.expected[..], "exact equality of both equations".into()))
}

fn c2() -> Outcome {
    let case = quartic_oscillator(None).map_err(|e| e.to_string())?;
    let fwd = case.map.forward().ok_or("no symbolic forward map")?;
    let ok = fwd[0] == RationalFunction::var(Var::state(1, 1)) && fwd[1] == case.coefficients.map();
    Ok((ok, "cross-multiplied equality with symbolic a, b, c, d, h".into()))
}

fn c3() -> Outcome {
    let case = quartic_oscillator(Some(&quartic_params())).map_err(|e| e.to_string())?;
    let certs = find_darboux(&case.map, 4).map_err(|e| e.to_string())?;
    let basis: Vec<&Polynomial> = certs.iter().map(|c| c.p()).collect();
    let ok = certs.len() == 2 && in_span(&basis, &case.p1) && in_span(&basis, &case.p2);
    Ok((ok, format!("nullspace dimension {}, P1 and P2 in span", certs.len())))
}

fn c4() -> Outcome {
    let case = quartic_oscillator(Some(&quartic_params())).map_err(|e| e.to_string())?;
    let certs = find_darboux(&case.map, 4).map_err(|e| e.to_string())?;
    let exact = certs.iter().all(|c| c.is_verified());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for cert in &certs {
        for _ in 0..20 {
            let s = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            worst = worst.max(cert.numeric_residual(&case.map, &s).map_err(|e| e.to_string())?);
        }
    }
    Ok((exact && worst <= 1e-8, format!("witnesses zero: {exact}, max relative residual {worst:.3e}")))
}

fn c5() -> Outcome {
    let case = quartic_oscillator(None).map_err(|e| e.to_string())?;
    let params = fparams(&[("a", 1.0), ("b", 2.0), ("c", 3.0), ("d", 5.0)]);
    let num = NumericMap::new(&case.map, 0.1, &params).map_err(|e| e.to_string())?;
    let orbit = num.iterate(&[0.31, 0.3], 1000);
    if orbit.status != OrbitStatus::Complete {
        return Ok((false, format!("orbit stopped: {:?}", orbit.status)));
    }
    let mut pt = params.clone();
    pt.insert(Var::param("h"), 0.1);
    let k = |s: &[f64]| -> Result<f64, String> {
        let mut p = pt.clone();
        p.insert(Var::state(1, 0), s[0]);
        p.insert(Var::state(1, 1), s[1]);
        let a = case.p1.eval(&p).map_err(|e| e.to_string())?;
        let b = case.p2.eval(&p).map_err(|e| e.to_string())?;
        Ok(b / a)
    };
    let k0 = k(&orbit.points[0])?;
    let mut drift: f64 = 0.0;
    for s in &orbit.points {
        drift = drift.max((k(s)? - k0).abs() / k0.abs());
    }
    Ok((drift <= 1e-10, format!("{} points, max relative drift {drift:.3e}", orbit.points.len())))
}

fn c6() -> Outcome {
    let case = quartic_oscillator(None).map_err(|e| e.to_string())?;
    let r = continuum_limit_check(&case.p1, &case.p2, &quartic_hamiltonian());
    let detail = format!(
        "P1[h^0]=1 {}, P1[h^1]=0 {}, P2[h^0]=0 {}, P2[h^1]=0 {}, P2[h^2]=4H {}",
        r.p1_constant_is_one, r.p1_linear_vanishes, r.p2_constant_vanishes, r.p2_linear_vanishes, r.p2_quadratic_is_4h
    );
    Ok((r.all_hold(), detail))
}

fn c7() -> Outcome {
    let (beta, delta) = (Polynomial::param("beta"), Polynomial::param("delta"));
    let a = additive_pencil(&beta, &delta);
    let b = reduced_qrt_pencil(&beta, &delta);
    Ok(match pencil_compare(&a, &b) {
        PencilComparison::Different(w) => {
            let monos: Vec<String> = w.monomials.iter().map(|m| m.to_string()).collect();
            (
                !w.minor.det.is_zero(),
                format!("different; minor on [{}] = {}", monos.join(", "), w.minor.det),
            )
        }
        PencilComparison::Equal => (false, "reported equal".into()),
    })
}

fn c8() -> Outcome {
    let case = beam_symmetric(&BeamCoefficients::symbolic()).map_err(|e| e.to_string())?;
    let sym_ok = case.f4 == expected_f4(&Polynomial::param("a")) && case.f2 == expected_f2(&Polynomial::param("b"));
    let p = BeamParams::on_site(qi(1), qi(-2), q(3, 4), q(1, 10));
    let r = beam_measure_check(&p, 20, 8).map_err(|e| e.to_string())?;
    let ok = sym_ok && r.g_equals_h && r.max_mismatch <= 1e-9;
    Ok((
        ok,
        format!(
            "F4/F2 exact {sym_ok}, G = H {}, det vs (1-h^4 G)/(1-h^4 H) {:.3e}; with h^2 in place of h^4 the mismatch is {:.3e}",
            r.g_equals_h, r.max_mismatch, r.max_mismatch_h2
        ),
    ))
}

fn c9() -> Outcome {
    let case = beam_lagrangian(&BeamCoefficients::symbolic()).map_err(|e| e.to_string())?;
    Ok((case.matches, "symbolic weights with alpha5, beta3 eliminated by the sum constraints".into()))
}

fn c10() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, p) in [
        ("on-site", BeamParams::on_site(qi(1), qi(-2), q(3, 4), q(1, 10))),
        ("uniform", BeamParams::uniform(qi(1), qi(-2), q(3, 4), q(1, 10))),
    ] {
        let r = symplecticity_check(BeamMapKind::Lagrangian, &p, 20, 10).map_err(|e| e.to_string())?;
        ok &= r.max_defect <= 1e-8;
        parts.push(format!("{name} {:.3e}", r.max_defect));
    }
    let contrast = symplecticity_check(
        BeamMapKind::Symmetric,
        &BeamParams::on_site(qi(1), qi(-2), q(3, 4), q(1, 10)),
        20,
        10,
    )
    .map_err(|e| e.to_string())?;
    parts.push(format!("symmetric map (no bound) {:.3e}", contrast.max_defect));
    Ok((ok, parts.join(", ")))
}

fn c11() -> Outcome {
    let p = BeamParams::on_site(qi(0), qi(0), qi(0), q(1, 10))
        .normal_form(1, q(1, 4))
        .map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    let mut gamma = 0.0;
    for kind in [BeamMapKind::Symmetric, BeamMapKind::Lagrangian] {
        let r = beam_fixed_point_analysis(kind, &p).map_err(|e| e.to_string())?;
        let recip = r.reciprocal_defect.unwrap_or(f64::INFINITY);
        let unit = r.unit_modulus_defect.unwrap_or(f64::INFINITY);
        let real = r.spectrum.real_roots(1e-8).len();
        ok &= r.spectrum.palindromic_defect <= 1e-8 && recip <= 1e-8 && unit <= 1e-7 && real == 2;
        ok &= r.exact_residual_zero == Some(true);
        gamma = r.continuous_gamma;
        parts.push(format!(
            "{kind:?}: palindromic {:.1e}, |l1 l2 - 1| {recip:.1e}, ||mu|-1| {unit:.1e}, discrete gamma {:.5}",
            r.spectrum.palindromic_defect,
            r.discrete_gamma.unwrap_or(f64::NAN)
        ));
    }
    parts.push(format!("w* = {:.5}, continuous gamma = {gamma:.5}", 1.5f64.sqrt()));
    Ok((ok, parts.join("; ")))
}

fn c12() -> Outcome {
    let case = quartic_oscillator(None).map_err(|e| e.to_string())?;
    let params = fparams(&[("a", 1.0), ("b", 2.0), ("c", 3.0), ("d", 5.0)]);
    let r = convergence_order(&case.system, &params, &[0.3, 0.0], 1.0, &[0.1, 0.05, 0.025, 0.0125])
        .map_err(|e| e.to_string())?;
    Ok(((r.order - 2.0).abs() <= 0.3, format!("measured order {:.3}", r.order)))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, f64); 12] = [
        ("Kahan reduction for Lotka-Volterra", c1, 1.0),
        ("quartic oscillator map in closed form", c2, 1.0),
        ("Darboux recovery of P1, P2", c3, 60.0),
        ("certificate exactness", c4, f64::INFINITY),
        ("first-integral conservation", c5, f64::INFINITY),
        ("continuum limits", c6, f64::INFINITY),
        ("pencil non-equivalence", c7, f64::INFINITY),
        ("beam symmetric discretization", c8, f64::INFINITY),
        ("Lagrangian equivalence", c9, f64::INFINITY),
        ("symplecticity", c10, f64::INFINITY),
        ("beam spectra", c11, f64::INFINITY),
        ("convergence order", c12, f64::INFINITY),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok((ok, d)) if secs <= *budget => (ok, d),
            Ok((_, d)) => (false, format!("{d}; over the {budget} s budget")),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} [{:.2} s] {}: {}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            secs,
            name,
            detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
