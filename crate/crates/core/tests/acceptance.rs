//! The eleven acceptance criteria. Each prints one PASS/FAIL line; the test
//! fails if any criterion fails or overruns its time budget.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shearbasin::dynamics::{
    check_equivariance, check_semiconjugacy, fiber_basin_check, iterate, norm,
    product_recursion_check, random_point, sample_slice, OrbitConfig, SliceSpec,
};
use shearbasin::hakim::{
    characteristic_directions, classify, f_direction_notes, leading_term, projective_distance,
    Classification,
};
use shearbasin::jets::{Jet, JetMap};
use shearbasin::maps::{
    build_f, build_family, induced_g, verify_f_form, verify_family_form, Params, PrototypeMap,
    ShearRates,
};

type Outcome = Result<String, String>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn normal_form() -> Outcome {
    let p = Params::new(1.0, 1.0, 3.0).map_err(|e| e.to_string())?;
    let f = build_f(p).unwrap();
    let jet3 = f.jet(3).unwrap();
    let term = |e: [u32; 3], v: f64| (e.to_vec(), c(v));
    let expected = JetMap::new(vec![
        Jet::from_terms(3, 3, [term([1, 0, 0], 1.0), term([2, 1, 0], -1.0)]).unwrap(),
        Jet::from_terms(3, 3, [term([0, 1, 0], 1.0), term([1, 2, 0], -1.0)]).unwrap(),
        Jet::from_terms(3, 3, [term([0, 0, 1], 1.0), term([1, 1, 1], -3.0)]).unwrap(),
    ])
    .unwrap();
    ensure(jet3 == expected, format!("degree-3 jet is {jet3}"))?;
    let report = verify_f_form(&f.jet(8).unwrap(), &p).unwrap();
    ensure(
        report.checks.len() == 5 && report.passed(),
        format!("{:?}", report.checks),
    )?;
    Ok(format!("jet to degree 3 is {jet3}; 5/5 form checks at N=8"))
}

fn automorphism() -> Outcome {
    let f = build_f(Params::default()).unwrap();
    let inv = f.inverse();
    let jet_defect = inv
        .jet(6)
        .unwrap()
        .compose(&f.jet(6).unwrap())
        .unwrap()
        .max_diff(&JetMap::identity(3, 6));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut num: f64 = 0.0;
    for _ in 0..100 {
        let p = random_point(&mut rng, 3, 0.5);
        let back = inv.eval(&f.eval(&p).unwrap()).unwrap();
        num = num.max(norm(
            &back.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>(),
        ));
    }
    ensure(
        jet_defect < 1e-12 && num < 1e-12,
        format!("jet {jet_defect:e}, numeric {num:e}"),
    )?;
    Ok(format!(
        "jet defect {jet_defect:.2e}, numeric defect {num:.2e}"
    ))
}

fn semiconjugacy() -> Outcome {
    let f = build_f(Params::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = check_semiconjugacy(&f, 100, 0.5, &mut rng).unwrap();
    ensure(
        r.max_defect < 1e-12,
        format!("pointwise {:e}", r.max_defect),
    )?;
    ensure(r.orbit_defect < 1e-9, format!("orbit {:e}", r.orbit_defect))?;
    let g = induced_g(&f.jet(8).unwrap()).map_err(|e| e.to_string())?;
    let g1 = g.component(0).coeff(&[2, 0]);
    let g2 = g.component(1).coeff(&[1, 1]);
    ensure(
        (g1 - c(-2.0)).norm() < 1e-12 && (g2 - c(-3.0)).norm() < 1e-12,
        format!("G coefficients {g1}, {g2}"),
    )?;
    Ok(format!(
        "pointwise {:.2e}, 1000-step orbit {:.2e}, coeff(ζ², G₁) = {}, coeff(ζw, G₂) = {}",
        r.max_defect, r.orbit_defect, g1.re, g2.re
    ))
}

fn director_value() -> Outcome {
    let mut found = Vec::new();
    for (a, cc, expected) in [
        (1.0, 3.0, 0.5),
        (2.0, 5.0, 0.25),
        (0.5, 2.0, 1.0),
        (1.0, 2.0, 0.0),
        (1.0, 1.5, -0.25),
    ] {
        let f = build_f(Params::new(a, a, cc).unwrap()).unwrap();
        let l = leading_term(&induced_g(&f.jet(8).unwrap()).unwrap()).unwrap();
        let set = characteristic_directions(&l).unwrap();
        let e1 = [c(1.0), c(0.0)];
        let d = set
            .directions
            .iter()
            .find(|d| d.family.is_none() && projective_distance(&d.v, &e1) < 1e-12)
            .ok_or(format!("[1:0] missing for (a, c) = ({a}, {cc})"))?;
        ensure(d.directors.len() == 1, "one director expected")?;
        let got = d.directors[0];
        ensure(
            (got - c(expected)).norm() <= 1e-10,
            format!("director {got} for ({a}, {cc}), expected {expected}"),
        )?;
        let attracting = classify(d) == Classification::NonDegenerateAttracting;
        ensure(
            attracting == (cc > 2.0 * a),
            format!("classification {} for ({a}, {cc})", classify(d)),
        )?;
        found.push(format!("{}", got.re));
    }
    Ok(format!(
        "directors {} for (a,c) = (1,3), (2,5), (0.5,2), (1,2), (1,1.5)",
        found.join(", ")
    ))
}

fn equivariance() -> Outcome {
    let f = build_f(Params::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = OrbitConfig {
        eps_converged: 0.05,
        ..OrbitConfig::default()
    };
    let r = check_equivariance(&f, 50, 20, c(2.0), &cfg, &mut rng).unwrap();
    ensure(r.max_defect < 1e-12, format!("defect {:e}", r.max_defect))?;
    ensure(
        r.status_agree == 20,
        format!("statuses agree on {}/20", r.status_agree),
    )?;
    Ok(format!(
        "defect {:.2e} over 50 samples; statuses agree 20/20",
        r.max_defect
    ))
}

fn fiber_basin() -> Outcome {
    let f = build_f(Params::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g_cfg = OrbitConfig::default();
    let f_cfg = OrbitConfig {
        eps_converged: (2.0 * g_cfg.eps_converged).sqrt(),
        ..OrbitConfig::default()
    };
    let r = fiber_basin_check(&f, 50, 0.05, &g_cfg, &f_cfg, &mut rng).unwrap();
    ensure(
        r.agree == r.decided,
        format!("disagreements {:?}", r.disagreements),
    )?;
    ensure(
        r.decided >= 25,
        format!("only {} decided samples", r.decided),
    )?;
    ensure(r.fixed_line_exact, "(0, y) not reproduced exactly")?;
    Ok(format!(
        "{}/{} decided samples agree ({} undecided excluded); (0,y) fixed exactly",
        r.agree, r.decided, r.excluded_undecided
    ))
}

fn parabolic_rate() -> Outcome {
    let f = build_f(Params::default()).unwrap();
    let cfg = OrbitConfig {
        max_iter: 10_000,
        eps_converged: 1e-300,
        ..OrbitConfig::default()
    };
    let o = iterate(&f, &[c(0.1), c(0.1), c(0.0)], &cfg).unwrap();
    let trace = &o.zeta_trace;
    ensure(
        trace.len() == 10_001,
        format!("orbit stopped at {}", o.status),
    )?;
    ensure(
        trace.iter().all(|z| z.im == 0.0),
        "ζ-trace left the real axis",
    )?;
    ensure(
        trace.windows(2).all(|w| w[1].re < w[0].re),
        "ζ-trace not strictly decreasing",
    )?;
    let est = 10_000.0 * trace[10_000].re;
    ensure((0.425..=0.575).contains(&est), format!("n·ζ_n = {est}"))?;
    Ok(format!(
        "n·ζ_n = {est:.4} at n = 10⁴; ζ real and strictly decreasing"
    ))
}

fn product_recursion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let r = product_recursion_check(100, &mut rng);
    ensure(
        r.max_rel_defect <= 1e-13,
        format!("relative defect {:e}", r.max_rel_defect),
    )?;
    ensure(
        r.anchor_defect <= 1e-15 && r.axis_exact,
        "anchor or axis check failed",
    )?;
    Ok(format!(
        "max relative defect {:.2e} over 100 orbits of 100 steps",
        r.max_rel_defect
    ))
}

fn basin_raster() -> Outcome {
    let quad = PrototypeMap::OneDQuadratic { a: 1.0 };
    let slice = SliceSpec::first_coordinate_plane(&[], [-1.5, 0.5], [-1.0, 1.0], 200, 200)
        .with_boundary_samples();
    let cfg = OrbitConfig::default();
    let r1 = sample_slice(&quad, &slice, &cfg, Some(1)).unwrap();
    let r2 = sample_slice(&quad, &slice, &cfg, Some(8)).unwrap();
    let r3 = sample_slice(&quad, &slice, &cfg, None).unwrap();
    ensure(
        r1.to_pgm() == r2.to_pgm() && r1.to_pgm() == r3.to_pgm(),
        "rasters differ between runs",
    )?;
    for row in 0..200 {
        for col in 0..200 {
            ensure(
                r1.code(col, row) == r1.code(col, 199 - row),
                format!("asymmetric at ({col}, {row})"),
            )?;
        }
    }
    // 0 is the corner shared by columns 149/150 and rows 99/100; check every
    // 10x10 window that contains those four pixels
    let mut windows = 0;
    for c0 in 141..=149 {
        for r0 in 91..=99 {
            let mut conv = false;
            let mut other = false;
            for row in r0..r0 + 10 {
                for col in c0..c0 + 10 {
                    match r1.code(col, row) {
                        1 => conv = true,
                        _ => other = true,
                    }
                }
            }
            ensure(
                conv && other,
                format!("window at ({c0}, {r0}) is one-sided"),
            )?;
            windows += 1;
        }
    }
    let st = r1.stats();
    Ok(format!(
        "converged {}, escaped {}, undecided {}; symmetric; {windows} windows around 0 mixed; identical bytes with 1, 8, default workers",
        st.converged, st.escaped, st.undecided
    ))
}

fn direction_solver() -> Outcome {
    let f = build_f(Params::default()).unwrap();
    let l = leading_term(&f.jet(8).unwrap()).unwrap();
    ensure(l.r == 3, format!("r = {}", l.r))?;
    let set = characteristic_directions(&l).unwrap();
    for (support, tag) in [
        ([true, false, true], "(z,0,w)"),
        ([false, true, true], "(0,t,w)"),
    ] {
        let d = set
            .family_with_support(&support)
            .ok_or(format!("{tag} missing"))?;
        ensure(d.degenerate, format!("{tag} not degenerate"))?;
    }
    for d in &set.directions {
        let res = l.residual(&d.v, d.lambda);
        ensure(res < 1e-8, format!("residual {res:e}"))?;
    }
    let extra = set.non_degenerate().count();
    let notes = f_direction_notes(&set);
    ensure(
        notes.len() == extra,
        format!("{extra} extra directions but notes {notes:?}"),
    )?;
    Ok(format!(
        "degenerate families (z,0,w), (0,t,w) present; {extra} additional direction(s) flagged"
    ))
}

fn family() -> Outcome {
    let rates = ShearRates::new(vec![1.0; 3], 4.0).unwrap();
    let fam = build_family(3, &[1.0, 1.0, 1.0], 4.0).unwrap();
    let report = verify_family_form(&fam.jet(8).unwrap(), &rates).unwrap();
    ensure(report.passed(), format!("{:?}", report.checks))?;
    let k2 = build_family(2, &[1.0, 1.0], 4.0).unwrap().jet(6).unwrap();
    let f = build_f(Params::new(1.0, 1.0, 4.0).unwrap())
        .unwrap()
        .jet(6)
        .unwrap();
    let gap = k2.max_diff(&f);
    ensure(
        gap <= 1e-12,
        format!("k=2 specialization differs by {gap:e}"),
    )?;
    Ok(format!(
        "{} form checks pass at N=8 ({} notes); k=2 matches F(1,1,4) within {gap:.1e}",
        report.checks.len(),
        report.notes.len()
    ))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome, u64); 11] = [
        ("1 normal form", normal_form, 1),
        ("2 automorphism", automorphism, 1),
        ("3 semi-conjugacy", semiconjugacy, 2),
        ("4 director value", director_value, 1),
        ("5 equivariance and fibers", equivariance, 10),
        ("6 basin projection sampling", fiber_basin, 30),
        ("7 parabolic rate", parabolic_rate, 5),
        ("8 product recursion", product_recursion, 1),
        ("9 basin rasters", basin_raster, 60),
        ("10 direction solver", direction_solver, 5),
        ("11 family on C^(k+1)", family, 5),
    ];
    let suite = Instant::now();
    let mut failures = Vec::new();
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(budget) => {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget} s"))
            }
            other => other,
        };
        match &outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} ({elapsed:.2?})"),
            Err(why) => {
                println!("FAIL criterion {name}: {why} ({elapsed:.2?})");
                failures.push(name);
            }
        }
    }
    println!("acceptance suite finished in {:.2?}", suite.elapsed());
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
