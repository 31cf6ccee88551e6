//! The full invariant suite behind `shearbasin verify` and `shearbasin family`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{
    check_equivariance, check_semiconjugacy, estimate_tangent, fiber_basin_check, iterate,
    product_recursion_check, random_point, sample_slice, InducedG, OrbitConfig, PointMap,
    SliceSpec,
};
use crate::error::Result;
use crate::hakim::{
    characteristic_directions, classify, director_set_distance, directors_finite_difference,
    directors_in_chart, f_direction_notes, g_direction_notes, leading_term, projective_distance,
    Classification, DirectionSet, LeadingTerm,
};
use crate::jets::{Jet, JetMap};
use crate::maps::{
    build_f, build_family, g_form_notes, induced_g_of_word, verify_f_form, verify_family_form,
    MapWord, Params, PrototypeMap, ShearRates,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckLine {
    pub module: String,
    pub name: String,
    pub passed: bool,
    pub skipped: bool,
    pub measured: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub map: String,
    pub order: u32,
    pub seed: u64,
    pub checks: Vec<CheckLine>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    fn new(map: String, order: u32, seed: u64) -> Self {
        VerifyReport {
            map,
            order,
            seed,
            checks: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckLine> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(
        &mut self,
        module: &str,
        name: &str,
        passed: bool,
        measured: Option<f64>,
        detail: impl Into<String>,
    ) {
        self.checks.push(CheckLine {
            module: module.into(),
            name: name.into(),
            passed,
            skipped: false,
            measured,
            detail: detail.into(),
        });
    }

    fn skip(&mut self, module: &str, name: &str, detail: impl Into<String>) {
        self.checks.push(CheckLine {
            module: module.into(),
            name: name.into(),
            passed: true,
            skipped: true,
            measured: None,
            detail: detail.into(),
        });
    }

    /// `defect <= tol` as a check line.
    fn bound(&mut self, module: &str, name: &str, defect: f64, tol: f64, what: &str) {
        self.push(
            module,
            name,
            defect <= tol,
            Some(defect),
            format!("{what} (tolerance {tol:e})"),
        );
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "verify {} (order {}, seed {})\n",
            self.map, self.order, self.seed
        );
        for c in &self.checks {
            let tag = match (c.skipped, c.passed) {
                (true, _) => "SKIP",
                (false, true) => "PASS",
                (false, false) => "FAIL",
            };
            let measured = c
                .measured
                .map(|m| format!(" [{m:.3e}]"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{tag} {}: {}{measured} {}\n",
                c.module, c.name, c.detail
            ));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        out
    }
}

/// Gaussian-integer coefficients keep the ring checks exact.
fn random_integer_jet(
    rng: &mut ChaCha8Rng,
    k: usize,
    order: u32,
    terms: usize,
    min_degree: u32,
) -> Jet {
    let t = (0..terms).map(|_| {
        let e = loop {
            let e: Vec<u32> = (0..k).map(|_| rng.gen_range(0..=order.min(3))).collect();
            let d: u32 = e.iter().sum();
            if d >= min_degree && d <= order {
                break e;
            }
        };
        let c = Complex64::new(rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64);
        (e, c)
    });
    Jet::from_terms(k, order, t).expect("lengths match")
}

fn random_float_jet(
    rng: &mut ChaCha8Rng,
    k: usize,
    order: u32,
    terms: usize,
    min_degree: u32,
) -> Jet {
    let base = random_integer_jet(rng, k, order, terms, min_degree);
    let scale = Complex64::new(rng.gen_range(0.2..1.0), rng.gen_range(-0.5..0.5));
    base.scale(scale)
}

fn random_origin_map(rng: &mut ChaCha8Rng, k: usize, order: u32) -> JetMap {
    JetMap::new(
        (0..k)
            .map(|_| random_integer_jet(rng, k, order, 4, 1))
            .collect(),
    )
    .expect("shared order")
}

fn jets_checks(report: &mut VerifyReport, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut ring_ok = true;
    for _ in 0..20 {
        let [f, g, h] = [0, 1, 2].map(|_| random_integer_jet(rng, 3, 6, 6, 0));
        ring_ok &= f.mul(&g)?.mul(&h)? == f.mul(&g.mul(&h)?)?;
        ring_ok &= f.mul(&g)? == g.mul(&f)?;
        ring_ok &= f.mul(&g.add(&h)?)? == f.mul(&g)?.add(&f.mul(&h)?)?;
    }
    report.push(
        "jets",
        "ring axioms",
        ring_ok,
        None,
        "associativity, commutativity, distributivity on 20 Gaussian-integer triples at N=6, exact",
    );

    let mut assoc_ok = true;
    for _ in 0..10 {
        let [a, b, c] = [0, 1, 2].map(|_| random_origin_map(rng, 2, 5));
        assoc_ok &= a.compose(&b)?.compose(&c)? == a.compose(&b.compose(&c)?)?;
    }
    report.push(
        "jets",
        "composition associativity",
        assoc_ok,
        None,
        "10 triples of origin-preserving maps on C^2 at N=5, exact",
    );

    let n = 6;
    let r = 0.1;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = random_float_jet(rng, 2, n, 8, 0);
        let g = random_float_jet(rng, 2, n, 8, 0);
        let a = JetMap::new(vec![
            random_float_jet(rng, 2, n, 6, 0),
            random_float_jet(rng, 2, n, 6, 0),
        ])?;
        let b = JetMap::new(vec![
            random_float_jet(rng, 2, n, 6, 1),
            random_float_jet(rng, 2, n, 6, 1),
        ])?;
        let p = random_point(rng, 2, r);
        let rn = r.powi(n as i32 + 1);
        let ef = f.eval(&p)?;
        let eg = g.eval(&p)?;
        let add_gap = (f.add(&g)?.eval(&p)? - (ef + eg)).norm() / 1e-12;
        let mul_gap =
            (f.mul(&g)?.eval(&p)? - ef * eg).norm() / (f.l1_norm() * g.l1_norm() * rn + 1e-12);
        let lb = b
            .components()
            .iter()
            .map(|c| c.l1_norm())
            .fold(1.0, f64::max);
        let la: f64 = a.components().iter().map(|c| c.l1_norm()).sum();
        let bp = b.eval(&p)?;
        let comp_gap = crate::dynamics::norm(
            &a.compose(&b)?
                .eval(&p)?
                .iter()
                .zip(a.eval(&bp)?)
                .map(|(x, y)| x - y)
                .collect::<Vec<_>>(),
        ) / (la * lb.powi(n as i32) * rn + 1e-12);
        worst = worst.max(add_gap).max(mul_gap).max(comp_gap);
    }
    report.push(
        "jets",
        "evaluation compatibility",
        worst <= 1.0,
        Some(worst),
        "add/mul/compose commute with evaluation at radius 0.1 up to C·r^(N+1); measured is the worst ratio to the bound",
    );

    let mut euler: f64 = 0.0;
    for d in 2..=4u32 {
        let p = JetMap::new(
            (0..3)
                .map(|_| random_float_jet(rng, 3, 6, 5, d).homogeneous(d))
                .collect(),
        )?;
        let jac = p.jacobian();
        for _ in 0..20 {
            let v = random_point(rng, 3, 1.0);
            let pv = p.eval(&v)?;
            for (i, row) in jac.iter().enumerate() {
                let dv: Complex64 = row
                    .iter()
                    .zip(&v)
                    .map(|(j, x)| j.eval(&v).unwrap() * x)
                    .sum();
                euler = euler.max((dv - pv[i] * d as f64).norm());
            }
        }
    }
    report.bound(
        "jets",
        "Euler identity",
        euler,
        1e-10,
        "DP(v)·v = d·P(v) for homogeneous maps of degree 2..4 at 20 points each",
    );
    Ok(())
}

fn maps_checks(
    report: &mut VerifyReport,
    word: &MapWord,
    p: &Params,
    order: u32,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let jet = word.jet(order.max(6))?;
    let form = verify_f_form(&jet, p)?;
    for c in &form.checks {
        let detail = if c.offending.is_empty() {
            c.detail.clone()
        } else {
            format!("{}; offending: {}", c.detail, c.offending.join(", "))
        };
        report.push(
            "maps",
            &format!("normal form {}", c.name),
            c.passed,
            None,
            detail,
        );
    }
    report.warnings.extend(form.notes.iter().cloned());

    let inv = word.inverse();
    let mut num: f64 = 0.0;
    for _ in 0..100 {
        let x = random_point(rng, 3, 0.5);
        num = num.max(crate::dynamics::norm(
            &inv.eval(&word.eval(&x)?)?
                .iter()
                .zip(&x)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        ));
    }
    let id = inv
        .jet(6)?
        .compose(&word.jet(6)?)?
        .max_diff(&JetMap::identity(3, 6));
    report.bound(
        "maps",
        "automorphism",
        num.max(id),
        1e-12,
        "F⁻¹∘F = id at 100 points of radius 0.5 and as jets at N=6",
    );

    let semi = check_semiconjugacy(word, 100, 0.5, rng)?;
    report.push(
        "maps",
        "semi-conjugacy",
        semi.max_defect <= 1e-12 && semi.orbit_defect <= 1e-9 && semi.fixed_line_exact,
        Some(semi.max_defect),
        format!(
            "‖π∘F - G∘π‖ at 100 points (tolerance 1e-12); orbit defect over {} steps {:.3e} (tolerance 1e-9); {{t=0}} fixed exactly: {}",
            semi.orbit_steps, semi.orbit_defect, semi.fixed_line_exact
        ),
    );

    let g = induced_g_of_word(word, 3)?;
    let g1 = g.component(0).coeff(&[2, 0]);
    let g2 = g.component(1).coeff(&[1, 1]);
    let dev = (g1 - Complex64::new(-(p.a + p.b), 0.0))
        .norm()
        .max((g2 - Complex64::new(-p.c, 0.0)).norm());
    report.bound(
        "maps",
        "induced map coefficients",
        dev,
        1e-12,
        &format!("pushforward is well defined; coeff(ζ², G₁) = {g1:.6}, coeff(ζw, G₂) = {g2:.6}, expected -(a+b) and -c"),
    );
    report
        .warnings
        .extend(g_form_notes(&induced_g_of_word(word, 4)?, p));

    let eq = check_equivariance(
        word,
        50,
        0,
        Complex64::new(2.0, 0.0),
        &OrbitConfig::default(),
        rng,
    )?;
    report.bound(
        "maps",
        "equivariance",
        eq.max_defect,
        1e-12,
        "F(λz, t/λ, w) = (λF₁, F₂/λ, F₃) at 50 samples, |λ| in [0.5, 2]",
    );

    let mut planes_ok = true;
    for _ in 0..100 {
        for i in 0..2 {
            let mut x = random_point(rng, 3, 1.0);
            x[i] = Complex64::default();
            planes_ok &= word.eval(&x)? == x;
        }
    }
    report.push(
        "maps",
        "fixed planes",
        planes_ok,
        None,
        "F is the identity on {z=0} and {t=0} at 100 points each, exactly",
    );

    if p.a == p.b {
        let f8 = word.jet(8)?;
        let z = Jet::var(3, 8, 0);
        let t = Jet::var(3, 8, 1);
        let lhs = t.mul(f8.component(0))?;
        let rhs = z.mul(f8.component(1))?;
        report.bound(
            "maps",
            "a=b symmetry",
            lhs.max_diff(&rhs),
            1e-12,
            "t·F₁ = z·F₂ as jets at N=8",
        );
    } else {
        report.skip(
            "maps",
            "a=b symmetry",
            format!("regime not satisfied: a = {} differs from b = {}", p.a, p.b),
        );
    }
    Ok(())
}

fn direction_sets(word: &MapWord) -> Result<Vec<(String, LeadingTerm, DirectionSet)>> {
    let lf = leading_term(&word.jet(8)?)?;
    let lg = leading_term(&induced_g_of_word(word, 4)?)?;
    let sf = characteristic_directions(&lf)?;
    let sg = characteristic_directions(&lg)?;
    Ok(vec![("F".into(), lf, sf), ("G".into(), lg, sg)])
}

fn largest(v: &[Complex64]) -> usize {
    (0..v.len())
        .max_by(|a, b| v[*a].norm().total_cmp(&v[*b].norm()))
        .unwrap_or(0)
}

fn hakim_checks(
    report: &mut VerifyReport,
    word: &MapWord,
    p: &Params,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let sets = direction_sets(word)?;
    let mut residual: f64 = 0.0;
    let mut scaling: f64 = 0.0;
    let mut euler: f64 = 0.0;
    let mut chart: f64 = 0.0;
    let mut chart_cases = 0;
    let mut count = 0;
    for (_, l, set) in &sets {
        for d in &set.directions {
            count += 1;
            residual = residual.max(l.residual(&d.v, d.lambda));
            if d.degenerate {
                continue;
            }
            for _ in 0..10 {
                let mu = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
                let v: Vec<Complex64> = d.v.iter().map(|x| x * mu).collect();
                let j = largest(&v);
                let lam = l.eval(&v)[j] / v[j];
                scaling = scaling.max((lam - d.lambda * mu.powu(l.r - 1)).norm());
                scaling = scaling.max(director_set_distance(
                    &directors_in_chart(l, &v, j)?,
                    &d.directors,
                ));
            }
            let dp = l.p.jacobian_at(&d.v)?;
            for (i, row) in dp.iter().enumerate() {
                let dv: Complex64 = row.iter().zip(&d.v).map(|(a, b)| a * b).sum();
                euler = euler.max((dv - d.lambda * d.v[i] * l.r as f64).norm());
            }
            let big: Vec<usize> = (0..d.v.len()).filter(|i| d.v[*i].norm() > 0.3).collect();
            if big.len() >= 2 {
                chart_cases += 1;
                chart = chart.max(director_set_distance(
                    &directors_in_chart(l, &d.v, big[0])?,
                    &directors_in_chart(l, &d.v, big[1])?,
                ));
            }
        }
    }
    report.bound(
        "hakim",
        "residual",
        residual,
        1e-8,
        &format!("‖P_r(v) - λv‖ over {count} directions of F and G"),
    );
    report.bound(
        "hakim",
        "scaling covariance",
        scaling,
        1e-8,
        "λ scales by μ^(r-1), directors unchanged, 10 phases per direction",
    );
    report.bound(
        "hakim",
        "Euler check",
        euler,
        1e-8,
        "DP_r(v)·v = r·λ·v on non-degenerate directions",
    );
    report.bound(
        "hakim",
        "chart independence",
        chart,
        1e-8,
        &format!(
            "directors in two charts, {chart_cases} directions with two coordinates above 0.3"
        ),
    );

    let (_, lg, sg) = &sets[1];
    let e1 = [Complex64::new(1.0, 0.0), Complex64::default()];
    let expected = (p.c - (p.a + p.b)) / (p.a + p.b);
    match sg
        .directions
        .iter()
        .find(|d| d.family.is_none() && projective_distance(&d.v, &e1) < 1e-9)
    {
        Some(d) if !d.degenerate && d.directors.len() == 1 => {
            let fd = directors_finite_difference(lg, d)?;
            let dev = (d.directors[0] - expected)
                .norm()
                .max(director_set_distance(&fd, &d.directors) / 1e4);
            report.bound(
                "hakim",
                "director of [1:0]",
                dev,
                1e-10,
                &format!(
                    "director {:.10} against (c-(a+b))/(a+b) = {expected:.10}; finite differences within 1e-6; {}",
                    d.directors[0].re,
                    classify(d)
                ),
            );
            if classify(d) != Classification::NonDegenerateAttracting {
                report.warnings.push(format!(
                    "director of [1:0] is {:.6}, not positive: parameters are not in the attracting regime c > 2a",
                    d.directors[0].re
                ));
            }
        }
        _ => report.push(
            "hakim",
            "director of [1:0]",
            false,
            None,
            "[1:0] is not a non-degenerate direction of G",
        ),
    }
    report.warnings.extend(f_direction_notes(&sets[0].2));
    if p.a == p.b {
        report.warnings.extend(g_direction_notes(sg, p.a, p.c));
    }
    report.warnings.push(format!(
        "characteristic directions of F form cones of dimension up to {}",
        sets[0].2.cone_dimension
    ));
    Ok(())
}

fn dynamics_checks(
    report: &mut VerifyReport,
    word: &MapWord,
    p: &Params,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let mut codes_ok = true;

    let fiber_cfg = OrbitConfig {
        eps_converged: 0.05,
        ..OrbitConfig::default()
    };
    let eq = check_equivariance(word, 0, 20, Complex64::new(2.0, 0.0), &fiber_cfg, rng)?;
    report.push(
        "dynamics",
        "fiber invariance",
        eq.status_agree == eq.status_samples && eq.max_trace_defect <= 1e-10,
        Some(eq.max_trace_defect),
        format!(
            "status of (z,t,w) and (2z,t/2,w) agree on {}/{}; ζ-traces agree (tolerance 1e-10)",
            eq.status_agree, eq.status_samples
        ),
    );

    let rate = 1.0 / (p.a + p.b);
    let mut mono_ok = true;
    let mut worst_rate: f64 = 0.0;
    for zeta0 in [0.01, 0.05, 0.09] {
        let s = f64::sqrt(zeta0);
        let start = [
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::default(),
        ];
        let cfg = OrbitConfig {
            max_iter: 10_000,
            eps_converged: 1e-300,
            ..OrbitConfig::default()
        };
        let o = iterate(word, &start, &cfg)?;
        codes_ok &= o.status.code() <= 2;
        mono_ok &= o.zeta_trace.len() == 10_001
            && o.zeta_trace.iter().all(|z| z.im == 0.0 && z.re > 0.0)
            && o.zeta_trace.windows(2).all(|w| w[1].re < w[0].re);
        let est = o.leau_fatou_estimate().unwrap_or(f64::NAN);
        let dev = (est - rate).abs() / rate.abs();
        worst_rate = if dev.is_nan() {
            f64::INFINITY
        } else {
            worst_rate.max(dev)
        };
    }
    report.push(
        "dynamics",
        "ζ-monotonicity",
        mono_ok && worst_rate <= 0.15,
        Some(worst_rate),
        format!("ζ₀ in {{0.01, 0.05, 0.09}}, w₀ = 0: ζ_n real, positive, strictly decreasing; n·ζ_n at n=10⁴ within 15% of 1/(a+b) = {rate}"),
    );

    let quad = PrototypeMap::OneDQuadratic { a: 1.0 };
    let slice = SliceSpec::first_coordinate_plane(&[], [-1.5, 0.5], [-1.0, 1.0], 40, 40);
    let cfg = OrbitConfig::default();
    let r1 = sample_slice(&quad, &slice, &cfg, Some(1))?;
    let r2 = sample_slice(&quad, &slice, &cfg, Some(4))?;
    let r3 = sample_slice(&quad, &slice, &cfg, None)?;
    codes_ok &= r1.codes.iter().all(|c| *c <= 2);
    let st = r1.stats();
    codes_ok &= st.converged + st.escaped + st.undecided == r1.codes.len();
    report.push(
        "dynamics",
        "raster determinism",
        r1.to_pgm() == r2.to_pgm() && r1.to_pgm() == r3.to_pgm(),
        None,
        "40x40 raster of z + z²: identical bytes with 1, 4 and default workers",
    );

    let g_cfg = OrbitConfig::default();
    let f_cfg = OrbitConfig {
        eps_converged: (2.0 * g_cfg.eps_converged).sqrt(),
        ..OrbitConfig::default()
    };
    let l2 = fiber_basin_check(word, 50, 0.05, &g_cfg, &f_cfg, rng)?;
    report.bound(
        "dynamics",
        "1D/3D consistency",
        l2.trace_defect,
        1e-10,
        "ζ-trace of the F-orbit of (√0.01, √0.01, 0.02) against the first coordinate of the G-orbit of (0.01, 0.02), 1000 steps",
    );
    report.push(
        "dynamics",
        "basin projection sampling",
        l2.agree == l2.decided && 2 * l2.decided >= l2.samples && l2.fixed_line_exact,
        Some(l2.agree as f64),
        format!(
            "G-status of q equals F-status of its lift on {}/{} decided samples ({} undecided excluded); (0,y) fixed exactly: {}",
            l2.agree, l2.decided, l2.excluded_undecided, l2.fixed_line_exact
        ),
    );

    let pr = product_recursion_check(100, rng);
    report.push(
        "dynamics",
        "product recursion",
        pr.max_rel_defect <= 1e-13 && pr.anchor_defect <= 1e-15 && pr.axis_exact,
        Some(pr.max_rel_defect),
        "zw ↦ zw(1 + zw/2)² along 100-step orbits from 100 starts (relative tolerance 1e-13)",
    );

    report.push(
        "dynamics",
        "status trichotomy",
        codes_ok,
        None,
        "every orbit and pixel above ends in exactly one of ESCAPED, CONVERGED, UNDECIDED",
    );

    let g = InducedG(word.clone());
    let w_drift = g.apply(&[Complex64::new(0.05, 0.0), Complex64::default()])[1];
    if w_drift != Complex64::default() {
        report.warnings.push(format!(
            "{{w = 0}} is not invariant under G (G(0.05, 0) has w = {w_drift:.3e}), so ζ-traces are compared with full G-orbits"
        ));
    }
    let start = [
        Complex64::new(0.1, 0.0),
        Complex64::new(0.1, 0.0),
        Complex64::new(0.05, 0.0),
    ];
    let o = iterate(
        word,
        &start,
        &OrbitConfig {
            eps_converged: 1e-300,
            record_stride: 10,
            ..OrbitConfig::default()
        },
    )?;
    if let Ok(t) = estimate_tangent(&o) {
        report.warnings.push(format!(
            "F-orbit of (0.1, 0.1, 0.05) approaches the origin tangent to [{}] (stable: {})",
            t.direction
                .iter()
                .map(|x| format!("{:.4}", x.re))
                .collect::<Vec<_>>()
                .join(":"),
            t.stable
        ));
    }
    report.warnings.push(
        "basin membership is stated with the product zw in one place; the fiber checks use (zt, w), which is what π preserves".into(),
    );
    Ok(())
}

/// Runs every check on `F` with parameters `p`. Only randomness: `seed`.
pub fn run_verify(p: Params, order: u32, seed: u64) -> Result<VerifyReport> {
    p.validate()?;
    let word = build_f(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report =
        VerifyReport::new(format!("F3 (a={}, b={}, c={})", p.a, p.b, p.c), order, seed);
    jets_checks(&mut report, &mut rng)?;
    maps_checks(&mut report, &word, &p, order, &mut rng)?;
    hakim_checks(&mut report, &word, &p, &mut rng)?;
    dynamics_checks(&mut report, &word, &p, &mut rng)?;
    Ok(report)
}

/// Checks for the family on `C^{k+1}` with all `a_i = a` and `w`-rate `b`.
pub fn run_family(k: usize, a: f64, b: f64, order: u32, seed: u64) -> Result<VerifyReport> {
    let rates = ShearRates::new(vec![a; k], b)?;
    let word = build_family(k, &rates.z_rates, b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerifyReport::new(format!("FAMILY_K (k={k}, a={a}, b={b})"), order, seed);
    if !rates.in_chosen_regime() {
        report
            .warnings
            .push(format!("b = {b} does not exceed the sum of the a_i"));
    }

    let form = verify_family_form(&word.jet(order)?, &rates)?;
    for c in &form.checks {
        let detail = if c.offending.is_empty() {
            c.detail.clone()
        } else {
            format!("{}; offending: {}", c.detail, c.offending.join(", "))
        };
        report.push(
            "maps",
            &format!("family form {}", c.name),
            c.passed,
            None,
            detail,
        );
    }
    report.warnings.extend(form.notes.iter().cloned());

    let spec2 = build_family(2, &[a, a], b)?.jet(6)?;
    let f = build_f(Params::new(a, a, b)?)?.jet(6)?;
    report.bound(
        "maps",
        "k=2 specialization",
        spec2.max_diff(&f),
        1e-12,
        "family with k=2 against F(a, a, b), coefficientwise at N=6",
    );

    let inv = word.inverse();
    let mut num: f64 = 0.0;
    let mut planes_ok = true;
    for _ in 0..100 {
        let x = random_point(&mut rng, k + 1, 0.5);
        let back = inv.eval(&word.eval(&x)?)?;
        num = num.max(crate::dynamics::norm(
            &back.iter().zip(&x).map(|(u, v)| u - v).collect::<Vec<_>>(),
        ));
        let mut y = x.clone();
        y[rng.gen_range(0..k)] = Complex64::default();
        planes_ok &= word.eval(&y)? == y;
    }
    report.bound(
        "maps",
        "automorphism",
        num,
        1e-12,
        "inverse word at 100 points of radius 0.5",
    );
    report.push(
        "maps",
        "fixed hyperplanes",
        planes_ok,
        None,
        "identity on {z_i = 0}, exactly",
    );

    let semi = check_semiconjugacy(&word, 100, 0.5, &mut rng)?;
    report.bound(
        "maps",
        "semi-conjugacy",
        semi.max_defect,
        1e-12,
        &format!(
            "π(z, w) = (z_1 ⋯ z_k, w); orbit defect {:.3e}",
            semi.orbit_defect
        ),
    );
    if k + 1 <= 4 {
        let l = leading_term(&word.jet(2 * k as u32 + 2)?)?;
        let set = characteristic_directions(&l)?;
        report.warnings.push(format!(
            "leading term of degree {}; {} characteristic direction entries, cone dimension {}",
            l.r,
            set.directions.len(),
            set.cone_dimension
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    const INVARIANTS: [&str; 18] = [
        "ring axioms",
        "composition associativity",
        "evaluation compatibility",
        "Euler identity",
        "automorphism",
        "semi-conjugacy",
        "equivariance",
        "fixed planes",
        "a=b symmetry",
        "residual",
        "scaling covariance",
        "Euler check",
        "chart independence",
        "status trichotomy",
        "fiber invariance",
        "ζ-monotonicity",
        "raster determinism",
        "1D/3D consistency",
    ];

    #[test]
    fn default_suite_passes_and_is_complete() {
        let r = run_verify(Params::default(), 8, 0).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        let unique: HashSet<&str> = names.iter().copied().collect();
        assert_eq!(unique.len(), names.len());
        for inv in INVARIANTS {
            assert_eq!(names.iter().filter(|n| **n == inv).count(), 1, "{inv}");
        }
        assert_eq!(r, run_verify(Params::default(), 8, 0).unwrap());
    }

    #[test]
    fn boundary_parameters_warn() {
        let r = run_verify(Params::new(1.0, 1.0, 2.0).unwrap(), 8, 0).unwrap();
        assert!(r
            .checks
            .iter()
            .filter(|c| c.name.starts_with("normal form"))
            .all(|c| c.passed));
        assert!(r.warnings.iter().any(|w| w.contains("attracting regime")));
    }

    #[test]
    fn unequal_rates_skip_symmetry() {
        let r = run_verify(Params::new(1.0, 2.0, 3.0).unwrap(), 8, 0).unwrap();
        let c = r.check("a=b symmetry").unwrap();
        assert!(c.skipped && c.detail.contains("regime not satisfied"));
    }

    #[test]
    fn family_suite() {
        let r = run_family(3, 1.0, 4.0, 8, 0).unwrap();
        assert!(r.passed(), "{}", r.to_text());
    }
}
