//! Shears and overshears of `C^{m+1}`, the words they generate, and the maps built
//! from them.
//!
//! Coordinates are `(z_1, .., z_m, w)` with `ζ = z_1 ⋯ z_m`. For `m = 2` these are
//! `(z, t, w)` and `ζ = zt`. The three elementary maps are
//!
//! * `Φ1(z, w) = (z, w - ζ)`
//! * `Φ2(z, w) = (z_i e^{a_i w}, w)`
//! * `Φ3(z, w) = (z, w e^{-sζ} + qζ²)` with `q = Σa_i`, `s = q + b`
//!
//! and `F = Φ3 ∘ Φ2⁻¹ ∘ Φ1⁻¹ ∘ Φ2 ∘ Φ1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{default_var_names, Exponents, Jet, JetMap, SYMBOLIC_TOL};

/// Parameters `(a, b, c)` of the map on `C^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            a: 1.0,
            b: 1.0,
            c: 3.0,
        }
    }
}

impl Params {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let p = Params { a, b, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if v == 0.0 || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "parameter {name} must be finite and nonzero, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `a = b > 0` and `c > 2a`.
    pub fn in_chosen_regime(&self) -> bool {
        self.a == self.b && self.a > 0.0 && self.c > 2.0 * self.a
    }

    pub fn rates(&self) -> ShearRates {
        ShearRates {
            z_rates: vec![self.a, self.b],
            w_rate: self.c,
        }
    }
}

/// Rates of a shear family on `C^{m+1}`: one `a_i` per `z_i` and the rate `b` of `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearRates {
    pub z_rates: Vec<f64>,
    pub w_rate: f64,
}

impl ShearRates {
    pub fn new(z_rates: Vec<f64>, w_rate: f64) -> Result<Self> {
        if z_rates.is_empty() {
            return Err(Error::Dimension(
                "at least one z-variable is required".into(),
            ));
        }
        for v in z_rates.iter().chain(std::iter::once(&w_rate)) {
            if *v == 0.0 || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "shear rates must be finite and nonzero, got {v}"
                )));
            }
        }
        Ok(ShearRates { z_rates, w_rate })
    }

    /// Number of `z` variables.
    pub fn m(&self) -> usize {
        self.z_rates.len()
    }

    /// Ambient dimension `m + 1`.
    pub fn dim(&self) -> usize {
        self.z_rates.len() + 1
    }

    fn q(&self) -> f64 {
        self.z_rates.iter().sum()
    }

    fn s(&self) -> f64 {
        self.q() + self.w_rate
    }

    /// All `a_i` equal and positive, `b > Σ a_i`.
    pub fn in_chosen_regime(&self) -> bool {
        let a0 = self.z_rates[0];
        a0 > 0.0 && self.z_rates.iter().all(|a| *a == a0) && self.w_rate > self.q()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ElementaryKind {
    Phi1,
    Phi2,
    Phi3,
    Phi1Inv,
    Phi2Inv,
    Phi3Inv,
}

impl ElementaryKind {
    pub fn inverse(self) -> Self {
        use ElementaryKind::*;
        match self {
            Phi1 => Phi1Inv,
            Phi2 => Phi2Inv,
            Phi3 => Phi3Inv,
            Phi1Inv => Phi1,
            Phi2Inv => Phi2,
            Phi3Inv => Phi3,
        }
    }

    pub fn label(self) -> &'static str {
        use ElementaryKind::*;
        match self {
            Phi1 => "φ1",
            Phi2 => "φ2",
            Phi3 => "φ3",
            Phi1Inv => "φ1⁻¹",
            Phi2Inv => "φ2⁻¹",
            Phi3Inv => "φ3⁻¹",
        }
    }
}

pub(crate) fn zeta_of(p: &[Complex64]) -> Complex64 {
    p[..p.len() - 1].iter().product()
}

/// One shear or overshear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementaryMap {
    pub kind: ElementaryKind,
    pub rates: ShearRates,
}

impl ElementaryMap {
    pub fn new(kind: ElementaryKind, rates: ShearRates) -> Self {
        ElementaryMap { kind, rates }
    }

    pub fn inverse(&self) -> Self {
        ElementaryMap::new(self.kind.inverse(), self.rates.clone())
    }

    pub fn dim(&self) -> usize {
        self.rates.dim()
    }

    /// Closed-form evaluation; `p` must have length `dim()`.
    pub fn apply(&self, p: &[Complex64]) -> Vec<Complex64> {
        use ElementaryKind::*;
        let m = self.rates.m();
        let mut out = p.to_vec();
        let w = p[m];
        match self.kind {
            Phi1 => out[m] = w - zeta_of(p),
            Phi1Inv => out[m] = w + zeta_of(p),
            Phi2 | Phi2Inv => {
                let sign = if self.kind == Phi2 { 1.0 } else { -1.0 };
                for (x, a) in out[..m].iter_mut().zip(&self.rates.z_rates) {
                    *x *= (w * (sign * a)).exp();
                }
            }
            Phi3 => {
                let zeta = zeta_of(p);
                out[m] = w * (zeta * -self.rates.s()).exp() + zeta * zeta * self.rates.q();
            }
            Phi3Inv => {
                let zeta = zeta_of(p);
                out[m] = (w - zeta * zeta * self.rates.q()) * (zeta * self.rates.s()).exp();
            }
        }
        out
    }

    /// Taylor jet at the origin, truncated at `order`.
    pub fn jet(&self, order: u32) -> Result<JetMap> {
        use ElementaryKind::*;
        let n = self.dim();
        let m = self.rates.m();
        let mut comps: Vec<Jet> = (0..n).map(|i| Jet::var(n, order, i)).collect();
        let mut zexp = vec![1u32; n];
        zexp[m] = 0;
        let zeta = Jet::monomial(n, order, &zexp, Complex64::new(1.0, 0.0))?;
        let w = Jet::var(n, order, m);
        let real = |x: f64| Complex64::new(x, 0.0);
        match self.kind {
            Phi1 => comps[m] = w.sub(&zeta)?,
            Phi1Inv => comps[m] = w.add(&zeta)?,
            Phi2 | Phi2Inv => {
                let sign = if self.kind == Phi2 { 1.0 } else { -1.0 };
                for (i, a) in self.rates.z_rates.iter().enumerate() {
                    let factor = w.scale(real(sign * a)).exp()?;
                    comps[i] = comps[i].mul(&factor)?;
                }
            }
            Phi3 => {
                let decay = zeta.scale(real(-self.rates.s())).exp()?;
                let corr = zeta.mul(&zeta)?.scale(real(self.rates.q()));
                comps[m] = w.mul(&decay)?.add(&corr)?;
            }
            Phi3Inv => {
                let grow = zeta.scale(real(self.rates.s())).exp()?;
                let corr = zeta.mul(&zeta)?.scale(real(self.rates.q()));
                comps[m] = w.sub(&corr)?.mul(&grow)?;
            }
        }
        JetMap::new(comps)
    }
}

/// A composition of elementary maps, written left to right as in
/// `Φ3 ∘ Φ2⁻¹ ∘ ⋯`; the rightmost factor is applied first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapWord {
    factors: Vec<ElementaryMap>,
    dim: usize,
}

impl MapWord {
    pub fn new(factors: Vec<ElementaryMap>) -> Result<Self> {
        let dim = factors
            .first()
            .map(ElementaryMap::dim)
            .ok_or_else(|| Error::Dimension("empty map word".into()))?;
        if factors.iter().any(|f| f.dim() != dim) {
            return Err(Error::Dimension(
                "factors act on different dimensions".into(),
            ));
        }
        Ok(MapWord { factors, dim })
    }

    pub fn factors(&self) -> &[ElementaryMap] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn describe(&self) -> String {
        self.factors
            .iter()
            .map(|f| f.kind.label())
            .collect::<Vec<_>>()
            .join(" ∘ ")
    }

    /// Exact evaluation. Non-finite results are returned as-is.
    pub fn eval(&self, p: &[Complex64]) -> Result<Vec<Complex64>> {
        if p.len() != self.dim {
            return Err(Error::Dimension(format!(
                "point of length {} for a map on C^{}",
                p.len(),
                self.dim
            )));
        }
        Ok(self.apply(p))
    }

    /// Unchecked evaluation, for hot loops that validated the dimension already.
    ///
    /// Each `z_i` is carried as `base_i · exp(E_i)` and the overshear exponents are
    /// summed before exponentiating, so `Φ2⁻¹ ∘ Φ2` cancels exactly wherever the
    /// intermediate `w` values agree (e.g. on the fixed planes).
    pub(crate) fn apply(&self, p: &[Complex64]) -> Vec<Complex64> {
        use ElementaryKind::*;
        let m = self.dim - 1;
        let base = &p[..m];
        let mut expo = vec![Complex64::default(); m];
        let mut w = p[m];
        let zeta = |expo: &[Complex64]| -> Complex64 {
            base.iter().product::<Complex64>() * expo.iter().sum::<Complex64>().exp()
        };
        for f in self.factors.iter().rev() {
            let r = &f.rates;
            match f.kind {
                Phi1 => w -= zeta(&expo),
                Phi1Inv => w += zeta(&expo),
                Phi2 => {
                    for (e, a) in expo.iter_mut().zip(&r.z_rates) {
                        *e += w * *a;
                    }
                }
                Phi2Inv => {
                    for (e, a) in expo.iter_mut().zip(&r.z_rates) {
                        *e -= w * *a;
                    }
                }
                Phi3 => {
                    let z = zeta(&expo);
                    w = w * (z * -r.s()).exp() + z * z * r.q();
                }
                Phi3Inv => {
                    let z = zeta(&expo);
                    w = (w - z * z * r.q()) * (z * r.s()).exp();
                }
            }
        }
        let mut out: Vec<Complex64> = base
            .iter()
            .zip(&expo)
            .map(|(b, e)| {
                if *e == Complex64::default() {
                    *b
                } else {
                    b * e.exp()
                }
            })
            .collect();
        out.push(w);
        out
    }

    pub fn inverse(&self) -> MapWord {
        MapWord {
            factors: self
                .factors
                .iter()
                .rev()
                .map(ElementaryMap::inverse)
                .collect(),
            dim: self.dim,
        }
    }

    /// `self ∘ other`.
    pub fn then_after(&self, other: &MapWord) -> Result<MapWord> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        MapWord::new(factors)
    }

    /// Jet at the origin: composition of the factor jets at `order`.
    pub fn jet(&self, order: u32) -> Result<JetMap> {
        let mut acc = JetMap::identity(self.dim, order);
        for f in self.factors.iter().rev() {
            acc = f.jet(order)?.compose(&acc)?;
        }
        Ok(acc)
    }
}

fn shear_word(rates: ShearRates) -> Result<MapWord> {
    use ElementaryKind::*;
    MapWord::new(
        [Phi3, Phi2Inv, Phi1Inv, Phi2, Phi1]
            .into_iter()
            .map(|k| ElementaryMap::new(k, rates.clone()))
            .collect(),
    )
}

/// `F = Φ3 ∘ Φ2⁻¹ ∘ Φ1⁻¹ ∘ Φ2 ∘ Φ1` on `C^3`.
pub fn build_f(p: Params) -> Result<MapWord> {
    p.validate()?;
    shear_word(p.rates())
}

/// The analogous five-factor word on `C^{k+1}` with `ζ = z_1 ⋯ z_k`.
pub fn build_family(k: usize, a: &[f64], b: f64) -> Result<MapWord> {
    if k < 2 {
        return Err(Error::Domain(format!("family needs k >= 2, got {k}")));
    }
    if a.len() != k {
        return Err(Error::Dimension(format!(
            "{} rates given for k = {k}",
            a.len()
        )));
    }
    shear_word(ShearRates::new(a.to_vec(), b)?)
}

/// `π(z, t, w) = (zt, w)`; in higher dimension `(z_1 ⋯ z_m, w)`.
pub fn project_pi(p: &[Complex64]) -> [Complex64; 2] {
    debug_assert!(p.len() >= 2);
    [zeta_of(p), p[p.len() - 1]]
}

/// Principal `m`-th root lift `(x^{1/m}, .., x^{1/m}, y)` of `(x, y)`.
pub fn lift(q: [Complex64; 2], m: usize) -> Vec<Complex64> {
    let root = match m {
        1 => q[0],
        2 => q[0].sqrt(),
        _ => q[0].powf(1.0 / m as f64),
    };
    let mut p = vec![root; m];
    p.push(q[1]);
    p
}

/// `G(q) = π(F(lift(q)))`, well defined because `F` commutes with the torus action
/// preserving `ζ`.
pub fn eval_g_exact(q: [Complex64; 2], word: &MapWord) -> [Complex64; 2] {
    project_pi(&word.apply(&lift(q, word.dim() - 1)))
}

/// Jet of the pushed-forward map `G` in `(ζ, w)`.
///
/// Every monomial of `F₁F₂` and `F₃` must be `z^i t^i w^m`; it becomes `ζ^i w^m`.
/// Because `ζ` has weight 2, the result is complete only up to total degree
/// `N / 2`, which is the order of the returned map.
pub fn induced_g(f_jet: &JetMap) -> Result<JetMap> {
    if f_jet.nvars() != 3 || f_jet.arity() != 3 {
        return Err(Error::Dimension(format!(
            "induced map needs a jet on C^3, got {} variables and {} components",
            f_jet.nvars(),
            f_jet.arity()
        )));
    }
    let order = f_jet.order();
    let g_order = order / 2;
    let zeta = f_jet.component(0).mul(f_jet.component(1))?;
    let names = default_var_names(3);
    let push = |j: &Jet| -> Result<Jet> {
        let mut terms = Vec::new();
        for (e, c) in j.terms() {
            if c.norm() <= SYMBOLIC_TOL {
                continue;
            }
            let [i, t, m] = [e.as_slice()[0], e.as_slice()[1], e.as_slice()[2]];
            if i != t {
                return Err(Error::NotSemiConjugate(e.display_with(&names)));
            }
            terms.push((vec![i, m], *c));
        }
        Jet::from_terms(2, g_order, terms)
    };
    JetMap::new(vec![push(&zeta)?, push(f_jet.component(2))?])
}

/// `G` at order `order` in `(ζ, w)`, from the jet of `F` at twice that order.
pub fn induced_g_of_word(word: &MapWord, order: u32) -> Result<JetMap> {
    induced_g(&word.jet(2 * order)?)
}

/// Variable names for jets of `G`.
pub fn g_var_names() -> Vec<String> {
    vec!["ζ".into(), "w".into()]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub offending: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FormReport {
    pub checks: Vec<FormCheck>,
    /// Observations that are reported but never fail the report.
    pub notes: Vec<String>,
}

impl FormReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&FormCheck> {
        self.checks.iter().find(|c| c.name.starts_with(name))
    }
}

const ROMAN: [&str; 8] = ["i", "ii", "iii", "iv", "v", "vi", "vii", "viii"];

/// Checks the normal form
///
/// ```text
/// F_i = z_i (1 - a_i ζ) + z_i·(ζ², ζw)
/// F_w = w (1 - b ζ)     + w·(ζ², ζw) + (ζ³)
/// ```
///
/// up to the jet's order, with one coefficient check per component followed by
/// one ideal-membership check for the `z` components and one for `w`.
pub fn verify_normal_form(jet: &JetMap, rates: &ShearRates) -> Result<FormReport> {
    let n = rates.dim();
    let m = rates.m();
    if jet.nvars() != n || jet.arity() != n {
        return Err(Error::Dimension(format!(
            "normal form on C^{n} checked against a jet with {} variables, {} components",
            jet.nvars(),
            jet.arity()
        )));
    }
    let order = jet.order();
    let names = default_var_names(n);
    let one = Complex64::new(1.0, 0.0);
    let mut zeta_e = vec![1u32; n];
    zeta_e[m] = 0;
    let zeta = Jet::monomial(n, order, &zeta_e, one)?;
    let mut report = FormReport::default();

    let unit = |i: usize| {
        let mut e = vec![0u32; n];
        e[i] = 1;
        e
    };
    let times_zeta = |i: usize| {
        let mut e = zeta_e.clone();
        e[i] += 1;
        e
    };

    for (i, rate) in rates
        .z_rates
        .iter()
        .copied()
        .chain(std::iter::once(rates.w_rate))
        .enumerate()
    {
        let comp = jet.component(i);
        let lin = comp.coeff(&unit(i));
        let cubic = comp.coeff(&times_zeta(i));
        let passed = (lin - one).norm() <= SYMBOLIC_TOL && (cubic + rate).norm() <= SYMBOLIC_TOL;
        let mono = Exponents::new(times_zeta(i)).display_with(&names);
        let mut offending = Vec::new();
        if !passed {
            offending.push(format!(
                "{}: coeff {} = {lin}, coeff {mono} = {cubic}",
                names[i], names[i]
            ));
        }
        report.checks.push(FormCheck {
            name: format!("({}) F{} linear/cubic coefficients", ROMAN[i.min(7)], i + 1),
            passed,
            detail: format!(
                "coeff of {} should be 1, of {mono} should be {}",
                names[i], -rate
            ),
            offending,
        });
    }

    let z_allowed = |e: &[u32], i: usize| {
        let mut a = zeta_e.clone();
        a[i] += 1;
        let mut zz = a.clone();
        for (x, y) in zz.iter_mut().zip(&zeta_e) {
            *x += y;
        }
        let mut zw = a;
        zw[m] += 1;
        e.iter().zip(&zz).all(|(x, y)| x >= y) || e.iter().zip(&zw).all(|(x, y)| x >= y)
    };
    let mut offending = Vec::new();
    for i in 0..m {
        let base = Jet::var(n, order, i)
            .mul(&Jet::one(n, order).sub(&zeta.scale(Complex64::new(rates.z_rates[i], 0.0)))?)?;
        let rem = jet.component(i).sub(&base)?;
        for (e, c) in rem.terms() {
            if c.norm() > SYMBOLIC_TOL && !z_allowed(e.as_slice(), i) {
                offending.push(format!("F{}: {} ({c})", i + 1, e.display_with(&names)));
            }
        }
    }
    report.checks.push(FormCheck {
        name: format!("({}) z-remainders in z·(ζ², ζw)", ROMAN[(m + 1).min(7)]),
        passed: offending.is_empty(),
        detail: format!("F_i - z_i(1 - a_i ζ) up to degree {order}"),
        offending,
    });

    let w_allowed = |e: &[u32]| {
        let mut wzz = zeta_e.iter().map(|x| 2 * x).collect::<Vec<_>>();
        wzz[m] = 1;
        let mut zww = zeta_e.clone();
        zww[m] = 2;
        let zzz = zeta_e.iter().map(|x| 3 * x).collect::<Vec<_>>();
        [wzz, zww, zzz]
            .iter()
            .any(|g| e.iter().zip(g).all(|(x, y)| x >= y))
    };
    let base = Jet::var(n, order, m)
        .mul(&Jet::one(n, order).sub(&zeta.scale(Complex64::new(rates.w_rate, 0.0)))?)?;
    let rem = jet.component(m).sub(&base)?;
    let offending: Vec<String> = rem
        .terms()
        .filter(|(e, c)| c.norm() > SYMBOLIC_TOL && !w_allowed(e.as_slice()))
        .map(|(e, c)| format!("F{}: {} ({c})", m + 1, e.display_with(&names)))
        .collect();
    report.checks.push(FormCheck {
        name: format!(
            "({}) w-remainder in w·(ζ², ζw) + (ζ³)",
            ROMAN[(m + 2).min(7)]
        ),
        passed: offending.is_empty(),
        detail: format!("F_w - w(1 - b ζ) up to degree {order}"),
        offending,
    });
    Ok(report)
}

/// Normal-form check for the map on `C^3`: checks (i)–(v).
pub fn verify_f_form(f_jet: &JetMap, p: &Params) -> Result<FormReport> {
    if f_jet.nvars() != 3 {
        return Err(Error::Dimension(format!(
            "expected a jet on C^3, got {} variables",
            f_jet.nvars()
        )));
    }
    if f_jet.order() < 6 {
        return Err(Error::Range(format!(
            "normal-form check needs order >= 6, got {}",
            f_jet.order()
        )));
    }
    let mut report = verify_normal_form(f_jet, &p.rates())?;
    report.notes.push(
        "ζ is taken as zt throughout; the source also writes ζ = zw next to the \
         induced map, which is inconsistent with π(z,t,w) = (zt,w)"
            .into(),
    );
    Ok(report)
}

/// Normal-form check for the family on `C^{k+1}`, plus notes on monomials that
/// the stated remainder `O(ζ³, ζ²w, ζw³)` of the last component would exclude.
pub fn verify_family_form(jet: &JetMap, rates: &ShearRates) -> Result<FormReport> {
    let mut report = verify_normal_form(jet, rates)?;
    let n = rates.dim();
    let m = rates.m();
    let names = default_var_names(n);
    let mut zeta_e = vec![1u32; n];
    zeta_e[m] = 0;
    let zeta = Jet::monomial(n, jet.order(), &zeta_e, Complex64::new(1.0, 0.0))?;
    let base = Jet::var(n, jet.order(), m)
        .mul(&Jet::one(n, jet.order()).sub(&zeta.scale(Complex64::new(rates.w_rate, 0.0)))?)?;
    let rem = jet.component(m).sub(&base)?;
    let gens: Vec<Vec<u32>> = [(3, 0), (2, 1), (1, 3)]
        .iter()
        .map(|&(zp, wp)| {
            let mut g: Vec<u32> = zeta_e.iter().map(|x| x * zp).collect();
            g[m] = wp;
            g
        })
        .collect();
    for (e, c) in rem.terms() {
        if c.norm() > SYMBOLIC_TOL && !gens.iter().any(|g| e.divisible_by(g)) {
            report.notes.push(format!(
                "F{}: monomial {} with coefficient {c} lies outside O(ζ³, ζ²w, ζw³); \
                 it is allowed by w·O(ζ², ζw)",
                m + 1,
                e.display_with(&names)
            ));
        }
    }
    Ok(report)
}

/// Notes comparing a jet of `G` with the shape
/// `(ζ - 2aζ² + O(ζ³, ζ²w), w - cζw + O(ζ³, ζ²w, ζw³))`.
pub fn g_form_notes(g: &JetMap, p: &Params) -> Vec<String> {
    let names = g_var_names();
    let mut notes = Vec::new();
    let expected = [
        (vec![1u32, 0u32], 0usize, 1.0),
        (vec![2, 0], 0, -(p.a + p.b)),
        (vec![0, 1], 1, 1.0),
        (vec![1, 1], 1, -p.c),
    ];
    let mut lower = [Jet::zero(2, g.order()), Jet::zero(2, g.order())];
    for (e, comp, v) in expected {
        if e.iter().sum::<u32>() <= g.order() {
            lower[comp] = lower[comp]
                .add(&Jet::monomial(2, g.order(), &e, Complex64::new(v, 0.0)).unwrap())
                .unwrap();
        }
    }
    let gens: [&[&[u32]]; 2] = [&[&[3, 0], &[2, 1]], &[&[3, 0], &[2, 1], &[1, 3]]];
    for comp in 0..2 {
        let rem = g.component(comp).sub(&lower[comp]).unwrap();
        for (e, c) in rem.terms() {
            if c.norm() > SYMBOLIC_TOL && !gens[comp].iter().any(|gen| e.divisible_by(gen)) {
                notes.push(format!(
                    "G{}: monomial {} with coefficient {c} lies outside the stated remainder",
                    comp + 1,
                    e.display_with(&names)
                ));
            }
        }
    }
    notes
}

/// The model maps that motivate the construction.
#[derive(Clone, Debug, PartialEq)]
pub enum PrototypeMap {
    /// `z ↦ z + a z²`
    OneDQuadratic { a: f64 },
    /// `(z, w) ↦ (z, w)(1 + zw/2)`
    TwoDProduct,
    /// The family word on `C^{k+1}`.
    FamilyK(MapWord),
}

impl PrototypeMap {
    pub fn family(k: usize, a: &[f64], b: f64) -> Result<Self> {
        Ok(PrototypeMap::FamilyK(build_family(k, a, b)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            PrototypeMap::OneDQuadratic { .. } => 1,
            PrototypeMap::TwoDProduct => 2,
            PrototypeMap::FamilyK(w) => w.dim(),
        }
    }

    pub fn eval(&self, p: &[Complex64]) -> Result<Vec<Complex64>> {
        if p.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point of length {} for a prototype on C^{}",
                p.len(),
                self.dim()
            )));
        }
        Ok(self.apply(p))
    }

    pub(crate) fn apply(&self, p: &[Complex64]) -> Vec<Complex64> {
        match self {
            PrototypeMap::OneDQuadratic { a } => vec![p[0] + p[0] * p[0] * *a],
            PrototypeMap::TwoDProduct => {
                let s = 1.0 + p[0] * p[1] * 0.5;
                vec![p[0] * s, p[1] * s]
            }
            PrototypeMap::FamilyK(w) => w.apply(p),
        }
    }

    pub fn jet(&self, order: u32) -> Result<JetMap> {
        let c = |x: f64| Complex64::new(x, 0.0);
        match self {
            PrototypeMap::OneDQuadratic { a } => JetMap::new(vec![Jet::from_terms(
                1,
                order,
                [(vec![1], c(1.0)), (vec![2], c(*a))],
            )?]),
            PrototypeMap::TwoDProduct => JetMap::new(vec![
                Jet::from_terms(2, order, [(vec![1, 0], c(1.0)), (vec![2, 1], c(0.5))])?,
                Jet::from_terms(2, order, [(vec![0, 1], c(1.0)), (vec![1, 2], c(0.5))])?,
            ]),
            PrototypeMap::FamilyK(w) => w.jet(order),
        }
    }
}

/// Which map a run is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapFamily {
    F3,
    /// The map induced on `(ζ, w)` by `F3`.
    G,
    #[serde(rename = "FAMILY_K")]
    FamilyK,
    #[serde(rename = "PROTO_1D")]
    Proto1D,
    #[serde(rename = "PROTO_2D")]
    Proto2D,
}

impl std::str::FromStr for MapFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F3" => Ok(MapFamily::F3),
            "G" => Ok(MapFamily::G),
            "FAMILY_K" => Ok(MapFamily::FamilyK),
            "PROTO_1D" => Ok(MapFamily::Proto1D),
            "PROTO_2D" => Ok(MapFamily::Proto2D),
            other => Err(Error::Domain(format!("unknown map family {other:?}"))),
        }
    }
}

/// `{"family": .., "a": .., "b": .., "c": .., "k": ..}`.
///
/// For `F3` and `G`, a missing `b` defaults to `a`. For `FAMILY_K`, all `a_i`
/// equal `a` and `b` is the rate of `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub family: MapFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl MapSpec {
    pub fn params(&self) -> Result<Params> {
        let d = Params::default();
        let a = self.a.unwrap_or(d.a);
        Params::new(a, self.b.unwrap_or(a), self.c.unwrap_or(d.c))
    }

    /// `(k, [a; k], b)` for the family; defaults `k = 3`, `a = 1`, `b = 4`.
    pub fn family_rates(&self) -> Result<ShearRates> {
        let k = self.k.unwrap_or(3);
        if k < 2 {
            return Err(Error::Domain(format!("family needs k >= 2, got {k}")));
        }
        ShearRates::new(vec![self.a.unwrap_or(1.0); k], self.b.unwrap_or(4.0))
    }
}
