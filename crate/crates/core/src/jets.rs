//! Sparse truncated multivariate power series ("jets") with complex coefficients.
//!
//! A [`Jet`] stores the monomials of total degree `<= order` in `nvars` variables.
//! Every operation truncates by total degree and drops coefficients whose modulus
//! falls below [`PRUNE_THRESHOLD`]. Terms are kept in graded-lexicographic order,
//! so iteration, evaluation and serialization are bit-stable.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients below this modulus are dropped after every operation.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Tolerance used for "symbolic" coefficient equality.
pub const SYMBOLIC_TOL: f64 = 1e-12;

/// Exponent vector of a monomial.
///
/// Ordered by total degree first; within a degree, larger leading exponents come
/// first (`z^2 < zt < t^2` for variables `z, t`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponents(Vec<u32>);

impl Exponents {
    pub fn new(exps: Vec<u32>) -> Self {
        Exponents(exps)
    }

    pub fn zero(nvars: usize) -> Self {
        Exponents(vec![0; nvars])
    }

    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        Exponents(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn plus(&self, other: &Exponents) -> Exponents {
        Exponents(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// True when `other` divides this monomial.
    pub fn divisible_by(&self, other: &[u32]) -> bool {
        self.0.iter().zip(other).all(|(a, b)| a >= b)
    }

    /// Renders the monomial with the given variable names, e.g. `z²t`.
    pub fn display_with(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (e, name) in self.0.iter().zip(names) {
            match e {
                0 => {}
                1 => out.push_str(name),
                _ => {
                    out.push_str(name);
                    out.push_str(&superscript(*e));
                }
            }
        }
        if out.is_empty() {
            out.push('1');
        }
        out
    }
}

impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn superscript(n: u32) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

/// Default variable names: `z` for one variable, `(z, w)` for two, `(z, t, w)`
/// for three, `(z1, .., z_{k-1}, w)` beyond that.
pub fn default_var_names(nvars: usize) -> Vec<String> {
    match nvars {
        1 => vec!["z".into()],
        2 => vec!["z".into(), "w".into()],
        3 => vec!["z".into(), "t".into(), "w".into()],
        k => (1..k)
            .map(|i| format!("z{i}"))
            .chain(std::iter::once("w".to_string()))
            .collect(),
    }
}

/// Truncated power series in `nvars` variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "JetJson", try_from = "JetJson")]
pub struct Jet {
    nvars: usize,
    order: u32,
    terms: BTreeMap<Exponents, Complex64>,
}

impl Jet {
    pub fn zero(nvars: usize, order: u32) -> Self {
        Jet {
            nvars,
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, order: u32, c: Complex64) -> Self {
        let mut j = Jet::zero(nvars, order);
        j.insert(Exponents::zero(nvars), c);
        j
    }

    pub fn one(nvars: usize, order: u32) -> Self {
        Jet::constant(nvars, order, Complex64::new(1.0, 0.0))
    }

    /// The coordinate function `x_var`.
    pub fn var(nvars: usize, order: u32, var: usize) -> Self {
        let mut j = Jet::zero(nvars, order);
        j.insert(Exponents::unit(nvars, var), Complex64::new(1.0, 0.0));
        j
    }

    /// `c * x^exps`; zero when the degree exceeds `order`.
    pub fn monomial(nvars: usize, order: u32, exps: &[u32], c: Complex64) -> Result<Self> {
        if exps.len() != nvars {
            return Err(Error::Dimension(format!(
                "exponent vector of length {} for {nvars} variables",
                exps.len()
            )));
        }
        let mut j = Jet::zero(nvars, order);
        j.insert(Exponents(exps.to_vec()), c);
        Ok(j)
    }

    /// Builds a jet from `(exponents, coefficient)` pairs, summing duplicates.
    pub fn from_terms<I>(nvars: usize, order: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        let mut acc: BTreeMap<Exponents, Complex64> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::Dimension(format!(
                    "exponent vector of length {} for {nvars} variables",
                    e.len()
                )));
            }
            let e = Exponents(e);
            if e.degree() <= order {
                *acc.entry(e).or_default() += c;
            }
        }
        Ok(Jet::from_map(nvars, order, acc))
    }

    fn from_map(nvars: usize, order: u32, mut terms: BTreeMap<Exponents, Complex64>) -> Self {
        terms.retain(|_, c| c.norm() >= PRUNE_THRESHOLD);
        Jet {
            nvars,
            order,
            terms,
        }
    }

    fn insert(&mut self, e: Exponents, c: Complex64) {
        if e.degree() <= self.order && c.norm() >= PRUNE_THRESHOLD {
            self.terms.insert(e, c);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> Complex64 {
        self.terms
            .get(&Exponents(exps.to_vec()))
            .copied()
            .unwrap_or_default()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&vec![0; self.nvars])
    }

    /// Smallest total degree carrying a coefficient of modulus above `tol`.
    pub fn lowest_degree(&self, tol: f64) -> Option<u32> {
        self.terms
            .iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(e, _)| e.degree())
            .min()
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.nvars != other.nvars || self.order != other.order {
            return Err(Error::Dimension(format!(
                "jets over ({}, N={}) and ({}, N={})",
                self.nvars, self.order, other.nvars, other.order
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let mut acc = self.terms.clone();
        for (e, c) in &other.terms {
            *acc.entry(e.clone()).or_default() += c;
        }
        Ok(Jet::from_map(self.nvars, self.order, acc))
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect();
        Jet::from_map(self.nvars, self.order, terms)
    }

    /// Truncated product.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let mut acc: BTreeMap<Exponents, Complex64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            let da = ea.degree();
            for (eb, cb) in &other.terms {
                if da + eb.degree() > self.order {
                    continue;
                }
                *acc.entry(ea.plus(eb)).or_default() += ca * cb;
            }
        }
        Ok(Jet::from_map(self.nvars, self.order, acc))
    }

    pub fn pow(&self, n: u32) -> Result<Jet> {
        let mut out = Jet::one(self.nvars, self.order);
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// `exp(self)` for a jet without constant term, as the finite sum
    /// `sum_{m<=N} self^m / m!`.
    pub fn exp(&self) -> Result<Jet> {
        let c0 = self.constant_term();
        if c0 != Complex64::default() {
            return Err(Error::Domain(format!(
                "exp of a jet with nonzero constant term {c0}"
            )));
        }
        let mut out = Jet::one(self.nvars, self.order);
        let mut power = Jet::one(self.nvars, self.order);
        for m in 1..=self.order {
            power = power.mul(self)?.scale(Complex64::new(1.0 / m as f64, 0.0));
            if power.is_zero() {
                break;
            }
            out = out.add(&power)?;
        }
        Ok(out)
    }

    /// Direct sum `sum c * prod p_i^e_i` in graded-lex order.
    pub fn eval(&self, p: &[Complex64]) -> Result<Complex64> {
        if p.len() != self.nvars {
            return Err(Error::Dimension(format!(
                "point of length {} for a jet in {} variables",
                p.len(),
                self.nvars
            )));
        }
        let mut sum = Complex64::default();
        for (e, c) in &self.terms {
            let mut m = *c;
            for (x, k) in p.iter().zip(e.as_slice()) {
                if *k > 0 {
                    m *= x.powu(*k);
                }
            }
            sum += m;
        }
        Ok(sum)
    }

    /// Terms of total degree exactly `d`.
    pub fn homogeneous(&self, d: u32) -> Jet {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.degree() == d)
            .map(|(e, c)| (e.clone(), *c))
            .collect();
        Jet::from_map(self.nvars, self.order, terms)
    }

    /// Partial derivative in `var`, as a jet of order `N - 1` (order 0 stays 0).
    pub fn derivative(&self, var: usize) -> Jet {
        let order = self.order.saturating_sub(1);
        let mut acc = BTreeMap::new();
        for (e, c) in &self.terms {
            let k = e.0[var];
            if k == 0 {
                continue;
            }
            let mut d = e.clone();
            d.0[var] -= 1;
            if d.degree() <= order {
                acc.insert(d, c * k as f64);
            }
        }
        Jet::from_map(self.nvars, order, acc)
    }

    /// Same series re-truncated at `order` (may raise the nominal order; no new
    /// terms appear).
    pub fn with_order(&self, order: u32) -> Jet {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.degree() <= order)
            .map(|(e, c)| (e.clone(), *c))
            .collect();
        Jet::from_map(self.nvars, order, terms)
    }

    /// Coefficientwise comparison: same variables and order, and every monomial
    /// in either jet agrees within `tol`.
    pub fn approx_eq(&self, other: &Jet, tol: f64) -> bool {
        if self.nvars != other.nvars || self.order != other.order {
            return false;
        }
        self.max_diff(other) <= tol
    }

    /// Largest coefficient difference over the union of monomials.
    pub fn max_diff(&self, other: &Jet) -> f64 {
        let mut worst: f64 = 0.0;
        for (e, c) in &self.terms {
            let o = other.terms.get(e).copied().unwrap_or_default();
            worst = worst.max((c - o).norm());
        }
        for (e, c) in &other.terms {
            if !self.terms.contains_key(e) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// Sum of coefficient moduli.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Human-readable polynomial, e.g. `z - z²t`.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let mono = e.display_with(names);
            let (neg, mag) = signed_coeff(*c);
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            match (mag.as_str(), mono.as_str()) {
                ("1", m) => out.push_str(m),
                (mag, "1") => out.push_str(mag),
                (mag, m) => {
                    out.push_str(mag);
                    out.push_str(m);
                }
            }
        }
        out
    }
}

/// Splits a coefficient into sign and printed magnitude; complex values are
/// parenthesized.
fn signed_coeff(c: Complex64) -> (bool, String) {
    if c.im.abs() < SYMBOLIC_TOL {
        let mag = c.re.abs();
        (c.re < 0.0, format_real(mag))
    } else if c.re.abs() < SYMBOLIC_TOL {
        (c.im < 0.0, format!("{}i", format_real(c.im.abs())))
    } else {
        (false, format!("({}{:+}i)", format_real(c.re), c.im))
    }
}

fn format_real(x: f64) -> String {
    let r = x.round();
    if (x - r).abs() < 1e-12 {
        format!("{}", r as i64)
    } else {
        format!("{x}")
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&default_var_names(self.nvars)))
    }
}

#[derive(Serialize, Deserialize)]
struct JetJson {
    k: usize,
    order: u32,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    e: Vec<u32>,
    re: f64,
    im: f64,
}

impl From<Jet> for JetJson {
    fn from(j: Jet) -> Self {
        JetJson {
            k: j.nvars,
            order: j.order,
            terms: j
                .terms
                .into_iter()
                .map(|(e, c)| TermJson {
                    e: e.0,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

impl TryFrom<JetJson> for Jet {
    type Error = Error;

    fn try_from(j: JetJson) -> Result<Self> {
        if j.k == 0 {
            return Err(Error::Dimension("a jet needs at least one variable".into()));
        }
        for t in &j.terms {
            let d: u32 = t.e.iter().sum();
            if d > j.order {
                return Err(Error::Range(format!(
                    "term {:?} of degree {d} exceeds order {}",
                    t.e, j.order
                )));
            }
        }
        Jet::from_terms(
            j.k,
            j.order,
            j.terms
                .into_iter()
                .map(|t| (t.e, Complex64::new(t.re, t.im))),
        )
    }
}

/// A vector of jets sharing variables and order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetMap {
    components: Vec<Jet>,
}

impl JetMap {
    pub fn new(components: Vec<Jet>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Dimension(
                "a jet map needs at least one component".into(),
            ));
        }
        let (k, n) = (components[0].nvars, components[0].order);
        if let Some(bad) = components.iter().find(|c| c.nvars != k || c.order != n) {
            return Err(Error::Dimension(format!(
                "component over ({}, N={}) in a map over ({k}, N={n})",
                bad.nvars, bad.order
            )));
        }
        Ok(JetMap { components })
    }

    pub fn identity(nvars: usize, order: u32) -> Self {
        JetMap {
            components: (0..nvars).map(|i| Jet::var(nvars, order, i)).collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.components[0].nvars
    }

    pub fn order(&self) -> u32 {
        self.components[0].order
    }

    /// Number of components.
    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Jet] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Jet {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<Jet> {
        self.components
    }

    pub fn is_origin_preserving(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.constant_term() == Complex64::default())
    }

    pub fn sub(&self, other: &JetMap) -> Result<JetMap> {
        if self.arity() != other.arity() {
            return Err(Error::Dimension(format!(
                "maps with {} and {} components",
                self.arity(),
                other.arity()
            )));
        }
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        JetMap::new(comps)
    }

    /// `self ∘ inner`: substitutes the components of `inner` for the variables of
    /// `self`, truncating at `inner`'s order.
    pub fn compose(&self, inner: &JetMap) -> Result<JetMap> {
        if inner.arity() != self.nvars() {
            return Err(Error::Dimension(format!(
                "outer map in {} variables composed with inner map of {} components",
                self.nvars(),
                inner.arity()
            )));
        }
        if !inner.is_origin_preserving() {
            return Err(Error::Domain(
                "inner map of a composition must fix the origin".into(),
            ));
        }
        let (k, order) = (inner.nvars(), inner.order());

        // powers[j][e] = inner_j^e, built lazily up to the exponents actually used.
        let mut max_exp = vec![0u32; self.nvars()];
        for comp in &self.components {
            for (e, _) in comp.terms() {
                for (m, x) in max_exp.iter_mut().zip(e.as_slice()) {
                    *m = (*m).max(*x);
                }
            }
        }
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(self.nvars());
        for (j, &m) in max_exp.iter().enumerate() {
            let g = inner.component(j);
            let mut list = vec![Jet::one(k, order)];
            for p in 1..=m.min(order) {
                let next = list[p as usize - 1].mul(g)?;
                list.push(next);
            }
            powers.push(list);
        }

        let mut out = Vec::with_capacity(self.arity());
        for comp in &self.components {
            let mut acc: BTreeMap<Exponents, Complex64> = BTreeMap::new();
            for (e, c) in comp.terms() {
                // inner fixes the origin, so x^e has valuation >= deg(e).
                if e.degree() > order {
                    continue;
                }
                let mut prod = Jet::constant(k, order, *c);
                for (j, &p) in e.as_slice().iter().enumerate() {
                    if p > 0 {
                        prod = prod.mul(&powers[j][p as usize])?;
                    }
                }
                for (pe, pc) in prod.terms {
                    *acc.entry(pe).or_default() += pc;
                }
            }
            out.push(Jet::from_map(k, order, acc));
        }
        JetMap::new(out)
    }

    pub fn eval(&self, p: &[Complex64]) -> Result<Vec<Complex64>> {
        self.components.iter().map(|c| c.eval(p)).collect()
    }

    /// Degree-`d` part of every component.
    pub fn homogeneous_part(&self, d: u32) -> Result<JetMap> {
        if d > self.order() {
            return Err(Error::Range(format!(
                "degree {d} exceeds truncation order {}",
                self.order()
            )));
        }
        JetMap::new(self.components.iter().map(|c| c.homogeneous(d)).collect())
    }

    /// `J[i][j] = ∂f_i/∂x_j`, each of order `N - 1`.
    pub fn jacobian(&self) -> Vec<Vec<Jet>> {
        self.components
            .iter()
            .map(|c| (0..self.nvars()).map(|j| c.derivative(j)).collect())
            .collect()
    }

    /// Evaluates the Jacobian matrix at `p`.
    pub fn jacobian_at(&self, p: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        self.jacobian()
            .iter()
            .map(|row| row.iter().map(|d| d.eval(p)).collect())
            .collect()
    }

    pub fn with_order(&self, order: u32) -> JetMap {
        JetMap {
            components: self
                .components
                .iter()
                .map(|c| c.with_order(order))
                .collect(),
        }
    }

    pub fn approx_eq(&self, other: &JetMap, tol: f64) -> bool {
        self.arity() == other.arity()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    pub fn max_diff(&self, other: &JetMap) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn display_with(&self, names: &[String]) -> String {
        self.components
            .iter()
            .map(|c| c.display_with(names))
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

impl fmt::Display for JetMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&default_var_names(self.nvars())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn poly(k: usize, n: u32, terms: &[(&[u32], f64)]) -> Jet {
        Jet::from_terms(k, n, terms.iter().map(|(e, v)| (e.to_vec(), c(*v)))).unwrap()
    }

    fn random_jet(rng: &mut ChaCha8Rng, k: usize, n: u32, origin: bool) -> Jet {
        let mut terms = Vec::new();
        for _ in 0..12 {
            let e: Vec<u32> = (0..k).map(|_| rng.gen_range(0..=n)).collect();
            if origin && e.iter().all(|x| *x == 0) {
                continue;
            }
            terms.push((
                e,
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            ));
        }
        Jet::from_terms(k, n, terms).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, k: usize, r: f64) -> Vec<Complex64> {
        (0..k)
            .map(|_| {
                Complex64::from_polar(
                    r * rng.gen::<f64>(),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect()
    }

    #[test]
    fn graded_lex_order() {
        let mut es = vec![
            Exponents::new(vec![0, 2]),
            Exponents::new(vec![1, 0]),
            Exponents::new(vec![1, 1]),
            Exponents::new(vec![0, 0]),
            Exponents::new(vec![2, 0]),
            Exponents::new(vec![0, 1]),
        ];
        es.sort();
        let got: Vec<_> = es.iter().map(|e| e.as_slice().to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }

    #[test]
    fn add_examples() {
        let a = poly(1, 3, &[(&[0], 1.0), (&[1], 1.0)]);
        let b = poly(1, 3, &[(&[0], -1.0), (&[1], 1.0)]);
        assert_eq!(a.add(&b).unwrap(), poly(1, 3, &[(&[1], 2.0)]));
        assert_eq!(a.add(&Jet::zero(1, 3)).unwrap(), a);
    }

    #[test]
    fn add_rejects_mismatch() {
        assert!(matches!(
            Jet::zero(2, 3).add(&Jet::zero(3, 3)),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            Jet::zero(2, 3).mul(&Jet::zero(2, 4)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn add_commutes_with_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_jet(&mut rng, 3, 5, false);
        let g = random_jet(&mut rng, 3, 5, false);
        let s = f.add(&g).unwrap();
        for _ in 0..50 {
            let p = random_point(&mut rng, 3, 1.0);
            let lhs = s.eval(&p).unwrap();
            let rhs = f.eval(&p).unwrap() + g.eval(&p).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn mul_examples() {
        let a = poly(1, 4, &[(&[0], 1.0), (&[1], 1.0)]);
        let b = poly(1, 4, &[(&[0], 1.0), (&[1], -1.0)]);
        assert_eq!(a.mul(&b).unwrap(), poly(1, 4, &[(&[0], 1.0), (&[2], -1.0)]));

        let z = Jet::var(3, 2, 0);
        let zt = poly(3, 2, &[(&[1, 1, 0], 1.0)]);
        assert!(z.mul(&zt).unwrap().is_zero());
    }

    #[test]
    fn mul_eval_within_truncation_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 4;
        let r: f64 = 0.1;
        let f = random_jet(&mut rng, 3, n, false);
        let g = random_jet(&mut rng, 3, n, false);
        let prod = f.mul(&g).unwrap();
        // dropped terms have degree > N, so with |p_i| <= r < 1 they are bounded by
        // ||f||_1 ||g||_1 r^(N+1).
        let bound = f.l1_norm() * g.l1_norm() * r.powi(n as i32 + 1);
        for _ in 0..50 {
            let p = random_point(&mut rng, 3, r);
            let lhs = prod.eval(&p).unwrap();
            let rhs = f.eval(&p).unwrap() * g.eval(&p).unwrap();
            assert!((lhs - rhs).norm() <= bound + 1e-15);
        }
    }

    #[test]
    fn exp_examples() {
        assert_eq!(Jet::zero(2, 4).exp().unwrap(), Jet::one(2, 4));
        let w = Jet::var(1, 2, 0);
        assert_eq!(
            w.exp().unwrap(),
            poly(1, 2, &[(&[0], 1.0), (&[1], 1.0), (&[2], 0.5)])
        );
        for n in [1, 3, 6, 9] {
            let aw = Jet::var(3, n, 2).scale(c(1.7));
            let prod = aw.exp().unwrap().mul(&aw.neg().exp().unwrap()).unwrap();
            assert!(prod.approx_eq(&Jet::one(3, n), SYMBOLIC_TOL));
        }
    }

    #[test]
    fn exp_rejects_constant_term() {
        assert!(matches!(Jet::one(1, 3).exp(), Err(Error::Domain(_))));
    }

    #[test]
    fn compose_with_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = JetMap::new(vec![
            random_jet(&mut rng, 3, 5, false),
            random_jet(&mut rng, 3, 5, false),
        ])
        .unwrap();
        let id3 = JetMap::identity(3, 5);
        assert!(f.compose(&id3).unwrap().approx_eq(&f, SYMBOLIC_TOL));

        let g = JetMap::new(vec![
            random_jet(&mut rng, 2, 5, true),
            random_jet(&mut rng, 2, 5, true),
            random_jet(&mut rng, 2, 5, true),
        ])
        .unwrap();
        assert!(id3.compose(&g).unwrap().approx_eq(&g, SYMBOLIC_TOL));
    }

    #[test]
    fn compose_errors() {
        let f = JetMap::identity(3, 4);
        assert!(matches!(
            f.compose(&JetMap::identity(2, 4)),
            Err(Error::Dimension(_))
        ));
        let shifted = JetMap::new(vec![
            Jet::var(3, 4, 0).add(&Jet::one(3, 4)).unwrap(),
            Jet::var(3, 4, 1),
            Jet::var(3, 4, 2),
        ])
        .unwrap();
        assert!(matches!(f.compose(&shifted), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_examples() {
        let zt = poly(3, 4, &[(&[1, 1, 0], 1.0)]);
        let p = [c(2.0), c(3.0), c(5.0)];
        assert_eq!(zt.eval(&p).unwrap(), c(6.0));
        assert_eq!(Jet::constant(3, 4, c(7.0)).eval(&p).unwrap(), c(7.0));
        assert!(matches!(zt.eval(&p[..2]), Err(Error::Dimension(_))));
    }

    #[test]
    fn homogeneous_part_range() {
        let f = JetMap::identity(2, 3);
        assert!(matches!(f.homogeneous_part(4), Err(Error::Range(_))));
        assert_eq!(f.homogeneous_part(1).unwrap(), f);
        assert!(f
            .homogeneous_part(2)
            .unwrap()
            .components()
            .iter()
            .all(Jet::is_zero));
    }

    #[test]
    fn jacobian_examples() {
        let id = JetMap::identity(3, 4);
        let jac = id.jacobian();
        for (i, row) in jac.iter().enumerate() {
            for (j, d) in row.iter().enumerate() {
                let expect = if i == j {
                    Jet::one(3, 3)
                } else {
                    Jet::zero(3, 3)
                };
                assert_eq!(*d, expect);
            }
        }

        // (−2aζ², −cζw) with a = 1.5, c = 4
        let (a, cc) = (1.5, 4.0);
        let p = JetMap::new(vec![
            poly(2, 3, &[(&[2, 0], -2.0 * a)]),
            poly(2, 3, &[(&[1, 1], -cc)]),
        ])
        .unwrap();
        let jac = p.jacobian();
        assert_eq!(jac[0][0], poly(2, 2, &[(&[1, 0], -4.0 * a)]));
        assert!(jac[0][1].is_zero());
        assert_eq!(jac[1][0], poly(2, 2, &[(&[0, 1], -cc)]));
        assert_eq!(jac[1][1], poly(2, 2, &[(&[1, 0], -cc)]));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = JetMap::new(vec![
            random_jet(&mut rng, 3, 5, false),
            random_jet(&mut rng, 3, 5, false),
            random_jet(&mut rng, 3, 5, false),
        ])
        .unwrap();
        let h = 1e-5;
        for _ in 0..20 {
            let p = random_point(&mut rng, 3, 0.5);
            let jac = f.jacobian_at(&p).unwrap();
            for j in 0..3 {
                let mut plus = p.clone();
                let mut minus = p.clone();
                plus[j] += h;
                minus[j] -= h;
                let fp = f.eval(&plus).unwrap();
                let fm = f.eval(&minus).unwrap();
                for i in 0..3 {
                    let fd = (fp[i] - fm[i]) / (2.0 * h);
                    assert!((fd - jac[i][j]).norm() < 1e-6, "entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn euler_identity_for_homogeneous_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..=4u32 {
            let f = JetMap::new(vec![
                random_jet(&mut rng, 3, 6, false).homogeneous(d),
                random_jet(&mut rng, 3, 6, false).homogeneous(d),
                random_jet(&mut rng, 3, 6, false).homogeneous(d),
            ])
            .unwrap();
            for _ in 0..20 {
                let v = random_point(&mut rng, 3, 1.0);
                let jac = f.jacobian_at(&v).unwrap();
                let pv = f.eval(&v).unwrap();
                for i in 0..3 {
                    let dv: Complex64 = (0..3).map(|j| jac[i][j] * v[j]).sum();
                    assert!((dv - pv[i] * d as f64).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn display_and_json_layout() {
        let f = poly(3, 3, &[(&[1, 0, 0], 1.0), (&[2, 1, 0], -1.0)]);
        assert_eq!(f.to_string(), "z - z²t");
        let v: serde_json::Value = serde_json::to_value(&f).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "k": 3, "order": 3,
                "terms": [
                    {"e": [1, 0, 0], "re": 1.0, "im": 0.0},
                    {"e": [2, 1, 0], "re": -1.0, "im": 0.0}
                ]
            })
        );
    }

    #[test]
    fn json_rejects_overlong_terms() {
        let bad = r#"{"k":1,"order":1,"terms":[{"e":[2],"re":1.0,"im":0.0}]}"#;
        assert!(serde_json::from_str::<Jet>(bad).is_err());
    }
}
