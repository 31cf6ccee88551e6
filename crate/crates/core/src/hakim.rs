//! Characteristic directions and directors of maps tangent to the identity.
//!
//! For `F(x) = x + P_r(x) + O(|x|^{r+1})`, a direction `[v]` is characteristic
//! when `P_r(v) = λv`; it is degenerate when `λ = 0`. The directors of a
//! non-degenerate `[v]` are the eigenvalues of `λ⁻¹ DP_r(v) - Id` on
//! `C^k / ⟨v⟩`, which is the derivative of the induced map of `P^{k-1}` at `[v]`
//! minus the identity.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{default_var_names, JetMap, SYMBOLIC_TOL};

/// `|λ| <= DEGENERACY_TOL` at `‖v‖ = 1` counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Bound on `‖P_r(v) - λv‖` for every reported direction (unit `v`).
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Directors with real part above this are "positive".
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Projective distance under which two numeric solutions are merged.
pub const DEDUP_DIST: f64 = 1e-6;

const MAX_SOLVER_DIM: usize = 4;

/// `r` and `P_r` for a jet tangent to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct LeadingTerm {
    pub r: u32,
    pub p: JetMap,
}

impl LeadingTerm {
    pub fn nvars(&self) -> usize {
        self.p.nvars()
    }

    pub fn eval(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.p.eval(v).expect("dimension checked by caller")
    }

    /// `‖P_r(v) - λv‖`.
    pub fn residual(&self, v: &[Complex64], lambda: Complex64) -> f64 {
        norm(
            &self
                .eval(v)
                .iter()
                .zip(v)
                .map(|(p, x)| p - lambda * x)
                .collect::<Vec<_>>(),
        )
    }
}

/// Finds the first nonzero homogeneous part of `F - id` of degree `>= 2`.
pub fn leading_term(f_jet: &JetMap) -> Result<LeadingTerm> {
    let k = f_jet.nvars();
    if f_jet.arity() != k {
        return Err(Error::Dimension(format!(
            "self-map expected, got {} components in {k} variables",
            f_jet.arity()
        )));
    }
    let id = JetMap::identity(k, f_jet.order());
    let diff = f_jet.sub(&id)?;
    for comp in diff.components() {
        if comp.lowest_degree(SYMBOLIC_TOL).is_some_and(|d| d < 2) {
            return Err(Error::Domain(
                "jet is not tangent to the identity (constant or linear part differs)".into(),
            ));
        }
    }
    for r in 2..=f_jet.order() {
        let p = diff.homogeneous_part(r)?;
        let nonzero = p
            .components()
            .iter()
            .any(|c| c.terms().any(|(_, x)| x.norm() > SYMBOLIC_TOL));
        if nonzero {
            return Ok(LeadingTerm { r, p });
        }
    }
    Err(Error::IdentityJet(f_jet.order()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FamilyKind {
    /// A coordinate subspace on which `P_r` vanishes identically.
    Subspace,
    /// An open torus stratum `{x_i ≠ 0 for i ∈ S, x_j = 0 otherwise}`.
    Torus,
    /// A cluster of numeric solutions.
    Numeric,
}

/// A positive-dimensional set of characteristic directions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Family {
    pub kind: FamilyKind,
    /// Coordinates allowed to be nonzero (all of them for numeric clusters).
    pub support: Vec<bool>,
    /// Dimension of the cone in `C^k`.
    pub dim: usize,
    pub tag: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacteristicDirection {
    /// Unit representative; the largest coordinate is real and positive.
    pub v: Vec<Complex64>,
    pub lambda: Complex64,
    pub degenerate: bool,
    /// Empty when degenerate.
    pub directors: Vec<Complex64>,
    pub family: Option<Family>,
}

impl CharacteristicDirection {
    /// Support pattern of `v` (coordinates with modulus above `1e-9`).
    pub fn support(&self) -> Vec<bool> {
        self.v.iter().map(|x| x.norm() > 1e-9).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolverKind {
    Exact,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionSet {
    pub r: u32,
    pub solver: SolverKind,
    pub directions: Vec<CharacteristicDirection>,
    /// Largest dimension of a cone of characteristic directions in `C^k`.
    pub cone_dimension: usize,
}

impl DirectionSet {
    pub fn non_degenerate(&self) -> impl Iterator<Item = &CharacteristicDirection> {
        self.directions.iter().filter(|d| !d.degenerate)
    }

    /// The family whose support pattern equals `support`, if reported.
    pub fn family_with_support(&self, support: &[bool]) -> Option<&CharacteristicDirection> {
        self.directions
            .iter()
            .find(|d| d.family.as_ref().is_some_and(|f| f.support == support))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Degenerate,
    NonDegenerateAttracting,
    NonDegenerateOther,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Degenerate => "DEGENERATE",
            Classification::NonDegenerateAttracting => "NON_DEGENERATE_ATTRACTING",
            Classification::NonDegenerateOther => "NON_DEGENERATE_OTHER",
        })
    }
}

pub fn classify(d: &CharacteristicDirection) -> Classification {
    if d.degenerate {
        Classification::Degenerate
    } else if d.directors.iter().all(|a| a.re > POSITIVITY_TOL) {
        Classification::NonDegenerateAttracting
    } else {
        Classification::NonDegenerateOther
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Scales `v` to unit length with its largest coordinate real and positive.
pub fn normalize(v: &[Complex64]) -> Vec<Complex64> {
    let n = norm(v);
    let (imax, _) = v.iter().enumerate().fold((0, -1.0), |(bi, bm), (i, x)| {
        if x.norm() > bm + 1e-12 {
            (i, x.norm())
        } else {
            (bi, bm)
        }
    });
    let phase = Complex64::from_polar(1.0, -v[imax].arg());
    v.iter().map(|x| x * phase / n).collect()
}

/// `sqrt(1 - |⟨u, v⟩|²)` for unit vectors.
pub fn projective_distance(u: &[Complex64], v: &[Complex64]) -> f64 {
    let ip: Complex64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    (1.0 - ip.norm_sqr()).max(0.0).sqrt()
}

fn lambda_at(l: &LeadingTerm, v: &[Complex64]) -> Complex64 {
    let p = l.eval(v);
    let (i, _) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .unwrap();
    p[i] / v[i]
}

/// Characteristic directions of `P_r` for `k <= 4` variables.
///
/// Maps whose components are single monomials `c_i x^{m_i} x_i` are solved
/// exactly, stratum by stratum; anything else goes to the numeric search.
pub fn characteristic_directions(l: &LeadingTerm) -> Result<DirectionSet> {
    let k = l.nvars();
    if k == 0 || k > MAX_SOLVER_DIM {
        return Err(Error::UnsupportedDimension(k));
    }
    match monomial_diagonal(l).and_then(|diag| exact_directions(l, &diag)) {
        Some(set) => Ok(set),
        None => characteristic_directions_numeric(l),
    }
}

/// `(c_i, m_i)` with `P_i = c_i x^{m_i} x_i`; `c_i = 0` for a vanishing component.
type Diagonal = Vec<(Complex64, Vec<u32>)>;

fn monomial_diagonal(l: &LeadingTerm) -> Option<Diagonal> {
    let k = l.nvars();
    let mut out = Vec::with_capacity(k);
    for (i, comp) in l.p.components().iter().enumerate() {
        let terms: Vec<_> = comp
            .terms()
            .filter(|(_, c)| c.norm() > SYMBOLIC_TOL)
            .collect();
        match terms.as_slice() {
            [] => out.push((Complex64::default(), vec![0; k])),
            [(e, c)] if e.as_slice()[i] >= 1 => {
                let mut m = e.as_slice().to_vec();
                m[i] -= 1;
                out.push((**c, m));
            }
            _ => return None,
        }
    }
    Some(out)
}

fn pattern_tag(support: &[bool], torus: bool) -> String {
    let names = default_var_names(support.len());
    let body = support
        .iter()
        .zip(&names)
        .map(|(s, n)| if *s { n.as_str() } else { "0" })
        .collect::<Vec<_>>()
        .join(",");
    if torus {
        let prod: String = support
            .iter()
            .zip(&names)
            .filter(|(s, _)| **s)
            .map(|(_, n)| n.as_str())
            .collect();
        format!("({body}), {prod}≠0")
    } else {
        format!("({body})")
    }
}

fn indicator(support: &[bool]) -> Vec<Complex64> {
    normalize(
        &support
            .iter()
            .map(|s| Complex64::new(if *s { 1.0 } else { 0.0 }, 0.0))
            .collect::<Vec<_>>(),
    )
}

/// Stratum-by-stratum solution for monomial-diagonal `P_r`. Returns `None` when
/// some stratum needs a genuine binomial solve.
fn exact_directions(l: &LeadingTerm, diag: &Diagonal) -> Option<DirectionSet> {
    let k = l.nvars();
    let zero = Complex64::default();
    let mut degenerate_supports: Vec<Vec<bool>> = Vec::new();
    let mut directions = Vec::new();

    for mask in 1u32..(1 << k) {
        let support: Vec<bool> = (0..k).map(|i| mask & (1 << i) != 0).collect();
        let members: Vec<usize> = (0..k).filter(|i| support[*i]).collect();
        let active: Vec<bool> = members
            .iter()
            .map(|&i| {
                let (c, m) = &diag[i];
                *c != zero && m.iter().zip(&support).all(|(e, s)| *e == 0 || *s)
            })
            .collect();
        if active.iter().all(|a| !a) {
            degenerate_supports.push(support);
            continue;
        }
        if !active.iter().all(|a| *a) {
            // λ would have to be zero and nonzero at once
            continue;
        }
        let (c0, m0) = &diag[members[0]];
        if members.iter().any(|&i| diag[i].1 != *m0) {
            return None;
        }
        if members
            .iter()
            .any(|&i| (diag[i].0 - c0).norm() > SYMBOLIC_TOL)
        {
            continue;
        }
        let v = indicator(&support);
        let family = (members.len() >= 2).then(|| Family {
            kind: FamilyKind::Torus,
            support: support.clone(),
            dim: members.len(),
            tag: pattern_tag(&support, true),
        });
        directions.push(make_direction(l, v, family));
    }

    // Closures of maximal degenerate strata.
    let maximal: Vec<&Vec<bool>> = degenerate_supports
        .iter()
        .filter(|s| {
            !degenerate_supports
                .iter()
                .any(|o| o != *s && s.iter().zip(o.iter()).all(|(a, b)| !*a || *b))
        })
        .collect();
    for s in maximal {
        let dim = s.iter().filter(|x| **x).count();
        let family = (dim >= 2).then(|| Family {
            kind: FamilyKind::Subspace,
            support: s.clone(),
            dim,
            tag: pattern_tag(s, false),
        });
        directions.push(make_direction(l, indicator(s), family));
    }

    directions.retain(|d| l.residual(&d.v, d.lambda) <= RESIDUAL_TOL);
    let cone_dimension = cone_dimension(&directions);
    Some(DirectionSet {
        r: l.r,
        solver: SolverKind::Exact,
        directions,
        cone_dimension,
    })
}

fn cone_dimension(dirs: &[CharacteristicDirection]) -> usize {
    dirs.iter()
        .map(|d| d.family.as_ref().map_or(1, |f| f.dim))
        .max()
        .unwrap_or(0)
}

fn make_direction(
    l: &LeadingTerm,
    v: Vec<Complex64>,
    family: Option<Family>,
) -> CharacteristicDirection {
    let lambda = lambda_at(l, &v);
    let degenerate = lambda.norm() <= DEGENERACY_TOL;
    let mut d = CharacteristicDirection {
        v,
        lambda: if degenerate {
            Complex64::default()
        } else {
            lambda
        },
        degenerate,
        directors: Vec::new(),
        family,
    };
    if !degenerate {
        d.directors = directors(l, &d).unwrap_or_default();
    }
    d
}

/// Seeds per coordinate for the numeric search.
fn seed_values(k: usize) -> Vec<Complex64> {
    let axis: &[f64] = if k <= 3 {
        &[-1.1, -0.35, 0.0, 0.45, 1.2]
    } else {
        &[-0.9, 0.0, 1.05]
    };
    axis.iter()
        .flat_map(|re| axis.iter().map(move |im| Complex64::new(*re, *im)))
        .collect()
}

struct ChartSolution {
    v: Vec<Complex64>,
    singular: bool,
}

/// Gauss–Newton on `P_i(v) - P_j(v) v_i = 0 (i ≠ j)` in the chart `v_j = 1`.
fn newton_in_chart(l: &LeadingTerm, chart: usize, seed: &[Complex64]) -> Option<ChartSolution> {
    let k = l.nvars();
    let free: Vec<usize> = (0..k).filter(|i| *i != chart).collect();
    let mut u = seed.to_vec();
    let jac = l.p.jacobian();
    let to_point = |u: &[Complex64]| {
        let mut v = vec![Complex64::new(1.0, 0.0); k];
        for (slot, x) in free.iter().zip(u) {
            v[*slot] = *x;
        }
        v
    };
    let system = |v: &[Complex64]| -> (DVector<Complex64>, DMatrix<Complex64>) {
        let p = l.eval(v);
        let dp: Vec<Vec<Complex64>> = jac
            .iter()
            .map(|row| row.iter().map(|d| d.eval(v).unwrap()).collect())
            .collect();
        let n = free.len();
        let mut f = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, n);
        for (a, &i) in free.iter().enumerate() {
            f[a] = p[i] - p[chart] * v[i];
            for (b, &col) in free.iter().enumerate() {
                let mut val = dp[i][col] - dp[chart][col] * v[i];
                if col == i {
                    val -= p[chart];
                }
                j[(a, b)] = val;
            }
        }
        (f, j)
    };
    // run on past a small residual so that multiple roots, where Newton is
    // only linear, still land close to the true direction
    for _ in 0..200 {
        let (f, j) = system(&to_point(&u));
        if f.norm() == 0.0 {
            break;
        }
        let step = j.svd(true, true).solve(&f, 1e-12).ok()?;
        for (x, s) in u.iter_mut().zip(step.iter()) {
            *x -= s;
        }
        if u.iter().any(|x| !x.is_finite() || x.norm() > 1e6) {
            return None;
        }
        if step.norm() <= 1e-15 * (1.0 + norm(&u)) {
            break;
        }
    }
    let v = to_point(&u);
    let (f, j) = system(&v);
    if f.norm() >= 1e-13 {
        return None;
    }
    let smin = j
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Some(ChartSolution {
        v,
        singular: smin < 1e-6,
    })
}

/// Numeric search: Gauss–Newton from a grid of seeds on every affine chart,
/// deduplicated at projective distance [`DEDUP_DIST`]. Rank-deficient solutions
/// that cluster in groups of ten or more are reported as one numeric family.
pub fn characteristic_directions_numeric(l: &LeadingTerm) -> Result<DirectionSet> {
    let k = l.nvars();
    if k == 0 || k > MAX_SOLVER_DIM {
        return Err(Error::UnsupportedDimension(k));
    }
    let values = seed_values(k);
    let mut raw: Vec<ChartSolution> = Vec::new();
    for chart in 0..k {
        let mut idx = vec![0usize; k - 1];
        loop {
            let seed: Vec<Complex64> = idx.iter().map(|i| values[*i]).collect();
            if let Some(sol) = newton_in_chart(l, chart, &seed) {
                raw.push(ChartSolution {
                    v: normalize(&sol.v),
                    singular: sol.singular,
                });
            }
            // odometer over the seed grid
            let mut pos = 0;
            while pos < idx.len() {
                idx[pos] += 1;
                if idx[pos] < values.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == idx.len() {
                break;
            }
        }
    }

    raw.retain(|s| l.residual(&s.v, lambda_at(l, &s.v)) <= RESIDUAL_TOL);
    let key = |v: &[Complex64]| -> Vec<i64> {
        v.iter()
            .flat_map(|x| [(x.re * 1e6).round() as i64, (x.im * 1e6).round() as i64])
            .collect()
    };
    raw.sort_by(|a, b| key(&a.v).cmp(&key(&b.v)));

    let mut unique: Vec<ChartSolution> = Vec::new();
    for s in raw {
        let merge_dist = if s.singular { 1e-3 } else { DEDUP_DIST };
        if let Some(u) = unique.iter_mut().find(|u| {
            projective_distance(&u.v, &s.v)
                < merge_dist.max(if u.singular { 1e-3 } else { DEDUP_DIST })
        }) {
            u.singular |= s.singular;
            continue;
        }
        unique.push(s);
    }

    // single-linkage clusters of rank-deficient solutions
    let singular: Vec<usize> = (0..unique.len()).filter(|i| unique[*i].singular).collect();
    let mut cluster_of = vec![usize::MAX; unique.len()];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &start in &singular {
        if cluster_of[start] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        cluster_of[start] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for &j in &singular {
                if cluster_of[j] == usize::MAX
                    && projective_distance(&unique[i].v, &unique[j].v) < 0.35
                {
                    cluster_of[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }

    let mut directions = Vec::new();
    let mut family_count = 0;
    for (i, s) in unique.iter().enumerate() {
        let cluster = (cluster_of[i] != usize::MAX).then(|| &clusters[cluster_of[i]]);
        match cluster {
            Some(members) if members.len() >= 10 => {
                if members[0] != i {
                    continue;
                }
                family_count += 1;
                let support: Vec<bool> = (0..k)
                    .map(|c| members.iter().any(|m| unique[*m].v[c].norm() > 1e-9))
                    .collect();
                let family = Family {
                    kind: FamilyKind::Numeric,
                    support,
                    dim: 2,
                    tag: format!("numeric family {family_count} ({} samples)", members.len()),
                };
                directions.push(make_direction(l, s.v.clone(), Some(family)));
            }
            _ => directions.push(make_direction(l, s.v.clone(), None)),
        }
    }
    let cone_dimension = cone_dimension(&directions);
    Ok(DirectionSet {
        r: l.r,
        solver: SolverKind::Numeric,
        directions,
        cone_dimension,
    })
}

fn sorted_eigenvalues(m: DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let ev = m
        .eigenvalues()
        .ok_or_else(|| Error::Domain("eigenvalue iteration did not converge".into()))?;
    let mut out: Vec<Complex64> = ev.iter().copied().collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

fn largest_coordinate(v: &[Complex64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Directors of a non-degenerate direction, in the chart of its largest coordinate.
pub fn directors(l: &LeadingTerm, d: &CharacteristicDirection) -> Result<Vec<Complex64>> {
    if d.degenerate {
        return Err(Error::Domain("directors of a degenerate direction".into()));
    }
    directors_in_chart(l, &d.v, largest_coordinate(&d.v))
}

/// Matrix of `λ⁻¹ DP_r(v) - Id` on `C^k/⟨v⟩`, written in the chart `v_chart = 1`.
pub fn director_operator(
    l: &LeadingTerm,
    v: &[Complex64],
    chart: usize,
) -> Result<DMatrix<Complex64>> {
    let k = l.nvars();
    if v.len() != k {
        return Err(Error::Dimension(format!(
            "direction of length {} in C^{k}",
            v.len()
        )));
    }
    if v[chart].norm() < 1e-12 {
        return Err(Error::Domain(format!("coordinate {chart} of v vanishes")));
    }
    let vt: Vec<Complex64> = v.iter().map(|x| x / v[chart]).collect();
    let lam = l.eval(&vt)[chart];
    if lam.norm() <= DEGENERACY_TOL {
        return Err(Error::Domain("direction is degenerate".into()));
    }
    let dp = l.p.jacobian_at(&vt)?;
    let free: Vec<usize> = (0..k).filter(|i| *i != chart).collect();
    let a = |i: usize, j: usize| dp[i][j] / lam - if i == j { 1.0 } else { 0.0 };
    Ok(DMatrix::from_fn(free.len(), free.len(), |r, c| {
        let (i, j) = (free[r], free[c]);
        a(i, j) - vt[i] * a(chart, j)
    }))
}

pub fn directors_in_chart(
    l: &LeadingTerm,
    v: &[Complex64],
    chart: usize,
) -> Result<Vec<Complex64>> {
    sorted_eigenvalues(director_operator(l, v, chart)?)
}

/// Second opinion: central finite differences of the induced chart map
/// `u ↦ [P_r(1, u)]` at the fixed point, minus the identity.
pub fn directors_finite_difference(
    l: &LeadingTerm,
    d: &CharacteristicDirection,
) -> Result<Vec<Complex64>> {
    if d.degenerate {
        return Err(Error::Domain("directors of a degenerate direction".into()));
    }
    let k = l.nvars();
    let chart = largest_coordinate(&d.v);
    let vt: Vec<Complex64> = d.v.iter().map(|x| x / d.v[chart]).collect();
    let free: Vec<usize> = (0..k).filter(|i| *i != chart).collect();
    let induced = |x: &[Complex64]| -> Vec<Complex64> {
        let p = l.eval(x);
        free.iter().map(|i| p[*i] / p[chart]).collect()
    };
    let h = 1e-5;
    let n = free.len();
    let mut m = DMatrix::zeros(n, n);
    for (c, &j) in free.iter().enumerate() {
        let mut plus = vt.clone();
        let mut minus = vt.clone();
        plus[j] += h;
        minus[j] -= h;
        let (gp, gm) = (induced(&plus), induced(&minus));
        for r in 0..n {
            m[(r, c)] = (gp[r] - gm[r]) / (2.0 * h) - if r == c { 1.0 } else { 0.0 };
        }
    }
    sorted_eigenvalues(m)
}

/// Largest distance between two director lists after greedy matching.
pub fn director_set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Warnings comparing the directions of `F` on `C^3` with the expected picture:
/// the degenerate planes `(z,0,w)` and `(0,t,w)` and nothing else.
pub fn f_direction_notes(set: &DirectionSet) -> Vec<String> {
    let mut notes = Vec::new();
    for (support, tag) in [
        ([true, false, true], "(z,0,w)"),
        ([false, true, true], "(0,t,w)"),
    ] {
        match set.family_with_support(&support) {
            Some(d) if d.degenerate => {}
            Some(_) => notes.push(format!("family {tag} found but not degenerate")),
            None => notes.push(format!("expected degenerate family {tag} not found")),
        }
    }
    for d in set.non_degenerate() {
        let tag = d
            .family
            .as_ref()
            .map_or_else(|| format!("{:?}", d.v), |f| f.tag.clone());
        notes.push(format!(
            "additional non-degenerate characteristic direction {tag} with λ = {:.6} at the \
             unit representative; the expected picture lists only degenerate directions",
            d.lambda
        ));
    }
    notes
}

/// Warnings comparing the directions of `G` with `[1:0]` and director `(c-2a)/(2a)`.
pub fn g_direction_notes(set: &DirectionSet, a: f64, c: f64) -> Vec<String> {
    let expected = (c - 2.0 * a) / (2.0 * a);
    let e1 = [Complex64::new(1.0, 0.0), Complex64::default()];
    match set
        .directions
        .iter()
        .find(|d| d.family.is_none() && projective_distance(&d.v, &e1) < 1e-9)
    {
        None => vec!["expected characteristic direction [1:0] not found".into()],
        Some(d) if d.degenerate => vec!["[1:0] found but degenerate".into()],
        Some(d) => match d.directors.as_slice() {
            [x] if (x - expected).norm() <= 1e-10 => Vec::new(),
            other => vec![format!(
                "director of [1:0] is {other:?}, expected {expected}"
            )],
        },
    }
}
