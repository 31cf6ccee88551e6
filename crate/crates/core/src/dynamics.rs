//! Orbits, convergence classification, sampled checks of the projection
//! `π(z, t, w) = (zt, w)`, and basin rasters.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::maps::{eval_g_exact, lift, project_pi, zeta_of, MapWord, PrototypeMap};

/// A holomorphic self-map evaluated exactly in floating point.
pub trait PointMap: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, p: &[Complex64]) -> Vec<Complex64>;

    /// `ζ = z_1 ⋯ z_m` for shear maps on `C^{m+1}` with `m >= 2`.
    fn zeta(&self, _p: &[Complex64]) -> Option<Complex64> {
        None
    }

    fn describe(&self) -> String;
}

impl PointMap for MapWord {
    fn dim(&self) -> usize {
        MapWord::dim(self)
    }

    fn apply(&self, p: &[Complex64]) -> Vec<Complex64> {
        MapWord::apply(self, p)
    }

    fn zeta(&self, p: &[Complex64]) -> Option<Complex64> {
        (p.len() >= 3).then(|| zeta_of(p))
    }

    fn describe(&self) -> String {
        MapWord::describe(self)
    }
}

impl PointMap for PrototypeMap {
    fn dim(&self) -> usize {
        PrototypeMap::dim(self)
    }

    fn apply(&self, p: &[Complex64]) -> Vec<Complex64> {
        PrototypeMap::apply(self, p)
    }

    fn zeta(&self, p: &[Complex64]) -> Option<Complex64> {
        match self {
            PrototypeMap::FamilyK(w) => PointMap::zeta(w, p),
            _ => None,
        }
    }

    fn describe(&self) -> String {
        match self {
            PrototypeMap::OneDQuadratic { a } if *a == 1.0 => "z + z²".into(),
            PrototypeMap::OneDQuadratic { a } => format!("z + {a}z²"),
            PrototypeMap::TwoDProduct => "(z, w)(1 + zw/2)".into(),
            PrototypeMap::FamilyK(w) => w.describe(),
        }
    }
}

/// The induced map on `(ζ, w)`, evaluated through square-root lifts.
#[derive(Clone, Debug)]
pub struct InducedG(pub MapWord);

impl PointMap for InducedG {
    fn dim(&self) -> usize {
        2
    }

    fn apply(&self, p: &[Complex64]) -> Vec<Complex64> {
        eval_g_exact([p[0], p[1]], &self.0).to_vec()
    }

    fn describe(&self) -> String {
        format!("π ∘ ({}) ∘ lift", self.0.describe())
    }
}

/// Any closure as a map.
pub struct FnMap<F> {
    dim: usize,
    name: String,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&[Complex64]) -> Vec<Complex64> + Sync,
{
    pub fn new(dim: usize, name: impl Into<String>, f: F) -> Self {
        FnMap {
            dim,
            name: name.into(),
            f,
        }
    }
}

impl<F> PointMap for FnMap<F>
where
    F: Fn(&[Complex64]) -> Vec<Complex64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, p: &[Complex64]) -> Vec<Complex64> {
        (self.f)(p)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// Window length used by the convergence rule.
pub const CONVERGENCE_WINDOW: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrbitConfig {
    pub max_iter: usize,
    pub eps_converged: f64,
    pub escape_radius: f64,
    pub record_stride: usize,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            max_iter: 100_000,
            eps_converged: 1e-3,
            escape_radius: 10.0,
            record_stride: 1,
        }
    }
}

impl OrbitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.max_iter > 0
            && self.record_stride > 0
            && self.eps_converged > 0.0
            && self.escape_radius > 0.0;
        if !positive || !(self.eps_converged < self.escape_radius) {
            return Err(Error::Domain(format!(
                "orbit config needs positive fields and eps < escape radius, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged(usize),
    Escaped(usize),
    Undecided,
}

impl Status {
    /// Raster code: 0 escaped, 1 converged, 2 undecided.
    pub fn code(&self) -> u8 {
        match self {
            Status::Escaped(_) => 0,
            Status::Converged(_) => 1,
            Status::Undecided => 2,
        }
    }

    /// Same outcome, ignoring the index.
    pub fn same_kind(&self, other: &Status) -> bool {
        self.code() == other.code()
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Status::Converged(_))
    }

    pub fn is_escaped(&self) -> bool {
        matches!(self, Status::Escaped(_))
    }

    pub fn is_undecided(&self) -> bool {
        matches!(self, Status::Undecided)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Converged(n) => write!(f, "CONVERGED({n})"),
            Status::Escaped(n) => write!(f, "ESCAPED({n})"),
            Status::Undecided => f.write_str("UNDECIDED"),
        }
    }
}

impl Serialize for Status {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Orbit {
    /// Iterate index of each recorded point.
    pub indices: Vec<usize>,
    pub points: Vec<Vec<Complex64>>,
    /// `ζ` at each recorded point (empty unless the map tracks it).
    pub zeta_trace: Vec<Complex64>,
    pub status: Status,
    /// The orbit hit an exact fixed point away from the origin.
    pub stationary: bool,
    /// Index of the last computed iterate.
    pub iterations: usize,
}

impl Orbit {
    pub fn last_point(&self) -> &[Complex64] {
        self.points.last().expect("orbit always records its start")
    }

    pub fn final_norm(&self) -> f64 {
        norm(self.last_point())
    }

    pub fn notes(&self) -> Vec<String> {
        if self.stationary {
            vec!["fixed plane: the orbit is stationary at a fixed point off the origin".into()]
        } else {
            Vec::new()
        }
    }

    /// `n · ζ_n` at the last recorded point, the quantity tending to `1/(2a)`.
    pub fn leau_fatou_estimate(&self) -> Option<f64> {
        let (n, z) = (self.indices.last()?, self.zeta_trace.last()?);
        Some(*n as f64 * z.norm())
    }
}

pub fn norm(p: &[Complex64]) -> f64 {
    p.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn all_finite(p: &[Complex64]) -> bool {
    p.iter().all(|x| x.is_finite())
}

/// Tracks the last `2 * CONVERGENCE_WINDOW` norms.
struct Window(VecDeque<f64>);

impl Window {
    fn new() -> Self {
        Window(VecDeque::with_capacity(2 * CONVERGENCE_WINDOW))
    }

    fn push(&mut self, x: f64) {
        if self.0.len() == 2 * CONVERGENCE_WINDOW {
            self.0.pop_front();
        }
        self.0.push_back(x);
    }

    /// Max over the last window does not exceed max over the one before.
    fn settled(&self) -> bool {
        if self.0.len() < 2 * CONVERGENCE_WINDOW {
            return false;
        }
        let max =
            |r: std::ops::Range<usize>| r.map(|i| self.0[i]).fold(f64::NEG_INFINITY, f64::max);
        max(CONVERGENCE_WINDOW..2 * CONVERGENCE_WINDOW) <= max(0..CONVERGENCE_WINDOW)
    }
}

/// Runs the orbit, calling `visit(n, p_n)` on every iterate including `p_0`.
/// Returns the status, the stationary flag and the last index.
fn run<M: PointMap + ?Sized>(
    map: &M,
    p0: &[Complex64],
    cfg: &OrbitConfig,
    mut visit: impl FnMut(usize, &[Complex64]),
) -> (Status, bool, usize) {
    visit(0, p0);
    let n0 = norm(p0);
    if !all_finite(p0) || n0 > cfg.escape_radius {
        return (Status::Escaped(0), false, 0);
    }
    if n0 == 0.0 {
        return (Status::Converged(0), false, 0);
    }
    let mut window = Window::new();
    window.push(n0);
    let mut p = p0.to_vec();
    for n in 1..=cfg.max_iter {
        let next = map.apply(&p);
        visit(n, &next);
        let r = norm(&next);
        if !all_finite(&next) || r > cfg.escape_radius {
            return (Status::Escaped(n), false, n);
        }
        if r == 0.0 {
            return (Status::Converged(n), false, n);
        }
        if next == p {
            return (Status::Undecided, true, n);
        }
        window.push(r);
        if r < cfg.eps_converged && window.settled() {
            return (Status::Converged(n), false, n);
        }
        p = next;
    }
    (Status::Undecided, false, cfg.max_iter)
}

fn check_dim<M: PointMap + ?Sized>(map: &M, p: &[Complex64]) -> Result<()> {
    if p.len() != map.dim() {
        return Err(Error::Dimension(format!(
            "start point of length {} for a map on C^{}",
            p.len(),
            map.dim()
        )));
    }
    Ok(())
}

/// Iterates `map` from `p0`. Every iterate enters the status decision; every
/// `record_stride`-th one (and the last) is stored.
pub fn iterate<M: PointMap + ?Sized>(
    map: &M,
    p0: &[Complex64],
    cfg: &OrbitConfig,
) -> Result<Orbit> {
    check_dim(map, p0)?;
    cfg.validate()?;
    let mut orbit = Orbit {
        indices: Vec::new(),
        points: Vec::new(),
        zeta_trace: Vec::new(),
        status: Status::Undecided,
        stationary: false,
        iterations: 0,
    };
    let mut last = Vec::new();
    let mut last_n = 0;
    let stride = cfg.record_stride;
    let (status, stationary, iterations) = run(map, p0, cfg, |n, p| {
        if n % stride == 0 {
            orbit.indices.push(n);
            orbit.points.push(p.to_vec());
            if let Some(z) = map.zeta(p) {
                orbit.zeta_trace.push(z);
            }
        } else {
            last.clear();
            last.extend_from_slice(p);
            last_n = n;
        }
    });
    if iterations % stride != 0 && last_n == iterations {
        if let Some(z) = map.zeta(&last) {
            orbit.zeta_trace.push(z);
        }
        orbit.indices.push(iterations);
        orbit.points.push(last);
    }
    orbit.status = status;
    orbit.stationary = stationary;
    orbit.iterations = iterations;
    Ok(orbit)
}

/// Status and iteration count only, without storing the orbit.
pub fn classify_point<M: PointMap + ?Sized>(
    map: &M,
    p0: &[Complex64],
    cfg: &OrbitConfig,
) -> (Status, usize) {
    let (status, _, n) = run(map, p0, cfg, |_, _| {});
    (status, n)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tangent {
    /// Unit representative with its largest coordinate real and positive.
    pub direction: Vec<Complex64>,
    pub stable: bool,
    /// Largest step between successive phase-aligned representatives.
    pub spread: f64,
}

/// Limit direction `[p_n]` from the last tenth of the recorded iterates.
pub fn estimate_tangent(orbit: &Orbit) -> Result<Tangent> {
    let pts: Vec<&Vec<Complex64>> = orbit.points.iter().filter(|p| norm(p) > 0.0).collect();
    if pts.len() < 100 {
        return Err(Error::InsufficientData(format!(
            "{} nonzero recorded points, need at least 100",
            pts.len()
        )));
    }
    let tail = &pts[pts.len() - pts.len() / 10..];
    let reps: Vec<Vec<Complex64>> = tail.iter().map(|p| crate::hakim::normalize(p)).collect();
    let mut spread: f64 = 0.0;
    for w in reps.windows(2) {
        // align the phase of the first to the second before comparing
        let ip: Complex64 = w[0].iter().zip(&w[1]).map(|(a, b)| a.conj() * b).sum();
        let phase = if ip.norm() > 0.0 {
            ip / ip.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let d = w[0]
            .iter()
            .zip(&w[1])
            .map(|(a, b)| (a * phase - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        spread = spread.max(d);
    }
    Ok(Tangent {
        direction: reps.last().unwrap().clone(),
        stable: spread < 1e-3,
        spread,
    })
}

/// Uniform sample from the disc of radius `r`.
pub fn random_disc<R: Rng + ?Sized>(rng: &mut R, r: f64) -> Complex64 {
    let rho = r * rng.gen::<f64>().sqrt();
    Complex64::from_polar(rho, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Point with `‖p‖ <= r`: each coordinate uniform in the disc of radius `r/√k`.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, k: usize, r: f64) -> Vec<Complex64> {
    let per = r / (k as f64).sqrt();
    (0..k).map(|_| random_disc(rng, per)).collect()
}

fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn check_shear_word(word: &MapWord) -> Result<usize> {
    let m = word.dim() - 1;
    if m < 2 {
        return Err(Error::Dimension(format!(
            "needs a word on C^(m+1) with m >= 2, got C^{}",
            word.dim()
        )));
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize)]
pub struct SemiconjugacyReport {
    pub samples: usize,
    pub radius: f64,
    /// `max ‖π(F(p)) - G(π(p))‖`.
    pub max_defect: f64,
    pub orbit_steps: usize,
    /// `max_n ‖π(F^n(p)) - G^n(π(p))‖` from `(0.1, .., 0.1, 0.05)`.
    pub orbit_defect: f64,
    /// On `{z_2 = 0}`, `π(F(p)) = π(p)` and `G` fixes `π(p)` exactly.
    pub fixed_line_exact: bool,
}

pub fn check_semiconjugacy<R: Rng + ?Sized>(
    word: &MapWord,
    samples: usize,
    radius: f64,
    rng: &mut R,
) -> Result<SemiconjugacyReport> {
    let m = check_shear_word(word)?;
    let mut max_defect: f64 = 0.0;
    let mut fixed_line_exact = true;
    for _ in 0..samples {
        let p = random_point(rng, m + 1, radius);
        let lhs = project_pi(&word.apply(&p));
        let rhs = eval_g_exact(project_pi(&p), word);
        max_defect = max_defect.max(dist(&lhs, &rhs));

        let mut on_plane = p.clone();
        on_plane[1] = Complex64::default();
        let q = project_pi(&on_plane);
        fixed_line_exact &= project_pi(&word.apply(&on_plane)) == q && eval_g_exact(q, word) == q;
    }

    let orbit_steps = 1000;
    let mut p = vec![Complex64::new(0.1, 0.0); m];
    p.push(Complex64::new(0.05, 0.0));
    let mut q = project_pi(&p);
    let mut orbit_defect: f64 = 0.0;
    for _ in 0..orbit_steps {
        p = word.apply(&p);
        q = eval_g_exact(q, word);
        orbit_defect = orbit_defect.max(dist(&project_pi(&p), &q));
    }
    Ok(SemiconjugacyReport {
        samples,
        radius,
        max_defect,
        orbit_steps,
        orbit_defect,
        fixed_line_exact,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceReport {
    pub samples: usize,
    /// `max ‖F(λz, t/λ, w) - (λF₁, F₂/λ, F₃)‖` with `|λ| ∈ [0.5, 2]`.
    pub max_defect: f64,
    pub status_samples: usize,
    pub status_agree: usize,
    /// Largest relative gap between the `ζ`-traces of `p` and `(λz, t/λ, w)`.
    pub max_trace_defect: f64,
}

/// `(λ z_1, z_2 / λ, z_3, .., w)`.
pub fn torus_act(p: &[Complex64], lambda: Complex64) -> Vec<Complex64> {
    let mut q = p.to_vec();
    q[0] *= lambda;
    q[1] /= lambda;
    q
}

/// Relative gap `|a - b| / max(1, |a|)` over the common prefix of two traces.
pub fn trace_defect(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm() / x.norm().max(1.0))
        .fold(0.0, f64::max)
}

/// Starts with `|z_i| ∈ [0.05, 0.3]` and `|w| <= 0.3`.
fn random_fiber_start<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<Complex64> {
    let mut p: Vec<Complex64> = (0..m)
        .map(|_| {
            Complex64::from_polar(
                rng.gen_range(0.05..0.3),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    p.push(random_disc(rng, 0.3));
    p
}

pub fn check_equivariance<R: Rng + ?Sized>(
    word: &MapWord,
    samples: usize,
    status_samples: usize,
    status_lambda: Complex64,
    cfg: &OrbitConfig,
    rng: &mut R,
) -> Result<EquivarianceReport> {
    let m = check_shear_word(word)?;
    let mut max_defect: f64 = 0.0;
    for _ in 0..samples {
        let p = random_point(rng, m + 1, 0.5);
        let lambda = Complex64::from_polar(
            2f64.powf(rng.gen_range(-1.0..1.0)),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let lhs = word.apply(&torus_act(&p, lambda));
        let rhs = torus_act(&word.apply(&p), lambda);
        max_defect = max_defect.max(dist(&lhs, &rhs));
    }
    let mut status_agree = 0;
    let mut max_trace_defect: f64 = 0.0;
    for _ in 0..status_samples {
        let p = random_fiber_start(rng, m);
        let a = iterate(word, &p, cfg)?;
        let b = iterate(word, &torus_act(&p, status_lambda), cfg)?;
        if a.status.same_kind(&b.status) {
            status_agree += 1;
        }
        max_trace_defect = max_trace_defect.max(trace_defect(&a.zeta_trace, &b.zeta_trace));
    }
    Ok(EquivarianceReport {
        samples,
        max_defect,
        status_samples,
        status_agree,
        max_trace_defect,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberPair {
    pub q: [Complex64; 2],
    pub g_status: Status,
    pub f_status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberBasinReport {
    pub samples: usize,
    pub radius: f64,
    /// Pairs where neither status is UNDECIDED.
    pub decided: usize,
    pub agree: usize,
    pub excluded_undecided: usize,
    pub disagreements: Vec<FiberPair>,
    /// Sign of `Re ζ₀` for each disagreement.
    pub disagreement_signs: Vec<i8>,
    /// Relative gap between the lift's `ζ`-trace and the first coordinate of
    /// the `G`-orbit from `(0.01, 0.02)` over 1000 steps.
    pub trace_defect: f64,
    /// `G` fixes `(0, y)`, `F` fixes the lift, and neither converges.
    pub fixed_line_exact: bool,
}

/// Compares `G`-orbits of `q = (x, y)` with `F`-orbits of the lift
/// `(x^{1/m}, .., x^{1/m}, y)`.
pub fn fiber_basin_check<R: Rng + ?Sized>(
    word: &MapWord,
    samples: usize,
    radius: f64,
    g_cfg: &OrbitConfig,
    f_cfg: &OrbitConfig,
    rng: &mut R,
) -> Result<FiberBasinReport> {
    let m = check_shear_word(word)?;
    let g = InducedG(word.clone());
    let mut report = FiberBasinReport {
        samples,
        radius,
        decided: 0,
        agree: 0,
        excluded_undecided: 0,
        disagreements: Vec::new(),
        disagreement_signs: Vec::new(),
        trace_defect: 0.0,
        fixed_line_exact: true,
    };
    for _ in 0..samples {
        let q = [random_disc(rng, radius), random_disc(rng, radius)];
        let (gs, _) = classify_point(&g, &q, g_cfg);
        let (fs, _) = classify_point(word, &lift(q, m), f_cfg);
        if gs.is_undecided() || fs.is_undecided() {
            report.excluded_undecided += 1;
            continue;
        }
        report.decided += 1;
        if gs.same_kind(&fs) {
            report.agree += 1;
        } else {
            report
                .disagreement_signs
                .push(if q[0].re < 0.0 { -1 } else { 1 });
            report.disagreements.push(FiberPair {
                q,
                g_status: gs,
                f_status: fs,
            });
        }
    }

    let trace_cfg = OrbitConfig {
        max_iter: 1000,
        eps_converged: 1e-300,
        ..OrbitConfig::default()
    };
    let q = [Complex64::new(0.01, 0.0), Complex64::new(0.02, 0.0)];
    let go = iterate(&g, &q, &trace_cfg)?;
    let fo = iterate(word, &lift(q, m), &trace_cfg)?;
    let g_first: Vec<Complex64> = go.points.iter().map(|p| p[0]).collect();
    report.trace_defect = if go.status.same_kind(&fo.status) {
        trace_defect(&fo.zeta_trace, &g_first)
    } else {
        f64::INFINITY
    };

    for y in [0.3, -0.7, 0.05] {
        let q = [Complex64::default(), Complex64::new(y, 0.2)];
        let p = lift(q, m);
        let gq = g.apply(&q);
        let fp = word.apply(&p);
        let (gs, _) = classify_point(&g, &q, g_cfg);
        let (fs, _) = classify_point(word, &p, f_cfg);
        report.fixed_line_exact &= gq == q && fp == p && !gs.is_converged() && !fs.is_converged();
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductReport {
    pub samples: usize,
    pub steps: usize,
    /// `max |u_{n+1} - u_n(1 + u_n/2)²| / |u_{n+1}|` with `u = zw`.
    pub max_rel_defect: f64,
    /// One step from `(0.1, 0.1)` against `0.01 · 1.005²`.
    pub anchor_defect: f64,
    /// `u` stays exactly 0 from `(z, 0)`.
    pub axis_exact: bool,
}

/// The product `u = zw` of the two-dimensional prototype follows
/// `u ↦ u(1 + u/2)²`.
pub fn product_recursion_check<R: Rng + ?Sized>(samples: usize, rng: &mut R) -> ProductReport {
    let map = PrototypeMap::TwoDProduct;
    let steps = 100;
    let mut max_rel_defect: f64 = 0.0;
    for _ in 0..samples {
        let mut p = random_point(rng, 2, 0.3);
        for _ in 0..steps {
            let u = p[0] * p[1];
            let next = map.apply(&p);
            let u_next = next[0] * next[1];
            if !u_next.is_finite() || u_next.norm() > 1e100 {
                break;
            }
            let expected = u * (1.0 + u * 0.5).powu(2);
            let defect = (u_next - expected).norm();
            if defect > 0.0 {
                max_rel_defect = max_rel_defect.max(defect / u_next.norm());
            }
            p = next;
        }
    }
    let next = map.apply(&[Complex64::new(0.1, 0.0), Complex64::new(0.1, 0.0)]);
    let anchor_defect = (next[0] * next[1] - Complex64::new(0.01 * 1.005 * 1.005, 0.0)).norm();
    let mut axis_exact = true;
    let mut p = vec![Complex64::new(0.25, -0.1), Complex64::default()];
    for _ in 0..steps {
        p = map.apply(&p);
        axis_exact &= p[0] * p[1] == Complex64::default();
    }
    ProductReport {
        samples,
        steps,
        max_rel_defect,
        anchor_defect,
        axis_exact,
    }
}

/// Replace the first slice coordinate `ζ` by `m` copies of its principal root.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftSpec {
    pub m: usize,
    /// Use the opposite branch on the first two copies.
    #[serde(default)]
    pub negate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub base: Vec<Complex64>,
    pub d1: Vec<Complex64>,
    pub d2: Vec<Complex64>,
    pub u_range: [f64; 2],
    pub v_range: [f64; 2],
    pub width: usize,
    pub height: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<LiftSpec>,
    /// Classify each pixel by the 3x3 lattice of its corners, edge midpoints and
    /// center: converged only if every sample converges, else escaped if any
    /// sample escapes, else undecided.
    #[serde(default)]
    pub boundary_samples: bool,
}

impl SliceSpec {
    /// The plane `u + iv` in the first coordinate, other coordinates fixed.
    pub fn first_coordinate_plane(
        rest: &[Complex64],
        u_range: [f64; 2],
        v_range: [f64; 2],
        width: usize,
        height: usize,
    ) -> Self {
        let k = rest.len() + 1;
        let mut base = vec![Complex64::default()];
        base.extend_from_slice(rest);
        let mut d1 = vec![Complex64::default(); k];
        let mut d2 = vec![Complex64::default(); k];
        d1[0] = Complex64::new(1.0, 0.0);
        d2[0] = Complex64::new(0.0, 1.0);
        SliceSpec {
            base,
            d1,
            d2,
            u_range,
            v_range,
            width,
            height,
            lift: None,
            boundary_samples: false,
        }
    }

    pub fn with_boundary_samples(mut self) -> Self {
        self.boundary_samples = true;
        self
    }

    pub fn with_lift(mut self, m: usize, negate: bool) -> Self {
        self.lift = Some(LiftSpec { m, negate });
        self
    }

    /// Dimension of the points handed to the map.
    pub fn point_dim(&self) -> usize {
        match self.lift {
            Some(l) => self.base.len() - 1 + l.m,
            None => self.base.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.base.len();
        if k == 0 || self.d1.len() != k || self.d2.len() != k {
            return Err(Error::Dimension(
                "base and directions must share a positive length".into(),
            ));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Domain("resolution must be at least 1x1".into()));
        }
        let ordered = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if !ordered(self.u_range) || !ordered(self.v_range) {
            return Err(Error::Domain(
                "slice ranges must be finite with min < max".into(),
            ));
        }
        let a: f64 = self.d1.iter().map(|x| x.norm_sqr()).sum();
        let b: f64 = self.d2.iter().map(|x| x.norm_sqr()).sum();
        let c: f64 = self
            .d1
            .iter()
            .zip(&self.d2)
            .map(|(x, y)| (x.conj() * y).re)
            .sum();
        if a == 0.0 || b == 0.0 || a * b - c * c <= 1e-20 * a * b {
            return Err(Error::Domain(
                "slice directions are linearly dependent".into(),
            ));
        }
        if let Some(l) = self.lift {
            if l.m == 0 || (l.negate && l.m < 2) {
                return Err(Error::Domain(format!("invalid lift {l:?}")));
            }
        }
        Ok(())
    }

    /// Coordinates of node `(lc, lr)` of the half-pixel lattice, `0 <= lc <= 2W`,
    /// `0 <= lr <= 2H`, laid out symmetrically about the range midpoints.
    /// Lattice row 0 is the top edge (`v` largest).
    pub fn lattice_uv(&self, lc: usize, lr: usize) -> (f64, f64) {
        let centered =
            |i: f64, n: f64, r: [f64; 2]| i / (2.0 * n) * (r[1] - r[0]) + (r[0] + r[1]) / 2.0;
        let (w, h) = (self.width as f64, self.height as f64);
        (
            centered(lc as f64 - w, w, self.u_range),
            centered(h - lr as f64, h, self.v_range),
        )
    }

    /// Pixel-center coordinates. Row 0 is the top.
    pub fn pixel_uv(&self, col: usize, row: usize) -> (f64, f64) {
        self.lattice_uv(2 * col + 1, 2 * row + 1)
    }

    pub fn point(&self, col: usize, row: usize) -> Vec<Complex64> {
        let (u, v) = self.pixel_uv(col, row);
        self.point_at(u, v)
    }

    pub fn point_at(&self, u: f64, v: f64) -> Vec<Complex64> {
        let q: Vec<Complex64> = self
            .base
            .iter()
            .zip(self.d1.iter().zip(&self.d2))
            .map(|(b, (x, y))| b + x * u + y * v)
            .collect();
        match self.lift {
            None => q,
            Some(l) => {
                let root = match l.m {
                    1 => q[0],
                    2 => q[0].sqrt(),
                    m => q[0].powf(1.0 / m as f64),
                };
                let mut p = vec![root; l.m];
                if l.negate {
                    p[0] = -p[0];
                    p[1] = -p[1];
                }
                p.extend_from_slice(&q[1..]);
                p
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasinRaster {
    pub width: usize,
    pub height: usize,
    /// Row-major codes: 0 escaped, 1 converged, 2 undecided.
    pub codes: Vec<u8>,
    /// Iterations spent on each pixel.
    pub iterations: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RasterStats {
    pub converged: usize,
    pub escaped: usize,
    pub undecided: usize,
    pub mean_iterations: f64,
    pub max_iterations: u32,
}

impl BasinRaster {
    pub fn code(&self, col: usize, row: usize) -> u8 {
        self.codes[row * self.width + col]
    }

    pub fn stats(&self) -> RasterStats {
        let count = |c: u8| self.codes.iter().filter(|x| **x == c).count();
        RasterStats {
            converged: count(1),
            escaped: count(0),
            undecided: count(2),
            mean_iterations: self.iterations.iter().map(|x| *x as f64).sum::<f64>()
                / self.codes.len() as f64,
            max_iterations: self.iterations.iter().copied().max().unwrap_or(0),
        }
    }

    /// Binary PGM with gray levels 0 escaped, 128 undecided, 255 converged.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.codes.iter().map(|c| match c {
            0 => 0u8,
            1 => 255,
            _ => 128,
        }));
        out
    }

    /// Fraction of pixels with equal codes.
    pub fn agreement(&self, other: &BasinRaster) -> Result<f64> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::Dimension("rasters of different sizes".into()));
        }
        let same = self
            .codes
            .iter()
            .zip(&other.codes)
            .filter(|(a, b)| a == b)
            .count();
        Ok(same as f64 / self.codes.len() as f64)
    }
}

/// Classifies every pixel of the slice. `threads = None` uses the global pool.
/// The result does not depend on the number of workers.
pub fn sample_slice<M: PointMap + ?Sized>(
    map: &M,
    spec: &SliceSpec,
    cfg: &OrbitConfig,
    threads: Option<usize>,
) -> Result<BasinRaster> {
    spec.validate()?;
    cfg.validate()?;
    if spec.point_dim() != map.dim() {
        return Err(Error::Dimension(format!(
            "slice points lie in C^{}, map acts on C^{}",
            spec.point_dim(),
            map.dim()
        )));
    }
    let classify = |u: f64, v: f64| -> (u8, u32) {
        let (s, n) = classify_point(map, &spec.point_at(u, v), cfg);
        (s.code(), n as u32)
    };
    let render = || -> Vec<(u8, u32)> {
        if !spec.boundary_samples {
            return (0..spec.height)
                .into_par_iter()
                .flat_map_iter(|row| {
                    (0..spec.width).map(move |col| {
                        let (u, v) = spec.pixel_uv(col, row);
                        classify(u, v)
                    })
                })
                .collect();
        }
        let lw = 2 * spec.width + 1;
        let lattice: Vec<(u8, u32)> = (0..=2 * spec.height)
            .into_par_iter()
            .flat_map_iter(|lr| {
                (0..lw).map(move |lc| {
                    let (u, v) = spec.lattice_uv(lc, lr);
                    classify(u, v)
                })
            })
            .collect();
        (0..spec.height)
            .flat_map(|row| (0..spec.width).map(move |col| (col, row)))
            .map(|(col, row)| {
                let mut escaped = false;
                let mut converged = true;
                let mut iters = 0;
                for lr in 2 * row..=2 * row + 2 {
                    for lc in 2 * col..=2 * col + 2 {
                        let (code, n) = lattice[lr * lw + lc];
                        escaped |= code == 0;
                        converged &= code == 1;
                        iters = iters.max(n);
                    }
                }
                let code = if converged {
                    1
                } else if escaped {
                    0
                } else {
                    2
                };
                (code, iters)
            })
            .collect()
    };
    let pixels = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?
            .install(render),
        None => render(),
    };
    let (codes, iterations) = pixels.into_iter().unzip();
    Ok(BasinRaster {
        width: spec.width,
        height: spec.height,
        codes,
        iterations,
    })
}

#[derive(Serialize)]
struct Sidecar<'a> {
    map: String,
    slice: &'a SliceSpec,
    config: &'a OrbitConfig,
    stats: RasterStats,
}

pub fn sidecar_json<M: PointMap + ?Sized>(
    map: &M,
    spec: &SliceSpec,
    cfg: &OrbitConfig,
    raster: &BasinRaster,
) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Sidecar {
        map: map.describe(),
        slice: spec,
        config: cfg,
        stats: raster.stats(),
    })?)
}

/// Writes `path` (PGM) and `path` with extension `.json`.
pub fn write_raster<M: PointMap + ?Sized>(
    path: &Path,
    map: &M,
    spec: &SliceSpec,
    cfg: &OrbitConfig,
    raster: &BasinRaster,
) -> Result<()> {
    std::fs::write(path, raster.to_pgm())?;
    std::fs::write(
        path.with_extension("json"),
        sidecar_json(map, spec, cfg, raster)?,
    )?;
    Ok(())
}

/// `n,re_1,im_1,..,norm` rows followed by `# status=..`.
pub fn orbit_csv(orbit: &Orbit) -> String {
    let k = orbit.points.first().map_or(0, |p| p.len());
    let mut out = String::from("n");
    for i in 1..=k {
        out.push_str(&format!(",re_{i},im_{i}"));
    }
    out.push_str(",norm\n");
    for (n, p) in orbit.indices.iter().zip(&orbit.points) {
        out.push_str(&n.to_string());
        for x in p {
            out.push_str(&format!(",{},{}", x.re, x.im));
        }
        out.push_str(&format!(",{}\n", norm(p)));
    }
    out.push_str(&format!("# status={}\n", orbit.status));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{build_f, Params};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn quad() -> PrototypeMap {
        PrototypeMap::OneDQuadratic { a: 1.0 }
    }

    fn f() -> MapWord {
        build_f(Params::default()).unwrap()
    }

    #[test]
    fn one_dimensional_orbits() {
        let o = iterate(&quad(), &[c(-0.1, 0.0)], &OrbitConfig::default()).unwrap();
        assert!(o.status.is_converged(), "{}", o.status);
        assert!(o
            .points
            .windows(2)
            .all(|w| w[1][0].re > w[0][0].re && w[1][0].im == 0.0));
        let o = iterate(&quad(), &[c(0.5, 0.0)], &OrbitConfig::default()).unwrap();
        assert!(o.status.is_escaped());
        if let Status::Escaped(n) = o.status {
            assert!(norm(o.last_point()) > 10.0);
            assert_eq!(*o.indices.last().unwrap(), n);
        }
    }

    #[test]
    fn converged_respects_threshold() {
        let cfg = OrbitConfig::default();
        let o = iterate(&quad(), &[c(-0.3, 0.1)], &cfg).unwrap();
        let Status::Converged(n) = o.status else {
            panic!("{}", o.status)
        };
        assert!(norm(&o.points[n]) < cfg.eps_converged);
        assert!(n >= 2 * CONVERGENCE_WINDOW - 1);
    }

    #[test]
    fn f_orbit_stays_bounded() {
        let o = iterate(
            &f(),
            &[c(0.1, 0.0), c(0.1, 0.0), c(0.05, 0.0)],
            &OrbitConfig {
                record_stride: 1000,
                ..OrbitConfig::default()
            },
        )
        .unwrap();
        assert!(!o.status.is_escaped());
        assert!(o.zeta_trace.windows(2).all(|w| w[1].re < w[0].re));
        assert!(o.points.last().unwrap()[2].norm() < 1e-4);
    }

    #[test]
    fn fixed_plane_is_stationary() {
        let o = iterate(
            &f(),
            &[c(0.0, 0.0), c(0.3, 0.0), c(0.2, 0.0)],
            &OrbitConfig::default(),
        )
        .unwrap();
        assert_eq!(o.status, Status::Undecided);
        assert!(o.stationary);
        assert_eq!(o.iterations, 1);
        assert_eq!(o.notes().len(), 1);
    }

    #[test]
    fn large_start_escapes() {
        let o = iterate(
            &f(),
            &[c(3.0, 0.0), c(3.0, 0.0), c(3.0, 0.0)],
            &OrbitConfig::default(),
        )
        .unwrap();
        assert!(o.status.is_escaped(), "{}", o.status);
        let o = iterate(
            &f(),
            &[c(30.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            &OrbitConfig::default(),
        )
        .unwrap();
        assert_eq!(o.status, Status::Escaped(0));
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(
            iterate(&f(), &[c(0.1, 0.0)], &OrbitConfig::default()),
            Err(Error::Dimension(_))
        ));
        let cfg = OrbitConfig {
            eps_converged: 20.0,
            ..OrbitConfig::default()
        };
        assert!(matches!(
            iterate(&quad(), &[c(0.1, 0.0)], &cfg),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn stride_records_start_and_end() {
        let cfg = OrbitConfig {
            record_stride: 7,
            ..OrbitConfig::default()
        };
        let o = iterate(&quad(), &[c(0.5, 0.0)], &cfg).unwrap();
        assert_eq!(o.indices[0], 0);
        assert_eq!(*o.indices.last().unwrap(), o.iterations);
        assert!(o.indices[1..o.indices.len() - 1].iter().all(|n| n % 7 == 0));
    }

    #[test]
    fn tangent_estimates() {
        let o = iterate(&quad(), &[c(-0.1, 0.02)], &OrbitConfig::default()).unwrap();
        let t = estimate_tangent(&o).unwrap();
        assert_eq!(t.direction.len(), 1);
        assert!((t.direction[0] - c(1.0, 0.0)).norm() < 1e-15);

        // w/ζ decays only like n^(-1/2), so compare two horizons
        let g = InducedG(f());
        let e1 = [c(1.0, 0.0), c(0.0, 0.0)];
        let dist_after = |max_iter: usize| {
            let cfg = OrbitConfig {
                max_iter,
                eps_converged: 1e-300,
                record_stride: 10,
                ..OrbitConfig::default()
            };
            let o = iterate(&g, &[c(0.01, 0.0), c(0.01, 0.0)], &cfg).unwrap();
            let t = estimate_tangent(&o).unwrap();
            assert!(t.stable);
            crate::hakim::projective_distance(&t.direction, &e1)
        };
        let (near, far) = (dist_after(5_000), dist_after(20_000));
        assert!(far < 0.06 && far < 0.7 * near, "{near} {far}");

        let short = iterate(&quad(), &[c(0.5, 0.0)], &OrbitConfig::default()).unwrap();
        assert!(matches!(
            estimate_tangent(&short),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn semiconjugacy_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = check_semiconjugacy(&f(), 20, 0.5, &mut rng).unwrap();
        assert!(r.max_defect <= 1e-12, "{r:?}");
        assert!(r.orbit_defect <= 1e-9, "{r:?}");
        assert!(r.fixed_line_exact);
    }

    #[test]
    fn equivariance_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = OrbitConfig {
            eps_converged: 0.05,
            ..OrbitConfig::default()
        };
        let r = check_equivariance(&f(), 20, 4, c(2.0, 0.0), &cfg, &mut rng).unwrap();
        assert!(r.max_defect <= 1e-12, "{r:?}");
        assert_eq!(r.status_agree, 4);
        assert!(r.max_trace_defect <= 1e-10, "{r:?}");
        let p = [c(0.2, 0.1), c(-0.1, 0.3), c(0.05, 0.0)];
        assert_eq!(torus_act(&p, c(1.0, 0.0)), p.to_vec());
    }

    #[test]
    fn fiber_basin_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g_cfg = OrbitConfig::default();
        let f_cfg = OrbitConfig {
            eps_converged: (2.0 * g_cfg.eps_converged).sqrt(),
            ..OrbitConfig::default()
        };
        let r = fiber_basin_check(&f(), 8, 0.05, &g_cfg, &f_cfg, &mut rng).unwrap();
        assert_eq!(r.agree, r.decided, "{r:?}");
        assert!(r.trace_defect <= 1e-10, "{r:?}");
        assert!(r.fixed_line_exact);
    }

    #[test]
    fn repelling_side_does_not_converge() {
        let q = [c(-0.01, 0.0), c(0.01, 0.0)];
        let cfg = OrbitConfig::default();
        let (gs, _) = classify_point(&InducedG(f()), &q, &cfg);
        let (fs, _) = classify_point(&f(), &lift(q, 2), &cfg);
        assert!(!gs.is_converged() && !fs.is_converged(), "{gs} {fs}");
    }

    #[test]
    fn product_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = product_recursion_check(20, &mut rng);
        assert!(r.max_rel_defect <= 1e-13, "{r:?}");
        assert!(r.anchor_defect <= 1e-16);
        assert!(r.axis_exact);
    }

    #[test]
    fn slice_layout() {
        let s = SliceSpec::first_coordinate_plane(&[], [-1.5, 0.5], [-1.0, 1.0], 200, 200);
        s.validate().unwrap();
        let (u, v) = s.pixel_uv(0, 0);
        assert!((u + 1.495).abs() < 1e-15 && (v - 0.995).abs() < 1e-15);
        for row in 0..200 {
            assert_eq!(s.pixel_uv(3, row).1, -s.pixel_uv(3, 199 - row).1);
        }
        let mut bad = s.clone();
        bad.d2 = vec![c(2.0, 0.0)];
        assert!(bad.validate().is_err());
        bad = s.clone();
        bad.width = 0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn lifted_slice_points() {
        let s = SliceSpec::first_coordinate_plane(&[c(0.05, 0.0)], [-0.2, 0.2], [-0.2, 0.2], 4, 4)
            .with_lift(2, false);
        assert_eq!(s.point_dim(), 3);
        let p = s.point(1, 2);
        let (u, v) = s.pixel_uv(1, 2);
        assert!((p[0] * p[1] - c(u, v)).norm() < 1e-15);
        assert_eq!(p[2], c(0.05, 0.0));
        let n = s.clone().with_lift(2, true).point(1, 2);
        assert_eq!(n[0], -p[0]);
    }

    #[test]
    fn small_raster_symmetry_and_pgm() {
        let s = SliceSpec::first_coordinate_plane(&[], [-1.5, 0.5], [-1.0, 1.0], 30, 20);
        let r = sample_slice(&quad(), &s, &OrbitConfig::default(), Some(2)).unwrap();
        for row in 0..20 {
            for col in 0..30 {
                assert_eq!(r.code(col, row), r.code(col, 19 - row));
            }
        }
        let st = r.stats();
        assert_eq!(st.converged + st.escaped + st.undecided, 600);
        assert!(st.converged > 0 && st.escaped > 0);
        let pgm = r.to_pgm();
        assert!(pgm.starts_with(b"P5\n30 20\n255\n"));
        assert_eq!(pgm.len(), 13 + 600);
        let again = sample_slice(&quad(), &s, &OrbitConfig::default(), Some(5)).unwrap();
        assert_eq!(again, r);
        assert!(sample_slice(&f(), &s, &OrbitConfig::default(), None).is_err());
    }

    #[test]
    fn csv_layout() {
        let o = iterate(&quad(), &[c(0.5, 0.0)], &OrbitConfig::default()).unwrap();
        let csv = orbit_csv(&o);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,re_1,im_1,norm"));
        assert_eq!(lines.next(), Some("0,0.5,0,0.5"));
        assert_eq!(
            csv.lines().last(),
            Some(format!("# status={}", o.status).as_str())
        );
    }
}
