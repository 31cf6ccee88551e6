//! Command-line front end. Exit codes: 0 success, 1 verification failure,
//! 2 invalid input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    estimate_tangent, iterate, orbit_csv, sample_slice, write_raster, InducedG, OrbitConfig,
    PointMap, SliceSpec,
};
use crate::error::{Error, Result};
use crate::hakim::{
    characteristic_directions, classify, f_direction_notes, g_direction_notes, leading_term,
    DirectionSet,
};
use crate::jets::{default_var_names, JetMap};
use crate::maps::{
    build_f, build_family, g_var_names, induced_g_of_word, MapFamily, MapSpec, PrototypeMap,
};
use crate::verify::{run_family, run_verify, VerifyReport};

#[derive(Parser, Debug)]
#[command(
    name = "shearbasin",
    version,
    about = "Shear automorphisms tangent to the identity: jets, directions, orbits, basins"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Print the jet of the map to the given order.
    Expand,
    /// Run the full invariant suite.
    Verify,
    /// Characteristic directions and directors of the leading term.
    Directions,
    /// Iterate one orbit and write it as CSV.
    Orbit,
    /// Rasterize a basin slice to PGM with a JSON sidecar.
    Basin,
    /// Build the family on C^(k+1) and check it.
    Family,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// F3, G, FAMILY_K, PROTO_1D or PROTO_2D.
    #[arg(long, global = true)]
    map: Option<MapFamily>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Jet order N.
    #[arg(long, global = true)]
    order: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    escape: Option<f64>,
    #[arg(long, global = true)]
    stride: Option<usize>,
    /// Start point, comma separated complex numbers such as `0.1,0.1+0.02i,0.05`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    start: Option<String>,
    /// Slice rectangle `umin,umax,vmin,vmax`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    slice: Option<String>,
    /// Raster size `WxH`.
    #[arg(long, global = true)]
    res: Option<String>,
    /// Fixed `w` for slices in the ζ-plane.
    #[arg(long, global = true, allow_hyphen_values = true)]
    w: Option<String>,
    /// Use the opposite square-root branch for lifted slices.
    #[arg(long, global = true)]
    negate_branch: bool,
    /// Classify pixels by corners, edge midpoints and center.
    #[arg(long, global = true)]
    boundary_samples: bool,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (JSON report, CSV orbit or PGM raster).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON run configuration; its fields override flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Everything a run depends on. Unset fields take their defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub map: Option<MapSpec>,
    pub order: Option<u32>,
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub eps: Option<f64>,
    pub escape: Option<f64>,
    pub stride: Option<usize>,
    pub start: Option<Vec<Complex64>>,
    pub slice: Option<[f64; 4]>,
    pub resolution: Option<[usize; 2]>,
    pub w: Option<Complex64>,
    pub slice_spec: Option<SliceSpec>,
    pub negate_branch: Option<bool>,
    pub boundary_samples: Option<bool>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Fields set in `other` replace those in `self`.
    pub fn merge(self, other: RunConfig) -> RunConfig {
        RunConfig {
            map: other.map.or(self.map),
            order: other.order.or(self.order),
            seed: other.seed.or(self.seed),
            max_iter: other.max_iter.or(self.max_iter),
            eps: other.eps.or(self.eps),
            escape: other.escape.or(self.escape),
            stride: other.stride.or(self.stride),
            start: other.start.or(self.start),
            slice: other.slice.or(self.slice),
            resolution: other.resolution.or(self.resolution),
            w: other.w.or(self.w),
            slice_spec: other.slice_spec.or(self.slice_spec),
            negate_branch: other.negate_branch.or(self.negate_branch),
            boundary_samples: other.boundary_samples.or(self.boundary_samples),
            threads: other.threads.or(self.threads),
            out: other.out.or(self.out),
        }
    }

    /// Reads a run configuration, or a bare map description.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        if value.get("family").is_some() {
            return Ok(RunConfig {
                map: Some(serde_json::from_value(value)?),
                ..RunConfig::default()
            });
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn map_spec(&self) -> MapSpec {
        self.map.clone().unwrap_or(MapSpec {
            family: MapFamily::F3,
            a: None,
            b: None,
            c: None,
            k: None,
        })
    }

    pub fn order(&self) -> u32 {
        self.order.unwrap_or(8)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn orbit_config(&self) -> Result<OrbitConfig> {
        let d = OrbitConfig::default();
        let cfg = OrbitConfig {
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            eps_converged: self.eps.unwrap_or(d.eps_converged),
            escape_radius: self.escape.unwrap_or(d.escape_radius),
            record_stride: self.stride.unwrap_or(d.record_stride),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    Complex64::from_str(s.trim())
        .map_err(|_| Error::Domain(format!("cannot parse complex number {s:?}")))
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|_| Error::Domain(format!("bad {what} entry {x:?}")))
        })
        .collect()
}

impl Flags {
    fn to_config(&self) -> Result<RunConfig> {
        let map = (self.map.is_some()
            || self.a.is_some()
            || self.b.is_some()
            || self.c.is_some()
            || self.k.is_some())
        .then(|| MapSpec {
            family: self.map.unwrap_or(MapFamily::F3),
            a: self.a,
            b: self.b,
            c: self.c,
            k: self.k,
        });
        let slice = match &self.slice {
            Some(s) => {
                let v: Vec<f64> = parse_list(s, "slice")?;
                let arr: [f64; 4] = v
                    .try_into()
                    .map_err(|_| Error::Domain("--slice needs umin,umax,vmin,vmax".into()))?;
                Some(arr)
            }
            None => None,
        };
        let resolution = match &self.res {
            Some(s) => {
                let parts: Vec<&str> = s.split('x').collect();
                match parts.as_slice() {
                    [w, h] => Some([
                        w.parse()
                            .map_err(|_| Error::Domain(format!("bad width in {s:?}")))?,
                        h.parse()
                            .map_err(|_| Error::Domain(format!("bad height in {s:?}")))?,
                    ]),
                    _ => return Err(Error::Domain("--res needs WxH".into())),
                }
            }
            None => None,
        };
        Ok(RunConfig {
            map,
            order: self.order,
            seed: self.seed,
            max_iter: self.max_iter,
            eps: self.eps,
            escape: self.escape,
            stride: self.stride,
            start: self
                .start
                .as_deref()
                .map(|s| s.split(',').map(parse_complex).collect::<Result<Vec<_>>>())
                .transpose()?,
            slice,
            resolution,
            w: self.w.as_deref().map(parse_complex).transpose()?,
            slice_spec: None,
            negate_branch: self.negate_branch.then_some(true),
            boundary_samples: self.boundary_samples.then_some(true),
            threads: self.threads,
            out: self.out.clone(),
        })
    }
}

/// A failed run: verification failures exit 1, everything else 2.
enum Failure {
    Verification,
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` and runs the command, writing to `out` and `err`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let result = build_config(&cli.flags).and_then(|cfg| dispatch(cli.command, &cfg, out));
    match result {
        Ok(()) => 0,
        Err(Failure::Verification) => 1,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn build_config(flags: &Flags) -> std::result::Result<RunConfig, Failure> {
    let cfg = flags.to_config()?;
    Ok(match &flags.config {
        Some(path) => cfg.merge(RunConfig::load(path)?),
        None => cfg,
    })
}

fn dispatch(cmd: Command, cfg: &RunConfig, out: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Expand => cmd_expand(cfg, out),
        Command::Verify => cmd_verify(cfg, out),
        Command::Directions => cmd_directions(cfg, out),
        Command::Orbit => cmd_orbit(cfg, out),
        Command::Basin => cmd_basin(cfg, out),
        Command::Family => cmd_family(cfg, out),
    }
}

/// Jet of the selected map and the names of its variables.
fn map_jet(spec: &MapSpec, order: u32) -> Result<(JetMap, Vec<String>)> {
    Ok(match spec.family {
        MapFamily::F3 => (build_f(spec.params()?)?.jet(order)?, default_var_names(3)),
        MapFamily::G => (
            induced_g_of_word(&build_f(spec.params()?)?, order)?,
            g_var_names(),
        ),
        MapFamily::FamilyK => {
            let r = spec.family_rates()?;
            let word = build_family(r.m(), &r.z_rates, r.w_rate)?;
            (word.jet(order)?, default_var_names(r.m() + 1))
        }
        MapFamily::Proto1D => (
            PrototypeMap::OneDQuadratic {
                a: spec.a.unwrap_or(1.0),
            }
            .jet(order)?,
            default_var_names(1),
        ),
        MapFamily::Proto2D => (PrototypeMap::TwoDProduct.jet(order)?, default_var_names(2)),
    })
}

/// Point evaluator for the selected map.
fn map_evaluator(spec: &MapSpec) -> Result<Box<dyn PointMap>> {
    Ok(match spec.family {
        MapFamily::F3 => Box::new(build_f(spec.params()?)?),
        MapFamily::G => Box::new(InducedG(build_f(spec.params()?)?)),
        MapFamily::FamilyK => {
            let r = spec.family_rates()?;
            Box::new(build_family(r.m(), &r.z_rates, r.w_rate)?)
        }
        MapFamily::Proto1D => Box::new(PrototypeMap::OneDQuadratic {
            a: spec.a.unwrap_or(1.0),
        }),
        MapFamily::Proto2D => Box::new(PrototypeMap::TwoDProduct),
    })
}

fn cmd_expand(cfg: &RunConfig, out: &mut dyn Write) -> Outcome {
    let spec = cfg.map_spec();
    let (jet, names) = map_jet(&spec, cfg.order())?;
    writeln!(out, "{}", jet.display_with(&names))?;
    for (i, comp) in jet.components().iter().enumerate() {
        writeln!(out, "component {}:", i + 1)?;
        for (e, c) in comp.terms() {
            let coeff = if c.im == 0.0 {
                format!("{}", c.re)
            } else {
                format!("{}{:+}i", c.re, c.im)
            };
            writeln!(out, "  {:<12} {coeff}", e.display_with(&names))?;
        }
    }
    let json = serde_json::to_string_pretty(&jet).map_err(Error::from)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, json)?,
        None => writeln!(out, "{json}")?,
    }
    Ok(())
}

fn emit_report(report: &VerifyReport, cfg: &RunConfig, out: &mut dyn Write) -> Outcome {
    write!(out, "{}", report.to_text())?;
    if let Some(path) = &cfg.out {
        std::fs::write(
            path,
            serde_json::to_string_pretty(report).map_err(Error::from)?,
        )?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_verify(cfg: &RunConfig, out: &mut dyn Write) -> Outcome {
    let spec = cfg.map_spec();
    let report = match spec.family {
        MapFamily::F3 | MapFamily::G => run_verify(spec.params()?, cfg.order(), cfg.seed())?,
        MapFamily::FamilyK => {
            let r = spec.family_rates()?;
            run_family(r.m(), r.z_rates[0], r.w_rate, cfg.order(), cfg.seed())?
        }
        other => {
            return Err(Failure::Input(format!(
                "verify applies to F3, G and FAMILY_K, not {other:?}"
            )))
        }
    };
    emit_report(&report, cfg, out)
}

fn cmd_family(cfg: &RunConfig, out: &mut dyn Write) -> Outcome {
    let mut spec = cfg.map_spec();
    spec.family = MapFamily::FamilyK;
    let r = spec.family_rates()?;
    let word = build_family(r.m(), &r.z_rates, r.w_rate)?;
    writeln!(out, "{}", word.describe())?;
    writeln!(
        out,
        "{}",
        word.jet(cfg.order().min(6))?
            .display_with(&default_var_names(r.m() + 1))
    )?;
    let report = run_family(r.m(), r.z_rates[0], r.w_rate, cfg.order(), cfg.seed())?;
    emit_report(&report, cfg, out)
}

fn format_vec(v: &[Complex64]) -> String {
    let parts: Vec<String> = v
        .iter()
        .map(|x| {
            if x.im.abs() < 1e-12 {
                format!("{:.6}", x.re)
            } else {
                format!("{:.6}{:+.6}i", x.re, x.im)
            }
        })
        .collect();
    format!("[{}]", parts.join(":"))
}

fn print_directions(set: &DirectionSet, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "solver: {:?}; cone dimension {}",
        set.solver, set.cone_dimension
    )?;
    for d in &set.directions {
        let family = d
            .family
            .as_ref()
            .map(|f| format!(" family {} (dim {})", f.tag, f.dim))
            .unwrap_or_default();
        let directors: Vec<String> = d.directors.iter().map(|x| format!("{x:.6}")).collect();
        writeln!(
            out,
            "{} λ={:.6}{} directors=[{}] {}",
            format_vec(&d.v),
            d.lambda,
            family,
            directors.join(", "),
            classify(d)
        )?;
    }
    Ok(())
}

fn cmd_directions(cfg: &RunConfig, out: &mut dyn Write) -> Outcome {
    let spec = cfg.map_spec();
    let (jet, _) = map_jet(&spec, cfg.order())?;
    let l = leading_term(&jet)?;
    writeln!(out, "leading term degree r = {}: {}", l.r, l.p)?;
    let set = characteristic_directions(&l)?;
    print_directions(&set, out)?;
    let warnings = match spec.family {
        MapFamily::F3 => f_direction_notes(&set),
        MapFamily::G => {
            let p = spec.params()?;
            if p.a == p.b {
                g_direction_notes(&set, p.a, p.c)
            } else {
                vec![format!(
                    "a = {} differs from b = {}; the director formula (c-2a)/(2a) assumes a = b",
                    p.a, p.b
                )]
            }
        }
        _ => Vec::new(),
    };
    if matches!(spec.family, MapFamily::F3 | MapFamily::G) {
        writeln!(out, "expected: F has degenerate families (z,0,w) and (0,t,w); G has [1:0] with director (c-2a)/(2a)")?;
    }
    for w in warnings {
        writeln!(out, "warning: {w}")?;
    }
    Ok(())
}

fn default_start(spec: &MapSpec, dim: usize) -> Vec<Complex64> {
    let r = |x: f64| Complex64::new(x, 0.0);
    match spec.family {
        MapFamily::Proto1D => vec![r(-0.1)],
        MapFamily::Proto2D => vec![r(0.1), r(0.1)],
        MapFamily::G => vec![r(0.01), r(0.02)],
        _ => {
            let mut p = vec![r(0.1); dim - 1];
            p.push(r(0.05));
            p
        }
    }
}

fn cmd_orbit(cfg: &RunConfig, out: &mut dyn Write) -> Outcome {
    let spec = cfg.map_spec();
    let map = map_evaluator(&spec)?;
    let start = cfg
        .start
        .clone()
        .unwrap_or_else(|| default_start(&spec, map.dim()));
    let ocfg = cfg.orbit_config()?;
    let orbit = iterate(map.as_ref(), &start, &ocfg)?;
    writeln!(out, "map: {}", map.describe())?;
    writeln!(out, "start: {}", format_vec(&start))?;
    writeln!(out, "status: {}", orbit.status)?;
    writeln!(out, "iterations: {}", orbit.iterations)?;
    writeln!(out, "final norm: {:e}", orbit.final_norm())?;
    if !orbit.zeta_trace.is_empty() {
        if let Some(pos) = orbit.indices.iter().position(|n| *n == 10_000) {
            writeln!(
                out,
                "n·ζ_n at n=10000: {:.6}",
                10_000.0 * orbit.zeta_trace[pos].norm()
            )?;
        }
        if let Some(e) = orbit
            .leau_fatou_estimate()
            .filter(|_| orbit.iterations >= 100)
        {
            writeln!(
                out,
                "n·ζ_n at n={}: {:.6}",
                orbit.indices.last().unwrap(),
                e
            )?;
        }
    }
    match estimate_tangent(&orbit) {
        Ok(t) => writeln!(
            out,
            "tangent: {} (stable: {})",
            format_vec(&t.direction),
            t.stable
        )?,
        Err(e) => writeln!(out, "tangent: unavailable ({e})")?,
    }
    for note in orbit.notes() {
        writeln!(out, "note: {note}")?;
    }
    if let Some(path) = &cfg.out {
        std::fs::write(path, orbit_csv(&orbit))?;
    }
    Ok(())
}

fn slice_for(cfg: &RunConfig, spec: &MapSpec, dim: usize) -> Result<SliceSpec> {
    let mut slice = if let Some(s) = &cfg.slice_spec {
        s.clone()
    } else {
        let one_d = spec.family == MapFamily::Proto1D;
        let rect = cfg.slice.unwrap_or(if one_d {
            [-1.5, 0.5, -1.0, 1.0]
        } else {
            [-0.5, 0.5, -0.5, 0.5]
        });
        let [w, h] = cfg
            .resolution
            .unwrap_or(if one_d { [200, 200] } else { [100, 100] });
        let fixed_w = cfg.w.unwrap_or(Complex64::new(0.05, 0.0));
        let (u, v) = ([rect[0], rect[1]], [rect[2], rect[3]]);
        match spec.family {
            MapFamily::Proto1D => SliceSpec::first_coordinate_plane(&[], u, v, w, h),
            MapFamily::Proto2D => {
                SliceSpec::first_coordinate_plane(&[], u, v, w, h).with_lift(2, false)
            }
            MapFamily::G => SliceSpec::first_coordinate_plane(&[fixed_w], u, v, w, h),
            MapFamily::F3 | MapFamily::FamilyK => {
                SliceSpec::first_coordinate_plane(&[fixed_w], u, v, w, h).with_lift(dim - 1, false)
            }
        }
    };
    if cfg.negate_branch == Some(true) {
        let l = slice
            .lift
            .ok_or_else(|| Error::Domain("--negate-branch needs a lifted slice".into()))?;
        slice = slice.with_lift(l.m, true);
    }
    if cfg.boundary_samples == Some(true) {
        slice.boundary_samples = true;
    }
    slice.validate()?;
    Ok(slice)
}

fn cmd_basin(cfg: &RunConfig, out: &mut dyn Write) -> Outcome {
    let spec = cfg.map_spec();
    let map = map_evaluator(&spec)?;
    let slice = slice_for(cfg, &spec, map.dim())?;
    let ocfg = cfg.orbit_config()?;
    let raster = sample_slice(map.as_ref(), &slice, &ocfg, cfg.threads)?;
    let path = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("basin.pgm"));
    write_raster(&path, map.as_ref(), &slice, &ocfg, &raster)?;
    let st = raster.stats();
    writeln!(out, "map: {}", map.describe())?;
    writeln!(
        out,
        "{}x{}: converged {}, escaped {}, undecided {}",
        raster.width, raster.height, st.converged, st.escaped, st.undecided
    )?;
    writeln!(
        out,
        "wrote {} and {}",
        path.display(),
        path.with_extension("json").display()
    )?;
    Ok(())
}
