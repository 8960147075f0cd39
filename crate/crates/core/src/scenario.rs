//! Scenario files: `[section]` headers, `key = value` lines, `#` comments.
//!
//! ```text
//! [weights]
//! a1 = diag(1, 3, 5)
//! a2 = diag(0.1, 0.3, 0.5)
//! [warping]
//! u1 = auto
//! k1 = 0.03
//! [init]
//! R0 = 3.14159265358979, 1, 0, 0
//! [sim]
//! t_end = 20
//! ```
//!
//! Parsing is all-or-nothing: unknown sections or keys, repeated keys and
//! malformed values are errors carrying the offending line number.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::controller::{ControllerConfig, LogicState, Measurement, MeasurementSet};
use crate::error::{Error, Result};
use crate::sim::{self, ControlMode, PlantState, SimConfig};
use crate::so3::{quat_to_rot, rot_axis, Mat3, Rotation, UnitQuaternion, Vec3};
use crate::trace_potential::WeightMatrix;
use crate::warping::{self, GainPolicy, WarpedPotential};

/// Tolerance on the norm of axes and quaternions typed into a scenario.
const TYPED_UNIT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Auto<T> {
    Auto,
    Given(T),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AttitudeSpec {
    Fixed(Rotation),
    /// Undesired critical point of channel `h`, representative direction
    /// `dir` (1-based), logic index `q`.
    Critical { h: usize, dir: usize, q: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControllerKind {
    Hybrid,
    Smooth,
}

impl ControllerKind {
    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Hybrid => "hybrid",
            ControllerKind::Smooth => "smooth",
        }
    }
}

/// A parsed, not yet resolved scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub a: [Mat3; 2],
    pub u: [Auto<Vec3>; 2],
    pub k: [Auto<f64>; 2],
    pub delta: [Auto<f64>; 2],
    pub inertia: Mat3,
    pub refs: Option<Vec<Vec3>>,
    pub rho: [Option<Vec<f64>>; 2],
    pub aug_rho: [f64; 2],
    pub r0: AttitudeSpec,
    pub omega0: Vec3,
    pub rhat0: AttitudeSpec,
    pub rd: AttitudeSpec,
    pub q0: [usize; 2],
    pub dt: f64,
    pub t_end: f64,
    pub controller: ControllerKind,
    pub noise_std: f64,
    pub seed: u64,
    pub max_jumps: u64,
    pub eps: Option<Vec<f64>>,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("weights", &["a1", "a2"]),
    ("warping", &["u1", "u2", "k1", "k2"]),
    ("hysteresis", &["delta1", "delta2"]),
    ("plant", &["inertia", "refs", "rho1", "rho2", "aug_rho1", "aug_rho2"]),
    ("init", &["R0", "omega0", "Rhat0", "Rd", "q0"]),
    ("sim", &["dt", "t_end", "controller", "noise_std", "seed", "max_jumps", "eps"]),
];

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut section: Option<&str> = None;
        let mut seen_sections: Vec<&str> = Vec::new();
        let mut kv: HashMap<&'static str, (usize, String)> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::parse(line_no, "unterminated section header"))?
                    .trim();
                let (known, _) = SECTIONS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| Error::parse(line_no, format!("unknown section [{name}]")))?;
                if seen_sections.contains(known) {
                    return Err(Error::parse(line_no, format!("section [{name}] repeated")));
                }
                seen_sections.push(known);
                section = Some(known);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section.ok_or_else(|| Error::parse(line_no, "key outside of any section"))?;
            let keys = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            let known = keys
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| Error::parse(line_no, format!("unknown key `{key}` in [{sec}]")))?;
            if value.is_empty() {
                return Err(Error::parse(line_no, format!("`{key}` has no value")));
            }
            if kv.insert(known, (line_no, value.to_string())).is_some() {
                return Err(Error::parse(line_no, format!("`{key}` given twice")));
            }
        }
        Self::from_pairs(&kv, text.lines().count())
    }

    fn from_pairs(kv: &HashMap<&'static str, (usize, String)>, last_line: usize) -> Result<Self> {
        let get = |k: &str| kv.get(k).map(|(l, v)| (*l, v.as_str()));
        let req = |k: &str| {
            get(k).ok_or_else(|| Error::parse(last_line, format!("missing required key `{k}`")))
        };

        let (l1, v1) = req("a1")?;
        let (l2, v2) = req("a2")?;
        let a = [parse_matrix(l1, v1)?, parse_matrix(l2, v2)?];

        let mut s = Scenario {
            a,
            u: [Auto::Auto; 2],
            k: [Auto::Auto; 2],
            delta: [Auto::Auto; 2],
            inertia: Mat3::diag([1.0, 1.0, 2.0]),
            refs: None,
            rho: [None, None],
            aug_rho: crate::controller::DEFAULT_AUGMENT_RHO,
            r0: AttitudeSpec::Fixed(Rotation::IDENTITY),
            omega0: Vec3::ZERO,
            rhat0: AttitudeSpec::Fixed(Rotation::IDENTITY),
            rd: AttitudeSpec::Fixed(Rotation::IDENTITY),
            q0: [1, 1],
            dt: sim::DEFAULT_DT,
            t_end: 20.0,
            controller: ControllerKind::Hybrid,
            noise_std: 0.0,
            seed: 0,
            max_jumps: sim::DEFAULT_MAX_JUMPS,
            eps: None,
        };
        for h in 0..2 {
            let n = h + 1;
            if let Some((l, v)) = get(&format!("u{n}")) {
                s.u[h] = parse_auto(l, v, parse_vec3)?;
            }
            if let Some((l, v)) = get(&format!("k{n}")) {
                s.k[h] = parse_auto(l, v, parse_real)?;
            }
            if let Some((l, v)) = get(&format!("delta{n}")) {
                s.delta[h] = parse_auto(l, v, parse_real)?;
            }
            if let Some((l, v)) = get(&format!("rho{n}")) {
                s.rho[h] = Some(parse_reals(l, v)?);
            }
            if let Some((l, v)) = get(&format!("aug_rho{n}")) {
                s.aug_rho[h] = parse_real(l, v)?;
            }
        }
        if let Some((l, v)) = get("inertia") {
            s.inertia = parse_matrix(l, v)?;
        }
        if let Some((l, v)) = get("refs") {
            let refs = v
                .split(';')
                .map(|t| parse_vec3(l, t.trim()))
                .collect::<Result<Vec<_>>>()?;
            s.refs = Some(refs);
        }
        if let Some((l, v)) = get("R0") {
            s.r0 = parse_attitude(l, v)?;
        }
        if let Some((l, v)) = get("Rhat0") {
            s.rhat0 = parse_attitude(l, v)?;
        }
        if let Some((l, v)) = get("Rd") {
            s.rd = parse_attitude(l, v)?;
        }
        if let Some((l, v)) = get("omega0") {
            s.omega0 = parse_vec3(l, v)?;
        }
        if let Some((l, v)) = get("q0") {
            let q = parse_reals(l, v)?;
            if q.len() != 2 || q.iter().any(|x| x.fract() != 0.0 || *x < 1.0) {
                return Err(Error::parse(l, "q0 must be two positive integers"));
            }
            s.q0 = [q[0] as usize, q[1] as usize];
        }
        if let Some((l, v)) = get("dt") {
            s.dt = parse_real(l, v)?;
            if !(s.dt > 0.0) {
                return Err(Error::parse(l, "dt must be positive"));
            }
        }
        if let Some((l, v)) = get("t_end") {
            s.t_end = parse_real(l, v)?;
            if !(s.t_end >= 0.0) {
                return Err(Error::parse(l, "t_end must be non-negative"));
            }
        }
        if let Some((l, v)) = get("controller") {
            s.controller = match v {
                "hybrid" => ControllerKind::Hybrid,
                "smooth" => ControllerKind::Smooth,
                _ => return Err(Error::parse(l, format!("controller must be hybrid or smooth, got `{v}`"))),
            };
        }
        if let Some((l, v)) = get("noise_std") {
            s.noise_std = parse_real(l, v)?;
            if !(s.noise_std >= 0.0) {
                return Err(Error::parse(l, "noise_std must be non-negative"));
            }
        }
        if let Some((l, v)) = get("seed") {
            s.seed = v
                .parse()
                .map_err(|_| Error::parse(l, format!("seed must be an unsigned integer, got `{v}`")))?;
        }
        if let Some((l, v)) = get("max_jumps") {
            s.max_jumps = v
                .parse()
                .map_err(|_| Error::parse(l, format!("max_jumps must be an unsigned integer, got `{v}`")))?;
        }
        if let Some((l, v)) = get("eps") {
            s.eps = Some(parse_reals(l, v)?);
        }
        Ok(s)
    }
}

fn parse_real(line: usize, s: &str) -> Result<f64> {
    let t = s.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a number, got `{t}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("`{t}` is not finite")));
    }
    Ok(v)
}

fn parse_reals(line: usize, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| parse_real(line, t)).collect()
}

fn parse_n<const N: usize>(line: usize, s: &str) -> Result<[f64; N]> {
    let v = parse_reals(line, s)?;
    v.try_into()
        .map_err(|v: Vec<f64>| Error::parse(line, format!("expected {N} numbers, got {}", v.len())))
}

fn parse_vec3(line: usize, s: &str) -> Result<Vec3> {
    Ok(Vec3::from_array(parse_n::<3>(line, s)?))
}

fn call<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)
        .map(str::trim_start)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
}

/// Nine row-major reals or `diag(x, y, z)`.
pub fn parse_matrix(line: usize, s: &str) -> Result<Mat3> {
    if let Some(inner) = call(s, "diag") {
        return Ok(Mat3::diag(parse_n::<3>(line, inner)?));
    }
    Ok(Mat3::from_row_slice(&parse_n::<9>(line, s)?))
}

fn parse_auto<T>(line: usize, s: &str, f: fn(usize, &str) -> Result<T>) -> Result<Auto<T>> {
    if s == "auto" {
        Ok(Auto::Auto)
    } else {
        f(line, s).map(Auto::Given)
    }
}

fn unit_typed(line: usize, v: Vec3, what: &str) -> Result<Vec3> {
    let n = v.norm();
    if (n - 1.0).abs() > TYPED_UNIT_TOL {
        return Err(Error::parse(
            line,
            format!("{what} has norm {n}; use rotvec(...) for an unnormalized rotation vector"),
        ));
    }
    Ok(v * (1.0 / n))
}

/// `identity`, `angle, ax, ay, az`, `quat(η, ε₁, ε₂, ε₃)`, `rotvec(x, y, z)`,
/// or `critical(h, dir, q)`.
pub fn parse_attitude(line: usize, s: &str) -> Result<AttitudeSpec> {
    if s == "identity" {
        return Ok(AttitudeSpec::Fixed(Rotation::IDENTITY));
    }
    if let Some(inner) = call(s, "quat") {
        let [eta, x, y, z] = parse_n::<4>(line, inner)?;
        let n = (eta * eta + x * x + y * y + z * z).sqrt();
        if (n - 1.0).abs() > TYPED_UNIT_TOL {
            return Err(Error::parse(line, format!("quaternion has norm {n}")));
        }
        let q = UnitQuaternion::new(eta / n, Vec3::new(x, y, z) * (1.0 / n))
            .map_err(|e| Error::parse(line, e.to_string()))?;
        return Ok(AttitudeSpec::Fixed(quat_to_rot(&q)));
    }
    if let Some(inner) = call(s, "rotvec") {
        return Ok(AttitudeSpec::Fixed(Rotation::exp(parse_vec3(line, inner)?)));
    }
    if let Some(inner) = call(s, "critical") {
        let v = parse_n::<3>(line, inner)?;
        if v.iter().any(|x| x.fract() != 0.0 || *x < 1.0) {
            return Err(Error::parse(line, "critical(h, dir, q) takes positive integers"));
        }
        let (h, dir, q) = (v[0] as usize, v[1] as usize, v[2] as usize);
        if h > 2 {
            return Err(Error::parse(line, "critical(h, ...) needs h = 1 or 2"));
        }
        return Ok(AttitudeSpec::Critical { h, dir, q });
    }
    let [angle, x, y, z] = parse_n::<4>(line, s)?;
    let axis = unit_typed(line, Vec3::new(x, y, z), "rotation axis")?;
    Ok(AttitudeSpec::Fixed(rot_axis(angle, axis)))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ResolveOptions {
    /// Keep gains and thresholds as typed even when they violate the bounds.
    pub paper_exact: bool,
    pub seed: Option<u64>,
}

/// Resolved design of one channel.
#[derive(Clone, Debug)]
pub struct ChannelDesign {
    pub weight: WeightMatrix,
    pub u: Vec3,
    pub k: f64,
    pub k_bar: f64,
    pub gap: Option<f64>,
    pub delta: f64,
}

/// Scenario with every `auto` filled in and every bound enforced.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub scenario: Scenario,
    pub channels: Option<[ChannelDesign; 2]>,
    /// Why the hybrid design could not be built, when it could not.
    pub hybrid_error: Option<String>,
    pub hybrid: Option<ControllerConfig>,
    pub measurements: MeasurementSet,
    pub init: PlantState,
    pub r_d: Rotation,
    pub seed: u64,
    pub notes: Vec<String>,
    pub paper_exact: bool,
}

fn design_channel(
    a: &Mat3,
    u: Auto<Vec3>,
    k: Auto<f64>,
    delta: Auto<f64>,
    h: usize,
    paper_exact: bool,
    notes: &mut Vec<String>,
) -> Result<(ChannelDesign, WarpedPotential)> {
    let weight = WeightMatrix::new(*a)?;
    let u = match u {
        Auto::Auto => warping::optimal_u(&weight)?.u,
        Auto::Given(v) => v
            .try_normalize()
            .filter(|_| v.norm() > 0.0)
            .ok_or_else(|| Error::Precondition(format!("u{h} is zero")))?,
    };
    let k_bar = warping::k_bound(&weight);
    let (k, policy) = match k {
        Auto::Auto => (warping::default_gain(&weight), GainPolicy::Strict),
        Auto::Given(k) if k.abs() < k_bar => (k, GainPolicy::Strict),
        Auto::Given(k) if paper_exact => {
            notes.push(format!("k{h} = {k} kept above k_bar{h} = {k_bar} (paper-exact)"));
            (k, GainPolicy::ArcsinDomain)
        }
        Auto::Given(k) => {
            let c = warping::clamp_gain(&weight, k);
            notes.push(format!("k{h} = {k} is not below k_bar{h} = {k_bar}; clamped to {c}"));
            (c, GainPolicy::Strict)
        }
    };
    let wp = WarpedPotential::with_policy(weight.clone(), u, vec![k, -k], policy)?;
    let gap = wp.gap()?;
    let delta = match delta {
        Auto::Auto => 0.5 * gap,
        Auto::Given(d) if d <= 0.0 => {
            return Err(Error::Precondition(format!("delta{h} = {d} must be positive")))
        }
        Auto::Given(d) if d < gap => d,
        Auto::Given(d) if paper_exact => {
            notes.push(format!("delta{h} = {d} kept at or above gap{h} = {gap} (paper-exact)"));
            d
        }
        Auto::Given(d) => {
            notes.push(format!("delta{h} = {d} is not below gap{h} = {gap}; clamped to {}", 0.5 * gap));
            0.5 * gap
        }
    };
    Ok((
        ChannelDesign {
            weight,
            u,
            k,
            k_bar,
            gap: Some(gap),
            delta,
        },
        wp,
    ))
}

fn build_measurements(s: &Scenario) -> Result<MeasurementSet> {
    let refs = s
        .refs
        .clone()
        .unwrap_or_else(|| vec![Vec3::E1, Vec3::E2, Vec3::E3]);
    let default_refs = s.refs.is_none();
    let mut rho: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for h in 0..2 {
        rho[h] = match &s.rho[h] {
            Some(r) => r.clone(),
            None => {
                let a = &s.a[h];
                let diagonal = (0..3).all(|i| (0..3).all(|j| i == j || a.m[i][j] == 0.0));
                if !(default_refs && diagonal) {
                    return Err(Error::Precondition(format!(
                        "rho{} must be given unless refs are the default basis and a{} is diagonal",
                        h + 1,
                        h + 1
                    )));
                }
                vec![a.m[0][0], a.m[1][1], a.m[2][2]]
            }
        };
        if rho[h].len() != refs.len() {
            return Err(Error::Precondition(format!(
                "rho{} has {} entries for {} reference vectors",
                h + 1,
                rho[h].len(),
                refs.len()
            )));
        }
    }
    let entries = refs
        .iter()
        .enumerate()
        .map(|(i, &r)| Measurement {
            r,
            b: r,
            rho: [rho[0][i], rho[1][i]],
        })
        .collect();
    let ms = MeasurementSet::new(entries)?.augment(s.aug_rho)?;
    for h in 1..=2 {
        let a = ms.build_a(h)?;
        let err = (a - s.a[h - 1]).frobenius_norm();
        if err > 1e-9 * (1.0 + a.frobenius_norm()) {
            return Err(Error::Precondition(format!(
                "a{h} does not equal Σ rho{h}_i r_i r_iᵀ (difference {err:e})"
            )));
        }
    }
    Ok(ms)
}

fn resolve_attitude(spec: AttitudeSpec, wps: Option<&[WarpedPotential; 2]>) -> Result<Rotation> {
    match spec {
        AttitudeSpec::Fixed(r) => Ok(r),
        AttitudeSpec::Critical { h, dir, q } => {
            let wps = wps.ok_or_else(|| {
                Error::Precondition("critical(...) needs a valid hybrid design".into())
            })?;
            let wp = &wps[h - 1];
            let dirs = wp.directions();
            if dir > dirs.len() {
                return Err(Error::Precondition(format!(
                    "critical({h}, {dir}, {q}): only {} eigendirections",
                    dirs.len()
                )));
            }
            if q > wp.gains().len() {
                return Err(Error::Precondition(format!("critical({h}, {dir}, {q}): no index {q}")));
            }
            let per_dir = wp.gains().len();
            let pts = wp.critical_points()?;
            Ok(pts[(dir - 1) * per_dir + (q - 1)].rotation)
        }
    }
}

impl Scenario {
    pub fn resolve(&self, opts: ResolveOptions) -> Result<Resolved> {
        let mut notes = Vec::new();
        let measurements = build_measurements(self)?;
        let mut design = Vec::new();
        let mut hybrid_error = None;
        for h in 0..2 {
            match design_channel(
                &self.a[h],
                self.u[h],
                self.k[h],
                self.delta[h],
                h + 1,
                opts.paper_exact,
                &mut notes,
            ) {
                Ok(d) => design.push(d),
                Err(e) => {
                    hybrid_error = Some(format!("channel {}: {e}", h + 1));
                    if self.controller == ControllerKind::Hybrid {
                        return Err(e);
                    }
                    break;
                }
            }
        }
        let (channels, wps) = if design.len() == 2 {
            let (c2, w2) = design.pop().unwrap();
            let (c1, w1) = design.pop().unwrap();
            (Some([c1, c2]), Some([w1, w2]))
        } else {
            (None, None)
        };
        let hybrid = match (&channels, &wps) {
            (Some(c), Some([w1, w2])) => Some(ControllerConfig::new_unchecked(
                w1.clone(),
                w2.clone(),
                [c[0].delta, c[1].delta],
            )?),
            _ => None,
        };
        let init = PlantState {
            r: resolve_attitude(self.r0, wps.as_ref())?,
            omega: self.omega0,
            r_hat: resolve_attitude(self.rhat0, wps.as_ref())?,
        };
        let r_d = resolve_attitude(self.rd, wps.as_ref())?;
        Ok(Resolved {
            scenario: self.clone(),
            channels,
            hybrid_error,
            hybrid,
            measurements,
            init,
            r_d,
            seed: opts.seed.unwrap_or(self.seed),
            notes,
            paper_exact: opts.paper_exact,
        })
    }
}

fn fmt_vec(v: &Vec3) -> String {
    format!("{:.17e}, {:.17e}, {:.17e}", v.x, v.y, v.z)
}

fn fmt_mat(m: &Mat3) -> String {
    m.to_row_array()
        .iter()
        .map(|x| format!("{x:.17e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Resolved {
    pub fn sim_config(&self, kind: ControllerKind) -> Result<SimConfig> {
        let mode = match kind {
            ControllerKind::Smooth => ControlMode::Smooth,
            ControllerKind::Hybrid => ControlMode::Hybrid(self.hybrid.clone().ok_or_else(|| {
                Error::Precondition(
                    self.hybrid_error
                        .clone()
                        .unwrap_or_else(|| "no hybrid design".into()),
                )
            })?),
        };
        let s = &self.scenario;
        Ok(SimConfig {
            inertia: s.inertia,
            measurements: self.measurements.clone(),
            mode,
            init: self.init,
            q0: LogicState { q: s.q0 },
            r_d: self.r_d,
            dt: s.dt,
            t_end: s.t_end,
            max_jumps: s.max_jumps,
            max_steps: sim::DEFAULT_MAX_STEPS,
            noise_std: s.noise_std,
            seed: self.seed,
        })
    }

    /// Self-documenting `#` comment block echoed ahead of CSV output.
    pub fn header(&self, kind: ControllerKind) -> String {
        let s = &self.scenario;
        let mut out = String::new();
        let _ = writeln!(out, "# warpsyn {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# controller = {}", kind.name());
        let _ = writeln!(out, "# paper_exact = {}", self.paper_exact);
        for h in 0..2 {
            let _ = writeln!(out, "# a{} = {}", h + 1, fmt_mat(&s.a[h]));
        }
        match &self.channels {
            Some(ch) => {
                for (h, c) in ch.iter().enumerate() {
                    let n = h + 1;
                    let _ = writeln!(out, "# u{n} = {}", fmt_vec(&c.u));
                    let _ = writeln!(out, "# k{n} = {:.17e}", c.k);
                    let _ = writeln!(out, "# k_bar{n} = {:.17e}", c.k_bar);
                    if let Some(g) = c.gap {
                        let _ = writeln!(out, "# gap{n} = {g:.17e}");
                    }
                    let _ = writeln!(out, "# delta{n} = {:.17e}", c.delta);
                }
            }
            None => {
                let _ = writeln!(
                    out,
                    "# hybrid design unavailable: {}",
                    self.hybrid_error.as_deref().unwrap_or("unknown")
                );
            }
        }
        let _ = writeln!(out, "# inertia = {}", fmt_mat(&s.inertia));
        for (i, m) in self.measurements.entries().iter().enumerate() {
            let _ = writeln!(
                out,
                "# ref{} = {} ; rho = {:.17e}, {:.17e}{}",
                i + 1,
                fmt_vec(&m.r),
                m.rho[0],
                m.rho[1],
                if self.measurements.is_derived(i) { " ; cross product" } else { "" }
            );
        }
        let _ = writeln!(out, "# R0 = {}", fmt_mat(self.init.r.matrix()));
        let _ = writeln!(out, "# omega0 = {}", fmt_vec(&self.init.omega));
        let _ = writeln!(out, "# Rhat0 = {}", fmt_mat(self.init.r_hat.matrix()));
        let _ = writeln!(out, "# Rd = {}", fmt_mat(self.r_d.matrix()));
        let _ = writeln!(out, "# q0 = {}, {}", s.q0[0], s.q0[1]);
        let _ = writeln!(out, "# dt = {:.17e}", s.dt);
        let _ = writeln!(out, "# t_end = {:.17e}", s.t_end);
        let _ = writeln!(out, "# noise_std = {:.17e}", s.noise_std);
        let _ = writeln!(out, "# seed = {}", self.seed);
        for n in &self.notes {
            let _ = writeln!(out, "# note: {n}");
        }
        out
    }
}
