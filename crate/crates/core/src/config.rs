//! Flat `key = value` run configuration.

use crate::grid::GridGeometry;
use crate::kernels::C_K;
use crate::particles::{DriftMethod, InitialDataSpec, InitialKind};
use crate::{Error, Result, Vec2};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Unsigned,
    Signed,
}

/// Every parameter of a run. Built by [`validate_config`] or by editing
/// [`SimConfig::default`] and calling [`SimConfig::check`].
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n_particles: usize,
    pub beta: f64,
    pub alpha: f64,
    pub p: f64,
    pub nu: f64,
    /// Resolved drift cutoff.
    pub m: f64,
    pub m_auto: bool,
    pub t_final: f64,
    /// Particle time step.
    pub dt: f64,
    /// Reference-solver time step.
    pub pde_dt: f64,
    pub geometry: GridGeometry,
    pub snapshot_times: Vec<f64>,
    pub seeds: Vec<u64>,
    pub mode: Mode,
    pub initial: InitialDataSpec,
    /// Half-width of the box for sup-norm errors.
    pub r_box: f64,
    pub drift: DriftMethod,
    pub n_list: Vec<usize>,
    pub q: f64,
    pub gamma: f64,
    pub q_prime: f64,
    pub delta: f64,
    /// Fréchet smoothness exponent, in `(2/p, alpha)`.
    pub eta: f64,
    pub phi_center: Vec2,
    pub phi_radius: f64,
    /// Largest tolerated fraction of `|ξ|` mass in the boundary band.
    pub boundary_tol: f64,
    pub allow_inadmissible: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        let t = 0.5;
        let initial = InitialDataSpec::gaussian([0.0, 0.0], 0.5);
        let m = C_K * (1.0 + 1.0 / (2.0 * std::f64::consts::PI * 0.25));
        Self {
            n_particles: 1000,
            beta: 0.15,
            alpha: 0.6,
            p: 4.0,
            nu: 0.1,
            m,
            m_auto: true,
            t_final: t,
            dt: t / 2048.0,
            pde_dt: t / 256.0,
            geometry: GridGeometry::new(256, 4.0).expect("valid default grid"),
            snapshot_times: vec![0.0, 0.125, 0.25, 0.375, 0.5],
            seeds: (0..8).collect(),
            mode: Mode::Unsigned,
            initial,
            r_box: 1.5,
            drift: DriftMethod::Grid,
            n_list: vec![1000, 4000, 16_000],
            q: 2.0,
            gamma: 0.4,
            q_prime: 3.0,
            delta: 0.05,
            eta: 0.55,
            phi_center: [0.0, 0.0],
            phi_radius: 1.0,
            boundary_tol: 1e-8,
            allow_inadmissible: false,
        }
    }
}

/// `1/(4 + 2α - 4/p)`, the upper limit on `β`.
pub fn beta_limit(alpha: f64, p: f64) -> f64 {
    1.0 / (4.0 + 2.0 * alpha - 4.0 / p)
}

fn multiple_of(t: f64, dt: f64) -> Option<usize> {
    let k = (t / dt).round();
    ((t - k * dt).abs() <= 1e-9 * dt.max(t.abs())).then_some(k as usize)
}

impl SimConfig {
    /// Checks the admissibility inequalities and the internal consistency of
    /// the run parameters.
    pub fn check(&self) -> Result<()> {
        let fail = |inequality: &str, lhs: f64, rhs: f64| {
            Err(Error::Admissibility {
                inequality: inequality.to_string(),
                lhs,
                rhs,
            })
        };
        if !(self.p > 2.0) {
            return fail("p > 2", self.p, 2.0);
        }
        if !(2.0 / self.p < self.alpha) {
            return fail("2/p < alpha", 2.0 / self.p, self.alpha);
        }
        if !(self.alpha < 1.0) {
            return fail("alpha < 1", self.alpha, 1.0);
        }
        if !self.allow_inadmissible {
            if !(self.beta > 0.0) {
                return fail("0 < beta", 0.0, self.beta);
            }
            let limit = beta_limit(self.alpha, self.p);
            if !(self.beta < limit) {
                return fail("beta < 1/(4 + 2 alpha - 4/p)", self.beta, limit);
            }
        } else if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!("beta = {} must lie in [0, 1)", self.beta)));
        }
        let invalid = |m: String| Err(Error::InvalidParameter(m));
        if self.n_particles == 0 || self.n_list.contains(&0) {
            return invalid("particle counts must be at least 1".into());
        }
        if !(self.nu > 0.0) {
            return invalid(format!("nu = {} must be positive", self.nu));
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return invalid(format!("M = {} must be finite and nonnegative", self.m));
        }
        if !(self.t_final >= 0.0) {
            return invalid(format!("T = {} must be nonnegative", self.t_final));
        }
        for (name, step) in [("dt", self.dt), ("pde_dt", self.pde_dt)] {
            if !(step > 0.0) {
                return invalid(format!("{name} = {step} must be positive"));
            }
            if multiple_of(self.t_final, step).is_none() {
                return invalid(format!("{name} = {step} does not divide T = {}", self.t_final));
            }
        }
        if self.snapshot_times.is_empty() {
            return invalid("at least one snapshot time is required".into());
        }
        for &t in &self.snapshot_times {
            if !(0.0..=self.t_final).contains(&t) {
                return invalid(format!("snapshot time {t} lies outside [0, T]"));
            }
            if multiple_of(t, self.dt).is_none() || multiple_of(t, self.pde_dt).is_none() {
                return invalid(format!("snapshot time {t} is not a multiple of dt and pde_dt"));
            }
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("snapshot times must be strictly increasing".into());
        }
        if self.seeds.is_empty() {
            return invalid("at least one seed is required".into());
        }
        match (self.mode, self.initial.is_signed()) {
            (Mode::Signed, false) => return invalid("signed mode needs gamma_minus > 0".into()),
            (Mode::Unsigned, true) => return invalid("unsigned mode needs gamma_minus = 0".into()),
            _ => {}
        }
        if !(self.r_box > 0.0 && self.r_box <= self.geometry.half_width()) {
            return invalid(format!("R_box = {} must lie in (0, L]", self.r_box));
        }
        if !(self.phi_radius > 0.0) {
            return invalid(format!("phi_radius = {} must be positive", self.phi_radius));
        }
        if !(self.gamma > 0.0 && self.gamma < 0.5 && self.q >= 2.0 && self.q_prime >= 2.0) {
            return invalid(format!(
                "need 0 < gamma < 1/2 and q, q' ≥ 2, got gamma = {}, q = {}, q' = {}",
                self.gamma, self.q, self.q_prime
            ));
        }
        if self.gamma * self.q_prime <= 1.0 {
            return Err(Error::ConditionViolation {
                product: self.gamma * self.q_prime,
            });
        }
        if !(self.delta > 0.0 && self.delta <= 0.2) {
            return invalid(format!("delta = {} must lie in (0, 0.2]", self.delta));
        }
        if !(2.0 / self.p < self.eta && self.eta < self.alpha) {
            return invalid(format!("eta = {} must lie in (2/p, alpha)", self.eta));
        }
        if !(self.boundary_tol > 0.0) {
            return invalid(format!("boundary_tol = {} must be positive", self.boundary_tol));
        }
        Ok(())
    }

    /// `c_K (1 + ‖ξ^ini‖_∞)`.
    pub fn auto_cutoff(&self) -> Result<f64> {
        let sup = self.initial.sup_norm(&self.geometry)?;
        if !sup.is_finite() {
            return Err(Error::InvalidParameter(
                "M = auto needs bounded initial vorticity".into(),
            ));
        }
        Ok(C_K * (1.0 + sup))
    }

    pub fn step_count(&self) -> usize {
        multiple_of(self.t_final, self.dt).unwrap_or_else(|| (self.t_final / self.dt).round() as usize)
    }

    /// Particle step indices at which snapshots are taken.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        self.snapshot_times
            .iter()
            .map(|&t| (t / self.dt).round() as usize)
            .collect()
    }

    /// Canonical `key = value` rendering; parsing it reproduces the config.
    pub fn render(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let pt = |p: Vec2| format!("{:?},{:?}", p[0], p[1]);
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("N", self.n_particles.to_string());
        put("beta", format!("{:?}", self.beta));
        put("alpha", format!("{:?}", self.alpha));
        put("p", format!("{:?}", self.p));
        put("nu", format!("{:?}", self.nu));
        put("M", if self.m_auto { "auto".into() } else { format!("{:?}", self.m) });
        put("T", format!("{:?}", self.t_final));
        put("dt", format!("{:?}", self.dt));
        put("pde_dt", format!("{:?}", self.pde_dt));
        put("n", self.geometry.n().to_string());
        put("L", format!("{:?}", self.geometry.half_width()));
        put("snapshot_times", list(&self.snapshot_times));
        put("seeds", self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
        put(
            "mode",
            match self.mode {
                Mode::Unsigned => "unsigned".into(),
                Mode::Signed => "signed".into(),
            },
        );
        match &self.initial.kind {
            InitialKind::GaussianVortex { center, sigma } => {
                put("initial", "gaussian".into());
                put("center", pt(*center));
                put("sigma", format!("{sigma:?}"));
            }
            InitialKind::Dipole {
                plus_center,
                minus_center,
                sigma,
            } => {
                put("initial", "dipole".into());
                put("plus_center", pt(*plus_center));
                put("minus_center", pt(*minus_center));
                put("sigma", format!("{sigma:?}"));
            }
            InitialKind::PointMass { center } => {
                put("initial", "point".into());
                put("center", pt(*center));
            }
            InitialKind::CustomGrid { .. } => put("initial", "custom".into()),
        }
        put("gamma_plus", format!("{:?}", self.initial.gamma_plus));
        put("gamma_minus", format!("{:?}", self.initial.gamma_minus));
        put("R_box", format!("{:?}", self.r_box));
        put(
            "drift",
            match self.drift {
                DriftMethod::Grid => "grid".into(),
                DriftMethod::Direct => "direct".into(),
            },
        );
        put("N_list", self.n_list.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
        put("q", format!("{:?}", self.q));
        put("gamma", format!("{:?}", self.gamma));
        put("q_prime", format!("{:?}", self.q_prime));
        put("delta", format!("{:?}", self.delta));
        put("eta", format!("{:?}", self.eta));
        put("phi_center", pt(self.phi_center));
        put("phi_radius", format!("{:?}", self.phi_radius));
        put("boundary_tol", format!("{:?}", self.boundary_tol));
        put("allow_inadmissible", self.allow_inadmissible.to_string());
        out
    }

    /// SHA-256 of the canonical rendering, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.render().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Parses and checks a config. `M = auto` resolves to `c_K (1 + ‖ξ^ini‖_∞)`.
pub fn validate_config(text: &str) -> Result<SimConfig> {
    validate_config_with(text, false)
}

/// As [`validate_config`]; `allow_inadmissible` lets `β` break its upper
/// limit and is recorded in the result.
pub fn validate_config_with(text: &str, allow_inadmissible: bool) -> Result<SimConfig> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected key = value, found {line:?}"),
        })?;
        let key = k.trim().to_string();
        if entries.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("duplicate key {key:?}"),
            });
        }
    }
    let mut p = Parser { entries };
    let mut c = SimConfig::default();
    c.n_particles = p.take("N", c.n_particles)?;
    c.beta = p.take("beta", c.beta)?;
    c.alpha = p.take("alpha", c.alpha)?;
    c.p = p.take("p", c.p)?;
    c.nu = p.take("nu", c.nu)?;
    let t_given = p.entries.contains_key("T");
    c.t_final = p.take("T", c.t_final)?;
    // a zero horizon keeps the default steps, which divide it trivially
    let horizon = if c.t_final > 0.0 { c.t_final } else { SimConfig::default().t_final };
    c.dt = p.take("dt", horizon / 2048.0)?;
    c.pde_dt = p.take("pde_dt", horizon / 256.0)?;
    let n = p.take("n", c.geometry.n())?;
    let l = p.take("L", c.geometry.half_width())?;
    c.geometry = GridGeometry::new(n, l).map_err(|e| Error::Parse {
        line: p.line("n").or(p.line("L")).unwrap_or(0),
        message: e.to_string(),
    })?;
    let default_snaps: Vec<f64> = if t_given {
        let mut v: Vec<f64> = (0..=4).map(|k| c.t_final * k as f64 / 4.0).collect();
        v.dedup();
        v
    } else {
        c.snapshot_times.clone()
    };
    c.snapshot_times = p.take_list("snapshot_times", default_snaps)?;
    c.seeds = p.take_list("seeds", c.seeds.clone())?;
    c.n_list = p.take_list("N_list", c.n_list.clone())?;
    let initial = p.take_word("initial", "gaussian")?;
    let sigma = p.take("sigma", 0.5)?;
    let gamma_plus = p.take("gamma_plus", 1.0)?;
    let default_minus = if initial == "dipole" { gamma_plus } else { 0.0 };
    let gamma_minus = p.take("gamma_minus", default_minus)?;
    let kind = match initial.as_str() {
        "gaussian" => InitialKind::GaussianVortex {
            center: p.take_point("center", [0.0, 0.0])?,
            sigma,
        },
        "dipole" => InitialKind::Dipole {
            plus_center: p.take_point("plus_center", [0.5, 0.0])?,
            minus_center: p.take_point("minus_center", [-0.5, 0.0])?,
            sigma,
        },
        "point" => InitialKind::PointMass {
            center: p.take_point("center", [0.0, 0.0])?,
        },
        other => return Err(p.error("initial", format!("unknown initial data {other:?}"))),
    };
    c.initial = InitialDataSpec {
        kind,
        gamma_plus,
        gamma_minus,
    };
    let default_mode = if gamma_minus > 0.0 { "signed" } else { "unsigned" };
    c.mode = match p.take_word("mode", default_mode)?.as_str() {
        "unsigned" => Mode::Unsigned,
        "signed" => Mode::Signed,
        other => return Err(p.error("mode", format!("unknown mode {other:?}"))),
    };
    c.r_box = p.take("R_box", c.r_box)?;
    c.drift = match p.take_word("drift", "grid")?.as_str() {
        "grid" => DriftMethod::Grid,
        "direct" => DriftMethod::Direct,
        other => return Err(p.error("drift", format!("unknown drift method {other:?}"))),
    };
    c.q = p.take("q", c.q)?;
    c.gamma = p.take("gamma", c.gamma)?;
    c.q_prime = p.take("q_prime", c.q_prime)?;
    c.delta = p.take("delta", c.delta)?;
    c.eta = p.take("eta", c.eta)?;
    c.phi_center = p.take_point("phi_center", c.phi_center)?;
    c.phi_radius = p.take("phi_radius", c.phi_radius)?;
    c.boundary_tol = p.take("boundary_tol", c.boundary_tol)?;
    c.allow_inadmissible = p.take("allow_inadmissible", false)? || allow_inadmissible;
    let m = p.take_word("M", "auto")?;
    let m_line = p.line("M");
    if let Some((key, (line, _))) = p.entries.iter().next() {
        return Err(Error::Parse {
            line: *line,
            message: format!("unknown key {key:?}"),
        });
    }
    if m == "auto" {
        c.m_auto = true;
        c.m = c.auto_cutoff()?;
    } else {
        c.m_auto = false;
        c.m = m.parse().map_err(|_| Error::Parse {
            line: m_line.unwrap_or(0),
            message: format!("M must be a number or auto, found {m:?}"),
        })?;
    }
    c.check()?;
    Ok(c)
}

struct Parser {
    entries: BTreeMap<String, (usize, String)>,
}

impl Parser {
    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.0)
    }

    fn error(&self, key: &str, message: String) -> Error {
        Error::Parse {
            line: self.line(key).unwrap_or(0),
            message,
        }
    }

    fn take_word(&mut self, key: &str, default: &str) -> Result<String> {
        Ok(self.entries.remove(key).map(|e| e.1).unwrap_or_else(|| default.to_string()))
    }

    fn take<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.entries.remove(key) {
            None => Ok(default),
            Some((line, v)) => v.parse().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse {key} = {v:?}"),
            }),
        }
    }

    fn take_list<T: std::str::FromStr>(&mut self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.entries.remove(key) {
            None => Ok(default),
            Some((line, v)) => v
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("cannot parse {key} entry {s:?}"),
                    })
                })
                .collect(),
        }
    }

    fn take_point(&mut self, key: &str, default: Vec2) -> Result<Vec2> {
        let line = self.line(key).unwrap_or(0);
        let v: Vec<f64> = self.take_list(key, default.to_vec())?;
        match v.as_slice() {
            [x, y] => Ok([*x, *y]),
            _ => Err(Error::Parse {
                line,
                message: format!("{key} needs two coordinates"),
            }),
        }
    }
}
