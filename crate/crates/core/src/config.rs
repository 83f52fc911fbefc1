//! Sectioned `key = value` run configuration.
//!
//! ```text
//! [params]
//! rho1 = 1
//! ...
//! [ic]
//! phi0 = -3/16*x^2 + 3/4*x
//! ```
//!
//! `#` starts a comment. Every parameter is required, `ic` and `forcing`
//! entries default to `0`, and unknown keys are rejected.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::integrate::InterfaceScheme;
use crate::params::PhysicalParams;
use crate::state::{ForcingSet, InitialData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Bresse,
    Timoshenko,
    VonKarman,
}

impl std::str::FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bresse" => Ok(Self::Bresse),
            "timoshenko" => Ok(Self::Timoshenko),
            "vonkarman" | "von-karman" => Ok(Self::VonKarman),
            other => Err(format!("unknown model `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConfig {
    pub t_end: f64,
    pub safety: f64,
    pub output_stride: usize,
    /// Steps between full-field snapshots; `None` disables snapshots.
    pub snapshot_stride: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub n_per_unit: usize,
    pub time: TimeConfig,
    pub model: ModelKind,
    pub interface: InterfaceScheme,
    pub ic: InitialData,
    pub forcing: ForcingSet,
    pub probes: Vec<f64>,
    pub outdir: PathBuf,
}

impl RunConfig {
    /// Parameters as seen by the selected model (`l = 0` for Timoshenko).
    pub fn effective_params(&self) -> PhysicalParams {
        match self.model {
            ModelKind::Timoshenko => PhysicalParams {
                l: 0.0,
                ..self.params
            },
            _ => self.params,
        }
    }
}

const PARAM_KEYS: [&str; 18] = [
    "rho1", "rho2", "beta1", "beta2", "k1", "k2", "sigma", "nu1", "nu2", "alpha1", "alpha2",
    "gamma", "delta", "mu", "lambda", "l", "L", "L0",
];

fn param_slot<'a>(p: &'a mut PhysicalParams, key: &str) -> Option<&'a mut f64> {
    Some(match key {
        "rho1" => &mut p.rho1,
        "rho2" => &mut p.rho2,
        "beta1" => &mut p.beta1,
        "beta2" => &mut p.beta2,
        "k1" => &mut p.k1,
        "k2" => &mut p.k2,
        "sigma" => &mut p.sigma,
        "nu1" => &mut p.nu1,
        "nu2" => &mut p.nu2,
        "alpha1" => &mut p.alpha1,
        "alpha2" => &mut p.alpha2,
        "gamma" => &mut p.gamma,
        "delta" => &mut p.delta,
        "mu" => &mut p.mu,
        "lambda" => &mut p.lambda,
        "l" => &mut p.l,
        "L" => &mut p.length,
        "L0" => &mut p.interface,
        _ => return None,
    })
}

struct Ctx<'a> {
    origin: &'a str,
    line: usize,
}

impl Ctx<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::ConfigSyntax {
            path: self.origin.to_string(),
            line: self.line,
            message: message.into(),
        }
    }

    fn number(&self, key: &str, value: &str) -> Result<f64> {
        let v: f64 = value
            .parse()
            .map_err(|_| self.err(format!("`{key}` expects a number, got `{value}`")))?;
        if !v.is_finite() {
            return Err(self.err(format!("`{key}` must be finite")));
        }
        Ok(v)
    }

    fn count(&self, key: &str, value: &str) -> Result<usize> {
        value
            .parse()
            .map_err(|_| self.err(format!("`{key}` expects a non-negative integer, got `{value}`")))
    }

    fn expr(&self, value: &str) -> Result<Expr> {
        parse(value).map_err(|error| Error::Expression {
            source_text: value.to_string(),
            error,
        })
    }
}

/// Parses configuration text. `origin` is only used in error messages.
pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig> {
    let mut params = PhysicalParams::unit();
    let mut seen_params = BTreeSet::new();
    let mut n_per_unit = None;
    let mut t_end = 10.0;
    let mut safety = 0.9;
    let mut output_stride = 1;
    let mut snapshot_stride = None;
    let mut model = ModelKind::Bresse;
    let mut interface = InterfaceScheme::default();
    let mut ic = InitialData::default();
    let mut forcing = ForcingSet::default();
    let mut probes = vec![2.0, 6.0];
    let mut outdir = PathBuf::from("out");
    let mut section: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let ctx = Ctx {
            origin,
            line: idx + 1,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ctx.err("unterminated section header"))?
                .trim();
            match name {
                "params" | "grid" | "time" | "model" | "ic" | "forcing" | "probes" | "output" => {
                    section = Some(name.to_string())
                }
                other => return Err(ctx.err(format!("unknown section `{other}`"))),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ctx.err("expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ctx.err("empty key"));
        }
        let sec = section
            .as_deref()
            .ok_or_else(|| ctx.err("key outside of any section"))?;
        let unknown = || Error::UnknownKey(key.to_string());
        match sec {
            "params" => {
                let v = ctx.number(key, value)?;
                *param_slot(&mut params, key).ok_or_else(unknown)? = v;
                seen_params.insert(key.to_string());
            }
            "grid" => match key {
                "n_per_unit" => n_per_unit = Some(ctx.count(key, value)?),
                _ => return Err(unknown()),
            },
            "time" => match key {
                "t_end" => t_end = ctx.number(key, value)?,
                "safety" => safety = ctx.number(key, value)?,
                "output_stride" => output_stride = ctx.count(key, value)?,
                "snapshot_stride" => {
                    let n = ctx.count(key, value)?;
                    snapshot_stride = (n > 0).then_some(n);
                }
                _ => return Err(unknown()),
            },
            "model" => match key {
                "kind" => model = value.parse().map_err(|m: String| ctx.err(m))?,
                "interface" => interface = value.parse().map_err(|m: String| ctx.err(m))?,
                _ => return Err(unknown()),
            },
            "ic" => *ic.get_mut(key).ok_or_else(unknown)? = ctx.expr(value)?,
            "forcing" => *forcing.get_mut(key).ok_or_else(unknown)? = ctx.expr(value)?,
            "probes" => match key {
                "x" => {
                    probes = value
                        .split(',')
                        .map(|s| ctx.number(key, s.trim()))
                        .collect::<Result<_>>()?
                }
                _ => return Err(unknown()),
            },
            "output" => match key {
                "dir" => outdir = PathBuf::from(value),
                _ => return Err(unknown()),
            },
            _ => unreachable!(),
        }
    }

    if let Some(missing) = PARAM_KEYS.iter().find(|k| !seen_params.contains(**k)) {
        return Err(Error::MissingKey(format!("params.{missing}")));
    }
    let n_per_unit = n_per_unit.ok_or_else(|| Error::MissingKey("grid.n_per_unit".into()))?;
    if !(safety > 0.0) {
        return Err(Error::InvalidConfig("time.safety must be positive".into()));
    }
    if !(t_end >= 0.0) {
        return Err(Error::InvalidConfig("time.t_end must be non-negative".into()));
    }
    Ok(RunConfig {
        params,
        n_per_unit,
        time: TimeConfig {
            t_end,
            safety,
            output_stride: output_stride.max(1),
            snapshot_stride,
        },
        model,
        interface,
        ic,
        forcing,
        probes,
        outdir,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}

/// Built-in configuration by name (`paper-5.1`, `paper-5.2`, with or without
/// the `.cfg` suffix).
pub fn preset(name: &str) -> Option<RunConfig> {
    let name = name.strip_suffix(".cfg").unwrap_or(name);
    let text = match name {
        "paper-5.1" => include_str!("../presets/paper-5.1.cfg"),
        "paper-5.2" => include_str!("../presets/paper-5.2.cfg"),
        _ => return None,
    };
    Some(parse_config(text, name).expect("built-in preset parses"))
}

/// Loads `arg` from disk, falling back to a built-in preset of that name.
pub fn load_config_or_preset(arg: &str) -> Result<RunConfig> {
    let path = Path::new(arg);
    if path.exists() {
        return load_config(path);
    }
    preset(arg).ok_or_else(|| {
        Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or preset"),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[params]\nrho1=1\nrho2=1\nbeta1=1\nbeta2=1\nk1=1\nk2=1\nsigma=1\n\
        nu1=1\nnu2=1\nalpha1=1\nalpha2=1\ngamma=1\ndelta=1\nmu=1\nlambda=1\nl=0\nL=1\nL0=0.5\n\
        [grid]\nn_per_unit = 8\n";

    #[test]
    fn preset_5_1() {
        let c = preset("paper-5.1").unwrap();
        assert_eq!(c.params.l, 0.1);
        assert_eq!(c.params.k2, 4.0);
        assert_eq!(c.probes, vec![2.0, 6.0]);
        assert_eq!(c.time.t_end, 10.0);
        assert!((c.ic.phi0.eval(2.0) - 0.75).abs() < 1e-15);
        assert_eq!(c.forcing.p1.eval(1.0), 1f64.sin());
        assert_eq!(c.forcing.h2, Expr::zero());
    }

    #[test]
    fn preset_5_2() {
        let c = preset("paper-5.2.cfg").unwrap();
        assert_eq!((c.params.l, c.params.k1, c.params.k2), (0.1, 0.4, 0.1));
        assert!((c.ic.phi0.eval(2.0) - (-13.0 / 40.0 + 9.0 / 5.0 - 23.0 / 10.0)).abs() < 1e-14);
        assert!((c.ic.phi0.eval(2.0) + 0.825).abs() < 1e-14);
        assert_eq!(c.forcing.r1.eval(1.0), 5.0);
    }

    #[test]
    fn empty_sections_default_to_zero() {
        let c = parse_config(&format!("{MINIMAL}[ic]\n[forcing]\n"), "t").unwrap();
        assert_eq!(c.ic, InitialData::default());
        assert_eq!(c.forcing, ForcingSet::default());
    }

    #[test]
    fn unknown_key_rejected() {
        let r = parse_config(&MINIMAL.replace("rho2=1", "rho2=1\nrho3=1"), "t");
        assert!(matches!(r, Err(Error::UnknownKey(k)) if k == "rho3"));
        let r = parse_config(&format!("{MINIMAL}[ic]\nchi0 = x\n"), "t");
        assert!(matches!(r, Err(Error::UnknownKey(k)) if k == "chi0"));
    }

    #[test]
    fn missing_parameter() {
        let r = parse_config(&MINIMAL.replace("mu=1\n", ""), "t");
        assert!(matches!(r, Err(Error::MissingKey(k)) if k == "params.mu"));
    }

    #[test]
    fn syntax_errors_carry_line() {
        let r = parse_config("[params]\nrho1 1\n", "cfg");
        assert!(matches!(r, Err(Error::ConfigSyntax { line: 2, .. })));
        let r = parse_config(&format!("{MINIMAL}[ic]\nphi0 = sin(x\n"), "cfg");
        assert!(matches!(r, Err(Error::Expression { .. })));
    }

    #[test]
    fn model_and_probes() {
        let c = parse_config(
            &format!("{MINIMAL}[model]\nkind = timoshenko # straight\ninterface = one-sided\n[probes]\nx = 0.25, 0.75\n"),
            "t",
        )
        .unwrap();
        assert_eq!(c.model, ModelKind::Timoshenko);
        assert_eq!(c.interface, InterfaceScheme::OneSided);
        assert_eq!(c.probes, vec![0.25, 0.75]);
        assert_eq!(c.effective_params().l, 0.0);
    }
}
