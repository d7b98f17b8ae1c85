//! Run configuration as flat `key = value` text.
//!
//! Lines starting with `#` are comments. Lists are comma separated; a state
//! is four blank-separated numbers `u v p ρ`. All quantities are
//! dimensionless (the background speed and pressure set the scales).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{GasModel, GasState};
use crate::profile::InitialProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Perturbation {
    None,
    Random { eps: f64, n: usize, support: f64 },
    Explicit { breakpoints: Vec<f64>, states: Vec<GasState> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub gas: GasModel,
    /// `ū`, the speed of the background flow `Ū⁺ = (ū, 0, p̄, ρ̄⁺)`.
    pub u_bar: f64,
    /// `p̄`, the pressure of the background and of the still gas.
    pub p_bar: f64,
    pub rho_plus: f64,
    /// Density of the still gas; recorded, enters nothing else.
    pub rho_minus: f64,
    pub perturbation: Perturbation,
    pub seed: u64,
    pub deltas: Vec<f64>,
    pub x_max: f64,
    pub kappa: f64,
    /// `None` means calibrated from `K₂` on the ball.
    pub kplus: Option<f64>,
    /// Smallness threshold `μ` on the total weighted strength.
    pub mu: f64,
    pub c0_eps0: f64,
    pub q_drop_factor: f64,
    /// Radius of the neighbourhood of `Ū⁺` where Riemann data are accepted.
    pub ball: f64,
    pub negligible: f64,
    pub max_events: usize,
    /// `x` positions of exported slices and of the distance table.
    pub slices: Vec<f64>,
    pub weak_s: f64,
    pub weak_t: f64,
    /// L¹ window `Θ`; `None` selects the default.
    pub theta: Option<f64>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            gas: GasModel::default(),
            u_bar: 2.0,
            p_bar: 1.0,
            rho_plus: 1.0,
            rho_minus: 1.0,
            perturbation: Perturbation::Random {
                eps: 0.01,
                n: 8,
                support: 1.0,
            },
            seed: 0,
            deltas: vec![0.01],
            x_max: 20.0,
            kappa: 100.0,
            kplus: None,
            mu: 0.01,
            c0_eps0: 0.25,
            q_drop_factor: 0.25,
            ball: 0.1,
            negligible: 1e-10,
            max_events: 200_000,
            slices: vec![0.0, 5.0, 10.0, 20.0],
            weak_s: 0.0,
            weak_t: 5.0,
            theta: None,
            out: PathBuf::from("out"),
        }
    }
}

fn num(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: cannot read `{v}` as a number")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn states(key: &str, v: &str) -> Result<Vec<GasState>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let xs: Vec<f64> = s.split_whitespace().map(|t| num(key, t)).collect::<Result<_>>()?;
            match xs[..] {
                [u, v, p, rho] => Ok(GasState::new(u, v, p, rho)),
                _ => Err(Error::Config(format!("{key}: a state needs `u v p rho`, got `{s}`"))),
            }
        })
        .collect()
}

impl RunConfig {
    pub fn background(&self) -> GasState {
        GasState::new(self.u_bar, 0.0, self.p_bar, self.rho_plus)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{}`", no + 1, k.trim())));
            }
        }
        let mut c = RunConfig::default();
        let (mut gamma, mut kappa_eos, mut c_v) = (c.gas.gamma, c.gas.kappa_eos, c.gas.c_v);
        let mut kind = String::from("random");
        let (mut eps, mut n, mut support) = (0.01, 8usize, 1.0);
        let mut bps = vec![];
        let mut sts = vec![];
        for (k, v) in &kv {
            let k = k.as_str();
            match k {
                "gamma" => gamma = num(k, v)?,
                "kappa_eos" => kappa_eos = num(k, v)?,
                "c_v" => c_v = num(k, v)?,
                "u_bar" => c.u_bar = num(k, v)?,
                "p_bar" => c.p_bar = num(k, v)?,
                "rho_plus" => c.rho_plus = num(k, v)?,
                "rho_minus" => c.rho_minus = num(k, v)?,
                "perturbation" => kind = v.clone(),
                "eps" => eps = num(k, v)?,
                "n" => n = num(k, v)? as usize,
                "support" => support = num(k, v)?,
                "breakpoints" => bps = list(k, v)?,
                "states" => sts = states(k, v)?,
                "seed" => {
                    c.seed = v
                        .parse()
                        .map_err(|_| Error::Config(format!("seed: `{v}` is not an integer")))?
                }
                "delta" => c.deltas = list(k, v)?,
                "x_max" => c.x_max = num(k, v)?,
                "kappa" => c.kappa = num(k, v)?,
                "kplus" => c.kplus = Some(num(k, v)?),
                "mu" => c.mu = num(k, v)?,
                "c0_eps0" => c.c0_eps0 = num(k, v)?,
                "q_drop_factor" => c.q_drop_factor = num(k, v)?,
                "ball" => c.ball = num(k, v)?,
                "negligible" => c.negligible = num(k, v)?,
                "max_events" => c.max_events = num(k, v)? as usize,
                "slices" => c.slices = list(k, v)?,
                "weak_s" => c.weak_s = num(k, v)?,
                "weak_t" => c.weak_t = num(k, v)?,
                "theta" => c.theta = Some(num(k, v)?),
                "out" => c.out = PathBuf::from(v),
                _ => return Err(Error::Config(format!("unknown key `{k}`"))),
            }
        }
        c.gas = GasModel::new(gamma, kappa_eos, c_v)?;
        c.perturbation = match kind.as_str() {
            "none" => Perturbation::None,
            "random" => Perturbation::Random { eps, n, support },
            "explicit" => Perturbation::Explicit {
                breakpoints: bps,
                states: sts,
            },
            other => return Err(Error::Config(format!("unknown perturbation `{other}`"))),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bg = self.background();
        let c = self.gas.sound_speed(&bg)?;
        if !(self.u_bar > c) {
            return Err(Error::Config(format!(
                "background is not supersonic: u = {} <= c = {c}",
                self.u_bar
            )));
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::Config("delta must be a list of positive numbers".into()));
        }
        if !(self.x_max > 0.0) {
            return Err(Error::Config("x_max must be positive".into()));
        }
        if !(0.0 <= self.weak_s && self.weak_s < self.weak_t && self.weak_t <= self.x_max) {
            return Err(Error::Config("need 0 <= weak_s < weak_t <= x_max".into()));
        }
        if let Perturbation::Random { eps, n, support } = self.perturbation {
            if !(eps >= 0.0 && support > 0.0 && n > 0) {
                return Err(Error::Config("random perturbation needs eps >= 0, n > 0, support > 0".into()));
            }
            if eps > self.mu.max(self.ball) {
                return Err(Error::Config(format!(
                    "eps = {eps} exceeds the smallness threshold {}",
                    self.mu.max(self.ball)
                )));
            }
        }
        Ok(())
    }

    pub fn profile(&self) -> Result<InitialProfile> {
        let bg = self.background();
        match &self.perturbation {
            Perturbation::None => Ok(InitialProfile::uniform(bg)),
            Perturbation::Random { eps, n, support } => {
                Ok(InitialProfile::random(bg, *eps, *n, *support, self.seed))
            }
            Perturbation::Explicit { breakpoints, states } => {
                InitialProfile::new(breakpoints.clone(), states.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::parse("# comment\ndelta = 0.04, 0.02,0.01\nseed = 7\nkplus = 3\n").unwrap();
        assert_eq!(c.deltas, vec![0.04, 0.02, 0.01]);
        assert_eq!(c.seed, 7);
        assert_eq!(c.kplus, Some(3.0));
        assert_eq!(c.x_max, 20.0);
        assert_eq!(c.background(), GasState::new(2.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn explicit_states() {
        let c = RunConfig::parse("perturbation = explicit\nbreakpoints = 1.0\nstates = 2 0 1 1, 2 0 1.02 1\n").unwrap();
        let p = c.profile().unwrap();
        assert_eq!(p.tail().p, 1.02);
        assert!(RunConfig::parse("perturbation = explicit\nbreakpoints = 1.0\nstates = 2 0 1\n").is_err());
    }

    #[test]
    fn rejections() {
        assert!(RunConfig::parse("u_bar = 1.0").is_err());
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("delta = 0.01\ndelta = 0.02").is_err());
        assert!(RunConfig::parse("eps = 0.5").is_err());
        assert!(RunConfig::parse("delta = -1").is_err());
        assert!(RunConfig::parse("x_max = abc").is_err());
    }
}
