//! Elementary wave curves through a supersonic state.
//!
//! `Φⱼ(α; U₀)` maps a strength to the state *above* a `j`-wave whose lower
//! state is `U₀`; `Ψⱼ(α; U)` is its inverse in the base point. For the
//! acoustic families `α ≥ 0` follows the integral curve of the normalised
//! eigenvector (so `λⱼ` grows by exactly `α`), and `α < 0` follows the
//! Hugoniot locus, parameterised by the pressure jump
//! `α = (p − p₀) / rⱼ⁽³⁾(U₀)` so that the curve leaves `U₀` tangent to `rⱼ`.
//!
//! The Hugoniot branch is evaluated in closed form by splitting the
//! velocity into components normal and tangential to the front: for a
//! density ratio `r = ρ/ρ₀` the normal speed of the base state is
//! `w₀² = c₀² r / b` with `b = (γ+1)/2 − (γ−1)r/2`, and the front slope is
//! `s = (u₀v₀ ± w₀ sqrt(u₀²+v₀²−w₀²)) / (u₀²−w₀²)`. The transcribed shock
//! relations name `w₀` as `ρc₀²/(ρ₀b)`, which is its square.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{Acoustic, GasModel, GasState};
use crate::numeric::{bracket_and_solve, dopri5, OdeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveKind {
    Rarefaction,
    Shock,
    VortexSheet,
    EntropyWave,
}

/// One elementary wave of a Riemann fan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveBranch {
    pub family: u8,
    pub kind: WaveKind,
    pub strength: f64,
}

impl WaveBranch {
    pub fn new(family: u8, strength: f64) -> Self {
        let kind = match family {
            2 => WaveKind::VortexSheet,
            3 => WaveKind::EntropyWave,
            _ if strength >= 0.0 => WaveKind::Rarefaction,
            _ => WaveKind::Shock,
        };
        WaveBranch {
            family,
            kind,
            strength,
        }
    }
}

/// A shock connecting two states with its slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockData {
    pub slope: f64,
    pub below: GasState,
    pub above: GasState,
}

/// Wave-curve evaluator bound to a gas model and integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveCurves {
    pub model: GasModel,
    pub ode: OdeOptions,
    /// Largest `|α|` a curve is evaluated for.
    pub max_strength: f64,
}

/// Jump residual `([W]s − [H]) / sqrt(1+s²)` of a straight front with slope `s`,
/// i.e. `[W]n₁ + [H]n₂` for `n = (s, −1)/sqrt(1+s²)`.
pub fn rh_residual(model: &GasModel, below: &GasState, above: &GasState, slope: f64) -> [f64; 4] {
    let (wb, hb) = model.fluxes(below);
    let (wa, ha) = model.fluxes(above);
    let norm = (1.0 + slope * slope).sqrt();
    std::array::from_fn(|k| ((wa[k] - wb[k]) * slope - (ha[k] - hb[k])) / norm)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl WaveCurves {
    pub fn new(model: GasModel) -> Self {
        WaveCurves {
            model,
            ode: OdeOptions::default(),
            max_strength: 0.3,
        }
    }

    fn check_strength(&self, alpha: f64) -> Result<()> {
        if alpha.abs() > self.max_strength || !alpha.is_finite() {
            Err(Error::CurveRange(format!(
                "|alpha| = {} exceeds {}",
                alpha.abs(),
                self.max_strength
            )))
        } else {
            Ok(())
        }
    }

    fn check_result(&self, s: GasState) -> Result<GasState> {
        match self.model.check_hyperbolic(&s) {
            Ok(_) => Ok(s),
            Err(e) => Err(Error::CurveRange(e.to_string())),
        }
    }

    /// Vortex-sheet then entropy-wave map; `p` and `v/u` are untouched.
    pub fn phi_contact(&self, alpha2: f64, alpha3: f64, base: &GasState) -> GasState {
        let e2 = alpha2.exp();
        GasState::new(base.u * e2, base.v * e2, base.p, base.rho * alpha3.exp())
    }

    /// Strengths `(α₂, α₃)` of the contact joining two states with equal
    /// pressure and flow slope.
    pub fn contact_strengths(&self, below: &GasState, above: &GasState) -> (f64, f64) {
        ((above.u / below.u).ln(), (above.rho / below.rho).ln())
    }

    /// Integral curve of `rⱼ` through `base`, run for parameter length `t`.
    pub fn rarefaction_curve(&self, fam: Acoustic, base: &GasState, t: f64) -> Result<GasState> {
        self.check_result(*base)?;
        let model = self.model;
        let y = dopri5(
            |y| {
                model
                    .eigenvector(&GasState::from_array(*y), fam)
                    .map_err(|e| Error::CurveRange(e.to_string()))
            },
            base.to_array(),
            t,
            self.ode,
        )?;
        self.check_result(GasState::from_array(y))
    }

    /// Follows the integral curve of `rⱼ` from `start` until the pressure
    /// equals `p_target`, using `p` as the curve parameter.
    pub fn rarefaction_to_pressure(
        &self,
        fam: Acoustic,
        start: &GasState,
        p_target: f64,
    ) -> Result<GasState> {
        self.check_result(*start)?;
        let model = self.model;
        let y = dopri5(
            |y| {
                let r = model
                    .eigenvector(&GasState::from_array(*y), fam)
                    .map_err(|e| Error::CurveRange(e.to_string()))?;
                Ok(r.map(|x| x / r[2]))
            },
            start.to_array(),
            p_target - start.p,
            self.ode,
        )?;
        let mut s = GasState::from_array(y);
        s.p = p_target;
        self.check_result(s)
    }

    /// State on the family-`j` Hugoniot locus of `base` with pressure `p`,
    /// together with the front slope.
    pub fn hugoniot_at_pressure(
        &self,
        fam: Acoustic,
        base: &GasState,
        p: f64,
    ) -> Result<(GasState, f64)> {
        let g = self.model.gamma;
        let c0 = self.model.check_hyperbolic(base)?;
        if p == base.p {
            return Ok((*base, self.model.lambda(base, fam)?));
        }
        let dp = p - base.p;
        let gp = g * base.p;
        let den = gp + 0.5 * (g - 1.0) * dp;
        let ratio = (gp + 0.5 * (g + 1.0) * dp) / den;
        let b = 0.5 * (g + 1.0) - 0.5 * (g - 1.0) * ratio;
        if !(p > 0.0 && den > 0.0 && ratio > 0.0 && b > 0.0) {
            return Err(Error::CurveRange(format!(
                "Hugoniot locus undefined at p = {p} from {base:?}"
            )));
        }
        let w2 = c0 * c0 * ratio / b;
        let (u0, v0) = (base.u, base.v);
        let q2 = u0 * u0 + v0 * v0 - w2;
        let d = u0 * u0 - w2;
        if !(q2 > 0.0 && d > 0.0) {
            return Err(Error::CurveRange(format!(
                "normal speed {} not below the flow speed at {base:?}",
                w2.sqrt()
            )));
        }
        let slope = (u0 * v0 + fam.sign() * w2.sqrt() * q2.sqrt()) / d;
        let norm = (1.0 + slope * slope).sqrt();
        let n = (slope / norm, -1.0 / norm);
        let t = (1.0 / norm, slope / norm);
        let wn0 = u0 * n.0 + v0 * n.1;
        let tau = u0 * t.0 + v0 * t.1;
        let wn = wn0 / ratio;
        let out = GasState::new(
            tau * t.0 + wn * n.0,
            tau * t.1 + wn * n.1,
            p,
            base.rho * ratio,
        );
        Ok((self.check_result(out)?, slope))
    }

    /// `Φⱼ(α; base)` for an acoustic family.
    pub fn phi_gnl(&self, fam: Acoustic, alpha: f64, base: &GasState) -> Result<GasState> {
        self.check_strength(alpha)?;
        if alpha == 0.0 {
            return Ok(*base);
        }
        if alpha > 0.0 {
            self.rarefaction_curve(fam, base, alpha)
        } else {
            let r3 = self.model.eigenvector(base, fam)?[2];
            Ok(self.hugoniot_at_pressure(fam, base, base.p + alpha * r3)?.0)
        }
    }

    /// `Ψⱼ(α; above)`: the lower state `U` with `Φⱼ(α; U) = above`.
    pub fn psi_gnl(&self, fam: Acoustic, alpha: f64, above: &GasState) -> Result<GasState> {
        self.check_strength(alpha)?;
        if alpha == 0.0 {
            return Ok(*above);
        }
        if alpha > 0.0 {
            return self.rarefaction_curve(fam, above, -alpha);
        }
        let r3 = self.model.eigenvector(above, fam)?[2];
        let guess = above.p - alpha * r3;
        let p0 = bracket_and_solve(
            |p0| {
                let below = self.hugoniot_at_pressure(fam, above, p0)?.0;
                let r3b = self.model.eigenvector(&below, fam)?[2];
                Ok((above.p - p0) / r3b - alpha)
            },
            guess,
            1e-3 * (alpha * r3).abs(),
            1e-6 * above.p,
            10.0 * above.p,
            1e-15 * above.p,
        )?;
        Ok(self.hugoniot_at_pressure(fam, above, p0)?.0)
    }

    /// Strength of the acoustic wave joining `below` to `above`, assuming
    /// they lie on one family-`j` curve.
    pub fn gnl_strength(&self, fam: Acoustic, below: &GasState, above: &GasState) -> Result<f64> {
        let r3 = self.model.eigenvector(below, fam)?[2];
        let dp = above.p - below.p;
        // on the integral curve α is the increment of λⱼ; on the Hugoniot
        // branch it is the scaled pressure jump
        if dp / r3 >= 0.0 {
            Ok(self.model.lambda(above, fam)? - self.model.lambda(below, fam)?)
        } else {
            Ok(dp / r3)
        }
    }

    /// `Φ(α₄,α₃,α₂,α₁; below)` with the two middle states `U¹`, `U²`.
    pub fn phi_composite(
        &self,
        alphas: [f64; 4],
        below: &GasState,
    ) -> Result<(GasState, [GasState; 2])> {
        let u1 = self.phi_gnl(Acoustic::One, alphas[0], below)?;
        let u2 = self.phi_contact(alphas[1], alphas[2], &u1);
        let top = self.phi_gnl(Acoustic::Four, alphas[3], &u2)?;
        Ok((top, [u1, u2]))
    }

    /// Slope of the shock joining two Hugoniot-related states, from the
    /// least-squares fit of `s[W] = [H]`.
    pub fn shock_slope(&self, fam: Acoustic, below: &GasState, above: &GasState) -> Result<f64> {
        let (wb, hb) = self.model.fluxes(below);
        let (wa, ha) = self.model.fluxes(above);
        let dw: [f64; 4] = std::array::from_fn(|k| wa[k] - wb[k]);
        let dh: [f64; 4] = std::array::from_fn(|k| ha[k] - hb[k]);
        let nw: f64 = dw.iter().map(|x| x * x).sum();
        if nw.sqrt() < 1e-13 {
            return self.model.lambda(below, fam);
        }
        let s = dw.iter().zip(dh.iter()).map(|(a, b)| a * b).sum::<f64>() / nw;
        let res = max_abs(&rh_residual(&self.model, below, above, s));
        if res > 1e-8 {
            return Err(Error::Consistency(format!(
                "Rankine-Hugoniot residual {res:e} at fitted slope {s}"
            )));
        }
        Ok(s)
    }

    /// Density grows across an admissible shock from upstream to downstream;
    /// upstream is below a 1-shock and above a 4-shock.
    pub fn shock_is_admissible(fam: Acoustic, below: &GasState, above: &GasState) -> bool {
        match fam {
            Acoustic::One => above.rho > below.rho,
            Acoustic::Four => below.rho > above.rho,
        }
    }
}
