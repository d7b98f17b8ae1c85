//! Riemann solvers near the supersonic background: the standard two-state
//! problem, the free-boundary problem against still gas at fixed pressure,
//! the reflection of a 1-wave off the free boundary, and the splitting of a
//! solved fan into straight fronts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{Acoustic, GasModel, GasState};
use crate::wave_curves::{WaveBranch, WaveCurves, WaveKind};

/// Exact solution of a standard Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveFan {
    pub alphas: [f64; 4],
    pub below: GasState,
    pub above: GasState,
    /// `U¹` (above the 1-wave) and `U²` (below the 4-wave).
    pub middles: [GasState; 2],
}

impl WaveFan {
    pub fn branches(&self) -> [WaveBranch; 4] {
        std::array::from_fn(|j| WaveBranch::new(j as u8 + 1, self.alphas[j]))
    }
}

/// Solution of the free-boundary Riemann problem: a single 4-wave between
/// the middle state `U*` (on the boundary, `p = p̄`) and the given state above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFan {
    pub alpha4: f64,
    pub middle: GasState,
    pub above: GasState,
    /// Slope of the free boundary, `v*/u*`.
    pub slope: f64,
}

impl BoundaryFan {
    pub fn kind(&self) -> WaveKind {
        WaveBranch::new(4, self.alpha4).kind
    }
}

/// Outcome of a 1-wave hitting the free boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    pub alpha4: f64,
    /// `Φ₁(α₁; left)`, the state above the incident wave.
    pub incident_above: GasState,
    /// New boundary-adjacent state `U*`.
    pub right: GasState,
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrontFamily {
    Boundary,
    One,
    Contact,
    Four,
}

impl FrontFamily {
    /// Family index used for ordering in the interaction potential; the
    /// contact sits between the acoustic families.
    pub fn index(self) -> f64 {
        match self {
            FrontFamily::Boundary => 0.0,
            FrontFamily::One => 1.0,
            FrontFamily::Contact => 2.5,
            FrontFamily::Four => 4.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FrontFamily::Boundary => "boundary",
            FrontFamily::One => "1",
            FrontFamily::Contact => "contact",
            FrontFamily::Four => "4",
        }
    }

    pub fn acoustic(self) -> Option<Acoustic> {
        match self {
            FrontFamily::One => Some(Acoustic::One),
            FrontFamily::Four => Some(Acoustic::Four),
            _ => None,
        }
    }
}

impl From<Acoustic> for FrontFamily {
    fn from(a: Acoustic) -> Self {
        match a {
            Acoustic::One => FrontFamily::One,
            Acoustic::Four => FrontFamily::Four,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrontKind {
    Shock,
    Rarefaction,
    Contact,
    FreeBoundary,
}

impl FrontKind {
    pub fn label(self) -> &'static str {
        match self {
            FrontKind::Shock => "shock",
            FrontKind::Rarefaction => "rarefaction",
            FrontKind::Contact => "contact",
            FrontKind::FreeBoundary => "free_boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Strength {
    Acoustic(f64),
    Contact { a2: f64, a3: f64 },
    None,
}

impl Strength {
    /// `|α|`, or `|α₂| + |α₃|` for a contact.
    pub fn magnitude(&self) -> f64 {
        match *self {
            Strength::Acoustic(a) => a.abs(),
            Strength::Contact { a2, a3 } => a2.abs() + a3.abs(),
            Strength::None => 0.0,
        }
    }

    pub fn acoustic(&self) -> f64 {
        match *self {
            Strength::Acoustic(a) => a,
            _ => 0.0,
        }
    }
}

/// One straight front emitted from a fan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanFront {
    pub slope: f64,
    pub family: FrontFamily,
    pub kind: FrontKind,
    pub strength: Strength,
    pub below: GasState,
    pub above: GasState,
}

/// Fronts of a split fan, ordered from below.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrontFan {
    pub fronts: Vec<FanFront>,
    /// Total strength of waves too weak to emit.
    pub dropped: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannSolver {
    pub curves: WaveCurves,
    /// Centre of the admissible ball, normally `Ū⁺`.
    pub center: GasState,
    /// Radius of the admissible ball in the max-norm.
    pub ball: f64,
    /// Waves weaker than this are not emitted as fronts.
    pub negligible: f64,
    pub max_iter: usize,
}

fn norm2(r: [f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

/// `K₁ = 1/(κ₄ ρ u λ₄)`: leading coefficient of `α₄` in the pressure
/// mismatch `p⁺ − p̄` of the free-boundary problem at a state with `v = 0`.
pub fn k1(model: &GasModel, s: &GasState) -> Result<f64> {
    let (lam, _, kappa) = model.acoustic_eigen(s, Acoustic::Four)?;
    Ok(1.0 / (kappa * s.rho * s.u * lam))
}

/// Reflection coefficient `K₂ = −r₁⁽³⁾/r₄⁽³⁾` at the boundary-adjacent state.
pub fn reflection_coefficient(model: &GasModel, left: &GasState) -> Result<f64> {
    let r1 = model.eigenvector(left, Acoustic::One)?;
    let r4 = model.eigenvector(left, Acoustic::Four)?;
    Ok(-r1[2] / r4[2])
}

impl RiemannSolver {
    pub fn new(model: GasModel, center: GasState) -> Self {
        RiemannSolver {
            curves: WaveCurves::new(model),
            center,
            ball: 0.1,
            negligible: 1e-10,
            max_iter: 50,
        }
    }

    pub fn model(&self) -> &GasModel {
        &self.curves.model
    }

    fn check_ball(&self, s: &GasState, what: &str) -> Result<()> {
        let d = s.dist(&self.center);
        if d > self.ball || !s.is_valid() {
            return Err(Error::RiemannRange(format!(
                "{what} state {s:?} is {d:.3e} from the background (ball {})",
                self.ball
            )));
        }
        Ok(())
    }

    /// Solves `Φ(α₄, α₃, α₂, α₁; below) = above`.
    ///
    /// Pressure and flow slope are continuous across the contact, so the
    /// acoustic strengths solve a 2×2 system matching `p` and `v/u` between
    /// `Φ₁(α₁; below)` and `Ψ₄(α₄; above)`; the contact strengths then follow
    /// in closed form.
    pub fn solve_standard(&self, below: &GasState, above: &GasState) -> Result<WaveFan> {
        self.check_ball(below, "lower")?;
        self.check_ball(above, "upper")?;
        let w = &self.curves;
        let eval = |x: [f64; 2]| -> Result<([f64; 2], GasState, GasState)> {
            let u1 = w.phi_gnl(Acoustic::One, x[0], below)?;
            let u2 = w.psi_gnl(Acoustic::Four, x[1], above)?;
            Ok(([u1.p - u2.p, u1.slope() - u2.slope()], u1, u2))
        };
        let range = |e: Error| Error::RiemannRange(e.to_string());
        let mut x = [0.0, 0.0];
        let (mut r, mut u1, mut u2) = eval(x).map_err(range)?;
        let h = 1e-7;
        for _ in 0..self.max_iter {
            if norm2(r) < 1e-14 {
                break;
            }
            let mut jac = [[0.0; 2]; 2];
            for k in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                let rp = eval(xp).map_err(range)?.0;
                let rm = eval(xm).map_err(range)?.0;
                for i in 0..2 {
                    jac[i][k] = (rp[i] - rm[i]) / (2.0 * h);
                }
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 || !det.is_finite() {
                return Err(Error::RiemannRange("singular Jacobian".into()));
            }
            let dx = [
                (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
                (jac[0][0] * r[1] - jac[1][0] * r[0]) / det,
            ];
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-4 {
                let xn = [x[0] - t * dx[0], x[1] - t * dx[1]];
                if let Ok((rn, a, b)) = eval(xn) {
                    if norm2(rn) < norm2(r) {
                        x = xn;
                        r = rn;
                        u1 = a;
                        u2 = b;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if norm2(r) > 1e-11 {
            return Err(Error::RiemannRange(format!(
                "Newton stalled with residual {:.3e}",
                norm2(r)
            )));
        }
        let (a2, a3) = w.contact_strengths(&u1, &u2);
        Ok(WaveFan {
            alphas: [x[0], a2, a3, x[1]],
            below: *below,
            above: *above,
            middles: [u1, u2],
        })
    }

    /// Single 4-wave joining a boundary state at pressure `pbar` to `above`.
    pub fn solve_free_boundary(&self, above: &GasState, pbar: f64) -> Result<BoundaryFan> {
        self.check_ball(above, "upper")?;
        let w = &self.curves;
        let m = self.model();
        let range = |e: Error| Error::RiemannRange(e.to_string());
        let (middle, alpha4) = if pbar > above.p {
            let (mid, _) = w
                .hugoniot_at_pressure(Acoustic::Four, above, pbar)
                .map_err(range)?;
            let r3 = m.eigenvector(&mid, Acoustic::Four).map_err(range)?[2];
            (mid, (above.p - pbar) / r3)
        } else if pbar < above.p {
            let mid = w
                .rarefaction_to_pressure(Acoustic::Four, above, pbar)
                .map_err(range)?;
            let a = m.lambda(above, Acoustic::Four)? - m.lambda(&mid, Acoustic::Four)?;
            (mid, a)
        } else {
            (*above, 0.0)
        };
        if alpha4.abs() > w.max_strength {
            return Err(Error::RiemannRange(format!(
                "boundary wave strength {alpha4} outside the curve range"
            )));
        }
        Ok(BoundaryFan {
            alpha4,
            middle,
            above: *above,
            slope: middle.slope(),
        })
    }

    /// A 1-wave of strength `alpha1` above the boundary-adjacent state `left`
    /// meets the boundary; returns the reflected 4-wave and the deflected
    /// boundary.
    pub fn reflect_at_boundary(&self, left: &GasState, alpha1: f64, pbar: f64) -> Result<Reflection> {
        let incident_above = self
            .curves
            .phi_gnl(Acoustic::One, alpha1, left)
            .map_err(|e| Error::RiemannRange(e.to_string()))?;
        let fb = self.solve_free_boundary(&incident_above, pbar)?;
        Ok(Reflection {
            alpha4: fb.alpha4,
            incident_above,
            right: fb.middle,
            slope: fb.slope,
        })
    }

    fn push_acoustic(
        &self,
        fam: Acoustic,
        alpha: f64,
        below: &GasState,
        above: &GasState,
        delta: f64,
        out: &mut FrontFan,
    ) -> Result<()> {
        if alpha.abs() < self.negligible {
            out.dropped += alpha.abs();
            return Ok(());
        }
        let m = self.model();
        if alpha < 0.0 {
            out.fronts.push(FanFront {
                slope: self.curves.shock_slope(fam, below, above)?,
                family: fam.into(),
                kind: FrontKind::Shock,
                strength: Strength::Acoustic(alpha),
                below: *below,
                above: *above,
            });
            return Ok(());
        }
        let nu = ((alpha / delta + 0.5).floor() as usize).max(1);
        let step = alpha / nu as f64;
        let mut lower = *below;
        for k in 1..=nu {
            let upper = if k == nu {
                *above
            } else {
                self.curves.rarefaction_curve(fam, below, step * k as f64)?
            };
            out.fronts.push(FanFront {
                slope: m.lambda(&lower, fam)?,
                family: fam.into(),
                kind: FrontKind::Rarefaction,
                strength: Strength::Acoustic(step),
                below: lower,
                above: upper,
            });
            lower = upper;
        }
        Ok(())
    }

    /// Replaces rarefactions by steps of strength close to `delta` and emits
    /// shocks and the contact as single fronts.
    pub fn split_fan(&self, fan: &WaveFan, delta: f64) -> Result<FrontFan> {
        let mut out = FrontFan::default();
        let [u1, u2] = fan.middles;
        let [a1, a2, a3, a4] = fan.alphas;
        self.push_acoustic(Acoustic::One, a1, &fan.below, &u1, delta, &mut out)?;
        if a2.abs() + a3.abs() < self.negligible {
            out.dropped += a2.abs() + a3.abs();
        } else {
            out.fronts.push(FanFront {
                slope: u1.slope(),
                family: FrontFamily::Contact,
                kind: FrontKind::Contact,
                strength: Strength::Contact { a2, a3 },
                below: u1,
                above: u2,
            });
        }
        self.push_acoustic(Acoustic::Four, a4, &u2, &fan.above, delta, &mut out)?;
        relink(&mut out.fronts, &fan.below, &fan.above);
        Ok(out)
    }

    /// Splits the 4-wave of a free-boundary fan.
    pub fn split_boundary_fan(&self, fan: &BoundaryFan, delta: f64) -> Result<FrontFan> {
        let mut out = FrontFan::default();
        self.push_acoustic(Acoustic::Four, fan.alpha4, &fan.middle, &fan.above, delta, &mut out)?;
        relink(&mut out.fronts, &fan.middle, &fan.above);
        Ok(out)
    }
}

/// After dropping negligible waves, makes the flank states chain from
/// `below` to `above`.
fn relink(fronts: &mut [FanFront], below: &GasState, above: &GasState) {
    let n = fronts.len();
    if n == 0 {
        return;
    }
    fronts[0].below = *below;
    fronts[n - 1].above = *above;
    for i in 1..n {
        fronts[i].below = fronts[i - 1].above;
    }
}
