//! Polytropic gas thermodynamics, the steady flux pair `(W, H)` and the
//! eigensystem of `∂x W(U) + ∂y H(U) = 0` for states supersonic in `x`.
//!
//! Two printed formulas in the source material disagree with the flux
//! vectors and are corrected here:
//!
//! * the characteristic slopes of the acoustic families carry a factor of
//!   the sound speed in front of the square root,
//!   `λ = (uv ± c·sqrt(u²+v²−c²)) / (u²−c²)`; without it the determinant
//!   condition `det(λ∇W − ∇H) = 0` fails;
//! * the internal energy is `e = p/((γ−1)ρ)`, the only choice consistent
//!   with the enthalpy `γp/((γ−1)ρ)` appearing in the energy flux.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constitutive constants of a polytropic gas, `p = κ ρ^γ exp(S / c_v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub gamma: f64,
    pub kappa_eos: f64,
    pub c_v: f64,
}

impl Default for GasModel {
    fn default() -> Self {
        GasModel {
            gamma: 1.4,
            kappa_eos: 1.0,
            c_v: 1.0,
        }
    }
}

/// Primitive state `U = (u, v, p, ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasState {
    pub u: f64,
    pub v: f64,
    pub p: f64,
    pub rho: f64,
}

/// The two genuinely nonlinear (acoustic) families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Acoustic {
    One,
    Four,
}

impl Acoustic {
    /// `(−1)^j` for `j ∈ {1, 4}`.
    pub fn sign(self) -> f64 {
        match self {
            Acoustic::One => -1.0,
            Acoustic::Four => 1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Acoustic::One => 1,
            Acoustic::Four => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thermo {
    pub entropy: f64,
    pub internal_energy: f64,
    pub total_energy: f64,
    pub mach: f64,
}

/// Characteristic slopes, right eigenvectors and the renormalisation
/// factors of the two acoustic families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub lambdas: [f64; 4],
    pub rvecs: [[f64; 4]; 4],
    /// `[κ₁, κ₄]`
    pub kappas: [f64; 2],
}

impl GasState {
    pub const fn new(u: f64, v: f64, p: f64, rho: f64) -> Self {
        GasState { u, v, p, rho }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.u, self.v, self.p, self.rho]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        GasState::new(a[0], a[1], a[2], a[3])
    }

    /// Flow slope `v/u`, the common slope of vortex sheets and entropy waves.
    pub fn slope(&self) -> f64 {
        self.v / self.u
    }

    pub fn is_valid(&self) -> bool {
        self.p > 0.0 && self.rho > 0.0 && self.to_array().iter().all(|x| x.is_finite())
    }

    /// Max-norm distance, the state norm used for balls, total variation and
    /// `L∞` bounds throughout the crate.
    pub fn dist(&self, other: &GasState) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }
}

impl GasModel {
    pub fn new(gamma: f64, kappa_eos: f64, c_v: f64) -> Result<Self> {
        if !(gamma > 1.0 && kappa_eos > 0.0 && c_v > 0.0) {
            return Err(Error::Domain(format!(
                "gas constants must satisfy gamma > 1, kappa > 0, c_v > 0 (got {gamma}, {kappa_eos}, {c_v})"
            )));
        }
        Ok(GasModel {
            gamma,
            kappa_eos,
            c_v,
        })
    }

    fn check(&self, s: &GasState) -> Result<()> {
        if s.is_valid() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "pressure and density must be positive and finite: {s:?}"
            )))
        }
    }

    pub fn sound_speed(&self, s: &GasState) -> Result<f64> {
        self.check(s)?;
        Ok((self.gamma * s.p / s.rho).sqrt())
    }

    fn c2(&self, s: &GasState) -> f64 {
        self.gamma * s.p / s.rho
    }

    pub fn entropy(&self, s: &GasState) -> f64 {
        self.c_v * (s.p / (self.kappa_eos * s.rho.powf(self.gamma))).ln()
    }

    pub fn thermo(&self, s: &GasState) -> Result<Thermo> {
        let c = self.sound_speed(s)?;
        let e = s.p / ((self.gamma - 1.0) * s.rho);
        let speed = s.u.hypot(s.v);
        Ok(Thermo {
            entropy: self.entropy(s),
            internal_energy: e,
            total_energy: 0.5 * speed * speed + e,
            mach: speed / c,
        })
    }

    /// `(W(U), H(U))`, the fluxes in `x` and `y`.
    pub fn fluxes(&self, s: &GasState) -> ([f64; 4], [f64; 4]) {
        let GasState { u, v, p, rho } = *s;
        let h = self.gamma * p / ((self.gamma - 1.0) * rho) + 0.5 * (u * u + v * v);
        (
            [rho * u, rho * u * u + p, rho * u * v, rho * u * h],
            [rho * v, rho * u * v, rho * v * v + p, rho * v * h],
        )
    }

    /// Entropy flux `(ρuS, ρvS)` entering the steady Clausius inequality.
    pub fn entropy_flux(&self, s: &GasState) -> (f64, f64) {
        let sv = self.entropy(s);
        (s.rho * s.u * sv, s.rho * s.v * sv)
    }

    pub fn check_hyperbolic(&self, s: &GasState) -> Result<f64> {
        let c = self.sound_speed(s)?;
        if s.u > c {
            Ok(c)
        } else {
            Err(Error::NotHyperbolic { u: s.u, c })
        }
    }

    /// Slope of an acoustic family.
    pub fn lambda(&self, s: &GasState, fam: Acoustic) -> Result<f64> {
        let c = self.check_hyperbolic(s)?;
        let c2 = c * c;
        let q = (s.u * s.u + s.v * s.v - c2).sqrt();
        Ok((s.u * s.v + fam.sign() * c * q) / (s.u * s.u - c2))
    }

    /// Slope and its gradient with respect to `(u, v, p, ρ)`.
    pub fn lambda_with_gradient(&self, s: &GasState, fam: Acoustic) -> Result<(f64, [f64; 4])> {
        let c = self.check_hyperbolic(s)?;
        let GasState { u, v, p: _, rho } = *s;
        let sg = fam.sign();
        let c2 = c * c;
        let q = (u * u + v * v - c2).sqrt();
        let d = u * u - c2;
        let num = u * v + sg * c * q;
        let lam = num / d;
        let dl_du = (v + sg * c * u / q) / d - num * 2.0 * u / (d * d);
        let dl_dv = (u + sg * c * v / q) / d;
        // derivative with respect to c², then chained through p and ρ
        let dl_dc2 = sg * (q / (2.0 * c) - c / (2.0 * q)) / d + num / (d * d);
        let dl_dp = dl_dc2 * self.gamma / rho;
        let dl_drho = -dl_dc2 * c2 / rho;
        Ok((lam, [dl_du, dl_dv, dl_dp, dl_drho]))
    }

    /// Normalised right eigenvector of an acoustic family together with its
    /// slope and renormalisation factor `κ`, fixed by `r·∇λ = 1`.
    pub fn acoustic_eigen(&self, s: &GasState, fam: Acoustic) -> Result<(f64, [f64; 4], f64)> {
        let (lam, grad) = self.lambda_with_gradient(s, fam)?;
        let c2 = self.c2(s);
        let w = s.rho * (lam * s.u - s.v);
        let dir = [-lam, 1.0, w, w / c2];
        let dot: f64 = dir.iter().zip(grad.iter()).map(|(a, b)| a * b).sum();
        if dot.abs() < 1e-300 || !dot.is_finite() {
            return Err(Error::Domain(format!("degenerate acoustic field at {s:?}")));
        }
        let kappa = 1.0 / dot;
        Ok((lam, dir.map(|x| kappa * x), kappa))
    }

    pub fn eigenvector(&self, s: &GasState, fam: Acoustic) -> Result<[f64; 4]> {
        Ok(self.acoustic_eigen(s, fam)?.1)
    }

    pub fn eigensystem(&self, s: &GasState) -> Result<EigenSystem> {
        let (l1, r1, k1) = self.acoustic_eigen(s, Acoustic::One)?;
        let (l4, r4, k4) = self.acoustic_eigen(s, Acoustic::Four)?;
        let l23 = s.slope();
        Ok(EigenSystem {
            lambdas: [l1, l23, l23, l4],
            rvecs: [r1, [s.u, s.v, 0.0, 0.0], [0.0, 0.0, 0.0, s.rho], r4],
            kappas: [k1, k4],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: GasModel = GasModel {
        gamma: 1.4,
        kappa_eos: 1.0,
        c_v: 1.0,
    };

    fn fd_jacobian(f: impl Fn(&GasState) -> [f64; 4], s: &GasState) -> [[f64; 4]; 4] {
        let h = 1e-6;
        let mut jac = [[0.0; 4]; 4];
        for k in 0..4 {
            let mut a = s.to_array();
            let mut b = s.to_array();
            a[k] += h;
            b[k] -= h;
            let fa = f(&GasState::from_array(a));
            let fb = f(&GasState::from_array(b));
            for i in 0..4 {
                jac[i][k] = (fa[i] - fb[i]) / (2.0 * h);
            }
        }
        jac
    }

    fn det4(m: [[f64; 4]; 4]) -> f64 {
        let mut a = m;
        let mut det = 1.0;
        for col in 0..4 {
            let piv = (col..4)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            if a[piv][col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            det *= a[col][col];
            for r in col + 1..4 {
                let f = a[r][col] / a[col][col];
                for k in col..4 {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
        det
    }

    #[test]
    fn sound_speed_examples() {
        let c = G.sound_speed(&GasState::new(2.0, 0.0, 1.0, 1.0)).unwrap();
        assert!((c - 1.4f64.sqrt()).abs() < 1e-15);
        assert!((c - 1.1832159566).abs() < 1e-10);
        let c = G.sound_speed(&GasState::new(0.3, -0.1, 1.0 / 1.4, 1.0)).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
        assert!(matches!(
            G.sound_speed(&GasState::new(2.0, 0.0, 0.0, 1.0)),
            Err(Error::Domain(_))
        ));
        assert!(G.sound_speed(&GasState::new(2.0, 0.0, 1.0, -1.0)).is_err());
    }

    #[test]
    fn thermo_examples() {
        let t = G.thermo(&GasState::new(2.0, 0.0, 1.0, 1.0)).unwrap();
        assert!((t.internal_energy - 2.5).abs() < 1e-14);
        assert!((t.total_energy - 4.5).abs() < 1e-14);
        assert!((t.mach - 2.0 / 1.4f64.sqrt()).abs() < 1e-14);
        assert!((t.mach - 1.6903).abs() < 1e-4);
        // p = κ ρ^γ is the entropy reference
        let s = GasState::new(1.0, 0.5, 1.3f64.powf(1.4), 1.3);
        assert!(G.thermo(&s).unwrap().entropy.abs() < 1e-14);
        assert_eq!(G.thermo(&GasState::new(0.0, 0.0, 1.0, 2.0)).unwrap().mach, 0.0);
    }

    #[test]
    fn flux_examples() {
        let (w, h) = G.fluxes(&GasState::new(2.0, 0.0, 1.0, 1.0));
        let want_w = [2.0, 5.0, 0.0, 11.0];
        for i in 0..4 {
            assert!((w[i] - want_w[i]).abs() < 1e-13, "{w:?}");
        }
        assert_eq!(h, [0.0, 0.0, 1.0, 0.0]);
        let (w, h) = G.fluxes(&GasState::new(0.0, 0.0, 1.0, 7.0));
        assert_eq!(w, [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(h, [0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn flux_reflection_symmetry() {
        let s = GasState::new(2.1, 0.13, 0.9, 1.2);
        let m = GasState::new(2.1, -0.13, 0.9, 1.2);
        let (w, h) = G.fluxes(&s);
        let (wm, hm) = G.fluxes(&m);
        assert_eq!(wm[0], w[0]);
        assert_eq!(wm[1], w[1]);
        assert_eq!(wm[2], -w[2]);
        assert_eq!(wm[3], w[3]);
        assert_eq!(hm[0], -h[0]);
        assert_eq!(hm[1], -h[1]);
        assert_eq!(hm[2], h[2]);
        assert_eq!(hm[3], -h[3]);
    }

    #[test]
    fn eigenvalues_at_background() {
        let e = G.eigensystem(&GasState::new(2.0, 0.0, 1.0, 1.0)).unwrap();
        let want = 1.4f64.sqrt() * 2.6f64.sqrt() / 2.6;
        assert!((e.lambdas[3] - want).abs() < 1e-14);
        assert!((e.lambdas[0] + want).abs() < 1e-14);
        assert!((e.lambdas[3] - 0.7338).abs() < 1e-4);
        assert_eq!(e.lambdas[1], 0.0);
        assert_eq!(e.lambdas[2], 0.0);
        assert!(e.kappas[0] > 0.0 && e.kappas[1] > 0.0);
        // κ₄ = 2 q⁴ / ((γ+1) u³) at v = 0
        assert!((e.kappas[1] - 2.0 * 2.6 * 2.6 / (2.4 * 8.0)).abs() < 1e-13);
    }

    #[test]
    fn slope_reflection_swaps_families() {
        let s = GasState::new(2.05, 0.07, 1.02, 0.97);
        let m = GasState::new(2.05, -0.07, 1.02, 0.97);
        let l1 = G.lambda(&s, Acoustic::One).unwrap();
        let l4m = G.lambda(&m, Acoustic::Four).unwrap();
        assert!((l1 + l4m).abs() < 1e-14);
    }

    #[test]
    fn subsonic_rejected() {
        let s = GasState::new(1.0, 0.0, 1.0, 1.0);
        assert!(matches!(G.eigensystem(&s), Err(Error::NotHyperbolic { .. })));
    }

    #[test]
    fn characteristic_determinant_vanishes() {
        let s = GasState::new(1.95, -0.04, 1.03, 0.96);
        let jw = fd_jacobian(|x| G.fluxes(x).0, &s);
        let jh = fd_jacobian(|x| G.fluxes(x).1, &s);
        let e = G.eigensystem(&s).unwrap();
        for lam in e.lambdas {
            let mut m = [[0.0; 4]; 4];
            for i in 0..4 {
                for k in 0..4 {
                    m[i][k] = lam * jw[i][k] - jh[i][k];
                }
            }
            assert!(det4(m).abs() < 1e-6, "lambda {lam}");
        }
        // the slopes as printed without the sound-speed factor fail
        let c = G.sound_speed(&s).unwrap();
        let q = (s.u * s.u + s.v * s.v - c * c).sqrt();
        let printed = (s.u * s.v + q) / (s.u * s.u - c * c);
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                m[i][k] = printed * jw[i][k] - jh[i][k];
            }
        }
        assert!(det4(m).abs() > 1e-3);
    }

    #[test]
    fn analytic_gradient_matches_differences() {
        let s = GasState::new(2.07, 0.05, 0.95, 1.04);
        for fam in [Acoustic::One, Acoustic::Four] {
            let (_, grad) = G.lambda_with_gradient(&s, fam).unwrap();
            let h = 1e-6;
            for k in 0..4 {
                let mut a = s.to_array();
                let mut b = s.to_array();
                a[k] += h;
                b[k] -= h;
                let fd = (G.lambda(&GasState::from_array(a), fam).unwrap()
                    - G.lambda(&GasState::from_array(b), fam).unwrap())
                    / (2.0 * h);
                assert!((fd - grad[k]).abs() < 1e-4, "{fam:?} {k}");
            }
        }
    }
}
