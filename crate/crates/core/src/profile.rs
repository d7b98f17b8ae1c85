//! Piecewise-constant upstream data on `{x = 0, y > 0}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasState;

/// `states[0]` holds on `(0, breakpoints[0])`, `states[k]` on
/// `(breakpoints[k-1], breakpoints[k])`, and the last state (the tail
/// `Ū₀`) beyond the last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialProfile {
    pub breakpoints: Vec<f64>,
    pub states: Vec<GasState>,
}

impl InitialProfile {
    pub fn new(breakpoints: Vec<f64>, states: Vec<GasState>) -> Result<Self> {
        if states.len() != breakpoints.len() + 1 {
            return Err(Error::Precondition(format!(
                "{} breakpoints need {} states, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                states.len()
            )));
        }
        if breakpoints.iter().any(|&y| !(y > 0.0 && y.is_finite()))
            || breakpoints.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Precondition(
                "breakpoints must be positive and strictly increasing".into(),
            ));
        }
        if let Some(s) = states.iter().find(|s| !s.is_valid()) {
            return Err(Error::Precondition(format!("invalid state {s:?}")));
        }
        Ok(InitialProfile {
            breakpoints,
            states,
        })
    }

    pub fn uniform(state: GasState) -> Self {
        InitialProfile {
            breakpoints: vec![],
            states: vec![state],
        }
    }

    /// `n` breakpoints uniform on `(0, support]` with i.i.d. offsets in
    /// `[−1, 1]⁴`, scaled so the BV norm about `center` equals `eps`.
    pub fn random(center: GasState, eps: f64, n: usize, support: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut breakpoints: Vec<f64> = (0..n).map(|_| support * (1.0 - rng.gen::<f64>())).collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        let offsets: Vec<[f64; 4]> = (0..=breakpoints.len())
            .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..=1.0)))
            .collect();
        let total: f64 = offsets
            .iter()
            .map(|d| d.iter().fold(0.0f64, |m, x| m.max(x.abs())))
            .sum();
        let scale = if total > 0.0 { eps / total } else { 0.0 };
        let mut cur = center.to_array();
        let states = offsets
            .iter()
            .map(|d| {
                for k in 0..4 {
                    cur[k] += scale * d[k];
                }
                GasState::from_array(cur)
            })
            .collect();
        InitialProfile {
            breakpoints,
            states,
        }
    }

    pub fn tail(&self) -> GasState {
        *self.states.last().expect("profile has at least one state")
    }

    /// `|U(0+) − center| + TV(U)` in the max-norm.
    pub fn bv_norm(&self, center: &GasState) -> f64 {
        self.states[0].dist(center) + self.total_variation()
    }

    pub fn total_variation(&self) -> f64 {
        self.states.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    pub fn value_at(&self, y: f64) -> GasState {
        let k = self.breakpoints.partition_point(|&b| b <= y);
        self.states[k]
    }

    pub fn sup_distance(&self, center: &GasState) -> f64 {
        self.states.iter().map(|s| s.dist(center)).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BG: GasState = GasState::new(2.0, 0.0, 1.0, 1.0);

    #[test]
    fn random_profile_has_requested_bv() {
        let p = InitialProfile::random(BG, 0.01, 8, 1.0, 7);
        assert_eq!(p.breakpoints.len(), 8);
        assert_eq!(p.states.len(), 9);
        assert!((p.bv_norm(&BG) - 0.01).abs() < 1e-15);
        assert!(p.breakpoints.iter().all(|&y| y > 0.0 && y <= 1.0));
        assert_eq!(p.value_at(5.0), p.tail());
        assert_eq!(p.value_at(0.0), p.states[0]);
        let q = InitialProfile::random(BG, 0.01, 8, 1.0, 7);
        assert_eq!(p, q);
    }

    #[test]
    fn explicit_profile_checks() {
        assert!(InitialProfile::new(vec![1.0], vec![BG]).is_err());
        assert!(InitialProfile::new(vec![1.0, 0.5], vec![BG, BG, BG]).is_err());
        let p = InitialProfile::new(vec![1.0], vec![BG, GasState::new(2.0, 0.0, 1.02, 1.0)]).unwrap();
        assert!((p.bv_norm(&BG) - 0.02).abs() < 1e-15);
        assert_eq!(p.value_at(1.0).p, 1.02);
        assert_eq!(InitialProfile::uniform(BG).bv_norm(&BG), 0.0);
    }
}
