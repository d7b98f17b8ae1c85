//! The Glimm functional `G = V + κQ` over the weak waves crossing a line
//! `x = const`, and its monitoring across events.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gas::{GasModel, GasState};
use crate::riemann::{reflection_coefficient, FrontFamily, FrontKind, Strength};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Initial,
    Collision,
    Reflection,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::Initial => "initial",
            EventKind::Collision => "collision",
            EventKind::Reflection => "reflection",
        }
    }
}

/// A wave as seen by the functional; the free boundary is never one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveItem {
    pub family: FrontFamily,
    pub kind: FrontKind,
    pub strength: Strength,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlimmParams {
    pub kappa: f64,
    /// Weight of 1-waves, larger than the reflection coefficient.
    pub kplus: f64,
    /// Required fraction of `|b_α b_β|` by which `Q` drops at a collision.
    pub q_drop_factor: f64,
}

impl GlimmParams {
    /// `k₊ = 1.5 (1 + κμ) · max K₂` sampled over the ball, where `μ` bounds
    /// the total weighted strength. A reflection trades a 1-wave for a
    /// 4-wave that approaches every 1-wave above it, so the weight must beat
    /// `K₂` by the factor `1 + κμ` for `G` to drop.
    pub fn calibrated(model: &GasModel, center: &GasState, radius: f64, kappa: f64, mu: f64) -> Result<Self> {
        Ok(GlimmParams {
            kappa,
            kplus: 1.5 * (1.0 + kappa * mu) * max_reflection_coefficient(model, center, radius, 5)?,
            q_drop_factor: 0.25,
        })
    }

    /// `|b_α|`.
    pub fn weighted(&self, w: &WaveItem) -> f64 {
        let m = w.strength.magnitude();
        if w.family == FrontFamily::One {
            self.kplus * m
        } else {
            m
        }
    }
}

/// Smallest and largest `K₂` over a tensor grid with `n` points per axis
/// on the ball.
pub fn reflection_coefficient_range(model: &GasModel, center: &GasState, radius: f64, n: usize) -> Result<(f64, f64)> {
    let n = n.max(2);
    let c = center.to_array();
    let node = |k: usize| -radius + 2.0 * radius * k as f64 / (n - 1) as f64;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n.pow(4) {
        let idx = [i % n, (i / n) % n, (i / n / n) % n, i / n / n / n];
        let s = GasState::from_array(std::array::from_fn(|k| c[k] + node(idx[k])));
        let k2 = reflection_coefficient(model, &s)?;
        lo = lo.min(k2);
        hi = hi.max(k2);
    }
    Ok((lo, hi))
}

pub fn max_reflection_coefficient(model: &GasModel, center: &GasState, radius: f64, n: usize) -> Result<f64> {
    Ok(reflection_coefficient_range(model, center, radius, n)?.1)
}

/// Whether a lower wave and an upper wave belong to the approaching set.
pub fn approaching(lower: &WaveItem, upper: &WaveItem) -> bool {
    let (il, iu) = (lower.family.index(), upper.family.index());
    if il > iu {
        return true;
    }
    il == iu
        && lower.family != FrontFamily::Contact
        && (lower.kind == FrontKind::Shock || upper.kind == FrontKind::Shock)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Functional {
    pub v: f64,
    pub q: f64,
    pub g: f64,
}

/// `(V, Q, G)` for waves listed from below.
pub fn functional(waves: &[WaveItem], params: &GlimmParams) -> Functional {
    let b: Vec<f64> = waves.iter().map(|w| params.weighted(w)).collect();
    let v = b.iter().fold(0.0, |a, x| a + x);
    let mut q = 0.0;
    for i in 0..waves.len() {
        for j in i + 1..waves.len() {
            if approaching(&waves[i], &waves[j]) {
                q += b[i] * b[j];
            }
        }
    }
    Functional {
        v,
        q,
        g: v + params.kappa * q,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlimmRecord {
    pub x: f64,
    pub v: f64,
    pub q: f64,
    pub g: f64,
    pub event_kind: EventKind,
    /// `G` rose beyond round-off.
    pub g_increase: bool,
    /// `|b_α b_β|` at a collision.
    pub interaction: Option<f64>,
    /// `(Q(τ−) − Q(τ+)) / |b_α b_β|` at a collision.
    pub q_drop_ratio: Option<f64>,
    /// `|b_{α₄}| / |b_{α₁}|` at a reflection.
    pub reflection_ratio: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlimmHistory {
    pub params: GlimmParams,
    pub records: Vec<GlimmRecord>,
}

impl GlimmHistory {
    pub fn new(params: GlimmParams) -> Self {
        GlimmHistory {
            params,
            records: vec![],
        }
    }

    /// Appends a record. `pair` carries `(|b_α|, |b_β|)`: the colliding pair
    /// for a collision, or the incident 1-wave and reflected 4-wave for a
    /// reflection.
    pub fn record(&mut self, x: f64, waves: &[WaveItem], kind: EventKind, pair: Option<(f64, f64)>) -> &GlimmRecord {
        let f = functional(waves, &self.params);
        let prev = self.records.last().map(|r| (r.q, r.g));
        let tol = |g0: f64| 1e-12 * g0.max(1.0);
        let g_increase = match prev {
            Some((_, g0)) => f.g > g0 + tol(g0),
            None => false,
        };
        let mut interaction = None;
        let mut q_drop_ratio = None;
        let mut reflection_ratio = None;
        let mut flagged = g_increase;
        match (kind, pair, prev) {
            (EventKind::Collision, Some((ba, bb)), Some((q0, g0))) if ba * bb > 0.0 => {
                let r = (q0 - f.q) / (ba * bb);
                flagged |= f.q - q0 > -self.params.q_drop_factor * ba * bb + tol(g0);
                interaction = Some(ba * bb);
                q_drop_ratio = Some(r);
            }
            (EventKind::Reflection, Some((b1, b4)), _) if b1 > 0.0 => {
                let r = b4 / b1;
                flagged |= r > 1.0;
                reflection_ratio = Some(r);
            }
            _ => {}
        }
        self.records.push(GlimmRecord {
            x,
            v: f.v,
            q: f.q,
            g: f.g,
            event_kind: kind,
            g_increase,
            interaction,
            q_drop_ratio,
            reflection_ratio,
            flagged,
        });
        self.records.last().unwrap()
    }

    pub fn flagged(&self) -> usize {
        self.records.iter().filter(|r| r.flagged).count()
    }

    /// Smallest `Q` drop ratio over collisions whose `|b_α b_β|` is at
    /// least `floor`; weaker interactions are dominated by round-off.
    pub fn min_q_drop_ratio(&self, floor: f64) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| r.interaction.is_some_and(|b| b >= floor))
            .filter_map(|r| r.q_drop_ratio)
            .reduce(f64::min)
    }
}
