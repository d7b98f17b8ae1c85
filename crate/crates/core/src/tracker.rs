//! Event-driven front tracking of the approximate solution `(g^δ, U^δ)`.
//!
//! Every front is a straight segment stored as anchor plus slope and kept in
//! an arena; `active` lists the fronts crossing the current line `x = const`
//! from below, with the free boundary first. Between events nothing changes,
//! so the solver jumps from one front intersection to the next.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasState;
use crate::glimm::{EventKind, GlimmHistory, GlimmParams, WaveItem};
use crate::profile::InitialProfile;
use crate::riemann::{FanFront, FrontFamily, FrontKind, RiemannSolver, Strength};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub delta: f64,
    /// Pressure of the still gas below the free boundary.
    pub pbar: f64,
    /// Density of the still gas; recorded only.
    pub still_rho: f64,
    pub x_max: f64,
    pub max_events: usize,
    /// Events closer than this in `x` are separated by this amount.
    pub tie_eps: f64,
    /// `C₀ε₀` in the generation cutoff; `K = 1/(4C₀ε₀)`.
    pub c0_eps0: f64,
    /// Cutoff used when the geometric bound is unavailable.
    pub max_generation: u32,
    /// Largest admissible `|g′|`.
    pub max_boundary_slope: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            delta: 0.01,
            pbar: 1.0,
            still_rho: 1.0,
            x_max: 20.0,
            max_events: 200_000,
            tie_eps: 1e-12,
            c0_eps0: 0.25,
            max_generation: 64,
            max_boundary_slope: 0.5,
        }
    }
}

/// A tracked straight discontinuity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub id: usize,
    pub family: FrontFamily,
    pub kind: FrontKind,
    pub strength: Strength,
    pub generation: u32,
    pub x0: f64,
    pub y0: f64,
    pub slope: f64,
    pub below: GasState,
    pub above: GasState,
    /// `x` where the front ended in an event; `None` while active.
    pub x_end: Option<f64>,
}

impl Front {
    pub fn y_at(&self, x: f64) -> f64 {
        self.y0 + self.slope * (x - self.x0)
    }

    pub fn alive_at(&self, x: f64) -> bool {
        self.x0 <= x && self.x_end.is_none_or(|e| x < e)
    }

    pub fn wave(&self) -> WaveItem {
        WaveItem {
            family: self.family,
            kind: self.kind,
            strength: self.strength,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub x: f64,
    pub y: f64,
    pub kind: EventKind,
    pub incoming: Vec<usize>,
    pub outgoing: Vec<usize>,
    /// Strength of outgoing fronts discarded by the generation cutoff.
    pub removed: f64,
    /// `Σⱼ|γⱼ − αⱼ − βⱼ| / (|α||β|)` for a collision.
    pub interaction_ratio: Option<f64>,
    /// Reflection coefficient measured as `|α₄/α₁|`.
    pub reflection_gain: Option<f64>,
}

/// Scheduled event: the pair `(active[lower], active[lower+1])` meets at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingEvent {
    pub x: f64,
    pub lower: usize,
    pub kind: EventKind,
}

/// Piecewise-constant profile of `U^δ(x, ·)` above the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub x: f64,
    pub boundary_y: f64,
    /// Positions of the fronts above the boundary, increasing.
    pub ys: Vec<f64>,
    pub ids: Vec<usize>,
    /// `states[0]` is adjacent to the boundary; `states[k+1]` lies above `ys[k]`.
    pub states: Vec<GasState>,
}

impl Slice {
    pub fn total_variation(&self) -> f64 {
        self.states.windows(2).map(|w| w[0].dist(&w[1])).fold(0.0, |a, d| a + d)
    }

    pub fn sup_distance(&self, center: &GasState) -> f64 {
        self.states.iter().map(|s| s.dist(center)).fold(0.0, f64::max)
    }

    /// State at height `y` (above the boundary).
    pub fn value_at(&self, y: f64) -> GasState {
        self.states[self.ys.partition_point(|&b| b <= y)]
    }
}

/// Straight piece of a front, for export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub family: FrontFamily,
    pub kind: FrontKind,
    pub generation: u32,
    pub strength: Strength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerState {
    pub config: TrackerConfig,
    pub solver: RiemannSolver,
    pub profile: InitialProfile,
    pub still_gas: GasState,
    pub x: f64,
    pub fronts: Vec<Front>,
    pub active: Vec<usize>,
    /// Vertices of `y = g^δ(x)` at `x = 0` and at each reflection.
    pub boundary: Vec<[f64; 2]>,
    pub events: Vec<EventRecord>,
    pub glimm: GlimmHistory,
    pub cutoff: u32,
    /// Total strength of the fronts at `x = 0`.
    pub initial_strength: f64,
    pub removed_strength: f64,
    pub dropped_strength: f64,
}

/// Adjacent contacts, or a contact resting on the free boundary, share the
/// middle `v/u`; slopes closer than this are round-off and never meet.
const CONTACT_PARALLEL: f64 = 1e-9;

/// Generation cutoff `N`, the least integer exceeding `ln δ / ln(4KT)`.
pub fn generation_cutoff(delta: f64, total: f64, c0_eps0: f64, max_generation: u32) -> u32 {
    let base = total / c0_eps0;
    if total <= 0.0 {
        return 1;
    }
    if base >= 1.0 {
        return max_generation;
    }
    let z = delta.ln() / base.ln();
    ((z.floor() + 1.0).max(1.0) as u32).min(max_generation)
}

impl TrackerState {
    fn push_front(&mut self, f: &FanFront, x0: f64, y0: f64, generation: u32) -> usize {
        let id = self.fronts.len();
        self.fronts.push(Front {
            id,
            family: f.family,
            kind: f.kind,
            strength: f.strength,
            generation,
            x0,
            y0,
            slope: f.slope,
            below: f.below,
            above: f.above,
            x_end: None,
        });
        id
    }

    fn push_boundary(&mut self, x0: f64, y0: f64, above: GasState) -> usize {
        let b = FanFront {
            slope: above.slope(),
            family: FrontFamily::Boundary,
            kind: FrontKind::FreeBoundary,
            strength: Strength::None,
            below: self.still_gas,
            above,
        };
        self.boundary.push([x0, y0]);
        self.push_front(&b, x0, y0, 1)
    }

    /// Solves the Riemann problems at `x = 0` and splits their fans.
    pub fn initialize(
        profile: InitialProfile,
        solver: RiemannSolver,
        config: TrackerConfig,
        glimm: GlimmParams,
    ) -> Result<Self> {
        if !(config.delta > 0.0) {
            return Err(Error::Precondition("delta must be positive".into()));
        }
        let mut st = TrackerState {
            config,
            solver,
            still_gas: GasState::new(0.0, 0.0, config.pbar, config.still_rho),
            profile,
            x: 0.0,
            fronts: vec![],
            active: vec![],
            boundary: vec![],
            events: vec![],
            glimm: GlimmHistory::new(glimm),
            cutoff: 1,
            initial_strength: 0.0,
            removed_strength: 0.0,
            dropped_strength: 0.0,
        };
        let first = st.profile.states[0];
        let corner = st.solver.solve_free_boundary(&first, config.pbar)?;
        let b = st.push_boundary(0.0, 0.0, corner.middle);
        st.active.push(b);
        let ff = st.solver.split_boundary_fan(&corner, config.delta)?;
        st.dropped_strength += ff.dropped;
        for f in &ff.fronts {
            let id = st.push_front(f, 0.0, 0.0, 1);
            st.active.push(id);
        }
        let profile = st.profile.clone();
        for (k, &y) in profile.breakpoints.iter().enumerate() {
            let fan = st
                .solver
                .solve_standard(&profile.states[k], &profile.states[k + 1])
                .map_err(|e| Error::RiemannRange(format!("breakpoint y = {y}: {e}")))?;
            let ff = st.solver.split_fan(&fan, config.delta)?;
            st.dropped_strength += ff.dropped;
            for f in &ff.fronts {
                let id = st.push_front(f, 0.0, y, 1);
                st.active.push(id);
            }
        }
        st.relink_active();
        st.initial_strength = st.waves().iter().map(|w| w.strength.magnitude()).fold(0.0, |a, m| a + m);
        st.cutoff = generation_cutoff(
            config.delta,
            st.initial_strength,
            config.c0_eps0,
            config.max_generation,
        );
        let waves = st.waves();
        st.glimm.record(0.0, &waves, EventKind::Initial, None);
        Ok(st)
    }

    /// Makes each front's lower state equal the upper state of the front
    /// below, so that every region carries one state.
    fn relink_active(&mut self) {
        for k in 1..self.active.len() {
            let prev = self.fronts[self.active[k - 1]].above;
            let cur = self.active[k];
            self.fronts[cur].below = prev;
        }
    }

    /// Waves crossing the current line, from below; the boundary excluded.
    pub fn waves(&self) -> Vec<WaveItem> {
        self.active[1..]
            .iter()
            .map(|&i| self.fronts[i].wave())
            .collect()
    }

    pub fn active_fronts(&self) -> impl Iterator<Item = &Front> {
        self.active.iter().map(move |&i| &self.fronts[i])
    }

    /// Nearest intersection of adjacent fronts beyond the current `x` and
    /// not past `x_max`. Ties within `tie_eps` go to the lowest pair.
    pub fn next_event(&self) -> Result<Option<PendingEvent>> {
        self.find_event(self.config.x_max)
    }

    /// Like [`next_event`](Self::next_event) but looking up to `limit`.
    pub fn find_event(&self, limit: f64) -> Result<Option<PendingEvent>> {
        let mut best: Option<PendingEvent> = None;
        for i in 0..self.active.len().saturating_sub(1) {
            let lo = &self.fronts[self.active[i]];
            let up = &self.fronts[self.active[i + 1]];
            if lo.slope <= up.slope {
                continue;
            }
            let gap = (up.y_at(self.x) - lo.y_at(self.x)).max(0.0);
            let xe = self.x + gap / (lo.slope - up.slope);
            if xe > limit {
                continue;
            }
            let linear = |f: &Front| matches!(f.family, FrontFamily::Contact | FrontFamily::Boundary);
            if linear(lo) && linear(up) && lo.slope - up.slope < CONTACT_PARALLEL {
                continue;
            }
            let kind = if i == 0 {
                if up.family != FrontFamily::One {
                    return Err(Error::Invariant(format!(
                        "{} front {} converges onto the free boundary at x = {xe}",
                        up.family.label(),
                        up.id
                    )));
                }
                EventKind::Reflection
            } else {
                EventKind::Collision
            };
            if best.is_none_or(|b| xe < b.x - self.config.tie_eps) {
                best = Some(PendingEvent { x: xe, lower: i, kind });
            }
        }
        Ok(best.map(|mut e| {
            if !self.events.is_empty() && e.x < self.x + self.config.tie_eps {
                e.x = self.x + self.config.tie_eps;
            }
            e
        }))
    }

    fn end_front(&mut self, id: usize, x: f64) {
        self.fronts[id].x_end = Some(x);
    }

    /// Ends an active front at `x` and starts an identical piece there with
    /// new flank states, so earlier slices keep their states.
    fn continue_front(&mut self, id: usize, x: f64, below: GasState, above: GasState) -> usize {
        let f = self.fronts[id];
        self.end_front(id, x);
        let nid = self.fronts.len();
        self.fronts.push(Front {
            id: nid,
            x0: x,
            y0: f.y_at(x),
            below,
            above,
            x_end: None,
            ..f
        });
        nid
    }

    fn handle(&mut self, ev: PendingEvent) -> Result<()> {
        if self.events.len() >= self.config.max_events {
            return Err(Error::EventCeiling(self.config.max_events));
        }
        match ev.kind {
            EventKind::Collision => self.handle_collision(ev),
            EventKind::Reflection => self.handle_reflection(ev),
            EventKind::Initial => Ok(()),
        }
    }

    /// Resolves the collision of `active[ev.lower]` and `active[ev.lower+1]`.
    pub fn handle_collision(&mut self, ev: PendingEvent) -> Result<()> {
        let i = ev.lower;
        let (lid, uid) = (self.active[i], self.active[i + 1]);
        let (lo, up) = (self.fronts[lid], self.fronts[uid]);
        if lo.family == FrontFamily::Contact && up.family == FrontFamily::Contact {
            return Err(Error::Invariant("two contacts cannot collide".into()));
        }
        let x = ev.x;
        let y = 0.5 * (lo.y_at(x) + up.y_at(x));
        let fan = self.solver.solve_standard(&lo.below, &up.above).map_err(|e| {
            Error::RiemannRange(format!("collision of fronts {lid} and {uid} at ({x}, {y}): {e}"))
        })?;
        let ff = self.solver.split_fan(&fan, self.config.delta)?;
        self.dropped_strength += ff.dropped;

        // interaction audit
        let mut incoming = [0.0; 4];
        for f in [&lo, &up] {
            match (f.family, f.strength) {
                (FrontFamily::One, Strength::Acoustic(a)) => incoming[0] += a,
                (FrontFamily::Four, Strength::Acoustic(a)) => incoming[3] += a,
                (FrontFamily::Contact, Strength::Contact { a2, a3 }) => {
                    incoming[1] += a2;
                    incoming[2] += a3;
                }
                _ => {}
            }
        }
        let defect: f64 = (0..4).map(|j| (fan.alphas[j] - incoming[j]).abs()).sum();
        let product = lo.strength.magnitude() * up.strength.magnitude();
        let interaction_ratio = (product > 0.0).then(|| defect / product);

        let gen_of = |fam: FrontFamily| -> u32 {
            match (fam == lo.family, fam == up.family) {
                (true, true) => lo.generation.min(up.generation),
                (true, false) => lo.generation,
                (false, true) => up.generation,
                (false, false) => lo.generation + up.generation,
            }
        };
        let mut outs: Vec<(FanFront, u32)> =
            ff.fronts.iter().map(|f| (*f, gen_of(f.family))).collect();
        let keep: Vec<bool> = outs.iter().map(|(_, g)| *g <= self.cutoff).collect();
        let mut removed = 0.0;
        if keep.iter().any(|k| !k) {
            removed = outs
                .iter()
                .zip(&keep)
                .filter(|(_, k)| !**k)
                .map(|((f, _), _)| f.strength.magnitude())
                .sum();
            self.apply_removal(&mut outs, &keep, i, x);
            outs = outs
                .into_iter()
                .zip(&keep)
                .filter(|(_, k)| **k)
                .map(|(o, _)| o)
                .collect();
        }
        self.removed_strength += removed;

        self.end_front(lid, x);
        self.end_front(uid, x);
        let ids: Vec<usize> = outs
            .iter()
            .map(|(f, g)| self.push_front(f, x, y, *g))
            .collect();
        self.active.splice(i..i + 2, ids.iter().copied());
        self.x = x;
        self.events.push(EventRecord {
            x,
            y,
            kind: EventKind::Collision,
            incoming: vec![lid, uid],
            outgoing: ids,
            removed,
            interaction_ratio,
            reflection_gain: None,
        });
        let (ba, bb) = (
            self.glimm.params.weighted(&lo.wave()),
            self.glimm.params.weighted(&up.wave()),
        );
        let waves = self.waves();
        self.glimm
            .record(x, &waves, EventKind::Collision, Some((ba, bb)));
        Ok(())
    }

    /// Applies the removal rule to the outgoing fan of a collision between
    /// `active[i]` and `active[i+1]`: a removed run takes the state below it,
    /// unless it is the top of the fan, in which case it takes the state
    /// above it.
    fn apply_removal(&mut self, outs: &mut [(FanFront, u32)], keep: &[bool], i: usize, x: f64) {
        let n = outs.len();
        let mut k = 0;
        while k < n {
            if keep[k] {
                k += 1;
                continue;
            }
            let start = k;
            while k < n && !keep[k] {
                k += 1;
            }
            let run_below = outs[start].0.below;
            let run_above = outs[k - 1].0.above;
            if k < n {
                outs[k].0.below = run_below;
            } else if let Some(j) = (0..start).rev().find(|&j| keep[j]) {
                outs[j].0.above = run_above;
            } else if i > 0 {
                // whole fan removed: the region between the outer neighbours
                // takes the upper state, or the lower one next to the boundary
                let lower_nb = self.active[i - 1];
                if self.fronts[lower_nb].family == FrontFamily::Boundary {
                    if i + 2 < self.active.len() {
                        let up_nb = self.active[i + 2];
                        let above = self.fronts[up_nb].above;
                        self.active[i + 2] = self.continue_front(up_nb, x, run_below, above);
                    }
                } else {
                    let below = self.fronts[lower_nb].below;
                    self.active[i - 1] = self.continue_front(lower_nb, x, below, run_above);
                }
            }
        }
    }

    /// Reflects the lowest wave, a 1-front, off the free boundary.
    pub fn handle_reflection(&mut self, ev: PendingEvent) -> Result<()> {
        let (bid, iid) = (self.active[0], self.active[1]);
        let inc = self.fronts[iid];
        if inc.family != FrontFamily::One {
            return Err(Error::Invariant(format!(
                "{} front {iid} reached the free boundary",
                inc.family.label()
            )));
        }
        let x = ev.x;
        let y = self.fronts[bid].y_at(x);
        // the reflected wave joins the new boundary state to the state above
        // the incident wave
        let fan = self
            .solver
            .solve_free_boundary(&inc.above, self.config.pbar)
            .map_err(|e| Error::RiemannRange(format!("reflection at ({x}, {y}): {e}")))?;
        if fan.slope.abs() > self.config.max_boundary_slope {
            return Err(Error::Invariant(format!(
                "boundary slope {} exceeds {}",
                fan.slope, self.config.max_boundary_slope
            )));
        }
        let ff = self.solver.split_boundary_fan(&fan, self.config.delta)?;
        self.dropped_strength += ff.dropped;
        self.end_front(bid, x);
        self.end_front(iid, x);
        let nb = self.push_boundary(x, y, fan.middle);
        let mut ids = vec![nb];
        for f in &ff.fronts {
            ids.push(self.push_front(f, x, y, inc.generation));
        }
        if ff.fronts.is_empty() && self.active.len() > 2 {
            let up_nb = self.active[2];
            let above = self.fronts[up_nb].above;
            self.active[2] = self.continue_front(up_nb, x, fan.middle, above);
        }
        self.active.splice(0..2, ids.iter().copied());
        self.x = x;
        let a1 = inc.strength.acoustic();
        self.events.push(EventRecord {
            x,
            y,
            kind: EventKind::Reflection,
            incoming: vec![bid, iid],
            outgoing: ids,
            removed: 0.0,
            interaction_ratio: None,
            reflection_gain: (a1 != 0.0).then(|| (fan.alpha4 / a1).abs()),
        });
        let b1 = self.glimm.params.weighted(&inc.wave());
        let b4 = fan.alpha4.abs();
        let waves = self.waves();
        self.glimm
            .record(x, &waves, EventKind::Reflection, Some((b1, b4)));
        Ok(())
    }

    /// Processes events until none remains before `x_max`.
    pub fn advance(&mut self) -> Result<()> {
        while let Some(ev) = self.next_event()? {
            self.handle(ev)?;
        }
        self.x = self.config.x_max;
        Ok(())
    }

    /// Processes every remaining event however far out, then stops at the
    /// last one or at `x_max`, whichever is further.
    pub fn finish(&mut self) -> Result<()> {
        while let Some(ev) = self.find_event(f64::INFINITY)? {
            self.handle(ev)?;
        }
        let end = self.x.max(self.config.x_max);
        self.config.x_max = end;
        self.x = end;
        Ok(())
    }

    /// `x` of the last processed event.
    pub fn last_event_x(&self) -> Option<f64> {
        self.events.last().map(|e| e.x)
    }

    pub fn boundary_front_at(&self, x: f64) -> Option<&Front> {
        self.fronts
            .iter()
            .filter(|f| f.family == FrontFamily::Boundary && f.x0 <= x)
            .find(|f| f.x_end.is_none_or(|e| x < e || (x == e && x == self.x)))
    }

    /// `g^δ(x)`.
    pub fn boundary_y(&self, x: f64) -> f64 {
        match self.boundary_front_at(x) {
            Some(f) => f.y_at(x),
            None => 0.0,
        }
    }

    /// Slopes of the boundary pieces, in order.
    pub fn boundary_slopes(&self) -> Vec<f64> {
        self.fronts
            .iter()
            .filter(|f| f.family == FrontFamily::Boundary)
            .map(|f| f.slope)
            .collect()
    }

    /// Fronts crossing the line at `x` (right-continuous in `x`).
    pub fn fronts_at(&self, x: f64) -> Vec<&Front> {
        let mut out: Vec<&Front> = self
            .fronts
            .iter()
            .filter(|f| f.family != FrontFamily::Boundary)
            .filter(|f| f.alive_at(x) || (x == self.x && f.x_end.is_none() && f.x0 <= x))
            .collect();
        out.sort_by(|a, b| {
            a.y_at(x)
                .total_cmp(&b.y_at(x))
                .then(a.slope.total_cmp(&b.slope))
        });
        out
    }

    pub fn state_slice(&self, x: f64) -> Result<Slice> {
        if !(0.0..=self.x).contains(&x) {
            return Err(Error::Precondition(format!(
                "x = {x} outside the tracked range [0, {}]",
                self.x
            )));
        }
        let b = self
            .boundary_front_at(x)
            .ok_or_else(|| Error::Precondition(format!("no boundary at x = {x}")))?;
        let fronts = self.fronts_at(x);
        let mut states = vec![b.above];
        states.extend(fronts.iter().map(|f| f.above));
        Ok(Slice {
            x,
            boundary_y: b.y_at(x),
            ys: fronts.iter().map(|f| f.y_at(x)).collect(),
            ids: fronts.iter().map(|f| f.id).collect(),
            states,
        })
    }

    /// All front pieces up to the current `x`, boundary included.
    pub fn segments(&self) -> Vec<Segment> {
        self.fronts
            .iter()
            .map(|f| {
                let x1 = f.x_end.unwrap_or(self.x);
                Segment {
                    x0: f.x0,
                    y0: f.y0,
                    x1,
                    y1: f.y_at(x1),
                    family: f.family,
                    kind: f.kind,
                    generation: f.generation,
                    strength: f.strength,
                }
            })
            .collect()
    }

    /// Boundary vertices including the end point at the current `x`.
    pub fn boundary_polyline(&self) -> Vec<[f64; 2]> {
        let mut v = self.boundary.clone();
        if v.last().is_none_or(|p| p[0] < self.x) {
            v.push([self.x, self.boundary_y(self.x)]);
        }
        v
    }

    /// Distinct `x` of events, sorted; the breakpoints of the piecewise
    /// linear geometry.
    pub fn event_xs(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = self.events.iter().map(|e| e.x).collect();
        xs.dedup();
        xs
    }
}
