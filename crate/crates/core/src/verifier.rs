//! Certification of a tracked solution: jump conditions front by front, the
//! weak form with its boundary terms, distances between runs, and the far
//! field beyond the last event.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{GasModel, GasState};
use crate::numeric::adaptive_gauss5;
use crate::riemann::{FrontFamily, FrontKind};
use crate::tracker::{Front, TrackerState};
use crate::wave_curves::{max_abs, rh_residual, WaveCurves, WaveKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontAudit {
    pub id: usize,
    pub family: FrontFamily,
    pub kind: FrontKind,
    pub generation: u32,
    pub x0: f64,
    pub x1: f64,
    pub strength: f64,
    /// Shocks and rarefaction steps: max-abs Rankine–Hugoniot residual.
    /// Contacts: `max(|[p]|, |u·n|)`. Boundary: `max(|p − p̄|, |v − g′u|)`.
    pub residual: f64,
    /// `S(above) − S(below)`.
    pub entropy_jump: f64,
    /// Lax admissibility; `None` for everything but shocks.
    pub admissible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhReport {
    pub fronts: Vec<FrontAudit>,
    pub max_shock: f64,
    pub max_step: f64,
    pub max_contact: f64,
    pub max_boundary: f64,
    pub inadmissible_shocks: usize,
}

fn normal_velocity(s: &GasState, slope: f64) -> f64 {
    (s.u * slope - s.v) / slope.hypot(1.0)
}

pub fn audit_front(model: &GasModel, f: &Front, pbar: f64, x_now: f64) -> FrontAudit {
    let (b, a) = (&f.below, &f.above);
    let mut admissible = None;
    let residual = match f.kind {
        FrontKind::FreeBoundary => (a.p - pbar).abs().max((a.v - f.slope * a.u).abs()),
        FrontKind::Contact => (a.p - b.p)
            .abs()
            .max(normal_velocity(a, f.slope).abs())
            .max(normal_velocity(b, f.slope).abs()),
        FrontKind::Shock | FrontKind::Rarefaction => {
            if f.kind == FrontKind::Shock {
                admissible = f
                    .family
                    .acoustic()
                    .map(|fam| WaveCurves::shock_is_admissible(fam, b, a));
            }
            max_abs(&rh_residual(model, b, a, f.slope))
        }
    };
    FrontAudit {
        id: f.id,
        family: f.family,
        kind: f.kind,
        generation: f.generation,
        x0: f.x0,
        x1: f.x_end.unwrap_or(x_now),
        strength: f.strength.magnitude(),
        residual,
        entropy_jump: if f.kind == FrontKind::FreeBoundary {
            0.0
        } else {
            model.entropy(a) - model.entropy(b)
        },
        admissible,
    }
}

/// Jump conditions on every front piece ever created.
pub fn rh_audit(st: &TrackerState) -> RhReport {
    let model = st.solver.model();
    let fronts: Vec<FrontAudit> = st
        .fronts
        .iter()
        .map(|f| audit_front(model, f, st.config.pbar, st.x))
        .collect();
    let max_of = |k: FrontKind| {
        fronts
            .iter()
            .filter(|a| a.kind == k)
            .map(|a| a.residual)
            .fold(0.0, f64::max)
    };
    RhReport {
        max_shock: max_of(FrontKind::Shock),
        max_step: max_of(FrontKind::Rarefaction),
        max_contact: max_of(FrontKind::Contact),
        max_boundary: max_of(FrontKind::FreeBoundary),
        inadmissible_shocks: fronts.iter().filter(|a| a.admissible == Some(false)).count(),
        fronts,
    }
}

fn bump1(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// `ψ(x, y) = B((x − xc)/rx) · B((y − yc)/ry)` with the smooth bump
/// `B(t) = exp(1 − 1/(1 − t²))` on `|t| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub xc: f64,
    pub yc: f64,
    pub rx: f64,
    pub ry: f64,
}

const QUAD_TOL: f64 = 1e-15;

impl Bump {
    pub fn value(&self, x: f64, y: f64) -> f64 {
        bump1((x - self.xc) / self.rx) * bump1((y - self.yc) / self.ry)
    }

    /// `∫ ψ(x, y0 + m (x − xa)) dx` over `[xa, xb]`.
    pub fn line_integral(&self, xa: f64, xb: f64, y0: f64, m: f64) -> f64 {
        let mut lo = xa.max(self.xc - self.rx);
        let mut hi = xb.min(self.xc + self.rx);
        let (ylo, yhi) = (self.yc - self.ry, self.yc + self.ry);
        if m == 0.0 {
            if y0 <= ylo || y0 >= yhi {
                return 0.0;
            }
        } else {
            let p = xa + (ylo - y0) / m;
            let q = xa + (yhi - y0) / m;
            lo = lo.max(p.min(q));
            hi = hi.min(p.max(q));
        }
        if hi <= lo {
            return 0.0;
        }
        adaptive_gauss5(&|x| self.value(x, y0 + m * (x - xa)), lo, hi, QUAD_TOL)
    }

    /// `∫ ψ(x, y) dy` over `[y0, y1]`; `y1` may be infinite.
    pub fn vertical_integral(&self, x: f64, y0: f64, y1: f64) -> f64 {
        let bx = bump1((x - self.xc) / self.rx);
        let lo = y0.max(self.yc - self.ry);
        let hi = y1.min(self.yc + self.ry);
        if bx == 0.0 || hi <= lo {
            return 0.0;
        }
        bx * adaptive_gauss5(&|y| bump1((y - self.yc) / self.ry), lo, hi, QUAD_TOL)
    }
}

/// Centres on a 5×5 grid over `[s, t] × [y_lo, y_hi]`, each with radii one
/// and two grid spacings.
pub fn bump_family(s: f64, t: f64, y_lo: f64, y_hi: f64) -> Vec<Bump> {
    let (hx, hy) = ((t - s) / 5.0, (y_hi - y_lo) / 5.0);
    let mut out = vec![];
    for scale in [1.0, 2.0] {
        for i in 0..5 {
            for j in 0..5 {
                out.push(Bump {
                    xc: s + (i as f64 + 0.5) * hx,
                    yc: y_lo + (j as f64 + 0.5) * hy,
                    rx: scale * hx,
                    ry: scale * hy,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResidual {
    pub bump: Bump,
    /// `(F, G, I, J)`.
    pub residuals: [f64; 4],
    /// `E`, which must not be positive.
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakFormReport {
    pub s: f64,
    pub t: f64,
    pub f: f64,
    pub g: f64,
    pub i: f64,
    pub j: f64,
    /// Largest `E` over the (nonnegative) test functions.
    pub e: f64,
    pub test_set: String,
    pub tests: Vec<TestResidual>,
}

impl WeakFormReport {
    pub fn max_residual(&self) -> f64 {
        self.f.max(self.g).max(self.i).max(self.j)
    }
}

/// Conserved fluxes and the entropy flux as five `(W, H)` pairs.
fn flux5(model: &GasModel, s: &GasState) -> ([f64; 5], [f64; 5]) {
    let (w, h) = model.fluxes(s);
    let (ws, hs) = model.entropy_flux(s);
    ([w[0], w[1], w[2], w[3], ws], [h[0], h[1], h[2], h[3], hs])
}

/// A strip `[xa, xb]` between consecutive geometry breakpoints: the
/// boundary and fronts are straight lines in it and do not cross inside.
struct Panel {
    xa: f64,
    xb: f64,
    /// `(y(xa), slope)` of the boundary then of each front, from below.
    lines: Vec<(f64, f64)>,
    /// State of the cell above each line.
    states: Vec<GasState>,
}

fn panels(st: &TrackerState, s: f64, t: f64) -> Result<Vec<Panel>> {
    let mut xs = vec![s, t];
    for f in &st.fronts {
        for x in [Some(f.x0), f.x_end].into_iter().flatten() {
            if x > s && x < t {
                xs.push(x);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut out = Vec::with_capacity(xs.len());
    for w in xs.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        let sl = st.state_slice(0.5 * (xa + xb))?;
        let b = st
            .boundary_front_at(0.5 * (xa + xb))
            .ok_or_else(|| Error::Geometry(format!("no boundary in [{xa}, {xb}]")))?;
        let mut lines = vec![(b.y_at(xa), b.slope)];
        lines.extend(sl.ids.iter().map(|&id| {
            let f = &st.fronts[id];
            (f.y_at(xa), f.slope)
        }));
        for k in 1..lines.len() {
            let (lo, hi) = (lines[k - 1], lines[k]);
            let gap_a = hi.0 - lo.0;
            let gap_b = gap_a + (hi.1 - lo.1) * (xb - xa);
            if gap_a < -1e-9 || gap_b < -1e-9 {
                return Err(Error::Geometry(format!(
                    "fronts out of order in [{xa}, {xb}]: gaps {gap_a}, {gap_b}"
                )));
            }
        }
        out.push(Panel {
            xa,
            xb,
            lines,
            states: sl.states,
        });
    }
    Ok(out)
}

/// `(F, G, I, J, E)` for one test function, summed cell by cell. Each cell
/// carries a constant flux, so its `∫ F·∇ψ` equals the flux through its
/// edges weighted by edge integrals of `ψ`.
fn residual_by_cells(model: &GasModel, panels: &[Panel], st: &TrackerState, s: f64, t: f64, pbar: f64, psi: &Bump) -> Result<[f64; 5]> {
    let mut r = [0.0; 5];
    for p in panels {
        if p.xb <= psi.xc - psi.rx || p.xa >= psi.xc + psi.rx {
            continue;
        }
        let (ylo, yhi) = (psi.yc - psi.ry, psi.yc + psi.ry);
        let n = p.lines.len();
        let y_at = |k: usize, x: f64| p.lines[k].0 + p.lines[k].1 * (x - p.xa);
        let line = |k: usize| -> f64 {
            if k >= n {
                return 0.0;
            }
            let (ya, yb) = (y_at(k, p.xa), y_at(k, p.xb));
            if ya.max(yb) <= ylo || ya.min(yb) >= yhi {
                return 0.0;
            }
            psi.line_integral(p.xa, p.xb, p.lines[k].0, p.lines[k].1)
        };
        let ls: Vec<f64> = (0..n).map(line).collect();
        for k in 0..n {
            let top_a = if k + 1 < n { y_at(k + 1, p.xa) } else { f64::INFINITY };
            let top_b = if k + 1 < n { y_at(k + 1, p.xb) } else { f64::INFINITY };
            let (bot_a, bot_b) = (y_at(k, p.xa), y_at(k, p.xb));
            if bot_a.min(bot_b) >= yhi || top_a.max(top_b) <= ylo {
                continue;
            }
            let va = psi.vertical_integral(p.xa, bot_a, top_a);
            let vb = psi.vertical_integral(p.xb, bot_b, top_b);
            let (l_bot, l_top) = (ls[k], if k + 1 < n { ls[k + 1] } else { 0.0 });
            let m_bot = p.lines[k].1;
            let m_top = if k + 1 < n { p.lines[k + 1].1 } else { 0.0 };
            let (w, h) = flux5(model, &p.states[k]);
            for c in 0..5 {
                r[c] += w[c] * (vb - va) + (w[c] * m_bot - h[c]) * l_bot + (h[c] - w[c] * m_top) * l_top;
            }
        }
        // free-boundary terms: p̄ n₁ ds = p̄ g′ dx and p̄ n₂ ds = −p̄ dx
        r[1] -= pbar * p.lines[0].1 * ls[0];
        r[2] += pbar * ls[0];
    }
    for (x, sign) in [(s, 1.0), (t, -1.0)] {
        let sl = st.state_slice(x)?;
        let mut edges = vec![sl.boundary_y];
        edges.extend(sl.ys.iter().copied());
        edges.push(f64::INFINITY);
        for (k, state) in sl.states.iter().enumerate() {
            let v = psi.vertical_integral(x, edges[k], edges[k + 1]);
            if v == 0.0 {
                continue;
            }
            let (w, _) = flux5(model, state);
            for c in 0..5 {
                r[c] += sign * w[c] * v;
            }
        }
    }
    Ok(r)
}

fn check_slab(st: &TrackerState, s: f64, t: f64) -> Result<()> {
    if !(0.0 <= s && s < t && t <= st.x) {
        return Err(Error::Precondition(format!(
            "slab [{s}, {t}] must lie in [0, {}] with s < t",
            st.x
        )));
    }
    Ok(())
}

/// `(F, G, I, J, E)` for one test function. The flux is constant on each
/// side of a front, so integrating `F·∇ψ` by parts leaves the jump
/// `ψ (s[W] − [H])` along every front and the mismatch between the flux
/// through the free boundary and the prescribed `p̄ n` terms.
pub fn weak_form_single(st: &TrackerState, s: f64, t: f64, psi: &Bump) -> Result<[f64; 5]> {
    check_slab(st, s, t)?;
    let model = st.solver.model();
    let pbar = st.config.pbar;
    let mut r = [0.0; 5];
    for f in &st.fronts {
        let a = f.x0.max(s);
        let b = f.x_end.unwrap_or(st.x).min(t);
        if b <= a {
            continue;
        }
        let l = psi.line_integral(a, b, f.y_at(a), f.slope);
        if l == 0.0 {
            continue;
        }
        let (wa, ha) = flux5(model, &f.above);
        if f.family == FrontFamily::Boundary {
            for c in 0..5 {
                r[c] += (wa[c] * f.slope - ha[c]) * l;
            }
            // p̄ n₁ ds = p̄ g′ dx and p̄ n₂ ds = −p̄ dx
            r[1] -= pbar * f.slope * l;
            r[2] += pbar * l;
        } else {
            let (wb, hb) = flux5(model, &f.below);
            for c in 0..5 {
                r[c] += (f.slope * (wa[c] - wb[c]) - (ha[c] - hb[c])) * l;
            }
        }
    }
    Ok(r)
}

/// The weak-form integrals `F, G, I, J` and the entropy integral `E` over
/// the slab `s ≤ x ≤ t`, one value per test function.
pub fn weak_form(st: &TrackerState, s: f64, t: f64, tests: &[Bump]) -> Result<WeakFormReport> {
    check_slab(st, s, t)?;
    let results: Vec<TestResidual> = tests
        .par_iter()
        .map(|psi| {
            let r = weak_form_single(st, s, t, psi)?;
            Ok(TestResidual {
                bump: *psi,
                residuals: [r[0], r[1], r[2], r[3]],
                entropy: r[4],
            })
        })
        .collect::<Result<_>>()?;
    let max_of = |c: usize| results.iter().map(|r| r.residuals[c].abs()).fold(0.0, f64::max);
    Ok(WeakFormReport {
        s,
        t,
        f: max_of(0),
        g: max_of(1),
        i: max_of(2),
        j: max_of(3),
        e: results.iter().map(|r| r.entropy).fold(f64::NEG_INFINITY, f64::max),
        test_set: format!(
            "{} tensor bumps exp(1-1/(1-t^2)) on a 5x5 grid, radii 1x and 2x the spacing",
            tests.len()
        ),
        tests: results,
    })
}

/// The same integrals summed cell by cell over the constant-state
/// trapezoids between consecutive geometry breakpoints, with the `Σ_s`,
/// `Σ_t` terms taken from the slices. Slower; an independent check.
pub fn weak_form_by_cells(st: &TrackerState, s: f64, t: f64, psi: &Bump) -> Result<[f64; 5]> {
    check_slab(st, s, t)?;
    let ps = panels(st, s, t)?;
    residual_by_cells(st.solver.model(), &ps, st, s, t, st.config.pbar, psi)
}

/// Default window `Θ` for the straightened distance: the support of the
/// initial perturbation plus the distance waves travel by `x`.
pub fn default_window(st: &TrackerState, x: f64) -> Result<f64> {
    let c = st.solver.center;
    let m = st.solver.model();
    let speed = m
        .lambda(&c, crate::Acoustic::One)?
        .abs()
        .max(m.lambda(&c, crate::Acoustic::Four)?.abs());
    let support = st.profile.breakpoints.last().copied().unwrap_or(0.0);
    Ok(support + 1.1 * speed * x)
}

/// `∫₀^Θ |U_a(x, θ + g_a(x)) − U_b(x, θ + g_b(x))| dθ` in the max-norm.
pub fn l1_distance(a: &TrackerState, b: &TrackerState, x: f64, theta: f64) -> Result<f64> {
    let (sa, sb) = (a.state_slice(x)?, b.state_slice(x)?);
    let shift = |sl: &crate::tracker::Slice| -> Vec<f64> {
        sl.ys.iter().map(|y| y - sl.boundary_y).collect()
    };
    let (ta, tb) = (shift(&sa), shift(&sb));
    let mut cuts: Vec<f64> = ta
        .iter()
        .chain(tb.iter())
        .copied()
        .filter(|&v| v > 0.0 && v < theta)
        .collect();
    cuts.push(0.0);
    cuts.push(theta);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let at = |ths: &[f64], states: &[GasState], th: f64| states[ths.partition_point(|&v| v <= th)];
    Ok(cuts
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (w[1] - w[0]) * at(&ta, &sa.states, mid).dist(&at(&tb, &sb.states, mid))
        })
        .sum())
}

/// `sup |g_a − g_b|` over `[0, x]`; both are polygonal, so the vertices
/// suffice.
pub fn sup_boundary_distance(a: &TrackerState, b: &TrackerState, x: f64) -> f64 {
    let x = x.min(a.x).min(b.x);
    a.boundary_polyline()
        .iter()
        .chain(b.boundary_polyline().iter())
        .map(|v| v[0])
        .chain([0.0, x])
        .filter(|&v| v <= x)
        .map(|v| (a.boundary_y(v) - b.boundary_y(v)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub x_last_event: Option<f64>,
    /// States on the last line, from the boundary up.
    pub far_states: Vec<GasState>,
    pub boundary_slope_tail: f64,
    /// `U∞`, the state of the free-boundary problem above `Ū₀`.
    pub predicted_state: GasState,
    /// `k∞ = v∞/u∞`.
    pub predicted_slope: f64,
    pub slope_error: f64,
    /// `|p − p̄|` next to the boundary.
    pub boundary_pressure_error: f64,
    /// Whether the topmost state is `Ū₀`.
    pub top_is_tail: bool,
    /// Shock when `p̄ > p̄₀`, rarefaction when `p̄ < p̄₀`.
    pub predicted_kind: Option<FrontKind>,
    /// `α₄` of the free-boundary problem above `Ū₀`.
    pub predicted_strength: f64,
    /// Sum of the 4-strengths left on the last line.
    pub net_four_strength: f64,
    /// Kind of the net 4-wave.
    pub measured_kind: Option<FrontKind>,
    /// Kind of the strongest single 4-front.
    pub strongest_kind: Option<FrontKind>,
    /// All remaining 4-fronts are of the predicted kind.
    pub four_kinds_agree: bool,
}

impl AsymptoticReport {
    pub fn kind_matches(&self) -> bool {
        self.predicted_kind == self.measured_kind
    }
}

/// Compares the flow beyond the last event with the free-boundary problem
/// posed above `Ū₀`.
pub fn asymptotic_check(st: &TrackerState, pbar: f64) -> Result<AsymptoticReport> {
    if st.x < st.config.x_max {
        return Err(Error::Precondition("the run has not been advanced".into()));
    }
    if let Some(ev) = st.find_event(f64::INFINITY)? {
        return Err(Error::Precondition(format!(
            "events still pending: next at x = {}",
            ev.x
        )));
    }
    let tail = st.profile.tail();
    let fb = st.solver.solve_free_boundary(&tail, pbar)?;
    let predicted_kind = if fb.alpha4.abs() < st.solver.negligible {
        None
    } else {
        Some(match fb.kind() {
            WaveKind::Shock => FrontKind::Shock,
            _ => FrontKind::Rarefaction,
        })
    };
    let sl = st.state_slice(st.x)?;
    let fours: Vec<&Front> = st
        .active_fronts()
        .filter(|f| f.family == FrontFamily::Four)
        .collect();
    let strongest = fours
        .iter()
        .max_by(|a, b| a.strength.magnitude().total_cmp(&b.strength.magnitude()));
    let net: f64 = fours.iter().map(|f| f.strength.acoustic()).fold(0.0, |a, b| a + b);
    let measured_kind = if net.abs() < st.solver.negligible {
        None
    } else if net < 0.0 {
        Some(FrontKind::Shock)
    } else {
        Some(FrontKind::Rarefaction)
    };
    let boundary = st.fronts[st.active[0]];
    Ok(AsymptoticReport {
        x_last_event: st.last_event_x(),
        boundary_slope_tail: boundary.slope,
        predicted_state: fb.middle,
        predicted_slope: fb.slope,
        slope_error: (boundary.slope - fb.slope).abs(),
        boundary_pressure_error: (sl.states[0].p - pbar).abs(),
        top_is_tail: sl.states.last() == Some(&tail),
        predicted_kind,
        predicted_strength: fb.alpha4,
        net_four_strength: net,
        measured_kind,
        strongest_kind: strongest.map(|f| f.kind),
        four_kinds_agree: fours.iter().all(|f| Some(f.kind) == predicted_kind),
        far_states: sl.states,
    })
}
