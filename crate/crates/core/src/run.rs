//! Run orchestration: one tracked run with its verifier reports, the
//! convergence study across δ, and the CSV/JSON artifacts.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::glimm::{reflection_coefficient_range, EventKind, GlimmParams};
use crate::riemann::{RiemannSolver, Strength};
use crate::tracker::{TrackerConfig, TrackerState};
use crate::verifier::{
    asymptotic_check, bump_family, default_window, l1_distance, rh_audit, sup_boundary_distance, weak_form,
    AsymptoticReport, RhReport, WeakFormReport,
};

/// Constants recorded for audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub kappa: f64,
    pub kplus: f64,
    pub k2_min: f64,
    pub k2_max: f64,
    /// Generation cutoff `N`.
    pub cutoff: u32,
    /// `max TV(U^δ(x,·)) / V(x)` over the event lines.
    pub tv_constant: f64,
}

/// Suprema over all event lines.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Bounds {
    pub max_tv: f64,
    pub max_sup: f64,
    pub max_boundary_slope: f64,
    pub max_v: f64,
    pub max_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlimmSummary {
    pub records: usize,
    pub flagged: usize,
    pub g_increases: usize,
    pub g_initial: f64,
    pub g_final: f64,
    /// Over collisions with `|b_α b_β| ≥ 1e-12`.
    pub min_q_drop_ratio: Option<f64>,
    pub max_reflection_ratio: Option<f64>,
    /// Largest `Σ|γⱼ − αⱼ − βⱼ| / (|α||β|)` over collisions.
    pub max_interaction_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub delta: f64,
    pub seed: u64,
    pub x: f64,
    pub events: usize,
    pub collisions: usize,
    pub reflections: usize,
    pub fronts: usize,
    pub initial_strength: f64,
    pub removed_strength: f64,
    pub dropped_strength: f64,
    pub constants: Constants,
    pub bounds: Bounds,
    pub glimm: GlimmSummary,
    pub rh: RhReport,
    pub weak_form: WeakFormReport,
    /// No event remains past `x_max`.
    pub settled: bool,
    /// Far field of the run continued to its last event.
    pub asymptotic: Option<AsymptoticReport>,
    pub asymptotic_error: Option<String>,
    pub abort: Option<String>,
}

impl RunReport {
    /// Whether the run should exit with a failure status.
    pub fn failed(&self) -> bool {
        self.abort.is_some() || self.glimm.flagged > 0 || self.rh.inadmissible_shocks > 0
    }
}

pub fn glimm_params(cfg: &RunConfig) -> Result<GlimmParams> {
    let bg = cfg.background();
    let mut p = GlimmParams::calibrated(&cfg.gas, &bg, cfg.ball, cfg.kappa, cfg.mu)?;
    if let Some(k) = cfg.kplus {
        p.kplus = k;
    }
    p.q_drop_factor = cfg.q_drop_factor;
    Ok(p)
}

/// Builds the tracker at `x = 0` for one `δ`.
pub fn initialize(cfg: &RunConfig, delta: f64) -> Result<TrackerState> {
    let bg = cfg.background();
    let mut solver = RiemannSolver::new(cfg.gas, bg);
    solver.ball = cfg.ball;
    solver.negligible = cfg.negligible;
    let tc = TrackerConfig {
        delta,
        pbar: cfg.p_bar,
        still_rho: cfg.rho_minus,
        x_max: cfg.x_max,
        max_events: cfg.max_events,
        c0_eps0: cfg.c0_eps0,
        ..Default::default()
    };
    TrackerState::initialize(cfg.profile()?, solver, tc, glimm_params(cfg)?)
}

/// Initializes and advances; on an abort the partial state is returned with
/// the error.
pub fn execute(cfg: &RunConfig, delta: f64) -> Result<(TrackerState, Option<Error>)> {
    let mut st = initialize(cfg, delta)?;
    let err = st.advance().err();
    Ok((st, err))
}

pub fn bounds(st: &TrackerState) -> Result<(Bounds, f64)> {
    let bg = st.solver.center;
    let mut b = Bounds {
        max_boundary_slope: st.boundary_slopes().iter().map(|s| s.abs()).fold(0.0, f64::max),
        ..Default::default()
    };
    let mut c = 0.0f64;
    for r in &st.glimm.records {
        if r.x > st.x {
            continue;
        }
        let sl = st.state_slice(r.x)?;
        let tv = sl.total_variation();
        b.max_tv = b.max_tv.max(tv);
        b.max_sup = b.max_sup.max(sl.sup_distance(&bg));
        b.max_v = b.max_v.max(r.v);
        b.max_g = b.max_g.max(r.g);
        if r.v > 0.0 {
            c = c.max(tv / r.v);
        }
    }
    Ok((b, c))
}

fn glimm_summary(st: &TrackerState) -> GlimmSummary {
    let recs = &st.glimm.records;
    GlimmSummary {
        records: recs.len(),
        flagged: st.glimm.flagged(),
        g_increases: recs.iter().filter(|r| r.g_increase).count(),
        g_initial: recs.first().map_or(0.0, |r| r.g),
        g_final: recs.last().map_or(0.0, |r| r.g),
        min_q_drop_ratio: st.glimm.min_q_drop_ratio(1e-12),
        max_reflection_ratio: recs.iter().filter_map(|r| r.reflection_ratio).reduce(f64::max),
        max_interaction_ratio: st.events.iter().filter_map(|e| e.interaction_ratio).reduce(f64::max),
    }
}

/// The far-field check, on a copy continued to its last event if events
/// remain past `x_max`.
pub fn far_field(cfg: &RunConfig, st: &TrackerState) -> Result<AsymptoticReport> {
    if st.find_event(f64::INFINITY)?.is_none() {
        return asymptotic_check(st, cfg.p_bar);
    }
    let mut cont = st.clone();
    cont.finish()?;
    asymptotic_check(&cont, cfg.p_bar)
}

/// The verifier suite on a finished (or aborted) run.
pub fn report(cfg: &RunConfig, st: &TrackerState, abort: Option<&Error>) -> Result<RunReport> {
    let bg = cfg.background();
    let (k2_min, k2_max) = reflection_coefficient_range(&cfg.gas, &bg, cfg.ball, 5)?;
    let (bounds, tv_constant) = bounds(st)?;
    let (s, t) = (cfg.weak_s.min(st.x), cfg.weak_t.min(st.x));
    let top = st.profile.breakpoints.last().copied().unwrap_or(0.0) + 1.0;
    let weak_form = weak_form(st, s, t, &bump_family(s, t, 0.0, top))?;
    let settled = abort.is_none() && st.find_event(f64::INFINITY)?.is_none();
    let (asymptotic, asymptotic_error) = match abort {
        Some(_) => (None, Some("run aborted".to_string())),
        None => match far_field(cfg, st) {
            Ok(a) => (Some(a), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    let count = |k: EventKind| st.events.iter().filter(|e| e.kind == k).count();
    Ok(RunReport {
        delta: st.config.delta,
        seed: cfg.seed,
        x: st.x,
        events: st.events.len(),
        collisions: count(EventKind::Collision),
        reflections: count(EventKind::Reflection),
        fronts: st.fronts.len(),
        initial_strength: st.initial_strength,
        removed_strength: st.removed_strength,
        dropped_strength: st.dropped_strength,
        constants: Constants {
            kappa: st.glimm.params.kappa,
            kplus: st.glimm.params.kplus,
            k2_min,
            k2_max,
            cutoff: st.cutoff,
            tv_constant,
        },
        bounds,
        glimm: glimm_summary(st),
        rh: rh_audit(st),
        weak_form,
        settled,
        asymptotic,
        asymptotic_error,
        abort: abort.map(|e| e.to_string()),
    })
}

fn strength_label(s: &Strength) -> String {
    match *s {
        Strength::Acoustic(a) => a.to_string(),
        Strength::Contact { a2, a3 } => format!("{a2};{a3}"),
        Strength::None => String::new(),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

/// `fronts.csv`, `boundary.csv`, `glimm.csv`, `slices.csv` and `state.json`.
pub fn write_state(dir: &Path, st: &TrackerState, slices: &[f64]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = writer(&dir.join("fronts.csv"))?;
    w.write_record(["x0", "y0", "x1", "y1", "family", "kind", "generation", "strength"])?;
    for s in st.segments() {
        w.write_record([
            s.x0.to_string(),
            s.y0.to_string(),
            s.x1.to_string(),
            s.y1.to_string(),
            s.family.label().to_string(),
            s.kind.label().to_string(),
            s.generation.to_string(),
            strength_label(&s.strength),
        ])?;
    }
    w.flush()?;

    let mut w = writer(&dir.join("boundary.csv"))?;
    w.write_record(["x", "g"])?;
    for v in st.boundary_polyline() {
        w.write_record([v[0].to_string(), v[1].to_string()])?;
    }
    w.flush()?;

    let mut w = writer(&dir.join("glimm.csv"))?;
    w.write_record(["x", "V", "Q", "G", "event_kind", "flagged"])?;
    for r in &st.glimm.records {
        w.write_record([
            r.x.to_string(),
            r.v.to_string(),
            r.q.to_string(),
            r.g.to_string(),
            r.event_kind.label().to_string(),
            (r.flagged as u8).to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = writer(&dir.join("slices.csv"))?;
    w.write_record(["x", "y_lo", "y_hi", "u", "v", "p", "rho"])?;
    for &x in slices.iter().filter(|&&x| (0.0..=st.x).contains(&x)) {
        let sl = st.state_slice(x)?;
        let mut lo = sl.boundary_y;
        for (k, s) in sl.states.iter().enumerate() {
            let hi = sl.ys.get(k).map_or(f64::INFINITY, |y| *y);
            w.write_record([
                x.to_string(),
                lo.to_string(),
                hi.to_string(),
                s.u.to_string(),
                s.v.to_string(),
                s.p.to_string(),
                s.rho.to_string(),
            ])?;
            lo = hi;
        }
    }
    w.flush()?;

    fs::write(dir.join("state.json"), serde_json::to_string(st)?)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// A single run at the first `δ` of the configuration. Artifacts are
/// written even when the run aborts.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    fs::create_dir_all(&cfg.out)?;
    write_json(&cfg.out.join("config.json"), cfg)?;
    let (st, err) = execute(cfg, cfg.deltas[0])?;
    write_state(&cfg.out, &st, &cfg.slices)?;
    let rep = report(cfg, &st, err.as_ref())?;
    write_json(&cfg.out.join("reports.json"), &rep)?;
    Ok(rep)
}

/// Re-runs the verifier on a saved `state.json`, with the run's
/// `config.json` unless a configuration is given.
pub fn verify(cfg: Option<&RunConfig>, dir: &Path) -> Result<RunReport> {
    let saved;
    let cfg = match cfg {
        Some(c) => c,
        None => {
            saved = serde_json::from_str::<RunConfig>(&fs::read_to_string(dir.join("config.json"))?)?;
            &saved
        }
    };
    let st: TrackerState = serde_json::from_str(&fs::read_to_string(dir.join("state.json"))?)?;
    let rep = report(cfg, &st, None)?;
    write_json(&dir.join("verify.json"), &rep)?;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub delta: f64,
    pub events: usize,
    pub cutoff: u32,
    pub flagged: usize,
    pub max_residual: f64,
    pub residuals: [f64; 4],
    pub entropy: f64,
    /// `L¹` distance to the next finer run at each slice.
    pub l1_to_next: Vec<f64>,
    /// `sup |g^δ − g^{δ'}|` to the next finer run.
    pub g_to_next: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub s: f64,
    pub t: f64,
    pub theta: f64,
    pub slices: Vec<f64>,
    pub rows: Vec<StudyRow>,
    /// Least-squares slope of `ln(max residual)` against `ln δ`.
    pub residual_slope: f64,
    /// Same for the `L¹` distance at the last slice.
    pub l1_slope: Option<f64>,
    pub g_distances_decrease: bool,
}

/// Least-squares slope of `ln y` against `ln x`; `NaN` for fewer than two
/// positive points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs every `δ` (coarse to fine) and tabulates residuals and distances.
pub fn study(cfg: &RunConfig) -> Result<StudyReport> {
    if cfg.deltas.len() < 3 {
        return Err(Error::Config("a study needs at least three deltas".into()));
    }
    let mut deltas = cfg.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    let runs: Vec<TrackerState> = deltas
        .par_iter()
        .map(|&d| match execute(cfg, d)? {
            (st, None) => Ok(st),
            (_, Some(e)) => Err(e),
        })
        .collect::<Result<_>>()?;
    let (s, t) = (cfg.weak_s, cfg.weak_t);
    let top = runs[0].profile.breakpoints.last().copied().unwrap_or(0.0) + 1.0;
    let tests = bump_family(s, t, 0.0, top);
    let reports: Vec<WeakFormReport> = runs.iter().map(|st| weak_form(st, s, t, &tests)).collect::<Result<_>>()?;
    let slices: Vec<f64> = cfg.slices.iter().copied().filter(|&x| x <= cfg.x_max).collect();
    let theta = match cfg.theta {
        Some(t) => t,
        None => default_window(&runs[0], cfg.x_max)?,
    };
    let mut rows = vec![];
    for (k, (st, wf)) in runs.iter().zip(&reports).enumerate() {
        let next = runs.get(k + 1);
        let l1_to_next = match next {
            Some(b) => slices.iter().map(|&x| l1_distance(st, b, x, theta)).collect::<Result<_>>()?,
            None => vec![],
        };
        rows.push(StudyRow {
            delta: st.config.delta,
            events: st.events.len(),
            cutoff: st.cutoff,
            flagged: st.glimm.flagged(),
            max_residual: wf.max_residual(),
            residuals: [wf.f, wf.g, wf.i, wf.j],
            entropy: wf.e,
            l1_to_next,
            g_to_next: next.map(|b| sup_boundary_distance(st, b, cfg.x_max)),
        });
    }
    let residual_slope = loglog_slope(&deltas, &rows.iter().map(|r| r.max_residual).collect::<Vec<_>>());
    let pairs = &rows[..rows.len() - 1];
    let l1_slope = (!slices.is_empty()).then(|| {
        loglog_slope(
            &deltas[..pairs.len()],
            &pairs.iter().map(|r| *r.l1_to_next.last().unwrap()).collect::<Vec<_>>(),
        )
    });
    let gs: Vec<f64> = pairs.iter().filter_map(|r| r.g_to_next).collect();
    Ok(StudyReport {
        s,
        t,
        theta,
        slices,
        rows,
        residual_slope,
        l1_slope,
        g_distances_decrease: gs.windows(2).all(|w| w[1] < w[0]),
    })
}

/// `study.json` and `study.csv`.
pub fn write_study(dir: &Path, rep: &StudyReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("study.json"), rep)?;
    let mut w = writer(&dir.join("study.csv"))?;
    let mut head = vec!["delta".to_string(), "events".into(), "max_residual".into(), "entropy".into(), "g_to_next".into()];
    head.extend(rep.slices.iter().map(|x| format!("l1_to_next_x{x}")));
    w.write_record(&head)?;
    for r in &rep.rows {
        let mut rec = vec![
            r.delta.to_string(),
            r.events.to_string(),
            r.max_residual.to_string(),
            r.entropy.to_string(),
            r.g_to_next.map_or(String::new(), |g| g.to_string()),
        ];
        rec.extend((0..rep.slices.len()).map(|k| r.l1_to_next.get(k).map_or(String::new(), |d| d.to_string())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [0.04, 0.02, 0.01];
        let y: Vec<f64> = x.iter().map(|d: &f64| 3.0 * d.powf(1.2)).collect();
        assert!((loglog_slope(&x, &y) - 1.2).abs() < 1e-12);
        assert!(loglog_slope(&x, &[0.0, 0.0, 0.0]).is_nan());
    }

    #[test]
    fn unperturbed_run_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::parse(&format!(
            "perturbation = none\nx_max = 5\nweak_t = 5\nslices = 0, 5\nout = {}\n",
            dir.path().display()
        ))
        .unwrap();
        let rep = run(&cfg).unwrap();
        assert_eq!(rep.events, 0);
        assert!(!rep.failed());
        assert_eq!(rep.glimm.g_final, 0.0);
        assert_eq!(rep.weak_form.max_residual(), 0.0);
        let b = fs::read_to_string(dir.path().join("boundary.csv")).unwrap();
        assert_eq!(b, "x,g\n0,0\n5,0\n");
        let g = fs::read_to_string(dir.path().join("glimm.csv")).unwrap();
        assert_eq!(g, "x,V,Q,G,event_kind,flagged\n0,0,0,0,initial,0\n");
        let v = verify(None, dir.path()).unwrap();
        assert_eq!(v.rh, rep.rh);
    }
}
