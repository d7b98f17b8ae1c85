//! Acceptance criteria, one PASS/FAIL line each with the measured values.
//! Failing criteria are reported, not asserted.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transonic::config::{Perturbation, RunConfig};
use transonic::gas::{Acoustic, GasModel, GasState};
use transonic::riemann::{k1, reflection_coefficient, FrontFamily, RiemannSolver};
use transonic::run::{self, RunReport};
use transonic::verifier::{rh_audit, weak_form, bump_family};
use transonic::wave_curves::WaveCurves;

const BG: GasState = GasState::new(2.0, 0.0, 1.0, 1.0);

struct Tally {
    passed: usize,
    total: usize,
}

impl Tally {
    fn line(&mut self, k: usize, name: &str, ok: bool, detail: String) {
        self.total += 1;
        self.passed += ok as usize;
        println!("{} criterion {k} ({name}): {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn random_state(rng: &mut ChaCha8Rng, r: f64) -> GasState {
    let c = BG.to_array();
    GasState::from_array(std::array::from_fn(|k| c[k] + rng.gen_range(-r..=r)))
}

fn det4(m: [[f64; 4]; 4]) -> f64 {
    let mut a = m;
    let mut det = 1.0;
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// Central-difference Jacobian of a map of the primitive variables.
fn jacobian(f: impl Fn(&GasState) -> [f64; 4], s: &GasState) -> [[f64; 4]; 4] {
    let x = s.to_array();
    let mut j = [[0.0; 4]; 4];
    for c in 0..4 {
        let h = 1e-6 * x[c].abs().max(1.0);
        let (mut a, mut b) = (x, x);
        a[c] += h;
        b[c] -= h;
        let (fa, fb) = (f(&GasState::from_array(a)), f(&GasState::from_array(b)));
        for r in 0..4 {
            j[r][c] = (fa[r] - fb[r]) / (2.0 * h);
        }
    }
    j
}

fn criterion1(t: &mut Tally) {
    let m = GasModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_det, mut worst_gnl, mut worst_ld) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let s = random_state(&mut rng, 0.1);
        let jw = jacobian(|s| m.fluxes(s).0, &s);
        let jh = jacobian(|s| m.fluxes(s).1, &s);
        let es = m.eigensystem(&s).unwrap();
        for &lam in &es.lambdas {
            let a: [[f64; 4]; 4] = std::array::from_fn(|r| std::array::from_fn(|c| lam * jw[r][c] - jh[r][c]));
            worst_det = worst_det.max(det4(a).abs());
        }
        for (j, fam) in [(0, Acoustic::One), (3, Acoustic::Four)] {
            let g = jacobian(|s| [m.lambda(s, fam).unwrap(); 4], &s)[0];
            let dot: f64 = (0..4).map(|k| g[k] * es.rvecs[j][k]).sum();
            worst_gnl = worst_gnl.max((dot - 1.0).abs());
        }
        let g = jacobian(|s| [s.v / s.u; 4], &s)[0];
        for j in [1, 2] {
            let dot: f64 = (0..4).map(|k| g[k] * es.rvecs[j][k]).sum();
            worst_ld = worst_ld.max(dot.abs());
        }
    }
    t.line(
        1,
        "eigensystem",
        worst_det < 1e-6 && worst_gnl < 1e-4 && worst_ld < 1e-4,
        format!("max |det| {worst_det:.2e} (< 1e-6), max |r.grad(lambda) - 1| {worst_gnl:.2e}, max |r.grad(lambda)| for contacts {worst_ld:.2e} (< 1e-4)"),
    );
}

fn criterion2(t: &mut Tally) {
    let mut solver = RiemannSolver::new(GasModel::default(), BG);
    solver.ball = 0.3;
    let curves = WaveCurves::new(GasModel::default());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut errors) = (0.0f64, 0usize);
    for _ in 0..1000 {
        let raw: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
        let total: f64 = rng.gen_range(0.0..=0.15);
        let norm: f64 = raw.iter().map(|a| a.abs()).sum();
        let alphas = raw.map(|a| a * total / norm);
        let Ok((top, _)) = curves.phi_composite(alphas, &BG) else {
            errors += 1;
            continue;
        };
        match solver.solve_standard(&BG, &top) {
            Ok(fan) => {
                for j in 0..4 {
                    worst = worst.max((fan.alphas[j] - alphas[j]).abs());
                }
            }
            Err(_) => errors += 1,
        }
    }
    t.line(
        2,
        "Riemann round trip",
        worst < 1e-8 && errors == 0,
        format!("max strength error {worst:.2e} (< 1e-8), failures {errors}, sum|alpha| <= 0.15"),
    );
}

fn criterion3(t: &mut Tally) {
    let m = GasModel::default();
    let solver = RiemannSolver::new(m, BG);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_p = 0.0f64;
    for _ in 0..1000 {
        let above = random_state(&mut rng, 0.05);
        let pbar = 1.0 + rng.gen_range(-0.05..=0.05);
        let fb = solver.solve_free_boundary(&above, pbar).unwrap();
        worst_p = worst_p.max((fb.middle.p - pbar).abs());
    }
    let kk = k1(&m, &BG).unwrap();
    let mut ratios = vec![];
    for h in [1e-3, 1e-4, 1e-5] {
        let above = GasState { p: 1.0 + h, ..BG };
        let fb = solver.solve_free_boundary(&above, 1.0).unwrap();
        ratios.push(fb.alpha4 / h);
    }
    let rel = (ratios[2] / kk - 1.0).abs();
    t.line(
        3,
        "free boundary",
        worst_p < 1e-12 && rel < 0.05,
        format!(
            "max |p* - pbar| {worst_p:.2e} (< 1e-12); alpha4/(p+ - pbar) = {:.6} {:.6} {:.6} for p+ - pbar = 1e-3..1e-5, K1 = {kk:.6}, relative gap {rel:.2e} (< 5%)",
            ratios[0], ratios[1], ratios[2]
        ),
    );
}

fn criterion4(t: &mut Tally) {
    let m = GasModel::default();
    let mut solver = RiemannSolver::new(m, BG);
    solver.ball = 0.2;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_fd, mut worst_zero) = (0.0f64, 0.0f64);
    let (mut neg_ok, mut neg_n, mut pos_ok, mut pos_n) = (0, 0, 0, 0);
    for k in 0..50 {
        let mut left = random_state(&mut rng, 0.05);
        left.p = 1.0;
        if k < 10 {
            left.v = 0.0;
        }
        let h = 1e-5;
        let a = solver.reflect_at_boundary(&left, h, 1.0).unwrap().alpha4;
        let b = solver.reflect_at_boundary(&left, -h, 1.0).unwrap().alpha4;
        let k2 = reflection_coefficient(&m, &left).unwrap();
        worst_fd = worst_fd.max(((a - b) / (2.0 * h) + k2).abs());
        if left.v == 0.0 {
            worst_zero = worst_zero.max((k2.abs() - 1.0).abs());
        } else if left.v < 0.0 {
            neg_n += 1;
            neg_ok += (k2.abs() > 1.0) as usize;
        } else {
            pos_n += 1;
            pos_ok += (k2.abs() < 1.0) as usize;
        }
    }
    t.line(
        4,
        "reflection trichotomy",
        worst_fd < 1e-3 && worst_zero < 1e-9 && neg_ok == neg_n && pos_ok == pos_n,
        format!(
            "max |d alpha4/d alpha1 + K2| {worst_fd:.2e} (< 1e-3); max ||K2| - 1| at v = 0 {worst_zero:.2e} (< 1e-9); |K2| > 1 for v < 0 in {neg_ok}/{neg_n}; |K2| < 1 for v > 0 in {pos_ok}/{pos_n}"
        ),
    );
}

fn perturbed(seed: u64) -> RunConfig {
    RunConfig {
        seed,
        deltas: vec![0.01],
        x_max: 20.0,
        ..RunConfig::default()
    }
}

fn seeded_runs() -> Vec<(RunReport, usize)> {
    (0..20)
        .map(|seed| {
            let cfg = perturbed(seed);
            let (st, err) = run::execute(&cfg, 0.01).unwrap();
            let rep = run::report(&cfg, &st, err.as_ref()).unwrap();
            let q_flags = st
                .glimm
                .records
                .iter()
                .filter(|r| r.q_drop_ratio.is_some() && r.flagged && !r.g_increase)
                .count();
            (rep, q_flags)
        })
        .collect()
}

fn criteria_5_6_9(t: &mut Tally) {
    let runs = seeded_runs();
    let aborted = runs.iter().filter(|(r, _)| r.abort.is_some()).count();
    let g_inc: usize = runs.iter().map(|(r, _)| r.glimm.g_increases).sum();
    let q_flags: usize = runs.iter().map(|(_, q)| q).sum();
    let flagged: usize = runs.iter().map(|(r, _)| r.glimm.flagged).sum();
    let min_q = runs
        .iter()
        .filter_map(|(r, _)| r.glimm.min_q_drop_ratio)
        .fold(f64::INFINITY, f64::min);
    let max_refl = runs
        .iter()
        .filter_map(|(r, _)| r.glimm.max_reflection_ratio)
        .fold(0.0, f64::max);
    let with_flags = runs.iter().filter(|(r, _)| r.glimm.flagged > 0).count();
    t.line(
        5,
        "Glimm monotonicity",
        aborted == 0 && flagged == 0,
        format!(
            "20 runs, eps = delta = 0.01, x_max = 20: aborted {aborted}, flagged records {flagged} in {with_flags} runs (G increases {g_inc}, Q drop short of 1/4 |b b| {q_flags}); min Q drop ratio over |b b| >= 1e-12 {min_q:.3}; max reflected/incident weighted strength {max_refl:.3}; k+ {:.4}, kappa {}",
            runs[0].0.constants.kplus, runs[0].0.constants.kappa
        ),
    );

    let eps = 0.01;
    let tv = runs.iter().map(|(r, _)| r.bounds.max_tv).fold(0.0, f64::max);
    let sup = runs.iter().map(|(r, _)| r.bounds.max_sup).fold(0.0, f64::max);
    let slope = runs.iter().map(|(r, _)| r.bounds.max_boundary_slope).fold(0.0, f64::max);
    let c2 = runs.iter().map(|(r, _)| r.constants.tv_constant).fold(0.0, f64::max);
    t.line(
        6,
        "uniform bounds",
        tv <= 5.0 * eps && sup <= 5.0 * eps && slope <= 5.0 * eps,
        format!(
            "max TV {tv:.4e}, max |U - U+| {sup:.4e}, max |g'| {slope:.4e} (each <= {:.2}); TV/V constant {c2:.3}",
            5.0 * eps
        ),
    );

    let settled = runs.iter().filter(|(r, _)| r.settled).count();
    let far: Vec<_> = runs.iter().filter_map(|(r, _)| r.asymptotic.as_ref()).collect();
    let slope_err = far.iter().map(|a| a.slope_error).fold(0.0, f64::max);
    let kinds = far.iter().filter(|a| a.kind_matches()).count();
    let last = far.iter().filter_map(|a| a.x_last_event).fold(0.0, f64::max);
    let p_err = far.iter().map(|a| a.boundary_pressure_error).fold(0.0, f64::max);
    let tops = far.iter().filter(|a| a.top_is_tail).count();
    t.line(
        9,
        "asymptotics",
        settled == runs.len() && far.len() == runs.len() && slope_err <= 1e-9 && kinds == far.len(),
        format!(
            "last event before x_max = 20 in {settled}/20 runs (latest last event at x = {last:.3e}); far field past the last event: {} checked, slope error max {slope_err:.2e} (<= 1e-9), 4-wave kind matches in {kinds}, top state is U0 in {tops}, max |p - pbar| at the boundary {p_err:.1e}",
            far.len()
        ),
    );
}

/// First seed whose single-breakpoint profile carries a 1-rarefaction
/// stronger than the coarsest δ, so that splitting differs across δ.
fn study_seed(eps: f64, coarse: f64) -> u64 {
    let mut solver = RiemannSolver::new(GasModel::default(), BG);
    solver.ball = 0.15;
    (0..)
        .find(|&seed| {
            let p = transonic::profile::InitialProfile::random(BG, eps, 1, 1.0, seed);
            solver
                .solve_standard(&p.states[0], &p.states[1])
                .is_ok_and(|fan| fan.alphas[0] > coarse)
        })
        .unwrap()
}

fn criteria_7_8(t: &mut Tally) {
    let eps = 0.08;
    let seed = study_seed(eps, 0.04);
    let cfg = RunConfig {
        seed,
        perturbation: Perturbation::Random { eps, n: 1, support: 1.0 },
        deltas: vec![0.04, 0.02, 0.01],
        x_max: 10.0,
        weak_s: 0.0,
        weak_t: 5.0,
        slices: vec![2.5, 5.0, 10.0],
        ..RunConfig::default()
    };
    let rep = run::study(&cfg).unwrap();
    let res: Vec<String> = rep.rows.iter().map(|r| format!("{:.3e}", r.max_residual)).collect();
    let e = rep.rows.iter().map(|r| r.entropy).fold(f64::NEG_INFINITY, f64::max);
    t.line(
        7,
        "weak form O(delta)",
        (0.7..=1.3).contains(&rep.residual_slope) && e <= 1e-8,
        format!(
            "eps {eps}, one breakpoint, seed {seed}, x in [0, 5]: max residual {} for delta 0.04, 0.02, 0.01; fitted slope {:.3} (in [0.7, 1.3]); max E {e:.2e} (<= 1e-8)",
            res.join(", "),
            rep.residual_slope
        ),
    );
    let g: Vec<f64> = rep.rows.iter().filter_map(|r| r.g_to_next).collect();
    t.line(
        8,
        "free boundary convergence",
        g.len() == 2 && g[1] < g[0],
        format!(
            "sup|g(0.02) - g(0.01)| = {:.3e} < sup|g(0.04) - g(0.02)| = {:.3e} on [0, 10]",
            g[1], g[0]
        ),
    );
}

fn criterion10(t: &mut Tally) {
    let cfg = RunConfig {
        perturbation: Perturbation::None,
        ..RunConfig::default()
    };
    let (st, err) = run::execute(&cfg, 0.01).unwrap();
    let waves = st.fronts.iter().filter(|f| f.family != FrontFamily::Boundary).count();
    let straight = st.boundary_polyline().iter().all(|v| v[1] == 0.0);
    let rh = rh_audit(&st);
    let rh_max = rh.max_shock.max(rh.max_step).max(rh.max_contact).max(rh.max_boundary);
    let wf = weak_form(&st, 0.0, 20.0, &bump_family(0.0, 20.0, 0.0, 10.0)).unwrap();
    t.line(
        10,
        "exact background",
        err.is_none() && waves == 0 && straight && rh_max == 0.0 && wf.max_residual() < 1e-14 && wf.e <= 1e-14,
        format!(
            "waves {waves}, boundary straight at y = 0: {straight}, max RH residual {rh_max:.1e}, max weak-form residual {:.1e}, E {:.1e}",
            wf.max_residual(),
            wf.e
        ),
    );
}

fn main() {
    let start = Instant::now();
    let mut t = Tally { passed: 0, total: 0 };
    criterion1(&mut t);
    criterion2(&mut t);
    criterion3(&mut t);
    criterion4(&mut t);
    criteria_5_6_9(&mut t);
    criteria_7_8(&mut t);
    criterion10(&mut t);
    println!(
        "acceptance: {} of {} criteria pass ({:.1} s)",
        t.passed,
        t.total,
        start.elapsed().as_secs_f64()
    );
}
