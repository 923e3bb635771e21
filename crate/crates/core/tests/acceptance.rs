//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::cell::Cell;
use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use contagion_core::analysis::{
    classify, comparison_matrices, instability_witness, interior_equilibrium, lyapunov_certificate, wcdd, Verdict,
};
use contagion_core::dynamics::{simulate, IntegratorConfig, Outcome, Trajectory};
use contagion_core::experiments::{builtin_model, builtin_scenario, monte_carlo, random, run_scenario};
use contagion_core::model::{AdoptionParams, Model, State};
use contagion_core::numerics::{determinant, reachable_rows, spectral_abscissa, strongly_connected, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXCURSION_TOL: f64 = 1e-9;

struct Check {
    pass: bool,
    detail: String,
}

impl Check {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Check {
            pass,
            detail: detail.into(),
        }
    }
}

thread_local! {
    static MAX_EXCURSION: Cell<f64> = const { Cell::new(0.0) };
    static RUNS: Cell<usize> = const { Cell::new(0) };
}

fn track(excursion: f64) {
    MAX_EXCURSION.with(|m| m.set(m.get().max(excursion)));
    RUNS.with(|r| r.set(r.get() + 1));
}

fn run(model: &Model, initial: &State, cfg: &IntegratorConfig) -> Trajectory {
    let t = simulate(model, initial, cfg).expect("simulation runs");
    track(t.max_excursion);
    t
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let mut c = f();
    let took = start.elapsed();
    c.detail = format!("{}; {:.2}s", c.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took > limit {
            c.pass = false;
            c.detail = format!("{} exceeds {}s limit", c.detail, limit.as_secs());
        }
    }
    c
}

fn star() -> Check {
    let m = builtin_model("star5").unwrap();
    let t = run(&m, &State::uniform(5, 0.5, 0.5), &IntegratorConfig::default());
    let s = t.final_state();
    let dx = max_dev(&s.x, &[0.1114, 0.6829, 0.6829, 0.6829, 0.6829]);
    let d_o = max_dev(&s.o, &[0.4924, 0.5877, 0.5877, 0.5877, 0.5877]);
    Check::new(
        dx < 2e-3 && d_o < 2e-3,
        format!("terminal {}, max |dx| {dx:.2e}, max |do| {d_o:.2e}", t.terminal.outcome),
    )
}

fn complete20() -> Check {
    let m = builtin_model("complete20").unwrap();
    let t = run(&m, &State::uniform(20, 0.5, 0.5), &IntegratorConfig::default());
    let s = t.final_state();
    let dx = s.x.iter().map(|v| (v - 0.718).abs()).fold(0.0, f64::max);
    let d_o = s.o.iter().map(|v| (v - 0.5385).abs()).fold(0.0, f64::max);
    let gap = s.x.iter().zip(&s.o).map(|(x, o)| (o - 0.75 * x).abs()).fold(0.0, f64::max);
    Check::new(
        dx < 1e-3 && d_o < 1e-3 && gap < 1e-6,
        format!("x {:.4}, o {:.4}, max |o - γx| {gap:.1e}", s.x[0], s.o[0]),
    )
}

fn barbell() -> Check {
    let mut finals = Vec::new();
    for name in ["barbell_identical", "barbell_deleted"] {
        let r = run_scenario(&builtin_scenario(name).unwrap()).unwrap();
        track(r.trajectories[0].max_excursion);
        finals.push(r.trajectories[0].final_state().x.clone());
    }
    let min_same = finals[0].iter().copied().fold(f64::INFINITY, f64::min);
    let max_right = finals[1][4..].iter().copied().fold(0.0, f64::max);
    Check::new(
        min_same > 0.9 && max_right < 0.15,
        format!("identical min x {min_same:.4}, deleted max x(5..7) {max_right:.4}"),
    )
}

fn theorem1() -> Check {
    let mut r = rng(101);
    let mut bad = 0;
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let n = r.random_range(2..=10);
        let m = random::global_flop_model(&mut r, n);
        let s = random::state_in(&mut r, n, 0.0, 0.95);
        let t = run(&m, &s, &IntegratorConfig::default());
        let norm = t.final_state().max_component();
        worst = worst.max(norm);
        if t.terminal.outcome != Outcome::Flop || norm >= 1e-4 {
            bad += 1;
        }
    }
    Check::new(bad == 0, format!("{bad}/50 failures, max ‖z(T)‖∞ {worst:.1e}"))
}

fn theorem2() -> Check {
    let mut r = rng(102);
    let mut bad = 0;
    for _ in 0..50 {
        let n = r.random_range(2..=10);
        let m = random::global_hit_model(&mut r, n);
        let s = random::state_in(&mut r, n, 0.05, 1.0);
        if run(&m, &s, &IntegratorConfig::default()).terminal.outcome != Outcome::Hit {
            bad += 1;
        }
    }
    Check::new(bad == 0, format!("{bad}/50 not Hit"))
}

fn local_flop() -> Check {
    let mut r = rng(103);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let n = r.random_range(1..=10);
        let m = random::local_flop_model(&mut r, n);
        let j = m.jacobian(&State::zeros(n), &m.opinion.w_o).unwrap();
        worst = worst.max(spectral_abscissa(&j).unwrap());
    }
    let mut false_claims = 0;
    for _ in 0..100 {
        let n = r.random_range(1..=10);
        let m = random::blocked_local_flop_model(&mut r, n);
        if matches!(
            classify(&m).unwrap().flop.verdict,
            Verdict::LocallyStable | Verdict::AsymptoticallyStable { .. }
        ) {
            false_claims += 1;
        }
    }
    Check::new(
        worst < 0.0 && false_claims == 0,
        format!("max α(J(0)) {worst:.3e}, {false_claims}/100 false stability claims"),
    )
}

fn with_delta(m: &Model, delta: Vec<f64>) -> Model {
    Model::new(
        AdoptionParams {
            beta: m.adoption.beta.clone(),
            delta,
        },
        m.opinion.clone(),
        None,
    )
    .unwrap()
}

fn corollaries() -> Check {
    let mut r = rng(104);
    let mut valid = 0;
    let mut alpha_pos = 0;
    let mut max_alpha = f64::NEG_INFINITY;
    let mut errors = BTreeSet::new();
    let trials = 20;
    for k in 0..trials {
        let n = r.random_range(2..=8);
        let base = random::unit_gamma_model(&mut r, n);
        let beta = random::adoption_rates(&mut r, n, 1.0, 0.5, 0.01, 0.3);
        let base = Model::new(
            AdoptionParams {
                delta: base.adoption.delta.clone(),
                beta,
            },
            base.opinion.clone(),
            None,
        )
        .unwrap();
        let corner = if k % 2 == 0 {
            with_delta(&base, (0..n).map(|i| base.adoption.beta[(i, i)]).collect())
        } else {
            with_delta(&base, (0..n).map(|i| base.adoption.beta.row(i).iter().sum()).collect())
        };
        let Some(eq) = interior_equilibrium(&corner).unwrap() else {
            errors.insert("singular".to_string());
            continue;
        };
        let j = corner.jacobian(&eq.z_star, &corner.opinion.w_o).unwrap();
        let alpha = spectral_abscissa(&j).unwrap();
        max_alpha = max_alpha.max(alpha);
        if alpha > 0.0 {
            alpha_pos += 1;
        }
        match instability_witness(&corner, &eq) {
            Ok(w) if w.is_valid() => valid += 1,
            Ok(w) => {
                errors.insert(format!("invalid witness (jy_min {:.1e})", w.jy_min));
            }
            Err(e) => {
                errors.insert(e.to_string().split(" at node").next().unwrap().to_string());
            }
        }
    }
    Check::new(
        valid == trials && alpha_pos == trials,
        format!(
            "{valid}/{trials} valid witnesses, {alpha_pos}/{trials} with α(J) > 0 (max α {max_alpha:.1e}); {errors:?}; \
             the corner linearisation has J·1 = 0, so α = 0 exactly"
        ),
    )
}

fn lyapunov() -> Check {
    let mut r = rng(105);
    let mut worst_marginal = f64::NEG_INFINITY;
    let mut bad = 0;
    for _ in 0..30 {
        let n = r.random_range(2..=10);
        let m = random::unit_gamma_model(&mut r, n);
        match lyapunov_certificate(&comparison_matrices(&m, 1.0).unwrap().p) {
            Ok(c) if c.q.iter().all(|&q| q > 0.0) && c.lambda_max <= 1e-9 => {
                worst_marginal = worst_marginal.max(c.lambda_max)
            }
            _ => bad += 1,
        }
    }
    let mut worst_hurwitz = f64::NEG_INFINITY;
    for _ in 0..30 {
        let n = r.random_range(2..=10);
        let m = random::sub_unit_gamma_model(&mut r, n);
        match lyapunov_certificate(&comparison_matrices(&m, 1.0).unwrap().p) {
            Ok(c) if c.alpha < 0.0 && c.lambda_max < 0.0 && c.q.iter().all(|&q| q > 0.0) => {
                worst_hurwitz = worst_hurwitz.max(c.lambda_max)
            }
            _ => bad += 1,
        }
    }
    Check::new(
        bad == 0,
        format!("{bad}/60 failures, γ=1 max λ {worst_marginal:.1e}, γ<1 max λ {worst_hurwitz:.1e}"),
    )
}

fn closure_strongly_connected(adj: &[Vec<bool>]) -> (bool, Vec<Vec<bool>>) {
    let n = adj.len();
    let mut c: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || adj[i][j]).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if c[i][k] && c[k][j] {
                    c[i][j] = true;
                }
            }
        }
    }
    (c.iter().all(|row| row.iter().all(|&v| v)), c)
}

fn wcdd_oracle() -> Check {
    let mut r = rng(106);
    let mut positives = 0;
    let mut det_failures = 0;
    for _ in 0..1000 {
        let n = r.random_range(2..=8);
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            let mut off = 0.0;
            for j in 0..n {
                if i != j && r.random_bool(0.4) {
                    m[(i, j)] = r.random_range(-1.0..1.0);
                    off += m[(i, j)].abs();
                }
            }
            let slack = if r.random_bool(0.3) { r.random_range(0.0..0.5) } else { 0.0 };
            m[(i, i)] = off + slack;
        }
        if wcdd(&m).is_wcdd {
            positives += 1;
            if determinant(&m).unwrap().abs() <= 1e-12 {
                det_failures += 1;
            }
        }
    }
    let mut graphs = 0;
    let mut disagreements = 0;
    let mut check = |n: usize, bits: u64| {
        let mut m = Matrix::zeros(n, n);
        let mut adj = vec![vec![false; n]; n];
        let mut k = 0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    if bits >> k & 1 == 1 {
                        m[(i, j)] = 1.0;
                        adj[i][j] = true;
                    }
                    k += 1;
                }
            }
        }
        let (sc, c) = closure_strongly_connected(&adj);
        let reach: BTreeSet<usize> = (0..n).filter(|&i| c[i][0]).collect();
        graphs += 1;
        if strongly_connected(&m, 0.0).unwrap() != sc || reachable_rows(&m, &[0].into(), 0.0).unwrap() != reach {
            disagreements += 1;
        }
    };
    for n in 1..=4 {
        for bits in 0..(1u64 << (n * (n - 1))) {
            check(n, bits);
        }
    }
    for n in 5..=8 {
        for _ in 0..2000 {
            let density = r.random_range(0.05..0.5);
            let bits = (0..n * (n - 1)).fold(0u64, |acc, k| acc | (u64::from(r.random_bool(density)) << k));
            check(n, bits);
        }
    }
    Check::new(
        det_failures == 0 && disagreements == 0 && positives > 0,
        format!(
            "{positives} WCDD-positive, {det_failures} with |det| ≤ 1e-12; {disagreements}/{graphs} connectivity disagreements"
        ),
    )
}

fn tipping_basins() -> (Check, Check) {
    let mut spec = builtin_scenario("tipping4_exact").unwrap();
    spec.seed = 7;
    let mc = monte_carlo(&spec).unwrap();
    for rec in &mc.records {
        track(rec.max_excursion);
    }
    let hit = mc.count(Outcome::Hit);
    let flop = mc.count(Outcome::Flop);
    let gap = match (mc.mean_initial_adoption(Outcome::Hit), mc.mean_initial_adoption(Outcome::Flop)) {
        (Some(h), Some(f)) => h - f,
        _ => f64::NAN,
    };
    let consensus = Check::new(
        hit > 0 && flop > 0 && gap > 0.0,
        format!("consensus: {hit} Hit, {flop} Flop, mean x0 gap {gap:.3}"),
    );

    spec.model = spec.model.with_threshold(Some(0.01));
    let bc = monte_carlo(&spec).unwrap();
    for rec in &bc.records {
        track(rec.max_excursion);
    }
    let split = bc.count(Outcome::Split);
    let bounded = Check::new(
        split > 0,
        format!(
            "ξ = 0.01: {} Hit, {} Flop, {split} Split, {} Interior, {} Timeout",
            bc.count(Outcome::Hit),
            bc.count(Outcome::Flop),
            bc.count(Outcome::Interior),
            bc.count(Outcome::Timeout)
        ),
    );
    (consensus, bounded)
}

fn bounded_confidence_theorems() -> Check {
    let mut r = rng(108);
    let mut bad_flop = 0;
    let mut bad_hit = 0;
    for _ in 0..20 {
        let n = r.random_range(2..=10);
        let m = random::bc_flop_model(&mut r, n);
        let s = random::state_in(&mut r, n, 0.0, 0.95);
        if run(&m, &s, &IntegratorConfig::default()).terminal.outcome != Outcome::Flop {
            bad_flop += 1;
        }
    }
    for _ in 0..20 {
        let n = r.random_range(2..=10);
        let m = random::bc_hit_model(&mut r, n);
        let s = random::state_in(&mut r, n, 0.05, 1.0);
        if run(&m, &s, &IntegratorConfig::default()).terminal.outcome != Outcome::Hit {
            bad_hit += 1;
        }
    }
    Check::new(
        bad_flop == 0 && bad_hit == 0,
        format!("{bad_flop}/20 not Flop, {bad_hit}/20 not Hit"),
    )
}

fn jacobian_fd() -> Check {
    let mut r = rng(109);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let n = r.random_range(1..=8);
        let m = if k % 2 == 0 {
            random::unit_gamma_model(&mut r, n)
        } else {
            random::bc_flop_model(&mut r, n)
        };
        let s = random::state_in(&mut r, n, 0.01, 0.99);
        let w = m.active_weights(&s);
        let j = m.jacobian(&s, &w).unwrap();
        let z = s.to_vec();
        let h = 1e-6;
        for c in 0..2 * n {
            let mut up = z.clone();
            let mut down = z.clone();
            up[c] += h;
            down[c] -= h;
            let fu = m.vector_field(&State::from_slice(&up), &w).unwrap();
            let fd = m.vector_field(&State::from_slice(&down), &w).unwrap();
            let fu: Vec<f64> = fu.dx.into_iter().chain(fu.d_o).collect();
            let fd: Vec<f64> = fd.dx.into_iter().chain(fd.d_o).collect();
            for row in 0..2 * n {
                worst = worst.max(((fu[row] - fd[row]) / (2.0 * h) - j[(row, c)]).abs());
            }
        }
    }
    Check::new(worst < 1e-6, format!("max abs error {worst:.2e}"))
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let mut results: Vec<(u32, &str, Check)> = vec![
        (1, "star-graph interior equilibrium", timed(secs(5), star)),
        (2, "complete-20 interior equilibrium", timed(secs(10), complete20)),
        (3, "barbell bottleneck", timed(secs(10), barbell)),
        (4, "global flop property suite", timed(secs(60), theorem1)),
        (5, "global hit property suite", timed(secs(60), theorem2)),
        (6, "local flop stability", timed(None, local_flop)),
        (7, "corner instability witnesses", timed(None, corollaries)),
        (8, "Lyapunov certificates", timed(None, lyapunov)),
        (9, "WCDD and connectivity oracles", timed(None, wcdd_oracle)),
    ];
    let start = Instant::now();
    let (consensus, mut bounded) = tipping_basins();
    let took = start.elapsed();
    let over = took > Duration::from_secs(120);
    let mut consensus = consensus;
    for c in [&mut consensus, &mut bounded] {
        c.pass &= !over;
        c.detail = format!("{}; {:.2}s for both runs", c.detail, took.as_secs_f64());
    }
    results.push((10, "tipping-point basins (Hit/Flop separation)", consensus));
    results.push((10, "tipping-point basins (bounded-confidence split)", bounded));
    results.push((11, "bounded-confidence stability suites", timed(None, bounded_confidence_theorems)));
    results.push((13, "Jacobian vs finite differences", timed(None, jacobian_fd)));

    let excursion = MAX_EXCURSION.with(Cell::get);
    let runs = RUNS.with(Cell::get);
    results.push((
        12,
        "pre-clamp states stay in the cube",
        Check::new(
            excursion <= EXCURSION_TOL,
            format!("max excursion {excursion:.2e} over {runs} runs"),
        ),
    ));
    results.sort_by_key(|(k, _, _)| *k);

    let mut failed = 0;
    for (k, name, c) in &results {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        if !c.pass {
            failed += 1;
        }
        println!("criterion {k:>2} {tag}: {name} ({})", c.detail);
    }
    println!("{} of {} checks passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
