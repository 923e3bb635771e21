use contagion_core::dynamics::{simulate, IntegratorConfig, Outcome};
use contagion_core::experiments::{builtin_model, builtin_scenario, random, run_scenario};
use contagion_core::model::State;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(u, v)| (u - v).abs() < tol)
}

#[test]
fn star_reaches_interior_equilibrium() {
    let m = builtin_model("star5").unwrap();
    let t = simulate(&m, &State::uniform(5, 0.5, 0.5), &IntegratorConfig::default()).unwrap();
    assert_eq!(t.terminal.outcome, Outcome::Interior);
    let s = t.final_state();
    assert!(close(&s.x, &[0.1114, 0.6829, 0.6829, 0.6829, 0.6829], 2e-3), "{s:?}");
    assert!(close(&s.o, &[0.4924, 0.5877, 0.5877, 0.5877, 0.5877], 2e-3), "{s:?}");
}

#[test]
fn complete_graph_matches_gamma_scaled_opinion() {
    let m = builtin_model("complete20").unwrap();
    let t = simulate(&m, &State::uniform(20, 0.5, 0.5), &IntegratorConfig::default()).unwrap();
    assert_eq!(t.terminal.outcome, Outcome::Interior);
    let s = t.final_state();
    for i in 0..20 {
        assert!((s.x[i] - 0.718).abs() < 1e-3);
        assert!((s.o[i] - 0.5385).abs() < 1e-3);
        assert!((s.o[i] - 0.75 * s.x[i]).abs() < 1e-6);
    }
}

#[test]
fn barbell_bottleneck() {
    let same = run_scenario(&builtin_scenario("barbell_identical").unwrap()).unwrap();
    let s = same.trajectories[0].final_state();
    assert!(s.x.iter().all(|&x| x > 0.9), "{:?}", s.x);

    let del = run_scenario(&builtin_scenario("barbell_deleted").unwrap()).unwrap();
    let s = del.trajectories[0].final_state();
    assert!(s.x[4..].iter().all(|&x| x < 0.15), "{:?}", s.x);
    assert!((del.trajectories[0].final_time() - 2000.0).abs() < 1e-6 || del.trajectories[0].converged);
}

#[test]
fn corners_are_invariant() {
    let m = builtin_model("tipping4_exact").unwrap();
    let cfg = IntegratorConfig::default().with_t_max(10.0);
    for s in [State::zeros(4), State::ones(4)] {
        let t = simulate(&m, &s, &cfg).unwrap();
        assert_eq!(t.final_state(), &s);
    }
}

#[test]
fn step_halving_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let m = { let n = rng.random_range(2..=6); random::unit_gamma_model(&mut rng, n) };
        let s = random::state_in(&mut rng, m.n(), 0.0, 1.0);
        let coarse = IntegratorConfig::default().with_t_max(20.0).with_step(0.02);
        let fine = IntegratorConfig::default().with_t_max(20.0).with_step(0.01);
        let a = simulate(&m, &s, &coarse).unwrap();
        let b = simulate(&m, &s, &fine).unwrap();
        let (za, zb) = (a.final_state().to_vec(), b.final_state().to_vec());
        assert!(close(&za, &zb, 1e-6), "{za:?} vs {zb:?}");
    }
}

#[test]
fn global_flop_models_flop() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let m = { let n = rng.random_range(2..=10); random::global_flop_model(&mut rng, n) };
        let s = random::state_in(&mut rng, m.n(), 0.0, 0.95);
        let t = simulate(&m, &s, &IntegratorConfig::default()).unwrap();
        assert_eq!(t.terminal.outcome, Outcome::Flop);
        assert!(t.max_excursion <= 1e-9);
    }
}

#[test]
fn simulation_is_deterministic() {
    let m = builtin_model("tipping4_exact").unwrap();
    let s = State::uniform(4, 0.6, 0.4);
    let cfg = IntegratorConfig::default().with_t_max(100.0);
    assert_eq!(simulate(&m, &s, &cfg).unwrap(), simulate(&m, &s, &cfg).unwrap());
}
