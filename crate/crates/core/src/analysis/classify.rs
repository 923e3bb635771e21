use serde::{Deserialize, Serialize};

use super::{omega_unchecked, AnalysisError, EQUALITY_TOL};
use crate::model::Model;
use crate::numerics::spectral_abscissa;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Unstable,
    LocallyStable,
    /// Stable on `[0, τ]^N x [0, 1]^N` (flop) or `[τ, 1]^N x [0, 1]^N` (hit),
    /// with the boundary cases `τ = 1` (flop) and `τ = 0` (hit) covering
    /// the whole cube minus the opposite corner.
    AsymptoticallyStable { tau: f64 },
    Inconclusive,
}

/// The sufficient condition behind a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// `δ_i = β_ii` for all `i`.
    #[serde(rename = "table1_flop_unstable")]
    FlopUnstable,
    /// `δ_i > β_ii` for all `i`.
    #[serde(rename = "table1_flop_local")]
    FlopLocal,
    /// `δ_i > γ β_ii` with `γ = max γ_i` and every `w^x_i > 0`.
    #[serde(rename = "flop_local_gamma")]
    FlopLocalGamma,
    /// `δ_i > Ω_i(1)`.
    #[serde(rename = "table1_flop_asymptotic")]
    FlopAsymptotic,
    /// `δ_i > Ω_i(τ)` for some `0 < τ < 1`.
    #[serde(rename = "flop_asymptotic_partial")]
    FlopAsymptoticPartial,
    /// `Ω_i(1) = δ_i`.
    #[serde(rename = "table1_hit_unstable")]
    HitUnstable,
    /// `Ω_i(1) > δ_i`.
    #[serde(rename = "table1_hit_local")]
    HitLocal,
    /// `β_ii > δ_i`.
    #[serde(rename = "table1_hit_asymptotic")]
    HitAsymptotic,
    /// `Ω_i(τ) > δ_i` for some `0 < τ < 1`.
    #[serde(rename = "hit_asymptotic_partial")]
    HitAsymptoticPartial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumVerdict {
    pub verdict: Verdict,
    /// Condition responsible for `verdict`.
    pub trigger: Option<Condition>,
    /// Every condition that holds, strongest last.
    pub satisfied: Vec<Condition>,
}

/// Structural hypotheses the conditions rely on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub opinion_strongly_connected: bool,
    pub some_coupling: bool,
    pub coupling_everywhere: bool,
    pub unit_gamma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub flop: EquilibriumVerdict,
    /// Only meaningful when every `γ_i = 1`; otherwise `Inconclusive`.
    pub hit: EquilibriumVerdict,
    pub hypotheses: Hypotheses,
    pub gamma_max: f64,
    pub omega_zero: Vec<f64>,
    pub omega_one: Vec<f64>,
    /// `α(B - D)` with the endogenous rates on the diagonal of `B`.
    pub alpha_b_minus_d: f64,
}

impl StabilityReport {
    pub fn to_json(&self) -> String {
        crate::serial::canonical_json(self).expect("report serialises")
    }
}

fn all(n: usize, f: impl Fn(usize) -> bool) -> bool {
    (0..n).all(f)
}

/// Largest `τ ≤ 1` with `δ_i > Ω_i(τ)` everywhere, if one exists with `τ > 0`.
fn flop_tau(model: &Model) -> Option<f64> {
    let n = model.n();
    let holds = |tau: f64| all(n, |i| model.adoption.delta[i] > omega_unchecked(model, i, tau));
    if !holds(0.0) {
        return None;
    }
    if holds(1.0) {
        return Some(1.0);
    }
    let sup = (0..n)
        .filter(|&i| model.neighbor_rate_sum(i) > 0.0)
        .map(|i| (model.adoption.delta[i] - model.endogenous_rate(i)) / model.neighbor_rate_sum(i))
        .fold(f64::INFINITY, f64::min)
        .min(1.0);
    let mut tau = sup;
    for _ in 0..64 {
        if tau <= 0.0 {
            return None;
        }
        if holds(tau) {
            return Some(tau);
        }
        tau = tau.next_down();
    }
    None
}

/// Smallest `τ ≥ 0` with `Ω_i(τ) > δ_i` everywhere, if one exists with `τ < 1`.
fn hit_tau(model: &Model) -> Option<f64> {
    let n = model.n();
    let holds = |tau: f64| all(n, |i| omega_unchecked(model, i, tau) > model.adoption.delta[i]);
    if holds(0.0) {
        return Some(0.0);
    }
    if !holds(1.0) {
        return None;
    }
    let inf = (0..n)
        .filter(|&i| model.neighbor_rate_sum(i) > 0.0)
        .map(|i| (model.adoption.delta[i] - model.endogenous_rate(i)) / model.neighbor_rate_sum(i))
        .fold(0.0, f64::max);
    let mut tau = inf;
    for _ in 0..64 {
        if tau >= 1.0 {
            return None;
        }
        if holds(tau) {
            return Some(tau);
        }
        tau = tau.next_up();
    }
    None
}

/// Evaluates every stability condition for both corner equilibria.
pub fn classify(model: &Model) -> Result<StabilityReport, AnalysisError> {
    let n = model.n();
    let delta = &model.adoption.delta;
    let w_x = &model.opinion.w_x;
    let hyp = Hypotheses {
        opinion_strongly_connected: model.opinion_strongly_connected(),
        some_coupling: w_x.iter().any(|&w| w > 0.0),
        coupling_everywhere: w_x.iter().all(|&w| w > 0.0),
        unit_gamma: model.opinion.gamma.iter().all(|g| (g - 1.0).abs() <= EQUALITY_TOL),
    };
    let gamma_max = model.opinion.gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let beta_ii = |i: usize| model.endogenous_rate(i);
    let omega1 = |i: usize| omega_unchecked(model, i, 1.0);
    let connected = hyp.opinion_strongly_connected;

    let mut flop = Vec::new();
    if hyp.unit_gamma
        && hyp.coupling_everywhere
        && connected
        && all(n, |i| (delta[i] - beta_ii(i)).abs() <= EQUALITY_TOL)
    {
        flop.push(Condition::FlopUnstable);
    }
    if hyp.some_coupling && connected && all(n, |i| delta[i] > beta_ii(i)) {
        flop.push(Condition::FlopLocal);
    }
    if hyp.coupling_everywhere && connected && all(n, |i| delta[i] > gamma_max * beta_ii(i)) {
        flop.push(Condition::FlopLocalGamma);
    }
    let ftau = if hyp.coupling_everywhere && connected {
        flop_tau(model)
    } else {
        None
    };
    match ftau {
        Some(t) if t >= 1.0 => flop.push(Condition::FlopAsymptotic),
        Some(_) => flop.push(Condition::FlopAsymptoticPartial),
        None => {}
    }

    let mut hit = Vec::new();
    let hit_base = hyp.unit_gamma && connected;
    if hit_base && hyp.coupling_everywhere && all(n, |i| (omega1(i) - delta[i]).abs() <= EQUALITY_TOL) {
        hit.push(Condition::HitUnstable);
    }
    if hit_base && hyp.some_coupling && all(n, |i| omega1(i) > delta[i]) {
        hit.push(Condition::HitLocal);
    }
    let htau = if hit_base && hyp.coupling_everywhere {
        hit_tau(model)
    } else {
        None
    };
    match htau {
        Some(t) if t <= 0.0 => hit.push(Condition::HitAsymptotic),
        Some(_) => hit.push(Condition::HitAsymptoticPartial),
        None => {}
    }

    let mut b_minus_d = model.adoption.beta.clone();
    for i in 0..n {
        b_minus_d[(i, i)] -= delta[i];
    }
    let alpha_b_minus_d = if n == 0 {
        f64::NEG_INFINITY
    } else {
        spectral_abscissa(&b_minus_d)?
    };

    Ok(StabilityReport {
        flop: summarize(flop, ftau),
        hit: summarize(hit, htau),
        hypotheses: hyp,
        gamma_max,
        omega_zero: (0..n).map(|i| omega_unchecked(model, i, 0.0)).collect(),
        omega_one: (0..n).map(omega1).collect(),
        alpha_b_minus_d,
    })
}

fn summarize(satisfied: Vec<Condition>, tau: Option<f64>) -> EquilibriumVerdict {
    use Condition::*;
    let asym = satisfied
        .iter()
        .copied()
        .find(|c| matches!(c, FlopAsymptotic | FlopAsymptoticPartial | HitAsymptotic | HitAsymptoticPartial));
    let local = satisfied
        .iter()
        .copied()
        .find(|c| matches!(c, FlopLocal | FlopLocalGamma | HitLocal));
    let unstable = satisfied
        .iter()
        .copied()
        .find(|c| matches!(c, FlopUnstable | HitUnstable));
    let (verdict, trigger) = if let (Some(c), Some(tau)) = (asym, tau) {
        (Verdict::AsymptoticallyStable { tau }, Some(c))
    } else if let Some(c) = local {
        (Verdict::LocallyStable, Some(c))
    } else if let Some(c) = unstable {
        (Verdict::Unstable, Some(c))
    } else {
        (Verdict::Inconclusive, None)
    };
    EquilibriumVerdict {
        verdict,
        trigger,
        satisfied,
    }
}
