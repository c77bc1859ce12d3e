//! Stochastic elimination policies and their exact log-probability
//! gradients.
//!
//! The quantum-informed policy softmaxes `beta_uv * |M_uv|` over the current
//! edge set (the correlation sign decides the imposed constraint). The
//! classical baseline drops the circuit entirely, fixing `M_uv = 1` and
//! learning separate logits for the correlated and anti-correlated action of
//! every edge. Both recover greedy argmax selection as beta grows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, IsingInstance, Spin};
use crate::qaoa::{correlations_with_grad, Angles, CorrelationVector};
use crate::rqaoa::sign_of;

/// Which policy family a parameter vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "rl-rqaoa")]
    RlRqaoa,
    #[serde(rename = "rl-rone")]
    RlRone,
}

/// Sharing pattern of the inverse-temperature parameters across iterations
/// and edges (quantum policy only). `OneAll` (one beta per vertex pair,
/// shared across iterations) is the benchmarked default; the others are
/// exposed for experimentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BetaConfig {
    /// One scalar per iteration, shared by all edges.
    #[serde(rename = "all")]
    All,
    /// One scalar per vertex pair, shared across iterations.
    #[default]
    #[serde(rename = "one-all")]
    OneAll,
    /// One scalar per (iteration, vertex pair).
    #[serde(rename = "all-all")]
    AllAll,
}

/// Number of unordered pairs over `n` labels.
pub fn num_pairs(n: u32) -> usize {
    (n as usize * (n as usize - 1)) / 2
}

/// Dense index of the unordered pair `(u, v)` with `u < v < n`.
pub fn pair_index(edge: Edge, n: u32) -> usize {
    let (u, v, n) = (edge.u as usize, edge.v as usize, n as usize);
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Trainable parameters: per-iteration angles plus inverse temperatures in a
/// flat vector addressed through [`PolicyParams::beta_index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub kind: PolicyKind,
    /// Root vertex count the beta layout is sized for.
    pub n: u32,
    /// Episode horizon `n - n_c` (zero for the classical policy).
    pub horizon: usize,
    pub beta_config: BetaConfig,
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl PolicyParams {
    /// Quantum policy parameters with all betas at `beta_init` and zeroed
    /// angles (callers warm-start or randomize them).
    pub fn rlrqaoa(n: u32, horizon: usize, beta_config: BetaConfig, beta_init: f64) -> Self {
        let beta_len = match beta_config {
            BetaConfig::All => horizon,
            BetaConfig::OneAll => num_pairs(n),
            BetaConfig::AllAll => horizon * num_pairs(n),
        };
        PolicyParams {
            kind: PolicyKind::RlRqaoa,
            n,
            horizon,
            beta_config,
            alphas: vec![0.0; horizon],
            gammas: vec![0.0; horizon],
            betas: vec![beta_init; beta_len],
        }
    }

    /// Classical policy parameters: one beta per (pair, sign).
    pub fn rlrone(n: u32, beta_init: f64) -> Self {
        PolicyParams {
            kind: PolicyKind::RlRone,
            n,
            horizon: 0,
            beta_config: BetaConfig::OneAll,
            alphas: Vec::new(),
            gammas: Vec::new(),
            betas: vec![beta_init; 2 * num_pairs(n)],
        }
    }

    /// Angles at one iteration of the quantum policy.
    pub fn angles_at(&self, iteration: usize) -> Result<Angles> {
        if iteration >= self.horizon {
            return Err(Error::InvalidConfig(format!(
                "iteration {iteration} outside horizon {}",
                self.horizon
            )));
        }
        Ok(Angles::new(self.alphas[iteration], self.gammas[iteration]))
    }

    /// Flat beta index for an edge at an iteration (quantum policy).
    pub fn beta_index(&self, iteration: usize, edge: Edge) -> Result<usize> {
        if edge.v >= self.n {
            return Err(Error::ParameterCoverage { u: edge.u, v: edge.v });
        }
        Ok(match self.beta_config {
            BetaConfig::All => iteration,
            BetaConfig::OneAll => pair_index(edge, self.n),
            BetaConfig::AllAll => iteration * num_pairs(self.n) + pair_index(edge, self.n),
        })
    }

    /// Flat beta index for an (edge, sign) action (classical policy).
    pub fn beta_index_signed(&self, edge: Edge, sign: Spin) -> Result<usize> {
        if edge.v >= self.n {
            return Err(Error::ParameterCoverage { u: edge.u, v: edge.v });
        }
        let base = if sign == 1 { 0 } else { num_pairs(self.n) };
        Ok(base + pair_index(edge, self.n))
    }

    /// Total trainable coordinate count (angles + betas).
    pub fn dim(&self) -> usize {
        self.alphas.len() + self.gammas.len() + self.betas.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CheckpointFile::from_params(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<CheckpointFile>(text)?.into_params()
    }
}

/// Pair-keyed checkpoint representation.
#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    policy: PolicyKind,
    n: u32,
    horizon: usize,
    beta_config: BetaConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    gammas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    betas: Vec<(u32, u32, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    betas_per_iteration: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    betas_all_all: Vec<(usize, u32, u32, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    betas_plus: Vec<(u32, u32, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    betas_minus: Vec<(u32, u32, f64)>,
}

impl CheckpointFile {
    fn from_params(p: &PolicyParams) -> Self {
        let mut file = CheckpointFile {
            policy: p.kind,
            n: p.n,
            horizon: p.horizon,
            beta_config: p.beta_config,
            alphas: p.alphas.clone(),
            gammas: p.gammas.clone(),
            betas: Vec::new(),
            betas_per_iteration: Vec::new(),
            betas_all_all: Vec::new(),
            betas_plus: Vec::new(),
            betas_minus: Vec::new(),
        };
        let pairs = || {
            (0..p.n).flat_map(move |u| ((u + 1)..p.n).map(move |v| Edge::new(u, v)))
        };
        match p.kind {
            PolicyKind::RlRqaoa => match p.beta_config {
                BetaConfig::All => file.betas_per_iteration = p.betas.clone(),
                BetaConfig::OneAll => {
                    file.betas = pairs()
                        .map(|e| (e.u, e.v, p.betas[pair_index(e, p.n)]))
                        .collect();
                }
                BetaConfig::AllAll => {
                    for it in 0..p.horizon {
                        for e in pairs() {
                            file.betas_all_all.push((
                                it,
                                e.u,
                                e.v,
                                p.betas[it * num_pairs(p.n) + pair_index(e, p.n)],
                            ));
                        }
                    }
                }
            },
            PolicyKind::RlRone => {
                let np = num_pairs(p.n);
                file.betas_plus =
                    pairs().map(|e| (e.u, e.v, p.betas[pair_index(e, p.n)])).collect();
                file.betas_minus =
                    pairs().map(|e| (e.u, e.v, p.betas[np + pair_index(e, p.n)])).collect();
            }
        }
        file
    }

    fn into_params(self) -> Result<PolicyParams> {
        let mut params = match self.policy {
            PolicyKind::RlRqaoa => {
                PolicyParams::rlrqaoa(self.n, self.horizon, self.beta_config, 0.0)
            }
            PolicyKind::RlRone => PolicyParams::rlrone(self.n, 0.0),
        };
        params.alphas = self.alphas;
        params.gammas = self.gammas;
        if params.kind == PolicyKind::RlRqaoa {
            if params.alphas.len() != self.horizon || params.gammas.len() != self.horizon {
                return Err(Error::InvalidConfig("angle vectors must match horizon".into()));
            }
            match self.beta_config {
                BetaConfig::All => {
                    if self.betas_per_iteration.len() != self.horizon {
                        return Err(Error::InvalidConfig("beta-all length mismatch".into()));
                    }
                    params.betas = self.betas_per_iteration;
                }
                BetaConfig::OneAll => {
                    for (u, v, val) in self.betas {
                        let idx = pair_index(Edge::new(u, v), self.n);
                        params.betas[idx] = val;
                    }
                }
                BetaConfig::AllAll => {
                    for (it, u, v, val) in self.betas_all_all {
                        let idx = it * num_pairs(self.n) + pair_index(Edge::new(u, v), self.n);
                        params.betas[idx] = val;
                    }
                }
            }
        } else {
            let np = num_pairs(self.n);
            for (u, v, val) in self.betas_plus {
                params.betas[pair_index(Edge::new(u, v), self.n)] = val;
            }
            for (u, v, val) in self.betas_minus {
                params.betas[np + pair_index(Edge::new(u, v), self.n)] = val;
            }
        }
        Ok(params)
    }
}

/// One elimination action: an edge plus the sign the constraint imposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Action {
    pub edge: Edge,
    pub sign: Spin,
}

/// Discrete distribution over elimination actions.
#[derive(Debug, Clone)]
pub struct ActionDistribution {
    actions: Vec<Action>,
    probs: Vec<f64>,
}

impl ActionDistribution {
    fn from_logits(actions: Vec<Action>, logits: Vec<f64>) -> Self {
        // Max-shifted softmax; safe for |logits| up to ~1e8.
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        ActionDistribution { actions, probs }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (Action, f64)> + '_ {
        self.actions.iter().copied().zip(self.probs.iter().copied())
    }

    /// Probability of an action, `None` if outside the support.
    pub fn prob(&self, action: Action) -> Option<f64> {
        self.actions.iter().position(|&a| a == action).map(|i| self.probs[i])
    }

    /// Inverse-CDF sample.
    pub fn sample(&self, rng: &mut impl rand::Rng) -> Action {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (action, p) in self.iter() {
            acc += p;
            if u < acc {
                return action;
            }
        }
        *self.actions.last().expect("nonempty support")
    }
}

/// Quantum-informed policy: softmax over the current edges with logits
/// `beta_uv * |M_uv|`; the action's sign is the correlation sign.
pub fn policy_rlrqaoa(
    instance: &IsingInstance,
    correlations: &CorrelationVector,
    params: &PolicyParams,
    iteration: usize,
) -> Result<ActionDistribution> {
    if correlations.is_empty() {
        return Err(Error::EmptyCorrelations);
    }
    let mut actions = Vec::with_capacity(correlations.len());
    let mut logits = Vec::with_capacity(correlations.len());
    for (edge, m) in correlations.iter() {
        let beta = params.betas[params.beta_index(iteration, edge)?];
        actions.push(Action { edge, sign: sign_of(m) });
        logits.push(beta * m.abs());
    }
    let _ = instance; // support is defined by the correlation vector
    Ok(ActionDistribution::from_logits(actions, logits))
}

/// Classical policy: softmax over `(edge, sign)` pairs with logits
/// `beta^sign_uv`; no circuit output is consumed.
pub fn policy_rlrone(instance: &IsingInstance, params: &PolicyParams) -> Result<ActionDistribution> {
    if instance.num_edges() == 0 {
        return Err(Error::EmptyCorrelations);
    }
    let mut actions = Vec::with_capacity(2 * instance.num_edges());
    let mut logits = Vec::with_capacity(2 * instance.num_edges());
    for (edge, _) in instance.edges() {
        for sign in [1i8, -1] {
            actions.push(Action { edge, sign });
            logits.push(params.betas[params.beta_index_signed(edge, sign)?]);
        }
    }
    Ok(ActionDistribution::from_logits(actions, logits))
}

/// Gradient of `log pi(action)` with respect to the trainable parameters.
/// Beta components are sparse over the live action space, keyed by flat index
/// into `params.betas`.
#[derive(Debug, Clone)]
pub enum PolicyGradient {
    Rqaoa { d_alpha: f64, d_gamma: f64, d_betas: Vec<(usize, f64)> },
    Rone { d_betas: Vec<(usize, f64)> },
}

/// Exact score function for either policy.
///
/// For the quantum policy the angle components flow through the closed-form
/// correlation derivatives; at `M = 0` the subgradient of `|.|` is taken as
/// zero.
pub fn grad_log_policy(
    instance: &IsingInstance,
    correlations: &CorrelationVector,
    params: &PolicyParams,
    iteration: usize,
    action: Action,
) -> Result<PolicyGradient> {
    match params.kind {
        PolicyKind::RlRqaoa => {
            let dist = policy_rlrqaoa(instance, correlations, params, iteration)?;
            let chosen = dist
                .actions()
                .iter()
                .position(|a| a.edge == action.edge)
                .ok_or_else(|| Error::InvalidAction(format!("edge {} not live", action.edge)))?;
            if dist.actions()[chosen].sign != action.sign {
                return Err(Error::InvalidAction(format!(
                    "action sign does not match the correlation sign on {}",
                    action.edge
                )));
            }
            let angles = params.angles_at(iteration)?;
            let (_, dm) = correlations_with_grad(instance, angles);

            let mut d_betas: Vec<(usize, f64)> = Vec::new();
            let mut d_alpha = 0.0;
            let mut d_gamma = 0.0;
            for (i, (edge, m)) in correlations.iter().enumerate() {
                let idx = params.beta_index(iteration, edge)?;
                let pi = dist.probs()[i];
                let indicator = if i == chosen { 1.0 } else { 0.0 };
                let coeff = indicator - pi;
                // d logit / d beta = |M|.
                push_sparse(&mut d_betas, idx, m.abs() * coeff);
                // d logit / d angle = beta * sign(M) * dM/d angle.
                let beta = params.betas[idx];
                let s = if m == 0.0 { 0.0 } else { f64::from(sign_of(m)) };
                d_alpha += coeff * beta * s * dm[i].0;
                d_gamma += coeff * beta * s * dm[i].1;
            }
            Ok(PolicyGradient::Rqaoa { d_alpha, d_gamma, d_betas })
        }
        PolicyKind::RlRone => {
            let dist = policy_rlrone(instance, params)?;
            let chosen = dist
                .actions()
                .iter()
                .position(|&a| a == action)
                .ok_or_else(|| Error::InvalidAction(format!("action {:?} not live", action)))?;
            let mut d_betas: Vec<(usize, f64)> = Vec::new();
            for (i, a) in dist.actions().iter().enumerate() {
                let idx = params.beta_index_signed(a.edge, a.sign)?;
                let indicator = if i == chosen { 1.0 } else { 0.0 };
                push_sparse(&mut d_betas, idx, indicator - dist.probs()[i]);
            }
            Ok(PolicyGradient::Rone { d_betas })
        }
    }
}

/// Accumulates into a sparse vector, merging repeated indices (shared-beta
/// layouts route several actions to one coordinate).
fn push_sparse(entries: &mut Vec<(usize, f64)>, idx: usize, value: f64) {
    if let Some(entry) = entries.iter_mut().find(|(i, _)| *i == idx) {
        entry.1 += value;
    } else {
        entries.push((idx, value));
    }
}

/// Stable `log pi(action)`; used by tests and finite-difference checks.
pub fn log_prob(
    instance: &IsingInstance,
    correlations: &CorrelationVector,
    params: &PolicyParams,
    iteration: usize,
    action: Action,
) -> Result<f64> {
    let dist = match params.kind {
        PolicyKind::RlRqaoa => policy_rlrqaoa(instance, correlations, params, iteration)?,
        PolicyKind::RlRone => policy_rlrone(instance, params)?,
    };
    let p = match params.kind {
        // The quantum policy's action is identified by its edge.
        PolicyKind::RlRqaoa => dist
            .iter()
            .find(|(a, _)| a.edge == action.edge)
            .map(|(_, p)| p),
        PolicyKind::RlRone => dist.prob(action),
    };
    p.map(f64::ln).ok_or_else(|| Error::InvalidAction("action outside support".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaoa::all_correlations;
    use crate::rqaoa::tie_set;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fixed_corr(entries: &[((u32, u32), f64)]) -> CorrelationVector {
        CorrelationVector::from_parts(
            entries.iter().map(|&((u, v), _)| Edge::new(u, v)).collect(),
            entries.iter().map(|&(_, m)| m).collect(),
        )
    }

    fn path_instance(n: u32) -> IsingInstance {
        let edges: Vec<(u32, u32, f64)> = (0..n - 1).map(|v| (v, v + 1, 1.0)).collect();
        IsingInstance::new(n, &edges, &[]).unwrap()
    }

    #[test]
    fn symmetric_logits_are_uniform() {
        let inst = path_instance(3);
        let corr = fixed_corr(&[((0, 1), 0.5), ((1, 2), 0.5)]);
        let params = PolicyParams::rlrqaoa(3, 1, BetaConfig::OneAll, 1.0);
        let dist = policy_rlrqaoa(&inst, &corr, &params, 0).unwrap();
        assert!((dist.probs()[0] - 0.5).abs() < 1e-12);
        assert!((dist.probs()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_correlations_follow_logistic() {
        let inst = path_instance(3);
        let corr = fixed_corr(&[((0, 1), 0.9), ((1, 2), 0.1)]);
        let params = PolicyParams::rlrqaoa(3, 1, BetaConfig::OneAll, 1.0);
        let dist = policy_rlrqaoa(&inst, &corr, &params, 0).unwrap();
        assert!((dist.probs()[0] - 0.690).abs() < 1e-3);
        assert!((dist.probs()[1] - 0.310).abs() < 1e-3);
    }

    #[test]
    fn huge_beta_recovers_greedy_tie_set() {
        let inst = path_instance(4);
        let corr = fixed_corr(&[((0, 1), 0.8), ((1, 2), -0.8), ((2, 3), 0.3)]);
        let params = PolicyParams::rlrqaoa(4, 1, BetaConfig::OneAll, 1e6);
        let dist = policy_rlrqaoa(&inst, &corr, &params, 0).unwrap();
        let ties = tie_set(&corr, 1e-8);
        let tie_mass: f64 = dist
            .iter()
            .filter(|(a, _)| ties.iter().any(|&(e, _, _)| e == a.edge))
            .map(|(_, p)| p)
            .sum();
        assert!(tie_mass >= 1.0 - 1e-6);
        // Total variation against the uniform tie-set distribution.
        let uniform = 1.0 / ties.len() as f64;
        let tv: f64 = dist
            .iter()
            .map(|(a, p)| {
                let target =
                    if ties.iter().any(|&(e, _, _)| e == a.edge) { uniform } else { 0.0 };
                (p - target).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 1e-6, "tv = {tv}");
    }

    #[test]
    fn no_overflow_for_extreme_logits() {
        let inst = path_instance(3);
        let corr = fixed_corr(&[((0, 1), 1.0), ((1, 2), -0.5)]);
        let params = PolicyParams::rlrqaoa(3, 1, BetaConfig::OneAll, 1e8);
        let dist = policy_rlrqaoa(&inst, &corr, &params, 0).unwrap();
        assert!(dist.probs().iter().all(|p| p.is_finite()));
        assert!((dist.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rlrone_support_and_probs() {
        let inst = path_instance(2);
        let mut params = PolicyParams::rlrone(2, 0.0);
        let dist = policy_rlrone(&inst, &params).unwrap();
        assert_eq!(dist.len(), 2);
        assert!((dist.probs()[0] - 0.5).abs() < 1e-12);

        let idx = params.beta_index_signed(Edge::new(0, 1), 1).unwrap();
        params.betas[idx] = 3.0f64.ln();
        let dist = policy_rlrone(&inst, &params).unwrap();
        assert!((dist.prob(Action { edge: Edge::new(0, 1), sign: 1 }).unwrap() - 0.75).abs() < 1e-12);
        assert!((dist.prob(Action { edge: Edge::new(0, 1), sign: -1 }).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rlrone_support_size_is_twice_edges() {
        let inst = path_instance(6);
        let params = PolicyParams::rlrone(6, 0.3);
        let dist = policy_rlrone(&inst, &params).unwrap();
        assert_eq!(dist.len(), 2 * inst.num_edges());
    }

    #[test]
    fn single_edge_gradients_vanish() {
        let inst = path_instance(2);
        let corr = fixed_corr(&[((0, 1), 0.4)]);
        let mut params = PolicyParams::rlrqaoa(2, 1, BetaConfig::OneAll, 2.0);
        params.alphas[0] = 0.3;
        params.gammas[0] = 0.7;
        let action = Action { edge: Edge::new(0, 1), sign: 1 };
        match grad_log_policy(&inst, &corr, &params, 0, action).unwrap() {
            PolicyGradient::Rqaoa { d_alpha, d_gamma, d_betas } => {
                assert_eq!(d_alpha, 0.0);
                assert_eq!(d_gamma, 0.0);
                for (_, g) in d_betas {
                    assert!(g.abs() < 1e-15);
                }
            }
            _ => panic!("wrong variant"),
        }
    }

    #[test]
    fn action_outside_support_errors() {
        let inst = path_instance(3);
        let corr = fixed_corr(&[((0, 1), 0.4), ((1, 2), -0.2)]);
        let params = PolicyParams::rlrqaoa(3, 1, BetaConfig::OneAll, 1.0);
        let bogus = Action { edge: Edge::new(0, 2), sign: 1 };
        assert!(matches!(
            grad_log_policy(&inst, &corr, &params, 0, bogus),
            Err(Error::InvalidAction(_))
        ));
    }

    fn random_test_instance(rng: &mut ChaCha8Rng, n: u32) -> IsingInstance {
        loop {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.5) {
                        edges.push((u, v, rng.gen_range(-1.5..1.5)));
                    }
                }
            }
            if edges.len() >= 2 {
                return IsingInstance::new(n, &edges, &[]).unwrap();
            }
        }
    }

    /// Central finite differences of log pi over every parameter block.
    fn check_gradients_fd(rng: &mut ChaCha8Rng, kind: PolicyKind) {
        let n = rng.gen_range(4..=7);
        let inst = random_test_instance(rng, n);
        let horizon = 3;
        let iteration = rng.gen_range(0..horizon);
        let mut params = match kind {
            PolicyKind::RlRqaoa => {
                let config = match rng.gen_range(0..3) {
                    0 => BetaConfig::All,
                    1 => BetaConfig::OneAll,
                    _ => BetaConfig::AllAll,
                };
                PolicyParams::rlrqaoa(n, horizon, config, 0.0)
            }
            PolicyKind::RlRone => PolicyParams::rlrone(n, 0.0),
        };
        for b in &mut params.betas {
            *b = rng.gen_range(-2.0..2.0);
        }
        for a in &mut params.alphas {
            *a = rng.gen_range(-1.5..1.5);
        }
        for g in &mut params.gammas {
            *g = rng.gen_range(-1.5..1.5);
        }

        let correlations = |p: &PolicyParams| match kind {
            PolicyKind::RlRqaoa => all_correlations(&inst, p.angles_at(iteration).unwrap()),
            PolicyKind::RlRone => CorrelationVector::from_parts(Vec::new(), Vec::new()),
        };
        let corr = correlations(&params);
        let dist = match kind {
            PolicyKind::RlRqaoa => policy_rlrqaoa(&inst, &corr, &params, iteration).unwrap(),
            PolicyKind::RlRone => policy_rlrone(&inst, &params).unwrap(),
        };
        let action = dist.sample(rng);
        let grad = grad_log_policy(&inst, &corr, &params, iteration, action).unwrap();

        let h = 1e-6;
        let close = |analytic: f64, fd: f64| {
            let tol = f64::max(1e-5 * f64::max(analytic.abs(), fd.abs()), 1e-7);
            assert!((analytic - fd).abs() <= tol, "analytic {analytic} vs fd {fd}");
        };

        match grad {
            PolicyGradient::Rqaoa { d_alpha, d_gamma, d_betas } => {
                for (idx, g) in d_betas {
                    let mut plus = params.clone();
                    plus.betas[idx] += h;
                    let mut minus = params.clone();
                    minus.betas[idx] -= h;
                    let lp = log_prob(&inst, &corr, &plus, iteration, action).unwrap();
                    let lm = log_prob(&inst, &corr, &minus, iteration, action).unwrap();
                    close(g, (lp - lm) / (2.0 * h));
                }
                let mut plus = params.clone();
                plus.alphas[iteration] += h;
                let mut minus = params.clone();
                minus.alphas[iteration] -= h;
                let lp =
                    log_prob(&inst, &correlations(&plus), &plus, iteration, action).unwrap();
                let lm =
                    log_prob(&inst, &correlations(&minus), &minus, iteration, action).unwrap();
                close(d_alpha, (lp - lm) / (2.0 * h));

                let mut plus = params.clone();
                plus.gammas[iteration] += h;
                let mut minus = params.clone();
                minus.gammas[iteration] -= h;
                let lp =
                    log_prob(&inst, &correlations(&plus), &plus, iteration, action).unwrap();
                let lm =
                    log_prob(&inst, &correlations(&minus), &minus, iteration, action).unwrap();
                close(d_gamma, (lp - lm) / (2.0 * h));
            }
            PolicyGradient::Rone { d_betas } => {
                for (idx, g) in d_betas {
                    let mut plus = params.clone();
                    plus.betas[idx] += h;
                    let mut minus = params.clone();
                    minus.betas[idx] -= h;
                    let lp = log_prob(&inst, &corr, &plus, iteration, action).unwrap();
                    let lm = log_prob(&inst, &corr, &minus, iteration, action).unwrap();
                    close(g, (lp - lm) / (2.0 * h));
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..15 {
            check_gradients_fd(&mut rng, PolicyKind::RlRqaoa);
            check_gradients_fd(&mut rng, PolicyKind::RlRone);
        }
    }

    #[test]
    fn expected_score_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let inst = random_test_instance(&mut rng, 5);
            let mut params = PolicyParams::rlrqaoa(5, 2, BetaConfig::OneAll, 0.0);
            for b in &mut params.betas {
                *b = rng.gen_range(-3.0..3.0);
            }
            params.alphas = vec![0.4, 0.8];
            params.gammas = vec![-0.3, 0.9];
            let corr = all_correlations(&inst, params.angles_at(0).unwrap());
            let dist = policy_rlrqaoa(&inst, &corr, &params, 0).unwrap();
            let mut acc: std::collections::HashMap<usize, f64> = Default::default();
            let mut acc_alpha = 0.0;
            let mut acc_gamma = 0.0;
            for (action, p) in dist.iter() {
                match grad_log_policy(&inst, &corr, &params, 0, action).unwrap() {
                    PolicyGradient::Rqaoa { d_alpha, d_gamma, d_betas } => {
                        acc_alpha += p * d_alpha;
                        acc_gamma += p * d_gamma;
                        for (idx, g) in d_betas {
                            *acc.entry(idx).or_default() += p * g;
                        }
                    }
                    _ => unreachable!(),
                }
            }
            assert!(acc_alpha.abs() < 1e-10);
            assert!(acc_gamma.abs() < 1e-10);
            for (_, v) in acc {
                assert!(v.abs() < 1e-10);
            }

            // Classical policy too.
            let params = {
                let mut p = PolicyParams::rlrone(5, 0.0);
                for b in &mut p.betas {
                    *b = rng.gen_range(-3.0..3.0);
                }
                p
            };
            let dist = policy_rlrone(&inst, &params).unwrap();
            let empty = CorrelationVector::from_parts(Vec::new(), Vec::new());
            let mut acc: std::collections::HashMap<usize, f64> = Default::default();
            for (action, p) in dist.iter() {
                match grad_log_policy(&inst, &empty, &params, 0, action).unwrap() {
                    PolicyGradient::Rone { d_betas } => {
                        for (idx, g) in d_betas {
                            *acc.entry(idx).or_default() += p * g;
                        }
                    }
                    _ => unreachable!(),
                }
            }
            for (_, v) in acc {
                assert!(v.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for config in [BetaConfig::All, BetaConfig::OneAll, BetaConfig::AllAll] {
            let mut params = PolicyParams::rlrqaoa(5, 3, config, 25.0);
            for b in &mut params.betas {
                *b = rng.gen_range(-5.0..5.0);
            }
            for a in &mut params.alphas {
                *a = rng.gen_range(-1.0..1.0);
            }
            let text = params.to_json().unwrap();
            assert_eq!(PolicyParams::from_json(&text).unwrap(), params);
        }
        let mut params = PolicyParams::rlrone(6, 25.0);
        for b in &mut params.betas {
            *b = rng.gen_range(-5.0..5.0);
        }
        let text = params.to_json().unwrap();
        assert_eq!(PolicyParams::from_json(&text).unwrap(), params);
    }

    #[test]
    fn coverage_error_for_out_of_range_pair() {
        let params = PolicyParams::rlrqaoa(3, 1, BetaConfig::OneAll, 1.0);
        assert!(matches!(
            params.beta_index(0, Edge::new(1, 5)),
            Err(Error::ParameterCoverage { .. })
        ));
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let inst = path_instance(5);
        let params = PolicyParams::rlrone(5, 0.0);
        let dist = policy_rlrone(&inst, &params).unwrap();
        let seq1: Vec<Action> = {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            (0..8).map(|_| dist.sample(&mut rng)).collect()
        };
        let seq2: Vec<Action> = {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            (0..8).map(|_| dist.sample(&mut rng)).collect()
        };
        assert_eq!(seq1, seq2);
    }
}
