use ndarray::Array2;
use rand::{Rng, RngCore};

use crate::agents::{batch_mean_cosine, check_finite, stack_rows, AgentConfig, TrainStats};
use crate::error::{Error, Result};
use crate::metrics::drd_batch;
use crate::nn::{adam_step, init_mlp, soft_update, AdamConfig, AdamState, Mlp};
use crate::peer::{pe_loss, peer_loss, peer_loss_grad, td_target_dqn};
use crate::replay::Transition;
use crate::rng::LabRng;

/// DQN with a state-only encoder and a bias-free linear head over actions.
///
/// The representation `Φ(s)` is the last hidden layer; PEER penalises
/// `⟨Φ(s), Φ'(s')⟩` with `Φ'` from the target network.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub online: Mlp,
    pub target: Mlp,
    pub optimizer: AdamState,
    pub config: AgentConfig,
    pub train_steps: u64,
    n_actions: usize,
}

impl DqnAgent {
    pub fn new(
        config: &AgentConfig,
        obs_width: usize,
        n_actions: usize,
        init_rng: &mut LabRng,
    ) -> Result<Self> {
        config.validate()?;
        let mut sizes = vec![obs_width];
        sizes.extend(&config.hidden);
        sizes.push(n_actions);
        let online = init_mlp(&sizes, init_rng.next_u64(), false)?;
        Ok(Self::from_network(config, online))
    }

    /// Wrap an existing value network; the target starts as an exact copy.
    pub fn from_network(config: &AgentConfig, online: Mlp) -> Self {
        let n_actions = online.output_width();
        DqnAgent {
            target: online.clone(),
            optimizer: AdamState::new(&online),
            online,
            config: config.clone(),
            train_steps: 0,
            n_actions,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn q_values(&self, obs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.online.forward(obs)?.output)
    }

    /// Argmax of the online Q-values, lowest index on ties.
    pub fn greedy_action(&self, obs: &[f64]) -> Result<usize> {
        let q = self.q_values(obs)?;
        let mut best = 0;
        for (a, &v) in q.iter().enumerate().skip(1) {
            if v > q[best] {
                best = a;
            }
        }
        Ok(best)
    }

    /// Uniform random action with probability `epsilon`, else greedy.
    ///
    /// Exactly one uniform draw decides exploration; a second picks the
    /// random action when exploring.
    pub fn act_epsilon_greedy(&self, obs: &[f64], epsilon: f64, rng: &mut LabRng) -> Result<usize> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Domain(format!(
                "epsilon must lie in [0, 1], got {epsilon}"
            )));
        }
        if rng.random::<f64>() < epsilon {
            Ok(rng.random_range(0..self.n_actions))
        } else {
            self.greedy_action(obs)
        }
    }

    /// One gradient step of `pe_loss + β·peer_loss` on the online network,
    /// followed by a soft target update.
    pub fn train_step(&mut self, batch: &[Transition]) -> Result<TrainStats> {
        if batch.is_empty() {
            return Err(Error::Domain("empty training batch".into()));
        }
        let cfg = &self.config;
        let width = self.online.input_width();
        let n = batch.len();
        let states = stack_rows(batch.iter().map(|t| t.state.as_slice()), width)?;
        let next_states = stack_rows(batch.iter().map(|t| t.next_state.as_slice()), width)?;
        let actions = batch
            .iter()
            .map(|t| match t.action.as_slice() {
                [a] if *a >= 0.0 && a.fract() == 0.0 && (*a as usize) < self.n_actions => {
                    Ok(*a as usize)
                }
                other => Err(Error::Domain(format!("invalid discrete action {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;

        let trace = self.online.forward_batch(states.view())?;
        let next = self.target.forward_batch(next_states.view())?;
        let q = trace.output();
        let q_next = next.output();

        let targets = batch
            .iter()
            .enumerate()
            .map(|(i, t)| td_target_dqn(t.reward, t.done, cfg.gamma, &q_next.row(i).to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let q_taken: Vec<f64> = actions
            .iter()
            .enumerate()
            .map(|(i, &a)| q[[i, a]])
            .collect();

        let phi = trace.representation();
        let phi_next = next.representation();
        let pe = pe_loss(&q_taken, &targets)?;
        let peer = peer_loss(phi.view(), phi_next.view())?;
        let beta = cfg.effective_beta();
        check_finite("combined loss", pe + beta * peer)?;

        let mut output_grad = Array2::zeros((n, self.n_actions));
        for (i, &a) in actions.iter().enumerate() {
            output_grad[[i, a]] = 2.0 * (q_taken[i] - targets[i]) / n as f64;
        }
        let repr_grad = (beta > 0.0).then(|| peer_loss_grad(phi_next.view(), beta));

        let rewards: Vec<f64> = batch.iter().map(|t| t.reward).collect();
        let drd = drd_batch(
            phi.view(),
            phi_next.view(),
            &rewards,
            cfg.gamma,
            self.online.last_layer_norm(),
        )?;
        let rep_cosine = batch_mean_cosine(phi.view(), phi_next.view())?;

        let (grads, _) = self.online.backward_with(
            &trace,
            output_grad.view(),
            repr_grad.as_ref().map(|g| g.view()),
        )?;
        adam_step(
            &mut self.online,
            &grads,
            &mut self.optimizer,
            AdamConfig::with_lr(cfg.lr),
        )?;
        soft_update(&self.online, &mut self.target, cfg.eta)?;
        self.train_steps += 1;

        Ok(TrainStats {
            pe_loss: pe,
            peer_loss: peer,
            drd,
            rep_cosine,
        })
    }
}
