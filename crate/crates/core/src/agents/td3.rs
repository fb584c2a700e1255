use ndarray::{concatenate, s, Array2, Axis};
use rand::RngCore;
use rand_distr::{Distribution, Normal};

use crate::agents::{batch_mean_cosine, check_finite, stack_rows, AgentConfig, TrainStats};
use crate::error::{Error, Result};
use crate::metrics::drd_batch;
use crate::nn::{adam_step, init_mlp, soft_update, AdamConfig, AdamState, ForwardTrace, Mlp};
use crate::peer::{pe_loss, peer_loss, peer_loss_grad, smooth_target_action, td_target_td3};
use crate::replay::Transition;
use crate::rng::LabRng;

/// TD3 with twin critics, both regularised by PEER against their own targets.
///
/// The actor's linear output is squashed with `tanh` and mapped onto
/// `[action_low, action_high]`. Critics take `concat(obs, action)` and end in
/// a bias-free scalar head.
#[derive(Debug, Clone)]
pub struct Td3Agent {
    pub actor: Mlp,
    pub actor_target: Mlp,
    pub critic1: Mlp,
    pub critic1_target: Mlp,
    pub critic2: Mlp,
    pub critic2_target: Mlp,
    pub actor_opt: AdamState,
    pub critic1_opt: AdamState,
    pub critic2_opt: AdamState,
    pub config: AgentConfig,
    /// Number of completed `train_step` calls.
    pub train_steps: u64,
    obs_width: usize,
    action_width: usize,
    action_low: f64,
    action_high: f64,
}

struct ActorPass {
    trace: ForwardTrace,
    squashed: Array2<f64>,
    actions: Array2<f64>,
}

impl Td3Agent {
    pub fn new(
        config: &AgentConfig,
        obs_width: usize,
        action_width: usize,
        action_low: f64,
        action_high: f64,
        init_rng: &mut LabRng,
    ) -> Result<Self> {
        config.validate()?;
        if !(action_low < action_high) {
            return Err(Error::Domain(format!(
                "empty action range [{action_low}, {action_high}]"
            )));
        }
        let mut actor_sizes = vec![obs_width];
        actor_sizes.extend(&config.hidden);
        actor_sizes.push(action_width);
        let mut critic_sizes = vec![obs_width + action_width];
        critic_sizes.extend(&config.hidden);
        critic_sizes.push(1);

        let actor = init_mlp(&actor_sizes, init_rng.next_u64(), true)?;
        let critic1 = init_mlp(&critic_sizes, init_rng.next_u64(), false)?;
        let critic2 = init_mlp(&critic_sizes, init_rng.next_u64(), false)?;
        Ok(Td3Agent {
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor_opt: AdamState::new(&actor),
            critic1_opt: AdamState::new(&critic1),
            critic2_opt: AdamState::new(&critic2),
            actor,
            critic1,
            critic2,
            config: config.clone(),
            train_steps: 0,
            obs_width,
            action_width,
            action_low,
            action_high,
        })
    }

    fn half_range(&self) -> f64 {
        0.5 * (self.action_high - self.action_low)
    }

    fn mid(&self) -> f64 {
        0.5 * (self.action_high + self.action_low)
    }

    fn actor_pass(&self, net: &Mlp, states: &Array2<f64>) -> Result<ActorPass> {
        let trace = net.forward_batch(states.view())?;
        let squashed = trace.output().mapv(f64::tanh);
        let (mid, half) = (self.mid(), self.half_range());
        let actions = squashed.mapv(|t| mid + half * t);
        Ok(ActorPass {
            trace,
            squashed,
            actions,
        })
    }

    /// Noise-free actor output, used for evaluation.
    pub fn deterministic_action(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let states = stack_rows(std::iter::once(obs), self.obs_width)?;
        Ok(self
            .actor_pass(&self.actor, &states)?
            .actions
            .row(0)
            .to_vec())
    }

    /// Actor output, plus Gaussian exploration noise unless `deterministic`.
    ///
    /// `exploration_noise_std` is a fraction of the action half-range. The
    /// result is clipped to the action bounds.
    pub fn act(
        &self,
        obs: &[f64],
        exploration_noise_std: f64,
        rng: &mut LabRng,
        deterministic: bool,
    ) -> Result<Vec<f64>> {
        let mut action = self.deterministic_action(obs)?;
        if !deterministic {
            let noise = Normal::new(0.0, exploration_noise_std * self.half_range())
                .map_err(|e| Error::Domain(e.to_string()))?;
            for a in &mut action {
                *a = (*a + noise.sample(rng)).clamp(self.action_low, self.action_high);
            }
        }
        Ok(action)
    }

    /// Q-value of critic 1 for one state-action pair.
    pub fn q1(&self, obs: &[f64], action: &[f64]) -> Result<f64> {
        let x: Vec<f64> = obs.iter().chain(action).copied().collect();
        Ok(self.critic1.forward(&x)?.output[0])
    }

    /// One TD3 update. Both critics always step; the actor and all three
    /// target networks update only when the step count is a multiple of
    /// `policy_delay`. `rng` drives target-policy smoothing noise.
    pub fn train_step(&mut self, batch: &[Transition], rng: &mut LabRng) -> Result<TrainStats> {
        if batch.is_empty() {
            return Err(Error::Domain("empty training batch".into()));
        }
        let n = batch.len();
        let states = stack_rows(batch.iter().map(|t| t.state.as_slice()), self.obs_width)?;
        let next_states = stack_rows(
            batch.iter().map(|t| t.next_state.as_slice()),
            self.obs_width,
        )?;
        let actions = stack_rows(batch.iter().map(|t| t.action.as_slice()), self.action_width)?;
        let rewards: Vec<f64> = batch.iter().map(|t| t.reward).collect();

        let half = self.half_range();
        let cfg = self.config.clone();
        let beta = cfg.effective_beta();

        // Bootstrap targets from the smoothed target policy and both target critics.
        let next_pass = self.actor_pass(&self.actor_target, &next_states)?;
        let mut next_actions = Array2::zeros((n, self.action_width));
        for (i, row) in next_pass.actions.rows().into_iter().enumerate() {
            let smoothed = smooth_target_action(
                &row.to_vec(),
                cfg.target_noise_std * half,
                cfg.noise_clip * half,
                self.action_low,
                self.action_high,
                rng,
            )?;
            next_actions.row_mut(i).assign(&ndarray::aview1(&smoothed));
        }
        let next_inputs = concatenate(Axis(1), &[next_states.view(), next_actions.view()])
            .map_err(|e| Error::Shape(e.to_string()))?;
        let t1 = self.critic1_target.forward_batch(next_inputs.view())?;
        let t2 = self.critic2_target.forward_batch(next_inputs.view())?;
        let targets: Vec<f64> = batch
            .iter()
            .enumerate()
            .map(|(i, t)| {
                td_target_td3(
                    t.reward,
                    t.done,
                    cfg.gamma,
                    t1.output()[[i, 0]],
                    t2.output()[[i, 0]],
                )
            })
            .collect();

        let inputs = concatenate(Axis(1), &[states.view(), actions.view()])
            .map_err(|e| Error::Shape(e.to_string()))?;

        let norm1 = self.critic1.last_layer_norm();
        let mut pe_sum = 0.0;
        let mut peer_sum = 0.0;
        let mut report = None;
        for (critic, opt, target_trace) in [
            (&mut self.critic1, &mut self.critic1_opt, &t1),
            (&mut self.critic2, &mut self.critic2_opt, &t2),
        ] {
            let trace = critic.forward_batch(inputs.view())?;
            let q: Vec<f64> = trace.output().column(0).to_vec();
            let phi = trace.representation();
            let phi_next = target_trace.representation();
            let pe = pe_loss(&q, &targets)?;
            let peer = peer_loss(phi.view(), phi_next.view())?;
            check_finite("critic loss", pe + beta * peer)?;

            if report.is_none() {
                let drd = drd_batch(phi.view(), phi_next.view(), &rewards, cfg.gamma, norm1)?;
                let cos = batch_mean_cosine(phi.view(), phi_next.view())?;
                report = Some((drd, cos));
            }

            let output_grad =
                Array2::from_shape_fn((n, 1), |(i, _)| 2.0 * (q[i] - targets[i]) / n as f64);
            let repr_grad = (beta > 0.0).then(|| peer_loss_grad(phi_next.view(), beta));
            let (grads, _) = critic.backward_with(
                &trace,
                output_grad.view(),
                repr_grad.as_ref().map(|g| g.view()),
            )?;
            adam_step(critic, &grads, opt, AdamConfig::with_lr(cfg.lr))?;
            pe_sum += pe;
            peer_sum += peer;
        }

        self.train_steps += 1;
        if self.train_steps.is_multiple_of(cfg.policy_delay as u64) {
            self.update_actor(&states)?;
            soft_update(&self.actor, &mut self.actor_target, cfg.eta)?;
            soft_update(&self.critic1, &mut self.critic1_target, cfg.eta)?;
            soft_update(&self.critic2, &mut self.critic2_target, cfg.eta)?;
        }

        let (drd, rep_cosine) = report.expect("two critics processed");
        Ok(TrainStats {
            pe_loss: pe_sum / 2.0,
            peer_loss: peer_sum / 2.0,
            drd,
            rep_cosine,
        })
    }

    /// Deterministic policy gradient: ascend critic 1's Q along the actor.
    fn update_actor(&mut self, states: &Array2<f64>) -> Result<()> {
        let n = states.nrows();
        let pass = self.actor_pass(&self.actor, states)?;
        let inputs = concatenate(Axis(1), &[states.view(), pass.actions.view()])
            .map_err(|e| Error::Shape(e.to_string()))?;
        let critic_trace = self.critic1.forward_batch(inputs.view())?;
        let actor_loss = -critic_trace.output().mean().unwrap_or(0.0);
        check_finite("actor loss", actor_loss)?;

        let output_grad = Array2::from_elem((n, 1), -1.0 / n as f64);
        let (_, input_grad) =
            self.critic1
                .backward_with(&critic_trace, output_grad.view(), None)?;
        let half = self.half_range();
        let mut action_grad = input_grad.slice(s![.., self.obs_width..]).to_owned();
        action_grad.zip_mut_with(&pass.squashed, |g, &t| *g *= half * (1.0 - t * t));
        let grads = self.actor.backward(&pass.trace, action_grad.view())?;
        adam_step(
            &mut self.actor,
            &grads,
            &mut self.actor_opt,
            AdamConfig::with_lr(self.config.lr),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn small_agent(seed: u64) -> Td3Agent {
        let cfg = AgentConfig {
            hidden: vec![8, 8],
            ..AgentConfig::continuous()
        };
        Td3Agent::new(&cfg, 3, 1, -2.0, 2.0, &mut LabRng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn zero_actor_outputs_midpoint() {
        let mut agent = small_agent(0);
        let zeros = vec![0.0; agent.actor.num_params()];
        agent.actor.set_flat_params(&zeros).unwrap();
        let mut rng = LabRng::seed_from_u64(1);
        assert_eq!(
            agent.act(&[1.0, 0.0, 0.3], 0.2, &mut rng, true).unwrap(),
            vec![0.0]
        );
    }

    #[test]
    fn deterministic_and_seeded_actions() {
        let agent = small_agent(3);
        let obs = [0.5, -0.5, 1.0];
        let mut r = LabRng::seed_from_u64(0);
        let a = agent.act(&obs, 0.2, &mut r, true).unwrap();
        let b = agent.act(&obs, 0.2, &mut r, true).unwrap();
        assert_eq!(a, b);

        let x = agent
            .act(&obs, 0.2, &mut LabRng::seed_from_u64(8), false)
            .unwrap();
        let y = agent
            .act(&obs, 0.2, &mut LabRng::seed_from_u64(8), false)
            .unwrap();
        assert_eq!(x, y);
        let mut replay = LabRng::seed_from_u64(8);
        let noise: f64 = Normal::new(0.0, 0.4).unwrap().sample(&mut replay);
        assert_eq!(x[0], (a[0] + noise).clamp(-2.0, 2.0));
    }

    #[test]
    fn actions_stay_in_bounds() {
        let agent = small_agent(4);
        let mut rng = LabRng::seed_from_u64(2);
        for _ in 0..200 {
            let a = agent.act(&[1.0, 0.0, 8.0], 5.0, &mut rng, false).unwrap();
            assert!((-2.0..=2.0).contains(&a[0]));
        }
    }
}
