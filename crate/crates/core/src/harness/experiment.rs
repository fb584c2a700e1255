//! Seeded experiment runner.
//!
//! Each seed is an independent run with its own agent, environment, replay
//! buffer and named rng streams. A run produces one CSV; the experiment
//! writes a summary over the final evaluation scores of all seeds.

use std::path::{Path, PathBuf};

use rand::Rng;

use crate::agents::{evaluate, rollout, DqnAgent, Greedy, Td3Agent, TrainStats};
use crate::envs::{Environment, GridWorld, Pendulum};
use crate::error::{Error, Result};
use crate::harness::config::{EnvKind, ExperimentConfig};
use crate::harness::log::{write_csv, MetricRow, RowLog};
use crate::metrics::q_gap;
use crate::replay::{ReplayBuffer, Transition};
use crate::rng::{self, LabRng};

/// Number of trailing evaluations averaged into a seed's final score.
pub const FINAL_EVALS: usize = 10;

/// Everything a single seed produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub rows: Vec<MetricRow>,
    pub evaluations: Vec<f64>,
    pub failure: Option<String>,
}

impl SeedRun {
    /// Mean of the last ten evaluation returns (fewer if fewer were run).
    pub fn final_score(&self) -> Option<f64> {
        final_score(&self.evaluations)
    }
}

pub fn final_score(evaluations: &[f64]) -> Option<f64> {
    if evaluations.is_empty() {
        return None;
    }
    let tail = &evaluations[evaluations.len().saturating_sub(FINAL_EVALS)..];
    Some(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedSummary {
    pub seed: u64,
    pub csv_path: PathBuf,
    pub final_score: Option<f64>,
    pub failure: Option<String>,
}

/// Aggregate over seeds; failed seeds are excluded from mean and std.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub seeds: Vec<SeedSummary>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub summary_path: PathBuf,
}

pub fn csv_path(output_dir: &Path, seed: u64) -> PathBuf {
    output_dir.join(format!("seed_{seed}.csv"))
}

/// Run every seed, write `seed_<n>.csv` per seed plus `summary.csv` and the
/// resolved `config.txt` into the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Summary> {
    config.validate()?;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cfg_path = dir.join("config.txt");
    std::fs::write(&cfg_path, config.to_config_text()).map_err(|e| Error::io(&cfg_path, e))?;

    let mut seeds = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let run = run_seed(config, seed);
        let path = csv_path(dir, seed);
        write_csv(&path, &run.rows, run.failure.as_deref())?;
        seeds.push(SeedSummary {
            seed,
            csv_path: path,
            final_score: run.final_score(),
            failure: run.failure,
        });
    }

    let scores: Vec<f64> = seeds
        .iter()
        .filter(|s| s.failure.is_none())
        .filter_map(|s| s.final_score)
        .collect();
    let stats = mean_std(&scores);
    let summary_path = dir.join("summary.csv");
    let mut text = String::from("# peer-lab summary v1\nlabel,final_score,status\n");
    for s in &seeds {
        let score = s.final_score.map(|v| v.to_string()).unwrap_or_default();
        let status = if s.failure.is_some() { "failed" } else { "ok" };
        text.push_str(&format!("{},{score},{status}\n", s.seed));
    }
    if let Some((mean, std)) = stats {
        text.push_str(&format!("mean,{mean},\nstd,{std},\n"));
    }
    std::fs::write(&summary_path, text).map_err(|e| Error::io(&summary_path, e))?;

    Ok(Summary {
        seeds,
        mean: stats.map(|s| s.0),
        std: stats.map(|s| s.1),
        summary_path,
    })
}

/// Run a single seed in memory. Errors end the run and are reported in
/// `failure`; rows logged before the error are kept.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> SeedRun {
    let mut run = SeedRun {
        seed,
        rows: Vec::new(),
        evaluations: Vec::new(),
        failure: None,
    };
    let mut log = RowLog::new();
    let result = match config.env {
        EnvKind::GridWorld => run_grid_world(config, seed, &mut log, &mut run.evaluations),
        EnvKind::Pendulum => run_pendulum(config, seed, &mut log, &mut run.evaluations),
    };
    if let Err(e) = result {
        run.failure = Some(e.to_string());
    }
    run.rows = log.into_rows();
    run
}

struct Streams {
    init: LabRng,
    env: LabRng,
    replay: LabRng,
    explore: LabRng,
    eval: LabRng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        Streams {
            init: rng::stream(seed, rng::NET_INIT),
            env: rng::stream(seed, rng::ENV),
            replay: rng::stream(seed, rng::REPLAY),
            explore: rng::stream(seed, rng::EXPLORATION),
            eval: rng::stream(seed, rng::EVAL),
        }
    }
}

fn stats_row(seed: u64, env_step: u64, episode: u64, stats: &TrainStats) -> MetricRow {
    MetricRow {
        seed,
        env_step,
        episode,
        pe_loss: Some(stats.pe_loss),
        peer_loss: Some(stats.peer_loss),
        mean_similarity: Some(stats.drd.mean_similarity),
        mean_bound: Some(stats.drd.mean_bound),
        mean_drd: Some(stats.drd.mean_drd),
        rep_cosine: Some(stats.rep_cosine),
        degenerate_rep_count: Some(stats.drd.degenerate_rows as u64),
        ..Default::default()
    }
}

/// `max_a Q(S1) - max_a Q(S2)` under the online network.
pub fn grid_q_gap(agent: &DqnAgent) -> Result<f64> {
    let q1 = agent.q_values(&GridWorld::one_hot(GridWorld::S1))?;
    let q2 = agent.q_values(&GridWorld::one_hot(GridWorld::S2))?;
    q_gap(&q1, &q2)
}

/// Steps the greedy policy needs from the start cell to the terminal cell;
/// the episode cap when it never arrives.
pub fn greedy_steps_to_goal(agent: &DqnAgent) -> Result<usize> {
    let mut env = GridWorld::new();
    // The grid world never consumes the rng.
    let mut unused = rng::stream(0, rng::EVAL);
    let (_, steps) = rollout(&mut Greedy(agent), &mut env, &mut unused)?;
    Ok(steps)
}

fn run_grid_world(
    config: &ExperimentConfig,
    seed: u64,
    log: &mut RowLog,
    evaluations: &mut Vec<f64>,
) -> Result<()> {
    let cfg = &config.agent;
    let mut streams = Streams::new(seed);
    let mut agent = DqnAgent::new(
        cfg,
        GridWorld::N_STATES,
        GridWorld::N_ACTIONS,
        &mut streams.init,
    )?;
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity)?;
    let mut env = GridWorld::new();
    let warmup = cfg.warmup_steps as u64;
    let mut env_step: u64 = 0;

    for episode in 0..config.total_episodes as u64 {
        let mut obs = env.reset(&mut streams.env);
        loop {
            let action = if env_step < warmup {
                streams.explore.random_range(0..GridWorld::N_ACTIONS)
            } else {
                agent.act_epsilon_greedy(&obs, cfg.epsilon, &mut streams.explore)?
            };
            let step = env.step(&action)?;
            env_step += 1;
            buffer.push(Transition {
                state: obs,
                action: vec![action as f64],
                reward: step.reward,
                next_state: step.observation.clone(),
                done: step.terminal(),
            })?;
            if env_step >= warmup {
                let batch = buffer.sample(cfg.batch_size, &mut streams.replay)?;
                let stats = agent.train_step(&batch)?;
                if agent
                    .train_steps
                    .is_multiple_of(config.metric_interval as u64)
                {
                    let mut row = stats_row(seed, env_step, episode, &stats);
                    row.q_gap = Some(grid_q_gap(&agent)?);
                    log.record(row);
                }
            }
            if step.done {
                break;
            }
            obs = step.observation;
        }

        let mut row = MetricRow {
            seed,
            env_step,
            episode,
            steps_to_goal: Some(greedy_steps_to_goal(&agent)? as u64),
            ..Default::default()
        };
        if (episode + 1) % config.eval_interval as u64 == 0 {
            let score = evaluate(
                &mut Greedy(&agent),
                &mut GridWorld::new(),
                config.eval_episodes,
                &mut streams.eval,
            )?;
            evaluations.push(score);
            row.eval_return = Some(score);
        }
        log.record(row);
    }
    Ok(())
}

fn run_pendulum(
    config: &ExperimentConfig,
    seed: u64,
    log: &mut RowLog,
    evaluations: &mut Vec<f64>,
) -> Result<()> {
    let cfg = &config.agent;
    let mut streams = Streams::new(seed);
    let (low, high) = (-Pendulum::MAX_TORQUE, Pendulum::MAX_TORQUE);
    let mut agent = Td3Agent::new(cfg, 3, 1, low, high, &mut streams.init)?;
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity)?;
    let mut env = Pendulum::new();
    let warmup = cfg.warmup_steps as u64;
    let mut episode: u64 = 0;
    let mut obs = env.reset(&mut streams.env);

    for env_step in 1..=config.total_steps as u64 {
        let torque = if env_step - 1 < warmup {
            streams.explore.random_range(low..=high)
        } else {
            agent.act(&obs, cfg.exploration_noise_std, &mut streams.explore, false)?[0]
        };
        let step = env.step(&torque)?;
        buffer.push(Transition {
            state: obs,
            action: vec![torque],
            reward: step.reward,
            next_state: step.observation.clone(),
            done: step.terminal(),
        })?;
        if env_step >= warmup {
            let batch = buffer.sample(cfg.batch_size, &mut streams.replay)?;
            let stats = agent.train_step(&batch, &mut streams.replay)?;
            if agent
                .train_steps
                .is_multiple_of(config.metric_interval as u64)
            {
                log.record(stats_row(seed, env_step, episode, &stats));
            }
        }
        if step.done {
            episode += 1;
            obs = env.reset(&mut streams.env);
        } else {
            obs = step.observation;
        }
        if env_step % config.eval_interval as u64 == 0 {
            let score = evaluate(
                &mut Greedy(&agent),
                &mut Pendulum::new(),
                config.eval_episodes,
                &mut streams.eval,
            )?;
            evaluations.push(score);
            log.record(MetricRow {
                seed,
                env_step,
                episode,
                eval_return: Some(score),
                ..Default::default()
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn final_score_uses_last_ten() {
        let evals: Vec<f64> = (0..15).map(f64::from).collect();
        assert_eq!(final_score(&evals), Some(9.5));
        assert_eq!(final_score(&[2.0, 4.0]), Some(3.0));
        assert_eq!(final_score(&[]), None);
    }

    #[test]
    fn mean_std_population() {
        assert_eq!(mean_std(&[1.0, 3.0]), Some((2.0, 1.0)));
        assert_eq!(mean_std(&[5.0]), Some((5.0, 0.0)));
        assert_eq!(mean_std(&[]), None);
    }
}
