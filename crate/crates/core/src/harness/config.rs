//! Flat `key = value` experiment configuration.
//!
//! Precedence, lowest to highest: built-in defaults for the chosen
//! environment, the config file, then `--set key=value` overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::agents::AgentConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    GridWorld,
    Pendulum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Dqn,
    Td3,
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvKind::GridWorld => "gridworld",
            EnvKind::Pendulum => "pendulum",
        })
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Dqn => "dqn",
            Algo::Td3 => "td3",
        })
    }
}

/// Everything needed to run one experiment over a list of seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub algo: Algo,
    pub seeds: Vec<u64>,
    /// Environment-step budget (pendulum).
    pub total_steps: usize,
    /// Episode budget (grid world).
    pub total_episodes: usize,
    /// Steps between evaluations for the pendulum, episodes for the grid world.
    pub eval_interval: usize,
    pub eval_episodes: usize,
    /// Train steps between metric rows.
    pub metric_interval: usize,
    pub output_dir: PathBuf,
    pub agent: AgentConfig,
}

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "env",
    "algo",
    "seeds",
    "total_steps",
    "total_episodes",
    "eval_interval",
    "eval_episodes",
    "metric_interval",
    "output_dir",
    "peer_enabled",
    "beta",
    "gamma",
    "eta",
    "lr",
    "batch_size",
    "buffer_capacity",
    "epsilon",
    "warmup_steps",
    "exploration_noise_std",
    "target_noise_std",
    "noise_clip",
    "policy_delay",
    "hidden",
];

impl ExperimentConfig {
    /// Defaults for an environment, matching the published hyperparameter tables.
    pub fn defaults(env: EnvKind) -> Self {
        match env {
            EnvKind::GridWorld => ExperimentConfig {
                env,
                algo: Algo::Dqn,
                seeds: (0..5).collect(),
                total_steps: 1_000_000,
                total_episodes: 2000,
                eval_interval: 10,
                eval_episodes: 10,
                metric_interval: 100,
                output_dir: PathBuf::from("runs"),
                agent: AgentConfig::grid_world(),
            },
            EnvKind::Pendulum => ExperimentConfig {
                env,
                algo: Algo::Td3,
                seeds: (0..10).collect(),
                total_steps: 1_000_000,
                total_episodes: 2000,
                eval_interval: 5000,
                eval_episodes: 10,
                metric_interval: 100,
                output_dir: PathBuf::from("runs"),
                agent: AgentConfig::continuous(),
            },
        }
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let a = &mut self.agent;
        match key {
            "env" => {
                let env = parse_env(value)?;
                if env != self.env {
                    return Err(Error::config(key, "env must be chosen before other keys"));
                }
            }
            "algo" => {
                self.algo = match value {
                    "dqn" => Algo::Dqn,
                    "td3" => Algo::Td3,
                    _ => return Err(Error::config(key, format!("unknown algorithm `{value}`"))),
                }
            }
            "seeds" => self.seeds = parse_list(key, value)?,
            "total_steps" => self.total_steps = parse(key, value)?,
            "total_episodes" => self.total_episodes = parse(key, value)?,
            "eval_interval" => self.eval_interval = parse(key, value)?,
            "eval_episodes" => self.eval_episodes = parse(key, value)?,
            "metric_interval" => self.metric_interval = parse(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "peer_enabled" => a.peer_enabled = parse_bool(key, value)?,
            "beta" => a.beta = parse(key, value)?,
            "gamma" => a.gamma = parse(key, value)?,
            "eta" => a.eta = parse(key, value)?,
            "lr" => a.lr = parse(key, value)?,
            "batch_size" => a.batch_size = parse(key, value)?,
            "buffer_capacity" => a.buffer_capacity = parse(key, value)?,
            "epsilon" => a.epsilon = parse(key, value)?,
            "warmup_steps" => a.warmup_steps = parse(key, value)?,
            "exploration_noise_std" => a.exploration_noise_std = parse(key, value)?,
            "target_noise_std" => a.target_noise_std = parse(key, value)?,
            "noise_clip" => a.noise_clip = parse(key, value)?,
            "policy_delay" => a.policy_delay = parse(key, value)?,
            "hidden" => a.hidden = parse_list(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        let positive = [
            ("total_steps", self.total_steps),
            ("total_episodes", self.total_episodes),
            ("eval_interval", self.eval_interval),
            ("eval_episodes", self.eval_episodes),
            ("metric_interval", self.metric_interval),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(Error::config(key, "must be positive"));
            }
        }
        match (self.env, self.algo) {
            (EnvKind::GridWorld, Algo::Dqn) | (EnvKind::Pendulum, Algo::Td3) => {}
            (env, algo) => {
                return Err(Error::config(
                    "algo",
                    format!("{algo} is not supported on {env}"),
                ))
            }
        }
        self.agent.validate()
    }

    /// Render as a config file that parses back to the same value.
    pub fn to_config_text(&self) -> String {
        let a = &self.agent;
        let join = |v: &[String]| v.join(",");
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let hidden: Vec<String> = a.hidden.iter().map(usize::to_string).collect();
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        line("env", self.env.to_string());
        line("algo", self.algo.to_string());
        line("seeds", join(&seeds));
        line("total_steps", self.total_steps.to_string());
        line("total_episodes", self.total_episodes.to_string());
        line("eval_interval", self.eval_interval.to_string());
        line("eval_episodes", self.eval_episodes.to_string());
        line("metric_interval", self.metric_interval.to_string());
        line("output_dir", self.output_dir.display().to_string());
        line("peer_enabled", a.peer_enabled.to_string());
        line("beta", a.beta.to_string());
        line("gamma", a.gamma.to_string());
        line("eta", a.eta.to_string());
        line("lr", a.lr.to_string());
        line("batch_size", a.batch_size.to_string());
        line("buffer_capacity", a.buffer_capacity.to_string());
        line("epsilon", a.epsilon.to_string());
        line("warmup_steps", a.warmup_steps.to_string());
        line("exploration_noise_std", a.exploration_noise_std.to_string());
        line("target_noise_std", a.target_noise_std.to_string());
        line("noise_clip", a.noise_clip.to_string());
        line("policy_delay", a.policy_delay.to_string());
        line("hidden", join(&hidden));
        out
    }
}

fn parse_env(value: &str) -> Result<EnvKind> {
    match value {
        "gridworld" => Ok(EnvKind::GridWorld),
        "pendulum" => Ok(EnvKind::Pendulum),
        _ => Err(Error::config(
            "env",
            format!("unknown environment `{value}`"),
        )),
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| Error::config(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::config(
            key,
            format!("cannot parse `{value}` as a flag"),
        )),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

/// Parse `key = value` lines; `#` starts a comment, blank lines are ignored.
pub fn parse_assignments(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::config(line, format!("line {}: expected `key = value`", lineno + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::config(s, "override must look like key=value"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Build a config from file text plus CLI overrides.
pub fn config_from_text(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut merged: BTreeMap<String, String> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    let assignments = parse_assignments(text)?
        .into_iter()
        .map(Ok)
        .chain(overrides.iter().map(|s| parse_override(s)));
    for kv in assignments {
        let (k, v) = kv?;
        if !KEYS.contains(&k.as_str()) {
            return Err(Error::config(k, "unknown key"));
        }
        if merged.insert(k.clone(), v).is_none() {
            order.push(k);
        }
    }
    let env = merged
        .get("env")
        .map(|v| parse_env(v))
        .transpose()?
        .unwrap_or(EnvKind::GridWorld);
    let mut config = ExperimentConfig::defaults(env);
    for k in &order {
        config.set(k, &merged[k])?;
    }
    config.validate()?;
    Ok(config)
}

/// Read a config file and apply `key=value` overrides on top.
pub fn parse_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    config_from_text(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_table_defaults() {
        let c = config_from_text("", &[]).unwrap();
        assert_eq!(c.agent.beta, 5e-4);
        assert_eq!(c.agent.eta, 0.005);
        assert_eq!(c.agent.gamma, 0.99);
        assert_eq!(c.agent.lr, 1e-4);
        assert_eq!(c.agent.batch_size, 64);
        assert_eq!(c.agent.buffer_capacity, 100_000);
        assert_eq!(c.agent.epsilon, 0.1);
        assert_eq!(c.agent.warmup_steps, 1000);
        assert_eq!(c.agent.hidden, vec![32, 32]);
        assert_eq!(c.total_episodes, 2000);
        assert_eq!(c.eval_episodes, 10);
        assert_eq!(c.algo, Algo::Dqn);
    }

    #[test]
    fn pendulum_defaults() {
        let c = config_from_text("env = pendulum\n", &[]).unwrap();
        assert_eq!(c.algo, Algo::Td3);
        assert_eq!(c.agent.lr, 3e-4);
        assert_eq!(c.agent.batch_size, 256);
        assert_eq!(c.agent.buffer_capacity, 1_000_000);
        assert_eq!(c.agent.warmup_steps, 25_000);
        assert_eq!(c.agent.hidden, vec![256, 256]);
        assert_eq!(c.agent.exploration_noise_std, 0.2);
        assert_eq!(c.agent.target_noise_std, 0.2);
        assert_eq!(c.agent.noise_clip, 0.5);
        assert_eq!(c.agent.policy_delay, 2);
        assert_eq!(c.eval_interval, 5000);
    }

    #[test]
    fn cli_overrides_file() {
        let c = config_from_text("beta = 0.01 # file value\n", &["beta=0.02".into()]).unwrap();
        assert_eq!(c.agent.beta, 0.02);
        let c = config_from_text("beta = 0.01\n", &[]).unwrap();
        assert_eq!(c.agent.beta, 0.01);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = config_from_text("betaa=1\n", &[]).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "betaa"));
        assert!(err.to_string().contains("betaa"));
        let err = config_from_text("", &["nope=3".into()]).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "nope"));
    }

    #[test]
    fn bad_values_are_named() {
        let err = config_from_text("gamma = abc\n", &[]).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "gamma"));
        let err = config_from_text("gamma = 1.5\n", &[]).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "gamma"));
        let err = config_from_text("seeds = \n", &[]).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "seeds"));
        let err = config_from_text("algo = td3\n", &[]).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "algo"));
        let err = config_from_text("metric_interval = 0\n", &[]).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "metric_interval"));
    }

    #[test]
    fn lists_flags_and_comments() {
        let text = "# header\n\nseeds = 1, 2,3\nhidden=16,16\npeer_enabled = off\n";
        let c = config_from_text(text, &[]).unwrap();
        assert_eq!(c.seeds, vec![1, 2, 3]);
        assert_eq!(c.agent.hidden, vec![16, 16]);
        assert!(!c.agent.peer_enabled);
    }

    #[test]
    fn rendered_text_round_trips() {
        let mut c = config_from_text("env = pendulum\nseeds = 4,9\nbeta = 0.125\n", &[]).unwrap();
        c.agent.peer_enabled = false;
        let back = config_from_text(&c.to_config_text(), &[]).unwrap();
        assert_eq!(back, c);
    }
}
