//! Command-line interface: argument parsing and dispatch to the runner.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Result, SvError};
use crate::harness::{
    run_ablate, run_cie_map, run_eval, run_extract_fv, run_extract_icv, run_report, run_sweep,
    run_train_toy, RunConfig,
};

/// Steering-vector laboratory over a small hookable transformer.
#[derive(Debug, Parser)]
#[command(name = "svlab", version, about)]
pub struct Cli {
    /// JSON run configuration; built-in defaults apply when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Single-seed override: replaces the seed list and every stage seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory override.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sections (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

/// One pipeline stage per subcommand.
#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Train the toy model and save it with its curriculum.
    TrainToy,
    /// Extract one in-context vector per task at the configured settings.
    ExtractIcv,
    /// Extract one function vector per task from head effect scores.
    ExtractFv,
    /// Map per-head indirect effects and correlate them with steering gains.
    CieMap,
    /// Evaluate baseline and extracted vectors over tasks and prompt styles.
    Eval,
    /// Sweep ICV strength and demo count, keeping the best vector per task.
    Sweep,
    /// Re-apply extracted vectors at named layer placements.
    Ablate,
    /// Re-emit tables and charts from an existing results file.
    Report,
}

impl Cli {
    /// Loads the config file (or defaults) and applies the global overrides.
    ///
    /// # Errors
    /// Load and validation failures pass through; a non-UTF-8 `--out` path
    /// is an input error.
    pub fn resolve_config(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            config.out_dir = out
                .to_str()
                .ok_or_else(|| SvError::input("--out path is not valid UTF-8"))?
                .to_string();
        }
        if let Some(seed) = self.seed {
            config.seeds = vec![seed];
            config.train.seed = seed;
            config.icv.seed = seed;
            config.fv.seed = seed;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Dispatches one parsed invocation.
///
/// # Errors
/// Configuration and pipeline failures pass through to the exit path.
pub fn run(cli: &Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| SvError::Config(format!("could not size the thread pool: {e}")))?;
    }
    let config = cli.resolve_config()?;
    match cli.command {
        Command::TrainToy => run_train_toy(&config),
        Command::ExtractIcv => run_extract_icv(&config),
        Command::ExtractFv => run_extract_fv(&config),
        Command::CieMap => run_cie_map(&config).map(|_| ()),
        Command::Eval => run_eval(&config).map(|_| ()),
        Command::Sweep => run_sweep(&config),
        Command::Ablate => run_ablate(&config),
        Command::Report => run_report(&config).map(|_| ()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_override_replaces_every_stage_seed() {
        let cli = Cli::parse_from(["svlab", "--seed", "42", "--out", "/tmp/x", "eval"]);
        let config = cli.resolve_config().unwrap();
        assert_eq!(config.seeds, vec![42]);
        assert_eq!(config.train.seed, 42);
        assert_eq!(config.icv.seed, 42);
        assert_eq!(config.fv.seed, 42);
        assert_eq!(config.out_dir, "/tmp/x");
    }

    #[test]
    fn defaults_apply_without_a_config_file() {
        let cli = Cli::parse_from(["svlab", "train-toy"]);
        let config = cli.resolve_config().unwrap();
        assert_eq!(config.seeds, vec![0, 1, 2]);
        assert_eq!(config.out_dir, "out");
    }

    #[test]
    fn subcommand_names_are_kebab_case() {
        for name in [
            "train-toy",
            "extract-icv",
            "extract-fv",
            "cie-map",
            "eval",
            "sweep",
            "ablate",
            "report",
        ] {
            assert!(
                Cli::try_parse_from(["svlab", name]).is_ok(),
                "missing subcommand {name}"
            );
        }
    }

    #[test]
    fn config_file_with_unknown_keys_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{"version": 1, "no_such_key": true}"#).unwrap();
        let cli = Cli::parse_from(["svlab", "--config", path.to_str().unwrap(), "eval"]);
        assert!(cli.resolve_config().is_err());
    }
}
