//! `train`: build windows from a data directory, train, write the
//! checkpoint and the per-epoch loss history.

use std::io::Write;
use std::path::PathBuf;

use flowdisagg_core::disagg::Checkpoint;
use flowdisagg_core::train;

use crate::config::{aggregation_rules, EffectiveConfig, FileConfig};
use crate::{Cli, CliError, TrainArgs};

pub fn run(cli: &Cli, file: &FileConfig, args: &TrainArgs) -> Result<(), CliError> {
    let mut config = file.train.clone().unwrap_or_default();
    if let Some(epochs) = args.epochs {
        config.epochs = epochs;
    }
    if let Some(hidden) = args.hidden {
        config.hidden_size = hidden;
    }
    if let Some(lr) = args.learning_rate {
        config.learning_rate = lr;
    }
    if let Some(fraction) = args.train_fraction {
        config.train_fraction = fraction;
    }
    if let Some(context) = args.context_days {
        config.context_days = context;
    }
    if let Some(seed) = cli.seed.or(file.seed) {
        config.seed = seed;
    }
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));

    let mut effective = EffectiveConfig::new("train", config.seed, cli.offline, &out_dir);
    let data_dir_echo = super::resolve_data_dir(args.data_dir.clone(), file)?;
    effective.data_dir = Some(data_dir_echo);
    effective.train = Some(config.clone());
    effective.echo()?;

    let rules = aggregation_rules(
        file.variables.as_deref().unwrap_or(&[]),
        file.aggregation.as_ref(),
    );
    let data_dir = super::resolve_data_dir(args.data_dir.clone(), file)?;
    let mut data = super::load_data_dir(&data_dir, &rules)?;
    let (daily_weather, daily_flow) =
        super::align_daily_spans(&data.daily_weather, &data.daily_flow)?;
    data.daily_weather = daily_weather;
    data.daily_flow = daily_flow;

    let windows = super::build_window_set(&data, config.context_days)?;
    if windows.is_empty() {
        return Err(CliError::config(format!(
            "no usable windows: {} candidate days, {} skipped",
            windows.candidate_days, windows.skipped_days
        )));
    }

    let outcome = train(&windows, &config)?;

    let checkpoint_path = out_dir.join("checkpoint.json");
    Checkpoint::from_outcome(&outcome, &config, windows.len()).save(&checkpoint_path)?;

    let history_path = out_dir.join("loss_history.csv");
    let mut f = std::fs::File::create(&history_path)?;
    writeln!(f, "epoch,loss1,loss2,total")?;
    for (epoch, lb) in outcome.history.iter().enumerate() {
        writeln!(f, "{epoch},{},{},{}", lb.loss1, lb.loss2, lb.total)?;
    }
    f.flush()?;

    let first = outcome.history.first();
    let last = outcome.history.last();
    println!(
        "trained epochs={} windows={} train={} skipped={} first_total={} final_total={} checkpoint={}",
        config.epochs,
        windows.len(),
        outcome.n_train,
        windows.skipped_days,
        first.map_or("none".to_string(), |lb| lb.total.to_string()),
        last.map_or("none".to_string(), |lb| lb.total.to_string()),
        checkpoint_path.display()
    );
    Ok(())
}
