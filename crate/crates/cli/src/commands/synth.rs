//! `synth`: write the four synthetic CSVs and print the mass balance.

use std::path::PathBuf;

use flowdisagg_core::ingest::synth_generate;

use super::{DAILY_FLOW_CSV, DAILY_WEATHER_CSV, HOURLY_FLOW_CSV, HOURLY_WEATHER_CSV};
use crate::config::{EffectiveConfig, FileConfig};
use crate::{Cli, CliError, SynthArgs};

pub fn run(cli: &Cli, file: &FileConfig, args: &SynthArgs) -> Result<(), CliError> {
    let mut config = file.synth.clone().unwrap_or_default();
    if let Some(days) = args.days {
        config.n_days = days;
    }
    if let Some(seed) = cli.seed.or(file.seed) {
        config.seed = seed;
    }
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));

    let mut effective = EffectiveConfig::new("synth", config.seed, cli.offline, &out_dir);
    effective.synth = Some(config.clone());
    effective.echo()?;

    let data = synth_generate(&config)?;
    data.daily_flow
        .write_csv_path(&out_dir.join(DAILY_FLOW_CSV))?;
    data.daily_weather
        .write_csv_path(&out_dir.join(DAILY_WEATHER_CSV))?;
    data.hourly_flow
        .write_csv_path(&out_dir.join(HOURLY_FLOW_CSV))?;
    data.hourly_weather
        .write_csv_path(&out_dir.join(HOURLY_WEATHER_CSV))?;

    let s = data.summary;
    println!(
        "synth days={} seed={} hourly_rows={} out={}",
        config.n_days,
        config.seed,
        data.hourly_flow.rows(),
        out_dir.display()
    );
    println!(
        "mass_balance initial_storage={} total_precipitation={} total_melt={} total_outflow={} final_storage={}",
        config.initial_storage,
        s.total_precipitation,
        s.total_melt,
        s.total_outflow,
        s.final_storage
    );
    Ok(())
}
