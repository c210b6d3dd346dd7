use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use gcm_peres::cli::{run, Cli, CliError};
use gcm_peres::config::ConfigError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    // reductions in the eigensolver must not depend on thread scheduling
    faer::set_global_parallelism(faer::Par::Seq);
    match run(&cli.command) {
        Ok(manifest) => {
            for f in &manifest.files {
                println!("{}  {}", f.sha256, f.name);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Config(ConfigError::Read { .. }) = e {
                eprintln!();
                let mut cmd = Cli::command();
                cmd.build();
                let sub = cmd.find_subcommand_mut(cli.command.name()).map(|s| s.render_usage());
                eprintln!("{}", sub.unwrap_or_else(|| cmd.render_usage()));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
