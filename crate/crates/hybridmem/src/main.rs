use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybridmem::{config, execute, CliError, Scenario};

#[derive(Parser)]
#[command(name = "hybridmem", version, about = "Hybrid quantum memory transfer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write <out>/<name>.csv and <out>/<name>.meta.
    Run {
        scenario: String,
        /// INI file overriding the scenario defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads (defaults to the number of cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Print the scenario's configuration keys and defaults, then exit.
        #[arg(long)]
        print_defaults: bool,
    },
    /// List the available scenarios.
    List,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for s in Scenario::ALL {
                println!("{:<20} {}", s.name(), s.description());
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            scenario,
            config,
            out,
            threads,
            print_defaults,
        } => {
            let result = Scenario::from_name(&scenario).and_then(|s| {
                if print_defaults {
                    print!("{}", config::print_defaults(s));
                    Ok(())
                } else {
                    execute(s, config.as_deref(), &out, threads).map(|_| ())
                }
            });
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e),
            }
        }
    }
}

fn fail(e: &CliError) -> ExitCode {
    log::error!("{e}");
    ExitCode::from(e.exit_code() as u8)
}
