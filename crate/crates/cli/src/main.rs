mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] polar_wiretap::Error),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use polar_wiretap::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidArgument(_) | E::TooLarge(_)) => 2,
            CliError::Core(E::Infeasible(_)) => 3,
            _ => 1,
        }
    }
}

fn run(cli: &Cli) -> Result<commands::Report, CliError> {
    let opts = cli.command.opts();
    if let Some(threads) = opts.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Pool(e.to_string()))?;
    }
    commands::run(&cli.command)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            println!(
                "{}: wrote {} row(s) to {}",
                cli.command.name(),
                report.rows,
                cli.command.opts().out.display()
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("wpl {}: error: {err}", cli.command.name());
            ExitCode::from(err.exit_code())
        }
    }
}
