use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fujita_lab::{parse_config, resolve, run, CliError, Mode, RunConfig};

/// Critical exponents, blow-up simulations and certificates for semilinear
/// heat equations with an inverse-square potential.
///
/// Exit status: 0 on success, 2 on invalid configuration, 3 on numerical failure.
#[derive(Debug, Parser)]
#[command(name = "fujita-lab", version, allow_negative_numbers = true)]
struct Cli {
    /// What to run.
    #[arg(value_enum)]
    mode: Option<Mode>,
    /// JSON config file; command-line flags override its values.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: RunConfig,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = (|| -> Result<i32, CliError> {
        let file = cli.config.as_deref().map(parse_config).transpose()?;
        let flags = RunConfig { mode: cli.mode, ..cli.flags };
        let cfg = resolve(file, flags)?;
        run(&cfg)
    })();
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
