mod args;
mod commands;
mod config;
mod error;
mod run;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{Command as ClapCommand, CommandFactory, FromArgMatches};
use serde::Serialize;
use textcurate_core::curator::config_digest;

use crate::args::{Cli, Command};
use crate::error::{config, CliResult};
use crate::run::Run;

fn override_self(cmd: ClapCommand) -> ClapCommand {
    let names: Vec<String> = cmd
        .get_subcommands()
        .map(|s| s.get_name().to_string())
        .collect();
    let mut cmd = cmd.args_override_self(true);
    for n in names {
        cmd = cmd.mut_subcommand(n, override_self);
    }
    cmd
}

fn parse(argv: Vec<OsString>) -> CliResult<Cli> {
    let argv = config::merge(argv)?;
    let matches = override_self(Cli::command())
        .try_get_matches_from(argv)
        .unwrap_or_else(|e| e.exit());
    Ok(Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit()))
}

#[derive(Serialize)]
struct Digested<'a, T> {
    command: &'a T,
    seed: u64,
}

fn execute(cli: Cli) -> CliResult<()> {
    let seed = cli.seed.unwrap_or(0);
    let name = cli.command.name();
    if let Command::Simulate(_) = &cli.command {
        let path = cli
            .config
            .as_deref()
            .ok_or_else(|| config("simulate needs --config"))?;
        let sim = commands::load_simulation(path, cli.seed)?;
        let mut run = Run::new(cli.out, sim.generator.seed, config_digest(&sim))?;
        commands::run_simulate(&mut run, path, &sim)?;
        return run.finish(name);
    }
    let digest = config_digest(&Digested {
        command: &cli.command,
        seed,
    });
    let mut run = Run::new(cli.out, seed, digest)?;
    match &cli.command {
        Command::Match(a) => commands::run_match(&mut run, a)?,
        Command::Sweep(a) => commands::run_sweep(&mut run, a)?,
        Command::Assemble(a) => commands::run_assemble(&mut run, a)?,
        Command::Eval(a) => commands::run_eval(&mut run, a)?,
        Command::Diagnose(d) => commands::run_diagnose(&mut run, d)?,
        Command::Simulate(_) => unreachable!("handled above"),
    }
    run.finish(name)
}

fn main() -> ExitCode {
    let result = parse(std::env::args_os().collect()).and_then(|cli| match cli.workers {
        Some(0) => Err(config("--workers must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| config(format!("thread pool: {e}")))?
            .install(|| execute(cli)),
        None => execute(cli),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code())
        }
    }
}
