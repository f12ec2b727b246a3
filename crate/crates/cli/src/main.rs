use std::io::{BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use twistvm::{run_file, RunConfig, Session};
use twistvm_core::engine::StdoutSink;
use twistvm_core::inspect::DotStyle;

#[derive(Parser)]
#[command(name = "twistvm", version, about = "Run scripts on the twisted-thunk graph rewriter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Style {
    Standard,
    Thunked,
    Twisted,
}

#[derive(Subcommand)]
enum Command {
    /// Compile and run a script's `main`.
    Run {
        file: PathBuf,
        /// Check the graph invariants at every step.
        #[arg(long)]
        check: bool,
        /// Write a DOT snapshot of every step into this directory.
        #[arg(long, value_name = "DIR")]
        trace_dot: Option<PathBuf>,
        /// Drawing style of the DOT snapshots.
        #[arg(long, value_enum, default_value = "twisted")]
        dot_style: Style,
        /// Print the compiled bytecode instead of running.
        #[arg(long)]
        bytecode: bool,
        /// Extra directory searched for imports.
        #[arg(long = "include", value_name = "PATH")]
        include: Vec<PathBuf>,
        #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
        step_limit: Option<u64>,
    },
    /// Read and evaluate lines interactively.
    Repl {
        #[arg(long = "include", value_name = "PATH")]
        include: Vec<PathBuf>,
    },
}

fn repl(include: Vec<PathBuf>) -> ExitCode {
    let mut session = match Session::new(include, Arc::new(StdoutSink)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let interactive = std::io::stdin().is_terminal();
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        if interactive {
            print!(">> ");
            let _ = std::io::stdout().flush();
        }
        let Some(Ok(line)) = lines.next() else { break };
        match session.repl_eval(&line) {
            Ok(out) if out.is_empty() => {}
            Ok(out) => println!("{out}"),
            Err(e) => eprintln!("{e}"),
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            file,
            check,
            trace_dot,
            dot_style,
            bytecode,
            include,
            step_limit,
        } => {
            let config = RunConfig {
                script: file,
                include_paths: include,
                checked: check,
                trace_dir: trace_dot,
                trace_style: match dot_style {
                    Style::Standard => DotStyle::Standard,
                    Style::Thunked => DotStyle::Thunked,
                    Style::Twisted => DotStyle::Twisted,
                },
                dump_bytecode: bytecode,
                step_limit,
            };
            let status = run_file(&config, Arc::new(StdoutSink), &mut std::io::stderr());
            ExitCode::from(status.code() as u8)
        }
        Command::Repl { include } => repl(include),
    }
}
