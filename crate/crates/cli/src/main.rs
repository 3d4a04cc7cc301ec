use std::process::ExitCode;

fn main() -> ExitCode {
    considerate_cli::run(std::env::args_os())
}
