use std::process::ExitCode;

fn main() -> ExitCode {
    ncpt::cli::run_from(std::env::args_os())
}
