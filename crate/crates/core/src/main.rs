use std::process::ExitCode;

fn main() -> ExitCode {
    crowdseg::cli::run(std::env::args_os())
}
