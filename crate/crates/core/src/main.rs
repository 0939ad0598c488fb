use std::process::ExitCode;

fn main() -> ExitCode {
    qns::cli::main_with_args(std::env::args_os())
}
