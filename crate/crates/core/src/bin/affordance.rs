use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(affordance_core::cli::main_with_args(std::env::args_os()))
}
