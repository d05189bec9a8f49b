use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(picard_bvp_cli::main_with_args(std::env::args_os()))
}
