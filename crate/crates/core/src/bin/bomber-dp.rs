use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(bomber_dp::cli::run(std::env::args_os()))
}
