use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(zic_dmt::cli::run(std::env::args_os()))
}
