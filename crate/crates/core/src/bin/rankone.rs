use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(rankone::cli::main(std::env::args_os()))
}
