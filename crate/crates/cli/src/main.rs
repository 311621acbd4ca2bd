use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(headtraj::run(std::env::args_os()))
}
