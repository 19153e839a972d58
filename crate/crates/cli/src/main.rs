use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(rpnodesim_cli::run(std::env::args_os()) as u8)
}
