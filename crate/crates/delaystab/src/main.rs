use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(delaystab::cli::run() as u8)
}
