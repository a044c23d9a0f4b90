use std::process::ExitCode;

fn main() -> ExitCode {
    iterplex::cli::run()
}
