use std::process::ExitCode;

fn main() -> ExitCode {
    macrospin_cli::run()
}
