use std::process::ExitCode;

fn main() -> ExitCode {
    movetrait::cli::main_entry()
}
