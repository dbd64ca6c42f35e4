use std::process::ExitCode;

fn main() -> ExitCode {
    certnav::cli::main_from_args(std::env::args_os())
}
