use std::process::ExitCode;

fn main() -> ExitCode {
    papr_pts::cli::run(std::env::args_os())
}
