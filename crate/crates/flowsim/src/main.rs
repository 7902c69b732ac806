use std::io;
use std::panic;
use std::process::ExitCode;

fn main() -> ExitCode {
    let status = panic::catch_unwind(|| {
        let (stdout, stderr) = (io::stdout(), io::stderr());
        flowsim::cli::run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
    })
    .unwrap_or(flowsim::exit::INTERNAL);
    ExitCode::from(status)
}
