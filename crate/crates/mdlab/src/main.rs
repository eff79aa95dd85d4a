use std::process::ExitCode;

fn main() -> ExitCode {
    let seed = std::env::var(mdlab::cli::SEED_ENV).ok();
    let code = mdlab::cli::execute(std::env::args_os(), seed.as_deref(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}
