//! Binary entry point: parse, dispatch, exit with the documented code.

fn main() {
    std::process::exit(exp_cli::run(std::env::args_os()));
}
