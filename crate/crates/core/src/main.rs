//! `qentry40` command-line entry point.

fn main() {
    std::process::exit(qentry40::cli::main_with_args(std::env::args_os()));
}
