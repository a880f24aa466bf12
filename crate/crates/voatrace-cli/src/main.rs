fn main() {
    let code = voatrace_cli::run::main_from_args(std::env::args_os());
    std::process::exit(code);
}
