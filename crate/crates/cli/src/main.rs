fn main() {
    std::process::exit(graphon_gl_cli::main_with_args(std::env::args_os()));
}
