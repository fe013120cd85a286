fn main() {
    std::process::exit(nlsim_cli::app::main_with(std::env::args_os()));
}
