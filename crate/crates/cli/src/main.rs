fn main() {
    std::process::exit(laurent_ritt_cli::app::main_with_env());
}
