fn main() {
    env_logger::init();
    std::process::exit(filter_lab::bench::cli::main_with_args(std::env::args_os()));
}
