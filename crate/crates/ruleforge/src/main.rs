fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RULEFORGE_LOG", "warn")).init();
    std::process::exit(ruleforge::cli::main_with_args(std::env::args_os()));
}
