fn main() {
    // Logs go to stderr; data goes to files. DISCO_LOG sets the level.
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DISCO_LOG", "warn"))
        .format_timestamp(None)
        .init();
    std::process::exit(disco_cli::run(std::env::args_os()));
}
