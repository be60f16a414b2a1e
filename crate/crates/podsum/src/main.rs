fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let code = podsum::cli::run(std::env::args().collect(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
