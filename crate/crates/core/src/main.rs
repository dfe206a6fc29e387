fn main() {
    std::process::exit(replaylab::cli::main_from_env());
}
