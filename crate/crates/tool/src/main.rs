fn main() {
    std::process::exit(regret_tool::cli::run(std::env::args_os()));
}
