fn main() {
    std::process::exit(distill_lab::cli::run(std::env::args_os()));
}
