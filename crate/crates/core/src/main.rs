fn main() {
    std::process::exit(girg_lab::cli::run(std::env::args_os()));
}
