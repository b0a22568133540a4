fn main() {
    std::process::exit(santalo_lab::cli::run(std::env::args_os()));
}
