fn main() {
    std::process::exit(inf_rcs::cli::run(std::env::args_os()));
}
