fn main() {
    std::process::exit(exotic_curv_cli::run(std::env::args_os()));
}
