fn main() {
    std::process::exit(rofnk_cli::parse_and_dispatch(std::env::args_os()));
}
