fn main() {
    std::process::exit(harnack_lab::run_cli(std::env::args_os()));
}
