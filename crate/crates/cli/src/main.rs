fn main() {
    std::process::exit(fockfade::run(std::env::args_os()));
}
