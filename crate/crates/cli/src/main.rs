fn main() {
    std::process::exit(patchwork::run(std::env::args_os()));
}
