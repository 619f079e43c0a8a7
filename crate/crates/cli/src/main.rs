fn main() {
    std::process::exit(gtorsion_cli::run(std::env::args_os()));
}
