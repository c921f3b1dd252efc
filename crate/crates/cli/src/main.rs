fn main() {
    std::process::exit(lattice_defect_cli::run(std::env::args_os()));
}
