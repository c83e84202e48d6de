fn main() {
    std::process::exit(vortex_patch::cli::run(std::env::args_os()));
}
