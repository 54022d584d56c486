fn main() {
    std::process::exit(sphavg_cli::run(std::env::args_os()));
}
