fn main() {
    std::process::exit(bicluster_cli::execute(std::env::args_os()));
}
