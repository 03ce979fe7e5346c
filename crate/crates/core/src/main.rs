fn main() {
    std::process::exit(delaunay_glue::cli::run(std::env::args_os()));
}
