fn main() {
    std::process::exit(kdv_critical::cli::dispatch(std::env::args_os()));
}
