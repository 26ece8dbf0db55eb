fn main() {
    std::process::exit(affine_fusion::cli::main_with_args(std::env::args_os()));
}
