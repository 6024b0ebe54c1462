fn main() {
    std::process::exit(imshag::cli::run());
}
