fn main() {
    std::process::exit(prematch::cli::dispatch());
}
