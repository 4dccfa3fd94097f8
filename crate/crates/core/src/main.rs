fn main() -> std::process::ExitCode {
    covnet::cli::run()
}
