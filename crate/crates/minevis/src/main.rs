fn main() -> std::process::ExitCode {
    minevis::cli::main()
}
