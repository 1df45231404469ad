fn main() -> std::process::ExitCode {
    radbif::cli::main()
}
