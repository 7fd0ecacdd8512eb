fn main() -> std::process::ExitCode {
    susyfactor::cli::main()
}
