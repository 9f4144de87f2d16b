fn main() -> std::process::ExitCode {
    transdoc::cli::main()
}
