fn main() -> std::process::ExitCode {
    divfx::cli::main()
}
