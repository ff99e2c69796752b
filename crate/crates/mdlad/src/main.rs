fn main() -> std::process::ExitCode {
    mdlad::cli::main()
}
