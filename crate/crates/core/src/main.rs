fn main() -> std::process::ExitCode {
    phasecore::cli::main_with_env()
}
