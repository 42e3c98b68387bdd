fn main() -> std::process::ExitCode {
    qubit_ot::cli::main()
}
