fn main() -> std::process::ExitCode {
    usynth::cli::main()
}
