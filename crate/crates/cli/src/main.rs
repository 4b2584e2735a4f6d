fn main() -> std::process::ExitCode {
    devlab_cli::main_exit()
}
