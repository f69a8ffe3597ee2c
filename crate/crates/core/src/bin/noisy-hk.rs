fn main() -> std::process::ExitCode {
    noisy_hk::cli::main_with_args(std::env::args_os())
}
