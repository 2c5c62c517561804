fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(dpre::cli::main_with(std::env::args_os()))
}
