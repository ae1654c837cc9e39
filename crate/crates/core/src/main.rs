use std::process::ExitCode;

fn main() -> ExitCode {
    gradmem::harness::cli::main()
}
