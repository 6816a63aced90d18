//! `gwi` binary.

use std::process::ExitCode;

fn main() -> ExitCode {
    let (text, code) = gwi_cli::main_with_args(std::env::args_os());
    println!("{}", text.trim_end());
    ExitCode::from(code as u8)
}
