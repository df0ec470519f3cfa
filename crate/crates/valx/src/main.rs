use std::process::ExitCode;

use valx::cli;

const USAGE: &str = "usage: valx <session-file> [--json] | valx --selftest";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--selftest") {
        let (transcript, ok) = cli::selftest();
        print!("{}", transcript);
        return if ok { ExitCode::SUCCESS } else { ExitCode::from(4) };
    }
    let mut json = false;
    let mut file: Option<String> = None;
    for a in &args {
        match a.as_str() {
            "--json" => json = true,
            "--help" | "-h" => {
                println!("{}", USAGE);
                return ExitCode::SUCCESS;
            }
            other if !other.starts_with('-') && file.is_none() => file = Some(other.to_string()),
            other => {
                eprintln!("unexpected argument '{}'\n{}", other, USAGE);
                return ExitCode::from(2);
            }
        }
    }
    let Some(file) = file else {
        eprintln!("{}", USAGE);
        return ExitCode::from(2);
    };
    let text = match std::fs::read_to_string(&file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {}", file, e);
            return ExitCode::from(2);
        }
    };
    let session = match cli::parse(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}", e);
            return ExitCode::from(2);
        }
    };
    // run under catch_unwind so a breached construction-time invariant maps
    // to the dedicated exit code instead of an abort
    match std::panic::catch_unwind(|| cli::run(&session, json)) {
        Ok(Ok(output)) => {
            print!("{}", output);
            ExitCode::SUCCESS
        }
        Ok(Err(failure)) => {
            eprintln!("{}", failure);
            ExitCode::from(failure.exit_code() as u8)
        }
        Err(_) => {
            eprintln!("internal invariant breached");
            ExitCode::from(4)
        }
    }
}
