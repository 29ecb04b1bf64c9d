use clap::Parser;
use hvz_cli::{run, Cli};

fn main() {
    // Usage errors are config errors under the exit-code contract, not clap's 2.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { hvz_cli::EXIT_CONFIG } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
            out.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    std::process::exit(code);
}
