use std::io::Write;

fn main() {
    let code = match cfstat_cli::parse_args(std::env::args_os().skip(1)) {
        Ok(cfg) => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            let code = cfstat_cli::dispatch(&cfg, &mut out);
            let _ = out.flush();
            code
        }
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                print!("{e}");
            } else {
                eprint!("{e}");
            }
            code
        }
    };
    std::process::exit(code);
}
