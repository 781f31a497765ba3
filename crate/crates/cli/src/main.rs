use std::io;

fn main() {
    let env = |name: &str| std::env::var(name).ok();
    let code = gazelens_cli::run(std::env::args_os(), &env, &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
