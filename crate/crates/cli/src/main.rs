use std::io::IsTerminal;

fn main() {
    let color = std::env::var_os("NO_COLOR").map_or(true, |v| v.is_empty()) && std::io::stdout().is_terminal();
    let code = wft_cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr(), color);
    std::process::exit(code);
}
