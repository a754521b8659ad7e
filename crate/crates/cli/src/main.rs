use std::io;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let code = liouville_cli::run(
        std::env::args_os(),
        &mut io::stdin().lock(),
        Box::new(io::stdout()),
        &mut io::stderr(),
    );
    std::process::exit(code);
}
