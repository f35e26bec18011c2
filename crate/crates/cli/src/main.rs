use std::io;

fn main() {
    let env = std::env::var(qtwt::args::MAX_QUBITS_ENV).ok();
    let code = qtwt::run(
        std::env::args_os(),
        env.as_deref(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
