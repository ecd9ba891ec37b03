use clap::Parser;

fn main() {
    // die quietly when the consumer of a pipe goes away, like cat does
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    env_logger::init();
    let cli = safegames::cli::Cli::parse();
    std::process::exit(safegames::cli::run(cli));
}
