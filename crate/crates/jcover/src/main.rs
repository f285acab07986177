fn main() {
    // die quietly when a downstream pipe closes, like any unix filter
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(jcover::cli::run());
}
