fn main() {
    // Die quietly on a closed pipe, like the rest of the unix toolbox, so
    // `semshift ... | head` does not report a write panic.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(semshift::cli::run());
}
