//! Binary entry point; all behaviour lives in [`sdym::cli`].

fn main() {
    std::process::exit(sdym::cli::run());
}
