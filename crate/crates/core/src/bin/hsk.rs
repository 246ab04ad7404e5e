//! `hsk` command-line tool. `HSK_THREADS` sets the worker count.

fn main() {
    if let Some(n) = std::env::var("HSK_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: HSK_THREADS ignored: {e}");
        }
    }
    std::process::exit(hsk::cli::run(std::env::args_os()));
}
