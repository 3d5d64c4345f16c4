//! Reads a browser HAR export and converts it to the JSONL capture format.
//!
//! cargo run --example har_import -- [session.har]

use std::fs::File;

use restcov::traffic_log::{read_har, write_jsonl};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/petstore_session.har").to_string()
    });
    let import = read_har(File::open(&path).unwrap(), path.clone()).unwrap_or_else(|e| {
        eprintln!("{path}: {e}");
        std::process::exit(1);
    });
    for w in &import.warnings {
        eprintln!("warning: {w}");
    }
    write_jsonl(&import.log, std::io::stdout().lock()).unwrap();
    eprintln!("{} interactions converted", import.log.len());
}
