//! Computes the eight coverage metrics and renders them in every format.
//!
//! cargo run --example coverage_report -- [table|json|csv]

use restcov::report::{render, OutputFormat};
use restcov::traffic_log::read_log_file;
use restcov::{compute_report, load_spec_file, match_log};

fn main() {
    let format: OutputFormat = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "table".to_string())
        .parse()
        .unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(1);
        });
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let model = load_spec_file(format!("{dir}/petstore.yaml")).unwrap();
    let (log, _) = read_log_file(format!("{dir}/petstore_run.jsonl")).unwrap();
    let report = compute_report(&model, &match_log(&model, &log));

    print!("{}", String::from_utf8_lossy(&render(&report, format)));
    for (metric, value) in report.metrics.iter() {
        if let Some((n, d)) = value.counts() {
            eprintln!("{:<22} {n}/{d}", metric.name());
        }
    }
}
