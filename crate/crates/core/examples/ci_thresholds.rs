//! Gates a build on minimum coverage, the way `restcov analyze --min` does.
//!
//! cargo run --example ci_thresholds -- operation=1.0 status_code=0.9

use restcov::report::{check_thresholds, exit_code_for, Thresholds};
use restcov::traffic_log::read_log_file;
use restcov::{compute_report, load_spec_file, match_log};

fn main() {
    let mut thresholds = Thresholds::new();
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        args = vec!["operation=1.0".into(), "parameter_value=0.5".into()];
    }
    for entry in &args {
        if let Err(e) = thresholds.parse_entry(entry) {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }

    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let model = load_spec_file(format!("{dir}/petstore.yaml")).unwrap();
    let (log, _) = read_log_file(format!("{dir}/petstore_run.jsonl")).unwrap();
    let report = compute_report(&model, &match_log(&model, &log));

    for v in check_thresholds(&report, &thresholds) {
        println!("{} is {}, minimum {}", v.metric.name(), v.actual, v.minimum);
    }
    let code = exit_code_for(&report, &thresholds);
    println!("exit code {code}");
    std::process::exit(code);
}
