//! Shows which operation each recorded request was bound to.
//!
//! cargo run --example match_traffic

use restcov::load_spec_file;
use restcov::matcher::match_log;
use restcov::traffic_log::read_log_file;

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let model = load_spec_file(format!("{dir}/petstore.yaml")).unwrap();
    let (log, _) = read_log_file(format!("{dir}/petstore_run.jsonl")).unwrap();
    let outcome = match_log(&model, &log);

    for m in &outcome.matched {
        let params: Vec<String> = m
            .observed_params
            .iter()
            .map(|o| format!("{}={}", o.spec.name, o.raw_value))
            .collect();
        println!(
            "{} {} -> {} [{}] {:?}",
            m.interaction.method.as_str(),
            m.interaction.url.path(),
            m.operation.label(),
            params.join(" "),
            m.status_class
        );
    }
    for u in &outcome.unmatched {
        println!(
            "{} {} -> unmatched ({})",
            u.interaction.method.as_str(),
            u.interaction.url.path(),
            u.reason.as_str()
        );
    }
}
