//! Prints the operations, parameters and response keys of an OpenAPI document.
//!
//! cargo run --example load_spec -- [path/to/openapi.yaml]

use restcov::load_spec_file;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/petstore.yaml").to_string()
    });
    let model = match load_spec_file(&path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    println!(
        "OpenAPI {} with base paths {:?}",
        model.source_version,
        model.server_base_paths()
    );
    for op in &model.operations {
        println!("{}", op.label());
        for p in &op.parameters {
            let values = if p.domain.is_limited() {
                format!(" {:?}", p.domain.literals())
            } else {
                String::new()
            };
            println!("  {} {}{}", p.location.as_str(), p.name, values);
        }
        let keys: Vec<String> = op
            .responses
            .iter()
            .map(|r| r.status_key.to_string())
            .collect();
        println!("  responses {}", keys.join(", "));
    }
    for w in &model.warnings {
        println!("warning at {}: {}", w.location, w.message);
    }
}
