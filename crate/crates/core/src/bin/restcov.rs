use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use restcov::capture_proxy::{run_proxy, ProxyConfig, DEFAULT_MAX_BODY_BYTES};
use restcov::report::{run_analyze, OutputFormat, RunConfig, Thresholds, EXIT_INPUT_ERROR};

#[derive(Parser)]
#[command(name = "restcov", version, about = "Interface coverage for REST APIs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute coverage of an OpenAPI document by recorded traffic.
    Analyze {
        #[arg(long)]
        spec: PathBuf,
        /// HAR or JSONL log; repeat to concatenate several logs.
        #[arg(long = "log", required = true)]
        logs: Vec<PathBuf>,
        #[arg(long, default_value = "table", value_parser = parse_format)]
        format: OutputFormat,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Minimum ratio for a metric, e.g. `--min path=0.8`; repeatable.
        #[arg(long = "min", value_name = "METRIC=RATIO")]
        min: Vec<String>,
    },
    /// Run a recording reverse proxy in front of an API.
    Proxy {
        #[arg(long)]
        listen: String,
        #[arg(long)]
        upstream: String,
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_BODY_BYTES)]
        max_body_bytes: usize,
    },
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();

    let code = match Cli::parse().command {
        Command::Analyze {
            spec,
            logs,
            format,
            output,
            min,
        } => {
            let mut thresholds = Thresholds::new();
            for entry in &min {
                if let Err(e) = thresholds.parse_entry(entry) {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_INPUT_ERROR as u8);
                }
            }
            let color = output.is_none()
                && std::env::var_os("RESTCOV_NO_COLOR").is_none()
                && std::io::stdout().is_terminal();
            let config = RunConfig {
                spec_path: spec,
                log_paths: logs,
                output_format: format,
                output_path: output,
                thresholds,
                color,
            };
            run_analyze(&config, &mut std::io::stdout(), &mut std::io::stderr())
        }
        Command::Proxy {
            listen,
            upstream,
            log,
            max_body_bytes,
        } => proxy(listen, upstream, log, max_body_bytes),
    };
    ExitCode::from(code as u8)
}

fn proxy(listen: String, upstream: String, log: PathBuf, max_body_bytes: usize) -> i32 {
    let config = match ProxyConfig::new(listen, &upstream, log, max_body_bytes) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
    runtime.block_on(async {
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        eprintln!(
            "forwarding {} -> {}, logging to {}",
            config.listen_address,
            config.upstream_base,
            config.log_path.display()
        );
        match run_proxy(config, shutdown).await {
            Ok(summary) => {
                eprintln!(
                    "{} exchanges recorded ({} bytes), {} upstream failures",
                    summary.requests_forwarded, summary.bytes_logged, summary.upstream_failures
                );
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INPUT_ERROR
            }
        }
    })
}
