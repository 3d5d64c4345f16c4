//! Black-box interface coverage for REST APIs.
//!
//! `restcov` reads an OpenAPI 3 document and a log of HTTP request/response
//! pairs and reports how much of the documented interface the traffic
//! exercised: paths, operations, parameters, parameter values of
//! boolean/enum parameters, request and response content types, status code
//! classes and status codes.
//!
//! The pipeline is:
//!
//! 1. [`spec_model::load_spec`] builds an [`ApiModel`] from the document.
//! 2. [`traffic_log`] reads HAR or native JSONL traffic into an
//!    [`InteractionLog`]; [`capture_proxy`] can record such a log from live
//!    traffic.
//! 3. [`matcher::match_log`] binds each interaction to an operation.
//! 4. [`metrics::compute_report`] computes the [`CoverageReport`].
//! 5. [`report`] renders it as JSON, CSV or a text table.

pub mod capture_proxy;
pub mod matcher;
pub mod method;
pub mod metrics;
pub mod report;
pub mod spec_model;
pub mod template;
pub mod traffic_log;

pub use matcher::{match_log, MatchOutcome, StatusClass, UnmatchReason};
pub use method::HttpMethod;
pub use metrics::{compute_report, CoverageReport, Metric, MetricValue};
pub use spec_model::{load_spec, load_spec_file, ApiModel, SpecError, SpecFormat};
pub use traffic_log::{Interaction, InteractionLog};
