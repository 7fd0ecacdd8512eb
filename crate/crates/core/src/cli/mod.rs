//! Command line front end: spec files, the verification pipeline, the example
//! gallery and JSON reports.

pub mod commands;
pub mod gallery;
pub mod pipeline;
pub mod report;
pub mod spec_file;

pub use commands::{cmd_morse2d, cmd_tensor, cmd_verify, load_case, main, morse2d_report, run, tensor_report, Cli};
pub use gallery::{gallery_case, run_gallery, NAMES};
pub use pipeline::{factorization_check, test_functions, verify_case};
pub use report::{Check, Report, Verdict};
pub use spec_file::{parse_spec, Case, Overrides, SpecFile};
