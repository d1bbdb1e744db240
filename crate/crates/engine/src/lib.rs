//! HTTP service, REPL and script runner around the intentional OLAP core.

pub mod api;
pub mod script;

pub use api::{router, AppState};
pub use script::{run_script, Outcome};
