//! HTTP collection of post-edits and error flags for blinded rater sessions.
//!
//! Raters open a session, fetch tasks by 0-based index and submit one
//! post-edit per task until the deadline. Operators export the current
//! records as JSON lines. Nothing served here carries segment origin.

pub mod api;
pub mod clock;
pub mod collector;
pub mod journal;
pub mod study;

pub use api::{router, serve};
pub use clock::{Clock, ManualClock, SystemClock};
pub use collector::{Collector, ServiceConfig, ServiceError, SessionState, SubmitRequest, TaskPayload};
pub use study::Study;
