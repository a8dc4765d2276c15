pub mod assignment;
pub mod baseline;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod harness;
pub mod init;
pub mod metrics;
pub mod planner;
pub mod scenario;
pub mod scheduling;
pub mod start_slots;
pub mod trajectory_opt;
