//! Scenario runner for the quantum graph control toolkit.

pub mod catalog;
pub mod config;
pub mod plot;
pub mod scenario;
