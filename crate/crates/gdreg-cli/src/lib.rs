//! Experiment harness around the gdreg library: configuration,
//! reproducible command runs, manifests and static plots.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod plot;
pub mod verify;
