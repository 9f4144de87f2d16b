//! Project files, command-line entry points and the HTTP service for
//! authoring transparent documents.

pub mod app;
pub mod cli;
pub mod project;
pub mod server;
pub mod wire;
