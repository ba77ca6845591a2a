//! Library half of the `wold` command-line tool: family-file parsing,
//! command implementations, and the JSON report schema.

pub mod commands;
pub mod family;
pub mod report;
