//! Files, corpora, experiment drivers and the command line around
//! `kclose-core`.

pub mod config;
pub mod corpus;
pub mod experiments;
pub mod format;
pub mod report;
