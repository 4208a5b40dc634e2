//! Command layer of `reductive-lab`: each subcommand produces a [`report::Report`].

pub mod commands;
pub mod report;
