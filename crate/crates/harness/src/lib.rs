//! Experiment harness for [`cmwu_core`]: game files, deterministic artifact
//! exports, a seeded property battery, and the implementations behind the
//! `cmwu` binary's subcommands.

pub mod battery;
pub mod commands;
pub mod config;
pub mod export;
pub mod gamefile;
