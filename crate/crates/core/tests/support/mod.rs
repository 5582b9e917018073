//! Oracles, generators and fixtures shared by the integration suites. Each
//! suite uses a subset, hence the `dead_code` allowance.
#![allow(dead_code)]

pub mod clone_oracle;
pub mod fixtures;
pub mod query_oracle;
pub mod stats_oracle;
