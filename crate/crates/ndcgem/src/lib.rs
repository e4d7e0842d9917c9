//! Day-ahead clearing of coupled electricity and natural gas markets with
//! wind uncertainty.

pub mod engine;
pub mod gas;
pub mod master;
pub mod model;
pub mod report;
pub mod scenario;
pub mod solver;
