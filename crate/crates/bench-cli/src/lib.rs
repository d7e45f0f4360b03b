//! Benchmark harness around the lifelong routing engine: scenario files,
//! TSPLIB-format loading, run orchestration, and artifact emission. The
//! `llvrp` binary is a thin CLI over these modules.

pub mod emit;
pub mod libdata;
pub mod profiles;
pub mod runner;
pub mod scenario;
pub mod svg;
pub mod tsplib;
