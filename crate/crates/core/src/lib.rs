//! Building-stock electricity demand simulation and grid shortfall analysis.
//!
//! The pipeline samples a weighted synthetic building stock, simulates each
//! building hourly against zone weather, applies retrofit packages, calibrates
//! modeled load to served load, and measures the gap between scenario demand
//! and available generation during load-shed events.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod calendar;
pub mod calibration;
pub mod error;
pub mod grid;
pub mod pipeline;
pub mod retrofit;
pub mod sim;
pub mod stock;
pub mod synthetic;
pub mod transfer;
pub mod units;
pub mod weather;

pub use error::{Error, ErrorKind, Result};
