pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod output;
pub mod probe;
