pub mod experiment;
pub mod gen;
pub mod stats;
