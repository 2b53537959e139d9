pub mod analytics;
pub mod degree_dist;
pub mod graph_gen;
pub mod harness;
pub mod matching;
pub mod num_format;
pub mod verify;
pub mod cli;
