pub mod denoise;
pub mod graph_gen;
pub mod prox_table;
pub mod rates;
pub mod rerun;
