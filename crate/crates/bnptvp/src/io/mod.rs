//! Ingestion, configuration, and persistence.

mod config;
mod draws;
mod panel;

pub use config::{ConfigError, RunConfig};
pub use draws::{
    read_draws, write_draws, DrawsError, DrawsMeta, HyperRecord, PosteriorDraws, DRAWS_VERSION,
};
pub use panel::{read_panel, read_panel_str, PanelReadError};
