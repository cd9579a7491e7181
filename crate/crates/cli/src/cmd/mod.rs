pub mod infer;
pub mod simulate;
pub mod skr;
pub mod window;

use serde::Serialize;

use crate::config::RunConfig;

/// Every JSON product carries the command, seed and resolved config.
#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a RunConfig,
    #[serde(flatten)]
    pub body: T,
}
