//! The NAR network: forward evaluation, initialization, weight layout,
//! and derivatives for the trainers.

mod jacobian;
mod network;

pub use jacobian::{errors_and_jacobian, sse, sse_and_gradient};
pub use network::{
    init_network, InitScheme, NarNetwork, NetworkSnapshot, WeightVector, SNAPSHOT_SCHEMA_VERSION,
    WEIGHT_LAYOUT,
};
