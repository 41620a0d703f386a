//! Real-time inference: wire protocol, streaming sessions, cycle tracking and
//! the socket server.

pub mod cycle;
pub mod protocol;
pub mod server;
pub mod session;

pub use cycle::{advance_cycle, CycleEvent, CycleEventKind, CycleOrder, CycleTracker, CANONICAL_CYCLE};
pub use protocol::{read_message, write_message, CycleCode, ErrorCode, Message, ReadError, WireError};
pub use server::{
    cycle_message, prediction_message, serve_connection, serve_stdio, ConnectionEnd, ConnectionSummary, Server,
    ServerHandle,
};
pub use session::{check_servable, Prediction, Session, SessionConfig, StabilityFilter};
