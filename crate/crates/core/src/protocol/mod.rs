//! Passive and adaptive protocol runs between Alice (who holds the input
//! and the keys) and Bob (who holds the circuit), in-process or over TCP.
//!
//! Flow of a session, as request/response pairs initiated by Alice:
//!
//! ```text
//! HELLO            -> HELLO (with Bob's circuit)
//! ENCRYPTED_INPUT  -> MEASURE_REQUEST (adaptive) or APPLY_STAGE (passive)
//! MEASURE_RESULT   -> APPLY_STAGE
//! DECRYPT_DONE     -> RESULT (Bob's side of the transcript)
//! ```
//!
//! Alice's key never appears in a message. Her decrypt key for the final
//! stage is `U_2 beta'`, where `beta = U_1 alpha` and `beta'` is `beta` with
//! the measured mode's component removed at measurement time.

mod circuit;
mod measure;
mod net;
mod roles;
mod session;
mod transcript;
mod wire;

pub use circuit::Circuit;
pub use measure::{measure_mode, measure_with, outcome_probabilities, Measurement};
pub use net::{connect_alice, connect_alice_with, serve_bob, BobServer, DEFAULT_TIMEOUT};
pub use roles::{
    residual_key, Alice, AliceOptions, Bob, BobOutcome, Mediator, SessionResult, Step, BRANCH_PROBABILITY_FLOOR,
    DEFAULT_CUTOFF_MARGIN,
};
pub use session::{drive, error_code, error_message, run_adaptive, run_passive, InProcess, ProtocolConfig, Transport};
pub use transcript::{Actor, Event, EventKind, Transcript};
pub use wire::{read_frame, write_frame, Body, CircuitWire, Message, StateWire, MAX_FRAME_BYTES, PROTOCOL_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("malformed frame: {0}")]
    MalformedFrame(String),

    #[error("frame of {size} bytes exceeds the {limit}-byte limit")]
    FrameTooLarge { size: usize, limit: usize },

    #[error("protocol version mismatch: expected {expected}, peer sent {found}")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("timed out waiting for the peer")]
    Timeout,

    #[error("peer closed the connection")]
    ConnectionClosed,

    #[error("unexpected message: expected {expected}, got {found}")]
    UnexpectedMessage { expected: String, found: String },

    #[error("peer reported {code}: {message}")]
    Remote { code: String, message: String },

    #[error("socket error: {0}")]
    Io(std::io::Error),
}
