//! Length-prefixed JSON frames: a 4-byte big-endian byte count followed by
//! a UTF-8 object `{type, seq, payload}`.

use std::io::{ErrorKind, Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::transcript::Event;
use super::ProtocolError;
use crate::fock::{FockBasis, PureFockState};
use crate::optics::UnitaryFile;
use crate::{Result, C64};

pub const PROTOCOL_VERSION: u32 = 1;

/// Frames above this many bytes are refused before allocation.
pub const MAX_FRAME_BYTES: usize = 64 << 20;

/// State vector in transit, with the exact basis it lives on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateWire {
    pub mode_cutoffs: Vec<usize>,
    pub max_photons: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateWire {
    pub fn from_state(state: &PureFockState) -> Self {
        Self {
            mode_cutoffs: state.basis().mode_cutoffs().to_vec(),
            max_photons: state.max_photons(),
            amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn to_state(&self) -> Result<PureFockState> {
        let basis = Arc::new(FockBasis::new(self.mode_cutoffs.clone(), self.max_photons)?);
        let amps = self.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        PureFockState::unnormalized(basis, amps)
    }
}

/// Bob's published circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitWire {
    pub stage1: UnitaryFile,
    pub measured_mode: Option<usize>,
    pub branches: Vec<(usize, UnitaryFile)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Body {
    Hello { version: u32, circuit: Option<CircuitWire> },
    EncryptedInput { state: StateWire },
    ApplyStage { stage: u32, state: StateWire },
    MeasureRequest { mode: usize, state: StateWire },
    MeasureResult { outcome: usize, state: StateWire },
    DecryptDone {},
    Result { events: Vec<Event> },
    Error { code: String, message: String },
}

impl Body {
    pub fn name(&self) -> &'static str {
        match self {
            Body::Hello { .. } => "HELLO",
            Body::EncryptedInput { .. } => "ENCRYPTED_INPUT",
            Body::ApplyStage { .. } => "APPLY_STAGE",
            Body::MeasureRequest { .. } => "MEASURE_REQUEST",
            Body::MeasureResult { .. } => "MEASURE_RESULT",
            Body::DecryptDone {} => "DECRYPT_DONE",
            Body::Result { .. } => "RESULT",
            Body::Error { .. } => "ERROR",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    /// Sender's logical clock when the message left.
    pub seq: u64,
    pub body: Body,
}

impl Message {
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(&self.body).expect("message bodies serialize");
        v.as_object_mut().expect("adjacently tagged body").insert("seq".into(), Value::from(self.seq));
        v.to_string()
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, ProtocolError> {
        let mut v: Value = serde_json::from_str(text).map_err(|e| ProtocolError::MalformedFrame(e.to_string()))?;
        let obj = v
            .as_object_mut()
            .ok_or_else(|| ProtocolError::MalformedFrame("frame body is not a JSON object".into()))?;
        let seq = obj
            .remove("seq")
            .and_then(|s| s.as_u64())
            .ok_or_else(|| ProtocolError::MalformedFrame("missing or invalid seq".into()))?;
        if !obj.contains_key("payload") {
            // unit-like payloads may be sent as {} or omitted
            obj.insert("payload".into(), Value::Object(Default::default()));
        }
        let body = serde_json::from_value(v).map_err(|e| ProtocolError::MalformedFrame(e.to_string()))?;
        Ok(Self { seq, body })
    }
}

pub fn write_frame<W: Write>(w: &mut W, msg: &Message) -> std::result::Result<(), ProtocolError> {
    let body = msg.to_json();
    if body.len() > MAX_FRAME_BYTES {
        return Err(ProtocolError::FrameTooLarge { size: body.len(), limit: MAX_FRAME_BYTES });
    }
    w.write_all(&(body.len() as u32).to_be_bytes()).map_err(io_error)?;
    w.write_all(body.as_bytes()).map_err(io_error)?;
    w.flush().map_err(io_error)
}

pub fn read_frame<R: Read>(r: &mut R) -> std::result::Result<Message, ProtocolError> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len).map_err(io_error)?;
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME_BYTES {
        return Err(ProtocolError::FrameTooLarge { size: len, limit: MAX_FRAME_BYTES });
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(io_error)?;
    let text = String::from_utf8(buf).map_err(|_| ProtocolError::MalformedFrame("body is not UTF-8".into()))?;
    Message::from_json(&text)
}

fn io_error(e: std::io::Error) -> ProtocolError {
    match e.kind() {
        ErrorKind::WouldBlock | ErrorKind::TimedOut => ProtocolError::Timeout,
        ErrorKind::UnexpectedEof | ErrorKind::ConnectionReset | ErrorKind::BrokenPipe => ProtocolError::ConnectionClosed,
        _ => ProtocolError::Io(e),
    }
}
