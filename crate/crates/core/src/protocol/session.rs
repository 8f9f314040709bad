use std::collections::BTreeMap;

use super::circuit::Circuit;
use super::roles::{Alice, AliceOptions, Bob, SessionResult, Step, DEFAULT_CUTOFF_MARGIN};
use super::wire::{Body, Message};
use super::ProtocolError;
use crate::fock::PureFockState;
use crate::optics::ModeUnitary;
use crate::{Error, Result};

/// Carries Alice's requests to Bob and brings back his replies.
pub trait Transport {
    fn exchange(&mut self, msg: Message) -> Result<Message>;

    /// Tells the peer the session is over because of `err`.
    fn abort(&mut self, _seq: u64, _err: &Error) {}
}

/// Direct calls into a local [`Bob`].
pub struct InProcess<'a>(pub &'a mut Bob);

impl Transport for InProcess<'_> {
    fn exchange(&mut self, msg: Message) -> Result<Message> {
        self.0.handle(msg)
    }
}

/// Runs Alice's side of a session to completion.
pub fn drive<T: Transport>(alice: &mut Alice, transport: &mut T) -> Result<SessionResult> {
    let mut msg = alice.start();
    loop {
        let step = transport.exchange(msg).and_then(|reply| alice.handle(reply));
        match step {
            Ok(Step::Send(next)) => msg = next,
            Ok(Step::Done(result)) => return Ok(*result),
            Err(e) => {
                if !matches!(
                    e,
                    Error::Protocol(ProtocolError::Remote { .. } | ProtocolError::ConnectionClosed | ProtocolError::Io(_))
                ) {
                    transport.abort(alice.clock(), &e);
                }
                return Err(e);
            }
        }
    }
}

/// Short machine-readable tag carried in ERROR frames.
pub fn error_code(e: &Error) -> &'static str {
    match e {
        Error::Protocol(p) => match p {
            ProtocolError::MalformedFrame(_) => "malformed-frame",
            ProtocolError::FrameTooLarge { .. } => "frame-too-large",
            ProtocolError::VersionMismatch { .. } => "version-mismatch",
            ProtocolError::Timeout => "timeout",
            ProtocolError::ConnectionClosed => "connection-closed",
            ProtocolError::UnexpectedMessage { .. } => "unexpected-message",
            ProtocolError::Remote { .. } => "remote",
            ProtocolError::Io(_) => "io",
        },
        Error::BranchMiss { .. } => "branch-miss",
        Error::Leakage { .. } => "cutoff",
        _ => "internal",
    }
}

pub fn error_message(seq: u64, e: &Error) -> Message {
    Message { seq, body: Body::Error { code: error_code(e).into(), message: e.to_string() } }
}

/// Settings for an in-process adaptive run.
#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub modes: usize,
    pub sigma: f64,
    pub seed: u64,
    pub unitary_stage1: ModeUnitary,
    pub measured_mode: Option<usize>,
    pub branch_table: BTreeMap<usize, ModeUnitary>,
    /// Extra photons on top of `n + ceil(4 g^2 + 8 g)` per mode.
    pub cutoff_margin: usize,
}

impl ProtocolConfig {
    pub fn passive(unitary: ModeUnitary, sigma: f64, seed: u64) -> Self {
        Self {
            modes: unitary.m(),
            sigma,
            seed,
            unitary_stage1: unitary,
            measured_mode: None,
            branch_table: BTreeMap::new(),
            cutoff_margin: DEFAULT_CUTOFF_MARGIN,
        }
    }

    pub fn adaptive(
        unitary_stage1: ModeUnitary,
        measured_mode: usize,
        branch_table: BTreeMap<usize, ModeUnitary>,
        sigma: f64,
        seed: u64,
    ) -> Self {
        Self {
            modes: unitary_stage1.m(),
            sigma,
            seed,
            unitary_stage1,
            measured_mode: Some(measured_mode),
            branch_table,
            cutoff_margin: DEFAULT_CUTOFF_MARGIN,
        }
    }

    pub fn circuit(&self) -> Result<Circuit> {
        if self.unitary_stage1.m() != self.modes {
            return Err(Error::DimensionMismatch { expected: self.modes, found: self.unitary_stage1.m() });
        }
        let c = Circuit {
            stage1: self.unitary_stage1.clone(),
            measured_mode: self.measured_mode,
            branches: self.branch_table.clone(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.circuit().map(|_| ())
    }
}

/// Encrypt, let Bob apply `phi(U)`, decrypt with `-U alpha`.
pub fn run_passive(psi: &PureFockState, u: &ModeUnitary, sigma: f64, seed: u64) -> Result<SessionResult> {
    run_adaptive(&ProtocolConfig::passive(u.clone(), sigma, seed), psi)
}

/// One session with optional mid-circuit measurement and feedforward.
pub fn run_adaptive(config: &ProtocolConfig, psi: &PureFockState) -> Result<SessionResult> {
    let mut bob = Bob::new(config.circuit()?)?;
    let options = AliceOptions { cutoff_margin: config.cutoff_margin, ..AliceOptions::default() };
    let mut alice = Alice::new(psi.clone(), config.sigma, config.seed, options)?;
    drive(&mut alice, &mut InProcess(&mut bob))
}
