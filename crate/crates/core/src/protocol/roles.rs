//! The two parties as message-driven state machines, plus the Mediator
//! that holds the optical modes while they are on Bob's side.
//!
//! The same objects run in-process and across TCP; only the transport
//! between them changes, which is what makes the two executions agree bit
//! for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::circuit::Circuit;
use super::measure::{measure_with, outcome_probabilities};
use super::transcript::{Actor, Event, EventKind, Transcript};
use super::wire::{Body, Message, StateWire, PROTOCOL_VERSION};
use super::ProtocolError;
use crate::fock::{fidelity, PureFockState};
use crate::fock::DisplacementAmplitude;
use crate::optics::{apply_lifted, key_transform, multimode_displace, DisplacementKey};
use crate::{Error, Result, C64};

/// Probability above which an outcome must have a branch unitary.
pub const BRANCH_PROBABILITY_FLOOR: f64 = 1e-9;

/// Default extra photons added to every per-mode cutoff.
pub const DEFAULT_CUTOFF_MARGIN: usize = 10;

/// Holds the joint state between Alice's and Bob's operations.
#[derive(Debug, Default)]
pub struct Mediator {
    state: Option<PureFockState>,
}

impl Mediator {
    pub fn receive(&mut self, state: PureFockState) {
        self.state = Some(state);
    }

    pub fn apply(&mut self, u: &crate::optics::ModeUnitary) -> Result<()> {
        let state = self.state.as_ref().ok_or_else(|| Error::InvalidParameter("mediator holds no modes".into()))?;
        self.state = Some(apply_lifted(u, state)?);
        Ok(())
    }

    pub fn release(&mut self) -> Result<PureFockState> {
        self.state.take().ok_or_else(|| Error::InvalidParameter("mediator holds no modes".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BobPhase {
    Hello,
    Input,
    Outcome,
    Done,
    Finished,
}

/// What Bob's process learns from a session.
#[derive(Debug, Clone, PartialEq)]
pub struct BobOutcome {
    /// Bob's and the Mediator's events.
    pub events: Vec<Event>,
    pub outcome: Option<usize>,
}

/// The server: owns the circuit and the Mediator. Never sees a key.
#[derive(Debug)]
pub struct Bob {
    circuit: Circuit,
    mediator: Mediator,
    version: u32,
    clock: u64,
    events: Vec<Event>,
    phase: BobPhase,
    outcome: Option<usize>,
}

impl Bob {
    pub fn new(circuit: Circuit) -> Result<Self> {
        circuit.validate()?;
        Ok(Self {
            circuit,
            mediator: Mediator::default(),
            version: PROTOCOL_VERSION,
            clock: 0,
            events: Vec::new(),
            phase: BobPhase::Hello,
            outcome: None,
        })
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn is_finished(&self) -> bool {
        self.phase == BobPhase::Finished
    }

    pub fn outcome(&self) -> BobOutcome {
        BobOutcome { events: self.events.clone(), outcome: self.outcome }
    }

    fn record(&mut self, actor: Actor, kind: EventKind, summary: String) {
        self.events.push(Event { index: self.clock, actor, kind, summary, key: None });
        self.clock += 1;
    }

    fn reply(&self, body: Body) -> Message {
        Message { seq: self.clock, body }
    }

    fn release_to_alice(&mut self, what: String) -> Result<StateWire> {
        let state = self.mediator.release()?;
        self.record(Actor::Mediator, EventKind::ReturnMode, what);
        Ok(StateWire::from_state(&state))
    }

    /// Handles one request and produces the reply.
    pub fn handle(&mut self, msg: Message) -> Result<Message> {
        self.clock = self.clock.max(msg.seq);
        let expected = match self.phase {
            BobPhase::Hello => "HELLO",
            BobPhase::Input => "ENCRYPTED_INPUT",
            BobPhase::Outcome => "MEASURE_RESULT",
            BobPhase::Done => "DECRYPT_DONE",
            BobPhase::Finished => "nothing",
        };
        match (self.phase, msg.body) {
            (_, Body::Error { code, message }) => Err(ProtocolError::Remote { code, message }.into()),
            (BobPhase::Hello, Body::Hello { version, .. }) => {
                if version != self.version {
                    return Err(ProtocolError::VersionMismatch { expected: self.version, found: version }.into());
                }
                self.phase = BobPhase::Input;
                Ok(self.reply(Body::Hello { version: self.version, circuit: Some(self.circuit.to_wire()) }))
            }
            (BobPhase::Input, Body::EncryptedInput { state }) => {
                let state = state.to_state()?;
                if state.modes() != self.circuit.modes() {
                    return Err(Error::DimensionMismatch { expected: self.circuit.modes(), found: state.modes() });
                }
                self.mediator.receive(state);
                self.mediator.apply(&self.circuit.stage1)?;
                let m = self.circuit.modes();
                self.record(Actor::Bob, EventKind::Compute, format!("stage-1 unitary on {m} modes"));
                match self.circuit.measured_mode {
                    Some(k) => {
                        let state = self.release_to_alice(format!("mode {k} routed to Alice for measurement"))?;
                        self.phase = BobPhase::Outcome;
                        Ok(self.reply(Body::MeasureRequest { mode: k, state }))
                    }
                    None => {
                        let state = self.release_to_alice(format!("all {m} modes returned to Alice"))?;
                        self.phase = BobPhase::Done;
                        Ok(self.reply(Body::ApplyStage { stage: 1, state }))
                    }
                }
            }
            (BobPhase::Outcome, Body::MeasureResult { outcome, state }) => {
                let u2 = self
                    .circuit
                    .branches
                    .get(&outcome)
                    .cloned()
                    .ok_or(Error::BranchMiss { outcome, probability: f64::NAN })?;
                self.mediator.receive(state.to_state()?);
                self.mediator.apply(&u2)?;
                self.outcome = Some(outcome);
                self.record(Actor::Bob, EventKind::Feedforward, format!("stage-2 unitary for outcome {outcome}"));
                let m = self.circuit.modes();
                let state = self.release_to_alice(format!("all {m} modes returned to Alice"))?;
                self.phase = BobPhase::Done;
                Ok(self.reply(Body::ApplyStage { stage: 2, state }))
            }
            (BobPhase::Done, Body::DecryptDone {}) => {
                self.phase = BobPhase::Finished;
                Ok(self.reply(Body::Result { events: self.events.clone() }))
            }
            (_, body) => Err(ProtocolError::UnexpectedMessage { expected: expected.into(), found: body.name().into() }.into()),
        }
    }
}

/// Everything Alice knows at the end of a session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    /// `|<reference|decrypted>|^2`, the decrypted state left unrenormalized.
    pub fidelity: f64,
    pub outcome: Option<usize>,
    /// Born probability of the realized outcome on the decrypted mode.
    pub probability: Option<f64>,
    /// Encryption key alpha.
    pub key: DisplacementKey,
    /// Stage-1 key `beta = U_1 alpha`.
    pub beta: DisplacementKey,
    /// Key Alice removed at the end.
    pub final_key: DisplacementKey,
    pub cutoffs: Vec<usize>,
    /// Norm-squared lost to truncation over all of Alice's displacements.
    pub leakage: f64,
    pub transcript: Transcript,
}

#[derive(Debug, Clone)]
pub struct AliceOptions {
    pub version: u32,
    pub cutoff_margin: usize,
}

impl Default for AliceOptions {
    fn default() -> Self {
        Self { version: PROTOCOL_VERSION, cutoff_margin: DEFAULT_CUTOFF_MARGIN }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AlicePhase {
    Start,
    Hello,
    Stage,
    Result,
    Finished,
}

pub enum Step {
    Send(Message),
    Done(Box<SessionResult>),
}

#[derive(Debug)]
struct Keys {
    alpha: DisplacementKey,
    beta: DisplacementKey,
    cutoffs: Vec<usize>,
}

/// The client: owns the input, the keys and the randomness.
#[derive(Debug)]
pub struct Alice {
    psi: PureFockState,
    sigma: f64,
    rng: ChaCha8Rng,
    options: AliceOptions,
    clock: u64,
    events: Vec<Event>,
    phase: AlicePhase,
    circuit: Option<Circuit>,
    keys: Option<Keys>,
    measured: Option<(usize, f64)>,
    final_key: Option<DisplacementKey>,
    fidelity: f64,
    leakage: f64,
}

impl Alice {
    pub fn new(psi: PureFockState, sigma: f64, seed: u64, options: AliceOptions) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be non-negative, got {sigma}")));
        }
        let norm_sq = psi.norm_sq();
        if (norm_sq - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self {
            psi,
            sigma,
            rng: ChaCha8Rng::seed_from_u64(seed),
            options,
            clock: 0,
            events: Vec::new(),
            phase: AlicePhase::Start,
            circuit: None,
            keys: None,
            measured: None,
            final_key: None,
            fidelity: 0.0,
            leakage: 0.0,
        })
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    fn record(&mut self, kind: EventKind, summary: String, key: DisplacementKey) {
        self.events.push(Event { index: self.clock, actor: Actor::Alice, kind, summary, key: Some(key) });
        self.clock += 1;
    }

    fn send(&self, body: Body) -> Step {
        Step::Send(Message { seq: self.clock, body })
    }

    /// The opening HELLO.
    pub fn start(&mut self) -> Message {
        self.phase = AlicePhase::Hello;
        Message { seq: self.clock, body: Body::Hello { version: self.options.version, circuit: None } }
    }

    pub fn handle(&mut self, msg: Message) -> Result<Step> {
        self.clock = self.clock.max(msg.seq);
        let expected = match self.phase {
            AlicePhase::Start => "nothing before HELLO is sent",
            AlicePhase::Hello => "HELLO",
            AlicePhase::Stage => "MEASURE_REQUEST or APPLY_STAGE",
            AlicePhase::Result => "RESULT",
            AlicePhase::Finished => "nothing",
        };
        match (self.phase, msg.body) {
            (_, Body::Error { code, message }) => Err(ProtocolError::Remote { code, message }.into()),
            (AlicePhase::Hello, Body::Hello { version, circuit: Some(circuit) }) => {
                if version != self.options.version {
                    return Err(ProtocolError::VersionMismatch { expected: self.options.version, found: version }.into());
                }
                let circuit = Circuit::from_wire(&circuit)?;
                let input = self.encrypt(circuit)?;
                self.phase = AlicePhase::Stage;
                Ok(self.send(Body::EncryptedInput { state: input }))
            }
            (AlicePhase::Stage, Body::MeasureRequest { mode, state }) if self.measured.is_none() => {
                let (outcome, post) = self.measure(mode, state.to_state()?)?;
                Ok(self.send(Body::MeasureResult { outcome, state: StateWire::from_state(&post) }))
            }
            (AlicePhase::Stage, Body::ApplyStage { stage, state }) => {
                let want = if self.measured.is_some() { 2 } else { 1 };
                let circuit = self.circuit.as_ref().expect("set at HELLO");
                if stage != want || circuit.is_adaptive() != self.measured.is_some() {
                    return Err(ProtocolError::UnexpectedMessage {
                        expected: format!("APPLY_STAGE for stage {want}"),
                        found: format!("APPLY_STAGE for stage {stage}"),
                    }
                    .into());
                }
                self.decrypt(state.to_state()?)?;
                self.phase = AlicePhase::Result;
                Ok(self.send(Body::DecryptDone {}))
            }
            (AlicePhase::Result, Body::Result { events }) => {
                self.phase = AlicePhase::Finished;
                if events.iter().any(|e| e.actor == Actor::Alice) {
                    return Err(Error::InvalidParameter("server reported events on Alice's behalf".into()));
                }
                let transcript = Transcript::merged(std::mem::take(&mut self.events), events);
                transcript.validate()?;
                let keys = self.keys.take().expect("set at HELLO");
                let circuit = self.circuit.as_ref().expect("set at HELLO");
                let outcome = circuit.measured_mode.and(self.measured.map(|(o, _)| o));
                Ok(Step::Done(Box::new(SessionResult {
                    fidelity: self.fidelity,
                    outcome,
                    probability: self.measured.map(|(_, p)| p),
                    key: keys.alpha,
                    beta: keys.beta,
                    final_key: self.final_key.take().expect("set at decrypt"),
                    cutoffs: keys.cutoffs,
                    leakage: self.leakage,
                    transcript,
                })))
            }
            (_, body) => Err(ProtocolError::UnexpectedMessage { expected: expected.into(), found: body.name().into() }.into()),
        }
    }

    /// Samples the key, fixes the per-mode cutoffs and displaces the input.
    fn encrypt(&mut self, circuit: Circuit) -> Result<StateWire> {
        let m = self.psi.modes();
        if circuit.modes() != m {
            return Err(Error::DimensionMismatch { expected: m, found: circuit.modes() });
        }
        let alpha = DisplacementKey::sample(m, self.sigma, &mut self.rng)?;
        let beta = key_transform(&circuit.stage1, &alpha)?;
        // cutoffs must hold every key Alice will apply: alpha, beta and all
        // possible stage-2 keys
        let mut gamma: Vec<f64> = alpha.alphas.iter().zip(&beta.alphas).map(|(a, b)| a.abs().max(b.abs())).collect();
        if let Some(k) = circuit.measured_mode {
            for u2 in circuit.branches.values() {
                let fin = residual_key(u2, &beta, k)?;
                for (g, a) in gamma.iter_mut().zip(&fin.alphas) {
                    *g = g.max(a.abs());
                }
            }
        }
        let n = self.psi.photon_support();
        let margin = self.options.cutoff_margin;
        let cutoffs: Vec<usize> = gamma.iter().map(|g| n + (4.0 * g * g + 8.0 * g).ceil() as usize + margin).collect();
        let enc = multimode_displace(&alpha, &self.psi, &cutoffs)?;
        self.leakage += enc.total_leakage();
        self.record(EventKind::Encrypt, format!("displaced {m} modes, cutoffs {cutoffs:?}"), alpha.clone());
        self.circuit = Some(circuit);
        self.keys = Some(Keys { alpha, beta, cutoffs });
        Ok(StateWire::from_state(&enc.state))
    }

    /// Removes the stage-1 key from the measured mode, then measures it.
    fn measure(&mut self, mode: usize, state: PureFockState) -> Result<(usize, PureFockState)> {
        let circuit = self.circuit.as_ref().expect("set at HELLO");
        if circuit.measured_mode != Some(mode) {
            return Err(ProtocolError::UnexpectedMessage {
                expected: format!("MEASURE_REQUEST for mode {:?}", circuit.measured_mode),
                found: format!("MEASURE_REQUEST for mode {mode}"),
            }
            .into());
        }
        let keys = self.keys.as_ref().expect("set at HELLO");
        let mut local = DisplacementKey::zero(keys.beta.len());
        local.alphas[mode] = keys.beta.alphas[mode];
        let dec = multimode_displace(&local.negated(), &state, &keys.cutoffs)?;
        self.leakage += dec.total_leakage();
        let probs = outcome_probabilities(&dec.state, mode)?;
        for (o, &p) in probs.iter().enumerate() {
            if p > BRANCH_PROBABILITY_FLOOR && !circuit.branches.contains_key(&o) {
                return Err(Error::BranchMiss { outcome: o, probability: p });
            }
        }
        let u: f64 = self.rng.random();
        let meas = measure_with(&dec.state, mode, u)?;
        self.measured = Some((meas.outcome, meas.probability));
        self.record(
            EventKind::Measure,
            format!("mode {mode} decrypted and measured: outcome {}", meas.outcome),
            local,
        );
        Ok((meas.outcome, meas.post_state))
    }

    /// Removes the final key and scores the result against the plain circuit.
    fn decrypt(&mut self, state: PureFockState) -> Result<()> {
        let circuit = self.circuit.as_ref().expect("set at HELLO");
        let keys = self.keys.as_ref().expect("set at HELLO");
        let (final_key, u2) = match (circuit.measured_mode, self.measured) {
            (Some(k), Some((outcome, _))) => {
                let u2 = circuit
                    .branches
                    .get(&outcome)
                    .ok_or(Error::BranchMiss { outcome, probability: self.measured.map_or(0.0, |(_, p)| p) })?;
                (residual_key(u2, &keys.beta, k)?, Some(u2.clone()))
            }
            _ => (keys.beta.clone(), None),
        };
        let dec = multimode_displace(&final_key.negated(), &state, &keys.cutoffs)?;
        self.leakage += dec.total_leakage();

        let mut reference = apply_lifted(&circuit.stage1, &self.psi)?;
        if let (Some(k), Some((outcome, _)), Some(u2)) = (circuit.measured_mode, self.measured, u2) {
            let amps: Vec<C64> = reference
                .basis()
                .tuples()
                .iter()
                .zip(reference.amplitudes())
                .map(|(t, a)| if t[k] == outcome { *a } else { C64::new(0.0, 0.0) })
                .collect();
            let mut projected = PureFockState::unnormalized(reference.basis().clone(), amps)?;
            reference = if projected.norm_sq() > 0.0 {
                projected.normalize()?;
                apply_lifted(&u2, &projected)?
            } else {
                projected
            };
        }
        let (reference, _) = reference.embed_into(dec.state.basis())?;
        self.fidelity = fidelity(&reference, &dec.state)?;
        let label = if self.measured.is_some() { "stage-2" } else { "stage-1" };
        self.record(EventKind::Decrypt, format!("removed {label} key from all modes"), final_key.clone());
        self.final_key = Some(final_key);
        Ok(())
    }
}

/// `U_2 beta'` where `beta'` is `beta` with the measured component zeroed.
pub fn residual_key(u2: &crate::optics::ModeUnitary, beta: &DisplacementKey, measured: usize) -> Result<DisplacementKey> {
    let mut rest = beta.clone();
    rest.alphas[measured] = DisplacementAmplitude::default();
    key_transform(u2, &rest)
}
