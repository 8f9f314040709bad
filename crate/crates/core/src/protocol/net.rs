use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::time::Duration;

use super::circuit::Circuit;
use super::roles::{Alice, AliceOptions, Bob, BobOutcome, SessionResult};
use super::session::{drive, error_message, Transport};
use super::wire::{read_frame, write_frame, Message};
use super::ProtocolError;
use crate::fock::PureFockState;
use crate::{Error, Result};

/// Read/write timeout on both ends.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

struct TcpTransport {
    stream: TcpStream,
}

impl Transport for TcpTransport {
    fn exchange(&mut self, msg: Message) -> Result<Message> {
        write_frame(&mut self.stream, &msg)?;
        Ok(read_frame(&mut self.stream)?)
    }

    fn abort(&mut self, seq: u64, err: &Error) {
        let _ = write_frame(&mut self.stream, &error_message(seq, err));
    }
}

/// Bob's listening socket. Sessions are served one at a time.
pub struct BobServer {
    listener: TcpListener,
    circuit: Circuit,
    timeout: Duration,
}

impl BobServer {
    pub fn bind(addr: impl ToSocketAddrs, circuit: Circuit) -> Result<Self> {
        circuit.validate()?;
        Ok(Self { listener: TcpListener::bind(addr)?, circuit, timeout: DEFAULT_TIMEOUT })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts one connection and runs the session on it. Any failure is
    /// reported to the peer as an ERROR frame before it is returned here.
    pub fn serve_one(&self) -> Result<BobOutcome> {
        let (mut stream, _) = self.listener.accept()?;
        stream.set_read_timeout(Some(self.timeout))?;
        stream.set_write_timeout(Some(self.timeout))?;
        let mut bob = Bob::new(self.circuit.clone())?;
        loop {
            let reply = read_frame(&mut stream).map_err(Error::from).and_then(|msg| bob.handle(msg));
            match reply {
                Ok(reply) => {
                    write_frame(&mut stream, &reply)?;
                    if bob.is_finished() {
                        return Ok(bob.outcome());
                    }
                }
                Err(e) => {
                    if !matches!(
                        e,
                        Error::Protocol(ProtocolError::Remote { .. } | ProtocolError::ConnectionClosed | ProtocolError::Io(_))
                    ) {
                        let _ = write_frame(&mut stream, &error_message(bob.clock(), &e));
                    }
                    return Err(e);
                }
            }
        }
    }
}

/// Serves a single session on `127.0.0.1:port`.
pub fn serve_bob(port: u16, circuit: Circuit) -> Result<BobOutcome> {
    BobServer::bind(("127.0.0.1", port), circuit)?.serve_one()
}

/// Runs Alice's side against a remote Bob.
pub fn connect_alice(address: impl ToSocketAddrs, psi: &PureFockState, sigma: f64, seed: u64) -> Result<SessionResult> {
    connect_alice_with(address, psi, sigma, seed, AliceOptions::default(), DEFAULT_TIMEOUT)
}

pub fn connect_alice_with(
    address: impl ToSocketAddrs,
    psi: &PureFockState,
    sigma: f64,
    seed: u64,
    options: AliceOptions,
    timeout: Duration,
) -> Result<SessionResult> {
    let mut alice = Alice::new(psi.clone(), sigma, seed, options)?;
    let stream = TcpStream::connect(address)?;
    stream.set_read_timeout(Some(timeout))?;
    stream.set_write_timeout(Some(timeout))?;
    stream.set_nodelay(true)?;
    drive(&mut alice, &mut TcpTransport { stream })
}
