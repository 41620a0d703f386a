use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use log::{debug, info, warn};

use crate::data::{KeypointFrame, CLASS_NAMES, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::nn::Network;

use super::protocol::{read_message, write_message, ErrorCode, Message, ReadError, WireError, PROTOCOL_VERSION};
use super::session::{check_servable, Prediction, Session, SessionConfig};
use super::cycle::CycleEvent;

/// How a connection ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConnectionEnd {
    /// Peer closed the stream at a message boundary.
    Closed,
    /// We sent an ERROR and hung up.
    Rejected(ErrorCode),
}

/// Statistics for one served connection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionSummary {
    pub frames: u64,
    pub predictions: u64,
    pub cycle_events: u64,
    pub end: ConnectionEnd,
}

pub fn prediction_message(p: &Prediction) -> Message {
    let mut probabilities = [0.0f32; NUM_CLASSES];
    probabilities.copy_from_slice(&p.probabilities);
    Message::Prediction {
        timestamp_ms: p.timestamp_ms,
        class_index: p.top_class.index() as u8,
        probabilities,
        stable: p.stable,
    }
}

pub fn cycle_message(e: &CycleEvent) -> Message {
    Message::Cycle {
        event: e.kind.code(),
        step_index: e.step_index as u8,
        expected_class: e.expected.index() as u8,
        observed_class: e.observed.index() as u8,
    }
}

fn reject<W: Write>(writer: &mut W, err: WireError) -> io::Result<ConnectionEnd> {
    debug!("rejecting connection: {err}");
    write_message(
        writer,
        &Message::Error {
            code: err.code,
            message: err.message,
        },
    )?;
    writer.flush()?;
    Ok(ConnectionEnd::Rejected(err.code))
}

/// Serves one connection until the peer hangs up or breaks the protocol.
///
/// Protocol violations are answered with an ERROR message; the function then
/// returns normally so the caller can close the stream. Only transport
/// failures surface as `Err`.
pub fn serve_connection<R: Read, W: Write>(
    reader: R,
    writer: W,
    net: &Network<f32>,
    config: &SessionConfig,
) -> Result<ConnectionSummary> {
    let mut reader = BufReader::new(reader);
    let mut writer = BufWriter::new(writer);
    let mut session = Session::new(net, config.clone())?;
    let mut summary = ConnectionSummary {
        frames: 0,
        predictions: 0,
        cycle_events: 0,
        end: ConnectionEnd::Closed,
    };
    let mut greeted = false;

    loop {
        let message = match read_message(&mut reader) {
            Ok(Some(m)) => m,
            Ok(None) => break,
            Err(ReadError::Io(e)) => return Err(e.into()),
            Err(ReadError::Wire(e)) => {
                summary.end = reject(&mut writer, e)?;
                break;
            }
        };
        let outcome = match message {
            Message::Hello { version, dim } if !greeted => {
                let ack = handshake(version, dim, net);
                greeted = ack.is_ok();
                ack.map(|ack| vec![ack])
            }
            Message::Frame { timestamp_ms, values } if greeted => {
                summary.frames += 1;
                frame(&mut session, net, timestamp_ms, values)
            }
            other => Err(WireError::new(
                ErrorCode::Unexpected,
                format!("unexpected message type 0x{:02x}", other.type_byte()),
            )),
        };
        match outcome {
            Ok(replies) => {
                for reply in &replies {
                    match reply {
                        Message::Prediction { .. } => summary.predictions += 1,
                        Message::Cycle { .. } => summary.cycle_events += 1,
                        _ => {}
                    }
                    write_message(&mut writer, reply)?;
                }
                writer.flush()?;
            }
            Err(e) => {
                summary.end = reject(&mut writer, e)?;
                break;
            }
        }
    }
    writer.flush()?;
    Ok(summary)
}

fn handshake(version: u16, dim: u16, net: &Network<f32>) -> std::result::Result<Message, WireError> {
    if version != PROTOCOL_VERSION {
        return Err(WireError::new(
            ErrorCode::BadVersion,
            format!("protocol version {version} not supported, expected {PROTOCOL_VERSION}"),
        ));
    }
    if dim as usize != net.input_dim() {
        return Err(WireError::new(
            ErrorCode::BadDim,
            format!("client sends {dim} values per frame, model takes {}", net.input_dim()),
        ));
    }
    Ok(Message::HelloAck {
        classes: CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
    })
}

fn frame(
    session: &mut Session,
    net: &Network<f32>,
    timestamp_ms: u64,
    values: Vec<f32>,
) -> std::result::Result<Vec<Message>, WireError> {
    if values.len() != net.input_dim() {
        return Err(WireError::new(
            ErrorCode::BadDim,
            format!("frame has {} values, model takes {}", values.len(), net.input_dim()),
        ));
    }
    let frame = KeypointFrame::new(timestamp_ms, values)
        .map_err(|e| WireError::new(ErrorCode::BadValue, e.to_string()))?;
    match session.process_frame(net, frame) {
        Ok(None) => Ok(Vec::new()),
        Ok(Some((prediction, event))) => {
            let mut out = vec![prediction_message(&prediction)];
            out.extend(event.as_ref().map(cycle_message));
            Ok(out)
        }
        Err(Error::Ordering { previous, got }) => Err(WireError::new(
            ErrorCode::BadTimestamp,
            format!("timestamp {got} precedes {previous}"),
        )),
        Err(e) => Err(WireError::new(ErrorCode::Internal, e.to_string())),
    }
}

/// Serves a single session over stdin and stdout.
pub fn serve_stdio(net: &Network<f32>, config: &SessionConfig) -> Result<ConnectionSummary> {
    let stdin = io::stdin();
    let stdout = io::stdout();
    serve_connection(stdin.lock(), stdout.lock(), net, config)
}

/// TCP server: one thread and one session per connection.
pub struct Server {
    listener: TcpListener,
    net: Arc<Network<f32>>,
    config: SessionConfig,
    stop: Arc<AtomicBool>,
}

/// Handle to a server running on a background thread.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<Result<()>>>,
}

impl Server {
    pub fn bind<A: ToSocketAddrs>(addr: A, net: Network<f32>, config: SessionConfig) -> Result<Self> {
        check_servable(&net)?;
        config.validate()?;
        let listener = TcpListener::bind(addr)?;
        Ok(Server {
            listener,
            net: Arc::new(net),
            config,
            stop: Arc::new(AtomicBool::new(false)),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts connections until the stop flag is raised.
    pub fn run(self) -> Result<()> {
        info!("listening on {}", self.local_addr()?);
        for stream in self.listener.incoming() {
            if self.stop.load(Ordering::SeqCst) {
                break;
            }
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    warn!("accept failed: {e}");
                    continue;
                }
            };
            let net = Arc::clone(&self.net);
            let config = self.config.clone();
            thread::spawn(move || handle_stream(stream, &net, &config));
        }
        Ok(())
    }

    pub fn spawn(self) -> Result<ServerHandle> {
        let addr = self.local_addr()?;
        let stop = Arc::clone(&self.stop);
        let thread = thread::Builder::new()
            .name("surya-server".into())
            .spawn(move || self.run())?;
        Ok(ServerHandle {
            addr,
            stop,
            thread: Some(thread),
        })
    }
}

fn handle_stream(stream: TcpStream, net: &Network<f32>, config: &SessionConfig) {
    let peer = stream.peer_addr().ok();
    let _ = stream.set_nodelay(true);
    let reader = match stream.try_clone() {
        Ok(r) => r,
        Err(e) => {
            warn!("cannot clone stream for {peer:?}: {e}");
            return;
        }
    };
    match serve_connection(reader, &stream, net, config) {
        Ok(s) => info!(
            "{peer:?}: {} frames, {} predictions, {} cycle events, {:?}",
            s.frames, s.predictions, s.cycle_events, s.end
        ),
        Err(e) => warn!("{peer:?}: {e}"),
    }
    let _ = stream.shutdown(Shutdown::Both);
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting and waits for the accept loop to exit. Open
    /// connections finish on their own threads.
    pub fn shutdown(mut self) -> Result<()> {
        self.stop_and_join()
    }

    fn stop_and_join(&mut self) -> Result<()> {
        let Some(thread) = self.thread.take() else {
            return Ok(());
        };
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let _ = TcpStream::connect(self.addr);
        thread
            .join()
            .map_err(|_| Error::Io(io::Error::other("server thread panicked")))?
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.stop_and_join();
    }
}
