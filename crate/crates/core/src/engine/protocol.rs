//! Length-prefixed binary messages exchanged with capture clients.
//!
//! Every message is `u32 payload_length, u8 message_type, payload`, all
//! integers and floats little-endian. `payload_length` excludes the 5-byte
//! header.
//!
//! | type | name       | payload                                                        |
//! |------|------------|----------------------------------------------------------------|
//! | 0x01 | HELLO      | u16 version, u16 dim                                           |
//! | 0x02 | HELLO_ACK  | u8 num_classes, then per class u8 name_len + UTF-8 name        |
//! | 0x10 | FRAME      | u64 timestamp_ms, u16 dim, dim × f32                           |
//! | 0x20 | PREDICTION | u64 timestamp_ms, u8 class, 8 × f32 probabilities, u8 flags    |
//! | 0x21 | CYCLE      | u8 event, u8 step_index, u8 expected_class, u8 observed_class |
//! | 0x7F | ERROR      | u8 code, u8 msg_len, UTF-8 message                             |

use std::fmt;
use std::io::{self, Read, Write};

use crate::data::NUM_CLASSES;
use crate::error::Error;

pub const PROTOCOL_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 5;
/// Upper bound on accepted payloads.
pub const MAX_PAYLOAD: usize = 1 << 20;

pub const MSG_HELLO: u8 = 0x01;
pub const MSG_HELLO_ACK: u8 = 0x02;
pub const MSG_FRAME: u8 = 0x10;
pub const MSG_PREDICTION: u8 = 0x20;
pub const MSG_CYCLE: u8 = 0x21;
pub const MSG_ERROR: u8 = 0x7F;

/// Bit 0 of the PREDICTION flags byte.
pub const FLAG_STABLE: u8 = 0x01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    BadVersion,
    BadDim,
    Malformed,
    Unexpected,
    BadTimestamp,
    BadValue,
    Internal,
}

impl ErrorCode {
    pub fn code(self) -> u8 {
        match self {
            ErrorCode::BadVersion => 1,
            ErrorCode::BadDim => 2,
            ErrorCode::Malformed => 3,
            ErrorCode::Unexpected => 4,
            ErrorCode::BadTimestamp => 5,
            ErrorCode::BadValue => 6,
            ErrorCode::Internal => 7,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            1 => ErrorCode::BadVersion,
            2 => ErrorCode::BadDim,
            3 => ErrorCode::Malformed,
            4 => ErrorCode::Unexpected,
            5 => ErrorCode::BadTimestamp,
            6 => ErrorCode::BadValue,
            7 => ErrorCode::Internal,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorCode::BadVersion => "BAD_VERSION",
            ErrorCode::BadDim => "BAD_DIM",
            ErrorCode::Malformed => "MALFORMED",
            ErrorCode::Unexpected => "UNEXPECTED",
            ErrorCode::BadTimestamp => "BAD_TIMESTAMP",
            ErrorCode::BadValue => "BAD_VALUE",
            ErrorCode::Internal => "INTERNAL",
        }
    }
}

/// Cycle event codes carried by CYCLE messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleCode {
    Advance = 0,
    Hold = 1,
    OutOfOrder = 2,
    CycleComplete = 3,
}

impl CycleCode {
    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => CycleCode::Advance,
            1 => CycleCode::Hold,
            2 => CycleCode::OutOfOrder,
            3 => CycleCode::CycleComplete,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Hello {
        version: u16,
        dim: u16,
    },
    HelloAck {
        classes: Vec<String>,
    },
    Frame {
        timestamp_ms: u64,
        values: Vec<f32>,
    },
    Prediction {
        timestamp_ms: u64,
        class_index: u8,
        probabilities: [f32; NUM_CLASSES],
        stable: bool,
    },
    Cycle {
        event: CycleCode,
        step_index: u8,
        expected_class: u8,
        observed_class: u8,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
}

/// A protocol violation, reported to the peer as an ERROR message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireError {
    pub code: ErrorCode,
    pub message: String,
}

impl WireError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        WireError {
            code,
            message: message.into(),
        }
    }

    fn malformed(message: impl Into<String>) -> Self {
        WireError::new(ErrorCode::Malformed, message)
    }
}

impl fmt::Display for WireError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code.name(), self.message)
    }
}

impl std::error::Error for WireError {}

impl From<WireError> for Error {
    fn from(e: WireError) -> Self {
        Error::Protocol(e.to_string())
    }
}

/// Cuts a string to at most 255 bytes on a character boundary.
fn short_str(s: &str) -> &str {
    let mut end = s.len().min(u8::MAX as usize);
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    &s[..end]
}

impl Message {
    pub fn type_byte(&self) -> u8 {
        match self {
            Message::Hello { .. } => MSG_HELLO,
            Message::HelloAck { .. } => MSG_HELLO_ACK,
            Message::Frame { .. } => MSG_FRAME,
            Message::Prediction { .. } => MSG_PREDICTION,
            Message::Cycle { .. } => MSG_CYCLE,
            Message::Error { .. } => MSG_ERROR,
        }
    }

    /// Payload bytes, without the header. Names and messages longer than 255
    /// bytes are truncated; a FRAME may carry at most 65535 values.
    pub fn encode_payload(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Message::Hello { version, dim } => {
                out.extend_from_slice(&version.to_le_bytes());
                out.extend_from_slice(&dim.to_le_bytes());
            }
            Message::HelloAck { classes } => {
                out.push(classes.len().min(u8::MAX as usize) as u8);
                for name in classes.iter().take(u8::MAX as usize) {
                    let name = short_str(name);
                    out.push(name.len() as u8);
                    out.extend_from_slice(name.as_bytes());
                }
            }
            Message::Frame {
                timestamp_ms,
                values,
            } => {
                assert!(values.len() <= u16::MAX as usize, "frame too wide");
                out.reserve(10 + values.len() * 4);
                out.extend_from_slice(&timestamp_ms.to_le_bytes());
                out.extend_from_slice(&(values.len() as u16).to_le_bytes());
                for v in values {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            Message::Prediction {
                timestamp_ms,
                class_index,
                probabilities,
                stable,
            } => {
                out.extend_from_slice(&timestamp_ms.to_le_bytes());
                out.push(*class_index);
                for p in probabilities {
                    out.extend_from_slice(&p.to_le_bytes());
                }
                out.push(if *stable { FLAG_STABLE } else { 0 });
            }
            Message::Cycle {
                event,
                step_index,
                expected_class,
                observed_class,
            } => {
                out.extend_from_slice(&[*event as u8, *step_index, *expected_class, *observed_class]);
            }
            Message::Error { code, message } => {
                let message = short_str(message);
                out.push(code.code());
                out.push(message.len() as u8);
                out.extend_from_slice(message.as_bytes());
            }
        }
        out
    }

    /// Full wire bytes: header and payload.
    pub fn encode(&self) -> Vec<u8> {
        let payload = self.encode_payload();
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.push(self.type_byte());
        out.extend_from_slice(&payload);
        out
    }

    pub fn decode(message_type: u8, payload: &[u8]) -> Result<Message, WireError> {
        let mut r = Cursor { bytes: payload, pos: 0 };
        let msg = match message_type {
            MSG_HELLO => Message::Hello {
                version: r.u16()?,
                dim: r.u16()?,
            },
            MSG_HELLO_ACK => {
                let n = r.u8()? as usize;
                let mut classes = Vec::with_capacity(n);
                for _ in 0..n {
                    classes.push(r.string()?);
                }
                Message::HelloAck { classes }
            }
            MSG_FRAME => {
                let timestamp_ms = r.u64()?;
                let dim = r.u16()? as usize;
                let body = r.take(dim * 4)?;
                let values = body
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                    .collect();
                Message::Frame {
                    timestamp_ms,
                    values,
                }
            }
            MSG_PREDICTION => {
                let timestamp_ms = r.u64()?;
                let class_index = r.u8()?;
                let mut probabilities = [0.0f32; NUM_CLASSES];
                for p in &mut probabilities {
                    *p = f32::from_le_bytes(r.take(4)?.try_into().unwrap());
                }
                let flags = r.u8()?;
                if flags & !FLAG_STABLE != 0 {
                    return Err(WireError::malformed(format!("unknown prediction flags {flags:#04x}")));
                }
                Message::Prediction {
                    timestamp_ms,
                    class_index,
                    probabilities,
                    stable: flags & FLAG_STABLE != 0,
                }
            }
            MSG_CYCLE => {
                let code = r.u8()?;
                Message::Cycle {
                    event: CycleCode::from_code(code)
                        .ok_or_else(|| WireError::malformed(format!("unknown cycle event {code}")))?,
                    step_index: r.u8()?,
                    expected_class: r.u8()?,
                    observed_class: r.u8()?,
                }
            }
            MSG_ERROR => {
                let code = r.u8()?;
                Message::Error {
                    code: ErrorCode::from_code(code)
                        .ok_or_else(|| WireError::malformed(format!("unknown error code {code}")))?,
                    message: r.string()?,
                }
            }
            other => {
                return Err(WireError::new(
                    ErrorCode::Unexpected,
                    format!("unknown message type {other:#04x}"),
                ))
            }
        };
        if r.pos != payload.len() {
            return Err(WireError::malformed(format!(
                "{} trailing payload bytes",
                payload.len() - r.pos
            )));
        }
        Ok(msg)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.bytes.len() - self.pos < n {
            return Err(WireError::malformed("payload shorter than its fields"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, WireError> {
        let n = self.u8()? as usize;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| WireError::malformed("string is not UTF-8"))
    }
}

/// Failure while reading a message from a stream.
#[derive(Debug)]
pub enum ReadError {
    Io(io::Error),
    Wire(WireError),
}

impl From<io::Error> for ReadError {
    fn from(e: io::Error) -> Self {
        ReadError::Io(e)
    }
}

impl From<WireError> for ReadError {
    fn from(e: WireError) -> Self {
        ReadError::Wire(e)
    }
}

/// Reads one message. Returns `Ok(None)` on end of stream at a message
/// boundary; a stream that ends inside a message is malformed.
pub fn read_message<R: Read>(reader: &mut R) -> Result<Option<Message>, ReadError> {
    let mut header = [0u8; HEADER_LEN];
    let mut filled = 0;
    while filled < HEADER_LEN {
        match reader.read(&mut header[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => return Err(WireError::malformed("stream ended inside a header").into()),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_le_bytes(header[..4].try_into().unwrap()) as usize;
    if len > MAX_PAYLOAD {
        return Err(WireError::malformed(format!("payload of {len} bytes exceeds limit")).into());
    }
    let mut payload = vec![0u8; len];
    reader.read_exact(&mut payload).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => ReadError::Wire(WireError::malformed("stream ended inside a payload")),
        _ => ReadError::Io(e),
    })?;
    Ok(Some(Message::decode(header[4], &payload)?))
}

pub fn write_message<W: Write>(writer: &mut W, message: &Message) -> io::Result<()> {
    writer.write_all(&message.encode())
}
