//! Binary sequence files.
//!
//! Little-endian layout:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SNK1"
//! 4       2     u16 version (1)
//! 6       1     u8 label index
//! 7       4     f32 fps
//! 11      4     u32 frame_count
//! 15      2     u16 dim
//! 17      ...   frame_count * dim f32 values, frame-major
//! ```

use std::fs;
use std::path::Path;

use super::frame::{FRAME_DIM, WINDOW_LEN};
use super::label::ClassLabel;
use super::sequence::Sequence;
use crate::error::{Error, Result};

pub const SEQUENCE_MAGIC: [u8; 4] = *b"SNK1";
pub const SEQUENCE_VERSION: u16 = 1;
pub const SEQUENCE_HEADER_LEN: usize = 17;
pub const SEQUENCE_EXTENSION: &str = "snk";

/// Decoded contents of a sequence file.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRecord {
    pub sequence: Sequence,
    pub label: ClassLabel,
    pub fps: f32,
}

pub fn encode_sequence(sequence: &Sequence, label: ClassLabel, fps: f32) -> Result<Vec<u8>> {
    if !fps.is_finite() || fps < 0.0 {
        return Err(Error::InvalidValue(format!("fps {fps}")));
    }
    let dim = u16::try_from(sequence.dim())
        .map_err(|_| Error::Shape(format!("dim {} does not fit u16", sequence.dim())))?;
    let frames = u32::try_from(sequence.steps())
        .map_err(|_| Error::Shape(format!("{} frames do not fit u32", sequence.steps())))?;

    let mut out = Vec::with_capacity(SEQUENCE_HEADER_LEN + sequence.values().len() * 4);
    out.extend_from_slice(&SEQUENCE_MAGIC);
    out.extend_from_slice(&SEQUENCE_VERSION.to_le_bytes());
    out.push(label.into());
    out.extend_from_slice(&fps.to_le_bytes());
    out.extend_from_slice(&frames.to_le_bytes());
    out.extend_from_slice(&dim.to_le_bytes());
    for v in sequence.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_sequence(bytes: &[u8]) -> Result<SequenceRecord> {
    if bytes.len() < 6 || bytes[..4] != SEQUENCE_MAGIC {
        return Err(Error::Format("not a sequence file (bad magic)".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != SEQUENCE_VERSION {
        return Err(Error::Format(format!(
            "unsupported sequence file version {version}"
        )));
    }
    if bytes.len() < SEQUENCE_HEADER_LEN {
        return Err(Error::Corrupt(format!(
            "header truncated at {} bytes",
            bytes.len()
        )));
    }
    let label = ClassLabel::new(bytes[6] as usize)?;
    let fps = f32::from_le_bytes(bytes[7..11].try_into().unwrap());
    let frames = u32::from_le_bytes(bytes[11..15].try_into().unwrap()) as usize;
    let dim = u16::from_le_bytes(bytes[15..17].try_into().unwrap()) as usize;

    let payload = &bytes[SEQUENCE_HEADER_LEN..];
    let expected = frames
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Corrupt("declared size overflows".into()))?;
    if payload.len() != expected {
        return Err(Error::Corrupt(format!(
            "header declares {frames}x{dim} values ({expected} bytes), payload has {} bytes",
            payload.len()
        )));
    }
    if !fps.is_finite() || fps < 0.0 {
        return Err(Error::InvalidValue(format!("fps {fps}")));
    }
    let values: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let sequence = Sequence::new(frames, dim, values)?;
    Ok(SequenceRecord {
        sequence,
        label,
        fps,
    })
}

fn require_window(sequence: &Sequence) -> Result<()> {
    if sequence.is_window() {
        Ok(())
    } else {
        let (steps, dim) = sequence.shape();
        Err(Error::Shape(format!(
            "sequence is {steps}x{dim}, expected {WINDOW_LEN}x{FRAME_DIM}"
        )))
    }
}

/// Writes one training sequence of exactly `10 × 1662` values.
pub fn write_sequence(
    path: impl AsRef<Path>,
    sequence: &Sequence,
    label: ClassLabel,
    fps: f32,
) -> Result<()> {
    require_window(sequence)?;
    write_recording(path, sequence, label, fps)
}

/// Reads a training sequence; anything other than `10 × 1662` is rejected.
pub fn read_sequence(path: impl AsRef<Path>) -> Result<SequenceRecord> {
    let path = path.as_ref();
    let record = read_recording(path)?;
    require_window(&record.sequence).map_err(|e| Error::at(path, e))?;
    Ok(record)
}

/// Writes a sequence file with any number of frames (landmark recordings and
/// replay fixtures).
pub fn write_recording(
    path: impl AsRef<Path>,
    sequence: &Sequence,
    label: ClassLabel,
    fps: f32,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_sequence(sequence, label, fps).map_err(|e| Error::at(path, e))?;
    fs::write(path, bytes).map_err(|e| Error::at(path, e.into()))
}

pub fn read_recording(path: impl AsRef<Path>) -> Result<SequenceRecord> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::at(path, e.into()))?;
    decode_sequence(&bytes).map_err(|e| Error::at(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Sequence {
        Sequence::new(2, 3, vec![1.0, -2.5, 0.0, 3.25, 1e-30, -0.0]).unwrap()
    }

    #[test]
    fn golden_bytes() {
        let label = ClassLabel::new(6).unwrap();
        let bytes = encode_sequence(&small(), label, 60.0).unwrap();
        let mut expected = vec![b'S', b'N', b'K', b'1', 1, 0, 6];
        expected.extend_from_slice(&[0x00, 0x00, 0x70, 0x42]); // 60.0f32
        expected.extend_from_slice(&[2, 0, 0, 0, 3, 0]);
        expected.extend_from_slice(&[0x00, 0x00, 0x80, 0x3f]); // 1.0
        expected.extend_from_slice(&[0x00, 0x00, 0x20, 0xc0]); // -2.5
        assert_eq!(&bytes[..25], &expected[..]);
        assert_eq!(bytes.len(), SEQUENCE_HEADER_LEN + 6 * 4);
        // -0.0 keeps its sign bit.
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 0, 0, 0x80]);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let label = ClassLabel::new(2).unwrap();
        let bytes = encode_sequence(&small(), label, 29.97).unwrap();
        let record = decode_sequence(&bytes).unwrap();
        assert_eq!(record.label, label);
        assert_eq!(record.fps.to_bits(), 29.97f32.to_bits());
        let a: Vec<u32> = record.sequence.values().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u32> = small().values().iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn altered_magic_is_a_format_error() {
        let mut bytes = encode_sequence(&small(), ClassLabel::new(0).unwrap(), 60.0).unwrap();
        bytes[0] = b'X';
        assert!(matches!(decode_sequence(&bytes), Err(Error::Format(_))));
        bytes[0] = b'S';
        bytes[4] = 2;
        assert!(matches!(decode_sequence(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn truncation_is_corruption() {
        let bytes = encode_sequence(&small(), ClassLabel::new(0).unwrap(), 60.0).unwrap();
        for cut in [10, 20, bytes.len() - 1] {
            assert!(
                matches!(decode_sequence(&bytes[..cut]), Err(Error::Corrupt(_))),
                "cut at {cut}"
            );
        }
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode_sequence(&long), Err(Error::Corrupt(_))));
    }

    #[test]
    fn non_finite_payload_rejected() {
        let mut bytes = encode_sequence(&small(), ClassLabel::new(0).unwrap(), 60.0).unwrap();
        let at = SEQUENCE_HEADER_LEN + 4;
        bytes[at..at + 4].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            decode_sequence(&bytes),
            Err(Error::InvalidValue(_))
        ));
    }

    #[test]
    fn bad_label_byte_rejected() {
        let mut bytes = encode_sequence(&small(), ClassLabel::new(0).unwrap(), 60.0).unwrap();
        bytes[6] = 8;
        assert!(matches!(decode_sequence(&bytes), Err(Error::Label { .. })));
    }

    #[test]
    fn training_files_must_be_windows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.snk");
        let label = ClassLabel::new(1).unwrap();
        assert!(matches!(
            write_sequence(&path, &small(), label, 60.0),
            Err(Error::Shape(_))
        ));
        write_recording(&path, &small(), label, 60.0).unwrap();
        assert!(read_sequence(&path).is_err());
        assert_eq!(read_recording(&path).unwrap().sequence, small());

        let window = Sequence::window(vec![0.25; WINDOW_LEN * FRAME_DIM]).unwrap();
        write_sequence(&path, &window, label, 60.0).unwrap();
        assert_eq!(
            fs::metadata(&path).unwrap().len() as usize,
            SEQUENCE_HEADER_LEN + WINDOW_LEN * FRAME_DIM * 4
        );
        assert_eq!(read_sequence(&path).unwrap().sequence, window);
    }
}
