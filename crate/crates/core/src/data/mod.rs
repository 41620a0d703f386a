//! Frames, windows, labels, sequence files and datasets.

mod dataset;
mod format;
mod frame;
mod label;
mod sequence;
mod synthetic;

pub use dataset::{
    load_dataset, split, stratified_test_count, write_dataset, LabeledDataset, Manifest, Sample,
    MANIFEST_FILE,
};
pub use format::{
    decode_sequence, encode_sequence, read_recording, read_sequence, write_recording,
    write_sequence, SequenceRecord, SEQUENCE_EXTENSION, SEQUENCE_HEADER_LEN, SEQUENCE_MAGIC,
    SEQUENCE_VERSION,
};
pub use frame::{
    assemble_frame, HolisticDetection, KeypointFrame, Point3, PoseLandmark, SequenceWindow,
    FACE_LANDMARKS, FACE_OFFSET, FRAME_DIM, HAND_LANDMARKS, LEFT_HAND_OFFSET, POSE_LANDMARKS,
    POSE_OFFSET, RIGHT_HAND_OFFSET, WINDOW_LEN,
};
pub use label::{one_hot, ClassLabel, CLASS_NAMES, NUM_CLASSES};
pub use sequence::Sequence;
pub use synthetic::{class_template, gen_synthetic, SYNTHETIC_FPS};
