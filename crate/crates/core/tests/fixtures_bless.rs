//! Regenerates the replay fixture and its golden digest.
//!
//! Run with `SURYA_BLESS=1 cargo test -p surya-core --test fixtures_bless`.
//! Without the variable it only checks that the committed fixture still
//! matches its generator.

mod common;

use common::replay::*;
use surya_core::data::{write_recording, ClassLabel};

#[test]
fn fixture_matches_generator() {
    let fresh = build_fixture();
    if std::env::var_os("SURYA_BLESS").is_some() {
        write_recording(fixture_path(), &fresh, ClassLabel::new(0).unwrap(), FIXTURE_FPS).unwrap();
        let replies = decode_all(&replay_bytes(&replay_model(), &fresh));
        std::fs::write(golden_path(), digest(&replies)).unwrap();
    }
    assert_eq!(load_fixture(), fresh);
}
