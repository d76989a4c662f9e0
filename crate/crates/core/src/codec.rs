//! Canonical byte encoding.
//!
//! Layout: one version byte, one kind byte, then a CBOR body. CBOR is
//! self-describing and length-prefixes every string, array and map, so a
//! dump can be inspected without knowing the schema.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::agent::State;
use crate::message::Message;

pub const VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Kind {
    State = 1,
    Message = 2,
    TaskInput = 3,
    StepOutput = 4,
    Directory = 5,
    Environment = 6,
}

impl Kind {
    fn from_byte(b: u8) -> Option<Kind> {
        [
            Kind::State,
            Kind::Message,
            Kind::TaskInput,
            Kind::StepOutput,
            Kind::Directory,
            Kind::Environment,
        ]
        .into_iter()
        .find(|k| *k as u8 == b)
    }
}

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("input too short for a header")]
    Truncated,
    #[error("unsupported encoding version {0}")]
    Version(u8),
    #[error("unknown kind byte {0}")]
    UnknownKind(u8),
    #[error("expected {expected:?}, found {found:?}")]
    WrongKind { expected: Kind, found: Kind },
    #[error("encode: {0}")]
    Encode(String),
    #[error("decode: {0}")]
    Decode(String),
}

pub fn encode<T: Serialize + ?Sized>(kind: Kind, value: &T) -> Result<Vec<u8>, CodecError> {
    let mut out = vec![VERSION, kind as u8];
    ciborium::into_writer(value, &mut out).map_err(|e| CodecError::Encode(e.to_string()))?;
    Ok(out)
}

/// Reads the header without decoding the body.
pub fn peek_kind(bytes: &[u8]) -> Result<Kind, CodecError> {
    let [version, kind, ..] = bytes else {
        return Err(CodecError::Truncated);
    };
    if *version != VERSION {
        return Err(CodecError::Version(*version));
    }
    Kind::from_byte(*kind).ok_or(CodecError::UnknownKind(*kind))
}

pub fn decode<T: DeserializeOwned>(kind: Kind, bytes: &[u8]) -> Result<T, CodecError> {
    let found = peek_kind(bytes)?;
    if found != kind {
        return Err(CodecError::WrongKind {
            expected: kind,
            found,
        });
    }
    ciborium::from_reader(&bytes[2..]).map_err(|e| CodecError::Decode(e.to_string()))
}

pub fn encode_state(state: &State) -> Result<Vec<u8>, CodecError> {
    encode(Kind::State, state)
}

pub fn decode_state(bytes: &[u8]) -> Result<State, CodecError> {
    decode(Kind::State, bytes)
}

pub fn encode_message(msg: &Message) -> Result<Vec<u8>, CodecError> {
    encode(Kind::Message, msg)
}

pub fn decode_message(bytes: &[u8]) -> Result<Message, CodecError> {
    decode(Kind::Message, bytes)
}
