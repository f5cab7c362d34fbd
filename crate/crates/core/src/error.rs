use std::io;

use thiserror::Error;

use crate::construct::ExtremalType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid uniformity: k = {k}, n = {n} (need k >= 2 and n >= k)")]
    InvalidUniformity { k: usize, n: usize },

    #[error("bad edge {edge:?}: {reason}")]
    BadEdge { edge: Vec<u32>, reason: &'static str },

    #[error("bad arity: |S| = {d}, expected 1..={max}")]
    BadArity { d: usize, max: usize },

    #[error("vertex parts overlap")]
    OverlappingParts,

    #[error("{k} does not divide {n}")]
    NotDivisible { k: usize, n: usize },

    #[error("bad partition: {0}")]
    BadPartition(String),

    #[error("index r = {r} outside 0..={k}")]
    BadIndex { r: usize, k: usize },

    #[error("type ({alpha}) is not defined for k = {k}")]
    IncompatibleType { alpha: ExtremalType, k: usize },

    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),

    #[error("instance too small: {0}")]
    TooSmall(String),

    #[error("bad parts: {0}")]
    BadParts(String),

    #[error("bad set family: {0}")]
    BadFamily(String),

    #[error("cover-down stuck at vertex {vertex}: no available extension")]
    Stuck { vertex: u32 },

    #[error("no edge left inside the last vortex level to fix the matching parity")]
    ParityImpossible,

    #[error("no extremal partition found within the containment tolerance")]
    NoPartition,

    #[error("gave up after {attempts} attempts")]
    Exhausted { attempts: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}
