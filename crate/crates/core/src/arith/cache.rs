//! On-disk sieve tables.
//!
//! Layout, all integers little-endian:
//!
//! | offset        | size        | field                              |
//! |---------------|-------------|------------------------------------|
//! | 0             | 8           | magic `CRSIEVE1` (the `1` is the format version) |
//! | 8             | 1           | function id: 1 = φ, 2 = σ          |
//! | 9             | 7           | reserved, must be zero             |
//! | 16            | 8           | `n_max`                            |
//! | 24            | 8 · n_max   | values f(1) ..= f(n_max) as u64    |
//! | 24 + 8·n_max  | 8           | checksum                           |
//!
//! The checksum is 64-bit FNV-1a over every byte that precedes it (header and
//! payload).

use std::io::{self, Read, Write};

use thiserror::Error;

use super::{try_zeroed, ArithError, ArithFn, SieveTable, MAX_SIEVE_N};

pub const MAGIC: &[u8; 8] = b"CRSIEVE1";
const MAGIC_STEM: &[u8; 7] = b"CRSIEVE";
const HEADER_LEN: usize = 24;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// A malformed cache file. `field` names the part of the layout that failed.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("{field}: {reason}")]
pub struct FormatError {
    pub field: &'static str,
    pub reason: String,
}

impl FormatError {
    fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Copy)]
struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(FNV_OFFSET)
    }

    fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }
}

/// 64-bit FNV-1a of `bytes`.
pub fn checksum(bytes: &[u8]) -> u64 {
    let mut h = Fnv1a::new();
    h.update(bytes);
    h.0
}

fn header(table: &SieveTable) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[..8].copy_from_slice(MAGIC);
    h[8] = table.func().id();
    h[16..24].copy_from_slice(&table.n_max().to_le_bytes());
    h
}

pub fn save_table<W: Write>(table: &SieveTable, mut dest: W) -> Result<(), ArithError> {
    let mut hash = Fnv1a::new();
    let head = header(table);
    hash.update(&head);
    dest.write_all(&head)?;

    let mut buf = Vec::with_capacity(8 * 4096);
    for block in table.values().chunks(4096) {
        buf.clear();
        for v in block {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        hash.update(&buf);
        dest.write_all(&buf)?;
    }
    dest.write_all(&hash.0.to_le_bytes())?;
    dest.flush()?;
    Ok(())
}

/// Reads exactly `buf.len()` bytes, mapping a short read to a format error.
fn read_field<R: Read>(src: &mut R, buf: &mut [u8], field: &'static str) -> Result<(), ArithError> {
    src.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => FormatError::new(field, "truncated").into(),
        _ => ArithError::Io(e),
    })
}

pub fn load_table<R: Read>(mut src: R) -> Result<SieveTable, ArithError> {
    let mut head = [0u8; HEADER_LEN];
    read_field(&mut src, &mut head[..8], "magic")?;
    if &head[..8] != MAGIC {
        if &head[..7] == MAGIC_STEM {
            return Err(FormatError::new(
                "magic",
                format!("unsupported format version '{}'", head[7].escape_ascii()),
            )
            .into());
        }
        return Err(FormatError::new("magic", "not a sieve cache file").into());
    }
    read_field(&mut src, &mut head[8..], "header")?;

    let func = ArithFn::from_id(head[8])
        .ok_or_else(|| FormatError::new("func_id", format!("unknown id {}", head[8])))?;
    if head[9..16].iter().any(|&b| b != 0) {
        return Err(FormatError::new("reserved", "reserved bytes must be zero").into());
    }
    let n_max = u64::from_le_bytes(head[16..24].try_into().unwrap());
    if n_max == 0 || n_max > MAX_SIEVE_N {
        return Err(FormatError::new("n_max", format!("{n_max} outside 1..={MAX_SIEVE_N}")).into());
    }

    let mut hash = Fnv1a::new();
    hash.update(&head);

    let mut values: Vec<u64> = try_zeroed(n_max as usize, n_max)?;
    let mut buf = vec![0u8; 8 * 4096];
    for block in values.chunks_mut(4096) {
        let bytes = &mut buf[..8 * block.len()];
        read_field(&mut src, bytes, "payload").map_err(|e| match e {
            ArithError::Format(f) if f.field == "payload" => FormatError::new(
                "payload",
                format!("declared n_max {n_max} exceeds the stored values"),
            )
            .into(),
            other => other,
        })?;
        hash.update(bytes);
        for (v, raw) in block.iter_mut().zip(bytes.chunks_exact(8)) {
            *v = u64::from_le_bytes(raw.try_into().unwrap());
        }
    }

    let mut stored = [0u8; 8];
    read_field(&mut src, &mut stored, "checksum")?;
    let stored = u64::from_le_bytes(stored);
    if stored != hash.0 {
        return Err(FormatError::new(
            "checksum",
            format!("stored {stored:#018x}, computed {:#018x}", hash.0),
        )
        .into());
    }
    let mut extra = [0u8; 1];
    if src.read(&mut extra)? != 0 {
        return Err(FormatError::new("checksum", "trailing bytes after checksum").into());
    }

    Ok(SieveTable::from_parts(func, values))
}
