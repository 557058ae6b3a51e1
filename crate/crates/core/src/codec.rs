//! The on-disk grammar format.
//!
//! ```text
//! "RPSS"              magic
//! u8                  version: 1 = every rule has two symbols,
//!                     2 = rules carry their length
//! varint n            length of the original text
//! varint σ            terminal count
//! σ bytes             byte value of each terminal
//! varint m            rule count
//! rules               rule i: [varint len (version 2)] then its symbols,
//!                     each stored as σ + i − 1 − id
//! varint len, ids     the final sequence
//! u64 LE              CRC-64/XZ of the original text
//! ```
//!
//! Varints are LEB128: seven bits per byte, least significant group first,
//! high bit set on every byte but the last.

use crc::{Crc, CRC_64_XZ};

use crate::engine::{run_repair_with, Outcome, RepairConfig};
use crate::error::{Error, Result};
use crate::model::{Grammar, Symbol};

pub const MAGIC: &[u8; 4] = b"RPSS";
pub const VERSION_PAIRS: u8 = 1;
pub const VERSION_REPEATS: u8 = 2;

const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

/// CRC-64/XZ of `data`.
pub fn checksum(data: &[u8]) -> u64 {
    CRC64.checksum(data)
}

/// A grammar plus what is needed to restore the original bytes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrammarFile {
    pub original_len: u64,
    /// Byte value of each terminal.
    pub alphabet: Vec<u8>,
    pub grammar: Grammar,
    pub checksum: u64,
}

/// Maps the bytes onto terminals `0..σ` in increasing byte order.
pub fn bytes_to_symbols(data: &[u8]) -> (Vec<Symbol>, Vec<u8>) {
    let mut seen = [false; 256];
    for &b in data {
        seen[b as usize] = true;
    }
    let alphabet: Vec<u8> = (0..=255u8).filter(|&b| seen[b as usize]).collect();
    let mut map = [0u32; 256];
    for (i, &b) in alphabet.iter().enumerate() {
        map[b as usize] = i as u32;
    }
    (data.iter().map(|&b| Symbol(map[b as usize])).collect(), alphabet)
}

/// Compresses bytes into a grammar file, returning the run statistics too.
pub fn compress(data: &[u8], config: &RepairConfig) -> Result<(GrammarFile, Outcome)> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (symbols, alphabet) = bytes_to_symbols(data);
    let outcome = run_repair_with(&symbols, config, None)?;
    let mut grammar = outcome.grammar.clone();
    grammar.terminal_count = alphabet.len() as u32;
    let file = GrammarFile {
        original_len: data.len() as u64,
        alphabet,
        grammar,
        checksum: checksum(data),
    };
    Ok((file, outcome))
}

/// Expands a grammar iteratively, so deep rule chains cannot overflow the
/// call stack.
pub fn decompress(grammar: &Grammar) -> Result<Vec<Symbol>> {
    grammar.expand()
}

/// Restores the original bytes and checks length and checksum.
pub fn decompress_file(file: &GrammarFile) -> Result<Vec<u8>> {
    if file.alphabet.len() != file.grammar.terminal_count as usize {
        return Err(Error::CorruptGrammar(format!(
            "alphabet has {} entries for {} terminals",
            file.alphabet.len(),
            file.grammar.terminal_count
        )));
    }
    let symbols = decompress(&file.grammar)?;
    let bytes: Vec<u8> = symbols.iter().map(|s| file.alphabet[s.index()]).collect();
    if bytes.len() as u64 != file.original_len {
        return Err(Error::CorruptGrammar(format!(
            "expanded to {} bytes, expected {}",
            bytes.len(),
            file.original_len
        )));
    }
    if checksum(&bytes) != file.checksum {
        return Err(Error::CorruptGrammar("checksum mismatch".into()));
    }
    Ok(bytes)
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8 & 0x7f) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

/// Serializes a grammar file.
pub fn encode(file: &GrammarFile) -> Vec<u8> {
    let g = &file.grammar;
    let sigma = g.terminal_count;
    let pairs_only = g.rules.iter().all(|r| r.len() == 2);
    let mut out = Vec::with_capacity(16 + 2 * g.size());
    out.extend_from_slice(MAGIC);
    out.push(if pairs_only { VERSION_PAIRS } else { VERSION_REPEATS });
    put_varint(&mut out, file.original_len);
    put_varint(&mut out, u64::from(sigma));
    out.extend_from_slice(&file.alphabet);
    put_varint(&mut out, g.rules.len() as u64);
    for (i, rhs) in g.rules.iter().enumerate() {
        if !pairs_only {
            put_varint(&mut out, rhs.len() as u64);
        }
        let newest = u64::from(sigma) + i as u64 - 1;
        for s in rhs {
            put_varint(&mut out, newest - u64::from(s.0));
        }
    }
    put_varint(&mut out, g.sequence.len() as u64);
    for s in &g.sequence {
        put_varint(&mut out, u64::from(s.0));
    }
    out.extend_from_slice(&file.checksum.to_le_bytes());
    out
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn fail<T>(&self, offset: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Format {
            offset,
            message: message.into(),
        })
    }

    fn bytes(&mut self, len: usize, what: &str) -> Result<&[u8]> {
        if self.data.len() - self.pos < len {
            return self.fail(self.data.len(), format!("truncated {what}"));
        }
        let s = &self.data[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn varint(&mut self, what: &str) -> Result<u64> {
        let start = self.pos;
        let mut v = 0u64;
        let mut shift = 0;
        loop {
            let Some(&byte) = self.data.get(self.pos) else {
                return self.fail(self.data.len(), format!("truncated {what}"));
            };
            self.pos += 1;
            if shift == 63 && byte > 1 || shift > 63 {
                return self.fail(start, format!("{what} does not fit 64 bits"));
            }
            v |= u64::from(byte & 0x7f) << shift;
            if byte & 0x80 == 0 {
                return Ok(v);
            }
            shift += 7;
        }
    }

    /// A varint used as a count of items each taking at least one byte.
    fn count(&mut self, what: &str) -> Result<usize> {
        let at = self.pos;
        let v = self.varint(what)?;
        if v > (self.data.len() - self.pos) as u64 {
            return self.fail(at, format!("{what} {v} exceeds the remaining input"));
        }
        Ok(v as usize)
    }
}

/// Parses a grammar file.
pub fn decode(data: &[u8]) -> Result<GrammarFile> {
    let mut r = Reader { data, pos: 0 };
    if data.len() < 4 || &data[..4] != MAGIC {
        return r.fail(0, "bad magic");
    }
    r.pos = 4;
    let version = r.bytes(1, "version")?[0];
    if version != VERSION_PAIRS && version != VERSION_REPEATS {
        return r.fail(4, format!("unsupported version {version}"));
    }
    let original_len = r.varint("text length")?;
    let at = r.pos;
    let sigma = r.varint("terminal count")?;
    if sigma > 256 || (sigma == 0 && original_len > 0) {
        return r.fail(at, format!("terminal count {sigma} out of range"));
    }
    let alphabet = r.bytes(sigma as usize, "alphabet")?.to_vec();
    let mut grammar = Grammar::new(sigma as u32);
    let m = r.count("rule count")?;
    for i in 0..m {
        let len = if version == VERSION_PAIRS {
            2
        } else {
            let at = r.pos;
            let len = r.count("rule length")?;
            if len < 2 {
                return r.fail(at, format!("rule {i} has length {len}"));
            }
            len
        };
        let newest = sigma + i as u64 - 1;
        let mut rhs = Vec::with_capacity(len);
        for _ in 0..len {
            let at = r.pos;
            let delta = r.varint("rule symbol")?;
            if delta > newest {
                return r.fail(at, format!("rule {i} refers to an undefined symbol"));
            }
            rhs.push(Symbol((newest - delta) as u32));
        }
        grammar.rules.push(rhs);
    }
    let len = r.count("sequence length")?;
    let tau = grammar.tau() as u64;
    for _ in 0..len {
        let at = r.pos;
        let id = r.varint("sequence symbol")?;
        if id >= tau {
            return r.fail(at, format!("sequence refers to undefined symbol {id}"));
        }
        grammar.sequence.push(Symbol(id as u32));
    }
    let checksum = u64::from_le_bytes(r.bytes(8, "checksum")?.try_into().unwrap());
    if r.pos != data.len() {
        return r.fail(r.pos, "trailing bytes");
    }
    Ok(GrammarFile {
        original_len,
        alphabet,
        grammar,
        checksum,
    })
}
