//! Symbol streams: the built-in fig1a/fig1b corpora and the plain-text corpus format.

use std::path::Path;

use serde::{Deserialize, Serialize};

pub const STRING_A: &str = "75648361";
pub const STRING_B: &str = "75698136";
pub const STRING_C: &str = "75628136";
/// Irrelevant symbols between strings.
pub const JUNK_LEN: usize = 30;
const JUNK_BASE: u32 = 0x100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fig1 {
    /// ABC ABC ABC
    A,
    /// AAA BBB CCC
    B,
}

/// `n` junk symbols, distinct from digits and from every other gap.
pub fn junk(n: usize, offset: usize) -> Vec<char> {
    (0..n)
        .map(|i| char::from_u32(JUNK_BASE + (offset + i) as u32).expect("valid code point"))
        .collect()
}

/// Build one of the two built-in digit streams.
pub fn corpus_fig1(variant: Fig1) -> Vec<char> {
    let strings: Vec<String> = match variant {
        Fig1::A => vec![format!("{STRING_A}{STRING_B}{STRING_C}"); 3],
        Fig1::B => vec![STRING_A.repeat(3), STRING_B.repeat(3), STRING_C.repeat(3)],
    };
    let mut out = Vec::new();
    for (i, s) in strings.iter().enumerate() {
        out.extend(s.chars());
        if i + 1 < strings.len() {
            out.extend(junk(JUNK_LEN, i * JUNK_LEN));
        }
    }
    out
}

/// Parse corpus text: one symbol per character, blank lines split streams, `#` lines are comments.
pub fn parse_corpus(text: &str) -> Vec<Vec<char>> {
    let mut streams = Vec::new();
    let mut cur: Vec<char> = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if !cur.is_empty() {
                streams.push(std::mem::take(&mut cur));
            }
            continue;
        }
        cur.extend(line.chars().filter(|c| *c != '\r'));
    }
    if !cur.is_empty() {
        streams.push(cur);
    }
    streams
}

/// Resolve `fig1a`, `fig1b`, or a corpus file path.
pub fn load_corpus(source: &str) -> std::io::Result<Vec<Vec<char>>> {
    match source {
        "fig1a" => Ok(vec![corpus_fig1(Fig1::A)]),
        "fig1b" => Ok(vec![corpus_fig1(Fig1::B)]),
        path => Ok(parse_corpus(&std::fs::read_to_string(Path::new(path))?)),
    }
}
