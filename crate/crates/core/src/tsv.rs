//! Cell escaping shared by every TSV format in the crate.

use std::io::{self, BufRead, Write};

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape`]. Unknown escapes are kept verbatim.
pub fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

pub fn write_row<W, I, S>(out: &mut W, cells: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut first = true;
    for cell in cells {
        if !first {
            out.write_all(b"\t")?;
        }
        first = false;
        out.write_all(escape(cell.as_ref()).as_bytes())?;
    }
    out.write_all(b"\n")
}

/// Splits input on `\n` without requiring valid UTF-8, so callers can report
/// encoding errors with a line number.
pub fn raw_lines<R: BufRead>(input: R) -> impl Iterator<Item = io::Result<Vec<u8>>> {
    input.split(b'\n')
}
