//! Plain-text chip dumps: ASCII `0`/`1`, [`DUMP_LINE_WIDTH`] characters per
//! line, every line newline-terminated, last line possibly short.

use super::{ChipError, ChipId};
use crate::bits::BitString;

pub const DUMP_LINE_WIDTH: usize = 64;

pub fn emit_chip_dump(id: &ChipId) -> String {
    let len = id.bits.len();
    let mut out = String::with_capacity(len + len.div_ceil(DUMP_LINE_WIDTH));
    for (i, bit) in id.bits.iter().enumerate() {
        out.push(if bit { '1' } else { '0' });
        if (i + 1) % DUMP_LINE_WIDTH == 0 || i + 1 == len {
            out.push('\n');
        }
    }
    out
}

/// Parses a dump. Line width is not enforced, so dumps wrapped at other
/// widths are accepted too.
pub fn parse_chip_dump(text: &str) -> Result<ChipId, ChipError> {
    let mut bits = BitString::default();
    for (line_no, line) in text.split('\n').enumerate() {
        for (col, ch) in line.chars().enumerate() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                found => {
                    return Err(ChipError::DumpSyntax {
                        line: line_no + 1,
                        column: col + 1,
                        found,
                    })
                }
            }
        }
    }
    if bits.is_empty() {
        return Err(ChipError::EmptyDump);
    }
    Ok(ChipId::new(bits))
}
