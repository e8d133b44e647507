//! First-person hand action skeleton text files.
//!
//! One frame per line: a frame index followed by 21 joints × xyz.

use std::io::BufRead;

use super::{ParseError, SkeletonSequence};

pub const FPHA_JOINTS: usize = 21;
const VALUES_PER_LINE: usize = 1 + FPHA_JOINTS * 3;

pub fn parse_fpha<R: BufRead>(reader: R) -> Result<SkeletonSequence<f64>, ParseError> {
    let mut coords = Vec::new();
    let mut frames = 0usize;
    let mut last_index: Option<u64> = None;

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| ParseError::io(lineno, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != VALUES_PER_LINE {
            return Err(ParseError::line(lineno, format!("expected {VALUES_PER_LINE} values, found {}", tokens.len())));
        }
        let index = parse_frame_index(tokens[0])
            .ok_or_else(|| ParseError::line(lineno, format!("bad frame index {:?}", tokens[0])))?;
        if let Some(prev) = last_index {
            if index <= prev {
                return Err(ParseError::line(
                    lineno,
                    format!("frame index {index} does not increase (previous {prev})"),
                ));
            }
        }
        last_index = Some(index);

        for joint in tokens[1..].chunks_exact(3) {
            let mut p = [0.0; 3];
            for (slot, tok) in p.iter_mut().zip(joint) {
                *slot = parse_real(tok).ok_or_else(|| ParseError::line(lineno, format!("bad coordinate {tok:?}")))?;
            }
            coords.push(p);
        }
        frames += 1;
    }

    if frames == 0 {
        return Err(ParseError::Empty);
    }
    SkeletonSequence::new(frames, 1, FPHA_JOINTS, coords).map_err(|e| ParseError::Invalid(e.to_string()))
}

/// Writes one line per frame with a 0-based index. Values use the
/// shortest representation that parses back exactly.
pub fn format_fpha(seq: &SkeletonSequence<f64>) -> Result<String, ParseError> {
    if seq.joints() != FPHA_JOINTS || seq.bodies() != 1 {
        return Err(ParseError::Invalid(format!(
            "FPHA needs 1 body of {FPHA_JOINTS} joints, sequence has {} of {}",
            seq.bodies(),
            seq.joints()
        )));
    }
    let mut out = String::new();
    for t in 0..seq.frames() {
        out.push_str(&t.to_string());
        for p in seq.frame_body(t, 0) {
            for x in p {
                out.push(' ');
                out.push_str(&x.to_string());
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Frame indices are integers, sometimes written with a trailing `.0`.
fn parse_frame_index(tok: &str) -> Option<u64> {
    if let Ok(i) = tok.parse::<u64>() {
        return Some(i);
    }
    let x = tok.parse::<f64>().ok()?;
    (x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64).then_some(x as u64)
}

pub(crate) fn parse_real(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok().filter(|x| x.is_finite())
}
