//! NTU RGB+D `.skeleton` files.
//!
//! Layout: frame count; then per frame a body count, and per body an info
//! line, a joint count (25) and one line per joint with 12 values
//! (x y z, depth xy, color xy, orientation wxyz, tracking state). Only the
//! camera-space xyz is kept.

use std::io::BufRead;

use super::{ParseError, SkeletonSequence};

pub const NTU_JOINTS: usize = 25;
const VALUES_PER_JOINT: usize = 12;

struct Lines<R> {
    inner: std::io::Lines<R>,
    lineno: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next nonempty line, or `None` at end of input.
    fn next_line(&mut self) -> Result<Option<String>, ParseError> {
        for line in self.inner.by_ref() {
            self.lineno += 1;
            let line = line.map_err(|e| ParseError::io(self.lineno, e))?;
            if !line.trim().is_empty() {
                return Ok(Some(line));
            }
        }
        Ok(None)
    }

    fn expect_line(&mut self, frame: usize, what: &str) -> Result<String, ParseError> {
        self.next_line()?.ok_or_else(|| ParseError::frame(frame, format!("unexpected end of file, expected {what}")))
    }

    fn expect_count(&mut self, frame: usize, what: &str) -> Result<usize, ParseError> {
        let line = self.expect_line(frame, what)?;
        let mut tokens = line.split_whitespace();
        let count = tokens
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| ParseError::frame(frame, format!("line {}: bad {what} {line:?}", self.lineno)))?;
        if tokens.next().is_some() {
            return Err(ParseError::frame(frame, format!("line {}: {what} line has extra values", self.lineno)));
        }
        Ok(count)
    }
}

pub fn parse_ntu<R: BufRead>(reader: R) -> Result<SkeletonSequence<f64>, ParseError> {
    let mut lines = Lines { inner: reader.lines(), lineno: 0 };

    let frame_count = match lines.next_line()? {
        None => return Err(ParseError::Empty),
        Some(l) => l
            .trim()
            .parse::<usize>()
            .map_err(|_| ParseError::line(lines.lineno, format!("bad frame count {:?}", l.trim())))?,
    };
    if frame_count == 0 {
        return Err(ParseError::line(lines.lineno, "frame count is zero".into()));
    }

    // Per frame, per body, 25 joints.
    let mut frames: Vec<Vec<Vec<[f64; 3]>>> = Vec::with_capacity(frame_count.min(4096));
    for frame in 0..frame_count {
        let body_count = lines.expect_count(frame, "body count")?;
        let mut bodies = Vec::with_capacity(body_count.min(16));
        for _ in 0..body_count {
            let info = lines.expect_line(frame, "body info")?;
            if info.split_whitespace().next().is_none() {
                return Err(ParseError::frame(frame, "empty body info line".into()));
            }
            let joint_count = lines.expect_count(frame, "joint count")?;
            if joint_count != NTU_JOINTS {
                return Err(ParseError::frame(
                    frame,
                    format!("line {}: expected {NTU_JOINTS} joints, found {joint_count}", lines.lineno),
                ));
            }
            let mut joints = Vec::with_capacity(NTU_JOINTS);
            for _ in 0..NTU_JOINTS {
                let line = lines.expect_line(frame, "joint line")?;
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if tokens.len() != VALUES_PER_JOINT {
                    return Err(ParseError::frame(
                        frame,
                        format!(
                            "line {}: expected {VALUES_PER_JOINT} joint values, found {}",
                            lines.lineno,
                            tokens.len()
                        ),
                    ));
                }
                let mut p = [0.0; 3];
                for (k, tok) in tokens.iter().enumerate() {
                    // Trailing fields are validated as numbers but discarded.
                    let x = tok
                        .parse::<f64>()
                        .map_err(|_| ParseError::frame(frame, format!("line {}: bad value {tok:?}", lines.lineno)))?;
                    if k < 3 {
                        if !x.is_finite() {
                            return Err(ParseError::frame(
                                frame,
                                format!("line {}: non-finite coordinate {x}", lines.lineno),
                            ));
                        }
                        p[k] = x;
                    }
                }
                joints.push(p);
            }
            bodies.push(joints);
        }
        frames.push(bodies);
    }

    if let Some(extra) = lines.next_line()? {
        return Err(ParseError::line(
            lines.lineno,
            format!("content after the declared {frame_count} frames: {:?}", extra.trim()),
        ));
    }

    let max_bodies = frames.iter().map(Vec::len).max().unwrap_or(0);
    if max_bodies == 0 {
        return Err(ParseError::Invalid("no frame contains a body".into()));
    }
    let mut coords = Vec::with_capacity(frame_count * max_bodies * NTU_JOINTS);
    for bodies in &frames {
        for m in 0..max_bodies {
            match bodies.get(m) {
                Some(joints) => coords.extend_from_slice(joints),
                None => coords.extend(std::iter::repeat_n([0.0; 3], NTU_JOINTS)),
            }
        }
    }
    SkeletonSequence::new(frame_count, max_bodies, NTU_JOINTS, coords).map_err(|e| ParseError::Invalid(e.to_string()))
}

/// Writes every body of every frame, skipping all-zero padding bodies.
/// Fields other than xyz are filled with plausible constants.
pub fn format_ntu(seq: &SkeletonSequence<f64>) -> Result<String, ParseError> {
    if seq.joints() != NTU_JOINTS {
        return Err(ParseError::Invalid(format!("NTU needs {NTU_JOINTS} joints, sequence has {}", seq.joints())));
    }
    let mut out = format!("{}\n", seq.frames());
    for t in 0..seq.frames() {
        let bodies: Vec<usize> =
            (0..seq.bodies()).filter(|&m| seq.frame_body(t, m).iter().any(|p| *p != [0.0; 3])).collect();
        out.push_str(&format!("{}\n", bodies.len()));
        for m in bodies {
            out.push_str(&format!("{} 0 1 1 1 1 0 0.1 -0.2 2\n{NTU_JOINTS}\n", 72057594037931101u64 + m as u64));
            for p in seq.frame_body(t, m) {
                out.push_str(&format!("{} {} {} 250.5 200.25 1000.5 500.75 0.1 0.2 0.3 0.9 2\n", p[0], p[1], p[2]));
            }
        }
    }
    Ok(out)
}

/// Ids encoded in an NTU file name such as `S001C002P003R002A013.skeleton`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NtuFileIds {
    pub setup: u32,
    pub camera: u32,
    pub performer: u32,
    pub replication: u32,
    /// 1-based action class as written in the name.
    pub action: u32,
}

pub fn parse_ntu_file_name(name: &str) -> Option<NtuFileIds> {
    let stem = name.rsplit('/').next()?.split('.').next()?;
    let mut fields = [0u32; 5];
    let mut rest = stem;
    for (slot, tag) in fields.iter_mut().zip(['S', 'C', 'P', 'R', 'A']) {
        rest = rest.strip_prefix(tag)?;
        let digits = rest.len() - rest.trim_start_matches(|c: char| c.is_ascii_digit()).len();
        if digits == 0 {
            return None;
        }
        *slot = rest[..digits].parse().ok()?;
        rest = &rest[digits..];
    }
    rest.is_empty().then_some(NtuFileIds {
        setup: fields[0],
        camera: fields[1],
        performer: fields[2],
        replication: fields[3],
        action: fields[4],
    })
}

/// Fills label, subject and setup from an NTU file name (label is 0-based).
pub fn annotate_from_file_name(seq: &mut SkeletonSequence<f64>, name: &str) -> bool {
    match parse_ntu_file_name(name) {
        Some(ids) if ids.action >= 1 => {
            seq.label = Some(ids.action as usize - 1);
            seq.subject_id = Some(ids.performer);
            seq.setup_id = Some(ids.setup);
            true
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(id: u32, value: f64) -> String {
        let mut s = format!("{id} 0 1 1 1 1 0 0.1 0.2 2\n25\n");
        for _ in 0..NTU_JOINTS {
            s.push_str(&format!("{value} {value} {value} 1 2 3 4 1 0 0 0 2\n"));
        }
        s
    }

    #[test]
    fn one_frame_one_body() {
        let text = format!("1\n1\n{}", body(7, 0.0));
        let seq = parse_ntu(text.as_bytes()).unwrap();
        assert_eq!((seq.frames(), seq.bodies(), seq.joints()), (1, 1, 25));
        assert!(seq.coords().iter().all(|p| *p == [0.0; 3]));
    }

    #[test]
    fn missing_bodies_are_zero_padded() {
        let text = format!("2\n1\n{}2\n{}{}", body(1, 1.0), body(1, 2.0), body(2, 3.0));
        let seq = parse_ntu(text.as_bytes()).unwrap();
        assert_eq!((seq.frames(), seq.bodies()), (2, 2));
        assert_eq!(seq.point(0, 0, 4), [1.0; 3]);
        assert!(seq.frame_body(0, 1).iter().all(|p| *p == [0.0; 3]));
        assert_eq!(seq.point(1, 1, 24), [3.0; 3]);
    }

    #[test]
    fn more_than_two_bodies_are_kept() {
        let text = format!("1\n3\n{}{}{}", body(1, 1.0), body(2, 2.0), body(3, 3.0));
        assert_eq!(parse_ntu(text.as_bytes()).unwrap().bodies(), 3);
    }

    #[test]
    fn truncated_file_names_frame() {
        let text = format!("2\n1\n{}", body(1, 0.0));
        match parse_ntu(text.as_bytes()) {
            Err(ParseError::Frame { frame, .. }) => assert_eq!(frame, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_joint_count() {
        let text = "1\n1\n1 0 0 0 0 0 0 0 0 2\n20\n";
        assert!(matches!(parse_ntu(text.as_bytes()), Err(ParseError::Frame { frame: 0, .. })));
    }

    #[test]
    fn file_name_ids() {
        let ids = parse_ntu_file_name("data/S001C002P003R002A013.skeleton").unwrap();
        assert_eq!(ids, NtuFileIds { setup: 1, camera: 2, performer: 3, replication: 2, action: 13 });
        assert!(parse_ntu_file_name("S001C002P003.skeleton").is_none());
        assert!(parse_ntu_file_name("S001C002P003R002A013x.skeleton").is_none());
    }
}
