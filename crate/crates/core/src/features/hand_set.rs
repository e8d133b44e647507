use crate::config::KvConfig;
use crate::error::{Error, Result};
use crate::skeleton_io::NTU_JOINTS;

/// Left/right wrist, hand, hand tip and thumb in 0-based NTU numbering.
pub const NTU_HAND_JOINTS: [usize; 8] = [6, 7, 21, 22, 10, 11, 23, 24];

pub fn ntu_hand_set() -> Vec<usize> {
    NTU_HAND_JOINTS.to_vec()
}

/// Reads a hand set from a config file (`hand_set = 6,7,...`) or from a
/// bare list of ids separated by commas or whitespace.
pub fn parse_hand_set(text: &str, joints: usize) -> Result<Vec<usize>> {
    let ids: Vec<usize> = match KvConfig::parse(text) {
        Ok(cfg) if cfg.contains("hand_set") => cfg.get_list("hand_set")?.unwrap_or_default(),
        _ => text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(|_| Error::config(format!("bad joint id {t:?}"))))
            .collect::<Result<_>>()?,
    };
    if ids.is_empty() {
        return Err(Error::config("hand set is empty"));
    }
    if let Some(&bad) = ids.iter().find(|&&v| v >= joints) {
        return Err(Error::config(format!("joint id {bad} out of range for {joints} joints")));
    }
    Ok(ids)
}

pub fn parse_ntu_hand_set(text: &str) -> Result<Vec<usize>> {
    parse_hand_set(text, NTU_JOINTS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_set() {
        let s = ntu_hand_set();
        assert_eq!(s.len(), 8);
        assert!(s.iter().all(|&v| v < NTU_JOINTS));
    }

    #[test]
    fn overrides() {
        assert_eq!(parse_ntu_hand_set("hand_set = 6, 7, 10, 11\n").unwrap(), vec![6, 7, 10, 11]);
        assert_eq!(parse_ntu_hand_set("# ids\n6 7\n10,11").unwrap(), vec![6, 7, 10, 11]);
        assert!(parse_ntu_hand_set("hand_set = 6, 25").is_err());
        assert!(parse_ntu_hand_set("").is_err());
    }
}
