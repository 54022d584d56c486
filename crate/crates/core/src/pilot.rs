//! Frozen regression values stored as `key = value` lines.
//!
//! Comment lines (`#`) directly above a key are kept as that key's
//! provenance and written back on render.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PilotEntry {
    pub value: f64,
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PilotTable {
    header: Vec<String>,
    entries: BTreeMap<String, PilotEntry>,
}

impl PilotTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = PilotTable::default();
        let mut pending: Vec<String> = Vec::new();
        let mut seen_key = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                if !seen_key && !pending.is_empty() {
                    table.header.append(&mut pending);
                }
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                pending.push(comment.trim().to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "line {}: '{}' is not a number",
                    lineno + 1,
                    value.trim()
                ))
            })?;
            seen_key = true;
            table.entries.insert(
                key.trim().to_string(),
                PilotEntry {
                    value,
                    provenance: std::mem::take(&mut pending),
                },
            );
        }
        if !seen_key {
            table.header.append(&mut pending);
        }
        Ok(table)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            out.push_str(&format!("# {h}\n"));
        }
        for (key, entry) in &self.entries {
            out.push('\n');
            for p in &entry.provenance {
                out.push_str(&format!("# {p}\n"));
            }
            out.push_str(&format!("{key} = {:e}\n", entry.value));
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.get(key).map(|e| e.value)
    }

    pub fn require(&self, key: &str) -> Result<f64> {
        self.get(key)
            .ok_or_else(|| Error::Parse(format!("pilot table has no entry '{key}'")))
    }

    pub fn set(&mut self, key: &str, value: f64, provenance: Vec<String>) {
        self.entries
            .insert(key.to_string(), PilotEntry { value, provenance });
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn set_header(&mut self, header: Vec<String>) {
        self.header = header;
    }
}

/// Smallest number with `digits` significant digits that is `>= x`,
/// chosen from its decimal representation so it renders without noise.
pub fn round_up_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() || digits == 0 {
        return x;
    }
    let text = format!("{:.*e}", digits - 1, x);
    let rounded: f64 = text.parse().expect("formatted float parses");
    if rounded >= x {
        return rounded;
    }
    // step the last kept digit away from zero for x > 0, toward it for x < 0
    let (mantissa, exp) = text.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let mut units: u64 = mantissa
        .trim_start_matches('-')
        .replace('.', "")
        .parse()
        .expect("decimal mantissa");
    units = if negative { units - 1 } else { units + 1 };
    let sign = if negative { "-" } else { "" };
    let shift = exp - digits as i32 + 1;
    format!("{sign}{units}e{shift}").parse().expect("rebuilt float parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render_round_trip() {
        let text = "# header line\n\n# from seed 42\nalpha = 1.5\nbeta=2e-3\n";
        let t = PilotTable::parse(text).unwrap();
        assert_eq!(t.get("alpha"), Some(1.5));
        assert_eq!(t.get("beta"), Some(2e-3));
        assert_eq!(t.entries["alpha"].provenance, vec!["from seed 42"]);
        let again = PilotTable::parse(&t.render()).unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn malformed_lines() {
        assert!(PilotTable::parse("alpha 1.5").is_err());
        assert!(PilotTable::parse("alpha = x").is_err());
        assert!(PilotTable::default().require("missing").is_err());
    }

    #[test]
    fn rounding_up() {
        assert_eq!(round_up_sig(0.123456789012345, 10), 0.1234567891);
        assert!(round_up_sig(2.0, 10) >= 2.0);
        assert!(round_up_sig(1.0000000000001, 10) > 1.0000000000001);
        assert_eq!(round_up_sig(0.0, 10), 0.0);
        assert_eq!(round_up_sig(2.446995735190842, 10), 2.446995736);
        assert_eq!(round_up_sig(9.9999999999, 10), 10.0);
        assert_eq!(round_up_sig(-1.23456789012, 10), -1.234567890);
        assert_eq!(format!("{:e}", round_up_sig(2.446995735190842, 10)), "2.446995736e0");
    }

    #[test]
    fn header_without_entries_survives() {
        let t = PilotTable::parse("# only a header\n").unwrap();
        assert_eq!(t.render(), "# only a header\n");
    }
}
