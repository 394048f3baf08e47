//! Plain-text reports, one `KEY: value` pair per line.

use std::fmt;

use thiserror::Error;

pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    lines: Vec<(String, String)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: expected 'KEY: value'")]
pub struct ReportError {
    pub line: usize,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty() && k.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keys are upper-case snake case; values must be single-line.
    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        let key = key.into();
        debug_assert!(valid_key(&key), "bad report key {key}");
        let value = value.to_string().replace('\n', " ");
        self.lines.push((key, value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.lines.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.lines
    }

    pub fn parse(text: &str) -> Result<Self, ReportError> {
        let mut r = Self::new();
        for (i, l) in text.lines().enumerate() {
            let l = l.trim_end_matches('\r');
            if l.is_empty() {
                continue;
            }
            let (k, v) = l.split_once(": ").ok_or(ReportError { line: i + 1 })?;
            if !valid_key(k) {
                return Err(ReportError { line: i + 1 });
            }
            r.lines.push((k.to_string(), v.to_string()));
        }
        Ok(r)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.lines {
            writeln!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}
