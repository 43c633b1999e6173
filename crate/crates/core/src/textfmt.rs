//! Line-oriented model serialization shared by the RBF network, SVM and MLP.
//!
//! Every file starts with `sigmabench <kind> v<version>`. Each following line
//! is a keyword followed by whitespace-separated values. Reals are written
//! with 17 significant digits, which round-trips `f64` exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

pub(crate) struct TextWriter {
    out: String,
}

impl TextWriter {
    pub fn new(kind: &str) -> Self {
        Self {
            out: format!("sigmabench {kind} v{FORMAT_VERSION}\n"),
        }
    }

    pub fn line(&mut self, key: &str, values: impl IntoIterator<Item = f64>) -> &mut Self {
        self.out.push_str(key);
        for v in values {
            let _ = write!(self.out, " {v:.16e}");
        }
        self.out.push('\n');
        self
    }

    pub fn words(&mut self, key: &str, words: &[&str]) -> &mut Self {
        self.out.push_str(key);
        for w in words {
            self.out.push(' ');
            self.out.push_str(w);
        }
        self.out.push('\n');
        self
    }

    pub fn finish(&mut self) -> String {
        std::mem::take(&mut self.out)
    }
}

pub(crate) struct TextReader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line_no: usize,
}

impl<'a> TextReader<'a> {
    pub fn new(text: &'a str, kind: &str) -> Result<Self> {
        let mut r = Self {
            lines: text.lines().enumerate(),
            line_no: 0,
        };
        let header = r.next_fields()?;
        let expected = ["sigmabench", kind, &format!("v{FORMAT_VERSION}")];
        if header != expected {
            return Err(r.err(format!("expected header `{}`", expected.join(" "))));
        }
        Ok(r)
    }

    pub fn err(&self, message: impl Into<String>) -> Error {
        Error::Format {
            line: self.line_no,
            message: message.into(),
        }
    }

    fn next_fields(&mut self) -> Result<Vec<&'a str>> {
        for (i, line) in self.lines.by_ref() {
            self.line_no = i + 1;
            if !line.trim().is_empty() {
                return Ok(line.split_whitespace().collect());
            }
        }
        Err(Error::Format {
            line: self.line_no + 1,
            message: "unexpected end of input".into(),
        })
    }

    /// Next line, which must start with `key`; returns the remaining words.
    pub fn words(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let f = self.next_fields()?;
        if f.first() != Some(&key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        Ok(f[1..].to_vec())
    }

    pub fn floats(&mut self, key: &str, count: usize) -> Result<Vec<f64>> {
        let w = self.words(key)?;
        if w.len() != count {
            return Err(self.err(format!("`{key}` needs {count} values, found {}", w.len())));
        }
        w.iter()
            .map(|s| s.parse::<f64>().map_err(|_| self.err(format!("bad number `{s}`"))))
            .collect()
    }

    pub fn usizes(&mut self, key: &str, count: usize) -> Result<Vec<usize>> {
        let w = self.words(key)?;
        if w.len() != count {
            return Err(self.err(format!("`{key}` needs {count} values, found {}", w.len())));
        }
        w.iter()
            .map(|s| s.parse::<usize>().map_err(|_| self.err(format!("bad count `{s}`"))))
            .collect()
    }

    pub fn end(mut self) -> Result<()> {
        match self.next_fields() {
            Ok(_) => Err(self.err("trailing content")),
            Err(_) => Ok(()),
        }
    }
}
