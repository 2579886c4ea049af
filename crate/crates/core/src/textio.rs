//! Small helpers shared by the line-oriented text formats.

use std::fmt::Display;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Numbered, non-empty lines of a text document.
pub(crate) struct Lines<'a> {
    name: String,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    pub fn new(name: impl Into<String>, text: &'a str) -> Self {
        Self {
            name: name.into(),
            inner: text.lines().enumerate(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Next non-blank line with its 1-based number.
    pub fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.inner
            .by_ref()
            .map(|(i, l)| (i + 1, l.trim()))
            .find(|(_, l)| !l.is_empty())
    }

    pub fn expect_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let name = self.name.clone();
        self.next_line()
            .ok_or_else(|| Error::parse(name, 0, format!("unexpected end of file, expected {what}")))
    }

    pub fn error(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.name.clone(), line, msg)
    }

    /// Splits `line` into exactly `n` whitespace-separated tokens.
    pub fn tokens<const N: usize>(&self, line: usize, text: &'a str) -> Result<[&'a str; N]> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        parts
            .try_into()
            .map_err(|p: Vec<&str>| self.error(line, format!("expected {N} fields, found {}", p.len())))
    }

    pub fn parse<T: FromStr>(&self, line: usize, token: &str) -> Result<T>
    where
        T::Err: Display,
    {
        token
            .parse()
            .map_err(|e| self.error(line, format!("cannot parse {token:?}: {e}")))
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}
