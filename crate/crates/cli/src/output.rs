//! Artifact writers. Floats use Rust's shortest round-trip formatting (with
//! an exponent for very small or large magnitudes) so identical runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

/// A value that can go in a CSV cell.
pub trait Cell {
    fn put(&self, out: &mut String);
}

impl Cell for f64 {
    fn put(&self, out: &mut String) {
        write!(out, "{self:?}").expect("writing to a String cannot fail");
    }
}

macro_rules! display_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn put(&self, out: &mut String) {
                write!(out, "{self}").expect("writing to a String cannot fail");
            }
        }
    )*};
}

display_cell!(usize, bool, &str, String);

impl<C: Cell> Cell for Option<C> {
    fn put(&self, out: &mut String) {
        if let Some(c) = self {
            c.put(out);
        }
    }
}

/// Comma-separated table with a single header row.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[&dyn Cell]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            c.put(&mut self.text);
        }
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, &self.text)
    }
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_round_trip() {
        let mut csv = Csv::new(&["a", "b", "c", "d"]);
        let x = 9.593215111181053e-12;
        csv.row(&[&1usize, &x, &None::<f64>, &true]);
        assert_eq!(csv.text, "a,b,c,d\n1,9.593215111181053e-12,,true\n");
        let back: f64 = csv.text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, x);
    }
}
