//! Binary lattices: the fixed spatial substrate for Kd profiling.

use serde::{Deserialize, Serialize};

/// A rectangular binary grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl Lattice {
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<bool>) -> Self {
        assert_eq!(cells.len(), rows * cols);
        Self { rows, cols, cells }
    }

    pub fn filled(rows: usize, cols: usize, value: bool) -> Self {
        Self::from_cells(rows, cols, vec![value; rows * cols])
    }

    /// Alternating cells along the raster scan, so every run has length 1.
    /// For odd widths this is the usual two-coloring.
    pub fn checkerboard(rows: usize, cols: usize) -> Self {
        let cells = (0..rows * cols).map(|i| i % 2 == 1).collect();
        Self::from_cells(rows, cols, cells)
    }

    /// Parse rows of '0'/'1' characters, one row per line. Blank lines and
    /// surrounding whitespace are ignored.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut row = Vec::with_capacity(line.len());
            for c in line.chars() {
                match c {
                    '0' => row.push(false),
                    '1' => row.push(true),
                    c if c.is_whitespace() => {}
                    c => return Err(format!("line {}: unexpected character {c:?}", i + 1)),
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err("empty lattice".to_string());
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err("ragged rows".to_string());
        }
        let n_rows = rows.len();
        let cells: Vec<bool> = rows.into_iter().flatten().collect();
        Ok(Self::from_cells(n_rows, cols, cells))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    /// Raster-scan run lengths.
    pub fn runs(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut iter = self.cells.iter();
        let Some(&first) = iter.next() else {
            return out;
        };
        let mut value = first;
        let mut run = 1u64;
        for &c in iter {
            if c == value {
                run += 1;
            } else {
                out.push(run);
                value = c;
                run = 1;
            }
        }
        out.push(run);
        out
    }

    /// Coarse-grain into d-by-d blocks seen through a perceptive diameter d:
    /// majority rule per block, ties to 0, ragged edges truncated.
    pub fn coarse_grain(&self, d: usize) -> Lattice {
        assert!(d >= 1);
        let rows = self.rows / d;
        let cols = self.cols / d;
        let mut cells = Vec::with_capacity(rows * cols);
        for br in 0..rows {
            for bc in 0..cols {
                let mut ones = 0usize;
                for r in 0..d {
                    for c in 0..d {
                        if self.get(br * d + r, bc * d + c) {
                            ones += 1;
                        }
                    }
                }
                cells.push(2 * ones > d * d);
            }
        }
        Lattice::from_cells(rows, cols, cells)
    }
}

impl std::fmt::Display for Lattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", if self.get(r, c) { '1' } else { '0' })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
