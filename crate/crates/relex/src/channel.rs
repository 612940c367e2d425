//! Discrete memoryless channels (point-to-point and two-user multiple
//! access) and the plain-text channel file format.

use crate::Error;

/// Row-sum tolerance when loading channel files.
pub const ROW_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Dmc,
    Mac,
}

/// A row-stochastic transition matrix, W: X → Y (DMC) or W: X×Y → Z (MAC).
/// Rows are indexed by the input tuple in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub kind: ChannelKind,
    /// Input alphabet sizes: `[|X|]` for a DMC, `[|X|, |Y|]` for a MAC.
    pub inputs: Vec<usize>,
    /// Output alphabet size.
    pub outputs: usize,
    /// `rows[input_index][output]`.
    pub rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn dmc(rows: Vec<Vec<f64>>) -> Result<Self, Error> {
        let nx = rows.len();
        let ny = rows.first().map(Vec::len).unwrap_or(0);
        Self::validated(ChannelKind::Dmc, vec![nx], ny, rows)
    }

    pub fn mac(nx: usize, ny: usize, rows: Vec<Vec<f64>>) -> Result<Self, Error> {
        let nz = rows.first().map(Vec::len).unwrap_or(0);
        Self::validated(ChannelKind::Mac, vec![nx, ny], nz, rows)
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Self {
        Self::dmc(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]).unwrap()
    }

    fn validated(
        kind: ChannelKind,
        inputs: Vec<usize>,
        outputs: usize,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, Error> {
        let nin: usize = inputs.iter().product();
        if rows.len() != nin || nin == 0 || outputs == 0 {
            return Err(Error::Shape(format!(
                "channel needs {nin} rows, got {}",
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::Shape(format!("row {i} has {} entries", row.len())));
            }
            if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(Error::Invalid(format!("row {i} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::Invalid(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self { kind, inputs, outputs, rows })
    }

    /// DMC transition probability W(y|x).
    #[inline]
    pub fn w(&self, y: usize, x: usize) -> f64 {
        self.rows[x][y]
    }

    /// MAC transition probability W(z|x,y).
    #[inline]
    pub fn w2(&self, z: usize, x: usize, y: usize) -> f64 {
        self.rows[x * self.inputs[1] + y][z]
    }

    /// Parse the plain-text channel format: `#` comments, a header line
    /// `dmc |X| |Y|` or `mac |X| |Y| |Z|`, then one whitespace-separated
    /// probability row per input (MAC rows in lexicographic (x, y) order).
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty channel file".into()))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let parse_dim = |t: &str| -> Result<usize, Error> {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad alphabet size {t}")))
        };
        let (kind, inputs, outputs) = match toks.as_slice() {
            ["dmc", x, y] => (ChannelKind::Dmc, vec![parse_dim(x)?], parse_dim(y)?),
            ["mac", x, y, z] => (ChannelKind::Mac, vec![parse_dim(x)?, parse_dim(y)?], parse_dim(z)?),
            _ => return Err(Error::Parse(format!("bad channel header: {header}"))),
        };
        let nin: usize = inputs.iter().product();
        let mut rows = Vec::with_capacity(nin);
        for line in lines {
            let row: Result<Vec<f64>, Error> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad probability {t}"))))
                .collect();
            rows.push(row?);
        }
        if rows.len() != nin {
            return Err(Error::Parse(format!("expected {nin} rows, found {}", rows.len())));
        }
        Self::validated(kind, inputs, outputs, rows)
    }

    /// Emit the canonical text form. Probabilities use the shortest
    /// round-tripping decimal representation, so `emit(parse(emit(c)))`
    /// is byte-identical to `emit(c)`.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        match self.kind {
            ChannelKind::Dmc => {
                out.push_str(&format!("dmc {} {}\n", self.inputs[0], self.outputs));
            }
            ChannelKind::Mac => {
                out.push_str(&format!(
                    "mac {} {} {}\n",
                    self.inputs[0], self.inputs[1], self.outputs
                ));
            }
        }
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|p| format!("{p}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let text = "# a BSC\ndmc 2 2\n0.95 0.05\n0.05 0.95\n";
        let c = Channel::parse(text).unwrap();
        assert_eq!(c.kind, ChannelKind::Dmc);
        assert_eq!(c.w(1, 0), 0.05);
        let emitted = c.emit();
        let again = Channel::parse(&emitted).unwrap().emit();
        assert_eq!(emitted, again);
    }

    #[test]
    fn mac_rows_lexicographic() {
        let text = "mac 2 2 2\n0.99 0.01\n0.01 0.99\n0.01 0.99\n0.5 0.5\n";
        let c = Channel::parse(text).unwrap();
        assert_eq!(c.w2(0, 0, 0), 0.99);
        assert_eq!(c.w2(1, 0, 1), 0.99);
        assert_eq!(c.w2(0, 1, 1), 0.5);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(Channel::parse("dmc 2 2\n0.9 0.2\n0.5 0.5\n").is_err());
        assert!(Channel::parse("dmc 2 2\n0.9 0.1\n").is_err());
        assert!(Channel::parse("bogus 2 2\n").is_err());
    }
}
