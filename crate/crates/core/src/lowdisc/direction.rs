//! Sobol' direction numbers in the Joe–Kuo text layout.

use std::io::BufRead;

use crate::error::{Error, Result};

/// Number of binary digits carried by every direction vector.
pub const DIGITS: usize = 32;

/// Joe–Kuo `new-joe-kuo-6` rows for dimensions 2..=1024.
const BUNDLED_TABLE: &str = include_str!("../../data/new-joe-kuo-6.1024");

/// One row of the table: dimension index, polynomial degree, interior coefficient bits
/// and the initial direction integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionRecord {
    pub dim: usize,
    pub degree: usize,
    pub coeffs: u32,
    pub initial: Vec<u32>,
}

/// Direction vectors for the first `dims` Sobol' coordinates.
///
/// `vectors[i][k]` is the (k+1)-th direction number of coordinate `i` scaled to 32 bits,
/// i.e. `m_{k+1} << (31 - k)`. Coordinate 0 is the base-2 radical inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionNumbers {
    vectors: Vec<[u32; DIGITS]>,
}

impl DirectionNumbers {
    /// Parses a Joe–Kuo table and derives direction vectors for `dims` coordinates.
    ///
    /// The first line is a header and is skipped. Only as many rows as needed are read.
    pub fn load<R: BufRead>(source: R, dims: usize) -> Result<Self> {
        if dims == 0 {
            return Ok(Self {
                vectors: Vec::new(),
            });
        }
        let needed = dims - 1;
        let mut records = Vec::with_capacity(needed);
        for (idx, line) in source.lines().enumerate() {
            if records.len() == needed {
                break;
            }
            let line = line?;
            let line_no = idx + 1;
            if idx == 0 || line.trim().is_empty() {
                continue;
            }
            records.push(parse_record(&line, line_no)?);
        }
        if records.len() < needed {
            return Err(Error::Capacity(format!(
                "table holds {} dimensions, {dims} requested",
                records.len() + 1
            )));
        }
        Ok(Self::from_records(&records))
    }

    /// Direction numbers from the bundled table (up to 1024 dimensions).
    pub fn joe_kuo(dims: usize) -> Result<Self> {
        Self::load(BUNDLED_TABLE.as_bytes(), dims)
    }

    /// Maximum dimension available from [`DirectionNumbers::joe_kuo`].
    pub fn bundled_capacity() -> usize {
        BUNDLED_TABLE
            .lines()
            .filter(|l| !l.trim().is_empty())
            .count()
    }

    /// Builds vectors for coordinate 0 (radical inverse) followed by one coordinate per record.
    pub fn from_records(records: &[DirectionRecord]) -> Self {
        let mut vectors = Vec::with_capacity(records.len() + 1);
        let mut first = [0u32; DIGITS];
        for (k, v) in first.iter_mut().enumerate() {
            *v = 1 << (31 - k);
        }
        vectors.push(first);
        vectors.extend(records.iter().map(recurrence));
        Self { vectors }
    }

    pub fn dims(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self, coord: usize) -> &[u32; DIGITS] {
        &self.vectors[coord]
    }

    /// Keeps only the first `dims` coordinates.
    pub fn truncated(&self, dims: usize) -> Result<Self> {
        if dims > self.dims() {
            return Err(Error::Capacity(format!(
                "{dims} dimensions requested, {} loaded",
                self.dims()
            )));
        }
        Ok(Self {
            vectors: self.vectors[..dims].to_vec(),
        })
    }

    /// Drops the first `skip` coordinates, re-indexing the rest from zero.
    pub fn skip(&self, skip: usize) -> Self {
        Self {
            vectors: self.vectors[skip.min(self.dims())..].to_vec(),
        }
    }
}

fn parse_record(line: &str, line_no: usize) -> Result<DirectionRecord> {
    let err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let fields = line
        .split_whitespace()
        .map(|f| {
            f.parse::<u64>()
                .map_err(|e| err(format!("field {f:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if fields.len() < 3 {
        return Err(err("expected `d s a m_1 ... m_s`".into()));
    }
    let (dim, degree, coeffs) = (fields[0] as usize, fields[1] as usize, fields[2]);
    if degree == 0 || degree > DIGITS {
        return Err(err(format!("degree {degree} outside 1..={DIGITS}")));
    }
    if fields.len() != 3 + degree {
        return Err(err(format!(
            "degree {degree} needs {degree} initial numbers, found {}",
            fields.len() - 3
        )));
    }
    if coeffs >> (degree - 1) != 0 {
        return Err(err(format!(
            "coefficient {coeffs} has more than {} bits",
            degree - 1
        )));
    }
    let initial = fields[3..]
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            if m % 2 == 0 {
                Err(err(format!("m_{} = {m} is even", i + 1)))
            } else if m >= 1u64 << (i + 1) {
                Err(err(format!("m_{} = {m} is not below 2^{}", i + 1, i + 1)))
            } else {
                Ok(m as u32)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DirectionRecord {
        dim,
        degree,
        coeffs: coeffs as u32,
        initial,
    })
}

/// Standard Bratley–Fox recurrence on the scaled direction numbers.
fn recurrence(rec: &DirectionRecord) -> [u32; DIGITS] {
    let s = rec.degree;
    let mut v = [0u32; DIGITS];
    for (k, &m) in rec.initial.iter().enumerate().take(DIGITS) {
        v[k] = m << (31 - k);
    }
    for i in s..DIGITS {
        let mut x = v[i - s] ^ (v[i - s] >> s);
        for k in 1..s {
            if (rec.coeffs >> (s - 1 - k)) & 1 == 1 {
                x ^= v[i - k];
            }
        }
        v[i] = x;
    }
    v
}
