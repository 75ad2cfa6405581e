//! Point sets and their on-disk formats.
//!
//! Binary layout (`KACVEC01`):
//!
//! ```text
//! offset 0   8 bytes   b"KACVEC01"
//! offset 8   u64 LE    n (rows)
//! offset 16  u64 LE    d (columns)
//! offset 24  n*d f64 LE, row-major
//! ```
//!
//! CSV is one vector per line, comma separated, no header. Values are
//! written with 17 significant digits, so a CSV round trip is exact.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{SeedStream, LANE_GAUSS, LANE_SIGNS};

pub const MAGIC: &[u8; 8] = b"KACVEC01";
const HEADER_LEN: u64 = 24;

/// `n` points in `R^d`, stored row-major. Entries are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl PointSet {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n.checked_mul(d) != Some(data.len()) {
            return Err(Error::Dimension(format!(
                "{} values cannot fill {n} x {d}",
                data.len()
            )));
        }
        if n > 0 && d == 0 {
            return Err(Error::Dimension("points of dimension 0".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("non-finite entry in point set".into()));
        }
        Ok(PointSet { n, d, data })
    }

    pub fn empty(d: usize) -> Self {
        PointSet {
            n: 0,
            d,
            data: Vec::new(),
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Ok(PointSet::empty(0));
        };
        let d = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::Dimension(format!(
                    "row {i} has length {}, expected {d}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        PointSet::new(rows.len(), d, data)
    }

    /// `n` independent uniformly random unit vectors (normalized Gaussians).
    pub fn random_unit(n: usize, d: usize, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("points of dimension 0".into()));
        }
        let mut rng = SeedStream::new(seed, LANE_GAUSS);
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            let start = data.len();
            loop {
                data.extend((0..d).map(|_| -> f64 { StandardNormal.sample(&mut rng) }));
                let norm = data[start..].iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    data[start..].iter_mut().for_each(|v| *v /= norm);
                    break;
                }
                data.truncate(start);
            }
        }
        PointSet::new(n, d, data)
    }

    /// `n` random vertices of the cube `{±1/√d}^d` (repeats possible).
    pub fn cube_vertices(n: usize, d: usize, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("points of dimension 0".into()));
        }
        let mut rng = SeedStream::new(seed, LANE_SIGNS);
        let a = 1.0 / (d as f64).sqrt();
        let data = (0..n * d).map(|_| a * rng.sign()).collect();
        PointSet::new(n, d, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // chunks_exact panics on 0; an n = 0 set has no data anyway.
        self.data.chunks_exact(self.d.max(1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Binary,
    Csv,
}

impl Format {
    /// `.csv` means CSV; anything else is binary.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Binary,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" | "bin" => Ok(Format::Binary),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Parameter(format!("unknown format {other:?}"))),
        }
    }
}

pub fn read_points(path: impl AsRef<Path>, format: Format) -> Result<PointSet> {
    let path = path.as_ref();
    match format {
        Format::Binary => read_binary(path),
        Format::Csv => read_csv(path),
    }
}

fn read_binary(path: &Path) -> Result<PointSet> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(Error::BadMagic { path: path.into() });
    }
    let found = bytes.len() as u64;
    if found < HEADER_LEN {
        return Err(Error::PayloadShort {
            path: path.into(),
            expected: HEADER_LEN,
            found,
        });
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (n, d) = (word(8), word(16));
    let expected = n
        .checked_mul(d)
        .and_then(|nd| nd.checked_mul(8))
        .and_then(|b| b.checked_add(HEADER_LEN))
        .unwrap_or(u64::MAX);
    if found < expected {
        return Err(Error::PayloadShort {
            path: path.into(),
            expected,
            found,
        });
    }
    if found > expected {
        return Err(Error::PayloadLong {
            path: path.into(),
            extra: found - expected,
        });
    }
    let data: Vec<f64> = bytes[HEADER_LEN as usize..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { path: path.into() });
    }
    PointSet::new(n as usize, d as usize, data)
}

fn read_csv(path: &Path) -> Result<PointSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut data = Vec::new();
    let mut d = None;
    let mut n = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(n + 1, |p| p.line() as usize);
        let want = *d.get_or_insert(record.len());
        if record.len() != want {
            return Err(Error::RaggedRow {
                path: path.into(),
                line,
                expected: want,
                found: record.len(),
            });
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| Error::NonNumeric {
                path: path.into(),
                line,
                field: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { path: path.into() });
            }
            data.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyCsv { path: path.into() });
    }
    PointSet::new(n, d.unwrap_or(0), data)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")),
        ),
    }
}

/// Create `path` for writing, refusing to clobber unless `overwrite`.
pub(crate) fn create_file(path: &Path, overwrite: bool) -> Result<File> {
    let mut opts = OpenOptions::new();
    opts.write(true);
    if overwrite {
        opts.create(true).truncate(true);
    } else {
        opts.create_new(true);
    }
    opts.open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::AlreadyExists {
            Error::Exists { path: path.into() }
        } else {
            Error::io(path, e)
        }
    })
}

pub fn write_points(
    points: &PointSet,
    path: impl AsRef<Path>,
    format: Format,
    overwrite: bool,
) -> Result<()> {
    let path = path.as_ref();
    if format == Format::Csv && points.n() == 0 {
        return Err(Error::EmptyCsv { path: path.into() });
    }
    let file = create_file(path, overwrite)?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    match format {
        Format::Binary => {
            w.write_all(MAGIC).map_err(io)?;
            w.write_all(&(points.n() as u64).to_le_bytes()).map_err(io)?;
            w.write_all(&(points.d() as u64).to_le_bytes()).map_err(io)?;
            for v in points.data() {
                w.write_all(&v.to_le_bytes()).map_err(io)?;
            }
        }
        Format::Csv => {
            for row in points.rows() {
                let mut first = true;
                for v in row {
                    if !first {
                        w.write_all(b",").map_err(io)?;
                    }
                    write!(w, "{v:.16e}").map_err(io)?;
                    first = false;
                }
                w.write_all(b"\n").map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn csv_single_row() {
        let dir = tmp();
        let p = dir.path().join("a.csv");
        std::fs::write(&p, "1.0,2.0,3.0\n").unwrap();
        let ps = read_points(&p, Format::Csv).unwrap();
        assert_eq!((ps.n(), ps.d()), (1, 3));
        assert_eq!(ps.row(0), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn binary_truncated() {
        let dir = tmp();
        let p = dir.path().join("a.bin");
        let ps = PointSet::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        write_points(&ps, &p, Format::Binary, false).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 3]).unwrap();
        let err = read_points(&p, Format::Binary).unwrap_err();
        assert!(err.to_string().contains("payload short"), "{err}");
    }

    #[test]
    fn binary_errors_are_distinct() {
        let dir = tmp();
        let p = dir.path().join("x.bin");
        std::fs::write(&p, b"NOTMAGIC").unwrap();
        let bad_magic = read_points(&p, Format::Binary).unwrap_err();
        let mut bytes = MAGIC.to_vec();
        bytes.extend(1u64.to_le_bytes());
        bytes.extend(1u64.to_le_bytes());
        bytes.extend(1.5f64.to_le_bytes());
        bytes.push(0);
        std::fs::write(&p, &bytes).unwrap();
        let long = read_points(&p, Format::Binary).unwrap_err();
        assert_ne!(bad_magic.code(), long.code());
        assert!(matches!(long, Error::PayloadLong { extra: 1, .. }));
    }

    #[test]
    fn csv_errors_are_distinct() {
        let dir = tmp();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "1,2\n3,abc\n").unwrap();
        let nn = read_points(&p, Format::Csv).unwrap_err();
        assert!(matches!(nn, Error::NonNumeric { line: 2, .. }), "{nn}");
        std::fs::write(&p, "1,2\n3\n").unwrap();
        let rag = read_points(&p, Format::Csv).unwrap_err();
        assert!(matches!(rag, Error::RaggedRow { expected: 2, found: 1, .. }));
        assert_ne!(nn.code(), rag.code());
    }

    #[test]
    fn empty_sets() {
        let dir = tmp();
        let e = PointSet::empty(5);
        let b = dir.path().join("e.bin");
        write_points(&e, &b, Format::Binary, false).unwrap();
        assert_eq!(read_points(&b, Format::Binary).unwrap(), e);
        let c = dir.path().join("e.csv");
        assert!(matches!(
            write_points(&e, &c, Format::Csv, false),
            Err(Error::EmptyCsv { .. })
        ));
    }

    #[test]
    fn overwrite_needs_flag() {
        let dir = tmp();
        let p = dir.path().join("o.bin");
        let ps = PointSet::from_rows(&[[1.0]]).unwrap();
        write_points(&ps, &p, Format::Binary, false).unwrap();
        assert!(matches!(
            write_points(&ps, &p, Format::Binary, false),
            Err(Error::Exists { .. })
        ));
        write_points(&ps, &p, Format::Binary, true).unwrap();
    }

    #[test]
    fn generators() {
        let u = PointSet::random_unit(5, 7, 1).unwrap();
        for r in u.rows() {
            assert!((r.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(u, PointSet::random_unit(5, 7, 1).unwrap());
        let c = PointSet::cube_vertices(3, 16, 2).unwrap();
        assert!(c.data().iter().all(|v| v.abs() == 0.25));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(PointSet::new(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn round_trips_are_exact(
            rows in prop::collection::vec(prop::collection::vec(-1e300f64..1e300, 3), 1..8)
        ) {
            let dir = tmp();
            let ps = PointSet::from_rows(&rows).unwrap();
            for (name, f) in [("r.bin", Format::Binary), ("r.csv", Format::Csv)] {
                let p = dir.path().join(name);
                write_points(&ps, &p, f, true).unwrap();
                let back = read_points(&p, f).unwrap();
                prop_assert_eq!(back.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                                ps.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            }
        }
    }
}
