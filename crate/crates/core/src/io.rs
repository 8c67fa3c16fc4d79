//! CSV ingestion and image export.
//!
//! NPY output is format version 1.0: magic, version, a little-endian `u16`
//! header length, then an ASCII dict padded with spaces and a trailing newline
//! so the data starts on a 64-byte boundary. Data is `<f8` in C order.
//! PGM output is binary P5 with maxval 255 and `v -> floor(v * 255 + 0.5)`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::binning::TimeSeries;
use crate::error::{MtfError, Result};
use crate::field::{ChannelStack, FieldImage};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> MtfError + '_ {
    move |source| MtfError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads one numeric column.
///
/// The first record is a header when any of its cells fails to parse as a
/// number. `column` may name a header field or give a 0-based index; it can be
/// omitted only for single-column files. Rows are reported 1-based, counting
/// the header line.
pub fn read_csv(path: &Path, column: Option<&str>) -> Result<TimeSeries> {
    let file = File::open(path).map_err(io_err(path))?;
    read_csv_from(file, path, column)
}

fn read_csv_from<R: Read>(reader: R, path: &Path, column: Option<&str>) -> Result<TimeSeries> {
    let parse_err = |row: usize, message: String| MtfError::Parse {
        path: path.to_path_buf(),
        row,
        message,
    };
    let column_err = |message: String| MtfError::Column {
        path: path.to_path_buf(),
        message,
    };

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut records = rdr.records().enumerate().peekable();

    let first = match records.peek() {
        Some((_, Ok(r))) => r.clone(),
        Some((i, Err(e))) => return Err(parse_err(i + 1, e.to_string())),
        None => return Err(column_err("file is empty".into())),
    };
    let has_header = first.iter().any(|cell| cell.parse::<f64>().is_err());
    let width = first.len();

    let index = match column {
        Some(sel) => {
            let by_name = has_header
                .then(|| first.iter().position(|h| h == sel))
                .flatten();
            match by_name.or_else(|| sel.parse::<usize>().ok()) {
                Some(i) if i < width => i,
                _ => return Err(column_err(format!("no column '{sel}'"))),
            }
        }
        None if width == 1 => 0,
        None => {
            return Err(column_err(format!(
                "{width} columns present; select one with a column name or index"
            )))
        }
    };
    if has_header {
        records.next();
    }

    let mut values = Vec::new();
    for (i, rec) in records {
        let row = i + 1;
        let rec = rec.map_err(|e| parse_err(row, e.to_string()))?;
        let cell = rec
            .get(index)
            .ok_or_else(|| parse_err(row, format!("missing column {index}")))?;
        let v: f64 = cell
            .parse()
            .map_err(|_| parse_err(row, format!("'{cell}' is not a number")))?;
        if !v.is_finite() {
            return Err(parse_err(row, format!("non-finite value '{cell}'")));
        }
        values.push(v);
    }
    TimeSeries::new(values).map_err(|e| match e {
        MtfError::SeriesTooShort { len } => {
            column_err(format!("{len} observations; at least 2 are required"))
        }
        other => other,
    })
}

const NPY_MAGIC: &[u8; 6] = b"\x93NUMPY";

/// Complete NPY v1.0 byte image of a little-endian f64 C-order array.
pub fn npy_bytes(shape: &[usize], data: &[f64]) -> Vec<u8> {
    let dims = match shape {
        [n] => format!("({n},)"),
        _ => format!(
            "({})",
            shape
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    let mut header = format!("{{'descr': '<f8', 'fortran_order': False, 'shape': {dims}, }}");
    // magic(6) + version(2) + len(2) + header + '\n' must be a multiple of 64
    let unpadded = NPY_MAGIC.len() + 2 + 2 + header.len() + 1;
    header.push_str(&" ".repeat(unpadded.next_multiple_of(64) - unpadded));
    header.push('\n');

    let mut out = Vec::with_capacity(10 + header.len() + data.len() * 8);
    out.extend_from_slice(NPY_MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Something that can be exported as a single f64 array.
pub trait NpyArray {
    fn npy_shape(&self) -> Vec<usize>;
    fn npy_data(&self) -> Vec<f64>;
}

impl NpyArray for FieldImage {
    fn npy_shape(&self) -> Vec<usize> {
        vec![self.side(), self.side()]
    }

    fn npy_data(&self) -> Vec<f64> {
        self.entries().to_vec()
    }
}

impl NpyArray for ChannelStack {
    fn npy_shape(&self) -> Vec<usize> {
        self.shape().to_vec()
    }

    fn npy_data(&self) -> Vec<f64> {
        self.to_contiguous()
    }
}

pub fn write_npy(array: &impl NpyArray, path: &Path) -> Result<()> {
    let bytes = npy_bytes(&array.npy_shape(), &array.npy_data());
    std::fs::write(path, bytes).map_err(io_err(path))
}

/// Parses an NPY v1.0 `<f8` C-order array, returning its shape and data.
pub fn parse_npy(bytes: &[u8]) -> Result<(Vec<usize>, Vec<f64>)> {
    let bad = |m: &str| MtfError::Npy(m.to_string());
    if bytes.len() < 10 || &bytes[..6] != NPY_MAGIC {
        return Err(bad("missing magic string"));
    }
    if bytes[6] != 1 {
        return Err(bad("only version 1.x is supported"));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_start = 10 + header_len;
    let header = bytes
        .get(10..data_start)
        .and_then(|h| std::str::from_utf8(h).ok())
        .ok_or_else(|| bad("truncated header"))?;
    if !header.contains("'descr': '<f8'") {
        return Err(bad("dtype must be '<f8'"));
    }
    if !header.contains("'fortran_order': False") {
        return Err(bad("only C order is supported"));
    }
    let shape_text = header
        .split("'shape': (")
        .nth(1)
        .and_then(|rest| rest.split(')').next())
        .ok_or_else(|| bad("missing shape"))?;
    let shape = shape_text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| bad("bad shape entry")))
        .collect::<Result<Vec<_>>>()?;
    let count: usize = shape.iter().product();
    let payload = &bytes[data_start..];
    if payload.len() != count * 8 {
        return Err(bad("payload size does not match shape"));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((shape, data))
}

pub fn read_npy(path: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    parse_npy(&bytes)
}

/// Maps a probability to an 8-bit gray level, rounding halves up.
pub fn gray_level(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

pub fn pgm_bytes(img: &FieldImage) -> Vec<u8> {
    let side = img.side();
    let mut out = format!("P5\n{side} {side}\n255\n").into_bytes();
    out.extend(img.entries().iter().map(|&v| gray_level(v)));
    out
}

pub fn write_pgm(img: &FieldImage, path: &Path) -> Result<()> {
    std::fs::write(path, pgm_bytes(img)).map_err(io_err(path))
}

/// One image row per line, values in shortest round-trip form.
pub fn write_image_csv(img: &FieldImage, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for row in img.rows() {
        let line = row.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Headerless single-column CSV of a series.
pub fn write_series_csv<W: Write>(series: &TimeSeries, out: W) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    for v in series.values() {
        writeln!(w, "{v}")?;
    }
    w.flush()
}
