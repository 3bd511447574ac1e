//! Raster readers and writers: binary PGM (P5), NPY v1.0 and plain CSV grids.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::ImageGrid;
use crate::error::{Error, Result};

const NPY_MAGIC: &[u8] = b"\x93NUMPY";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    /// Binary greymap. Written as 8-bit when every value fits, else 16-bit.
    Pgm,
    /// Little-endian float64, C order, shape `(height, width)`.
    Npy,
    /// Comma-separated rows, no header.
    Csv,
}

impl RasterFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("pgm") => Ok(Self::Pgm),
            Some("npy") => Ok(Self::Npy),
            Some("csv") => Ok(Self::Csv),
            _ => Err(Error::Format(format!(
                "cannot infer raster format from '{}'",
                path.display()
            ))),
        }
    }
}

pub fn load_raster(path: impl AsRef<Path>, format: RasterFormat) -> Result<ImageGrid> {
    let bytes = fs::read(path.as_ref())?;
    match format {
        RasterFormat::Pgm => decode_pgm(&bytes),
        RasterFormat::Npy => decode_npy(&bytes),
        RasterFormat::Csv => decode_csv(&bytes),
    }
}

pub fn save_raster(image: &ImageGrid, path: impl AsRef<Path>, format: RasterFormat) -> Result<()> {
    let bytes = match format {
        RasterFormat::Pgm => encode_pgm(image)?,
        RasterFormat::Npy => encode_npy(image),
        RasterFormat::Csv => encode_csv(image),
    };
    let mut file = fs::File::create(path.as_ref())?;
    file.write_all(&bytes)?;
    Ok(())
}

pub(crate) fn encode_npy(image: &ImageGrid) -> Vec<u8> {
    let dict = format!(
        "{{'descr': '<f8', 'fortran_order': False, 'shape': ({}, {}), }}",
        image.height(),
        image.width()
    );
    // magic(6) + version(2) + header length(2) + dict, padded with spaces
    // and a trailing newline to a multiple of 64 bytes.
    let unpadded = NPY_MAGIC.len() + 4 + dict.len() + 1;
    let pad = (64 - unpadded % 64) % 64;
    let header_len = dict.len() + pad + 1;

    let mut out = Vec::with_capacity(unpadded + pad + image.len() * 8);
    out.extend_from_slice(NPY_MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header_len as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.extend(std::iter::repeat_n(b' ', pad));
    out.push(b'\n');
    for v in image.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub(crate) fn decode_npy(bytes: &[u8]) -> Result<ImageGrid> {
    if bytes.len() < 10 || &bytes[..6] != NPY_MAGIC {
        return Err(Error::Format("missing NPY magic".into()));
    }
    let (major, _minor) = (bytes[6], bytes[7]);
    let (header_len, offset) = match major {
        1 => (u16::from_le_bytes([bytes[8], bytes[9]]) as usize, 10),
        2 | 3 => {
            if bytes.len() < 12 {
                return Err(Error::Format("truncated NPY header".into()));
            }
            (
                u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize,
                12,
            )
        }
        v => return Err(Error::Format(format!("unsupported NPY version {v}"))),
    };
    let header = bytes
        .get(offset..offset + header_len)
        .ok_or_else(|| Error::Format("truncated NPY header".into()))?;
    let header = std::str::from_utf8(header)
        .map_err(|_| Error::Format("NPY header is not ASCII".into()))?;

    let descr = dict_value(header, "descr")
        .ok_or_else(|| Error::Format("NPY header lacks 'descr'".into()))?;
    let descr = descr.trim_matches(|c| c == '\'' || c == '"');
    let fortran = dict_value(header, "fortran_order")
        .ok_or_else(|| Error::Format("NPY header lacks 'fortran_order'".into()))?;
    let fortran = match fortran {
        "True" => true,
        "False" => false,
        other => return Err(Error::Format(format!("bad fortran_order '{other}'"))),
    };
    let shape = parse_shape(header)?;
    if shape.len() != 2 {
        return Err(Error::Format(format!(
            "expected 2D raster, found {}D array",
            shape.len()
        )));
    }
    let (height, width) = (shape[0], shape[1]);
    let count = width * height;

    let payload = &bytes[offset + header_len..];
    let values = decode_npy_values(descr, payload, count)?;
    let data = if fortran {
        let mut out = vec![0.0; count];
        for c in 0..width {
            for r in 0..height {
                out[r * width + c] = values[c * height + r];
            }
        }
        out
    } else {
        values
    };
    ImageGrid::new(width, height, data)
}

fn decode_npy_values(descr: &str, payload: &[u8], count: usize) -> Result<Vec<f64>> {
    let size = match descr {
        "<f8" | "<i8" | "<u8" => 8,
        "<f4" | "<i4" | "<u4" => 4,
        "<i2" | "<u2" => 2,
        "|u1" | "|i1" | "|b1" => 1,
        other => {
            return Err(Error::Format(format!("unsupported NPY dtype '{other}'")));
        }
    };
    if payload.len() < count * size {
        return Err(Error::Format(format!(
            "dimension mismatch: header declares {count} values, payload holds {}",
            payload.len() / size
        )));
    }
    let values = payload[..count * size]
        .chunks_exact(size)
        .map(|b| match descr {
            "<f8" => f64::from_le_bytes(b.try_into().unwrap()),
            "<i8" => i64::from_le_bytes(b.try_into().unwrap()) as f64,
            "<u8" => u64::from_le_bytes(b.try_into().unwrap()) as f64,
            "<f4" => f32::from_le_bytes(b.try_into().unwrap()) as f64,
            "<i4" => i32::from_le_bytes(b.try_into().unwrap()) as f64,
            "<u4" => u32::from_le_bytes(b.try_into().unwrap()) as f64,
            "<i2" => i16::from_le_bytes(b.try_into().unwrap()) as f64,
            "<u2" => u16::from_le_bytes(b.try_into().unwrap()) as f64,
            "|i1" => b[0] as i8 as f64,
            _ => b[0] as f64,
        })
        .collect();
    Ok(values)
}

/// Raw text of `'key': value` inside a python dict literal. Stops at the next
/// top-level comma, which is enough for NPY headers.
fn dict_value<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    let pat1 = format!("'{key}'");
    let pat2 = format!("\"{key}\"");
    let start = header.find(&pat1).or_else(|| header.find(&pat2))? + key.len() + 2;
    let rest = header[start..].trim_start().strip_prefix(':')?.trim_start();
    let mut depth = 0usize;
    for (i, ch) in rest.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth = depth.saturating_sub(1),
            ',' | '}' if depth == 0 => return Some(rest[..i].trim()),
            _ => {}
        }
    }
    None
}

fn parse_shape(header: &str) -> Result<Vec<usize>> {
    let raw = dict_value(header, "shape")
        .ok_or_else(|| Error::Format("NPY header lacks 'shape'".into()))?;
    let inner = raw
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::Format(format!("bad shape '{raw}'")))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.trim_end_matches('L')
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("bad shape entry '{s}'")))
        })
        .collect()
}

fn encode_pgm(image: &ImageGrid) -> Result<Vec<u8>> {
    let mut max = 0.0f64;
    for &v in image.data() {
        if v < 0.0 || v.fract() != 0.0 || v > 65535.0 {
            return Err(Error::Format(format!(
                "PGM needs integer intensities in [0, 65535], found {v}; bin the image first"
            )));
        }
        max = max.max(v);
    }
    let maxval: u32 = if max <= 255.0 { 255 } else { 65535 };
    let mut out = format!("P5\n{} {}\n{}\n", image.width(), image.height(), maxval).into_bytes();
    if maxval == 255 {
        out.extend(image.data().iter().map(|&v| v as u8));
    } else {
        for &v in image.data() {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        }
    }
    Ok(out)
}

fn decode_pgm(bytes: &[u8]) -> Result<ImageGrid> {
    let mut pos = 0usize;
    let mut next_token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    if next_token()? != "P5" {
        return Err(Error::Format("not a binary PGM (P5)".into()));
    }
    let mut number = |what: &str| -> Result<usize> {
        let tok = next_token()?;
        tok.parse()
            .map_err(|_| Error::Format(format!("bad PGM {what} '{tok}'")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("bad PGM maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    let start = pos + 1;
    let bpp = if maxval < 256 { 1 } else { 2 };
    let count = width * height;
    let raster = bytes
        .get(start..start + count * bpp)
        .ok_or_else(|| Error::Format("dimension mismatch: PGM raster is truncated".into()))?;
    let data = if bpp == 1 {
        raster.iter().map(|&b| b as f64).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64)
            .collect()
    };
    ImageGrid::new(width, height, data)
}

fn encode_csv(image: &ImageGrid) -> Vec<u8> {
    let mut out = String::new();
    for r in 0..image.height() {
        let row: Vec<String> = image.row(r).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn decode_csv(bytes: &[u8]) -> Result<ImageGrid> {
    let text =
        std::str::from_utf8(bytes).map_err(|_| Error::Format("CSV grid is not UTF-8".into()))?;
    let mut width = None;
    let mut data = Vec::new();
    let mut height = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| {
                    Error::Format(format!("line {}: '{}' is not a number", lineno + 1, t.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Format(format!(
                    "dimension mismatch: line {} has {} columns, expected {w}",
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        data.extend(row);
        height += 1;
    }
    let width = width.ok_or(Error::Empty)?;
    ImageGrid::new(width, height, data)
}
