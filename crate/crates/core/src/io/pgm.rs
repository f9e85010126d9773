use crate::automaton::Configuration;
use crate::error::{DcaError, Result};

/// Configurations over time, row 0 being the initial one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeDiagram {
    rows: Vec<Configuration>,
}

impl SpaceTimeDiagram {
    pub fn new(rows: Vec<Configuration>) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| DcaError::invalid("diagram needs at least one row"))?;
        let (width, k) = (first.ring_size(), first.k());
        if let Some(t) = rows.iter().position(|r| r.ring_size() != width || r.k() != k) {
            return Err(DcaError::invalid(format!("diagram row {t} has a different shape")));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Configuration] {
        &self.rows
    }

    pub fn width(&self) -> usize {
        self.rows[0].ring_size()
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }
}

/// Gray level for `P(black)`: 0 is certainly black, 255 certainly white.
/// Rounds half away from zero.
pub(crate) fn gray(p_black: f64) -> u8 {
    (255.0 * (1.0 - p_black)).round().clamp(0.0, 255.0) as u8
}

/// `P5` header followed by raw 8-bit rows.
pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    if pixels.len() != width * height {
        return Err(DcaError::DimensionMismatch {
            context: "PGM pixel count",
            expected: width * height,
            actual: pixels.len(),
        });
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    Ok(out)
}

/// Renders the probability of `black_symbol` as a binary PGM, one pixel per
/// (time, cell).
pub fn render_pgm(diagram: &SpaceTimeDiagram, black_symbol: usize) -> Result<Vec<u8>> {
    let k = diagram.rows[0].k();
    if black_symbol >= k {
        return Err(DcaError::invalid(format!("black symbol {black_symbol} >= k = {k}")));
    }
    let pixels: Vec<u8> = diagram
        .rows
        .iter()
        .flat_map(|row| row.cells().map(|c| gray(c[black_symbol])))
        .collect();
    encode_pgm(diagram.width(), diagram.height(), &pixels)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u8>,
}

/// Parses an 8-bit binary PGM (comments in the header are allowed).
pub fn parse_pgm(bytes: &[u8]) -> Result<PgmImage> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(DcaError::parse(1, "truncated PGM header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| DcaError::parse(1, "non-ASCII header"))?);
    }
    if fields[0] != "P5" {
        return Err(DcaError::parse(1, format!("expected magic P5, found {:?}", fields[0])));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| DcaError::parse(1, format!("bad header number {s:?}")));
    let (width, height, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(DcaError::parse(1, format!("unsupported maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let raster = bytes.get(pos..).unwrap_or_default();
    if raster.len() != width * height {
        return Err(DcaError::parse(
            1,
            format!("expected {} pixel bytes, found {}", width * height, raster.len()),
        ));
    }
    Ok(PgmImage {
        width,
        height,
        maxval: maxval as u16,
        pixels: raster.to_vec(),
    })
}
