//! Read-only subset of the MAT v5 container: top-level real double matrices,
//! plain or deflate-compressed. Anything else is skipped with a warning.

use std::io::Read;

use flate2::read::ZlibDecoder;

use super::IngestError;

const HEADER_LEN: usize = 128;

const MI_INT8: u32 = 1;
const MI_UINT8: u32 = 2;
const MI_INT16: u32 = 3;
const MI_UINT16: u32 = 4;
const MI_INT32: u32 = 5;
const MI_UINT32: u32 = 6;
const MI_SINGLE: u32 = 7;
const MI_DOUBLE: u32 = 9;
const MI_INT64: u32 = 12;
const MI_UINT64: u32 = 13;
const MI_MATRIX: u32 = 14;
const MI_COMPRESSED: u32 = 15;

const MX_DOUBLE_CLASS: u8 = 6;
const FLAG_COMPLEX: u32 = 0x0800;

/// A named real matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MatVariable {
    pub name: String,
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Endian {
    Little,
    Big,
}

impl Endian {
    fn u16(self, b: &[u8]) -> u16 {
        let a = [b[0], b[1]];
        match self {
            Endian::Little => u16::from_le_bytes(a),
            Endian::Big => u16::from_be_bytes(a),
        }
    }

    fn u32(self, b: &[u8]) -> u32 {
        let a = b[..4].try_into().unwrap();
        match self {
            Endian::Little => u32::from_le_bytes(a),
            Endian::Big => u32::from_be_bytes(a),
        }
    }

    fn fixed<const N: usize>(self, b: &[u8]) -> [u8; N] {
        let mut a: [u8; N] = b[..N].try_into().unwrap();
        if let Endian::Big = self {
            a.reverse();
        }
        a
    }
}

struct Element<'a> {
    kind: u32,
    data: &'a [u8],
}

/// Splits a buffer into consecutive data elements.
fn elements(bytes: &[u8], endian: Endian) -> Result<Vec<Element<'_>>, IngestError> {
    let mut out = Vec::new();
    let mut at = 0;
    while at < bytes.len() {
        if bytes.len() - at < 8 {
            // trailing padding is tolerated, anything else is a cut-off tag
            if bytes[at..].iter().all(|&b| b == 0) {
                break;
            }
            return Err(IngestError::Corrupt(format!("truncated element tag at byte {at}")));
        }
        let first = endian.u32(&bytes[at..]);
        let small_len = first >> 16;
        if small_len != 0 {
            // small data element: type and size packed into one word, data in the next four bytes
            let len = small_len as usize;
            if len > 4 {
                return Err(IngestError::Corrupt(format!(
                    "small element of {len} bytes at byte {at}"
                )));
            }
            out.push(Element {
                kind: first & 0xffff,
                data: &bytes[at + 4..at + 4 + len],
            });
            at += 8;
            continue;
        }
        let kind = first;
        let len = endian.u32(&bytes[at + 4..]) as usize;
        let start = at + 8;
        let end = start.checked_add(len).filter(|&e| e <= bytes.len()).ok_or_else(|| {
            IngestError::Corrupt(format!(
                "element at byte {at} declares {len} bytes, {} remain",
                bytes.len() - start
            ))
        })?;
        out.push(Element {
            kind,
            data: &bytes[start..end],
        });
        at = if kind == MI_COMPRESSED {
            end
        } else {
            (start + len.div_ceil(8) * 8).min(bytes.len())
        };
    }
    Ok(out)
}

fn numeric(kind: u32, data: &[u8], endian: Endian) -> Option<Vec<f64>> {
    fn conv<const N: usize>(data: &[u8], endian: Endian, f: impl Fn([u8; N]) -> f64) -> Vec<f64> {
        data.chunks_exact(N).map(|c| f(endian.fixed::<N>(c))).collect()
    }
    Some(match kind {
        MI_INT8 => data.iter().map(|&b| f64::from(b as i8)).collect(),
        MI_UINT8 => data.iter().map(|&b| f64::from(b)).collect(),
        MI_INT16 => conv::<2>(data, endian, |b| f64::from(i16::from_le_bytes(b))),
        MI_UINT16 => conv::<2>(data, endian, |b| f64::from(u16::from_le_bytes(b))),
        MI_INT32 => conv::<4>(data, endian, |b| f64::from(i32::from_le_bytes(b))),
        MI_UINT32 => conv::<4>(data, endian, |b| f64::from(u32::from_le_bytes(b))),
        MI_SINGLE => conv::<4>(data, endian, |b| f64::from(f32::from_le_bytes(b))),
        MI_DOUBLE => conv::<8>(data, endian, f64::from_le_bytes),
        MI_INT64 => conv::<8>(data, endian, |b| i64::from_le_bytes(b) as f64),
        MI_UINT64 => conv::<8>(data, endian, |b| u64::from_le_bytes(b) as f64),
        _ => return None,
    })
}

fn element_width(kind: u32) -> usize {
    match kind {
        MI_INT8 | MI_UINT8 => 1,
        MI_INT16 | MI_UINT16 => 2,
        MI_INT32 | MI_UINT32 | MI_SINGLE => 4,
        _ => 8,
    }
}

fn parse_matrix(data: &[u8], endian: Endian) -> Result<Option<MatVariable>, IngestError> {
    let subs = elements(data, endian)?;
    if subs.len() < 3 {
        return Err(IngestError::Corrupt(
            "matrix element missing flags, dims or name".into(),
        ));
    }
    let flags = &subs[0];
    if flags.kind != MI_UINT32 || flags.data.len() < 8 {
        return Err(IngestError::Corrupt("malformed array flags".into()));
    }
    let word = endian.u32(flags.data);
    let class = (word & 0xff) as u8;

    let dims_el = &subs[1];
    if dims_el.kind != MI_INT32 || dims_el.data.len() % 4 != 0 {
        return Err(IngestError::Corrupt("malformed dimensions".into()));
    }
    let dims: Vec<usize> = dims_el
        .data
        .chunks_exact(4)
        .map(|c| endian.u32(c) as i32)
        .map(|d| d.max(0) as usize)
        .collect();

    let name_el = &subs[2];
    let name = String::from_utf8_lossy(name_el.data).trim_end_matches('\0').to_string();

    if class != MX_DOUBLE_CLASS {
        log::warn!("skipping MAT variable '{name}': unsupported matrix class {class}");
        return Ok(None);
    }
    if word & FLAG_COMPLEX != 0 {
        log::warn!("skipping MAT variable '{name}': complex data");
        return Ok(None);
    }
    let count: usize = dims.iter().product();
    if count == 0 {
        log::warn!("skipping MAT variable '{name}': empty matrix");
        return Ok(None);
    }
    let real = subs
        .get(3)
        .ok_or_else(|| IngestError::Corrupt(format!("variable '{name}' has no data")))?;
    let values = numeric(real.kind, real.data, endian)
        .ok_or_else(|| IngestError::Corrupt(format!("variable '{name}' uses data type {}", real.kind)))?;
    if real.data.len() != count * element_width(real.kind) || values.len() != count {
        return Err(IngestError::Corrupt(format!(
            "variable '{name}': dims {dims:?} need {count} values, found {}",
            values.len()
        )));
    }
    Ok(Some(MatVariable {
        name,
        dims,
        data: values,
    }))
}

fn collect(bytes: &[u8], endian: Endian, out: &mut Vec<MatVariable>) -> Result<(), IngestError> {
    for el in elements(bytes, endian)? {
        match el.kind {
            MI_MATRIX => {
                if let Some(var) = parse_matrix(el.data, endian)? {
                    out.push(var);
                }
            }
            MI_COMPRESSED => {
                let mut inflated = Vec::new();
                ZlibDecoder::new(el.data)
                    .read_to_end(&mut inflated)
                    .map_err(|e| IngestError::Corrupt(format!("bad compressed element: {e}")))?;
                collect(&inflated, endian, out)?;
            }
            other => log::warn!("skipping top-level MAT element of type {other}"),
        }
    }
    Ok(())
}

/// Parses a MAT v5 file and returns its real double matrices in file order.
pub fn read_mat(bytes: &[u8]) -> Result<Vec<MatVariable>, IngestError> {
    if bytes.len() < HEADER_LEN {
        return Err(IngestError::UnsupportedContainer(format!(
            "{} bytes is shorter than the 128-byte header",
            bytes.len()
        )));
    }
    let endian = match &bytes[126..128] {
        b"IM" => Endian::Little,
        b"MI" => Endian::Big,
        other => {
            return Err(IngestError::UnsupportedContainer(format!(
                "endian indicator {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let version = endian.u16(&bytes[124..126]);
    if version != 0x0100 {
        return Err(IngestError::UnsupportedContainer(format!("version 0x{version:04x}")));
    }
    let mut vars = Vec::new();
    collect(&bytes[HEADER_LEN..], endian, &mut vars)?;
    Ok(vars)
}

/// The drive-end acceleration channel (`*_DE_time`) of a CWRU file.
pub fn drive_end_channel(vars: &[MatVariable]) -> Option<&MatVariable> {
    vars.iter().find(|v| v.name.ends_with("_DE_time"))
}
