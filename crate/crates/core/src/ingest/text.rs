use super::IngestError;
use crate::signal::{RecordMeta, SignalRecord};

/// One real per line, LF or CRLF. The first line may be a non-numeric header;
/// blank lines are ignored.
pub fn read_csv(bytes: &[u8], sample_rate_hz: f64, meta: RecordMeta) -> Result<SignalRecord, IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|e| IngestError::Parse {
        line: 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        message: "invalid UTF-8".into(),
    })?;
    let mut samples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => samples.push(v),
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(IngestError::Parse {
                    line: i + 1,
                    message: format!("'{line}' is not a number ({e})"),
                })
            }
        }
    }
    Ok(SignalRecord::new(samples, sample_rate_hz, meta)?)
}

/// A headerless little-endian f64 stream.
pub fn read_raw_f64le(bytes: &[u8], sample_rate_hz: f64, meta: RecordMeta) -> Result<SignalRecord, IngestError> {
    if !bytes.len().is_multiple_of(8) {
        return Err(IngestError::RawLength(bytes.len()));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(SignalRecord::new(samples, sample_rate_hz, meta)?)
}

pub fn write_raw_f64le(samples: &[f64]) -> Vec<u8> {
    samples.iter().flat_map(|v| v.to_le_bytes()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Condition;

    fn meta() -> RecordMeta {
        RecordMeta::new(1797, Condition::Ball, Some(0.007)).unwrap()
    }

    #[test]
    fn csv_basic() {
        let r = read_csv(b"1.0\n2.0\n", 12_000.0, meta()).unwrap();
        assert_eq!(r.samples, vec![1.0, 2.0]);
        assert_eq!(r.meta, meta());
    }

    #[test]
    fn csv_header_and_crlf() {
        let r = read_csv(b"accel_g\r\n-0.5\r\n\r\n3e-2\r\n", 12_000.0, meta()).unwrap();
        assert_eq!(r.samples, vec![-0.5, 0.03]);
    }

    #[test]
    fn csv_error_names_line() {
        match read_csv(b"1.0\nabc\n", 12_000.0, meta()) {
            Err(IngestError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_csv(b"header\n", 12_000.0, meta()).is_err());
    }

    #[test]
    fn raw_stream() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&0.0f64.to_le_bytes());
        bytes.extend_from_slice(&1.0f64.to_le_bytes());
        assert_eq!(bytes.len(), 16);
        let r = read_raw_f64le(&bytes, 12_000.0, meta()).unwrap();
        assert_eq!(r.samples, vec![0.0, 1.0]);
        assert_eq!(write_raw_f64le(&r.samples), bytes);
        assert!(matches!(
            read_raw_f64le(&bytes[..15], 12_000.0, meta()),
            Err(IngestError::RawLength(15))
        ));
    }
}
