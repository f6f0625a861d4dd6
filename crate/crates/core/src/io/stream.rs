use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{ModelSpec, SampleRecord};

pub const SAMPLES_FORMAT: &str = "monord-samples";
pub const SAMPLES_VERSION: u32 = 1;

/// First line of a sample stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamHeader {
    pub format: String,
    pub version: u32,
    pub model: ModelSpec,
    pub chains: usize,
    /// Locations behind each record's `grid_survival` values.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub record_grid: Vec<Vec<f64>>,
}

impl StreamHeader {
    pub fn new(model: ModelSpec, chains: usize, record_grid: Vec<Vec<f64>>) -> Self {
        Self { format: SAMPLES_FORMAT.into(), version: SAMPLES_VERSION, model, chains, record_grid }
    }
}

/// Newline-delimited JSON: a header line, then one record per line.
pub struct SampleWriter<W: Write> {
    out: W,
}

impl<W: Write> SampleWriter<W> {
    pub fn new(mut out: W, header: &StreamHeader) -> Result<Self> {
        write_line(&mut out, header)?;
        Ok(Self { out })
    }

    /// Writer for a stream whose header is written elsewhere.
    pub fn headless(out: W) -> Self {
        Self { out }
    }

    pub fn write(&mut self, record: &SampleRecord) -> Result<()> {
        write_line(&mut self.out, record)
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush().map_err(|e| Error::Format(format!("sample stream: {e}")))?;
        Ok(self.out)
    }
}

fn write_line<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value).map_err(|e| Error::Format(format!("sample stream: {e}")))?;
    out.write_all(b"\n").map_err(|e| Error::Format(format!("sample stream: {e}")))
}

/// Iterates over the records of a stream after checking its header.
pub struct SampleReader<R: BufRead> {
    lines: std::io::Lines<R>,
    header: StreamHeader,
    line: usize,
}

impl<R: BufRead> SampleReader<R> {
    pub fn new(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Format("empty sample stream".into()))?
            .map_err(|e| Error::Format(format!("sample stream: {e}")))?;
        let header: StreamHeader =
            serde_json::from_str(&first).map_err(|e| Error::Format(format!("sample stream header: {e}")))?;
        if header.format != SAMPLES_FORMAT {
            return Err(Error::Format(format!("not a sample stream (format '{}')", header.format)));
        }
        if header.version > SAMPLES_VERSION {
            return Err(Error::Format(format!("sample stream version {} is newer than supported", header.version)));
        }
        Ok(Self { lines, header, line: 1 })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }
}

impl<R: BufRead> Iterator for SampleReader<R> {
    type Item = Result<SampleRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line += 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::Format(format!("sample stream: {e}")))),
            };
            if line.trim().is_empty() {
                continue;
            }
            let n = self.line;
            return Some(
                serde_json::from_str(&line).map_err(|e| Error::Format(format!("sample stream line {n}: {e}"))),
            );
        }
    }
}

/// Reads a whole stream from disk.
pub fn read_samples(path: &Path) -> Result<(StreamHeader, Vec<SampleRecord>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = SampleReader::new(BufReader::new(file))?;
    let header = reader.header().clone();
    let records = reader.collect::<Result<Vec<_>>>()?;
    Ok((header, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpp::{SubspaceId, SupportPoint};

    #[test]
    fn stream_round_trips() {
        let header = StreamHeader::new(ModelSpec::nonparametric(3, 2), 1, vec![vec![0.5, 0.5]]);
        let rec = SampleRecord {
            chain: 0,
            iteration: 40,
            log_likelihood: -12.25,
            counts: vec![0, 0, 1],
            intensities: vec![0.1, 0.2, 1.0 / 3.0],
            theta: None,
            origin: vec![1.0, 0.4, 0.1],
            points: vec![SupportPoint {
                subspace: SubspaceId::from_mask(3).unwrap(),
                location: vec![0.3, 0.7],
                marks: vec![1.0, 0.5, 0.2],
            }],
            grid_survival: vec![0.5, 0.2],
        };
        let mut w = SampleWriter::new(Vec::new(), &header).unwrap();
        w.write(&rec).unwrap();
        w.write(&rec).unwrap();
        let bytes = w.finish().unwrap();
        let r = SampleReader::new(bytes.as_slice()).unwrap();
        assert_eq!(r.header(), &header);
        let back: Vec<_> = r.collect::<Result<_>>().unwrap();
        assert_eq!(back, vec![rec.clone(), rec]);
    }

    #[test]
    fn foreign_streams_are_rejected() {
        assert!(SampleReader::new(&b""[..]).is_err());
        assert!(SampleReader::new(&b"{\"format\":\"other\"}\n"[..]).is_err());
    }
}
