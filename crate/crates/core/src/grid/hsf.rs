//! `HSF1` field files: a short text header followed by little-endian `f64` samples.
//!
//! ```text
//! hsf 1
//! dim 2
//! samples 129 129
//! spacing 0.0625 0.0625
//! center 0 0
//! data binary-le-f64
//! <N_1 * ... * N_n * 8 bytes, row-major>
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{GridSpec, SampledField};
use crate::error::{Error, Result};

const DATA_LINE: &str = "data binary-le-f64";

pub fn write<W: Write>(f: &SampledField, mut out: W) -> Result<()> {
    let spec = f.spec();
    let join = |xs: Vec<String>| xs.join(" ");
    writeln!(out, "hsf 1")?;
    writeln!(out, "dim {}", spec.dim())?;
    writeln!(out, "samples {}", join(spec.samples().iter().map(|n| n.to_string()).collect()))?;
    writeln!(out, "spacing {}", join(spec.spacing().iter().map(|h| h.to_string()).collect()))?;
    writeln!(out, "center {}", join(spec.center().iter().map(|c| c.to_string()).collect()))?;
    writeln!(out, "{DATA_LINE}")?;
    let mut bytes = Vec::with_capacity(8 * f.len());
    for v in f.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&bytes)?;
    Ok(())
}

pub fn to_bytes(f: &SampledField) -> Vec<u8> {
    let mut buf = Vec::new();
    write(f, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub fn from_bytes(bytes: &[u8]) -> Result<SampledField> {
    let mut rest = bytes;
    let mut header = Vec::new();
    loop {
        let nl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("header ends before the data line".into()))?;
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| Error::Format("header is not UTF-8".into()))?
            .trim_end_matches('\r')
            .to_string();
        rest = &rest[nl + 1..];
        if line == DATA_LINE {
            break;
        }
        header.push(line);
    }

    let mut dim = None;
    let mut samples = None;
    let mut spacing = None;
    let mut center = None;
    let mut version_seen = false;
    for line in &header {
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or("");
        let vals: Vec<&str> = parts.collect();
        match key {
            "hsf" => {
                if vals != ["1"] {
                    return Err(Error::Format(format!("unsupported version line `{line}`")));
                }
                version_seen = true;
            }
            "dim" => dim = Some(parse_list::<usize>(&vals, key)?),
            "samples" => samples = Some(parse_list::<usize>(&vals, key)?),
            "spacing" => spacing = Some(parse_list::<f64>(&vals, key)?),
            "center" => center = Some(parse_list::<f64>(&vals, key)?),
            "" => {}
            other => return Err(Error::Format(format!("unknown header key `{other}`"))),
        }
    }
    if !version_seen {
        return Err(Error::Format("missing `hsf 1` line".into()));
    }
    let missing = |k: &str| Error::Format(format!("missing `{k}` line"));
    let dim = dim.ok_or_else(|| missing("dim"))?;
    if dim.len() != 1 {
        return Err(Error::Format("`dim` takes one value".into()));
    }
    let samples = samples.ok_or_else(|| missing("samples"))?;
    let spacing = spacing.ok_or_else(|| missing("spacing"))?;
    let center = center.ok_or_else(|| missing("center"))?;
    if samples.len() != dim[0] {
        return Err(Error::Format(format!(
            "dim {} but {} sample counts",
            dim[0],
            samples.len()
        )));
    }
    let spec = GridSpec::new(samples, spacing, center)
        .map_err(|e| Error::Format(e.to_string()))?;

    let expected = spec.len() * 8;
    if rest.len() != expected {
        return Err(Error::Format(format!(
            "payload has {} bytes, header implies {expected}",
            rest.len()
        )));
    }
    let values = rest
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    SampledField::new(spec, values).map_err(|e| Error::Format(e.to_string()))
}

pub fn read<R: Read>(mut input: R) -> Result<SampledField> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

pub fn save(f: &SampledField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_bytes(f))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<SampledField> {
    from_bytes(&fs::read(path)?)
}

fn parse_list<T: std::str::FromStr>(vals: &[&str], key: &str) -> Result<Vec<T>> {
    vals.iter()
        .map(|v| {
            v.parse()
                .map_err(|_| Error::Format(format!("bad value `{v}` in `{key}` line")))
        })
        .collect()
}
