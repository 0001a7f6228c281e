//! Named-tensor container (`PPSW`) used for weights and mel files.
//!
//! Little-endian layout: magic `PPSW`, version `u32`, tensor count `u32`,
//! then per tensor (sorted by name): name length `u16`, UTF-8 name, rank
//! `u8`, each dim as `u32`, row-major `f32` data. A mel file holds a single
//! tensor `mel` of shape `[F, 80]` followed by a `u32` trailer with the frame
//! period in microseconds.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::types::MelSpectrogram;
use super::weights::ModelWeights;
use crate::nn::Tensor;
use crate::{Error, Result};

pub const WEIGHTS_MAGIC: &[u8; 4] = b"PPSW";
pub const WEIGHTS_VERSION: u32 = 1;
pub const MEL_TENSOR: &str = "mel";

fn bad(what: &'static str, reason: impl Into<String>) -> Error {
    Error::Format {
        what,
        reason: reason.into(),
    }
}

fn encode(tensors: &BTreeMap<String, Tensor>) -> Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(16 + tensors.values().map(|t| 4 * t.len() + 64).sum::<usize>());
    buf.extend_from_slice(WEIGHTS_MAGIC);
    buf.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
    buf.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (name, t) in tensors {
        let name_len: u16 = name
            .len()
            .try_into()
            .map_err(|_| Error::InvalidArgument(format!("tensor name too long: {name}")))?;
        buf.extend_from_slice(&name_len.to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
        buf.push(t.rank() as u8);
        for &d in t.shape() {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in t.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(buf)
}

fn decode<'a>(what: &'static str, data: &'a [u8]) -> Result<(BTreeMap<String, Tensor>, &'a [u8])> {
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&'a [u8]> {
        if data.len() - pos < n {
            return Err(bad(what, "truncated file"));
        }
        let s = &data[pos..pos + n];
        pos += n;
        Ok(s)
    };
    if take(4)? != WEIGHTS_MAGIC {
        return Err(bad(what, "bad magic"));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != WEIGHTS_VERSION {
        return Err(bad(what, format!("unsupported version {version}")));
    }
    let count = u32::from_le_bytes(take(4)?.try_into().unwrap());
    let mut tensors = BTreeMap::new();
    for _ in 0..count {
        let name_len = u16::from_le_bytes(take(2)?.try_into().unwrap()) as usize;
        let name = std::str::from_utf8(take(name_len)?)
            .map_err(|_| bad(what, "tensor name is not UTF-8"))?
            .to_string();
        let rank = take(1)?[0] as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize);
        }
        let n = shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        let n = n
            .filter(|&n| n.checked_mul(4).is_some_and(|b| b <= data.len()))
            .ok_or_else(|| bad(what, format!("{name}: implausible shape {shape:?}")))?;
        let raw = take(4 * n)?;
        let values = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let t = Tensor::new(shape, values).map_err(|e| bad(what, format!("{name}: {e}")))?;
        if tensors.insert(name.clone(), t).is_some() {
            return Err(bad(what, format!("duplicate tensor {name}")));
        }
    }
    Ok((tensors, &data[pos..]))
}

pub fn write_tensors<W: Write>(tensors: &BTreeMap<String, Tensor>, mut out: W) -> Result<()> {
    out.write_all(&encode(tensors)?)?;
    Ok(())
}

pub fn read_tensors<R: Read>(mut input: R) -> Result<BTreeMap<String, Tensor>> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    let (tensors, rest) = decode("tensor container", &data)?;
    if !rest.is_empty() {
        return Err(bad("tensor container", "trailing bytes"));
    }
    Ok(tensors)
}

pub fn write_weights<W: Write>(weights: &ModelWeights, out: W) -> Result<()> {
    write_tensors(weights.tensors(), out)
}

/// Reads and validates a weight file against the manifest.
pub fn read_weights<R: Read>(input: R) -> Result<ModelWeights> {
    ModelWeights::from_tensors(read_tensors(input)?)
}

pub fn write_mel<W: Write>(mel: &MelSpectrogram, mut out: W) -> Result<()> {
    let mut map = BTreeMap::new();
    map.insert(MEL_TENSOR.to_string(), mel.frames().clone());
    let mut buf = encode(&map)?;
    buf.extend_from_slice(&mel.frame_period_us.to_le_bytes());
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_mel<R: Read>(mut input: R) -> Result<MelSpectrogram> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    let (mut tensors, rest) = decode("mel", &data)?;
    if tensors.len() != 1 {
        return Err(bad("mel", format!("expected exactly one tensor, found {}", tensors.len())));
    }
    let frames = tensors
        .remove(MEL_TENSOR)
        .ok_or_else(|| bad("mel", "tensor must be named \"mel\""))?;
    let period: [u8; 4] = rest
        .try_into()
        .map_err(|_| bad("mel", "missing or oversized frame-period trailer"))?;
    MelSpectrogram::with_period(frames, u32::from_le_bytes(period))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustic::ModelConfig;
    use proptest::prelude::*;

    #[test]
    fn weights_round_trip_and_validate() {
        let w = ModelWeights::generate(ModelConfig::small(9), 5);
        let mut buf = Vec::new();
        write_weights(&w, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"PPSW");
        assert_eq!(read_weights(&buf[..]).unwrap(), w);
        assert!(read_weights(&buf[..buf.len() - 3]).is_err());
    }

    #[test]
    fn mel_layout() {
        let mel = MelSpectrogram::synthetic(3, 1);
        let mut buf = Vec::new();
        write_mel(&mel, &mut buf).unwrap();
        // header 12 + name 2+3 + rank 1 + dims 8 + data + trailer 4
        assert_eq!(buf.len(), 12 + 5 + 1 + 8 + 3 * 80 * 4 + 4);
        assert_eq!(&buf[buf.len() - 4..], &12_500u32.to_le_bytes());
        assert_eq!(read_mel(&buf[..]).unwrap(), mel);
        assert!(read_mel(&buf[..buf.len() - 4]).is_err());
    }

    #[test]
    fn mel_rejects_wrong_width() {
        let mut map = BTreeMap::new();
        map.insert("mel".to_string(), Tensor::zeros(&[2, 79]));
        let mut buf = encode(&map).unwrap();
        buf.extend_from_slice(&12_500u32.to_le_bytes());
        assert!(read_mel(&buf[..]).is_err());
    }

    proptest! {
        #[test]
        fn container_round_trip(entries in proptest::collection::btree_map(
            "[a-z._0-9]{1,20}",
            (1usize..4, 1usize..5).prop_flat_map(|(r, c)| proptest::collection::vec(-1e3f32..1e3, r * c).prop_map(move |v| (r, c, v))),
            0..6)) {
            let tensors: BTreeMap<String, Tensor> = entries
                .into_iter()
                .map(|(k, (r, c, v))| (k, Tensor::new(vec![r, c], v).unwrap()))
                .collect();
            let mut buf = Vec::new();
            write_tensors(&tensors, &mut buf).unwrap();
            prop_assert_eq!(read_tensors(&buf[..]).unwrap(), tensors);
        }
    }
}
