//! Little-endian binary weight file:
//!
//! ```text
//! "PVW1" | u32 version | u32 C | C × (u32 len, UTF-8 label)
//! u32 input_size | u32 layer count
//! per layer: u32 len, UTF-8 name | u32 rank | rank × u32 dim | f32 × prod(dims)
//! ```

use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PVW1";
pub const VERSION: u32 = 1;

/// Upper bound on any single length field, to reject garbage before allocating.
const MAX_LEN: usize = 1 << 28;

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl Layer {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let name = name.into();
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "layer {name}: shape {shape:?} holds {n} values, got {}",
                data.len()
            )));
        }
        Ok(Layer { name, shape, data })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub labels: Vec<String>,
    pub input_size: usize,
    pub layers: Vec<Layer>,
}

impl Checkpoint {
    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION as usize)?;
        put_u32(&mut out, self.labels.len())?;
        for label in &self.labels {
            put_str(&mut out, label)?;
        }
        put_u32(&mut out, self.input_size)?;
        put_u32(&mut out, self.layers.len())?;
        for layer in &self.layers {
            put_str(&mut out, &layer.name)?;
            put_u32(&mut out, layer.shape.len())?;
            for &d in &layer.shape {
                put_u32(&mut out, d)?;
            }
            for v in &layer.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(corrupt("bad magic, not a weight file"));
        }
        let version = r.u32()?;
        if version != VERSION as usize {
            return Err(corrupt(format!("unsupported version {version}")));
        }
        let c = r.len()?;
        let labels = (0..c).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
        let input_size = r.u32()?;
        let count = r.len()?;
        let mut layers = Vec::new();
        for _ in 0..count {
            let name = r.string()?;
            let rank = r.len()?;
            let shape = (0..rank).map(|_| r.len()).collect::<Result<Vec<_>>>()?;
            let n = shape
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .filter(|&n| n <= MAX_LEN)
                .ok_or_else(|| corrupt(format!("layer {name}: oversized shape {shape:?}")))?;
            let raw = r.take(n.checked_mul(4).ok_or_else(|| corrupt("overflow"))?)?;
            let data = raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            layers.push(Layer { name, shape, data });
        }
        if r.pos != bytes.len() {
            return Err(corrupt(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Checkpoint {
            labels,
            input_size,
            layers,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::CorruptCheckpoint(m) => Error::CorruptCheckpoint(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptCheckpoint(msg.into())
}

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::InvalidArgument(format!("{v} does not fit in u32")))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn put_str(out: &mut Vec<u8>, s: &str) -> Result<()> {
    put_u32(out, s.len())?;
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| corrupt(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn len(&mut self) -> Result<usize> {
        let n = self.u32()?;
        if n > MAX_LEN {
            return Err(corrupt(format!("implausible length {n} at byte {}", self.pos - 4)));
        }
        Ok(n)
    }

    fn string(&mut self) -> Result<String> {
        let n = self.len()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| corrupt("label or name is not UTF-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            labels: vec!["oak".into(), "pinus élliottii".into()],
            input_size: 16,
            layers: vec![
                Layer::new("a", vec![2, 3], vec![1.0, -2.5, 3.0, 0.0, f32::MIN_POSITIVE, 7.0]).unwrap(),
                Layer::new("b", vec![1], vec![0.5]).unwrap(),
            ],
        }
    }

    #[test]
    fn byte_layout() {
        let bytes = sample().to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"PVW1");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &3u32.to_le_bytes());
        assert_eq!(&bytes[16..19], b"oak");
        // header, labels, input size, count, then two layers
        let label2 = "pinus élliottii".len();
        let expected = 12 + (4 + 3) + (4 + label2) + 8 + (4 + 1 + 4 + 8 + 24) + (4 + 1 + 4 + 4 + 4);
        assert_eq!(bytes.len(), expected);
        assert_eq!(&bytes[bytes.len() - 4..], &0.5f32.to_le_bytes());
    }

    #[test]
    fn round_trip() {
        let ck = sample();
        assert_eq!(Checkpoint::from_bytes(&ck.to_bytes().unwrap()).unwrap(), ck);
    }

    #[test]
    fn every_truncation_is_an_error() {
        let bytes = sample().to_bytes().unwrap();
        for cut in 0..bytes.len() {
            assert!(
                matches!(Checkpoint::from_bytes(&bytes[..cut]), Err(Error::CorruptCheckpoint(_))),
                "cut {cut}"
            );
        }
    }

    #[test]
    fn rejects_magic_version_and_trailing_bytes() {
        let mut bytes = sample().to_bytes().unwrap();
        bytes.push(0);
        assert!(Checkpoint::from_bytes(&bytes).is_err());
        let mut bytes = sample().to_bytes().unwrap();
        bytes[4] = 2;
        assert!(Checkpoint::from_bytes(&bytes).is_err());
        let mut bytes = sample().to_bytes().unwrap();
        bytes[0] = b'X';
        assert!(Checkpoint::from_bytes(&bytes).is_err());
    }

    #[test]
    fn huge_declared_length_does_not_allocate() {
        let mut bytes = b"PVW1".to_vec();
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(Error::CorruptCheckpoint(_))));
    }

    #[test]
    fn layer_shape_must_match_data() {
        assert!(Layer::new("x", vec![2, 2], vec![0.0; 3]).is_err());
    }
}
