//! Binary model container.
//!
//! Layout (all integers and floats little-endian):
//!
//! | field                     | type            |
//! |---------------------------|-----------------|
//! | magic `b"UQFNET\0\0"`     | 8 bytes         |
//! | format version (= 1)      | u32             |
//! | input_units               | u64             |
//! | hidden_units[0..3]        | 3 x u64         |
//! | output_units              | u64             |
//! | dropout_rate              | f64             |
//! | epochs, batch_size        | 2 x u64         |
//! | learning_rate             | f64             |
//! | adam beta1, beta2, eps    | 3 x f64         |
//! | seed                      | u64             |
//! | layer count (= 4)         | u32             |
//! | per layer: rows, cols     | 2 x u64         |
//! | per layer: weights        | rows*cols x f64 (row-major) |
//! | per layer: bias           | rows x f64      |
//! | SHA-256 of all bytes above| 32 bytes        |
//!
//! Floats are stored as raw IEEE-754 bits, so save/load is lossless.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::config::NetworkConfig;
use super::network::{Layer, Network};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 8] = b"UQFNET\0\0";
pub const MODEL_VERSION: u32 = 1;

pub fn encode_network(net: &Network) -> Vec<u8> {
    let c = &net.config;
    let mut out = Vec::with_capacity(128 + net.param_count() * 8);
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    let u = |v: usize, out: &mut Vec<u8>| out.extend_from_slice(&(v as u64).to_le_bytes());
    u(c.input_units, &mut out);
    for &h in &c.hidden_units {
        u(h, &mut out);
    }
    u(c.output_units, &mut out);
    out.extend_from_slice(&c.dropout_rate.to_le_bytes());
    u(c.epochs, &mut out);
    u(c.batch_size, &mut out);
    for f in [c.learning_rate, c.adam_beta1, c.adam_beta2, c.adam_epsilon] {
        out.extend_from_slice(&f.to_le_bytes());
    }
    out.extend_from_slice(&c.seed.to_le_bytes());
    out.extend_from_slice(&(net.layers.len() as u32).to_le_bytes());
    for l in &net.layers {
        u(l.rows, &mut out);
        u(l.cols, &mut out);
        for w in l.weights.iter().chain(&l.bias) {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::format(
                self.pos as u64,
                format!("truncated while reading {what}"),
            ));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let at = self.pos as u64;
        let v = self.u64(what)?;
        // widths beyond this are certainly corrupt and would overflow allocations
        if v > (1 << 32) {
            return Err(Error::format(at, format!("implausible {what}: {v}")));
        }
        Ok(v as usize)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_bits(self.u64(what)?))
    }
}

pub fn decode_network(buf: &[u8]) -> Result<Network> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8, "magic")? != MODEL_MAGIC {
        return Err(Error::format(0, "not a uqfraud model file (bad magic)"));
    }
    let version = r.u32("version")?;
    if version != MODEL_VERSION {
        return Err(Error::format(
            8,
            format!("unsupported model version {version}"),
        ));
    }
    let input_units = r.usize("input_units")?;
    let hidden_units = [
        r.usize("hidden_units")?,
        r.usize("hidden_units")?,
        r.usize("hidden_units")?,
    ];
    let output_units = r.usize("output_units")?;
    let dropout_rate = r.f64("dropout_rate")?;
    let epochs = r.usize("epochs")?;
    let batch_size = r.usize("batch_size")?;
    let learning_rate = r.f64("learning_rate")?;
    let adam_beta1 = r.f64("adam_beta1")?;
    let adam_beta2 = r.f64("adam_beta2")?;
    let adam_epsilon = r.f64("adam_epsilon")?;
    let seed = r.u64("seed")?;
    let config = NetworkConfig {
        input_units,
        hidden_units,
        output_units,
        dropout_rate,
        epochs,
        batch_size,
        learning_rate,
        adam_beta1,
        adam_beta2,
        adam_epsilon,
        seed,
    };
    config
        .validate()
        .map_err(|e| Error::format(12, format!("header declares an invalid config: {e}")))?;
    let count_at = r.pos as u64;
    let count = r.u32("layer count")? as usize;
    let widths = config.layer_widths();
    if count != widths.len() - 1 {
        return Err(Error::format(
            count_at,
            format!("expected 4 layers, header says {count}"),
        ));
    }
    let mut layers = Vec::with_capacity(count);
    for (i, w) in widths.windows(2).enumerate() {
        let dims_at = r.pos as u64;
        let rows = r.usize("layer rows")?;
        let cols = r.usize("layer cols")?;
        if (rows, cols) != (w[1], w[0]) {
            return Err(Error::format(
                dims_at,
                format!(
                    "layer {i} declared {rows}x{cols}, config implies {}x{}",
                    w[1], w[0]
                ),
            ));
        }
        let mut layer = Layer::zeros(rows, cols);
        for v in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            *v = r.f64("weights")?;
        }
        layers.push(layer);
    }
    let body_end = r.pos;
    let stored = r.take(32, "checksum")?;
    if Sha256::digest(&buf[..body_end]).as_slice() != stored {
        return Err(Error::format(body_end as u64, "checksum mismatch"));
    }
    if r.pos != buf.len() {
        return Err(Error::format(r.pos as u64, "trailing bytes after checksum"));
    }
    Ok(Network { config, layers })
}

pub fn save_network(net: &Network, path: &Path) -> Result<()> {
    std::fs::write(path, encode_network(net)).map_err(|e| Error::io(path, e))
}

pub fn load_network(path: &Path) -> Result<Network> {
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_network(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::network::init_network;

    fn net() -> Network {
        init_network(&NetworkConfig::new(5, [4, 3, 2]), 21).unwrap()
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.uqnn");
        let n = net();
        save_network(&n, &p).unwrap();
        let back = load_network(&p).unwrap();
        assert_eq!(back, n);
        assert_eq!(encode_network(&back), std::fs::read(&p).unwrap());
    }

    #[test]
    fn truncated_file_reports_offset() {
        let bytes = encode_network(&net());
        let cut = &bytes[..bytes.len() - 40];
        match decode_network(cut) {
            Err(Error::Format { offset, .. }) => assert!(offset > 0),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_dims_rejected() {
        let mut bytes = encode_network(&net());
        // header is 8 magic + 4 version; input_units follows
        bytes[12..20].copy_from_slice(&6u64.to_le_bytes());
        assert!(matches!(decode_network(&bytes), Err(Error::Format { .. })));
    }

    #[test]
    fn corrupted_weight_fails_checksum() {
        let mut bytes = encode_network(&net());
        let mid = bytes.len() - 60;
        bytes[mid] ^= 0x40;
        assert!(matches!(decode_network(&bytes), Err(Error::Format { .. })));
    }
}
