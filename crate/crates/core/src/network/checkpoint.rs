//! `NETC` network checkpoints.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic        b"NETC"
//! version      u32     (= 1)
//! layers       u32
//! cells        u32     per direction
//! input_dim    u32
//! alphabet     u32     K (softmax has K+1 outputs)
//! params       f64 × N in declaration order (see `Network::tensors`)
//! ```
//!
//! Nothing may follow the parameters.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use super::{Architecture, Network};
use crate::error::{Error, Result};
use crate::io_util::{atomic_write, decode_err, read_u32};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"NETC";
pub const CHECKPOINT_VERSION: u32 = 1;
const KIND: &str = "checkpoint";

pub fn write_checkpoint<W: Write>(mut w: W, net: &Network) -> Result<()> {
    let a = net.architecture();
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    for v in [a.layers, a.cells, a.input_dim, a.alphabet_size] {
        let v = u32::try_from(v).map_err(|_| Error::format(KIND, "dimension exceeds u32"))?;
        w.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(net.num_params() * 8);
    for (_, t) in net.tensors() {
        for v in t {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Network> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(decode_err(KIND, "magic"))?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::format(KIND, "bad magic"));
    }
    let version = read_u32(&mut r).map_err(decode_err(KIND, "version"))?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::format(KIND, format!("unsupported version {version}")));
    }
    let mut dims = [0usize; 4];
    for (d, what) in dims.iter_mut().zip(["layer count", "cell count", "input dimension", "alphabet size"]) {
        *d = read_u32(&mut r).map_err(decode_err(KIND, what))? as usize;
    }
    let arch = Architecture {
        layers: dims[0],
        cells: dims[1],
        input_dim: dims[2],
        alphabet_size: dims[3],
    };
    arch.validate().map_err(|e| Error::format(KIND, e.to_string()))?;
    let count = arch
        .num_params()
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::format(KIND, "parameter count overflows"))?;
    // Read what is actually there before allocating a network of the claimed size.
    let mut raw = Vec::new();
    (&mut r).take(count as u64).read_to_end(&mut raw)?;
    if raw.len() != count {
        return Err(Error::format(KIND, format!("truncated parameters: {} of {count} bytes", raw.len())));
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::format(KIND, "trailing bytes after parameters"));
    }
    let mut net = Network::zeros(&arch)?;
    let mut values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    for (_, t) in net.tensors_mut() {
        for v in t.iter_mut() {
            *v = values.next().expect("size checked above");
        }
    }
    Ok(net)
}

pub fn save_checkpoint(path: &Path, net: &Network) -> Result<()> {
    atomic_write(path, |f| write_checkpoint(std::io::BufWriter::new(f), net))
}

pub fn load_checkpoint(path: &Path) -> Result<Network> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_network, ForgetBiasInit};

    fn net() -> Network {
        let arch = Architecture { input_dim: 3, layers: 2, cells: 2, alphabet_size: 2 };
        init_network(&arch, 9, ForgetBiasInit::Ones).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let n = net();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &n).unwrap();
        assert_eq!(buf.len(), 24 + 8 * n.num_params());
        let back = read_checkpoint(&buf[..]).unwrap();
        assert_eq!(back.fingerprint(), n.fingerprint());
    }

    #[test]
    fn truncation_and_trailing_bytes_fail() {
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &net()).unwrap();
        for cut in [0, 3, 10, 23, 24, buf.len() - 1] {
            assert!(matches!(read_checkpoint(&buf[..cut]), Err(Error::Format { .. })), "cut {cut}");
        }
        buf.push(0);
        assert!(matches!(read_checkpoint(&buf[..]), Err(Error::Format { .. })));
    }

    #[test]
    fn huge_claimed_size_does_not_allocate() {
        let mut buf = b"NETC".to_vec();
        for v in [1u32, 4, u32::MAX, u32::MAX, 3] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        assert!(read_checkpoint(&buf[..]).is_err());
    }
}
