//! `FARC` feature archives.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic        b"FARC"
//! version      u32            (= 1)
//! dim          u32
//! frame_period f64            milliseconds
//! warp_factor  f64            provenance shared by every record
//! hop_ms       f64
//! stacked      u8
//! records...   until EOF:
//!   utt_len u32, utt_id utf-8
//!   spk_len u32, spk_id utf-8
//!   frames  u32
//!   frames × dim f32, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{FeatureMatrix, Provenance};
use crate::error::{Error, Result};
use crate::io_util::{atomic_write, decode_err, read_exact_or_eof, read_f64, read_string, read_u32, write_string};

pub const ARCHIVE_MAGIC: &[u8; 4] = b"FARC";
pub const ARCHIVE_VERSION: u32 = 1;
const KIND: &str = "feature archive";

pub fn write_archive<W: Write>(mut w: W, features: &[FeatureMatrix]) -> Result<()> {
    let first = features
        .first()
        .ok_or_else(|| Error::format(KIND, "cannot write an empty archive"))?;
    w.write_all(ARCHIVE_MAGIC)?;
    w.write_all(&ARCHIVE_VERSION.to_le_bytes())?;
    w.write_all(&(first.dim() as u32).to_le_bytes())?;
    w.write_all(&first.frame_period_ms.to_le_bytes())?;
    w.write_all(&first.provenance.warp_factor.to_le_bytes())?;
    w.write_all(&first.provenance.hop_ms.to_le_bytes())?;
    w.write_all(&[first.provenance.stacked as u8])?;
    for fm in features {
        if fm.dim() != first.dim() || fm.frame_period_ms != first.frame_period_ms {
            return Err(Error::format(
                KIND,
                format!("utterance `{}` does not share the archive's dim/frame period", fm.utterance_id),
            ));
        }
        write_string(&mut w, &fm.utterance_id)?;
        write_string(&mut w, &fm.speaker_id)?;
        w.write_all(&(fm.frames() as u32).to_le_bytes())?;
        for &v in fm.data() {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_archive<R: Read>(mut r: R) -> Result<Vec<FeatureMatrix>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(decode_err(KIND, "magic"))?;
    if &magic != ARCHIVE_MAGIC {
        return Err(Error::format(KIND, "bad magic"));
    }
    let version = read_u32(&mut r).map_err(decode_err(KIND, "version"))?;
    if version != ARCHIVE_VERSION {
        return Err(Error::format(KIND, format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r).map_err(decode_err(KIND, "dim"))? as usize;
    if dim == 0 {
        return Err(Error::format(KIND, "zero feature dimension"));
    }
    let frame_period_ms = read_f64(&mut r).map_err(decode_err(KIND, "frame period"))?;
    let warp_factor = read_f64(&mut r).map_err(decode_err(KIND, "warp factor"))?;
    let hop_ms = read_f64(&mut r).map_err(decode_err(KIND, "hop"))?;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag).map_err(decode_err(KIND, "stacked flag"))?;
    let provenance = Provenance {
        warp_factor,
        hop_ms,
        stacked: match flag[0] {
            0 => false,
            1 => true,
            b => return Err(Error::format(KIND, format!("bad stacked flag {b}"))),
        },
    };

    let mut out = Vec::new();
    loop {
        let mut len = [0u8; 4];
        if !read_exact_or_eof(&mut r, &mut len).map_err(decode_err(KIND, "utterance id"))? {
            break;
        }
        let utt = read_string(&mut r, u32::from_le_bytes(len)).map_err(decode_err(KIND, "utterance id"))?;
        let spk_len = read_u32(&mut r).map_err(decode_err(KIND, "speaker id"))?;
        let spk = read_string(&mut r, spk_len).map_err(decode_err(KIND, "speaker id"))?;
        let frames = read_u32(&mut r).map_err(decode_err(KIND, "frame count"))? as usize;
        if frames == 0 {
            return Err(Error::format(KIND, format!("utterance `{utt}` has no frames")));
        }
        let bytes = frames
            .checked_mul(dim)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::format(KIND, "record size overflows"))?;
        let mut raw = Vec::new();
        (&mut r).take(bytes as u64).read_to_end(&mut raw)?;
        if raw.len() != bytes {
            return Err(Error::format(KIND, format!("utterance `{utt}` is truncated")));
        }
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        out.push(FeatureMatrix::new(data, dim, frame_period_ms, utt, spk, provenance)?);
    }
    Ok(out)
}

pub fn write_archive_file(path: impl AsRef<Path>, features: &[FeatureMatrix]) -> Result<()> {
    atomic_write(path.as_ref(), |f| write_archive(BufWriter::new(f), features))
}

pub fn read_archive_file(path: impl AsRef<Path>) -> Result<Vec<FeatureMatrix>> {
    read_archive(BufReader::new(File::open(path)?))
}
