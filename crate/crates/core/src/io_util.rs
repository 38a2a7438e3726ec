//! Little-endian binary helpers and atomic file writes.

use std::fs::File;
use std::io::{self, ErrorKind, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Longest id string accepted from a binary file.
pub const MAX_STRING_LEN: u32 = 4096;

pub fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_string<R: Read>(r: &mut R, len: u32) -> io::Result<String> {
    if len > MAX_STRING_LEN {
        return Err(io::Error::new(ErrorKind::InvalidData, format!("string length {len} exceeds {MAX_STRING_LEN}")));
    }
    let mut b = vec![0u8; len as usize];
    r.read_exact(&mut b)?;
    String::from_utf8(b).map_err(|e| io::Error::new(ErrorKind::InvalidData, e))
}

pub fn write_string<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

/// Fills `buf`, returning `false` on a clean EOF before the first byte.
pub fn read_exact_or_eof<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => return Err(ErrorKind::UnexpectedEof.into()),
            Ok(n) => filled += n,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// Maps a low-level read failure onto a `Format` error naming the field.
pub fn decode_err(kind: &'static str, what: &'static str) -> impl Fn(io::Error) -> Error {
    move |e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::format(kind, format!("truncated {what}")),
        ErrorKind::InvalidData => Error::format(kind, format!("invalid {what}: {e}")),
        _ => Error::Io(e),
    }
}

/// Writes to a sibling temp file and renames it into place.
pub fn atomic_write(path: &Path, write: impl FnOnce(&mut File) -> Result<()>) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(io::Error::new(ErrorKind::InvalidInput, "path has no file name")))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let res = File::create(&tmp).map_err(Error::from).and_then(|mut f| {
        write(&mut f)?;
        f.sync_all()?;
        Ok(())
    });
    match res {
        Ok(()) => {
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}

pub fn atomic_write_str(path: &Path, contents: &str) -> Result<()> {
    atomic_write(path, |f| Ok(f.write_all(contents.as_bytes())?))
}
