//! Columnar binary format for codeword blocks.
//!
//! Layout: a 16-byte header of four little-endian `u32` (magic, version, n,
//! number of terminals) followed by one column per terminal holding `n`
//! complex samples as `(re, im)` little-endian `f64` pairs.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::CodewordBlock;

pub const MAGIC: u32 = u32::from_le_bytes(*b"TAMC");
pub const VERSION: u32 = 1;

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: "<stream>".into(),
        source: e,
    }
}

pub fn write_codewords<W: Write>(block: &CodewordBlock, mut out: W) -> Result<()> {
    let n = u32::try_from(block.n()).map_err(|_| Error::invalid("block too long for the header"))?;
    let t = block.terminals() as u32;
    for word in [MAGIC, VERSION, n, t] {
        out.write_all(&word.to_le_bytes()).map_err(io_err)?;
    }
    for col in block.symbols() {
        for z in col {
            out.write_all(&z.re.to_le_bytes()).map_err(io_err)?;
            out.write_all(&z.im.to_le_bytes()).map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn read_codewords<R: Read>(mut input: R) -> Result<CodewordBlock> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header).map_err(io_err)?;
    let word = |i: usize| u32::from_le_bytes(header[4 * i..4 * i + 4].try_into().unwrap());
    if word(0) != MAGIC {
        return Err(Error::invalid("not a codeword file (bad magic)"));
    }
    if word(1) != VERSION {
        return Err(Error::invalid(format!("unsupported codeword file version {}", word(1))));
    }
    let (n, t) = (word(2) as usize, word(3) as usize);
    let mut buf = [0u8; 16];
    let mut cols = Vec::with_capacity(t);
    for _ in 0..t {
        let mut col = Vec::with_capacity(n);
        for _ in 0..n {
            input.read_exact(&mut buf).map_err(io_err)?;
            let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
            col.push(Complex64::new(re, im));
        }
        cols.push(col);
    }
    CodewordBlock::new(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_header() {
        let block = CodewordBlock::new(vec![
            vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.25)],
            vec![Complex64::new(-3.0, 0.0), Complex64::new(1e-300, 7.0)],
            vec![Complex64::new(0.0, 0.0); 2],
        ])
        .unwrap();
        let mut bytes = Vec::new();
        write_codewords(&block, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 16 + 3 * 2 * 16);
        assert_eq!(&bytes[..4], b"TAMC");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 3);
        assert_eq!(read_codewords(bytes.as_slice()).unwrap(), block);
        bytes[0] = b'X';
        assert!(read_codewords(bytes.as_slice()).is_err());
    }
}
