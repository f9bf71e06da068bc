//! Binary cache for count tables.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "PKTB" | version u16 | n_max u64 | k_max u64 | mode u8 | payload
//! ```
//!
//! The payload lists the cells row by row (k outer, m inner). Log-space
//! cells are f64 bit patterns; exact cells are a u32 byte length followed
//! by the little-endian magnitude bytes, so exact files are identical on
//! every platform.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;

use super::table::{check_budget, CountMode, PartitionTable, Storage};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PKTB";
pub const VERSION: u16 = 1;
pub const CACHE_DIR_ENV: &str = "PARASTAT_CACHE_DIR";

pub fn cache_file_name(n_max: u64, k_max: u64, mode: CountMode) -> String {
    let m = match mode {
        CountMode::Exact => "exact",
        CountMode::LogSpace => "log",
    };
    format!("pktb-{m}-{n_max}-{k_max}.bin")
}

pub fn write_table<W: Write>(table: &PartitionTable, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&table.n_max.to_le_bytes())?;
    w.write_all(&table.k_max.to_le_bytes())?;
    w.write_all(&[table.mode.tag()])?;
    match &table.data {
        Storage::Exact(v) => {
            for x in v {
                let bytes = x.to_bytes_le();
                w.write_all(&(bytes.len() as u32).to_le_bytes())?;
                w.write_all(&bytes)?;
            }
        }
        Storage::Log(v) => {
            for x in v {
                w.write_all(&x.to_bits().to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| Error::CacheFormat(format!("truncated file: {e}")))?;
    Ok(b)
}

pub fn read_table<R: Read>(mut r: R) -> Result<PartitionTable> {
    let magic: [u8; 4] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(Error::CacheFormat("bad magic bytes".into()));
    }
    let version = u16::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::CacheFormat(format!("unsupported version {version}")));
    }
    let n_max = u64::from_le_bytes(read_array(&mut r)?);
    let k_max = u64::from_le_bytes(read_array(&mut r)?);
    let mode = match read_array::<1, _>(&mut r)?[0] {
        0 => CountMode::Exact,
        1 => CountMode::LogSpace,
        t => return Err(Error::CacheFormat(format!("unknown mode tag {t}"))),
    };
    check_budget(n_max, k_max, mode).map_err(|e| Error::CacheFormat(e.to_string()))?;
    let cells = ((n_max + 1) * (k_max + 1)) as usize;
    let data = match mode {
        CountMode::Exact => {
            let mut v = Vec::with_capacity(cells);
            for _ in 0..cells {
                let len = u32::from_le_bytes(read_array(&mut r)?) as usize;
                let mut buf = vec![0u8; len];
                r.read_exact(&mut buf).map_err(|e| Error::CacheFormat(format!("truncated file: {e}")))?;
                v.push(BigUint::from_bytes_le(&buf));
            }
            Storage::Exact(v)
        }
        CountMode::LogSpace => {
            let mut v = Vec::with_capacity(cells);
            for _ in 0..cells {
                v.push(f64::from_bits(u64::from_le_bytes(read_array(&mut r)?)));
            }
            Storage::Log(v)
        }
    };
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::CacheFormat("trailing bytes after payload".into()));
    }
    Ok(PartitionTable { n_max, k_max, mode, data })
}

pub fn save(table: &PartitionTable, path: &Path) -> Result<()> {
    let f = fs::File::create(path)?;
    write_table(table, BufWriter::new(f))
}

pub fn load(path: &Path) -> Result<PartitionTable> {
    let f = fs::File::open(path)?;
    read_table(BufReader::new(f))
}

/// Load the table from `dir` if a cached copy exists, otherwise build it
/// and store it there.
pub fn load_or_build(dir: &Path, n_max: u64, k_max: u64, mode: CountMode) -> Result<PartitionTable> {
    let path: PathBuf = dir.join(cache_file_name(n_max, k_max, mode));
    if path.exists() {
        if let Ok(t) = load(&path) {
            return Ok(t);
        }
    }
    let t = PartitionTable::build(n_max, k_max, mode)?;
    fs::create_dir_all(dir)?;
    save(&t, &path)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_both_modes() {
        for mode in [CountMode::Exact, CountMode::LogSpace] {
            let t = PartitionTable::build(40, 30, mode).unwrap();
            let mut buf = Vec::new();
            write_table(&t, &mut buf).unwrap();
            assert_eq!(&buf[..4], b"PKTB");
            let back = read_table(&buf[..]).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn rejects_corruption() {
        let t = PartitionTable::build(10, 10, CountMode::Exact).unwrap();
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_table(&bad[..]), Err(Error::CacheFormat(_))));
        assert!(matches!(read_table(&buf[..buf.len() - 1]), Err(Error::CacheFormat(_))));
    }
}
