//! Codebook container format.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic          "QCBK"
//! version        u16, currently 1
//! flags          u8, bit 0: one shared face section instead of four
//! n_beams        u32    beams per axis N
//! n_y, n_z       u32    elements per face axis
//! buffer_width   u32    synthesis buffer width in grid cells
//! buffer_gain    f64    synthesis buffer target level
//! stage_total    u32    S; sections hold stages 0..=S
//! sections       1 or 4 face sections; each stage s holds 2^s codewords,
//!                each codeword n_y*n_z complex entries as (re f64, im f64)
//! ```
//!
//! The builder always emits a shared section because the four faces carry
//! identical face-relative weights; the reader accepts either form.

use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{stage_count, CodebookSet};
use crate::geometry::UpaConfig;
use crate::{Error, Result};

const MAGIC: [u8; 4] = *b"QCBK";
const VERSION: u16 = 1;
const FLAG_SHARED: u8 = 1;

pub fn save_codebook_set(path: &Path, set: &CodebookSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[FLAG_SHARED])?;
    w.write_all(&(set.n_beams() as u32).to_le_bytes())?;
    w.write_all(&(set.cfg().n_y as u32).to_le_bytes())?;
    w.write_all(&(set.cfg().n_z as u32).to_le_bytes())?;
    w.write_all(&(set.buffer_width() as u32).to_le_bytes())?;
    w.write_all(&set.buffer_gain().to_le_bytes())?;
    let s_total = set.stage_total();
    w.write_all(&(s_total as u32).to_le_bytes())?;
    let book = set.book(crate::geometry::UpaIndex::ALL[0]);
    for s in 0..=s_total {
        for i in 1..=(1usize << s) {
            for c in &book.beam(s, i)?.weights {
                w.write_all(&c.re.to_le_bytes())?;
                w.write_all(&c.im.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_codebook_set(path: &Path) -> Result<CodebookSet> {
    let mut r = BufReader::new(File::open(path)?);
    let corrupt = |what: &str| Error::CodebookFormat(format!("{}: {what}", path.display()));

    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, path)?;
    if magic != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = read_u16(&mut r, path)?;
    if version != VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let flags = read_u8(&mut r, path)?;
    let shared = flags & FLAG_SHARED != 0;
    let n_beams = read_u32(&mut r, path)? as usize;
    let n_y = read_u32(&mut r, path)? as usize;
    let n_z = read_u32(&mut r, path)? as usize;
    let buffer_width = read_u32(&mut r, path)? as usize;
    let buffer_gain = read_f64(&mut r, path)?;
    let stage_total = read_u32(&mut r, path)? as usize;

    if !(2..=1024).contains(&n_beams) || !n_beams.is_power_of_two() {
        return Err(corrupt(&format!("implausible beam count {n_beams}")));
    }
    if stage_total != stage_count(n_beams) {
        return Err(corrupt(&format!(
            "stage count {stage_total} does not match {n_beams} beams per axis"
        )));
    }
    if !(1..=4096).contains(&n_y) || !(1..=4096).contains(&n_z) {
        return Err(corrupt(&format!("implausible array shape {n_y}x{n_z}")));
    }
    if !(0.0..1.0).contains(&buffer_gain) {
        return Err(corrupt(&format!("buffer gain {buffer_gain} outside [0, 1)")));
    }
    let cfg = UpaConfig::new(n_y, n_z)?;

    let sections = if shared { 1 } else { 4 };
    let mut faces: Vec<Vec<Vec<Vec<Complex64>>>> = Vec::with_capacity(4);
    for _ in 0..sections {
        let mut stages = Vec::with_capacity(stage_total + 1);
        for s in 0..=stage_total {
            let mut beams = Vec::with_capacity(1 << s);
            for _ in 0..(1usize << s) {
                let mut weights = Vec::with_capacity(cfg.n_a());
                for _ in 0..cfg.n_a() {
                    let re = read_f64(&mut r, path)?;
                    let im = read_f64(&mut r, path)?;
                    weights.push(Complex64::new(re, im));
                }
                beams.push(weights);
            }
            stages.push(beams);
        }
        faces.push(stages);
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(corrupt("trailing bytes after codeword data"));
    }
    while faces.len() < 4 {
        let first = faces[0].clone();
        faces.push(first);
    }
    CodebookSet::from_stage_weights(cfg, n_beams, buffer_width, buffer_gain, faces)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf).map_err(|_| {
        Error::CodebookFormat(format!("{}: truncated file", path.display()))
    })
}

fn read_u8<R: Read>(r: &mut R, path: &Path) -> Result<u8> {
    let mut b = [0u8; 1];
    read_exact(r, &mut b, path)?;
    Ok(b[0])
}

fn read_u16<R: Read>(r: &mut R, path: &Path) -> Result<u16> {
    let mut b = [0u8; 2];
    read_exact(r, &mut b, path)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, path)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R, path: &Path) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, path)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::build_codebook_set;
    use std::io::Write as _;

    fn tmp(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("qcbk-test-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn round_trip_preserves_everything() {
        let cfg = UpaConfig::new(4, 4).unwrap();
        let set = build_codebook_set(&cfg, 4, 1, 0.5).unwrap();
        let path = tmp("roundtrip.qcbk");
        save_codebook_set(&path, &set).unwrap();
        let loaded = load_codebook_set(&path).unwrap();
        assert_eq!(set, loaded);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let cfg = UpaConfig::new(4, 4).unwrap();
        let set = build_codebook_set(&cfg, 4, 0, 0.5).unwrap();
        let path = tmp("corrupt.qcbk");
        save_codebook_set(&path, &set).unwrap();
        let bytes = std::fs::read(&path).unwrap();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(
            load_codebook_set(&path),
            Err(Error::CodebookFormat(_))
        ));

        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(
            load_codebook_set(&path),
            Err(Error::CodebookFormat(_))
        ));

        let mut extended = bytes.clone();
        extended.push(0);
        std::fs::write(&path, &extended).unwrap();
        assert!(matches!(
            load_codebook_set(&path),
            Err(Error::CodebookFormat(_))
        ));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn rejects_wrong_version() {
        let cfg = UpaConfig::new(4, 4).unwrap();
        let set = build_codebook_set(&cfg, 4, 0, 0.5).unwrap();
        let path = tmp("version.qcbk");
        save_codebook_set(&path, &set).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 9;
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(&bytes).unwrap();
        drop(f);
        let err = load_codebook_set(&path).unwrap_err();
        assert!(err.to_string().contains("version"));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_codebook_set(Path::new("/nonexistent/q.qcbk")).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
