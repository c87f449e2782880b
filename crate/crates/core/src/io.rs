//! File formats.
//!
//! Potential files hold one real per line; blank lines and lines starting with
//! `#` are ignored.
//!
//! Matrix dumps are little-endian:
//!
//! ```text
//! offset  size      field
//! 0       8         magic  b"WGNRMAT\0"
//! 8       8         N      u64
//! 16      8         beta   u64 (1 or 2)
//! 24      8·N²      entries, row-major f64            (beta = 1)
//! 24      16·N²     entries, row-major (re, im) f64   (beta = 2)
//! ```

use crate::error::{Error, Result};
use crate::freeconv::DiagonalPotential;
use crate::matrix::{Beta, SymmetricMatrix};
use num_complex::Complex64;
use std::fs;
use std::io::Write;
use std::path::Path;

pub const MATRIX_MAGIC: [u8; 8] = *b"WGNRMAT\0";

pub fn read_potential(path: &Path) -> Result<DiagonalPotential> {
    let text = fs::read_to_string(path)?;
    parse_potential(&text, &path.display().to_string())
}

pub fn parse_potential(text: &str, label: &str) -> Result<DiagonalPotential> {
    let mut v = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let x = line
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("{label}:{}: {e}", lineno + 1)))?;
        v.push(x);
    }
    DiagonalPotential::new(v, label)
}

pub fn write_potential(path: &Path, d: &DiagonalPotential) -> Result<()> {
    let mut s = String::new();
    for x in d.entries() {
        s.push_str(&format!("{x:e}\n"));
    }
    write_atomic(path, s.as_bytes())
}

pub fn encode_matrix(h: &SymmetricMatrix) -> Vec<u8> {
    let n = h.n();
    let mut out = Vec::with_capacity(24 + 16 * n * n);
    out.extend_from_slice(&MATRIX_MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(h.beta().value() as u64).to_le_bytes());
    match (h.real_rows(), h.complex_rows()) {
        (Some(v), _) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        (_, Some(v)) => v.iter().for_each(|x| {
            out.extend_from_slice(&x.re.to_le_bytes());
            out.extend_from_slice(&x.im.to_le_bytes());
        }),
        _ => unreachable!(),
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<SymmetricMatrix> {
    if bytes.len() < 24 || bytes[..8] != MATRIX_MAGIC {
        return Err(Error::Parse("not a matrix dump".into()));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let n = word(8) as usize;
    let beta = Beta::from_value(word(16) as u32)?;
    let width = if beta == Beta::Real { 8 } else { 16 };
    let expected = n.checked_mul(n).and_then(|x| x.checked_mul(width)).and_then(|x| x.checked_add(24));
    if expected != Some(bytes.len()) {
        return Err(Error::Parse(format!("matrix dump has {} bytes, expected {:?}", bytes.len(), expected)));
    }
    let f = |i: usize| f64::from_le_bytes(bytes[24 + 8 * i..32 + 8 * i].try_into().unwrap());
    match beta {
        Beta::Real => SymmetricMatrix::from_real_rows(n, (0..n * n).map(f).collect()),
        Beta::Complex => {
            SymmetricMatrix::from_complex_rows(n, (0..n * n).map(|i| Complex64::new(f(2 * i), f(2 * i + 1))).collect())
        }
    }
}

pub fn write_matrix(path: &Path, h: &SymmetricMatrix) -> Result<()> {
    write_atomic(path, &encode_matrix(h))
}

pub fn read_matrix(path: &Path) -> Result<SymmetricMatrix> {
    decode_matrix(&fs::read(path)?)
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// CSV text with a header row; values use Rust's shortest round-trip formatting.
pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|x| format!("{x:?}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let mut h = SymmetricMatrix::zeros(3, Beta::Complex);
        h.set(0, 1, Complex64::new(0.5, -0.25));
        h.set(2, 2, Complex64::new(3.0, 0.0));
        let bytes = encode_matrix(&h);
        assert_eq!(bytes.len(), 24 + 16 * 9);
        assert_eq!(decode_matrix(&bytes).unwrap(), h);
        assert!(decode_matrix(&bytes[..30]).is_err());
    }

    #[test]
    fn potential_text() {
        let d = parse_potential("# header\n1.5\n\n-2\n0\n", "t").unwrap();
        assert_eq!(d.entries(), &[-2.0, 0.0, 1.5]);
        assert!(parse_potential("1\nx\n", "t").is_err());
    }
}
