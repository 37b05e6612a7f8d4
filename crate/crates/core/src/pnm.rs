//! Binary PGM (P5) and PPM (P6) image I/O, maxval 255.
//!
//! Images map to rank-3 C×H×W tensors holding byte values as reals in
//! [0, 255]; PGM gives C = 1, PPM gives C = 3 (channel 0 = red).

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Read a P5/P6 file into a C×H×W tensor of values in [0, 255].
pub fn read_image(path: &Path) -> Result<Tensor> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut magic = [0u8; 2];
    reader
        .read_exact(&mut magic)
        .map_err(|e| Error::io(path, e))?;
    let channels = match &magic {
        b"P5" => 1usize,
        b"P6" => 3usize,
        _ => return Err(Error::format(path, "not a binary PGM (P5) or PPM (P6) file")),
    };

    let w = read_header_number(&mut reader, path)?;
    let h = read_header_number(&mut reader, path)?;
    let maxval = read_header_number(&mut reader, path)?;
    if maxval != 255 {
        return Err(Error::format(path, format!("maxval {maxval} unsupported, need 255")));
    }
    if w == 0 || h == 0 {
        return Err(Error::format(path, format!("degenerate image size {w}x{h}")));
    }
    // Single whitespace byte separates the header from raster data; already
    // consumed by read_header_number.

    let mut raster = vec![0u8; w * h * channels];
    reader
        .read_exact(&mut raster)
        .map_err(|e| Error::io(path, e))?;

    // Interleaved bytes → planar C×H×W.
    let mut data = vec![0.0f64; channels * h * w];
    for y in 0..h {
        for x in 0..w {
            for c in 0..channels {
                data[(c * h + y) * w + x] = raster[(y * w + x) * channels + c] as f64;
            }
        }
    }
    Tensor::new(&[channels, h, w], data)
}

/// Consume whitespace and `#` comment lines, then parse one decimal number.
fn read_header_number<R: BufRead>(reader: &mut R, path: &Path) -> Result<usize> {
    let mut byte = [0u8; 1];
    // Skip whitespace and comments.
    loop {
        reader.read_exact(&mut byte).map_err(|e| Error::io(path, e))?;
        match byte[0] {
            b' ' | b'\t' | b'\r' | b'\n' => continue,
            b'#' => {
                // comment runs to end of line
                loop {
                    reader.read_exact(&mut byte).map_err(|e| Error::io(path, e))?;
                    if byte[0] == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    if !byte[0].is_ascii_digit() {
        return Err(Error::format(path, format!("expected digit in header, got 0x{:02x}", byte[0])));
    }
    let mut value: usize = (byte[0] - b'0') as usize;
    loop {
        match reader.read_exact(&mut byte) {
            Ok(()) => {}
            Err(e) => return Err(Error::io(path, e)),
        }
        if byte[0].is_ascii_digit() {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((byte[0] - b'0') as usize))
                .ok_or_else(|| Error::format(path, "header number overflow"))?;
        } else {
            // The terminating whitespace byte is consumed, per the format.
            break;
        }
    }
    Ok(value)
}

/// Write a C×H×W tensor as P5 (C = 1) or P6 (C = 3). Values are rounded to
/// the nearest integer and clamped to [0, 255].
pub fn write_image(path: &Path, img: &Tensor) -> Result<()> {
    if img.rank() != 3 {
        return Err(Error::shape("write_image", format!("rank {} tensor, need C×H×W", img.rank())));
    }
    let (c, h, w) = (img.shape()[0], img.shape()[1], img.shape()[2]);
    let magic = match c {
        1 => "P5",
        3 => "P6",
        _ => return Err(Error::shape("write_image", format!("{c} channels, need 1 or 3"))),
    };
    let mut bytes = Vec::with_capacity(32 + c * h * w);
    write!(&mut bytes, "{magic}\n{w} {h}\n255\n").expect("vec write");
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let v = img.at(&[ch, y, x]).round().clamp(0.0, 255.0);
                bytes.push(v as u8);
            }
        }
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpfile(name: &str) -> std::path::PathBuf {
        let dir = tempfile::tempdir().unwrap();
        // Leak the dir so the file survives the test body.
        let path = dir.path().join(name);
        std::mem::forget(dir);
        path
    }

    #[test]
    fn pgm_round_trip() {
        let img = Tensor::new(&[1, 2, 3], vec![0.0, 10.0, 255.0, 128.0, 64.0, 1.0]).unwrap();
        let path = tmpfile("a.pgm");
        write_image(&path, &img).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn ppm_round_trip_preserves_channel_order() {
        // One pixel: pure red.
        let img = Tensor::new(&[3, 1, 1], vec![255.0, 0.0, 0.0]).unwrap();
        let path = tmpfile("b.ppm");
        write_image(&path, &img).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn header_comments_and_whitespace_are_tolerated() {
        let path = tmpfile("c.pgm");
        let mut bytes = b"P5\n# a comment line\n 2\t1 # trailing\n255\n".to_vec();
        bytes.extend_from_slice(&[7, 9]);
        fs::write(&path, bytes).unwrap();
        let img = read_image(&path).unwrap();
        assert_eq!(img.shape(), &[1, 1, 2]);
        assert_eq!(img.data(), &[7.0, 9.0]);
    }

    #[test]
    fn rejects_wrong_magic_and_maxval() {
        let path = tmpfile("d.pgm");
        fs::write(&path, b"P2\n1 1\n255\n0").unwrap();
        assert!(matches!(read_image(&path), Err(Error::Format { .. })));

        let path = tmpfile("e.pgm");
        fs::write(&path, b"P5\n1 1\n65535\n\0\0").unwrap();
        assert!(matches!(read_image(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn truncated_raster_is_an_io_error() {
        let path = tmpfile("f.pgm");
        fs::write(&path, b"P5\n4 4\n255\nxy").unwrap();
        assert!(matches!(read_image(&path), Err(Error::Io { .. })));
    }

    #[test]
    fn writer_clamps_and_rounds() {
        let img = Tensor::new(&[1, 1, 3], vec![-4.0, 300.0, 99.5]).unwrap();
        let path = tmpfile("g.pgm");
        write_image(&path, &img).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.data(), &[0.0, 255.0, 100.0]);
    }
}
