//! Image files: Netpbm PGM (P2 and P5, maxval 255) and, with the `png`
//! feature, PNG.

use std::fs;
use std::path::Path;

use flowsim_core::GrayImage;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Png,
}

impl ImageFormat {
    /// Sniffs the format from the leading bytes.
    pub fn detect(bytes: &[u8]) -> Option<Self> {
        match bytes {
            [b'P', b'2' | b'5', ..] => Some(ImageFormat::Pgm),
            [0x89, b'P', b'N', b'G', ..] => Some(ImageFormat::Png),
            _ => None,
        }
    }
}

/// PGM raster encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmEncoding {
    /// P2.
    Ascii,
    /// P5.
    #[default]
    Binary,
}

pub fn decode_image(bytes: &[u8], format: ImageFormat) -> Result<GrayImage> {
    match format {
        ImageFormat::Pgm => decode_pgm(bytes),
        ImageFormat::Png => decode_png(bytes),
    }
}

/// Reads an image file, detecting the format from its contents.
pub fn read_image(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let format = ImageFormat::detect(&bytes).ok_or_else(|| {
        Error::UnsupportedFormat(format!("{}: not a PGM or PNG file", path.display()))
    })?;
    decode_image(&bytes, format)
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    fs::write(path, encode_pgm(img, PgmEncoding::Binary)).map_err(|e| Error::io(path, e))
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self
                    .bytes
                    .get(self.pos)
                    .is_some_and(|&c| c != b'\n' && c != b'\r')
                {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedImage(format!(
                "expected {what} at byte {start}"
            )));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedImage(format!("{what} out of range")))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let binary = match bytes {
        [b'P', b'2', ..] => false,
        [b'P', b'5', ..] => true,
        [b'P', b'1' | b'3' | b'4' | b'6', ..] => {
            return Err(Error::UnsupportedFormat(
                "only graymap PGM (P2/P5) is supported".into(),
            ))
        }
        _ => return Err(Error::MalformedImage("missing P2/P5 magic number".into())),
    };
    let mut h = Header { bytes, pos: 2 };
    if !h
        .bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(Error::MalformedImage("bad magic number".into()));
    }
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval}, only 255 is supported"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::MalformedImage(format!(
            "dimensions {width}x{height}"
        )));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedImage("dimensions overflow".into()))?;

    let pixels = if binary {
        // exactly one whitespace byte separates maxval from the raster
        if !h.bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(Error::MalformedImage(
                "missing whitespace after maxval".into(),
            ));
        }
        let start = h.pos + 1;
        let raster = bytes
            .get(start..start.saturating_add(n))
            .filter(|r| r.len() == n)
            .ok_or_else(|| {
                Error::MalformedImage(format!(
                    "truncated raster: expected {n} bytes, found {}",
                    bytes.len() - start.min(bytes.len())
                ))
            })?;
        raster.to_vec()
    } else {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let v = h.number("sample").map_err(|_| {
                Error::MalformedImage(format!("truncated raster: expected {n} samples, found {i}"))
            })?;
            if v > 255 {
                return Err(Error::MalformedImage(format!("sample {v} exceeds maxval")));
            }
            out.push(v as u8);
        }
        out
    };
    Ok(GrayImage::new(width, height, pixels)?)
}

pub fn encode_pgm(img: &GrayImage, encoding: PgmEncoding) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    match encoding {
        PgmEncoding::Binary => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(img.pixels());
            out
        }
        PgmEncoding::Ascii => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            // keep lines under the 70 character limit
            for row in img.pixels().chunks(w) {
                for chunk in row.chunks(16) {
                    let line: Vec<String> = chunk.iter().map(u8::to_string).collect();
                    out.push_str(&line.join(" "));
                    out.push('\n');
                }
            }
            out.into_bytes()
        }
    }
}

/// Rec.601 luma, rounded to nearest.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)).round() as u8
}

#[cfg(feature = "png")]
fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::MalformedImage(e.to_string()))?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    let pixels = rgb.pixels().map(|p| luma(p[0], p[1], p[2])).collect();
    Ok(GrayImage::new(w as usize, h as usize, pixels)?)
}

#[cfg(not(feature = "png"))]
fn decode_png(_: &[u8]) -> Result<GrayImage> {
    Err(Error::UnsupportedFormat(
        "PNG support not compiled in (enable the `png` feature)".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_2x2() {
        let img = decode_pgm(b"P2\n2 2\n255\n0 255\n128 64\n").unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0, 255, 128, 64]);
    }

    #[test]
    fn white_10x10() {
        let mut bytes = b"P5 10 10 255\n".to_vec();
        bytes.extend([255u8; 100]);
        let img = decode_pgm(&bytes).unwrap();
        assert!(img.pixels().iter().all(|&v| v == 255));
    }

    #[test]
    fn header_comments() {
        let img = decode_pgm(b"P2\n# made by hand\n3 # width\n1\n255\n1 2 3").unwrap();
        assert_eq!(img.pixels(), &[1, 2, 3]);
    }

    #[test]
    fn binary_raster_may_start_with_whitespace_bytes() {
        let mut bytes = b"P5\n2 1\n255\n".to_vec();
        bytes.extend(*b"\n ");
        assert_eq!(decode_pgm(&bytes).unwrap().pixels(), &[10, 32]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            decode_pgm(b"P5\n2 2\n255\n\x00\x00"),
            Err(Error::MalformedImage(_))
        ));
        assert!(matches!(
            decode_pgm(b"P2\n2 2\n255\n0 1 2"),
            Err(Error::MalformedImage(_))
        ));
        assert!(matches!(
            decode_pgm(b"P2\n1 1\n255\n256"),
            Err(Error::MalformedImage(_))
        ));
        assert!(matches!(
            decode_pgm(b"P2\n1 1\n65535\n0"),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(matches!(
            decode_pgm(b"P6\n1 1\n255\n000"),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(matches!(
            decode_pgm(b"P2\n0 1\n255\n"),
            Err(Error::MalformedImage(_))
        ));
        assert!(matches!(
            decode_pgm(b"GIF89a"),
            Err(Error::MalformedImage(_))
        ));
        assert!(matches!(decode_pgm(b"P2"), Err(Error::MalformedImage(_))));
    }

    #[test]
    fn encodings_round_trip() {
        let img = GrayImage::new(37, 3, (0..111).map(|i| (i * 7 % 256) as u8).collect()).unwrap();
        for enc in [PgmEncoding::Ascii, PgmEncoding::Binary] {
            assert_eq!(decode_pgm(&encode_pgm(&img, enc)).unwrap(), img);
        }
    }

    #[test]
    fn ascii_lines_are_short() {
        let img = GrayImage::filled(100, 2, 255).unwrap();
        let text = String::from_utf8(encode_pgm(&img, PgmEncoding::Ascii)).unwrap();
        assert!(text.lines().all(|l| l.len() <= 70));
    }

    #[test]
    fn luma_weights() {
        assert_eq!(luma(255, 255, 255), 255);
        assert_eq!(luma(0, 0, 0), 0);
        assert_eq!(luma(255, 0, 0), 76);
        assert_eq!(luma(0, 255, 0), 150);
        assert_eq!(luma(0, 0, 255), 29);
    }

    #[test]
    fn detect() {
        assert_eq!(ImageFormat::detect(b"P5 1 1 255 x"), Some(ImageFormat::Pgm));
        assert_eq!(
            ImageFormat::detect(&[0x89, b'P', b'N', b'G', 13, 10]),
            Some(ImageFormat::Png)
        );
        assert_eq!(ImageFormat::detect(b"BM"), None);
    }

    #[cfg(feature = "png")]
    #[test]
    fn png_colour_is_reduced_to_luma() {
        let rgb = image::RgbImage::from_fn(3, 1, |x, _| match x {
            0 => image::Rgb([255, 0, 0]),
            1 => image::Rgb([10, 200, 30]),
            _ => image::Rgb([255, 255, 255]),
        });
        let mut bytes = Vec::new();
        rgb.write_to(
            &mut std::io::Cursor::new(&mut bytes),
            image::ImageFormat::Png,
        )
        .unwrap();
        assert_eq!(ImageFormat::detect(&bytes), Some(ImageFormat::Png));
        let img = decode_image(&bytes, ImageFormat::Png).unwrap();
        assert_eq!(img.pixels(), &[76, luma(10, 200, 30), 255]);
    }
}
