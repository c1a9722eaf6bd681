use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use super::GrayImage;
use crate::error::{Error, Result};

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Reads an 8-bit PNG or PGM/PPM file. RGB inputs are reduced to luma with
/// the 0.299/0.587/0.114 weights; an alpha channel, if present, is ignored.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => return Err(Error::Format(format!("{other:?}"))),
        None => return Err(Error::Format("unrecognized file signature".into())),
    }
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(other.to_string()),
    })?;
    from_dynamic(decoded)
}

fn from_dynamic(img: DynamicImage) -> Result<GrayImage> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(buf) => buf.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageRgb8(buf) => {
            buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect()
        }
        DynamicImage::ImageRgba8(buf) => {
            buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect()
        }
        other => {
            return Err(Error::Format(format!(
                "{:?} (only 8-bit grayscale or RGB is supported)",
                other.color()
            )))
        }
    };
    GrayImage::new(w, h, data)
}

fn luma(r: u8, g: u8, b: u8) -> f64 {
    let v = (LUMA_R * r as f64 + LUMA_G * g as f64 + LUMA_B * b as f64) / 255.0;
    v.clamp(0.0, 1.0)
}

/// Writes `img` as 8-bit grayscale. The container is chosen from the file
/// extension: `png` or `pgm`.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = match extension(path).as_deref() {
        Some("png") => ImageFormat::Png,
        Some("pgm") => ImageFormat::Pnm,
        other => {
            return Err(Error::Format(format!(
                "cannot write extension {:?}; use .png or .pgm",
                other.unwrap_or("")
            )))
        }
    };
    let bytes: Vec<u8> = img
        .data()
        .iter()
        .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, bytes)
        .expect("buffer length matches dimensions");
    buf.save_with_format(path, format).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(other.to_string()),
    })
}

/// Writes a binary 16-bit PGM (P5, maxval 65535, big-endian samples).
pub fn save_pgm16(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    samples: &[u16],
) -> Result<()> {
    let path = path.as_ref();
    assert_eq!(samples.len(), width * height);
    let write = || -> std::io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        write!(out, "P5\n{width} {height}\n65535\n")?;
        for s in samples {
            out.write_all(&s.to_be_bytes())?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_extremes_normalize() {
        let dir = tempfile::tempdir().unwrap();
        for (byte, expected) in [(255u8, 1.0), (0u8, 0.0)] {
            let path = dir.path().join(format!("v{byte}.pgm"));
            std::fs::write(&path, [b"P5\n1 1\n255\n".as_slice(), &[byte]].concat()).unwrap();
            let img = load_image(&path).unwrap();
            assert_eq!((img.width(), img.height()), (1, 1));
            assert_eq!(img.data(), &[expected]);
        }
    }

    #[test]
    fn ascii_pgm_is_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        std::fs::write(&path, "P2\n2 1\n255\n0 51\n").unwrap();
        assert_eq!(load_image(&path).unwrap().data(), &[0.0, 0.2]);
    }

    #[test]
    fn red_png_uses_luma_weight() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("red.png");
        image::RgbImage::from_pixel(1, 1, image::Rgb([255, 0, 0]))
            .save(&path)
            .unwrap();
        let img = load_image(&path).unwrap();
        assert!((img.data()[0] - 0.299).abs() < 1e-12);
    }

    #[test]
    fn sixteen_bit_png_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        image::ImageBuffer::<image::Luma<u16>, _>::from_pixel(2, 2, image::Luma([1000u16]))
            .save(&path)
            .unwrap();
        match load_image(&path) {
            Err(Error::Format(msg)) => assert!(msg.contains("L16"), "{msg}"),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_image("/nonexistent/page.png"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn save_then_load_round_trips_8bit_values() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(4, 3, |x, y| (x * 3 + y) as f64 / 255.0);
        for name in ["p.png", "p.pgm"] {
            let path = dir.path().join(name);
            save_image(&img, &path).unwrap();
            let back = load_image(&path).unwrap();
            for (a, b) in back.data().iter().zip(img.data()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(matches!(
            save_image(&img, dir.path().join("p.jpg")),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn pgm16_header_and_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("acc.pgm");
        save_pgm16(&path, 2, 1, &[1, 65535]).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes, b"P5\n2 1\n65535\n\x00\x01\xff\xff");
    }
}
