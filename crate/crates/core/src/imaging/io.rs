//! 8-bit PNG and binary PGM/PPM reading and writing.

use std::path::Path;

use image::{DynamicImage, ExtendedColorType, ImageError, ImageFormat};

use super::{quantize, Plane, RgbdImage};
use crate::error::{Error, Result};

fn map_image_error(path: &Path, err: ImageError) -> Error {
    match err {
        ImageError::IoError(source) => Error::io(path, source),
        other => Error::Format {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

fn output_format(path: &Path) -> Result<ImageFormat> {
    match ImageFormat::from_path(path) {
        Ok(fmt @ (ImageFormat::Png | ImageFormat::Pnm)) => Ok(fmt),
        _ => Err(Error::Format {
            path: path.to_path_buf(),
            reason: "output must be .png, .pgm or .ppm".into(),
        }),
    }
}

fn open(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        ));
    }
    image::open(path).map_err(|e| map_image_error(path, e))
}

/// Reads an 8-bit RGB (or RGBA, alpha dropped) color image.
pub fn read_color(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<[u8; 3]>)> {
    let path = path.as_ref();
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = match img {
        DynamicImage::ImageRgb8(buf) => buf.pixels().map(|p| p.0).collect(),
        DynamicImage::ImageRgba8(buf) => buf.pixels().map(|p| [p.0[0], p.0[1], p.0[2]]).collect(),
        other => {
            return Err(Error::Format {
                path: path.to_path_buf(),
                reason: format!("color image must be 8-bit RGB, found {:?}", other.color()),
            })
        }
    };
    Ok((w, h, pixels))
}

/// Reads an 8-bit single-channel depth map.
pub fn read_depth(path: impl AsRef<Path>) -> Result<Plane> {
    let path = path.as_ref();
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => {
            Plane::new(w, h, buf.into_raw().into_iter().map(f64::from).collect())
        }
        other => Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("depth map must be 8-bit grayscale, found {:?}", other.color()),
        }),
    }
}

pub fn load_rgbd(color_path: impl AsRef<Path>, depth_path: impl AsRef<Path>) -> Result<RgbdImage> {
    let (w, h, rgb) = read_color(color_path)?;
    let depth = read_depth(depth_path)?;
    if depth.dims() != (w, h) {
        return Err(Error::Alignment {
            color: (w, h),
            depth: depth.dims(),
        });
    }
    RgbdImage::new(w, h, rgb, depth)
}

pub fn write_gray(path: impl AsRef<Path>, width: usize, height: usize, data: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let format = output_format(path)?;
    image::save_buffer_with_format(
        path,
        data,
        width as u32,
        height as u32,
        ExtendedColorType::L8,
        format,
    )
    .map_err(|e| map_image_error(path, e))
}

/// Writes a depth plane as 8-bit grayscale; values are clamped to [0, 255]
/// and rounded half away from zero.
pub fn write_depth(path: impl AsRef<Path>, depth: &Plane) -> Result<()> {
    let bytes: Vec<u8> = depth.as_slice().iter().map(|&v| quantize(v) as u8).collect();
    write_gray(path, depth.width(), depth.height(), &bytes)
}

pub fn write_color(path: impl AsRef<Path>, width: usize, height: usize, rgb: &[[u8; 3]]) -> Result<()> {
    let path = path.as_ref();
    let format = output_format(path)?;
    let bytes: Vec<u8> = rgb.iter().flatten().copied().collect();
    image::save_buffer_with_format(
        path,
        &bytes,
        width as u32,
        height as u32,
        ExtendedColorType::Rgb8,
        format,
    )
    .map_err(|e| map_image_error(path, e))
}

pub fn save_rgbd(image: &RgbdImage, color_path: impl AsRef<Path>, depth_path: impl AsRef<Path>) -> Result<()> {
    write_color(color_path, image.width(), image.height(), image.rgb())?;
    write_depth(depth_path, image.depth())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let plane = Plane::from_fn(13, 7, |r, c| ((r * 37 + c * 11) % 256) as f64);
        for name in ["d.pgm", "d.png"] {
            let path = dir.path().join(name);
            write_depth(&path, &plane).unwrap();
            assert_eq!(read_depth(&path).unwrap(), plane);
        }
    }

    #[test]
    fn white_color_with_mid_depth() {
        let dir = tempfile::tempdir().unwrap();
        let c = dir.path().join("c.ppm");
        let d = dir.path().join("d.pgm");
        write_color(&c, 1, 1, &[[255, 255, 255]]).unwrap();
        write_depth(&d, &Plane::filled(1, 1, 128.0)).unwrap();
        let img = load_rgbd(&c, &d).unwrap();
        assert_eq!(img.depth().get(0, 0), 128.0);
        assert!(img.lab_a().get(0, 0).abs() < 0.01);
        assert!(img.lab_b().get(0, 0).abs() < 0.01);
    }

    #[test]
    fn mismatched_sizes_are_an_alignment_error() {
        let dir = tempfile::tempdir().unwrap();
        let c = dir.path().join("c.png");
        let d = dir.path().join("d.png");
        write_color(&c, 3, 2, &[[1, 2, 3]; 6]).unwrap();
        write_depth(&d, &Plane::filled(2, 3, 0.0)).unwrap();
        assert!(matches!(load_rgbd(&c, &d), Err(Error::Alignment { .. })));
    }

    #[test]
    fn wrong_channel_layout_and_bit_depth_are_format_errors() {
        let dir = tempfile::tempdir().unwrap();
        let c = dir.path().join("c.png");
        write_color(&c, 2, 2, &[[1, 2, 3]; 4]).unwrap();
        assert!(matches!(read_depth(&c), Err(Error::Format { .. })));

        let wide = dir.path().join("d16.png");
        let buf: Vec<u8> = vec![0, 1, 2, 3, 4, 5, 6, 7];
        image::save_buffer(&wide, &buf, 2, 2, ExtendedColorType::L16).unwrap();
        assert!(matches!(read_depth(&wide), Err(Error::Format { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_depth("/definitely/not/here.png").unwrap_err();
        assert_eq!(err.category(), "file");
    }

    #[test]
    fn unsupported_output_extension() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_depth(dir.path().join("d.jpg"), &Plane::filled(1, 1, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }
}
