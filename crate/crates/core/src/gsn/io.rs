//! Plain PBM (P1) images and the layout sidecar CSV.

use std::fmt::Write as _;
use std::path::Path;

use super::{FeatureLayout, GsnError, GsnImage, Result};

const PBM_DIGITS_PER_LINE: usize = 35;

/// Plain PBM with `1` marking a white glyph pixel.
pub fn write_pbm(img: &GsnImage, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, pbm_string(img))?;
    Ok(())
}

pub fn pbm_string(img: &GsnImage) -> String {
    let mut out = format!("P1\n{} {}\n", img.width, img.height);
    for y in 0..img.height {
        for (i, x) in (0..img.width).enumerate() {
            if i > 0 {
                out.push(if i % PBM_DIGITS_PER_LINE == 0 { '\n' } else { ' ' });
            }
            out.push(if img.get(x, y) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

pub fn read_pbm(path: impl AsRef<Path>) -> Result<GsnImage> {
    let text = std::fs::read_to_string(path)?;
    parse_pbm(&text)
}

pub(crate) fn parse_pbm(text: &str) -> Result<GsnImage> {
    let malformed = |reason: &str| GsnError::Malformed {
        kind: "PBM",
        reason: reason.to_string(),
    };
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    if tokens.next() != Some("P1") {
        return Err(malformed("missing P1 magic"));
    }
    let mut dim = || -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| malformed("bad dimensions"))
    };
    let width = dim()?;
    let height = dim()?;
    let mut pixels = Vec::with_capacity(width * height);
    for token in tokens {
        for ch in token.chars() {
            match ch {
                '0' => pixels.push(false),
                '1' => pixels.push(true),
                _ => return Err(malformed("raster must contain only 0/1")),
            }
        }
    }
    if pixels.len() != width * height {
        return Err(malformed("raster size does not match header"));
    }
    GsnImage::from_pixels(width, height, pixels)
}

/// `feature_name,grid_x,grid_y`
pub fn write_layout_csv(layout: &FeatureLayout, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("feature_name,grid_x,grid_y\n");
    for (name, (x, y)) in layout.feature_names.iter().zip(&layout.coords) {
        writeln!(out, "{name},{x},{y}").expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read a layout file; coordinates must fit the given grid.
pub fn read_layout_csv(path: impl AsRef<Path>, grid_width: usize, grid_height: usize) -> Result<FeatureLayout> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["feature_name", "grid_x", "grid_y"] {
        return Err(GsnError::Malformed {
            kind: "layout",
            reason: "expected header feature_name,grid_x,grid_y".into(),
        });
    }
    let mut names = Vec::new();
    let mut coords = Vec::new();
    for record in reader.records() {
        let record = record?;
        let parse = |i: usize| -> Result<usize> {
            record
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| GsnError::Malformed {
                    kind: "layout",
                    reason: format!("bad coordinate in {record:?}"),
                })
        };
        names.push(record.get(0).unwrap_or("").to_string());
        coords.push((parse(1)?, parse(2)?));
    }
    FeatureLayout::new(grid_width, grid_height, coords, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsn::rasterize_glyph;

    #[test]
    fn pbm_round_trip_wide_image() {
        let mut img = GsnImage::blank(80, 7);
        rasterize_glyph(&mut img, 40.0, 3.5, 6.0, 20.0);
        img.set(79, 6, true);
        let text = pbm_string(&img);
        assert!(text.starts_with("P1\n80 7\n"));
        assert!(text.lines().all(|l| l.len() <= 70));
        assert_eq!(parse_pbm(&text).unwrap(), img);
    }

    #[test]
    fn pbm_rejects_garbage() {
        assert!(parse_pbm("P4\n1 1\n0").is_err());
        assert!(parse_pbm("P1\n2 2\n0 1 1").is_err());
        assert!(parse_pbm("P1\n# comment\n1 1\n2").is_err());
        assert!(parse_pbm("P1\n# comment\n1 1\n1").is_ok());
    }

    #[test]
    fn layout_round_trip() {
        let layout = FeatureLayout::new(4, 3, vec![(0, 2), (3, 1)], vec!["a".into(), "b".into()]).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_layout_csv(&layout, f.path()).unwrap();
        assert_eq!(read_layout_csv(f.path(), 4, 3).unwrap(), layout);
        assert!(read_layout_csv(f.path(), 2, 2).is_err());
    }
}
