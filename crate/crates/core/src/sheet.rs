//! Contact sheets: renderings tiled in a grid, each with a text label drawn
//! into a margin strip below the image.

use crate::error::{Error, Result};
use crate::stack_io::RgbImage;

const GLYPH_W: usize = 5;
const GLYPH_H: usize = 7;
const PAD: usize = 2;
const LABEL_COLOR: [u8; 3] = [255, 255, 255];

/// 5x7 bitmaps, one row per byte, most significant of the low 5 bits on the left.
fn glyph(c: char) -> Option<[u8; GLYPH_H]> {
    Some(match c {
        '0' => [0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e],
        '1' => [0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e],
        '2' => [0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f],
        '3' => [0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e],
        '4' => [0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02],
        '5' => [0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e],
        '6' => [0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e],
        '7' => [0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e],
        '9' => [0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c],
        '-' => [0x00, 0x00, 0x00, 0x1f, 0x00, 0x00, 0x00],
        '=' => [0x00, 0x00, 0x1f, 0x00, 0x1f, 0x00, 0x00],
        'p' => [0x00, 0x00, 0x1e, 0x11, 0x1e, 0x10, 0x10],
        ' ' => [0x00; GLYPH_H],
        _ => return None,
    })
}

/// Glyph scale used for tiles of the given width.
pub fn label_scale(tile_width: usize) -> usize {
    (tile_width / 128).clamp(1, 4)
}

/// Height of the label strip under each tile.
pub fn strip_height(scale: usize) -> usize {
    GLYPH_H * scale + 2 * PAD
}

/// Draws `text` with its top-left corner at `(x, y)`, clipped to `max_x`.
fn draw_text(img: &mut RgbImage, x: usize, y: usize, max_x: usize, text: &str, scale: usize) {
    let advance = (GLYPH_W + 1) * scale;
    for (n, c) in text.chars().enumerate() {
        let Some(rows) = glyph(c).or_else(|| glyph(' ')) else { continue };
        let gx = x + n * advance;
        for (row, bits) in rows.iter().enumerate() {
            for col in 0..GLYPH_W {
                if bits & (0x10 >> col) == 0 {
                    continue;
                }
                for dy in 0..scale {
                    for dx in 0..scale {
                        let (px, py) = (gx + col * scale + dx, y + row * scale + dy);
                        if px < max_x && px < img.width() && py < img.height() {
                            img.put(px, py, LABEL_COLOR);
                        }
                    }
                }
            }
        }
    }
}

/// Columns used when none are requested: `ceil(sqrt(n))`.
pub fn default_columns(n: usize) -> usize {
    let mut c = 1;
    while c * c < n {
        c += 1;
    }
    c
}

/// Tiles equally sized images row by row. Labels go in a strip below each
/// tile and never cover image pixels.
pub fn contact_sheet(tiles: &[(String, RgbImage)], columns: usize) -> Result<RgbImage> {
    let Some((_, first)) = tiles.first() else {
        return Err(Error::EmptyImage);
    };
    if columns == 0 {
        return Err(Error::InvalidParameter("contact sheet needs at least one column".into()));
    }
    let (w, h) = (first.width(), first.height());
    if w == 0 || h == 0 {
        return Err(Error::EmptyImage);
    }
    if tiles.iter().any(|(_, t)| t.width() != w || t.height() != h) {
        return Err(Error::GeometryMismatch("contact sheet tiles differ in size".into()));
    }
    let columns = columns.min(tiles.len());
    let rows = tiles.len().div_ceil(columns);
    let scale = label_scale(w);
    let cell_h = h + strip_height(scale);
    let mut sheet = RgbImage::new(columns * w, rows * cell_h);
    for (i, (label, tile)) in tiles.iter().enumerate() {
        let (ox, oy) = ((i % columns) * w, (i / columns) * cell_h);
        for y in 0..h {
            let src = &tile.as_bytes()[y * w * 3..(y + 1) * w * 3];
            let start = ((oy + y) * sheet.width() + ox) * 3;
            sheet.as_bytes_mut()[start..start + w * 3].copy_from_slice(src);
        }
        draw_text(&mut sheet, ox + PAD, oy + h + PAD, ox + w, label, scale);
    }
    Ok(sheet)
}
