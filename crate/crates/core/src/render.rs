//! Binary PPM pictures of rotor blobs and sandpiles.
//!
//! The picture is the smallest origin-centred square holding every marked
//! site plus a one-pixel margin. Pixel rows follow `y` upward from the top, so
//! `y` increases downward.

use std::io::Write;

use crate::error::Result;
use crate::lattice::{Coord2, DenseGrid, Direction};
use crate::rotor::RotorBlob;
use crate::sandpile::SandGrid;

pub type Rgb = [u8; 3];

pub const BLACK: Rgb = [0, 0, 0];

/// Colours of occupied sites by rotor direction; vacant sites are black.
pub fn rotor_color(d: Direction) -> Rgb {
    match d {
        Direction::East => [255, 0, 0],
        Direction::West => [255, 255, 0],
        Direction::North => [0, 255, 0],
        Direction::South => [0, 0, 255],
    }
}

/// Colours by grain count: 0 black, 1 gray, 2 orange, 3 yellow, 4 and up blue.
pub fn grain_color(grains: u64) -> Rgb {
    match grains {
        0 => BLACK,
        1 => [128, 128, 128],
        2 => [255, 128, 0],
        3 => [255, 255, 0],
        _ => [0, 0, 255],
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB triples.
    pub rgb: Vec<u8>,
}

impl Image {
    pub fn pixel(&self, col: u32, row: u32) -> Rgb {
        let i = 3 * (row as usize * self.width as usize + col as usize);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    /// `P6\n<w> <h>\n255\n` followed by the pixels.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }

    pub fn write_ppm(&self, mut out: impl Write) -> Result<()> {
        out.write_all(&self.to_ppm())?;
        Ok(())
    }

    /// RGBA bytes with full opacity, for canvas use.
    pub fn rgba(&self) -> Vec<u8> {
        self.rgb
            .chunks_exact(3)
            .flat_map(|p| [p[0], p[1], p[2], 255])
            .collect()
    }
}

/// Pixel `(col, row)` of a square of half-width `h` shows site `(col - h, row - h)`.
fn paint<T: Clone>(
    grid: &DenseGrid<T>,
    marked: impl Fn(&T) -> bool,
    color: impl Fn(&T) -> Rgb,
) -> Image {
    let reach = grid
        .iter()
        .filter(|(_, c)| marked(c))
        .map(|(p, _)| p.sup_norm() + 1)
        .max();
    let h = reach.unwrap_or(0) as i32;
    let side = (2 * h + 1) as u32;
    let mut rgb = Vec::with_capacity(3 * side as usize * side as usize);
    for row in 0..side as i32 {
        for col in 0..side as i32 {
            let cell = grid.get(Coord2::new(col - h, row - h));
            rgb.extend_from_slice(&if marked(cell) { color(cell) } else { BLACK });
        }
    }
    Image {
        width: side,
        height: side,
        rgb,
    }
}

pub fn render_rotor(blob: &RotorBlob) -> Image {
    paint(blob.grid(), |c| c.occupied, |c| rotor_color(c.rotor()))
}

pub fn render_sandpile(pile: &SandGrid) -> Image {
    paint(
        pile.grid(),
        |c| c.grains > 0 || c.ever_occupied,
        |c| grain_color(c.grains),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::run_sequential;
    use crate::sandpile::{stabilize, Order, SandVariant};

    const GRAY: Rgb = [128, 128, 128];

    #[test]
    fn header_and_size() {
        let img = render_rotor(&run_sequential(1).unwrap());
        assert_eq!((img.width, img.height), (3, 3));
        let ppm = img.to_ppm();
        assert!(ppm.starts_with(b"P6\n3 3\n255\n"));
        assert_eq!(ppm.len(), 11 + 27);
        assert_eq!(img.pixel(1, 1), [255, 0, 0]);
        let lit = (0..3)
            .flat_map(|r| (0..3).map(move |c| (c, r)))
            .filter(|&(c, r)| img.pixel(c, r) != BLACK)
            .count();
        assert_eq!(lit, 1);
        assert_eq!(img.rgba().len(), 36);
        assert_eq!(render_rotor(&RotorBlob::new()).width, 1);
    }

    #[test]
    fn plus_shape() {
        let img = render_rotor(&run_sequential(5).unwrap());
        assert_eq!(img.width, 5);
        for (c, r) in [(2, 2), (1, 2), (3, 2), (2, 1), (2, 3)] {
            assert_ne!(img.pixel(c, r), BLACK);
        }
        // the origin has sent bugs N, W, S, E and points East again
        assert_eq!(img.pixel(2, 2), [255, 0, 0]);
        assert_eq!(img.pixel(1, 1), BLACK);
    }

    #[test]
    fn north_is_drawn_below() {
        let img = render_rotor(&run_sequential(2).unwrap());
        // origin rotor points North after one departure; (0, 1) is one row down
        assert_eq!(img.pixel(2, 2), rotor_color(Direction::North));
        assert_eq!(img.pixel(2, 3), rotor_color(Direction::East));
        assert_eq!(img.pixel(2, 1), BLACK);
    }

    #[test]
    fn sandpile_pictures() {
        let img = render_sandpile(&stabilize(4, SandVariant::Greedy, Order::Systematic).unwrap());
        assert_eq!(img.width, 3);
        assert_eq!(img.pixel(1, 1), [0, 0, 255]);
        let img = render_sandpile(&stabilize(5, SandVariant::Greedy, Order::Systematic).unwrap());
        assert_eq!(img.pixel(2, 2), GRAY);
        assert!([(1, 2), (3, 2), (2, 1), (2, 3)]
            .iter()
            .all(|&(c, r)| img.pixel(c, r) == GRAY));
        let img = render_sandpile(&stabilize(4, SandVariant::Standard, Order::Systematic).unwrap());
        assert_eq!(img.pixel(2, 2), BLACK);
        assert!([(1, 2), (3, 2), (2, 1), (2, 3)]
            .iter()
            .all(|&(c, r)| img.pixel(c, r) == GRAY));
        assert_eq!(grain_color(3), [255, 255, 0]);
        assert_eq!(grain_color(2), [255, 128, 0]);
    }
}
