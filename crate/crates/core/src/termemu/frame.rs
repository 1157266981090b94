use std::fmt;

use super::TermError;

pub const DEFAULT_WIDTH: u16 = 160;
pub const DEFAULT_HEIGHT: u16 = 48;

/// Eight-color palette index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Color {
    Default = 0,
    Red = 1,
    Green = 2,
    Yellow = 3,
    Blue = 4,
    Magenta = 5,
    Cyan = 6,
    White = 7,
}

/// Packed cell style: bits 0-2 foreground, 3-5 background, 6 bold,
/// 7 inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Style(pub u8);

impl Style {
    pub const PLAIN: Style = Style(0);
    const BOLD: u8 = 1 << 6;
    const INVERSE: u8 = 1 << 7;

    pub const fn new(fg: Color, bg: Color) -> Style {
        Style((fg as u8) | ((bg as u8) << 3))
    }

    pub const fn bold(self) -> Style {
        Style(self.0 | Self::BOLD)
    }

    pub const fn inverse(self) -> Style {
        Style(self.0 | Self::INVERSE)
    }

    pub fn fg(self) -> u8 {
        self.0 & 0b111
    }

    pub fn bg(self) -> u8 {
        (self.0 >> 3) & 0b111
    }

    pub fn is_bold(self) -> bool {
        self.0 & Self::BOLD != 0
    }

    pub fn is_inverse(self) -> bool {
        self.0 & Self::INVERSE != 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub ch: char,
    pub style: Style,
}

impl Cell {
    pub const BLANK: Cell = Cell {
        ch: ' ',
        style: Style::PLAIN,
    };

    pub const fn new(ch: char, style: Style) -> Cell {
        Cell { ch, style }
    }
}

impl Default for Cell {
    fn default() -> Self {
        Cell::BLANK
    }
}

/// A fixed-geometry grid of cells, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    width: u16,
    height: u16,
    cells: Vec<Cell>,
}

impl Frame {
    pub fn new(width: u16, height: u16) -> Result<Frame, TermError> {
        if width == 0 || height == 0 {
            return Err(TermError::Geometry { width, height });
        }
        Ok(Frame {
            width,
            height,
            cells: vec![Cell::BLANK; width as usize * height as usize],
        })
    }

    pub fn from_cells(width: u16, height: u16, cells: Vec<Cell>) -> Result<Frame, TermError> {
        if width == 0 || height == 0 || cells.len() != width as usize * height as usize {
            return Err(TermError::Geometry { width, height });
        }
        Ok(Frame { width, height, cells })
    }

    /// Zero-sized stand-in used while a frame is temporarily moved out.
    pub(crate) fn placeholder() -> Frame {
        Frame {
            width: 0,
            height: 0,
            cells: Vec::new(),
        }
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [Cell] {
        &mut self.cells
    }

    pub fn get(&self, x: usize, y: usize) -> Option<Cell> {
        (x < self.width as usize && y < self.height as usize)
            .then(|| self.cells[y * self.width as usize + x])
    }

    /// Writes a cell; out-of-bounds writes are dropped.
    pub fn put(&mut self, x: usize, y: usize, cell: Cell) {
        if x < self.width as usize && y < self.height as usize {
            self.cells[y * self.width as usize + x] = cell;
        }
    }

    /// Writes `text` starting at `(x, y)`, clipped to `max` cells and the
    /// frame edge. Returns the number of cells written.
    pub fn put_str(&mut self, x: usize, y: usize, text: &str, style: Style, max: usize) -> usize {
        let mut n = 0;
        for ch in text.chars() {
            if n >= max || x + n >= self.width as usize {
                break;
            }
            self.put(x + n, y, Cell::new(display_char(ch), style));
            n += 1;
        }
        n
    }

    /// Fills `len` cells of row `y` from `x` with `cell`.
    pub fn fill(&mut self, x: usize, y: usize, len: usize, cell: Cell) {
        if y >= self.height as usize {
            return;
        }
        let w = self.width as usize;
        let end = (x + len).min(w);
        if x < end {
            self.cells[y * w + x..y * w + end].fill(cell);
        }
    }

    pub fn row_text(&self, y: usize) -> String {
        let w = self.width as usize;
        self.cells[y * w..(y + 1) * w].iter().map(|c| c.ch).collect()
    }

    /// Characters only, one line per row.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for y in 0..self.height as usize {
            s.push_str(self.row_text(y).trim_end());
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frame {}x{}\n{}", self.width, self.height, self.to_text())
    }
}

/// Control characters get a visible placeholder so they occupy one cell.
pub fn display_char(ch: char) -> char {
    match ch {
        '\t' => ' ',
        c if (c as u32) < 0x20 || c == '\u{7f}' => '\u{00b7}',
        c => c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn style_fits_eight_bits() {
        let s = Style::new(Color::White, Color::Blue).bold().inverse();
        assert_eq!(s.fg(), 7);
        assert_eq!(s.bg(), 4);
        assert!(s.is_bold() && s.is_inverse());
        assert_eq!(s.0, 0b1110_0111);
    }

    #[test]
    fn default_geometry_has_7680_cells() {
        let f = Frame::new(DEFAULT_WIDTH, DEFAULT_HEIGHT).unwrap();
        assert_eq!(f.cells().len(), 7680);
        assert!(f.cells().iter().all(|&c| c == Cell::BLANK));
    }

    #[test]
    fn zero_geometry_is_rejected() {
        assert!(Frame::new(0, 48).is_err());
        assert!(Frame::new(160, 0).is_err());
        assert!(Frame::from_cells(2, 2, vec![Cell::BLANK; 3]).is_err());
    }

    #[test]
    fn writes_are_clipped() {
        let mut f = Frame::new(4, 2).unwrap();
        f.put(9, 9, Cell::new('x', Style::PLAIN));
        assert_eq!(f.put_str(2, 0, "abcdef", Style::PLAIN, 10), 2);
        assert_eq!(f.row_text(0), "  ab");
        f.fill(3, 1, 10, Cell::new('-', Style::PLAIN));
        assert_eq!(f.row_text(1), "   -");
    }
}
