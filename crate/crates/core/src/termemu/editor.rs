//! Modal text buffer with cursor and viewport. Rendering lives in the
//! session; this type only models state so a planner can simulate it.

use super::action::{Action, Control};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Normal,
    Insert,
}

/// Which buffer lines an edit touched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Touched {
    pub lines: Vec<usize>,
    pub all: bool,
}

impl Touched {
    fn line(l: usize) -> Touched {
        Touched {
            lines: vec![l],
            all: false,
        }
    }

    fn all() -> Touched {
        Touched {
            lines: Vec::new(),
            all: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Editor {
    pub path: Option<String>,
    lines: Vec<Vec<char>>,
    row: usize,
    col: usize,
    /// First visible buffer line.
    scroll: usize,
    /// First visible column.
    hscroll: usize,
    pub mode: Mode,
    pub dirty: bool,
    pane_width: usize,
    view_rows: usize,
}

/// Minimum gutter digits, so short files keep a stable layout.
const MIN_GUTTER_DIGITS: usize = 3;

impl Editor {
    pub fn new(pane_width: usize, view_rows: usize) -> Editor {
        Editor {
            path: None,
            lines: vec![Vec::new()],
            row: 0,
            col: 0,
            scroll: 0,
            hscroll: 0,
            mode: Mode::Normal,
            dirty: false,
            pane_width,
            view_rows: view_rows.max(1),
        }
    }

    /// Replaces the buffer with `text`, cursor at the top, normal mode.
    pub fn load(&mut self, path: &str, text: &str) {
        self.path = Some(path.to_string());
        self.lines = text.split('\n').map(|l| l.chars().collect()).collect();
        self.row = 0;
        self.col = 0;
        self.scroll = 0;
        self.hscroll = 0;
        self.mode = Mode::Normal;
        self.dirty = false;
    }

    pub fn close(&mut self) {
        let (w, h) = (self.pane_width, self.view_rows);
        *self = Editor::new(w, h);
    }

    pub fn text(&self) -> String {
        let mut s = String::with_capacity(self.lines.iter().map(|l| l.len() + 1).sum());
        for (i, l) in self.lines.iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            s.extend(l.iter());
        }
        s
    }

    pub fn lines(&self) -> &[Vec<char>] {
        &self.lines
    }

    pub fn line_len(&self, row: usize) -> usize {
        self.lines[row].len()
    }

    pub fn cursor(&self) -> (usize, usize) {
        (self.row, self.col)
    }

    pub fn scroll(&self) -> usize {
        self.scroll
    }

    pub fn hscroll(&self) -> usize {
        self.hscroll
    }

    pub fn view_rows(&self) -> usize {
        self.view_rows
    }

    pub fn gutter_width(&self) -> usize {
        let digits = self.lines.len().to_string().len().max(MIN_GUTTER_DIGITS);
        digits + 1
    }

    pub fn text_width(&self) -> usize {
        self.pane_width.saturating_sub(self.gutter_width()).max(1)
    }

    pub fn insert(&mut self, ch: char) -> Touched {
        if self.mode != Mode::Insert {
            return Touched::default();
        }
        self.dirty = true;
        if ch == '\n' {
            let tail = self.lines[self.row].split_off(self.col);
            self.lines.insert(self.row + 1, tail);
            self.row += 1;
            self.col = 0;
            self.follow();
            return Touched::all();
        }
        self.lines[self.row].insert(self.col, ch);
        self.col += 1;
        self.follow();
        Touched::line(self.row)
    }

    /// Deletes the character before the cursor, joining lines at column 0.
    pub fn backspace(&mut self) -> Touched {
        if self.mode != Mode::Insert {
            return Touched::default();
        }
        if self.col > 0 {
            self.col -= 1;
            self.lines[self.row].remove(self.col);
            self.dirty = true;
            self.follow();
            return Touched::line(self.row);
        }
        if self.row == 0 {
            return Touched::default();
        }
        let line = self.lines.remove(self.row);
        self.row -= 1;
        self.col = self.lines[self.row].len();
        self.lines[self.row].extend(line);
        self.dirty = true;
        self.follow();
        Touched::all()
    }

    pub fn up(&mut self) -> Touched {
        self.move_to_row(self.row.saturating_sub(1))
    }

    pub fn down(&mut self) -> Touched {
        self.move_to_row((self.row + 1).min(self.lines.len() - 1))
    }

    pub fn left(&mut self) -> Touched {
        self.move_to_col(self.col.saturating_sub(1))
    }

    pub fn right(&mut self) -> Touched {
        self.move_to_col((self.col + 1).min(self.lines[self.row].len()))
    }

    pub fn home(&mut self) -> Touched {
        self.move_to_col(0)
    }

    pub fn end(&mut self) -> Touched {
        self.move_to_col(self.lines[self.row].len())
    }

    pub fn page_down(&mut self) -> Touched {
        let last = self.lines.len() - 1;
        let row = (self.row + self.view_rows).min(last);
        let max_scroll = last.saturating_sub(self.view_rows - 1);
        self.scroll = (self.scroll + self.view_rows).min(max_scroll);
        self.move_to_row(row)
    }

    pub fn page_up(&mut self) -> Touched {
        let row = self.row.saturating_sub(self.view_rows);
        self.scroll = self.scroll.saturating_sub(self.view_rows);
        self.move_to_row(row)
    }

    pub fn toggle_mode(&mut self) {
        self.mode = match self.mode {
            Mode::Normal => Mode::Insert,
            Mode::Insert => Mode::Normal,
        };
    }

    /// Applies an editing or navigation action. Returns `None` for actions
    /// the editor does not handle (saving, files, tree, focus).
    pub fn apply(&mut self, action: &Action) -> Option<Touched> {
        Some(match action {
            Action::Insert(c) => self.insert(*c),
            Action::Backspace => self.backspace(),
            Action::Control(c) => match c {
                Control::Up => self.up(),
                Control::Down => self.down(),
                Control::Left => self.left(),
                Control::Right => self.right(),
                Control::Home => self.home(),
                Control::End => self.end(),
                Control::PageUp => self.page_up(),
                Control::PageDown => self.page_down(),
                Control::ToggleMode => {
                    self.toggle_mode();
                    Touched::default()
                }
                _ => return None,
            },
        })
    }

    fn move_to_row(&mut self, row: usize) -> Touched {
        let old = self.row;
        self.row = row;
        self.col = self.col.min(self.lines[row].len());
        self.follow();
        Touched {
            lines: vec![old, row],
            all: false,
        }
    }

    fn move_to_col(&mut self, col: usize) -> Touched {
        self.col = col;
        self.follow();
        Touched::line(self.row)
    }

    /// Scrolls so the cursor stays inside the viewport.
    fn follow(&mut self) {
        if self.row < self.scroll {
            self.scroll = self.row;
        } else if self.row >= self.scroll + self.view_rows {
            self.scroll = self.row + 1 - self.view_rows;
        }
        let tw = self.text_width();
        if self.col < self.hscroll {
            self.hscroll = self.col;
        } else if self.col >= self.hscroll + tw {
            self.hscroll = self.col + 1 - tw;
        }
    }

    /// Sets the viewport offset directly (clamped), keeping the cursor
    /// visible by moving it into view.
    pub fn set_scroll(&mut self, scroll: usize) {
        self.scroll = scroll.min(self.lines.len() - 1);
        if self.row < self.scroll {
            self.row = self.scroll;
        } else if self.row >= self.scroll + self.view_rows {
            self.row = self.scroll + self.view_rows - 1;
        }
        self.col = self.col.min(self.lines[self.row].len());
    }
}
